use std::f64::consts::PI;

use casimir_core::bridges::{generate_unit_bridge, substream, EXTREME_VALUE_SHIFT};
use casimir_core::stats::{ks_statistic, mean_and_error};
use casimir_core::{EnsembleSpec, LoopEnsemble, UnitBridge, Vec2};

fn bridges(seed: u64, count: u64, n: usize) -> Vec<UnitBridge> {
    (0..count)
        .map(|i| generate_unit_bridge(&mut substream(seed, i), n).unwrap())
        .collect()
}

#[test]
fn midpoint_variance_and_mean() {
    let n = 16;
    let loops = bridges(1, 100_000, n);
    for coord in [0, 1] {
        let get = |b: &UnitBridge| {
            let p = b.points()[n / 2];
            if coord == 0 {
                p.x
            } else {
                p.y
            }
        };
        let xs: Vec<f64> = loops.iter().map(get).collect();
        let (m, se) = mean_and_error(&xs);
        assert!(m.abs() < 3.0 * se, "mean {m} ± {se}");
        let sq: Vec<f64> = xs.iter().map(|x| x * x).collect();
        let (v, se) = mean_and_error(&sq);
        assert!((v - 0.25).abs() < 3.0 * se, "variance {v} ± {se}");
    }
}

#[test]
fn covariance_matches_bridge_kernel() {
    let n = 16;
    let loops = bridges(2, 100_000, n);
    let pairs = [
        (1, 1),
        (1, 8),
        (2, 5),
        (3, 12),
        (4, 4),
        (5, 15),
        (6, 10),
        (7, 9),
        (8, 8),
        (11, 14),
    ];
    for (j, k) in pairs {
        let prod: Vec<f64> = loops.iter().map(|b| b.points()[j].x * b.points()[k].x).collect();
        let (c, se) = mean_and_error(&prod);
        let expect = (j as f64 / n as f64) * (1.0 - k as f64 / n as f64);
        assert!((c - expect).abs() < 3.0 * se, "({j},{k}): {c} ± {se} vs {expect}");
    }
}

#[test]
fn rotated_extents_share_the_distribution() {
    let loops = bridges(3, 10_000, 64);
    let dy: Vec<f64> = loops.iter().map(|b| b.width_y()).collect();
    let dx_rot: Vec<f64> = loops
        .iter()
        .map(|b| b.rotated_duplicates(6).unwrap()[2].width_x())
        .collect();
    // two-sample critical value at 1% for n = m = 10⁴
    let critical = 1.628 * (2.0f64 / 10_000.0).sqrt();
    assert!(ks_statistic(&dx_rot, &dy) < critical);
}

#[test]
fn rotation_preserves_pinning() {
    for b in bridges(4, 20, 32) {
        for r in b.rotated_duplicates(6).unwrap() {
            assert_eq!(r.points()[0], Vec2::ZERO);
            assert_eq!(r.points()[32], Vec2::ZERO);
        }
    }
}

#[test]
fn corrected_range_moments() {
    // range R of a standard bridge: E[R] = √(π/2), E[R²] = π²/6
    let n = 256;
    let margin = EXTREME_VALUE_SHIFT / (n as f64).sqrt();
    let loops = bridges(5, 40_000, n);
    let r: Vec<f64> = loops
        .iter()
        .map(|b| UnitBridge::from_points(b.points().to_vec(), margin).unwrap().width_x())
        .collect();
    let (m1, se1) = mean_and_error(&r);
    let sq: Vec<f64> = r.iter().map(|x| x * x).collect();
    let (m2, se2) = mean_and_error(&sq);
    assert!((m1 - (PI / 2.0).sqrt()).abs() < 3.0 * se1 + 2e-3, "E[R] = {m1} ± {se1}");
    assert!((m2 - PI * PI / 6.0).abs() < 3.0 * se2 + 4e-3, "E[R²] = {m2} ± {se2}");
    // without the margin the vertex range is visibly short
    let raw: Vec<f64> = loops.iter().map(|b| b.width_x()).collect();
    let (raw_mean, _) = mean_and_error(&raw);
    assert!(raw_mean < (PI / 2.0).sqrt() - 0.02);
}

#[test]
fn ensembles_are_reproducible() {
    let spec = EnsembleSpec::new(77).with_loops(50).with_points(64);
    let a = LoopEnsemble::generate(&spec).unwrap();
    let b = LoopEnsemble::generate(&spec).unwrap();
    assert_eq!(a.parents(), b.parents());
    let other = LoopEnsemble::generate(&EnsembleSpec { seed: 78, ..spec }).unwrap();
    assert_ne!(a.parents()[0], other.parents()[0]);
}

#[test]
fn rescaling_examples() {
    let b = generate_unit_bridge(&mut substream(6, 0), 32).unwrap();
    let same = b.rescale_translate(1.0, Vec2::ZERO).unwrap();
    assert_eq!(same, b.points());
    let doubled = b.rescale_translate(4.0, Vec2::new(3.0, -1.0)).unwrap();
    let d = UnitBridge::from_points(doubled.iter().map(|&p| p - Vec2::new(3.0, -1.0)).collect(), 0.0).unwrap();
    assert!((d.width_x() - 2.0 * b.width_x()).abs() < 1e-14);
    assert!((d.width_y() - 2.0 * b.width_y()).abs() < 1e-14);
    assert!(b.rescale_translate(0.0, Vec2::ZERO).is_err());
}
