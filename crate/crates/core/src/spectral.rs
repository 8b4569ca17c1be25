//! Feynman–Kac quantities at fixed proper time β.
//!
//! A loop survives object `k` with probability `exp(−∫ V_k dτ)`; Dirichlet
//! objects kill any loop touching them. The irreducible spectral function of
//! a set `s` is `(−1)^{|s|} ∫ dx P̃(x; β)/(2πβ)`, where `P̃` is the probability
//! that the loop through `x` is killed by every object in `s`.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bridges::{position_stream, EnsembleSpec, LoopEnsemble};
use crate::error::{require_positive, Error, Result};
use crate::geometry::{Rect, Vec2};
use crate::stats::{jackknife_mean, mean, pairwise_sum};

pub const MAX_SUBSET_OBJECTS: usize = 16;
/// Sampling boxes must extend this many `√β` past every object.
pub const BOX_INFLATION: f64 = 5.0;
const KILL_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strength {
    Soft(f64),
    Dirichlet,
}

/// Positive potential supported on a closed disk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialObject {
    pub center: Vec2,
    pub radius: f64,
    pub strength: Strength,
}

impl PotentialObject {
    pub fn new(center: Vec2, radius: f64, strength: Strength) -> Result<Self> {
        require_positive("radius", radius)?;
        if let Strength::Soft(v) = strength {
            if v.is_nan() || v < 0.0 {
                return Err(Error::NegativePotential);
            }
            require_positive("strength", v)?;
        }
        Ok(PotentialObject {
            center,
            radius,
            strength,
        })
    }

    pub fn soft_disk(center: Vec2, radius: f64, strength: f64) -> Result<Self> {
        PotentialObject::new(center, radius, Strength::Soft(strength))
    }

    pub fn dirichlet_disk(center: Vec2, radius: f64) -> Result<Self> {
        PotentialObject::new(center, radius, Strength::Dirichlet)
    }

    pub fn translated(&self, by: Vec2) -> Self {
        PotentialObject {
            center: self.center + by,
            ..*self
        }
    }

    pub fn bounds(&self) -> Rect {
        let r = Vec2::new(self.radius, self.radius);
        Rect {
            min: self.center - r,
            max: self.center + r,
        }
    }

    pub fn is_dirichlet(&self) -> bool {
        matches!(self.strength, Strength::Dirichlet)
    }

    fn contains(&self, p: Vec2) -> bool {
        (p - self.center).norm_sq() <= self.radius * self.radius
    }

    /// Fraction of the segment `a → b` inside the disk.
    fn segment_fraction(&self, a: Vec2, b: Vec2) -> f64 {
        let d = b - a;
        let f = a - self.center;
        let dd = d.norm_sq();
        if dd == 0.0 {
            return if self.contains(a) { 1.0 } else { 0.0 };
        }
        let half_b = f.dot(d);
        let c = f.norm_sq() - self.radius * self.radius;
        let disc = half_b * half_b - dd * c;
        if disc < 0.0 {
            return 0.0;
        }
        let root = disc.sqrt();
        let s0 = ((-half_b - root) / dd).max(0.0);
        let s1 = ((-half_b + root) / dd).min(1.0);
        (s1 - s0).max(0.0)
    }

    fn touches_segment(&self, a: Vec2, b: Vec2) -> bool {
        if self.contains(a) || self.contains(b) {
            return true;
        }
        let d = b - a;
        let dd = d.norm_sq();
        if dd == 0.0 {
            return false;
        }
        let s = ((self.center - a).dot(d) / dd).clamp(0.0, 1.0);
        self.contains(a + d * s)
    }

    /// `∫ V dτ` along the polyline, with `dt` time per segment. Infinite for
    /// a Dirichlet object the path touches.
    pub fn killing_exponent(&self, path: &[Vec2], dt: f64) -> f64 {
        match self.strength {
            Strength::Dirichlet => {
                let hit = if path.len() == 1 {
                    self.contains(path[0])
                } else {
                    path.windows(2).any(|w| self.touches_segment(w[0], w[1]))
                };
                if hit {
                    f64::INFINITY
                } else {
                    0.0
                }
            }
            Strength::Soft(v) => v * self.occupation_time(path, dt),
        }
    }

    /// Time the linearly interpolated path spends inside the disk.
    pub fn occupation_time(&self, path: &[Vec2], dt: f64) -> f64 {
        let fractions: Vec<f64> = path.windows(2).map(|w| self.segment_fraction(w[0], w[1])).collect();
        dt * pairwise_sum(&fractions)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralEstimate {
    pub value: f64,
    pub std_error: f64,
    pub beta: f64,
}

fn check_path(path: &[Vec2], dt: f64) -> Result<()> {
    if path.is_empty() {
        return Err(Error::EmptyPath);
    }
    require_positive("dt", dt)
}

/// `exp(−Σ_k ∫ V_k dτ)`; zero if a Dirichlet object is touched.
pub fn survival_probability(path: &[Vec2], dt: f64, objects: &[PotentialObject]) -> Result<f64> {
    check_path(path, dt)?;
    let exponent: f64 = objects.iter().map(|o| o.killing_exponent(path, dt)).sum();
    Ok((-exponent).exp())
}

/// All subsets `r` of an `s_size`-object set with the sign
/// `(−1)^{s_size}(−1)^{|r|}` of the irreducible combination.
pub fn inclusion_exclusion_terms(s_size: usize) -> Result<Vec<(u32, i32)>> {
    if s_size > MAX_SUBSET_OBJECTS {
        return Err(Error::SubsetExplosion(s_size));
    }
    if s_size == 0 {
        return Err(Error::invalid("objects", "at least one object is required"));
    }
    Ok((0..1u32 << s_size)
        .map(|mask| {
            let parity = (s_size as u32 + mask.count_ones()) % 2;
            (mask, if parity == 0 { 1 } else { -1 })
        })
        .collect())
}

/// Survival probability for the objects selected by `mask`, from the
/// per-object exponents of one path.
fn subset_survival(exponents: &[f64], mask: u32) -> f64 {
    let total: f64 = exponents
        .iter()
        .enumerate()
        .filter(|(k, _)| mask & (1 << k) != 0)
        .map(|(_, &e)| e)
        .sum();
    (-total).exp()
}

fn exponents(path: &[Vec2], dt: f64, objects: &[PotentialObject]) -> Vec<f64> {
    objects.iter().map(|o| o.killing_exponent(path, dt)).collect()
}

/// `Σ_{r⊆s} (−1)^{|r|} p_r`, the probability of being killed by every object.
pub fn kill_all_probability(path: &[Vec2], dt: f64, objects: &[PotentialObject]) -> Result<f64> {
    check_path(path, dt)?;
    kill_all_from_exponents(&exponents(path, dt, objects))
}

fn kill_all_from_exponents(exponents: &[f64]) -> Result<f64> {
    let n = exponents.len();
    let overall = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let terms: Vec<f64> = inclusion_exclusion_terms(n)?
        .into_iter()
        .map(|(mask, sign)| sign as f64 * subset_survival(exponents, mask))
        .collect();
    let p = overall * pairwise_sum(&terms);
    if !(-KILL_TOLERANCE..=1.0 + KILL_TOLERANCE).contains(&p) {
        return Err(Error::InclusionExclusion(p));
    }
    Ok(p.clamp(0.0, 1.0))
}

/// Full alternating sum `Σ_{u⊆s} (−1)^{|s|−|u|} p_u` for a path that touches
/// only the objects in the proper subset `mask`; it vanishes identically.
pub fn cancellation_check(objects: &[PotentialObject], mask: u32, path: &[Vec2], dt: f64) -> f64 {
    let n = objects.len();
    debug_assert!(
        n <= MAX_SUBSET_OBJECTS && mask < (1 << n) - 1,
        "mask must be a proper subset"
    );
    let e = exponents(path, dt, objects);
    alternating_subset_sum(n, |u| subset_survival(&e, u))
}

/// `Σ_{u⊆{0..n}} (−1)^{n−|u|} p(u)`.
pub fn alternating_subset_sum(n: usize, p: impl Fn(u32) -> f64) -> f64 {
    let terms: Vec<f64> = (0..1u32 << n)
        .map(|u| {
            let sign = if (n as u32 - u.count_ones()).is_multiple_of(2) {
                1.0
            } else {
                -1.0
            };
            sign * p(u)
        })
        .collect();
    pairwise_sum(&terms)
}

/// Bounding box of `objects` inflated by `5√β`.
pub fn default_sampling_box(objects: &[PotentialObject], beta: f64) -> Result<Rect> {
    let first = objects
        .first()
        .ok_or_else(|| Error::invalid("objects", "at least one object is required"))?;
    let mut b = first.bounds();
    for o in &objects[1..] {
        let ob = o.bounds();
        b.min = Vec2::new(b.min.x.min(ob.min.x), b.min.y.min(ob.min.y));
        b.max = Vec2::new(b.max.x.max(ob.max.x), b.max.y.max(ob.max.y));
    }
    Ok(b.inflate(BOX_INFLATION * beta.sqrt()))
}

fn check_box(objects: &[PotentialObject], beta: f64, sampling_box: &Rect) -> Result<()> {
    let margin = BOX_INFLATION * beta.sqrt();
    if objects.iter().all(|o| sampling_box.covers(&o.bounds().inflate(margin))) {
        Ok(())
    } else {
        Err(Error::SamplingBoxTooSmall)
    }
}

/// Per-parent-loop averages of the kill-all indicator for several object
/// sets sharing the same loops and positions.
fn kill_blocks(
    object_sets: &[Vec<PotentialObject>],
    beta: f64,
    ensemble: &LoopEnsemble,
    sampling_box: &Rect,
) -> Result<Vec<Vec<f64>>> {
    let spec = *ensemble.spec();
    let scale = beta.sqrt();
    let dt = beta / spec.points_per_loop as f64;
    (0..ensemble.len())
        .into_par_iter()
        .map(|i| {
            let mut rng = position_stream(spec.seed, i as u64);
            let mut sums = vec![Vec::new(); object_sets.len()];
            for member in ensemble.group(i) {
                let reach = scale * member.radius();
                for _ in 0..spec.positions_per_loop {
                    let (u, v): (f64, f64) = (rng.random(), rng.random());
                    let x = sampling_box.at(u, v);
                    let mut path: Option<Vec<Vec2>> = None;
                    for (set, acc) in object_sets.iter().zip(sums.iter_mut()) {
                        // a loop that cannot reach some object is never killed by all
                        let reachable = set.iter().all(|o| (o.center - x).norm() <= reach + o.radius);
                        let kill = if reachable {
                            let p =
                                path.get_or_insert_with(|| member.rescale_translate(beta, x).expect("beta validated"));
                            kill_all_probability(p, dt, set)?
                        } else {
                            0.0
                        };
                        acc.push(kill);
                    }
                }
            }
            Ok(sums.iter().map(|s| mean(s)).collect())
        })
        .collect()
}

fn summarize(blocks: &[f64], n_objects: usize, beta: f64, area: f64) -> SpectralEstimate {
    let (m, err) = jackknife_mean(blocks);
    let sign = if n_objects.is_multiple_of(2) { 1.0 } else { -1.0 };
    let norm = area / (2.0 * PI * beta);
    SpectralEstimate {
        value: sign * m * norm,
        std_error: err * norm,
        beta,
    }
}

/// Monte Carlo estimate of `φ̃_s(β) = (−1)^{|s|} ∫ dx P̃(x; β)/(2πβ)` with
/// positions uniform in `sampling_box`.
pub fn estimate_irreducible_spectral_density(
    objects: &[PotentialObject],
    beta: f64,
    spec: &EnsembleSpec,
    sampling_box: &Rect,
) -> Result<SpectralEstimate> {
    let ensemble = LoopEnsemble::generate(spec)?;
    estimate_irreducible_spectral_density_on(objects, beta, &ensemble, sampling_box)
}

pub fn estimate_irreducible_spectral_density_on(
    objects: &[PotentialObject],
    beta: f64,
    ensemble: &LoopEnsemble,
    sampling_box: &Rect,
) -> Result<SpectralEstimate> {
    require_positive("beta", beta)?;
    inclusion_exclusion_terms(objects.len())?;
    check_box(objects, beta, sampling_box)?;
    let sets = vec![objects.to_vec()];
    let blocks: Vec<f64> = kill_blocks(&sets, beta, ensemble, sampling_box)?
        .into_iter()
        .map(|b| b[0])
        .collect();
    Ok(summarize(&blocks, objects.len(), beta, sampling_box.area()))
}

/// `φ̃₁₂(β)` along a separation sequence together with paired differences
/// between consecutive separations.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityCurve {
    pub separations: Vec<f64>,
    pub estimates: Vec<SpectralEstimate>,
    /// `(φ̃_k − φ̃_{k+1}, jackknife error)` on common loops and positions.
    pub steps: Vec<(f64, f64)>,
}

/// Places `obj2` so that the gap between the supports along x equals
/// `separation`, keeping its y coordinate.
pub fn place_at_separation(obj1: &PotentialObject, obj2: &PotentialObject, separation: f64) -> Result<PotentialObject> {
    if !(separation > 0.0) || !separation.is_finite() {
        return Err(Error::NotSeparable);
    }
    let x = obj1.center.x + obj1.radius + obj2.radius + separation;
    Ok(PotentialObject {
        center: Vec2::new(x, obj2.center.y),
        ..*obj2
    })
}

pub fn monotonicity_curve(
    obj1: &PotentialObject,
    obj2: &PotentialObject,
    separations: &[f64],
    beta: f64,
    spec: &EnsembleSpec,
) -> Result<MonotonicityCurve> {
    let ensemble = LoopEnsemble::generate(spec)?;
    monotonicity_curve_on(obj1, obj2, separations, beta, &ensemble)
}

pub fn monotonicity_curve_on(
    obj1: &PotentialObject,
    obj2: &PotentialObject,
    separations: &[f64],
    beta: f64,
    ensemble: &LoopEnsemble,
) -> Result<MonotonicityCurve> {
    require_positive("beta", beta)?;
    if separations.is_empty() {
        return Err(Error::invalid("separations", "at least one separation is required"));
    }
    if separations.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("separations", "must be strictly increasing"));
    }
    let sets = separations
        .iter()
        .map(|&s| Ok(vec![*obj1, place_at_separation(obj1, obj2, s)?]))
        .collect::<Result<Vec<_>>>()?;
    let all: Vec<PotentialObject> = sets.iter().flatten().copied().collect();
    let sampling_box = default_sampling_box(&all, beta)?;
    let blocks = kill_blocks(&sets, beta, ensemble, &sampling_box)?;
    let area = sampling_box.area();
    let estimates = (0..sets.len())
        .map(|k| {
            let col: Vec<f64> = blocks.iter().map(|b| b[k]).collect();
            summarize(&col, 2, beta, area)
        })
        .collect();
    let steps = (0..sets.len().saturating_sub(1))
        .map(|k| {
            let diff: Vec<f64> = blocks.iter().map(|b| b[k] - b[k + 1]).collect();
            let est = summarize(&diff, 2, beta, area);
            (est.value, est.std_error)
        })
        .collect();
    Ok(MonotonicityCurve {
        separations: separations.to_vec(),
        estimates,
        steps,
    })
}
