//! Discretized standard Brownian bridges in the plane.
//!
//! A unit bridge is `x_k = W_k − (k/N)·W_N` for a Gaussian random walk `W`
//! with per-coordinate step variance `1/N`; both ends sit exactly at the
//! origin. Each loop index draws from its own ChaCha8 stream, so ensembles
//! are identical however the work is scheduled.

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{projection_extent, Vec2};

/// `−ζ(1/2)/√(2π)`: expected overshoot of a continuous Brownian maximum past
/// the maximum of its Gaussian-walk skeleton, in units of the step deviation.
pub const EXTREME_VALUE_SHIFT: f64 = 0.582_597_157_939_010_6;

pub const DEFAULT_POINTS: usize = 1024;
pub const DEFAULT_LOOPS: usize = 1000;
pub const DEFAULT_ROTATIONS: usize = 6;
pub const DEFAULT_POSITIONS: usize = 16;
pub const MAX_ROTATIONS: usize = 6;

/// Stream offset for position sampling, disjoint from loop streams.
const POSITION_STREAM_BASE: u64 = 1 << 63;

/// Extent shift applied per side for an `n`-segment unit bridge.
pub fn continuity_margin(n: usize) -> f64 {
    EXTREME_VALUE_SHIFT / (n as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitBridge {
    points: Vec<Vec2>,
    margin: f64,
    x_extent: (f64, f64),
    y_extent: (f64, f64),
}

fn check_segments(n: usize) -> Result<()> {
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::invalid(
            "points_per_loop",
            format!("must be a power of two and at least 2, got {n}"),
        ));
    }
    Ok(())
}

impl UnitBridge {
    /// Wraps an explicit closed polyline starting and ending at the origin.
    ///
    /// `margin` widens every directional extent on both sides; generated
    /// bridges use [`continuity_margin`], exact polylines use zero.
    pub fn from_points(points: Vec<Vec2>, margin: f64) -> Result<Self> {
        check_segments(points.len().saturating_sub(1))?;
        if points[0] != Vec2::ZERO || points[points.len() - 1] != Vec2::ZERO {
            return Err(Error::invalid("points", "bridge must start and end at the origin"));
        }
        if !(margin >= 0.0 && margin.is_finite()) {
            return Err(Error::invalid("margin", "must be finite and non-negative"));
        }
        Ok(Self::build(points, margin))
    }

    fn build(points: Vec<Vec2>, margin: f64) -> Self {
        let x_extent = projection_extent(&points, Vec2::new(1.0, 0.0)).expect("nonempty");
        let y_extent = projection_extent(&points, Vec2::new(0.0, 1.0)).expect("nonempty");
        UnitBridge {
            points,
            margin,
            x_extent,
            y_extent,
        }
    }

    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    /// Number of segments N.
    pub fn segments(&self) -> usize {
        self.points.len() - 1
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    /// Vertex extent along `direction`, widened by the margin.
    pub fn extent(&self, direction: Vec2) -> (f64, f64) {
        let (lo, hi) = if direction == Vec2::new(1.0, 0.0) {
            self.x_extent
        } else if direction == Vec2::new(0.0, 1.0) {
            self.y_extent
        } else {
            projection_extent(&self.points, direction).expect("nonempty")
        };
        (lo - self.margin, hi + self.margin)
    }

    /// Δx including the margin.
    pub fn width_x(&self) -> f64 {
        let (lo, hi) = self.extent(Vec2::new(1.0, 0.0));
        hi - lo
    }

    /// Δy including the margin.
    pub fn width_y(&self) -> f64 {
        let (lo, hi) = self.extent(Vec2::new(0.0, 1.0));
        hi - lo
    }

    /// Largest distance of a vertex from the origin.
    pub fn radius(&self) -> f64 {
        self.points.iter().map(|p| p.norm()).fold(0.0, f64::max)
    }

    /// The loop `x + √β·ℓ` in user length units.
    pub fn rescale_translate(&self, beta: f64, x: Vec2) -> Result<Vec<Vec2>> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::invalid("beta", format!("must be positive, got {beta}")));
        }
        let s = beta.sqrt();
        Ok(self.points.iter().map(|&p| x + p * s).collect())
    }

    pub fn rotated(&self, angle: f64) -> UnitBridge {
        let mut pts: Vec<Vec2> = self.points.iter().map(|p| p.rotate(angle)).collect();
        let last = pts.len() - 1;
        pts[0] = Vec2::ZERO;
        pts[last] = Vec2::ZERO;
        Self::build(pts, self.margin)
    }

    /// `k` copies rotated by `2πj/(k+1)`, `j = 1..=k`.
    pub fn rotated_duplicates(&self, k: usize) -> Result<Vec<UnitBridge>> {
        if k > MAX_ROTATIONS {
            return Err(Error::Rotations);
        }
        Ok((1..=k)
            .map(|j| self.rotated(2.0 * PI * j as f64 / (k + 1) as f64))
            .collect())
    }

    /// Keeps every `factor`-th vertex. The result is distributed exactly as
    /// an `N/factor`-segment bridge; a nonzero margin is recomputed for the
    /// coarser step.
    pub fn coarsen(&self, factor: usize) -> Result<UnitBridge> {
        if factor == 0 || !factor.is_power_of_two() || self.segments() / factor < 2 {
            return Err(Error::invalid("factor", format!("cannot coarsen by {factor}")));
        }
        let pts: Vec<Vec2> = self.points.iter().step_by(factor).copied().collect();
        let n = pts.len() - 1;
        let margin = if self.margin > 0.0 { continuity_margin(n) } else { 0.0 };
        Ok(Self::build(pts, margin))
    }
}

/// Draws one unit bridge with `n` segments and no extent margin.
pub fn generate_unit_bridge<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Result<UnitBridge> {
    check_segments(n)?;
    let sd = (1.0 / n as f64).sqrt();
    let mut walk = Vec::with_capacity(n + 1);
    let mut w = Vec2::ZERO;
    walk.push(w);
    for _ in 0..n {
        let dx: f64 = rng.sample(StandardNormal);
        let dy: f64 = rng.sample(StandardNormal);
        w = w + Vec2::new(dx, dy) * sd;
        walk.push(w);
    }
    let end = w;
    let inv_n = 1.0 / n as f64;
    let mut pts: Vec<Vec2> = walk
        .iter()
        .enumerate()
        .map(|(k, &p)| p - end * (k as f64 * inv_n))
        .collect();
    pts[0] = Vec2::ZERO;
    pts[n] = Vec2::ZERO;
    Ok(UnitBridge::build(pts, 0.0))
}

/// Independent generator for `(seed, index)`.
pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Generator for the sampling positions paired with loop `index`.
pub fn position_stream(seed: u64, index: u64) -> ChaCha8Rng {
    substream(seed, POSITION_STREAM_BASE | index)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    /// Parent loops M.
    pub loop_count: usize,
    /// Segments per loop N.
    pub points_per_loop: usize,
    pub seed: u64,
    /// Rotated duplicates per parent loop, at most 6.
    pub rotations: usize,
    /// Uniform positions drawn per loop member by the fixed-β estimators.
    pub positions_per_loop: usize,
    /// Widen loop extents by [`continuity_margin`] to remove the
    /// discretization bias of vertex-only crossing detection.
    pub continuity_correction: bool,
}

impl EnsembleSpec {
    pub fn new(seed: u64) -> Self {
        EnsembleSpec {
            loop_count: DEFAULT_LOOPS,
            points_per_loop: DEFAULT_POINTS,
            seed,
            rotations: DEFAULT_ROTATIONS,
            positions_per_loop: DEFAULT_POSITIONS,
            continuity_correction: true,
        }
    }

    pub fn with_loops(self, loop_count: usize) -> Self {
        EnsembleSpec { loop_count, ..self }
    }

    pub fn with_points(self, points_per_loop: usize) -> Self {
        EnsembleSpec {
            points_per_loop,
            ..self
        }
    }

    pub fn with_rotations(self, rotations: usize) -> Self {
        EnsembleSpec { rotations, ..self }
    }

    pub fn with_positions(self, positions_per_loop: usize) -> Self {
        EnsembleSpec {
            positions_per_loop,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.loop_count == 0 {
            return Err(Error::invalid("loops", "at least one loop is required"));
        }
        check_segments(self.points_per_loop)?;
        if self.rotations > MAX_ROTATIONS {
            return Err(Error::Rotations);
        }
        if self.positions_per_loop == 0 {
            return Err(Error::invalid(
                "positions",
                "at least one position per loop is required",
            ));
        }
        Ok(())
    }

    /// Loops per parent including the original.
    pub fn group_size(&self) -> usize {
        self.rotations + 1
    }
}

/// Parent loops of an ensemble; rotated duplicates are derived on demand.
#[derive(Debug, Clone)]
pub struct LoopEnsemble {
    spec: EnsembleSpec,
    parents: Vec<UnitBridge>,
}

impl LoopEnsemble {
    pub fn generate(spec: &EnsembleSpec) -> Result<Self> {
        spec.validate()?;
        let margin = if spec.continuity_correction {
            continuity_margin(spec.points_per_loop)
        } else {
            0.0
        };
        let parents = (0..spec.loop_count as u64)
            .into_par_iter()
            .map(|i| {
                let mut rng = substream(spec.seed, i);
                generate_unit_bridge(&mut rng, spec.points_per_loop).map(|b| UnitBridge { margin, ..b })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(LoopEnsemble { spec: *spec, parents })
    }

    /// Same loops at a coarser discretization.
    pub fn coarsen(&self, factor: usize) -> Result<Self> {
        let parents = self
            .parents
            .iter()
            .map(|b| b.coarsen(factor))
            .collect::<Result<Vec<_>>>()?;
        Ok(LoopEnsemble {
            spec: EnsembleSpec {
                points_per_loop: self.spec.points_per_loop / factor,
                ..self.spec
            },
            parents,
        })
    }

    pub fn spec(&self) -> &EnsembleSpec {
        &self.spec
    }

    pub fn parents(&self) -> &[UnitBridge] {
        &self.parents
    }

    pub fn len(&self) -> usize {
        self.parents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parents.is_empty()
    }

    /// Parent `i` followed by its rotated duplicates.
    pub fn group(&self, i: usize) -> Vec<UnitBridge> {
        let parent = &self.parents[i];
        let mut out = Vec::with_capacity(self.spec.group_size());
        out.push(parent.clone());
        out.extend(
            parent
                .rotated_duplicates(self.spec.rotations)
                .expect("rotations validated"),
        );
        out
    }
}
