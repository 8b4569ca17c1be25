//! Per-loop weights and the world-line estimator of irreducible energies for
//! Dirichlet-line configurations in the free plane.
//!
//! With `ħ = c = 1` the irreducible energy of `N` lines is
//!
//! ```text
//! Ẽ = −(−1)^N / (2 (2π)^{3/2}) · E[w(ℓ)],   w(ℓ) = ∫_{β₀(ℓ)}^∞ dβ β^{−5/2} A(√β ℓ)
//! ```
//!
//! where `A` is the area of translations for which the rescaled unit loop
//! crosses every line. Tic-tac-toe and triangle configurations have closed
//! forms for `w`; any other line set goes through [`weight_numeric`].

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bridges::{EnsembleSpec, LoopEnsemble, UnitBridge};
use crate::error::{require_positive, Error, Result};
use crate::geometry::{Configuration, IsoTriangle, LoopExtents, Shape, TicTacToe};
use crate::spectral::SpectralEstimate;
use crate::stats::{jackknife_mean, mean};

/// Log-spaced Simpson intervals on `[β₀, 10⁴β₀]`.
pub const QUADRATURE_INTERVALS: usize = 512;
/// Upper end of the main quadrature range, in units of β₀.
pub const QUADRATURE_SPAN: f64 = 1e4;
const TAIL_EXTENSION_INTERVALS: usize = 256;
const TAIL_FIT_RTOL: f64 = 1e-8;
const MAX_TAIL_EXTENSIONS: usize = 12;

/// Triangle ratios outside this range are flagged: the energy diverges as
/// the triangle collapses.
pub const TRIANGLE_RATIO_RANGE: (f64, f64) = (0.05, 50.0);

/// `1 / (2 (2π)^{3/2})`.
pub fn loop_prefactor() -> f64 {
    0.5 / (2.0 * PI).powf(1.5)
}

/// Signed prefactor `−(−1)^N / (2 (2π)^{3/2})` multiplying the mean weight.
pub fn energy_prefactor(objects: usize) -> f64 {
    let sign = if objects.is_multiple_of(2) { -1.0 } else { 1.0 };
    sign * loop_prefactor()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyEstimate {
    pub value: f64,
    pub std_error: f64,
    /// Independent parent loops; rotated duplicates are not counted.
    pub loop_count: usize,
    /// `value·√𝒜` for named geometries.
    pub epsilon: Option<f64>,
}

impl EnergyEstimate {
    /// Standard error of `epsilon`.
    pub fn epsilon_error(&self, area: f64) -> f64 {
        self.std_error * area.sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightMethod {
    ClosedForm,
    Numeric,
}

impl WeightMethod {
    /// Closed form for tic-tac-toe, quadrature for everything else.
    ///
    /// The triangle closed form assumes the support polygon stays a
    /// triangle at every scale; it is not the default.
    pub fn default_for(config: &Configuration) -> Self {
        match config.shape() {
            Some(Shape::TicTacToe(_)) => WeightMethod::ClosedForm,
            _ => WeightMethod::Numeric,
        }
    }
}

fn nondegenerate(width: f64) -> Result<f64> {
    if width > 0.0 && width.is_finite() {
        Ok(width)
    } else {
        Err(Error::DegenerateLoop)
    }
}

/// `s_min²(s_max − s_min/3)/√(wh)` with `s = {Δx√(h/w), Δy√(w/h)}`.
pub fn weight_tictactoe(bridge: &UnitBridge, w: f64, h: f64) -> Result<f64> {
    require_positive("w", w)?;
    require_positive("h", h)?;
    let dx = nondegenerate(bridge.width_x())?;
    let dy = nondegenerate(bridge.width_y())?;
    let r = (h / w).sqrt();
    let (sx, sy) = (dx * r, dy / r);
    let (s_min, s_max) = if sx <= sy { (sx, sy) } else { (sy, sx) };
    Ok(s_min * s_min * (s_max - s_min / 3.0) / (w * h).sqrt())
}

/// `2𝒜/(3β₀^{3/2})` with β₀ the scale at which the loop first touches all
/// three sides.
pub fn weight_triangle(bridge: &UnitBridge, tri: &IsoTriangle) -> Result<f64> {
    let ext = LoopExtents::new(&tri.lines(), bridge);
    let beta0 = ext.minimal_scale()?;
    if !(beta0 > 0.0) {
        return Err(Error::DegenerateLoop);
    }
    Ok(2.0 * tri.area() / (3.0 * beta0.powf(1.5)))
}

/// `∫_{β₀}^∞ dβ β^{−5/2} A(√β ℓ)` by log-spaced Simpson quadrature plus an
/// exact tail for the final quadratic growth of `A` in `√β`.
pub fn weight_numeric(bridge: &UnitBridge, config: &Configuration) -> Result<f64> {
    let lines = config.lines()?;
    let ext = LoopExtents::new(&lines, bridge);
    weight_from_extents(&ext)
}

pub(crate) fn weight_from_extents(ext: &LoopExtents) -> Result<f64> {
    if ext.common_point() {
        return Err(Error::CommonPoint);
    }
    let beta0 = ext.minimal_scale()?;
    if !(beta0 > 0.0) {
        return Err(Error::CommonPoint);
    }
    let area = |t: f64| ext.area(t);
    let integrand = |u: f64| -> Result<f64> {
        let beta = u.exp();
        Ok(area(beta.sqrt())? * beta.powf(-1.5))
    };

    let mut lo = beta0.ln();
    let mut hi = lo + QUADRATURE_SPAN.ln();
    let mut total = simpson(&integrand, lo, hi, QUADRATURE_INTERVALS)?;
    for _ in 0..MAX_TAIL_EXTENSIONS {
        let t_cut = (0.5 * hi).exp();
        if let Some(tail) = quadratic_tail(&area, t_cut)? {
            return Ok(total + tail);
        }
        lo = hi;
        hi = lo + 100f64.ln();
        total += simpson(&integrand, lo, hi, TAIL_EXTENSION_INTERVALS)?;
    }
    Err(Error::invalid(
        "weight",
        "support area never reached its asymptotic growth",
    ))
}

/// Fits `A(t) = a t² + b t + c` on the last decade of β below `t_cut²` and
/// returns `2∫_{t_cut}^∞ A(t) t^{−4} dt`, or `None` when the fit does not
/// reproduce a fourth sample.
fn quadratic_tail(area: &impl Fn(f64) -> Result<f64>, t_cut: f64) -> Result<Option<f64>> {
    let ts = [t_cut * 10f64.powf(-0.5), t_cut * 10f64.powf(-0.25), t_cut];
    let ys = [area(ts[0])?, area(ts[1])?, area(ts[2])?];
    let (a, b, c) = fit_quadratic(ts, ys);
    let probe = t_cut * 10f64.powf(-0.375);
    let predicted = a * probe * probe + b * probe + c;
    let actual = area(probe)?;
    if (predicted - actual).abs() > TAIL_FIT_RTOL * actual.abs().max(f64::MIN_POSITIVE) {
        return Ok(None);
    }
    Ok(Some(
        2.0 * (a / t_cut + b / (2.0 * t_cut * t_cut) + c / (3.0 * t_cut.powi(3))),
    ))
}

fn fit_quadratic(t: [f64; 3], y: [f64; 3]) -> (f64, f64, f64) {
    // Newton divided differences
    let d01 = (y[1] - y[0]) / (t[1] - t[0]);
    let d12 = (y[2] - y[1]) / (t[2] - t[1]);
    let a = (d12 - d01) / (t[2] - t[0]);
    let b = d01 - a * (t[0] + t[1]);
    let c = y[0] - a * t[0] * t[0] - b * t[0];
    (a, b, c)
}

/// Composite Simpson rule with an even number of intervals.
pub fn simpson(f: &impl Fn(f64) -> Result<f64>, lo: f64, hi: f64, intervals: usize) -> Result<f64> {
    debug_assert!(intervals.is_multiple_of(2));
    let h = (hi - lo) / intervals as f64;
    let mut acc = f(lo)? + f(hi)?;
    for k in 1..intervals {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(lo + k as f64 * h)?;
    }
    Ok(acc * h / 3.0)
}

/// Weight of one loop under `method`.
pub fn loop_weight(config: &Configuration, bridge: &UnitBridge, method: WeightMethod) -> Result<f64> {
    match (method, config.shape()) {
        (WeightMethod::ClosedForm, Some(Shape::TicTacToe(t))) => weight_tictactoe(bridge, t.w, t.h),
        (WeightMethod::ClosedForm, Some(Shape::IsoTriangle(t))) => weight_triangle(bridge, &t),
        (WeightMethod::ClosedForm, None) => Err(Error::invalid(
            "weight",
            "closed-form weights exist only for tic-tac-toe and triangle geometries",
        )),
        (WeightMethod::Numeric, _) => weight_numeric(bridge, config),
    }
}

/// Generates the ensemble described by `spec` and estimates the energy.
pub fn estimate_energy(config: &Configuration, spec: &EnsembleSpec) -> Result<EnergyEstimate> {
    let ensemble = LoopEnsemble::generate(spec)?;
    estimate_energy_on(config, &ensemble, WeightMethod::default_for(config))
}

/// Energy estimate over an existing ensemble. Each parent loop and its
/// rotated duplicates form one jackknife block.
pub fn estimate_energy_on(
    config: &Configuration,
    ensemble: &LoopEnsemble,
    method: WeightMethod,
) -> Result<EnergyEstimate> {
    if ensemble.is_empty() {
        return Err(Error::invalid("loops", "at least one loop is required"));
    }
    let n_objects = config.len();
    if n_objects < 2 {
        return Err(Error::invalid("objects", "at least two objects are required"));
    }
    let blocks = (0..ensemble.len())
        .into_par_iter()
        .map(|i| {
            let weights = ensemble
                .group(i)
                .iter()
                .map(|b| loop_weight(config, b, method))
                .collect::<Result<Vec<_>>>()?;
            Ok(mean(&weights))
        })
        .collect::<Result<Vec<f64>>>()?;
    let (mean_weight, err) = jackknife_mean(&blocks);
    let pref = energy_prefactor(n_objects);
    let value = pref * mean_weight;
    Ok(EnergyEstimate {
        value,
        std_error: pref.abs() * err,
        loop_count: ensemble.len(),
        epsilon: config.enclosed_area().map(|a| value * a.sqrt()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    TicTacToe,
    IsoTriangle,
}

impl Family {
    /// Member with aspect `ratio` (`w/h` or `b/h`) and unit enclosed area.
    pub fn configuration(&self, ratio: f64) -> Result<Configuration> {
        Ok(match self {
            Family::TicTacToe => Configuration::tictactoe(TicTacToe::with_ratio(ratio, 1.0)?),
            Family::IsoTriangle => Configuration::triangle(IsoTriangle::with_ratio(ratio, 1.0)?),
        })
    }

    /// Whether `ratio` lies in the collapse regime of the family.
    pub fn flagged(&self, ratio: f64) -> bool {
        match self {
            Family::TicTacToe => false,
            Family::IsoTriangle => ratio < TRIANGLE_RATIO_RANGE.0 || ratio > TRIANGLE_RATIO_RANGE.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub ratio: f64,
    pub estimate: EnergyEstimate,
    pub flagged: bool,
}

impl SweepPoint {
    /// ε at unit area.
    pub fn epsilon(&self) -> f64 {
        self.estimate.epsilon.expect("sweeps use named geometries")
    }

    pub fn std_error(&self) -> f64 {
        self.estimate.std_error
    }
}

/// ε(ratio) at unit enclosed area, every ratio on the same loops.
pub fn sweep(
    family: Family,
    ratios: &[f64],
    ensemble: &LoopEnsemble,
    method: Option<WeightMethod>,
) -> Result<Vec<SweepPoint>> {
    if ratios.is_empty() {
        return Err(Error::EmptyRatios);
    }
    ratios
        .iter()
        .map(|&ratio| {
            let config = family.configuration(ratio)?;
            let method = method.unwrap_or_else(|| WeightMethod::default_for(&config));
            Ok(SweepPoint {
                ratio,
                estimate: estimate_energy_on(&config, ensemble, method)?,
                flagged: family.flagged(ratio),
            })
        })
        .collect()
}

/// `n` log-spaced values from `lo` to `hi` inclusive.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n)
                .map(|k| {
                    if k == n - 1 {
                        hi
                    } else if k == 0 {
                        lo
                    } else {
                        (a + (b - a) * k as f64 / (n - 1) as f64).exp()
                    }
                })
                .collect()
        }
    }
}

/// Energy of `config` at several discretizations of one ensemble: the
/// finest level is generated and coarser ones are its subsamples.
pub fn discretization_study(
    config: &Configuration,
    spec: &EnsembleSpec,
    levels: &[usize],
) -> Result<Vec<(usize, EnergyEstimate)>> {
    let finest = levels
        .iter()
        .copied()
        .max()
        .ok_or_else(|| Error::invalid("levels", "at least one discretization is required"))?;
    let base = LoopEnsemble::generate(&spec.with_points(finest))?;
    let method = WeightMethod::default_for(config);
    levels
        .iter()
        .map(|&n| {
            if n == 0 || finest % n != 0 {
                return Err(Error::invalid("levels", format!("{n} does not divide {finest}")));
            }
            let ens = if n == finest {
                base.clone()
            } else {
                base.coarsen(finest / n)?
            };
            Ok((n, estimate_energy_on(config, &ens, method)?))
        })
        .collect()
}

/// Fixed-β irreducible spectral function of a line configuration in the
/// free plane, `(−1)^N E[A(√β ℓ)]/(2πβ)`.
pub fn line_spectral_estimate(config: &Configuration, beta: f64, ensemble: &LoopEnsemble) -> Result<SpectralEstimate> {
    require_positive("beta", beta)?;
    let lines = config.lines()?;
    if lines.len() < 2 {
        return Err(Error::invalid("objects", "at least two lines are required"));
    }
    if LoopExtents::new(&lines, &ensemble.parents()[0]).common_point() {
        return Err(Error::CommonPoint);
    }
    let scale = beta.sqrt();
    let blocks = (0..ensemble.len())
        .into_par_iter()
        .map(|i| {
            let areas = ensemble
                .group(i)
                .iter()
                .map(|b| LoopExtents::new(&lines, b).area(scale))
                .collect::<Result<Vec<_>>>()?;
            Ok(mean(&areas))
        })
        .collect::<Result<Vec<f64>>>()?;
    let (m, err) = jackknife_mean(&blocks);
    let sign = if lines.len() % 2 == 0 { 1.0 } else { -1.0 };
    let norm = 1.0 / (2.0 * PI * beta);
    Ok(SpectralEstimate {
        value: sign * m * norm,
        std_error: err * norm,
        beta,
    })
}
