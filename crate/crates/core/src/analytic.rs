//! Exact references for Dirichlet lines: the tic-tac-toe lattice sum and
//! heat-kernel traces of rectangles cut by lines inside a finite box.
//!
//! Spectral functions use the convention `φ(β) = Σ e^{−βλ/2}`.

use std::f64::consts::PI;

use crate::error::{require_positive, Error, Result};
use crate::spectral::inclusion_exclusion_terms;
use crate::stats::pairwise_sum;

/// Below this `β/a²` the Poisson-resummed trace is used.
const POISSON_SWITCH: f64 = 0.01;
const SERIES_RTOL: f64 = 1e-16;
/// Cap on the number of lattice terms before the sum is abandoned.
const MAX_LATTICE_TERMS: f64 = 4e9;

/// `−(wh/8π) Σ_{n₁,n₂≥1} [(n₁w)² + (n₂h)²]^{−3/2}`, the irreducible energy
/// of two pairs of Dirichlet lines enclosing a `w × h` rectangle.
///
/// The lattice is summed over `n₁ ≤ K₁, n₂ ≤ K₂` and the rest is replaced
/// by the integral over the complementary quadrant region. The cutoff
/// doubles until the midpoint-rule remainder bound drops below
/// `tol·|sum|`.
pub fn tictactoe_exact(w: f64, h: f64, tol: f64) -> Result<f64> {
    require_positive("w", w)?;
    require_positive("h", h)?;
    require_positive("tol", tol)?;
    // summand and bound are symmetric; fix the order so (w, h) and (h, w)
    // round identically
    let (w, h) = if w <= h { (w, h) } else { (h, w) };
    let diag = w.hypot(h);
    let mut reach = 8.0 * diag;
    loop {
        let k1 = (reach / w).ceil();
        let k2 = (reach / h).ceil();
        if k1 * k2 > MAX_LATTICE_TERMS {
            return Err(Error::invalid("tol", "lattice sum does not converge within limits"));
        }
        let (k1, k2) = (k1 as usize, k2 as usize);
        let r_eff = ((k1 as f64 + 0.5) * w).min((k2 as f64 + 0.5) * h) - diag;
        let sum = lattice_partial(w, h, k1, k2) + lattice_tail(w, h, k1, k2);
        let bound = PI * diag * diag / (3.0 * w * h * r_eff.powi(3));
        if bound <= tol * sum.abs() {
            return Ok(-(w * h) / (8.0 * PI) * sum);
        }
        reach *= 2.0;
    }
}

fn lattice_partial(w: f64, h: f64, k1: usize, k2: usize) -> f64 {
    let rows: Vec<f64> = (1..=k1)
        .map(|n1| {
            let x2 = (n1 as f64 * w).powi(2);
            let row: Vec<f64> = (1..=k2)
                .map(|n2| {
                    let r2 = x2 + (n2 as f64 * h).powi(2);
                    1.0 / (r2 * r2.sqrt())
                })
                .collect();
            pairwise_sum(&row)
        })
        .collect();
    pairwise_sum(&rows)
}

/// `∫_X^∞∫_Y^∞ [(wx)² + (hy)²]^{−3/2} dy dx` in a cancellation-free form.
fn quadrant_integral(w: f64, h: f64, x: f64, y: f64) -> f64 {
    let c = h * y;
    let q = c / (w * x);
    (1.0 / x - c / (w * x * x * (1.0 + (1.0 + q * q).sqrt()))) / (h * w * w)
}

fn lattice_tail(w: f64, h: f64, k1: usize, k2: usize) -> f64 {
    let (x0, y0) = (0.5, 0.5);
    let (x1, y1) = (k1 as f64 + 0.5, k2 as f64 + 0.5);
    quadrant_integral(w, h, x1, y0) + quadrant_integral(w, h, x0, y1) - quadrant_integral(w, h, x1, y1)
}

/// `Σ_{n≥1} e^{−βn²π²/(2a²)}`: the trace for a Dirichlet interval of length `a`.
pub fn interval_spectral(a: f64, beta: f64) -> Result<f64> {
    require_positive("a", a)?;
    require_positive("beta", beta)?;
    if beta / (a * a) < POISSON_SWITCH {
        let lead = a / (2.0 * PI * beta).sqrt();
        Ok(lead * (1.0 + 2.0 * gaussian_tail_sum(2.0 * a * a / beta)) - 0.5)
    } else {
        Ok(gaussian_tail_sum(beta * PI * PI / (2.0 * a * a)))
    }
}

/// `Σ_{m≥1} e^{−c m²}` for `c > 0`, stopped once terms fall below the
/// relative tolerance.
fn gaussian_tail_sum(c: f64) -> f64 {
    let mut sum = 0.0;
    let mut m = 1.0f64;
    loop {
        let term = (-c * m * m).exp();
        sum += term;
        if term <= SERIES_RTOL * sum || term == 0.0 {
            return sum;
        }
        m += 1.0;
    }
}

/// `θ(a) − a/√(2πβ) + 1/2 = (2a/√(2πβ)) Σ_{m≥1} e^{−2m²a²/β}`, the part of
/// the interval trace that survives the alternating sum over cuts.
pub fn interval_oscillatory(a: f64, beta: f64) -> Result<f64> {
    require_positive("a", a)?;
    require_positive("beta", beta)?;
    let lead = a / (2.0 * PI * beta).sqrt();
    // the eigenvalue sum is only used where the linear term is below 1/2
    if beta / (a * a) < 2.0 {
        Ok(2.0 * lead * gaussian_tail_sum(2.0 * a * a / beta))
    } else {
        Ok(gaussian_tail_sum(beta * PI * PI / (2.0 * a * a)) - lead + 0.5)
    }
}

/// Free-plane irreducible spectral function of a `w × h` tic-tac-toe,
/// `(4wh/2πβ) Σ_{m,n≥1} e^{−2(m²w² + n²h²)/β}`.
pub fn free_tictactoe_spectral(w: f64, h: f64, beta: f64) -> Result<f64> {
    Ok(interval_oscillatory(w, beta)? * interval_oscillatory(h, beta)?)
}

/// A `width × height` box cut by lines `x = x_cuts[i]` and `y = y_cuts[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxPartition {
    width: f64,
    height: f64,
    x_cuts: Vec<f64>,
    y_cuts: Vec<f64>,
}

fn check_cuts(name: &'static str, cuts: &[f64], extent: f64) -> Result<()> {
    if cuts.iter().any(|&c| !(c > 0.0 && c < extent)) {
        return Err(Error::invalid(name, "cuts must lie strictly inside the box"));
    }
    if cuts.windows(2).any(|p| !(p[1] > p[0])) {
        return Err(Error::invalid(name, "cuts must be strictly increasing"));
    }
    Ok(())
}

impl BoxPartition {
    pub fn new(width: f64, height: f64, x_cuts: Vec<f64>, y_cuts: Vec<f64>) -> Result<Self> {
        require_positive("width", width)?;
        require_positive("height", height)?;
        check_cuts("x_cuts", &x_cuts, width)?;
        check_cuts("y_cuts", &y_cuts, height)?;
        Ok(BoxPartition {
            width,
            height,
            x_cuts,
            y_cuts,
        })
    }

    /// A `w × h` tic-tac-toe centered in a box `scale` times larger along
    /// each axis.
    pub fn centered_tictactoe(w: f64, h: f64, scale: f64) -> Result<Self> {
        require_positive("w", w)?;
        require_positive("h", h)?;
        if !(scale > 1.0) || !scale.is_finite() {
            return Err(Error::invalid("scale", "box must be larger than the rectangle"));
        }
        let (bw, bh) = (scale * w, scale * h);
        BoxPartition::new(
            bw,
            bh,
            vec![0.5 * (bw - w), 0.5 * (bw + w)],
            vec![0.5 * (bh - h), 0.5 * (bh + h)],
        )
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn x_cuts(&self) -> &[f64] {
        &self.x_cuts
    }

    pub fn y_cuts(&self) -> &[f64] {
        &self.y_cuts
    }

    pub fn transposed(&self) -> BoxPartition {
        BoxPartition {
            width: self.height,
            height: self.width,
            x_cuts: self.y_cuts.clone(),
            y_cuts: self.x_cuts.clone(),
        }
    }

    fn line_count(&self) -> usize {
        self.x_cuts.len() + self.y_cuts.len()
    }

    fn tictactoe_cuts(&self) -> Result<([f64; 2], [f64; 2])> {
        match (self.x_cuts.as_slice(), self.y_cuts.as_slice()) {
            (&[x1, x2], &[y1, y2]) => Ok(([x1, x2], [y1, y2])),
            _ => Err(Error::invalid("cuts", "exactly two x cuts and two y cuts are required")),
        }
    }

    /// Spectral function of the box with the lines in `mask` present. Bit
    /// `i` selects `x_cuts[i]`, bit `nx + j` selects `y_cuts[j]`.
    pub fn subset_spectral(&self, mask: u32, beta: f64) -> Result<f64> {
        let nx = self.x_cuts.len();
        let xs: Vec<f64> = (0..nx)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| self.x_cuts[i])
            .collect();
        let ys: Vec<f64> = (0..self.y_cuts.len())
            .filter(|j| mask & (1 << (nx + j)) != 0)
            .map(|j| self.y_cuts[j])
            .collect();
        let x_trace = cell_trace(&xs, self.width, beta)?;
        let y_trace = cell_trace(&ys, self.height, beta)?;
        // each cell is a rectangle; the sum of products factorizes
        Ok(x_trace * y_trace)
    }
}

/// `Σ θ(cell length)` over the intervals cut out of `[0, extent]`.
fn cell_trace(cuts: &[f64], extent: f64, beta: f64) -> Result<f64> {
    let mut edges = Vec::with_capacity(cuts.len() + 2);
    edges.push(0.0);
    edges.extend_from_slice(cuts);
    edges.push(extent);
    let terms = edges
        .windows(2)
        .map(|e| interval_spectral(e[1] - e[0], beta))
        .collect::<Result<Vec<_>>>()?;
    Ok(pairwise_sum(&terms))
}

/// Lengths and signs whose oscillatory traces give the alternating sum
/// over one pair of parallel cuts.
fn signed_lengths(cuts: [f64; 2], extent: f64) -> [(f64, f64); 4] {
    let [c1, c2] = cuts;
    [(extent, 1.0), (extent - c1, -1.0), (c2, -1.0), (c2 - c1, 1.0)]
}

fn alternating_factor(cuts: [f64; 2], extent: f64, beta: f64) -> Result<f64> {
    let direct = beta >= 2.0 * extent * extent;
    let terms = signed_lengths(cuts, extent)
        .iter()
        .map(|&(a, s)| {
            // linear and constant parts of θ cancel in the signed sum
            let v = if direct {
                interval_spectral(a, beta)?
            } else {
                interval_oscillatory(a, beta)?
            };
            Ok(s * v)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(pairwise_sum(&terms))
}

/// Irreducible four-line spectral function `φ̃(β)` of a tic-tac-toe in a box.
///
/// The 16-subset alternating sum factorizes into one alternating sum per
/// axis; each is evaluated from the oscillatory part of the interval
/// traces, which avoids the cancellation of the literal sum.
pub fn box_irreducible_spectral(partition: &BoxPartition, beta: f64) -> Result<f64> {
    require_positive("beta", beta)?;
    let (xc, yc) = partition.tictactoe_cuts()?;
    Ok(alternating_factor(xc, partition.width, beta)? * alternating_factor(yc, partition.height, beta)?)
}

/// The same quantity summed literally over all line subsets.
pub fn box_irreducible_spectral_literal(partition: &BoxPartition, beta: f64) -> Result<f64> {
    require_positive("beta", beta)?;
    partition.tictactoe_cuts()?;
    let terms = inclusion_exclusion_terms(partition.line_count())?
        .into_iter()
        .map(|(mask, sign)| Ok(sign as f64 * partition.subset_spectral(mask, beta)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(pairwise_sum(&terms))
}

/// Shortest closed path touching all four lines of the enclosed rectangle.
pub fn minimal_loop_length(partition: &BoxPartition) -> Result<f64> {
    let ([x1, x2], [y1, y2]) = partition.tictactoe_cuts()?;
    Ok(2.0 * (x2 - x1).hypot(y2 - y1))
}

pub const PROPER_TIME_INTERVALS: usize = 4096;

/// `−(1/√(8π)) ∫ φ̃(β) β^{−3/2} dβ` by Simpson's rule in `ln β` over
/// `[10⁻³ℓ²_min, 10²·max(W, H)²]`. Outside that range the integrand is
/// below `e^{−500}` relative to its peak.
pub fn proper_time_energy(partition: &BoxPartition, intervals: usize) -> Result<f64> {
    if intervals < 2 || !intervals.is_multiple_of(2) {
        return Err(Error::invalid("intervals", "must be even and at least 2"));
    }
    let l_min = minimal_loop_length(partition)?;
    let lo = (1e-3 * l_min * l_min).ln();
    let hi = (1e2 * partition.width.max(partition.height).powi(2)).ln();
    let step = (hi - lo) / intervals as f64;
    let terms = (0..=intervals)
        .map(|k| {
            let u = lo + k as f64 * step;
            let beta = u.exp();
            let weight = match k {
                0 => 1.0,
                _ if k == intervals => 1.0,
                _ if k % 2 == 1 => 4.0,
                _ => 2.0,
            };
            // dβ β^{−3/2} = β^{−1/2} du
            Ok(weight * box_irreducible_spectral(partition, beta)? / beta.sqrt())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(-pairwise_sum(&terms) * step / 3.0 / (8.0 * PI).sqrt())
}

/// Exact box energy as a signed combination of free-plane tic-tac-toe
/// energies, `Σ s_i s_j Ẽ_#(a_i, b_j)`.
pub fn box_energy_from_tictactoe(partition: &BoxPartition, tol: f64) -> Result<f64> {
    let (xc, yc) = partition.tictactoe_cuts()?;
    let mut terms = Vec::with_capacity(16);
    for (a, sa) in signed_lengths(xc, partition.width) {
        for (b, sb) in signed_lengths(yc, partition.height) {
            terms.push(sa * sb * tictactoe_exact(a, b, tol)?);
        }
    }
    Ok(pairwise_sum(&terms))
}
