//! Order-stable reductions and error bars.

/// Pairwise summation over a fixed binary tree. The result depends only on
/// the order of `values`, never on how they were produced.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 16;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    pairwise_sum(values) / values.len() as f64
}

/// Mean and its delete-one jackknife standard error over independent blocks.
///
/// For the sample mean the jackknife reduces to `s/√n`; the explicit
/// leave-one-out form is kept so correlated members never enter separately.
pub fn jackknife_mean(blocks: &[f64]) -> (f64, f64) {
    let n = blocks.len();
    let total = pairwise_sum(blocks);
    let m = total / n as f64;
    if n < 2 {
        return (m, 0.0);
    }
    let nf = n as f64;
    let sq: Vec<f64> = blocks
        .iter()
        .map(|&b| {
            let loo = (total - b) / (nf - 1.0);
            (loo - m) * (loo - m)
        })
        .collect();
    (m, ((nf - 1.0) / nf * pairwise_sum(&sq)).sqrt())
}

/// Mean and `s/√n` standard error.
pub fn mean_and_error(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    let m = mean(values);
    if n < 2 {
        return (m, 0.0);
    }
    let sq: Vec<f64> = values.iter().map(|&v| (v - m) * (v - m)).collect();
    let var = pairwise_sum(&sq) / (n as f64 - 1.0);
    (m, (var / n as f64).sqrt())
}

/// Two-sample Kolmogorov–Smirnov statistic.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}
