use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use casimir_core::analytic::{free_tictactoe_spectral, tictactoe_exact};
use casimir_core::spectral::{default_sampling_box, estimate_irreducible_spectral_density_on, monotonicity_curve_on};
use casimir_core::worldline::{discretization_study, estimate_energy_on, line_spectral_estimate, log_spaced, sweep};
use casimir_core::{Family, LoopEnsemble, Shape, WeightMethod};

use crate::config::{disks, line_configuration, GeometryKind, Mode, RunConfig};
use crate::CliError;

/// Column names and numeric rows; the first column of `labels` rows is text.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub labels: Option<Vec<String>>,
    pub rows: Vec<Vec<f64>>,
}

/// CSV with LF endings, every number in `{:.16e}` except integral counts.
pub fn render_csv(table: &Table) -> Result<String, CliError> {
    let mut out = table.header.join(",");
    out.push('\n');
    let offset = usize::from(table.labels.is_some());
    for (i, row) in table.rows.iter().enumerate() {
        let mut cells: Vec<String> = Vec::with_capacity(row.len() + 1);
        if let Some(labels) = &table.labels {
            cells.push(labels[i].clone());
        }
        for (j, &v) in row.iter().enumerate() {
            if !v.is_finite() {
                return Err(CliError::NonFinite {
                    column: table.header[j + offset],
                    value: v,
                });
            }
            cells.push(format_cell(table.header[j + offset], v));
        }
        let _ = writeln!(out, "{}", cells.join(","));
    }
    Ok(out)
}

fn format_cell(column: &str, v: f64) -> String {
    match column {
        "loops" | "points" => format!("{}", v as u64),
        _ => format!("{v:.16e}"),
    }
}

/// Evaluates the configured mode on a dedicated pool of `threads` workers.
pub fn execute(config: &RunConfig, threads: usize) -> Result<Table, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    pool.install(|| evaluate(config))
}

fn weight_method(c: &RunConfig) -> Option<WeightMethod> {
    c.weight.map(Into::into)
}

fn evaluate(c: &RunConfig) -> Result<Table, CliError> {
    let spec = c.ensemble();
    match c.mode() {
        Mode::TictactoeSweep | Mode::TriangleSweep => {
            let family = if c.mode() == Mode::TictactoeSweep {
                Family::TicTacToe
            } else {
                Family::IsoTriangle
            };
            let ratios = log_spaced(c.ratio_min.unwrap(), c.ratio_max.unwrap(), c.ratio_count.unwrap());
            let ens = LoopEnsemble::generate(&spec)?;
            let points = sweep(family, &ratios, &ens, weight_method(c))?;
            Ok(Table {
                header: vec!["ratio", "epsilon", "std_error", "loops"],
                labels: None,
                rows: points
                    .iter()
                    .map(|p| vec![p.ratio, p.epsilon(), p.std_error(), p.estimate.loop_count as f64])
                    .collect(),
            })
        }
        Mode::Energy => {
            let cfg = line_configuration(c)?;
            let ens = LoopEnsemble::generate(&spec)?;
            let method = weight_method(c).unwrap_or_else(|| WeightMethod::default_for(&cfg));
            let est = estimate_energy_on(&cfg, &ens, method)?;
            let mut labels = vec!["mc".to_string()];
            let mut rows = vec![vec![est.value, est.std_error]];
            if c.analytic == Some(true) {
                let Some(Shape::TicTacToe(t)) = cfg.shape() else {
                    return Err(CliError::Config("--analytic needs geometry tictactoe".into()));
                };
                labels.push("exact".into());
                rows.push(vec![tictactoe_exact(t.w, t.h, c.tolerance.unwrap())?, 0.0]);
            }
            Ok(Table {
                header: vec!["quantity", "value", "std_error"],
                labels: Some(labels),
                rows,
            })
        }
        Mode::SpectralCheck => {
            let beta = c.beta.unwrap();
            let ens = LoopEnsemble::generate(&spec)?;
            let mut labels = vec!["mc".to_string()];
            let mut rows = Vec::new();
            if c.geometry == Some(GeometryKind::Disks) {
                if c.analytic == Some(true) {
                    return Err(CliError::Config("--analytic needs geometry tictactoe".into()));
                }
                let objs = disks(c)?;
                let b = match c.sampling_box {
                    Some(b) => casimir_core::Rect::new(
                        casimir_core::Vec2::new(b[0], b[1]),
                        casimir_core::Vec2::new(b[2], b[3]),
                    )?,
                    None => default_sampling_box(&objs, beta)?,
                };
                let est = estimate_irreducible_spectral_density_on(&objs, beta, &ens, &b)?;
                rows.push(vec![est.value, est.std_error]);
            } else {
                let cfg = line_configuration(c)?;
                let est = line_spectral_estimate(&cfg, beta, &ens)?;
                rows.push(vec![est.value, est.std_error]);
                if c.analytic == Some(true) {
                    let Some(Shape::TicTacToe(t)) = cfg.shape() else {
                        return Err(CliError::Config("--analytic needs geometry tictactoe".into()));
                    };
                    labels.push("exact".into());
                    rows.push(vec![free_tictactoe_spectral(t.w, t.h, beta)?, 0.0]);
                }
            }
            Ok(Table {
                header: vec!["quantity", "value", "std_error"],
                labels: Some(labels),
                rows,
            })
        }
        Mode::Monotonicity => {
            let objs = disks(c)?;
            let ens = LoopEnsemble::generate(&spec)?;
            let seps = c.separations.as_ref().unwrap();
            let curve = monotonicity_curve_on(&objs[0], &objs[1], seps, c.beta.unwrap(), &ens)?;
            Ok(Table {
                header: vec!["separation", "value", "std_error", "loops"],
                labels: None,
                rows: curve
                    .separations
                    .iter()
                    .zip(&curve.estimates)
                    .map(|(&s, e)| vec![s, e.value, e.std_error, ens.len() as f64])
                    .collect(),
            })
        }
        Mode::ConvergenceStudy => {
            let cfg = line_configuration(c)?;
            let levels = c.levels.as_ref().unwrap();
            let study = discretization_study(&cfg, &spec, levels)?;
            Ok(Table {
                header: vec!["points", "energy", "std_error", "loops"],
                labels: None,
                rows: study
                    .iter()
                    .map(|(n, e)| vec![*n as f64, e.value, e.std_error, e.loop_count as f64])
                    .collect(),
            })
        }
    }
}

/// `<output>` with its extension replaced by `json`.
pub fn sidecar_path(output: &Path) -> PathBuf {
    output.with_extension("json")
}

pub fn write_outputs(config: &RunConfig, table: &Table) -> Result<(PathBuf, PathBuf), CliError> {
    let csv = render_csv(table)?;
    let out = PathBuf::from(config.output.as_deref().expect("resolved"));
    let side = sidecar_path(&out);
    let write = |p: &Path, s: &str| {
        fs::write(p, s).map_err(|source| CliError::Io {
            path: p.to_path_buf(),
            source,
        })
    };
    write(&out, &csv)?;
    write(&side, &config.sidecar_json())?;
    Ok((out, side))
}
