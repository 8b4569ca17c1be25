//! Run configuration: a flat JSON object, resolved against per-mode
//! defaults. Units are `ħ = c = 1`; lengths are in user units and `beta`
//! is a length².

use std::collections::BTreeSet;
use std::fmt;

use casimir_core::bridges::{DEFAULT_LOOPS, DEFAULT_POINTS, DEFAULT_POSITIONS, DEFAULT_ROTATIONS, MAX_ROTATIONS};
use casimir_core::{
    Configuration, EnsembleSpec, IsoTriangle, LineObject, PotentialObject, Rect, TicTacToe, Vec2, WeightMethod,
};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::CliError;

pub const DEFAULT_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_LEVELS: [usize; 3] = [256, 1024, 4096];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    TictactoeSweep,
    TriangleSweep,
    Energy,
    SpectralCheck,
    Monotonicity,
    ConvergenceStudy,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Mode::TictactoeSweep => "tictactoe-sweep",
            Mode::TriangleSweep => "triangle-sweep",
            Mode::Energy => "energy",
            Mode::SpectralCheck => "spectral-check",
            Mode::Monotonicity => "monotonicity",
            Mode::ConvergenceStudy => "convergence-study",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeometryKind {
    Tictactoe,
    Triangle,
    Lines,
    Disks,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightChoice {
    ClosedForm,
    Numeric,
}

impl From<WeightChoice> for WeightMethod {
    fn from(w: WeightChoice) -> Self {
        match w {
            WeightChoice::ClosedForm => WeightMethod::ClosedForm,
            WeightChoice::Numeric => WeightMethod::Numeric,
        }
    }
}

/// Dirichlet line `{x : normal·x = offset}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineSpec {
    pub normal: [f64; 2],
    pub offset: f64,
}

/// Disk potential; a missing strength means Dirichlet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiskSpec {
    pub center: [f64; 2],
    pub radius: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strength: Option<f64>,
}

/// Fully resolved configuration; also the JSON sidecar format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub loops: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rotations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub positions: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub continuity_correction: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analytic: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weight: Option<WeightChoice>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub geometry: Option<GeometryKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub height: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lines: Option<Vec<LineSpec>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub objects: Option<Vec<DiskSpec>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio_count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sampling_box: Option<[f64; 4]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub separations: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

const COMMON_KEYS: &[&str] = &[
    "mode",
    "seed",
    "loops",
    "rotations",
    "continuity_correction",
    "output",
    "threads",
];
const GEOMETRY_KEYS: &[&str] = &["geometry", "w", "h", "base", "height", "lines", "weight"];

fn mode_keys(mode: Mode) -> Vec<&'static str> {
    let mut keys = COMMON_KEYS.to_vec();
    match mode {
        Mode::TictactoeSweep | Mode::TriangleSweep => {
            keys.extend(["points", "ratio_min", "ratio_max", "ratio_count", "weight"])
        }
        Mode::Energy => {
            keys.extend(["points", "analytic", "tolerance"]);
            keys.extend(GEOMETRY_KEYS);
        }
        Mode::SpectralCheck => {
            keys.extend(["points", "positions", "analytic", "beta", "objects", "sampling_box"]);
            keys.extend(GEOMETRY_KEYS);
        }
        Mode::Monotonicity => keys.extend(["points", "positions", "beta", "objects", "separations"]),
        Mode::ConvergenceStudy => {
            keys.extend(["levels"]);
            keys.extend(GEOMETRY_KEYS);
        }
    }
    keys
}

fn all_keys() -> BTreeSet<&'static str> {
    [
        Mode::TictactoeSweep,
        Mode::TriangleSweep,
        Mode::Energy,
        Mode::SpectralCheck,
        Mode::Monotonicity,
        Mode::ConvergenceStudy,
    ]
    .into_iter()
    .flat_map(mode_keys)
    .collect()
}

fn invalid(field: &str, reason: impl fmt::Display) -> CliError {
    CliError::Config(format!("invalid `{field}`: {reason}"))
}

fn positive(field: &str, v: Option<f64>) -> Result<f64, CliError> {
    match v {
        None => Err(invalid(field, "is required for this mode")),
        Some(x) if x.is_finite() && x > 0.0 => Ok(x),
        Some(x) => Err(invalid(field, format!("must be positive, got {x}"))),
    }
}

/// Parses the configuration text. `cli_mode` is the mode given on the
/// command line; a `mode` key in the file must agree with it.
pub fn parse_config(text: &str, cli_mode: Option<Mode>) -> Result<RunConfig, CliError> {
    let value: Value = serde_json::from_str(text).map_err(|e| CliError::Config(format!("malformed config: {e}")))?;
    let Value::Object(map) = value else {
        return Err(CliError::Config("config must be a JSON object".into()));
    };
    let known = all_keys();
    let unknown: Vec<&str> = map.keys().map(String::as_str).filter(|k| !known.contains(k)).collect();
    if !unknown.is_empty() {
        return Err(CliError::Config(format!("unknown keys: {}", unknown.join(", "))));
    }
    let file_mode = match map.get("mode") {
        Some(v) => Some(Mode::deserialize(v).map_err(|_| invalid("mode", format!("unsupported mode {v}")))?),
        None => None,
    };
    let mode = match (cli_mode, file_mode) {
        (Some(a), Some(b)) if a != b => return Err(invalid("mode", format!("config says {b} but {a} was requested"))),
        (Some(m), _) | (None, Some(m)) => m,
        (None, None) => return Err(invalid("mode", "is required")),
    };
    let allowed = mode_keys(mode);
    let foreign: Vec<&str> = map
        .keys()
        .map(String::as_str)
        .filter(|k| !allowed.contains(k))
        .collect();
    if !foreign.is_empty() {
        return Err(CliError::Config(format!(
            "keys not used by mode {mode}: {}",
            foreign.join(", ")
        )));
    }
    let mut raw = RunConfig::default();
    for (key, v) in &map {
        let mut single = Map::new();
        single.insert(key.clone(), v.clone());
        let parsed: RunConfig = serde_json::from_value(Value::Object(single))
            .map_err(|e| invalid(key, e.to_string().split(" at line").next().unwrap_or_default()))?;
        merge(&mut raw, parsed);
    }
    raw.mode = Some(mode);
    resolve(raw)
}

/// Copies every field set in `from` into `into`.
fn merge(into: &mut RunConfig, from: RunConfig) {
    let mut a = serde_json::to_value(&*into).expect("serializable");
    let b = serde_json::to_value(from).expect("serializable");
    if let (Value::Object(a), Value::Object(b)) = (&mut a, b) {
        a.extend(b);
    }
    *into = serde_json::from_value(a).expect("round trip");
}

fn resolve(mut c: RunConfig) -> Result<RunConfig, CliError> {
    let mode = c.mode.expect("mode set by parser");
    if c.seed.is_none() {
        return Err(CliError::Config("seed is required for reproducibility".into()));
    }
    c.loops.get_or_insert(DEFAULT_LOOPS);
    c.rotations.get_or_insert(DEFAULT_ROTATIONS);
    c.continuity_correction.get_or_insert(true);
    let output = c.output.get_or_insert_with(|| format!("{mode}.csv"));
    if output.is_empty() || std::path::Path::new(output).extension().is_some_and(|e| e == "json") {
        return Err(invalid("output", "must be a non-empty path without a .json extension"));
    }
    if c.loops == Some(0) {
        return Err(invalid("loops", "must be at least 1"));
    }
    if c.rotations.unwrap() > MAX_ROTATIONS {
        return Err(CliError::Config("rotations must be in [0,6]".into()));
    }
    if c.threads == Some(0) {
        return Err(invalid("threads", "must be at least 1"));
    }
    if mode != Mode::ConvergenceStudy {
        let n = *c.points.get_or_insert(DEFAULT_POINTS);
        if n < 2 || !n.is_power_of_two() {
            return Err(invalid("points", format!("must be a power of two ≥ 2, got {n}")));
        }
    }
    match mode {
        Mode::TictactoeSweep | Mode::TriangleSweep => {
            let (lo, hi) = if mode == Mode::TictactoeSweep {
                (0.2, 5.0)
            } else {
                (0.1, 10.0)
            };
            let lo = *c.ratio_min.get_or_insert(lo);
            let hi = *c.ratio_max.get_or_insert(hi);
            positive("ratio_min", Some(lo))?;
            positive("ratio_max", Some(hi))?;
            if hi < lo {
                return Err(invalid("ratio_max", "must not be below ratio_min"));
            }
            if *c.ratio_count.get_or_insert(21) == 0 {
                return Err(invalid("ratio_count", "must be at least 1"));
            }
        }
        Mode::Energy | Mode::ConvergenceStudy => {
            c.geometry.get_or_insert(GeometryKind::Tictactoe);
            if c.geometry == Some(GeometryKind::Disks) {
                return Err(invalid("geometry", "energies need Dirichlet lines"));
            }
            if mode == Mode::Energy {
                c.analytic.get_or_insert(false);
                positive("tolerance", Some(*c.tolerance.get_or_insert(DEFAULT_TOLERANCE)))?;
            } else {
                let levels = c.levels.get_or_insert_with(|| DEFAULT_LEVELS.to_vec());
                check_levels(levels)?;
            }
            line_configuration(&c)?;
        }
        Mode::SpectralCheck => {
            c.positions.get_or_insert(DEFAULT_POSITIONS);
            c.analytic.get_or_insert(false);
            positive("beta", c.beta)?;
            match c.geometry.get_or_insert(GeometryKind::Tictactoe) {
                GeometryKind::Disks => {
                    disks(&c)?;
                    if let Some(b) = c.sampling_box {
                        rect(b)?;
                    }
                }
                _ => {
                    line_configuration(&c)?;
                }
            }
        }
        Mode::Monotonicity => {
            c.positions.get_or_insert(DEFAULT_POSITIONS);
            positive("beta", c.beta)?;
            let objs = disks(&c)?;
            if objs.len() != 2 {
                return Err(invalid("objects", "monotonicity needs exactly two disks"));
            }
            let seps = c.separations.get_or_insert_with(|| vec![0.25, 0.5, 1.0]);
            if seps.is_empty() || seps.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
                return Err(invalid("separations", "must be positive"));
            }
            if seps.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(invalid("separations", "must be strictly increasing"));
            }
        }
    }
    if c.positions == Some(0) {
        return Err(invalid("positions", "must be at least 1"));
    }
    Ok(c)
}

fn check_levels(levels: &[usize]) -> Result<(), CliError> {
    if levels.is_empty() {
        return Err(invalid("levels", "at least one level is required"));
    }
    let max = *levels.iter().max().unwrap();
    for &n in levels {
        if n < 2 || !n.is_power_of_two() {
            return Err(invalid("levels", format!("{n} is not a power of two ≥ 2")));
        }
    }
    if max > 1 << 16 {
        return Err(invalid("levels", "at most 65536 points per loop"));
    }
    Ok(())
}

fn rect(b: [f64; 4]) -> Result<Rect, CliError> {
    Rect::new(Vec2::new(b[0], b[1]), Vec2::new(b[2], b[3]))
        .map_err(|_| invalid("sampling_box", "expects [xmin, ymin, xmax, ymax] with positive extent"))
}

impl RunConfig {
    pub fn mode(&self) -> Mode {
        self.mode.expect("resolved")
    }

    pub fn ensemble(&self) -> EnsembleSpec {
        EnsembleSpec {
            loop_count: self.loops.unwrap_or(DEFAULT_LOOPS),
            points_per_loop: self.points.unwrap_or(DEFAULT_POINTS),
            seed: self.seed.expect("resolved"),
            rotations: self.rotations.unwrap_or(DEFAULT_ROTATIONS),
            positions_per_loop: self.positions.unwrap_or(DEFAULT_POSITIONS),
            continuity_correction: self.continuity_correction.unwrap_or(true),
        }
    }

    pub fn sidecar_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }
}

/// Line configuration for the geometry keys.
pub fn line_configuration(c: &RunConfig) -> Result<Configuration, CliError> {
    match c.geometry {
        Some(GeometryKind::Tictactoe) | None => {
            let t = TicTacToe::new(positive("w", c.w.or(Some(1.0)))?, positive("h", c.h.or(Some(1.0)))?)
                .map_err(|e| invalid("w", e))?;
            Ok(Configuration::tictactoe(t))
        }
        Some(GeometryKind::Triangle) => {
            let t = IsoTriangle::new(positive("base", c.base)?, positive("height", c.height)?)
                .map_err(|e| invalid("base", e))?;
            Ok(Configuration::triangle(t))
        }
        Some(GeometryKind::Lines) => {
            let specs = c
                .lines
                .as_ref()
                .ok_or_else(|| invalid("lines", "is required for geometry lines"))?;
            if specs.len() < 2 {
                return Err(invalid("lines", "at least two lines are required"));
            }
            let lines = specs
                .iter()
                .map(|l| LineObject::new(Vec2::new(l.normal[0], l.normal[1]), l.offset))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| invalid("lines", e))?;
            Ok(Configuration::from_lines(lines))
        }
        Some(GeometryKind::Disks) => Err(invalid("geometry", "disks are not lines")),
    }
}

pub fn disks(c: &RunConfig) -> Result<Vec<PotentialObject>, CliError> {
    let specs = c.objects.as_ref().ok_or_else(|| invalid("objects", "is required"))?;
    if specs.is_empty() {
        return Err(invalid("objects", "at least one disk is required"));
    }
    specs
        .iter()
        .map(|d| {
            let center = Vec2::new(d.center[0], d.center[1]);
            match d.strength {
                Some(v) => PotentialObject::soft_disk(center, d.radius, v),
                None => PotentialObject::dirichlet_disk(center, d.radius),
            }
            .map_err(|e| invalid("objects", e))
        })
        .collect()
}
