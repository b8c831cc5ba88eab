//! JSON run configuration.
//!
//! Keys are checked against the known set before deserialisation so that a
//! typo is reported by name instead of being silently ignored.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use serde_json::Value;
use thiserror::Error;

use nwh_core::{Grid, HarnackParams, InitialCondition, PdeParams, SolverConfig};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unknown key {0:?}")]
    UnknownKey(String),
    #[error("constraint violation: {0}")]
    ConstraintViolation(String),
}

pub const DEFAULT_CFL_SAFETY: f64 = 0.4;
pub const DEFAULT_TOLERANCE: f64 = 5e-3;
pub const DEFAULT_T_MIN: f64 = 0.05;
/// Snapshots per run when `snapshot_interval` is omitted.
pub const DEFAULT_SNAPSHOTS: f64 = 100.0;

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct PdeSection {
    pub a: f64,
    pub b: f64,
    pub dim: u32,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct HarnackSection {
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub tolerance: Option<f64>,
    pub t_min: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct GridSection {
    pub extent: f64,
    pub points: usize,
    pub bc: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct TimeSection {
    pub t_end: f64,
    pub cfl_safety: Option<f64>,
    pub snapshot_interval: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitSection {
    Constant { value: f64 },
    Equilibrium,
    SinePerturbed { amplitude: f64, mode: u32 },
    GaussianBump { center: f64, width: f64, floor: f64 },
    RandomPositive { lo: f64, hi: f64, seed: u64 },
    ExactFront { center: f64 },
    Step { low: f64, high: f64, position: f64 },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct OutputSection {
    pub directory: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
struct RawConfig {
    pde: PdeSection,
    harnack: Option<HarnackSection>,
    grid: GridSection,
    time: TimeSection,
    init: Option<InitSection>,
    output: Option<OutputSection>,
}

/// A validated configuration with defaults applied.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub pde: PdeParams<f64>,
    pub harnack: HarnackParams<f64>,
    pub tolerance: f64,
    pub t_min: f64,
    pub solver: SolverConfig<f64>,
    pub output_dir: PathBuf,
}

const TOP_KEYS: &[&str] = &["pde", "harnack", "grid", "time", "init", "output"];
const PDE_KEYS: &[&str] = &["a", "b", "dim"];
const HARNACK_KEYS: &[&str] = &["alpha", "beta", "gamma", "tolerance", "t_min"];
const GRID_KEYS: &[&str] = &["extent", "points", "bc"];
const TIME_KEYS: &[&str] = &["t_end", "cfl_safety", "snapshot_interval"];
const OUTPUT_KEYS: &[&str] = &["directory"];

fn init_keys(kind: &str) -> Option<&'static [&'static str]> {
    Some(match kind {
        "constant" => &["kind", "value"],
        "equilibrium" => &["kind"],
        "sine_perturbed" => &["kind", "amplitude", "mode"],
        "gaussian_bump" => &["kind", "center", "width", "floor"],
        "random_positive" => &["kind", "lo", "hi", "seed"],
        "exact_front" => &["kind", "center"],
        "step" => &["kind", "low", "high", "position"],
        _ => return None,
    })
}

fn check_keys(value: &Value, allowed: &[&str], section: &str) -> Result<(), ConfigError> {
    let Value::Object(map) = value else {
        return Err(ConfigError::ConstraintViolation(format!("section {section:?} must be an object")));
    };
    match map.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(ConfigError::UnknownKey(k.clone())),
        None => Ok(()),
    }
}

fn check_all_keys(doc: &Value) -> Result<(), ConfigError> {
    check_keys(doc, TOP_KEYS, "document")?;
    let sections = [("pde", PDE_KEYS), ("harnack", HARNACK_KEYS), ("grid", GRID_KEYS), ("time", TIME_KEYS), ("output", OUTPUT_KEYS)];
    for (name, keys) in sections {
        if let Some(v) = doc.get(name) {
            check_keys(v, keys, name)?;
        }
    }
    if let Some(init) = doc.get("init") {
        let kind = init.get("kind").and_then(Value::as_str).ok_or_else(|| {
            ConfigError::ConstraintViolation("init section needs a string \"kind\"".into())
        })?;
        let keys = init_keys(kind)
            .ok_or_else(|| ConfigError::ConstraintViolation(format!("unknown init kind {kind:?}")))?;
        check_keys(init, keys, "init")?;
    }
    Ok(())
}

fn constraint(e: impl std::fmt::Display) -> ConfigError {
    ConfigError::ConstraintViolation(e.to_string())
}

impl InitSection {
    fn to_core(&self) -> InitialCondition<f64> {
        match *self {
            Self::Constant { value } => InitialCondition::Constant(value),
            Self::Equilibrium => InitialCondition::Equilibrium,
            Self::SinePerturbed { amplitude, mode } => InitialCondition::SinePerturbed { amplitude, mode },
            Self::GaussianBump { center, width, floor } => InitialCondition::GaussianBump { center, width, floor },
            Self::RandomPositive { lo, hi, seed } => InitialCondition::RandomPositive { lo, hi, seed },
            Self::ExactFront { center } => InitialCondition::ExactFront { center },
            Self::Step { low, high, position } => InitialCondition::Step { low, high, position },
        }
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let doc: Value =
        serde_json::from_str(text).map_err(|e| ConfigError::Parse { line: e.line(), msg: e.to_string() })?;
    check_all_keys(&doc)?;
    let raw: RawConfig = serde_json::from_value(doc).map_err(constraint)?;

    let pde = PdeParams::new(raw.pde.a, raw.pde.b, raw.pde.dim).map_err(constraint)?;
    if !(raw.pde.dim == 1 || raw.pde.dim == 2) {
        return Err(ConfigError::ConstraintViolation(format!("pde.dim must be 1 or 2, got {}", raw.pde.dim)));
    }
    if let Some(bc) = &raw.grid.bc {
        if bc != "periodic" {
            return Err(ConfigError::ConstraintViolation(format!("grid.bc must be \"periodic\", got {bc:?}")));
        }
    }
    let grid = Grid::new(raw.pde.dim as usize, raw.grid.points, raw.grid.extent).map_err(constraint)?;

    let h = raw.harnack.unwrap_or(HarnackSection { alpha: None, beta: None, gamma: None, tolerance: None, t_min: None });
    let alpha = h.alpha.unwrap_or(1.0);
    let beta = h.beta.unwrap_or(0.0);
    let gamma = h.gamma.unwrap_or(-(pde.n() as f64) * pde.b() * alpha);
    let harnack = HarnackParams::validate(alpha, beta, gamma, pde).map_err(constraint)?;
    let tolerance = h.tolerance.unwrap_or(DEFAULT_TOLERANCE);
    let t_min = h.t_min.unwrap_or(DEFAULT_T_MIN);
    if !(tolerance > 0.0 && tolerance.is_finite()) {
        return Err(ConfigError::ConstraintViolation(format!("harnack.tolerance must be positive, got {tolerance}")));
    }
    if !(t_min > 0.0 && t_min.is_finite()) {
        return Err(ConfigError::ConstraintViolation(format!("harnack.t_min must be positive, got {t_min}")));
    }

    let t = &raw.time;
    if !(t.t_end > 0.0 && t.t_end.is_finite()) {
        return Err(ConfigError::ConstraintViolation(format!("time.t_end must be positive, got {}", t.t_end)));
    }
    let init = raw.init.unwrap_or(InitSection::SinePerturbed { amplitude: 0.1, mode: 1 });
    let solver = SolverConfig::new(pde, grid, init.to_core(), t.t_end)
        .with_cfl_safety(t.cfl_safety.unwrap_or(DEFAULT_CFL_SAFETY))
        .with_snapshot_interval(t.snapshot_interval.unwrap_or(t.t_end / DEFAULT_SNAPSHOTS));
    // Surface bad initial data and solver settings as configuration errors.
    solver.initial_condition.sample(&grid, &pde).map_err(constraint)?;
    if !(solver.cfl_safety > 0.0 && solver.cfl_safety <= 1.0) {
        return Err(ConfigError::ConstraintViolation("time.cfl_safety must lie in (0, 1]".into()));
    }
    if !(solver.snapshot_interval > 0.0 && solver.snapshot_interval.is_finite()) {
        return Err(ConfigError::ConstraintViolation("time.snapshot_interval must be positive".into()));
    }

    let output_dir = raw.output.map(|o| o.directory).unwrap_or_else(|| PathBuf::from("nwh-out"));
    Ok(RunConfig { pde, harnack, tolerance, t_min, solver, output_dir })
}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.into(), source })?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nwh_core::Branch;

    const MINIMAL: &str = r#"{
        "pde": {"a": 1, "b": 1, "dim": 1},
        "grid": {"extent": 20, "points": 64},
        "time": {"t_end": 1}
    }"#;

    #[test]
    fn minimal_document_gets_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.solver.cfl_safety, 0.4);
        assert_eq!(c.tolerance, 5e-3);
        assert_eq!(c.t_min, 0.05);
        assert_eq!(c.solver.snapshot_interval, 0.01);
        assert_eq!((c.harnack.alpha(), c.harnack.beta(), c.harnack.gamma()), (1.0, 0.0, -1.0));
        assert_eq!(c.harnack.branch(), Branch::C);
    }

    #[test]
    fn condition_a_is_named() {
        let doc = MINIMAL.replace(r#""time""#, r#""harnack": {"alpha": 1, "beta": 2, "gamma": -1}, "time""#);
        let err = parse_config(&doc).unwrap_err();
        assert!(matches!(err, ConfigError::ConstraintViolation(ref m) if m.contains("condition (a)")), "{err}");
    }

    #[test]
    fn unknown_keys_are_reported_by_name() {
        let doc = MINIMAL.replace(r#""time""#, r#""harnack": {"alpha": 1, "gamm": -1}, "time""#);
        match parse_config(&doc) {
            Err(ConfigError::UnknownKey(k)) => assert_eq!(k, "gamm"),
            other => panic!("unexpected {other:?}"),
        }
        let doc = MINIMAL.replace(r#""time""#, r#""init": {"kind": "step", "low": 0.1, "high": 1, "position": 3, "seed": 1}, "time""#);
        assert!(matches!(parse_config(&doc), Err(ConfigError::UnknownKey(k)) if k == "seed"));
        let doc = MINIMAL.replace(r#""time""#, r#""extra": 1, "time""#);
        assert!(matches!(parse_config(&doc), Err(ConfigError::UnknownKey(k)) if k == "extra"));
    }

    #[test]
    fn parse_errors_carry_the_line() {
        let doc = "{\n  \"pde\": {\"a\": 1,\n  \"b\": }\n}";
        assert!(matches!(parse_config(doc), Err(ConfigError::Parse { line: 3, .. })));
    }

    #[test]
    fn full_document() {
        let doc = r#"{
            "pde": {"a": 1, "b": 1, "dim": 1},
            "harnack": {"alpha": 1, "beta": 0.9, "gamma": -2, "tolerance": 1e-3, "t_min": 0.1},
            "grid": {"extent": 20, "points": 64, "bc": "periodic"},
            "time": {"t_end": 2, "cfl_safety": 0.3, "snapshot_interval": 0.1},
            "init": {"kind": "random_positive", "lo": 0.5, "hi": 1.5, "seed": 4},
            "output": {"directory": "runs/x"}
        }"#;
        let c = parse_config(doc).unwrap();
        assert_eq!(c.harnack.branch(), Branch::D);
        assert_eq!(c.output_dir, PathBuf::from("runs/x"));
        assert_eq!(c.solver.initial_condition, InitialCondition::RandomPositive { lo: 0.5, hi: 1.5, seed: 4 });
    }

    #[test]
    fn bad_values_are_constraint_violations() {
        for (from, to) in [
            (r#""points": 64"#, r#""points": 4"#),
            (r#""dim": 1"#, r#""dim": 3"#),
            (r#""t_end": 1"#, r#""t_end": -1"#),
            (r#""extent": 20, "#, r#""extent": 20, "bc": "dirichlet", "#),
        ] {
            let doc = MINIMAL.replace(from, to);
            assert!(matches!(parse_config(&doc), Err(ConfigError::ConstraintViolation(_))), "{to}");
        }
    }
}
