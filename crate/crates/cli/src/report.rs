//! PASS/FAIL lines, `summary.json` and the violations file.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::CliError;

/// Where a failing check was worst.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Location {
    pub t: Option<f64>,
    pub node: Option<usize>,
    pub value: f64,
}

/// Outcome of one named check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    /// Signed distance to failure; negative beyond the tolerance means FAIL.
    pub worst_slack: f64,
    pub tolerance: f64,
    #[serde(skip)]
    pub detail: String,
    #[serde(skip)]
    pub worst: Location,
}

impl Check {
    pub fn new(name: &str, worst_slack: f64, tolerance: f64, detail: String, worst: Location) -> Self {
        Self { name: name.into(), pass: worst_slack >= -tolerance, worst_slack, tolerance, detail, worst }
    }

    pub fn line(&self) -> String {
        format!("{} {}: {}", if self.pass { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

/// Formats with 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

#[derive(Serialize)]
struct Summary<'a> {
    command: &'a str,
    status: &'a str,
    checks: Vec<SummaryCheck<'a>>,
}

#[derive(Serialize)]
struct SummaryCheck<'a> {
    name: &'a str,
    status: &'a str,
    worst_slack: f64,
    tolerance: f64,
}

fn status(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Prints one line per check and writes `summary.json` and `violations.csv`
/// (one record per failing check) under `dir`.
pub fn finish(command: &str, checks: &[Check], dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    for c in checks {
        println!("{}", c.line());
    }
    let summary = Summary {
        command,
        status: status(checks.iter().all(|c| c.pass)),
        checks: checks
            .iter()
            .map(|c| SummaryCheck { name: &c.name, status: status(c.pass), worst_slack: c.worst_slack, tolerance: c.tolerance })
            .collect(),
    };
    let mut f = BufWriter::new(File::create(dir.join("summary.json"))?);
    serde_json::to_writer_pretty(&mut f, &summary)?;
    writeln!(f)?;

    let mut v = BufWriter::new(File::create(dir.join("violations.csv"))?);
    writeln!(v, "check,t,node,value,worst_slack,tolerance")?;
    for c in checks.iter().filter(|c| !c.pass) {
        writeln!(
            v,
            "{},{},{},{},{},{}",
            c.name,
            opt(c.worst.t.map(num)),
            opt(c.worst.node),
            num(c.worst.value),
            num(c.worst_slack),
            num(c.tolerance)
        )?;
    }
    v.flush()?;
    Ok(())
}

pub fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}
