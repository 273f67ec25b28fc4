//! Run records: CSV rows, named checks, and the JSON summary.

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::HarnessError;

/// Bumped whenever the CSV columns change.
pub const CSV_SCHEMA_VERSION: u32 = 1;
pub const CSV_COLUMNS: [&str; 11] = [
    "experiment",
    "family",
    "param",
    "r",
    "epsilon",
    "replicas",
    "estimate",
    "stderr",
    "bound",
    "binding",
    "seed",
];

/// Whether a printed bound can actually constrain an estimate in `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Binding {
    Binding,
    Vacuous,
    None,
}

impl Binding {
    pub fn of(bound: Option<f64>) -> Binding {
        match bound {
            Some(b) if b < 1.0 => Binding::Binding,
            Some(_) => Binding::Vacuous,
            None => Binding::None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub experiment: String,
    pub family: String,
    pub param: String,
    pub r: Option<usize>,
    pub epsilon: Option<f64>,
    pub replicas: usize,
    pub estimate: f64,
    pub stderr: f64,
    pub bound: Option<f64>,
    pub binding: Binding,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunRecord {
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub version: String,
    pub schema_version: u32,
    pub wall_time_secs: f64,
    pub rows: Vec<Row>,
    pub checks: Vec<Check>,
}

impl RunRecord {
    pub fn new(config: &ExperimentConfig) -> Self {
        RunRecord {
            config: config.clone(),
            config_hash: config.hash(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            schema_version: CSV_SCHEMA_VERSION,
            wall_time_secs: 0.0,
            rows: Vec::new(),
            checks: Vec::new(),
        }
    }

    #[allow(clippy::too_many_arguments)]
    pub fn push_row(
        &mut self,
        param: impl Into<String>,
        r: Option<usize>,
        epsilon: Option<f64>,
        replicas: usize,
        estimate: f64,
        stderr: f64,
        bound: Option<f64>,
    ) {
        self.rows.push(Row {
            experiment: self.config.experiment.name().to_string(),
            family: self.config.family.clone(),
            param: param.into(),
            r,
            epsilon,
            replicas,
            estimate,
            stderr,
            bound,
            binding: Binding::of(bound),
            seed: self.config.master_seed,
        });
    }

    pub fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// CSV with a header line. Contains no timing, so it is reproducible byte for byte.
    pub fn to_csv(&self) -> Result<String, HarnessError> {
        rows_to_csv(&self.rows)
    }

    pub fn to_json(&self) -> Result<String, HarnessError> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

pub fn rows_to_csv(rows: &[Row]) -> Result<String, HarnessError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| HarnessError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentKind;

    #[test]
    fn csv_layout() {
        let mut rec = RunRecord::new(&ExperimentConfig::defaults(ExperimentKind::ThmTree));
        rec.push_row("D=2", Some(30), None, 100, 0.25, 0.01, Some(0.65));
        rec.push_row("D=2", Some(3), None, 100, 0.5, 0.02, Some(3.75));
        let csv = rec.to_csv().unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_COLUMNS.join(","));
        assert_eq!(
            lines[1],
            "thm_tree,path,D=2,30,,100,0.25,0.01,0.65,binding,1"
        );
        assert_eq!(lines[2], "thm_tree,path,D=2,3,,100,0.5,0.02,3.75,vacuous,1");
    }

    #[test]
    fn checks_aggregate() {
        let mut rec = RunRecord::new(&ExperimentConfig::defaults(ExperimentKind::Lln));
        rec.check("a", true, "");
        assert!(rec.passed());
        rec.check("b", false, "off by one");
        assert!(!rec.passed());
        assert_eq!(rec.failed_checks().count(), 1);
    }
}
