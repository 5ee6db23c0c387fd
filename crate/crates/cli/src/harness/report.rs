use std::fs;
use std::io::Write;
use std::path::Path;

use pwcalc_core::io::{write_json, Versioned};
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ExperimentKind};
use super::HarnessError;

/// Pathwise checks are theorems on every path; statistical ones compare
/// Monte Carlo means, an empirical surrogate for upper expectations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    Pathwise,
    Statistical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    /// The invariant or acceptance criterion checked, e.g. `acceptance:sandwich`.
    pub cites: String,
    pub kind: CheckKind,
    pub passed: bool,
    pub observed: f64,
    pub tolerance: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_score: Option<f64>,
    pub detail: String,
}

impl Verdict {
    pub fn pathwise(cites: &str, violations: u64, cases: u64) -> Self {
        Verdict {
            cites: cites.into(),
            kind: CheckKind::Pathwise,
            passed: violations == 0,
            observed: violations as f64,
            tolerance: "zero violations".into(),
            z_score: None,
            detail: format!("{violations} violations in {cases} cases"),
        }
    }

    pub fn statistical(cites: &str, passed: bool, observed: f64, tolerance: &str, detail: String) -> Self {
        Verdict {
            cites: cites.into(),
            kind: CheckKind::Statistical,
            passed,
            observed,
            tolerance: tolerance.into(),
            z_score: None,
            detail,
        }
    }

    pub fn with_z(mut self, z: f64) -> Self {
        self.z_score = Some(z);
        self
    }
}

/// A numeric table, written as `<name>.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), HarnessError> {
        let mut w = std::io::BufWriter::new(out);
        writeln!(w, "{}", self.columns.join(","))?;
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|v| format!("{v:?}")).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Run facts that vary between identical runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub runtime_seconds: f64,
    pub threads: usize,
    pub unix_time: u64,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub experiment: ExperimentKind,
    pub config: ExperimentConfig,
    pub verdicts: Vec<Verdict>,
    pub tables: Vec<Table>,
    /// Written to `metadata.json`, so that `report.json` is reproducible.
    #[serde(skip)]
    pub metadata: Option<Metadata>,
}

impl Report {
    /// The echoed configuration omits `output_dir`, so that a report depends
    /// only on what was computed.
    pub fn new(config: &ExperimentConfig) -> Self {
        Report {
            experiment: config.experiment,
            config: ExperimentConfig { output_dir: None, ..config.clone() },
            verdicts: Vec::new(),
            tables: Vec::new(),
            metadata: None,
        }
    }

    pub fn verdict(&self, cites: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.cites == cites)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn pathwise_failures(&self) -> usize {
        self.verdicts.iter().filter(|v| v.kind == CheckKind::Pathwise && !v.passed).count()
    }

    pub fn statistical_failures(&self) -> usize {
        self.verdicts.iter().filter(|v| v.kind == CheckKind::Statistical && !v.passed).count()
    }

    /// Whether the run should exit nonzero.
    pub fn failed(&self, strict_mc: bool) -> bool {
        self.pathwise_failures() > 0 || (strict_mc && self.statistical_failures() > 0)
    }

    /// `report.json`, `metadata.json` and one CSV per table under `dir`.
    pub fn write(&self, dir: &Path) -> Result<(), HarnessError> {
        fs::create_dir_all(dir)?;
        write_json(&dir.join("report.json"), &Versioned::new(self))?;
        if let Some(meta) = &self.metadata {
            write_json(&dir.join("metadata.json"), &Versioned::new(meta))?;
        }
        for t in &self.tables {
            t.write_csv(fs::File::create(dir.join(format!("{}.csv", t.name)))?)?;
        }
        Ok(())
    }

    pub fn summary(&self) -> String {
        let mut s = format!("{}: {} verdicts\n", self.experiment, self.verdicts.len());
        for v in &self.verdicts {
            let tag = if v.passed { "PASS" } else { "FAIL" };
            let kind = match v.kind {
                CheckKind::Pathwise => "pathwise",
                CheckKind::Statistical => "statistical",
            };
            s += &format!("  [{tag}] {} ({kind}): {}\n", v.cites, v.detail);
        }
        s
    }
}
