//! Tables, checks and the JSON manifest written next to them.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use super::ExperimentConfig;
use crate::{Error, Result};

/// Plot-ready numeric table.
#[derive(Clone, Debug, Serialize)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: &[&str]) -> Self {
        Self { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.header.len(), "row width of table {}", self.name);
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Vec<f64> {
        let k = self.header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
        self.rows.iter().map(|r| r[k]).collect()
    }

    /// Fixed 12-digit scientific format, so equal inputs give equal bytes.
    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|v| format!("{v:.12e}")).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }
}

/// A named assertion evaluated by a study.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub anchor: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(anchor: &str, passed: bool, detail: impl Into<String>) -> Self {
        Self { anchor: anchor.into(), passed, detail: detail.into() }
    }

    /// value ≤ limit.
    pub fn at_most(anchor: &str, value: f64, limit: f64) -> Self {
        Self::new(anchor, value <= limit, format!("{value:.6e} <= {limit:.6e}"))
    }
}

/// Output of one study.
#[derive(Clone, Debug, Default, Serialize)]
pub struct StudyReport {
    pub study: String,
    pub tables: Vec<Table>,
    pub fitted: Map<String, Value>,
    pub checks: Vec<Check>,
    pub summary: Map<String, Value>,
}

impl StudyReport {
    pub fn new(study: &str) -> Self {
        Self { study: study.into(), ..Default::default() }
    }

    pub fn fit(&mut self, key: &str, v: impl Serialize) {
        self.fitted.insert(key.into(), json!(v));
    }

    pub fn note(&mut self, key: &str, v: impl Serialize) {
        self.summary.insert(key.into(), json!(v));
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// First failed check as an error naming its anchor.
    pub fn ensure(&self) -> Result<()> {
        match self.checks.iter().find(|c| !c.passed) {
            Some(c) => Err(Error::CheckFailed { anchor: c.anchor.clone(), detail: c.detail.clone() }),
            None => Ok(()),
        }
    }

    pub fn manifest(&self, cfg: &ExperimentConfig) -> Value {
        json!({
            "study": self.study,
            "config_sha256": config_hash(cfg),
            "versions": { "cgolab": env!("CARGO_PKG_VERSION"), "format": 1 },
            "files": self.tables.iter().map(|t| format!("{}.csv", t.name)).collect::<Vec<_>>(),
            "fitted": self.fitted,
            "checks": self.checks,
            "summary": self.summary,
        })
    }

    /// Writes every table as `<name>.csv` and `<study>_manifest.json`.
    pub fn write(&self, cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        for t in &self.tables {
            let p = dir.join(format!("{}.csv", t.name));
            fs::write(&p, t.to_csv())?;
            written.push(p);
        }
        let p = dir.join(format!("{}_manifest.json", self.study));
        let text = serde_json::to_string_pretty(&self.manifest(cfg)).map_err(|e| Error::Parse(e.to_string()))?;
        fs::write(&p, text + "\n")?;
        written.push(p);
        Ok(written)
    }
}

/// SHA-256 of the canonical TOML rendering of the configuration.
pub fn config_hash(cfg: &ExperimentConfig) -> String {
    let digest = Sha256::digest(cfg.to_toml().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_is_fixed_format() {
        let mut t = Table::new("x", &["a", "b"]);
        t.push(vec![1.0, -0.5]);
        assert_eq!(t.to_csv(), "a,b\n1.000000000000e0,-5.000000000000e-1\n");
        assert_eq!(t.column("b"), vec![-0.5]);
    }

    #[test]
    fn failed_check_names_anchor() {
        let mut r = StudyReport::new("s");
        r.check(Check::at_most("connection-difference-identity", 2.0, 1.0));
        match r.ensure() {
            Err(Error::CheckFailed { anchor, .. }) => assert_eq!(anchor, "connection-difference-identity"),
            other => panic!("{other:?}"),
        }
        assert_eq!(config_hash(&ExperimentConfig::default()).len(), 64);
    }
}
