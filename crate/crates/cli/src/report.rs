use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use serde::Serialize;

use crate::CliError;

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// What one run produced: per-level metrics, slopes, declared checks and a
/// free-form payload.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    pub levels: Vec<BTreeMap<String, f64>>,
    pub slopes: BTreeMap<String, String>,
    pub checks: Vec<Check>,
    pub data: serde_json::Value,
}

impl RunReport {
    pub fn new(command: &str) -> Self {
        RunReport {
            command: command.into(),
            levels: Vec::new(),
            slopes: BTreeMap::new(),
            checks: Vec::new(),
            data: serde_json::Value::Null,
        }
    }

    pub fn check(&mut self, name: &str, pass: bool, detail: String) {
        self.checks.push(Check { name: name.into(), pass, detail });
    }

    pub fn level(&mut self, metrics: &[(&str, f64)]) {
        self.levels.push(metrics.iter().map(|(k, v)| (k.to_string(), *v)).collect());
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn summary(&self) -> String {
        let mut s = format!("{}\n", self.command);
        for l in &self.levels {
            let parts: Vec<String> = l.iter().map(|(k, v)| format!("{k}={v:.6e}")).collect();
            s.push_str(&format!("  {}\n", parts.join(" ")));
        }
        for (k, v) in &self.slopes {
            s.push_str(&format!("  slope {k}: {v}\n"));
        }
        for c in &self.checks {
            s.push_str(&format!("  [{}] {}: {}\n", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail));
        }
        s
    }
}

/// Writes named artifacts into `--out` when given; otherwise discards them.
pub struct Output {
    dir: Option<PathBuf>,
}

impl Output {
    pub fn new(dir: Option<PathBuf>) -> Result<Self, CliError> {
        if let Some(d) = &dir {
            fs::create_dir_all(d).map_err(|e| CliError::Io(format!("cannot create {}: {e}", d.display())))?;
        }
        Ok(Output { dir })
    }

    pub fn enabled(&self) -> bool {
        self.dir.is_some()
    }

    pub fn text(&self, name: &str, body: &str) -> Result<(), CliError> {
        if let Some(d) = &self.dir {
            let p = d.join(name);
            fs::write(&p, body).map_err(|e| CliError::Io(format!("cannot write {}: {e}", p.display())))?;
        }
        Ok(())
    }

    pub fn csv(&self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        if self.dir.is_none() {
            return Ok(());
        }
        self.text(name, &csv_string(header, rows)?)
    }

    pub fn report(&self, r: &RunReport) -> Result<(), CliError> {
        let body = serde_json::to_string_pretty(r).map_err(|e| CliError::Io(e.to_string()))?;
        self.text("report.json", &(body + "\n"))
    }
}

pub fn csv_string(header: &[&str], rows: &[Vec<String>]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}

/// Shortest round-trip representation.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}
