//! Run manifests and continuum-versus-lattice comparison tables.

use std::fs;
use std::path::Path;

use qilab::io::{csv_table, json_text, write_atomic};
use qilab::pulses::Pchip;
use serde::{Deserialize, Serialize};

use crate::Failure;

/// One density table written by a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: f64,
    pub file: String,
}

/// Everything needed to reproduce the files of one run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub version: String,
    pub timestamp: String,
    pub parameters: serde_json::Value,
    /// Effective barrier `(λV₀, a)`, when the run has one.
    pub barrier: Option<(f64, f64)>,
    /// Continuum (`x,t00r`) or lattice (`x,t00`) density tables by time.
    pub snapshots: Vec<Snapshot>,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(subcommand: &str, parameters: serde_json::Value) -> Self {
        Self {
            subcommand: subcommand.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            timestamp: chrono::Utc::now().to_rfc3339(),
            parameters,
            barrier: None,
            snapshots: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn file_name(subcommand: &str) -> String {
        format!("manifest_{subcommand}.json")
    }

    /// Writes `contents` into `out` and records the file.
    pub fn emit(&mut self, out: &Path, name: &str, contents: &str) -> Result<(), Failure> {
        write_atomic(&out.join(name), contents)?;
        self.outputs.push(name.into());
        Ok(())
    }

    pub fn save(&self, out: &Path) -> Result<(), Failure> {
        let value = serde_json::to_value(self).expect("manifest is plain data");
        write_atomic(&out.join(Self::file_name(&self.subcommand)), &json_text(&value))?;
        Ok(())
    }

    fn load(out: &Path, subcommand: &str) -> Option<Self> {
        let text = fs::read_to_string(out.join(Self::file_name(subcommand))).ok()?;
        serde_json::from_str(&text).ok()
    }
}

fn read_table(path: &Path) -> Result<(Vec<f64>, Vec<f64>), Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    let mut x = Vec::new();
    let mut y = Vec::new();
    for line in text.lines().skip(1) {
        let mut cols = line.split(',').map(|c| c.trim().parse::<f64>());
        match (cols.next(), cols.next()) {
            (Some(Ok(a)), Some(Ok(b))) => {
                x.push(a);
                y.push(b);
            }
            _ => {
                return Err(Failure::Usage(format!(
                    "malformed row `{line}` in {}",
                    path.display()
                )))
            }
        }
    }
    Ok((x, y))
}

/// Writes `compare_<i>.csv` (`x,t,continuum,lattice,difference`) for every
/// lattice snapshot that has a continuum snapshot of the same barrier and
/// time. Returns the tables written.
pub fn compare(out: &Path) -> Result<Vec<String>, Failure> {
    let Some(lattice) = RunManifest::load(out, "oracle") else {
        return Ok(Vec::new());
    };
    let continuum: Vec<RunManifest> = ["density", "pulses"]
        .iter()
        .filter_map(|s| RunManifest::load(out, s))
        .filter(|m| m.barrier.is_some() && m.barrier == lattice.barrier)
        .collect();
    let mut written = Vec::new();
    for (i, snap) in lattice.snapshots.iter().enumerate() {
        let Some(cont) = continuum
            .iter()
            .flat_map(|m| m.snapshots.iter())
            .find(|s| s.t == snap.t)
        else {
            continue;
        };
        let (cx, cy) = read_table(&out.join(&cont.file))?;
        let (lx, ly) = read_table(&out.join(&snap.file))?;
        let interp = Pchip::new(&cx, &cy)?;
        let (lo, hi) = (cx[0], cx[cx.len() - 1]);
        let rows = lx
            .iter()
            .zip(&ly)
            .filter(|(x, _)| **x >= lo && **x <= hi)
            .map(|(x, l)| {
                let c = interp.eval(*x);
                vec![*x, snap.t, c, *l, l - c]
            });
        let name = format!("compare_{i}.csv");
        write_atomic(
            &out.join(&name),
            &csv_table(&["x", "t", "continuum", "lattice", "difference"], rows),
        )?;
        written.push(name);
    }
    Ok(written)
}
