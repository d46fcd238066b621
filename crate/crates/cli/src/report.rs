use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use spencer_core::specseq::{ConvergenceReport, SpectralPage, SpectralSequence};

use crate::error::CliError;

pub const ARTIFACT: &str = "spencer";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const OUT_DIR_ENV: &str = "SPENCER_OUT_DIR";

/// Result of one command, before it is wrapped in the report envelope.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub command: &'static str,
    pub config: Value,
    pub result: Value,
    pub passed: bool,
    /// Rows of the human-readable table.
    pub summary: Vec<(String, String)>,
}

impl Outcome {
    pub fn envelope(&self) -> Value {
        json!({
            "artifact": ARTIFACT,
            "version": VERSION,
            "command": self.command,
            "config": self.config,
            "status": if self.passed { "ok" } else { "invariant_failure" },
            "result": self.result,
        })
    }

    pub fn render(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.envelope()).expect("json values serialize");
        s.push('\n');
        s
    }

    pub fn table(&self) -> String {
        let width = self.summary.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0);
        let mut out = format!("spencer {} [{}]\n", self.command, if self.passed { "ok" } else { "FAILED" });
        for (k, v) in &self.summary {
            out.push_str(&format!("  {k:<width$}  {v}\n"));
        }
        out
    }
}

pub fn default_report_path(command: &str) -> PathBuf {
    let dir = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."));
    dir.join(format!("{}.json", command.replace(' ', "-")))
}

pub fn write_report(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| CliError::input("out", format!("{}: {e}", parent.display())))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::input("out", format!("{}: {e}", path.display())))
}

pub fn pq_map(m: &BTreeMap<(usize, usize), usize>) -> Value {
    let obj: serde_json::Map<String, Value> = m.iter().map(|((p, q), d)| (format!("{p},{q}"), json!(d))).collect();
    Value::Object(obj)
}

pub fn page_json(page: &SpectralPage) -> Value {
    json!({
        "r": page.r,
        "dims": pq_map(&page.dims),
        "dr_ranks": pq_map(&page.dr_ranks),
    })
}

pub fn sequence_json(seq: &SpectralSequence, conv: &ConvergenceReport, total: &[usize]) -> Value {
    json!({
        "k": seq.slice,
        "label": seq.label,
        "pages": seq.pages.iter().map(page_json).collect::<Vec<_>>(),
        "N": seq.stable_index,
        "bounds": {
            "N_le_n_plus_1": conv.n_le_n_plus_1,
            "E2_degenerate": conv.e2_degenerate,
        },
        "total_cohomology": total,
        "E_inf_totals": seq.e_infinity_totals(),
        "oracle_match": seq.e_infinity_totals() == total,
        "filtration": conv.filtration,
    })
}

pub fn fmt_list<T: std::fmt::Display>(xs: &[T]) -> String {
    format!("[{}]", xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", "))
}
