//! CSV records and JSON summaries.
//!
//! The CSV starts with one `#` line carrying the timestamp; everything after
//! it, and the whole JSON document, depends only on the configuration.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{json, Value};
use subfinsler_core::sampling::RNG_ALGORITHM;
use subfinsler_core::ResidualReport;

use crate::config::RunConfig;
use crate::suites::SuiteOutput;
use crate::CliError;

/// 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn csv_body(reports: &[ResidualReport]) -> String {
    let width = reports
        .iter()
        .flat_map(|r| r.records.iter().map(|x| x.point.len()))
        .max()
        .unwrap_or(0);
    let mut s = String::from("suite");
    for i in 0..width {
        let _ = write!(s, ",x{i}");
    }
    s.push_str(",lhs,rhs,abs_res,rel_res\n");
    for r in reports {
        for rec in &r.records {
            s.push_str(&r.suite);
            for i in 0..width {
                s.push(',');
                if let Some(v) = rec.point.get(i) {
                    s.push_str(&fmt_f64(*v));
                }
            }
            for v in [rec.lhs, rec.rhs, rec.abs(), rec.rel()] {
                s.push(',');
                s.push_str(&fmt_f64(v));
            }
            s.push('\n');
        }
    }
    s
}

pub fn csv_header(command: &str, cfg: &RunConfig) -> String {
    let now = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!(
        "# subfinsler {command} generated_unix={now} rng=\"{RNG_ALGORITHM}\" seed={}\n",
        cfg.seed
    )
}

pub fn summary_json(command: &str, cfg: &RunConfig, out: &SuiteOutput) -> Value {
    let suites: Vec<Value> = out
        .reports
        .iter()
        .map(|r| serde_json::to_value(r.summary()).unwrap_or(Value::Null))
        .collect();
    json!({
        "command": command,
        "rng": RNG_ALGORITHM,
        "seed": cfg.seed,
        "norm_pair": cfg.norm_pair,
        "params": {
            "m": cfg.params.m,
            "k": cfg.params.k,
            "alpha": cfg.params.alpha,
            "p": cfg.params.p,
        },
        "sample_count": cfg.sample_count,
        "pass": out.passed(),
        "suites": suites,
        "results": Value::Object(out.extras.clone()),
    })
}

/// `<stem>.json` next to the CSV path.
pub fn json_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

pub fn write_outputs(path: &Path, command: &str, cfg: &RunConfig, out: &SuiteOutput) -> Result<(), CliError> {
    let mut csv = csv_header(command, cfg);
    csv.push_str(&csv_body(&out.reports));
    std::fs::write(path, csv).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let j = summary_json(command, cfg, out);
    let text = serde_json::to_string_pretty(&j).map_err(|e| CliError::Io(e.to_string()))? + "\n";
    let jp = json_path(path);
    std::fs::write(&jp, text).map_err(|e| CliError::Io(format!("{}: {e}", jp.display())))?;
    Ok(())
}

/// One line per suite for the terminal.
pub fn status_lines(out: &SuiteOutput) -> String {
    let mut s = String::new();
    for r in &out.reports {
        let _ = writeln!(
            s,
            "{} {:<32} n={:<5} max_rel={:.3e} tol={:.1e}",
            if r.passed() { "PASS" } else { "FAIL" },
            r.suite,
            r.records.len(),
            r.max_rel(),
            r.tolerance
        );
    }
    s
}
