//! Report writers. Every artifact is written atomically (temp file, rename)
//! and deterministically, so rerunning an experiment with the same config and
//! seed reproduces each file byte for byte.

use std::path::Path;

use linfty_ot::io::atomic_write;
use linfty_ot::measures::Coupling;

use crate::CliError;

/// Twelve significant digits, scientific notation. The one exception is an
/// exact zero, which prints as `0`.
pub fn sig(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else {
        format!("{x:.11e}")
    }
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    atomic_write(path, contents).map_err(|e| CliError::Config(format!("writing report: {e}")))
}

/// `summary.csv`: one `scenario,key,value` row per reported quantity.
pub fn write_summary(path: &Path, scenario: &str, rows: &[(String, String)]) -> Result<(), CliError> {
    let mut out = String::from("scenario,key,value\n");
    for (key, value) in rows {
        out.push_str(scenario);
        out.push(',');
        out.push_str(key);
        out.push(',');
        out.push_str(value);
        out.push('\n');
    }
    write(path, &out)
}

/// `certificate.json`: the full machine-readable verdicts and witnesses.
pub fn write_certificate(path: &Path, value: &serde_json::Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Config(format!("serializing certificate: {e}")))?;
    text.push('\n');
    write(path, &text)
}

/// `convergence.csv`: the exponent schedule next to the gap toward the
/// bottleneck value.
pub fn write_convergence(path: &Path, rows: &[(f64, f64, f64)]) -> Result<(), CliError> {
    let mut out = String::from("p,c_p,gap\n");
    for &(p, c_p, gap) in rows {
        out.push_str(&format!("{},{},{}\n", sig(p), sig(c_p), sig(gap)));
    }
    write(path, &out)
}

pub fn write_plan(path: &Path, plan: &Coupling) -> Result<(), CliError> {
    linfty_ot::io::write_coupling_csv(plan, path)
        .map_err(|e| CliError::Config(format!("writing plan: {e}")))
}
