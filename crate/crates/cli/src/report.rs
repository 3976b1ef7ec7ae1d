//! Human-readable summaries of written certificates.

use std::fmt::Write;
use std::path::{Path, PathBuf};

use nilfix::report::CheckRecord;
use serde::Deserialize;
use serde_json::Value;

use crate::artifacts::CERTIFICATE_FILE;
use crate::CliError;

#[derive(Debug, Deserialize)]
pub struct StoredCertificate {
    pub format: String,
    pub kind: String,
    pub seed: Option<u64>,
    pub pass: bool,
    pub checks: Vec<CheckRecord>,
    pub tables: Vec<String>,
    pub data: Value,
}

/// Accepts either a run directory or the certificate file itself.
pub fn certificate_path(path: &Path) -> PathBuf {
    if path.is_dir() {
        path.join(CERTIFICATE_FILE)
    } else {
        path.to_path_buf()
    }
}

pub fn load(path: &Path) -> Result<StoredCertificate, CliError> {
    let file = certificate_path(path);
    if !file.is_file() {
        return Err(CliError::MissingArtifact(file));
    }
    let text = std::fs::read_to_string(&file).map_err(|e| CliError::io(&file, e))?;
    let cert: StoredCertificate =
        serde_json::from_str(&text).map_err(|e| CliError::module(format!("reading {}", file.display()), e))?;
    for t in &cert.tables {
        let p = file.with_file_name(t);
        if !p.is_file() {
            return Err(CliError::MissingArtifact(p));
        }
    }
    Ok(cert)
}

/// One line per check, one line per locate stage, and a verdict line.
pub fn summarize(cert: &StoredCertificate) -> String {
    let mut out = String::new();
    let seed = cert.seed.map(|s| s.to_string()).unwrap_or_else(|| "none".into());
    writeln!(out, "{} ({}) seed={}", cert.kind, cert.format, seed).unwrap();
    for c in &cert.checks {
        writeln!(out, "{}", c.summary()).unwrap();
    }
    if let Some(stages) = cert.data.pointer("/global/stages").and_then(Value::as_array) {
        for st in stages {
            let q = st.get("q").map(Value::to_string).unwrap_or_default();
            let pass = st.get("inclusion_pass").and_then(Value::as_bool).unwrap_or(false);
            let excess = st.get("inclusion_excess").map(Value::to_string).unwrap_or_default();
            writeln!(
                out,
                "stage {} q={} inclusion {} excess={}",
                st.get("stage").map(Value::to_string).unwrap_or_default(),
                q,
                if pass { "PASS" } else { "FAIL" },
                excess
            )
            .unwrap();
        }
    }
    let passed = cert.checks.iter().filter(|c| c.pass).count();
    writeln!(out, "{} {}/{} checks passed", if cert.pass { "PASS" } else { "FAIL" }, passed, cert.checks.len())
        .unwrap();
    out
}
