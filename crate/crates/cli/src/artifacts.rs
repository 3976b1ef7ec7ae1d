//! In-memory artifacts and their atomic write-out.

use std::io::Write;
use std::path::{Path, PathBuf};

use nilfix::report::CheckRecord;
use serde::Serialize;
use serde_json::Value;

use crate::CliError;

pub const CERTIFICATE_FILE: &str = "certificate.json";
pub const CERTIFICATE_FORMAT: &str = "nilfix-certificate/1";
pub const CSV_VERSION: u32 = 1;

/// A CSV table with a versioned header line.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvTable {
    pub name: String,
    pub schema: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(name: &str, schema: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            schema: schema.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }

    /// `# nilfix-csv <schema> v<version>` followed by the column header and rows.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = format!("# nilfix-csv {} v{}\n", self.schema, CSV_VERSION).into_bytes();
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(&mut out);
        w.write_record(&self.columns).expect("writing to memory");
        for r in &self.rows {
            w.write_record(r).expect("writing to memory");
        }
        w.flush().expect("writing to memory");
        drop(w);
        out
    }
}

/// Everything a run produces.
#[derive(Clone, Debug, PartialEq)]
pub struct Artifacts {
    pub kind: String,
    pub seed: Option<u64>,
    pub params: Value,
    pub checks: Vec<CheckRecord>,
    pub data: Value,
    pub tables: Vec<CsvTable>,
}

#[derive(Serialize)]
struct Certificate<'a> {
    format: &'a str,
    kind: &'a str,
    seed: Option<u64>,
    pass: bool,
    checks: &'a [CheckRecord],
    tables: Vec<String>,
    params: &'a Value,
    data: &'a Value,
}

impl Artifacts {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn certificate_bytes(&self) -> Vec<u8> {
        let cert = Certificate {
            format: CERTIFICATE_FORMAT,
            kind: &self.kind,
            seed: self.seed,
            pass: self.pass(),
            checks: &self.checks,
            tables: self.tables.iter().map(CsvTable::file_name).collect(),
            params: &self.params,
            data: &self.data,
        };
        let mut out = serde_json::to_vec_pretty(&cert).expect("certificate serialises");
        out.push(b'\n');
        out
    }

    /// `(file name, contents)` for every artifact, certificate last.
    pub fn files(&self) -> Vec<(String, Vec<u8>)> {
        let mut files: Vec<(String, Vec<u8>)> = self.tables.iter().map(|t| (t.file_name(), t.to_bytes())).collect();
        files.push((CERTIFICATE_FILE.to_string(), self.certificate_bytes()));
        files
    }

    /// Writes each file to a temporary name in `dir` and renames it into place.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let mut written = Vec::new();
        for (name, bytes) in self.files() {
            let target = dir.join(&name);
            let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
            tmp.write_all(&bytes).map_err(|e| CliError::io(tmp.path(), e))?;
            tmp.as_file().sync_all().map_err(|e| CliError::io(tmp.path(), e))?;
            tmp.persist(&target).map_err(|e| CliError::io(&target, e.error))?;
            written.push(target);
        }
        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_header_is_versioned() {
        let mut t = CsvTable::new("eps", "calc/eps_table", &["sigma", "eps"]);
        t.push(vec!["0".into(), "1/8".into()]);
        let s = String::from_utf8(t.to_bytes()).unwrap();
        assert_eq!(s, "# nilfix-csv calc/eps_table v1\nsigma,eps\n0,1/8\n");
    }
}
