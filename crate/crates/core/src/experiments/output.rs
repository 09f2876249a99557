//! CSV output of sweep rows.

use std::fs::{File, OpenOptions};
use std::path::{Path, PathBuf};

use super::{ResultRow, Value};
use crate::error::{Error, Result};

/// Floats are written with 12 significant digits.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else if x == 0.0 {
        "0".into()
    } else {
        format!("{x:.11e}")
    }
}

impl Value {
    pub fn render(&self) -> String {
        match self {
            Value::Num(x) => format_float(*x),
            Value::Int(i) => i.to_string(),
            Value::Bool(b) => b.to_string(),
            Value::Text(s) => s.clone(),
        }
    }
}

impl ResultRow {
    /// Deterministic columns: coordinates, results, diagnostics, status.
    pub fn header(&self) -> Vec<String> {
        let mut h: Vec<String> = self.coords.iter().map(|(k, _)| k.clone()).collect();
        h.extend(["fidelity", "fidelity_at_max", "trace_drift", "converged"].map(String::from));
        h.extend(self.diagnostics.iter().map(|(k, _)| k.clone()));
        h.push("status".into());
        h
    }

    pub fn record(&self) -> Vec<String> {
        let mut r: Vec<String> = self.coords.iter().map(|(_, v)| v.render()).collect();
        r.push(format_float(self.fidelity));
        r.push(format_float(self.fidelity_at_max));
        r.push(format_float(self.trace_drift));
        r.push(self.converged.to_string());
        r.extend(self.diagnostics.iter().map(|(_, v)| v.render()));
        r.push(self.status.clone());
        r
    }

    fn timing_record(&self, index: usize) -> Vec<String> {
        let mut r = vec![index.to_string()];
        r.extend(self.coords.iter().map(|(_, v)| v.render()));
        r.push(format!("{:.3}", self.runtime_s));
        r.push(self.within_budget.to_string());
        r
    }

    fn timing_header(&self) -> Vec<String> {
        let mut h = vec!["row".to_string()];
        h.extend(self.coords.iter().map(|(k, _)| k.clone()));
        h.extend(["runtime_s", "within_budget"].map(String::from));
        h
    }
}

/// Wall-time sidecar next to `path`: `name.csv` becomes `name.runtime.csv`.
pub fn runtime_path(path: &Path) -> PathBuf {
    sibling(path, "runtime")
}

/// Completion-order log next to `path`, kept until the final file is written.
pub fn partial_path(path: &Path) -> PathBuf {
    sibling(path, "partial")
}

fn sibling(path: &Path, tag: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = path.extension().map(|s| s.to_string_lossy().into_owned());
    let name = match ext {
        Some(e) => format!("{stem}.{tag}.{e}"),
        None => format!("{stem}.{tag}"),
    };
    path.with_file_name(name)
}

/// Writes rows in the given order, with a header line. Wall times go to the
/// [`runtime_path`] sidecar so the main file is reproducible bit for bit.
pub fn write_results(rows: &[ResultRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let first = rows
        .first()
        .ok_or_else(|| Error::Config("no result rows to write".into()))?;
    let header = first.header();
    if let Some(bad) = rows.iter().find(|r| r.header() != header) {
        return Err(Error::Config(format!("row columns {:?} differ from {:?}", bad.header(), header)));
    }
    write_table(path, &header, rows.iter().map(ResultRow::record))?;
    write_table(
        &runtime_path(path),
        &first.timing_header(),
        rows.iter().enumerate().map(|(i, r)| r.timing_record(i)),
    )
}

/// Writes a header and records as CSV.
pub fn write_table(path: &Path, header: &[String], records: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(File::create(path)?);
    w.write_record(header)?;
    for r in records {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

/// Appends rows as they complete, tagged with their grid index.
pub(crate) struct PartialLog {
    writer: csv::Writer<File>,
    wrote_header: bool,
}

impl PartialLog {
    pub(crate) fn create(path: &Path) -> Result<Self> {
        let file = OpenOptions::new().create(true).write(true).truncate(true).open(path)?;
        Ok(Self {
            writer: csv::WriterBuilder::new().flexible(true).from_writer(file),
            wrote_header: false,
        })
    }

    pub(crate) fn append(&mut self, index: usize, row: &ResultRow) -> Result<()> {
        if !self.wrote_header {
            let mut h = vec!["row".to_string()];
            h.extend(row.header());
            h.push("runtime_s".into());
            self.writer.write_record(&h)?;
            self.wrote_header = true;
        }
        let mut r = vec![index.to_string()];
        r.extend(row.record());
        r.push(format!("{:.3}", row.runtime_s));
        self.writer.write_record(&r)?;
        self.writer.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(i: usize) -> ResultRow {
        ResultRow {
            coords: vec![("m".into(), Value::Int(i as i64))],
            fidelity: 1.0 / (i as f64 + 3.0),
            fidelity_at_max: 0.5,
            trace_drift: 1e-13,
            runtime_s: 0.25,
            converged: true,
            within_budget: true,
            diagnostics: vec![("steps".into(), Value::Int(10))],
            status: "ok".into(),
        }
    }

    #[test]
    fn three_rows_four_lines_and_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        let rows: Vec<_> = (0..3).map(row).collect();
        write_results(&rows, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 4);
        let mut r = csv::Reader::from_path(&path).unwrap();
        for (rec, orig) in r.records().zip(&rows) {
            let f: f64 = rec.unwrap()[1].parse().unwrap();
            assert!(((f - orig.fidelity) / orig.fidelity).abs() < 1e-11);
        }
        assert!(runtime_path(&path).exists());
    }

    #[test]
    fn empty_rows_create_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        assert!(write_results(&[], &path).is_err());
        assert!(!path.exists());
    }

    #[test]
    fn unwritable_path_is_io_error() {
        let err = write_results(&[row(0)], "/nonexistent/dir/out.csv").unwrap_err();
        assert!(matches!(err, Error::Io(_)), "{err:?}");
    }

    #[test]
    fn sidecar_names() {
        assert_eq!(runtime_path(Path::new("a/fig6.csv")), PathBuf::from("a/fig6.runtime.csv"));
        assert_eq!(partial_path(Path::new("fig6")), PathBuf::from("fig6.partial"));
    }

    #[test]
    fn twelve_digits() {
        assert_eq!(format_float(0.93071234567891), "9.30712345679e-1");
    }
}
