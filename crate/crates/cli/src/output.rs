//! CSV tables and atomic file output.
//!
//! Layout: the header is the first line, followed by `#` comment lines
//! (parameter echo, seed, version, warnings) and then the data rows.
//! Floats use the shortest representation that parses back to the same
//! value.

use std::io::Write;
use std::path::Path;

use qlight::SystemParams;

use crate::config::RunConfig;
use crate::CliError;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub comments: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(columns: &[S]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.as_ref().to_string()).collect(),
            ..Default::default()
        }
    }

    pub fn comment(&mut self, line: impl Into<String>) {
        self.comments.push(line.into());
    }

    pub fn push_numbers(&mut self, row: &[f64]) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row.iter().map(|v| format!("{v}")).collect());
    }

    pub fn push_row(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        let mut out = String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf8");
        for c in &self.comments {
            for line in c.lines() {
                out.push_str("# ");
                out.push_str(line);
                out.push('\n');
            }
        }
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(Vec::new());
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        out.push_str(&String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf8"));
        out
    }

    pub fn parse(text: &str) -> Result<Table, csv::Error> {
        let comments = text
            .lines()
            .filter_map(|l| l.strip_prefix('#'))
            .map(|l| l.trim_start().to_string())
            .collect();
        let mut r = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let columns = r.headers()?.iter().map(String::from).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|rec| rec.iter().map(String::from).collect()))
            .collect::<Result<_, _>>()?;
        Ok(Table {
            columns,
            comments,
            rows,
        })
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Values of a numeric column; `None` if absent or not numeric.
    pub fn column_f64(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.column_index(name)?;
        self.rows.iter().map(|r| r[i].parse().ok()).collect()
    }

    pub fn write_atomic(&self, path: &Path) -> Result<(), CliError> {
        write_atomic(path, self.to_csv().as_bytes())
    }
}

/// Writes to a temporary file in the target directory, then renames it
/// into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let io = |e: std::io::Error| CliError::Io {
        path: path.display().to_string(),
        reason: e.to_string(),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// Provenance lines shared by every output file.
pub fn provenance(command: &str, cfg: &RunConfig) -> Vec<String> {
    let p: &SystemParams = &cfg.params;
    vec![
        format!("qlight {} {command}", env!("CARGO_PKG_VERSION")),
        format!("scenario = {}", p.scenario.name()),
        format!(
            "omega0 = {}, omega1 = {}, v0 = {}, gamma_r = {}, gamma_nr = {}, gamma_perp = {}, gamma_u = {}, pump_r = {}, omega_l_rabi = {}",
            p.omega0, p.omega1, p.v0, p.gamma_r, p.gamma_nr, p.gamma_perp, p.gamma_u, p.pump_r, p.omega_l_rabi
        ),
        format!("unit_scale = {} {} per internal unit", cfg.unit_scale, cfg.unit_name),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_exact() {
        let mut t = Table::new(&["x", "y"]);
        t.comment("hello");
        t.comment("two\nlines");
        let vals = [0.1 + 0.2, 1.0 / 3.0, 6.02214076e23, -1e-300, 0.0];
        for v in vals {
            t.push_numbers(&[v, v * 7.0]);
        }
        let back = Table::parse(&t.to_csv()).unwrap();
        assert_eq!(back.comments, vec!["hello", "two", "lines"]);
        assert_eq!(back.column_f64("x").unwrap(), vals.to_vec());
        assert!(t.to_csv().starts_with("x,y\n# hello\n"));
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.csv");
        std::fs::write(&path, "old").unwrap();
        write_atomic(&path, b"new").unwrap();
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "new");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
