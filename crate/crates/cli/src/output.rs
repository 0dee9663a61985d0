//! CSV tables with a `#`-prefixed manifest, written atomically.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use crate::error::CliError;

pub struct Table {
    pub name: String,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(name: impl Into<String>, columns: Vec<&'static str>) -> Self {
        Self { name: name.into(), columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, manifest: &str) -> String {
        let mut s = String::new();
        for line in manifest.lines() {
            writeln!(s, "# {line}").unwrap();
        }
        writeln!(s, "{}", self.columns.join(",")).unwrap();
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(s, "{}", cells.join(",")).unwrap();
        }
        s
    }
}

/// Write through a temporary file in the same directory, then rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp: PathBuf = dir.join(format!(".{name}.tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })?;
    Ok(())
}

pub fn write_tables(dir: &Path, manifest: &str, tables: &[Table]) -> Result<Vec<PathBuf>, CliError> {
    tables
        .iter()
        .map(|t| {
            let path = dir.join(format!("{}.csv", t.name));
            write_atomic(&path, &t.render(manifest))?;
            Ok(path)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout() {
        let mut t = Table::new("x", vec!["a_hz", "b"]);
        t.push(vec![1.0, -0.5]);
        t.push(vec![2e6, 1.0 / 3.0]);
        let s = t.render("eitsq 0.1\nscenario = x");
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "# eitsq 0.1");
        assert_eq!(lines[2], "a_hz,b");
        assert_eq!(lines[3], "1,-0.5");
        assert_eq!(lines[4], "2000000,0.3333333333333333");
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/f.csv");
        write_atomic(&p, "one").unwrap();
        write_atomic(&p, "two").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }
}
