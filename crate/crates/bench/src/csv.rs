//! Minimal CSV tables: a comment block, a header row and data rows.
//! Floats are written with 17 significant digits.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::config::ExperimentConfig;

/// `{:.16e}`: 17 significant digits, enough to round-trip an `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub name: String,
    pub comments: Vec<String>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// One cell of a row.
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Bool(bool),
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => fmt_f64(*v),
            Cell::Text(v) => v.clone(),
            Cell::Bool(v) => (if *v { "1" } else { "0" }).to_string(),
        }
    }
}

#[macro_export]
macro_rules! row {
    ($($x:expr),* $(,)?) => { vec![$($crate::csv::Cell::from($x)),*] };
}

impl CsvTable {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self { name: name.to_string(), comments: Vec::new(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, cells: Vec<Cell>) {
        assert_eq!(cells.len(), self.header.len(), "row width of {}", self.name);
        self.rows.push(cells.iter().map(Cell::render).collect());
    }

    pub fn comment(&mut self, line: impl Into<String>) {
        self.comments.push(line.into());
    }

    /// Header and rows, without the comment block.
    pub fn body(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            out.push_str("# ");
            out.push_str(c);
            out.push('\n');
        }
        out.push_str(&self.body());
        out
    }

    /// Column values by header name.
    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i].as_str()).collect())
    }

    pub fn write_to(&self, dir: &Path) -> std::io::Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let path = dir.join(format!("{}.csv", self.name));
        let mut f = fs::File::create(&path)?;
        f.write_all(self.render().as_bytes())?;
        Ok(path)
    }
}

/// Version string in `git describe` style, from the package version.
pub fn version_string() -> String {
    concat!("v", env!("CARGO_PKG_VERSION")).to_string()
}

/// Comment block echoing the configuration, seed and version.
pub fn config_comments(cfg: &ExperimentConfig) -> Vec<String> {
    let mut out = vec![format!("riemprox-bench {}", version_string())];
    out.extend(cfg.echo().into_iter().map(|(k, v)| format!("{k}={v}")));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn render_and_column() {
        let mut t = CsvTable::new("t", &["a", "b", "c"]);
        t.comment("seed=1");
        t.push(row![1usize, 0.5, "x"]);
        t.push(row![2usize, true, "y"]);
        assert_eq!(t.render(), "# seed=1\na,b,c\n1,5.0000000000000000e-1,x\n2,1,y\n");
        assert_eq!(t.column("c").unwrap(), vec!["x", "y"]);
        assert!(t.column("z").is_none());
        let dir = tempfile::tempdir().unwrap();
        let p = t.write_to(dir.path()).unwrap();
        assert_eq!(std::fs::read_to_string(p).unwrap(), t.render());
    }
}
