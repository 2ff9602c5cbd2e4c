//! Deterministic text output: CSV tables and JSON-lines records.
//!
//! Every number is written with 17 significant digits so that identical
//! results give identical bytes, and every row or record carries the format
//! version.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use crate::config::FORMAT_VERSION;

/// `x` with 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn json_num(x: f64) -> String {
    if x.is_finite() {
        num(x)
    } else {
        "null".into()
    }
}

fn json_str(s: &str) -> String {
    serde_json::to_string(s).expect("string serializes")
}

/// One JSON object written on a single line, keys in insertion order.
#[derive(Debug, Clone)]
pub struct Record {
    buf: String,
}

impl Record {
    pub fn new(record: &str) -> Self {
        let mut buf = String::new();
        write!(buf, "{{\"format_version\":{FORMAT_VERSION},\"record\":{}", json_str(record)).unwrap();
        Record { buf }
    }

    fn key(&mut self, k: &str) {
        write!(self.buf, ",{}:", json_str(k)).unwrap();
    }

    pub fn num(mut self, k: &str, v: f64) -> Self {
        self.key(k);
        self.buf.push_str(&json_num(v));
        self
    }

    pub fn nums(mut self, k: &str, v: &[f64]) -> Self {
        self.key(k);
        let items: Vec<String> = v.iter().map(|&x| json_num(x)).collect();
        write!(self.buf, "[{}]", items.join(",")).unwrap();
        self
    }

    pub fn int(mut self, k: &str, v: impl Into<i128>) -> Self {
        self.key(k);
        write!(self.buf, "{}", v.into()).unwrap();
        self
    }

    pub fn str(mut self, k: &str, v: &str) -> Self {
        self.key(k);
        self.buf.push_str(&json_str(v));
        self
    }

    pub fn strs(mut self, k: &str, v: &[String]) -> Self {
        self.key(k);
        let items: Vec<String> = v.iter().map(|s| json_str(s)).collect();
        write!(self.buf, "[{}]", items.join(",")).unwrap();
        self
    }

    pub fn bool(mut self, k: &str, v: bool) -> Self {
        self.key(k);
        self.buf.push_str(if v { "true" } else { "false" });
        self
    }

    pub fn finish(mut self) -> String {
        self.buf.push('}');
        self.buf
    }
}

/// CSV table with a fixed header; the first column is always the format version.
#[derive(Debug, Clone)]
pub struct Table {
    buf: String,
    columns: usize,
}

impl Table {
    pub fn new<S: AsRef<str>>(columns: &[S]) -> Self {
        let mut buf = String::from("format_version");
        for c in columns {
            buf.push(',');
            buf.push_str(c.as_ref());
        }
        buf.push('\n');
        Table { buf, columns: columns.len() }
    }

    /// Append a row of already formatted cells.
    pub fn row(&mut self, cells: &[String]) {
        debug_assert_eq!(cells.len(), self.columns);
        write!(self.buf, "{FORMAT_VERSION}").unwrap();
        for c in cells {
            self.buf.push(',');
            self.buf.push_str(c);
        }
        self.buf.push('\n');
    }

    pub fn into_string(self) -> String {
        self.buf
    }
}

/// Files written by one command, collected in the output directory.
#[derive(Debug)]
pub struct Artifacts {
    dir: PathBuf,
    pub written: Vec<PathBuf>,
}

impl Artifacts {
    pub fn new(dir: &Path) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Artifacts { dir: dir.to_path_buf(), written: Vec::new() })
    }

    pub fn write(&mut self, name: &str, contents: &str) -> io::Result<PathBuf> {
        let path = self.dir.join(name);
        fs::write(&path, contents)?;
        self.written.push(path.clone());
        Ok(path)
    }

    pub fn write_lines(&mut self, name: &str, lines: &[String]) -> io::Result<PathBuf> {
        let mut s = lines.join("\n");
        s.push('\n');
        self.write(name, &s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn records_are_valid_json() {
        let line = Record::new("x")
            .num("a", 0.1)
            .num("nan", f64::NAN)
            .nums("v", &[1.0, -2.5e-300])
            .int("n", 3u32)
            .str("s", "a\"b")
            .bool("ok", true)
            .finish();
        let v: serde_json::Value = serde_json::from_str(&line).unwrap();
        assert_eq!(v["format_version"], 1);
        assert_eq!(v["a"].as_f64().unwrap(), 0.1);
        assert!(v["nan"].is_null());
        assert_eq!(v["v"][1].as_f64().unwrap(), -2.5e-300);
        assert_eq!(v["s"], "a\"b");
    }

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, -7.25e-12, 6.02e23] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
    }
}
