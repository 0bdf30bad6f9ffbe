//! Plain-text matrix and vector formats.
//!
//! Matrix: a header line `m n`, then `m` lines of `n` space-separated values.
//! Vector: a header line `m`, then `m` lines of one value each. Values are
//! written with the shortest decimal representation that parses back to the
//! same `f64`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::dense::DenseMatrix;
use crate::error::{Error, Result};

/// Shortest round-trip decimal form of `v`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

pub fn matrix_to_string(x: &DenseMatrix) -> String {
    let mut s = format!("{} {}\n", x.rows(), x.cols());
    for i in 0..x.rows() {
        let line: Vec<String> = x.row(i).iter().map(|&v| fmt_f64(v)).collect();
        let _ = writeln!(s, "{}", line.join(" "));
    }
    s
}

pub fn vector_to_string(v: &[f64]) -> String {
    let mut s = format!("{}\n", v.len());
    for &x in v {
        let _ = writeln!(s, "{}", fmt_f64(x));
    }
    s
}

pub fn write_matrix(path: &Path, x: &DenseMatrix) -> Result<()> {
    fs::write(path, matrix_to_string(x)).map_err(|e| Error::io(path, e))
}

pub fn write_vector(path: &Path, v: &[f64]) -> Result<()> {
    fs::write(path, vector_to_string(v)).map_err(|e| Error::io(path, e))
}

pub fn read_matrix(path: &Path) -> Result<DenseMatrix> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_matrix(&text, path)
}

pub fn read_vector(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_vector(&text, path)
}

struct Lines<'a> {
    path: &'a Path,
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    consumed: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str, path: &'a Path) -> Self {
        Self {
            path,
            inner: text.lines().enumerate(),
            consumed: 0,
        }
    }

    fn err(&self, line: usize, msg: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.to_path_buf(),
            line,
            msg: msg.into(),
        }
    }

    // Next line as (1-based line number, whitespace-separated fields).
    fn next_fields(&mut self) -> Result<(usize, Vec<&'a str>)> {
        match self.inner.next() {
            Some((k, l)) => {
                self.consumed = k + 1;
                Ok((k + 1, l.split_whitespace().collect()))
            }
            None => Err(self.err(self.consumed + 1, "unexpected end of file")),
        }
    }

    fn expect_end(&mut self) -> Result<()> {
        for (k, l) in self.inner.by_ref() {
            if !l.trim().is_empty() {
                return Err(Error::Parse {
                    path: self.path.to_path_buf(),
                    line: k + 1,
                    msg: "trailing data".into(),
                });
            }
        }
        Ok(())
    }

    fn parse_usize(&self, line: usize, s: &str) -> Result<usize> {
        s.parse()
            .map_err(|_| self.err(line, format!("expected a dimension, found '{s}'")))
    }

    fn parse_f64(&self, line: usize, s: &str) -> Result<f64> {
        s.parse()
            .map_err(|_| self.err(line, format!("expected a number, found '{s}'")))
    }
}

pub fn parse_matrix(text: &str, path: &Path) -> Result<DenseMatrix> {
    let mut lines = Lines::new(text, path);
    let (ln, header) = lines.next_fields()?;
    if header.len() != 2 {
        return Err(lines.err(ln, "header must be 'm n'"));
    }
    let m = lines.parse_usize(ln, header[0])?;
    let n = lines.parse_usize(ln, header[1])?;
    if m == 0 || n == 0 {
        return Err(lines.err(ln, "dimensions must be positive"));
    }
    let mut data = Vec::with_capacity(m * n);
    for _ in 0..m {
        let (ln, fields) = lines.next_fields()?;
        if fields.len() != n {
            return Err(lines.err(ln, format!("expected {n} values, found {}", fields.len())));
        }
        for f in fields {
            data.push(lines.parse_f64(ln, f)?);
        }
    }
    lines.expect_end()?;
    DenseMatrix::new(m, n, data)
}

pub fn parse_vector(text: &str, path: &Path) -> Result<Vec<f64>> {
    let mut lines = Lines::new(text, path);
    let (ln, header) = lines.next_fields()?;
    if header.len() != 1 {
        return Err(lines.err(ln, "header must be 'm'"));
    }
    let m = lines.parse_usize(ln, header[0])?;
    let mut v = Vec::with_capacity(m);
    for _ in 0..m {
        let (ln, fields) = lines.next_fields()?;
        if fields.len() != 1 {
            return Err(lines.err(ln, format!("expected 1 value, found {}", fields.len())));
        }
        v.push(lines.parse_f64(ln, fields[0])?);
    }
    lines.expect_end()?;
    Ok(v)
}
