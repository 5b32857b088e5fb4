//! MatrixMarket reader and writer for real dense and coordinate files.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

#[derive(Clone, Copy, PartialEq)]
enum Symmetry {
    General,
    Symmetric,
    Skew,
}

fn parse_err<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse { line, msg: msg.into() })
}

fn number(tok: Option<&str>, line: usize) -> Result<f64> {
    match tok.map(str::parse::<f64>) {
        Some(Ok(v)) if v.is_finite() => Ok(v),
        Some(_) => parse_err(line, "malformed or non-finite value"),
        None => parse_err(line, "missing value"),
    }
}

fn index(tok: Option<&str>, bound: usize, line: usize) -> Result<usize> {
    match tok.map(str::parse::<usize>) {
        Some(Ok(v)) if v >= 1 && v <= bound => Ok(v - 1),
        Some(_) => parse_err(line, format!("index out of range 1..={bound}")),
        None => parse_err(line, "missing index"),
    }
}

/// Parses MatrixMarket text (array or coordinate; real or integer; general,
/// symmetric or skew-symmetric). Symmetric storage is expanded.
pub fn parse_matrix_market(text: &str) -> Result<DenseMatrix> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty file".into() })?;
    let fields: Vec<String> = header.split_whitespace().map(str::to_lowercase).collect();
    if fields.len() != 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
        return parse_err(1, "expected '%%MatrixMarket matrix <format> <field> <symmetry>'");
    }
    let coordinate = match fields[2].as_str() {
        "coordinate" => true,
        "array" => false,
        f => return parse_err(1, format!("unknown format {f}")),
    };
    match fields[3].as_str() {
        "real" | "integer" | "double" => {}
        f => return Err(Error::Unsupported(format!("field type {f}"))),
    }
    let sym = match fields[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::Skew,
        s => return Err(Error::Unsupported(format!("symmetry {s}"))),
    };
    let mut body = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let (size_line, size) = body.next().ok_or(Error::Parse { line: 1, msg: "missing size line".into() })?;
    let mut tok = size.split_whitespace();
    let rows = index(tok.next(), usize::MAX, size_line)? + 1;
    let cols = index(tok.next(), usize::MAX, size_line)? + 1;
    if sym != Symmetry::General && rows != cols {
        return parse_err(size_line, "symmetric storage needs a square matrix");
    }
    let mut m = DenseMatrix::zeros(rows, cols);
    let mirror = |m: &mut DenseMatrix, i: usize, j: usize, v: f64| {
        m.set(i, j, v);
        if i != j {
            match sym {
                Symmetry::General => {}
                Symmetry::Symmetric => m.set(j, i, v),
                Symmetry::Skew => m.set(j, i, -v),
            }
        }
    };
    if coordinate {
        let nnz = match tok.next().map(str::parse::<usize>) {
            Some(Ok(v)) => v,
            _ => return parse_err(size_line, "missing entry count"),
        };
        let mut seen = 0;
        for (ln, l) in body {
            let mut t = l.split_whitespace();
            let i = index(t.next(), rows, ln)?;
            let j = index(t.next(), cols, ln)?;
            let v = number(t.next(), ln)?;
            if sym != Symmetry::General && j > i {
                return parse_err(ln, "symmetric storage expects the lower triangle");
            }
            mirror(&mut m, i, j, v);
            seen += 1;
        }
        if seen != nnz {
            return parse_err(size_line, format!("declared {nnz} entries, found {seen}"));
        }
    } else {
        // column-major; symmetric files list the lower triangle only
        let mut slots = Vec::new();
        for j in 0..cols {
            let start = match sym {
                Symmetry::General => 0,
                Symmetry::Symmetric => j,
                Symmetry::Skew => j + 1,
            };
            for i in start..rows {
                slots.push((i, j));
            }
        }
        let mut it = slots.into_iter();
        let mut last = size_line;
        for (ln, l) in body {
            last = ln;
            for t in l.split_whitespace() {
                let Some((i, j)) = it.next() else {
                    return parse_err(ln, "more values than the declared size");
                };
                mirror(&mut m, i, j, number(Some(t), ln)?);
            }
        }
        if it.next().is_some() {
            return parse_err(last, "fewer values than the declared size");
        }
    }
    Ok(m)
}

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    parse_matrix_market(&std::fs::read_to_string(path)?)
}

/// Array-format text using shortest round-trip decimal representations.
pub fn to_matrix_market(m: &DenseMatrix) -> String {
    let mut out = String::from("%%MatrixMarket matrix array real general\n");
    let _ = writeln!(out, "{} {}", m.rows(), m.cols());
    for j in 0..m.cols() {
        for i in 0..m.rows() {
            let _ = writeln!(out, "{:e}", m.get(i, j));
        }
    }
    out
}

pub fn write_matrix_market(path: impl AsRef<Path>, m: &DenseMatrix) -> Result<()> {
    std::fs::write(path, to_matrix_market(m))?;
    Ok(())
}
