//! Matrix Market reader and writer for real matrices and vectors.
//!
//! Supported: `coordinate real general|symmetric` and `array real general`.
//! Symmetric files store one triangle and are expanded on read. Values are
//! written with 17 significant digits, so a write/read round trip is exact.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use gkb_core::SparseMatrix;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Coordinate,
    Array,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
}

/// A parsed file: dimensions plus entries as 0-based triplets.
#[derive(Debug, Clone, PartialEq)]
struct Parsed {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, f64)>,
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn parse_header(path: &Path, line: &str) -> Result<(Format, Symmetry)> {
    let words: Vec<String> = line.split_whitespace().map(str::to_ascii_lowercase).collect();
    if words.len() != 5 || words[0] != "%%matrixmarket" || words[1] != "matrix" {
        return Err(parse_err(
            path,
            1,
            format!("expected '%%MatrixMarket matrix <format> real <symmetry>', found '{line}'"),
        ));
    }
    let format = match words[2].as_str() {
        "coordinate" => Format::Coordinate,
        "array" => Format::Array,
        other => return Err(parse_err(path, 1, format!("unsupported format '{other}'"))),
    };
    if words[3] != "real" {
        return Err(parse_err(
            path,
            1,
            format!("unsupported field '{}'; only real is accepted", words[3]),
        ));
    }
    let symmetry = match words[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        other => return Err(parse_err(path, 1, format!("unsupported symmetry '{other}'"))),
    };
    if format == Format::Array && symmetry == Symmetry::Symmetric {
        return Err(parse_err(path, 1, "symmetric array files are not supported"));
    }
    Ok((format, symmetry))
}

fn parse_usize(path: &Path, line: usize, tok: Option<&str>, what: &str) -> Result<usize> {
    let tok = tok.ok_or_else(|| parse_err(path, line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| parse_err(path, line, format!("invalid {what} '{tok}'")))
}

fn parse_f64(path: &Path, line: usize, tok: Option<&str>) -> Result<f64> {
    let tok = tok.ok_or_else(|| parse_err(path, line, "missing value"))?;
    let v: f64 = tok
        .parse()
        .map_err(|_| parse_err(path, line, format!("invalid value '{tok}'")))?;
    if !v.is_finite() {
        return Err(parse_err(path, line, format!("non-finite value '{tok}'")));
    }
    Ok(v)
}

fn parse(path: &Path, text: &str) -> Result<Parsed> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(path, 1, "empty file"))?;
    let (format, symmetry) = parse_header(path, header)?;
    let mut body = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let (size_line, size) = body
        .next()
        .ok_or_else(|| parse_err(path, 1, "missing size line"))?;
    let mut toks = size.split_whitespace();
    let rows = parse_usize(path, size_line, toks.next(), "row count")?;
    let cols = parse_usize(path, size_line, toks.next(), "column count")?;
    let mut entries = Vec::new();
    match format {
        Format::Coordinate => {
            let nnz = parse_usize(path, size_line, toks.next(), "entry count")?;
            entries.reserve(nnz);
            for _ in 0..nnz {
                let (ln, l) = body
                    .next()
                    .ok_or_else(|| parse_err(path, size_line, format!("expected {nnz} entries")))?;
                let mut t = l.split_whitespace();
                let i = parse_usize(path, ln, t.next(), "row index")?;
                let j = parse_usize(path, ln, t.next(), "column index")?;
                let v = parse_f64(path, ln, t.next())?;
                if i == 0 || i > rows || j == 0 || j > cols {
                    return Err(parse_err(
                        path,
                        ln,
                        format!("index ({i}, {j}) outside a {rows} x {cols} matrix"),
                    ));
                }
                entries.push((i - 1, j - 1, v));
                if symmetry == Symmetry::Symmetric && i != j {
                    entries.push((j - 1, i - 1, v));
                }
            }
        }
        Format::Array => {
            // column-major
            for idx in 0..rows * cols {
                let (ln, l) = body.next().ok_or_else(|| {
                    parse_err(path, size_line, format!("expected {} values", rows * cols))
                })?;
                let v = parse_f64(path, ln, l.split_whitespace().next())?;
                entries.push((idx % rows, idx / rows, v));
            }
        }
    }
    if let Some((ln, _)) = body.next() {
        return Err(parse_err(path, ln, "unexpected trailing data"));
    }
    Ok(Parsed {
        rows,
        cols,
        entries,
    })
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Parses a matrix from Matrix Market text. `origin` only labels errors.
pub fn parse_matrix(origin: &Path, text: &str) -> Result<SparseMatrix> {
    let p = parse(origin, text)?;
    Ok(SparseMatrix::from_triplets(p.rows, p.cols, &p.entries)?)
}

/// Parses an `n x 1` vector (array or coordinate format).
pub fn parse_vector(origin: &Path, text: &str) -> Result<Vec<f64>> {
    let p = parse(origin, text)?;
    if p.cols != 1 {
        return Err(parse_err(
            origin,
            1,
            format!("expected a single column, found {} columns", p.cols),
        ));
    }
    let mut v = vec![0.0; p.rows];
    for (i, _, x) in p.entries {
        v[i] += x;
    }
    Ok(v)
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<SparseMatrix> {
    let path = path.as_ref();
    parse_matrix(path, &read_text(path)?)
}

pub fn read_vector(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    parse_vector(path, &read_text(path)?)
}

/// Coordinate general format, 1-based indices, entries in row order.
pub fn format_matrix(a: &SparseMatrix) -> String {
    let mut s = String::new();
    s.push_str("%%MatrixMarket matrix coordinate real general\n");
    let _ = writeln!(s, "{} {} {}", a.n_rows(), a.n_cols(), a.nnz());
    for i in 0..a.n_rows() {
        for (j, v) in a.row(i) {
            let _ = writeln!(s, "{} {} {:.16e}", i + 1, j + 1, v);
        }
    }
    s
}

/// Array format with one column.
pub fn format_vector(v: &[f64]) -> String {
    let mut s = String::new();
    s.push_str("%%MatrixMarket matrix array real general\n");
    let _ = writeln!(s, "{} 1", v.len());
    for x in v {
        let _ = writeln!(s, "{x:.16e}");
    }
    s
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: PathBuf::from(path),
        source: e,
    })
}

pub fn write_matrix(path: impl AsRef<Path>, a: &SparseMatrix) -> Result<()> {
    write_text(path.as_ref(), &format_matrix(a))
}

pub fn write_vector(path: impl AsRef<Path>, v: &[f64]) -> Result<()> {
    write_text(path.as_ref(), &format_vector(v))
}
