//! MatrixMarket text I/O (real `array` and `coordinate`, general or
//! symmetric).

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Result, RnlaError};
use crate::matrix::DenseMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Array,
    Coordinate,
}

fn parse_err(line: usize, msg: impl Into<String>) -> RnlaError {
    RnlaError::Parse { line, msg: msg.into() }
}

fn parse_usize(tok: Option<&str>, line: usize, what: &str) -> Result<usize> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    tok.parse().map_err(|_| parse_err(line, format!("invalid {what} '{tok}'")))
}

fn parse_f64(tok: Option<&str>, line: usize) -> Result<f64> {
    let tok = tok.ok_or_else(|| parse_err(line, "missing value"))?;
    let v: f64 = tok.parse().map_err(|_| parse_err(line, format!("invalid value '{tok}'")))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("non-finite value '{tok}'")));
    }
    Ok(v)
}

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    parse_matrix_market(BufReader::new(File::open(path)?))
}

pub fn parse_matrix_market(reader: impl Read) -> Result<DenseMatrix> {
    let mut lines = BufReader::new(reader).lines().enumerate().map(|(i, l)| (i + 1, l));

    let (hline, header) = match lines.next() {
        Some((n, l)) => (n, l?),
        None => return Err(parse_err(1, "empty input")),
    };
    let tokens: Vec<String> = header.split_whitespace().map(|t| t.to_ascii_lowercase()).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(parse_err(hline, "expected '%%MatrixMarket matrix <format> <field> <symmetry>'"));
    }
    let format = match tokens[2].as_str() {
        "array" => Format::Array,
        "coordinate" => Format::Coordinate,
        other => return Err(parse_err(hline, format!("unsupported format '{other}'"))),
    };
    if !matches!(tokens[3].as_str(), "real" | "integer" | "double") {
        return Err(parse_err(hline, format!("unsupported field '{}'", tokens[3])));
    }
    let symmetric = match tokens[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => return Err(parse_err(hline, format!("unsupported symmetry '{other}'"))),
    };

    let mut body = Vec::new();
    for (n, l) in lines {
        let l = l?;
        let t = l.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        body.push((n, t.to_string()));
    }
    let mut body = body.into_iter();
    let (sline, size) = body.next().ok_or_else(|| parse_err(hline + 1, "missing size line"))?;
    let mut sz = size.split_whitespace();
    let m = parse_usize(sz.next(), sline, "row count")?;
    let n = parse_usize(sz.next(), sline, "column count")?;
    let len = m
        .checked_mul(n)
        .ok_or_else(|| RnlaError::Dimension(format!("{m} x {n} overflows")))?;
    if symmetric && m != n {
        return Err(parse_err(sline, "symmetric matrix must be square"));
    }

    let mut data = vec![0.0; len];
    match format {
        Format::Array => {
            if sz.next().is_some() {
                return Err(parse_err(sline, "array size line has extra fields"));
            }
            let positions: Vec<(usize, usize)> = if symmetric {
                (0..n).flat_map(|j| (j..m).map(move |i| (i, j))).collect()
            } else {
                (0..n).flat_map(|j| (0..m).map(move |i| (i, j))).collect()
            };
            let mut count = 0;
            let mut last_line = sline;
            for (ln, text) in body {
                last_line = ln;
                for tok in text.split_whitespace() {
                    let v = parse_f64(Some(tok), ln)?;
                    let (i, j) = *positions
                        .get(count)
                        .ok_or_else(|| parse_err(ln, format!("more than {} entries", positions.len())))?;
                    data[i + j * m] = v;
                    if symmetric {
                        data[j + i * m] = v;
                    }
                    count += 1;
                }
            }
            if count != positions.len() {
                return Err(parse_err(
                    last_line,
                    format!("expected {} entries, found {count}", positions.len()),
                ));
            }
        }
        Format::Coordinate => {
            let nnz = parse_usize(sz.next(), sline, "entry count")?;
            let mut count = 0;
            let mut last_line = sline;
            for (ln, text) in body {
                last_line = ln;
                let mut t = text.split_whitespace();
                let i = parse_usize(t.next(), ln, "row index")?;
                let j = parse_usize(t.next(), ln, "column index")?;
                let v = parse_f64(t.next(), ln)?;
                if i == 0 || j == 0 || i > m || j > n {
                    return Err(parse_err(ln, format!("index ({i}, {j}) out of range")));
                }
                data[(i - 1) + (j - 1) * m] += v;
                if symmetric && i != j {
                    data[(j - 1) + (i - 1) * m] += v;
                }
                count += 1;
            }
            if count != nnz {
                return Err(parse_err(last_line, format!("expected {nnz} entries, found {count}")));
            }
        }
    }
    DenseMatrix::from_col_major(m, n, data)
}

/// Writes `array real general` with 17 significant digits.
pub fn write_matrix_market(a: &DenseMatrix, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    format_matrix_market(a, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn format_matrix_market(a: &DenseMatrix, w: &mut impl Write) -> Result<()> {
    writeln!(w, "%%MatrixMarket matrix array real general")?;
    writeln!(w, "{} {}", a.rows(), a.cols())?;
    for v in a.as_slice() {
        writeln!(w, "{v:.16e}")?;
    }
    Ok(())
}

/// Writes `(row, col, value)` triplets (0-based) as `coordinate real general`.
pub fn write_coordinate(
    rows: usize,
    cols: usize,
    triplets: &[(usize, usize, f64)],
    w: &mut impl Write,
) -> Result<()> {
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(w, "{rows} {cols} {}", triplets.len())?;
    for &(i, j, v) in triplets {
        writeln!(w, "{} {} {v:.16e}", i + 1, j + 1)?;
    }
    Ok(())
}
