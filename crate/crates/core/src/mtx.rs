//! Matrix Market reader and writer (real, general or symmetric).

use std::fmt::Write as _;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::units::format_f64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MtxError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unsupported Matrix Market header `{0}`")]
    Unsupported(String),
}

/// Dense column-major `array` form.
pub fn write_array(m: &DMatrix<f64>) -> String {
    let mut out = String::from("%%MatrixMarket matrix array real general\n");
    let _ = writeln!(out, "{} {}", m.nrows(), m.ncols());
    for v in m.iter() {
        let _ = writeln!(out, "{}", format_f64(*v));
    }
    out
}

/// Sparse `coordinate` form listing the nonzeros column by column.
pub fn write_coordinate(m: &DMatrix<f64>) -> String {
    let nnz = m.iter().filter(|v| **v != 0.0).count();
    let mut out = String::from("%%MatrixMarket matrix coordinate real general\n");
    let _ = writeln!(out, "{} {} {}", m.nrows(), m.ncols(), nnz);
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let v = m[(i, j)];
            if v != 0.0 {
                let _ = writeln!(out, "{} {} {}", i + 1, j + 1, format_f64(v));
            }
        }
    }
    out
}

pub fn read_mtx(text: &str) -> Result<DMatrix<f64>, MtxError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let (_, header) = lines
        .next()
        .ok_or_else(|| MtxError::Unsupported(String::new()))?;
    let words: Vec<String> = header.split_whitespace().map(str::to_lowercase).collect();
    let words: Vec<&str> = words.iter().map(String::as_str).collect();
    let (coordinate, symmetric) = match words.as_slice() {
        ["%%matrixmarket", "matrix", fmt, "real" | "double" | "integer", sym] => {
            let coordinate = match *fmt {
                "coordinate" => true,
                "array" => false,
                _ => return Err(MtxError::Unsupported(header.into())),
            };
            let symmetric = match *sym {
                "general" => false,
                "symmetric" => true,
                _ => return Err(MtxError::Unsupported(header.into())),
            };
            (coordinate, symmetric)
        }
        _ => return Err(MtxError::Unsupported(header.into())),
    };
    let mut body = lines.filter(|(_, l)| !l.is_empty() && !l.starts_with('%'));
    let syntax = |line: usize, message: &str| MtxError::Syntax {
        line,
        message: message.into(),
    };
    let (line, size) = body.next().ok_or_else(|| syntax(1, "missing size line"))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| syntax(line, "bad size")))
        .collect::<Result<_, _>>()?;
    let num = |line: usize, t: &str| -> Result<f64, MtxError> {
        t.parse()
            .map_err(|_| syntax(line, &format!("bad number `{t}`")))
    };
    if coordinate {
        let [rows, cols, nnz] = dims[..] else {
            return Err(syntax(line, "expected `rows cols nnz`"));
        };
        let mut m = DMatrix::zeros(rows, cols);
        let mut seen = 0;
        for (line, l) in body {
            let t: Vec<&str> = l.split_whitespace().collect();
            let [i, j, v] = t[..] else {
                return Err(syntax(line, "expected `i j value`"));
            };
            let i: usize = i.parse().map_err(|_| syntax(line, "bad row index"))?;
            let j: usize = j.parse().map_err(|_| syntax(line, "bad column index"))?;
            if i == 0 || j == 0 || i > rows || j > cols {
                return Err(syntax(line, "index out of range"));
            }
            let v = num(line, v)?;
            m[(i - 1, j - 1)] = v;
            if symmetric {
                m[(j - 1, i - 1)] = v;
            }
            seen += 1;
        }
        if seen != nnz {
            return Err(syntax(line, "entry count does not match header"));
        }
        Ok(m)
    } else {
        let [rows, cols] = dims[..] else {
            return Err(syntax(line, "expected `rows cols`"));
        };
        let values: Vec<f64> = body
            .map(|(line, l)| num(line, l))
            .collect::<Result<_, _>>()?;
        if symmetric {
            if rows != cols || values.len() != rows * (rows + 1) / 2 {
                return Err(syntax(line, "wrong number of entries"));
            }
            let mut m = DMatrix::zeros(rows, cols);
            let mut it = values.into_iter();
            for j in 0..cols {
                for i in j..rows {
                    let v = it.next().unwrap();
                    m[(i, j)] = v;
                    m[(j, i)] = v;
                }
            }
            Ok(m)
        } else {
            if values.len() != rows * cols {
                return Err(syntax(line, "wrong number of entries"));
            }
            Ok(DMatrix::from_column_slice(rows, cols, &values))
        }
    }
}
