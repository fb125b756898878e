//! Plain-text matrix interchange format.
//!
//! ```text
//! kind: rational
//! dims: 3 3
//! 1/5 1/5 3/5
//! 2/5 1/5 2/5
//! 3/5 1/5 1/5
//! ```
//!
//! Rational matrices accept integers and `p/q` entries, float matrices
//! accept integers and decimal literals. Blank lines and lines starting
//! with `#` are ignored.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::{parse_rational, Rational, Scalar, ScalarKind};

/// A parsed matrix of either kind.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyMatrix {
    Rational(Matrix<Rational>),
    Float(Matrix<f64>),
}

impl AnyMatrix {
    pub fn kind(&self) -> ScalarKind {
        match self {
            AnyMatrix::Rational(_) => ScalarKind::Rational,
            AnyMatrix::Float(_) => ScalarKind::Float,
        }
    }

    pub fn to_text(&self) -> String {
        match self {
            AnyMatrix::Rational(m) => write_matrix(m),
            AnyMatrix::Float(m) => write_matrix(m),
        }
    }

    pub fn to_f64(&self) -> Matrix<f64> {
        match self {
            AnyMatrix::Rational(m) => m.to_f64(),
            AnyMatrix::Float(m) => m.clone(),
        }
    }

    pub fn into_rational(self) -> Result<Matrix<Rational>> {
        match self {
            AnyMatrix::Rational(m) => Ok(m),
            AnyMatrix::Float(_) => Err(Error::FloatModeUnsupported(ScalarKind::Float)),
        }
    }
}

impl From<Matrix<Rational>> for AnyMatrix {
    fn from(m: Matrix<Rational>) -> Self {
        AnyMatrix::Rational(m)
    }
}

impl From<Matrix<f64>> for AnyMatrix {
    fn from(m: Matrix<f64>) -> Self {
        AnyMatrix::Float(m)
    }
}

pub fn write_matrix<T: Scalar>(m: &Matrix<T>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "kind: {}", T::KIND);
    let _ = writeln!(out, "dims: {} {}", m.rows(), m.cols());
    for row in m.row_iter() {
        let cells: Vec<_> = row.iter().map(T::to_text).collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    out
}

fn header<'a>(line: Option<(usize, &'a str)>, key: &str) -> Result<(usize, &'a str)> {
    let (no, text) = line.ok_or_else(|| Error::Parse {
        line: 0,
        message: format!("missing `{key}:` header"),
    })?;
    let value = text
        .strip_prefix(key)
        .and_then(|rest| rest.trim_start().strip_prefix(':'))
        .ok_or_else(|| Error::Parse {
            line: no,
            message: format!("expected `{key}:` header"),
        })?;
    Ok((no, value.trim()))
}

pub fn parse_matrix(text: &str) -> Result<AnyMatrix> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (no, kind) = header(lines.next(), "kind")?;
    let kind: ScalarKind = kind.parse().map_err(|message| Error::Parse { line: no, message })?;
    let (no, dims) = header(lines.next(), "dims")?;
    let dims: Vec<usize> = dims
        .split_whitespace()
        .map(str::parse)
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Parse {
            line: no,
            message: format!("bad dims: {e}"),
        })?;
    let [rows, cols] = dims[..] else {
        return Err(Error::Parse {
            line: no,
            message: "dims needs exactly two values".into(),
        });
    };

    let body: Vec<(usize, &str)> = lines.collect();
    if body.len() != rows {
        return Err(Error::Parse {
            line: body.last().map_or(no, |l| l.0),
            message: format!("expected {rows} rows, found {}", body.len()),
        });
    }
    match kind {
        ScalarKind::Rational => parse_body(&body, cols, kind, parse_rational_entry)
            .and_then(|e| Matrix::new(rows, cols, e))
            .map(AnyMatrix::Rational),
        ScalarKind::Float => parse_body(&body, cols, kind, parse_float_entry)
            .and_then(|e| Matrix::new(rows, cols, e))
            .map(AnyMatrix::Float),
    }
}

enum Entry<T> {
    Ok(T),
    WrongKind,
    Invalid,
}

fn is_integer_literal(s: &str) -> bool {
    let digits = s.strip_prefix(['-', '+']).unwrap_or(s);
    !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
}

fn parse_rational_entry(s: &str) -> Entry<Rational> {
    if s.contains('/') || is_integer_literal(s) {
        parse_rational(s).map_or(Entry::Invalid, Entry::Ok)
    } else if s.parse::<f64>().is_ok() {
        Entry::WrongKind
    } else {
        Entry::Invalid
    }
}

fn parse_float_entry(s: &str) -> Entry<f64> {
    if s.contains('/') {
        return Entry::WrongKind;
    }
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() => Entry::Ok(v),
        _ => Entry::Invalid,
    }
}

fn parse_body<T>(body: &[(usize, &str)], cols: usize, kind: ScalarKind, parse: fn(&str) -> Entry<T>) -> Result<Vec<T>> {
    let mut entries = Vec::with_capacity(body.len() * cols);
    for &(no, line) in body {
        let cells: Vec<&str> = line.split_whitespace().collect();
        if cells.len() != cols {
            return Err(Error::Parse {
                line: no,
                message: format!("expected {cols} entries, found {}", cells.len()),
            });
        }
        for cell in cells {
            match parse(cell) {
                Entry::Ok(v) => entries.push(v),
                Entry::WrongKind => {
                    return Err(Error::MixedKinds {
                        line: no,
                        entry: cell.to_string(),
                        kind,
                    })
                }
                Entry::Invalid => {
                    return Err(Error::Parse {
                        line: no,
                        message: format!("invalid entry `{cell}`"),
                    })
                }
            }
        }
    }
    Ok(entries)
}
