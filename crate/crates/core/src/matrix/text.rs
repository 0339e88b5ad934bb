//! Plain-text matrix files: a first line holding `d`, then `d` lines of `d`
//! whitespace-separated decimals. Values are written in shortest round-trip
//! form so a write/read cycle is lossless.

use std::fmt::Write as _;
use std::path::Path;

use super::SymmetricMatrix;
use crate::error::{Error, Result};

pub fn parse_matrix_text(text: &str) -> Result<SymmetricMatrix> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());

    let (line_no, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "empty matrix file".into(),
    })?;
    let d: usize = header.parse().map_err(|_| Error::Parse {
        line: line_no,
        message: format!("expected dimension, found {header:?}"),
    })?;
    if d == 0 {
        return Err(Error::Parse {
            line: line_no,
            message: "dimension must be at least 1".into(),
        });
    }

    let mut rows = Vec::with_capacity(d);
    for (line_no, line) in lines {
        if rows.len() == d {
            return Err(Error::Parse {
                line: line_no,
                message: format!("more than {d} rows"),
            });
        }
        let row = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("not a number: {tok:?}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if row.len() != d {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected {d} values, found {}", row.len()),
            });
        }
        rows.push(row);
    }
    if rows.len() != d {
        return Err(Error::Parse {
            line: rows.len() + 2,
            message: format!("expected {d} rows, found {}", rows.len()),
        });
    }
    SymmetricMatrix::from_rows(&rows)
}

pub fn format_matrix_text(m: &SymmetricMatrix) -> String {
    let d = m.dim();
    let mut out = format!("{d}\n");
    for i in 0..d {
        for j in 0..d {
            if j > 0 {
                out.push(' ');
            }
            write!(out, "{}", m.get(i, j)).expect("write to string");
        }
        out.push('\n');
    }
    out
}

pub fn read_matrix_file(path: impl AsRef<Path>) -> Result<SymmetricMatrix> {
    parse_matrix_text(&std::fs::read_to_string(path)?)
}

pub fn write_matrix_file(path: impl AsRef<Path>, m: &SymmetricMatrix) -> Result<()> {
    std::fs::write(path, format_matrix_text(m))?;
    Ok(())
}
