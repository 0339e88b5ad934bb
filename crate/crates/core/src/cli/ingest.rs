use std::path::Path;

use crate::error::{Error, Result};
use crate::mechanisms::DataMatrix;

/// Reads a CSV with one data point per row (optionally preceded by a header
/// row) into a `d × n` matrix with points as columns.
///
/// A first row that does not parse as numbers is taken as the header. With
/// `normalize`, all points are divided by the largest point norm when it
/// exceeds 1; otherwise such points are rejected and listed by 0-based data
/// row index.
pub fn ingest(path: impl AsRef<Path>, normalize: bool) -> Result<DataMatrix> {
    let text = std::fs::read_to_string(path)?;
    parse_points(&text, normalize)
}

pub fn parse_points(text: &str, normalize: bool) -> Result<DataMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let line = record.position().map_or(i + 1, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> =
            record.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(values) => {
                if let Some(first) = rows.first() {
                    if values.len() != first.len() {
                        return Err(Error::Parse {
                            line,
                            message: format!(
                                "expected {} fields, found {}",
                                first.len(),
                                values.len()
                            ),
                        });
                    }
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Parse {
                        line,
                        message: "non-finite value".into(),
                    });
                }
                rows.push(values);
            }
            // header row
            Err(_) if i == 0 => {}
            Err(_) => {
                let bad = record
                    .iter()
                    .find(|c| c.parse::<f64>().is_err())
                    .unwrap_or_default();
                return Err(Error::Parse {
                    line,
                    message: format!("not a number: {bad:?}"),
                });
            }
        }
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            line: 0,
            message: "no data rows".into(),
        });
    }
    if normalize {
        DataMatrix::from_columns_normalized(&rows)
    } else {
        DataMatrix::from_columns(&rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_unit_points() {
        let x = parse_points("1,0\n0,1\n", false).unwrap();
        assert_eq!((x.dim(), x.count()), (2, 2));
        assert_eq!(x.column(0), &[1.0, 0.0]);
        assert_eq!(x.column(1), &[0.0, 1.0]);
    }

    #[test]
    fn header_is_skipped() {
        let x = parse_points("a, b\n0.5, 0.25\n", false).unwrap();
        assert_eq!(x.column(0), &[0.5, 0.25]);
    }

    #[test]
    fn normalize_halves_everything() {
        let x = parse_points("2,0\n0,1\n", true).unwrap();
        assert_eq!(x.column(0), &[1.0, 0.0]);
        assert_eq!(x.column(1), &[0.0, 0.5]);
    }

    #[test]
    fn norm_violation_lists_rows() {
        match parse_points("0.1,0\n2,0\n0,3\n", false) {
            Err(Error::ColumnNormViolation { rows, .. }) => assert_eq!(rows, vec![1, 2]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_input() {
        assert!(matches!(parse_points("", false), Err(Error::Parse { .. })));
        assert!(matches!(
            parse_points("x,y\n", false),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            parse_points("0.1,0.2\n0.1\n", false),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_points("0.1,0.2\n0.1,abc\n", false),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(parse_points("0.1,NaN\n", false).is_err());
    }
}
