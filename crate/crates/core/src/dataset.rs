//! CSV dataset interchange: comma-delimited, `.` decimal separator, optional header row.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::types::{Dataset, DomainBounds};

/// Loads a dataset from a CSV file.
///
/// A first row containing any non-numeric token is treated as a header.
/// Rows are reported 1-based by file line. With `clip` set, out-of-range
/// coordinates are clamped into `[-r, r]`; otherwise they are an error.
pub fn load_dataset<T: Real>(
    path: impl AsRef<Path>,
    bounds: DomainBounds<T>,
    clip: bool,
) -> Result<Dataset<T>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_dataset(file, bounds, clip).map_err(|e| match e {
        Error::Io { source, .. } => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        other => other,
    })
}

/// Reader-based variant of [`load_dataset`].
pub fn read_dataset<T: Real, R: Read>(
    reader: R,
    bounds: DomainBounds<T>,
    clip: bool,
) -> Result<Dataset<T>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let d = bounds.d();
    let mut points = Vec::new();
    for (idx, record) in rdr.records().enumerate() {
        let row = idx + 1;
        let record = record.map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(source) => Error::Io {
                path: Default::default(),
                source,
            },
            other => Error::Parse {
                row,
                message: format!("{other:?}"),
            },
        })?;
        if record.len() == 1 && record.get(0) == Some("") {
            continue;
        }
        let parsed: Vec<Option<f64>> = record.iter().map(|s| s.parse::<f64>().ok()).collect();
        if idx == 0 && parsed.iter().any(Option::is_none) {
            continue;
        }
        if record.len() != d {
            return Err(Error::Parse {
                row,
                message: format!("expected {d} columns, found {}", record.len()),
            });
        }
        let mut point = Vec::with_capacity(d);
        for (col, value) in parsed.into_iter().enumerate() {
            let value = match value {
                Some(v) if v.is_finite() => v,
                _ => {
                    return Err(Error::Parse {
                        row,
                        message: format!(
                            "column {}: '{}' is not a finite number",
                            col + 1,
                            &record[col]
                        ),
                    })
                }
            };
            let mut v = T::of(value);
            if !(v >= -bounds.r() && v <= bounds.r()) {
                if clip {
                    v = bounds.clamp(v);
                } else {
                    return Err(Error::OutOfDomain {
                        row,
                        column: col + 1,
                        value,
                        r: bounds.r().as_f64(),
                    });
                }
            }
            point.push(v);
        }
        points.push(point);
    }
    Dataset::new(points, bounds)
}

/// Writes points as headerless CSV.
pub fn write_dataset<T: Real>(path: impl AsRef<Path>, data: &Dataset<T>) -> Result<()> {
    let path = path.as_ref();
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut out = BufWriter::new(File::create(path).map_err(io_err)?);
    for p in data.points() {
        let line = p.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
        writeln!(out, "{line}").map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(r: f64, d: usize) -> DomainBounds<f64> {
        DomainBounds::new(r, d).unwrap()
    }

    #[test]
    fn passthrough() {
        let ds = read_dataset("0,0\n1,1\n-1,-1".as_bytes(), b(1.0, 2), false).unwrap();
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.points()[2], vec![-1.0, -1.0]);
    }

    #[test]
    fn clip_clamps_to_boundary() {
        let ds = read_dataset("2,0".as_bytes(), b(1.0, 2), true).unwrap();
        assert_eq!(ds.points()[0], vec![1.0, 0.0]);
    }

    #[test]
    fn out_of_domain_reports_position() {
        let err = read_dataset("2,0".as_bytes(), b(1.0, 2), false).unwrap_err();
        assert!(matches!(err, Error::OutOfDomain { row: 1, column: 1, .. }), "{err}");
    }

    #[test]
    fn header_is_skipped() {
        let ds = read_dataset("x,y\n0.5,0.25\n".as_bytes(), b(1.0, 2), false).unwrap();
        assert_eq!(ds.len(), 1);
    }

    #[test]
    fn wrong_arity_and_bad_cells() {
        let err = read_dataset("0,0\n1\n".as_bytes(), b(1.0, 2), false).unwrap_err();
        assert!(matches!(err, Error::Parse { row: 2, .. }), "{err}");
        let err = read_dataset("0,0\n1,abc\n".as_bytes(), b(1.0, 2), false).unwrap_err();
        assert!(matches!(err, Error::Parse { row: 2, .. }), "{err}");
    }

    #[test]
    fn empty_file_is_rejected() {
        let err = read_dataset("".as_bytes(), b(1.0, 2), false).unwrap_err();
        assert!(matches!(err, Error::EmptyDataset));
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = load_dataset("/nonexistent/points.csv", b(1.0, 2), false).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn write_then_load() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        let ds = Dataset::new(vec![vec![0.125_f32, -0.5], vec![1.0, 0.0]], DomainBounds::new(1.0, 2).unwrap()).unwrap();
        write_dataset(&path, &ds).unwrap();
        let back = load_dataset(&path, ds.bounds(), false).unwrap();
        assert_eq!(back, ds);
    }
}
