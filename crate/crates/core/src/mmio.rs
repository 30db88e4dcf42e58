//! Matrix Market reading and writing.
//!
//! Dense matrices are written in `array real general` form (column-major),
//! symmetric ones in `coordinate real symmetric` form holding the nonzeros of
//! the lower triangle. Values carry 17 significant digits, so a write/read
//! cycle reproduces every entry exactly.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, DenseSymMatrix};

fn fmt_value(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_dense(m: &DenseMatrix) -> String {
    let mut out = String::from("%%MatrixMarket matrix array real general\n");
    let _ = writeln!(out, "{} {}", m.rows(), m.cols());
    for j in 0..m.cols() {
        for i in 0..m.rows() {
            let _ = writeln!(out, "{}", fmt_value(m[(i, j)]));
        }
    }
    out
}

pub fn write_symmetric(m: &DenseSymMatrix) -> String {
    let n = m.dim();
    let entries: Vec<(usize, usize, f64)> = (0..n)
        .flat_map(|j| (j..n).map(move |i| (i, j)))
        .map(|(i, j)| (i, j, m[(i, j)]))
        .filter(|&(_, _, v)| v != 0.0)
        .collect();
    let mut out = String::from("%%MatrixMarket matrix coordinate real symmetric\n");
    let _ = writeln!(out, "{n} {n} {}", entries.len());
    for (i, j, v) in entries {
        let _ = writeln!(out, "{} {} {}", i + 1, j + 1, fmt_value(v));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Layout {
    Array,
    Coordinate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
}

fn parse_err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Parse(format!("matrix market line {line}: {msg}"))
}

/// Read a real (or integer) matrix in array or coordinate form, general or symmetric.
pub fn read(text: &str) -> Result<DenseMatrix> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
    let fields: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if fields.len() != 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
        return Err(parse_err(
            1,
            "expected '%%MatrixMarket matrix <layout> <field> <symmetry>'",
        ));
    }
    let layout = match fields[2].as_str() {
        "array" => Layout::Array,
        "coordinate" => Layout::Coordinate,
        other => return Err(parse_err(1, format!("unsupported layout {other}"))),
    };
    if fields[3] != "real" && fields[3] != "integer" {
        return Err(parse_err(1, format!("unsupported field {}", fields[3])));
    }
    let symmetry = match fields[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        other => return Err(parse_err(1, format!("unsupported symmetry {other}"))),
    };

    let mut body = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let (size_ln, size_line) = body.next().ok_or_else(|| parse_err(2, "missing size line"))?;
    let sizes = size_line
        .split_whitespace()
        .map(|t| t.parse::<usize>().map_err(|e| parse_err(size_ln + 1, e)))
        .collect::<Result<Vec<_>>>()?;
    let expected = if layout == Layout::Array { 2 } else { 3 };
    if sizes.len() != expected {
        return Err(parse_err(size_ln + 1, format!("expected {expected} sizes")));
    }
    let (rows, cols) = (sizes[0], sizes[1]);
    if symmetry == Symmetry::Symmetric && rows != cols {
        return Err(parse_err(size_ln + 1, "symmetric matrix must be square"));
    }
    let value = |ln: usize, t: &str| -> Result<f64> {
        let v: f64 = t.parse().map_err(|e| parse_err(ln + 1, e))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(parse_err(ln + 1, "non-finite value"))
        }
    };
    let mut m = DenseMatrix::zeros(rows, cols);

    match layout {
        Layout::Array => {
            // column-major; the symmetric variant lists the lower triangle only
            let positions: Vec<(usize, usize)> = (0..cols)
                .flat_map(|j| {
                    let start = if symmetry == Symmetry::Symmetric { j } else { 0 };
                    (start..rows).map(move |i| (i, j))
                })
                .collect();
            let mut count = 0;
            for (ln, line) in body {
                for tok in line.split_whitespace() {
                    let &(i, j) = positions
                        .get(count)
                        .ok_or_else(|| parse_err(ln + 1, "too many values"))?;
                    m[(i, j)] = value(ln, tok)?;
                    count += 1;
                }
            }
            if count != positions.len() {
                return Err(parse_err(
                    0,
                    format!("expected {} values, found {count}", positions.len()),
                ));
            }
        }
        Layout::Coordinate => {
            let nnz = sizes[2];
            let mut count = 0;
            for (ln, line) in body {
                let toks: Vec<&str> = line.split_whitespace().collect();
                if toks.len() != 3 {
                    return Err(parse_err(ln + 1, "expected 'row col value'"));
                }
                let index = |t: &str, bound: usize| -> Result<usize> {
                    let k: usize = t.parse().map_err(|e| parse_err(ln + 1, e))?;
                    if k == 0 || k > bound {
                        return Err(parse_err(ln + 1, format!("index {k} outside 1..={bound}")));
                    }
                    Ok(k - 1)
                };
                let (i, j) = (index(toks[0], rows)?, index(toks[1], cols)?);
                if symmetry == Symmetry::Symmetric && i < j {
                    return Err(parse_err(ln + 1, "symmetric storage must list the lower triangle"));
                }
                m[(i, j)] += value(ln, toks[2])?;
                count += 1;
            }
            if count != nnz {
                return Err(parse_err(0, format!("expected {nnz} entries, found {count}")));
            }
        }
    }
    if symmetry == Symmetry::Symmetric {
        for i in 0..rows {
            for j in 0..i {
                m[(j, i)] = m[(i, j)];
            }
        }
    }
    Ok(m)
}

/// Read a matrix and pass it through the symmetry gate.
pub fn read_symmetric(text: &str) -> Result<DenseSymMatrix> {
    DenseSymMatrix::new(read(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_round_trip() {
        let m = DenseMatrix::from_rows(&[[1.0, 0.1, -3.5], [2.0 / 3.0, 0.0, 1e-300]]).unwrap();
        let text = write_dense(&m);
        assert!(text.starts_with("%%MatrixMarket matrix array real general\n2 3\n"));
        assert_eq!(read(&text).unwrap(), m);
    }

    #[test]
    fn symmetric_round_trip() {
        let m = DenseSymMatrix::from_rows(&[[2.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 2.0]]).unwrap();
        let text = write_symmetric(&m);
        assert!(text.starts_with("%%MatrixMarket matrix coordinate real symmetric\n3 3 5\n"));
        assert_eq!(read_symmetric(&text).unwrap(), m);
    }

    #[test]
    fn general_coordinate_with_comments() {
        let text = "%%MatrixMarket matrix coordinate integer general\n% comment\n2 2 2\n1 1 4\n2 1 -1\n";
        let m = read(text).unwrap();
        assert_eq!(m, DenseMatrix::from_rows(&[[4.0, 0.0], [-1.0, 0.0]]).unwrap());
        assert!(read_symmetric(text).is_err());
    }

    #[test]
    fn malformed_inputs() {
        assert!(read("").is_err());
        assert!(read("%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1 0\n").is_err());
        assert!(read("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n").is_err());
        assert!(read("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n").is_err());
        assert!(read("%%MatrixMarket matrix array real general\n2 1\n1.0\n").is_err());
        assert!(read("%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n1 2 1.0\n").is_err());
        assert!(read("%%MatrixMarket matrix array real general\n1 1\nnan\n").is_err());
    }
}
