//! Matrix Market reader and writer (coordinate and array; real, integer and complex;
//! general, symmetric, skew-symmetric and hermitian).

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use gramian_rk::{CMat, C64};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MmError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: entry ({row}, {col}) contradicts its mirror in a {symmetry} file")]
    SymmetryViolation { line: usize, row: usize, col: usize, symmetry: &'static str },
    #[error("{path}: {source}")]
    InFile {
        path: String,
        #[source]
        source: Box<MmError>,
    },
}

fn perr(line: usize, msg: impl Into<String>) -> MmError {
    MmError::Parse { line, msg: msg.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    Skew,
    Hermitian,
}

impl Symmetry {
    fn name(self) -> &'static str {
        match self {
            Symmetry::General => "general",
            Symmetry::Symmetric => "symmetric",
            Symmetry::Skew => "skew-symmetric",
            Symmetry::Hermitian => "hermitian",
        }
    }

    fn mirror(self, v: C64) -> C64 {
        match self {
            Symmetry::General | Symmetry::Symmetric => v,
            Symmetry::Skew => -v,
            Symmetry::Hermitian => v.conj(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MmMatrix {
    /// Zero-based `(row, col, value)` triplets with symmetric halves expanded.
    Coordinate {
        rows: usize,
        cols: usize,
        entries: Vec<(usize, usize, C64)>,
        complex: bool,
    },
    Array {
        data: CMat,
        complex: bool,
    },
}

impl MmMatrix {
    pub fn shape(&self) -> (usize, usize) {
        match self {
            MmMatrix::Coordinate { rows, cols, .. } => (*rows, *cols),
            MmMatrix::Array { data, .. } => data.shape(),
        }
    }

    pub fn is_complex(&self) -> bool {
        match self {
            MmMatrix::Coordinate { complex, .. } | MmMatrix::Array { complex, .. } => *complex,
        }
    }

    pub fn to_dense(&self) -> CMat {
        match self {
            MmMatrix::Array { data, .. } => data.clone(),
            MmMatrix::Coordinate { rows, cols, entries, .. } => {
                let mut m = CMat::zeros(*rows, *cols);
                for &(i, j, v) in entries {
                    m[(i, j)] += v;
                }
                m
            }
        }
    }
}

pub fn read_matrix_market(path: &Path) -> Result<MmMatrix, MmError> {
    let text = fs::read_to_string(path).map_err(|source| MmError::Io { path: path.display().to_string(), source })?;
    parse_matrix_market(&text).map_err(|e| MmError::InFile { path: path.display().to_string(), source: Box::new(e) })
}

pub fn parse_matrix_market(text: &str) -> Result<MmMatrix, MmError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| perr(1, "empty file"))?;
    let tokens: Vec<String> = header.split_whitespace().map(|t| t.to_ascii_lowercase()).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(perr(1, "expected '%%MatrixMarket matrix <format> <field> <symmetry>'"));
    }
    let coordinate = match tokens[2].as_str() {
        "coordinate" => true,
        "array" => false,
        other => return Err(perr(1, format!("unsupported format '{other}'"))),
    };
    let complex = match tokens[3].as_str() {
        "real" | "integer" | "double" => false,
        "complex" => true,
        other => return Err(perr(1, format!("unsupported field '{other}'"))),
    };
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::Skew,
        "hermitian" if complex => Symmetry::Hermitian,
        other => return Err(perr(1, format!("unsupported symmetry '{other}'"))),
    };

    let mut data = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let end_line = text.lines().count() + 1;
    let (size_line, size) = data.next().ok_or_else(|| perr(end_line, "missing size line"))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| t.parse::<usize>().map_err(|_| perr(size_line, format!("bad size '{t}'"))))
        .collect::<Result<_, _>>()?;
    let want = if coordinate { 3 } else { 2 };
    if dims.len() != want {
        return Err(perr(size_line, format!("expected {want} size fields, found {}", dims.len())));
    }
    let (rows, cols) = (dims[0], dims[1]);
    if symmetry != Symmetry::General && rows != cols {
        return Err(perr(size_line, format!("{} matrix must be square", symmetry.name())));
    }
    let width = if complex { 2 } else { 1 };
    let parse_value = |line: usize, toks: &[&str]| -> Result<C64, MmError> {
        let num = |t: &str| t.parse::<f64>().map_err(|_| perr(line, format!("bad number '{t}'")));
        Ok(if complex { C64::new(num(toks[0])?, num(toks[1])?) } else { C64::new(num(toks[0])?, 0.0) })
    };

    if coordinate {
        let nnz = dims[2];
        let mut entries = Vec::with_capacity(nnz * if symmetry == Symmetry::General { 1 } else { 2 });
        let mut seen = std::collections::HashMap::new();
        for k in 0..nnz {
            let (line, l) =
                data.next().ok_or_else(|| perr(end_line, format!("file ends after {k} of {nnz} entries")))?;
            let toks: Vec<&str> = l.split_whitespace().collect();
            if toks.len() != 2 + width {
                return Err(perr(line, format!("expected {} fields, found {}", 2 + width, toks.len())));
            }
            let idx = |t: &str, max: usize| -> Result<usize, MmError> {
                match t.parse::<usize>() {
                    Ok(v) if v >= 1 && v <= max => Ok(v - 1),
                    _ => Err(perr(line, format!("index '{t}' out of range 1..={max}"))),
                }
            };
            let (i, j) = (idx(toks[0], rows)?, idx(toks[1], cols)?);
            let v = parse_value(line, &toks[2..])?;
            if symmetry != Symmetry::General {
                if i == j && symmetry == Symmetry::Skew && v != C64::new(0.0, 0.0) {
                    return Err(MmError::SymmetryViolation { line, row: i + 1, col: j + 1, symmetry: symmetry.name() });
                }
                if let Some(&other) = seen.get(&(j, i)) {
                    if i != j && symmetry.mirror(other) != v {
                        return Err(MmError::SymmetryViolation {
                            line,
                            row: i + 1,
                            col: j + 1,
                            symmetry: symmetry.name(),
                        });
                    }
                    // Both halves listed and consistent: keep only one copy.
                    continue;
                }
                seen.insert((i, j), v);
                entries.push((i, j, v));
                if i != j {
                    entries.push((j, i, symmetry.mirror(v)));
                }
            } else {
                entries.push((i, j, v));
            }
        }
        if let Some((line, _)) = data.next() {
            return Err(perr(line, "more entries than declared"));
        }
        Ok(MmMatrix::Coordinate { rows, cols, entries, complex })
    } else {
        let mut m = CMat::zeros(rows, cols);
        // Column-major; symmetric variants list the lower triangle only.
        let positions: Vec<(usize, usize)> = (0..cols)
            .flat_map(|j| (0..rows).map(move |i| (i, j)))
            .filter(|&(i, j)| match symmetry {
                Symmetry::General => true,
                Symmetry::Skew => i > j,
                _ => i >= j,
            })
            .collect();
        for (k, &(i, j)) in positions.iter().enumerate() {
            let (line, l) = data
                .next()
                .ok_or_else(|| perr(end_line, format!("file ends after {k} of {} values", positions.len())))?;
            let toks: Vec<&str> = l.split_whitespace().collect();
            if toks.len() != width {
                return Err(perr(line, format!("expected {width} fields, found {}", toks.len())));
            }
            let v = parse_value(line, &toks)?;
            m[(i, j)] = v;
            if symmetry != Symmetry::General && i != j {
                m[(j, i)] = symmetry.mirror(v);
            }
        }
        if let Some((line, _)) = data.next() {
            return Err(perr(line, "more values than declared"));
        }
        Ok(MmMatrix::Array { data: m, complex })
    }
}

fn fmt_num(out: &mut String, x: f64) {
    // 17 significant digits round-trip every f64.
    let _ = write!(out, "{x:.16e}");
}

/// General-symmetry text for `m`.
pub fn format_matrix_market(m: &MmMatrix) -> String {
    let complex = m.is_complex();
    let field = if complex { "complex" } else { "real" };
    let mut out = String::new();
    let push_value = |out: &mut String, v: C64| {
        fmt_num(out, v.re);
        if complex {
            out.push(' ');
            fmt_num(out, v.im);
        }
        out.push('\n');
    };
    match m {
        MmMatrix::Array { data, .. } => {
            let _ = writeln!(out, "%%MatrixMarket matrix array {field} general");
            let _ = writeln!(out, "{} {}", data.nrows(), data.ncols());
            for v in data.iter() {
                push_value(&mut out, *v);
            }
        }
        MmMatrix::Coordinate { rows, cols, entries, .. } => {
            let _ = writeln!(out, "%%MatrixMarket matrix coordinate {field} general");
            let _ = writeln!(out, "{rows} {cols} {}", entries.len());
            for &(i, j, v) in entries {
                let _ = write!(out, "{} {} ", i + 1, j + 1);
                push_value(&mut out, v);
            }
        }
    }
    out
}

pub fn write_matrix_market(path: &Path, m: &MmMatrix) -> Result<(), MmError> {
    fs::write(path, format_matrix_market(m)).map_err(|source| MmError::Io { path: path.display().to_string(), source })
}

/// Writes a dense matrix as a real array (imaginary parts must be zero) or a complex array.
pub fn write_dense(path: &Path, data: &CMat, complex: bool) -> Result<(), MmError> {
    if !complex {
        assert!(data.iter().all(|z| z.im == 0.0), "real output requested for a complex matrix");
    }
    write_matrix_market(path, &MmMatrix::Array { data: data.clone(), complex })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_coordinate_is_mirrored() {
        let text = "%%MatrixMarket matrix coordinate real symmetric\n% comment\n2 2 3\n1 1 4\n2 1 -1\n2 2 5\n";
        let m = parse_matrix_market(text).unwrap();
        let d = m.to_dense();
        assert_eq!(d[(0, 1)], C64::new(-1.0, 0.0));
        assert_eq!(d[(1, 0)], C64::new(-1.0, 0.0));
        assert_eq!(d[(1, 1)], C64::new(5.0, 0.0));
    }

    #[test]
    fn inconsistent_symmetric_entries() {
        let text = "%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n2 1 1\n1 2 3\n";
        assert!(matches!(parse_matrix_market(text), Err(MmError::SymmetryViolation { line: 4, .. })));
        let ok = "%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n2 1 1\n1 2 1\n";
        assert_eq!(parse_matrix_market(ok).unwrap().to_dense()[(0, 1)], C64::new(1.0, 0.0));
    }

    #[test]
    fn complex_array() {
        let text = "%%MatrixMarket matrix array complex general\n2 1\n1 2\n-3.5 0\n";
        let m = parse_matrix_market(text).unwrap();
        assert!(m.is_complex());
        assert_eq!(m.to_dense()[(0, 0)], C64::new(1.0, 2.0));
    }

    #[test]
    fn symmetric_array_lists_lower_triangle() {
        let text = "%%MatrixMarket matrix array real symmetric\n2 2\n1\n2\n3\n";
        let d = parse_matrix_market(text).unwrap().to_dense();
        assert_eq!(d[(0, 1)], C64::new(2.0, 0.0));
        assert_eq!(d[(1, 1)], C64::new(3.0, 0.0));
    }

    #[test]
    fn truncated_file_reports_line() {
        let text = "%%MatrixMarket matrix coordinate real general\n3 3 3\n1 1 1\n2 2 1\n";
        match parse_matrix_market(text) {
            Err(MmError::Parse { line, .. }) => assert_eq!(line, 5),
            other => panic!("{other:?}"),
        }
        let bad = "%%MatrixMarket matrix array real general\n2 1\n1\nx\n";
        assert!(matches!(parse_matrix_market(bad), Err(MmError::Parse { line: 4, .. })));
    }

    #[test]
    fn bad_header() {
        assert!(matches!(parse_matrix_market("hello\n"), Err(MmError::Parse { line: 1, .. })));
        assert!(parse_matrix_market("%%MatrixMarket matrix coordinate pattern general\n1 1 0\n").is_err());
    }

    #[test]
    fn write_read_write_is_stable() {
        let data =
            CMat::from_fn(3, 2, |i, j| C64::new((i as f64 + 0.1).sqrt() / 7.0, (j as f64) * std::f64::consts::PI));
        let first = format_matrix_market(&MmMatrix::Array { data, complex: true });
        let second = format_matrix_market(&parse_matrix_market(&first).unwrap());
        assert_eq!(first, second);
        let coo =
            MmMatrix::Coordinate { rows: 2, cols: 2, entries: vec![(0, 1, C64::new(1.0 / 3.0, 0.0))], complex: false };
        let first = format_matrix_market(&coo);
        assert_eq!(format_matrix_market(&parse_matrix_market(&first).unwrap()), first);
    }
}
