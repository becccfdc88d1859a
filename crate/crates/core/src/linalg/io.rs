//! Matrix Market (symmetric real coordinate) and dense CSV serialization.

use std::io::{self, BufRead, Write};

use super::{DenseMatrix, LinalgError, SparseSymMatrix};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

fn parse_err(line: usize, msg: impl Into<String>) -> IoError {
    IoError::Parse { line, msg: msg.into() }
}

/// Writes the lower triangle in `coordinate real symmetric` format.
pub fn write_matrix_market<W: Write>(a: &SparseSymMatrix, mut w: W) -> io::Result<()> {
    let n = a.dim();
    let lower: Vec<(usize, usize, f64)> = (0..n)
        .flat_map(|i| a.row(i).filter(move |&(j, _)| j <= i).map(move |(j, v)| (i, j, v)))
        .collect();
    writeln!(w, "%%MatrixMarket matrix coordinate real symmetric")?;
    writeln!(w, "{n} {n} {}", lower.len())?;
    for (i, j, v) in lower {
        writeln!(w, "{} {} {:.16e}", i + 1, j + 1, v)?;
    }
    Ok(())
}

/// Reads a `coordinate real symmetric` (or `general`, if symmetric) file.
pub fn read_matrix_market<R: BufRead>(r: R) -> Result<SparseSymMatrix, IoError> {
    let mut lines = r.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let header = header?.to_ascii_lowercase();
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() < 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" || fields[2] != "coordinate" {
        return Err(parse_err(1, "expected '%%MatrixMarket matrix coordinate ...' header"));
    }
    if fields[3] != "real" && fields[3] != "integer" {
        return Err(parse_err(1, format!("unsupported field type '{}'", fields[3])));
    }
    let symmetric = match fields[4] {
        "symmetric" => true,
        "general" => false,
        other => return Err(parse_err(1, format!("unsupported symmetry '{other}'"))),
    };

    let mut size: Option<(usize, usize)> = None;
    let mut triplets = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let tok: Vec<&str> = t.split_whitespace().collect();
        match size {
            None => {
                if tok.len() != 3 {
                    return Err(parse_err(lineno, "expected 'rows cols nnz'"));
                }
                let p = |s: &str| s.parse::<usize>().map_err(|e| parse_err(lineno, e.to_string()));
                let (nr, nc) = (p(tok[0])?, p(tok[1])?);
                if nr != nc {
                    return Err(parse_err(lineno, format!("matrix is {nr}x{nc}, not square")));
                }
                size = Some((nr, p(tok[2])?));
            }
            Some((n, _)) => {
                if tok.len() != 3 {
                    return Err(parse_err(lineno, "expected 'row col value'"));
                }
                let i: usize = tok[0].parse().map_err(|_| parse_err(lineno, "bad row index"))?;
                let j: usize = tok[1].parse().map_err(|_| parse_err(lineno, "bad column index"))?;
                let v: f64 = tok[2].parse().map_err(|_| parse_err(lineno, "bad value"))?;
                if i == 0 || j == 0 || i > n || j > n {
                    return Err(parse_err(lineno, format!("index ({i}, {j}) out of range")));
                }
                triplets.push((i - 1, j - 1, v));
                if symmetric && i != j {
                    triplets.push((j - 1, i - 1, v));
                }
            }
        }
    }
    let (n, nnz) = size.ok_or_else(|| parse_err(1, "missing size line"))?;
    let stored = if symmetric {
        triplets.iter().filter(|(i, j, _)| i >= j).count()
    } else {
        triplets.len()
    };
    if stored != nnz {
        return Err(parse_err(1, format!("header declares {nnz} entries, found {stored}")));
    }
    Ok(SparseSymMatrix::from_triplets(n, &triplets)?)
}

/// Writes one row per line with 17 significant digits.
pub fn write_dense_csv<W: Write>(a: &DenseMatrix, mut w: W) -> io::Result<()> {
    for i in 0..a.rows() {
        let row: Vec<String> = a.row(i).iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn read_dense_csv<R: BufRead>(r: R) -> Result<DenseMatrix, IoError> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|e| parse_err(idx + 1, e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(parse_err(idx + 1, "ragged row"));
            }
        }
        rows.push(row);
    }
    let cols = rows.first().map_or(0, Vec::len);
    let n = rows.len();
    Ok(DenseMatrix::from_row_major(n, cols, rows.concat())?)
}
