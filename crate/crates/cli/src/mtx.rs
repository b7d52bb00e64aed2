//! MatrixMarket coordinate (sparse) and array (dense vector) files.
//!
//! Indices are 1-based on disk. Reading accepts `real`/`integer` fields with
//! `general` or `symmetric` symmetry; writing always produces `real general`.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use contact_amg::SparseMatrix;

#[derive(Debug, thiserror::Error)]
pub enum MtxError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("unsupported MatrixMarket header: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Matrix(#[from] contact_amg::Error),
}

fn parse_err(line: usize, msg: impl Into<String>) -> MtxError {
    MtxError::Parse {
        line,
        msg: msg.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Layout {
    Coordinate,
    Array,
}

struct Header {
    layout: Layout,
    symmetric: bool,
}

fn parse_header(line: &str) -> Result<Header, MtxError> {
    let words: Vec<String> = line
        .split_whitespace()
        .map(str::to_ascii_lowercase)
        .collect();
    if words.len() != 5 || words[0] != "%%matrixmarket" || words[1] != "matrix" {
        return Err(MtxError::Unsupported(line.trim().to_string()));
    }
    let layout = match words[2].as_str() {
        "coordinate" => Layout::Coordinate,
        "array" => Layout::Array,
        _ => return Err(MtxError::Unsupported(line.trim().to_string())),
    };
    if !matches!(words[3].as_str(), "real" | "integer" | "double") {
        return Err(MtxError::Unsupported(line.trim().to_string()));
    }
    let symmetric = match words[4].as_str() {
        "general" => false,
        "symmetric" => true,
        _ => return Err(MtxError::Unsupported(line.trim().to_string())),
    };
    Ok(Header { layout, symmetric })
}

/// Data lines with their 1-based line numbers, comments and blanks removed.
fn data_lines<R: BufRead>(reader: R) -> Result<(Header, Vec<(usize, String)>), MtxError> {
    let mut lines = reader.lines().enumerate();
    let header = match lines.next() {
        Some((_, l)) => parse_header(&l?)?,
        None => return Err(parse_err(1, "empty file")),
    };
    let mut out = Vec::new();
    for (i, l) in lines {
        let l = l?;
        let t = l.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        out.push((i + 1, t.to_string()));
    }
    Ok((header, out))
}

fn fields<T: std::str::FromStr>(line: usize, text: &str, n: usize) -> Result<Vec<T>, MtxError> {
    let parts: Vec<&str> = text.split_whitespace().collect();
    if parts.len() != n {
        return Err(parse_err(
            line,
            format!("expected {n} fields, found {}", parts.len()),
        ));
    }
    parts
        .iter()
        .map(|p| {
            p.parse()
                .map_err(|_| parse_err(line, format!("cannot parse '{p}'")))
        })
        .collect()
}

pub fn read_matrix<R: BufRead>(reader: R) -> Result<SparseMatrix, MtxError> {
    let (header, lines) = data_lines(reader)?;
    if header.layout != Layout::Coordinate {
        return Err(MtxError::Unsupported(
            "matrix files must use the coordinate layout".into(),
        ));
    }
    let mut it = lines.into_iter();
    let (ln, size) = it.next().ok_or_else(|| parse_err(2, "missing size line"))?;
    let size: Vec<usize> = fields(ln, &size, 3)?;
    let (rows, cols, nnz) = (size[0], size[1], size[2]);
    let mut triplets = Vec::with_capacity(if header.symmetric { 2 * nnz } else { nnz });
    let mut count = 0;
    for (ln, text) in it {
        let parts: Vec<&str> = text.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(parse_err(
                ln,
                format!("expected 3 fields, found {}", parts.len()),
            ));
        }
        let i: usize = parts[0]
            .parse()
            .map_err(|_| parse_err(ln, "bad row index"))?;
        let j: usize = parts[1]
            .parse()
            .map_err(|_| parse_err(ln, "bad column index"))?;
        let v: f64 = parts[2].parse().map_err(|_| parse_err(ln, "bad value"))?;
        if i == 0 || j == 0 || i > rows || j > cols {
            return Err(parse_err(
                ln,
                format!("entry ({i}, {j}) outside {rows} x {cols}"),
            ));
        }
        triplets.push((i - 1, j - 1, v));
        if header.symmetric && i != j {
            triplets.push((j - 1, i - 1, v));
        }
        count += 1;
    }
    if count != nnz {
        return Err(parse_err(
            0,
            format!("size line announces {nnz} entries, found {count}"),
        ));
    }
    Ok(SparseMatrix::from_triplets(rows, cols, &triplets)?)
}

pub fn write_matrix<W: Write>(mut w: W, a: &SparseMatrix) -> io::Result<()> {
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(w, "{} {} {}", a.num_rows(), a.num_cols(), a.nnz())?;
    for (i, j, v) in a.triplets() {
        writeln!(w, "{} {} {:.16e}", i + 1, j + 1, v)?;
    }
    w.flush()
}

pub fn read_vector<R: BufRead>(reader: R) -> Result<Vec<f64>, MtxError> {
    let (header, lines) = data_lines(reader)?;
    if header.layout != Layout::Array {
        return Err(MtxError::Unsupported(
            "vector files must use the array layout".into(),
        ));
    }
    let mut it = lines.into_iter();
    let (ln, size) = it.next().ok_or_else(|| parse_err(2, "missing size line"))?;
    let size: Vec<usize> = fields(ln, &size, 2)?;
    if size[1] != 1 {
        return Err(parse_err(ln, "vector files need exactly one column"));
    }
    let v: Vec<f64> = it
        .map(|(ln, text)| fields::<f64>(ln, &text, 1).map(|f| f[0]))
        .collect::<Result<_, _>>()?;
    if v.len() != size[0] {
        return Err(parse_err(
            0,
            format!("expected {} values, found {}", size[0], v.len()),
        ));
    }
    Ok(v)
}

pub fn write_vector<W: Write>(mut w: W, v: &[f64]) -> io::Result<()> {
    writeln!(w, "%%MatrixMarket matrix array real general")?;
    writeln!(w, "{} 1", v.len())?;
    for x in v {
        writeln!(w, "{x:.16e}")?;
    }
    w.flush()
}

pub fn load_matrix(path: &Path) -> Result<SparseMatrix, MtxError> {
    read_matrix(BufReader::new(File::open(path)?))
}

pub fn save_matrix(path: &Path, a: &SparseMatrix) -> io::Result<()> {
    write_matrix(BufWriter::new(File::create(path)?), a)
}

pub fn load_vector(path: &Path) -> Result<Vec<f64>, MtxError> {
    read_vector(BufReader::new(File::open(path)?))
}

pub fn save_vector(path: &Path, v: &[f64]) -> io::Result<()> {
    write_vector(BufWriter::new(File::create(path)?), v)
}
