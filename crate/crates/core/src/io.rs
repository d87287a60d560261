//! Plain-text point files.
//!
//! One point per line, coordinates separated by whitespace or commas and an
//! optional trailing value column. Blank lines and lines starting with `#`
//! are ignored.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::PointSet;

/// Numeric rows with their 1-based line numbers.
pub fn read_rows<R: BufRead>(reader: R) -> Result<Vec<(usize, Vec<f64>)>> {
    let mut rows = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let row = t
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<f64>().map_err(|_| Error::Parse {
                    line: i + 1,
                    msg: format!("not a number: '{s}'"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push((i + 1, row));
    }
    Ok(rows)
}

/// Reads points of dimension `dim`, with values when rows have `dim + 1`
/// columns. All rows must agree.
pub fn read_points<R: BufRead>(reader: R, dim: usize) -> Result<PointSet> {
    let rows = read_rows(reader)?;
    let Some((_, first)) = rows.first() else {
        return PointSet::empty(dim);
    };
    let width = first.len();
    if width != dim && width != dim + 1 {
        return Err(Error::Parse {
            line: rows[0].0,
            msg: format!("expected {dim} or {} columns, found {width}", dim + 1),
        });
    }
    let mut coords = Vec::with_capacity(rows.len() * dim);
    let mut values = Vec::new();
    for (line, row) in &rows {
        if row.len() != width {
            return Err(Error::Parse {
                line: *line,
                msg: format!("expected {width} columns, found {}", row.len()),
            });
        }
        coords.extend_from_slice(&row[..dim]);
        if width > dim {
            values.push(row[dim]);
        }
    }
    if width > dim {
        PointSet::with_values(dim, coords, values)
    } else {
        PointSet::new(dim, coords)
    }
}

/// Reads points followed by a value column, inferring the dimension from
/// the column count (3 for 2D data, 4 for 3D data).
pub fn read_valued_points<R: BufRead>(reader: R) -> Result<PointSet> {
    let rows = read_rows(reader)?;
    let Some((line, first)) = rows.first() else {
        return Err(Error::InvalidPoints("point file is empty".into()));
    };
    let dim = match first.len() {
        3 => 2,
        4 => 3,
        n => {
            return Err(Error::Parse {
                line: *line,
                msg: format!("expected 3 or 4 columns (coordinates and value), found {n}"),
            })
        }
    };
    let mut coords = Vec::with_capacity(rows.len() * dim);
    let mut values = Vec::with_capacity(rows.len());
    for (line, row) in &rows {
        if row.len() != dim + 1 {
            return Err(Error::Parse {
                line: *line,
                msg: format!("expected {} columns, found {}", dim + 1, row.len()),
            });
        }
        coords.extend_from_slice(&row[..dim]);
        values.push(row[dim]);
    }
    PointSet::with_values(dim, coords, values)
}

/// Writes one point per line, space separated, with the value column when
/// present. Numbers use the shortest round-trip representation.
pub fn write_points<W: Write>(mut w: W, pts: &PointSet) -> Result<()> {
    for (i, p) in pts.iter().enumerate() {
        let mut first = true;
        for c in p {
            if !first {
                w.write_all(b" ")?;
            }
            write!(w, "{c}")?;
            first = false;
        }
        if let Some(v) = pts.values() {
            write!(w, " {}", v[i])?;
        }
        w.write_all(b"\n")?;
    }
    Ok(())
}

fn with_path(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

pub fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).map_err(with_path(path))?))
}

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).map_err(with_path(path))?))
}
