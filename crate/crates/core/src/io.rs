//! CSV point files: one point per line, comma separated, with an optional
//! single `#` header line first.

use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::PointSet;

pub fn parse_points(text: &str) -> Result<PointSet> {
    let mut dim = None;
    let mut coords = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.starts_with('#') {
            if i == 0 {
                continue;
            }
            return Err(Error::Parse {
                line: line_no,
                message: "header allowed only on the first line".into(),
            });
        }
        if line.is_empty() {
            continue;
        }
        let before = coords.len();
        for field in line.split(',') {
            let field = field.trim();
            let v: f64 = field.parse().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("not a number: {field:?}"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("non-finite value {field:?}"),
                });
            }
            coords.push(v);
        }
        let arity = coords.len() - before;
        match dim {
            None => dim = Some(arity),
            Some(d) if d != arity => {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected {d} fields, found {arity}"),
                })
            }
            _ => {}
        }
    }
    let dim = dim.ok_or(Error::Parse {
        line: 0,
        message: "no points in input".into(),
    })?;
    PointSet::new(dim, coords)
}

pub fn read_points(path: &Path) -> Result<PointSet> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::from(e).context(format!("reading {}", path.display())))?;
    parse_points(&text).map_err(|e| e.context(path.display().to_string()))
}

/// Renders points with 17 significant digits, which round-trips exactly.
pub fn format_points(ps: &PointSet, header: Option<&str>) -> String {
    let mut out = String::new();
    if let Some(h) = header {
        out.push_str("# ");
        out.push_str(h);
        out.push('\n');
    }
    for p in ps.iter() {
        let row: Vec<String> = p.iter().map(|v| format!("{v:.16e}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn write_points(path: &Path, ps: &PointSet, header: Option<&str>) -> Result<()> {
    fs::write(path, format_points(ps, header))?;
    Ok(())
}

/// Hex SHA-256 of a file's bytes.
pub fn file_digest(path: &Path) -> Result<String> {
    let bytes = fs::read(path)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}
