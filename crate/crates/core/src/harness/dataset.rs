//! Dataset file I/O.
//!
//! UTF-8 text, whitespace-separated, one observation per line:
//! `x1 y1 x2 y2 [inlier_flag]` for correspondences or `x y [inlier_flag]`
//! for 2D points. Lines starting with `#` are comments; the optional header
//! `# model: homography|fundamental|affine` records the intended model.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{DataPoint, ModelKind};

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub points: Vec<DataPoint>,
    pub ground_truth_inliers: Option<Vec<bool>>,
    pub model_hint: Option<ModelKind>,
    pub name: String,
}

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut model_hint = None;
    let mut points = Vec::new();
    let mut flags: Vec<bool> = Vec::new();
    let mut columns: Option<usize> = None;

    for (index, raw) in text.lines().enumerate() {
        let line_no = index + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let comment = comment.trim();
            if let Some(kind) = comment.strip_prefix("model:") {
                let kind = kind.trim();
                model_hint =
                    Some(kind.parse::<ModelKind>().map_err(|_| {
                        parse_error(path, line_no, format!("unknown model `{kind}`"))
                    })?);
            }
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let count = tokens.len();
        if !matches!(count, 2..=5) {
            return Err(parse_error(
                path,
                line_no,
                format!("expected 2-5 columns, got {count}"),
            ));
        }
        match columns {
            None => columns = Some(count),
            Some(c) if c != count => {
                return Err(parse_error(
                    path,
                    line_no,
                    format!("inconsistent column count: {count} here, {c} before"),
                ));
            }
            _ => {}
        }
        let has_flag = matches!(count, 3 | 5);
        let coord_count = count - usize::from(has_flag);
        let mut coords = [0.0f64; 4];
        for (i, token) in tokens[..coord_count].iter().enumerate() {
            coords[i] = token
                .parse::<f64>()
                .map_err(|_| parse_error(path, line_no, format!("bad number `{token}`")))?;
            if !coords[i].is_finite() {
                return Err(parse_error(path, line_no, "coordinates must be finite"));
            }
        }
        if has_flag {
            let token = tokens[count - 1];
            let value = token
                .parse::<f64>()
                .map_err(|_| parse_error(path, line_no, format!("bad inlier flag `{token}`")))?;
            if value == 0.0 {
                flags.push(false);
            } else if value == 1.0 {
                flags.push(true);
            } else {
                return Err(parse_error(
                    path,
                    line_no,
                    format!("inlier flag must be 0 or 1, got `{token}`"),
                ));
            }
        }
        points.push(if coord_count == 2 {
            DataPoint::point2(coords[0], coords[1])
        } else {
            DataPoint::correspondence(coords[0], coords[1], coords[2], coords[3])
        });
    }

    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(Dataset {
        ground_truth_inliers: (!flags.is_empty()).then_some(flags),
        points,
        model_hint,
        name,
    })
}

/// Writes a dataset in the same format `load_dataset` reads; floats use the
/// shortest round-trip representation, so save/load is lossless.
pub fn save_dataset(path: impl AsRef<Path>, dataset: &Dataset) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    if let Some(kind) = dataset.model_hint {
        let _ = writeln!(out, "# model: {kind}");
    }
    for (i, point) in dataset.points.iter().enumerate() {
        let coords = point.coords();
        let mut first = true;
        for c in coords {
            if !first {
                out.push(' ');
            }
            let _ = write!(out, "{c}");
            first = false;
        }
        if let Some(flags) = &dataset.ground_truth_inliers {
            let _ = write!(out, " {}", u8::from(flags[i]));
        }
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
