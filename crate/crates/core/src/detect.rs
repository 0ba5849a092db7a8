//! Detection ingest and database binding.
//!
//! Vision exports arrive as JSON lines, one detection per line, with `#`
//! comment lines and blank lines allowed between them. Parsing is all or
//! nothing: the first bad line fails the whole stream with its line
//! number, so a truncated export never half-loads.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::db::{ComponentRecord, Database};

/// Axis-aligned box in image coordinates, serialized as `[x, y, w, h]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub x: f64,
    pub y: f64,
    pub width: f64,
    pub height: f64,
}

impl BoundingBox {
    pub fn area(&self) -> f64 {
        self.width * self.height
    }
}

impl Serialize for BoundingBox {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        [self.x, self.y, self.width, self.height].serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BoundingBox {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let [x, y, width, height] = <[f64; 4]>::deserialize(deserializer)?;
        Ok(BoundingBox {
            x,
            y,
            width,
            height,
        })
    }
}

/// One detected component instance on a board image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub board_id: String,
    pub class_label: String,
    pub bbox: BoundingBox,
    pub confidence: f64,
}

/// A detection resolved against the database, with the point score
/// planning will rank it by.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundDetection {
    pub detection: Detection,
    pub record: ComponentRecord,
    pub recyclability_point: f64,
}

#[derive(Debug, Error)]
pub enum DetectError {
    #[error("line {line}: {reason}")]
    Line { line: usize, reason: String },
    #[error("cannot read `{path}`: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileLine {
    board_id: String,
    class: String,
    bbox: BoundingBox,
    confidence: f64,
}

fn check_line(line: &FileLine) -> Result<(), String> {
    if line.board_id.is_empty() {
        return Err("board_id must not be empty".to_owned());
    }
    if line.class.is_empty() {
        return Err("class must not be empty".to_owned());
    }
    let b = &line.bbox;
    for (name, v) in [("x", b.x), ("y", b.y), ("w", b.width), ("h", b.height)] {
        if !v.is_finite() {
            return Err(format!("bbox {name} is not finite"));
        }
    }
    if b.x < 0.0 || b.y < 0.0 {
        return Err(format!("bbox origin ({}, {}) must be nonnegative", b.x, b.y));
    }
    if b.width <= 0.0 || b.height <= 0.0 {
        return Err(format!(
            "bbox size {}x{} must be positive",
            b.width, b.height
        ));
    }
    if !line.confidence.is_finite() || line.confidence < 0.0 || line.confidence > 1.0 {
        return Err(format!(
            "confidence {} is outside [0, 1]",
            line.confidence
        ));
    }
    Ok(())
}

/// Parses a detection stream, preserving input order.
pub fn parse_detections(input: &str) -> Result<Vec<Detection>, DetectError> {
    let mut out = Vec::new();
    for (idx, raw) in input.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let parsed: FileLine = serde_json::from_str(trimmed).map_err(|e| DetectError::Line {
            line: line_no,
            reason: e.to_string(),
        })?;
        check_line(&parsed).map_err(|reason| DetectError::Line {
            line: line_no,
            reason,
        })?;
        out.push(Detection {
            board_id: parsed.board_id,
            class_label: parsed.class,
            bbox: parsed.bbox,
            confidence: parsed.confidence,
        });
    }
    Ok(out)
}

pub fn parse_detections_file(path: &Path) -> Result<Vec<Detection>, DetectError> {
    let text = std::fs::read_to_string(path).map_err(|source| DetectError::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_detections(&text)
}

/// Renders detections back to the line format `parse_detections` reads.
pub fn serialize_detections(detections: &[Detection]) -> String {
    let mut out = String::new();
    for det in detections {
        let line = FileLine {
            board_id: det.board_id.clone(),
            class: det.class_label.clone(),
            bbox: det.bbox,
            confidence: det.confidence,
        };
        out.push_str(&serde_json::to_string(&line).expect("detection serializes"));
        out.push('\n');
    }
    out
}

/// Splits detections into those that resolve to a scoreable record and
/// the rest. Order within each half follows input order, and binding
/// depends only on the class label.
pub fn bind_detections(
    detections: &[Detection],
    db: &Database,
) -> (Vec<BoundDetection>, Vec<Detection>) {
    let mut bound = Vec::new();
    let mut unbound = Vec::new();
    for det in detections {
        let hit = db
            .lookup(&det.class_label)
            .ok()
            .and_then(|record| Some((record, record.recyclability_point()?)));
        match hit {
            Some((record, point)) => bound.push(BoundDetection {
                detection: det.clone(),
                record: record.clone(),
                recyclability_point: point,
            }),
            None => unbound.push(det.clone()),
        }
    }
    (bound, unbound)
}
