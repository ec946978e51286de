//! Text file formats: DOTA-style annotations, per-class detection
//! submission files, and tile naming.
//!
//! Annotations are whitespace-separated lines
//! `x1 y1 x2 y2 x3 y3 x4 y4 category difficulty`; blank lines and `#`
//! comments are skipped, as are the `imagesource:`/`gsd:` metadata
//! headers found in real DOTA files. Quads are refit to rotated boxes
//! on ingest.
//!
//! Detections use the submission convention: one `Task1_<category>.txt`
//! file per class, lines `image_id score x1 y1 ... y4`, coordinates and
//! scores at six decimal places. Writing then parsing a detection set
//! reproduces it to within that precision.
//!
//! All writers go through a write-to-temp-then-rename path so an
//! interrupted run never leaves a partial file behind.

use crate::classes::ClassTable;
use crate::error::{Error, Result};
use crate::geometry::{obb_to_quad, point, quad_to_obb, Quad};
use crate::annotations::{AnnotationSet, Object};
use crate::nms::Detection;
use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

/// How to treat categories missing from the class table.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnknownPolicy {
    /// Reject the whole file, reporting every unknown category.
    Reject,
    /// Drop objects with unknown categories, keep the rest.
    Skip,
}

/// A detection paired with the image it belongs to, as stored in
/// submission files.
#[derive(Clone, Debug, PartialEq)]
pub struct DetectionRecord {
    pub image_id: String,
    pub detection: Detection,
}

/// Parse one DOTA annotation file. The image id is the file stem; image
/// dimensions are not stored in this format and must be supplied.
pub fn parse_annotations(
    path: impl AsRef<Path>,
    image_w: f64,
    image_h: f64,
    table: &ClassTable,
    policy: UnknownPolicy,
) -> Result<AnnotationSet> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let image_id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_annotations_str(&text, &image_id, image_w, image_h, table, policy, path)
}

fn parse_annotations_str(
    text: &str,
    image_id: &str,
    image_w: f64,
    image_h: f64,
    table: &ClassTable,
    policy: UnknownPolicy,
    path: &Path,
) -> Result<AnnotationSet> {
    let mut set = AnnotationSet::new(image_id, image_w, image_h);
    let mut unknown: Vec<String> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty()
            || line.starts_with('#')
            || line.starts_with("imagesource:")
            || line.starts_with("gsd:")
        {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != 10 {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: lineno + 1,
                message: format!(
                    "expected 8 coordinates, category, difficulty; got {} tokens",
                    tokens.len()
                ),
            });
        }
        let mut coords = [0.0f64; 8];
        for (i, tok) in tokens[..8].iter().enumerate() {
            coords[i] = tok.parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line: lineno + 1,
                message: format!("bad coordinate '{tok}'"),
            })?;
        }
        let category = tokens[8];
        let difficulty: i64 = tokens[9].parse().map_err(|_| Error::Parse {
            path: path.to_path_buf(),
            line: lineno + 1,
            message: format!("bad difficulty '{}'", tokens[9]),
        })?;
        let class_id = match table.index_of(category) {
            Some(id) => id,
            None => {
                if !unknown.iter().any(|n| n == category) {
                    unknown.push(category.to_string());
                }
                continue;
            }
        };
        let quad = quad_from_coords(&coords).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: lineno + 1,
            message: e.to_string(),
        })?;
        let bbox = quad_to_obb(&quad).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: lineno + 1,
            message: e.to_string(),
        })?;
        set.objects.push(Object { bbox, class_id, difficult: difficulty != 0 });
    }
    if !unknown.is_empty() && policy == UnknownPolicy::Reject {
        unknown.sort();
        return Err(Error::UnknownCategories { path: path.to_path_buf(), names: unknown });
    }
    Ok(set)
}

fn quad_from_coords(coords: &[f64; 8]) -> Result<Quad> {
    Quad::new([
        point(coords[0], coords[1]),
        point(coords[2], coords[3]),
        point(coords[4], coords[5]),
        point(coords[6], coords[7]),
    ])
}

/// Parse every `.txt` file of a directory as annotations.
pub fn parse_annotation_dir(
    dir: impl AsRef<Path>,
    image_w: f64,
    image_h: f64,
    table: &ClassTable,
    policy: UnknownPolicy,
) -> Result<Vec<AnnotationSet>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir.as_ref())?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().map_or(false, |e| e == "txt"))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| parse_annotations(p, image_w, image_h, table, policy))
        .collect()
}

/// Serialize one annotation set in DOTA format.
pub fn annotation_lines(set: &AnnotationSet, table: &ClassTable) -> Result<String> {
    let mut out = String::new();
    for obj in &set.objects {
        let quad = obb_to_quad(&obj.bbox);
        for v in quad.vertices() {
            out.push_str(&format!("{:.6} {:.6} ", v.x, v.y));
        }
        out.push_str(table.name(obj.class_id)?);
        out.push_str(if obj.difficult { " 1\n" } else { " 0\n" });
    }
    Ok(out)
}

/// Write a file atomically: the content lands under the final name only
/// when complete.
pub fn write_atomic(path: impl AsRef<Path>, content: &str) -> Result<()> {
    let path = path.as_ref();
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut tmp = match dir {
        Some(d) => tempfile::NamedTempFile::new_in(d)?,
        None => tempfile::NamedTempFile::new_in(".")?,
    };
    tmp.write_all(content.as_bytes())?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// File name of the per-class submission file.
pub fn detection_file_name(category: &str) -> String {
    format!("Task1_{category}.txt")
}

/// Write detections as per-class submission files into `dir`.
///
/// Every class in the table gets a file, even when empty. Records keep
/// their input order within each class.
pub fn write_detections(
    records: &[DetectionRecord],
    dir: impl AsRef<Path>,
    table: &ClassTable,
) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let mut per_class: BTreeMap<usize, String> = BTreeMap::new();
    for class_id in 0..table.len() {
        per_class.insert(class_id, String::new());
    }
    for rec in records {
        let det = &rec.detection;
        let body = per_class.get_mut(&det.class_id).ok_or_else(|| {
            Error::ClassTable(format!(
                "detection references class id {} ({} classes)",
                det.class_id,
                table.len()
            ))
        })?;
        body.push_str(&rec.image_id);
        body.push_str(&format!(" {:.6}", det.score));
        let quad = obb_to_quad(&det.bbox);
        for v in quad.vertices() {
            body.push_str(&format!(" {:.6} {:.6}", v.x, v.y));
        }
        body.push('\n');
    }
    for (class_id, body) in per_class {
        let name = detection_file_name(table.name(class_id)?);
        write_atomic(dir.join(name), &body)?;
    }
    Ok(())
}

/// Parse all `Task1_*.txt` files in a directory.
///
/// Records come back grouped by file in table order, preserving line
/// order; scores outside `[0, 1]` are rejected.
pub fn parse_detections(dir: impl AsRef<Path>, table: &ClassTable) -> Result<Vec<DetectionRecord>> {
    let dir = dir.as_ref();
    let mut records = Vec::new();
    for class_id in 0..table.len() {
        let path = dir.join(detection_file_name(table.name(class_id)?));
        if !path.exists() {
            continue;
        }
        let text = std::fs::read_to_string(&path)?;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.len() != 10 {
                return Err(Error::Parse {
                    path: path.clone(),
                    line: lineno + 1,
                    message: format!(
                        "expected image id, score, 8 coordinates; got {} tokens",
                        tokens.len()
                    ),
                });
            }
            let image_id = tokens[0].to_string();
            let score: f64 = tokens[1].parse().map_err(|_| Error::Parse {
                path: path.clone(),
                line: lineno + 1,
                message: format!("bad score '{}'", tokens[1]),
            })?;
            if !(0.0..=1.0).contains(&score) {
                return Err(Error::Parse {
                    path: path.clone(),
                    line: lineno + 1,
                    message: format!("score {score} outside [0, 1]"),
                });
            }
            let mut coords = [0.0f64; 8];
            for (i, tok) in tokens[2..].iter().enumerate() {
                coords[i] = tok.parse().map_err(|_| Error::Parse {
                    path: path.clone(),
                    line: lineno + 1,
                    message: format!("bad coordinate '{tok}'"),
                })?;
            }
            let quad = quad_from_coords(&coords).map_err(|e| Error::Parse {
                path: path.clone(),
                line: lineno + 1,
                message: e.to_string(),
            })?;
            let bbox = quad_to_obb(&quad).map_err(|e| Error::Parse {
                path: path.clone(),
                line: lineno + 1,
                message: e.to_string(),
            })?;
            records.push(DetectionRecord {
                image_id,
                detection: Detection { bbox, class_id, score },
            });
        }
    }
    Ok(records)
}

/// Compose the tile id `<image_id>__<x0>__<y0>`.
pub fn tile_id(image_id: &str, x0: u32, y0: u32) -> String {
    format!("{image_id}__{x0}__{y0}")
}

/// Split a tile id back into image id and origin. Image ids containing
/// `__` are handled by taking the last two groups as coordinates.
pub fn parse_tile_id(tile: &str) -> Option<(String, u32, u32)> {
    let mut parts = tile.rsplitn(3, "__");
    let y0: u32 = parts.next()?.parse().ok()?;
    let x0: u32 = parts.next()?.parse().ok()?;
    let image_id = parts.next()?;
    if image_id.is_empty() {
        return None;
    }
    Some((image_id.to_string(), x0, y0))
}

/// Group detection records by image id, preserving record order inside
/// each image. Image order is lexicographic for determinism.
pub fn group_by_image(records: Vec<DetectionRecord>) -> Vec<(String, Vec<Detection>)> {
    let mut map: BTreeMap<String, Vec<Detection>> = BTreeMap::new();
    for rec in records {
        map.entry(rec.image_id).or_default().push(rec.detection);
    }
    map.into_iter().collect()
}
