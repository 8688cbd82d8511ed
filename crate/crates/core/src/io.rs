// SPDX-License-Identifier: Apache-2.0

//! On-disk formats.
//!
//! * Clouds: headerless little-endian `f32` records `(x, y, z, intensity)`.
//! * Labels: JSON array of `{id, category, center, size, rotation}`.
//! * Ground masks: one byte per point, `1` = ground, `0` = non-ground.
//! * Manifests: one frame per line, tab-separated `cloud  labels  [mask]`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::alignment::ObjectLabel;
use crate::error::{Error, Result};
use crate::geometry::{Frame, LidarPoint, Point3, PointCloud, RotationVector, Vector3};
use crate::labels::EgoLabel;

const RECORD: usize = 16;

pub fn read_cloud(path: impl AsRef<Path>, frame: Frame) -> Result<PointCloud> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_cloud(&bytes, frame).ok_or(Error::TruncatedFile {
        path: path.to_path_buf(),
        len: bytes.len() as u64,
    })
}

/// `None` when the length is not a whole number of records.
pub fn decode_cloud(bytes: &[u8], frame: Frame) -> Option<PointCloud> {
    if !bytes.len().is_multiple_of(RECORD) {
        return None;
    }
    let points = bytes
        .chunks_exact(RECORD)
        .map(|r| {
            let f = |k: usize| f32::from_le_bytes(r[4 * k..4 * k + 4].try_into().unwrap()) as f64;
            LidarPoint::new(f(0), f(1), f(2), f(3))
        })
        .collect();
    Some(PointCloud::from_points(points, frame))
}

/// Coordinates and intensities are narrowed to `f32`.
pub fn encode_cloud(cloud: &PointCloud) -> Vec<u8> {
    let mut out = Vec::with_capacity(cloud.len() * RECORD);
    for p in cloud.iter() {
        for v in [p.position.x, p.position.y, p.position.z, p.intensity] {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    out
}

pub fn write_cloud(path: impl AsRef<Path>, cloud: &PointCloud) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_cloud(cloud)).map_err(|e| Error::io(path, e))
}

/// How a label's `rotation` field is written.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum RotationFormat {
    /// `[rx, ry, rz]` axis-angle radians.
    #[default]
    AxisAngle,
    /// A scalar yaw in radians, promoted to `(0, 0, yaw)`.
    Yaw,
}

impl std::str::FromStr for RotationFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "axis-angle" => Ok(Self::AxisAngle),
            "yaw" => Ok(Self::Yaw),
            _ => Err(format!("unknown rotation format `{s}` (expected axis-angle or yaw)")),
        }
    }
}

pub fn read_labels(path: impl AsRef<Path>, format: RotationFormat) -> Result<Vec<ObjectLabel>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_labels(&text, format)
}

pub fn parse_labels(text: &str, format: RotationFormat) -> Result<Vec<ObjectLabel>> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::schema("$", e.to_string()))?;
    let Value::Array(items) = value else {
        return Err(Error::schema("$", "expected an array of labels"));
    };
    items
        .iter()
        .enumerate()
        .map(|(n, v)| parse_label(v, n, format))
        .collect()
}

fn parse_label(v: &Value, n: usize, format: RotationFormat) -> Result<ObjectLabel> {
    let at = |field: &str| format!("[{n}].{field}");
    let Value::Object(obj) = v else {
        return Err(Error::schema(format!("[{n}]"), "expected an object"));
    };
    let field = |name: &str| obj.get(name).ok_or_else(|| Error::schema(at(name), "missing field"));
    let id = match field("id")? {
        Value::String(s) => s.clone(),
        Value::Number(x) => x.to_string(),
        _ => return Err(Error::schema(at("id"), "expected a string or number")),
    };
    let category = field("category")?
        .as_str()
        .ok_or_else(|| Error::schema(at("category"), "expected a string"))?
        .to_string();
    let center = triple(field("center")?, &at("center"))?;
    let size = triple(field("size")?, &at("size"))?;
    if size.iter().any(|s| !(*s > 0.0)) {
        return Err(Error::schema(at("size"), "extents must be positive"));
    }
    let rotation = match format {
        RotationFormat::AxisAngle => triple(field("rotation")?, &at("rotation"))?,
        RotationFormat::Yaw => {
            let yaw = number(field("rotation")?, &at("rotation"))?;
            Vector3::new(0.0, 0.0, yaw)
        }
    };
    Ok(ObjectLabel {
        id,
        category,
        size,
        center: Point3::from(center),
        rotation: RotationVector(rotation),
    })
}

fn number(v: &Value, path: &str) -> Result<f64> {
    v.as_f64()
        .filter(|x| x.is_finite())
        .ok_or_else(|| Error::schema(path, "expected a finite number"))
}

fn triple(v: &Value, path: &str) -> Result<Vector3> {
    match v {
        Value::Array(xs) if xs.len() == 3 => {
            let mut out = Vector3::zeros();
            for (k, x) in xs.iter().enumerate() {
                out[k] = number(x, &format!("{path}[{k}]"))?;
            }
            Ok(out)
        }
        Value::Array(xs) => Err(Error::schema(path, format!("expected 3 numbers, found {}", xs.len()))),
        _ => Err(Error::schema(path, "expected an array of 3 numbers")),
    }
}

fn label_value(l: &ObjectLabel) -> Map<String, Value> {
    let v3 = |v: &Vector3| json!([v.x, v.y, v.z]);
    let mut m = Map::new();
    m.insert("id".into(), json!(l.id));
    m.insert("category".into(), json!(l.category));
    m.insert("center".into(), v3(&l.center.coords));
    m.insert("size".into(), v3(&l.size));
    m.insert("rotation".into(), v3(&l.rotation.0));
    m
}

/// Writes axis-angle labels; numbers use the shortest text that parses back
/// to the same `f64`.
pub fn write_labels(path: impl AsRef<Path>, labels: &[ObjectLabel]) -> Result<()> {
    let items: Vec<Value> = labels.iter().map(|l| Value::Object(label_value(l))).collect();
    write_json(path, &items)
}

/// Lidar-frame labels, each with an extra `is_ego` flag.
pub fn write_ego_labels(path: impl AsRef<Path>, labels: &[EgoLabel]) -> Result<()> {
    let items: Vec<Value> = labels
        .iter()
        .map(|e| {
            let mut m = label_value(&e.label);
            m.insert("is_ego".into(), json!(e.is_ego));
            Value::Object(m)
        })
        .collect();
    write_json(path, &items)
}

pub fn write_json<T: Serialize + ?Sized>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::schema("$", e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::schema(path.display().to_string(), e.to_string()))
}

pub fn read_mask(path: impl AsRef<Path>) -> Result<Vec<bool>> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    bytes
        .iter()
        .enumerate()
        .map(|(n, b)| match b {
            0 => Ok(false),
            1 => Ok(true),
            _ => Err(Error::schema(
                format!("{}[{n}]", path.display()),
                format!("mask byte {b} is neither 0 nor 1"),
            )),
        })
        .collect()
}

pub fn write_mask(path: impl AsRef<Path>, mask: &[bool]) -> Result<()> {
    let path = path.as_ref();
    let bytes: Vec<u8> = mask.iter().map(|&g| g as u8).collect();
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// One frame: a world-frame cloud and its labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrameBundle {
    pub frame_id: String,
    pub cloud: PathBuf,
    pub labels: PathBuf,
    pub ground_mask: Option<PathBuf>,
}

impl FrameBundle {
    /// Frame id taken from the cloud's file stem.
    pub fn new(cloud: PathBuf, labels: PathBuf, ground_mask: Option<PathBuf>) -> Self {
        let frame_id = cloud
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "frame".into());
        Self {
            frame_id,
            cloud,
            labels,
            ground_mask,
        }
    }
}

/// Parses a manifest. Relative paths are resolved against `base`; blank
/// lines and lines starting with `#` are skipped.
pub fn parse_manifest(text: &str, base: &Path) -> Result<Vec<FrameBundle>> {
    let mut out: Vec<FrameBundle> = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if !(2..=3).contains(&fields.len()) || fields.iter().any(|f| f.trim().is_empty()) {
            return Err(Error::schema(
                format!("line {}", n + 1),
                "expected `cloud<TAB>labels[<TAB>mask]`",
            ));
        }
        let resolve = |f: &str| base.join(f.trim());
        let bundle = FrameBundle::new(
            resolve(fields[0]),
            resolve(fields[1]),
            fields.get(2).map(|f| resolve(f)),
        );
        if out.iter().any(|b| b.frame_id == bundle.frame_id) {
            return Err(Error::schema(
                format!("line {}", n + 1),
                format!("duplicate frame id `{}`", bundle.frame_id),
            ));
        }
        out.push(bundle);
    }
    Ok(out)
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<FrameBundle>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_manifest(&text, path.parent().unwrap_or(Path::new(".")))
}
