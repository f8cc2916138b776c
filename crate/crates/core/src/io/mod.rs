//! Point-cloud files, hull export and JSON reports.

mod obj;
mod ply;
mod xyz;

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

pub use obj::{hull_file_name, hull_to_obj};
pub use ply::{parse_ply, write_ply, PlyEncoding};
pub use xyz::{parse_label_sidecar, parse_xyz, write_xyz};

use crate::abstraction::ConvexPart;
use crate::error::{CidError, Result};
use crate::geometry::PointCloud;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SceneFormat {
    PlyAscii,
    PlyBinaryLe,
    XyzText,
}

impl FromStr for SceneFormat {
    type Err = CidError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ply-ascii" => Ok(SceneFormat::PlyAscii),
            "ply-binary-le" | "ply" => Ok(SceneFormat::PlyBinaryLe),
            "xyz-text" | "xyz" => Ok(SceneFormat::XyzText),
            other => Err(CidError::invalid(format!(
                "unknown format '{other}' (expected ply-ascii, ply-binary-le or xyz-text)"
            ))),
        }
    }
}

impl SceneFormat {
    /// Guess from the file extension: `.ply` is binary PLY, everything else text.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("ply") => SceneFormat::PlyBinaryLe,
            _ => SceneFormat::XyzText,
        }
    }
}

/// Parses an in-memory scene. PLY input picks its encoding from the header.
pub fn parse_point_cloud(data: &[u8], format: SceneFormat) -> Result<PointCloud> {
    match format {
        SceneFormat::PlyAscii | SceneFormat::PlyBinaryLe => parse_ply(data),
        SceneFormat::XyzText => {
            let text = std::str::from_utf8(data).map_err(|e| CidError::parse("file", format!("invalid UTF-8: {e}")))?;
            parse_xyz(text)
        }
    }
}

pub fn encode_point_cloud(cloud: &PointCloud, format: SceneFormat) -> Vec<u8> {
    match format {
        SceneFormat::PlyAscii => write_ply(cloud, PlyEncoding::Ascii),
        SceneFormat::PlyBinaryLe => write_ply(cloud, PlyEncoding::BinaryLittleEndian),
        SceneFormat::XyzText => write_xyz(cloud).into_bytes(),
    }
}

/// Reads a scene from disk, optionally replacing its labels with a sidecar file.
pub fn read_point_cloud(path: &Path, format: Option<SceneFormat>, labels: Option<&Path>) -> Result<PointCloud> {
    let data = fs::read(path).map_err(|e| CidError::io(path, e))?;
    let format = format.unwrap_or_else(|| {
        if data.starts_with(b"ply") {
            SceneFormat::PlyBinaryLe
        } else {
            SceneFormat::from_path(path)
        }
    });
    let cloud = parse_point_cloud(&data, format)?;
    match labels {
        None => Ok(cloud),
        Some(side) => {
            let text = fs::read_to_string(side).map_err(|e| CidError::io(side, e))?;
            let (sem, inst) = parse_label_sidecar(&text)?;
            cloud.with_labels(Some(sem), Some(inst))
        }
    }
}

pub fn write_point_cloud(cloud: &PointCloud, path: &Path, format: SceneFormat) -> Result<()> {
    fs::write(path, encode_point_cloud(cloud, format)).map_err(|e| CidError::io(path, e))
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    fs::write(path, to_json(value)?).map_err(|e| CidError::io(path, e))
}

/// Writes one `part_<id>.obj` per convex part into `dir`.
pub fn write_hulls(parts: &[ConvexPart], cloud: &PointCloud, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| CidError::io(dir, e))?;
    parts
        .iter()
        .map(|part| {
            let path = dir.join(hull_file_name(part));
            fs::write(&path, hull_to_obj(part, cloud)).map_err(|e| CidError::io(&path, e))?;
            Ok(path)
        })
        .collect()
}
