use std::cmp::Ordering;

use crate::error::{CidError, Result};

/// A point in 2 or 3 dimensions. 2D points are stored with `z = 0`, which
/// leaves every squared distance bit-identical to its planar counterpart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    coords: [f64; 3],
    dim: u8,
}

impl Point {
    pub fn new(coords: &[f64]) -> Result<Self> {
        let dim = coords.len();
        if !(2..=3).contains(&dim) {
            return Err(CidError::invalid(format!(
                "points must have 2 or 3 coordinates, got {dim}"
            )));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(CidError::invalid("point coordinates must be finite"));
        }
        let mut xyz = [0.0; 3];
        xyz[..dim].copy_from_slice(coords);
        Ok(Point {
            coords: xyz,
            dim: dim as u8,
        })
    }

    pub fn xyz(x: f64, y: f64, z: f64) -> Result<Self> {
        Point::new(&[x, y, z])
    }

    pub fn xy(x: f64, y: f64) -> Result<Self> {
        Point::new(&[x, y])
    }

    pub(crate) fn from_raw(coords: [f64; 3], dim: usize) -> Self {
        Point { coords, dim: dim as u8 }
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    /// Coordinates padded to three components.
    pub fn coords(&self) -> &[f64; 3] {
        &self.coords
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coords[..self.dim()]
    }
}

#[inline]
pub(crate) fn dist_sq(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    dx * dx + dy * dy + dz * dz
}

/// Lexicographic order on finite coordinates.
pub(crate) fn lex_cmp(a: &[f64; 3], b: &[f64; 3]) -> Ordering {
    for k in 0..3 {
        match a[k].total_cmp(&b[k]) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    Ordering::Equal
}

/// An ordered set of points with optional per-point semantic and instance labels.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: Vec<[f64; 3]>,
    dim: usize,
    semantic_labels: Option<Vec<i32>>,
    instance_labels: Option<Vec<i32>>,
}

impl PointCloud {
    /// Builds a cloud from padded coordinates. For `dim == 2` every `z` must be zero.
    pub fn new(points: Vec<[f64; 3]>, dim: usize) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return Err(CidError::invalid(format!("dimension must be 2 or 3, got {dim}")));
        }
        if points.is_empty() {
            return Err(CidError::invalid("point cloud must contain at least one point"));
        }
        for (i, p) in points.iter().enumerate() {
            if p.iter().any(|c| !c.is_finite()) {
                return Err(CidError::invalid(format!("point {i} has a non-finite coordinate")));
            }
            if dim == 2 && p[2] != 0.0 {
                return Err(CidError::invalid(format!("2D point {i} has a non-zero z coordinate")));
            }
        }
        Ok(PointCloud {
            points,
            dim,
            semantic_labels: None,
            instance_labels: None,
        })
    }

    pub fn from_points(points: &[Point]) -> Result<Self> {
        let dim = points
            .first()
            .map(Point::dim)
            .ok_or_else(|| CidError::invalid("point cloud must contain at least one point"))?;
        if let Some(p) = points.iter().find(|p| p.dim() != dim) {
            return Err(CidError::DimensionMismatch {
                expected: dim,
                got: p.dim(),
            });
        }
        PointCloud::new(points.iter().map(|p| p.coords).collect(), dim)
    }

    pub fn with_labels(mut self, semantic: Option<Vec<i32>>, instance: Option<Vec<i32>>) -> Result<Self> {
        for (name, labels) in [("semantic", &semantic), ("instance", &instance)] {
            if let Some(l) = labels {
                if l.len() != self.points.len() {
                    return Err(CidError::invalid(format!(
                        "{name} label count {} does not match point count {}",
                        l.len(),
                        self.points.len()
                    )));
                }
            }
        }
        self.semantic_labels = semantic;
        self.instance_labels = instance;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    pub fn coords(&self, i: usize) -> &[f64; 3] {
        &self.points[i]
    }

    pub fn point(&self, i: usize) -> Result<Point> {
        self.points
            .get(i)
            .map(|c| Point::from_raw(*c, self.dim))
            .ok_or(CidError::IndexOutOfRange {
                index: i,
                len: self.points.len(),
            })
    }

    pub fn semantic_labels(&self) -> Option<&[i32]> {
        self.semantic_labels.as_deref()
    }

    pub fn instance_labels(&self) -> Option<&[i32]> {
        self.instance_labels.as_deref()
    }

    pub fn check_index(&self, i: usize) -> Result<()> {
        if i < self.points.len() {
            Ok(())
        } else {
            Err(CidError::IndexOutOfRange {
                index: i,
                len: self.points.len(),
            })
        }
    }

    /// Sub-cloud at the given indices, in the given order, labels included.
    pub fn select(&self, indices: &[usize]) -> Result<PointCloud> {
        for &i in indices {
            self.check_index(i)?;
        }
        let pick = |l: &Vec<i32>| indices.iter().map(|&i| l[i]).collect::<Vec<_>>();
        PointCloud::new(indices.iter().map(|&i| self.points[i]).collect(), self.dim)?.with_labels(
            self.semantic_labels.as_ref().map(pick),
            self.instance_labels.as_ref().map(pick),
        )
    }

    /// Applies `f` to every point. The caller keeps 2D clouds in the plane.
    pub fn map_points(&self, mut f: impl FnMut(&[f64; 3]) -> [f64; 3]) -> Result<PointCloud> {
        PointCloud::new(self.points.iter().map(&mut f).collect(), self.dim)?
            .with_labels(self.semantic_labels.clone(), self.instance_labels.clone())
    }

    /// Axis-aligned bounding box diagonal length.
    pub fn bbox_diagonal(&self) -> f64 {
        bbox_diagonal(self.points.iter())
    }
}

pub(crate) fn bbox_diagonal<'a>(points: impl Iterator<Item = &'a [f64; 3]>) -> f64 {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in points {
        for k in 0..3 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    if lo[0] > hi[0] {
        return 0.0;
    }
    dist_sq(&lo, &hi).sqrt()
}
