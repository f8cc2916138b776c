//! Convex hulls of point groups.
//!
//! Each group's affine rank is measured first (singular values of the
//! centred coordinates, relative cutoff [`RANK_TOLERANCE`]). Full-rank 3D groups
//! get an incremental triangle-mesh hull with outward winding; planar groups
//! get a polygon in their best-fit plane; collinear groups a segment.

use std::collections::HashSet;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{bbox_diagonal, PointCloud};
use crate::segmentation::GroupAssignment;

/// Singular values below this fraction of the largest one count as zero.
pub const RANK_TOLERANCE: f64 = 1e-8;

/// Points closer than this fraction of the bounding-box diagonal to a facet
/// plane are treated as lying on it.
const PLANE_EPS: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Degeneracy {
    None,
    Planar,
    Linear,
    Point,
}

/// Boundary of a hull, in cloud point indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HullFacets {
    /// Outward-wound triangles of a 3D hull.
    Triangles(Vec<[usize; 3]>),
    /// Counter-clockwise vertex loop of a 2D or planar hull.
    Polygon(Vec<usize>),
    Segment([usize; 2]),
    Point(usize),
}

impl HullFacets {
    /// Boundary edges: polygon sides, or the single segment.
    pub fn edges(&self) -> Vec<[usize; 2]> {
        match self {
            HullFacets::Polygon(loop_) => (0..loop_.len())
                .map(|i| [loop_[i], loop_[(i + 1) % loop_.len()]])
                .collect(),
            HullFacets::Segment(s) => vec![*s],
            _ => Vec::new(),
        }
    }

    pub fn facet_count(&self) -> usize {
        match self {
            HullFacets::Triangles(t) => t.len(),
            HullFacets::Polygon(p) => p.len(),
            HullFacets::Segment(_) => 1,
            HullFacets::Point(_) => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexPart {
    pub group_id: usize,
    /// Hull vertices as cloud point indices, ascending.
    pub hull_vertices: Vec<usize>,
    pub facets: HullFacets,
    pub degeneracy: Degeneracy,
}

/// One convex part per group of `assignment`.
pub fn convex_hulls(cloud: &PointCloud, assignment: &GroupAssignment) -> Result<Vec<ConvexPart>> {
    if assignment.point_count() != cloud.len() {
        return Err(crate::error::CidError::invalid(
            "assignment and cloud have different point counts",
        ));
    }
    Ok(assignment
        .groups()
        .iter()
        .enumerate()
        .map(|(g, members)| hull_of(cloud.points(), cloud.dim(), g, members))
        .collect())
}

/// Convex part of `members`, which must be non-empty.
pub fn hull_of(points: &[[f64; 3]], dim: usize, group_id: usize, members: &[usize]) -> ConvexPart {
    let mut ids = members.to_vec();
    ids.sort_unstable();
    ids.dedup();
    let (rank, basis) = affine_frame(points, &ids);
    let (facets, degeneracy) = match (rank, dim) {
        (0, _) => (HullFacets::Point(ids[0]), Degeneracy::Point),
        (1, _) => (segment_hull(points, &ids, &basis[0]), Degeneracy::Linear),
        (2, 2) => (
            polygon_hull(points, &ids, &[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]),
            Degeneracy::None,
        ),
        (2, _) => (polygon_hull(points, &ids, &[basis[0], basis[1]]), Degeneracy::Planar),
        _ => (mesh_hull(points, &ids), Degeneracy::None),
    };
    let mut hull_vertices: Vec<usize> = match &facets {
        HullFacets::Triangles(t) => t.iter().flatten().copied().collect(),
        HullFacets::Polygon(p) => p.clone(),
        HullFacets::Segment(s) => s.to_vec(),
        HullFacets::Point(p) => vec![*p],
    };
    hull_vertices.sort_unstable();
    hull_vertices.dedup();
    ConvexPart {
        group_id,
        hull_vertices,
        facets,
        degeneracy,
    }
}

/// Affine rank of the points and their principal directions, strongest first.
fn affine_frame(points: &[[f64; 3]], ids: &[usize]) -> (usize, [[f64; 3]; 3]) {
    let n = ids.len();
    let mut mean = [0.0; 3];
    for &i in ids {
        for k in 0..3 {
            mean[k] += points[i][k];
        }
    }
    for m in mean.iter_mut() {
        *m /= n as f64;
    }
    // zero rows pad tiny groups so all three right singular vectors exist
    let rows = n.max(3);
    let centred = DMatrix::from_fn(rows, 3, |r, c| if r < n { points[ids[r]][c] - mean[c] } else { 0.0 });
    let svd = centred.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let largest = svd.singular_values[order[0]];
    let rank = if largest <= 0.0 {
        0
    } else {
        order
            .iter()
            .filter(|&&k| svd.singular_values[k] > RANK_TOLERANCE * largest)
            .count()
    };
    let mut basis = [[0.0; 3]; 3];
    for (slot, &k) in order.iter().enumerate() {
        for c in 0..3 {
            basis[slot][c] = v_t[(k, c)];
        }
    }
    (rank, basis)
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn sub(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Extreme points along `dir`; lowest index wins ties.
fn segment_hull(points: &[[f64; 3]], ids: &[usize], dir: &[f64; 3]) -> HullFacets {
    let mut lo = (f64::INFINITY, usize::MAX);
    let mut hi = (f64::NEG_INFINITY, usize::MAX);
    for &i in ids {
        let t = dot(&points[i], dir);
        if t < lo.0 {
            lo = (t, i);
        }
        if t > hi.0 {
            hi = (t, i);
        }
    }
    let (a, b) = if lo.1 < hi.1 { (lo.1, hi.1) } else { (hi.1, lo.1) };
    HullFacets::Segment([a, b])
}

/// Monotone-chain hull of the points projected onto the plane spanned by `axes`.
fn polygon_hull(points: &[[f64; 3]], ids: &[usize], axes: &[[f64; 3]; 2]) -> HullFacets {
    let mut proj: Vec<(f64, f64, usize)> = ids
        .iter()
        .map(|&i| (dot(&points[i], &axes[0]), dot(&points[i], &axes[1]), i))
        .collect();
    proj.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.cmp(&b.2)));
    proj.dedup_by(|a, b| a.0 == b.0 && a.1 == b.1);
    if proj.len() < 3 {
        let ends: Vec<usize> = proj.iter().map(|p| p.2).collect();
        return HullFacets::Polygon(ends);
    }
    let turn = |o: &(f64, f64, usize), a: &(f64, f64, usize), b: &(f64, f64, usize)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let mut hull: Vec<(f64, f64, usize)> = Vec::with_capacity(2 * proj.len());
    for p in proj.iter() {
        while hull.len() >= 2 && turn(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(*p);
    }
    let lower_len = hull.len() + 1;
    for p in proj.iter().rev().skip(1) {
        while hull.len() >= lower_len && turn(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(*p);
    }
    hull.pop();
    HullFacets::Polygon(hull.into_iter().map(|p| p.2).collect())
}

struct Face {
    v: [usize; 3],
    normal: [f64; 3],
    offset: f64,
    alive: bool,
}

impl Face {
    fn new(points: &[[f64; 3]], v: [usize; 3]) -> Self {
        let n = cross(&sub(&points[v[1]], &points[v[0]]), &sub(&points[v[2]], &points[v[0]]));
        let len = dot(&n, &n).sqrt();
        let normal = if len > 0.0 {
            [n[0] / len, n[1] / len, n[2] / len]
        } else {
            n
        };
        Face {
            v,
            normal,
            offset: dot(&normal, &points[v[0]]),
            alive: true,
        }
    }

    fn height(&self, p: &[f64; 3]) -> f64 {
        dot(&self.normal, p) - self.offset
    }
}

/// Incremental 3D hull of a full-rank point set.
fn mesh_hull(points: &[[f64; 3]], ids: &[usize]) -> HullFacets {
    let eps = PLANE_EPS * bbox_diagonal(ids.iter().map(|&i| &points[i]));

    // initial tetrahedron from extreme points
    let p = |i: usize| &points[i];
    let a = *ids
        .iter()
        .min_by(|&&x, &&y| p(x)[0].total_cmp(&p(y)[0]).then(x.cmp(&y)))
        .expect("non-empty group");
    let farthest = |score: &dyn Fn(usize) -> f64| {
        let mut best = (f64::NEG_INFINITY, usize::MAX);
        for &i in ids {
            let s = score(i);
            if s > best.0 {
                best = (s, i);
            }
        }
        best.1
    };
    let b = farthest(&|i| {
        let d = sub(p(i), p(a));
        dot(&d, &d)
    });
    let ab = sub(p(b), p(a));
    let c = farthest(&|i| {
        let x = cross(&ab, &sub(p(i), p(a)));
        dot(&x, &x)
    });
    let base_normal = cross(&ab, &sub(p(c), p(a)));
    let d = farthest(&|i| dot(&base_normal, &sub(p(i), p(a))).abs());

    let mut faces: Vec<Face> = Vec::new();
    let centroid = {
        let mut m = [0.0; 3];
        for &i in &[a, b, c, d] {
            for k in 0..3 {
                m[k] += points[i][k] / 4.0;
            }
        }
        m
    };
    for tri in [[a, b, c], [a, b, d], [a, c, d], [b, c, d]] {
        let mut f = Face::new(points, tri);
        if f.height(&centroid) > 0.0 {
            f = Face::new(points, [tri[0], tri[2], tri[1]]);
        }
        faces.push(f);
    }

    let simplex = [a, b, c, d];
    for &q in ids {
        if simplex.contains(&q) {
            continue;
        }
        let pq = &points[q];
        let visible: Vec<usize> = faces
            .iter()
            .enumerate()
            .filter(|(_, f)| f.alive && f.height(pq) > eps)
            .map(|(k, _)| k)
            .collect();
        if visible.is_empty() {
            continue;
        }
        let mut edges: HashSet<(usize, usize)> = HashSet::new();
        for &k in &visible {
            let v = faces[k].v;
            for e in 0..3 {
                edges.insert((v[e], v[(e + 1) % 3]));
            }
        }
        let mut horizon: Vec<(usize, usize)> = Vec::new();
        for &k in &visible {
            let v = faces[k].v;
            for e in 0..3 {
                let (s, t) = (v[e], v[(e + 1) % 3]);
                if !edges.contains(&(t, s)) {
                    horizon.push((s, t));
                }
            }
            faces[k].alive = false;
        }
        for (s, t) in horizon {
            faces.push(Face::new(points, [s, t, q]));
        }
    }

    HullFacets::Triangles(faces.into_iter().filter(|f| f.alive).map(|f| f.v).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tetrahedron() {
        let pts = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        let part = hull_of(&pts, 3, 0, &[0, 1, 2, 3]);
        assert_eq!(part.degeneracy, Degeneracy::None);
        assert_eq!(part.hull_vertices, vec![0, 1, 2, 3]);
        assert_eq!(part.facets.facet_count(), 4);
    }

    #[test]
    fn collinear_points_give_a_segment() {
        let pts: Vec<[f64; 3]> = (0..10).map(|i| [i as f64, 2.0 * i as f64, -(i as f64)]).collect();
        let ids: Vec<usize> = (0..10).rev().collect();
        let part = hull_of(&pts, 3, 3, &ids);
        assert_eq!(part.degeneracy, Degeneracy::Linear);
        assert_eq!(part.hull_vertices, vec![0, 9]);
        assert_eq!(part.facets, HullFacets::Segment([0, 9]));
    }

    #[test]
    fn single_point_and_duplicates() {
        let pts = [[1.0, 1.0, 1.0], [1.0, 1.0, 1.0]];
        let part = hull_of(&pts, 3, 0, &[1, 0]);
        assert_eq!(part.degeneracy, Degeneracy::Point);
        assert_eq!(part.hull_vertices, vec![0]);
    }

    #[test]
    fn planar_square_with_interior_points() {
        let mut pts = vec![[0.0, 0.0, 1.0], [2.0, 0.0, 1.0], [2.0, 2.0, 1.0], [0.0, 2.0, 1.0]];
        pts.extend([[1.0, 1.0, 1.0], [1.0, 0.0, 1.0], [0.5, 1.5, 1.0]]);
        let ids: Vec<usize> = (0..pts.len()).collect();
        let part = hull_of(&pts, 3, 0, &ids);
        assert_eq!(part.degeneracy, Degeneracy::Planar);
        assert_eq!(part.hull_vertices, vec![0, 1, 2, 3]);
        assert_eq!(part.facets.edges().len(), 4);
    }

    #[test]
    fn two_dimensional_polygon_is_not_degenerate() {
        let pts = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.2, 0.2, 0.0]];
        let part = hull_of(&pts, 2, 0, &[0, 1, 2, 3]);
        assert_eq!(part.degeneracy, Degeneracy::None);
        assert_eq!(part.facets, HullFacets::Polygon(vec![0, 1, 2]));
    }

    #[test]
    fn cube_hull_has_outward_faces() {
        let mut pts = Vec::new();
        for x in [0.0, 1.0] {
            for y in [0.0, 1.0] {
                for z in [0.0, 1.0] {
                    pts.push([x, y, z]);
                }
            }
        }
        pts.push([0.5, 0.5, 0.5]);
        pts.push([0.5, 0.5, 1.0]);
        let ids: Vec<usize> = (0..pts.len()).collect();
        let part = hull_of(&pts, 3, 0, &ids);
        assert_eq!(part.hull_vertices, (0..8).collect::<Vec<_>>());
        let HullFacets::Triangles(tris) = &part.facets else {
            panic!()
        };
        assert_eq!(tris.len(), 12);
        for t in tris {
            let f = Face::new(&pts, *t);
            assert!(f.height(&[0.5, 0.5, 0.5]) < 0.0);
        }
    }
}
