//! Wavefront OBJ text for convex parts.

use std::fmt::Write as _;

use crate::abstraction::{ConvexPart, HullFacets};
use crate::geometry::PointCloud;

/// `v` records for the hull vertices, then `f` records (triangles or one
/// polygon) or an `l` record for a segment. Indices are 1-based.
pub fn hull_to_obj(part: &ConvexPart, cloud: &PointCloud) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# convex part {} ({:?})", part.group_id, part.degeneracy);
    for &v in &part.hull_vertices {
        let p = cloud.coords(v);
        let _ = writeln!(out, "v {} {} {}", p[0], p[1], p[2]);
    }
    let local = |v: usize| {
        part.hull_vertices
            .binary_search(&v)
            .expect("facet vertex is a hull vertex")
            + 1
    };
    match &part.facets {
        HullFacets::Triangles(tris) => {
            for t in tris {
                let _ = writeln!(out, "f {} {} {}", local(t[0]), local(t[1]), local(t[2]));
            }
        }
        HullFacets::Polygon(loop_) if loop_.len() >= 3 => {
            let ids: Vec<String> = loop_.iter().map(|&v| local(v).to_string()).collect();
            let _ = writeln!(out, "f {}", ids.join(" "));
        }
        HullFacets::Polygon(loop_) if loop_.len() == 2 => {
            let _ = writeln!(out, "l {} {}", local(loop_[0]), local(loop_[1]));
        }
        HullFacets::Segment([a, b]) => {
            let _ = writeln!(out, "l {} {}", local(*a), local(*b));
        }
        _ => {}
    }
    out
}

/// File name used for a part on disk.
pub fn hull_file_name(part: &ConvexPart) -> String {
    format!("part_{}.obj", part.group_id)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abstraction::hull_of;

    #[test]
    fn tetrahedron_obj() {
        let cloud = PointCloud::new(
            vec![
                [0.0, 0.0, 0.0],
                [1.0, 0.0, 0.0],
                [0.0, 1.0, 0.0],
                [0.0, 0.0, 1.0],
                [0.1, 0.1, 0.1],
            ],
            3,
        )
        .unwrap();
        let part = hull_of(cloud.points(), 3, 2, &[0, 1, 2, 3, 4]);
        let obj = hull_to_obj(&part, &cloud);
        assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), 4);
        assert_eq!(obj.lines().filter(|l| l.starts_with("f ")).count(), 4);
        assert_eq!(hull_file_name(&part), "part_2.obj");
    }
}
