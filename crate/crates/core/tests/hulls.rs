mod common;

use cid_core::abstraction::{convex_hulls, hull_of, Degeneracy, HullFacets};
use cid_core::geometry::PointCloud;
use cid_core::io::hull_to_obj;
use cid_core::segmentation::GroupAssignment;

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

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Vertices of the hull of points in general position: every point on some
/// triple's plane that has the whole set on one side.
fn extreme_points(pts: &[[f64; 3]]) -> Vec<usize> {
    let n = pts.len();
    let mut extreme = vec![false; n];
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let normal = cross(&sub(&pts[j], &pts[i]), &sub(&pts[k], &pts[i]));
                let (mut pos, mut neg) = (false, false);
                for (q, p) in pts.iter().enumerate() {
                    if q == i || q == j || q == k {
                        continue;
                    }
                    let s = dot(&normal, &sub(p, &pts[i]));
                    pos |= s > 0.0;
                    neg |= s < 0.0;
                }
                if !(pos && neg) {
                    extreme[i] = true;
                    extreme[j] = true;
                    extreme[k] = true;
                }
            }
        }
    }
    (0..n).filter(|&i| extreme[i]).collect()
}

fn max_outside(pts: &[[f64; 3]], tris: &[[usize; 3]]) -> f64 {
    let mut worst = f64::NEG_INFINITY;
    for t in tris {
        let n = cross(&sub(&pts[t[1]], &pts[t[0]]), &sub(&pts[t[2]], &pts[t[0]]));
        let len = dot(&n, &n).sqrt();
        for p in pts {
            worst = worst.max(dot(&n, &sub(p, &pts[t[0]])) / len);
        }
    }
    worst
}

#[test]
fn random_cube_vertices_match_supporting_planes() {
    for seed in 0..3 {
        let pts = common::random_cloud(40 + seed, 100);
        let all: Vec<usize> = (0..pts.len()).collect();
        let part = hull_of(&pts, 3, 0, &all);
        assert_eq!(part.degeneracy, Degeneracy::None);
        assert_eq!(part.hull_vertices, extreme_points(&pts));
        let HullFacets::Triangles(tris) = &part.facets else {
            panic!("expected a triangle mesh");
        };
        // closed triangulated sphere: F = 2V - 4
        assert_eq!(tris.len(), 2 * part.hull_vertices.len() - 4);
    }
}

#[test]
fn every_point_is_inside() {
    let pts = common::random_cloud(9, 500);
    let cloud = PointCloud::new(pts.clone(), 3).unwrap();
    let all: Vec<usize> = (0..pts.len()).collect();
    let part = hull_of(&pts, 3, 0, &all);
    let HullFacets::Triangles(tris) = &part.facets else {
        panic!("expected a triangle mesh");
    };
    assert!(max_outside(&pts, tris) <= 1e-7 * cloud.bbox_diagonal());
}

#[test]
fn hull_of_hull_is_the_same() {
    let pts = common::random_cloud(10, 300);
    let all: Vec<usize> = (0..pts.len()).collect();
    let once = hull_of(&pts, 3, 0, &all);
    let twice = hull_of(&pts, 3, 0, &once.hull_vertices);
    assert_eq!(once.hull_vertices, twice.hull_vertices);
    assert_eq!(once.facets.facet_count(), twice.facets.facet_count());
}

#[test]
fn tetrahedron_with_interior_point() {
    let pts = vec![
        [0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
        [0.1, 0.1, 0.1],
    ];
    let cloud = PointCloud::new(pts.clone(), 3).unwrap();
    let part = hull_of(&pts, 3, 0, &[0, 1, 2, 3, 4]);
    assert_eq!(part.hull_vertices, vec![0, 1, 2, 3]);
    assert_eq!(part.facets.facet_count(), 4);
    let HullFacets::Triangles(tris) = &part.facets else {
        panic!("expected a triangle mesh");
    };
    assert!(max_outside(&pts, tris) <= 0.0);

    let obj = hull_to_obj(&part, &cloud);
    assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), 4);
    assert_eq!(obj.lines().filter(|l| l.starts_with("f ")).count(), 4);
}

#[test]
fn degenerate_groups() {
    let line: Vec<[f64; 3]> = (0..5).map(|i| [i as f64, 2.0 * i as f64, 0.5]).collect();
    let part = hull_of(&line, 3, 0, &[2, 0, 4, 1]);
    assert_eq!(part.degeneracy, Degeneracy::Linear);
    assert_eq!(part.facets, HullFacets::Segment([0, 4]));

    let square = vec![
        [0.0, 0.0, 1.0],
        [1.0, 0.0, 1.0],
        [1.0, 1.0, 1.0],
        [0.0, 1.0, 1.0],
        [0.5, 0.5, 1.0],
    ];
    let part = hull_of(&square, 3, 0, &[0, 1, 2, 3, 4]);
    assert_eq!(part.degeneracy, Degeneracy::Planar);
    assert_eq!(part.hull_vertices, vec![0, 1, 2, 3]);
    assert_eq!(part.facets.edges().len(), 4);

    let single = hull_of(&square, 3, 7, &[4]);
    assert_eq!(single.degeneracy, Degeneracy::Point);
    assert_eq!(single.group_id, 7);

    let pair = hull_of(&square, 3, 0, &[0, 2]);
    assert_eq!(pair.degeneracy, Degeneracy::Linear);
}

#[test]
fn one_part_per_group() {
    let pts = common::random_cloud(3, 60);
    let cloud = PointCloud::new(pts, 3).unwrap();
    let a = GroupAssignment::from_group_of((0..60).map(|i| i % 3).collect()).unwrap();
    let parts = convex_hulls(&cloud, &a).unwrap();
    assert_eq!(parts.len(), 3);
    for (g, part) in parts.iter().enumerate() {
        assert_eq!(part.group_id, g);
        assert!(part.hull_vertices.iter().all(|v| v % 3 == g));
    }
    let short = GroupAssignment::from_group_of(vec![0; 10]).unwrap();
    assert!(convex_hulls(&cloud, &short).is_err());
}
