//! Synthetic labelled scenes for tests, demos and desk-scale evaluation.

use std::f64::consts::PI;
use std::str::FromStr;

use rand::Rng;
use serde::Serialize;

use crate::error::{CidError, Result};
use crate::geometry::PointCloud;
use crate::sampling::rng_from_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SceneKind {
    /// Two unit arms along +x and +y meeting at the origin (regular spacing).
    LShape,
    /// Four unit-radius semicircles alternating up and down along +x.
    FourArcs,
    /// Unit floor square and a perpendicular unit wall (random uniform).
    TwoPlanes,
    /// 4 x 3 x 2.5 room (floor, ceiling, four walls) with a box table on the floor.
    BoxRoom,
}

impl SceneKind {
    /// Density used when none is given: points per unit length for curves,
    /// per unit area for surfaces.
    pub fn default_density(self) -> f64 {
        match self {
            SceneKind::LShape => 100.0,
            SceneKind::FourArcs => 20.0,
            SceneKind::TwoPlanes => 1000.0,
            SceneKind::BoxRoom => 130.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SceneKind::LShape => "l_shape",
            SceneKind::FourArcs => "four_arcs",
            SceneKind::TwoPlanes => "two_planes",
            SceneKind::BoxRoom => "box_room",
        }
    }
}

impl FromStr for SceneKind {
    type Err = CidError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l_shape" => Ok(SceneKind::LShape),
            "four_arcs" => Ok(SceneKind::FourArcs),
            "two_planes" => Ok(SceneKind::TwoPlanes),
            "box_room" => Ok(SceneKind::BoxRoom),
            other => Err(CidError::invalid(format!(
                "unknown scene '{other}' (expected l_shape, four_arcs, two_planes or box_room)"
            ))),
        }
    }
}

/// Semantic classes of the room scene.
pub mod room_class {
    pub const FLOOR: i32 = 0;
    pub const CEILING: i32 = 1;
    pub const WALL: i32 = 2;
    pub const TABLE: i32 = 3;
}

pub const ROOM_SIZE: [f64; 3] = [4.0, 3.0, 2.5];
/// Table footprint `[x0, y0, x1, y1]` and height.
pub const TABLE_FOOTPRINT: [f64; 4] = [1.5, 1.0, 2.5, 1.8];
pub const TABLE_HEIGHT: f64 = 0.75;

/// An axis-aligned rectangle: `origin + s*u + t*v`, `s, t` in `[0, 1]`.
struct Rect {
    origin: [f64; 3],
    u: [f64; 3],
    v: [f64; 3],
}

impl Rect {
    fn area(&self) -> f64 {
        let n = |a: &[f64; 3]| (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
        n(&self.u) * n(&self.v)
    }

    fn at(&self, s: f64, t: f64) -> [f64; 3] {
        std::array::from_fn(|k| self.origin[k] + s * self.u[k] + t * self.v[k])
    }
}

struct Builder {
    points: Vec<[f64; 3]>,
    semantic: Vec<i32>,
    instance: Vec<i32>,
}

impl Builder {
    fn new() -> Self {
        Builder {
            points: Vec::new(),
            semantic: Vec::new(),
            instance: Vec::new(),
        }
    }

    fn push(&mut self, p: [f64; 3], semantic: i32, instance: i32) {
        self.points.push(p);
        self.semantic.push(semantic);
        self.instance.push(instance);
    }

    /// `round(area * density)` uniform samples.
    fn rect(&mut self, rng: &mut impl Rng, rect: &Rect, density: f64, semantic: i32, instance: i32) {
        let target = (rect.area() * density).round() as usize;
        for _ in 0..target {
            let p = rect.at(rng.gen::<f64>(), rng.gen::<f64>());
            self.push(p, semantic, instance);
        }
    }

    fn finish(self, dim: usize) -> Result<PointCloud> {
        PointCloud::new(self.points, dim)?.with_labels(Some(self.semantic), Some(self.instance))
    }
}

/// Generates a labelled scene. `density` defaults per scene kind.
pub fn synth_scene(kind: SceneKind, density: Option<f64>, rng_seed: u64) -> Result<PointCloud> {
    let density = density.unwrap_or_else(|| kind.default_density());
    if !(density.is_finite() && density > 0.0) {
        return Err(CidError::invalid(format!("density must be positive, got {density}")));
    }
    let mut rng = rng_from_seed(rng_seed);
    let mut b = Builder::new();
    match kind {
        SceneKind::LShape => {
            let steps = density.round().max(1.0) as usize;
            for i in 0..=steps {
                b.push([i as f64 / steps as f64, 0.0, 0.0], 0, 0);
            }
            for j in 1..=steps {
                b.push([0.0, j as f64 / steps as f64, 0.0], 0, 1);
            }
        }
        SceneKind::FourArcs => {
            let steps = (PI * density).round().max(2.0) as usize;
            for arc in 0..4 {
                let centre = 1.0 + 2.0 * arc as f64;
                let sign = if arc % 2 == 0 { 1.0 } else { -1.0 };
                // arcs share their junction point; it belongs to the earlier arc
                let start = usize::from(arc > 0);
                for s in start..=steps {
                    let phi = PI * s as f64 / steps as f64;
                    b.push([centre - phi.cos(), sign * phi.sin(), 0.0], arc % 2, arc);
                }
            }
        }
        SceneKind::TwoPlanes => {
            let floor = Rect {
                origin: [0.0; 3],
                u: [1.0, 0.0, 0.0],
                v: [0.0, 1.0, 0.0],
            };
            let wall = Rect {
                origin: [0.0; 3],
                u: [0.0, 1.0, 0.0],
                v: [0.0, 0.0, 1.0],
            };
            b.rect(&mut rng, &floor, density, 0, 0);
            b.rect(&mut rng, &wall, density, 1, 1);
        }
        SceneKind::BoxRoom => box_room(&mut b, &mut rng, density),
    }
    b.finish(3)
}

fn box_room(b: &mut Builder, rng: &mut impl Rng, density: f64) {
    use room_class::*;
    let [w, d, h] = ROOM_SIZE;
    let [x0, y0, x1, y1] = TABLE_FOOTPRINT;
    let th = TABLE_HEIGHT;
    let under_table = |p: &[f64; 3]| p[0] > x0 && p[0] < x1 && p[1] > y0 && p[1] < y1;

    let floor = Rect {
        origin: [0.0; 3],
        u: [w, 0.0, 0.0],
        v: [0.0, d, 0.0],
    };
    // visible floor area excludes the table footprint
    let table_area = (x1 - x0) * (y1 - y0);
    let target = ((floor.area() - table_area) * density).round() as usize;
    let mut placed = 0;
    while placed < target {
        let p = floor.at(rng.gen::<f64>(), rng.gen::<f64>());
        if !under_table(&p) {
            b.push(p, FLOOR, 0);
            placed += 1;
        }
    }

    let ceiling = Rect {
        origin: [0.0, 0.0, h],
        u: [w, 0.0, 0.0],
        v: [0.0, d, 0.0],
    };
    b.rect(rng, &ceiling, density, CEILING, 1);

    let walls = [
        Rect {
            origin: [0.0; 3],
            u: [0.0, d, 0.0],
            v: [0.0, 0.0, h],
        },
        Rect {
            origin: [w, 0.0, 0.0],
            u: [0.0, d, 0.0],
            v: [0.0, 0.0, h],
        },
        Rect {
            origin: [0.0; 3],
            u: [w, 0.0, 0.0],
            v: [0.0, 0.0, h],
        },
        Rect {
            origin: [0.0, d, 0.0],
            u: [w, 0.0, 0.0],
            v: [0.0, 0.0, h],
        },
    ];
    for (k, wall) in walls.iter().enumerate() {
        b.rect(rng, wall, density, WALL, 2 + k as i32);
    }

    let (tw, td) = (x1 - x0, y1 - y0);
    let table = [
        Rect {
            origin: [x0, y0, th],
            u: [tw, 0.0, 0.0],
            v: [0.0, td, 0.0],
        },
        Rect {
            origin: [x0, y0, 0.0],
            u: [0.0, td, 0.0],
            v: [0.0, 0.0, th],
        },
        Rect {
            origin: [x1, y0, 0.0],
            u: [0.0, td, 0.0],
            v: [0.0, 0.0, th],
        },
        Rect {
            origin: [x0, y0, 0.0],
            u: [tw, 0.0, 0.0],
            v: [0.0, 0.0, th],
        },
        Rect {
            origin: [x0, y1, 0.0],
            u: [tw, 0.0, 0.0],
            v: [0.0, 0.0, th],
        },
    ];
    for face in &table {
        b.rect(rng, face, density, TABLE, 6);
    }
}

/// Total sampled area of the room scene.
pub fn box_room_area() -> f64 {
    let [w, d, h] = ROOM_SIZE;
    let [x0, y0, x1, y1] = TABLE_FOOTPRINT;
    let (tw, td) = (x1 - x0, y1 - y0);
    let floor = w * d - tw * td;
    floor + w * d + 2.0 * h * (w + d) + tw * td + 2.0 * TABLE_HEIGHT * (tw + td)
}
