//! Concavity-induced distance (CID) for unoriented point clouds.
//!
//! CID between two points of a cloud is the largest distance from any point
//! of the segment joining them to the cloud: small when the segment stays on
//! the sampled surface, large when it crosses empty space around a concavity.
//! No normals or meshing are needed.
//!
//! Built on that distance:
//!
//! - [`sampling::cid_fps`]: farthest point sampling under CID, to pick seeds
//!   that spread over different convex parts;
//! - [`segmentation`]: group every point with its CID-nearest seed and carry
//!   seed labels to the whole cloud;
//! - [`abstraction`]: greedily merge groups by group CID and wrap each in a
//!   convex hull;
//! - [`metrics`]: instance AP, compactness and purity.
//!
//! ```
//! use cid_core::geometry::{cid_p_indices, PointCloud, SegmentDiscretization, SpatialIndex};
//!
//! // an L: one arm along x, one along y
//! let mut pts: Vec<[f64; 3]> = (0..=10).map(|i| [i as f64 / 10.0, 0.0, 0.0]).collect();
//! pts.extend((1..=10).map(|i| [0.0, i as f64 / 10.0, 0.0]));
//! let cloud = PointCloud::new(pts, 3).unwrap();
//! let index = SpatialIndex::build(&cloud);
//! let disc = SegmentDiscretization::default();
//!
//! let along_arm = cid_p_indices(0, 10, &index, disc).unwrap();
//! let across = cid_p_indices(10, 20, &index, disc).unwrap();
//! assert!(along_arm <= 0.05);
//! assert!(across > 0.4);
//! ```

pub mod abstraction;
pub mod config;
pub mod error;
pub mod geometry;
pub mod io;
pub mod metrics;
pub mod pipeline;
pub mod sampling;
pub mod segmentation;
pub mod synth;

pub use config::RunConfig;
pub use error::{CidError, Result};
