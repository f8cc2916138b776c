//! Point clouds, exact nearest-neighbour queries and the CID kernels.

mod cid;
mod index;
mod point;

pub use cid::{cid_g, cid_matrix, cid_p, cid_p_indices, CidMatrix, GroupSamplingPolicy, SegmentDiscretization};
pub(crate) use cid::{cid_g_sampled, cid_p_raw};
pub use index::{point_to_set_distance, SpatialIndex, LINEAR_SCAN_THRESHOLD};
pub(crate) use point::bbox_diagonal;
pub use point::{Point, PointCloud};
