//! Concavity-induced distance between points and between point groups.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::index::{Nearest, SpatialIndex};
use super::point::{dist_sq, lex_cmp, Point};
use crate::error::{CidError, Result};

/// Number of uniformly spaced samples taken on a segment, both endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentDiscretization(usize);

impl SegmentDiscretization {
    pub const DEFAULT_SAMPLES: usize = 100;

    pub fn new(samples: usize) -> Result<Self> {
        if samples < 2 {
            return Err(CidError::invalid(format!(
                "segment discretization needs at least 2 samples, got {samples}"
            )));
        }
        Ok(SegmentDiscretization(samples))
    }

    pub fn samples(&self) -> usize {
        self.0
    }
}

impl Default for SegmentDiscretization {
    fn default() -> Self {
        SegmentDiscretization(Self::DEFAULT_SAMPLES)
    }
}

/// How a group is thinned before pairwise averaging: a uniform stride over the
/// index-sorted group, keeping at most `max_points_per_group` points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSamplingPolicy {
    max_points_per_group: usize,
}

impl GroupSamplingPolicy {
    pub const DEFAULT_CAP: usize = 32;

    pub fn new(max_points_per_group: usize) -> Result<Self> {
        if max_points_per_group == 0 {
            return Err(CidError::invalid("group sampling cap must be positive"));
        }
        Ok(GroupSamplingPolicy { max_points_per_group })
    }

    pub fn cap(&self) -> usize {
        self.max_points_per_group
    }

    /// Sorted subset of `group` of size `min(len, cap)`.
    pub fn downsample(&self, group: &[usize]) -> Vec<usize> {
        let mut sorted = group.to_vec();
        sorted.sort_unstable();
        let n = sorted.len();
        let cap = self.max_points_per_group;
        if n <= cap {
            return sorted;
        }
        (0..cap).map(|i| sorted[i * n / cap]).collect()
    }
}

impl Default for GroupSamplingPolicy {
    fn default() -> Self {
        GroupSamplingPolicy {
            max_points_per_group: Self::DEFAULT_CAP,
        }
    }
}

/// Dense matrix of point-pair CID values, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CidMatrix {
    rows: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<f64>,
}

impl CidMatrix {
    pub(crate) fn from_parts(rows: Vec<usize>, cols: Vec<usize>, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), rows.len() * cols.len());
        CidMatrix { rows, cols, values }
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    pub fn cols(&self) -> &[usize] {
        &self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows.len(), self.cols.len())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.values[r * self.cols.len() + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        let w = self.cols.len();
        &self.values[r * w..(r + 1) * w]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// CID between two indexed-space coordinates: the largest distance from any
/// of `m` segment samples to the cloud.
///
/// Samples run from the lexicographically smaller endpoint, so swapping the
/// arguments evaluates identical expressions. A sample whose distance cannot
/// exceed the running maximum is skipped once a witness point within that
/// maximum is found, which leaves the result bit-identical to a full scan.
pub(crate) fn cid_p_raw(a: &[f64; 3], b: &[f64; 3], index: &SpatialIndex, samples: usize) -> f64 {
    if a == b {
        return 0.0;
    }
    let (a, b) = match lex_cmp(a, b) {
        Ordering::Greater => (b, a),
        _ => (a, b),
    };
    let d = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let denom = (samples - 1) as f64;

    let mut max_sq = 0.0f64;
    // coarse-to-fine order: each sample's walk starts from the witness of its
    // already evaluated neighbour one stride to the left
    let mut witness = vec![u32::MAX; samples];
    let mut stride = (samples - 1).next_power_of_two();
    while stride >= 1 {
        let first_level = stride >= samples - 1;
        let step = if first_level { stride } else { 2 * stride };
        let mut l = if first_level { 0 } else { stride };
        while l < samples {
            let t = l as f64 / denom;
            let s = [a[0] + t * d[0], a[1] + t * d[1], a[2] + t * d[2]];
            let mut best = Nearest {
                dist_sq: f64::INFINITY,
                index: usize::MAX,
            };
            let from = if l >= stride { witness[l - stride] } else { u32::MAX };
            if from != u32::MAX {
                let (cur, dcur) = walk(index, &s, from as usize, max_sq);
                if dcur <= max_sq {
                    witness[l] = cur as u32;
                    l += step;
                    continue;
                }
                best = Nearest {
                    dist_sq: dcur,
                    index: cur,
                };
            }
            let stopped = index.search(&s, &mut best, max_sq);
            witness[l] = best.index as u32;
            if !stopped && best.dist_sq > max_sq {
                max_sq = best.dist_sq;
            }
            l += step;
        }
        stride /= 2;
    }
    max_sq.sqrt()
}

/// Greedy descent over the proximity graph from `start` towards `q`; stops at
/// the first point within `stop_sq` or at a local minimum.
#[inline]
fn walk(index: &SpatialIndex, q: &[f64; 3], start: usize, stop_sq: f64) -> (usize, f64) {
    let points = index.points();
    let (mut cur, mut dcur) = (start, dist_sq(q, &points[start]));
    while dcur > stop_sq {
        let mut next = cur;
        for &nb in index.neighbours(cur) {
            let d = dist_sq(q, &points[nb as usize]);
            if d < dcur {
                (next, dcur) = (nb as usize, d);
            }
        }
        if next == cur {
            break;
        }
        cur = next;
    }
    (cur, dcur)
}

/// CID between two points, evaluated against the indexed cloud.
pub fn cid_p(a: &Point, b: &Point, index: &SpatialIndex, disc: SegmentDiscretization) -> Result<f64> {
    index.check_point(a)?;
    index.check_point(b)?;
    Ok(cid_p_raw(a.coords(), b.coords(), index, disc.samples()))
}

/// CID between two points of the indexed cloud, addressed by index.
pub fn cid_p_indices(i: usize, j: usize, index: &SpatialIndex, disc: SegmentDiscretization) -> Result<f64> {
    index.check_index(i)?;
    index.check_index(j)?;
    let pts = index.points();
    Ok(cid_p_raw(&pts[i], &pts[j], index, disc.samples()))
}

/// CID from every source to every target. Rows are computed in parallel.
pub fn cid_matrix(
    sources: &[usize],
    targets: &[usize],
    index: &SpatialIndex,
    disc: SegmentDiscretization,
) -> Result<CidMatrix> {
    for &i in sources.iter().chain(targets) {
        index.check_index(i)?;
    }
    let pts = index.points();
    let m = disc.samples();
    let values: Vec<f64> = sources
        .par_iter()
        .flat_map_iter(|&s| targets.iter().map(move |&t| cid_p_raw(&pts[s], &pts[t], index, m)))
        .collect();
    Ok(CidMatrix::from_parts(sources.to_vec(), targets.to_vec(), values))
}

/// Mean CID over all pairs of two already-downsampled groups, summed
/// row by row before a single division.
pub(crate) fn cid_g_sampled(gi: &[usize], gj: &[usize], index: &SpatialIndex, samples: usize) -> f64 {
    let pts = index.points();
    let mut sum = 0.0;
    for &p in gi {
        for &q in gj {
            sum += cid_p_raw(&pts[p], &pts[q], index, samples);
        }
    }
    sum / (gi.len() * gj.len()) as f64
}

/// CID between two groups: the pairwise mean over their downsampled members.
pub fn cid_g(
    gi: &[usize],
    gj: &[usize],
    index: &SpatialIndex,
    disc: SegmentDiscretization,
    policy: GroupSamplingPolicy,
) -> Result<f64> {
    if gi.is_empty() || gj.is_empty() {
        return Err(CidError::invalid("cid_g requires non-empty groups"));
    }
    for &i in gi.iter().chain(gj) {
        index.check_index(i)?;
    }
    let si = policy.downsample(gi);
    let sj = policy.downsample(gj);
    Ok(cid_g_sampled(&si, &sj, index, disc.samples()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::PointCloud;

    fn line_cloud() -> SpatialIndex {
        let pts = (0..=100).map(|i| [i as f64 / 100.0, 0.0, 0.0]).collect();
        SpatialIndex::build(&PointCloud::new(pts, 3).unwrap())
    }

    #[test]
    fn discretization_needs_two_samples() {
        assert!(SegmentDiscretization::new(1).is_err());
        assert_eq!(SegmentDiscretization::default().samples(), 100);
    }

    #[test]
    fn reflexive_is_exact_zero() {
        let index = line_cloud();
        let disc = SegmentDiscretization::default();
        for i in [0, 17, 100] {
            assert_eq!(cid_p_indices(i, i, &index, disc).unwrap(), 0.0);
        }
    }

    #[test]
    fn dimension_and_index_errors() {
        let index = line_cloud();
        let disc = SegmentDiscretization::default();
        let a = Point::xy(0.0, 0.0).unwrap();
        assert!(cid_p(&a, &a, &index, disc).is_err());
        assert!(cid_p_indices(0, 101, &index, disc).is_err());
        assert!(cid_matrix(&[0], &[500], &index, disc).is_err());
        assert!(cid_g(&[], &[1], &index, disc, GroupSamplingPolicy::default()).is_err());
    }

    #[test]
    fn downsample_uses_uniform_stride() {
        let policy = GroupSamplingPolicy::new(4).unwrap();
        assert_eq!(policy.downsample(&[9, 3, 1]), vec![1, 3, 9]);
        let group: Vec<usize> = (0..10).rev().collect();
        assert_eq!(policy.downsample(&group), vec![0, 2, 5, 7]);
        assert!(GroupSamplingPolicy::new(0).is_err());
    }

    #[test]
    fn single_point_groups_reduce_to_cid_p() {
        let index = line_cloud();
        let disc = SegmentDiscretization::default();
        let policy = GroupSamplingPolicy::default();
        assert_eq!(cid_g(&[5], &[5], &index, disc, policy).unwrap(), 0.0);
        let g = cid_g(&[3], &[90], &index, disc, policy).unwrap();
        assert_eq!(g, cid_p_indices(3, 90, &index, disc).unwrap());
    }

    #[test]
    fn single_entry_matrix() {
        let index = line_cloud();
        let m = cid_matrix(&[4], &[4], &index, SegmentDiscretization::default()).unwrap();
        assert_eq!(m.shape(), (1, 1));
        assert_eq!(m.get(0, 0), 0.0);
    }
}
