//! Label propagation: CID-nearest seed grouping, seed label transfer, and
//! Euclidean upsampling of labels to the full-resolution cloud.

use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CidError, Result};
use crate::geometry::{PointCloud, SpatialIndex};
use crate::sampling::{rng_from_seed, SeedProposal};

pub const DEFAULT_SUBSAMPLE: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LabelPair {
    pub semantic: i32,
    pub instance: i32,
}

/// A partition of `0..n` into groups, optionally tied to seeds and labels.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupAssignment {
    group_of: Vec<usize>,
    groups: Vec<Vec<usize>>,
    seed_of_group: Option<Vec<usize>>,
    label_of_group: Option<Vec<LabelPair>>,
}

impl GroupAssignment {
    /// Builds an assignment from explicit groups, which must partition `0..n`.
    pub fn from_groups(n: usize, groups: Vec<Vec<usize>>) -> Result<Self> {
        let mut group_of = vec![usize::MAX; n];
        let mut groups = groups;
        for (g, members) in groups.iter_mut().enumerate() {
            if members.is_empty() {
                return Err(CidError::invalid(format!("group {g} is empty")));
            }
            members.sort_unstable();
            for &p in members.iter() {
                if p >= n {
                    return Err(CidError::IndexOutOfRange { index: p, len: n });
                }
                if group_of[p] != usize::MAX {
                    return Err(CidError::invalid(format!("point {p} belongs to more than one group")));
                }
                group_of[p] = g;
            }
        }
        if let Some(p) = group_of.iter().position(|&g| g == usize::MAX) {
            return Err(CidError::invalid(format!("point {p} is not assigned to any group")));
        }
        Ok(GroupAssignment {
            group_of,
            groups,
            seed_of_group: None,
            label_of_group: None,
        })
    }

    /// Builds an assignment from a per-point group id; ids must be dense in `0..K`.
    pub fn from_group_of(group_of: Vec<usize>) -> Result<Self> {
        let k = group_of.iter().max().map_or(0, |&g| g + 1);
        let mut groups = vec![Vec::new(); k];
        for (p, &g) in group_of.iter().enumerate() {
            groups[g].push(p);
        }
        if let Some(g) = groups.iter().position(Vec::is_empty) {
            return Err(CidError::invalid(format!("group id {g} has no members")));
        }
        Ok(GroupAssignment {
            group_of,
            groups,
            seed_of_group: None,
            label_of_group: None,
        })
    }

    pub fn with_seeds(mut self, seeds: Vec<usize>) -> Result<Self> {
        if seeds.len() != self.groups.len() {
            return Err(CidError::invalid("one seed per group required"));
        }
        for (g, &s) in seeds.iter().enumerate() {
            if self.group_of.get(s) != Some(&g) {
                return Err(CidError::invalid(format!("seed {s} is not a member of group {g}")));
            }
        }
        self.seed_of_group = Some(seeds);
        Ok(self)
    }

    pub fn point_count(&self) -> usize {
        self.group_of.len()
    }

    pub fn group_count(&self) -> usize {
        self.groups.len()
    }

    pub fn group_of(&self) -> &[usize] {
        &self.group_of
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn seed_of_group(&self) -> Option<&[usize]> {
        self.seed_of_group.as_deref()
    }

    pub fn label_of_group(&self) -> Option<&[LabelPair]> {
        self.label_of_group.as_deref()
    }

    /// Per-point labels, available after [`propagate_labels`].
    pub fn point_labels(&self) -> Option<Vec<LabelPair>> {
        let labels = self.label_of_group.as_ref()?;
        Some(self.group_of.iter().map(|&g| labels[g]).collect())
    }

    /// Merges group `j` into group `i` (`i < j`); later groups shift down by one.
    pub(crate) fn merge(&mut self, i: usize, j: usize) {
        debug_assert!(i < j && j < self.groups.len());
        let absorbed = self.groups.remove(j);
        let target = &mut self.groups[i];
        target.extend(absorbed);
        target.sort_unstable();
        // the merged group keeps the seed and label of `i`
        if let Some(seeds) = self.seed_of_group.as_mut() {
            seeds.remove(j);
        }
        if let Some(labels) = self.label_of_group.as_mut() {
            labels.remove(j);
        }
        for g in self.group_of.iter_mut() {
            if *g == j {
                *g = i;
            } else if *g > j {
                *g -= 1;
            }
        }
    }
}

/// Seeds with the labels an annotator gave them.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSeedSet {
    seed_indices: Vec<usize>,
    labels: Vec<LabelPair>,
}

impl LabeledSeedSet {
    pub fn new(seed_indices: Vec<usize>, labels: Vec<LabelPair>) -> Result<Self> {
        if seed_indices.len() != labels.len() {
            return Err(CidError::invalid("one label pair per seed required"));
        }
        Ok(LabeledSeedSet { seed_indices, labels })
    }

    /// Labels each seed from the cloud's ground truth.
    pub fn from_ground_truth(seed_indices: &[usize], cloud: &PointCloud) -> Result<Self> {
        let (Some(sem), Some(inst)) = (cloud.semantic_labels(), cloud.instance_labels()) else {
            return Err(CidError::invalid("cloud has no semantic and instance labels"));
        };
        let mut labels = Vec::with_capacity(seed_indices.len());
        for &s in seed_indices {
            cloud.check_index(s)?;
            labels.push(LabelPair {
                semantic: sem[s],
                instance: inst[s],
            });
        }
        LabeledSeedSet::new(seed_indices.to_vec(), labels)
    }

    pub fn seed_indices(&self) -> &[usize] {
        &self.seed_indices
    }

    pub fn labels(&self) -> &[LabelPair] {
        &self.labels
    }

    fn label_of(&self, seed: usize) -> Option<LabelPair> {
        self.seed_indices
            .iter()
            .position(|&s| s == seed)
            .map(|i| self.labels[i])
    }
}

/// Assigns each non-seed point to the seed with the smallest cached CID.
/// Group `g` is seeded by `proposal.seed_indices[g]`; ties go to the seed
/// with the lowest point index.
pub fn group_points(proposal: &SeedProposal) -> Result<GroupAssignment> {
    let k = proposal.seed_indices.len();
    let n = proposal.point_count();
    let matrix = &proposal.cached_matrix;
    if k == 0 || matrix.shape() != (proposal.remainder_indices.len(), k) || matrix.rows() != proposal.remainder_indices
    {
        return Err(CidError::invalid(
            "seed proposal matrix does not match its seeds and remainder",
        ));
    }
    let mut group_of = vec![usize::MAX; n];
    for (g, &s) in proposal.seed_indices.iter().enumerate() {
        if s >= n || group_of[s] != usize::MAX {
            return Err(CidError::invalid(format!("seed {s} is invalid or repeated")));
        }
        group_of[s] = g;
    }
    let seeds = &proposal.seed_indices;
    let assigned: Vec<usize> = (0..matrix.shape().0)
        .into_par_iter()
        .map(|r| {
            let row = matrix.row(r);
            let mut best = 0;
            for c in 1..k {
                if row[c] < row[best] || (row[c] == row[best] && seeds[c] < seeds[best]) {
                    best = c;
                }
            }
            best
        })
        .collect();
    for (&p, g) in proposal.remainder_indices.iter().zip(assigned) {
        if p >= n || group_of[p] != usize::MAX {
            return Err(CidError::invalid(format!("remainder point {p} is invalid or repeated")));
        }
        group_of[p] = g;
    }
    GroupAssignment::from_group_of(group_of)?.with_seeds(seeds.clone())
}

/// Gives every group the labels of its seed.
pub fn propagate_labels(assignment: &GroupAssignment, seeds: &LabeledSeedSet) -> Result<GroupAssignment> {
    let group_seeds = assignment
        .seed_of_group
        .as_ref()
        .ok_or_else(|| CidError::invalid("assignment has no seeds"))?;
    let labels = group_seeds
        .iter()
        .enumerate()
        .map(|(g, &s)| {
            seeds
                .label_of(s)
                .ok_or_else(|| CidError::invalid(format!("group {g} (seed {s}) has no labeled seed")))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = assignment.clone();
    out.label_of_group = Some(labels);
    Ok(out)
}

/// Per-point labels carried over from a subsample.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UpsampledLabels {
    pub semantic: Option<Vec<i32>>,
    pub instance: Option<Vec<i32>>,
}

/// For every point of `full`, the index of its Euclidean-nearest point in
/// `subsample` (lowest index on ties).
pub fn nearest_in_subsample(subsample: &PointCloud, full: &PointCloud) -> Result<Vec<usize>> {
    if subsample.dim() != full.dim() {
        return Err(CidError::DimensionMismatch {
            expected: subsample.dim(),
            got: full.dim(),
        });
    }
    let index = SpatialIndex::build(subsample);
    Ok(full.points().par_iter().map(|q| index.nearest_raw(q).index).collect())
}

/// Copies each full-resolution point's labels from its nearest subsample point.
pub fn upsample_labels(labeled_subsample: &PointCloud, full_cloud: &PointCloud) -> Result<UpsampledLabels> {
    if labeled_subsample.is_empty() {
        return Err(CidError::invalid("subsample is empty"));
    }
    let sem = labeled_subsample.semantic_labels();
    let inst = labeled_subsample.instance_labels();
    if sem.is_none() && inst.is_none() {
        return Err(CidError::invalid("subsample carries no labels"));
    }
    let nearest = nearest_in_subsample(labeled_subsample, full_cloud)?;
    let map = |l: &[i32]| nearest.iter().map(|&i| l[i]).collect::<Vec<_>>();
    Ok(UpsampledLabels {
        semantic: sem.map(map),
        instance: inst.map(map),
    })
}

/// Uniform random subset of at most `max_points` point indices, ascending.
pub fn subsample_indices(n: usize, max_points: usize, rng_seed: u64) -> Vec<usize> {
    if n <= max_points {
        return (0..n).collect();
    }
    let mut rng = rng_from_seed(rng_seed);
    let mut picked = sample(&mut rng, n, max_points).into_vec();
    picked.sort_unstable();
    picked
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SegmentDiscretization;
    use crate::sampling::cid_fps;

    fn line_scene(n: usize) -> (PointCloud, SpatialIndex) {
        let pts = (0..n).map(|i| [i as f64 * 0.05, 0.0, 0.0]).collect();
        let sem = (0..n as i32).map(|i| i % 3).collect();
        let inst = (0..n as i32).collect();
        let cloud = PointCloud::new(pts, 3)
            .unwrap()
            .with_labels(Some(sem), Some(inst))
            .unwrap();
        let index = SpatialIndex::build(&cloud);
        (cloud, index)
    }

    #[test]
    fn partition_validation() {
        assert!(GroupAssignment::from_groups(3, vec![vec![0, 1], vec![1, 2]]).is_err());
        assert!(GroupAssignment::from_groups(3, vec![vec![0, 1]]).is_err());
        assert!(GroupAssignment::from_groups(3, vec![vec![0, 1], vec![2], vec![]]).is_err());
        assert!(GroupAssignment::from_group_of(vec![0, 2, 2]).is_err());
        let a = GroupAssignment::from_groups(3, vec![vec![2, 0], vec![1]]).unwrap();
        assert_eq!(a.group_of(), &[0, 1, 0]);
    }

    #[test]
    fn single_seed_groups_everything() {
        let (cloud, index) = line_scene(20);
        let p = cid_fps(&cloud, &index, 1, SegmentDiscretization::default(), 4).unwrap();
        let a = group_points(&p).unwrap();
        assert_eq!(a.group_count(), 1);
        assert_eq!(a.groups()[0], (0..20).collect::<Vec<_>>());
    }

    #[test]
    fn all_seeds_give_singletons_and_identity_labels() {
        let (cloud, index) = line_scene(15);
        let p = cid_fps(&cloud, &index, 15, SegmentDiscretization::default(), 4).unwrap();
        let a = group_points(&p).unwrap();
        assert_eq!(a.group_count(), 15);
        assert!(a.groups().iter().all(|g| g.len() == 1));
        let seeds = LabeledSeedSet::from_ground_truth(&p.seed_indices, &cloud).unwrap();
        let labeled = propagate_labels(&a, &seeds).unwrap();
        let labels = labeled.point_labels().unwrap();
        for (i, l) in labels.iter().enumerate() {
            assert_eq!(l.semantic, cloud.semantic_labels().unwrap()[i]);
            assert_eq!(l.instance, cloud.instance_labels().unwrap()[i]);
        }
    }

    #[test]
    fn shared_label_covers_all_points() {
        let (cloud, index) = line_scene(25);
        let p = cid_fps(&cloud, &index, 4, SegmentDiscretization::default(), 9).unwrap();
        let a = group_points(&p).unwrap();
        let one = LabelPair {
            semantic: 7,
            instance: 1,
        };
        let seeds = LabeledSeedSet::new(p.seed_indices.clone(), vec![one; 4]).unwrap();
        let labels = propagate_labels(&a, &seeds).unwrap().point_labels().unwrap();
        assert!(labels.iter().all(|&l| l == one));
    }

    #[test]
    fn missing_seed_label_is_an_error() {
        let (cloud, index) = line_scene(25);
        let p = cid_fps(&cloud, &index, 3, SegmentDiscretization::default(), 9).unwrap();
        let a = group_points(&p).unwrap();
        let partial = vec![
            LabelPair {
                semantic: 0,
                instance: 0
            };
            2
        ];
        let seeds = LabeledSeedSet::new(p.seed_indices[..2].to_vec(), partial).unwrap();
        assert!(propagate_labels(&a, &seeds).is_err());
        let bare = GroupAssignment::from_group_of(vec![0, 0]).unwrap();
        assert!(propagate_labels(&bare, &seeds).is_err());
    }

    #[test]
    fn upsample_identity_and_single_point() {
        let (cloud, _) = line_scene(30);
        let up = upsample_labels(&cloud, &cloud).unwrap();
        assert_eq!(up.semantic.as_deref(), cloud.semantic_labels());
        assert_eq!(up.instance.as_deref(), cloud.instance_labels());

        let one = cloud.select(&[7]).unwrap();
        let up = upsample_labels(&one, &cloud).unwrap();
        assert!(up.instance.unwrap().iter().all(|&l| l == 7));

        let bare = PointCloud::new(vec![[0.0; 3]], 3).unwrap();
        assert!(upsample_labels(&bare, &cloud).is_err());
    }

    #[test]
    fn subsample_is_sorted_subset() {
        assert_eq!(subsample_indices(5, 10, 1), vec![0, 1, 2, 3, 4]);
        let s = subsample_indices(1000, 100, 42);
        assert_eq!(s.len(), 100);
        assert!(s.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(s, subsample_indices(1000, 100, 42));
    }

    #[test]
    fn merge_relabels_groups() {
        let mut a = GroupAssignment::from_groups(5, vec![vec![0], vec![1, 2], vec![3], vec![4]]).unwrap();
        a.merge(1, 3);
        assert_eq!(a.groups(), &[vec![0], vec![1, 2, 4], vec![3]]);
        assert_eq!(a.group_of(), &[0, 1, 1, 2, 1]);
    }
}
