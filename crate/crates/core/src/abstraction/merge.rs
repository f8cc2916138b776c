//! Greedy agglomeration of point groups by smallest group CID.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CidError, Result};
use crate::geometry::{cid_g_sampled, GroupSamplingPolicy, SegmentDiscretization, SpatialIndex};
use crate::segmentation::GroupAssignment;

/// When merging stops.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MergeMode {
    /// Exactly this many merges.
    FixedIterations(usize),
    /// Keep merging while the smallest group CID is at most this value.
    Threshold(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MergeStep {
    pub iteration: usize,
    /// Group ids at the time of the merge, `i < j`; `j` is folded into `i`.
    pub merged: (usize, usize),
    pub cid_g: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergeSchedule {
    pub mode: MergeMode,
    pub history: Vec<MergeStep>,
}

impl MergeSchedule {
    pub fn fixed(iterations: usize) -> Self {
        MergeSchedule {
            mode: MergeMode::FixedIterations(iterations),
            history: Vec::new(),
        }
    }

    pub fn threshold(tau: f64) -> Result<Self> {
        if !(tau.is_finite() && tau >= 0.0) {
            return Err(CidError::invalid(format!(
                "merge threshold must be finite and non-negative, got {tau}"
            )));
        }
        Ok(MergeSchedule {
            mode: MergeMode::Threshold(tau),
            history: Vec::new(),
        })
    }
}

/// Symmetric cache of pairwise group CID values.
struct PairCache {
    values: Vec<Vec<f64>>,
}

impl PairCache {
    fn build(samples: &[Vec<usize>], index: &SpatialIndex, m: usize) -> Self {
        let k = samples.len();
        let pairs: Vec<(usize, usize)> = (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).collect();
        let computed: Vec<f64> = pairs
            .par_iter()
            .map(|&(i, j)| cid_g_sampled(&samples[i], &samples[j], index, m))
            .collect();
        let mut values = vec![vec![0.0; k]; k];
        for (&(i, j), v) in pairs.iter().zip(computed) {
            values[i][j] = v;
            values[j][i] = v;
        }
        PairCache { values }
    }

    /// Smallest pair, lexicographically first on ties.
    fn argmin(&self) -> Option<(usize, usize, f64)> {
        let k = self.values.len();
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..k {
            for j in i + 1..k {
                let v = self.values[i][j];
                if best.is_none_or(|(_, _, b)| v < b) {
                    best = Some((i, j, v));
                }
            }
        }
        best
    }

    /// Drops group `j` and refreshes every pair involving `i`.
    fn merge(&mut self, i: usize, j: usize, samples: &[Vec<usize>], index: &SpatialIndex, m: usize) {
        self.values.remove(j);
        for row in self.values.iter_mut() {
            row.remove(j);
        }
        let k = self.values.len();
        let fresh: Vec<f64> = (0..k)
            .into_par_iter()
            .map(|o| {
                if o == i {
                    0.0
                } else {
                    cid_g_sampled(&samples[i], &samples[o], index, m)
                }
            })
            .collect();
        for (o, v) in fresh.into_iter().enumerate() {
            self.values[i][o] = v;
            self.values[o][i] = v;
        }
    }
}

/// Repeatedly merges the two groups with the smallest group CID.
///
/// Only pairs that involve the freshly merged group are recomputed; untouched
/// groups keep their downsample, so their cached values stay exact.
pub fn merge_groups(
    assignment: &GroupAssignment,
    index: &SpatialIndex,
    disc: SegmentDiscretization,
    policy: GroupSamplingPolicy,
    schedule: &MergeSchedule,
) -> Result<(GroupAssignment, MergeSchedule)> {
    if assignment.point_count() != index.len() {
        return Err(CidError::invalid(
            "assignment and spatial index cover different point counts",
        ));
    }
    let k = assignment.group_count();
    match schedule.mode {
        MergeMode::FixedIterations(t) if t > k.saturating_sub(1) => {
            return Err(CidError::invalid(format!(
                "cannot merge {t} times with only {k} groups"
            )));
        }
        MergeMode::Threshold(tau) if !(tau.is_finite() && tau >= 0.0) => {
            return Err(CidError::invalid("merge threshold must be finite and non-negative"));
        }
        _ => {}
    }

    let m = disc.samples();
    let mut out = assignment.clone();
    let mut samples: Vec<Vec<usize>> = out.groups().iter().map(|g| policy.downsample(g)).collect();
    let mut history = Vec::new();
    let needs_cache = match schedule.mode {
        MergeMode::FixedIterations(t) => t > 0,
        MergeMode::Threshold(_) => k > 1,
    };
    if !needs_cache {
        return Ok((
            out,
            MergeSchedule {
                mode: schedule.mode,
                history,
            },
        ));
    }
    let mut cache = PairCache::build(&samples, index, m);

    for iteration in 0.. {
        if let MergeMode::FixedIterations(t) = schedule.mode {
            if iteration == t {
                break;
            }
        }
        let Some((i, j, value)) = cache.argmin() else {
            break;
        };
        if let MergeMode::Threshold(tau) = schedule.mode {
            if value > tau {
                break;
            }
        }
        history.push(MergeStep {
            iteration,
            merged: (i, j),
            cid_g: value,
        });
        out.merge(i, j);
        samples.remove(j);
        samples[i] = policy.downsample(&out.groups()[i]);
        cache.merge(i, j, &samples, index, m);
    }
    Ok((
        out,
        MergeSchedule {
            mode: schedule.mode,
            history,
        },
    ))
}
