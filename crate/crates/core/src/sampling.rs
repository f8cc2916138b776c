//! Farthest point sampling under CID.
//!
//! The first seed is drawn uniformly from a seeded generator. Every later seed
//! is the unselected point whose smallest CID to the seeds chosen so far is
//! largest (lowest index on ties). One CID column is computed per new seed and
//! kept, so the final remainder-by-seed matrix comes for free.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{CidError, Result};
use crate::geometry::{cid_p_raw, CidMatrix, PointCloud, SegmentDiscretization, SpatialIndex};

pub const DEFAULT_SEEDS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct SeedProposal {
    /// Seeds in selection order.
    pub seed_indices: Vec<usize>,
    /// Non-seed points, ascending.
    pub remainder_indices: Vec<usize>,
    /// `|remainder| x K`; column `c` belongs to `seed_indices[c]`.
    pub cached_matrix: CidMatrix,
    /// For each seed after the first, its min-CID to the earlier seeds when it was picked.
    pub coverage: Vec<f64>,
    pub rng_seed: u64,
}

impl SeedProposal {
    pub fn k(&self) -> usize {
        self.seed_indices.len()
    }

    pub fn point_count(&self) -> usize {
        self.seed_indices.len() + self.remainder_indices.len()
    }

    /// The proposal a run with only the first `k` seeds would have returned.
    ///
    /// Selection is greedy, so the first `k` seeds, their columns and their
    /// coverage are a prefix of this run. Rows for the dropped seeds are
    /// recomputed; CID is exactly symmetric, so they match a fresh run bit for bit.
    pub fn truncate(&self, k: usize, index: &SpatialIndex, disc: SegmentDiscretization) -> Result<SeedProposal> {
        if k == 0 || k > self.k() {
            return Err(CidError::invalid(format!(
                "can truncate to 1..={} seeds, got {k}",
                self.k()
            )));
        }
        if index.len() != self.point_count() {
            return Err(CidError::invalid(
                "spatial index was not built over this proposal's cloud",
            ));
        }
        let seeds = self.seed_indices[..k].to_vec();
        let mut remainder: Vec<usize> = self
            .remainder_indices
            .iter()
            .chain(&self.seed_indices[k..])
            .copied()
            .collect();
        remainder.sort_unstable();
        let row_of: std::collections::HashMap<usize, usize> = self
            .remainder_indices
            .iter()
            .enumerate()
            .map(|(r, &p)| (p, r))
            .collect();
        let pts = index.points();
        let m = disc.samples();
        let mut values = Vec::with_capacity(remainder.len() * k);
        for &p in &remainder {
            match row_of.get(&p) {
                Some(&r) => values.extend_from_slice(&self.cached_matrix.row(r)[..k]),
                None => values.extend(seeds.iter().map(|&s| cid_p_raw(&pts[p], &pts[s], index, m))),
            }
        }
        Ok(SeedProposal {
            cached_matrix: CidMatrix::from_parts(remainder.clone(), seeds.clone(), values),
            seed_indices: seeds,
            remainder_indices: remainder,
            coverage: self.coverage[..k - 1].to_vec(),
            rng_seed: self.rng_seed,
        })
    }
}

/// Deterministic generator used for every random choice in the crate.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn cid_fps(
    cloud: &PointCloud,
    index: &SpatialIndex,
    k: usize,
    disc: SegmentDiscretization,
    rng_seed: u64,
) -> Result<SeedProposal> {
    let n = index.len();
    if cloud.len() != n || cloud.dim() != index.dim() {
        return Err(CidError::invalid("spatial index was not built over this cloud"));
    }
    if k == 0 || k > n {
        return Err(CidError::invalid(format!("seed count must be in 1..={n}, got {k}")));
    }

    let pts = index.points();
    let m = disc.samples();
    let mut rng = rng_from_seed(rng_seed);
    let first = rng.gen_range(0..n);

    let mut is_seed = vec![false; n];
    let mut seeds = Vec::with_capacity(k);
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(k);
    let mut min_cid = vec![f64::INFINITY; n];
    let mut coverage = Vec::with_capacity(k.saturating_sub(1));

    is_seed[first] = true;
    seeds.push(first);
    loop {
        let seed = *seeds.last().expect("at least one seed");
        let column: Vec<f64> = if seeds.len() == n {
            vec![0.0; n]
        } else {
            (0..n)
                .into_par_iter()
                .map(|p| {
                    if is_seed[p] {
                        0.0
                    } else {
                        cid_p_raw(&pts[p], &pts[seed], index, m)
                    }
                })
                .collect()
        };
        for p in 0..n {
            if !is_seed[p] && column[p] < min_cid[p] {
                min_cid[p] = column[p];
            }
        }
        columns.push(column);
        if seeds.len() == k {
            break;
        }

        let mut next = usize::MAX;
        let mut best = f64::NEG_INFINITY;
        for p in 0..n {
            if !is_seed[p] && min_cid[p] > best {
                best = min_cid[p];
                next = p;
            }
        }
        is_seed[next] = true;
        seeds.push(next);
        coverage.push(best);
    }

    let remainder: Vec<usize> = (0..n).filter(|&p| !is_seed[p]).collect();
    let mut values = Vec::with_capacity(remainder.len() * k);
    for &p in &remainder {
        values.extend(columns.iter().map(|col| col[p]));
    }
    Ok(SeedProposal {
        cached_matrix: CidMatrix::from_parts(remainder.clone(), seeds.clone(), values),
        seed_indices: seeds,
        remainder_indices: remainder,
        coverage,
        rng_seed,
    })
}
