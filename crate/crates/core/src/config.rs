use serde::{Deserialize, Serialize};

use crate::abstraction::{MergeMode, MergeSchedule};
use crate::error::{CidError, Result};
use crate::geometry::{GroupSamplingPolicy, SegmentDiscretization};
use crate::metrics::DEFAULT_IOU_THRESHOLDS;
use crate::sampling::DEFAULT_SEEDS;
use crate::segmentation::DEFAULT_SUBSAMPLE;

/// Every knob of a pipeline run. Echoed verbatim into reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub subsample_size: usize,
    pub k_seeds: usize,
    pub m_discretization: usize,
    pub group_cap: usize,
    pub merge: Option<MergeMode>,
    pub rng_seed: u64,
    pub iou_thresholds: [f64; 3],
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            subsample_size: DEFAULT_SUBSAMPLE,
            k_seeds: DEFAULT_SEEDS,
            m_discretization: SegmentDiscretization::DEFAULT_SAMPLES,
            group_cap: GroupSamplingPolicy::DEFAULT_CAP,
            merge: None,
            rng_seed: 0,
            iou_thresholds: DEFAULT_IOU_THRESHOLDS,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.subsample_size == 0 || self.k_seeds == 0 || self.group_cap == 0 {
            return Err(CidError::invalid(
                "subsample size, seed count and group cap must be positive",
            ));
        }
        SegmentDiscretization::new(self.m_discretization)?;
        if self.iou_thresholds.iter().any(|&t| !(t > 0.0 && t < 1.0)) {
            return Err(CidError::invalid("IoU thresholds must lie in (0, 1)"));
        }
        if let Some(MergeMode::Threshold(tau)) = self.merge {
            MergeSchedule::threshold(tau)?;
        }
        Ok(())
    }

    pub fn discretization(&self) -> Result<SegmentDiscretization> {
        SegmentDiscretization::new(self.m_discretization)
    }

    pub fn group_policy(&self) -> Result<GroupSamplingPolicy> {
        GroupSamplingPolicy::new(self.group_cap)
    }

    /// Generator seed for the working-set subsample, derived from `rng_seed`
    /// so it does not replay the seed-selection stream.
    pub fn subsample_seed(&self) -> u64 {
        self.rng_seed ^ 0x5eed_5ab5_a3b1_e000
    }
}
