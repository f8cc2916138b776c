//! End-to-end runs: subsample, seed, group, then either label or merge, and
//! carry the result back to full resolution.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::abstraction::{convex_hulls, merge_groups, ConvexPart, MergeMode, MergeSchedule};
use crate::config::RunConfig;
use crate::error::{CidError, Result};
use crate::geometry::{PointCloud, SpatialIndex};
use crate::metrics::{
    evaluate_abstraction, evaluate_ap, instances_from_labels, predictions_from_labels, AbstractionReport, ApReport,
    ApTriple, CategoryAp,
};
use crate::sampling::{cid_fps, SeedProposal};
use crate::segmentation::{
    group_points, nearest_in_subsample, propagate_labels, subsample_indices, GroupAssignment, LabelPair, LabeledSeedSet,
};

/// The subsample all CID work runs on.
#[derive(Debug, Clone)]
pub struct WorkingSet {
    /// Indices into the full cloud, ascending.
    pub indices: Vec<usize>,
    pub cloud: PointCloud,
    pub index: SpatialIndex,
}

pub fn working_set(full: &PointCloud, config: &RunConfig) -> Result<WorkingSet> {
    let indices = subsample_indices(full.len(), config.subsample_size, config.subsample_seed());
    let cloud = full.select(&indices)?;
    let index = SpatialIndex::build(&cloud);
    Ok(WorkingSet { indices, cloud, index })
}

/// Per-point mapping from the full cloud to the working set: working points
/// map to themselves, the rest to their Euclidean-nearest working point.
fn full_to_working(full: &PointCloud, working: &WorkingSet) -> Result<Vec<usize>> {
    if working.indices.len() == full.len() {
        return Ok((0..full.len()).collect());
    }
    nearest_in_subsample(&working.cloud, full)
}

pub fn propose_seeds(working: &WorkingSet, config: &RunConfig) -> Result<SeedProposal> {
    if config.k_seeds > working.cloud.len() {
        return Err(CidError::invalid(format!(
            "{} seeds requested but the working set has {} points",
            config.k_seeds,
            working.cloud.len()
        )));
    }
    cid_fps(
        &working.cloud,
        &working.index,
        config.k_seeds,
        config.discretization()?,
        config.rng_seed,
    )
}

#[derive(Debug, Clone)]
pub struct SegmentationRun {
    pub working: WorkingSet,
    pub proposal: SeedProposal,
    /// Working-set groups with their seeds' labels.
    pub assignment: GroupAssignment,
    /// Predicted labels for every point of the full cloud.
    pub full_labels: Vec<LabelPair>,
    pub ap: ApReport,
}

/// Label propagation with seeds labelled from the cloud's ground truth,
/// evaluated against that ground truth at full resolution.
pub fn segment(full: &PointCloud, config: &RunConfig) -> Result<SegmentationRun> {
    config.validate()?;
    let working = working_set(full, config)?;
    let proposal = propose_seeds(&working, config)?;
    segment_with(full, working, proposal, config)
}

/// Segmentation from an existing seed proposal over `working`.
pub fn segment_with(
    full: &PointCloud,
    working: WorkingSet,
    proposal: SeedProposal,
    config: &RunConfig,
) -> Result<SegmentationRun> {
    let (Some(sem), Some(inst)) = (full.semantic_labels(), full.instance_labels()) else {
        return Err(CidError::invalid(
            "segmentation needs ground-truth semantic and instance labels",
        ));
    };
    let groups = group_points(&proposal)?;
    let seeds = LabeledSeedSet::from_ground_truth(&proposal.seed_indices, &working.cloud)?;
    let assignment = propagate_labels(&groups, &seeds)?;
    let working_labels = assignment.point_labels().expect("labels were just propagated");
    let full_labels: Vec<LabelPair> = full_to_working(full, &working)?
        .into_iter()
        .map(|w| working_labels[w])
        .collect();

    let preds = predictions_from_labels(&full_labels);
    let gts = instances_from_labels(sem, inst)?;
    let ap = evaluate_ap(&preds, &gts, config.iou_thresholds)?;
    Ok(SegmentationRun {
        working,
        proposal,
        assignment,
        full_labels,
        ap,
    })
}

/// AP for each seed count in `ks`, from a single seeding run with the
/// largest count: seeds are chosen greedily, so smaller runs are its prefixes.
pub fn seed_sweep(full: &PointCloud, config: &RunConfig, ks: &[usize]) -> Result<Vec<(usize, ApReport)>> {
    let k_max = ks
        .iter()
        .copied()
        .max()
        .ok_or_else(|| CidError::invalid("no seed counts given"))?;
    let config = RunConfig {
        k_seeds: k_max,
        ..config.clone()
    };
    config.validate()?;
    let working = working_set(full, &config)?;
    let longest = propose_seeds(&working, &config)?;
    let disc = config.discretization()?;
    ks.iter()
        .map(|&k| {
            let proposal = longest.truncate(k, &working.index, disc)?;
            let run = segment_with(full, working.clone(), proposal, &config)?;
            Ok((k, run.ap))
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct AbstractionRun {
    pub working: WorkingSet,
    pub proposal: SeedProposal,
    pub initial: GroupAssignment,
    pub merged: GroupAssignment,
    pub schedule: MergeSchedule,
    /// Final groups over the full cloud.
    pub full_groups: GroupAssignment,
    /// Hulls of the full-resolution groups.
    pub parts: Vec<ConvexPart>,
    /// Present when the cloud carries instance labels.
    pub report: Option<AbstractionReport>,
}

/// Seeds, groups, merges per `config.merge` (no merging when unset) and wraps
/// the final groups in convex hulls.
pub fn abstract_scene(full: &PointCloud, config: &RunConfig) -> Result<AbstractionRun> {
    config.validate()?;
    let working = working_set(full, config)?;
    let proposal = propose_seeds(&working, config)?;
    let initial = group_points(&proposal)?;
    let schedule = match config.merge {
        None => MergeSchedule::fixed(0),
        Some(MergeMode::FixedIterations(t)) => MergeSchedule::fixed(t),
        Some(MergeMode::Threshold(tau)) => MergeSchedule::threshold(tau)?,
    };
    let (merged, schedule) = merge_groups(
        &initial,
        &working.index,
        config.discretization()?,
        config.group_policy()?,
        &schedule,
    )?;
    let group_of: Vec<usize> = full_to_working(full, &working)?
        .into_iter()
        .map(|w| merged.group_of()[w])
        .collect();
    let full_groups = GroupAssignment::from_groups(full.len(), regroup(&group_of, merged.group_count()))?;
    let parts = convex_hulls(full, &full_groups)?;
    let report = full
        .instance_labels()
        .map(|gt| evaluate_abstraction(&full_groups, gt))
        .transpose()?;
    Ok(AbstractionRun {
        working,
        proposal,
        initial,
        merged,
        schedule,
        full_groups,
        parts,
        report,
    })
}

/// Groups by id, dropping ids that received no full-resolution point.
fn regroup(group_of: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut groups = vec![Vec::new(); k];
    for (p, &g) in group_of.iter().enumerate() {
        groups[g].push(p);
    }
    groups.retain(|g| !g.is_empty());
    groups
}

/// JSON report written by the CLI for one scene.
#[derive(Debug, Clone, Serialize)]
pub struct SceneReport {
    pub scene: String,
    pub per_category: BTreeMap<String, CategoryAp>,
    pub mean: Option<ApTriple>,
    pub compactness: Option<f64>,
    pub purity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub interpolation: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub abstraction: Option<AbstractionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub merge_schedule: Option<MergeSchedule>,
    pub config: RunConfig,
    pub rng_seed: u64,
}

impl SceneReport {
    pub fn new(scene: impl Into<String>, config: &RunConfig) -> Self {
        SceneReport {
            scene: scene.into(),
            per_category: BTreeMap::new(),
            mean: None,
            compactness: None,
            purity: None,
            interpolation: None,
            abstraction: None,
            merge_schedule: None,
            config: config.clone(),
            rng_seed: config.rng_seed,
        }
    }

    pub fn with_ap(mut self, ap: &ApReport) -> Self {
        self.per_category = ap
            .per_category
            .iter()
            .map(|(k, v)| (k.to_string(), v.clone()))
            .collect();
        self.mean = ap.mean;
        self.interpolation = Some(ap.interpolation.clone());
        self
    }

    pub fn with_abstraction(mut self, report: Option<&AbstractionReport>, schedule: &MergeSchedule) -> Self {
        if let Some(r) = report {
            self.compactness = Some(r.compactness);
            self.purity = Some(r.purity);
            self.abstraction = Some(r.clone());
        }
        self.merge_schedule = Some(schedule.clone());
        self
    }
}
