//! Instance-segmentation AP and abstraction quality (compactness, purity).

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{CidError, Result};
use crate::segmentation::{GroupAssignment, LabelPair};

pub const DEFAULT_IOU_THRESHOLDS: [f64; 3] = [0.25, 0.5, 0.75];

/// Name of the precision-recall interpolation used by [`average_precision`].
pub const AP_INTERPOLATION: &str = "voc2010_all_point";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstancePrediction {
    pub id: usize,
    /// Point indices, ascending.
    pub points: Vec<usize>,
    pub semantic: i32,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GtInstance {
    /// Point indices, ascending.
    pub points: Vec<usize>,
    pub semantic: i32,
}

fn sorted_unique(v: &[usize]) -> Vec<usize> {
    let mut s = v.to_vec();
    s.sort_unstable();
    s.dedup();
    s
}

fn intersection_len(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

fn iou_sorted(a: &[usize], b: &[usize]) -> f64 {
    let inter = intersection_len(a, b);
    inter as f64 / (a.len() + b.len() - inter) as f64
}

/// Intersection over union of two point-index sets.
pub fn instance_iou(pred: &[usize], gt: &[usize]) -> Result<f64> {
    if pred.is_empty() || gt.is_empty() {
        return Err(CidError::invalid("IoU needs two non-empty sets"));
    }
    Ok(iou_sorted(&sorted_unique(pred), &sorted_unique(gt)))
}

/// Order in which predictions are matched: confidence, then size, then id.
fn ranking(a: &InstancePrediction, b: &InstancePrediction) -> Ordering {
    b.confidence
        .total_cmp(&a.confidence)
        .then(b.points.len().cmp(&a.points.len()))
        .then(a.id.cmp(&b.id))
}

/// Average precision of one category at one IoU threshold, or `None` when the
/// category has no ground-truth instance.
///
/// Each prediction, best-ranked first, is matched to the ground-truth instance
/// it overlaps most; it counts as a true positive if that IoU reaches the
/// threshold and the instance is still unmatched. AP is the area under the
/// monotone precision envelope over all recall steps.
pub fn average_precision(
    preds: &[InstancePrediction],
    gt_instances: &[GtInstance],
    category: i32,
    iou_threshold: f64,
) -> Result<Option<f64>> {
    if !(iou_threshold > 0.0 && iou_threshold < 1.0) {
        return Err(CidError::invalid(format!(
            "IoU threshold must lie in (0, 1), got {iou_threshold}"
        )));
    }
    let gts: Vec<Vec<usize>> = gt_instances
        .iter()
        .filter(|g| g.semantic == category)
        .map(|g| sorted_unique(&g.points))
        .collect();
    if gts.is_empty() {
        return Ok(None);
    }
    if gts.iter().any(Vec::is_empty) {
        return Err(CidError::invalid("ground-truth instance is empty"));
    }
    let mut ranked: Vec<&InstancePrediction> = preds.iter().filter(|p| p.semantic == category).collect();
    if ranked.iter().any(|p| p.points.is_empty()) {
        return Err(CidError::invalid("predicted instance is empty"));
    }
    ranked.sort_by(|a, b| ranking(a, b));

    let mut matched = vec![false; gts.len()];
    let mut is_tp = Vec::with_capacity(ranked.len());
    for pred in &ranked {
        let pts = sorted_unique(&pred.points);
        let mut best: Option<(usize, f64)> = None;
        for (g, gt) in gts.iter().enumerate() {
            let iou = iou_sorted(&pts, gt);
            if best.is_none_or(|(_, b)| iou > b) {
                best = Some((g, iou));
            }
        }
        let tp = match best {
            Some((g, iou)) if iou >= iou_threshold && !matched[g] => {
                matched[g] = true;
                true
            }
            _ => false,
        };
        is_tp.push(tp);
    }
    Ok(Some(pr_area(&is_tp, gts.len())))
}

/// All-point interpolated area under the precision-recall curve.
fn pr_area(is_tp: &[bool], n_gt: usize) -> f64 {
    let mut recall = vec![0.0];
    let mut precision = vec![0.0];
    let (mut tp, mut fp) = (0usize, 0usize);
    for &hit in is_tp {
        if hit {
            tp += 1;
        } else {
            fp += 1;
        }
        recall.push(tp as f64 / n_gt as f64);
        precision.push(tp as f64 / (tp + fp) as f64);
    }
    recall.push(1.0);
    precision.push(0.0);
    for i in (1..precision.len()).rev() {
        precision[i - 1] = precision[i - 1].max(precision[i]);
    }
    (1..recall.len())
        .filter(|&i| recall[i] != recall[i - 1])
        .map(|i| (recall[i] - recall[i - 1]) * precision[i])
        .sum()
}

/// AP at the three reporting thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApTriple {
    pub ap25: f64,
    pub ap50: f64,
    pub ap75: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryAp {
    #[serde(flatten)]
    pub ap: ApTriple,
    pub gt_instances: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApReport {
    /// Keyed by semantic label; categories without ground truth are absent.
    pub per_category: BTreeMap<i32, CategoryAp>,
    /// Mean over present categories; `None` when there are none.
    pub mean: Option<ApTriple>,
    pub iou_thresholds: [f64; 3],
    pub interpolation: String,
}

/// Per-category and mean AP at `thresholds` (reported as ap25/ap50/ap75).
pub fn evaluate_ap(preds: &[InstancePrediction], gts: &[GtInstance], thresholds: [f64; 3]) -> Result<ApReport> {
    let mut counts: BTreeMap<i32, usize> = BTreeMap::new();
    for g in gts {
        *counts.entry(g.semantic).or_default() += 1;
    }
    let mut per_category = BTreeMap::new();
    for (&cat, &n) in &counts {
        let mut vals = [0.0; 3];
        for (v, &t) in vals.iter_mut().zip(&thresholds) {
            *v = average_precision(preds, gts, cat, t)?.expect("category has ground truth");
        }
        per_category.insert(
            cat,
            CategoryAp {
                ap: ApTriple {
                    ap25: vals[0],
                    ap50: vals[1],
                    ap75: vals[2],
                },
                gt_instances: n,
            },
        );
    }
    let mean = (!per_category.is_empty()).then(|| {
        let k = per_category.len() as f64;
        let sum = |f: fn(&ApTriple) -> f64| per_category.values().map(|c| f(&c.ap)).sum::<f64>() / k;
        ApTriple {
            ap25: sum(|a| a.ap25),
            ap50: sum(|a| a.ap50),
            ap75: sum(|a| a.ap75),
        }
    });
    Ok(ApReport {
        per_category,
        mean,
        iou_thresholds: thresholds,
        interpolation: AP_INTERPOLATION.to_string(),
    })
}

/// Ground-truth instances: points grouped by their (semantic, instance) pair,
/// in ascending pair order.
pub fn instances_from_labels(semantic: &[i32], instance: &[i32]) -> Result<Vec<GtInstance>> {
    if semantic.len() != instance.len() {
        return Err(CidError::invalid("semantic and instance label arrays differ in length"));
    }
    let mut by_pair: BTreeMap<(i32, i32), Vec<usize>> = BTreeMap::new();
    for (p, (&s, &i)) in semantic.iter().zip(instance).enumerate() {
        by_pair.entry((s, i)).or_default().push(p);
    }
    Ok(by_pair
        .into_iter()
        .map(|((semantic, _), points)| GtInstance { points, semantic })
        .collect())
}

/// Predicted instances from propagated per-point labels. Points whose seeds
/// carried the same label pair form one instance; every instance gets
/// confidence 1.0 and ids follow ascending label-pair order.
pub fn predictions_from_labels(labels: &[LabelPair]) -> Vec<InstancePrediction> {
    let mut by_pair: BTreeMap<LabelPair, Vec<usize>> = BTreeMap::new();
    for (p, l) in labels.iter().enumerate() {
        by_pair.entry(*l).or_default().push(p);
    }
    by_pair
        .into_iter()
        .enumerate()
        .map(|(id, (pair, points))| InstancePrediction {
            id,
            points,
            semantic: pair.semantic,
            confidence: 1.0,
        })
        .collect()
}

/// Ground-truth instance count over final group count. May exceed 1.
pub fn compactness(k_gt: usize, k_prime: usize) -> Result<f64> {
    if k_gt == 0 || k_prime == 0 {
        return Err(CidError::invalid(
            "compactness needs positive instance and group counts",
        ));
    }
    Ok(k_gt as f64 / k_prime as f64)
}

/// Size of the most frequent ground-truth instance inside each group.
pub fn majority_counts(assignment: &GroupAssignment, gt_instance_labels: &[i32]) -> Result<Vec<usize>> {
    if gt_instance_labels.len() != assignment.point_count() {
        return Err(CidError::invalid(format!(
            "{} ground-truth labels for {} points",
            gt_instance_labels.len(),
            assignment.point_count()
        )));
    }
    Ok(assignment
        .groups()
        .iter()
        .map(|members| {
            let mut counts: HashMap<i32, usize> = HashMap::new();
            for &p in members {
                *counts.entry(gt_instance_labels[p]).or_default() += 1;
            }
            counts.into_values().max().unwrap_or(0)
        })
        .collect())
}

/// Fraction of points that belong to their group's majority instance.
pub fn purity(assignment: &GroupAssignment, gt_instance_labels: &[i32]) -> Result<f64> {
    let m = majority_counts(assignment, gt_instance_labels)?;
    Ok(m.iter().sum::<usize>() as f64 / assignment.point_count() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbstractionReport {
    pub compactness: f64,
    pub purity: f64,
    pub k_gt: usize,
    pub k_prime: usize,
    pub majority_counts: Vec<usize>,
}

pub fn evaluate_abstraction(assignment: &GroupAssignment, gt_instance_labels: &[i32]) -> Result<AbstractionReport> {
    let majority = majority_counts(assignment, gt_instance_labels)?;
    let mut distinct = gt_instance_labels.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    let k_gt = distinct.len();
    let k_prime = assignment.group_count();
    Ok(AbstractionReport {
        compactness: compactness(k_gt, k_prime)?,
        purity: majority.iter().sum::<usize>() as f64 / assignment.point_count() as f64,
        k_gt,
        k_prime,
        majority_counts: majority,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pred(id: usize, points: Vec<usize>, semantic: i32) -> InstancePrediction {
        InstancePrediction {
            id,
            points,
            semantic,
            confidence: 1.0,
        }
    }

    #[test]
    fn iou_examples() {
        assert_eq!(instance_iou(&[1, 2, 3], &[3, 2, 1]).unwrap(), 1.0);
        assert_eq!(instance_iou(&[1, 2], &[3, 4]).unwrap(), 0.0);
        assert_eq!(instance_iou(&[0, 1, 2, 3], &[2, 3, 4, 5]).unwrap(), 2.0 / 6.0);
        assert!(instance_iou(&[], &[1]).is_err());
    }

    #[test]
    fn perfect_and_empty_predictions() {
        let gts = vec![
            GtInstance {
                points: vec![0, 1],
                semantic: 0,
            },
            GtInstance {
                points: vec![2, 3, 4],
                semantic: 0,
            },
        ];
        let preds = vec![pred(0, vec![0, 1], 0), pred(1, vec![2, 3, 4], 0)];
        for t in DEFAULT_IOU_THRESHOLDS {
            assert_eq!(average_precision(&preds, &gts, 0, t).unwrap(), Some(1.0));
        }
        let miss = vec![pred(0, vec![9], 0)];
        assert_eq!(average_precision(&miss, &gts, 0, 0.5).unwrap(), Some(0.0));
        assert_eq!(average_precision(&[], &gts, 0, 0.5).unwrap(), Some(0.0));
        assert_eq!(average_precision(&preds, &gts, 5, 0.5).unwrap(), None);
        assert!(average_precision(&preds, &gts, 0, 1.0).is_err());
    }

    #[test]
    fn hand_computed_pr_curve() {
        // GT a: 0..10, b: 10..20, c: 20..30
        let gts: Vec<GtInstance> = (0..3)
            .map(|g| GtInstance {
                points: (g * 10..g * 10 + 10).collect(),
                semantic: 1,
            })
            .collect();
        // IoU 0.9: 9 of a, plus nothing else -> 9/10
        let p0 = pred(0, (0..9).collect(), 1);
        // IoU 0.6: 6 of b + 0 extra -> 6/10
        let p1 = pred(1, (10..16).collect(), 1);
        // IoU 0.3: 3 of c -> 3/10
        let p2 = pred(2, (20..23).collect(), 1);
        for (p, expect) in [(&p0, 0.9), (&p1, 0.6), (&p2, 0.3)] {
            let g = &gts[p.id];
            assert!((instance_iou(&p.points, &g.points).unwrap() - expect).abs() < 1e-12);
        }
        // all confidences equal: larger first -> 0.9, 0.6, 0.3 order
        let ap = average_precision(&[p2, p1, p0], &gts, 1, 0.5).unwrap().unwrap();
        assert!((ap - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn duplicate_match_is_false_positive() {
        let gts = vec![GtInstance {
            points: (0..10).collect(),
            semantic: 0,
        }];
        let preds = vec![pred(0, (0..8).collect(), 0), pred(1, (0..6).collect(), 0)];
        // precision 1 at recall 1, the later duplicate cannot lower it
        assert_eq!(average_precision(&preds, &gts, 0, 0.5).unwrap(), Some(1.0));
    }

    #[test]
    fn report_excludes_absent_categories() {
        let gts = vec![GtInstance {
            points: vec![0, 1],
            semantic: 3,
        }];
        let preds = vec![pred(0, vec![0, 1], 3), pred(1, vec![2], 8)];
        let r = evaluate_ap(&preds, &gts, DEFAULT_IOU_THRESHOLDS).unwrap();
        assert_eq!(r.per_category.len(), 1);
        assert_eq!(r.mean.unwrap().ap50, 1.0);
    }

    #[test]
    fn compactness_examples() {
        assert_eq!(compactness(7, 7).unwrap(), 1.0);
        assert_eq!(compactness(10, 20).unwrap(), 0.5);
        assert_eq!(compactness(10, 5).unwrap(), 2.0);
        assert!(compactness(0, 5).is_err());
        assert!(compactness(5, 0).is_err());
    }

    #[test]
    fn purity_examples() {
        let pure = GroupAssignment::from_group_of(vec![0, 0, 1, 1]).unwrap();
        assert_eq!(purity(&pure, &[4, 4, 9, 9]).unwrap(), 1.0);

        let mixed = GroupAssignment::from_group_of(vec![0; 100]).unwrap();
        let labels: Vec<i32> = (0..100).map(|i| (i >= 50) as i32).collect();
        assert_eq!(purity(&mixed, &labels).unwrap(), 0.5);
        assert!(purity(&mixed, &labels[..10]).is_err());
    }

    #[test]
    fn label_grouping() {
        let gts = instances_from_labels(&[1, 1, 2, 1], &[0, 5, 0, 0]).unwrap();
        assert_eq!(gts.len(), 3);
        assert_eq!(gts[0].points, vec![0, 3]);
        let labels = [
            LabelPair {
                semantic: 1,
                instance: 0,
            },
            LabelPair {
                semantic: 1,
                instance: 0,
            },
            LabelPair {
                semantic: 2,
                instance: 4,
            },
        ];
        let preds = predictions_from_labels(&labels);
        assert_eq!(preds.len(), 2);
        assert_eq!(preds[0].points, vec![0, 1]);
        assert_eq!(preds[1].semantic, 2);
    }
}
