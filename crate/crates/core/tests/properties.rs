mod common;

use cid_core::abstraction::{merge_groups, MergeSchedule};
use cid_core::geometry::{
    cid_p, cid_p_indices, GroupSamplingPolicy, Point, PointCloud, SegmentDiscretization, SpatialIndex,
};
use cid_core::metrics::{average_precision, evaluate_abstraction, majority_counts, GtInstance, InstancePrediction};
use cid_core::pipeline::abstract_scene;
use cid_core::sampling::cid_fps;
use cid_core::segmentation::{group_points, GroupAssignment};
use cid_core::RunConfig;
use proptest::prelude::*;

fn coord() -> impl Strategy<Value = f64> {
    -2.0..2.0f64
}

fn cloud_strategy(min: usize, max: usize) -> impl Strategy<Value = Vec<[f64; 3]>> {
    prop::collection::vec([coord(), coord(), coord()], min..max)
}

fn disc(m: usize) -> SegmentDiscretization {
    SegmentDiscretization::new(m).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cid_is_symmetric_reflexive_and_non_negative(
        pts in cloud_strategy(1, 120),
        a in [coord(), coord(), coord()],
        b in [coord(), coord(), coord()],
        m in 2usize..60,
    ) {
        let cloud = PointCloud::new(pts, 3).unwrap();
        let index = SpatialIndex::build(&cloud);
        let pa = Point::new(&a).unwrap();
        let pb = Point::new(&b).unwrap();
        let ab = cid_p(&pa, &pb, &index, disc(m)).unwrap();
        let ba = cid_p(&pb, &pa, &index, disc(m)).unwrap();
        prop_assert_eq!(ab.to_bits(), ba.to_bits());
        prop_assert!(ab >= 0.0);
        prop_assert_eq!(cid_p(&pa, &pa, &index, disc(m)).unwrap(), 0.0);
        // bounded below by the endpoints' own distances to the cloud
        let da = common::nearest_sq(cloud.points(), &a).1.sqrt();
        let db = common::nearest_sq(cloud.points(), &b).1.sqrt();
        // the far endpoint is reached as a + 1 * (b - a), so allow rounding
        prop_assert!(ab >= da.max(db) - 1e-12 * (1.0 + ab));
    }

    #[test]
    fn grouping_is_a_partition(pts in cloud_strategy(2, 80), k in 1usize..10, seed in any::<u64>()) {
        let cloud = PointCloud::new(pts, 3).unwrap();
        let index = SpatialIndex::build(&cloud);
        let k = k.min(cloud.len());
        let p = cid_fps(&cloud, &index, k, disc(12), seed).unwrap();
        let g = group_points(&p).unwrap();
        prop_assert_eq!(g.group_count(), k);
        let mut seen = vec![0u32; cloud.len()];
        for (gid, members) in g.groups().iter().enumerate() {
            prop_assert!(members.contains(&p.seed_indices[gid]));
            for &q in members {
                seen[q] += 1;
                prop_assert_eq!(g.group_of()[q], gid);
            }
        }
        prop_assert!(seen.iter().all(|&c| c == 1));
        for w in p.coverage.windows(2) {
            prop_assert!(w[1] <= w[0]);
        }
    }

    #[test]
    fn ap_does_not_increase_with_threshold(
        owner in prop::collection::vec(0usize..6, 30..60),
        sem in prop::collection::vec(0i32..2, 6),
        conf in prop::collection::vec(0.0..1.0f64, 6),
        t1 in 0.05..0.95f64,
        t2 in 0.05..0.95f64,
    ) {
        let n = owner.len();
        let gts: Vec<GtInstance> = (0..4)
            .map(|g| GtInstance { points: (0..n).filter(|p| p % 4 == g).collect(), semantic: (g % 2) as i32 })
            .collect();
        let preds: Vec<InstancePrediction> = (0..6)
            .filter_map(|id| {
                let points: Vec<usize> = (0..n).filter(|&p| owner[p] == id).collect();
                (!points.is_empty()).then(|| InstancePrediction { id, points, semantic: sem[id], confidence: conf[id] })
            })
            .collect();
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        for cat in 0..2 {
            let a = average_precision(&preds, &gts, cat, lo).unwrap().unwrap();
            let b = average_precision(&preds, &gts, cat, hi).unwrap().unwrap();
            prop_assert!(b <= a, "AP({hi}) = {b} > AP({lo}) = {a}");
            prop_assert!((0.0..=1.0).contains(&a));
        }
    }

    #[test]
    fn majority_of_union_is_subadditive(
        gt in prop::collection::vec(0i32..5, 10..60),
        groups in prop::collection::vec(0usize..5, 10..60),
        i in 0usize..5,
        j in 0usize..5,
    ) {
        let n = gt.len().min(groups.len());
        let (gt, mut groups) = (&gt[..n], groups[..n].to_vec());
        // ids 0..5 must all be present
        for (p, slot) in groups.iter_mut().enumerate().take(5) {
            *slot = p;
        }
        prop_assume!(i != j);
        let before = GroupAssignment::from_group_of(groups.clone()).unwrap();
        let m = majority_counts(&before, gt).unwrap();
        let (lo, hi) = (i.min(j), i.max(j));
        let merged: Vec<usize> = groups
            .iter()
            .map(|&g| if g == hi { lo } else if g > hi { g - 1 } else { g })
            .collect();
        let after = GroupAssignment::from_group_of(merged).unwrap();
        let m2 = majority_counts(&after, gt).unwrap();
        prop_assert!(m2[lo] <= m[lo] + m[hi]);
        prop_assert!(m2[lo] >= m[lo].max(m[hi]));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn merging_raises_compactness_and_keeps_partition(pts in cloud_strategy(20, 70), seed in any::<u64>()) {
        let cloud = PointCloud::new(pts, 3).unwrap();
        let index = SpatialIndex::build(&cloud);
        let gt: Vec<i32> = (0..cloud.len()).map(|p| (p % 3) as i32).collect();
        let p = cid_fps(&cloud, &index, 8, disc(10), seed).unwrap();
        let initial = group_points(&p).unwrap();
        let mut last = evaluate_abstraction(&initial, &gt).unwrap();
        for t in 1..8 {
            let (out, sched) = merge_groups(
                &initial, &index, disc(10), GroupSamplingPolicy::default(), &MergeSchedule::fixed(t),
            ).unwrap();
            prop_assert_eq!(sched.history.len(), t);
            prop_assert_eq!(out.group_count(), 8 - t);
            prop_assert_eq!(out.groups().iter().map(Vec::len).sum::<usize>(), cloud.len());
            let r = evaluate_abstraction(&out, &gt).unwrap();
            prop_assert!(r.compactness > last.compactness);
            prop_assert!(r.purity <= last.purity);
            last = r;
        }
    }

    #[test]
    fn rigid_motion_keeps_groups(
        pts in cloud_strategy(12, 60),
        seed in any::<u64>(),
        t in [-5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64],
    ) {
        let mut r = common::rng(seed);
        let rot = common::random_rotation(&mut r);
        let cloud = PointCloud::new(pts, 3).unwrap();
        let moved = cloud.map_points(|p| common::apply(&rot, &t, p)).unwrap();
        let config = RunConfig { k_seeds: 5, m_discretization: 20, rng_seed: seed, ..RunConfig::default() };
        let a = abstract_scene(&cloud, &config).unwrap();
        let b = abstract_scene(&moved, &config).unwrap();
        prop_assert_eq!(a.full_groups.group_of(), b.full_groups.group_of());

        let index = SpatialIndex::build(&cloud);
        let index_moved = SpatialIndex::build(&moved);
        let (i, j) = (0, cloud.len() - 1);
        let c = cid_p_indices(i, j, &index, disc(20)).unwrap();
        let c2 = cid_p_indices(i, j, &index_moved, disc(20)).unwrap();
        prop_assert!((c - c2).abs() <= 1e-9 * (1.0 + c));
    }
}
