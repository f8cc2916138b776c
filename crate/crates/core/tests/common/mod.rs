//! Brute-force reference implementations. Deliberately naive: full linear
//! scans, natural sample order, no caching, no pruning.

#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn lex_less(a: &[f64; 3], b: &[f64; 3]) -> bool {
    for k in 0..3 {
        if a[k] != b[k] {
            return a[k] < b[k];
        }
    }
    false
}

pub fn nearest_sq(points: &[[f64; 3]], q: &[f64; 3]) -> (usize, f64) {
    let mut best = (usize::MAX, f64::INFINITY);
    for (i, p) in points.iter().enumerate() {
        let dx = q[0] - p[0];
        let dy = q[1] - p[1];
        let dz = q[2] - p[2];
        let d = dx * dx + dy * dy + dz * dz;
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

/// Every one of the `m` samples against every cloud point.
pub fn cid_p(points: &[[f64; 3]], a: [f64; 3], b: [f64; 3], m: usize) -> f64 {
    if a == b {
        return 0.0;
    }
    let (a, b) = if lex_less(&b, &a) { (b, a) } else { (a, b) };
    let mut worst = 0.0f64;
    for l in 0..m {
        let t = l as f64 / (m - 1) as f64;
        let s = [
            a[0] + t * (b[0] - a[0]),
            a[1] + t * (b[1] - a[1]),
            a[2] + t * (b[2] - a[2]),
        ];
        let d = nearest_sq(points, &s).1;
        if d > worst {
            worst = d;
        }
    }
    worst.sqrt()
}

pub fn stride_downsample(group: &[usize], cap: usize) -> Vec<usize> {
    let mut g = group.to_vec();
    g.sort_unstable();
    if g.len() <= cap {
        return g;
    }
    let n = g.len();
    (0..cap).map(|i| g[i * n / cap]).collect()
}

pub fn cid_g(points: &[[f64; 3]], gi: &[usize], gj: &[usize], m: usize, cap: usize) -> f64 {
    let si = stride_downsample(gi, cap);
    let sj = stride_downsample(gj, cap);
    let mut sum = 0.0;
    for &p in &si {
        for &q in &sj {
            sum += cid_p(points, points[p], points[q], m);
        }
    }
    sum / (si.len() * sj.len()) as f64
}

/// Full CID matrix, then greedy argmax of min-CID; returns seeds in order.
pub fn fps(points: &[[f64; 3]], first: usize, k: usize, m: usize) -> Vec<usize> {
    let n = points.len();
    let mut seeds = vec![first];
    while seeds.len() < k {
        let mut best = (usize::MAX, f64::NEG_INFINITY);
        for p in 0..n {
            if seeds.contains(&p) {
                continue;
            }
            let d = seeds
                .iter()
                .map(|&s| cid_p(points, points[p], points[s], m))
                .fold(f64::INFINITY, f64::min);
            if d > best.1 {
                best = (p, d);
            }
        }
        seeds.push(best.0);
    }
    seeds
}

/// Group id (position in `seeds`) of every point: nearest seed by CID, ties
/// to the seed with the lowest point index.
pub fn group_points(points: &[[f64; 3]], seeds: &[usize], m: usize) -> Vec<usize> {
    (0..points.len())
        .map(|p| {
            if let Some(g) = seeds.iter().position(|&s| s == p) {
                return g;
            }
            let mut best: Option<(usize, f64)> = None;
            for (g, &s) in seeds.iter().enumerate() {
                let d = cid_p(points, points[p], points[s], m);
                best = match best {
                    None => Some((g, d)),
                    Some((bg, bd)) if d < bd || (d == bd && s < seeds[bg]) => Some((g, d)),
                    keep => keep,
                };
            }
            best.unwrap().0
        })
        .collect()
}

/// `(i, j, value)` of one merge.
pub type MergeRecord = (usize, usize, f64);

/// Agglomeration recomputing every pair each round. Returns the final groups
/// and the record of each step.
pub fn merge(
    points: &[[f64; 3]],
    mut groups: Vec<Vec<usize>>,
    rounds: usize,
    m: usize,
    cap: usize,
) -> (Vec<Vec<usize>>, Vec<MergeRecord>) {
    let mut history = Vec::new();
    for _ in 0..rounds {
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..groups.len() {
            for j in i + 1..groups.len() {
                let v = cid_g(points, &groups[i], &groups[j], m, cap);
                if best.is_none() || v < best.unwrap().2 {
                    best = Some((i, j, v));
                }
            }
        }
        let (i, j, v) = best.expect("at least two groups");
        let absorbed = groups.remove(j);
        groups[i].extend(absorbed);
        groups[i].sort_unstable();
        history.push((i, j, v));
    }
    (groups, history)
}

pub fn purity(groups: &[Vec<usize>], gt: &[i32]) -> f64 {
    let mut total = 0usize;
    for g in groups {
        let mut best = 0;
        for &p in g {
            let c = g.iter().filter(|&&q| gt[q] == gt[p]).count();
            best = best.max(c);
        }
        total += best;
    }
    total as f64 / gt.len() as f64
}

/// VOC all-point AP for one category: rank, match greedily, then average the
/// interpolated precision over every true-positive rank.
pub fn average_precision(
    preds: &[(Vec<usize>, i32, f64, usize)],
    gts: &[(Vec<usize>, i32)],
    category: i32,
    threshold: f64,
) -> Option<f64> {
    let gts: Vec<&Vec<usize>> = gts.iter().filter(|g| g.1 == category).map(|g| &g.0).collect();
    if gts.is_empty() {
        return None;
    }
    let mut ranked: Vec<&(Vec<usize>, i32, f64, usize)> = preds.iter().filter(|p| p.1 == category).collect();
    ranked.sort_by(|a, b| {
        b.2.partial_cmp(&a.2)
            .unwrap()
            .then(b.0.len().cmp(&a.0.len()))
            .then(a.3.cmp(&b.3))
    });
    let iou = |a: &[usize], b: &[usize]| {
        let inter = a.iter().filter(|x| b.contains(x)).count();
        inter as f64 / (a.len() + b.len() - inter) as f64
    };
    let mut taken = vec![false; gts.len()];
    let mut hits = Vec::new();
    for p in &ranked {
        let mut best_g = 0;
        for g in 1..gts.len() {
            if iou(&p.0, gts[g]) > iou(&p.0, gts[best_g]) {
                best_g = g;
            }
        }
        let hit = iou(&p.0, gts[best_g]) >= threshold && !taken[best_g];
        if hit {
            taken[best_g] = true;
        }
        hits.push(hit);
    }
    let precision_at: Vec<f64> = (0..hits.len())
        .map(|r| hits[..=r].iter().filter(|&&h| h).count() as f64 / (r + 1) as f64)
        .collect();
    let mut ap = 0.0;
    for r in 0..hits.len() {
        if hits[r] {
            let interp = precision_at[r..].iter().cloned().fold(0.0, f64::max);
            ap += interp / gts.len() as f64;
        }
    }
    Some(ap)
}

/// Ground-truth instances grouped by `(semantic, instance)`.
pub fn gt_instances(sem: &[i32], inst: &[i32]) -> Vec<(Vec<usize>, i32)> {
    let mut map: BTreeMap<(i32, i32), Vec<usize>> = BTreeMap::new();
    for p in 0..sem.len() {
        map.entry((sem[p], inst[p])).or_default().push(p);
    }
    map.into_iter().map(|((s, _), pts)| (pts, s)).collect()
}

/// `n` points uniformly in the unit cube.
pub fn random_cloud(seed: u64, n: usize) -> Vec<[f64; 3]> {
    let mut r = rng(seed);
    (0..n).map(|_| [r.gen(), r.gen(), r.gen()]).collect()
}

/// Random rotation (normalised quaternion) as a row-major matrix.
pub fn random_rotation(r: &mut impl Rng) -> [[f64; 3]; 3] {
    let mut q = [0.0f64; 4];
    loop {
        for c in q.iter_mut() {
            *c = r.gen_range(-1.0..1.0);
        }
        let n = q.iter().map(|c| c * c).sum::<f64>();
        if n > 1e-3 && n <= 1.0 {
            let n = n.sqrt();
            for c in q.iter_mut() {
                *c /= n;
            }
            break;
        }
    }
    let [w, x, y, z] = q;
    [
        [
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - z * w),
            2.0 * (x * z + y * w),
        ],
        [
            2.0 * (x * y + z * w),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - x * w),
        ],
        [
            2.0 * (x * z - y * w),
            2.0 * (y * z + x * w),
            1.0 - 2.0 * (x * x + y * y),
        ],
    ]
}

pub fn apply(rot: &[[f64; 3]; 3], t: &[f64; 3], p: &[f64; 3]) -> [f64; 3] {
    std::array::from_fn(|r| rot[r][0] * p[0] + rot[r][1] * p[1] + rot[r][2] * p[2] + t[r])
}
