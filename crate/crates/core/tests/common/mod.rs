#![allow(dead_code)]

use proptest::prelude::*;
use twoweight_core::{FieldVector, Metric, QuasiMetricSpace, WeightVector};

/// Points on a small integer grid (ties in distances are common) or the real
/// line, optionally snowflaked by `d^gamma` with `gamma > 1` to push `κ` above 1.
pub fn arb_space(max_n: usize) -> impl Strategy<Value = QuasiMetricSpace> {
    (1..=max_n)
        .prop_flat_map(|n| {
            (
                prop::collection::vec((0u8..6, 0u8..6), n),
                prop::collection::vec(0.1f64..10.0, n),
                0usize..4,
                1.0f64..2.0,
            )
        })
        .prop_filter_map("needs distinct points", |(raw, mass, kind, gamma)| {
            let mut pts: Vec<Vec<f64>> = raw.iter().map(|&(a, b)| vec![a as f64, b as f64]).collect();
            pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            pts.dedup();
            let mass = mass[..pts.len()].to_vec();
            let metric = [Metric::L1, Metric::L2, Metric::Linf, Metric::L1][kind];
            let space = QuasiMetricSpace::from_points(&pts, metric, mass.clone()).ok()?;
            if kind < 3 {
                return Some(space);
            }
            let n = space.len();
            let dist = (0..n * n)
                .map(|k| space.dist(k / n, k % n).powf(gamma))
                .collect();
            QuasiMetricSpace::new(dist, mass).ok()
        })
}

/// Nonnegative values with a fair share of exact zeros.
pub fn arb_values(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![1 => Just(0.0), 4 => 0.0f64..20.0], n)
}

pub fn arb_positive(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..20.0, n)
}

pub fn space_with_field(max_n: usize) -> impl Strategy<Value = (QuasiMetricSpace, FieldVector)> {
    arb_space(max_n).prop_flat_map(|s| {
        let n = s.len();
        (Just(s), arb_values(n).prop_map(|v| FieldVector::new(v).unwrap()))
    })
}

pub fn space_with_weights(max_n: usize) -> impl Strategy<Value = (QuasiMetricSpace, WeightVector, WeightVector)> {
    arb_space(max_n).prop_flat_map(|s| {
        let n = s.len();
        (
            Just(s),
            arb_positive(n).prop_map(|v| WeightVector::new(v).unwrap()),
            arb_positive(n).prop_map(|v| WeightVector::new(v).unwrap()),
        )
    })
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Member sets of every open ball, built straight from the distance matrix:
/// for each center and each attained distance, the closed sublevel set.
pub fn oracle_balls(s: &QuasiMetricSpace) -> Vec<(usize, Vec<usize>)> {
    let n = s.len();
    let mut out = Vec::new();
    for c in 0..n {
        let mut seen: Vec<Vec<usize>> = Vec::new();
        for y in 0..n {
            let r = s.dist(c, y);
            let set: Vec<usize> = (0..n).filter(|&z| s.dist(c, z) <= r).collect();
            if !seen.contains(&set) {
                seen.push(set.clone());
                out.push((c, set));
            }
        }
    }
    out
}

/// `Mf` by brute force over [`oracle_balls`].
pub fn oracle_maximal(s: &QuasiMetricSpace, f: &[f64]) -> Vec<f64> {
    let mass = s.mass();
    let mut out = vec![0.0f64; s.len()];
    for (_, set) in oracle_balls(s) {
        let num: f64 = set.iter().map(|&y| f[y] * mass[y]).sum();
        let den: f64 = set.iter().map(|&y| mass[y]).sum();
        for &y in &set {
            out[y] = out[y].max(num / den);
        }
    }
    out
}
