mod common;

use common::{arb_values, oracle_balls, oracle_maximal, rel_diff, space_with_field};
use proptest::prelude::*;
use twoweight_core::maximal::{hl_maximal, orlicz_maximal, restricted_maximal};
use twoweight_core::space::{check_dilation_bound, check_engulfing};
use twoweight_core::{FieldVector, QuasiMetricSpace, YoungFunction};

fn kappa_oracle(s: &QuasiMetricSpace) -> f64 {
    let n = s.len();
    let mut k = 1.0f64;
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                let d = s.dist(x, z) + s.dist(z, y);
                if d > 0.0 {
                    k = k.max(s.dist(x, y) / d);
                }
            }
        }
    }
    k
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn catalog_matches_oracle(s in common::arb_space(12)) {
        let mut want = oracle_balls(&s);
        let mut got: Vec<(usize, Vec<usize>)> = s
            .canonical_balls()
            .iter()
            .map(|cb| (cb.ball.center, s.ball_members(&cb.ball)))
            .collect();
        want.sort();
        got.sort();
        prop_assert_eq!(got, want);
        for cb in s.canonical_balls() {
            let m: f64 = s.ball_members(&cb.ball).iter().map(|&y| s.mass()[y]).sum();
            prop_assert!(rel_diff(m, cb.measure) < 1e-14);
        }
    }

    #[test]
    fn profile_constants(s in common::arb_space(10)) {
        let p = s.profile();
        let k = kappa_oracle(&s);
        prop_assert!(p.kappa >= k && p.kappa <= k * (1.0 + 1e-12));
        prop_assert!(p.c_mu >= 1.0);
        prop_assert!(rel_diff(p.d_mu, p.c_mu.log2()) < 1e-14 || p.d_mu == 0.0);
        prop_assert!(rel_diff(p.engulf, p.kappa * (2.0 * p.kappa + 1.0)) < 1e-15);
    }

    #[test]
    fn dilation_and_engulfing_hold(s in common::arb_space(12)) {
        let p = s.profile();
        prop_assert!(check_dilation_bound(&s, &p, &[1.0, 1.5, 2.0, 3.0, 7.0]).is_empty());
        prop_assert!(check_engulfing(&s, &p).is_empty());
    }

    #[test]
    fn maximal_matches_oracle((s, f) in space_with_field(12)) {
        let m = hl_maximal(&s, &f).unwrap();
        let want = oracle_maximal(&s, &f);
        for (a, b) in m.iter().zip(&want) {
            prop_assert!(rel_diff(*a, *b) < 1e-12);
        }
        let peak = f.iter().cloned().fold(0.0, f64::max);
        for (y, &v) in m.iter().enumerate() {
            prop_assert!(v >= f[y] * (1.0 - 1e-14));
            prop_assert!(v <= peak * (1.0 + 1e-14));
        }
    }

    #[test]
    fn maximal_is_sublinear((s, f) in space_with_field(12), seed in arb_values(12), c in 0.0f64..10.0) {
        let g = FieldVector::new(seed[..s.len()].to_vec()).unwrap();
        let sum = FieldVector::new(f.iter().zip(g.iter()).map(|(a, b)| a + b).collect()).unwrap();
        let (mf, mg, ms) = (hl_maximal(&s, &f).unwrap(), hl_maximal(&s, &g).unwrap(), hl_maximal(&s, &sum).unwrap());
        for y in 0..s.len() {
            prop_assert!(ms[y] <= (mf[y] + mg[y]) * (1.0 + 1e-12) + 1e-300);
        }
        let scaled = FieldVector::new(f.iter().map(|v| c * v).collect()).unwrap();
        let msc = hl_maximal(&s, &scaled).unwrap();
        for y in 0..s.len() {
            prop_assert!((msc[y] - c * mf[y]).abs() <= 1e-12 * (c * mf[y]).max(1e-300));
        }
    }

    #[test]
    fn restricted_is_dominated((s, f) in space_with_field(12), pick in any::<prop::sample::Index>()) {
        let ball = s.canonical_balls()[pick.index(s.canonical_balls().len())].ball;
        let r = restricted_maximal(&s, &f, &ball).unwrap();
        let m = hl_maximal(&s, &f).unwrap();
        for y in 0..s.len() {
            prop_assert!(r[y] <= m[y] * (1.0 + 1e-14));
        }
    }

    #[test]
    fn orlicz_maximal_reductions((s, f) in space_with_field(10), q in 1.0f64..4.0) {
        let m1 = orlicz_maximal(&s, &f, &YoungFunction::power(1.0).unwrap()).unwrap();
        let m = hl_maximal(&s, &f).unwrap();
        let fq = FieldVector::new(f.iter().map(|v| v.powf(q)).collect()).unwrap();
        let mq = orlicz_maximal(&s, &f, &YoungFunction::power(q).unwrap()).unwrap();
        let direct = hl_maximal(&s, &fq).unwrap();
        let log = orlicz_maximal(&s, &f, &YoungFunction::power_log(q.max(1.1), 1.0).unwrap()).unwrap();
        for y in 0..s.len() {
            prop_assert!(rel_diff(m1[y], m[y]) < 1e-12);
            prop_assert!(rel_diff(mq[y], direct[y].powf(1.0 / q)) < 1e-10);
            prop_assert!(m[y] <= mq[y] * (1.0 + 1e-10));
            prop_assert!(log[y].is_finite());
        }
    }
}
