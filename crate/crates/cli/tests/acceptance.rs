//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use twoweight::generate::random_space;
use twoweight::suite::{prepare, run_instance, summarize, Checks, Manifest, RandomBlock, Summary, DEFAULT_P, DEFAULT_PHI};
use twoweight_core::orlicz::{alpha_p, luxemburg_norm};
use twoweight_core::space::{build_space, SpaceSpec};
use twoweight_core::verify::{opnorm_lower_bound, weak_rhi_probe, SearchOptions, RHI_MAX_EXPONENT};
use twoweight_core::{LebesgueExponent, QuasiMetricSpace, TailIntegral, WeightVector, YoungFunction};

const SEED: u64 = 0x7e57_2026;

struct Verdict {
    pass: bool,
    detail: String,
}

fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn manifest(count: usize, checks: Checks) -> Manifest {
    Manifest {
        seed: SEED,
        instances: Vec::new(),
        random: Some(RandomBlock {
            count,
            n_min: 4,
            n_max: 32,
            p: DEFAULT_P.to_vec(),
            phi: DEFAULT_PHI.iter().map(|s| s.to_string()).collect(),
            snowflake_fraction: 0.25,
        }),
        checks,
    }
}

fn none() -> Checks {
    Checks {
        geometry: false,
        reductions: false,
        chain: false,
        ordering: false,
        rhi: false,
        cz: 0,
        multi_level: 0,
        ..Checks::default()
    }
}

fn suite(count: usize, checks: Checks) -> Summary {
    let m = manifest(count, checks);
    let instances: Vec<_> = prepare(&m)
        .expect("suite manifest is valid")
        .iter()
        .map(|inst| run_instance(inst, &m.checks).expect("suite instance runs"))
        .collect();
    summarize(&instances)
}

fn within(elapsed: Duration, limit_secs: u64) -> bool {
    elapsed <= Duration::from_secs(limit_secs)
}

fn reductions() -> Verdict {
    let s = suite(50, Checks { reductions: true, ..none() });
    Verdict {
        pass: s.instances == 50 && s.reduction_checks == 50 && s.reduction_failures == 0,
        detail: format!("{} identity checks, {} failures", s.reduction_checks, s.reduction_failures),
    }
}

fn chain() -> Verdict {
    let s = suite(50, Checks { chain: true, ..none() });
    Verdict {
        pass: s.chain_checks == 150 && s.chain_failures == 0,
        detail: format!(
            "{} chain checks, {} failures, max ratio to bound {:.3e}",
            s.chain_checks, s.chain_failures, s.max_chain_slack
        ),
    }
}

fn cz_single() -> Verdict {
    let s = suite(100, Checks { cz: 1, ..none() });
    Verdict {
        pass: s.cz_runs == 100 && s.cz_violations == 0,
        detail: format!("{} decompositions, {} violations", s.cz_runs, s.cz_violations),
    }
}

fn cz_multi() -> Verdict {
    let s = suite(100, Checks { multi_level: 1, ..none() });
    Verdict {
        pass: s.multi_level_runs == 100 && s.multi_level_violations == 0,
        detail: format!(
            "{} families, {} populated levels, {} violations",
            s.multi_level_runs, s.multi_level_levels, s.multi_level_violations
        ),
    }
}

fn random_field(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| if rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(-3.0f64..3.0).exp() })
        .collect()
}

fn random_ball(rng: &mut ChaCha8Rng, space: &QuasiMetricSpace) -> twoweight_core::Ball {
    let balls = space.canonical_balls();
    balls[rng.gen_range(0..balls.len())].ball
}

fn luxemburg_and_tails() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 5);
    let qs = [1.0, 1.5, 2.0, 3.0, 10.0];
    let mut worst: f64 = 0.0;
    for i in 0..200 {
        let n = rng.gen_range(2..=24);
        let (_, space) = random_space(&mut rng, n, 0.25);
        let f = random_field(&mut rng, space.len());
        let ball = random_ball(&mut rng, &space);
        let q = qs[i % qs.len()];
        let solved = luxemburg_norm(&space, &f, &ball, &YoungFunction::power(q).unwrap());
        let mass = space.mass();
        let members = space.ball_members(&ball);
        let mu: f64 = members.iter().map(|&y| mass[y]).sum();
        let closed = (members.iter().map(|&y| f[y].powf(q) * mass[y]).sum::<f64>() / mu).powf(1.0 / q);
        worst = worst.max(rel_diff(solved, closed));
    }
    let mut tails = 0;
    let mut tail_worst: f64 = 0.0;
    let mut divergent_ok = true;
    for &p in &[1.5, 2.0, 2.5, 3.0, 4.0] {
        let exp = LebesgueExponent::new(p).unwrap();
        for &frac in &[0.05, 0.3, 0.6, 0.9] {
            let s = 1.0 + frac * (p - 1.0);
            let want = 1.0 / (p - s);
            // The log-free power-log form takes the quadrature path.
            for phi in [YoungFunction::power(s).unwrap(), YoungFunction::power_log(s, 0.0).unwrap()] {
                match alpha_p(&phi, exp).value() {
                    Some(v) => tail_worst = tail_worst.max(rel_diff(v, want)),
                    None => tail_worst = f64::INFINITY,
                }
            }
            tails += 1;
        }
        for s in [p, p + 0.5] {
            divergent_ok &= alpha_p(&YoungFunction::power(s).unwrap(), exp) == TailIntegral::Divergent;
            divergent_ok &= alpha_p(&YoungFunction::power_log(s, 0.0).unwrap(), exp).is_divergent();
        }
    }
    Verdict {
        pass: worst <= 1e-9 && tails == 20 && tail_worst <= 1e-6 && divergent_ok,
        detail: format!(
            "200 norms, max rel diff {worst:.2e}; {tails} tail integrals, max rel diff {tail_worst:.2e}; divergence reported: {divergent_ok}"
        ),
    }
}

fn holder() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 6);
    let mut violations = 0;
    let mut tightest: f64 = 0.0;
    for i in 0..200 {
        let n = rng.gen_range(2..=24);
        let (_, space) = random_space(&mut rng, n, 0.25);
        let f = random_field(&mut rng, space.len());
        let g = random_field(&mut rng, space.len());
        let ball = random_ball(&mut rng, &space);
        let s = rng.gen_range(1.1..5.0);
        let phi = if i % 2 == 0 {
            YoungFunction::power(s).unwrap()
        } else {
            YoungFunction::power_log(s, rng.gen_range(0.0..3.0)).unwrap()
        };
        let bar = phi.conjugate().unwrap();
        let mass = space.mass();
        let members = space.ball_members(&ball);
        let mu: f64 = members.iter().map(|&y| mass[y]).sum();
        let lhs = members.iter().map(|&y| f[y] * g[y] * mass[y]).sum::<f64>() / mu;
        let rhs = 2.0 * luxemburg_norm(&space, &f, &ball, &phi) * luxemburg_norm(&space, &g, &ball, &bar);
        if lhs > rhs * (1.0 + 1e-9) {
            violations += 1;
        }
        if rhs > 0.0 {
            tightest = tightest.max(lhs / rhs);
        }
    }
    Verdict {
        pass: violations == 0,
        detail: format!("200 triples, {violations} violations, max lhs/rhs {tightest:.6}"),
    }
}

fn line4() -> QuasiMetricSpace {
    build_space(&SpaceSpec::line(4)).unwrap()
}

fn ordering() -> Verdict {
    let s = suite(50, Checks { ordering: true, ..none() });
    let space = line4();
    let one = WeightVector::ones(4);
    let p = LebesgueExponent::new(2.0).unwrap();
    let est = opnorm_lower_bound(&space, &one, &one, p, &SearchOptions::default()).unwrap();
    let target = (205.0f64 / 144.0).sqrt() - 1e-9;
    Verdict {
        pass: s.ordering_checks == 50 && s.ordering_failures == 0 && est.value >= target,
        detail: format!(
            "{} orderings, {} failures; line of 4 points: {:.12} >= {:.12}",
            s.ordering_checks, s.ordering_failures, est.value, target
        ),
    }
}

fn rhi() -> Verdict {
    let s = suite(50, Checks { rhi: true, ..none() });
    let mut constant_ok = true;
    let m = manifest(50, none());
    let mut spaces: Vec<QuasiMetricSpace> = prepare(&m).unwrap().into_iter().map(|i| i.space).collect();
    spaces.push(line4());
    for space in &spaces {
        let r = weak_rhi_probe(space, &WeightVector::ones(space.len())).unwrap();
        constant_ok &= r.exists && r.r_star == RHI_MAX_EXPONENT;
    }
    Verdict {
        pass: s.rhi_checks > 0 && s.rhi_failures == 0 && constant_ok,
        detail: format!(
            "{} positive weights probed, {} without an exponent; constant weight reaches r_max on {} spaces: {constant_ok}",
            s.rhi_checks,
            s.rhi_failures,
            spaces.len()
        ),
    }
}

fn geometry() -> Verdict {
    let s = suite(50, Checks { geometry: true, ..none() });
    Verdict {
        pass: s.instances == 50 && s.geometry_violations == 0,
        detail: format!("{} spaces, {} violations", s.instances, s.geometry_violations),
    }
}

fn determinism() -> Verdict {
    let data = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/suite.json");
    let dir = std::env::temp_dir();
    let run = |k: usize| {
        let out = dir.join(format!("twoweight-acceptance-{}-{k}.json", std::process::id()));
        let status = Command::new(env!("CARGO_BIN_EXE_twoweight"))
            .arg("verify")
            .arg("--manifest")
            .arg(&data)
            .arg("--out")
            .arg(&out)
            .status()
            .expect("binary runs");
        let bytes = std::fs::read(&out).unwrap_or_default();
        let _ = std::fs::remove_file(&out);
        (status.code(), bytes)
    };
    let (c1, b1) = run(1);
    let (c2, b2) = run(2);
    Verdict {
        pass: c1 == Some(0) && c2 == Some(0) && !b1.is_empty() && b1 == b2,
        detail: format!("exit codes {c1:?}/{c2:?}, {} bytes, identical: {}", b1.len(), b1 == b2),
    }
}

type Criterion = (u32, &'static str, u64, fn() -> Verdict);

const CRITERIA: [Criterion; 10] = [
    (1, "reduction identities", 120, reductions),
    (2, "explicit constant chain", 600, chain),
    (3, "single-level decomposition", 120, cz_single),
    (4, "multi-level disjointing", 180, cz_multi),
    (5, "Luxemburg oracle and tail integrals", 600, luxemburg_and_tails),
    (6, "generalized Hölder", 600, holder),
    (7, "testing constant below operator norm", 600, ordering),
    (8, "weak reverse Hölder probe", 600, rhi),
    (9, "dilation and engulfing", 600, geometry),
    (10, "byte-identical reports", 600, determinism),
];

fn main() -> ExitCode {
    let mut failures = 0;
    for (id, name, limit, check) in CRITERIA {
        let start = Instant::now();
        let verdict = check();
        let elapsed = start.elapsed();
        let pass = verdict.pass && within(elapsed, limit);
        failures += usize::from(!pass);
        println!(
            "{} criterion {id:>2} {name}: {} ({:.1}s, limit {limit}s)",
            if pass { "PASS" } else { "FAIL" },
            verdict.detail,
            elapsed.as_secs_f64()
        );
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}
