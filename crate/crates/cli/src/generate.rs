//! Seeded random instances. Generated specs are returned in their file form so
//! reports can carry them verbatim for replay.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use twoweight_core::space::QuasiMetricSpace;
use twoweight_core::{Ball, Metric};

use crate::input::{SpaceFile, WeightFile, WeightGenerator};

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

fn random_mass(rng: &mut ChaCha8Rng, n: usize) -> Option<Vec<f64>> {
    if rng.gen_bool(0.5) {
        None
    } else {
        Some((0..n).map(|_| log_uniform(rng, 0.25, 4.0)).collect())
    }
}

fn random_metric(rng: &mut ChaCha8Rng) -> Metric {
    *[Metric::L1, Metric::L2, Metric::Linf].choose(rng).unwrap()
}

fn lattice_points(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<f64>> {
    let k = ((2 * n) as f64).sqrt().ceil() as usize + 1;
    let mut cells: Vec<(usize, usize)> = (0..k).flat_map(|i| (0..k).map(move |j| (i, j))).collect();
    cells.shuffle(rng);
    cells.truncate(n);
    cells.sort_unstable();
    cells.into_iter().map(|(i, j)| vec![i as f64, j as f64]).collect()
}

fn real_points(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..dim).map(|_| rng.gen_range(0.0..n as f64)).collect())
        .collect()
}

/// A space with `n` points: a random line, an integer lattice (many distance
/// ties), scattered plane points, or a snowflaked version of one of these.
pub fn random_space(rng: &mut ChaCha8Rng, n: usize, snowflake_fraction: f64) -> (SpaceFile, QuasiMetricSpace) {
    loop {
        let points = match rng.gen_range(0..3) {
            0 => real_points(rng, n, 1),
            1 => lattice_points(rng, n),
            _ => real_points(rng, n, 2),
        };
        let metric = if points[0].len() == 1 { Metric::L1 } else { random_metric(rng) };
        let snowflake = if rng.gen_bool(snowflake_fraction) {
            Some(rng.gen_range(1.2..2.0))
        } else {
            None
        };
        let file = SpaceFile::Points {
            points,
            metric,
            mass: random_mass(rng, n),
            snowflake,
        };
        if let Ok(space) = file.build() {
            return (file, space);
        }
    }
}

/// Strictly positive weight: scattered values, a power of the distance to a
/// point, a two-valued pattern, or the constant weight.
pub fn random_weight(rng: &mut ChaCha8Rng, space: &QuasiMetricSpace) -> WeightFile {
    let n = space.len();
    match rng.gen_range(0..8) {
        0..=2 => WeightFile::Values((0..n).map(|_| log_uniform(rng, 1e-2, 1e2)).collect()),
        3..=4 => WeightFile::Generator(WeightGenerator::Power {
            alpha: rng.gen_range(-1.5..2.5),
            center: rng.gen_range(0..n),
            offset: rng.gen_range(0.5..2.0),
        }),
        5..=6 => {
            let k = *[4.0, 64.0].choose(rng).unwrap();
            WeightFile::Values((0..n).map(|_| if rng.gen_bool(0.5) { 1.0 } else { k }).collect())
        }
        _ => WeightFile::Generator(WeightGenerator::Ones),
    }
}

fn random_ball(rng: &mut ChaCha8Rng, space: &QuasiMetricSpace) -> Ball {
    let balls = space.canonical_balls();
    balls[rng.gen_range(0..balls.len())].ball
}

fn average(space: &QuasiMetricSpace, f: &[f64], members: &[usize]) -> f64 {
    let m = space.mass();
    members.iter().map(|&y| f[y] * m[y]).sum::<f64>() / members.iter().map(|&y| m[y]).sum::<f64>()
}

/// Field, base ball and an admissible level for the single-level selection.
#[derive(Debug, Clone)]
pub struct CzInstance {
    pub f: Vec<f64>,
    pub base: Ball,
    pub lambda: f64,
}

/// Sparse nonnegative field with a level between the admissibility floor and the peak.
pub fn random_cz(rng: &mut ChaCha8Rng, space: &QuasiMetricSpace) -> CzInstance {
    let n = space.len();
    loop {
        let f: Vec<f64> = (0..n)
            .map(|_| match rng.gen_range(0..6) {
                0..=1 => 0.0,
                2..=4 => rng.gen_range(0.0..10.0),
                _ => log_uniform(rng, 10.0, 1e4),
            })
            .collect();
        let base = random_ball(rng, space);
        let all: Vec<usize> = (0..n).collect();
        let floor = average(space, &f, &space.ball_members(&base)).max(average(space, &f, &all)) * (1.0 + 1e-12);
        let peak = f.iter().cloned().fold(0.0, f64::max);
        let lambda = floor + rng.gen::<f64>() * (peak - floor).max(0.0);
        if lambda > 0.0 {
            return CzInstance { f, base, lambda };
        }
    }
}

/// Field supported on a random base ball with values spread over the levels
/// `a^0 .. a^3`, so that several stopping levels are populated.
pub fn random_multilevel(rng: &mut ChaCha8Rng, space: &QuasiMetricSpace, a: f64) -> (Vec<f64>, Ball) {
    let base = random_ball(rng, space);
    let mut f = vec![0.0; space.len()];
    for y in space.ball_members(&base) {
        let level = match rng.gen_range(0..8) {
            0..=3 => 0,
            4..=5 => 1,
            6 => 2,
            _ => 3,
        };
        f[y] = rng.gen_range(0.5..10.0) * a.powi(level);
    }
    (f, base)
}
