//! Calderón–Zygmund stopping-time selection and its multi-level refinement.
//!
//! For a level `λ`, every point `x` of the superlevel set `Ω_λ = {Mf > λ}` gets
//! the catalog ball of largest radius that contains `x` and has average above
//! `λ` (ties go to the lower center index). On a finite space the supremum of
//! admissible radii is attained by such a ball, so no ball through `x` with a
//! larger radius has average above `λ`. A greedy pass in decreasing radius then
//! keeps a pairwise disjoint subfamily whose `θ`-dilates cover `Ω_λ`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::maximal::{ball_averages, check_len, max_average};
use crate::numeric::le_rel;
use crate::space::{Ball, QuasiMetricSpace, SpaceProfile};

/// Hard cap on the number of levels in a multi-level family.
pub const MAX_LEVELS: usize = 1_000_000;

/// Structural constants driving the decompositions.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CZConfig {
    pub profile: SpaceProfile,
    /// `θ = 4κ² + κ`.
    pub theta: f64,
    /// Enlargement used by the stopping condition; default `κ²(4κ + 3)`.
    pub eta: f64,
    /// Level base of the multi-level family.
    pub a: f64,
    /// Accept `a` below `2(4θη)^D` in the multi-level decomposition.
    pub allow_small_a: bool,
}

impl CZConfig {
    pub fn new(profile: SpaceProfile) -> Result<Self> {
        let k = profile.kappa;
        let eta = k * k * (4.0 * k + 3.0);
        let mut config = CZConfig {
            profile,
            theta: 4.0 * k * k + k,
            eta,
            a: 0.0,
            allow_small_a: false,
        };
        config.a = config.default_a()?;
        Ok(config)
    }

    /// Replaces `η` and recomputes the default level base.
    pub fn with_eta(mut self, eta: f64) -> Result<Self> {
        if !(eta > 1.0) || !eta.is_finite() {
            return Err(Error::param("eta", "must be finite and > 1"));
        }
        self.eta = eta;
        self.a = self.default_a()?;
        Ok(self)
    }

    /// Overrides the level base; values below [`CZConfig::required_a`] are only
    /// accepted by the multi-level decomposition when `allow_small_a` is set.
    pub fn with_a(mut self, a: f64, allow_small_a: bool) -> Result<Self> {
        if !(a > 1.0) || !a.is_finite() {
            return Err(Error::param("a", "must be finite and > 1"));
        }
        self.a = a;
        self.allow_small_a = allow_small_a;
        Ok(self)
    }

    /// `(4θη)^D`, the constant of the disjointing bound.
    pub fn disjointing_constant(&self) -> f64 {
        libm::pow(4.0 * self.theta * self.eta, self.profile.d_mu)
    }

    /// `2(4θη)^D`, the smallest base giving `mu(B) <= 2 mu(E)`.
    pub fn required_a(&self) -> f64 {
        2.0 * self.disjointing_constant()
    }

    /// Smallest integer `>= max(2(4θη)^D, (2η)^D + 1)`.
    pub fn default_a(&self) -> Result<f64> {
        let separation = libm::pow(2.0 * self.eta, self.profile.d_mu) + 1.0;
        let a = libm::ceil(self.required_a().max(separation));
        if !a.is_finite() {
            return Err(Error::param("a", "default level base overflows"));
        }
        Ok(a)
    }
}

/// A selected ball with its member set, the point it was chosen for and its average.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SelectedBall {
    pub center: usize,
    pub radius: f64,
    pub members: Vec<usize>,
    pub anchor: usize,
    pub average: f64,
}

impl SelectedBall {
    pub fn ball(&self) -> Ball {
        Ball::new(self.center, self.radius)
    }
}

/// Output of a single-level decomposition.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CZDecomposition {
    pub base_ball: Ball,
    pub level: f64,
    /// `{x : Mf(x) > λ}`, sorted.
    pub omega: Vec<usize>,
    pub selected: Vec<SelectedBall>,
}

struct Prepared {
    maximal: Vec<f64>,
    averages: Vec<f64>,
}

fn prepare(space: &QuasiMetricSpace, f: &[f64]) -> Prepared {
    Prepared {
        maximal: max_average(space, f),
        averages: ball_averages(space, f),
    }
}

fn check_level(space: &QuasiMetricSpace, base: &Ball, f: &[f64], level: f64) -> Result<()> {
    if !(level > 0.0) || !level.is_finite() {
        return Err(Error::param("lambda", "level must be finite and positive"));
    }
    let mass = space.mass();
    let base_avg = space.integral(space.members(base), f) / space.measure(base);
    if level < base_avg {
        return Err(Error::LevelBelowBaseAverage {
            level,
            average: base_avg,
        });
    }
    // Balls large enough to hold every point all share the global average; if it
    // exceeds the level the admissible radii are unbounded.
    let global = f.iter().zip(mass).map(|(v, m)| v * m).sum::<f64>() / space.total_mass();
    if level < global {
        return Err(Error::LevelBelowGlobalAverage { level, average: global });
    }
    Ok(())
}

fn decompose_prepared(space: &QuasiMetricSpace, base: &Ball, prep: &Prepared, level: f64) -> CZDecomposition {
    let n = space.len();
    let catalog = space.canonical_balls();
    let omega: Vec<usize> = (0..n).filter(|&x| prep.maximal[x] > level).collect();

    // Largest admissible radius through each point; the catalog is sorted by
    // center so a strict comparison keeps the lowest center on ties.
    let mut best: Vec<Option<usize>> = vec![None; n];
    for (j, cb) in catalog.iter().enumerate() {
        if prep.averages[j] <= level {
            continue;
        }
        for &x in space.catalog_members(cb) {
            let replace = match best[x] {
                None => true,
                Some(k) => cb.ball.radius > catalog[k].ball.radius,
            };
            if replace {
                best[x] = Some(j);
            }
        }
    }

    let mut candidates: Vec<(usize, usize)> = omega
        .iter()
        .map(|&x| (best[x].expect("points of omega have an admissible ball"), x))
        .collect();
    candidates.sort_by(|a, b| {
        let (ba, bb) = (&catalog[a.0].ball, &catalog[b.0].ball);
        bb.radius
            .total_cmp(&ba.radius)
            .then(ba.center.cmp(&bb.center))
            .then(a.1.cmp(&b.1))
    });
    candidates.dedup_by_key(|c| c.0);

    let mut taken = vec![false; n];
    let mut selected = Vec::new();
    for (j, anchor) in candidates {
        let members = space.catalog_members(&catalog[j]);
        if members.iter().any(|&y| taken[y]) {
            continue;
        }
        for &y in members {
            taken[y] = true;
        }
        let mut sorted = members.to_vec();
        sorted.sort_unstable();
        selected.push(SelectedBall {
            center: catalog[j].ball.center,
            radius: catalog[j].ball.radius,
            members: sorted,
            anchor,
            average: prep.averages[j],
        });
    }

    CZDecomposition {
        base_ball: *base,
        level,
        omega,
        selected,
    }
}

/// Single-level decomposition at `lambda`.
///
/// Requires `lambda >= avg_{base} f` and `lambda >= avg_S f`; the latter keeps
/// the admissible radii bounded.
pub fn cz_decompose(
    space: &QuasiMetricSpace,
    base_ball: &Ball,
    f: &[f64],
    lambda: f64,
    _config: &CZConfig,
) -> Result<CZDecomposition> {
    check_len(space, f, "f")?;
    check_level(space, base_ball, f, lambda)?;
    Ok(decompose_prepared(space, base_ball, &prepare(space, f), lambda))
}

/// A failed property of a single-level decomposition.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum CzViolation {
    Overlap { first: usize, second: usize },
    OutsideLevelSet { ball: usize, point: usize },
    Uncovered { point: usize },
    AverageNotAbove { ball: usize, average: f64 },
    EnlargedAverageAbove { ball: usize, enclosing: Ball, average: f64 },
    CoverMeasure { omega: f64, dilated: f64, bound: f64 },
}

/// Outcome of [`verify_cz_properties`].
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CzReport {
    pub violations: Vec<CzViolation>,
    /// Enclosing balls whose undilated average exceeds the level (recorded only).
    pub undilated_exceedances: usize,
}

impl CzReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

fn direct_average(space: &QuasiMetricSpace, ball: &Ball, f: &[f64]) -> f64 {
    let mass = space.mass();
    let (mut num, mut den) = (0.0, 0.0);
    for y in 0..space.len() {
        if space.contains(ball, y) {
            num += f[y] * mass[y];
            den += mass[y];
        }
    }
    num / den
}

/// Re-checks the selection properties by exhaustive enumeration:
/// disjointness, `∪B_i ⊆ Ω_λ ⊆ ∪θB_i`, `avg_{B_i} f > λ`, and
/// `avg_{ηB'} f <= λ` for every catalog ball `B' ⊇ B_i` with `r(B') >= η r(B_i)`.
pub fn verify_cz_properties(
    space: &QuasiMetricSpace,
    dec: &CZDecomposition,
    f: &[f64],
    config: &CZConfig,
) -> CzReport {
    let n = space.len();
    let lambda = dec.level;
    let mut report = CzReport::default();
    let mass = space.mass();

    // Level set by direct enumeration over balls containing each point.
    let mut in_omega = vec![false; n];
    for cb in space.canonical_balls() {
        let avg = direct_average(space, &cb.ball, f);
        if avg > lambda {
            for y in 0..n {
                if space.contains(&cb.ball, y) {
                    in_omega[y] = true;
                }
            }
        }
    }

    let mut owner: Vec<Option<usize>> = vec![None; n];
    for (i, b) in dec.selected.iter().enumerate() {
        for &y in &b.members {
            if let Some(j) = owner[y] {
                report.violations.push(CzViolation::Overlap { first: j, second: i });
            }
            owner[y] = Some(i);
            if !in_omega[y] {
                report.violations.push(CzViolation::OutsideLevelSet { ball: i, point: y });
            }
        }
        let avg = direct_average(space, &b.ball(), f);
        if !(avg > lambda) {
            report.violations.push(CzViolation::AverageNotAbove { ball: i, average: avg });
        }
    }

    let mut omega_measure = 0.0;
    for x in (0..n).filter(|&x| in_omega[x]) {
        omega_measure += mass[x];
        let covered = dec
            .selected
            .iter()
            .any(|b| space.contains(&b.ball().scaled(config.theta), x));
        if !covered {
            report.violations.push(CzViolation::Uncovered { point: x });
        }
    }

    let dilated: f64 = dec
        .selected
        .iter()
        .map(|b| space.measure(&b.ball().scaled(config.theta)))
        .sum();
    let selected_measure: f64 = dec.selected.iter().map(|b| space.measure(&b.ball())).sum();
    let bound = libm::pow(2.0 * config.theta, config.profile.d_mu) * selected_measure;
    if !(le_rel(omega_measure, dilated, 1e-12) && le_rel(dilated, bound, 1e-12)) {
        report.violations.push(CzViolation::CoverMeasure {
            omega: omega_measure,
            dilated,
            bound,
        });
    }

    for (i, b) in dec.selected.iter().enumerate() {
        for cb in space.canonical_balls() {
            if cb.ball.radius < config.eta * b.radius {
                continue;
            }
            if !b.members.iter().all(|&y| space.contains(&cb.ball, y)) {
                continue;
            }
            let enlarged = direct_average(space, &cb.ball.scaled(config.eta), f);
            if !le_rel(enlarged, lambda, 1e-12) {
                report.violations.push(CzViolation::EnlargedAverageAbove {
                    ball: i,
                    enclosing: cb.ball,
                    average: enlarged,
                });
            }
            if direct_average(space, &cb.ball, f) > lambda {
                report.undilated_exceedances += 1;
            }
        }
    }
    report
}

/// Decomposition at level `a^k` with the disjoint pieces `E_i^k = B_i^k \ Ω_{k+1}`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Level {
    pub k: i64,
    pub decomposition: CZDecomposition,
    /// `E_i^k`, aligned with `decomposition.selected`.
    pub pieces: Vec<Vec<usize>>,
}

/// Multi-level family over the levels `a^k`, `k >= k0`, until the level set empties.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct LevelFamily {
    pub base_ball: Ball,
    pub a: f64,
    /// `a^{k0-1} < avg_B f <= a^{k0}`.
    pub k0: i64,
    pub base_average: f64,
    pub levels: Vec<Level>,
}

fn level_power(a: f64, k: i64) -> f64 {
    libm::pow(a, k as f64)
}

/// Integer `k0` with `a^{k0-1} < avg <= a^{k0}`.
pub fn starting_level(a: f64, avg: f64) -> i64 {
    let mut k = libm::ceil(libm::log(avg) / libm::log(a)) as i64;
    while level_power(a, k - 1) >= avg {
        k -= 1;
    }
    while level_power(a, k) < avg {
        k += 1;
    }
    k
}

/// Runs the single-level selection at every level `a^k`, `k >= k0`.
pub fn multi_level_decompose(
    space: &QuasiMetricSpace,
    base_ball: &Ball,
    f: &[f64],
    config: &CZConfig,
) -> Result<LevelFamily> {
    check_len(space, f, "f")?;
    let required = config.required_a();
    if !config.allow_small_a && config.a < required {
        return Err(Error::LevelBaseTooSmall { a: config.a, required });
    }
    let base_average = space.integral(space.members(base_ball), f) / space.measure(base_ball);
    if !(base_average > 0.0) {
        return Err(Error::IdenticallyZero { what: "f on the base ball" });
    }
    let k0 = starting_level(config.a, base_average);
    let prep = prepare(space, f);

    let mut levels = Vec::new();
    let mut k = k0;
    loop {
        if levels.len() >= MAX_LEVELS {
            return Err(Error::LevelCapExceeded(MAX_LEVELS));
        }
        let level = level_power(config.a, k);
        if !prep.maximal.iter().any(|&m| m > level) {
            break;
        }
        check_level(space, base_ball, f, level)?;
        let decomposition = decompose_prepared(space, base_ball, &prep, level);
        let next = level_power(config.a, k + 1);
        let pieces = decomposition
            .selected
            .iter()
            .map(|b| b.members.iter().copied().filter(|&y| !(prep.maximal[y] > next)).collect())
            .collect();
        levels.push(Level {
            k,
            decomposition,
            pieces,
        });
        k += 1;
    }

    Ok(LevelFamily {
        base_ball: *base_ball,
        a: config.a,
        k0,
        base_average,
        levels,
    })
}

/// A failed property of a multi-level family.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum DisjointingViolation {
    StartingLevel { k0: i64, average: f64 },
    NextLevelShare { k: i64, ball: usize, share: f64, bound: f64 },
    HalfMeasure { k: i64, ball: usize, ball_measure: f64, piece_measure: f64 },
    PieceOverlap { point: usize },
}

/// Checks the starting-level bracket, `mu(B_i^k ∩ Ω_{k+1}) < (4θη)^D / a · mu(B_i^k)`,
/// `mu(B_i^k) <= 2 mu(E_i^k)` when `a >= 2(4θη)^D`, and disjointness of all pieces.
pub fn verify_disjointing(
    space: &QuasiMetricSpace,
    family: &LevelFamily,
    f: &[f64],
    config: &CZConfig,
) -> Vec<DisjointingViolation> {
    let mut out = Vec::new();
    let a = family.a;
    let avg = family.base_average;
    if !(level_power(a, family.k0 - 1) < avg && avg <= level_power(a, family.k0)) {
        out.push(DisjointingViolation::StartingLevel {
            k0: family.k0,
            average: avg,
        });
    }
    let maximal = max_average(space, f);
    let mass = space.mass();
    let constant = config.disjointing_constant();
    let half_applies = a >= config.required_a();
    let mut seen = vec![false; space.len()];
    for level in &family.levels {
        let next = level_power(a, level.k + 1);
        for (i, (b, piece)) in level.decomposition.selected.iter().zip(&level.pieces).enumerate() {
            let ball_measure: f64 = b.members.iter().map(|&y| mass[y]).sum();
            let share: f64 = b
                .members
                .iter()
                .filter(|&&y| maximal[y] > next)
                .map(|&y| mass[y])
                .sum();
            let bound = constant / a * ball_measure;
            if !(share < bound) {
                out.push(DisjointingViolation::NextLevelShare {
                    k: level.k,
                    ball: i,
                    share,
                    bound,
                });
            }
            let piece_measure: f64 = piece.iter().map(|&y| mass[y]).sum();
            if half_applies && !(ball_measure <= 2.0 * piece_measure) {
                out.push(DisjointingViolation::HalfMeasure {
                    k: level.k,
                    ball: i,
                    ball_measure,
                    piece_measure,
                });
            }
            for &y in piece {
                if seen[y] {
                    out.push(DisjointingViolation::PieceOverlap { point: y });
                }
                seen[y] = true;
            }
        }
    }
    out
}
