//! Inequality harness: the explicit two-weight chain, operator-norm lower
//! bounds, reduction identities and report-only probes.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::czdecomp::CZConfig;
use crate::error::{Error, Result};
use crate::maximal::{check_len, max_average};
use crate::numeric::{rel_diff, TOLERANCES};
use crate::orlicz::{alpha_p, LebesgueExponent, TailIntegral, YoungFunction};
use crate::space::{QuasiMetricSpace, SpaceProfile};
use crate::weights::{
    ainfty_fujii_wilson, bump_ap, sawyer_constant, two_weight_ap, wp_constant, WeightVector,
};

/// Sawyer constant against the explicit bound `4 a^p (2θ)^{(p+1)D} [w,σ,Φ]_{A_p} [σ,Φ̄]_{W_p}`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ChainReport {
    pub profile: SpaceProfile,
    pub p: f64,
    pub phi: YoungFunction,
    pub a: f64,
    pub theta: f64,
    /// `[w,σ]_{S_p}^p`.
    pub sawyer_p: f64,
    pub bump: f64,
    pub wp: f64,
    /// Natural logarithm of the bound; the bound itself may overflow.
    pub ln_bound: f64,
    pub slack: f64,
    pub pass: bool,
}

/// Evaluates both sides of the two-weight chain with the configured level base.
pub fn verify_main_chain(
    space: &QuasiMetricSpace,
    w: &WeightVector,
    sigma: &WeightVector,
    p: LebesgueExponent,
    phi: &YoungFunction,
    config: &CZConfig,
) -> Result<ChainReport> {
    let phi_bar = phi.conjugate()?;
    let sawyer_p = libm::pow(sawyer_constant(space, w, sigma, p)?, p.p());
    let bump = bump_ap(space, w, sigma, p, phi)?;
    let wp = wp_constant(space, sigma, p, &phi_bar)?;
    let pp = p.p();
    let d = config.profile.d_mu;
    let ln_bound = libm::log(4.0)
        + pp * libm::log(config.a)
        + (pp + 1.0) * d * libm::log(2.0 * config.theta)
        + libm::log(bump)
        + libm::log(wp);
    let slack = libm::exp(libm::log(sawyer_p) - ln_bound);
    Ok(ChainReport {
        profile: config.profile,
        p: pp,
        phi: phi.clone(),
        a: config.a,
        theta: config.theta,
        sawyer_p,
        bump,
        wp,
        ln_bound,
        slack,
        pass: slack <= 1.0 + TOLERANCES.check_rel,
    })
}

/// Test-function families searched by [`opnorm_lower_bound`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Strategy {
    /// Indicators of every canonical ball plus the constant function.
    Indicators,
    Random,
    CoordinateAscent,
}

/// Search configuration; indicators are always evaluated.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SearchOptions {
    pub strategies: Vec<Strategy>,
    pub random_trials: usize,
    pub seed: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            strategies: vec![Strategy::Indicators],
            random_trials: 64,
            seed: 0,
        }
    }
}

impl SearchOptions {
    pub fn all(seed: u64) -> Self {
        SearchOptions {
            strategies: vec![Strategy::Indicators, Strategy::Random, Strategy::CoordinateAscent],
            random_trials: 64,
            seed,
        }
    }

    fn uses(&self, s: Strategy) -> bool {
        s == Strategy::Indicators || self.strategies.contains(&s)
    }
}

/// Best ratio `||M(fσ)||_{L^p(w)} / ||f||_{L^p(σ)}` found, with its maximizer.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct OpNormEstimate {
    pub value: f64,
    pub witness: Vec<f64>,
    pub strategies: Vec<Strategy>,
    pub evaluations: usize,
}

/// `||M(fσ)||_{L^p(w)} / ||f||_{L^p(σ)}`, or `None` when the denominator vanishes.
pub fn opnorm_ratio(
    space: &QuasiMetricSpace,
    w: &[f64],
    sigma: &[f64],
    p: LebesgueExponent,
    f: &[f64],
) -> Option<f64> {
    let p = p.p();
    let mass = space.mass();
    let den: f64 = (0..space.len())
        .map(|y| libm::pow(f[y], p) * sigma[y] * mass[y])
        .sum();
    if !(den > 0.0) {
        return None;
    }
    let fs: Vec<f64> = f.iter().zip(sigma).map(|(a, b)| a * b).collect();
    let m = max_average(space, &fs);
    let num: f64 = (0..space.len()).map(|y| libm::pow(m[y], p) * w[y] * mass[y]).sum();
    Some(libm::pow(num / den, 1.0 / p))
}

struct Search<'a> {
    space: &'a QuasiMetricSpace,
    w: &'a [f64],
    sigma: &'a [f64],
    p: LebesgueExponent,
    best: f64,
    witness: Vec<f64>,
    evaluations: usize,
}

impl Search<'_> {
    fn eval(&mut self, f: &[f64]) -> Option<f64> {
        self.evaluations += 1;
        opnorm_ratio(self.space, self.w, self.sigma, self.p, f)
    }

    fn offer(&mut self, f: &[f64]) {
        if let Some(r) = self.eval(f) {
            if r > self.best {
                self.best = r;
                self.witness = f.to_vec();
            }
        }
    }

    fn coordinate_ascent(&mut self) {
        let n = self.space.len();
        let mut f = self.witness.clone();
        let mut step = 0.5 * f.iter().fold(0.0f64, |m, &v| m.max(v));
        let floor = 1e-3 * step;
        for _ in 0..200 {
            if step < floor {
                break;
            }
            let mut improved = false;
            for y in 0..n {
                let current = f[y];
                for candidate in [2.0 * current, 0.5 * current, current + step, (current - step).max(0.0)] {
                    if candidate == current {
                        continue;
                    }
                    f[y] = candidate;
                    match self.eval(&f) {
                        Some(r) if r > self.best * (1.0 + 1e-6) => {
                            self.best = r;
                            self.witness = f.clone();
                            improved = true;
                            break;
                        }
                        _ => f[y] = current,
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
    }
}

/// Certified lower bound for the two-weight operator norm of `M(· σ)`.
pub fn opnorm_lower_bound(
    space: &QuasiMetricSpace,
    w: &WeightVector,
    sigma: &WeightVector,
    p: LebesgueExponent,
    options: &SearchOptions,
) -> Result<OpNormEstimate> {
    check_len(space, w, "w")?;
    check_len(space, sigma, "sigma")?;
    let n = space.len();
    let mut search = Search {
        space,
        w,
        sigma,
        p,
        best: 0.0,
        witness: vec![1.0; n],
        evaluations: 0,
    };

    search.offer(&vec![1.0; n]);
    let mut f = vec![0.0; n];
    for cb in space.canonical_balls() {
        f.iter_mut().for_each(|v| *v = 0.0);
        for &y in space.catalog_members(cb) {
            f[y] = 1.0;
        }
        search.offer(&f);
    }

    if options.uses(Strategy::Random) {
        let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
        for _ in 0..options.random_trials {
            let u: f64 = rng.gen();
            // Mix dense fields with sparse ones concentrated near a random ball.
            if u < 0.5 {
                f.iter_mut().for_each(|v| *v = libm::pow(rng.gen::<f64>(), 3.0));
            } else {
                let balls = space.canonical_balls();
                let cb = &balls[rng.gen_range(0..balls.len())];
                f.iter_mut().for_each(|v| *v = 0.0);
                for &y in space.catalog_members(cb) {
                    f[y] = rng.gen::<f64>();
                }
            }
            search.offer(&f);
        }
    }

    if options.uses(Strategy::CoordinateAscent) && search.best > 0.0 {
        search.coordinate_ascent();
    }

    let mut strategies = vec![Strategy::Indicators];
    for s in [Strategy::Random, Strategy::CoordinateAscent] {
        if options.uses(s) {
            strategies.push(s);
        }
    }
    if search.best == 0.0 {
        return Err(Error::IdenticallyZero { what: "sigma" });
    }
    Ok(OpNormEstimate {
        value: search.best,
        witness: search.witness,
        strategies,
        evaluations: search.evaluations,
    })
}

/// Both sides of the two reduction identities.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ReductionReport {
    /// Bump constant with `Φ = Power(p')`.
    pub bump_power: f64,
    pub two_weight_ap: f64,
    /// `W_p` constant of `σ` with `Φ = Power(p)`.
    pub wp_power: f64,
    /// Fujii–Wilson constant of `σ`.
    pub ainfty_fw: f64,
    pub bump_rel_diff: f64,
    pub wp_rel_diff: f64,
    pub pass: bool,
}

pub fn verify_reductions(
    space: &QuasiMetricSpace,
    w: &WeightVector,
    sigma: &WeightVector,
    p: LebesgueExponent,
) -> Result<ReductionReport> {
    let bump_power = bump_ap(space, w, sigma, p, &YoungFunction::power(p.conjugate())?)?;
    let two = two_weight_ap(space, w, sigma, p)?;
    let wp_power = wp_constant(space, sigma, p, &YoungFunction::power(p.p())?)?;
    let fw = ainfty_fujii_wilson(space, sigma)?;
    let bump_rel_diff = rel_diff(bump_power, two);
    let wp_rel_diff = rel_diff(wp_power, fw);
    let tol = TOLERANCES.check_rel;
    Ok(ReductionReport {
        bump_power,
        two_weight_ap: two,
        wp_power,
        ainfty_fw: fw,
        bump_rel_diff,
        wp_rel_diff,
        pass: bump_rel_diff <= tol && wp_rel_diff <= tol,
    })
}

/// Unweighted operator-norm estimate at one exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct UnweightedRatio {
    pub q: f64,
    pub ratio: f64,
    pub q_dual: f64,
}

/// Report-only probe of the norm/Sawyer equivalence and the unweighted norm.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct MoenProbe {
    pub opnorm: f64,
    pub sawyer: f64,
    pub p_dual: f64,
    /// `opnorm / (p' sawyer)`.
    pub ratio: f64,
    pub unweighted: Vec<UnweightedRatio>,
}

/// Exponents probed for the unweighted operator norm.
pub const UNWEIGHTED_EXPONENTS: [f64; 4] = [1.25, 1.5, 2.0, 4.0];

pub fn probe_moen_and_norm(
    space: &QuasiMetricSpace,
    w: &WeightVector,
    sigma: &WeightVector,
    p: LebesgueExponent,
    options: &SearchOptions,
) -> Result<MoenProbe> {
    let opnorm = opnorm_lower_bound(space, w, sigma, p, options)?.value;
    let sawyer = sawyer_constant(space, w, sigma, p)?;
    let one = WeightVector::ones(space.len());
    let mut unweighted = Vec::with_capacity(UNWEIGHTED_EXPONENTS.len());
    for q in UNWEIGHTED_EXPONENTS {
        let q = LebesgueExponent::new(q)?;
        unweighted.push(UnweightedRatio {
            q: q.p(),
            ratio: opnorm_lower_bound(space, &one, &one, q, options)?.value,
            q_dual: q.conjugate(),
        });
    }
    Ok(MoenProbe {
        opnorm,
        sawyer,
        p_dual: p.conjugate(),
        ratio: opnorm / (p.conjugate() * sawyer),
        unweighted,
    })
}

/// Upper end of the reverse Hölder exponent search.
pub const RHI_MAX_EXPONENT: f64 = 64.0;

/// Largest exponent found for the weak reverse Hölder inequality.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct RHIProbeReport {
    pub r_star: f64,
    pub r_max: f64,
    /// `2(4κ)^D`.
    pub factor: f64,
    pub ainfty_fw: f64,
    /// `1 / ((r_star - 1) [w]_{A_∞})`.
    pub tau_estimate: f64,
    pub exists: bool,
}

struct RhiBall {
    members: Vec<usize>,
    measure: f64,
    rhs: f64,
}

fn rhi_holds(space: &QuasiMetricSpace, w: &[f64], balls: &[RhiBall], r: f64) -> bool {
    let mass = space.mass();
    balls.iter().all(|b| {
        let peak = b.members.iter().fold(0.0f64, |m, &y| m.max(w[y]));
        let mean: f64 = b
            .members
            .iter()
            .map(|&y| libm::pow(w[y] / peak, r) * mass[y])
            .sum::<f64>()
            / b.measure;
        peak * libm::pow(mean, 1.0 / r) <= b.rhs
    })
}

/// Bisection on `r ∈ (1, 64]` for `(avg_B w^r)^{1/r} <= 2(4κ)^D avg_{2κB} w` over every canonical ball.
pub fn weak_rhi_probe(space: &QuasiMetricSpace, w: &WeightVector) -> Result<RHIProbeReport> {
    check_len(space, w, "w")?;
    if let Some(index) = w.iter().position(|&v| v == 0.0) {
        return Err(Error::ZeroWeight {
            what: "reverse Hölder probe",
            index,
        });
    }
    let profile = space.profile();
    let kappa = profile.kappa;
    let factor = 2.0 * libm::pow(4.0 * kappa, profile.d_mu);
    let mass = space.mass();
    let balls: Vec<RhiBall> = space
        .canonical_balls()
        .iter()
        .map(|cb| {
            let big = cb.ball.scaled(2.0 * kappa);
            let wide = space.members(&big);
            let avg = wide.iter().map(|&y| w[y] * mass[y]).sum::<f64>() / space.measure(&big);
            RhiBall {
                members: space.catalog_members(cb).to_vec(),
                measure: cb.measure,
                rhs: factor * avg,
            }
        })
        .collect();

    let (mut lo, mut hi) = (1.0, RHI_MAX_EXPONENT);
    let exists = rhi_holds(space, w, &balls, 1.0);
    if rhi_holds(space, w, &balls, hi) {
        lo = hi;
    } else {
        while hi - lo > 1e-10 * hi {
            let mid = 0.5 * (lo + hi);
            if rhi_holds(space, w, &balls, mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    let fw = ainfty_fujii_wilson(space, w)?;
    Ok(RHIProbeReport {
        r_star: lo,
        r_max: RHI_MAX_EXPONENT,
        factor,
        ainfty_fw: fw,
        tau_estimate: 1.0 / ((lo - 1.0) * fw),
        exists: exists && lo > 1.0,
    })
}

/// Bump constant with `Φ(t) = t^{p'r}` and the tail integral of its conjugate.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct AppendixBumpReport {
    pub r: f64,
    pub phi_exponent: f64,
    pub conjugate_exponent: f64,
    pub bump: f64,
    pub alpha: TailIntegral,
    /// `bump^{1/p} alpha^{1/p}`; the structural factor is left out.
    pub certificate: Option<f64>,
}

pub fn verify_appendix_bump(
    space: &QuasiMetricSpace,
    w: &WeightVector,
    sigma: &WeightVector,
    p: LebesgueExponent,
    r: f64,
) -> Result<AppendixBumpReport> {
    if !(r > 1.0) || !r.is_finite() {
        return Err(Error::param("r", "must be finite and > 1"));
    }
    let phi = YoungFunction::power(p.conjugate() * r)?;
    let conj = phi.conjugate()?;
    let bump = bump_ap(space, w, sigma, p, &phi)?;
    let alpha = alpha_p(&conj, p);
    let certificate = alpha
        .value()
        .map(|a| libm::pow(bump, 1.0 / p.p()) * libm::pow(a, 1.0 / p.p()));
    Ok(AppendixBumpReport {
        r,
        phi_exponent: phi.leading_exponent(),
        conjugate_exponent: conj.leading_exponent(),
        bump,
        alpha,
        certificate,
    })
}
