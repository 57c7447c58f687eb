//! Manifest-driven verification suites.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use twoweight_core::czdecomp::{
    cz_decompose, multi_level_decompose, verify_cz_properties, verify_disjointing, CzViolation,
    DisjointingViolation,
};
use twoweight_core::space::{check_dilation_bound, check_engulfing};
use twoweight_core::verify::{
    opnorm_lower_bound, probe_moen_and_norm, verify_appendix_bump, verify_main_chain, verify_reductions,
    weak_rhi_probe, AppendixBumpReport, ChainReport, MoenProbe, ReductionReport, RHIProbeReport,
    SearchOptions, Strategy,
};
use twoweight_core::weights::sawyer_constant;
use twoweight_core::{Ball, CZConfig, LebesgueExponent, QuasiMetricSpace, SpaceProfile, WeightVector};

use crate::generate::{random_cz, random_multilevel, random_space, random_weight};
use crate::input::{load_phi, SpaceFile, WeightFile};
use crate::{Header, InputError};

/// Exponents and Young functions used when a manifest does not list its own.
pub const DEFAULT_P: [f64; 5] = [1.2, 1.5, 2.0, 3.0, 4.0];
pub const DEFAULT_PHI: [&str; 3] = ["power:p'", "power:2p'", "powerlog:p':1"];

/// Dilation factors probed by the geometry check.
pub const DILATIONS: [f64; 5] = [1.0, 1.5, 2.0, 3.0, 7.0];

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub instances: Vec<InstanceSpec>,
    #[serde(default)]
    pub random: Option<RandomBlock>,
    #[serde(default)]
    pub checks: Checks,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    #[serde(default)]
    pub name: Option<String>,
    pub space: SpaceFile,
    pub w: WeightFile,
    pub sigma: WeightFile,
    #[serde(default = "default_p")]
    pub p: Vec<f64>,
    #[serde(default = "default_phi")]
    pub phi: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomBlock {
    pub count: usize,
    #[serde(default = "default_n_min")]
    pub n_min: usize,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    /// Instance `i` uses `p[i % len]`.
    #[serde(default = "default_p")]
    pub p: Vec<f64>,
    #[serde(default = "default_phi")]
    pub phi: Vec<String>,
    #[serde(default = "default_snowflake")]
    pub snowflake_fraction: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checks {
    #[serde(default = "yes")]
    pub geometry: bool,
    #[serde(default = "yes")]
    pub reductions: bool,
    #[serde(default = "yes")]
    pub chain: bool,
    #[serde(default = "yes")]
    pub ordering: bool,
    #[serde(default = "yes")]
    pub rhi: bool,
    /// Random single-level decompositions per instance.
    #[serde(default = "one")]
    pub cz: usize,
    /// Random multi-level families per instance, at the default level base.
    #[serde(default = "one")]
    pub multi_level: usize,
    #[serde(default)]
    pub moen: bool,
    #[serde(default)]
    pub appendix_r: Vec<f64>,
    #[serde(default = "default_strategies")]
    pub strategies: Vec<Strategy>,
}

impl Default for Checks {
    fn default() -> Self {
        Checks {
            geometry: true,
            reductions: true,
            chain: true,
            ordering: true,
            rhi: true,
            cz: 1,
            multi_level: 1,
            moen: false,
            appendix_r: Vec::new(),
            strategies: default_strategies(),
        }
    }
}

fn yes() -> bool {
    true
}
fn one() -> usize {
    1
}
fn default_p() -> Vec<f64> {
    DEFAULT_P.to_vec()
}
fn default_phi() -> Vec<String> {
    DEFAULT_PHI.iter().map(|s| s.to_string()).collect()
}
fn default_n_min() -> usize {
    4
}
fn default_n_max() -> usize {
    24
}
fn default_snowflake() -> f64 {
    0.25
}
fn default_strategies() -> Vec<Strategy> {
    vec![Strategy::Indicators]
}

#[derive(Debug, Clone, Serialize)]
pub struct GeometryReport {
    pub dilation_violations: usize,
    pub engulfing_violations: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct OrderingReport {
    pub sawyer: f64,
    pub opnorm: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExponentReport {
    pub p: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reductions: Option<ReductionReport>,
    pub chains: Vec<ChainReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ordering: Option<OrderingReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub appendix: Vec<AppendixBumpReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub moen: Option<MoenProbe>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RhiEntry {
    pub weight: &'static str,
    pub report: RHIProbeReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct CzRun {
    pub base: Ball,
    pub lambda: f64,
    pub omega: usize,
    pub selected: usize,
    pub undilated_exceedances: usize,
    pub violations: Vec<CzViolation>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MultiLevelRun {
    pub base: Ball,
    pub a: f64,
    pub k0: i64,
    pub levels: usize,
    pub balls: usize,
    pub violations: Vec<DisjointingViolation>,
}

#[derive(Debug, Clone, Serialize)]
pub struct InstanceReport {
    pub name: String,
    pub seed: u64,
    pub space: SpaceFile,
    pub w: WeightFile,
    pub sigma: WeightFile,
    pub n: usize,
    pub balls: usize,
    pub profile: SpaceProfile,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub geometry: Option<GeometryReport>,
    pub exponents: Vec<ExponentReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub rhi: Vec<RhiEntry>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub cz: Vec<CzRun>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub multi_level: Vec<MultiLevelRun>,
    pub violations: usize,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Summary {
    pub instances: usize,
    pub violations: usize,
    pub geometry_violations: usize,
    pub reduction_checks: usize,
    pub reduction_failures: usize,
    pub chain_checks: usize,
    pub chain_failures: usize,
    /// Largest observed `sawyer_p / bound`.
    pub max_chain_slack: f64,
    pub ordering_checks: usize,
    pub ordering_failures: usize,
    pub rhi_checks: usize,
    pub rhi_failures: usize,
    pub cz_runs: usize,
    pub cz_violations: usize,
    pub multi_level_runs: usize,
    pub multi_level_levels: usize,
    pub multi_level_violations: usize,
    pub appendix_failures: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub header: Header,
    pub summary: Summary,
    pub instances: Vec<InstanceReport>,
}

/// A fully specified instance, ready to run.
pub struct Prepared {
    pub name: String,
    pub seed: u64,
    pub space_file: SpaceFile,
    pub space: QuasiMetricSpace,
    pub w_file: WeightFile,
    pub w: WeightVector,
    pub sigma_file: WeightFile,
    pub sigma: WeightVector,
    pub p: Vec<f64>,
    pub phi: Vec<String>,
}

/// Expands explicit and random instances in manifest order with their seeds.
pub fn prepare(manifest: &Manifest) -> Result<Vec<Prepared>, InputError> {
    let mut master = ChaCha8Rng::seed_from_u64(manifest.seed);
    let mut out = Vec::new();
    for (i, spec) in manifest.instances.iter().enumerate() {
        let space = spec.space.build()?;
        let w = spec.w.build(&space, "instances.w")?;
        let sigma = spec.sigma.build(&space, "instances.sigma")?;
        out.push(Prepared {
            name: spec.name.clone().unwrap_or_else(|| format!("instance-{i}")),
            seed: master.gen(),
            space_file: spec.space.clone(),
            space,
            w_file: spec.w.clone(),
            w,
            sigma_file: spec.sigma.clone(),
            sigma,
            p: spec.p.clone(),
            phi: spec.phi.clone(),
        });
    }
    if let Some(block) = &manifest.random {
        if block.n_min == 0 || block.n_min > block.n_max {
            return Err(InputError::new("random.n_min", "need 1 <= n_min <= n_max"));
        }
        if block.p.is_empty() {
            return Err(InputError::new("random.p", "at least one exponent is required"));
        }
        if !(0.0..=1.0).contains(&block.snowflake_fraction) {
            return Err(InputError::new("random.snowflake_fraction", "must lie in [0, 1]"));
        }
        for i in 0..block.count {
            let seed: u64 = master.gen();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = rng.gen_range(block.n_min..=block.n_max);
            let (space_file, space) = random_space(&mut rng, n, block.snowflake_fraction);
            let w_file = random_weight(&mut rng, &space);
            let sigma_file = random_weight(&mut rng, &space);
            let w = w_file.build(&space, "random.w")?;
            let sigma = sigma_file.build(&space, "random.sigma")?;
            out.push(Prepared {
                name: format!("random-{i}"),
                seed,
                space_file,
                space,
                w_file,
                w,
                sigma_file,
                sigma,
                p: vec![block.p[i % block.p.len()]],
                phi: block.phi.clone(),
            });
        }
    }
    Ok(out)
}

fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Runs the enabled checks on one instance.
pub fn run_instance(inst: &Prepared, checks: &Checks) -> Result<InstanceReport, InputError> {
    let space = &inst.space;
    let profile = space.profile();
    let config = CZConfig::new(profile).map_err(|e| InputError::new("space", e))?;
    let mut violations = 0;

    let geometry = checks.geometry.then(|| {
        let g = GeometryReport {
            dilation_violations: check_dilation_bound(space, &profile, &DILATIONS).len(),
            engulfing_violations: check_engulfing(space, &profile).len(),
        };
        violations += g.dilation_violations + g.engulfing_violations;
        g
    });

    let options = SearchOptions {
        strategies: checks.strategies.clone(),
        random_trials: 64,
        seed: inst.seed ^ 0x5eed,
    };
    let mut exponents = Vec::new();
    for &p in &inst.p {
        let p = LebesgueExponent::new(p).map_err(|e| InputError::new("p", e))?;
        let reductions = if checks.reductions {
            let r = verify_reductions(space, &inst.w, &inst.sigma, p).map_err(|e| InputError::new("instance", e))?;
            violations += usize::from(!r.pass);
            Some(r)
        } else {
            None
        };
        let mut chains = Vec::new();
        if checks.chain {
            for phi in &inst.phi {
                let phi = load_phi(phi, Some(p))?;
                let r = verify_main_chain(space, &inst.w, &inst.sigma, p, &phi, &config)
                    .map_err(|e| InputError::new("phi", e))?;
                violations += usize::from(!r.pass);
                chains.push(r);
            }
        }
        let ordering = if checks.ordering {
            let sawyer = sawyer_constant(space, &inst.w, &inst.sigma, p).map_err(|e| InputError::new("instance", e))?;
            let est = opnorm_lower_bound(space, &inst.w, &inst.sigma, p, &options)
                .map_err(|e| InputError::new("sigma", e))?;
            let pass = sawyer <= est.value + 1e-9;
            violations += usize::from(!pass);
            Some(OrderingReport {
                sawyer,
                opnorm: est.value,
                pass,
            })
        } else {
            None
        };
        let mut appendix = Vec::new();
        for &r in &checks.appendix_r {
            let rep = verify_appendix_bump(space, &inst.w, &inst.sigma, p, r).map_err(|e| InputError::new("appendix_r", e))?;
            violations += usize::from(rep.alpha.value().is_none());
            appendix.push(rep);
        }
        let moen = if checks.moen {
            Some(probe_moen_and_norm(space, &inst.w, &inst.sigma, p, &options).map_err(|e| InputError::new("instance", e))?)
        } else {
            None
        };
        exponents.push(ExponentReport {
            p: p.p(),
            reductions,
            chains,
            ordering,
            appendix,
            moen,
        });
    }

    let mut rhi = Vec::new();
    if checks.rhi {
        for (label, weight) in [("w", &inst.w), ("sigma", &inst.sigma)] {
            if weight.iter().all(|&v| v > 0.0) {
                let report = weak_rhi_probe(space, weight).map_err(|e| InputError::new("instance", e))?;
                violations += usize::from(!report.exists);
                rhi.push(RhiEntry { weight: label, report });
            }
        }
    }

    let mut cz = Vec::new();
    let mut rng = substream(inst.seed, 1);
    for _ in 0..checks.cz {
        let c = random_cz(&mut rng, space);
        let dec = cz_decompose(space, &c.base, &c.f, c.lambda, &config).map_err(|e| InputError::new("cz", e))?;
        let report = verify_cz_properties(space, &dec, &c.f, &config);
        violations += report.violations.len();
        cz.push(CzRun {
            base: c.base,
            lambda: c.lambda,
            omega: dec.omega.len(),
            selected: dec.selected.len(),
            undilated_exceedances: report.undilated_exceedances,
            violations: report.violations,
        });
    }

    let mut multi_level = Vec::new();
    let mut rng = substream(inst.seed, 2);
    for _ in 0..checks.multi_level {
        let (f, base) = random_multilevel(&mut rng, space, config.a);
        let fam = multi_level_decompose(space, &base, &f, &config).map_err(|e| InputError::new("multi_level", e))?;
        let v = verify_disjointing(space, &fam, &f, &config);
        violations += v.len();
        multi_level.push(MultiLevelRun {
            base,
            a: fam.a,
            k0: fam.k0,
            levels: fam.levels.len(),
            balls: fam.levels.iter().map(|l| l.decomposition.selected.len()).sum(),
            violations: v,
        });
    }

    Ok(InstanceReport {
        name: inst.name.clone(),
        seed: inst.seed,
        space: inst.space_file.clone(),
        w: inst.w_file.clone(),
        sigma: inst.sigma_file.clone(),
        n: space.len(),
        balls: space.canonical_balls().len(),
        profile,
        geometry,
        exponents,
        rhi,
        cz,
        multi_level,
        violations,
    })
}

pub fn summarize(instances: &[InstanceReport]) -> Summary {
    let mut s = Summary {
        instances: instances.len(),
        ..Summary::default()
    };
    for inst in instances {
        s.violations += inst.violations;
        if let Some(g) = &inst.geometry {
            s.geometry_violations += g.dilation_violations + g.engulfing_violations;
        }
        for e in &inst.exponents {
            if let Some(r) = &e.reductions {
                s.reduction_checks += 1;
                s.reduction_failures += usize::from(!r.pass);
            }
            for c in &e.chains {
                s.chain_checks += 1;
                s.chain_failures += usize::from(!c.pass);
                s.max_chain_slack = s.max_chain_slack.max(c.slack);
            }
            if let Some(o) = &e.ordering {
                s.ordering_checks += 1;
                s.ordering_failures += usize::from(!o.pass);
            }
            s.appendix_failures += e.appendix.iter().filter(|a| a.alpha.value().is_none()).count();
        }
        s.rhi_checks += inst.rhi.len();
        s.rhi_failures += inst.rhi.iter().filter(|r| !r.report.exists).count();
        s.cz_runs += inst.cz.len();
        s.cz_violations += inst.cz.iter().map(|c| c.violations.len()).sum::<usize>();
        s.multi_level_runs += inst.multi_level.len();
        s.multi_level_levels += inst.multi_level.iter().map(|m| m.levels).sum::<usize>();
        s.multi_level_violations += inst.multi_level.iter().map(|m| m.violations.len()).sum::<usize>();
    }
    s
}

pub fn run_suite(manifest: &Manifest) -> Result<SuiteReport, InputError> {
    let instances = prepare(manifest)?
        .iter()
        .map(|inst| run_instance(inst, &manifest.checks))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SuiteReport {
        header: Header::new("verify", Some(manifest.seed)),
        summary: summarize(&instances),
        instances,
    })
}
