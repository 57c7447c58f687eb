//! Command-line front end: argument parsing, command dispatch and reports.

pub mod generate;
pub mod input;
pub mod suite;

use std::ffi::OsString;
use std::fmt::{Display, Write as _};
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use twoweight_core::czdecomp::{
    cz_decompose, multi_level_decompose, verify_cz_properties, verify_disjointing, CzViolation,
    DisjointingViolation,
};
use twoweight_core::space::{check_dilation_bound, check_engulfing, DilationViolation, EngulfingViolation};
use twoweight_core::verify::{opnorm_lower_bound, OpNormEstimate, SearchOptions, Strategy};
use twoweight_core::weights::{constants_report, sawyer_constant, ConstantsReport};
use twoweight_core::{CZConfig, LebesgueExponent, QuasiMetricSpace, SpaceProfile, WeightVector, YoungFunction};

use crate::input::{field_vector, load_phi, parse_ball, read_json, whole_space, SpaceFile, WeightFile};
use crate::suite::{run_suite, InstanceSpec, Manifest, SuiteReport, DEFAULT_PHI, DILATIONS};

/// Exit status for a clean run.
pub const EXIT_OK: i32 = 0;
/// Exit status when a checker reports a violation.
pub const EXIT_VIOLATION: i32 = 1;
/// Exit status for unusable input.
pub const EXIT_INPUT: i32 = 2;

/// Malformed or unreadable input, tagged with the offending field.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{field}: {message}")]
pub struct InputError {
    pub field: &'static str,
    pub message: String,
}

impl InputError {
    pub fn new(field: &'static str, message: impl Display) -> Self {
        let message = message.to_string().split_whitespace().collect::<Vec<_>>().join(" ");
        InputError { field, message }
    }
}

/// First block of every report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Header {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl Header {
    pub fn new(command: &'static str, seed: Option<u64>) -> Self {
        Header {
            tool: "twoweight",
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "twoweight", version, about = "Two-weight maximal inequality checks on finite quasimetric spaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Structural constants of a space and the dilation/engulfing checks.
    Profile(ProfileArgs),
    /// Weight constants for each exponent and Young function.
    Constants(ConstantsArgs),
    /// Calderón–Zygmund selection at one level, optionally the multi-level family.
    Cz(CzArgs),
    /// Lower bound for the weighted operator norm against the testing constant.
    Opnorm(OpnormArgs),
    /// Full check suite for one instance or a manifest.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Indicators,
    Random,
    CoordinateAscent,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Strategy {
        match s {
            StrategyArg::Indicators => Strategy::Indicators,
            StrategyArg::Random => Strategy::Random,
            StrategyArg::CoordinateAscent => Strategy::CoordinateAscent,
        }
    }
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Report path; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    #[arg(long)]
    pub space: PathBuf,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ConstantsArgs {
    #[arg(long)]
    pub space: PathBuf,
    #[arg(long)]
    pub w: PathBuf,
    #[arg(long)]
    pub sigma: PathBuf,
    /// Exponents; repeat or separate with commas for a sweep.
    #[arg(long, required = true, value_delimiter = ',', allow_negative_numbers = true)]
    pub p: Vec<f64>,
    /// Young functions, inline or as files.
    #[arg(long, required = true)]
    pub phi: Vec<String>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CzArgs {
    #[arg(long)]
    pub space: PathBuf,
    /// JSON array of nonnegative values.
    #[arg(long)]
    pub f: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: f64,
    /// Base ball as `center:radius`; the whole space by default.
    #[arg(long)]
    pub base: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub eta: Option<f64>,
    /// Level base for the multi-level family; smaller than the default is allowed.
    #[arg(long, allow_negative_numbers = true)]
    pub a: Option<f64>,
    /// Also build and check the multi-level family.
    #[arg(long)]
    pub levels: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct OpnormArgs {
    #[arg(long)]
    pub space: PathBuf,
    #[arg(long)]
    pub w: PathBuf,
    #[arg(long)]
    pub sigma: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    pub p: f64,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "indicators")]
    pub strategies: Vec<StrategyArg>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Suite manifest; otherwise `--space`, `--w`, `--sigma` describe one instance.
    #[arg(long, conflicts_with_all = ["space", "w", "sigma"])]
    pub manifest: Option<PathBuf>,
    #[arg(long)]
    pub space: Option<PathBuf>,
    #[arg(long)]
    pub w: Option<PathBuf>,
    #[arg(long)]
    pub sigma: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub p: Vec<f64>,
    #[arg(long)]
    pub phi: Vec<String>,
    /// Search strategies for the operator-norm check.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub strategies: Vec<StrategyArg>,
    /// Overrides the manifest seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// A finished report and whether any checker flagged a violation.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub text: String,
    pub violation: bool,
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
    text.push('\n');
    text
}

fn load_space(path: &Path) -> Result<QuasiMetricSpace, InputError> {
    read_json::<SpaceFile>(path, "space")?.build()
}

fn load_weight(path: &Path, space: &QuasiMetricSpace, field: &'static str) -> Result<WeightVector, InputError> {
    read_json::<WeightFile>(path, field)?.build(space, field)
}

fn exponent(p: f64) -> Result<LebesgueExponent, InputError> {
    LebesgueExponent::new(p).map_err(|e| InputError::new("p", e))
}

fn csv_value(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

/// Short label such as `power:2` or `conjugate(powerlog:2:1)`.
pub fn phi_label(phi: &YoungFunction) -> String {
    match phi {
        YoungFunction::Power { s } => format!("power:{s}"),
        YoungFunction::PowerLog { s, a } => format!("powerlog:{s}:{a}"),
        YoungFunction::NumericConjugateOf(inner) => format!("conjugate({})", phi_label(inner)),
    }
}

#[derive(Serialize)]
struct ProfileReport {
    header: Header,
    n: usize,
    balls: usize,
    profile: SpaceProfile,
    dilations: &'static [f64],
    dilation_violations: Vec<DilationViolation>,
    engulfing_violations: Vec<EngulfingViolation>,
}

pub fn profile(args: &ProfileArgs) -> Result<Outcome, InputError> {
    let space = load_space(&args.space)?;
    let profile = space.profile();
    let report = ProfileReport {
        header: Header::new("profile", None),
        n: space.len(),
        balls: space.canonical_balls().len(),
        profile,
        dilations: &DILATIONS,
        dilation_violations: check_dilation_bound(&space, &profile, &DILATIONS),
        engulfing_violations: check_engulfing(&space, &profile),
    };
    let violation = !(report.dilation_violations.is_empty() && report.engulfing_violations.is_empty());
    let text = match args.output.format {
        Format::Json => to_json(&report),
        Format::Csv => {
            let p = &report.profile;
            format!(
                "n,balls,kappa,c_mu,d_mu,engulf,dilation_violations,engulfing_violations\n{},{},{},{},{},{},{},{}\n",
                report.n,
                report.balls,
                p.kappa,
                p.c_mu,
                p.d_mu,
                p.engulf,
                report.dilation_violations.len(),
                report.engulfing_violations.len()
            )
        }
    };
    Ok(Outcome { text, violation })
}

#[derive(Serialize)]
struct ConstantsRow {
    phi: YoungFunction,
    #[serde(flatten)]
    constants: ConstantsReport,
}

#[derive(Serialize)]
struct ConstantsOutput {
    header: Header,
    rows: Vec<ConstantsRow>,
}

pub fn constants(args: &ConstantsArgs) -> Result<Outcome, InputError> {
    let space = load_space(&args.space)?;
    let w = load_weight(&args.w, &space, "w")?;
    let sigma = load_weight(&args.sigma, &space, "sigma")?;
    let mut rows = Vec::new();
    for &p in &args.p {
        let p = exponent(p)?;
        for phi in &args.phi {
            let phi = load_phi(phi, Some(p))?;
            let constants = constants_report(&space, &w, &sigma, p, &phi).map_err(|e| InputError::new("phi", e))?;
            rows.push(ConstantsRow { phi, constants });
        }
    }
    let text = match args.output.format {
        Format::Json => to_json(&ConstantsOutput {
            header: Header::new("constants", None),
            rows,
        }),
        Format::Csv => {
            let mut s = String::from("p,phi,ap,two_weight_ap,ainfty_fw,ainfty_exp,bump_ap,wp,sawyer\n");
            for r in &rows {
                let c = &r.constants;
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{},{},{}",
                    c.p,
                    phi_label(&r.phi),
                    csv_value(c.ap),
                    c.two_weight_ap,
                    c.ainfty_fw,
                    csv_value(c.ainfty_exp),
                    c.bump_ap,
                    c.wp,
                    c.sawyer
                );
            }
            s
        }
    };
    Ok(Outcome { text, violation: false })
}

#[derive(Serialize)]
struct BallOut {
    center: usize,
    radius: f64,
    members: Vec<usize>,
}

#[derive(Serialize)]
struct LevelOut {
    k: i64,
    level: f64,
    balls: Vec<BallOut>,
    pieces: Vec<Vec<usize>>,
}

#[derive(Serialize)]
struct LevelsOut {
    a: f64,
    k0: i64,
    base_average: f64,
    levels: Vec<LevelOut>,
    violations: Vec<DisjointingViolation>,
}

#[derive(Serialize)]
struct CzOutput {
    header: Header,
    base: twoweight_core::Ball,
    eta: f64,
    lambda: f64,
    omega: Vec<usize>,
    balls: Vec<BallOut>,
    violations: Vec<CzViolation>,
    undilated_exceedances: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    multi_level: Option<LevelsOut>,
}

fn balls_out(dec: &twoweight_core::czdecomp::CZDecomposition) -> Vec<BallOut> {
    dec.selected
        .iter()
        .map(|b| BallOut {
            center: b.center,
            radius: b.radius,
            members: b.members.clone(),
        })
        .collect()
}

pub fn cz(args: &CzArgs) -> Result<Outcome, InputError> {
    let space = load_space(&args.space)?;
    let f = field_vector(&read_json::<Vec<f64>>(&args.f, "f")?, &space, "f")?;
    let base = match &args.base {
        Some(text) => parse_ball(text, &space)?,
        None => whole_space(&space),
    };
    let mut config = CZConfig::new(space.profile()).map_err(|e| InputError::new("space", e))?;
    if let Some(eta) = args.eta {
        config = config.with_eta(eta).map_err(|e| InputError::new("eta", e))?;
    }
    if let Some(a) = args.a {
        config = config.with_a(a, true).map_err(|e| InputError::new("a", e))?;
    }
    let dec = cz_decompose(&space, &base, &f, args.lambda, &config).map_err(|e| InputError::new("lambda", e))?;
    let report = verify_cz_properties(&space, &dec, &f, &config);
    let multi_level = if args.levels {
        let family = multi_level_decompose(&space, &base, &f, &config).map_err(|e| InputError::new("a", e))?;
        let violations = verify_disjointing(&space, &family, &f, &config);
        Some(LevelsOut {
            a: family.a,
            k0: family.k0,
            base_average: family.base_average,
            levels: family
                .levels
                .iter()
                .map(|l| LevelOut {
                    k: l.k,
                    level: l.decomposition.level,
                    balls: balls_out(&l.decomposition),
                    pieces: l.pieces.clone(),
                })
                .collect(),
            violations,
        })
    } else {
        None
    };
    let violation = !report.violations.is_empty() || multi_level.as_ref().is_some_and(|m| !m.violations.is_empty());
    let out = CzOutput {
        header: Header::new("cz", None),
        base,
        eta: config.eta,
        lambda: dec.level,
        omega: dec.omega.clone(),
        balls: balls_out(&dec),
        violations: report.violations,
        undilated_exceedances: report.undilated_exceedances,
        multi_level,
    };
    let text = match args.output.format {
        Format::Json => to_json(&out),
        Format::Csv => {
            let mut s = String::from("k,level,center,radius,members\n");
            let row = |s: &mut String, k: &str, level: f64, b: &BallOut| {
                let members: Vec<String> = b.members.iter().map(usize::to_string).collect();
                let _ = writeln!(s, "{k},{level},{},{},{}", b.center, b.radius, members.join(" "));
            };
            for b in &out.balls {
                row(&mut s, "", out.lambda, b);
            }
            for l in out.multi_level.iter().flat_map(|m| &m.levels) {
                for b in &l.balls {
                    row(&mut s, &l.k.to_string(), l.level, b);
                }
            }
            s
        }
    };
    Ok(Outcome { text, violation })
}

#[derive(Serialize)]
struct OpnormOutput {
    header: Header,
    p: f64,
    sawyer: f64,
    estimate: OpNormEstimate,
    ordering_holds: bool,
}

pub fn opnorm(args: &OpnormArgs) -> Result<Outcome, InputError> {
    let space = load_space(&args.space)?;
    let w = load_weight(&args.w, &space, "w")?;
    let sigma = load_weight(&args.sigma, &space, "sigma")?;
    let p = exponent(args.p)?;
    let options = SearchOptions {
        strategies: args.strategies.iter().map(|&s| s.into()).collect(),
        random_trials: 64,
        seed: args.seed,
    };
    let sawyer = sawyer_constant(&space, &w, &sigma, p).map_err(|e| InputError::new("w", e))?;
    let estimate = opnorm_lower_bound(&space, &w, &sigma, p, &options).map_err(|e| InputError::new("sigma", e))?;
    let ordering_holds = sawyer <= estimate.value + 1e-9;
    let out = OpnormOutput {
        header: Header::new("opnorm", Some(args.seed)),
        p: p.p(),
        sawyer,
        estimate,
        ordering_holds,
    };
    let text = match args.output.format {
        Format::Json => to_json(&out),
        Format::Csv => format!(
            "p,sawyer,opnorm,evaluations,ordering_holds\n{},{},{},{},{}\n",
            out.p, out.sawyer, out.estimate.value, out.estimate.evaluations, out.ordering_holds
        ),
    };
    Ok(Outcome {
        text,
        violation: !ordering_holds,
    })
}

/// Chain rows of a suite report as CSV.
pub fn suite_csv(report: &SuiteReport) -> String {
    let mut s = String::from("instance,p,phi,sawyer_p,bump,wp,ln_bound,slack,pass\n");
    for inst in &report.instances {
        for e in &inst.exponents {
            for c in &e.chains {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{},{},{}",
                    inst.name,
                    c.p,
                    phi_label(&c.phi),
                    c.sawyer_p,
                    c.bump,
                    c.wp,
                    c.ln_bound,
                    c.slack,
                    c.pass
                );
            }
        }
    }
    s
}

pub fn verify(args: &VerifyArgs) -> Result<Outcome, InputError> {
    let mut manifest = match &args.manifest {
        Some(path) => read_json::<Manifest>(path, "manifest")?,
        None => {
            let need = |p: &Option<PathBuf>, field: &'static str| {
                p.clone()
                    .ok_or_else(|| InputError::new(field, "required without --manifest"))
            };
            let space = read_json::<SpaceFile>(&need(&args.space, "space")?, "space")?;
            let w = read_json::<WeightFile>(&need(&args.w, "w")?, "w")?;
            let sigma = read_json::<WeightFile>(&need(&args.sigma, "sigma")?, "sigma")?;
            if args.p.is_empty() {
                return Err(InputError::new("p", "required without --manifest"));
            }
            let phi = if args.phi.is_empty() {
                DEFAULT_PHI.iter().map(|s| s.to_string()).collect()
            } else {
                args.phi.clone()
            };
            Manifest {
                instances: vec![InstanceSpec {
                    name: None,
                    space,
                    w,
                    sigma,
                    p: args.p.clone(),
                    phi,
                }],
                ..Manifest::default()
            }
        }
    };
    if let Some(seed) = args.seed {
        manifest.seed = seed;
    }
    if !args.strategies.is_empty() {
        manifest.checks.strategies = args.strategies.iter().map(|&s| s.into()).collect();
    }
    let report = run_suite(&manifest)?;
    let violation = report.summary.violations > 0;
    let text = match args.output.format {
        Format::Json => to_json(&report),
        Format::Csv => suite_csv(&report),
    };
    Ok(Outcome { text, violation })
}

pub fn dispatch(command: &Command) -> Result<Outcome, InputError> {
    match command {
        Command::Profile(a) => profile(a),
        Command::Constants(a) => constants(a),
        Command::Cz(a) => cz(a),
        Command::Opnorm(a) => opnorm(a),
        Command::Verify(a) => verify(a),
    }
}

fn output_args(command: &Command) -> &OutputArgs {
    match command {
        Command::Profile(a) => &a.output,
        Command::Constants(a) => &a.output,
        Command::Cz(a) => &a.output,
        Command::Opnorm(a) => &a.output,
        Command::Verify(a) => &a.output,
    }
}

/// Parses `args`, runs the command and writes the report; returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return EXIT_OK;
        }
        Err(e) => {
            let rendered = e.to_string();
            let line = rendered.lines().next().unwrap_or("invalid arguments");
            eprintln!("{}", line.trim_start_matches("error: "));
            return EXIT_INPUT;
        }
    };
    let outcome = match dispatch(&cli.command) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("{e}");
            return EXIT_INPUT;
        }
    };
    match &output_args(&cli.command).out {
        Some(path) => {
            if let Err(e) = fs::write(path, &outcome.text) {
                eprintln!("{}", InputError::new("out", format!("{}: {e}", path.display())));
                return EXIT_INPUT;
            }
        }
        None => print!("{}", outcome.text),
    }
    exit_status(&outcome)
}

pub fn exit_status(outcome: &Outcome) -> i32 {
    if outcome.violation {
        EXIT_VIOLATION
    } else {
        EXIT_OK
    }
}
