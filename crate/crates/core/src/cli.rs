//! Batch front end: `region`, `decompose`, `classify`, `simulate`, `oracle`.
//!
//! Every command is a pure function of the parsed config, the master seed and
//! the unit toggle; [`execute`] returns the bytes and [`run`] does the I/O.
//! Rates in config files are always nats.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::config::{covariance_block, fmt12, ConfigError, ConfigMap, COVARIANCE_KEYS};
use crate::covariance::{classify_and_reduce, decompose, validate, DegradednessClass, ModelError};
use crate::protocol::bounds::estimate_lemma_bounds;
use crate::protocol::plan::{plan_with_cap, DEFAULT_CODEBOOK_N, DEFAULT_GAMMA, DEFAULT_MAX_CODEBOOK};
use crate::protocol::scalar::{
    run_scalar_batch, scalar_csv, scalar_summary, ScalarQuantizer, DEFAULT_SCALAR_N,
};
use crate::protocol::trial::{summary_text, trials_csv, BatchSummary, ProtocolInstance};
use crate::protocol::ProtocolError;
use crate::region::{
    design_auxiliary_noise, key_rate_upper_bound, optimal_key_rate, tradeoff_curve, AuxiliaryChannel,
    RateError,
};
use crate::rng::Seeds;
use crate::surrogate::{discretize, verify_pa_lemma, FiniteProtocol, SurrogateError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Units {
    #[default]
    Nats,
    Bits,
}

impl Units {
    /// Multiplier applied to every emitted rate.
    pub fn scale(self) -> f64 {
        match self {
            Units::Nats => 1.0,
            Units::Bits => std::f64::consts::LOG2_E,
        }
    }

    pub fn suffix(self) -> &'static str {
        match self {
            Units::Nats => "nats",
            Units::Bits => "bits",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Key rate against public rate on a grid, as CSV.
    Region,
    /// Regression coefficients and conditional variances.
    Decompose,
    /// Degradedness class and the reduced triple.
    Classify,
    /// Run protocol trials; per-trial CSV plus a summary.
    Simulate,
    /// Check the privacy-amplification bound exactly on a discretized source.
    Oracle,
}

#[derive(Debug, Parser)]
#[command(name = "gska", version, about = "Secret-key rates and protocol simulation for Gaussian sources")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Master seed (overrides `seed` in the config).
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    /// Write the data output here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Units::Nats)]
    pub units: Units,
    /// Trial count (overrides `trials` in the config).
    #[arg(long, global = true, value_name = "N")]
    pub trials: Option<u64>,
    /// Worker threads; outputs do not depend on it.
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Rate(#[from] RateError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Surrogate(#[from] SurrogateError),
    #[error("Io: {0}")]
    Io(#[from] std::io::Error),
    #[error("MissingConfig: --config PATH is required")]
    MissingConfig,
}

impl CliError {
    pub fn name(&self) -> &'static str {
        match self {
            CliError::Config(e) => e.name(),
            CliError::Model(e) => e.name(),
            CliError::Rate(e) => e.name(),
            CliError::Protocol(e) => e.name(),
            CliError::Surrogate(e) => e.name(),
            CliError::Io(_) => "Io",
            CliError::MissingConfig => "MissingConfig",
        }
    }

    /// 3 for plans that cannot be built, 1 for I/O, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Protocol(
                ProtocolError::KeyRateNonpositive { .. } | ProtocolError::CodebookTooLarge { .. },
            ) => 3,
            CliError::Io(_) => 1,
            _ => 2,
        }
    }
}

/// Options that come from flags rather than the config file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub units: Units,
    pub trials: Option<u64>,
}

/// What a command produced.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Output {
    /// Machine-readable data: CSV or `key = value` text.
    pub data: String,
    /// Human summary that accompanies the data (simulate only).
    pub report: Option<String>,
    /// Diagnostic lines for stderr.
    pub warnings: Vec<String>,
    pub status: i32,
}

fn allowed<'a>(extra: &[&'a str]) -> Vec<&'a str> {
    COVARIANCE_KEYS.iter().copied().chain(extra.iter().copied()).collect()
}

fn seed_of(config: &ConfigMap, opts: &RunOptions) -> Result<u64, ConfigError> {
    match opts.seed {
        Some(s) => Ok(s),
        None => config.u64_or("seed", 0),
    }
}

fn trials_of(config: &ConfigMap, opts: &RunOptions, default: u64) -> Result<u64, ConfigError> {
    match opts.trials {
        Some(t) => Ok(t),
        None => config.u64_or("trials", default),
    }
}

fn bad(key: &str, value: impl ToString, msg: &str) -> ConfigError {
    ConfigError::BadValue { key: key.into(), value: value.to_string(), msg: msg.into() }
}

fn usize_key(config: &ConfigMap, key: &str, default: usize) -> Result<usize, ConfigError> {
    let v = config.u64_or(key, default as u64)?;
    usize::try_from(v).map_err(|_| bad(key, v, "too large"))
}

/// Test channel from `noise_var`, or designed from the target `r_p`.
fn auxiliary(
    config: &ConfigMap,
    dec: &crate::covariance::GaussianDecomposition,
) -> Result<AuxiliaryChannel, CliError> {
    if config.contains("noise_var") {
        let v = config.f64("noise_var")?;
        if v <= 0.0 {
            return Err(bad("noise_var", v, "must be positive").into());
        }
        return Ok(AuxiliaryChannel { noise_var: v });
    }
    Ok(design_auxiliary_noise(dec, config.f64("r_p")?)?)
}

fn grid(config: &ConfigMap) -> Result<Vec<f64>, ConfigError> {
    if config.contains("grid") {
        return config.f64_list("grid");
    }
    let max = config.f64("grid_max")?;
    let points = config.u64("grid_points")?;
    if points < 2 {
        return Err(bad("grid_points", points, "need at least 2"));
    }
    Ok((0..points).map(|i| max * i as f64 / (points - 1) as f64).collect())
}

pub fn cmd_region(config: &ConfigMap, opts: &RunOptions) -> Result<Output, CliError> {
    config.ensure_only(&allowed(&["grid", "grid_max", "grid_points", "seed"]))?;
    let sigma = config.covariance()?;
    let curve = tradeoff_curve(&sigma, &grid(config)?)?;
    let (k, u) = (opts.units.scale(), opts.units.suffix());
    let mut data = format!("r_p_{u},r_k_{u},upper_bound_{u}\n");
    for row in &curve.rows {
        let _ =
            writeln!(data, "{},{},{}", fmt12(row.r_p * k), fmt12(row.r_k * k), fmt12(row.upper_bound * k));
    }
    let mut warnings = Vec::new();
    if curve.class == DegradednessClass::Useless {
        warnings.push(
            "warning: USELESS triple (rho2_xy <= rho2_xz), key rate is zero at every public rate".into(),
        );
    }
    Ok(Output { data, warnings, ..Output::default() })
}

pub fn cmd_decompose(config: &ConfigMap, opts: &RunOptions) -> Result<Output, CliError> {
    config.ensure_only(&allowed(&["seed"]))?;
    let sigma = validate(config.covariance()?)?;
    let d = decompose(&sigma);
    let mut data = String::new();
    for (key, v) in [
        ("k_xz", d.k_xz),
        ("k_yx", d.k_yx),
        ("k_yz", d.k_yz),
        ("var_w1", d.var_w1),
        ("var_w2", d.var_w2),
        ("cond_var_x_given_z", d.cond_var_x_given_z),
        ("cond_var_y_given_z", d.cond_var_y_given_z),
        ("cond_var_y_given_xz", d.cond_var_y_given_xz),
    ] {
        let _ = writeln!(data, "{key} = {}", fmt12(v));
    }
    let _ = writeln!(
        data,
        "key_rate_upper_bound_{} = {}",
        opts.units.suffix(),
        fmt12(key_rate_upper_bound(&d) * opts.units.scale())
    );
    Ok(Output { data, ..Output::default() })
}

pub fn cmd_classify(config: &ConfigMap, _opts: &RunOptions) -> Result<Output, CliError> {
    config.ensure_only(&allowed(&["seed"]))?;
    let sigma = validate(config.covariance()?)?;
    let r = classify_and_reduce(&sigma);
    let mut data = String::new();
    let _ = writeln!(data, "class = {}", r.class.name());
    let _ = writeln!(data, "rho2_xy = {}", fmt12(r.rho2_xy));
    let _ = writeln!(data, "rho2_xz = {}", fmt12(r.rho2_xz));
    if let (Some(red), Some(noise)) = (r.reduced, r.reduced_noise_var) {
        for line in covariance_block(&red).lines() {
            let _ = writeln!(data, "reduced_{line}");
        }
        let _ = writeln!(data, "reduced_noise_var = {}", fmt12(noise));
    }
    Ok(Output { data, ..Output::default() })
}

const SIMULATE_KEYS: [&str; 13] = [
    "r_p",
    "noise_var",
    "n",
    "gamma",
    "trials",
    "seed",
    "quantizer",
    "size_c",
    "bound_samples",
    "max_codebook",
    "step",
    "cosets",
    "key_bits",
];

pub fn cmd_simulate(config: &ConfigMap, opts: &RunOptions) -> Result<Output, CliError> {
    config.ensure_only(&allowed(&SIMULATE_KEYS))?;
    let input = validate(config.covariance()?)?;
    // Agreement depends only on (X, Y) and leakage only on (X, Z), so the
    // degraded equivalent gives the same measured quantities.
    let sigma = classify_and_reduce(&input).reduced.unwrap_or(input);
    let dec = decompose(&sigma);
    let aux = auxiliary(config, &dec)?;
    let seeds = Seeds::from_master(seed_of(config, opts)?);
    let trials = trials_of(config, opts, 1000)?;
    let scale = opts.units.scale();
    match config.raw("quantizer").unwrap_or("codebook") {
        "codebook" => {}
        "scalar" => return simulate_scalar(config, &sigma, &dec, seeds, trials, scale),
        other => return Err(bad("quantizer", other, "expected codebook or scalar").into()),
    }
    let n = usize_key(config, "n", DEFAULT_CODEBOOK_N)?;
    let gamma = config.f64_or("gamma", DEFAULT_GAMMA)?;
    let cap = config.u64_or("max_codebook", DEFAULT_MAX_CODEBOOK)?;
    let mut plan = plan_with_cap(&dec, &aux, n, gamma, cap)?;
    match config.raw("size_c") {
        None => {}
        Some("size_q") => plan.size_c = plan.size_q,
        Some(_) => {
            let c = config.u64("size_c")?;
            if c == 0 {
                return Err(bad("size_c", c, "must be positive").into());
            }
            plan.size_c = c;
        }
    }
    let instance = ProtocolInstance::new(&sigma, plan, seeds)?;
    let transcripts = instance.run_batch(trials);
    let summary = BatchSummary::from_transcripts(&plan, &transcripts);
    let mut report = summary_text(&instance, &summary, scale);
    let samples = config.u64_or("bound_samples", 0)?;
    if samples > 0 {
        let est = estimate_lemma_bounds(&sigma, &plan, &instance.model, samples, seeds.source);
        let p_sel_not_a = 1.0 - summary.in_a as f64 / summary.trials as f64;
        let floor = est.agreement_floor(p_sel_not_a, summary.agreement_se());
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(report, "{k} = {v}");
        };
        kv("bound_samples", samples.to_string());
        kv("delta_n", fmt12(est.delta_n));
        kv("p_not_t", fmt12(est.p_not_t));
        kv("quantizer_bound", fmt12(est.quantizer_bound()));
        kv("binning_bound", fmt12(est.binning_bound(p_sel_not_a)));
        kv("agreement_floor", fmt12(floor));
        kv("agreement_meets_floor", (summary.agreement_rate() >= floor).to_string());
    }
    Ok(Output { data: trials_csv(&transcripts), report: Some(report), ..Output::default() })
}

fn simulate_scalar(
    config: &ConfigMap,
    sigma: &crate::covariance::CovarianceTriple,
    dec: &crate::covariance::GaussianDecomposition,
    seeds: Seeds,
    trials: u64,
    scale: f64,
) -> Result<Output, CliError> {
    let n = usize_key(config, "n", DEFAULT_SCALAR_N)?;
    if n == 0 {
        return Err(ProtocolError::InvalidBlockLength.into());
    }
    let step = config.f64_or("step", 0.5 * dec.cond_var_x_given_y().sqrt())?;
    if step <= 0.0 {
        return Err(bad("step", step, "must be positive").into());
    }
    let cosets = config.u64_or("cosets", 16)?;
    if cosets == 0 {
        return Err(bad("cosets", cosets, "must be positive").into());
    }
    let target = optimal_key_rate(dec, (cosets as f64).ln())?;
    let default_bits = (n as f64 * target / std::f64::consts::LN_2).floor() as u64;
    let key_bits = usize_key(config, "key_bits", default_bits.max(1) as usize)?;
    let cfg = ScalarQuantizer { n, step, cosets, key_bits };
    let ts = run_scalar_batch(sigma, &cfg, &seeds, trials);
    Ok(Output {
        data: scalar_csv(&ts),
        report: Some(scalar_summary(&cfg, &ts, target, scale)),
        warnings: vec!["note: scalar quantizer mode is heuristic and makes no optimality claim".into()],
        status: 0,
    })
}

const ORACLE_KEYS: [&str; 11] =
    ["r_p", "noise_var", "cells", "n", "size_q", "size_c", "size_s", "beta", "beta_offset", "trials", "seed"];

pub fn cmd_oracle(config: &ConfigMap, opts: &RunOptions) -> Result<Output, CliError> {
    config.ensure_only(&allowed(&ORACLE_KEYS))?;
    let sigma = validate(config.covariance()?)?;
    let aux = auxiliary(config, &decompose(&sigma))?;
    let cells = usize_key(config, "cells", 4)?;
    let n = usize_key(config, "n", 2)?;
    let sur = discretize(&sigma, &aux, cells)?;
    let seqs = cells.checked_pow(n as u32).unwrap_or(usize::MAX);
    let size_q = usize_key(config, "size_q", seqs.min(1 << 16))?;
    let size_c = usize_key(config, "size_c", 4)?;
    let size_s = usize_key(config, "size_s", 2)?;
    let beta = if config.contains("beta") {
        config.f64("beta")?
    } else {
        sur.informations().i_ux_given_z - config.f64_or("beta_offset", 0.1)?
    };
    let trials = usize_key(config, "trials", trials_of(config, opts, 10_000)? as usize)?;
    let seeds = Seeds::from_master(seed_of(config, opts)?);
    let proto = FiniteProtocol::build(&sur, n, size_q, size_c, seeds.codebook)?;
    let report = verify_pa_lemma(&sur, &proto, size_s, beta, trials, seeds.hash)?;
    Ok(Output {
        data: report.to_text(),
        status: if report.average_holds() { 0 } else { 1 },
        ..Output::default()
    })
}

pub fn execute(command: Command, config: &ConfigMap, opts: &RunOptions) -> Result<Output, CliError> {
    match command {
        Command::Region => cmd_region(config, opts),
        Command::Decompose => cmd_decompose(config, opts),
        Command::Classify => cmd_classify(config, opts),
        Command::Simulate => cmd_simulate(config, opts),
        Command::Oracle => cmd_oracle(config, opts),
    }
}

fn run_parsed(cli: &Cli) -> Result<Output, CliError> {
    let path = cli.config.as_ref().ok_or(CliError::MissingConfig)?;
    let config = ConfigMap::parse(&std::fs::read_to_string(path)?)?;
    let opts = RunOptions { seed: cli.seed, units: cli.units, trials: cli.trials };
    match cli.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| CliError::Io(std::io::Error::other(e)))?
            .install(|| execute(cli.command, &config, &opts)),
        None => execute(cli.command, &config, &opts),
    }
}

/// Parses `args`, runs the command and writes its outputs. Returns the exit code.
///
/// With `--out`, data goes to the file and any report to stdout; without it,
/// data goes to stdout and the report to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let out = match run_parsed(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    for w in &out.warnings {
        eprintln!("{w}");
    }
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &out.data) {
                eprintln!("error: Io: {e}");
                return 1;
            }
            if let Some(r) = &out.report {
                print!("{r}");
            }
        }
        None => {
            print!("{}", out.data);
            if let Some(r) = &out.report {
                eprint!("{r}");
            }
        }
    }
    out.status
}

#[cfg(test)]
mod tests {
    use super::*;

    const WORKED: &str =
        "sigma_x = 1\nsigma_y = 1\nsigma_z = 1\nsigma_xy = 0.8\nsigma_xz = 0.4\nsigma_yz = 0.5\n";

    fn cfg(extra: &str) -> ConfigMap {
        ConfigMap::parse(&format!("{WORKED}{extra}")).unwrap()
    }

    #[test]
    fn region_rows() {
        let out = cmd_region(&cfg("grid = 0, 0.5, 50\n"), &RunOptions::default()).unwrap();
        let lines: Vec<&str> = out.data.lines().collect();
        assert_eq!(lines[0], "r_p_nats,r_k_nats,upper_bound_nats");
        assert!(lines[1].starts_with("0,0,0.42364893"));
        assert!(out.warnings.is_empty());
    }

    #[test]
    fn region_bits_header_and_scale() {
        let opts = RunOptions { units: Units::Bits, ..RunOptions::default() };
        let out = cmd_region(&cfg("grid = 50\n"), &opts).unwrap();
        let row: Vec<f64> = out.data.lines().nth(1).unwrap().split(',').map(|v| v.parse().unwrap()).collect();
        assert!(out.data.starts_with("r_p_bits,r_k_bits,upper_bound_bits\n"));
        assert!((row[2] - 0.5 * (7.0f64 / 3.0).ln() / std::f64::consts::LN_2).abs() < 1e-11);
    }

    #[test]
    fn useless_region_warns() {
        let c = ConfigMap::parse("sigma_x = 1\nsigma_y = 1\nsigma_z = 1\nsigma_xy = 0.3\nsigma_xz = 0.6\nsigma_yz = 0.2\ngrid = 0, 1\n").unwrap();
        let out = cmd_region(&c, &RunOptions::default()).unwrap();
        assert_eq!(out.warnings.len(), 1);
        assert!(out.data.lines().skip(1).all(|l| l.split(',').nth(1) == Some("0")));
    }

    #[test]
    fn unknown_key_and_bad_model_exit_2() {
        let e = cmd_region(&cfg("grid = 0\nbogus = 1\n"), &RunOptions::default()).unwrap_err();
        assert_eq!((e.name(), e.exit_code()), ("UnknownKey", 2));
        let c = ConfigMap::parse(
            "sigma_x = 1\nsigma_y = 1\nsigma_z = 1\nsigma_xy = 1\nsigma_xz = 0\nsigma_yz = 0\n",
        )
        .unwrap();
        let e = cmd_decompose(&c, &RunOptions::default()).unwrap_err();
        assert_eq!((e.name(), e.exit_code()), ("NotPositiveDefinite", 2));
    }

    #[test]
    fn infeasible_plan_exit_3() {
        let e = cmd_simulate(&cfg("r_p = 0.5\nn = 40\ntrials = 1\n"), &RunOptions::default()).unwrap_err();
        assert_eq!((e.name(), e.exit_code()), ("CodebookTooLarge", 3));
        let e = cmd_simulate(&cfg("r_p = 0.5\ngamma = 1\ntrials = 1\n"), &RunOptions::default()).unwrap_err();
        assert_eq!((e.name(), e.exit_code()), ("KeyRateNonpositive", 3));
    }

    #[test]
    fn injective_binning_always_agrees() {
        let out =
            cmd_simulate(&cfg("r_p = 0.5\nn = 6\nsize_c = size_q\ntrials = 50\n"), &RunOptions::default())
                .unwrap();
        assert!(out.report.unwrap().contains("agreement_rate = 1\n"));
    }

    #[test]
    fn classify_reports_reduction() {
        let c = ConfigMap::parse(
            "sigma_x = 1\nsigma_y = 1\nsigma_z = 1\nsigma_xy = 0.8\nsigma_xz = 0.4\nsigma_yz = 0.1\n",
        )
        .unwrap();
        let out = cmd_classify(&c, &RunOptions::default()).unwrap();
        assert!(out.data.contains("class = DEGRADABLE_XYZ\n"));
        assert!(out.data.contains("reduced_sigma_yz = 0.5\n"));
    }

    #[test]
    fn oracle_singleton_key_passes() {
        let out =
            cmd_oracle(&cfg("r_p = 0.5\ncells = 2\nn = 2\nsize_s = 1\n"), &RunOptions::default()).unwrap();
        assert_eq!(out.status, 0);
        assert!(out.data.contains("avg_mu = 0\n"));
    }

    #[test]
    fn cli_parses_global_flags_after_subcommand() {
        let cli =
            Cli::try_parse_from(["gska", "region", "--config", "a.cfg", "--units", "bits", "--seed", "7"])
                .unwrap();
        assert_eq!(cli.command, Command::Region);
        assert_eq!(cli.units, Units::Bits);
        assert_eq!(cli.seed, Some(7));
    }
}
