//! `fockmaj`: certification runs, trajectories, thinning tables and entropy
//! sweeps on the command line.
//!
//! Exit codes: 0 success, 1 certification failure, 2 usage or runtime error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use fockmaj::entropy::shannon;
use fockmaj::harness::{
    certify_main_theorem, entropy_sweep, plus_state, trajectory_check, CertifyConfig, InputFamily,
    TrajectoryConfig,
};
use fockmaj::thinning::{thin, ClassicalDist};
use fockmaj::{random_density, thermal_state, DensityMatrix, FockOperator, GaugeCovariantParams};

const NORMALIZATION_TOL: f64 = 1e-8;

#[derive(Parser)]
#[command(name = "fockmaj", version, about = "Majorization checks for gauge-covariant Gaussian channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Randomized certification over a (dim, lambda, N) grid.
    Certify(CertifyArgs),
    /// Partial-sum trajectories under the attenuator semigroup.
    Evolve(EvolveArgs),
    /// Classical thinning of a distribution.
    Thin(ThinArgs),
    /// Output entropies of passive and rotated inputs over a (lambda, N) grid.
    Sweep(SweepArgs),
    /// Prints the attenuator and amplifier parameters of a (lambda, N) channel.
    Params(ParamsArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct Common {
    /// JSON file with defaults for any flag of this subcommand; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Family {
    Mixed,
    Pure,
}

#[derive(Args)]
struct CertifyArgs {
    #[command(flatten)]
    common: Common,
    /// Inclusive range `2..8` or a list `2,3,5`.
    #[arg(long, value_parser = parse_dims)]
    dims: Option<Dims>,
    #[arg(long, value_delimiter = ',')]
    lambdas: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    noises: Option<Vec<f64>>,
    /// Trials per grid cell.
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Partial-sum slack.
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long, value_enum)]
    input: Option<Family>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct CertifyFile {
    dims: Option<Vec<usize>>,
    lambdas: Option<Vec<f64>>,
    noises: Option<Vec<f64>>,
    trials: Option<usize>,
    seed: Option<u64>,
    tolerance: Option<f64>,
    input: Option<Family>,
    output: Option<PathBuf>,
    format: Option<Format>,
}

#[derive(Args)]
struct EvolveArgs {
    #[command(flatten)]
    common: Common,
    /// `fock:N`, `thermal:NBAR`, `plus` or `random`.
    #[arg(long)]
    state: Option<String>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    t_max: Option<f64>,
    /// Number of grid intervals; the grid has `steps + 1` times.
    #[arg(long)]
    steps: Option<usize>,
    /// Seed for `--state random`.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct EvolveFile {
    state: Option<String>,
    dim: Option<usize>,
    t_max: Option<f64>,
    steps: Option<usize>,
    seed: Option<u64>,
    output: Option<PathBuf>,
    format: Option<Format>,
}

#[derive(Args)]
struct ThinArgs {
    #[command(flatten)]
    common: Common,
    /// `delta:N`, `poisson:MEAN` or `geometric:MEAN`.
    #[arg(long, conflicts_with = "file")]
    builtin: Option<String>,
    /// Text file of nonnegative weights separated by commas or whitespace.
    #[arg(long)]
    file: Option<PathBuf>,
    /// Length of builtin distributions.
    #[arg(long)]
    len: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct ThinFile {
    builtin: Option<String>,
    file: Option<PathBuf>,
    len: Option<usize>,
    lambda: Option<f64>,
    output: Option<PathBuf>,
    format: Option<Format>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_delimiter = ',')]
    lambdas: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    noises: Option<Vec<f64>>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tolerance: Option<f64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct SweepFile {
    lambdas: Option<Vec<f64>>,
    noises: Option<Vec<f64>>,
    dim: Option<usize>,
    seed: Option<u64>,
    tolerance: Option<f64>,
    output: Option<PathBuf>,
    format: Option<Format>,
}

#[derive(Args)]
struct ParamsArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    noise: Option<f64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct ParamsFile {
    lambda: Option<f64>,
    noise: Option<f64>,
    output: Option<PathBuf>,
    format: Option<Format>,
}

#[derive(Clone, Debug)]
struct Dims(Vec<usize>);

fn parse_dims(s: &str) -> std::result::Result<Dims, String> {
    let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}"));
    if let Some((lo, hi)) = s.split_once("..") {
        let lo = parse(lo)?;
        let hi = parse(hi.trim_start_matches('='))?;
        if lo > hi {
            return Err(format!("empty range {s}"));
        }
        return Ok(Dims((lo..=hi).collect()));
    }
    s.split(',').map(parse).collect::<std::result::Result<_, _>>().map(Dims)
}

/// Runtime outcome other than an error.
enum Outcome {
    Success,
    Failed,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::Failed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<Outcome> {
    match command {
        Command::Certify(a) => certify(a),
        Command::Evolve(a) => evolve(a),
        Command::Thin(a) => thin_cmd(a),
        Command::Sweep(a) => sweep(a),
        Command::Params(a) => params(a),
    }
}

fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))
        }
    }
}

fn emit(output: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match output {
        Some(p) => fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes)?;
            Ok(out.flush()?)
        }
    }
}

fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// 17 significant digits, enough to round-trip any `f64`.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_bytes(header: &[String], rows: &[Vec<String>]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    Ok(w.into_inner()?)
}

fn certify(a: CertifyArgs) -> Result<Outcome> {
    let file: CertifyFile = load(a.common.config.as_deref())?;
    let defaults = CertifyConfig::default();
    let config = CertifyConfig {
        dims: a.dims.map(|d| d.0).or(file.dims).unwrap_or(defaults.dims),
        lambdas: a.lambdas.or(file.lambdas).unwrap_or(defaults.lambdas),
        noises: a.noises.or(file.noises).unwrap_or(defaults.noises),
        trials_per_cell: a.trials.or(file.trials).unwrap_or(defaults.trials_per_cell),
        seed: a.seed.or(file.seed).unwrap_or(defaults.seed),
        tolerance: a.tolerance.or(file.tolerance).unwrap_or(defaults.tolerance),
        input: match a.input.or(file.input) {
            Some(Family::Pure) => InputFamily::Pure,
            _ => InputFamily::Mixed,
        },
        ..defaults
    };
    config.validate()?;
    let output = a.common.output.or(file.output);
    let format = a.common.format.or(file.format).unwrap_or(Format::Json);

    let report = certify_main_theorem(&config)?;
    let bytes = match format {
        Format::Json => json_bytes(&report)?,
        Format::Csv => csv_bytes(
            &["trials", "failures", "worst_slack", "worst_von_neumann_gap", "worst_renyi2_gap", "max_trace_deficit"]
                .map(String::from),
            &[vec![
                report.trials.to_string(),
                report.failures.to_string(),
                num(report.worst_slack),
                num(report.worst_von_neumann_gap),
                num(report.worst_renyi2_gap),
                num(report.max_trace_deficit),
            ]],
        )?,
    };
    emit(output.as_deref(), &bytes)?;
    if report.passed() {
        Ok(Outcome::Success)
    } else {
        eprintln!(
            "certification failed: {} of {} trials, worst slack {:e}",
            report.failures, report.trials, report.worst_slack
        );
        Ok(Outcome::Failed)
    }
}

fn parse_state(spec: &str, dim: usize, seed: u64) -> Result<DensityMatrix> {
    let (kind, arg) = spec.split_once(':').unwrap_or((spec, ""));
    Ok(match kind {
        "fock" => {
            let n: usize = arg.parse().with_context(|| format!("fock level {arg:?}"))?;
            DensityMatrix::normalized(FockOperator::fock_projector(n, dim)?)?
        }
        "thermal" => {
            let nbar: f64 = arg.parse().with_context(|| format!("thermal mean {arg:?}"))?;
            let th = thermal_state(nbar, dim)?;
            DensityMatrix::normalized(th.into_operator())?
        }
        "plus" => plus_state(dim)?,
        "random" => random_density(dim, seed, None)?,
        _ => bail!("unknown state {spec:?}; expected fock:N, thermal:NBAR, plus or random"),
    })
}

fn evolve(a: EvolveArgs) -> Result<Outcome> {
    let file: EvolveFile = load(a.common.config.as_deref())?;
    let defaults = TrajectoryConfig::default();
    let dim = a.dim.or(file.dim).unwrap_or(4);
    let seed = a.seed.or(file.seed).unwrap_or(0);
    let state = a.state.or(file.state).unwrap_or_else(|| "random".into());
    let config = TrajectoryConfig {
        t_max: a.t_max.or(file.t_max).unwrap_or(defaults.t_max),
        steps: a.steps.or(file.steps).unwrap_or(defaults.steps),
        ..defaults
    };
    let output = a.common.output.or(file.output);
    let format = a.common.format.or(file.format).unwrap_or(Format::Csv);

    let rho = parse_state(&state, dim, seed)?;
    let report = trajectory_check(&rho, &config)?;
    let bytes = match format {
        Format::Json => json_bytes(&report)?,
        Format::Csv => {
            let d = rho.dim();
            let mut header = vec!["t".to_string()];
            header.extend((0..d).map(|n| format!("s_{n}")));
            header.extend((0..d).map(|n| format!("s_down_{n}")));
            header.push("degenerate".into());
            let r = &report.record;
            let rows: Vec<Vec<String>> = (0..r.times.len())
                .map(|i| {
                    let mut row = vec![num(r.times[i])];
                    row.extend(r.partial_sums[i].iter().map(|&v| num(v)));
                    row.extend(r.passive_partial_sums[i].iter().map(|&v| num(v)));
                    row.push(r.degenerate[i].to_string());
                    row
                })
                .collect();
            csv_bytes(&header, &rows)?
        }
    };
    emit(output.as_deref(), &bytes)?;
    let c = &report.checks;
    if !c.inequality_holds || !c.ode_holds {
        eprintln!(
            "note: finite-difference checks need a finer grid (inequality slack {:e}, ODE residual {:e})",
            c.worst_inequality_slack, c.worst_ode_residual
        );
    }
    if c.order_holds {
        Ok(Outcome::Success)
    } else {
        eprintln!("s_n(t) <= s_down_n(t) violated by {:e}", -c.worst_order_slack);
        Ok(Outcome::Failed)
    }
}

#[derive(Serialize)]
struct ThinReport {
    lambda: f64,
    input: Vec<f64>,
    output: Vec<f64>,
    /// `null` when the truncated distribution misses mass beyond tolerance.
    input_entropy: Option<f64>,
    output_entropy: Option<f64>,
    /// l1 distance of the output to `poisson(lambda * mean)`, for Poisson inputs.
    poisson_l1_distance: Option<f64>,
}

fn parse_weights(path: &Path) -> Result<ClassicalDist> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let weights = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().with_context(|| format!("weight {t:?}")))
        .collect::<Result<Vec<_>>>()?;
    let dist = ClassicalDist::new(weights)?;
    if (dist.total() - 1.0).abs() > NORMALIZATION_TOL {
        bail!("input weights sum to {}, not 1", dist.total());
    }
    Ok(dist)
}

fn entropy_of(p: &ClassicalDist) -> Option<f64> {
    match shannon(p) {
        Ok(h) => Some(h),
        Err(e) => {
            eprintln!("warning: no entropy reported: {e}");
            None
        }
    }
}

fn thin_cmd(a: ThinArgs) -> Result<Outcome> {
    let file: ThinFile = load(a.common.config.as_deref())?;
    let lambda = a.lambda.or(file.lambda).context("--lambda is required")?;
    let len = a.len.or(file.len).unwrap_or(60);
    let output = a.common.output.or(file.output);
    let format = a.common.format.or(file.format).unwrap_or(Format::Json);

    let mut poisson_mean = None;
    let input = match (a.builtin.or(file.builtin), a.file.or(file.file)) {
        (Some(_), Some(_)) => bail!("give either a builtin or a file, not both"),
        (None, None) => bail!("--builtin or --file is required"),
        (None, Some(path)) => parse_weights(&path)?,
        (Some(spec), None) => {
            let (kind, arg) = spec.split_once(':').unwrap_or((&spec, ""));
            match kind {
                "delta" => ClassicalDist::delta(arg.parse().with_context(|| format!("delta index {arg:?}"))?, len)?,
                "poisson" => {
                    let mean: f64 = arg.parse().with_context(|| format!("poisson mean {arg:?}"))?;
                    poisson_mean = Some(mean);
                    ClassicalDist::poisson(mean, len)?
                }
                "geometric" => ClassicalDist::geometric(arg.parse().with_context(|| format!("geometric mean {arg:?}"))?, len)?,
                _ => bail!("unknown builtin {spec:?}; expected delta:N, poisson:MEAN or geometric:MEAN"),
            }
        }
    };
    let out = thin(&input, lambda)?;
    let poisson_l1_distance = match poisson_mean {
        Some(mean) => Some(out.l1_distance(&ClassicalDist::poisson(lambda * mean, out.len())?)),
        None => None,
    };
    let report = ThinReport {
        lambda,
        input: input.weights().to_vec(),
        output: out.weights().to_vec(),
        input_entropy: entropy_of(&input),
        output_entropy: entropy_of(&out),
        poisson_l1_distance,
    };
    let bytes = match format {
        Format::Json => json_bytes(&report)?,
        Format::Csv => {
            let header = ["n", "input", "output"].map(String::from);
            let rows: Vec<Vec<String>> = (0..report.input.len())
                .map(|n| vec![n.to_string(), num(report.input[n]), num(report.output[n])])
                .collect();
            let show = |h: Option<f64>| h.map_or_else(|| "n/a".to_string(), num);
            eprintln!(
                "input entropy {}, output entropy {}",
                show(report.input_entropy),
                show(report.output_entropy)
            );
            csv_bytes(&header, &rows)?
        }
    };
    emit(output.as_deref(), &bytes)?;
    Ok(Outcome::Success)
}

fn sweep(a: SweepArgs) -> Result<Outcome> {
    let file: SweepFile = load(a.common.config.as_deref())?;
    let lambdas = a.lambdas.or(file.lambdas).unwrap_or_else(|| vec![0.2, 0.5, 0.8]);
    let noises = a.noises.or(file.noises).unwrap_or_else(|| vec![0.0, 0.5, 1.0]);
    let dim = a.dim.or(file.dim).unwrap_or(6);
    let seed = a.seed.or(file.seed).unwrap_or(0);
    let tol = a.tolerance.or(file.tolerance).unwrap_or(1e-9);
    let output = a.common.output.or(file.output);
    let format = a.common.format.or(file.format).unwrap_or(Format::Csv);
    if lambdas.is_empty() || noises.is_empty() {
        bail!("empty grid");
    }

    let rows = entropy_sweep(&lambdas, &noises, dim, seed, tol)?;
    let bytes = match format {
        Format::Json => json_bytes(&rows)?,
        Format::Csv => {
            let header = ["lambda", "noise", "input_family", "von_neumann_out", "renyi2_out", "ordered"]
                .map(String::from);
            let table: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        num(r.lambda),
                        num(r.noise),
                        r.input_family.clone(),
                        num(r.von_neumann_out),
                        num(r.renyi2_out),
                        r.ordered.to_string(),
                    ]
                })
                .collect();
            csv_bytes(&header, &table)?
        }
    };
    emit(output.as_deref(), &bytes)?;
    if rows.iter().all(|r| r.ordered) {
        Ok(Outcome::Success)
    } else {
        eprintln!("entropy ordering violated in {} rows", rows.iter().filter(|r| !r.ordered).count());
        Ok(Outcome::Failed)
    }
}

fn params(a: ParamsArgs) -> Result<Outcome> {
    let file: ParamsFile = load(a.common.config.as_deref())?;
    let lambda = a.lambda.or(file.lambda).context("--lambda is required")?;
    let noise = a.noise.or(file.noise).unwrap_or(0.0);
    let output = a.common.output.or(file.output);
    let format = a.common.format.or(file.format).unwrap_or(Format::Json);
    let p = GaugeCovariantParams::new(lambda, noise)?;
    let bytes = match format {
        Format::Json => json_bytes(&p)?,
        Format::Csv => csv_bytes(
            &["lambda", "noise", "eta", "kappa"].map(String::from),
            &[vec![num(p.lambda), num(p.noise), num(p.eta), num(p.kappa)]],
        )?,
    };
    emit(output.as_deref(), &bytes)?;
    Ok(Outcome::Success)
}
