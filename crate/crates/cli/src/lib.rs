//! Command-line front end: point queries, figure sweeps, the finite-`n`
//! curve and the self-verification suite.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod format;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use skc_core::bounds::DEFAULT_TOL;
use skc_core::{b0, b_mu, BoundResult, ChannelKind, PhaseInsensitiveChannel, SecondOrder};

use crate::format::{fixed12, sig12};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_UNSUPPORTED: i32 = 3;
pub const EXIT_INFEASIBLE: i32 = 4;
pub const EXIT_NUMERIC: i32 = 5;
pub const EXIT_IO: i32 = 6;

/// Environment variable bounding the sweep worker count (0 = automatic).
pub const THREADS_ENV: &str = "SKC_THREADS";

pub const SWEEP_HEADER: [&str; 8] = [
    "tau",
    "v",
    "nbar",
    "mu",
    "b0_bits",
    "bmu_bits",
    "argmin_nu_minus",
    "converged",
];
pub const NONASYM_HEADER: [&str; 4] = ["n", "phi_n_bits", "b_mu_bits", "b0_bits"];

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] skc_core::Error),
    #[error("{0}")]
    Usage(String),
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("verification failed")]
    VerifyFailed,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use skc_core::Error as E;
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io { .. } => EXIT_IO,
            CliError::VerifyFailed => EXIT_VERIFY,
            CliError::Core(e) => match e {
                E::InvalidInput(_) | E::UnphysicalChannel(_) => EXIT_USAGE,
                E::UnsupportedChannel(_) => EXIT_UNSUPPORTED,
                E::Infeasible(_) => EXIT_INFEASIBLE,
                E::NotPositiveDefinite
                | E::Unphysical(_)
                | E::NearPure(_)
                | E::SingularGibbs
                | E::NumericGuard(_)
                | E::NonConvergence(_) => EXIT_NUMERIC,
            },
        }
    }
}

fn io_err(path: &str) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_string(),
        source,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "skc",
    version,
    about = "Secret-key capacity bounds for phase-insensitive Gaussian channels"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Infinite-energy bound B0
    B0(ChannelArgs),
    /// Fixed-purity bound B_mu (JSON)
    Bmu(BmuArgs),
    /// Bound curves over transmissivity/gain or added noise
    Sweep(SweepArgs),
    /// Second-order finite-n bound Phi_n over a log-spaced n grid
    Nonasym(NonasymArgs),
    /// Run the invariant suite and print a JSON report
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelFlag {
    Loss,
    Amp,
    Additive,
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct ChannelArgs {
    #[arg(long, value_enum)]
    pub channel: ChannelFlag,
    /// Transmissivity (loss) or gain (amp)
    #[arg(long)]
    pub tau: Option<f64>,
    /// Environment mean photon number (loss/amp, default 0)
    #[arg(long, conflicts_with = "v")]
    pub nbar: Option<f64>,
    /// Noise variance (additive, or instead of --nbar)
    #[arg(long)]
    pub v: Option<f64>,
}

impl ChannelArgs {
    pub fn build(&self) -> Result<PhaseInsensitiveChannel, CliError> {
        build_channel(self.channel, self.tau, self.nbar, self.v)
    }
}

fn build_channel(
    kind: ChannelFlag,
    tau: Option<f64>,
    nbar: Option<f64>,
    v: Option<f64>,
) -> Result<PhaseInsensitiveChannel, CliError> {
    match kind {
        ChannelFlag::Identity => Ok(PhaseInsensitiveChannel::identity()),
        ChannelFlag::Additive => {
            if nbar.is_some() {
                return Err(CliError::Usage(
                    "--nbar does not apply to the additive channel".into(),
                ));
            }
            if tau.is_some_and(|t| t != 1.0) {
                return Err(CliError::Usage("the additive channel has tau = 1".into()));
            }
            let v = v.ok_or_else(|| {
                CliError::Usage("--v is required for the additive channel".into())
            })?;
            Ok(PhaseInsensitiveChannel::from_params(1.0, v)?)
        }
        ChannelFlag::Loss | ChannelFlag::Amp => {
            let tau = tau.ok_or_else(|| CliError::Usage("--tau is required".into()))?;
            let ok = match kind {
                ChannelFlag::Loss => tau > 0.0 && tau < 1.0,
                _ => tau > 1.0,
            };
            if !ok {
                return Err(CliError::Usage(format!(
                    "tau = {tau} is outside the range of the {kind:?} channel"
                )));
            }
            let ch = match v {
                Some(v) => PhaseInsensitiveChannel::from_params(tau, v)?,
                None => PhaseInsensitiveChannel::thermal(tau, nbar.unwrap_or(0.0))?,
            };
            Ok(ch)
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct BmuArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    /// Resource-state purity in (0, 1]
    #[arg(long)]
    pub mu: f64,
    /// Convergence width in nu_-
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub channel: ChannelFlag,
    /// Lower end of the axis (tau for loss/amp, v for additive)
    #[arg(long)]
    pub min: f64,
    #[arg(long)]
    pub max: f64,
    #[arg(long)]
    pub steps: usize,
    /// Environment mean photon number (loss/amp)
    #[arg(long, default_value_t = 0.0)]
    pub nbar: f64,
    /// Comma-separated purities
    #[arg(long = "mu", value_delimiter = ',', default_values_t = [1.0, 0.01])]
    pub purities: Vec<f64>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
    /// Output file, `-` for stdout
    #[arg(long, default_value = "-")]
    pub out: String,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
}

fn parse_count(s: &str) -> Result<u64, String> {
    let x: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if !(x >= 1.0) || x > 1e18 || x.fract() != 0.0 {
        return Err(format!("expected a whole number >= 1, got {s}"));
    }
    Ok(x as u64)
}

#[derive(Debug, Clone, Args)]
pub struct NonasymArgs {
    #[arg(long, value_enum, default_value_t = ChannelFlag::Loss)]
    pub channel: ChannelFlag,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long, conflicts_with = "v")]
    pub nbar: Option<f64>,
    #[arg(long)]
    pub v: Option<f64>,
    #[arg(long, default_value_t = 1e-4)]
    pub mu: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub eps: f64,
    #[arg(long = "n-min", value_parser = parse_count, default_value = "1000")]
    pub n_min: u64,
    #[arg(long = "n-max", value_parser = parse_count, default_value = "1000000000")]
    pub n_max: u64,
    #[arg(long, default_value_t = 61)]
    pub points: usize,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
    #[arg(long, default_value = "-")]
    pub out: String,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 0x5eed)]
    pub seed: u64,
    /// Random samples for the simulation-identity suite
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
}

/// Rounds to the 12 significant digits used in the text outputs.
fn round12(x: f64) -> f64 {
    sig12(x).parse().unwrap_or(x)
}

fn round_opt(x: Option<f64>) -> Option<f64> {
    x.map(round12)
}

#[derive(Debug, Clone, Serialize)]
struct ChannelSummary {
    kind: ChannelKind,
    tau: f64,
    v: f64,
    nbar: Option<f64>,
}

impl From<&PhaseInsensitiveChannel> for ChannelSummary {
    fn from(ch: &PhaseInsensitiveChannel) -> Self {
        Self {
            kind: ch.kind(),
            tau: round12(ch.tau()),
            v: round12(ch.v()),
            nbar: round_opt(ch.nbar()),
        }
    }
}

#[derive(Debug, Serialize)]
struct BmuOutput {
    channel: ChannelSummary,
    mu: f64,
    tol: f64,
    b0_bits: f64,
    value: f64,
    argmin_nu_minus: Option<f64>,
    feasible_interval: [f64; 2],
    evaluations: usize,
    converged: bool,
}

/// One row of sweep output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub tau: f64,
    pub v: f64,
    pub nbar: Option<f64>,
    pub mu: f64,
    pub b0_bits: f64,
    pub bmu_bits: f64,
    pub argmin_nu_minus: Option<f64>,
    pub converged: bool,
}

impl SweepRecord {
    fn fields(&self) -> [String; 8] {
        let opt = |x: Option<f64>| x.map(sig12).unwrap_or_default();
        [
            sig12(self.tau),
            sig12(self.v),
            opt(self.nbar),
            sig12(self.mu),
            sig12(self.b0_bits),
            sig12(self.bmu_bits),
            opt(self.argmin_nu_minus),
            self.converged.to_string(),
        ]
    }

    fn rounded(&self) -> Self {
        Self {
            tau: round12(self.tau),
            v: round12(self.v),
            nbar: round_opt(self.nbar),
            mu: round12(self.mu),
            b0_bits: round12(self.b0_bits),
            bmu_bits: round12(self.bmu_bits),
            argmin_nu_minus: round_opt(self.argmin_nu_minus),
            converged: self.converged,
        }
    }
}

#[derive(Debug, Serialize)]
struct SweepOutput {
    channel: ChannelFlag,
    axis: &'static str,
    nbar: Option<f64>,
    purities: Vec<f64>,
    rows: Vec<SweepRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonasymRecord {
    pub n: u64,
    pub phi_n_bits: f64,
    pub b_mu_bits: f64,
    pub b0_bits: f64,
}

#[derive(Debug, Serialize)]
struct NonasymOutput {
    channel: ChannelSummary,
    mu: f64,
    epsilon: f64,
    variance_bits2: f64,
    quantile: f64,
    remainder: &'static str,
    rows: Vec<NonasymRecord>,
}

const REMAINDER_NOTE: &str = "O(log n / n) remainder omitted; phi_n = b_mu + sqrt(V/n) F(eps)";

/// Worker pool sized from `SKC_THREADS` (unset or 0 means automatic).
pub fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(s) if !s.trim().is_empty() => s.trim().parse::<usize>().map_err(|_| {
            CliError::Usage(format!(
                "{THREADS_ENV} must be a non-negative integer, got {s:?}"
            ))
        })?,
        _ => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))
}

pub fn cmd_b0(args: &ChannelArgs) -> Result<String, CliError> {
    let ch = args.build()?;
    Ok(format!("{}\n", fixed12(b0(&ch)?)))
}

pub fn cmd_bmu(args: &BmuArgs) -> Result<String, CliError> {
    let ch = args.channel.build()?;
    check_purity(args.mu)?;
    let r: BoundResult = b_mu(&ch, args.mu, args.tol)?;
    let out = BmuOutput {
        channel: (&ch).into(),
        mu: args.mu,
        tol: args.tol,
        b0_bits: round12(b0(&ch)?),
        value: round12(r.value),
        argmin_nu_minus: round_opt(r.argmin_nu_minus),
        feasible_interval: [
            round12(r.feasible_interval.0),
            round12(r.feasible_interval.1),
        ],
        evaluations: r.evaluations,
        converged: r.converged,
    };
    Ok(serde_json::to_string_pretty(&out).expect("serialisable") + "\n")
}

fn check_purity(mu: f64) -> Result<(), CliError> {
    if mu > 0.0 && mu <= 1.0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "purity must be in (0, 1], got {mu}"
        )))
    }
}

/// Axis values `min + (max - min) i/(steps - 1)`.
pub fn linspace(min: f64, max: f64, steps: usize) -> Vec<f64> {
    (0..steps)
        .map(|i| {
            if i + 1 == steps {
                max
            } else {
                min + (max - min) * i as f64 / (steps - 1) as f64
            }
        })
        .collect()
}

fn sweep_channel(args: &SweepArgs, x: f64) -> Result<PhaseInsensitiveChannel, CliError> {
    match args.channel {
        ChannelFlag::Additive => build_channel(ChannelFlag::Additive, None, None, Some(x)),
        kind => build_channel(kind, Some(x), Some(args.nbar), None),
    }
}

/// Computes sweep rows: axis ascending, then purity descending.
pub fn sweep_records(args: &SweepArgs) -> Result<Vec<SweepRecord>, CliError> {
    if !(args.min < args.max) || !args.min.is_finite() || !args.max.is_finite() {
        return Err(CliError::Usage(format!(
            "need min < max, got {} and {}",
            args.min, args.max
        )));
    }
    if args.steps < 2 {
        return Err(CliError::Usage("steps must be >= 2".into()));
    }
    if args.purities.is_empty() {
        return Err(CliError::Usage("at least one purity is required".into()));
    }
    for &mu in &args.purities {
        check_purity(mu)?;
    }
    if args.channel == ChannelFlag::Identity {
        return Err(skc_core::Error::UnsupportedChannel("identity channel".into()).into());
    }
    let mut purities = args.purities.clone();
    purities.sort_by(|a, b| b.total_cmp(a));
    purities.dedup();

    let work: Vec<(f64, f64)> = linspace(args.min, args.max, args.steps)
        .into_iter()
        .flat_map(|x| purities.iter().map(move |&mu| (x, mu)))
        .collect();
    let pool = thread_pool()?;
    let rows: Vec<Result<SweepRecord, CliError>> = pool.install(|| {
        work.par_iter()
            .map(|&(x, mu)| {
                let ch = sweep_channel(args, x)?;
                let floor = b0(&ch)?;
                let r = b_mu(&ch, mu, args.tol)?;
                Ok(SweepRecord {
                    tau: ch.tau(),
                    v: ch.v(),
                    nbar: ch.nbar(),
                    mu,
                    b0_bits: floor,
                    bmu_bits: r.value,
                    argmin_nu_minus: r.argmin_nu_minus,
                    converged: r.converged,
                })
            })
            .collect()
    });
    rows.into_iter().collect()
}

fn open_output(path: &str) -> Result<Box<dyn Write>, CliError> {
    if path == "-" {
        Ok(Box::new(BufWriter::new(io::stdout().lock())))
    } else {
        let file = File::create(PathBuf::from(path)).map_err(io_err(path))?;
        Ok(Box::new(BufWriter::new(file)))
    }
}

fn write_csv<W: Write>(
    out: W,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> io::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()
}

pub fn render_sweep(args: &SweepArgs, rows: &[SweepRecord]) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    match args.format {
        OutputFormat::Csv => {
            write_csv(
                &mut buf,
                &SWEEP_HEADER,
                rows.iter().map(|r| r.fields().to_vec()),
            )
            .map_err(io_err("<buffer>"))?;
        }
        OutputFormat::Json => {
            let mut purities = args.purities.clone();
            purities.sort_by(|a, b| b.total_cmp(a));
            purities.dedup();
            let out = SweepOutput {
                channel: args.channel,
                axis: if args.channel == ChannelFlag::Additive {
                    "v"
                } else {
                    "tau"
                },
                nbar: (args.channel != ChannelFlag::Additive).then_some(args.nbar),
                purities,
                rows: rows.iter().map(SweepRecord::rounded).collect(),
            };
            serde_json::to_writer_pretty(&mut buf, &out).expect("serialisable");
            buf.push(b'\n');
        }
    }
    Ok(buf)
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<(), CliError> {
    let rows = sweep_records(args)?;
    let bytes = render_sweep(args, &rows)?;
    let mut out = open_output(&args.out)?;
    out.write_all(&bytes)
        .and_then(|_| out.flush())
        .map_err(io_err(&args.out))
}

/// Log-spaced integers from `n_min` to `n_max`, duplicates removed.
pub fn log_grid(n_min: u64, n_max: u64, points: usize) -> Vec<u64> {
    if n_min == n_max || points <= 1 {
        return vec![n_min];
    }
    let (lo, hi) = ((n_min as f64).log10(), (n_max as f64).log10());
    let mut grid: Vec<u64> = (0..points)
        .map(|i| {
            if i == 0 {
                n_min
            } else if i + 1 == points {
                n_max
            } else {
                10f64
                    .powf(lo + (hi - lo) * i as f64 / (points - 1) as f64)
                    .round() as u64
            }
        })
        .collect();
    grid.dedup();
    grid
}

pub fn nonasym_records(
    args: &NonasymArgs,
) -> Result<(SecondOrder, f64, Vec<NonasymRecord>), CliError> {
    if args.n_min > args.n_max {
        return Err(CliError::Usage("--n-min must not exceed --n-max".into()));
    }
    check_purity(args.mu)?;
    if !(args.eps > 0.0 && args.eps < 1.0) {
        return Err(CliError::Usage(format!(
            "--eps must lie in (0, 1), got {}",
            args.eps
        )));
    }
    let ch = build_channel(args.channel, args.tau, args.nbar, args.v)?;
    let floor = b0(&ch)?;
    let so = SecondOrder::new(&ch, args.mu, args.eps, args.tol)?;
    let rows = log_grid(args.n_min, args.n_max, args.points)
        .into_iter()
        .map(|n| NonasymRecord {
            n,
            phi_n_bits: so.phi(n),
            b_mu_bits: so.bound.value,
            b0_bits: floor,
        })
        .collect();
    Ok((so, floor, rows))
}

pub fn render_nonasym(
    args: &NonasymArgs,
    so: &SecondOrder,
    rows: &[NonasymRecord],
) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    match args.format {
        OutputFormat::Csv => {
            let lines = rows.iter().map(|r| {
                vec![
                    r.n.to_string(),
                    sig12(r.phi_n_bits),
                    sig12(r.b_mu_bits),
                    sig12(r.b0_bits),
                ]
            });
            write_csv(&mut buf, &NONASYM_HEADER, lines).map_err(io_err("<buffer>"))?;
        }
        OutputFormat::Json => {
            let ch = build_channel(args.channel, args.tau, args.nbar, args.v)?;
            let out = NonasymOutput {
                channel: (&ch).into(),
                mu: args.mu,
                epsilon: args.eps,
                variance_bits2: round12(so.variance),
                quantile: round12(so.quantile),
                remainder: REMAINDER_NOTE,
                rows: rows
                    .iter()
                    .map(|r| NonasymRecord {
                        n: r.n,
                        phi_n_bits: round12(r.phi_n_bits),
                        b_mu_bits: round12(r.b_mu_bits),
                        b0_bits: round12(r.b0_bits),
                    })
                    .collect(),
            };
            serde_json::to_writer_pretty(&mut buf, &out).expect("serialisable");
            buf.push(b'\n');
        }
    }
    Ok(buf)
}

pub fn cmd_nonasym(args: &NonasymArgs) -> Result<(), CliError> {
    let (so, _, rows) = nonasym_records(args)?;
    if args.format == OutputFormat::Csv {
        eprintln!(
            "# V = {} bits^2, F(eps) = {}; {REMAINDER_NOTE}",
            sig12(so.variance),
            sig12(so.quantile)
        );
    }
    let bytes = render_nonasym(args, &so, &rows)?;
    let mut out = open_output(&args.out)?;
    out.write_all(&bytes)
        .and_then(|_| out.flush())
        .map_err(io_err(&args.out))
}

pub fn cmd_verify(args: &VerifyArgs) -> Result<String, (String, CliError)> {
    let config = skc_core::verify::VerifyConfig {
        seed: args.seed,
        simulation_samples: args.samples,
        ..Default::default()
    };
    let report = skc_core::verify::run(&config);
    let text = serde_json::to_string_pretty(&report).expect("serialisable") + "\n";
    if report.passed {
        Ok(text)
    } else {
        Err((text, CliError::VerifyFailed))
    }
}

/// Runs a parsed command, writing results to stdout. Returns the exit code.
pub fn run(cli: Cli) -> i32 {
    let result: Result<Option<String>, CliError> = match &cli.command {
        Command::B0(a) => cmd_b0(a).map(Some),
        Command::Bmu(a) => cmd_bmu(a).map(Some),
        Command::Sweep(a) => cmd_sweep(a).map(|_| None),
        Command::Nonasym(a) => cmd_nonasym(a).map(|_| None),
        Command::Verify(a) => match cmd_verify(a) {
            Ok(text) => Ok(Some(text)),
            Err((text, e)) => {
                print!("{text}");
                Err(e)
            }
        },
    };
    match result {
        Ok(text) => {
            if let Some(text) = text {
                print!("{text}");
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
