//! `domprod`: dominance products and exact L-infinity closest pair.
//!
//! Every command prints exactly one JSON object per line on stdout. Point
//! indices are 0-based and pairs are reported with `i < j`.
//!
//! Exit codes: 0 success, 2 usage error, 3 I/O failure, 4 contract violation
//! (for example fewer than two points, or real input to an integer-only
//! algorithm).

mod bench;
mod report;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use domprod_core::distance_product::{
    closest_pair_integer, EncodedOptions, IntegerOptions, IntegerStrategy, DEFAULT_BOUND_GUARD,
};
use domprod_core::dominance::{
    choose_block_size, dominance_blocked, dominance_naive, predict_exponent, BlockSize, Mode,
};
use domprod_core::format::{write_dominance_binary, write_dominance_csv};
use domprod_core::geometry::{
    generate_points, parse_points, write_points, Distribution, Domain, PointSet,
};
use domprod_core::linf::{
    closest_pair_bruteforce, closest_pair_deterministic_traced, closest_pair_randomized_traced,
    pairs_within, DecisionConfig, DeterministicOptions,
};
use domprod_core::matmul::{Kernel, KernelChoice};
use serde_json::json;

use report::{Parameters, RunReport};

#[derive(Parser)]
#[command(
    name = "domprod",
    version,
    about = "Dominance products and exact L-infinity closest pair"
)]
#[command(
    after_help = "Indices in reports are 0-based; pairs are printed with i < j.\n\
Exit codes: 0 ok, 2 usage, 3 I/O, 4 contract violation."
)]
struct Cli {
    /// Worker threads (falls back to DOMPROD_THREADS, then all cores).
    #[arg(long, global = true, env = "DOMPROD_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random point file.
    Gen(GenArgs),
    /// Compute a dominance matrix.
    Dominance(DominanceArgs),
    /// List all pairs within a distance threshold.
    Decide(DecideArgs),
    /// Find the closest pair.
    Closest(ClosestArgs),
    /// Predicted dominance-product exponent for d = n^zeta.
    Predict(PredictArgs),
    /// Sweep a grid of sizes and kernels and time them.
    Bench(bench::BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum DistArg {
    UniformReal,
    IntegerGrid,
    Clustered,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    n: u64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    d: u64,
    #[arg(long, value_enum, default_value = "uniform-real")]
    dist: DistArg,
    /// Coordinate bound M for integer-grid (coordinates in [-M, M]).
    #[arg(long)]
    int_range: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Block size: `auto` or a positive integer.
#[derive(Clone, Copy, Debug)]
pub enum BlockArg {
    Auto,
    Fixed(usize),
}

impl FromStr for BlockArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "auto" => Ok(BlockArg::Auto),
            _ => match s.parse::<usize>() {
                Ok(v) if v > 0 => Ok(BlockArg::Fixed(v)),
                _ => Err(format!("expected `auto` or a positive integer, got `{s}`")),
            },
        }
    }
}

impl From<BlockArg> for BlockSize {
    fn from(b: BlockArg) -> Self {
        match b {
            BlockArg::Auto => BlockSize::Auto,
            BlockArg::Fixed(s) => BlockSize::Fixed(s),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum KernelArg {
    Naive,
    Bitpack,
    Strassen,
}

impl KernelArg {
    pub fn choice(self) -> KernelChoice {
        match self {
            KernelArg::Naive => KernelChoice::naive(),
            KernelArg::Bitpack => KernelChoice::bitpack(),
            KernelArg::Strassen => KernelChoice::strassen(),
        }
    }

    pub fn name(self) -> &'static str {
        self.choice().kernel().name()
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Le,
    Lt,
    Eq,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Le => Mode::Le,
            ModeArg::Lt => Mode::Lt,
            ModeArg::Eq => Mode::Eq,
        }
    }
}

#[derive(Args, Clone, Copy)]
struct Tuning {
    /// Block size for the blocked algorithm.
    #[arg(long, default_value = "auto")]
    s: BlockArg,
    #[arg(long, value_enum, default_value = "bitpack")]
    kernel: KernelArg,
}

impl Tuning {
    fn config(&self) -> DecisionConfig {
        DecisionConfig::new(self.kernel.choice(), self.s.into())
    }

    fn block_label(&self, n: usize, d: usize) -> String {
        match self.s {
            BlockArg::Fixed(s) => s.to_string(),
            BlockArg::Auto => choose_block_size(n, d, &self.kernel.choice())
                .block_size()
                .to_string(),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DominanceAlgo {
    Naive,
    Blocked,
}

#[derive(Clone, Copy, ValueEnum)]
enum MatrixFormat {
    Csv,
    Bin,
}

#[derive(Args)]
struct DominanceArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "blocked")]
    algo: DominanceAlgo,
    #[arg(long, value_enum, default_value = "le")]
    mode: ModeArg,
    #[command(flatten)]
    tuning: Tuning,
    /// Matrix output file; only a checksum is reported when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: MatrixFormat,
}

#[derive(Args)]
struct DecideArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    delta: f64,
    /// Report pairs strictly closer than delta.
    #[arg(long)]
    strict: bool,
    #[command(flatten)]
    tuning: Tuning,
}

#[derive(Clone, Copy, ValueEnum)]
enum ClosestAlgo {
    Brute,
    Det,
    Rand,
    /// Integer input: all-pairs distances via the encoded (max,+) product.
    Intmm,
    /// Integer input: bisection over [0, 2M].
    Bisect,
    /// Integer input: cost model picks intmm or det.
    Auto,
}

#[derive(Args)]
struct ClosestArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "det")]
    algo: ClosestAlgo,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    tuning: Tuning,
    /// Largest coordinate bound accepted by intmm.
    #[arg(long, default_value_t = DEFAULT_BOUND_GUARD)]
    guard: u64,
    /// Cost-model word factor for --algo auto.
    #[arg(long, default_value_t = 1.0)]
    word_factor: f64,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    zeta: f64,
}

/// Failure classes with their exit codes.
pub enum Failure {
    Io(String),
    Contract(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(_) => 3,
            Failure::Contract(_) => 4,
        }
    }
}

impl From<domprod_core::Error> for Failure {
    fn from(e: domprod_core::Error) -> Self {
        Failure::Contract(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

fn read_points(path: &Path) -> Result<PointSet, Failure> {
    let file = File::open(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    parse_points(file).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Failure + '_ {
    move |e| Failure::Io(format!("{}: {e}", path.display()))
}

fn domain_label(points: &PointSet) -> String {
    match points.domain() {
        Domain::Real => "real".into(),
        Domain::Integer { bound } => format!("int({bound})"),
    }
}

fn describe(report: &mut RunReport, points: &PointSet) {
    report.n = Some(points.len());
    report.d = Some(points.dim());
    report.domain = Some(domain_label(points));
}

fn ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

fn cmd_gen(args: GenArgs) -> CmdResult {
    let dist = match (args.dist, args.int_range) {
        (DistArg::IntegerGrid, Some(bound)) => Distribution::IntegerGrid { bound },
        (DistArg::IntegerGrid, None) => {
            return Err(Failure::Contract(
                "--dist integer-grid needs --int-range".into(),
            ))
        }
        (DistArg::UniformReal, _) => Distribution::UniformReal,
        (DistArg::Clustered, _) => Distribution::Clustered,
    };
    let start = Instant::now();
    let points = generate_points(args.n as usize, args.d as usize, dist, args.seed)?;
    let mut report = RunReport::new("gen");
    describe(&mut report, &points);
    report.seed = Some(args.seed);
    match &args.out {
        Some(path) => {
            let mut w = create(path)?;
            write_points(&points, &mut w)
                .and_then(|_| w.flush())
                .map_err(io_err(path))?;
            report.result = json!({ "path": path });
            report.wall_time_ms = ms(start);
            report.emit();
        }
        // With no output file the point file itself goes to stdout.
        None => {
            let stdout = std::io::stdout();
            write_points(&points, stdout.lock()).map_err(|e| Failure::Io(e.to_string()))?;
        }
    }
    Ok(())
}

fn cmd_dominance(args: DominanceArgs) -> CmdResult {
    let points = read_points(&args.input)?;
    let mode: Mode = args.mode.into();
    let start = Instant::now();
    let (matrix, algorithm) = match args.algo {
        DominanceAlgo::Naive => (dominance_naive(&points, mode), "naive"),
        DominanceAlgo::Blocked => (
            dominance_blocked(
                &points,
                args.tuning.s.into(),
                &args.tuning.kernel.choice(),
                mode,
            )?,
            "blocked",
        ),
    };
    let elapsed = ms(start);

    let mut report = RunReport::new("dominance");
    describe(&mut report, &points);
    report.algorithm = Some(algorithm.into());
    report.parameters = Parameters {
        mode: Some(mode.name().into()),
        ..Parameters::default()
    };
    if let DominanceAlgo::Blocked = args.algo {
        report.parameters.s = Some(args.tuning.block_label(points.len(), points.dim()));
        report.parameters.kernel = Some(args.tuning.kernel.name().into());
    }
    let checksum: u64 = matrix.as_slice().iter().map(|&v| u64::from(v)).sum();
    report.result = json!({ "path": args.out, "sum": checksum });
    if let Some(path) = &args.out {
        let mut w = create(path)?;
        match args.format {
            MatrixFormat::Csv => write_dominance_csv(&matrix, &mut w),
            MatrixFormat::Bin => write_dominance_binary(&matrix, &mut w),
        }
        .and_then(|_| w.flush())
        .map_err(io_err(path))?;
    }
    report.wall_time_ms = elapsed;
    report.emit();
    Ok(())
}

fn cmd_decide(args: DecideArgs) -> CmdResult {
    let points = read_points(&args.input)?;
    let start = Instant::now();
    let found = pairs_within(&points, args.delta, args.strict, &args.tuning.config())?;
    let mut report = RunReport::new("decide");
    report.wall_time_ms = ms(start);
    describe(&mut report, &points);
    report.algorithm = Some("dominance".into());
    report.parameters = Parameters {
        s: Some(args.tuning.block_label(2 * points.len(), points.dim())),
        kernel: Some(args.tuning.kernel.name().into()),
        delta: Some(args.delta),
        strict: Some(args.strict),
        ..Parameters::default()
    };
    report.decision_calls = Some(1);
    report.result = json!({ "pair_count": found.len(), "pairs": found.pairs });
    report.emit();
    Ok(())
}

fn cmd_closest(args: ClosestArgs) -> CmdResult {
    let points = read_points(&args.input)?;
    let config = args.tuning.config();
    let mut report = RunReport::new("closest");
    describe(&mut report, &points);
    report.parameters.s = Some(args.tuning.block_label(2 * points.len(), points.dim()));
    report.parameters.kernel = Some(args.tuning.kernel.name().into());

    let start = Instant::now();
    let pair = match args.algo {
        ClosestAlgo::Brute => {
            report.algorithm = Some("brute".into());
            report.parameters.s = None;
            report.parameters.kernel = None;
            closest_pair_bruteforce(&points)?
        }
        ClosestAlgo::Det => {
            report.algorithm = Some("det".into());
            let (pair, trace) = closest_pair_deterministic_traced(
                &points,
                &config,
                DeterministicOptions::default(),
            )?;
            report.decision_calls = Some(trace.decision_calls);
            pair
        }
        ClosestAlgo::Rand => {
            report.algorithm = Some("rand".into());
            report.seed = Some(args.seed);
            let (pair, trace) = closest_pair_randomized_traced(&points, args.seed, &config)?;
            report.decision_calls = Some(trace.decision_calls);
            report.iterations = Some(trace.iterations);
            pair
        }
        ClosestAlgo::Intmm | ClosestAlgo::Bisect | ClosestAlgo::Auto => {
            let strategy = match args.algo {
                ClosestAlgo::Intmm => IntegerStrategy::MinPlus,
                ClosestAlgo::Bisect => IntegerStrategy::Bisect,
                _ => IntegerStrategy::Auto,
            };
            // The encoded product needs a big-integer kernel; bit packing does not apply.
            let encoded_kernel = match args.tuning.kernel.choice().kernel() {
                Kernel::Bitpack => Kernel::Naive,
                other => other,
            };
            let options = IntegerOptions {
                decision: config,
                encoded: EncodedOptions {
                    kernel: encoded_kernel,
                    bound_guard: args.guard,
                },
                word_factor: args.word_factor,
            };
            let solution = closest_pair_integer(&points, strategy, &options)?;
            report.algorithm = Some(match solution.strategy {
                IntegerStrategy::MinPlus => "intmm".into(),
                IntegerStrategy::Dominance => "det".into(),
                other => other.name().into(),
            });
            report.parameters.strategy = Some(strategy.name().into());
            if solution.strategy == IntegerStrategy::MinPlus {
                report.parameters.s = None;
                report.parameters.kernel = Some(encoded_kernel.name().into());
            } else {
                report.decision_calls = Some(solution.decision_calls);
            }
            solution.pair
        }
    };
    report.wall_time_ms = ms(start);
    report.result = json!({ "pair": [pair.i, pair.j], "distance": pair.dist });
    report.emit();
    Ok(())
}

fn cmd_predict(args: PredictArgs) -> CmdResult {
    let start = Instant::now();
    let p = predict_exponent(args.zeta)?;
    let mut report = RunReport::new("predict");
    report.algorithm = Some("exponent-model".into());
    report.result = json!({
        "zeta": p.zeta,
        "exponent": p.exponent,
        "regime": match p.regime {
            domprod_core::dominance::Regime::SmallDimension => "small-dimension".to_string(),
            domprod_core::dominance::Regime::Interpolated { segment } => format!("interpolated[{segment}]"),
        },
        "r": p.r,
        "omega_r": p.omega_r,
        "linear_form": [p.linear_form.0, p.linear_form.1],
        "published_uv": p.published_uv.map(|(u, v)| [u, v]),
        "unmodelled_o1": p.unmodelled_o1,
    });
    report.wall_time_ms = ms(start);
    report.emit();
    Ok(())
}

fn configure_threads(threads: Option<usize>) -> Result<(), String> {
    if let Some(t) = threads {
        if t == 0 {
            return Err("--threads must be at least 1".into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(msg) = configure_threads(cli.threads) {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    let outcome = match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Dominance(a) => cmd_dominance(a),
        Command::Decide(a) => cmd_decide(a),
        Command::Closest(a) => cmd_closest(a),
        Command::Predict(a) => cmd_predict(a),
        Command::Bench(a) => bench::run(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (Failure::Io(msg) | Failure::Contract(msg)) = &f;
            eprintln!("error: {msg}");
            ExitCode::from(f.code())
        }
    }
}
