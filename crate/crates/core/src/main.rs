use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use lookahead_matching::bench::{
    append_csv, run_scaling, run_stream, write_csv, Algorithm, RunError, RunOptions, ScalingConfig,
};
use lookahead_matching::matcher::{Fault, DEFAULT_THRESHOLD};
use lookahead_matching::{
    generate, parse_stream, serialize_stream, Error, IndicatorStrategy, MateStrategy, Stream,
    WorkloadConfig,
};

const EXIT_USAGE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_VERIFY: u8 = 3;

#[derive(Parser)]
#[command(
    name = "lmatch",
    version,
    about = "Dynamic maximal matching with lookahead"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a stream through one algorithm and emit a CSV record.
    Run(RunArgs),
    /// Generate a seeded random update stream.
    Gen(GenArgs),
    /// Doubling-series experiment comparing lookahead and recompute.
    Scaling(ScalingArgs),
    /// Run a stream with per-update verification and no CSV output.
    Verify(StreamArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Lookahead,
    Recompute,
}

#[derive(Clone, Copy, ValueEnum)]
enum IndicatorArg {
    Matrix,
    Set,
}

#[derive(Clone, Copy, ValueEnum)]
enum MateArg {
    Dense,
    Map,
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    SkipDifferenceGreedy,
    KeepStaleMates,
}

#[derive(Args)]
struct StreamArgs {
    /// Stream file to replay.
    #[arg(long)]
    stream: PathBuf,
    #[arg(long, value_enum, default_value = "lookahead")]
    mode: Mode,
    /// Defaults to `matrix` when the stream declares `n`, `set` otherwise.
    #[arg(long, value_enum)]
    indicator: Option<IndicatorArg>,
    /// Defaults to `dense` when the stream declares `n`, `map` otherwise.
    #[arg(long, value_enum)]
    mate: Option<MateArg>,
    /// Graphs smaller than this are handled one update at a time.
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: usize,
    /// Fixed number of updates per batch phase.
    #[arg(long)]
    phase_override: Option<usize>,
    /// Initialize the adjacency matrix eagerly (counts n² setup operations).
    #[arg(long)]
    eager_setup: bool,
    /// Print each `?` answer to standard output.
    #[arg(long)]
    echo_queries: bool,
    #[arg(long, value_enum, hide = true)]
    inject_fault: Option<FaultArg>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    stream: StreamArgs,
    /// Check every update against the recompute baseline.
    #[arg(long)]
    verify: bool,
    /// Append the record to this CSV file instead of printing it.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 1000)]
    updates: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Probability that an update deletes an existing edge.
    #[arg(long, default_value_t = 0.3)]
    p_delete: f64,
    /// Expected number of `?` lines after each update.
    #[arg(long, default_value_t = 0.0)]
    query_rate: f64,
    /// Mix in inserts of present edges and deletes of absent ones.
    #[arg(long)]
    allow_noop: bool,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScalingArgs {
    /// Smallest log2 of the target graph size.
    #[arg(long, default_value_t = 10)]
    min_exp: u32,
    /// Largest log2 of the target graph size.
    #[arg(long, default_value_t = 16)]
    max_exp: u32,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 0.25)]
    p_delete: f64,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: usize,
    /// With `--indicator`, adds a third lookahead curve using these strategies.
    #[arg(long, value_enum)]
    mate: Option<MateArg>,
    #[arg(long, value_enum)]
    indicator: Option<IndicatorArg>,
    /// Append records to this CSV file instead of printing them.
    #[arg(long)]
    csv: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Input(String),
    Verify(String),
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Self {
        match e {
            RunError::Input(Error::Config(msg)) => Failure::Usage(msg),
            RunError::Input(e) => Failure::Input(e.to_string()),
            e @ RunError::Verification { .. } => Failure::Verify(e.to_string()),
        }
    }
}

fn io_failure(path: &Path, e: io::Error) -> Failure {
    Failure::Input(format!("{}: {e}", path.display()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Run(args) => cmd_run(&args.stream, args.verify, args.csv.as_deref()),
        Command::Verify(args) => cmd_run(&args, true, None),
        Command::Gen(args) => cmd_gen(&args),
        Command::Scaling(args) => cmd_scaling(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INPUT)
        }
        Err(Failure::Verify(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_VERIFY)
        }
    }
}

fn read_stream(path: &Path) -> Result<Stream, Failure> {
    let text = fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
    parse_stream(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn strategies(
    stream: &Stream,
    mate: Option<MateArg>,
    indicator: Option<IndicatorArg>,
) -> Result<(MateStrategy, IndicatorStrategy), Failure> {
    let dense = stream.n.is_some();
    let mate = match mate {
        Some(MateArg::Dense) => MateStrategy::Dense,
        Some(MateArg::Map) => MateStrategy::OrderedMap,
        None if dense => MateStrategy::Dense,
        None => MateStrategy::OrderedMap,
    };
    let indicator = match indicator {
        Some(IndicatorArg::Matrix) => IndicatorStrategy::LazyMatrix,
        Some(IndicatorArg::Set) => IndicatorStrategy::OrderedSet,
        None if dense => IndicatorStrategy::LazyMatrix,
        None => IndicatorStrategy::OrderedSet,
    };
    if !dense && (mate == MateStrategy::Dense || indicator == IndicatorStrategy::LazyMatrix) {
        return Err(Failure::Input(
            "dense mate store and matrix indicator need an `n` header in the stream".into(),
        ));
    }
    Ok((mate, indicator))
}

fn cmd_run(args: &StreamArgs, verify: bool, csv: Option<&Path>) -> Result<(), Failure> {
    let stream = read_stream(&args.stream)?;
    let (mate, indicator) = strategies(&stream, args.mate, args.indicator)?;
    let opts = RunOptions {
        algorithm: match args.mode {
            Mode::Lookahead => Algorithm::Lookahead,
            Mode::Recompute => Algorithm::Recompute,
        },
        mate,
        indicator,
        threshold: args.threshold,
        phase_override: args.phase_override,
        eager_setup: args.eager_setup,
        verify,
        fault: args.inject_fault.map(|f| match f {
            FaultArg::SkipDifferenceGreedy => Fault::SkipDifferenceGreedy,
            FaultArg::KeepStaleMates => Fault::KeepStaleMates,
        }),
    };
    let stream_id = args
        .stream
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "stream".into());

    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let echo = args.echo_queries;
    let outcome = run_stream(&stream, &stream_id, &opts, &mut |u, answer| {
        if echo {
            let _ = match answer {
                Some(v) => writeln!(out, "? {u} -> {v}"),
                None => writeln!(out, "? {u} -> null"),
            };
        }
    });
    out.flush().map_err(|e| Failure::Input(e.to_string()))?;
    let outcome = outcome?;

    if verify && csv.is_none() && !args.echo_queries {
        eprintln!(
            "verified {} updates: final graph {} edges, matching {} edges",
            outcome.record.updates,
            outcome.graph.len(),
            outcome.matching.len()
        );
    }
    if csv.is_none() && (verify || args.echo_queries) {
        // `verify` has no CSV, and echoed answers keep stdout for themselves.
        return Ok(());
    }
    match csv {
        Some(path) => append_csv(path, &[outcome.record]).map_err(|e| io_failure(path, e)),
        None => write_csv(io::stdout().lock(), &[outcome.record], true)
            .map_err(|e| Failure::Input(e.to_string())),
    }
}

fn cmd_gen(args: &GenArgs) -> Result<(), Failure> {
    let cfg = WorkloadConfig::new(args.n, args.updates, args.seed)
        .with_p_delete(args.p_delete)
        .with_query_rate(args.query_rate)
        .with_noops(args.allow_noop);
    let stream = generate(&cfg).map_err(|e| Failure::Usage(e.to_string()))?;
    let text = serialize_stream(&stream);
    match &args.out {
        Some(path) => fs::write(path, text).map_err(|e| io_failure(path, e)),
        None => io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Input(e.to_string())),
    }
}

fn cmd_scaling(args: &ScalingArgs) -> Result<(), Failure> {
    if args.min_exp > args.max_exp || args.max_exp > 24 {
        return Err(Failure::Usage("need min-exp <= max-exp <= 24".into()));
    }
    let extra = match (args.mate, args.indicator) {
        (None, None) => None,
        (mate, indicator) => {
            let mate = match mate.unwrap_or(MateArg::Map) {
                MateArg::Dense => MateStrategy::Dense,
                MateArg::Map => MateStrategy::OrderedMap,
            };
            let indicator = match indicator.unwrap_or(IndicatorArg::Set) {
                IndicatorArg::Matrix => IndicatorStrategy::LazyMatrix,
                IndicatorArg::Set => IndicatorStrategy::OrderedSet,
            };
            Some((mate, indicator))
        }
    };
    let cfg = ScalingConfig {
        exponents: (args.min_exp..=args.max_exp).collect(),
        seed: args.seed,
        p_delete: args.p_delete,
        threshold: args.threshold,
        extra,
    };
    let report = run_scaling(&cfg)?;

    let records = report.records();
    match &args.csv {
        Some(path) => append_csv(path, &records).map_err(|e| io_failure(path, e))?,
        None => write_csv(io::stdout().lock(), &records, true)
            .map_err(|e| Failure::Input(e.to_string()))?,
    }

    eprintln!("exp  m_max     lookahead   recompute   ratio_la  ratio_re");
    for (i, p) in report.points.iter().enumerate() {
        let ratio = |r: &[f64]| {
            i.checked_sub(1)
                .and_then(|j| r.get(j))
                .map_or_else(|| "-".to_string(), |x| format!("{x:.3}"))
        };
        eprintln!(
            "{:<4} {:<9} {:<11.1} {:<11.1} {:<9} {}",
            p.exponent,
            p.m_max,
            p.lookahead.amortized_work(),
            p.recompute.amortized_work(),
            ratio(&report.lookahead_ratios),
            ratio(&report.recompute_ratios),
        );
    }
    if !report.extra_ratios.is_empty() {
        let r: Vec<String> = report
            .extra_ratios
            .iter()
            .map(|x| format!("{x:.3}"))
            .collect();
        eprintln!("third curve ratios: {}", r.join(" "));
    }
    let fit = report.lookahead_fit;
    eprintln!(
        "lookahead fit: {:.2}*log2(m_max) + {:.2}, max relative residual {:.1}%",
        fit.a,
        fit.b,
        100.0 * fit.max_rel_residual
    );
    Ok(())
}
