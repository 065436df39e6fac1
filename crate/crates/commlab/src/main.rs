//! Batch front end: instance generation, protocol runs, reductions with
//! built-in oracle cross-checks, model translations, protocol search, and
//! trade-off tables. All randomness flows from a single `--seed` and
//! identical invocations produce byte-identical outputs.

use clap::{Args, Parser, Subcommand, ValueEnum};
use commlab::analysis::{
    exhaustive_protocol_search, tradeoff_report, Alternation, FunctionMatrix, KChoice, RFamily,
    TradeoffParams, TradeoffRow,
};
use commlab::model::{
    run_round_protocol, run_sync_protocol, rounds_to_sync, sync_to_rounds, CostReport, PlayerId,
};
use commlab::problems::{
    eval_level_strategy, eval_median, eval_pointer_jumping, eval_strategy, gen_level_strategy,
    gen_median, gen_pointer_jumping, gen_strategy, LevelStrategyInstance, MedianInstance,
    PointerJumpingInstance, StrategyInstance,
};
use commlab::protocols::{
    median_binsearch_protocol, pointer_jumping_naive_protocol, strategy_batched_sync_protocol,
    strategy_naive_protocol,
};
use commlab::reductions::{
    level_strategy_to_strategy, pointer_jumping_to_level_strategy, strategy_to_median,
};
use serde::Serialize;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "commlab", version, about = "Two-party communication laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a problem instance as JSON.
    Gen(GenArgs),
    /// Run a protocol family on an instance and report its costs.
    Run(RunArgs),
    /// Apply a reduction (or the full chain) and cross-check the decode
    /// against the brute-force evaluator.
    Reduce(ReduceArgs),
    /// Translate a protocol family between the models and verify outputs.
    Translate(TranslateArgs),
    /// Exhaustive protocol search over a function matrix.
    Search(SearchArgs),
    /// Evaluate the round/communication trade-off inequalities on a grid.
    Tradeoff(TradeoffArgs),
    /// Run protocol families across sizes and emit a cost CSV.
    Bench(BenchArgs),
    /// Decode a target-problem output back to the source problem.
    Decode(DecodeArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Problem {
    Strategy,
    LevelStrategy,
    PointerJumping,
    Median,
}

#[derive(Args)]
struct SizeArgs {
    /// Strategy tree height.
    #[arg(long)]
    height: Option<u32>,
    /// Level-Strategy arity.
    #[arg(long)]
    arity: Option<u32>,
    /// Pointer list length.
    #[arg(long)]
    n: Option<u32>,
    /// Pointer-jumping step count / Level-Strategy height.
    #[arg(long, visible_alias = "k")]
    steps: Option<u32>,
    /// Median universe bound.
    #[arg(long)]
    l: Option<u64>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    problem: Problem,
    #[arg(long)]
    seed: u64,
    #[command(flatten)]
    size: SizeArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Family {
    StrategyNaive,
    StrategyBatched,
    MedianBinsearch,
    PjNaive,
}

impl Family {
    fn name(self) -> &'static str {
        match self {
            Family::StrategyNaive => "strategy-naive",
            Family::StrategyBatched => "strategy-batched",
            Family::MedianBinsearch => "median-binsearch",
            Family::PjNaive => "pj-naive",
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_enum)]
    family: Family,
    /// Load the instance from a JSON file instead of generating it.
    #[arg(long, value_name = "FILE")]
    r#in: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    size: SizeArgs,
    /// Block size for the batched Strategy protocol.
    #[arg(long)]
    block: Option<u32>,
    /// Write the cost report as one JSON line here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the transcript as one JSON line here.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Reduction {
    /// Level-Strategy -> Strategy.
    LsStrategy,
    /// Pointer-Jumping -> Level-Strategy.
    PjLs,
    /// Strategy -> Median.
    StrategyMedian,
}

#[derive(Args)]
struct ReduceArgs {
    #[arg(long, value_enum, conflicts_with = "chain")]
    reduction: Option<Reduction>,
    /// Run the whole Pointer-Jumping -> Median chain.
    #[arg(long, value_parser = ["pj-median"])]
    chain: Option<String>,
    #[arg(long, value_name = "FILE")]
    r#in: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    size: SizeArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Direction {
    /// Round model -> synchronized bit model.
    Sync,
    /// Synchronized bit model -> round model.
    Rounds,
    /// Rounds -> sync -> rounds.
    Roundtrip,
}

#[derive(Args)]
struct TranslateArgs {
    #[arg(long, value_enum)]
    family: Family,
    #[arg(long, value_enum)]
    to: Direction,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    size: SizeArgs,
    #[arg(long)]
    block: Option<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SearchArgs {
    /// JSON file holding the matrix as an array of rows.
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long)]
    rounds: u32,
    #[arg(long)]
    bits: u32,
    #[arg(long, value_parser = ["strict", "free"], default_value = "strict")]
    alternation: String,
    #[arg(long, value_parser = ["alice", "bob"], default_value = "alice")]
    first: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TradeoffArgs {
    #[arg(long = "r", value_parser = ["log-pow", "log-loglog"])]
    r_family: String,
    #[arg(long)]
    eps: Option<f64>,
    /// Derive k from n (`sqrt` = ceil(sqrt(n/log2 n))).
    #[arg(long, value_parser = ["sqrt"], conflicts_with = "kgrid")]
    kfam: Option<String>,
    /// Comma-separated explicit k grid.
    #[arg(long, value_delimiter = ',')]
    kgrid: Vec<u64>,
    /// Comma-separated n grid.
    #[arg(long, value_delimiter = ',', required = true)]
    ngrid: Vec<u64>,
    /// Constant on the linear side of the second inequality.
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Families to benchmark.
    #[arg(long, value_enum, value_delimiter = ',', required = true)]
    family: Vec<Family>,
    /// Sizes (height / universe bound / list length, per family).
    #[arg(long, value_delimiter = ',', required = true)]
    sizes: Vec<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Block size override for the batched family.
    #[arg(long)]
    block: Option<u32>,
    /// Step count for pointer jumping.
    #[arg(long, default_value_t = 3)]
    steps: u32,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DecodeArgs {
    /// Reduction whose decode map to apply; `chain-pj-median` composes all.
    #[arg(long, value_parser = ["ls-strategy", "pj-ls", "strategy-median", "chain-pj-median"])]
    reduction: String,
    /// Source instance the reduction was built from.
    #[arg(long, value_name = "FILE")]
    r#in: PathBuf,
    /// Target-problem output value to decode.
    #[arg(long)]
    value: u64,
}

enum CliError {
    /// Bad input of any kind: exit code 2.
    Validation(String),
    /// A built-in oracle cross-check failed: exit code 1.
    Mismatch(String),
}

impl CliError {
    fn validation(err: impl std::fmt::Display) -> Self {
        CliError::Validation(err.to_string())
    }
}

type CliResult<T = ()> = Result<T, CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Mismatch(msg)) => {
            eprintln!("error: oracle mismatch: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(command: Command) -> CliResult {
    match command {
        Command::Gen(args) => cmd_gen(args),
        Command::Run(args) => cmd_run(args),
        Command::Reduce(args) => cmd_reduce(args),
        Command::Translate(args) => cmd_translate(args),
        Command::Search(args) => cmd_search(args),
        Command::Tradeoff(args) => cmd_tradeoff(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Decode(args) => cmd_decode(args),
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> CliResult {
    match out {
        Some(path) => fs::write(path, text).map_err(CliError::validation),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json_line<T: Serialize>(value: &T) -> String {
    let mut line = serde_json::to_string(value).expect("serializable");
    line.push('\n');
    line
}

fn require<T>(value: Option<T>, flag: &str) -> CliResult<T> {
    value.ok_or_else(|| CliError::Validation(format!("missing required flag --{flag}")))
}

fn load_json<T: serde::de::DeserializeOwned>(path: &PathBuf) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(CliError::validation)?;
    serde_json::from_str(&text).map_err(CliError::validation)
}

fn cmd_gen(args: GenArgs) -> CliResult {
    let line = match args.problem {
        Problem::Strategy => {
            let height = require(args.size.height, "height")?;
            json_line(&gen_strategy(args.seed, height).map_err(CliError::validation)?)
        }
        Problem::LevelStrategy => {
            let arity = require(args.size.arity, "arity")?;
            let height = require(args.size.steps.or(args.size.height), "height")?;
            json_line(&gen_level_strategy(args.seed, arity, height).map_err(CliError::validation)?)
        }
        Problem::PointerJumping => {
            let n = require(args.size.n, "n")?;
            let steps = require(args.size.steps, "steps")?;
            json_line(&gen_pointer_jumping(args.seed, n, steps).map_err(CliError::validation)?)
        }
        Problem::Median => {
            let l = require(args.size.l, "l")?;
            json_line(&gen_median(args.seed, l).map_err(CliError::validation)?)
        }
    };
    emit(&args.out, &line)
}

#[derive(Serialize)]
struct RunRecord {
    family: &'static str,
    output: u64,
    report: CostReport,
}

fn cmd_run(args: RunArgs) -> CliResult {
    let (record, report_line, trace_line) = match args.family {
        Family::StrategyNaive => {
            let inst: StrategyInstance = match &args.r#in {
                Some(path) => load_json(path)?,
                None => gen_strategy(args.seed, require(args.size.height, "height")?)
                    .map_err(CliError::validation)?,
            };
            inst.validate().map_err(CliError::validation)?;
            let family = strategy_naive_protocol(inst.height).map_err(CliError::validation)?;
            let run = family.run(&inst, &inst).map_err(CliError::validation)?;
            (
                RunRecord {
                    family: family.name,
                    output: run.output,
                    report: run.report,
                },
                run.report.to_json_line(),
                json_line(&run.transcript),
            )
        }
        Family::StrategyBatched => {
            let inst: StrategyInstance = match &args.r#in {
                Some(path) => load_json(path)?,
                None => gen_strategy(args.seed, require(args.size.height, "height")?)
                    .map_err(CliError::validation)?,
            };
            inst.validate().map_err(CliError::validation)?;
            let block = args
                .block
                .unwrap_or_else(|| commlab::model::ceil_log2(u64::from(inst.height)).max(1));
            let family =
                strategy_batched_sync_protocol(inst.height, block).map_err(CliError::validation)?;
            let run = family.run(&inst, &inst).map_err(CliError::validation)?;
            (
                RunRecord {
                    family: family.name,
                    output: run.output,
                    report: run.report,
                },
                run.report.to_json_line(),
                json_line(&run.history),
            )
        }
        Family::MedianBinsearch => {
            let inst: MedianInstance = match &args.r#in {
                Some(path) => load_json(path)?,
                None => gen_median(args.seed, require(args.size.l, "l")?)
                    .map_err(CliError::validation)?,
            };
            inst.validate().map_err(CliError::validation)?;
            let family =
                median_binsearch_protocol(inst.universe_bound).map_err(CliError::validation)?;
            let run = family.run(&inst, &inst).map_err(CliError::validation)?;
            (
                RunRecord {
                    family: family.name,
                    output: run.output,
                    report: run.report,
                },
                run.report.to_json_line(),
                json_line(&run.transcript),
            )
        }
        Family::PjNaive => {
            let inst: PointerJumpingInstance = match &args.r#in {
                Some(path) => load_json(path)?,
                None => gen_pointer_jumping(
                    args.seed,
                    require(args.size.n, "n")?,
                    require(args.size.steps, "steps")?,
                )
                .map_err(CliError::validation)?,
            };
            inst.validate().map_err(CliError::validation)?;
            let family = pointer_jumping_naive_protocol(inst.size, inst.steps)
                .map_err(CliError::validation)?;
            let run = family.run(&inst, &inst).map_err(CliError::validation)?;
            (
                RunRecord {
                    family: family.name,
                    output: run.output,
                    report: run.report,
                },
                run.report.to_json_line(),
                json_line(&run.transcript),
            )
        }
    };
    println!("{}", json_line(&record).trim_end());
    if args.out.is_some() {
        emit(&args.out, &format!("{report_line}\n"))?;
    }
    if args.trace.is_some() {
        emit(&args.trace, &trace_line)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct ReduceRecord<S: Serialize, T: Serialize> {
    reduction: &'static str,
    source: S,
    target: T,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<commlab::reductions::MedianReductionTrace>,
    source_oracle: u64,
    target_oracle: u64,
    decoded: u64,
    verified: bool,
}

fn finish_reduce<S: Serialize, T: Serialize>(
    record: ReduceRecord<S, T>,
    out: &Option<PathBuf>,
) -> CliResult {
    let line = json_line(&record);
    emit(out, &line)?;
    if record.verified {
        Ok(())
    } else {
        Err(CliError::Mismatch(format!(
            "{}: decoded {} but the evaluator says {}",
            record.reduction, record.decoded, record.source_oracle
        )))
    }
}

fn cmd_reduce(args: ReduceArgs) -> CliResult {
    if let Some(chain) = &args.chain {
        debug_assert_eq!(chain, "pj-median");
        return cmd_reduce_chain(args);
    }
    match require(args.reduction, "reduction")? {
        Reduction::LsStrategy => {
            let inst: LevelStrategyInstance = match &args.r#in {
                Some(path) => load_json(path)?,
                None => gen_level_strategy(
                    args.seed,
                    require(args.size.arity, "arity")?,
                    require(args.size.steps.or(args.size.height), "height")?,
                )
                .map_err(CliError::validation)?,
            };
            inst.validate().map_err(CliError::validation)?;
            let (target, decode) =
                level_strategy_to_strategy(&inst).map_err(CliError::validation)?;
            let source_oracle = eval_level_strategy(&inst);
            let target_oracle = eval_strategy(&target);
            let decoded = decode.apply(target_oracle).unwrap_or(0);
            finish_reduce(
                ReduceRecord {
                    reduction: "ls-strategy",
                    source: inst,
                    target,
                    trace: None,
                    source_oracle,
                    target_oracle,
                    decoded,
                    verified: decoded == source_oracle,
                },
                &args.out,
            )
        }
        Reduction::PjLs => {
            let inst: PointerJumpingInstance = match &args.r#in {
                Some(path) => load_json(path)?,
                None => gen_pointer_jumping(
                    args.seed,
                    require(args.size.n, "n")?,
                    require(args.size.steps, "steps")?,
                )
                .map_err(CliError::validation)?,
            };
            inst.validate().map_err(CliError::validation)?;
            let (target, decode) =
                pointer_jumping_to_level_strategy(&inst).map_err(CliError::validation)?;
            let source_oracle = eval_pointer_jumping(&inst);
            let target_oracle = eval_level_strategy(&target);
            let decoded = decode.apply(target_oracle).unwrap_or(0);
            finish_reduce(
                ReduceRecord {
                    reduction: "pj-ls",
                    source: inst,
                    target,
                    trace: None,
                    source_oracle,
                    target_oracle,
                    decoded,
                    verified: decoded == source_oracle,
                },
                &args.out,
            )
        }
        Reduction::StrategyMedian => {
            let inst: StrategyInstance = match &args.r#in {
                Some(path) => load_json(path)?,
                None => gen_strategy(args.seed, require(args.size.height, "height")?)
                    .map_err(CliError::validation)?,
            };
            inst.validate().map_err(CliError::validation)?;
            let (target, decode, trace) =
                strategy_to_median(&inst).map_err(CliError::validation)?;
            let source_oracle = eval_strategy(&inst);
            let target_oracle = eval_median(&target);
            let decoded = decode.apply(target_oracle).unwrap_or(u64::MAX);
            finish_reduce(
                ReduceRecord {
                    reduction: "strategy-median",
                    source: inst,
                    target,
                    trace: Some(trace),
                    source_oracle,
                    target_oracle,
                    decoded,
                    verified: decoded == source_oracle,
                },
                &args.out,
            )
        }
    }
}

#[derive(Serialize)]
struct ChainRecord {
    chain: &'static str,
    source: PointerJumpingInstance,
    level_strategy_leaves: u64,
    strategy_height: u32,
    median: MedianInstance,
    trace: commlab::reductions::MedianReductionTrace,
    median_value: u64,
    decoded: u64,
    oracle: u64,
    verified: bool,
}

fn cmd_reduce_chain(args: ReduceArgs) -> CliResult {
    let inst: PointerJumpingInstance = match &args.r#in {
        Some(path) => load_json(path)?,
        None => gen_pointer_jumping(
            args.seed,
            require(args.size.n, "n")?,
            require(args.size.steps, "steps")?,
        )
        .map_err(CliError::validation)?,
    };
    inst.validate().map_err(CliError::validation)?;
    let (ls, decode_pj) = pointer_jumping_to_level_strategy(&inst).map_err(CliError::validation)?;
    let (strat, decode_ls) = level_strategy_to_strategy(&ls).map_err(CliError::validation)?;
    let (median, decode_median, trace) =
        strategy_to_median(&strat).map_err(CliError::validation)?;
    let median_value = eval_median(&median);
    let decoded = decode_median
        .apply(median_value)
        .and_then(|leaf| decode_ls.apply(leaf))
        .and_then(|leaf| decode_pj.apply(leaf))
        .ok_or_else(|| CliError::Mismatch("decode chain hit an unreachable value".into()))?;
    let oracle = eval_pointer_jumping(&inst);
    let record = ChainRecord {
        chain: "pj-median",
        source: inst,
        level_strategy_leaves: ls.leaves(),
        strategy_height: strat.height,
        median: median.clone(),
        trace,
        median_value,
        decoded,
        oracle,
        verified: decoded == oracle,
    };
    let line = json_line(&record);
    emit(&args.out, &line)?;
    if record.verified {
        Ok(())
    } else {
        Err(CliError::Mismatch(format!(
            "chain decoded {decoded} but the evaluator says {oracle}"
        )))
    }
}

#[derive(Serialize)]
struct TranslateRecord {
    family: &'static str,
    direction: &'static str,
    source_output: u64,
    target_output: u64,
    source_report: CostReport,
    target_report: CostReport,
    verified: bool,
}

fn finish_translate(record: TranslateRecord, out: &Option<PathBuf>) -> CliResult {
    let line = json_line(&record);
    emit(out, &line)?;
    if record.verified {
        Ok(())
    } else {
        Err(CliError::Mismatch(format!(
            "translation changed the output: {} -> {}",
            record.source_output, record.target_output
        )))
    }
}

fn cmd_translate(args: TranslateArgs) -> CliResult {
    match (args.family, args.to) {
        (Family::StrategyBatched, Direction::Rounds) => {
            let height = require(args.size.height, "height")?;
            let inst = gen_strategy(args.seed, height).map_err(CliError::validation)?;
            let block = args
                .block
                .unwrap_or_else(|| commlab::model::ceil_log2(u64::from(height)).max(1));
            let family =
                strategy_batched_sync_protocol(height, block).map_err(CliError::validation)?;
            let direct = family.run(&inst, &inst).map_err(CliError::validation)?;
            let back = sync_to_rounds(&family.protocol).map_err(CliError::validation)?;
            let translated = run_round_protocol(&back, &inst, &inst).map_err(CliError::validation)?;
            finish_translate(
                TranslateRecord {
                    family: family.name,
                    direction: "sync->rounds",
                    source_output: direct.output,
                    target_output: translated.output,
                    source_report: direct.report,
                    target_report: translated.report,
                    verified: direct.output == translated.output,
                },
                &args.out,
            )
        }
        (Family::StrategyBatched, _) => Err(CliError::Validation(
            "strategy-batched is already a sync protocol; use --to rounds".into(),
        )),
        (family, direction) => {
            // Round-model families: build, then go to sync (and maybe back).
            enum Built {
                Strategy(commlab::protocols::RoundFamily<StrategyInstance>, StrategyInstance),
                Median(commlab::protocols::RoundFamily<MedianInstance>, MedianInstance),
                Pj(
                    commlab::protocols::RoundFamily<PointerJumpingInstance>,
                    PointerJumpingInstance,
                ),
            }
            let built = match family {
                Family::StrategyNaive => {
                    let height = require(args.size.height, "height")?;
                    let inst = gen_strategy(args.seed, height).map_err(CliError::validation)?;
                    Built::Strategy(
                        strategy_naive_protocol(height).map_err(CliError::validation)?,
                        inst,
                    )
                }
                Family::MedianBinsearch => {
                    let l = require(args.size.l, "l")?;
                    let inst = gen_median(args.seed, l).map_err(CliError::validation)?;
                    Built::Median(
                        median_binsearch_protocol(l).map_err(CliError::validation)?,
                        inst,
                    )
                }
                Family::PjNaive => {
                    let n = require(args.size.n, "n")?;
                    let steps = require(args.size.steps, "steps")?;
                    let inst =
                        gen_pointer_jumping(args.seed, n, steps).map_err(CliError::validation)?;
                    Built::Pj(
                        pointer_jumping_naive_protocol(n, steps).map_err(CliError::validation)?,
                        inst,
                    )
                }
                Family::StrategyBatched => unreachable!("handled above"),
            };

            fn go<In>(
                family: commlab::protocols::RoundFamily<In>,
                inst: &In,
                direction: Direction,
                out: &Option<PathBuf>,
            ) -> CliResult
            where
                In: Clone + 'static,
            {
                let direct = family.run(inst, inst).map_err(CliError::validation)?;
                let sync = rounds_to_sync(&family.protocol);
                let (label, target_output, target_report) = match direction {
                    Direction::Sync => {
                        let run = run_sync_protocol(&sync, inst, inst)
                            .map_err(CliError::validation)?;
                        ("rounds->sync", run.output, run.report)
                    }
                    Direction::Roundtrip => {
                        let back = sync_to_rounds(&sync).map_err(CliError::validation)?;
                        let run = run_round_protocol(&back, inst, inst)
                            .map_err(CliError::validation)?;
                        ("rounds->sync->rounds", run.output, run.report)
                    }
                    Direction::Rounds => {
                        return Err(CliError::Validation(
                            "this family is already a round protocol; use --to sync or roundtrip"
                                .into(),
                        ))
                    }
                };
                finish_translate(
                    TranslateRecord {
                        family: family.name,
                        direction: label,
                        source_output: direct.output,
                        target_output,
                        source_report: direct.report,
                        target_report,
                        verified: direct.output == target_output,
                    },
                    out,
                )
            }

            match built {
                Built::Strategy(family, inst) => go(family, &inst, direction, &args.out),
                Built::Median(family, inst) => go(family, &inst, direction, &args.out),
                Built::Pj(family, inst) => go(family, &inst, direction, &args.out),
            }
        }
    }
}

#[derive(Serialize)]
struct SearchRecord {
    rounds: u32,
    bits: u32,
    alternation: String,
    exists: bool,
    replay_verified: bool,
}

fn cmd_search(args: SearchArgs) -> CliResult {
    let entries: Vec<Vec<u64>> = load_json(&args.matrix)?;
    let matrix = FunctionMatrix::new(entries).map_err(CliError::validation)?;
    let policy = match args.alternation.as_str() {
        "free" => Alternation::Free,
        _ => Alternation::Strict {
            first: if args.first == "bob" {
                PlayerId::Bob
            } else {
                PlayerId::Alice
            },
        },
    };
    let witness = exhaustive_protocol_search(&matrix, args.rounds, args.bits, policy)
        .map_err(CliError::validation)?;
    let (exists, replay_verified) = match &witness {
        None => (false, true),
        Some(w) => {
            let ok = (0..matrix.rows()).all(|r| {
                (0..matrix.cols()).all(|c| w.eval(r, c) == matrix.get(r, c))
            });
            (true, ok)
        }
    };
    let record = SearchRecord {
        rounds: args.rounds,
        bits: args.bits,
        alternation: args.alternation.clone(),
        exists,
        replay_verified,
    };
    let line = json_line(&record);
    emit(&args.out, &line)?;
    if replay_verified {
        Ok(())
    } else {
        Err(CliError::Mismatch("witness replay disagrees with the matrix".into()))
    }
}

fn tradeoff_csv(rows: &[TradeoffRow]) -> String {
    let mut csv = String::from("n,k,r_val,i1,i2,ratio1,ratio2\n");
    for row in rows {
        let _ = writeln!(
            csv,
            "{},{},{:.6},{},{},{:.6},{:.6}",
            row.n, row.k, row.r_val, row.i1, row.i2, row.ratio1, row.ratio2
        );
    }
    csv
}

fn cmd_tradeoff(args: TradeoffArgs) -> CliResult {
    let r_family = match args.r_family.as_str() {
        "log-pow" => RFamily::LogPow {
            epsilon: require(args.eps, "eps")?,
        },
        _ => RFamily::LogOverLogLog,
    };
    let params = TradeoffParams::new(r_family, args.c).map_err(CliError::validation)?;
    let k_choice = if args.kgrid.is_empty() {
        if args.kfam.is_none() {
            return Err(CliError::Validation(
                "choose --kfam sqrt or an explicit --kgrid".into(),
            ));
        }
        KChoice::SqrtOverLog
    } else {
        KChoice::Grid(args.kgrid.clone())
    };
    let rows = tradeoff_report(&params, &args.ngrid, &k_choice).map_err(CliError::validation)?;
    emit(&args.out, &tradeoff_csv(&rows))
}

fn cmd_bench(args: BenchArgs) -> CliResult {
    let mut csv = String::from("family,size,rounds,total_bits,nonblank_bits,horizon\n");
    for &family in &args.family {
        for &size in &args.sizes {
            let seed = args.seed.wrapping_add(size);
            let report = match family {
                Family::StrategyNaive => {
                    let height = u32::try_from(size)
                        .map_err(|_| CliError::Validation(format!("size {size} too large")))?;
                    let inst = gen_strategy(seed, height).map_err(CliError::validation)?;
                    let f = strategy_naive_protocol(height).map_err(CliError::validation)?;
                    f.run(&inst, &inst).map_err(CliError::validation)?.report
                }
                Family::StrategyBatched => {
                    let height = u32::try_from(size)
                        .map_err(|_| CliError::Validation(format!("size {size} too large")))?;
                    let block = args
                        .block
                        .unwrap_or_else(|| commlab::model::ceil_log2(u64::from(height)).max(1));
                    let inst = gen_strategy(seed, height).map_err(CliError::validation)?;
                    let f = strategy_batched_sync_protocol(height, block)
                        .map_err(CliError::validation)?;
                    f.run(&inst, &inst).map_err(CliError::validation)?.report
                }
                Family::MedianBinsearch => {
                    let inst = gen_median(seed, size).map_err(CliError::validation)?;
                    let f = median_binsearch_protocol(size).map_err(CliError::validation)?;
                    f.run(&inst, &inst).map_err(CliError::validation)?.report
                }
                Family::PjNaive => {
                    let n = u32::try_from(size)
                        .map_err(|_| CliError::Validation(format!("size {size} too large")))?;
                    let inst =
                        gen_pointer_jumping(seed, n, args.steps).map_err(CliError::validation)?;
                    let f = pointer_jumping_naive_protocol(n, args.steps)
                        .map_err(CliError::validation)?;
                    f.run(&inst, &inst).map_err(CliError::validation)?.report
                }
            };
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{}",
                family.name(),
                size,
                report.rounds_used,
                report.total_bits,
                report.nonblank_bits,
                report.timesteps_used
            );
        }
    }
    emit(&args.out, &csv)
}

fn cmd_decode(args: DecodeArgs) -> CliResult {
    let decoded = match args.reduction.as_str() {
        "ls-strategy" => {
            let inst: LevelStrategyInstance = load_json(&args.r#in)?;
            inst.validate().map_err(CliError::validation)?;
            let (_, decode) = level_strategy_to_strategy(&inst).map_err(CliError::validation)?;
            decode.apply(args.value)
        }
        "pj-ls" => {
            let inst: PointerJumpingInstance = load_json(&args.r#in)?;
            inst.validate().map_err(CliError::validation)?;
            let (_, decode) =
                pointer_jumping_to_level_strategy(&inst).map_err(CliError::validation)?;
            decode.apply(args.value)
        }
        "strategy-median" => {
            let inst: StrategyInstance = load_json(&args.r#in)?;
            inst.validate().map_err(CliError::validation)?;
            let (_, decode, _) = strategy_to_median(&inst).map_err(CliError::validation)?;
            decode.apply(args.value)
        }
        _ => {
            let inst: PointerJumpingInstance = load_json(&args.r#in)?;
            inst.validate().map_err(CliError::validation)?;
            let (ls, decode_pj) =
                pointer_jumping_to_level_strategy(&inst).map_err(CliError::validation)?;
            let (strat, decode_ls) =
                level_strategy_to_strategy(&ls).map_err(CliError::validation)?;
            let (_, decode_median, _) =
                strategy_to_median(&strat).map_err(CliError::validation)?;
            decode_median
                .apply(args.value)
                .and_then(|leaf| decode_ls.apply(leaf))
                .and_then(|leaf| decode_pj.apply(leaf))
        }
    };
    match decoded {
        Some(value) => {
            println!("{value}");
            Ok(())
        }
        None => Err(CliError::Validation(format!(
            "value {} is not reachable from any valid input",
            args.value
        ))),
    }
}
