//! Command-line front end. Exit codes: 0 success, 1 usage error, 2 bad or
//! infeasible input.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::baselines::{solve, SolveOptions, StrategyKind};
use crate::bench::{run_bench, BenchError, BenchPlan};
use crate::ga::GaParams;
use crate::model::{Chromosome, CostBreakdown, Instance, TimingParams, YardState};
use crate::scenario::{generate_instance, preset, ScenarioConfig};
use crate::sim::Evaluator;

pub const THREADS_ENV: &str = "QUAYDECK_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "quaydeck",
    version,
    about = "Quay-crane dual cycling and dockyard rehandle optimizer"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate an instance from a preset scenario or custom dimensions.
    Generate(GenerateArgs),
    /// Solve an instance with one strategy.
    Solve(SolveArgs),
    /// Run repeated paired comparisons and write CSV reports.
    Bench(BenchArgs),
    /// Check an instance and list its violations.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
struct GenerateArgs {
    /// Preset scenario 1..=6.
    #[arg(long, required_unless_present = "stacks", conflicts_with = "stacks")]
    scenario: Option<u32>,
    /// Custom number of ship stacks.
    #[arg(long, requires = "max_height")]
    stacks: Option<usize>,
    /// Custom maximum ship stack height.
    #[arg(long)]
    max_height: Option<u32>,
    #[arg(long, default_value_t = 6)]
    yard_cap: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when omitted.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Clone)]
struct TimingArgs {
    /// Single-cycle time in seconds.
    #[arg(long, default_value_t = 90.0)]
    alpha: f64,
    /// Dual-cycle time in seconds.
    #[arg(long, default_value_t = 170.0)]
    beta: f64,
    /// Rehandle time in seconds.
    #[arg(long, default_value_t = 60.0)]
    gamma: f64,
}

impl TimingArgs {
    fn timing(&self) -> TimingParams {
        TimingParams {
            alpha: self.alpha,
            beta: self.beta,
            gamma: self.gamma,
        }
    }
}

#[derive(Debug, Args, Clone)]
struct GaArgs {
    /// File of `key = value` GA settings; flags below override it.
    #[arg(long, value_name = "FILE")]
    ga_config: Option<PathBuf>,
    #[arg(long)]
    population: Option<usize>,
    #[arg(long)]
    crossover_rate: Option<f64>,
    #[arg(long)]
    mutation_rate: Option<f64>,
    #[arg(long)]
    elite_fraction: Option<f64>,
    #[arg(long)]
    generations: Option<usize>,
    #[arg(long)]
    stagnation: Option<usize>,
}

#[derive(Debug, Args)]
struct SolveArgs {
    /// Instance JSON file.
    instance: PathBuf,
    #[arg(long, default_value = "qcdc-dr-ga")]
    strategy: StrategyKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    timing: TimingArgs,
    #[command(flatten)]
    ga: GaArgs,
    /// Directory for solution.json and trace.csv; the solution goes to
    /// stdout when omitted.
    #[arg(short = 'o', long = "out-dir")]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Comma-separated preset ids.
    #[arg(
        long,
        alias = "scenario",
        value_delimiter = ',',
        default_value = "1,2,3,4,5,6"
    )]
    scenarios: Vec<u32>,
    /// Comma-separated strategy names.
    #[arg(
        long,
        alias = "strategy",
        value_delimiter = ',',
        default_value = "greedy,bilevel,ilsrs1,ilsrs2,qcdc-dr-ga"
    )]
    strategies: Vec<StrategyKind>,
    #[arg(long, default_value_t = 20)]
    reps: usize,
    /// Base seed; repetition k uses seed + k.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Significance level of the paired t-tests.
    #[arg(long, default_value_t = 0.05)]
    significance: f64,
    #[command(flatten)]
    timing: TimingArgs,
    #[command(flatten)]
    ga: GaArgs,
    #[arg(short = 'o', long = "out-dir", default_value = "bench-out")]
    out_dir: PathBuf,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    instance: PathBuf,
}

/// Serialized solver output. `unload_seq` is 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub strategy: StrategyKind,
    pub unload_seq: Vec<usize>,
    pub yard: YardState,
    pub cost: CostBreakdown,
}

impl SolutionFile {
    pub fn chromosome(&self) -> Chromosome {
        Chromosome {
            unload_seq: self.unload_seq.iter().map(|&s| s.wrapping_sub(1)).collect(),
            yard: self.yard.clone(),
        }
    }
}

enum Failure {
    Usage(String),
    Data(String),
}

impl From<BenchError> for Failure {
    fn from(e: BenchError) -> Self {
        match e {
            BenchError::InvalidPlan(m) => Failure::Usage(m),
            e => Failure::Data(e.to_string()),
        }
    }
}

fn threads_from_env() -> Result<Option<usize>, Failure> {
    match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Failure::Usage(format!(
                "{THREADS_ENV} must be a positive integer, got {v:?}"
            ))),
        },
        _ => Ok(None),
    }
}

fn ga_params(args: &GaArgs, seed: u64) -> Result<GaParams, Failure> {
    let mut p = GaParams::default();
    if let Some(path) = &args.ga_config {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
        p.apply_config(&text)
            .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    }
    p.seed = seed;
    if let Some(v) = args.population {
        p.population_size = v;
    }
    if let Some(v) = args.crossover_rate {
        p.crossover_rate = v;
    }
    if let Some(v) = args.mutation_rate {
        p.mutation_rate = v;
    }
    if let Some(v) = args.elite_fraction {
        p.elite_fraction = v;
    }
    if let Some(v) = args.generations {
        p.max_generations = v;
    }
    if let Some(v) = args.stagnation {
        p.stagnation_limit = v;
    }
    p.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(p)
}

fn load_instance(path: &Path) -> Result<Instance, Failure> {
    let text =
        fs::read_to_string(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
    Instance::from_json(&text).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Data(format!("{}: {e}", p.display()))),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.write_all(b"\n"))
                .map_err(|e| Failure::Data(format!("stdout: {e}")))
        }
    }
}

fn generate(args: GenerateArgs) -> Result<(), Failure> {
    let mut cfg = match (args.scenario, args.stacks, args.max_height) {
        (Some(id), _, _) => preset(id).map_err(|e| Failure::Usage(e.to_string()))?,
        (None, Some(s), Some(h)) => ScenarioConfig::new(s, h),
        _ => {
            return Err(Failure::Usage(
                "give --scenario or --stacks with --max-height".into(),
            ))
        }
    };
    cfg.yard_cap = args.yard_cap;
    cfg.seed = args.seed;
    let inst = generate_instance(&cfg).map_err(|e| match e {
        crate::scenario::ScenarioError::InvalidConfig(m) => Failure::Usage(m),
        e => Failure::Data(e.to_string()),
    })?;
    write_out(args.out.as_deref(), &inst.to_json())
}

fn solve_cmd(args: SolveArgs, threads: Option<usize>) -> Result<(), Failure> {
    let timing = args.timing.timing();
    timing
        .validate()
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let params = ga_params(&args.ga, args.seed)?;
    let inst = load_instance(&args.instance)?;
    if let Some(v) = inst.validate().first() {
        return Err(Failure::Data(format!("{}: {v}", args.instance.display())));
    }
    let opts = SolveOptions {
        timing,
        params,
        threads,
    };
    let sol = solve(args.strategy, &inst, &opts)
        .map_err(|e| Failure::Data(format!("{}: {e}", args.instance.display())))?;
    let file = SolutionFile {
        strategy: sol.strategy,
        unload_seq: sol.chromosome.unload_seq.iter().map(|s| s + 1).collect(),
        yard: sol.chromosome.yard.clone(),
        cost: sol.cost.clone(),
    };
    let json = serde_json::to_string_pretty(&file).expect("solution serializes");
    match &args.out_dir {
        None => write_out(None, &json),
        Some(dir) => {
            let io_err = |p: &Path, e: io::Error| Failure::Data(format!("{}: {e}", p.display()));
            fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
            write_out(Some(&dir.join("solution.json")), &json)?;
            let (_, trace) = Evaluator::new(&inst.plan, timing, sol.mode)
                .trace(&sol.chromosome)
                .map_err(|e| Failure::Data(e.to_string()))?;
            let tpath = dir.join("trace.csv");
            let f = fs::File::create(&tpath).map_err(|e| io_err(&tpath, e))?;
            trace
                .write_csv(io::BufWriter::new(f))
                .map_err(|e| io_err(&tpath, e))?;
            println!(
                "{}: {:.2} min ({} single, {} dual, {} rehandles)",
                sol.strategy,
                sol.cost.total_minutes(),
                sol.cost.singles,
                sol.cost.duals,
                sol.cost.rehandles
            );
            Ok(())
        }
    }
}

fn bench_cmd(args: BenchArgs, threads: Option<usize>) -> Result<(), Failure> {
    let plan = BenchPlan {
        scenarios: args.scenarios,
        strategies: args.strategies,
        repetitions: args.reps,
        base_seed: args.seed,
        timing: args.timing.timing(),
        params: ga_params(&args.ga, args.seed)?,
        alpha: args.significance,
    };
    if !(plan.alpha > 0.0 && plan.alpha < 1.0) {
        return Err(Failure::Usage("--significance must be in (0, 1)".into()));
    }
    let report = run_bench(&plan, threads)?;
    let files = report.write(&args.out_dir)?;
    for s in &report.stats {
        let imp = s
            .improvement_pct
            .map_or(String::from("-"), |v| format!("{v:.2}%"));
        println!(
            "scenario {} {:>10}: mean {:8.2} min  improvement {imp}",
            s.scenario, s.strategy, s.mean
        );
    }
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn validate_cmd(args: ValidateArgs) -> Result<(), Failure> {
    let inst = load_instance(&args.instance)?;
    let v = inst.validate();
    if v.is_empty() {
        println!("{}: ok", args.instance.display());
        return Ok(());
    }
    let lines: Vec<String> = v
        .iter()
        .map(|x| format!("{}: {x}", args.instance.display()))
        .collect();
    Err(Failure::Data(lines.join("\n")))
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = threads_from_env().and_then(|threads| match cli.command {
        Command::Generate(a) => generate(a),
        Command::Solve(a) => solve_cmd(a, threads),
        Command::Bench(a) => bench_cmd(a, threads),
        Command::Validate(a) => validate_cmd(a),
    });
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}\n\nRun `quaydeck --help` for usage.");
            EXIT_USAGE
        }
        Err(Failure::Data(m)) => {
            eprintln!("error: {m}");
            EXIT_DATA
        }
    }
}
