use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use cdcl_stream::cache::BanditPolicy;
use cdcl_stream::encode::qc::{parse_queen, Square};
use cdcl_stream::generate::{generate, Instance, Schema, StreamSpec};
use cdcl_stream::harness::experiment::load_build_times;
use cdcl_stream::harness::{
    load_results, run_experiment, run_stream, save_results, summarize_rows, ExperimentConfig, ProblemKind,
    ResultRow, RunOptions, Summary,
};
use cdcl_stream::oracle::{solve_pup, solve_qc};
use cdcl_stream::session::Strategy;
use cdcl_stream::stream::{load_stream, save_stream, Delta};

/// Log verbosity, in `env_logger` filter syntax.
const LOG_ENV: &str = "CDCL_STREAM_LOG";

#[derive(Parser)]
#[command(name = "cdcl-stream", version, about = "Streaming CDCL benchmarks with a learned-constraint cache")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an assumption stream and its base instance.
    Generate(GenerateArgs),
    /// Replay a stream under one strategy and write per-tick results.
    Run(RunArgs),
    /// Run a strategy x learning-rate grid over generated streams.
    Experiment(ExperimentArgs),
    /// Box-plot statistics for a results CSV.
    Summarize(SummarizeArgs),
    /// Brute-force satisfiability of every tick of a small stream.
    Oracle(OracleArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Problem {
    Pup,
    Qc,
}

impl From<Problem> for ProblemKind {
    fn from(p: Problem) -> Self {
        match p {
            Problem::Pup => ProblemKind::Pup,
            Problem::Qc => ProblemKind::Qc,
        }
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    problem: Problem,
    /// PUP row length.
    #[arg(long)]
    row_length: Option<usize>,
    /// QC board size.
    #[arg(long)]
    n: Option<u32>,
    #[arg(long, default_value_t = 256)]
    ticks: u64,
    /// Zipf exponent; defaults to 2.2 (PUP) or 1.35 (QC).
    #[arg(long)]
    alpha: Option<f64>,
    /// Restore probability; defaults to 0.8 (PUP) or 0.95 (QC).
    #[arg(long)]
    p: Option<f64>,
    /// Comma-separated mutation cycle such as `m1,m3,m2,m3`.
    #[arg(long)]
    schema: Option<Schema>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Stream file; the instance goes to `<out>.instance.json` next to it.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    stream: PathBuf,
    /// Base instance; defaults to the file written by `generate`.
    #[arg(long)]
    instance: Option<PathBuf>,
    /// One of mrestart, rl, ps, c.
    #[arg(long, default_value = "rl")]
    strategy: String,
    #[arg(long, default_value_t = 0.5)]
    lambda: f64,
    /// Active cache capacity.
    #[arg(long, default_value_t = BanditPolicy::DEFAULT_K)]
    k: usize,
    /// Total cache capacity, active plus frozen.
    #[arg(long = "n", default_value_t = 2 * BanditPolicy::DEFAULT_K)]
    n_store: usize,
    /// Engine seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    timeout_ms: Option<u64>,
    /// Check every model with the independent checker.
    #[arg(long)]
    verify: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ExperimentArgs {
    /// JSON experiment config; the flags below are ignored when given.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "pup")]
    problem: Problem,
    /// Comma-separated row lengths or board sizes; defaults to the full grid.
    #[arg(long, value_delimiter = ',')]
    sizes: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "mrestart,rl,ps,c")]
    strategies: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "0.01,0.1,0.5,1.0")]
    lambdas: Vec<f64>,
    #[arg(long, default_value_t = 256)]
    ticks: u64,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    schema: Option<Schema>,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    seeds: Vec<u64>,
    #[arg(long)]
    timeout_ms: Option<u64>,
    #[arg(long, default_value_t = BanditPolicy::DEFAULT_K)]
    k: usize,
    #[arg(long = "n", default_value_t = 2 * BanditPolicy::DEFAULT_K)]
    n_store: usize,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Output directory for CSVs and summaries.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SummarizeArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long, value_enum)]
    problem: Problem,
    /// Board size when no instance file is available (empty board).
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    stream: PathBuf,
    #[arg(long)]
    instance: Option<PathBuf>,
}

fn instance_path(stream: &Path) -> PathBuf {
    stream.with_extension("instance.json")
}

fn cmd_generate(a: GenerateArgs) -> Result<()> {
    let mut spec = match a.problem {
        Problem::Pup => StreamSpec::pup(a.row_length.context("--row-length is required for pup")?, a.seed),
        Problem::Qc => StreamSpec::qc(a.n.context("--n is required for qc")?, a.seed),
    };
    spec.ticks = a.ticks;
    if let Some(alpha) = a.alpha {
        spec.alpha = alpha;
    }
    if let Some(p) = a.p {
        spec.p_restore = p;
    }
    if let Some(s) = a.schema {
        spec.schema = s;
    }
    let g = generate(&spec)?;
    save_stream(&a.out, &g.deltas)?;
    let inst = instance_path(&a.out);
    g.instance.save(&inst)?;
    println!("wrote {} ticks to {} and instance to {}", g.deltas.len(), a.out.display(), inst.display());
    Ok(())
}

fn cmd_run(a: RunArgs) -> Result<()> {
    let deltas = load_stream(&a.stream)?;
    let inst_file = a.instance.unwrap_or_else(|| instance_path(&a.stream));
    let instance = Instance::load(&inst_file)?;
    let policy = BanditPolicy::new(a.lambda).with_capacity(a.k, a.n_store);
    policy.validate()?;
    let Some(strategy) = Strategy::from_name(&a.strategy, policy) else {
        bail!("unknown strategy `{}` (expected mrestart, rl, ps or c)", a.strategy);
    };
    let options = RunOptions {
        seed: a.seed,
        timeout: a.timeout_ms.map(Duration::from_millis),
        verify: a.verify,
    };
    let run = run_stream(&instance, Arc::new(instance.encode()), &deltas, strategy, options)?;
    let rows: Vec<ResultRow> = run.ticks.iter().map(|t| ResultRow::from_tick(&strategy, t)).collect();
    save_results(&a.out, &rows)?;
    log::info!("program load took {:.3} ms", run.build_time.as_secs_f64() * 1e3);
    println!("{} ticks written to {}", rows.len(), a.out.display());
    if a.verify {
        println!("{} models rejected by the checker", run.invalid_models);
        if run.invalid_models > 0 {
            bail!("invalid models found");
        }
    }
    Ok(())
}

fn cmd_experiment(a: ExperimentArgs) -> Result<()> {
    let config = match &a.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| path.display().to_string())?;
            let mut c: ExperimentConfig = serde_json::from_str(&text)?;
            c.output_dir = a.out.clone();
            c
        }
        None => {
            let base = match a.problem {
                Problem::Pup => ExperimentConfig::pup_default(&a.out),
                Problem::Qc => ExperimentConfig::qc_default(&a.out),
            };
            ExperimentConfig {
                problem: a.problem.into(),
                sizes: if a.sizes.is_empty() { base.sizes.clone() } else { a.sizes },
                strategies: a.strategies,
                lambdas: a.lambdas,
                ticks: a.ticks,
                alpha: a.alpha,
                p_restore: a.p,
                schema: a.schema,
                seeds: a.seeds,
                timeout_ms: a.timeout_ms,
                k: a.k,
                n_store: a.n_store,
                jobs: a.jobs,
                ..base
            }
        }
    };
    let out = run_experiment(&config)?;
    for csv in &out.csv_files {
        let summary = summarize_file(csv)?;
        let path = csv.with_extension("summary.json");
        std::fs::write(&path, summary.to_json()).with_context(|| path.display().to_string())?;
        println!("{}", csv.display());
        print_summary(&summary);
    }
    Ok(())
}

fn summarize_file(csv: &Path) -> Result<Summary> {
    let rows = load_results(csv)?;
    Ok(summarize_rows(&rows, &load_build_times(csv)?)?)
}

fn print_summary(s: &Summary) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(
        out,
        "{:<9} {:>7} {:>10} {:>10} {:>10} {:>10} {:>10} {:>9}",
        "strategy", "lambda", "min_ms", "q1_ms", "median_ms", "q3_ms", "max_ms", "timeouts"
    );
    for r in &s.rows {
        let w = &r.wall_ms;
        let lambda = r.lambda.map_or("-".to_string(), |l| l.to_string());
        let _ = writeln!(
            out,
            "{:<9} {:>7} {:>10.3} {:>10.3} {:>10.3} {:>10.3} {:>10.3} {:>9}",
            r.strategy, lambda, w.min, w.q1, w.median, w.q3, w.max, r.timeouts
        );
    }
}

fn cmd_summarize(a: SummarizeArgs) -> Result<()> {
    let summary = summarize_file(&a.input)?;
    if let Some(out) = &a.out {
        std::fs::write(out, summary.to_json()).with_context(|| out.display().to_string())?;
    }
    print_summary(&summary);
    Ok(())
}

fn queen_set(delta: &Delta, placed: &mut BTreeSet<Square>) -> Result<()> {
    for (atoms, add) in [(&delta.remove, false), (&delta.add, true)] {
        for a in atoms {
            let q = parse_queen(a).with_context(|| format!("tick {}: `{a}` is not a queen atom", delta.tick))?;
            if add {
                placed.insert(q);
            } else {
                placed.remove(&q);
            }
        }
    }
    Ok(())
}

fn toggle(set: &mut BTreeSet<String>, name: &str, on: bool) {
    if on {
        set.insert(name.to_string());
    } else {
        set.remove(name);
    }
}

fn cmd_oracle(a: OracleArgs) -> Result<()> {
    let deltas = load_stream(&a.stream)?;
    let inst_file = a.instance.clone().unwrap_or_else(|| instance_path(&a.stream));
    let instance = if inst_file.exists() { Some(Instance::load(&inst_file)?) } else { None };
    let mut out = std::io::stdout().lock();
    match (a.problem, instance) {
        (Problem::Pup, Some(Instance::Pup(inst))) => {
            let (mut zones, mut sensors) = (inst.disabled_zones.clone(), inst.disabled_sensors.clone());
            for d in &deltas {
                for (atoms, on) in [(&d.add, true), (&d.remove, false)] {
                    for atom in atoms {
                        if let Some(z) = atom.strip_prefix("zone_off_") {
                            toggle(&mut zones, z, on);
                        } else if let Some(s) = atom.strip_prefix("sensor_off_") {
                            toggle(&mut sensors, s, on);
                        } else {
                            bail!("tick {}: `{atom}` is not a PUP stream atom", d.tick);
                        }
                    }
                }
                let sat = solve_pup(&inst, &zones, &sensors).is_some();
                writeln!(out, "{} {}", d.tick, if sat { "model" } else { "incoherent" })?;
            }
        }
        (Problem::Pup, _) => bail!("pup needs an instance file ({} not found)", inst_file.display()),
        (Problem::Qc, inst) => {
            let (n, mut placed) = match inst {
                Some(Instance::Qc(q)) => (q.n, q.placed.clone()),
                Some(Instance::Pup(_)) => bail!("{} is a PUP instance", inst_file.display()),
                None => (a.n.context("--n is required without an instance file")?, BTreeSet::new()),
            };
            if let Some(flag) = a.n.filter(|&m| m != n) {
                bail!("--n {flag} disagrees with instance size {n}");
            }
            for d in &deltas {
                queen_set(d, &mut placed)?;
                let sat = solve_qc(n, &placed).is_some();
                writeln!(out, "{} {}", d.tick, if sat { "model" } else { "incoherent" })?;
            }
        }
    }
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or(LOG_ENV, "warn")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Run(a) => cmd_run(a),
        Command::Experiment(a) => cmd_experiment(a),
        Command::Summarize(a) => cmd_summarize(a),
        Command::Oracle(a) => cmd_oracle(a),
    }
}
