//! Command-line interface.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fwua_core::{SolverConfig, Variant};

use crate::error::DataError;
use crate::output::{metrics_json, write_combined_csv, write_json, write_trace_csv};
use crate::problems::{
    gen_block_diag_cov, gen_sbm_edges, ingest_edge_list, ingest_ratings, make_link_prediction,
    ProblemInstance, COVARIANCE_SCCG_MU,
};
use crate::run::{run_solve, RunResult};

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(#[from] DataError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Data(_) => EXIT_DATA,
        }
    }
}

impl From<fwua_core::Error> for CliError {
    fn from(e: fwua_core::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "fwua", version, about = "Frank-Wolfe with uniform affine approximations")]
pub struct Cli {
    /// Directory for generated instances, traces and metrics.
    #[arg(long, global = true, env = "FWUA_OUT_DIR", default_value = "fwua-out")]
    pub out_dir: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a problem instance as JSON.
    Generate {
        #[command(subcommand)]
        spec: GenerateSpec,
        /// Output path (defaults to a file in the output directory).
        #[arg(long, short, global = true)]
        output: Option<PathBuf>,
    },
    /// Run one variant and write trace.csv and metrics.json.
    Solve(SolveArgs),
    /// Run several variants on one instance.
    Compare(CompareArgs),
    /// Generate covariance instances and compare variants across seeds.
    Bench(BenchArgs),
}

#[derive(Debug, Subcommand)]
pub enum GenerateSpec {
    /// Block-diagonal covariance recovery.
    Cov {
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long, default_value_t = 5)]
        blocks: usize,
        #[arg(long, default_value_t = 0.2)]
        noise_var: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Link prediction on a stochastic block graph.
    Sbm {
        #[arg(long, default_value_t = 200)]
        nodes: usize,
        #[arg(long, default_value_t = 2)]
        communities: usize,
        #[arg(long, default_value_t = 0.3)]
        p_in: f64,
        #[arg(long, default_value_t = 0.02)]
        p_out: f64,
        #[command(flatten)]
        link: LinkArgs,
    },
    /// Link prediction from an edge-list file.
    Link {
        #[arg(long)]
        edges: PathBuf,
        #[command(flatten)]
        link: LinkArgs,
    },
    /// ℓ1-loss completion from a ratings file.
    Ratings {
        #[arg(long)]
        ratings: PathBuf,
        #[arg(long, default_value_t = 0.2)]
        test_frac: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Args)]
pub struct LinkArgs {
    #[arg(long, default_value_t = 0.5)]
    pub observe_frac: f64,
    #[arg(long, default_value_t = 0.0)]
    pub flip_prob: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantName {
    Fwua,
    Sccg,
    Hcgs,
    Subgrad,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// Iteration count K.
    #[arg(long, default_value_t = 1000)]
    pub max_iters: usize,
    /// FWUA target accuracy.
    #[arg(long, default_value_t = 1e-2)]
    pub epsilon: f64,
    /// Override the instance's regularization weight.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Override the instance's trace-norm radius.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-8)]
    pub lmo_tol: f64,
    #[arg(long, default_value_t = 2000)]
    pub lmo_max_iters: usize,
    /// Freeze the FWUA radius after this iteration.
    #[arg(long)]
    pub freeze_after: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub record_every: usize,
    /// Start every power iteration from a fresh random vector.
    #[arg(long)]
    pub cold_lmo: bool,
    #[arg(long)]
    pub stop_when_stationary: bool,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Format::Csv, Format::Json])]
    pub format: Vec<Format>,
}

impl SolverArgs {
    pub fn config(&self, variant: Variant) -> Result<SolverConfig, CliError> {
        let cfg = SolverConfig {
            max_iters: self.max_iters,
            epsilon: self.epsilon,
            lmo_tol: self.lmo_tol,
            lmo_max_iters: self.lmo_max_iters,
            variant,
            freeze_override: self.freeze_after,
            record_every: self.record_every,
            seed: self.seed,
            warm_start_lmo: !self.cold_lmo,
            stop_when_stationary: self.stop_when_stationary,
        };
        cfg.validate()?;
        for (name, v) in [("lambda", self.lambda), ("delta", self.delta)] {
            if let Some(v) = v {
                if !(v.is_finite() && v >= 0.0) || (name == "delta" && v == 0.0) {
                    return Err(CliError::Config(format!("{name}: must be {}", if name == "delta" { "positive" } else { "nonnegative" })));
                }
            }
        }
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, value_enum, default_value_t = VariantName::Fwua)]
    pub variant: VariantName,
    /// SCCG smoothing width; 0 selects the subgradient limit.
    #[arg(long)]
    pub mu: Option<f64>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [VariantName::Fwua, VariantName::Subgrad, VariantName::Sccg, VariantName::Hcgs])]
    pub variants: Vec<VariantName>,
    /// SCCG smoothing widths; several values run one SCCG trace each.
    #[arg(long, value_delimiter = ',')]
    pub mu: Vec<f64>,
    /// Run the variants on separate threads.
    #[arg(long)]
    pub parallel: bool,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [200])]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    pub seeds: u64,
    #[arg(long, default_value_t = 5)]
    pub blocks: usize,
    #[arg(long, default_value_t = 0.2)]
    pub noise_var: f64,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [VariantName::Fwua, VariantName::Subgrad, VariantName::Sccg, VariantName::Hcgs])]
    pub variants: Vec<VariantName>,
    #[arg(long, value_delimiter = ',')]
    pub mu: Vec<f64>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

/// Maps a variant name and optional width to a solver variant; SCCG with
/// `mu = 0` is the subgradient limit.
pub fn resolve_variant(name: VariantName, mu: Option<f64>) -> Result<Variant, CliError> {
    match name {
        VariantName::Fwua => Ok(Variant::Fwua),
        VariantName::Hcgs => Ok(Variant::Hcgs),
        VariantName::Subgrad => Ok(Variant::Subgrad),
        VariantName::Sccg => {
            let mu = mu.unwrap_or(COVARIANCE_SCCG_MU);
            if !(mu.is_finite() && mu >= 0.0) {
                return Err(CliError::Config(format!("mu: must be nonnegative, got {mu}")));
            }
            Ok(if mu == 0.0 { Variant::Subgrad } else { Variant::Sccg { mu } })
        }
    }
}

fn expand_variants(names: &[VariantName], mus: &[f64]) -> Result<Vec<Variant>, CliError> {
    let mut out = Vec::new();
    for &name in names {
        if name == VariantName::Sccg && !mus.is_empty() {
            for &mu in mus {
                out.push(resolve_variant(name, Some(mu))?);
            }
        } else {
            out.push(resolve_variant(name, None)?);
        }
    }
    if out.is_empty() {
        return Err(CliError::Config("variants: at least one variant is required".into()));
    }
    Ok(out)
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| DataError::io(dir, e).into())
}

fn load_instance(path: &Path) -> Result<ProblemInstance, CliError> {
    if !path.exists() {
        return Err(CliError::Config(format!("instance: {} does not exist", path.display())));
    }
    Ok(ProblemInstance::load(path)?)
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Generate { spec, output } => cmd_generate(&cli.out_dir, spec, output),
        Command::Solve(args) => cmd_solve(&cli.out_dir, args),
        Command::Compare(args) => cmd_compare(&cli.out_dir, args),
        Command::Bench(args) => cmd_bench(&cli.out_dir, args),
    }
}

pub fn cmd_generate(out_dir: &Path, spec: GenerateSpec, output: Option<PathBuf>) -> Result<(), CliError> {
    let (instance, default_name) = match spec {
        GenerateSpec::Cov { n, blocks, noise_var, seed } => {
            if blocks == 0 || blocks > n {
                return Err(CliError::Config(format!("blocks: must be in 1..={n}")));
            }
            (gen_block_diag_cov(n, blocks, noise_var, seed)?, format!("cov-n{n}-seed{seed}.json"))
        }
        GenerateSpec::Sbm { nodes, communities, p_in, p_out, link } => {
            let edges = gen_sbm_edges(nodes, communities, p_in, p_out, link.seed)?;
            (
                make_link_prediction(nodes, &edges, link.observe_frac, link.flip_prob, link.seed)?,
                format!("sbm-n{nodes}-seed{}.json", link.seed),
            )
        }
        GenerateSpec::Link { edges, link } => {
            let list = ingest_edge_list(&edges)?;
            if list.is_empty() {
                eprintln!("warning: {} contains no edges", edges.display());
            }
            if list.self_loops_dropped > 0 {
                eprintln!("dropped {} self-loops", list.self_loops_dropped);
            }
            let mut inst = make_link_prediction(list.node_count(), &list.edges, link.observe_frac, link.flip_prob, link.seed)?;
            inst.provenance.notes.push(format!("source: {}", edges.display()));
            inst.provenance.notes.push(format!("self_loops_dropped: {}", list.self_loops_dropped));
            (inst, format!("link-seed{}.json", link.seed))
        }
        GenerateSpec::Ratings { ratings, test_frac, seed } => {
            let mut inst = ingest_ratings(&ratings, test_frac, seed)?;
            inst.provenance.notes.push(format!("source: {}", ratings.display()));
            (inst, format!("ratings-seed{seed}.json"))
        }
    };
    let path = match output {
        Some(p) => p,
        None => {
            ensure_dir(out_dir)?;
            out_dir.join(default_name)
        }
    };
    instance.save(&path)?;
    println!("{}", path.display());
    Ok(())
}

fn write_run(dir: &Path, run: &RunResult, inst: &ProblemInstance, inst_path: Option<&Path>, formats: &[Format]) -> Result<(), CliError> {
    ensure_dir(dir)?;
    if formats.contains(&Format::Csv) {
        write_trace_csv(&dir.join("trace.csv"), run.output.trace())?;
    }
    if formats.contains(&Format::Json) {
        write_json(&dir.join("metrics.json"), &metrics_json(run, inst, inst_path))?;
    }
    Ok(())
}

pub fn cmd_solve(out_dir: &Path, args: SolveArgs) -> Result<(), CliError> {
    if args.variant != VariantName::Sccg && args.mu.is_some() {
        return Err(CliError::Config("mu: only applies to --variant sccg".into()));
    }
    let variant = resolve_variant(args.variant, args.mu)?;
    let cfg = args.solver.config(variant)?;
    let inst = load_instance(&args.instance)?;
    let run = run_solve(&inst, &cfg, args.solver.lambda, args.solver.delta)?;
    write_run(out_dir, &run, &inst, Some(&args.instance), &args.solver.format)?;
    print_summary(&[run]);
    Ok(())
}

fn run_all(inst: &ProblemInstance, cfgs: &[SolverConfig], args: &SolverArgs, parallel: bool) -> Result<Vec<RunResult>, CliError> {
    let results: Vec<Result<RunResult, DataError>> = if parallel {
        std::thread::scope(|s| {
            let handles: Vec<_> = cfgs
                .iter()
                .map(|cfg| s.spawn(move || run_solve(inst, cfg, args.lambda, args.delta)))
                .collect();
            handles.into_iter().map(|h| h.join().expect("solver thread panicked")).collect()
        })
    } else {
        cfgs.iter().map(|cfg| run_solve(inst, cfg, args.lambda, args.delta)).collect()
    };
    Ok(results.into_iter().collect::<Result<Vec<_>, _>>()?)
}

pub fn cmd_compare(out_dir: &Path, args: CompareArgs) -> Result<(), CliError> {
    let variants = expand_variants(&args.variants, &args.mu)?;
    let cfgs = variants
        .into_iter()
        .map(|v| args.solver.config(v))
        .collect::<Result<Vec<_>, _>>()?;
    let inst = load_instance(&args.instance)?;
    let runs = run_all(&inst, &cfgs, &args.solver, args.parallel)?;
    ensure_dir(out_dir)?;
    if args.solver.format.contains(&Format::Csv) {
        write_combined_csv(&out_dir.join("compare.csv"), &runs)?;
    }
    if args.solver.format.contains(&Format::Json) {
        let all: Vec<_> = runs.iter().map(|r| metrics_json(r, &inst, Some(&args.instance))).collect();
        write_json(&out_dir.join("compare.json"), &serde_json::Value::Array(all))?;
    }
    print_summary(&runs);
    Ok(())
}

pub fn cmd_bench(out_dir: &Path, args: BenchArgs) -> Result<(), CliError> {
    let variants = expand_variants(&args.variants, &args.mu)?;
    let cfgs = variants
        .into_iter()
        .map(|v| args.solver.config(v))
        .collect::<Result<Vec<_>, _>>()?;
    for &n in &args.sizes {
        if args.blocks == 0 || args.blocks > n {
            return Err(CliError::Config(format!("blocks: must be in 1..={n}")));
        }
    }
    ensure_dir(out_dir)?;
    let mut rows = Vec::new();
    for &n in &args.sizes {
        for seed in 0..args.seeds {
            let t = Instant::now();
            let inst = gen_block_diag_cov(n, args.blocks, args.noise_var, seed)?;
            let runs = run_all(&inst, &cfgs, &args.solver, true)?;
            write_combined_csv(&out_dir.join(format!("bench-n{n}-seed{seed}.csv")), &runs)?;
            println!("n={n} seed={seed} ({:.1}s)", t.elapsed().as_secs_f64());
            print_summary(&runs);
            for r in &runs {
                rows.push(serde_json::json!({
                    "n": n,
                    "seed": seed,
                    "variant": r.label,
                    "objective_final": r.metrics.objective_final,
                    "wall_time": r.metrics.wall_time,
                    "iterations_to_10pct_drop": r.iterations_to_drop,
                }));
            }
        }
    }
    write_json(&out_dir.join("bench.json"), &serde_json::Value::Array(rows))?;
    Ok(())
}

fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_else(|| "-".into())
}

pub fn print_summary(runs: &[RunResult]) {
    println!(
        "{:<18} {:>16} {:>10} {:>8} {:>10} {:>10} {:>8}",
        "variant", "objective", "time_s", "rank", "drop10%", "auc", "rmse"
    );
    for r in runs {
        let m = &r.metrics;
        println!(
            "{:<18} {:>16.6} {:>10.3} {:>8} {:>10} {:>10} {:>8}",
            r.label,
            m.objective_final,
            m.wall_time,
            m.rank_estimate,
            opt(r.iterations_to_drop),
            opt(m.auc.map(|a| format!("{a:.4}"))),
            opt(m.rmse.map(|a| format!("{a:.4}"))),
        );
    }
}
