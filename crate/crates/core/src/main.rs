use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use chanest::baselines::cosamp_undersampled;
use chanest::bench::{self, Algorithm, ExperimentConfig, ExperimentKind};
use chanest::{config, linalg, report};

#[derive(Parser)]
#[command(name = "chanest", version, about = "Sparse channel estimation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// MSE against channel sparsity at a fixed SNR.
    SweepSparsity(RunArgs),
    /// MSE against SNR at a fixed sparsity.
    SweepSnr(RunArgs),
    /// Solver CPU time against sparsity.
    Timing(RunArgs),
    /// Solve one generated problem with every algorithm and print the errors.
    SingleRun(RunArgs),
    /// Parse and validate a configuration without running anything.
    ValidateConfig(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Flat key=value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a configuration key (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Base seed (same as --set base_seed=...).
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated algorithm list (same as --set algorithms=...).
    #[arg(long)]
    algorithms: Option<String>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// CSV output path.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load(args: &CommonArgs) -> chanest::Result<ExperimentConfig> {
    let mut overrides = args.overrides.clone();
    if let Some(seed) = args.seed {
        overrides.push(format!("base_seed={seed}"));
    }
    if let Some(algos) = &args.algorithms {
        overrides.push(format!("algorithms={}", algos.replace(' ', "")));
    }
    config::parse_config(args.config.as_deref(), &overrides)
}

fn warn_undersampled(cfg: &ExperimentConfig, kind: ExperimentKind) {
    if !cfg.algorithms.contains(&Algorithm::Cosamp) {
        return;
    }
    let worst = cfg.cells(kind).iter().map(|c| c.sparsity).max().unwrap_or(0);
    if cosamp_undersampled(cfg.training_length, worst) {
        eprintln!(
            "warning: cosamp with T={worst} exceeds N/3 = {:.1}; merged supports are truncated to N",
            cfg.training_length as f64 / 3.0
        );
    }
}

fn run_sweep(args: &RunArgs, kind: ExperimentKind) -> chanest::Result<()> {
    let cfg = load(&args.common)?;
    warn_undersampled(&cfg, kind);
    let result = bench::run_sweep(&cfg, kind)?;
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}.csv", kind.label())));
    report::write_csv_atomic(&out, &result.records)?;
    print!("{}", report::summary_table(&result));
    println!("wrote {} records to {}", result.records.len(), out.display());
    Ok(())
}

fn single_run(args: &RunArgs) -> chanest::Result<()> {
    let cfg = load(&args.common)?;
    let kind = ExperimentKind::Sparsity;
    let cell = bench::Cell {
        sparsity: cfg.fixed_sparsity,
        snr_db: cfg.fixed_snr_db,
    };
    let (problem, seed) = bench::build_problem(&cfg, cell, 0)?;
    let truth = problem.truth.as_ref().expect("generated problems carry truth");
    println!(
        "L={} N={} T={} snr_db={} seed={} noise_variance={:.4e}",
        cfg.channel_length, cfg.training_length, cell.sparsity, cell.snr_db, seed, problem.noise.noise_variance
    );
    println!("true support: {:?}", truth.support());
    let mut records = Vec::new();
    for &alg in &cfg.algorithms {
        let rec = bench::evaluate(kind, &cfg, cell, 0, seed, &problem, alg)?;
        match bench::solve(alg, &problem, &cfg) {
            Ok(est) => println!(
                "{:<7} mse={:.4e} top-T={:?} iterations={} cpu_s={:.3e}",
                alg.label(),
                rec.mse,
                linalg::top_k_by_magnitude(&est.taps, cell.sparsity),
                est.iterations,
                rec.cpu_seconds
            ),
            Err(e) => println!("{:<7} failed: {e}", alg.label()),
        }
        records.push(rec);
    }
    if let Some(out) = &args.out {
        report::write_csv_atomic(out, &records)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::SweepSparsity(a) => run_sweep(a, ExperimentKind::Sparsity),
        Command::SweepSnr(a) => run_sweep(a, ExperimentKind::Snr),
        Command::Timing(a) => run_sweep(a, ExperimentKind::Timing),
        Command::SingleRun(a) => single_run(a),
        Command::ValidateConfig(a) => load(a).map(|cfg| {
            println!(
                "config ok: L={} N={} trials={} algorithms={}",
                cfg.channel_length,
                cfg.training_length,
                cfg.trials,
                cfg.algorithms.iter().map(|a| a.label()).collect::<Vec<_>>().join(",")
            );
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
