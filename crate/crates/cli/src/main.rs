use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use bundle_core::bench::{
    load_instance, load_labeled_dir, run_benchmark, run_label_pipeline, save_instance, BenchConfig,
    Method,
};
use bundle_core::error::{Error, Result};
use bundle_core::formulations::{build_bsp, CandidateSet, PricingSolution, SubaddMode};
use bundle_core::gcn::{build_graph, predict_probs, train_with_report, GcnParams, TrainConfig};
use bundle_core::instance::{gen_instance, GenConfig};
use bundle_core::milp::solve_milp;
use bundle_core::strategies::{
    fcp_with_cutoff, local_search, pcp_with_cutoff, solve_with_candidates_opts, SolveOptions,
    CUTOFF, DEFAULT_MAX_ITER, DEFAULT_NODE_LIMIT,
};

#[derive(Parser)]
#[command(
    name = "bundle",
    version,
    about = "Bundle pricing with GCN-guided candidate pruning"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write random instance documents.
    Gen(GenArgs),
    /// Solve small instances exactly and write membership labels.
    Label(LabelArgs),
    /// Train a GCN on a labeled directory.
    Train(TrainArgs),
    /// Write predicted purchase probabilities for an instance.
    Predict(PredictArgs),
    /// Price one instance with a single method.
    Solve(SolveArgs),
    /// Compare methods over many instances and write a CSV report.
    Bench(BenchArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// With more than one instance, `out` is a directory.
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct LabelArgs {
    #[arg(long)]
    count: usize,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    hidden: Option<usize>,
    #[arg(long)]
    dropout: Option<f64>,
    #[arg(long)]
    patience: Option<usize>,
    #[arg(long)]
    val_fraction: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    /// One of mb, bsp, fcp, pcp, fcp-ls.
    #[arg(long)]
    method: Method,
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    max_iter: usize,
    #[arg(long, default_value_t = DEFAULT_NODE_LIMIT)]
    node_limit: usize,
    #[arg(long, default_value_t = CUTOFF)]
    cutoff: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// TOML benchmark config.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Where to echo the effective config; defaults to `<out>.config.toml`.
    #[arg(long)]
    echo: Option<PathBuf>,
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn gen(args: GenArgs) -> Result<()> {
    if args.count == 1 {
        let inst = gen_instance(&GenConfig::with_seed(args.seed), args.n, args.m)?;
        return save_instance(&inst, &args.out);
    }
    std::fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    for i in 0..args.count {
        let inst = gen_instance(&GenConfig::with_seed(args.seed + i as u64), args.n, args.m)?;
        save_instance(&inst, &args.out.join(format!("instance_{i:05}.txt")))?;
    }
    Ok(())
}

fn label(args: LabelArgs) -> Result<()> {
    let data = run_label_pipeline(args.count, args.n, args.m, args.seed, &args.out)?;
    println!(
        "labeled {} instances in {}",
        data.label_files.len(),
        data.dir.display()
    );
    Ok(())
}

fn train(args: TrainArgs) -> Result<()> {
    let data: Vec<_> = load_labeled_dir(&args.data)?
        .into_iter()
        .map(|(_, ex)| ex)
        .collect();
    let d = TrainConfig::default();
    let cfg = TrainConfig {
        epochs: args.epochs.unwrap_or(d.epochs),
        learning_rate: args.lr.unwrap_or(d.learning_rate),
        batch_size: args.batch_size.unwrap_or(d.batch_size),
        d_hidden: args.hidden.unwrap_or(d.d_hidden),
        dropout: args.dropout.unwrap_or(d.dropout),
        patience: args.patience.unwrap_or(d.patience),
        validation_fraction: args.val_fraction.unwrap_or(d.validation_fraction),
        seed: args.seed.unwrap_or(d.seed),
        ..d
    };
    let report = train_with_report(&data, &cfg)?;
    report.params.save(&args.out)?;
    println!(
        "trained on {} examples: validation loss {:.6} -> {:.6} (best epoch {} of {})",
        report.train_indices.len(),
        report.initial_val_loss,
        report.best_val_loss,
        report.best_epoch,
        report.epochs_run
    );
    Ok(())
}

fn predict(args: PredictArgs) -> Result<()> {
    let params = GcnParams::load(&args.model)?;
    let inst = load_instance(&args.instance)?;
    write(
        &args.out,
        &predict_probs(&params, &build_graph(&inst))?.serialize(),
    )
}

fn solution_document(method: Method, sol: &PricingSolution, seconds: f64) -> String {
    let mut out = String::new();
    writeln!(out, "bundle-solution v1").unwrap();
    writeln!(out, "method = {method}").unwrap();
    writeln!(out, "objective = {}", sol.objective).unwrap();
    writeln!(out, "wall_time_s = {seconds}").unwrap();
    writeln!(out, "proven_optimal = {}", sol.meta.proven_optimal).unwrap();
    writeln!(out, "candidates = {}", sol.bundles.len()).unwrap();
    for (k, &b) in sol.assignment.iter().enumerate() {
        writeln!(
            out,
            "segment[{k}] = {} price {} surplus {}",
            sol.bundles[b], sol.prices[b], sol.surplus[k]
        )
        .unwrap();
    }
    for (b, p) in sol.bundles.iter().zip(&sol.prices) {
        writeln!(out, "price {b} = {p}").unwrap();
    }
    out
}

fn solve(args: SolveArgs) -> Result<()> {
    let inst = load_instance(&args.instance)?;
    let params = match (&args.model, args.method.needs_model()) {
        (Some(path), true) => Some(GcnParams::load(path)?),
        (None, true) => {
            return Err(Error::Config(format!(
                "method {} needs --model",
                args.method
            )))
        }
        _ => None,
    };
    let opts = SolveOptions {
        node_limit: args.node_limit,
        ..SolveOptions::default()
    };
    let start = Instant::now();
    let probs = || predict_probs(params.as_ref().unwrap(), &build_graph(&inst));
    let sol = match args.method {
        Method::Mb => solve_with_candidates_opts(
            &inst,
            &CandidateSet::full(inst.n()),
            SubaddMode::Full,
            &opts,
        )?,
        Method::Bsp => {
            let model = build_bsp(&inst)?;
            let bsp = model.extract(&solve_milp(&model.milp, opts.abs_gap, opts.node_limit)?)?;
            let cands = CandidateSet::from_bundles(model.best_bundle.iter().flatten().copied());
            bsp.to_pricing(&inst, &cands)?
        }
        Method::Fcp => {
            let cands = fcp_with_cutoff(&probs()?, args.cutoff);
            solve_with_candidates_opts(&inst, &cands, SubaddMode::Full, &opts)?
        }
        Method::Pcp => {
            let cands = pcp_with_cutoff(&probs()?, args.cutoff);
            solve_with_candidates_opts(&inst, &cands, SubaddMode::PcpChain, &opts)?
        }
        Method::FcpLs => {
            let probs = probs()?;
            let init = fcp_with_cutoff(&probs, args.cutoff);
            local_search(&inst, &probs, &init, args.max_iter)?.solution
        }
    };
    let seconds = start.elapsed().as_secs_f64();
    write(&args.out, &solution_document(args.method, &sol, seconds))?;
    println!(
        "{}: revenue {} in {seconds:.3}s",
        args.method, sol.objective
    );
    Ok(())
}

fn bench(args: BenchArgs) -> Result<()> {
    let cfg = BenchConfig::load(&args.config)?;
    let report = run_benchmark(&cfg)?;
    report.write_csv(&args.out)?;
    let echo = args.echo.unwrap_or_else(|| {
        let mut p = args.out.clone().into_os_string();
        p.push(".config.toml");
        PathBuf::from(p)
    });
    write(&echo, &cfg.to_toml())?;
    for a in &report.aggregates {
        let show = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.4}"));
        println!(
            "{:<7} revenue {} rr {} tr {} over {} instances",
            a.method,
            show(a.mean[0]),
            show(a.mean[3]),
            show(a.mean[4]),
            a.count
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => gen(a),
        Command::Label(a) => label(a),
        Command::Train(a) => train(a),
        Command::Predict(a) => predict(a),
        Command::Solve(a) => solve(a),
        Command::Bench(a) => bench(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
