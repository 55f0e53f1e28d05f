//! `sls`: per-layer SC profiles, pruning plans, storage reports and the toy
//! benchmark from the command line.
//!
//! Every subcommand writes the library's own serialization of its result (JSON by
//! default) and prints a short human-readable summary to stdout.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use serde::de::DeserializeOwned;
use serde::Serialize;
use sls_core::toybench::{run_benchmark_with, RetrainPreset};
use sls_core::{
    evaluate_all_layers, gen_synthetic_trace, load_trace_file, plan_prune, storage_report, subsample_trace,
    write_trace_file, FeatureTrace, LrSchedule, ModelStorageSpec, PruningPlan, ScProfile, Strategy, SyntheticSpec,
    TsneConfig,
};

#[derive(Parser, Debug)]
#[command(name = "sls", version, about = "Layer-wise pruning decisions from per-layer feature clustering")]
struct Cli {
    /// Seed for t-SNE initialization, subsampling, probes and synthetic traces.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    /// Where to write the result (default depends on the subcommand).
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    /// Format of the file written to --output.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Embed every layer with t-SNE and score it by silhouette (default output: profile.json).
    Evaluate(EvaluateArgs),
    /// Turn a profile into a pruning plan (default output: plan.json).
    Plan(PlanArgs),
    /// Stored-parameter totals for one plan per dataset (default output: report.json).
    Report(ReportArgs),
    /// Profile, probe, plan and retrain on a trace (default output: bench.json and bench.csv).
    Bench(BenchArgs),
    /// Write a synthetic trace in SLSF format (default output: synthetic.slsf).
    Synth(SyntheticArgs),
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum StrategyArg {
    OneShot,
    Iterative,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::OneShot => Strategy::OneShot,
            StrategyArg::Iterative => Strategy::Iterative,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum PresetArg {
    OneCycle,
    FromScratch,
    FineTune,
}

impl From<PresetArg> for RetrainPreset {
    fn from(p: PresetArg) -> Self {
        match p {
            PresetArg::OneCycle => RetrainPreset::OneCycle,
            PresetArg::FromScratch => RetrainPreset::FromScratch,
            PresetArg::FineTune => RetrainPreset::FineTune,
        }
    }
}

#[derive(Args, Debug)]
struct TsneArgs {
    /// t-SNE perplexity.
    #[arg(long, default_value_t = 30.0)]
    perplexity: f64,
    /// t-SNE learning rate.
    #[arg(long = "tsne-lr", default_value_t = 50.0)]
    tsne_lr: f64,
    /// t-SNE iterations.
    #[arg(long = "tsne-iters", default_value_t = 1000)]
    tsne_iters: usize,
    /// Embedding dimension.
    #[arg(long, default_value_t = 2)]
    components: usize,
    /// Subsample each trace to at most this many samples, stratified by class.
    #[arg(long = "max-samples")]
    max_samples: Option<usize>,
}

impl TsneArgs {
    fn config(&self, seed: u64) -> TsneConfig {
        TsneConfig {
            n_components: self.components,
            perplexity: self.perplexity,
            learning_rate: self.tsne_lr,
            n_iter: self.tsne_iters,
            seed,
            ..TsneConfig::default()
        }
    }

    fn prepare(&self, trace: FeatureTrace, seed: u64) -> sls_core::Result<FeatureTrace> {
        match self.max_samples {
            Some(m) => subsample_trace(&trace, m, seed),
            None => Ok(trace),
        }
    }
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    /// SLSF trace file.
    #[arg(long)]
    trace: PathBuf,
    #[command(flatten)]
    tsne: TsneArgs,
    /// Independent t-SNE runs averaged per layer.
    #[arg(long = "n-runs", default_value_t = 1)]
    n_runs: usize,
}

#[derive(Args, Debug)]
struct PlanArgs {
    /// Profile JSON written by `evaluate`.
    #[arg(long)]
    profile: PathBuf,
    /// Threshold factor: layers scoring below alpha times the top score stop the descent.
    #[arg(long, default_value_t = 0.3)]
    alpha: f64,
    /// How the plan is meant to be applied.
    #[arg(long, value_enum, default_value_t = StrategyArg::OneShot)]
    strategy: StrategyArg,
}

#[derive(Args, Debug)]
struct ReportArgs {
    /// Plan JSON files, one per dataset, in the model spec's dataset order.
    #[arg(required = true)]
    plans: Vec<PathBuf>,
    /// JSON parameter counts of the shared backbone, adapters and heads.
    #[arg(long = "model-spec")]
    model_spec: PathBuf,
}

#[derive(Args, Debug)]
struct SyntheticArgs {
    /// Number of layers in the generated trace.
    #[arg(long = "synthetic-layers", default_value_t = 12)]
    layers: usize,
    /// Samples per layer.
    #[arg(long = "synthetic-samples", default_value_t = 500)]
    samples: usize,
    /// Feature dimension.
    #[arg(long = "synthetic-dim", default_value_t = 32)]
    dim: usize,
    /// Number of classes.
    #[arg(long = "synthetic-classes", default_value_t = 10)]
    classes: usize,
    /// Per-coordinate noise standard deviation.
    #[arg(long = "synthetic-noise", default_value_t = 1.0)]
    noise: f64,
    /// Class-centre distance from the origin at the first layer.
    #[arg(long = "synthetic-first", default_value_t = 2.5)]
    first: f64,
    /// Class-centre distance from the origin at the top layer.
    #[arg(long = "synthetic-last", default_value_t = 7.0)]
    last: f64,
}

impl SyntheticArgs {
    fn trace(&self, seed: u64) -> sls_core::Result<FeatureTrace> {
        let spec = SyntheticSpec {
            dim: self.dim,
            noise_sigma: self.noise,
            ..SyntheticSpec::linear_ramp(self.layers, self.samples, self.classes, self.first, self.last, seed)
        };
        gen_synthetic_trace(&spec)
    }
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// SLSF trace file; without it a synthetic trace is generated.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[command(flatten)]
    synthetic: SyntheticArgs,
    #[command(flatten)]
    tsne: TsneArgs,
    /// Comma-separated alphas to plan with.
    #[arg(long, value_delimiter = ',', default_value = "0.3")]
    alphas: Vec<f64>,
    /// One-shot prunes to the target depth at once; iterative removes one layer per retrain.
    #[arg(long, value_enum, default_value_t = StrategyArg::OneShot)]
    strategy: StrategyArg,
    /// How the probe is retrained after pruning.
    #[arg(long, value_enum, default_value_t = PresetArg::OneCycle)]
    preset: PresetArg,
}

/// A failure with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl From<sls_core::Error> for Failure {
    fn from(e: sls_core::Error) -> Self {
        let code = if e.is_numerical() { 3 } else { 2 };
        Failure { code, message: e.to_string() }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: 2, message: message.into() }
}

fn with_path(path: &Path) -> impl FnOnce(sls_core::Error) -> Failure + '_ {
    move |e| {
        let mut f = Failure::from(e);
        f.message = format!("{}: {}", path.display(), f.message);
        f
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {}", path.display(), e)))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("{}: {}", path.display(), e)))
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| usage(format!("{}: {}", path.display(), e)))?;
    info!("wrote {}", path.display());
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("result types serialize");
    text.push('\n');
    text
}

fn load(path: &Path) -> Result<FeatureTrace, Failure> {
    load_trace_file(path).map_err(with_path(path))
}

fn json_only(format: Format, command: &str) -> Result<(), Failure> {
    match format {
        Format::Json => Ok(()),
        Format::Csv => Err(usage(format!("{command} only writes JSON"))),
    }
}

fn evaluate(cli: &Cli, args: &EvaluateArgs) -> Result<(), Failure> {
    let trace = args.tsne.prepare(load(&args.trace)?, cli.seed)?;
    info!(
        "{}: {} layers x {} samples x {} dims",
        trace.dataset_name,
        trace.n_layers(),
        trace.n_samples(),
        trace.dim()
    );
    let profile = evaluate_all_layers(&trace, &args.tsne.config(cli.seed), args.n_runs)?;

    println!("layer  sc_index");
    for (i, v) in profile.values.iter().enumerate() {
        println!("{:>5}  {:>8.4}", i + 1, v);
    }
    let text = match cli.format {
        Format::Json => to_json(&profile),
        Format::Csv => profile.to_csv(),
    };
    let default = match cli.format {
        Format::Json => "profile.json",
        Format::Csv => "profile.csv",
    };
    write_text(cli.output.as_deref().unwrap_or(Path::new(default)), &text)
}

fn plan(cli: &Cli, args: &PlanArgs) -> Result<(), Failure> {
    json_only(cli.format, "plan")?;
    let profile: ScProfile = read_json(&args.profile)?;
    profile.validate().map_err(with_path(&args.profile))?;
    let plan = plan_prune(&profile, args.alpha)?.with_strategy(args.strategy.into());

    println!("threshold  {:.6}", plan.threshold);
    println!("keep       {} of {} layers", plan.keep_layers, plan.n_layers);
    match plan.pruned_range {
        Some([lo, hi]) => println!("prune      layers {lo}..={hi}"),
        None => println!("prune      nothing"),
    }
    write_text(cli.output.as_deref().unwrap_or(Path::new("plan.json")), &to_json(&plan))
}

fn report(cli: &Cli, args: &ReportArgs) -> Result<(), Failure> {
    json_only(cli.format, "report")?;
    let mut spec: ModelStorageSpec = read_json(&args.model_spec)?;
    spec.validate().map_err(with_path(&args.model_spec))?;
    let mut indices = Vec::with_capacity(args.plans.len());
    let mut names = Vec::with_capacity(args.plans.len());
    for path in &args.plans {
        let plan: PruningPlan = read_json(path)?;
        plan.validate().map_err(with_path(path))?;
        if plan.n_layers != spec.n_layers() {
            return Err(usage(format!(
                "{}: plan covers {} layers but the model spec has {}",
                path.display(),
                plan.n_layers,
                spec.n_layers()
            )));
        }
        indices.push(plan.keep_layers);
        names.push(plan.dataset);
    }
    if spec.dataset_names.is_empty() {
        spec.dataset_names = names;
    }
    let report = storage_report(&spec, &indices)?;

    println!("stored_total   {}", report.stored_total);
    println!("petl_baseline  {}", report.petl_baseline);
    println!("naive_copies   {}", report.naive_copies);
    for (name, idx) in report.dataset_names.iter().zip(&report.per_dataset_index) {
        println!("  {name}: keep {idx}");
    }
    write_text(cli.output.as_deref().unwrap_or(Path::new("report.json")), &to_json(&report))
}

fn bench(cli: &Cli, args: &BenchArgs) -> Result<(), Failure> {
    let trace = match &args.trace {
        Some(path) => load(path)?,
        None => args.synthetic.trace(cli.seed)?,
    };
    let trace = args.tsne.prepare(trace, cli.seed)?;
    let report = run_benchmark_with(
        &trace,
        &args.alphas,
        &args.tsne.config(cli.seed),
        &LrSchedule::default(),
        args.strategy.into(),
        args.preset.into(),
    )?;

    println!("layer  sc_index  probe_acc  kept");
    for row in &report.rows {
        let kept: String = row.kept.iter().map(|&k| if k { '+' } else { '.' }).collect();
        println!("{:>5}  {:>8.4}  {:>9.4}  {}", row.layer, row.sc_index, row.probe_accuracy, kept);
    }
    match report.spearman {
        Some(rho) => println!("spearman(sc, accuracy) = {rho:.4}"),
        None => println!("spearman(sc, accuracy) undefined"),
    }
    for o in &report.outcomes {
        println!(
            "alpha {}: keep {} layers, retrained accuracy {:.4}",
            o.alpha, o.plan.keep_layers, o.retrain.accuracy
        );
        for step in &o.retrain.trajectory {
            println!("    depth {:>3}: {:.4}", step.depth, step.accuracy);
        }
    }

    // JSON and CSV are both written; --format picks which one lands at --output.
    let primary = cli.output.clone().unwrap_or_else(|| match cli.format {
        Format::Json => PathBuf::from("bench.json"),
        Format::Csv => PathBuf::from("bench.csv"),
    });
    let (json_path, csv_path) = match cli.format {
        Format::Json => (primary.clone(), primary.with_extension("csv")),
        Format::Csv => (primary.with_extension("json"), primary.clone()),
    };
    if json_path == csv_path {
        return Err(usage(format!("{} would hold both the JSON and the CSV report", primary.display())));
    }
    write_text(&json_path, &to_json(&report))?;
    write_text(&csv_path, &report.to_csv())
}

fn synth(cli: &Cli, args: &SyntheticArgs) -> Result<(), Failure> {
    json_only(cli.format, "synth")?;
    let trace = args.trace(cli.seed)?;
    let path = cli.output.clone().unwrap_or_else(|| PathBuf::from("synthetic.slsf"));
    write_trace_file(&trace, &path).map_err(with_path(&path))?;
    println!(
        "{}: {} layers x {} samples x {} dims, {} classes",
        path.display(),
        trace.n_layers(),
        trace.n_samples(),
        trace.dim(),
        trace.n_classes
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Evaluate(args) => evaluate(&cli, args),
        Command::Plan(args) => plan(&cli, args),
        Command::Report(args) => report(&cli, args),
        Command::Bench(args) => bench(&cli, args),
        Command::Synth(args) => synth(&cli, args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
