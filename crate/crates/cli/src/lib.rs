//! Command-line experiment runner.
//!
//! Every subcommand resolves its flags into an [`ExperimentConfig`], runs
//! it, and writes the CSV files plus `manifest.json` (the resolved config)
//! into the output directory. `scanorder run --config manifest.json`
//! replays a manifest.

pub mod config;
pub mod error;
pub mod output;
pub mod runner;

use std::path::PathBuf;

use clap::{ArgAction, Args, Parser, Subcommand};

use scanorder::coupling::Sampler;
use scanorder::mixing::{DEFAULT_THRESHOLD, DEFAULT_T_MAX};
use scanorder::model::ModelSpec;

pub use config::{Analysis, ExperimentConfig, MixingMethod, Suite};
pub use error::CliError;
use output::write_outputs;
use runner::OutputFile;

pub const OUT_ENV: &str = "SCANORDER_OUT";
pub const DEFAULT_OUT: &str = "scanorder-out";

#[derive(Debug, Parser)]
#[command(name = "scanorder", version, about = "Compare random-update and alternating-scan Gibbs samplers on bipartite models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Spectral gap and relaxation time of each sampler.
    Spectral(CommonArgs),
    /// Exact total-variation mixing times.
    Mixing(CommonArgs),
    /// Spectral and mixing analysis of the lumped hardcore K_{n,n} chains.
    Lumped(CommonArgs),
    /// Grand-coupling coalescence times for monotone models.
    Coupling(CommonArgs),
    /// Batch verification suites.
    Verify(CommonArgs),
    /// Several analyses at once, or replay of a manifest.
    Run(RunArgs),
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Model kind (`hardcore_knn`, `random_rbm`) or an inline JSON model.
    #[arg(long)]
    pub model: Option<String>,
    /// JSON model file.
    #[arg(long, conflicts_with = "model")]
    pub model_file: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub n1: Option<usize>,
    #[arg(long)]
    pub n2: Option<usize>,
    /// Number of factors of a random model.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub weight_low: f64,
    #[arg(long, default_value_t = 0.2, allow_negative_numbers = true)]
    pub weight_high: f64,
    /// Seed for random model weights; defaults to `--seed`.
    #[arg(long)]
    pub model_seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Output directory [env: SCANORDER_OUT; default: scanorder-out].
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_delimiter = ',', value_parser = parse_sampler,
          default_value = "random_update,alternating_scan")]
    pub samplers: Vec<Sampler>,
    /// Lazy random update (holds with probability 1/2).
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    pub lazy: bool,
    /// Lazy random update inside the coupling simulation.
    #[arg(long, default_value_t = false, action = ArgAction::Set)]
    pub coupling_lazy: bool,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    pub threshold: f64,
    #[arg(long, default_value_t = DEFAULT_T_MAX)]
    pub t_max: u64,
    #[arg(long, value_enum, default_value_t = MixingMethod::Auto)]
    pub method: MixingMethod,
    #[arg(long, default_value_t = 100_000_000)]
    pub max_updates: u64,
    #[arg(long, default_value_t = 50)]
    pub replicates: u64,
    /// Largest enumerated state space.
    #[arg(long, default_value_t = scanorder::chain::DEFAULT_STATE_CAP)]
    pub cap: usize,
    /// Lumped chain sizes, e.g. `4-22` or `3,5,8`.
    #[arg(long)]
    pub sizes: Option<String>,
    #[arg(long, value_enum)]
    pub suite: Option<Suite>,
    /// Random instances per verification suite.
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    /// Largest side of random suite instances.
    #[arg(long, default_value_t = 5)]
    pub max_side: usize,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, value_enum, value_delimiter = ',', required_unless_present = "config")]
    pub analyses: Vec<Analysis>,
    /// Replays a manifest; `--out` overrides its output directory.
    #[arg(long, conflicts_with = "analyses")]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub common: CommonArgs,
}

fn parse_sampler(s: &str) -> Result<Sampler, String> {
    s.parse().map_err(|e: scanorder::Error| e.to_string())
}

fn resolve_out(out: Option<PathBuf>) -> PathBuf {
    out.or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn resolve_model(args: &ModelArgs, seed: Option<u64>) -> Result<Option<ModelSpec>, CliError> {
    if let Some(path) = &args.model_file {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::user("read model", format!("{}: {e}", path.display())))?;
        return config::parse_json(&text, "parse model").map(Some);
    }
    let Some(kind) = args.model.as_deref() else {
        return Ok(None);
    };
    if kind.trim_start().starts_with('{') {
        return config::parse_json(kind, "parse model").map(Some);
    }
    let need = |flag: &str, v: Option<usize>| {
        v.ok_or_else(|| CliError::user("arguments", format!("--model {kind} needs --{flag}")))
    };
    match kind {
        "hardcore_knn" => Ok(Some(ModelSpec::HardcoreKnn { n: need("n", args.n)? })),
        "random_rbm" => Ok(Some(ModelSpec::RandomRbm {
            n1: need("n1", args.n1)?,
            n2: need("n2", args.n2)?,
            m: need("m", args.m)?,
            weight_low: args.weight_low,
            weight_high: args.weight_high,
            seed: args.model_seed.or(seed).ok_or_else(|| {
                CliError::user("arguments", "--model random_rbm needs --model-seed or --seed")
            })?,
        })),
        other => Err(CliError::user(
            "arguments",
            format!("model kind {other:?} must be given as JSON (--model-file or inline)"),
        )),
    }
}

pub fn config_from_args(analyses: Vec<Analysis>, args: CommonArgs) -> Result<ExperimentConfig, CliError> {
    let model = resolve_model(&args.model, args.seed)?;
    let lumped_sizes = args.sizes.as_deref().map(config::parse_sizes).transpose()?.unwrap_or_default();
    Ok(ExperimentConfig {
        model,
        analyses,
        samplers: args.samplers,
        lazy: args.lazy,
        coupling_lazy: args.coupling_lazy,
        threshold: args.threshold,
        t_max: args.t_max,
        mixing_method: args.method,
        max_updates: args.max_updates,
        replicates: args.replicates,
        seed: args.seed,
        cap: args.cap,
        lumped_sizes,
        suite: args.suite,
        trials: args.trials,
        max_side: args.max_side,
        out: resolve_out(args.out),
    })
}

pub fn config_from_cli(cli: Cli) -> Result<ExperimentConfig, CliError> {
    let (analysis, args) = match cli.command {
        Command::Spectral(a) => (Analysis::Spectral, a),
        Command::Mixing(a) => (Analysis::Mixing, a),
        Command::Lumped(a) => (Analysis::Lumped, a),
        Command::Coupling(a) => (Analysis::Coupling, a),
        Command::Verify(a) => (Analysis::Verify, a),
        Command::Run(run) => {
            return match run.config {
                Some(path) => {
                    let mut config = ExperimentConfig::load(&path)?;
                    if let Some(out) = run.common.out {
                        config.out = out;
                    }
                    Ok(config)
                }
                None => config_from_args(run.analyses, run.common),
            };
        }
    };
    config_from_args(vec![analysis], args)
}

pub struct Completed {
    pub files: Vec<String>,
    pub failed_checks: usize,
}

/// Runs the experiment and writes its outputs, manifest included.
pub fn run(config: &ExperimentConfig) -> Result<Completed, CliError> {
    let outcome = runner::execute(config)?;
    let mut files = outcome.files;
    let manifest = serde_json::to_string_pretty(config)
        .map_err(|e| CliError::user("write manifest", e.to_string()))?;
    files.push(OutputFile {
        name: "manifest.json".into(),
        contents: (manifest + "\n").into_bytes(),
    });
    write_outputs(&config.out, &files)?;
    Ok(Completed {
        files: files.into_iter().map(|f| f.name).collect(),
        failed_checks: outcome.failed_checks,
    })
}

/// Exit code for a completed run: 0, or 2 when a verification check failed.
pub fn main_with(cli: Cli) -> i32 {
    let result = config_from_cli(cli).and_then(|c| run(&c).map(|done| (c, done)));
    match result {
        Ok((config, done)) => {
            for f in &done.files {
                eprintln!("wrote {}", config.out.join(f).display());
            }
            if done.failed_checks > 0 {
                eprintln!("error: {} verification checks failed", done.failed_checks);
                2
            } else {
                0
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
