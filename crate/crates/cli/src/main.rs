use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use first_spike::checkpoint::Checkpoint;
use first_spike::encoders::{write_encoded, EncodedFile};
use first_spike::harness::{
    eval_options, evaluate, load_data, run_experiment, run_seed, sweep, write_results, write_sweep, ExperimentConfig,
    FittedEncoder, Preset, SweepGrid, SweepParameter,
};
use first_spike::rng::{derive_seed, stream};

#[derive(Parser)]
#[command(name = "first-spike", version, about = "Train and evaluate first-to-spike spiking networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train networks and write metrics, a summary and checkpoints.
    Train {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[arg(long, default_value = "results")]
        out_dir: PathBuf,
    },
    /// Evaluate a saved checkpoint.
    Eval {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[arg(long)]
        checkpoint: PathBuf,
        /// Which samples to present.
        #[arg(long, value_enum, default_value_t = EvalSplit::Test)]
        split: EvalSplit,
    },
    /// Encode a dataset into input spike patterns.
    Encode {
        #[command(flatten)]
        exp: ExperimentArgs,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = EvalSplit::Train)]
        split: EvalSplit,
    },
    /// Repeat an experiment over a grid of one hyperparameter.
    Sweep {
        #[command(flatten)]
        exp: ExperimentArgs,
        /// eta0, lambda0, gamma0, nu, batch-size or hidden.
        #[arg(long)]
        param: String,
        /// Comma-separated grid values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[arg(long, default_value = "results")]
        out_dir: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum EvalSplit {
    /// Training pool (the whole dataset for XOR, Iris and Wisconsin).
    Train,
    /// MNIST test set; the whole dataset elsewhere.
    Test,
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetArg {
    Xor,
    Iris,
    Wisconsin,
    MnistLatency,
    MnistScanline,
}

impl From<PresetArg> for Preset {
    fn from(p: PresetArg) -> Self {
        match p {
            PresetArg::Xor => Preset::Xor,
            PresetArg::Iris => Preset::Iris,
            PresetArg::Wisconsin => Preset::Wisconsin,
            PresetArg::MnistLatency => Preset::MnistLatency,
            PresetArg::MnistScanline => Preset::MnistScanline,
        }
    }
}

#[derive(Args)]
struct ExperimentArgs {
    /// JSON experiment configuration.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    preset: Option<PresetArg>,
    /// Reduced MNIST setting (10k training images, 40 hidden neurons).
    #[arg(long)]
    desk: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    runs: Option<usize>,
    /// Dataset root directory.
    #[arg(long, env = "FIRST_SPIKE_DATA_DIR")]
    data_dir: Option<String>,
}

impl ExperimentArgs {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match (&self.config, self.preset) {
            (Some(path), _) => ExperimentConfig::load(path).with_context(|| format!("loading {}", path.display()))?,
            (None, Some(p)) => ExperimentConfig::preset(p.into()),
            (None, None) => bail!("either --config or --preset is required"),
        };
        if self.desk {
            cfg = cfg.desk_scale();
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(runs) = self.runs {
            cfg.runs = runs;
        }
        if let Some(dir) = &self.data_dir {
            cfg.data_dir = dir.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train { exp, out_dir } => {
            let cfg = exp.resolve()?;
            let result = run_experiment(&cfg)?;
            let summary = write_results(&out_dir, &result)?;
            let r = &summary.report;
            println!(
                "{}: {} networks, {} accuracy {:.4} ± {:.4}, loss {:.4}, null rate {:.4}{}",
                cfg.name,
                summary.networks,
                summary.report_split.name(),
                r.accuracy.mean,
                r.accuracy.sem,
                r.loss.mean,
                r.null_rate.mean,
                summary
                    .stop
                    .as_ref()
                    .map_or(String::new(), |s| format!(", stopped at epoch {}", s.epoch))
            );
            println!("results written to {}", out_dir.display());
        }
        Command::Eval { exp, checkpoint, split } => {
            let cfg = exp.resolve()?;
            let ckpt = Checkpoint::load(&checkpoint)?;
            let params = ckpt.to_params::<f64>()?;
            let encoder = FittedEncoder::from_json(
                ckpt.encoder
                    .clone()
                    .context("checkpoint carries no encoder state")?,
            )?;
            let data = load_data(&cfg)?;
            let ds = match (split, &data.test) {
                (EvalSplit::Test, Some(test)) => test,
                _ => &data.train,
            };
            let samples = encoder.encode_all(ds)?;
            let metrics = evaluate(&params, &samples, &eval_options(&cfg), derive_seed(cfg.seed, &[u64::MAX]))?;
            println!("{}", serde_json::to_string_pretty(&metrics)?);
        }
        Command::Encode { exp, out, split } => {
            let cfg = exp.resolve()?;
            let data = load_data(&cfg)?;
            let train = &data.train;
            let encoder = FittedEncoder::fit(
                &cfg.encoder,
                train.feature_count,
                train.features.iter().map(Vec::as_slice),
                &mut stream(run_seed(&cfg, 0), &[u64::MAX]),
            )?;
            let ds = match (split, &data.test) {
                (EvalSplit::Test, Some(test)) => test,
                _ => train,
            };
            let file = EncodedFile {
                inputs: encoder.inputs(),
                classes: ds.classes,
                encoder: encoder.to_json(),
                samples: encoder.encode_all(ds)?,
            };
            write_encoded(&out, &file)?;
            info!("{} samples encoded", file.samples.len());
            println!("wrote {} encoded samples to {}", file.samples.len(), out.display());
        }
        Command::Sweep {
            exp,
            param,
            values,
            out_dir,
        } => {
            let cfg = exp.resolve()?;
            let grid = SweepGrid {
                parameter: param.parse::<SweepParameter>()?,
                values,
            };
            let points = sweep(&cfg, &grid)?;
            write_sweep(&out_dir, &cfg, &grid, &points)?;
            for p in &points {
                println!(
                    "{} = {}: min loss {:.4} at epoch {}, within 1% at epoch {}",
                    grid.parameter.name(),
                    p.value,
                    p.min_loss,
                    p.min_epoch,
                    p.epoch_within_1pct
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
