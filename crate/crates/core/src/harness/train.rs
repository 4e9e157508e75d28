//! Training loop and the multi-run experiment driver.

use std::time::Instant;

use log::{debug, info};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Precision, Protocol};
use super::evaluate::{evaluate, EvalMetrics, EvalOptions};
use super::prepare::{load_data, mean_input_spikes, FittedEncoder, LoadedData};
use crate::checkpoint::Checkpoint;
use crate::data::{stratified_holdout, stratified_k_fold, Dataset, MinibatchIter};
use crate::encoders::EncodedSample;
use crate::error::{Error, Result};
use crate::learning::{BatchAccumulator, GradientContext, GradientState};
use crate::network::{standard_topology, NetworkParams, SimWindow};
use crate::objective::{cross_entropy_with_floor, output_error_signals, softmax_activation};
use crate::rng::{derive_seed, stream};
use crate::scalar::Real;
use crate::srm::{EscapeNoise, KernelParams};

/// Version tag written into every result file.
pub const VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

// Stream identifiers below a run seed.
const TAG_SPLIT: u64 = 1;
const TAG_ENCODER: u64 = 2;
const TAG_INIT: u64 = 3;
const TAG_ORDER: u64 = 4;
const TAG_TRAIN: u64 = 5;
const TAG_EVAL: u64 = 6;

/// Samples simulated sequentially by one task; gradients are summed
/// within a chunk and then across chunks in order, so results do not
/// depend on the thread count.
const CHUNK: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitKind {
    Train,
    Validation,
    Test,
}

impl SplitKind {
    pub fn name(self) -> &'static str {
        match self {
            SplitKind::Train => "train",
            SplitKind::Validation => "validation",
            SplitKind::Test => "test",
        }
    }

    fn tag(self) -> u64 {
        self as u64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    /// Weight updates applied before the evaluation.
    pub iteration: usize,
    pub epoch: f64,
    pub split: SplitKind,
    pub metrics: EvalMetrics,
}

/// Training history of one network (one run, one fold).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub run: usize,
    pub fold: usize,
    pub iterations_per_epoch: usize,
    /// Mean loss of the training presentations of every iteration.
    pub train_loss: Vec<f64>,
    pub evaluations: Vec<Evaluation>,
    pub wall_clock_s: f64,
    /// Final network with its optimizer and encoder state.
    pub checkpoint: Checkpoint,
}

impl RunMetrics {
    pub fn series(&self, split: SplitKind) -> impl Iterator<Item = &Evaluation> {
        self.evaluations.iter().filter(move |e| e.split == split)
    }

    pub fn last(&self, split: SplitKind) -> Option<&Evaluation> {
        self.series(split).last()
    }

    /// Mean training loss over the final epoch.
    pub fn final_epoch_train_loss(&self) -> Option<f64> {
        let k = self.iterations_per_epoch.min(self.train_loss.len());
        (k > 0).then(|| self.train_loss[self.train_loss.len() - k..].iter().sum::<f64>() / k as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub version: String,
    pub runs: Vec<RunMetrics>,
}

/// Encoded data for one network.
pub struct FoldData<F> {
    pub run: usize,
    pub fold: usize,
    pub encoder: FittedEncoder,
    pub train: Vec<EncodedSample<F>>,
    /// Evaluated on the protocol's cadence.
    pub monitor: (SplitKind, Vec<EncodedSample<F>>),
    /// Evaluated once, after the last iteration.
    pub last: Option<(SplitKind, Vec<EncodedSample<F>>)>,
}

pub fn run_seed(cfg: &ExperimentConfig, run: usize) -> u64 {
    derive_seed(cfg.seed, &[run as u64])
}

fn cast_all<F: Real>(samples: Vec<EncodedSample<f64>>) -> Vec<EncodedSample<F>> {
    samples.iter().map(EncodedSample::cast).collect()
}

fn fit_encoder(cfg: &ExperimentConfig, ds: &Dataset, rows: &[usize], seed: u64) -> Result<FittedEncoder> {
    let enc = FittedEncoder::fit(
        &cfg.encoder,
        ds.feature_count,
        rows.iter().map(|&i| ds.features[i].as_slice()),
        &mut stream(seed, &[TAG_ENCODER]),
    )?;
    if enc.inputs() != cfg.layers[0] {
        return Err(Error::Config(format!(
            "encoder produces {} inputs but the input layer has {} neurons",
            enc.inputs(),
            cfg.layers[0]
        )));
    }
    Ok(enc)
}

/// Splits, fits and encodes the data of every network trained in `run`.
pub fn prepare_run<F: Real>(cfg: &ExperimentConfig, data: &LoadedData, run: usize) -> Result<Vec<FoldData<F>>> {
    let seed = run_seed(cfg, run);
    let ds = &data.train;
    let all: Vec<usize> = (0..ds.len()).collect();
    let mut out = Vec::new();
    match cfg.protocol {
        Protocol::TrainSet { .. } => {
            let encoder = fit_encoder(cfg, ds, &all, seed)?;
            let train = cast_all(encoder.encode_all(ds)?);
            out.push(FoldData {
                run,
                fold: 0,
                encoder,
                monitor: (SplitKind::Train, train.clone()),
                train,
                last: None,
            });
        }
        Protocol::CrossValidation { folds, .. } => {
            let parts = stratified_k_fold(&ds.labels, ds.classes, folds, &mut stream(seed, &[TAG_SPLIT]))?;
            for (fold, test) in parts.iter().enumerate() {
                let mut train: Vec<usize> = parts
                    .iter()
                    .enumerate()
                    .filter(|&(f, _)| f != fold)
                    .flat_map(|(_, p)| p.iter().copied())
                    .collect();
                train.sort_unstable();
                let mut test = test.clone();
                test.sort_unstable();
                let encoder = fit_encoder(cfg, ds, &train, seed)?;
                out.push(FoldData {
                    run,
                    fold,
                    train: cast_all(encoder.encode_indices(ds, &train)?),
                    monitor: (SplitKind::Test, cast_all(encoder.encode_indices(ds, &test)?)),
                    encoder,
                    last: None,
                });
            }
        }
        Protocol::Holdout { validation, .. } => {
            let (train, val) =
                stratified_holdout(&ds.labels, ds.classes, validation, &mut stream(seed, &[TAG_SPLIT]))?;
            let test = data
                .test
                .as_ref()
                .ok_or_else(|| Error::Config("holdout protocol needs a test set".into()))?;
            let encoder = fit_encoder(cfg, ds, &train, seed)?;
            out.push(FoldData {
                run,
                fold: 0,
                train: cast_all(encoder.encode_indices(ds, &train)?),
                monitor: (SplitKind::Validation, cast_all(encoder.encode_indices(ds, &val)?)),
                last: Some((SplitKind::Test, cast_all(encoder.encode_all(test)?))),
                encoder,
            });
        }
    }
    Ok(out)
}

fn kernel_as<F: Real>(k: &KernelParams<f64>) -> KernelParams<F> {
    KernelParams {
        eps0: F::lit(k.eps0),
        tau_m: F::lit(k.tau_m),
        tau_s: F::lit(k.tau_s),
        theta: F::lit(k.theta),
        u_r: F::lit(k.u_r),
    }
}

fn noise_as<F: Real>(n: &EscapeNoise<f64>) -> EscapeNoise<F> {
    EscapeNoise {
        rho0: F::lit(n.rho0),
        delta_u: F::lit(n.delta_u),
    }
}

pub fn window_as<F: Real>(w: &SimWindow<f64>) -> SimWindow<F> {
    SimWindow {
        duration: F::lit(w.duration),
        dt: F::lit(w.dt),
    }
}

pub fn eval_options<F: Real>(cfg: &ExperimentConfig) -> EvalOptions<F> {
    EvalOptions {
        window: window_as(&cfg.window),
        nu: F::lit(cfg.nu),
        loss_floor: F::lit(cfg.loss_floor),
        repeats: cfg.eval_repeats,
        classes: *cfg.layers.last().expect("validated layers"),
    }
}

/// Freshly initialised network of run `run`, fold `fold`.
pub fn init_network<F: Real>(cfg: &ExperimentConfig, run: usize, fold: usize) -> Result<NetworkParams<F>> {
    let layers = standard_topology(cfg.layers[0], &cfg.layers[1..cfg.layers.len() - 1], cfg.layers[cfg.layers.len() - 1]);
    NetworkParams::init(
        layers,
        &cfg.init,
        cfg.delays,
        kernel_as(&cfg.kernel),
        noise_as(&cfg.noise),
        &mut stream(run_seed(cfg, run), &[TAG_INIT, fold as u64]),
    )
}

/// Simulates the batch `batch` of `train` and adds its gradients to
/// `state`; returns the summed loss.
pub fn accumulate_batch<F: Real>(
    params: &NetworkParams<F>,
    state: &mut GradientState<F>,
    train: &[EncodedSample<F>],
    batch: &[usize],
    opts: &EvalOptions<F>,
    seed: u64,
    path: &[u64],
) -> Result<f64> {
    let ctx = GradientContext::new(params);
    let parts = batch
        .par_chunks(CHUNK)
        .map(|chunk| -> Result<(BatchAccumulator<F>, f64)> {
            let mut acc = BatchAccumulator::zeros(params);
            let mut loss = 0.0;
            let mut sample_path = path.to_vec();
            sample_path.push(0);
            for &i in chunk {
                let sample = &train[i];
                *sample_path.last_mut().expect("non-empty path") = i as u64;
                let record = params.simulate(&sample.trains(), &opts.window, &mut stream(seed, &sample_path))?;
                let activation = softmax_activation(&record.tau, opts.nu)?;
                loss += cross_entropy_with_floor(&activation, sample.label, opts.loss_floor).to_f64_lossy();
                let delta = output_error_signals(&activation, sample.label);
                acc.add_sample(&ctx, &record, &delta)?;
            }
            Ok((acc, loss))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut total = 0.0;
    for (acc, loss) in &parts {
        state.batch.merge(acc);
        total += loss;
    }
    Ok(total)
}

/// Trains one network on `data` following the configured protocol.
pub fn train_fold<F: Real>(cfg: &ExperimentConfig, data: &FoldData<F>) -> Result<RunMetrics> {
    let start = Instant::now();
    let seed = run_seed(cfg, data.run);
    let fold = data.fold as u64;
    let opts = eval_options::<F>(cfg);
    let mut params = init_network::<F>(cfg, data.run, data.fold)?;
    let mut state = GradientState::new(&params, cfg.optimizer)?;
    if data.train.is_empty() {
        return Err(Error::Config("no training samples".into()));
    }

    let mut batches = MinibatchIter::new(data.train.len(), cfg.batch_size, derive_seed(seed, &[TAG_ORDER, fold]));
    let per_epoch = batches.batches_per_epoch();
    let (total, cadence) = match cfg.protocol {
        Protocol::TrainSet { epochs, eval_every } => (epochs * per_epoch, eval_every * per_epoch),
        Protocol::CrossValidation { epochs, .. } => (epochs * per_epoch, per_epoch),
        Protocol::Holdout {
            iterations, eval_every, ..
        } => (iterations, eval_every),
    };

    let mut evaluations = Vec::new();
    let mut evaluate_at = |params: &NetworkParams<F>, it: usize, split: SplitKind, samples: &[EncodedSample<F>]| -> Result<()> {
        let metrics = evaluate(
            params,
            samples,
            &opts,
            derive_seed(seed, &[TAG_EVAL, fold, split.tag(), it as u64]),
        )?;
        debug!(
            "run {} fold {} iteration {it}: {} loss {:.4} accuracy {:.4}",
            data.run,
            data.fold,
            split.name(),
            metrics.loss,
            metrics.accuracy
        );
        evaluations.push(Evaluation {
            iteration: it,
            epoch: it as f64 / per_epoch as f64,
            split,
            metrics,
        });
        Ok(())
    };

    let (monitor_split, monitor) = (&data.monitor.0, &data.monitor.1);
    evaluate_at(&params, 0, *monitor_split, monitor)?;
    let mut train_loss = Vec::with_capacity(total);
    for it in 1..=total {
        let batch = batches.next().expect("mini-batch stream is endless");
        let loss = accumulate_batch(&params, &mut state, &data.train, &batch, &opts, seed, &[TAG_TRAIN, fold, it as u64, 0])?;
        train_loss.push(loss / batch.len() as f64);
        state.rmsprop_apply(&mut params)?;
        if it % cadence == 0 || it == total {
            evaluate_at(&params, it, *monitor_split, monitor)?;
        }
    }
    if let Some((split, samples)) = &data.last {
        evaluate_at(&params, total, *split, samples)?;
    }

    let checkpoint = Checkpoint::from_params(&params, cfg.seed)
        .with_optimizer(&state)
        .with_encoder(data.encoder.to_json());
    Ok(RunMetrics {
        run: data.run,
        fold: data.fold,
        iterations_per_epoch: per_epoch,
        train_loss,
        evaluations,
        wall_clock_s: start.elapsed().as_secs_f64(),
        checkpoint,
    })
}

fn run_generic<F: Real>(cfg: &ExperimentConfig, data: &LoadedData) -> Result<Vec<RunMetrics>> {
    let mut out = Vec::new();
    for run in 0..cfg.runs {
        for fold_data in prepare_run::<F>(cfg, data, run)? {
            debug!(
                "run {run} fold {}: {} training samples, {:.1} input spikes each",
                fold_data.fold,
                fold_data.train.len(),
                mean_input_spikes(&fold_data.train)
            );
            let m = train_fold(cfg, &fold_data)?;
            info!(
                "{} run {run} fold {}: {} iterations in {:.1}s",
                cfg.name,
                m.fold,
                m.train_loss.len(),
                m.wall_clock_s
            );
            out.push(m);
        }
    }
    Ok(out)
}

/// Trains `cfg.runs` independent networks (times the number of folds) and
/// returns their histories.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let data = load_data(cfg)?;
    info!(
        "{}: {} training samples{}",
        cfg.name,
        data.train.len(),
        data.test.as_ref().map_or(String::new(), |t| format!(", {} test samples", t.len()))
    );
    let runs = match cfg.precision {
        Precision::F64 => run_generic::<f64>(cfg, &data)?,
        Precision::F32 => run_generic::<f32>(cfg, &data)?,
    };
    Ok(ExperimentResult {
        config: cfg.clone(),
        version: VERSION.into(),
        runs,
    })
}
