//! Experiment configuration and the built-in presets.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::encoders::{LatencyEncoderConfig, ReceptiveFieldConfig, ScanlineParams};
use crate::error::{Error, Result};
use crate::learning::RmsPropHyper;
use crate::network::{DelayRange, SimWindow, UniformRange};
use crate::objective::LOSS_FLOOR;
use crate::srm::{EscapeNoise, KernelParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum DatasetConfig {
    Xor,
    /// UCI `iris.data`, relative to the data directory.
    Iris { file: String },
    /// UCI `breast-cancer-wisconsin.data`, relative to the data directory.
    Wisconsin { file: String },
    /// IDX files in `dir`; the limits keep the first samples of each set.
    Mnist {
        dir: String,
        train_limit: Option<usize>,
        test_limit: Option<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum EncoderConfig {
    /// One latency-coded neuron per feature, optionally preceded by a bias
    /// neuron that fires at 0 ms.
    Latency { latency: LatencyEncoderConfig, bias_neuron: bool },
    ReceptiveField { receptive: ReceptiveFieldConfig },
    /// Images of `width × height` pixels divided by `pixel_scale` and read
    /// along `lines` random scanlines drawn at the start of every run.
    Scanline {
        lines: usize,
        width: usize,
        height: usize,
        pixel_scale: f64,
        params: ScanlineParams,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Protocol {
    /// Train on the whole dataset and evaluate on it every `eval_every`
    /// epochs.
    TrainSet { epochs: usize, eval_every: usize },
    /// Stratified k-fold: each fold is held out once and evaluated after
    /// every epoch.
    CrossValidation { folds: usize, epochs: usize },
    /// A stratified validation set carved from the training data, checked
    /// every `eval_every` iterations; the test set is evaluated at the end.
    Holdout {
        validation: usize,
        iterations: usize,
        eval_every: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum EarlyStopRule {
    /// Evaluation with the lowest mean loss.
    MinLoss,
    /// First evaluation whose mean loss is within `fraction` of the minimum.
    WithinFraction { fraction: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Precision {
    F32,
    F64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    Xor,
    Iris,
    Wisconsin,
    MnistLatency,
    MnistScanline,
}

impl Preset {
    pub const ALL: [Preset; 5] = [
        Preset::Xor,
        Preset::Iris,
        Preset::Wisconsin,
        Preset::MnistLatency,
        Preset::MnistScanline,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Xor => "xor",
            Preset::Iris => "iris",
            Preset::Wisconsin => "wisconsin",
            Preset::MnistLatency => "mnist-latency",
            Preset::MnistScanline => "mnist-scanline",
        }
    }
}

impl std::str::FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown preset {s:?}")))
    }
}

/// Every knob of an experiment. Result files embed it verbatim.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub dataset: DatasetConfig,
    /// Root for relative dataset paths.
    pub data_dir: String,
    pub encoder: EncoderConfig,
    /// Neurons per layer, input first.
    pub layers: Vec<usize>,
    /// Initial weight range of each projection.
    pub init: Vec<UniformRange>,
    /// Input→hidden conduction delays; `None` for delayless networks.
    pub delays: Option<DelayRange>,
    /// Softmax scale ν.
    pub nu: f64,
    pub optimizer: RmsPropHyper,
    pub batch_size: usize,
    pub protocol: Protocol,
    pub window: SimWindow<f64>,
    pub kernel: KernelParams<f64>,
    pub noise: EscapeNoise<f64>,
    pub loss_floor: f64,
    /// Presentations of every sample per evaluation.
    pub eval_repeats: usize,
    pub early_stop: Option<EarlyStopRule>,
    pub seed: u64,
    pub runs: usize,
    pub precision: Precision,
}

fn common(name: &str, dataset: DatasetConfig, encoder: EncoderConfig, layers: Vec<usize>, init: Vec<UniformRange>) -> ExperimentConfig {
    ExperimentConfig {
        name: name.into(),
        dataset,
        data_dir: "data".into(),
        encoder,
        layers,
        init,
        delays: None,
        nu: 2.0,
        optimizer: RmsPropHyper::default(),
        batch_size: 150,
        protocol: Protocol::TrainSet { epochs: 1, eval_every: 1 },
        window: SimWindow::default(),
        kernel: KernelParams::default(),
        noise: EscapeNoise::default(),
        loss_floor: LOSS_FLOOR,
        eval_repeats: 1,
        early_stop: None,
        seed: 1,
        runs: 1,
        precision: Precision::F64,
    }
}

fn mnist_dataset() -> DatasetConfig {
    DatasetConfig::Mnist {
        dir: "mnist".into(),
        train_limit: None,
        test_limit: None,
    }
}

impl ExperimentConfig {
    /// Full-scale settings of the reference experiments.
    pub fn preset(preset: Preset) -> Self {
        match preset {
            Preset::Xor => {
                let mut c = common(
                    "xor",
                    DatasetConfig::Xor,
                    EncoderConfig::Latency {
                        latency: LatencyEncoderConfig::from_latencies(&[(1.0, 0.0), (0.0, 6.0)]),
                        bias_neuron: true,
                    },
                    vec![3, 5, 2],
                    vec![UniformRange::new(0.0, 16.0), UniformRange::new(0.0, 6.4)],
                );
                c.optimizer = RmsPropHyper {
                    eta0: 0.5,
                    lambda0: 0.0,
                    w_min: -30.0,
                    w_max: 30.0,
                    ..RmsPropHyper::default()
                };
                c.batch_size = 4;
                c.protocol = Protocol::TrainSet { epochs: 500, eval_every: 10 };
                c.eval_repeats = 10;
                c.runs = 100;
                c
            }
            Preset::Iris | Preset::Wisconsin => {
                let iris = preset == Preset::Iris;
                let (dataset, q, inputs, outputs, hidden_hi) = if iris {
                    (DatasetConfig::Iris { file: "iris.data".into() }, 12, 48, 3, 4.0)
                } else {
                    (
                        DatasetConfig::Wisconsin {
                            file: "breast-cancer-wisconsin.data".into(),
                        },
                        7,
                        63,
                        2,
                        2.2,
                    )
                };
                let mut c = common(
                    preset.name(),
                    dataset,
                    EncoderConfig::ReceptiveField {
                        receptive: ReceptiveFieldConfig {
                            q,
                            ..ReceptiveFieldConfig::default()
                        },
                    },
                    vec![inputs, 20, outputs],
                    vec![UniformRange::new(0.0, hidden_hi), UniformRange::new(0.0, 2.0)],
                );
                c.optimizer = RmsPropHyper {
                    eta0: 0.1,
                    lambda0: 1e-3,
                    w_min: -15.0,
                    w_max: 15.0,
                    ..RmsPropHyper::default()
                };
                c.protocol = Protocol::CrossValidation { folds: 3, epochs: 100 };
                c.early_stop = Some(EarlyStopRule::MinLoss);
                c.runs = 40;
                c
            }
            Preset::MnistLatency => {
                let hidden = 160;
                let mut c = common(
                    "mnist-latency",
                    mnist_dataset(),
                    EncoderConfig::Latency {
                        latency: LatencyEncoderConfig::mnist(),
                        bias_neuron: false,
                    },
                    vec![784, hidden, 10],
                    vec![UniformRange::new(0.0, 0.4), UniformRange::new(0.0, 32.0 / hidden as f64)],
                );
                c.nu = 4.0;
                c.optimizer = RmsPropHyper {
                    eta0: 0.01,
                    lambda0: 1e-4,
                    w_min: -2.0,
                    w_max: 2.0,
                    ..RmsPropHyper::default()
                };
                c.protocol = Protocol::Holdout {
                    validation: 600,
                    iterations: 4000,
                    eval_every: 20,
                };
                c.runs = 10;
                c
            }
            Preset::MnistScanline => {
                let (lines, hidden) = (32, 160);
                let mut c = common(
                    "mnist-scanline",
                    mnist_dataset(),
                    EncoderConfig::Scanline {
                        lines,
                        width: 28,
                        height: 28,
                        pixel_scale: 255.0,
                        params: ScanlineParams::default(),
                    },
                    vec![lines, hidden, 10],
                    vec![
                        UniformRange::new(0.0, 40.0 / lines as f64),
                        UniformRange::new(0.0, 32.0 / hidden as f64),
                    ],
                );
                c.delays = Some(DelayRange::default());
                c.nu = 4.0;
                c.optimizer = RmsPropHyper {
                    eta0: 0.05,
                    lambda0: 1e-4,
                    w_min: -6.0,
                    w_max: 6.0,
                    ..RmsPropHyper::default()
                };
                c.protocol = Protocol::Holdout {
                    validation: 600,
                    iterations: 1600,
                    eval_every: 20,
                };
                c.runs = 10;
                c
            }
        }
    }

    /// Reduced MNIST setting for a desk run: 10k training images, 40
    /// hidden neurons, 1500 (latency) or 800 (scanline) iterations. Other
    /// presets are returned unchanged.
    pub fn desk_scale(mut self) -> Self {
        let iterations = match &self.encoder {
            EncoderConfig::Latency { .. } => 1500,
            EncoderConfig::Scanline { .. } => 800,
            EncoderConfig::ReceptiveField { .. } => return self,
        };
        let DatasetConfig::Mnist { train_limit, .. } = &mut self.dataset else {
            return self;
        };
        *train_limit = Some(10_000);
        self.set_hidden(40);
        if let Protocol::Holdout { iterations: it, .. } = &mut self.protocol {
            *it = iterations;
        }
        self
    }

    /// Resizes the single hidden layer of a MNIST preset, rescaling the
    /// output initialisation range as 32 / N₂.
    pub fn set_hidden(&mut self, hidden: usize) {
        if self.layers.len() == 3 {
            self.layers[1] = hidden;
            if matches!(self.dataset, DatasetConfig::Mnist { .. }) {
                self.init[1] = UniformRange::new(0.0, 32.0 / hidden as f64);
            }
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: Self = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn data_path(&self, relative: &str) -> PathBuf {
        Path::new(&self.data_dir).join(relative)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.layers.len() < 2 || self.layers.contains(&0) {
            return bad(format!("layer sizes {:?} need at least two non-empty layers", self.layers));
        }
        if self.init.len() != self.layers.len() - 1 {
            return bad(format!(
                "{} init ranges for {} projections",
                self.init.len(),
                self.layers.len() - 1
            ));
        }
        if let Some(r) = self.init.iter().find(|r| !(r.lo <= r.hi) || !r.lo.is_finite() || !r.hi.is_finite()) {
            return bad(format!("init range [{}, {}) is invalid", r.lo, r.hi));
        }
        if let Some(d) = self.delays {
            if d.min > d.max {
                return bad(format!("delay range {}..={} is empty", d.min, d.max));
            }
        }
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return bad(format!("nu must be positive, got {}", self.nu));
        }
        if self.batch_size == 0 || self.runs == 0 || self.eval_repeats == 0 {
            return bad("batch size, runs and evaluation repeats must be positive".into());
        }
        if !(self.loss_floor > 0.0 && self.loss_floor < 1.0) {
            return bad(format!("loss floor must lie in (0, 1), got {}", self.loss_floor));
        }
        match self.protocol {
            Protocol::TrainSet { epochs, eval_every } if epochs == 0 || eval_every == 0 => {
                return bad("train-set protocol needs positive epochs and cadence".into())
            }
            Protocol::CrossValidation { folds, epochs } if folds < 2 || epochs == 0 => {
                return bad("cross-validation needs at least two folds and one epoch".into())
            }
            Protocol::Holdout {
                validation,
                iterations,
                eval_every,
            } if validation == 0 || iterations == 0 || eval_every == 0 => {
                return bad("holdout protocol needs a validation set, iterations and a cadence".into())
            }
            _ => {}
        }
        if let Some(EarlyStopRule::WithinFraction { fraction }) = self.early_stop {
            if !(fraction >= 0.0) {
                return bad(format!("early-stop fraction must be non-negative, got {fraction}"));
            }
        }
        match &self.encoder {
            EncoderConfig::Latency { latency, .. } => latency.validate()?,
            EncoderConfig::ReceptiveField { receptive } if receptive.q < 3 => {
                return bad(format!("receptive fields need q >= 3, got {}", receptive.q))
            }
            EncoderConfig::Scanline {
                lines,
                width,
                height,
                pixel_scale,
                params,
            } => {
                params.validate()?;
                if *lines == 0 || *width == 0 || *height == 0 || !(*pixel_scale > 0.0) {
                    return bad("scanline encoder needs lines, image size and a positive pixel scale".into());
                }
            }
            _ => {}
        }
        if matches!(self.dataset, DatasetConfig::Mnist { .. }) != matches!(self.protocol, Protocol::Holdout { .. }) {
            return bad("the holdout protocol is used with MNIST, and only there".into());
        }
        self.window.validate()?;
        self.kernel.validate()?;
        self.noise.validate()?;
        self.optimizer.validate()?;
        Ok(())
    }
}
