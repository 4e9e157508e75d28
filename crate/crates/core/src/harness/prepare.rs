//! Dataset loading and encoder fitting for an experiment.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{DatasetConfig, EncoderConfig, ExperimentConfig};
use crate::data::{load_csv, load_idx, xor_dataset, CsvSchema, Dataset};
use crate::encoders::{
    fit_ranges, latency_encode, scanline_generate, EncodedSample, FeatureRange, LatencyEncoderConfig,
    ReceptiveFieldConfig, ReceptiveFieldEncoder, ScanlineSet,
};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spikes::SpikeTrain;

/// Raw data of an experiment: the training pool and, for MNIST, the test
/// set.
#[derive(Debug, Clone)]
pub struct LoadedData {
    pub train: Dataset,
    pub test: Option<Dataset>,
}

pub fn load_data(cfg: &ExperimentConfig) -> Result<LoadedData> {
    let data = match &cfg.dataset {
        DatasetConfig::Xor => LoadedData {
            train: xor_dataset(),
            test: None,
        },
        DatasetConfig::Iris { file } => LoadedData {
            train: load_csv(&cfg.data_path(file), &CsvSchema::iris())?,
            test: None,
        },
        DatasetConfig::Wisconsin { file } => LoadedData {
            train: load_csv(&cfg.data_path(file), &CsvSchema::wisconsin())?,
            test: None,
        },
        DatasetConfig::Mnist {
            dir,
            train_limit,
            test_limit,
        } => {
            let root = cfg.data_path(dir);
            let load = |images: &str, labels: &str, limit: &Option<usize>| -> Result<Dataset> {
                let ds = load_idx(&root.join(images), &root.join(labels))?;
                Ok(match limit {
                    Some(n) => ds.head(*n),
                    None => ds,
                })
            };
            LoadedData {
                train: load("train-images-idx3-ubyte", "train-labels-idx1-ubyte", train_limit)?,
                test: Some(load("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte", test_limit)?),
            }
        }
    };
    let expected = *cfg.layers.last().expect("validated layers");
    if data.train.classes != expected {
        return Err(Error::Config(format!(
            "dataset has {} classes but the output layer has {expected} neurons",
            data.train.classes
        )));
    }
    Ok(data)
}

/// Encoder with any state learned from training data or drawn at random.
#[derive(Debug, Clone, PartialEq)]
pub enum FittedEncoder {
    Latency {
        latency: LatencyEncoderConfig,
        bias_neuron: bool,
        features: usize,
    },
    Receptive(ReceptiveFieldEncoder),
    Scanline { pixel_scale: f64, set: ScanlineSet },
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
enum StoredEncoder {
    Latency {
        latency: LatencyEncoderConfig,
        bias_neuron: bool,
        features: usize,
    },
    ReceptiveField {
        config: ReceptiveFieldConfig,
        ranges: Vec<FeatureRange>,
    },
    Scanline { pixel_scale: f64, set: ScanlineSet },
}

impl FittedEncoder {
    /// Fits receptive-field ranges on `train` rows and draws scanlines
    /// from `rng`.
    pub fn fit<'a, R, I>(cfg: &EncoderConfig, features: usize, train: I, rng: &mut R) -> Result<Self>
    where
        R: Rng + ?Sized,
        I: IntoIterator<Item = &'a [f64]>,
    {
        Ok(match cfg {
            EncoderConfig::Latency { latency, bias_neuron } => FittedEncoder::Latency {
                latency: latency.clone(),
                bias_neuron: *bias_neuron,
                features,
            },
            EncoderConfig::ReceptiveField { receptive } => {
                let ranges = fit_ranges(train)?;
                FittedEncoder::Receptive(ReceptiveFieldEncoder::new(receptive.clone(), ranges)?)
            }
            EncoderConfig::Scanline {
                lines,
                width,
                height,
                pixel_scale,
                params,
            } => {
                if width * height != features {
                    return Err(Error::Config(format!(
                        "scanline image of {width}x{height} pixels does not match {features} features"
                    )));
                }
                FittedEncoder::Scanline {
                    pixel_scale: *pixel_scale,
                    set: scanline_generate(*lines, *width, *height, *params, rng)?,
                }
            }
        })
    }

    /// Serializable state (receptive encoders are stored as their ranges).
    pub fn to_json(&self) -> serde_json::Value {
        let stored = match self.clone() {
            FittedEncoder::Latency {
                latency,
                bias_neuron,
                features,
            } => StoredEncoder::Latency {
                latency,
                bias_neuron,
                features,
            },
            FittedEncoder::Receptive(enc) => StoredEncoder::ReceptiveField {
                config: enc.config,
                ranges: enc.ranges,
            },
            FittedEncoder::Scanline { pixel_scale, set } => StoredEncoder::Scanline { pixel_scale, set },
        };
        serde_json::to_value(stored).expect("encoder state serializes")
    }

    pub fn from_json(value: serde_json::Value) -> Result<Self> {
        Ok(match serde_json::from_value::<StoredEncoder>(value)? {
            StoredEncoder::Latency {
                latency,
                bias_neuron,
                features,
            } => FittedEncoder::Latency {
                latency,
                bias_neuron,
                features,
            },
            StoredEncoder::ReceptiveField { config, ranges } => {
                FittedEncoder::Receptive(ReceptiveFieldEncoder::new(config, ranges)?)
            }
            StoredEncoder::Scanline { pixel_scale, set } => FittedEncoder::Scanline {
                pixel_scale,
                set: set.rebuild()?,
            },
        })
    }

    pub fn inputs(&self) -> usize {
        match self {
            FittedEncoder::Latency {
                bias_neuron, features, ..
            } => features + usize::from(*bias_neuron),
            FittedEncoder::Receptive(enc) => enc.inputs(),
            FittedEncoder::Scanline { set, .. } => set.len(),
        }
    }

    pub fn encode(&self, x: &[f64], label: usize) -> Result<EncodedSample<f64>> {
        let trains: Vec<SpikeTrain<f64>> = match self {
            FittedEncoder::Latency {
                latency, bias_neuron, ..
            } => {
                let mut trains = Vec::with_capacity(x.len() + 1);
                if *bias_neuron {
                    trains.push(SpikeTrain::single(0.0));
                }
                trains.extend(latency_encode(x, latency)?);
                trains
            }
            FittedEncoder::Receptive(enc) => enc.encode(x)?,
            FittedEncoder::Scanline { pixel_scale, set } => {
                let image: Vec<f64> = x.iter().map(|&p| p / pixel_scale).collect();
                set.encode(&image)?
            }
        };
        Ok(EncodedSample::from_trains(&trains, label))
    }

    /// Encodes the selected samples of `ds` in order.
    pub fn encode_indices(&self, ds: &Dataset, indices: &[usize]) -> Result<Vec<EncodedSample<f64>>> {
        indices
            .par_iter()
            .map(|&i| self.encode(&ds.features[i], ds.labels[i]))
            .collect()
    }

    pub fn encode_all(&self, ds: &Dataset) -> Result<Vec<EncodedSample<f64>>> {
        let all: Vec<usize> = (0..ds.len()).collect();
        self.encode_indices(ds, &all)
    }
}

/// Spike count summary used in logs.
pub fn mean_input_spikes<F: Real>(samples: &[EncodedSample<F>]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    samples.iter().map(EncodedSample::spike_count).sum::<usize>() as f64 / samples.len() as f64
}
