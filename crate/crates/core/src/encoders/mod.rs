//! Transformations from raw features and images to input spike trains.

mod file;
mod latency;
mod receptive;
mod scanline;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spikes::SpikeTrain;

pub use file::{read_encoded, write_encoded, EncodedFile, ENCODED_FORMAT, ENCODED_VERSION};
pub use latency::{latency_encode, LatencyEncoderConfig, LatencyMode, ValueCurrent};
pub use receptive::{fit_ranges, receptive_field_encode, FeatureRange, ReceptiveFieldConfig, ReceptiveFieldEncoder};
pub use scanline::{scanline_generate, Scanline, ScanlineParams, ScanlineSet};

/// One input spike: presynaptic neuron index and firing time (ms).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InputSpike<F> {
    pub neuron: usize,
    pub time: F,
}

/// Encoded input pattern with its class label.
///
/// Spikes are stored sparsely, ordered by neuron then time; most input
/// neurons of an image encoding never fire.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodedSample<F> {
    pub inputs: usize,
    pub spikes: Vec<InputSpike<F>>,
    pub label: usize,
}

impl<F: Real> EncodedSample<F> {
    pub fn from_trains(trains: &[SpikeTrain<F>], label: usize) -> Self {
        let spikes = trains
            .iter()
            .enumerate()
            .flat_map(|(neuron, t)| t.iter().map(move |&time| InputSpike { neuron, time }))
            .collect();
        Self {
            inputs: trains.len(),
            spikes,
            label,
        }
    }

    pub fn from_spikes(inputs: usize, mut spikes: Vec<InputSpike<F>>, label: usize) -> Result<Self> {
        if let Some(s) = spikes.iter().find(|s| s.neuron >= inputs) {
            return Err(Error::Shape(format!("spike on neuron {} of a {inputs}-neuron input layer", s.neuron)));
        }
        if spikes.iter().any(|s| !s.time.is_finite()) {
            return Err(Error::InvalidParameter("encoded spike times must be finite".into()));
        }
        spikes.sort_by(|a, b| a.neuron.cmp(&b.neuron).then(a.time.partial_cmp(&b.time).expect("finite")));
        Ok(Self { inputs, spikes, label })
    }

    pub fn trains(&self) -> Vec<SpikeTrain<F>> {
        let mut trains = vec![SpikeTrain::new(); self.inputs];
        for s in &self.spikes {
            trains[s.neuron].push(s.time);
        }
        trains
    }

    pub fn spike_count(&self) -> usize {
        self.spikes.len()
    }

    pub fn latest(&self) -> Option<F> {
        self.spikes.iter().map(|s| s.time).reduce(F::max)
    }

    /// Converts spike times to another scalar type.
    pub fn cast<G: Real>(&self) -> EncodedSample<G> {
        EncodedSample {
            inputs: self.inputs,
            spikes: self
                .spikes
                .iter()
                .map(|s| InputSpike {
                    neuron: s.neuron,
                    time: G::lit(s.time.to_f64_lossy()),
                })
                .collect(),
            label: self.label,
        }
    }
}
