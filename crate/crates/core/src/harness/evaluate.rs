//! Loss, accuracy and confusion of a network on a set of encoded samples.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::encoders::EncodedSample;
use crate::error::Result;
use crate::network::{NetworkParams, SimWindow};
use crate::objective::{cross_entropy_with_floor, predict, softmax_activation};
use crate::rng::stream;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions<F> {
    pub window: SimWindow<F>,
    pub nu: F,
    pub loss_floor: F,
    /// Presentations of each sample.
    pub repeats: usize,
    pub classes: usize,
}

/// Result of one presentation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    pub label: usize,
    /// `None` for a null prediction.
    pub prediction: Option<usize>,
    pub loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalMetrics {
    pub presentations: usize,
    /// Mean cross-entropy.
    pub loss: f64,
    pub accuracy: f64,
    pub error_rate: f64,
    pub null_rate: f64,
    /// `confusion[label][k]` counts predictions of class `k`; the last
    /// column counts null predictions.
    pub confusion: Vec<Vec<u64>>,
}

impl EvalMetrics {
    pub fn from_outcomes(outcomes: &[Outcome], classes: usize) -> Self {
        let mut confusion = vec![vec![0u64; classes + 1]; classes];
        let (mut loss, mut correct, mut null) = (0.0, 0usize, 0usize);
        for o in outcomes {
            loss += o.loss;
            match o.prediction {
                Some(k) => {
                    confusion[o.label][k] += 1;
                    correct += usize::from(k == o.label);
                }
                None => {
                    confusion[o.label][classes] += 1;
                    null += 1;
                }
            }
        }
        let n = outcomes.len();
        let rate = |k: usize| if n == 0 { 0.0 } else { k as f64 / n as f64 };
        Self {
            presentations: n,
            loss: if n == 0 { 0.0 } else { loss / n as f64 },
            accuracy: rate(correct),
            error_rate: rate(n - correct - null),
            null_rate: rate(null),
            confusion,
        }
    }

    /// Confusion matrix with each row scaled to percentages of its class.
    pub fn confusion_percent(&self) -> Vec<Vec<f64>> {
        self.confusion
            .iter()
            .map(|row| {
                let total: u64 = row.iter().sum();
                row.iter()
                    .map(|&c| if total == 0 { 0.0 } else { 100.0 * c as f64 / total as f64 })
                    .collect()
            })
            .collect()
    }
}

/// Presents one sample and scores the response.
pub fn present<F: Real>(
    params: &NetworkParams<F>,
    sample: &EncodedSample<F>,
    opts: &EvalOptions<F>,
    seed: u64,
    path: &[u64],
) -> Result<Outcome> {
    let record = params.simulate(&sample.trains(), &opts.window, &mut stream(seed, path))?;
    let activation = softmax_activation(&record.tau, opts.nu)?;
    Ok(Outcome {
        label: sample.label,
        prediction: predict(&record.tau, opts.window.dt),
        loss: cross_entropy_with_floor(&activation, sample.label, opts.loss_floor).to_f64_lossy(),
    })
}

/// Presents every sample `opts.repeats` times, drawing hidden-layer noise
/// from the streams `seed / [sample, repeat]`.
pub fn evaluate<F: Real>(
    params: &NetworkParams<F>,
    samples: &[EncodedSample<F>],
    opts: &EvalOptions<F>,
    seed: u64,
) -> Result<EvalMetrics> {
    let outcomes = (0..samples.len() * opts.repeats)
        .into_par_iter()
        .map(|k| {
            let (i, r) = (k / opts.repeats, k % opts.repeats);
            present(params, &samples[i], opts, seed, &[i as u64, r as u64])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EvalMetrics::from_outcomes(&outcomes, opts.classes))
}
