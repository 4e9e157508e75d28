//! First-to-spike softmax, cross-entropy loss, error signals and prediction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Activation floor used inside the logarithm of the loss.
pub const LOSS_FLOOR: f64 = 1e-10;

/// Output-layer activations for one presentation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Activation<F> {
    pub a: Vec<F>,
    /// Softmax scale ν (1/ms).
    pub nu: F,
    /// Set when no output neuron fired; `a` is then uniform.
    pub null: bool,
}

impl<F: Real> Activation<F> {
    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }
}

/// a_i = exp(−ν τ_i) / Σ_k exp(−ν τ_k), with silent neurons (τ = ∞)
/// contributing zero weight.
pub fn softmax_activation<F: Real>(tau: &[F], nu: F) -> Result<Activation<F>> {
    if tau.is_empty() {
        return Err(Error::Shape("softmax over an empty output layer".into()));
    }
    if !(nu > F::zero() && nu.is_finite()) {
        return Err(Error::InvalidParameter(format!("softmax scale must be positive, got {nu}")));
    }
    if tau.iter().any(|t| t.is_nan() || *t == F::neg_infinity()) {
        return Err(Error::InvalidParameter("first-spike times must be finite or +inf".into()));
    }
    let min = tau.iter().copied().fold(F::infinity(), F::min);
    let c = F::lit(tau.len() as f64);
    if min.is_infinite() {
        return Ok(Activation {
            a: vec![F::one() / c; tau.len()],
            nu,
            null: true,
        });
    }
    let weights: Vec<F> = tau
        .iter()
        .map(|&t| if t.is_finite() { (-nu * (t - min)).exp() } else { F::zero() })
        .collect();
    let total: F = weights.iter().copied().sum();
    Ok(Activation {
        a: weights.into_iter().map(|w| w / total).collect(),
        nu,
        null: false,
    })
}

/// −ln a_y with a_y floored at [`LOSS_FLOOR`].
pub fn cross_entropy<F: Real>(activation: &Activation<F>, y: usize) -> F {
    cross_entropy_with_floor(activation, y, F::lit(LOSS_FLOOR))
}

pub fn cross_entropy_with_floor<F: Real>(activation: &Activation<F>, y: usize, floor: F) -> F {
    -activation.a[y].max(floor).ln()
}

pub fn one_hot<F: Real>(y: usize, classes: usize) -> Vec<F> {
    (0..classes).map(|k| if k == y { F::one() } else { F::zero() }).collect()
}

/// δ_i = a_i − y_i.
pub fn output_error_signals<F: Real>(activation: &Activation<F>, y: usize) -> Vec<F> {
    activation
        .a
        .iter()
        .enumerate()
        .map(|(i, &a)| if i == y { a - F::one() } else { a })
        .collect()
}

/// Index of the earliest output spike, or `None` when no output fired or
/// two outputs share the earliest spike time within half a step.
pub fn predict<F: Real>(tau: &[F], dt: F) -> Option<usize> {
    let (best, &min) = tau
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).expect("first-spike times must not be NaN"))?;
    if min.is_infinite() {
        return None;
    }
    let half = dt / F::lit(2.0);
    let tied = tau
        .iter()
        .enumerate()
        .any(|(k, &t)| k != best && (t - min).abs() < half);
    (!tied).then_some(best)
}
