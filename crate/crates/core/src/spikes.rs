use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// Firing times (ms) of one neuron over an observation window, in
/// non-decreasing order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SpikeTrain<F>(Vec<F>);

impl<F: Real> SpikeTrain<F> {
    pub fn new() -> Self {
        SpikeTrain(Vec::new())
    }

    /// Builds a train from arbitrary times, sorting them.
    pub fn from_times(mut times: Vec<F>) -> Self {
        times.sort_by(|a, b| a.partial_cmp(b).expect("spike times must not be NaN"));
        SpikeTrain(times)
    }

    pub fn single(t: F) -> Self {
        SpikeTrain(vec![t])
    }

    /// Appends a spike; `t` must not precede the last recorded spike.
    pub fn push(&mut self, t: F) {
        debug_assert!(self.0.last().is_none_or(|&last| last <= t));
        self.0.push(t);
    }

    /// Earliest spike, or +∞ for a silent neuron.
    pub fn first_or_inf(&self) -> F {
        self.0.first().copied().unwrap_or_else(F::infinity)
    }

    pub fn count(&self) -> usize {
        self.0.len()
    }

    pub fn times(&self) -> &[F] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<F> {
        self.0
    }
}

impl<F> Deref for SpikeTrain<F> {
    type Target = [F];

    fn deref(&self) -> &[F] {
        &self.0
    }
}

impl<F: Real> FromIterator<F> for SpikeTrain<F> {
    fn from_iter<I: IntoIterator<Item = F>>(iter: I) -> Self {
        Self::from_times(iter.into_iter().collect())
    }
}
