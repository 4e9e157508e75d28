//! Single-spike latency coding through a leaky integrate-and-fire encoder.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spikes::SpikeTrain;
use crate::srm::{lif_current_for_latency, lif_first_spike_time};

/// Feature value to input current (nA) entry of a value map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValueCurrent {
    pub value: f64,
    #[serde(with = "crate::serde_ext::extended_f64")]
    pub current: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum LatencyMode {
    /// Every feature value is looked up in a fixed table of currents.
    ValueMap { entries: Vec<ValueCurrent> },
    /// Features are scaled to the unit range, then by `i_max`. With no
    /// `range` each vector is scaled by its own minimum and maximum; a
    /// fixed range clamps values into it.
    Normalized { range: Option<[f64; 2]> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencyEncoderConfig {
    /// Encoder resistance R (MΩ).
    pub resistance: f64,
    /// Current at the top of the normalized range (nA).
    pub i_max: f64,
    /// Spikes later than this (ms) are dropped.
    pub cutoff: f64,
    pub tau_m: f64,
    pub theta: f64,
    pub mode: LatencyMode,
}

impl Default for LatencyEncoderConfig {
    fn default() -> Self {
        Self {
            resistance: 4.0,
            i_max: 20.0,
            cutoff: 9.0,
            tau_m: 10.0,
            theta: 15.0,
            mode: LatencyMode::Normalized { range: None },
        }
    }
}

impl LatencyEncoderConfig {
    /// Normalized encoding of 8-bit pixels over the fixed range [0, 255].
    pub fn mnist() -> Self {
        Self {
            mode: LatencyMode::Normalized { range: Some([0.0, 255.0]) },
            ..Self::default()
        }
    }

    /// Value map producing the given latency (ms) for each listed value.
    pub fn from_latencies(pairs: &[(f64, f64)]) -> Self {
        let base = Self::default();
        let entries = pairs
            .iter()
            .map(|&(value, latency)| ValueCurrent {
                value,
                current: lif_current_for_latency(latency, base.resistance, base.tau_m, base.theta),
            })
            .collect();
        Self {
            mode: LatencyMode::ValueMap { entries },
            ..base
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cutoff > 0.0 && self.i_max > 0.0 && self.resistance > 0.0 && self.tau_m > 0.0 && self.theta > 0.0) {
            return Err(Error::InvalidParameter(
                "latency encoder needs positive cutoff, i_max, resistance, tau_m and theta".into(),
            ));
        }
        match &self.mode {
            LatencyMode::ValueMap { entries } if entries.is_empty() => {
                Err(Error::InvalidParameter("latency value map is empty".into()))
            }
            LatencyMode::Normalized { range: Some([lo, hi]) } if !(lo < hi) => Err(Error::InvalidParameter(format!(
                "normalization range [{lo}, {hi}] is empty"
            ))),
            _ => Ok(()),
        }
    }

    /// Input current of every feature.
    pub fn currents(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("latency encoding needs finite features".into()));
        }
        match &self.mode {
            LatencyMode::ValueMap { entries } => x
                .iter()
                .map(|&v| {
                    entries
                        .iter()
                        .find(|e| (e.value - v).abs() <= 1e-9 * e.value.abs().max(1.0))
                        .map(|e| e.current)
                        .ok_or_else(|| Error::InvalidParameter(format!("value {v} is not in the latency map")))
                })
                .collect(),
            LatencyMode::Normalized { range } => {
                let (lo, hi) = match range {
                    Some([lo, hi]) => (*lo, *hi),
                    None => x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v))),
                };
                if !(hi > lo) {
                    return Ok(vec![0.0; x.len()]);
                }
                Ok(x
                    .iter()
                    .map(|&v| self.i_max * ((v - lo) / (hi - lo)).clamp(0.0, 1.0))
                    .collect())
            }
        }
    }

    /// Latency (ms) of a current, +∞ when it exceeds the cutoff or the
    /// neuron never fires.
    pub fn latency(&self, current: f64) -> f64 {
        let t = lif_first_spike_time(current, self.resistance, self.tau_m, self.theta);
        if t > self.cutoff {
            f64::INFINITY
        } else {
            t
        }
    }
}

/// One spike per feature at its latency, or none.
pub fn latency_encode<F: Real>(x: &[f64], cfg: &LatencyEncoderConfig) -> Result<Vec<SpikeTrain<F>>> {
    cfg.validate()?;
    Ok(cfg
        .currents(x)?
        .into_iter()
        .map(|i| {
            let t = cfg.latency(i);
            if t.is_finite() {
                SpikeTrain::single(F::lit(t))
            } else {
                SpikeTrain::new()
            }
        })
        .collect())
}
