//! Gaussian receptive-field population coding.
//!
//! Each feature is encoded by `q` neurons whose Gaussian tuning curves tile
//! the feature's range; strong overlap maps to an early spike.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spikes::SpikeTrain;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureRange {
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReceptiveFieldConfig {
    /// Encoders per feature.
    pub q: usize,
    /// Spike time of a zero activation (ms); t = scale · (1 − a).
    pub scale: f64,
    /// Later spikes are discarded (ms).
    pub cutoff: f64,
}

impl Default for ReceptiveFieldConfig {
    fn default() -> Self {
        Self {
            q: 12,
            scale: 10.0,
            cutoff: 9.0,
        }
    }
}

/// Per-feature min/max over the given rows. A constant feature gets a unit
/// range centred on its value so that its encoders stay well defined.
pub fn fit_ranges<'a, I>(rows: I) -> Result<Vec<FeatureRange>>
where
    I: IntoIterator<Item = &'a [f64]>,
{
    let mut ranges: Option<Vec<FeatureRange>> = None;
    for row in rows {
        let r = ranges.get_or_insert_with(|| {
            vec![
                FeatureRange {
                    min: f64::INFINITY,
                    max: f64::NEG_INFINITY
                };
                row.len()
            ]
        });
        if r.len() != row.len() {
            return Err(Error::Shape("rows of differing length".into()));
        }
        for (fr, &v) in r.iter_mut().zip(row) {
            fr.min = fr.min.min(v);
            fr.max = fr.max.max(v);
        }
    }
    let mut ranges = ranges.ok_or_else(|| Error::InvalidParameter("cannot fit ranges on zero rows".into()))?;
    for r in &mut ranges {
        if r.max <= r.min {
            let c = r.min;
            *r = FeatureRange { min: c - 0.5, max: c + 0.5 };
        }
    }
    Ok(ranges)
}

/// Centres and widths for a fixed set of feature ranges.
#[derive(Debug, Clone, PartialEq)]
pub struct ReceptiveFieldEncoder {
    pub config: ReceptiveFieldConfig,
    pub ranges: Vec<FeatureRange>,
    /// `centers[f][j]`.
    pub centers: Vec<Vec<f64>>,
    pub sigmas: Vec<f64>,
}

impl ReceptiveFieldEncoder {
    pub fn new(config: ReceptiveFieldConfig, ranges: Vec<FeatureRange>) -> Result<Self> {
        if config.q < 3 {
            return Err(Error::InvalidParameter(format!("receptive fields need q >= 3, got {}", config.q)));
        }
        if !(config.scale > 0.0 && config.cutoff > 0.0) {
            return Err(Error::InvalidParameter("receptive field scale and cutoff must be positive".into()));
        }
        if let Some(r) = ranges.iter().find(|r| !(r.max > r.min) || !r.min.is_finite() || !r.max.is_finite()) {
            return Err(Error::InvalidParameter(format!("feature range [{}, {}] is empty", r.min, r.max)));
        }
        let q = config.q as f64;
        let centers = ranges
            .iter()
            .map(|r| {
                (1..=config.q)
                    .map(|j| r.min + (2.0 * j as f64 - 3.0) / 2.0 * (r.max - r.min) / (q - 2.0))
                    .collect()
            })
            .collect();
        let sigmas = ranges.iter().map(|r| 2.0 / 3.0 * (r.max - r.min) / (q - 2.0)).collect();
        Ok(Self {
            config,
            ranges,
            centers,
            sigmas,
        })
    }

    pub fn features(&self) -> usize {
        self.ranges.len()
    }

    pub fn inputs(&self) -> usize {
        self.ranges.len() * self.config.q
    }

    /// Activations a[f·q + j] ∈ (0, 1].
    pub fn activations(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.features() {
            return Err(Error::Shape(format!("{} features for a {}-feature encoder", x.len(), self.features())));
        }
        Ok(x.iter()
            .zip(&self.centers)
            .zip(&self.sigmas)
            .flat_map(|((&v, centers), &sigma)| {
                centers
                    .iter()
                    .map(move |&c| (-(v - c).powi(2) / (2.0 * sigma * sigma)).exp())
            })
            .collect())
    }

    pub fn encode<F: Real>(&self, x: &[f64]) -> Result<Vec<SpikeTrain<F>>> {
        Ok(self
            .activations(x)?
            .into_iter()
            .map(|a| {
                let t = self.config.scale * (1.0 - a);
                if t <= self.config.cutoff {
                    SpikeTrain::single(F::lit(t))
                } else {
                    SpikeTrain::new()
                }
            })
            .collect())
    }
}

pub fn receptive_field_encode<F: Real>(x: &[f64], encoder: &ReceptiveFieldEncoder) -> Result<Vec<SpikeTrain<F>>> {
    encoder.encode(x)
}
