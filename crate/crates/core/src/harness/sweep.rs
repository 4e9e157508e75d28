//! One-dimensional hyperparameter sweeps.

use serde::{Deserialize, Serialize};

use super::config::{EarlyStopRule, ExperimentConfig};
use super::summary::{early_stop_tracker, Summary};
use super::train::run_experiment;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepParameter {
    Eta0,
    Lambda0,
    Gamma0,
    Nu,
    BatchSize,
    /// Size of the single hidden layer.
    Hidden,
}

impl SweepParameter {
    pub const ALL: [SweepParameter; 6] = [
        SweepParameter::Eta0,
        SweepParameter::Lambda0,
        SweepParameter::Gamma0,
        SweepParameter::Nu,
        SweepParameter::BatchSize,
        SweepParameter::Hidden,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::Eta0 => "eta0",
            SweepParameter::Lambda0 => "lambda0",
            SweepParameter::Gamma0 => "gamma0",
            SweepParameter::Nu => "nu",
            SweepParameter::BatchSize => "batch-size",
            SweepParameter::Hidden => "hidden",
        }
    }

    /// Copy of `cfg` with the parameter set to `value`.
    pub fn apply(self, cfg: &ExperimentConfig, value: f64) -> Result<ExperimentConfig> {
        let mut c = cfg.clone();
        let count = || -> Result<usize> {
            if value >= 1.0 && value.fract() == 0.0 {
                Ok(value as usize)
            } else {
                Err(Error::Config(format!("{} must be a positive integer, got {value}", self.name())))
            }
        };
        match self {
            SweepParameter::Eta0 => c.optimizer.eta0 = value,
            SweepParameter::Lambda0 => c.optimizer.lambda0 = value,
            SweepParameter::Gamma0 => c.optimizer.gamma0 = value,
            SweepParameter::Nu => c.nu = value,
            SweepParameter::BatchSize => c.batch_size = count()?,
            SweepParameter::Hidden => {
                if c.layers.len() != 3 {
                    return Err(Error::Config("hidden-size sweeps need a single hidden layer".into()));
                }
                c.set_hidden(count()?);
            }
        }
        c.validate()?;
        Ok(c)
    }
}

impl std::str::FromStr for SweepParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SweepParameter::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown sweep parameter {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

/// Outcome of one grid point, read off the mean monitored loss curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: f64,
    pub min_loss: f64,
    pub min_loss_sem: f64,
    /// Epoch of the minimum.
    pub min_epoch: f64,
    /// First epoch within 1% of the minimum.
    pub epoch_within_1pct: f64,
    /// First epoch within 10% of the minimum.
    pub epoch_within_10pct: f64,
    /// Mean accuracy at the minimum.
    pub accuracy: f64,
    pub summary: Summary,
}

impl SweepPoint {
    pub fn from_summary(value: f64, summary: Summary) -> Self {
        let losses: Vec<f64> = summary.curve.iter().map(|p| p.loss.mean).collect();
        let epoch_at = |rule| {
            early_stop_tracker(&losses, rule).map_or(f64::NAN, |i| summary.curve[i].epoch)
        };
        let min = early_stop_tracker(&losses, EarlyStopRule::MinLoss);
        let at_min = min.map(|i| &summary.curve[i]);
        Self {
            value,
            min_loss: at_min.map_or(f64::NAN, |p| p.loss.mean),
            min_loss_sem: at_min.map_or(f64::NAN, |p| p.loss.sem),
            min_epoch: at_min.map_or(f64::NAN, |p| p.epoch),
            epoch_within_1pct: epoch_at(EarlyStopRule::WithinFraction { fraction: 0.01 }),
            epoch_within_10pct: epoch_at(EarlyStopRule::WithinFraction { fraction: 0.1 }),
            accuracy: at_min.map_or(f64::NAN, |p| p.accuracy.mean),
            summary,
        }
    }
}

/// Runs the experiment once per grid value, every point with the same
/// master seed.
pub fn sweep(cfg: &ExperimentConfig, grid: &SweepGrid) -> Result<Vec<SweepPoint>> {
    if grid.values.is_empty() {
        return Err(Error::Config("sweep grid is empty".into()));
    }
    grid.values
        .iter()
        .map(|&v| {
            let point_cfg = grid.parameter.apply(cfg, v)?;
            let result = run_experiment(&point_cfg)?;
            Ok(SweepPoint::from_summary(v, Summary::from_result(&result)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::Preset;

    #[test]
    fn parameters_apply() {
        let base = ExperimentConfig::preset(Preset::MnistLatency);
        assert_eq!(SweepParameter::Eta0.apply(&base, 0.3).unwrap().optimizer.eta0, 0.3);
        let h = SweepParameter::Hidden.apply(&base, 80.0).unwrap();
        assert_eq!(h.layers, vec![784, 80, 10]);
        assert_eq!(h.init[1].hi, 0.4);
        assert!(SweepParameter::BatchSize.apply(&base, 2.5).is_err());
        assert!(SweepParameter::Nu.apply(&base, -1.0).is_err());
        for p in SweepParameter::ALL {
            assert_eq!(p.name().parse::<SweepParameter>().unwrap(), p);
        }
    }

    #[test]
    fn empty_grid_is_rejected() {
        let grid = SweepGrid {
            parameter: SweepParameter::Eta0,
            values: vec![],
        };
        assert!(sweep(&ExperimentConfig::preset(Preset::Xor), &grid).is_err());
    }
}
