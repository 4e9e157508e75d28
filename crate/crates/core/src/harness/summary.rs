//! Early stopping and aggregation over independent runs.

use serde::{Deserialize, Serialize};

use super::config::{EarlyStopRule, Protocol};
use super::train::{Evaluation, ExperimentResult, RunMetrics, SplitKind};

/// Index of the stopping point of a loss series, `None` if it is empty.
///
/// Non-finite values are never selected.
pub fn early_stop_tracker(series: &[f64], rule: EarlyStopRule) -> Option<usize> {
    let (best, min) = series
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_finite())
        .fold(None, |acc: Option<(usize, f64)>, (i, &v)| match acc {
            Some((_, m)) if m <= v => acc,
            _ => Some((i, v)),
        })?;
    match rule {
        EarlyStopRule::MinLoss => Some(best),
        EarlyStopRule::WithinFraction { fraction } => {
            let bound = min + fraction * min.abs();
            series.iter().position(|&v| v <= bound)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSem {
    pub mean: f64,
    /// Standard error of the mean (0 for a single value).
    pub sem: f64,
    pub n: usize,
}

impl MeanSem {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self { mean: f64::NAN, sem: f64::NAN, n };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let sem = if n > 1 {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Self { mean, sem, n }
    }
}

/// Mean of one evaluation across networks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub iteration: usize,
    pub epoch: f64,
    pub loss: MeanSem,
    pub accuracy: MeanSem,
    pub null_rate: MeanSem,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub networks: usize,
    /// Split monitored during training.
    pub monitor: SplitKind,
    pub curve: Vec<CurvePoint>,
    /// Stopping point on the mean monitored loss, when early stopping is
    /// configured.
    pub stop: Option<CurvePoint>,
    /// Headline figures: the stopping point for cross-validation, the
    /// final test evaluation for holdout runs, the final evaluation
    /// otherwise.
    pub report_split: SplitKind,
    pub report: CurvePoint,
    /// Class-normalised confusion (percent) at the report point, averaged
    /// over networks; the last column is the null prediction.
    pub confusion_percent: Vec<Vec<f64>>,
    /// Mean training loss over the final epoch of each network.
    pub final_train_loss: MeanSem,
    pub wall_clock_s: f64,
}

fn point(evals: &[&Evaluation]) -> CurvePoint {
    let stat = |f: fn(&Evaluation) -> f64| MeanSem::of(&evals.iter().map(|e| f(e)).collect::<Vec<_>>());
    CurvePoint {
        iteration: evals[0].iteration,
        epoch: evals[0].epoch,
        loss: stat(|e| e.metrics.loss),
        accuracy: stat(|e| e.metrics.accuracy),
        null_rate: stat(|e| e.metrics.null_rate),
    }
}

fn mean_confusion(evals: &[&Evaluation]) -> Vec<Vec<f64>> {
    let mut acc: Vec<Vec<f64>> = Vec::new();
    for e in evals {
        let c = e.metrics.confusion_percent();
        if acc.is_empty() {
            acc = c;
        } else {
            for (a, r) in acc.iter_mut().zip(&c) {
                a.iter_mut().zip(r).for_each(|(x, y)| *x += y);
            }
        }
    }
    let n = evals.len().max(1) as f64;
    acc.iter_mut().flatten().for_each(|x| *x /= n);
    acc
}

/// Aligned evaluations of a split: `columns[k]` holds the k-th evaluation
/// of every network.
fn columns(runs: &[RunMetrics], split: SplitKind) -> Vec<Vec<&Evaluation>> {
    let series: Vec<Vec<&Evaluation>> = runs.iter().map(|r| r.series(split).collect()).collect();
    let len = series.iter().map(Vec::len).min().unwrap_or(0);
    (0..len).map(|k| series.iter().map(|s| s[k]).collect()).collect()
}

impl Summary {
    pub fn from_result(result: &ExperimentResult) -> Self {
        let cfg = &result.config;
        let monitor = match cfg.protocol {
            Protocol::TrainSet { .. } => SplitKind::Train,
            Protocol::CrossValidation { .. } => SplitKind::Test,
            Protocol::Holdout { .. } => SplitKind::Validation,
        };
        let cols = columns(&result.runs, monitor);
        let curve: Vec<CurvePoint> = cols.iter().map(|c| point(c)).collect();
        let losses: Vec<f64> = curve.iter().map(|p| p.loss.mean).collect();
        let stop_index = cfg.early_stop.and_then(|rule| early_stop_tracker(&losses, rule));
        let stop = stop_index.map(|i| curve[i].clone());

        let (report_split, report_evals) = match cfg.protocol {
            Protocol::Holdout { .. } => {
                let test = columns(&result.runs, SplitKind::Test);
                (SplitKind::Test, test.last().cloned().unwrap_or_default())
            }
            _ => {
                let k = stop_index.unwrap_or(cols.len().saturating_sub(1));
                (monitor, cols.get(k).cloned().unwrap_or_default())
            }
        };
        let report = if report_evals.is_empty() {
            CurvePoint {
                iteration: 0,
                epoch: 0.0,
                loss: MeanSem::of(&[]),
                accuracy: MeanSem::of(&[]),
                null_rate: MeanSem::of(&[]),
            }
        } else {
            point(&report_evals)
        };
        let train_losses: Vec<f64> = result.runs.iter().filter_map(RunMetrics::final_epoch_train_loss).collect();
        Self {
            networks: result.runs.len(),
            monitor,
            curve,
            stop,
            report_split,
            report,
            confusion_percent: mean_confusion(&report_evals),
            final_train_loss: MeanSem::of(&train_losses),
            wall_clock_s: result.runs.iter().map(|r| r.wall_clock_s).sum(),
        }
    }
}
