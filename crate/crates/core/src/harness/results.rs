//! Result files: long-format metrics CSV, JSON summary and checkpoints.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use super::config::ExperimentConfig;
use super::summary::Summary;
use super::sweep::{SweepGrid, SweepPoint};
use super::train::{ExperimentResult, VERSION};
use crate::error::{Error, Result};

fn header(config: &ExperimentConfig) -> Result<String> {
    Ok(format!(
        "# version: {VERSION}\n# config: {}\n",
        serde_json::to_string(config)?
    ))
}

/// `run,fold,iteration,metric,value` rows preceded by `#` lines holding the
/// version and the resolved configuration.
pub fn metrics_csv(result: &ExperimentResult) -> Result<String> {
    let mut out = header(&result.config)?;
    out.push_str("run,fold,iteration,metric,value\n");
    for r in &result.runs {
        for (k, loss) in r.train_loss.iter().enumerate() {
            writeln!(out, "{},{},{},train_batch_loss,{loss}", r.run, r.fold, k + 1).expect("string write");
        }
        for e in &r.evaluations {
            let split = e.split.name();
            let m = &e.metrics;
            for (name, value) in [
                ("loss", m.loss),
                ("accuracy", m.accuracy),
                ("error_rate", m.error_rate),
                ("null_rate", m.null_rate),
            ] {
                writeln!(out, "{},{},{},{split}_{name},{value}", r.run, r.fold, e.iteration).expect("string write");
            }
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct NetworkSummary<'a> {
    run: usize,
    fold: usize,
    iterations: usize,
    iterations_per_epoch: usize,
    wall_clock_s: f64,
    final_evaluations: Vec<&'a super::train::Evaluation>,
}

#[derive(Serialize)]
struct SummaryFile<'a> {
    version: &'a str,
    config: &'a ExperimentConfig,
    summary: &'a Summary,
    networks: Vec<NetworkSummary<'a>>,
}

pub fn summary_json(result: &ExperimentResult, summary: &Summary) -> Result<String> {
    let networks = result
        .runs
        .iter()
        .map(|r| {
            let mut finals: Vec<&super::train::Evaluation> = Vec::new();
            for e in r.evaluations.iter().rev() {
                if !finals.iter().any(|f| f.split == e.split) {
                    finals.push(e);
                }
            }
            finals.reverse();
            NetworkSummary {
                run: r.run,
                fold: r.fold,
                iterations: r.train_loss.len(),
                iterations_per_epoch: r.iterations_per_epoch,
                wall_clock_s: r.wall_clock_s,
                final_evaluations: finals,
            }
        })
        .collect();
    Ok(serde_json::to_string_pretty(&SummaryFile {
        version: VERSION,
        config: &result.config,
        summary,
        networks,
    })?)
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Writes `config.json`, `metrics.csv`, `summary.json` and one checkpoint
/// per network under `dir`.
pub fn write_results(dir: &Path, result: &ExperimentResult) -> Result<Summary> {
    ensure_dir(dir)?;
    let summary = Summary::from_result(result);
    write(&dir.join("config.json"), &serde_json::to_string_pretty(&result.config)?)?;
    write(&dir.join("metrics.csv"), &metrics_csv(result)?)?;
    write(&dir.join("summary.json"), &summary_json(result, &summary)?)?;
    let ckpt_dir = dir.join("checkpoints");
    ensure_dir(&ckpt_dir)?;
    for r in &result.runs {
        r.checkpoint
            .save(&ckpt_dir.join(format!("run{:03}_fold{}.json", r.run, r.fold)))?;
    }
    Ok(summary)
}

pub fn sweep_csv(config: &ExperimentConfig, grid: &SweepGrid, points: &[SweepPoint]) -> Result<String> {
    let mut out = header(config)?;
    writeln!(
        out,
        "{},min_loss,min_loss_sem,min_epoch,epoch_within_1pct,epoch_within_10pct,accuracy",
        grid.parameter.name()
    )
    .expect("string write");
    for p in points {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            p.value, p.min_loss, p.min_loss_sem, p.min_epoch, p.epoch_within_1pct, p.epoch_within_10pct, p.accuracy
        )
        .expect("string write");
    }
    Ok(out)
}

/// Writes `sweep.csv` and `sweep.json` under `dir`.
pub fn write_sweep(dir: &Path, config: &ExperimentConfig, grid: &SweepGrid, points: &[SweepPoint]) -> Result<()> {
    #[derive(Serialize)]
    struct SweepFile<'a> {
        version: &'a str,
        config: &'a ExperimentConfig,
        grid: &'a SweepGrid,
        points: &'a [SweepPoint],
    }
    ensure_dir(dir)?;
    write(&dir.join("sweep.csv"), &sweep_csv(config, grid, points)?)?;
    write(
        &dir.join("sweep.json"),
        &serde_json::to_string_pretty(&SweepFile {
            version: VERSION,
            config,
            grid,
            points,
        })?,
    )
}
