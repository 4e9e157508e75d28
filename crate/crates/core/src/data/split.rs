//! Stratified k-fold and holdout splits.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum SplitPlan {
    StratifiedKFold { k: usize },
    Holdout { validation: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Splits {
    Folds(Vec<Vec<usize>>),
    Holdout { train: Vec<usize>, validation: Vec<usize> },
}

fn by_class<R: Rng + ?Sized>(labels: &[usize], classes: usize, rng: &mut R) -> Vec<Vec<usize>> {
    let mut groups = vec![Vec::new(); classes];
    for (i, &y) in labels.iter().enumerate() {
        groups[y].push(i);
    }
    for g in &mut groups {
        g.shuffle(rng);
    }
    groups
}

/// Shuffles each class and deals its members round-robin over `k` folds.
pub fn stratified_k_fold<R: Rng + ?Sized>(labels: &[usize], classes: usize, k: usize, rng: &mut R) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("k-fold needs k >= 2, got {k}")));
    }
    let groups = by_class(labels, classes, rng);
    if let Some((class, g)) = groups.iter().enumerate().find(|(_, g)| !g.is_empty() && g.len() < k) {
        return Err(Error::ClassTooSmall {
            class,
            count: g.len(),
            required: k,
        });
    }
    let mut folds = vec![Vec::new(); k];
    for (pos, i) in groups.into_iter().flatten().enumerate() {
        folds[pos % k].push(i);
    }
    Ok(folds)
}

/// Sets aside `validation` samples with per-class quotas chosen by the
/// largest-remainder method.
pub fn stratified_holdout<R: Rng + ?Sized>(
    labels: &[usize],
    classes: usize,
    validation: usize,
    rng: &mut R,
) -> Result<(Vec<usize>, Vec<usize>)> {
    let n = labels.len();
    if validation == 0 || validation >= n {
        return Err(Error::InvalidParameter(format!(
            "holdout of {validation} samples from {n} leaves no training or validation data"
        )));
    }
    let groups = by_class(labels, classes, rng);
    let exact: Vec<f64> = groups.iter().map(|g| validation as f64 * g.len() as f64 / n as f64).collect();
    let mut quota: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
    let mut order: Vec<usize> = (0..classes).collect();
    order.sort_by(|&a, &b| {
        let (fa, fb) = (exact[a] - exact[a].floor(), exact[b] - exact[b].floor());
        fb.partial_cmp(&fa).expect("finite").then(a.cmp(&b))
    });
    let mut remaining = validation - quota.iter().sum::<usize>();
    for &c in order.iter().cycle().take(classes * 2) {
        if remaining == 0 {
            break;
        }
        if quota[c] < groups[c].len() {
            quota[c] += 1;
            remaining -= 1;
        }
    }
    let mut train = Vec::with_capacity(n - validation);
    let mut val = Vec::with_capacity(validation);
    for (g, &q) in groups.iter().zip(&quota) {
        val.extend_from_slice(&g[..q]);
        train.extend_from_slice(&g[q..]);
    }
    train.sort_unstable();
    val.sort_unstable();
    Ok((train, val))
}

pub fn stratified_split<R: Rng + ?Sized>(labels: &[usize], classes: usize, plan: SplitPlan, rng: &mut R) -> Result<Splits> {
    match plan {
        SplitPlan::StratifiedKFold { k } => stratified_k_fold(labels, classes, k, rng).map(Splits::Folds),
        SplitPlan::Holdout { validation } => {
            stratified_holdout(labels, classes, validation, rng).map(|(train, validation)| Splits::Holdout { train, validation })
        }
    }
}
