//! Dataset loading, splitting and mini-batching.

mod idx;
mod minibatch;
mod split;
mod tabular;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use idx::{load_idx, parse_idx_images, parse_idx_labels, IDX_IMAGES_MAGIC, IDX_LABELS_MAGIC};
pub use minibatch::{epoch_order, minibatches, MinibatchIter};
pub use split::{stratified_holdout, stratified_k_fold, stratified_split, SplitPlan, Splits};
pub use tabular::{load_csv, CsvSchema, LabelMap};

/// Feature vectors with integer class labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub classes: usize,
    pub feature_count: usize,
    /// Where the data came from (file names or generator).
    pub source: String,
    /// Rows discarded while loading (missing values).
    pub dropped: usize,
}

impl Dataset {
    pub fn new(features: Vec<Vec<f64>>, labels: Vec<usize>, classes: usize, source: impl Into<String>) -> Result<Self> {
        let source = source.into();
        if features.len() != labels.len() {
            return Err(Error::Shape(format!(
                "{} feature rows but {} labels",
                features.len(),
                labels.len()
            )));
        }
        let feature_count = features.first().map_or(0, Vec::len);
        if let Some(i) = features.iter().position(|r| r.len() != feature_count) {
            return Err(Error::Shape(format!("row {i} has {} features, expected {feature_count}", features[i].len())));
        }
        if let Some(&y) = labels.iter().find(|&&y| y >= classes) {
            return Err(Error::Shape(format!("label {y} outside {classes} classes")));
        }
        Ok(Self {
            features,
            labels,
            classes,
            feature_count,
            source,
            dropped: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.classes];
        for &y in &self.labels {
            counts[y] += 1;
        }
        counts
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: indices.iter().map(|&i| self.features[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            classes: self.classes,
            feature_count: self.feature_count,
            source: self.source.clone(),
            dropped: 0,
        }
    }

    /// First `n` samples (all if fewer).
    pub fn head(&self, n: usize) -> Dataset {
        let idx: Vec<usize> = (0..n.min(self.len())).collect();
        self.subset(&idx)
    }
}

/// The four Boolean XOR patterns.
pub fn xor_dataset() -> Dataset {
    let features = vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]];
    Dataset::new(features, vec![0, 1, 1, 0], 2, "xor").expect("static dataset")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xor_truth_table() {
        let ds = xor_dataset();
        assert_eq!(ds.len(), 4);
        for (x, &y) in ds.features.iter().zip(&ds.labels) {
            let expected = (x[0] != x[1]) as usize;
            assert_eq!(y, expected);
        }
        assert_eq!(ds.labels[0], 0);
        assert_eq!(ds.labels[2], 1);
        assert_eq!(ds.labels[3], 0);
    }

    #[test]
    fn construction_checks() {
        assert!(Dataset::new(vec![vec![1.0]], vec![0, 1], 2, "t").is_err());
        assert!(Dataset::new(vec![vec![1.0], vec![1.0, 2.0]], vec![0, 1], 2, "t").is_err());
        assert!(Dataset::new(vec![vec![1.0]], vec![2], 2, "t").is_err());
        let ds = Dataset::new(vec![vec![1.0], vec![2.0], vec![3.0]], vec![0, 1, 1], 2, "t").unwrap();
        assert_eq!(ds.class_counts(), vec![1, 2]);
        assert_eq!(ds.subset(&[2, 0]).features, vec![vec![3.0], vec![1.0]]);
        assert_eq!(ds.head(2).len(), 2);
        assert_eq!(ds.head(9).len(), 3);
    }
}
