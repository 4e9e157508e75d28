//! Shuffled mini-batches, reseeded per epoch.

use rand::seq::SliceRandom;

use crate::rng::stream;

/// Random permutation of `0..n` for one epoch.
pub fn epoch_order(n: usize, seed: u64, epoch: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut stream(seed, &[epoch]));
    order
}

/// Positions `0..n` split into batches of `batch_size`; the last batch may
/// be short.
pub fn minibatches(n: usize, batch_size: usize, seed: u64, epoch: u64) -> Vec<Vec<usize>> {
    assert!(batch_size >= 1, "batch size must be positive");
    epoch_order(n, seed, epoch)
        .chunks(batch_size)
        .map(<[usize]>::to_vec)
        .collect()
}

/// Endless stream of mini-batches that walks through successive epochs.
#[derive(Debug, Clone)]
pub struct MinibatchIter {
    n: usize,
    batch_size: usize,
    seed: u64,
    epoch: u64,
    pending: std::vec::IntoIter<Vec<usize>>,
}

impl MinibatchIter {
    pub fn new(n: usize, batch_size: usize, seed: u64) -> Self {
        assert!(n >= 1 && batch_size >= 1, "mini-batches need data and a positive batch size");
        Self {
            n,
            batch_size,
            seed,
            epoch: 0,
            pending: minibatches(n, batch_size, seed, 0).into_iter(),
        }
    }

    /// Epoch of the next batch.
    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    pub fn batches_per_epoch(&self) -> usize {
        self.n.div_ceil(self.batch_size)
    }
}

impl Iterator for MinibatchIter {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if let Some(b) = self.pending.next() {
            if self.pending.len() == 0 {
                self.epoch += 1;
                self.pending = minibatches(self.n, self.batch_size, self.seed, self.epoch).into_iter();
            }
            return Some(b);
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn wisconsin_sized_epoch() {
        let b = minibatches(683, 150, 1, 0);
        assert_eq!(b.iter().map(Vec::len).collect::<Vec<_>>(), vec![150, 150, 150, 150, 83]);
        assert_eq!(minibatches(10, 50, 1, 0).len(), 1);
        assert_eq!(minibatches(10, 3, 7, 2), minibatches(10, 3, 7, 2));
        assert_ne!(epoch_order(50, 7, 0), epoch_order(50, 7, 1));
    }

    #[test]
    fn iterator_crosses_epochs() {
        let mut it = MinibatchIter::new(5, 2, 3);
        assert_eq!(it.batches_per_epoch(), 3);
        let first: Vec<Vec<usize>> = it.by_ref().take(3).collect();
        assert_eq!(it.epoch(), 1);
        assert_eq!(first, minibatches(5, 2, 3, 0));
        assert_eq!(it.next().unwrap(), minibatches(5, 2, 3, 1)[0]);
    }

    proptest! {
        #[test]
        fn every_sample_once_per_epoch(n in 1usize..500, b in 1usize..200, seed in any::<u64>(), epoch in 0u64..100) {
            let mut all: Vec<usize> = minibatches(n, b, seed, epoch).into_iter().flatten().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        }
    }
}
