//! Multilayer spiking neural networks trained for first-to-spike
//! classification.

// `!(x > 0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checkpoint;
pub mod data;
pub mod encoders;
pub mod error;
pub mod harness;
pub mod learning;
pub mod network;
pub mod objective;
pub mod rng;
pub mod scalar;
mod serde_ext;
pub mod spikes;
pub mod srm;

pub use error::{Error, Result};
pub use scalar::Real;

/// Double-precision network, the usual choice.
pub type Network = network::NetworkParams<f64>;
pub type Record = network::SpikeRecord<f64>;
pub type Train = spikes::SpikeTrain<f64>;
pub type Sample = encoders::EncodedSample<f64>;
