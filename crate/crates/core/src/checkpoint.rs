//! Versioned JSON snapshots of a network and its optimizer.

use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learning::{BatchAccumulator, GradientState, RmsPropHyper};
use crate::network::{LayerSpec, NetworkParams};
use crate::scalar::Real;
use crate::srm::{EscapeNoise, KernelParams};

pub const CHECKPOINT_FORMAT: &str = "first-spike-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

type Matrix = Vec<Vec<f64>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerSnapshot {
    pub m: Vec<Matrix>,
    pub hyper: RmsPropHyper,
}

/// Everything needed to rebuild a trained network. Values are stored as
/// `f64`, which holds both supported precisions exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub seed: u64,
    pub layers: Vec<LayerSpec>,
    pub weights: Vec<Matrix>,
    pub delays: Option<Matrix>,
    pub kernel: KernelParams<f64>,
    pub noise: EscapeNoise<f64>,
    pub optimizer: Option<OptimizerSnapshot>,
    /// Fitted encoder state (receptive-field ranges, scanlines).
    pub encoder: Option<serde_json::Value>,
}

fn to_rows<F: Real>(a: &Array2<F>) -> Matrix {
    a.outer_iter().map(|r| r.iter().map(|x| x.to_f64_lossy()).collect()).collect()
}

fn from_rows<F: Real>(rows: &Matrix, what: &str) -> Result<Array2<F>> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return Err(Error::Shape(format!("{what}: ragged rows")));
    }
    let flat: Vec<F> = rows.iter().flatten().map(|&x| F::lit(x)).collect();
    Array2::from_shape_vec((n, m), flat).map_err(|e| Error::Shape(format!("{what}: {e}")))
}

fn cast<F: Real>(x: F) -> f64 {
    x.to_f64_lossy()
}

impl Checkpoint {
    pub fn from_params<F: Real>(params: &NetworkParams<F>, seed: u64) -> Self {
        Self {
            format: CHECKPOINT_FORMAT.into(),
            version: CHECKPOINT_VERSION,
            seed,
            layers: params.layers.clone(),
            weights: params.weights.iter().map(to_rows).collect(),
            delays: params.delays.as_ref().map(to_rows),
            kernel: KernelParams {
                eps0: cast(params.kernel.eps0),
                tau_m: cast(params.kernel.tau_m),
                tau_s: cast(params.kernel.tau_s),
                theta: cast(params.kernel.theta),
                u_r: cast(params.kernel.u_r),
            },
            noise: EscapeNoise {
                rho0: cast(params.noise.rho0),
                delta_u: cast(params.noise.delta_u),
            },
            optimizer: None,
            encoder: None,
        }
    }

    pub fn with_optimizer<F: Real>(mut self, state: &GradientState<F>) -> Self {
        self.optimizer = Some(OptimizerSnapshot {
            m: state.m.iter().map(to_rows).collect(),
            hyper: state.hyper,
        });
        self
    }

    pub fn with_encoder(mut self, encoder: serde_json::Value) -> Self {
        self.encoder = Some(encoder);
        self
    }

    pub fn to_params<F: Real>(&self) -> Result<NetworkParams<F>> {
        let weights = self
            .weights
            .iter()
            .enumerate()
            .map(|(l, w)| from_rows(w, &format!("weights[{l}]")))
            .collect::<Result<Vec<_>>>()?;
        let delays = self.delays.as_ref().map(|d| from_rows(d, "delays")).transpose()?;
        let k = &self.kernel;
        let kernel = KernelParams {
            eps0: F::lit(k.eps0),
            tau_m: F::lit(k.tau_m),
            tau_s: F::lit(k.tau_s),
            theta: F::lit(k.theta),
            u_r: F::lit(k.u_r),
        };
        let noise = EscapeNoise {
            rho0: F::lit(self.noise.rho0),
            delta_u: F::lit(self.noise.delta_u),
        };
        NetworkParams::new(self.layers.clone(), weights, delays, kernel, noise)
    }

    /// Optimizer state for resuming training, with an empty batch.
    pub fn to_gradient_state<F: Real>(&self, params: &NetworkParams<F>) -> Result<Option<GradientState<F>>> {
        let Some(opt) = &self.optimizer else {
            return Ok(None);
        };
        opt.hyper.validate()?;
        let m = opt
            .m
            .iter()
            .enumerate()
            .map(|(l, m)| from_rows(m, &format!("optimizer m[{l}]")))
            .collect::<Result<Vec<Array2<F>>>>()?;
        if m.len() != params.weights.len() || m.iter().zip(&params.weights).any(|(m, w)| m.dim() != w.dim()) {
            return Err(Error::Shape("optimizer state does not match the network".into()));
        }
        Ok(Some(GradientState {
            batch: BatchAccumulator::zeros(params),
            m,
            hyper: opt.hyper,
        }))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        serde_json::to_writer(std::io::BufWriter::new(file), self)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let value: serde_json::Value = serde_json::from_str(&text)?;
        let format = value.get("format").and_then(|v| v.as_str());
        if format != Some(CHECKPOINT_FORMAT) {
            return Err(Error::Format(format!(
                "{} is not a network checkpoint (format {format:?})",
                path.display()
            )));
        }
        let version = value.get("version").and_then(|v| v.as_u64());
        if version != Some(CHECKPOINT_VERSION as u64) {
            return Err(Error::Format(format!(
                "{}: unsupported checkpoint version {version:?}",
                path.display()
            )));
        }
        let ckpt: Checkpoint = serde_json::from_value(value)?;
        ckpt.to_params::<f64>()?;
        Ok(ckpt)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{standard_topology, DelayRange, UniformRange};
    use crate::rng::stream;

    fn random_net<F: Real>(seed: u64) -> NetworkParams<F> {
        NetworkParams::init(
            standard_topology(4, &[3, 3], 2),
            &[UniformRange::new(-1.0, 1.0), UniformRange::new(-2.0, 2.0), UniformRange::new(0.0, 1e-7)],
            Some(DelayRange::default()),
            KernelParams::default(),
            EscapeNoise::default(),
            &mut stream(seed, &[]),
        )
        .unwrap()
    }

    #[test]
    fn round_trip_is_lossless() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.json");
        let params = random_net::<f64>(11);
        let mut state = GradientState::new(&params, RmsPropHyper::default()).unwrap();
        state.m[1][[0, 2]] = 0.1 + 0.2;
        state.m[2][[1, 1]] = std::f64::consts::PI * 1e-300;
        let ckpt = Checkpoint::from_params(&params, 42)
            .with_optimizer(&state)
            .with_encoder(serde_json::json!({"q": 12}));
        ckpt.save(&path).unwrap();
        let back = Checkpoint::load(&path).unwrap();
        assert_eq!(back, ckpt);
        assert_eq!(back.to_params::<f64>().unwrap(), params);
        assert_eq!(back.to_gradient_state(&params).unwrap().unwrap(), state);
        assert_eq!(back.seed, 42);
    }

    #[test]
    fn single_precision_round_trip() {
        let params = random_net::<f32>(12);
        let ckpt = Checkpoint::from_params(&params, 1);
        let text = serde_json::to_string(&ckpt).unwrap();
        let back: Checkpoint = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_params::<f32>().unwrap(), params);
        assert!(back.to_gradient_state(&params).unwrap().is_none());
    }

    #[test]
    fn foreign_and_corrupt_files_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.json");
        std::fs::write(&path, r#"{"format": "something-else", "version": 1}"#).unwrap();
        assert!(matches!(Checkpoint::load(&path), Err(Error::Format(_))));

        let mut ckpt = Checkpoint::from_params(&random_net::<f64>(3), 0);
        ckpt.weights[0][1].pop();
        ckpt.save(&path).unwrap();
        assert!(Checkpoint::load(&path).is_err());

        let mut ckpt = Checkpoint::from_params(&random_net::<f64>(3), 0);
        ckpt.version = 99;
        ckpt.save(&path).unwrap();
        assert!(matches!(Checkpoint::load(&path), Err(Error::Format(_))));
    }
}
