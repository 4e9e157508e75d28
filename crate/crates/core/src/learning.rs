//! Weight gradients, activity regularization, synaptic scaling and RMSProp.
//!
//! Gradients of the loss with respect to every projection are obtained by a
//! backward credit recursion over recorded spikes. Each spike `t_j^f` of a
//! neuron in layer `l` carries a credit
//!
//! ```text
//! output layer    c_i   = δ_i                       (at τ_i only)
//! last hidden     c_j^f = Σ_i δ_i w_ij ε(τ_i − t_j^f)
//! deeper          c_j^g = (1/Δu) Σ_i w_ij Σ_f c_i^f ε(t_i^f − t_j^g)
//! ```
//!
//! and the gradient of a projection is the credit-weighted PSP trace of its
//! presynaptic layer, `G_ij = k Σ_f c_i^f Σ_g ε(t_i^f − t_j^g − d_ij)`, with
//! `k = 1` for the output projection and `k = 1/Δu` for hidden ones. For one
//! and two hidden layers this is exactly the integrated output, second-last
//! and third-last layer rules.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{NetworkParams, SpikeRecord};
use crate::scalar::Real;
use crate::spikes::SpikeTrain;

/// Optimizer and penalty coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RmsPropHyper {
    pub eta0: f64,
    pub beta: f64,
    pub epsilon: f64,
    pub lambda0: f64,
    pub gamma0: f64,
    pub w_min: f64,
    pub w_max: f64,
}

impl Default for RmsPropHyper {
    fn default() -> Self {
        Self {
            eta0: 0.1,
            beta: 0.9,
            epsilon: 1e-8,
            lambda0: 0.0,
            gamma0: 0.1,
            w_min: -15.0,
            w_max: 15.0,
        }
    }
}

impl RmsPropHyper {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta0 > 0.0) {
            return Err(Error::InvalidParameter(format!("eta0 must be positive, got {}", self.eta0)));
        }
        if !(0.0..1.0).contains(&self.beta) {
            return Err(Error::InvalidParameter(format!("beta must lie in [0, 1), got {}", self.beta)));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidParameter("epsilon must be positive".into()));
        }
        if !(self.lambda0 >= 0.0 && self.gamma0 >= 0.0) {
            return Err(Error::InvalidParameter("lambda0 and gamma0 must be non-negative".into()));
        }
        if !(self.w_min <= self.w_max) {
            return Err(Error::InvalidParameter(format!(
                "weight limits [{}, {}] are empty",
                self.w_min, self.w_max
            )));
        }
        Ok(())
    }
}

/// Activity penalty λ₀ w n², with n the postsynaptic spike count.
pub fn regularization_term<F: Real>(w: F, post: &SpikeTrain<F>, lambda0: F) -> F {
    let n = F::lit(post.count() as f64);
    lambda0 * w * n * n
}

/// Homeostatic term γ₀|w| for a silent postsynaptic neuron, else zero.
pub fn synaptic_scaling_term<F: Real>(w: F, post: &SpikeTrain<F>, gamma0: F) -> F {
    if post.count() == 0 {
        gamma0 * w.abs()
    } else {
        F::zero()
    }
}

/// Per-network constants reused by every sample of a mini-batch.
#[derive(Debug, Clone)]
pub struct GradientContext<'a, F> {
    params: &'a NetworkParams<F>,
    /// exp(d_ij/τ_m), exp(d_ij/τ_s) for the delayed first projection.
    delay_factors: Option<(Array2<F>, Array2<F>)>,
}

/// exp(t/τ_m), exp(t/τ_s) of every spike of one layer.
struct LayerFactors<F> {
    m: Vec<Vec<F>>,
    s: Vec<Vec<F>>,
    active: Vec<usize>,
}

impl<F: Real> LayerFactors<F> {
    fn new(trains: &[SpikeTrain<F>], tau_m: F, tau_s: F) -> Self {
        let m = trains.iter().map(|t| t.iter().map(|&x| (x / tau_m).exp()).collect()).collect();
        let s = trains.iter().map(|t| t.iter().map(|&x| (x / tau_s).exp()).collect()).collect();
        let active = trains
            .iter()
            .enumerate()
            .filter(|(_, t)| !t.is_empty())
            .map(|(j, _)| j)
            .collect();
        Self { m, s, active }
    }
}

impl<'a, F: Real> GradientContext<'a, F> {
    pub fn new(params: &'a NetworkParams<F>) -> Self {
        let k = &params.kernel;
        let delay_factors = params
            .delays
            .as_ref()
            .map(|d| (d.mapv(|x| (x / k.tau_m).exp()), d.mapv(|x| (x / k.tau_s).exp())));
        Self { params, delay_factors }
    }

    pub fn params(&self) -> &NetworkParams<F> {
        self.params
    }

    /// Adds `scale · ∂C/∂w` for every projection into `out`.
    pub fn accumulate_cost(&self, record: &SpikeRecord<F>, delta: &[F], scale: F, out: &mut [Array2<F>]) -> Result<()> {
        self.check(record, delta)?;
        if out.len() != self.params.weights.len() {
            return Err(Error::Shape("gradient buffer does not match the network depth".into()));
        }
        self.backward(record, delta, scale, out, 0);
        Ok(())
    }

    fn check(&self, record: &SpikeRecord<F>, delta: &[F]) -> Result<()> {
        let p = self.params;
        if record.trains.len() != p.layers.len()
            || record.trains.iter().zip(&p.layers).any(|(t, l)| t.len() != l.size)
        {
            return Err(Error::Shape("spike record does not match the network layout".into()));
        }
        if delta.len() != p.output_size() {
            return Err(Error::Shape(format!(
                "{} error signals for {} output neurons",
                delta.len(),
                p.output_size()
            )));
        }
        Ok(())
    }

    /// Runs the credit recursion down to projection `lowest`, adding into
    /// `out[q]` for every `q ≥ lowest`.
    fn backward(&self, record: &SpikeRecord<F>, delta: &[F], scale: F, out: &mut [Array2<F>], lowest: usize) {
        let p = self.params;
        let k = &p.kernel;
        let projections = p.weights.len();
        let inv_du = F::one() / p.noise.delta_u;

        // Output layer: one "spike" per neuron at τ_i, credit δ_i.
        let mut post_times: Vec<Vec<F>> = record
            .tau
            .iter()
            .map(|&t| if t.is_finite() { vec![t] } else { Vec::new() })
            .collect();
        let mut credit: Vec<Vec<F>> = delta.iter().zip(&post_times).map(|(&d, t)| vec![d; t.len()]).collect();
        let mut gain = F::one();

        for q in (lowest..projections).rev() {
            let pre_trains = &record.trains[q];
            let pre = LayerFactors::new(pre_trains, k.tau_m, k.tau_s);
            let need_credit = q > lowest;
            let mut next: Vec<Vec<F>> = if need_credit {
                pre_trains.iter().map(|t| vec![F::zero(); t.len()]).collect()
            } else {
                Vec::new()
            };
            let w = &p.weights[q];
            let delays = if q == 0 {
                p.delays.as_ref().zip(self.delay_factors.as_ref())
            } else {
                None
            };
            let g = &mut out[q];

            for (i, times) in post_times.iter().enumerate() {
                for (f, &t) in times.iter().enumerate() {
                    let c = credit[i][f];
                    if c == F::zero() {
                        continue;
                    }
                    let qm = (-t / k.tau_m).exp();
                    let qs = (-t / k.tau_s).exp();
                    let cg = c * gain * k.eps0;
                    for &j in &pre.active {
                        let (shift, fm, fs) = match delays {
                            Some((d, (dm, ds))) => (d[[i, j]], qm * dm[[i, j]], qs * ds[[i, j]]),
                            None => (F::zero(), qm, qs),
                        };
                        let mut trace = F::zero();
                        for (gi, &tj) in pre_trains[j].iter().enumerate() {
                            if tj + shift >= t {
                                break;
                            }
                            let e = fm * pre.m[j][gi] - fs * pre.s[j][gi];
                            trace += e;
                            if need_credit {
                                next[j][gi] += w[[i, j]] * cg * e;
                            }
                        }
                        g[[i, j]] += scale * cg * trace;
                    }
                }
            }

            if need_credit {
                post_times = pre_trains.iter().map(|t| t.to_vec()).collect();
                credit = next;
                gain = inv_du;
            }
        }
    }
}

/// ∂C/∂w for every projection of the network, ordered like `weights`.
pub fn cost_gradients<F: Real>(params: &NetworkParams<F>, record: &SpikeRecord<F>, delta: &[F]) -> Result<Vec<Array2<F>>> {
    let mut out: Vec<Array2<F>> = params.weights.iter().map(|w| Array2::zeros(w.dim())).collect();
    GradientContext::new(params).accumulate_cost(record, delta, F::one(), &mut out)?;
    Ok(out)
}

fn single_projection<F: Real>(
    params: &NetworkParams<F>,
    record: &SpikeRecord<F>,
    delta: &[F],
    from_output: usize,
) -> Result<Array2<F>> {
    let projections = params.weights.len();
    if from_output >= projections {
        return Err(Error::Shape(format!(
            "network with {projections} projections has no layer {from_output} steps below the output"
        )));
    }
    let ctx = GradientContext::new(params);
    ctx.check(record, delta)?;
    let q = projections - 1 - from_output;
    let mut out: Vec<Array2<F>> = params.weights.iter().map(|w| Array2::zeros(w.dim())).collect();
    ctx.backward(record, delta, F::one(), &mut out, q);
    Ok(out.swap_remove(q))
}

/// ∂C/∂w of the output projection: δ_i Σ_f ε(τ_i − t_j^f).
pub fn output_weight_gradient<F: Real>(params: &NetworkParams<F>, record: &SpikeRecord<F>, delta: &[F]) -> Result<Array2<F>> {
    single_projection(params, record, delta, 0)
}

/// ∂C/∂w of the projection onto the last hidden layer.
pub fn hidden_weight_gradient<F: Real>(params: &NetworkParams<F>, record: &SpikeRecord<F>, delta: &[F]) -> Result<Array2<F>> {
    single_projection(params, record, delta, 1)
}

/// ∂C/∂w of the projection onto the second-last hidden layer.
pub fn deep_hidden_weight_gradient<F: Real>(
    params: &NetworkParams<F>,
    record: &SpikeRecord<F>,
    delta: &[F],
) -> Result<Array2<F>> {
    single_projection(params, record, delta, 2)
}

/// Mini-batch sums of everything the weight update needs.
///
/// The penalty terms are stored as per-neuron activity statistics and
/// combined with the weights when the update is formed; weights do not
/// change within a batch, so this equals summing the per-sample terms.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchAccumulator<F> {
    /// Σ ∂C/∂w per projection.
    pub cost: Vec<Array2<F>>,
    /// Σ n² of each postsynaptic neuron, per projection.
    pub spike_sq: Vec<Vec<F>>,
    /// Number of presentations in which each postsynaptic neuron was silent.
    pub silent: Vec<Vec<F>>,
    pub samples: usize,
}

impl<F: Real> BatchAccumulator<F> {
    pub fn zeros(params: &NetworkParams<F>) -> Self {
        Self {
            cost: params.weights.iter().map(|w| Array2::zeros(w.dim())).collect(),
            spike_sq: params.layers[1..].iter().map(|l| vec![F::zero(); l.size]).collect(),
            silent: params.layers[1..].iter().map(|l| vec![F::zero(); l.size]).collect(),
            samples: 0,
        }
    }

    pub fn add_sample(&mut self, ctx: &GradientContext<'_, F>, record: &SpikeRecord<F>, delta: &[F]) -> Result<()> {
        ctx.accumulate_cost(record, delta, F::one(), &mut self.cost)?;
        for (q, (sq, silent)) in self.spike_sq.iter_mut().zip(&mut self.silent).enumerate() {
            for (i, train) in record.trains[q + 1].iter().enumerate() {
                let n = F::lit(train.count() as f64);
                sq[i] += n * n;
                if train.is_empty() {
                    silent[i] += F::one();
                }
            }
        }
        self.samples += 1;
        Ok(())
    }

    /// Adds another accumulator of the same shape; call in a fixed order for
    /// reproducible sums.
    pub fn merge(&mut self, other: &BatchAccumulator<F>) {
        for (a, b) in self.cost.iter_mut().zip(&other.cost) {
            *a += b;
        }
        for (a, b) in self.spike_sq.iter_mut().zip(&other.spike_sq) {
            a.iter_mut().zip(b).for_each(|(x, &y)| *x += y);
        }
        for (a, b) in self.silent.iter_mut().zip(&other.silent) {
            a.iter_mut().zip(b).for_each(|(x, &y)| *x += y);
        }
        self.samples += other.samples;
    }

    pub fn clear(&mut self) {
        self.cost.iter_mut().for_each(|g| g.fill(F::zero()));
        self.spike_sq.iter_mut().for_each(|v| v.fill(F::zero()));
        self.silent.iter_mut().for_each(|v| v.fill(F::zero()));
        self.samples = 0;
    }

    /// Δw = −(∂C/∂w + λ₀ w Σn² − γ₀|w| · #silent), summed over the batch.
    pub fn descent_direction(&self, weights: &[Array2<F>], lambda0: F, gamma0: F) -> Vec<Array2<F>> {
        weights
            .iter()
            .enumerate()
            .map(|(q, w)| {
                let mut dw = Array2::zeros(w.dim());
                for ((i, j), d) in dw.indexed_iter_mut() {
                    let wij = w[[i, j]];
                    let reg = lambda0 * wij * self.spike_sq[q][i];
                    let scaling = gamma0 * wij.abs() * self.silent[q][i];
                    *d = -(self.cost[q][[i, j]] + reg - scaling);
                }
                dw
            })
            .collect()
    }
}

/// Accumulated batch gradients plus RMSProp state.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientState<F> {
    pub batch: BatchAccumulator<F>,
    /// Running mean of squared updates, one per synapse.
    pub m: Vec<Array2<F>>,
    pub hyper: RmsPropHyper,
}

impl<F: Real> GradientState<F> {
    pub fn new(params: &NetworkParams<F>, hyper: RmsPropHyper) -> Result<Self> {
        hyper.validate()?;
        Ok(Self {
            batch: BatchAccumulator::zeros(params),
            m: params.weights.iter().map(|w| Array2::zeros(w.dim())).collect(),
            hyper,
        })
    }

    /// Adds one presentation's contribution to the batch.
    pub fn accumulate_sample(&mut self, params: &NetworkParams<F>, record: &SpikeRecord<F>, delta: &[F]) -> Result<()> {
        self.batch.add_sample(&GradientContext::new(params), record, delta)
    }

    pub fn descent_direction(&self, params: &NetworkParams<F>) -> Vec<Array2<F>> {
        self.batch
            .descent_direction(&params.weights, F::lit(self.hyper.lambda0), F::lit(self.hyper.gamma0))
    }

    /// Applies the accumulated batch with RMSProp, clips the weights and
    /// clears the batch.
    ///
    /// The running average is refreshed with the current update before it
    /// scales the step.
    pub fn rmsprop_apply(&mut self, params: &mut NetworkParams<F>) -> Result<()> {
        if self.m.len() != params.weights.len()
            || self.m.iter().zip(&params.weights).any(|(m, w)| m.dim() != w.dim())
        {
            return Err(Error::Shape("optimizer state does not match the network".into()));
        }
        let h = &self.hyper;
        let (eta0, beta, eps) = (F::lit(h.eta0), F::lit(h.beta), F::lit(h.epsilon));
        let (w_min, w_max) = (F::lit(h.w_min), F::lit(h.w_max));
        let dws = self.descent_direction(params);
        for ((w, m), dw) in params.weights.iter_mut().zip(&mut self.m).zip(&dws) {
            ndarray::Zip::from(w).and(m).and(dw).for_each(|w, m, &d| {
                *m = beta * *m + (F::one() - beta) * d * d;
                if d != F::zero() {
                    *w += eta0 / (*m + eps).sqrt() * d;
                }
                *w = w.max(w_min).min(w_max);
            });
        }
        self.batch.clear();
        Ok(())
    }
}
