//! Spike response model neurons.
//!
//! The membrane potential of a neuron is the sum of postsynaptic potential
//! (PSP) kernels evoked by its inputs plus reset kernels triggered by its own
//! spikes:
//!
//! ```text
//! u(t) = Σ_j w_j Σ_f ε(t − t_j^f) + Σ_f κ(t − t^f)
//! ε(s) = ε₀ [exp(−s/τ_m) − exp(−s/τ_s)] Θ(s)
//! κ(s) = κ₀ exp(−s/τ_m) Θ(s),   κ₀ = −(ϑ − u_r)
//! ```
//!
//! [`NeuronState`] keeps the sums as three exponential traces so that one
//! simulation step costs O(1) per neuron, independent of how many spikes
//! have been received.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spikes::SpikeTrain;

/// PSP and reset kernel constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams<F> {
    /// PSP scale ε₀ (mV).
    pub eps0: F,
    /// Membrane time constant (ms).
    pub tau_m: F,
    /// Synaptic time constant (ms).
    pub tau_s: F,
    /// Firing threshold ϑ (mV).
    pub theta: F,
    /// Reset potential (mV); also the resting potential.
    pub u_r: F,
}

impl<F: Real> Default for KernelParams<F> {
    fn default() -> Self {
        Self {
            eps0: F::lit(4.0),
            tau_m: F::lit(10.0),
            tau_s: F::lit(5.0),
            theta: F::lit(15.0),
            u_r: F::zero(),
        }
    }
}

impl<F: Real> KernelParams<F> {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau_s > F::zero() && self.tau_m > self.tau_s) {
            return Err(Error::InvalidParameter(format!(
                "kernel time constants need tau_m > tau_s > 0 (got tau_m={}, tau_s={})",
                self.tau_m, self.tau_s
            )));
        }
        if !(self.theta > self.u_r) {
            return Err(Error::InvalidParameter(format!(
                "threshold {} must exceed reset potential {}",
                self.theta, self.u_r
            )));
        }
        Ok(())
    }

    /// Reset strength κ₀ = −(ϑ − u_r).
    #[inline]
    pub fn kappa0(&self) -> F {
        self.u_r - self.theta
    }

    #[inline]
    pub fn psp(&self, s: F) -> F {
        if s < F::zero() {
            return F::zero();
        }
        self.eps0 * ((-s / self.tau_m).exp() - (-s / self.tau_s).exp())
    }

    #[inline]
    pub fn reset(&self, s: F) -> F {
        if s < F::zero() {
            return F::zero();
        }
        self.kappa0() * (-s / self.tau_m).exp()
    }

    /// Lag at which the PSP kernel peaks: τ_m τ_s / (τ_m − τ_s) · ln(τ_m / τ_s).
    pub fn psp_peak_lag(&self) -> F {
        self.tau_m * self.tau_s / (self.tau_m - self.tau_s) * (self.tau_m / self.tau_s).ln()
    }

    /// Per-step multiplicative decay of the τ_m and τ_s traces.
    #[inline]
    pub fn decay_factors(&self, dt: F) -> (F, F) {
        ((-dt / self.tau_m).exp(), (-dt / self.tau_s).exp())
    }
}

/// Exponential escape noise for stochastic neurons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EscapeNoise<F> {
    /// Instantaneous rate at threshold (spikes/ms).
    pub rho0: F,
    /// Noise scale Δu (mV).
    pub delta_u: F,
}

impl<F: Real> Default for EscapeNoise<F> {
    fn default() -> Self {
        Self {
            rho0: F::lit(0.01),
            delta_u: F::one(),
        }
    }
}

impl<F: Real> EscapeNoise<F> {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho0 > F::zero() && self.delta_u > F::zero()) {
            return Err(Error::InvalidParameter(format!(
                "escape noise needs rho0 > 0 and delta_u > 0 (got {}, {})",
                self.rho0, self.delta_u
            )));
        }
        Ok(())
    }

    /// Firing density ρ(u) = ρ₀ exp((u − ϑ)/Δu), in spikes/ms.
    #[inline]
    pub fn rate(&self, u: F, theta: F) -> F {
        self.rho0 * ((u - theta) / self.delta_u).exp()
    }

    /// Probability of at least one spike within a step of length `dt` at a
    /// constant density: 1 − exp(−ρ dt).
    #[inline]
    pub fn spike_probability(&self, u: F, theta: F, dt: F) -> F {
        -(-self.rate(u, theta) * dt).exp_m1()
    }

    /// Draws a Bernoulli spike decision for one step.
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, u: F, theta: F, dt: F, rng: &mut R) -> bool {
        let draw = F::lit(rng.random::<f64>());
        draw < self.spike_probability(u, theta, dt)
    }
}

/// Trace-form state of one SRM neuron.
///
/// `trace_m` and `trace_s` hold the τ_m and τ_s exponential components of
/// the summed input PSPs (already scaled by ε₀ and the weights), and
/// `reset_trace` the summed reset kernels. All three must be decayed to the
/// current grid time before the potential is read.
#[derive(Debug, Clone, PartialEq)]
pub struct NeuronState<F> {
    pub trace_m: F,
    pub trace_s: F,
    pub reset_trace: F,
    /// Potential after the previous step's spike decision (post-reset).
    prev_u: F,
    /// Unit-exponential hazard left before the next stochastic spike; zero
    /// means no budget has been drawn yet.
    budget: F,
    pub fired: SpikeTrain<F>,
}

impl<F: Real> Default for NeuronState<F> {
    fn default() -> Self {
        Self::new()
    }
}

impl<F: Real> NeuronState<F> {
    pub fn new() -> Self {
        Self {
            trace_m: F::zero(),
            trace_s: F::zero(),
            reset_trace: F::zero(),
            prev_u: F::neg_infinity(),
            budget: F::zero(),
            fired: SpikeTrain::new(),
        }
    }

    /// Advances the traces by one step given the precomputed decay factors.
    #[inline]
    pub fn decay(&mut self, decay_m: F, decay_s: F) {
        self.trace_m *= decay_m;
        self.trace_s *= decay_s;
        self.reset_trace *= decay_m;
    }

    /// Adds already-scaled kernel amplitudes to the input traces.
    #[inline]
    pub fn inject(&mut self, amp_m: F, amp_s: F) {
        self.trace_m += amp_m;
        self.trace_s += amp_s;
    }

    /// Adds the PSP of a presynaptic spike of weight `w` that arrived `lag`
    /// ms before the current trace time.
    pub fn receive(&mut self, kernel: &KernelParams<F>, w: F, lag: F) {
        let amp = kernel.eps0 * w;
        self.inject(
            amp * (-lag / kernel.tau_m).exp(),
            amp * (-lag / kernel.tau_s).exp(),
        );
    }

    #[inline]
    pub fn potential(&self) -> F {
        self.trace_m - self.trace_s + self.reset_trace
    }

    #[inline]
    fn fire(&mut self, t: F, kernel: &KernelParams<F>) {
        self.fired.push(t);
        self.reset_trace += kernel.kappa0();
    }

    /// Threshold-crossing rule: fires at grid time `t` iff u(t) ≥ ϑ while the
    /// previous step ended below ϑ.
    #[inline]
    pub fn step_deterministic(&mut self, t: F, kernel: &KernelParams<F>) -> bool {
        let u = self.potential();
        let fired = u >= kernel.theta && self.prev_u < kernel.theta;
        if fired {
            self.fire(t, kernel);
        }
        self.prev_u = self.potential();
        fired
    }

    /// Escape-noise rule: fires with probability 1 − exp(−ρ(u) dt).
    ///
    /// Sampled by spending an Exp(1) budget on the integrated hazard ρ dt,
    /// which is equivalent to an independent Bernoulli draw per step but
    /// needs one random number per spike instead of one per step.
    #[inline]
    pub fn step_stochastic<R: Rng + ?Sized>(
        &mut self,
        t: F,
        dt: F,
        kernel: &KernelParams<F>,
        noise: &EscapeNoise<F>,
        rng: &mut R,
    ) -> bool {
        if self.budget <= F::zero() {
            self.budget = unit_exponential(rng);
        }
        self.budget -= noise.rate(self.potential(), kernel.theta) * dt;
        let fired = self.budget <= F::zero();
        if fired {
            self.fire(t, kernel);
            self.budget = unit_exponential(rng);
        }
        self.prev_u = self.potential();
        fired
    }
}

#[inline]
fn unit_exponential<F: Real, R: Rng + ?Sized>(rng: &mut R) -> F {
    // 1 − U lies in (0, 1], so the logarithm is finite.
    F::lit(-(1.0 - rng.random::<f64>()).ln())
}

/// First response time of a leaky integrate-and-fire neuron driven by a
/// constant current from rest: τ_m ln(RI / (RI − ϑ)) when RI > ϑ, else +∞.
///
/// An infinite current responds immediately.
pub fn lif_first_spike_time<F: Real>(current: F, resistance: F, tau_m: F, theta: F) -> F {
    let drive = resistance * current;
    if drive.is_infinite() && drive > F::zero() {
        return F::zero();
    }
    if drive > theta {
        tau_m * (drive / (drive - theta)).ln()
    } else {
        F::infinity()
    }
}

/// Inverse of [`lif_first_spike_time`]: the current that produces a first
/// spike after `latency` ms (+∞ for zero latency).
pub fn lif_current_for_latency<F: Real>(latency: F, resistance: F, tau_m: F, theta: F) -> F {
    if latency <= F::zero() {
        return F::infinity();
    }
    theta / (resistance * -(-latency / tau_m).exp_m1())
}
