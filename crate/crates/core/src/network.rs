//! Feedforward layered networks and their clock-driven simulation.
//!
//! Layer 0 receives encoded input spike trains. Hidden layers are usually
//! stochastic (escape noise) and the output layer is deterministic; the
//! first spike of each output neuron is the network's response.

use ndarray::Array2;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spikes::SpikeTrain;
use crate::srm::{EscapeNoise, KernelParams, NeuronState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LayerKind {
    Input,
    /// Escape-noise neurons.
    Stochastic,
    /// Threshold-crossing neurons.
    Deterministic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub size: usize,
    pub kind: LayerKind,
}

impl LayerSpec {
    pub fn input(size: usize) -> Self {
        Self {
            size,
            kind: LayerKind::Input,
        }
    }

    pub fn stochastic(size: usize) -> Self {
        Self {
            size,
            kind: LayerKind::Stochastic,
        }
    }

    pub fn deterministic(size: usize) -> Self {
        Self {
            size,
            kind: LayerKind::Deterministic,
        }
    }
}

/// Input, stochastic hidden layers of the given sizes, deterministic output.
pub fn standard_topology(inputs: usize, hidden: &[usize], outputs: usize) -> Vec<LayerSpec> {
    std::iter::once(LayerSpec::input(inputs))
        .chain(hidden.iter().map(|&n| LayerSpec::stochastic(n)))
        .chain(std::iter::once(LayerSpec::deterministic(outputs)))
        .collect()
}

pub fn validate_topology(layers: &[LayerSpec]) -> Result<()> {
    if layers.len() < 2 {
        return Err(Error::Shape("a network needs at least an input and an output layer".into()));
    }
    if layers[0].kind != LayerKind::Input {
        return Err(Error::Shape("first layer must be the input layer".into()));
    }
    if let Some(pos) = layers[1..].iter().position(|l| l.kind == LayerKind::Input) {
        return Err(Error::Shape(format!("layer {} is a second input layer", pos + 1)));
    }
    if layers.last().map(|l| l.kind) != Some(LayerKind::Deterministic) {
        return Err(Error::Shape("output layer must be deterministic".into()));
    }
    if let Some(pos) = layers.iter().position(|l| l.size == 0) {
        return Err(Error::Shape(format!("layer {pos} is empty")));
    }
    Ok(())
}

/// Range of a uniform initial-weight distribution, `[lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformRange {
    pub lo: f64,
    pub hi: f64,
}

impl UniformRange {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.hi == self.lo {
            self.lo
        } else {
            self.lo + (self.hi - self.lo) * rng.random::<f64>()
        }
    }
}

/// Integer conduction delays (ms) drawn uniformly from `min..=max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DelayRange {
    pub min: u32,
    pub max: u32,
}

impl Default for DelayRange {
    fn default() -> Self {
        Self { min: 1, max: 10 }
    }
}

/// Weights, delays and neuron constants of a network.
///
/// `weights[l]` projects layer `l` onto layer `l + 1` and has shape
/// `(N_{l+1}, N_l)`, indexed `[post, pre]`. `delays`, when present, has the
/// shape of `weights[0]` and holds input→first-hidden conduction delays in
/// ms.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParams<F> {
    pub layers: Vec<LayerSpec>,
    pub weights: Vec<Array2<F>>,
    pub delays: Option<Array2<F>>,
    pub kernel: KernelParams<F>,
    pub noise: EscapeNoise<F>,
}

impl<F: Real> NetworkParams<F> {
    pub fn new(
        layers: Vec<LayerSpec>,
        weights: Vec<Array2<F>>,
        delays: Option<Array2<F>>,
        kernel: KernelParams<F>,
        noise: EscapeNoise<F>,
    ) -> Result<Self> {
        let params = Self {
            layers,
            weights,
            delays,
            kernel,
            noise,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        validate_topology(&self.layers)?;
        self.kernel.validate()?;
        self.noise.validate()?;
        if self.weights.len() != self.layers.len() - 1 {
            return Err(Error::Shape(format!(
                "{} layers need {} weight matrices, got {}",
                self.layers.len(),
                self.layers.len() - 1,
                self.weights.len()
            )));
        }
        for (l, w) in self.weights.iter().enumerate() {
            let expected = (self.layers[l + 1].size, self.layers[l].size);
            if w.dim() != expected {
                return Err(Error::Shape(format!(
                    "weight matrix {l} has shape {:?}, expected {expected:?}",
                    w.dim()
                )));
            }
        }
        if let Some(d) = &self.delays {
            if d.dim() != self.weights[0].dim() {
                return Err(Error::Shape(format!(
                    "delay matrix has shape {:?}, expected {:?}",
                    d.dim(),
                    self.weights[0].dim()
                )));
            }
            if d.iter().any(|&x| !(x >= F::zero()) || !x.is_finite()) {
                return Err(Error::InvalidParameter("delays must be finite and non-negative".into()));
            }
        }
        Ok(())
    }

    /// Draws every weight of projection `l` i.i.d. from `ranges[l]`, and the
    /// input→hidden delays from `delays` when given.
    pub fn init<R: Rng + ?Sized>(
        layers: Vec<LayerSpec>,
        ranges: &[UniformRange],
        delays: Option<DelayRange>,
        kernel: KernelParams<F>,
        noise: EscapeNoise<F>,
        rng: &mut R,
    ) -> Result<Self> {
        validate_topology(&layers)?;
        if ranges.len() != layers.len() - 1 {
            return Err(Error::Shape(format!(
                "{} weight ranges given for {} projections",
                ranges.len(),
                layers.len() - 1
            )));
        }
        if let Some(r) = ranges.iter().find(|r| !(r.lo <= r.hi)) {
            return Err(Error::InvalidParameter(format!(
                "weight range [{}, {}) is empty",
                r.lo, r.hi
            )));
        }
        let weights = layers
            .windows(2)
            .zip(ranges)
            .map(|(pair, range)| {
                Array2::from_shape_simple_fn((pair[1].size, pair[0].size), || {
                    F::lit(range.sample(rng))
                })
            })
            .collect();
        let delays = match delays {
            Some(d) if d.min > d.max => {
                return Err(Error::InvalidParameter(format!(
                    "delay range {}..={} is empty",
                    d.min, d.max
                )))
            }
            Some(d) => Some(Array2::from_shape_simple_fn((layers[1].size, layers[0].size), || {
                F::lit(rng.random_range(d.min..=d.max) as f64)
            })),
            None => None,
        };
        Self::new(layers, weights, delays, kernel, noise)
    }

    pub fn output_size(&self) -> usize {
        self.layers.last().map_or(0, |l| l.size)
    }

    pub fn input_size(&self) -> usize {
        self.layers[0].size
    }

    /// Simulates one presentation of `input` (one spike train per input
    /// neuron) over `[0, window.duration)`.
    pub fn simulate<R: Rng + ?Sized>(
        &self,
        input: &[SpikeTrain<F>],
        window: &SimWindow<F>,
        rng: &mut R,
    ) -> Result<SpikeRecord<F>> {
        if input.len() != self.input_size() {
            return Err(Error::Shape(format!(
                "input has {} spike trains, network expects {}",
                input.len(),
                self.input_size()
            )));
        }
        window.validate()?;
        Ok(Simulator::new(self, input, window).run(rng))
    }
}

/// Observation window and integration step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimWindow<F> {
    /// Observation duration T (ms).
    pub duration: F,
    /// Step δt (ms).
    pub dt: F,
}

impl<F: Real> Default for SimWindow<F> {
    fn default() -> Self {
        Self {
            duration: F::lit(40.0),
            dt: F::lit(0.1),
        }
    }
}

impl<F: Real> SimWindow<F> {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > F::zero() && self.duration > F::zero()) {
            return Err(Error::InvalidParameter(format!(
                "simulation window needs positive duration and step (got {}, {})",
                self.duration, self.dt
            )));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.duration / self.dt).round().to_usize().unwrap_or(0)
    }

    #[inline]
    pub fn time(&self, step: usize) -> F {
        F::lit(step as f64) * self.dt
    }

    /// Smallest step `k` with `time(k) >= t`, for `t >= 0`.
    pub fn step_at_or_after(&self, t: F) -> usize {
        let mut k = (t / self.dt).ceil().to_usize().unwrap_or(0);
        while self.time(k) < t {
            k += 1;
        }
        while k > 0 && self.time(k - 1) >= t {
            k -= 1;
        }
        k
    }
}

/// All spikes of one presentation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpikeRecord<F> {
    /// `trains[l][i]`: spikes of neuron `i` in layer `l`; layer 0 holds the
    /// input spikes that fell inside the window.
    pub trains: Vec<Vec<SpikeTrain<F>>>,
    /// First spike time of each output neuron, +∞ if silent.
    pub tau: Vec<F>,
    pub horizon: F,
}

impl<F: Real> SpikeRecord<F> {
    pub fn outputs(&self) -> &[SpikeTrain<F>] {
        self.trains.last().map_or(&[], Vec::as_slice)
    }

    pub fn spike_count(&self, layer: usize) -> usize {
        self.trains[layer].iter().map(|t| t.count()).sum()
    }
}

/// First spike time of every output train, +∞ for silent neurons.
pub fn first_spike_times<F: Real>(outputs: &[SpikeTrain<F>]) -> Vec<F> {
    outputs.iter().map(SpikeTrain::first_or_inf).collect()
}

struct Arrival<F> {
    time: F,
    /// First grid step whose time is not earlier than `time`.
    step: usize,
    pre: usize,
    /// Single target neuron for delayed projections; all targets otherwise.
    post: Option<usize>,
}

struct Simulator<'a, F> {
    params: &'a NetworkParams<F>,
    window: &'a SimWindow<F>,
    inputs: Vec<SpikeTrain<F>>,
    /// Arrivals grouped by step; `starts[k]..starts[k + 1]` belong to step k.
    arrivals: Vec<Arrival<F>>,
    starts: Vec<usize>,
}

impl<'a, F: Real> Simulator<'a, F> {
    fn new(params: &'a NetworkParams<F>, input: &[SpikeTrain<F>], window: &'a SimWindow<F>) -> Self {
        let horizon = window.duration;
        let inputs: Vec<SpikeTrain<F>> = input
            .iter()
            .map(|train| {
                train
                    .iter()
                    .copied()
                    .filter(|&t| t >= F::zero() && t < horizon)
                    .collect()
            })
            .collect();
        let mut arrivals = Vec::new();
        for (pre, train) in inputs.iter().enumerate() {
            for &t in train.iter() {
                match &params.delays {
                    None => arrivals.push(Arrival {
                        time: t,
                        step: 0,
                        pre,
                        post: None,
                    }),
                    Some(d) => arrivals.extend((0..params.layers[1].size).map(|post| Arrival {
                        time: t + d[[post, pre]],
                        step: 0,
                        pre,
                        post: Some(post),
                    })),
                }
            }
        }
        arrivals.retain(|a| a.time < horizon);
        let steps = window.steps();
        let mut starts = vec![0usize; steps + 2];
        for a in arrivals.iter_mut() {
            a.step = window.step_at_or_after(a.time);
            starts[a.step.min(steps) + 1] += 1;
        }
        for k in 1..starts.len() {
            starts[k] += starts[k - 1];
        }
        let mut fill = starts.clone();
        let mut ordered: Vec<Option<Arrival<F>>> = (0..arrivals.len()).map(|_| None).collect();
        for a in arrivals {
            let k = a.step.min(steps);
            ordered[fill[k]] = Some(a);
            fill[k] += 1;
        }
        Self {
            params,
            window,
            inputs,
            arrivals: ordered.into_iter().map(|a| a.expect("every slot filled")).collect(),
            starts,
        }
    }

    fn run<R: Rng + ?Sized>(self, rng: &mut R) -> SpikeRecord<F> {
        let p = self.params;
        let kernel = &p.kernel;
        let dt = self.window.dt;
        let (decay_m, decay_s) = kernel.decay_factors(dt);
        let mut states: Vec<Vec<NeuronState<F>>> = p.layers[1..]
            .iter()
            .map(|l| vec![NeuronState::new(); l.size])
            .collect();
        let mut fired_now: Vec<Vec<usize>> = vec![Vec::new(); states.len()];

        for step in 0..self.window.steps() {
            let t = self.window.time(step);
            for layer in states.iter_mut() {
                for s in layer.iter_mut() {
                    s.decay(decay_m, decay_s);
                }
            }

            // Input arrivals in (t - dt, t], injected with their partial decay.
            for a in &self.arrivals[self.starts[step]..self.starts[step + 1]] {
                let lag = t - a.time;
                let (fm, fs) = if lag == F::zero() {
                    (kernel.eps0, kernel.eps0)
                } else {
                    (
                        kernel.eps0 * (-lag / kernel.tau_m).exp(),
                        kernel.eps0 * (-lag / kernel.tau_s).exp(),
                    )
                };
                let w = &p.weights[0];
                match a.post {
                    Some(post) => {
                        let wij = w[[post, a.pre]];
                        states[0][post].inject(wij * fm, wij * fs);
                    }
                    None => {
                        for (post, s) in states[0].iter_mut().enumerate() {
                            let wij = w[[post, a.pre]];
                            if wij != F::zero() {
                                s.inject(wij * fm, wij * fs);
                            }
                        }
                    }
                }
            }

            for l in 0..states.len() {
                if l > 0 {
                    // Spikes emitted at t by the layer below; ε(0) = 0, so
                    // they only start to matter from the next step on.
                    let (below, above) = fired_now.split_at(l);
                    let w = &p.weights[l];
                    for &pre in &below[l - 1] {
                        for (post, s) in states[l].iter_mut().enumerate() {
                            let amp = kernel.eps0 * w[[post, pre]];
                            s.inject(amp, amp);
                        }
                    }
                    let _ = above;
                }
                let fired = &mut fired_now[l];
                fired.clear();
                let kind = p.layers[l + 1].kind;
                for (i, s) in states[l].iter_mut().enumerate() {
                    let spiked = match kind {
                        LayerKind::Stochastic => s.step_stochastic(t, dt, kernel, &p.noise, rng),
                        _ => s.step_deterministic(t, kernel),
                    };
                    if spiked {
                        fired.push(i);
                    }
                }
            }
        }

        let mut trains = Vec::with_capacity(p.layers.len());
        trains.push(self.inputs);
        trains.extend(
            states
                .into_iter()
                .map(|layer| layer.into_iter().map(|s| s.fired).collect::<Vec<_>>()),
        );
        let tau = first_spike_times(trains.last().expect("output layer"));
        SpikeRecord {
            trains,
            tau,
            horizon: self.window.duration,
        }
    }
}
