//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use first_spike::network::{standard_topology, LayerSpec, NetworkParams, SimWindow, SpikeRecord};
use first_spike::rng::stream;
use first_spike::spikes::SpikeTrain;
use first_spike::srm::{EscapeNoise, KernelParams};
use ndarray::Array2;
use rand::Rng;

pub const DT: f64 = 0.1;
/// Dense grid length: covers the 40 ms window plus the largest delay.
pub const GRID: usize = 600;

/// Spike times drawn on the 0.1 ms grid, as bin indices.
fn random_bins<R: Rng>(rng: &mut R, max_spikes: usize, bins: usize) -> Vec<usize> {
    let n = rng.random_range(0..=max_spikes);
    let mut b: Vec<usize> = (0..n).map(|_| rng.random_range(1..bins)).collect();
    b.sort_unstable();
    b.dedup();
    b
}

fn train_of(bins: &[usize]) -> SpikeTrain<f64> {
    SpikeTrain::from_times(bins.iter().map(|&k| k as f64 * DT).collect())
}

/// Random weights in [−3, 3), optional integer delays in 1..=10 ms, and a
/// random spike record with at most `max_spikes` spikes per neuron.
pub fn random_case(
    seed: u64,
    sizes: &[usize],
    delayed: bool,
    max_spikes: usize,
) -> (NetworkParams<f64>, SpikeRecord<f64>, Vec<f64>) {
    let mut rng = stream(seed, &[]);
    let hidden = &sizes[1..sizes.len() - 1];
    let layers = standard_topology(sizes[0], hidden, *sizes.last().unwrap());
    let weights: Vec<Array2<f64>> = sizes
        .windows(2)
        .map(|p| Array2::from_shape_simple_fn((p[1], p[0]), || rng.random_range(-3.0..3.0)))
        .collect();
    let delays = delayed.then(|| {
        Array2::from_shape_simple_fn((sizes[1], sizes[0]), || rng.random_range(1..=10) as f64)
    });
    let params = NetworkParams::new(layers, weights, delays, KernelParams::default(), EscapeNoise::default())
        .expect("valid parameters");
    let mut trains = Vec::new();
    for (l, &n) in sizes.iter().enumerate() {
        let last = l + 1 == sizes.len();
        let layer: Vec<SpikeTrain<f64>> = (0..n)
            .map(|_| {
                let bins = random_bins(&mut rng, if last { 2 } else { max_spikes }, 400);
                train_of(&bins)
            })
            .collect();
        trains.push(layer);
    }
    let tau = trains.last().unwrap().iter().map(|t| t.first_or_inf()).collect();
    let delta = (0..*sizes.last().unwrap()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let record = SpikeRecord {
        trains,
        tau,
        horizon: 40.0,
    };
    (params, record, delta)
}

fn bin(t: f64) -> usize {
    (t / DT).round() as usize
}

/// Spike train as a dense 0/1 (or count) signal on the grid, shifted by
/// `shift` bins.
fn dense(train: &SpikeTrain<f64>, shift: usize) -> Vec<f64> {
    let mut x = vec![0.0; GRID];
    for &t in train.iter() {
        let k = bin(t) + shift;
        if k < GRID {
            x[k] += 1.0;
        }
    }
    x
}

/// Causal convolution with the PSP kernel sampled on the grid.
fn conv(kernel: &KernelParams<f64>, x: &[f64]) -> Vec<f64> {
    let eps: Vec<f64> = (0..GRID).map(|m| kernel.psp(m as f64 * DT)).collect();
    (0..GRID)
        .map(|n| (0..=n).map(|m| eps[n - m] * x[m]).sum())
        .collect()
}

fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x * y).collect()
}

fn delay_bins(params: &NetworkParams<f64>, q: usize, i: usize, j: usize) -> usize {
    match (&params.delays, q) {
        (Some(d), 0) => bin(d[[i, j]]),
        _ => 0,
    }
}

/// δ_i (ε ∗ S_j)(τ_i) for the output projection.
pub fn output_convolution(params: &NetworkParams<f64>, record: &SpikeRecord<f64>, delta: &[f64]) -> Array2<f64> {
    let q = params.weights.len() - 1;
    let k = &params.kernel;
    let (rows, cols) = params.weights[q].dim();
    Array2::from_shape_fn((rows, cols), |(i, j)| {
        let tau = record.tau[i];
        if !tau.is_finite() {
            return 0.0;
        }
        let x = conv(k, &dense(&record.trains[q][j], delay_bins(params, q, i, j)));
        delta[i] * x[bin(tau)]
    })
}

/// (1/Δu) Σ_k δ_k w_ki (ε ∗ [S_i (ε ∗ S_j)])(τ_k) for the projection onto
/// the last hidden layer.
pub fn hidden_convolution(params: &NetworkParams<f64>, record: &SpikeRecord<f64>, delta: &[f64]) -> Array2<f64> {
    let q = params.weights.len() - 2;
    let k = &params.kernel;
    let w_out = &params.weights[q + 1];
    let (rows, cols) = params.weights[q].dim();
    Array2::from_shape_fn((rows, cols), |(i, j)| {
        let pre = conv(k, &dense(&record.trains[q][j], delay_bins(params, q, i, j)));
        let y = conv(k, &mul(&dense(&record.trains[q + 1][i], 0), &pre));
        let mut g = 0.0;
        for (kk, &tau) in record.tau.iter().enumerate() {
            if tau.is_finite() {
                g += delta[kk] * w_out[[kk, i]] * y[bin(tau)];
            }
        }
        g / params.noise.delta_u
    })
}

/// (1/Δu²) Σ_i' δ_i' Σ_j' w_i'j' w_j'i (ε ∗ [S_j' (ε ∗ [S_i (ε ∗ S_j)])])(τ_i')
/// for the projection onto the second-last hidden layer.
pub fn deep_convolution(params: &NetworkParams<f64>, record: &SpikeRecord<f64>, delta: &[f64]) -> Array2<f64> {
    let q = params.weights.len() - 3;
    let k = &params.kernel;
    let w_mid = &params.weights[q + 1];
    let w_out = &params.weights[q + 2];
    let (rows, cols) = params.weights[q].dim();
    let du2 = params.noise.delta_u * params.noise.delta_u;
    Array2::from_shape_fn((rows, cols), |(i, j)| {
        let pre = conv(k, &dense(&record.trains[q][j], delay_bins(params, q, i, j)));
        let inner = conv(k, &mul(&dense(&record.trains[q + 1][i], 0), &pre));
        let mut g = 0.0;
        for jp in 0..w_mid.nrows() {
            let outer = conv(k, &mul(&dense(&record.trains[q + 2][jp], 0), &inner));
            for (ip, &tau) in record.tau.iter().enumerate() {
                if tau.is_finite() {
                    g += delta[ip] * w_out[[ip, jp]] * w_mid[[jp, i]] * outer[bin(tau)];
                }
            }
        }
        g / du2
    })
}

pub fn max_abs_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    assert_eq!(a.dim(), b.dim());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Largest deviation between the integrated gradients and the grid
/// convolution forms over `cases` random records of shallow (3×2×2, with
/// and without delays) and deep (3×2×2×2) networks.
pub fn gradient_oracle_deviation(cases: u64) -> f64 {
    use first_spike::learning::{deep_hidden_weight_gradient, hidden_weight_gradient, output_weight_gradient};
    let mut worst: f64 = 0.0;
    for c in 0..cases {
        for (sizes, delayed) in [(&[3, 2, 2][..], false), (&[3, 2, 2][..], true), (&[3, 2, 2, 2][..], false), (&[3, 2, 2, 2][..], true)] {
            let (p, r, d) = random_case(1000 + c, sizes, delayed, 5);
            worst = worst.max(max_abs_diff(&output_weight_gradient(&p, &r, &d).unwrap(), &output_convolution(&p, &r, &d)));
            worst = worst.max(max_abs_diff(&hidden_weight_gradient(&p, &r, &d).unwrap(), &hidden_convolution(&p, &r, &d)));
            if sizes.len() == 4 {
                worst = worst.max(max_abs_diff(&deep_hidden_weight_gradient(&p, &r, &d).unwrap(), &deep_convolution(&p, &r, &d)));
            }
        }
    }
    worst
}

/// Mean and standard error of a sample.
pub fn mean_se(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

/// Hidden-layer gradient check on a 2×1×2 network.
///
/// The output first-spike times and error signals are frozen, so the loss
/// seen by the hidden weights is L = Σ_k δ_k w_k1 Σ_f ε(τ_k − t_f) over the
/// stochastic hidden spikes t_f. Returns the Monte-Carlo mean and standard
/// error of the hidden gradient estimate for input weight `j`, and the same
/// for the central finite difference of L (common random numbers on both
/// sides).
pub struct HiddenCheck {
    pub estimate: (f64, f64),
    pub finite_difference: (f64, f64),
}

impl HiddenCheck {
    pub fn combined_se(&self) -> f64 {
        self.estimate.1.hypot(self.finite_difference.1)
    }

    pub fn deviation(&self) -> f64 {
        (self.estimate.0 - self.finite_difference.0).abs()
    }
}

pub fn hidden_gradient_check(trials: u64, j: usize, h: f64, seed: u64) -> HiddenCheck {
    use first_spike::learning::hidden_weight_gradient;
    let tau = [22.0, 28.0];
    let delta = [0.4, -0.4];
    let w_out = [2.0, -1.5];
    let base = [7.0, 8.0];
    let window = SimWindow { duration: 40.0, dt: DT };
    let input = vec![SpikeTrain::single(1.0), SpikeTrain::single(4.0)];
    let net = |w: [f64; 2]| {
        NetworkParams::new(
            vec![LayerSpec::input(2), LayerSpec::stochastic(1), LayerSpec::deterministic(2)],
            vec![
                Array2::from_shape_vec((1, 2), w.to_vec()).unwrap(),
                Array2::from_shape_vec((2, 1), w_out.to_vec()).unwrap(),
            ],
            None,
            KernelParams::default(),
            EscapeNoise::default(),
        )
        .unwrap()
    };
    let shifted = |s: f64| {
        let mut w = base;
        w[j] += s;
        net(w)
    };
    let (centre, up, down) = (net(base), shifted(h), shifted(-h));
    let loss = |r: &SpikeRecord<f64>| -> f64 {
        let k = KernelParams::<f64>::default();
        (0..2)
            .map(|o| delta[o] * w_out[o] * r.trains[1][0].iter().map(|&t| k.psp(tau[o] - t)).sum::<f64>())
            .sum()
    };
    let mut est = Vec::with_capacity(trials as usize);
    let mut fd = Vec::with_capacity(trials as usize);
    for n in 0..trials {
        let mut r = centre.simulate(&input, &window, &mut stream(seed, &[n])).unwrap();
        r.tau = tau.to_vec();
        est.push(hidden_weight_gradient(&centre, &r, &delta).unwrap()[[0, j]]);
        let lu = loss(&up.simulate(&input, &window, &mut stream(seed, &[n])).unwrap());
        let ld = loss(&down.simulate(&input, &window, &mut stream(seed, &[n])).unwrap());
        fd.push((lu - ld) / (2.0 * h));
    }
    HiddenCheck {
        estimate: mean_se(&est),
        finite_difference: mean_se(&fd),
    }
}

/// Dataset root: `FIRST_SPIKE_DATA_DIR` when set, else the workspace `data/`.
pub fn data_dir() -> String {
    std::env::var("FIRST_SPIKE_DATA_DIR").unwrap_or_else(|_| format!("{}/../../data", env!("CARGO_MANIFEST_DIR")))
}

pub fn mnist_available() -> bool {
    let dir = std::path::Path::new(&data_dir()).join("mnist");
    ["train-images-idx3-ubyte", "train-labels-idx1-ubyte", "t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"]
        .iter()
        .all(|f| dir.join(f).is_file())
}
