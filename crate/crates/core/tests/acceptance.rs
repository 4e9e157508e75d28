//! End-to-end acceptance checks. Each test prints one `PASS`/`FAIL`/`SKIP`
//! line straight to stdout (bypassing the test harness capture) and then
//! asserts the criterion.

mod common;

use std::io::Write;

use first_spike::harness::{metrics_csv, run_experiment, ExperimentConfig, Preset, Protocol, Summary};
use first_spike::objective::{output_error_signals, softmax_activation};
use first_spike::rng::stream;
use first_spike::srm::{EscapeNoise, KernelParams, NeuronState};
use rand::Rng;

fn report(name: &str, pass: bool, detail: String) {
    let line = format!("{} {name}: {detail}\n", if pass { "PASS" } else { "FAIL" });
    std::io::stdout().write_all(line.as_bytes()).unwrap();
    assert!(pass, "{name}: {detail}");
}

fn skip(name: &str, why: &str) {
    std::io::stdout()
        .write_all(format!("SKIP {name}: {why}\n").as_bytes())
        .unwrap();
}

fn preset(p: Preset, runs: usize) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::preset(p);
    cfg.data_dir = common::data_dir();
    cfg.runs = runs;
    cfg
}

fn summary(cfg: &ExperimentConfig) -> Summary {
    Summary::from_result(&run_experiment(cfg).unwrap())
}

fn have(file: &str) -> bool {
    std::path::Path::new(&common::data_dir()).join(file).is_file()
}

#[test]
fn xor_full_scale() {
    let s = summary(&preset(Preset::Xor, 20));
    let loss = s.final_train_loss.mean;
    let acc = s.report.accuracy.mean;
    report(
        "xor",
        loss <= 0.05 && acc >= 0.99,
        format!(
            "{} runs, final training loss {loss:.4} ± {:.4} (≤ 0.05), accuracy {:.2}% (≥ 99%)",
            s.networks,
            s.final_train_loss.sem,
            100.0 * acc
        ),
    );
}

#[test]
fn iris_cross_validation() {
    if !have("iris.data") {
        return skip("iris", "iris.data not found");
    }
    let s = summary(&preset(Preset::Iris, 10));
    let stop = s.stop.as_ref().map_or(f64::NAN, |p| p.epoch);
    let acc = s.report.accuracy.mean;
    report(
        "iris",
        acc >= 0.93 && (10.0..=60.0).contains(&stop),
        format!(
            "{} networks, test accuracy {:.2}% ± {:.2} (≥ 93%), early stop at epoch {stop} (10–60)",
            s.networks,
            100.0 * acc,
            100.0 * s.report.accuracy.sem
        ),
    );
}

#[test]
fn wisconsin_cross_validation() {
    if !have("breast-cancer-wisconsin.data") {
        return skip("wisconsin", "breast-cancer-wisconsin.data not found");
    }
    let s = summary(&preset(Preset::Wisconsin, 5));
    let acc = s.report.accuracy.mean;
    report(
        "wisconsin",
        acc >= 0.95,
        format!(
            "{} networks, test accuracy {:.2}% ± {:.2} (≥ 95%), early stop at epoch {}",
            s.networks,
            100.0 * acc,
            100.0 * s.report.accuracy.sem,
            s.stop.as_ref().map_or(f64::NAN, |p| p.epoch)
        ),
    );
}

#[test]
fn mnist_latency_desk() {
    if !common::mnist_available() {
        return skip("mnist-latency", "MNIST not found (scripts/fetch_data.sh)");
    }
    let cfg = preset(Preset::MnistLatency, 1).desk_scale();
    let s = summary(&cfg);
    let acc = s.report.accuracy.mean;
    report(
        "mnist-latency",
        acc >= 0.80,
        format!(
            "N2 = {}, 10k training images, test accuracy {:.2}% on 10k (≥ 80%)",
            cfg.layers[1],
            100.0 * acc
        ),
    );
}

#[test]
fn mnist_scanline_desk() {
    if !common::mnist_available() {
        return skip("mnist-scanline", "MNIST not found (scripts/fetch_data.sh)");
    }
    let delayed = preset(Preset::MnistScanline, 5).desk_scale();
    let mut delayless = delayed.clone();
    delayless.delays = None;
    let with = summary(&delayed).report.accuracy;
    let without = summary(&delayless).report.accuracy;
    report(
        "mnist-scanline",
        with.mean >= 0.70 && with.mean >= without.mean,
        format!(
            "{} seeds, delayed {:.2}% ± {:.2} (≥ 70%), delayless {:.2}% ± {:.2} (≤ delayed)",
            with.n,
            100.0 * with.mean,
            100.0 * with.sem,
            100.0 * without.mean,
            100.0 * without.sem
        ),
    );
}

#[test]
fn property_suite() {
    let mut failures = Vec::new();
    let mut check = |name: &str, ok: bool| {
        if !ok {
            failures.push(name.to_owned());
        }
    };

    // (a) softmax normalisation and shift invariance, (b) zero-sum errors
    let mut rng = stream(5, &[]);
    let (mut norm, mut shift, mut sum_delta) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..1000 {
        let n = rng.random_range(2..12);
        let tau: Vec<f64> = (0..n)
            .map(|_| if rng.random_bool(0.2) { f64::INFINITY } else { rng.random_range(0.0..40.0) })
            .collect();
        let nu = rng.random_range(0.5..5.0);
        let c = rng.random_range(-20.0..20.0);
        let a = softmax_activation(&tau, nu).unwrap();
        let moved: Vec<f64> = tau.iter().map(|t| t + c).collect();
        let b = softmax_activation(&moved, nu).unwrap();
        norm = norm.max((a.a.iter().sum::<f64>() - 1.0).abs());
        shift = shift.max(a.a.iter().zip(&b.a).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max));
        let d = output_error_signals(&a, rng.random_range(0..n));
        sum_delta = sum_delta.max(d.iter().sum::<f64>().abs());
    }
    check("a", norm < 1e-12 && shift < 1e-12);
    check("b", sum_delta < 1e-12);

    // (c) integrated gradients against grid convolutions
    let oracle = common::gradient_oracle_deviation(40);
    check("c", oracle < 1e-9);

    // (d) PSP peak by golden-section search
    let k = KernelParams::<f64>::default();
    let (mut lo, mut hi) = (0.0f64, 100.0f64);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    while hi - lo > 1e-12 {
        let (x1, x2) = (hi - g * (hi - lo), lo + g * (hi - lo));
        if k.psp(x1) < k.psp(x2) {
            lo = x1;
        } else {
            hi = x2;
        }
    }
    let s_peak = (lo + hi) / 2.0;
    let peak = k.psp(s_peak);
    let at = 10.0 * 2f64.ln();
    check("d", (peak - 1.0).abs() < 1e-6 && (k.psp(at) - 1.0).abs() < 1e-6 && (s_peak - at).abs() < 1e-4);

    // (e) neuron clamped at threshold
    let noise = EscapeNoise::<f64>::default();
    let dt = 0.1;
    let steps = 1_000_000usize;
    let mut neuron = NeuronState::new();
    let mut rng = stream(6, &[]);
    let mut count = 0usize;
    for step in 0..steps {
        neuron.trace_m = k.theta;
        neuron.trace_s = 0.0;
        neuron.reset_trace = 0.0;
        count += usize::from(neuron.step_stochastic(step as f64 * dt, dt, &k, &noise, &mut rng));
    }
    let p = noise.spike_probability(k.theta, k.theta, dt);
    let se = (p * (1.0 - p) / steps as f64).sqrt();
    let freq = count as f64 / steps as f64;
    let rate = -(1.0 - freq).ln() / dt;
    check("e", (freq - p).abs() < 3.0 * se);

    // (f) Monte-Carlo hidden gradient against the expected-loss slope
    let checks: Vec<_> = (0..2).map(|j| common::hidden_gradient_check(20_000, j, 0.5, 40 + j as u64)).collect();
    let f_ok = checks.iter().all(|c| c.deviation() < 3.0 * c.combined_se());
    check("f", f_ok);

    // (g) a full XOR run repeated under the same seed
    let mut xor = ExperimentConfig::preset(Preset::Xor);
    xor.runs = 5;
    assert!(matches!(xor.protocol, Protocol::TrainSet { epochs: 500, .. }));
    let first = run_experiment(&xor).unwrap();
    let second = run_experiment(&xor).unwrap();
    let identical = metrics_csv(&first).unwrap() == metrics_csv(&second).unwrap()
        && first.runs.iter().zip(&second.runs).all(|(a, b)| a.checkpoint == b.checkpoint);
    check("g", identical);

    report(
        "properties",
        failures.is_empty(),
        format!(
            "(a) softmax sum err {norm:.1e}, shift err {shift:.1e}; (b) |Σδ| {sum_delta:.1e}; \
             (c) oracle err {oracle:.1e}; (d) peak {peak:.9} at {s_peak:.6} ms; \
             (e) rate {rate:.5}/ms, |p̂ − p| = {:.2} SE; (f) {}; (g) XOR bit-identical: {identical}{}",
            (freq - p).abs() / se,
            checks
                .iter()
                .map(|c| format!(
                    "{:.4} vs {:.4} ({:.2} SE)",
                    c.estimate.0,
                    c.finite_difference.0,
                    c.deviation() / c.combined_se()
                ))
                .collect::<Vec<_>>()
                .join(", "),
            if failures.is_empty() { String::new() } else { format!("; failed: {}", failures.join(",")) }
        ),
    );
}
