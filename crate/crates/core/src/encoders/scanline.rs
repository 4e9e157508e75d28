//! Scanline encoding of images.
//!
//! Randomly oriented lines through points near the image centre are fixed
//! once. Each line reads the pixels it crosses, bottom of the image first,
//! as a piecewise-constant current into a fast leaky integrate-and-fire
//! encoder whose spikes form one input channel.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spikes::SpikeTrain;

/// Encoder neuron constants and scan timing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanlineParams {
    pub tau_m: f64,
    /// MΩ; a unit pixel injects 1 nA.
    pub resistance: f64,
    pub theta: f64,
    pub reset: f64,
    pub refractory: f64,
    /// Time to scan a whole line (ms).
    pub duration: f64,
    pub dt: f64,
}

impl Default for ScanlineParams {
    fn default() -> Self {
        Self {
            tau_m: 3.0,
            resistance: 10.0,
            theta: 1.0,
            reset: 0.0,
            refractory: 1.0,
            duration: 9.0,
            dt: 0.1,
        }
    }
}

impl ScanlineParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.tau_m, self.resistance, self.theta, self.duration, self.dt];
        if positive.iter().any(|&v| !(v > 0.0)) || !(self.refractory >= 0.0) || !(self.reset < self.theta) {
            return Err(Error::InvalidParameter("invalid scanline encoder parameters".into()));
        }
        Ok(())
    }
}

/// A line through `point` (pixel coordinates, y pointing down) at `angle`
/// radians from the x axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scanline {
    pub angle: f64,
    pub point: [f64; 2],
}

impl Scanline {
    /// Pixels whose interior the line passes through, ordered along the
    /// line from the bottom of the image upwards.
    pub fn pixels(&self, width: usize, height: usize) -> Vec<usize> {
        let (s, c) = self.angle.sin_cos();
        let [x0, y0] = self.point;
        let side = |x: f64, y: f64| (x - x0) * s - (y - y0) * c;
        // Upward direction along the line; horizontal lines run left to right.
        let (ux, uy) = if s > 0.0 { (-c, -s) } else { (c.abs(), 0.0) };
        let mut hits: Vec<(f64, usize)> = Vec::new();
        for row in 0..height {
            for col in 0..width {
                let (x, y) = (col as f64, row as f64);
                let corners = [side(x, y), side(x + 1.0, y), side(x, y + 1.0), side(x + 1.0, y + 1.0)];
                let above = corners.iter().any(|&v| v > 0.0);
                let below = corners.iter().any(|&v| v < 0.0);
                if above && below {
                    let along = (x + 0.5) * ux + (y + 0.5) * uy;
                    hits.push((along, row * width + col));
                }
            }
        }
        hits.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite").then(b.1.cmp(&a.1)));
        hits.into_iter().map(|(_, p)| p).collect()
    }
}

/// A fixed set of scanlines with their pixel paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanlineSet {
    pub width: usize,
    pub height: usize,
    pub lines: Vec<Scanline>,
    pub params: ScanlineParams,
    #[serde(skip)]
    paths: Vec<Vec<usize>>,
}

/// Draws `n_s` lines with angles ~ U[0, π) through points ~ N(centre, width/4).
pub fn scanline_generate<R: Rng + ?Sized>(
    n_s: usize,
    width: usize,
    height: usize,
    params: ScanlineParams,
    rng: &mut R,
) -> Result<ScanlineSet> {
    if n_s == 0 || width == 0 || height == 0 {
        return Err(Error::InvalidParameter("scanlines need n_s >= 1 and a non-empty image".into()));
    }
    let sd = width as f64 / 4.0;
    let nx = Normal::new(width as f64 / 2.0, sd).expect("positive width");
    let ny = Normal::new(height as f64 / 2.0, sd).expect("positive width");
    let lines = (0..n_s)
        .map(|_| {
            let angle = rng.random::<f64>() * std::f64::consts::PI;
            let point = [nx.sample(rng), ny.sample(rng)];
            Scanline { angle, point }
        })
        .collect();
    ScanlineSet::new(width, height, lines, params)
}

impl ScanlineSet {
    pub fn new(width: usize, height: usize, lines: Vec<Scanline>, params: ScanlineParams) -> Result<Self> {
        params.validate()?;
        if let Some(l) = lines.iter().find(|l| !(0.0..std::f64::consts::PI).contains(&l.angle)) {
            return Err(Error::InvalidParameter(format!("scanline angle {} outside [0, pi)", l.angle)));
        }
        let paths = lines.iter().map(|l| l.pixels(width, height)).collect();
        Ok(Self {
            width,
            height,
            lines,
            params,
            paths,
        })
    }

    /// Rebuilds pixel paths after deserialization.
    pub fn rebuild(self) -> Result<Self> {
        Self::new(self.width, self.height, self.lines, self.params)
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    pub fn path(&self, line: usize) -> &[usize] {
        &self.paths[line]
    }

    /// One spike train per line for an image with pixels in [0, 1], stored
    /// row-major from the top row.
    pub fn encode<F: Real>(&self, image: &[f64]) -> Result<Vec<SpikeTrain<F>>> {
        if image.len() != self.width * self.height {
            return Err(Error::Shape(format!(
                "image has {} pixels, scanlines expect {}x{}",
                image.len(),
                self.width,
                self.height
            )));
        }
        Ok(self.paths.iter().map(|path| self.encode_path(image, path)).collect())
    }

    fn encode_path<F: Real>(&self, image: &[f64], path: &[usize]) -> SpikeTrain<F> {
        let p = &self.params;
        let mut train = SpikeTrain::new();
        if path.is_empty() {
            return train;
        }
        let slice = p.duration / path.len() as f64;
        let steps = (p.duration / p.dt).round() as usize;
        let refractory_steps = (p.refractory / p.dt).round() as usize;
        let decay = (-p.dt / p.tau_m).exp();
        let mut u = p.reset;
        let mut quiet = 0;
        for k in 1..=steps {
            if quiet > 0 {
                quiet -= 1;
                u = p.reset;
                continue;
            }
            let mid = (k as f64 - 0.5) * p.dt;
            let idx = ((mid / slice) as usize).min(path.len() - 1);
            let drive = p.resistance * image[path[idx]];
            u = drive + (u - drive) * decay;
            if u >= p.theta {
                train.push(F::lit(k as f64 * p.dt));
                u = p.reset;
                quiet = refractory_steps;
            }
        }
        train
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use proptest::prelude::*;

    fn set(lines: Vec<Scanline>) -> ScanlineSet {
        ScanlineSet::new(28, 28, lines, ScanlineParams::default()).unwrap()
    }

    #[test]
    fn vertical_line_reads_bottom_up() {
        let s = set(vec![Scanline { angle: std::f64::consts::FRAC_PI_2, point: [10.5, 14.0] }]);
        let path = s.path(0);
        assert_eq!(path.len(), 28);
        assert!(path.iter().all(|p| p % 28 == 10));
        let rows: Vec<usize> = path.iter().map(|p| p / 28).collect();
        assert_eq!(rows, (0..28).rev().collect::<Vec<_>>());
    }

    #[test]
    fn diagonal_supercover_has_no_gaps() {
        let s = set(vec![Scanline { angle: 1.1, point: [13.3, 15.2] }]);
        let path = s.path(0);
        for pair in path.windows(2) {
            let (r0, c0) = ((pair[0] / 28) as i64, (pair[0] % 28) as i64);
            let (r1, c1) = ((pair[1] / 28) as i64, (pair[1] % 28) as i64);
            // consecutive pixels share an edge (4-connected)
            assert_eq!((r0 - r1).abs() + (c0 - c1).abs(), 1);
            assert!(r1 <= r0);
        }
    }

    #[test]
    fn line_missing_the_image_is_silent() {
        let s = set(vec![Scanline { angle: 0.0, point: [14.0, -5.0] }]);
        assert!(s.path(0).is_empty());
        let t = s.encode::<f64>(&vec![1.0; 784]).unwrap();
        assert!(t[0].is_empty());
    }

    #[test]
    fn bright_line_first_spike_matches_charge_up() {
        let s = set(vec![Scanline { angle: std::f64::consts::FRAC_PI_2, point: [10.5, 14.0] }]);
        let t = s.encode::<f64>(&vec![1.0; 784]).unwrap();
        let analytic = 3.0 * (10.0f64 / 9.0).ln();
        let first = t[0].first_or_inf();
        assert!((first - analytic).abs() <= 0.1 + 1e-12, "{first} vs {analytic}");
        assert!(first >= analytic);
    }

    #[test]
    fn dark_image_is_silent() {
        let mut rng = stream(4, &[]);
        let s = scanline_generate(16, 28, 28, ScanlineParams::default(), &mut rng).unwrap();
        let t = s.encode::<f64>(&vec![0.0; 784]).unwrap();
        assert!(t.iter().all(|t| t.is_empty()));
        assert!(s.encode::<f64>(&[0.0; 10]).is_err());
    }

    #[test]
    fn generation_is_reproducible() {
        let a = scanline_generate(32, 28, 28, ScanlineParams::default(), &mut stream(9, &[1])).unwrap();
        let b = scanline_generate(32, 28, 28, ScanlineParams::default(), &mut stream(9, &[1])).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 32);
        assert!(a.lines.iter().all(|l| (0.0..std::f64::consts::PI).contains(&l.angle)));
        let json = serde_json::to_string(&a).unwrap();
        let back: ScanlineSet = serde_json::from_str::<ScanlineSet>(&json).unwrap().rebuild().unwrap();
        assert_eq!(back, a);
    }

    proptest! {
        #[test]
        fn spikes_respect_window_and_refractory(
            seed in 0u64..1000,
            pixels in prop::collection::vec(0.0..=1.0f64, 784),
        ) {
            let s = scanline_generate(8, 28, 28, ScanlineParams::default(), &mut stream(seed, &[])).unwrap();
            let trains = s.encode::<f64>(&pixels).unwrap();
            for t in &trains {
                prop_assert!(t.iter().all(|&x| (0.0..=9.0 + 1e-9).contains(&x)));
                for w in t.windows(2) {
                    prop_assert!(w[1] - w[0] >= 1.0 - 1e-9);
                }
            }
            prop_assert_eq!(trains, s.encode::<f64>(&pixels).unwrap());
        }
    }
}
