//! The two-dimensional benchmark family
//! `f(x, y) = a sin(x / w) + b (x - 0.5)^3 + c exp(y) + y^2` on `[0, 1]^2`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::dataset::{Dataset, Normalization, Task};
use crate::model::MonotoneSpec;
use crate::Result;

/// The default `w = 25 pi`.
pub const DEFAULT_FREQUENCY: f64 = 25.0 * PI;

/// Coefficient grid of the family.
pub const GRID: [f64; 3] = [0.3, 0.6, 1.0];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Synth2d {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Divisor `w` inside the sine.
    pub frequency: f64,
}

impl Synth2d {
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        if ![a, b, c].iter().all(|v| GRID.contains(v)) {
            log::warn!("coefficients ({a}, {b}, {c}) are outside the benchmark grid");
        }
        Self {
            a,
            b,
            c,
            frequency: DEFAULT_FREQUENCY,
        }
    }

    pub fn value(&self, x: f64, y: f64) -> f64 {
        self.a * (x / self.frequency).sin() + self.b * (x - 0.5).powi(3) + self.c * y.exp() + y * y
    }

    pub fn dx(&self, x: f64) -> f64 {
        self.a * (x / self.frequency).cos() / self.frequency + 3.0 * self.b * (x - 0.5).powi(2)
    }

    pub fn dy(&self, y: f64) -> f64 {
        self.c * y.exp() + 2.0 * y
    }

    /// Whether `df/dx >= 0` on a 10,001-point grid of `[0, 1]`.
    pub fn monotone_in_x(&self) -> bool {
        (0..=10_000).all(|k| self.dx(k as f64 / 10_000.0) >= 0.0)
    }

    /// Monotone coordinates: `y` always, `x` when the grid check passes.
    pub fn monotone_spec(&self) -> MonotoneSpec {
        let mut idx = vec![1];
        if self.monotone_in_x() {
            idx.insert(0, 0);
        }
        MonotoneSpec::increasing(idx).expect("valid indices")
    }

    /// `n` uniform points with exact targets. Features already lie in the
    /// unit square, so the normalization is the identity.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Dataset> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut features = Vec::with_capacity(n);
        let mut targets = Vec::with_capacity(n);
        for _ in 0..n {
            let (x, y) = (rng.random::<f64>(), rng.random::<f64>());
            features.push(vec![x, y]);
            targets.push(self.value(x, y));
        }
        let mut data = Dataset::new(
            vec!["x".into(), "y".into()],
            features,
            targets,
            Task::Regression,
            self.monotone_spec(),
        )?;
        data.normalization = Some(Normalization {
            min: vec![0.0; 2],
            max: vec![1.0; 2],
            negated: vec![false; 2],
        });
        Ok(data)
    }
}

pub fn synth_2d(a: f64, b: f64, c: f64, n_samples: usize, seed: u64) -> Result<Dataset> {
    Synth2d::new(a, b, c).sample(n_samples, seed)
}
