//! Seeded Gaussian sampling shared by instance generation and restarts.
//!
//! Streams come from ChaCha8 seeded with a `u64`; normals are produced in
//! pairs by the Box-Muller transform, so a given seed yields the same
//! numbers on every platform.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard normal sampler caching the second Box-Muller output.
#[derive(Debug, Default)]
pub struct BoxMuller {
    spare: Option<f64>,
}

impl BoxMuller {
    pub fn new() -> Self {
        BoxMuller { spare: None }
    }

    pub fn sample<R: Rng>(&mut self, rng: &mut R) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // u1 in (0, 1] keeps the logarithm finite
        let u1 = 1.0 - rng.random::<f64>();
        let u2 = rng.random::<f64>();
        let radius = (-2.0 * u1.ln()).sqrt();
        self.spare = Some(radius * (TAU * u2).sin());
        radius * (TAU * u2).cos()
    }

    /// Entries drawn in row-major order.
    pub fn matrix<R: Rng>(&mut self, rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                out[(i, j)] = self.sample(rng);
            }
        }
        out
    }
}
