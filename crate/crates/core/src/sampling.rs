// SPDX-License-Identifier: Apache-2.0

//! Deterministic low-discrepancy sampling.
//!
//! Points come from the additive recurrence `frac(offset + n·α)` where
//! `α_k = φ_d^{-k}` and `φ_d` is the unique positive root of
//! `x^{d+1} = x + 1`. The offset is drawn from a seeded ChaCha stream, so a
//! `(seed, index)` pair always names the same point.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::point::C2Point;

fn generalized_golden_ratio(dim: usize) -> f64 {
    let mut x = 2.0_f64;
    for _ in 0..64 {
        x = (1.0 + x).powf(1.0 / (dim as f64 + 1.0));
    }
    x
}

/// A seeded `R_d` sequence in the unit cube `[0, 1)^D`.
#[derive(Clone, Debug)]
pub struct LowDiscrepancy<const D: usize> {
    alpha: [f64; D],
    offset: [f64; D],
}

impl<const D: usize> LowDiscrepancy<D> {
    pub fn new(seed: u64) -> Self {
        let phi = generalized_golden_ratio(D);
        let mut alpha = [0.0; D];
        let mut inv = 1.0;
        for a in alpha.iter_mut() {
            inv /= phi;
            *a = inv;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut offset = [0.0; D];
        for o in offset.iter_mut() {
            *o = rng.gen::<f64>();
        }
        Self { alpha, offset }
    }

    #[inline]
    pub fn point(&self, index: u64) -> [f64; D] {
        let n = (index + 1) as f64;
        let mut out = [0.0; D];
        for k in 0..D {
            let v = self.offset[k] + n * self.alpha[k];
            out[k] = v - v.floor();
        }
        out
    }
}

/// Low-discrepancy points on the unit sphere S³ ⊂ C², via Hopf coordinates:
/// `(√u₁ e^{2πi u₂}, √(1-u₁) e^{2πi u₃})` is uniform when `u` is.
#[derive(Clone, Debug)]
pub struct SphereSampler {
    cube: LowDiscrepancy<3>,
}

impl SphereSampler {
    pub fn new(seed: u64) -> Self {
        Self {
            cube: LowDiscrepancy::new(seed),
        }
    }

    /// The `index`-th point on the sphere of the given radius.
    #[inline]
    pub fn point(&self, index: u64, radius: f64) -> C2Point {
        let [u1, u2, u3] = self.cube.point(index);
        let z = Complex64::from_polar(radius * u1.sqrt(), TAU * u2);
        let w = Complex64::from_polar(radius * (1.0 - u1).sqrt(), TAU * u3);
        C2Point::from_complex(z, w)
    }
}
