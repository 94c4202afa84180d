// SPDX-License-Identifier: Apache-2.0

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// A point `(z, w)` of C², stored as four real coordinates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct C2Point {
    pub re1: f64,
    pub im1: f64,
    pub re2: f64,
    pub im2: f64,
}

impl C2Point {
    pub const ORIGIN: C2Point = C2Point {
        re1: 0.0,
        im1: 0.0,
        re2: 0.0,
        im2: 0.0,
    };

    pub const fn new(re1: f64, im1: f64, re2: f64, im2: f64) -> Self {
        Self { re1, im1, re2, im2 }
    }

    /// The point `(x, y)` of the real plane R² ⊂ C².
    pub const fn real(x: f64, y: f64) -> Self {
        Self {
            re1: x,
            im1: 0.0,
            re2: y,
            im2: 0.0,
        }
    }

    #[inline]
    pub fn from_complex(z: Complex64, w: Complex64) -> Self {
        Self {
            re1: z.re,
            im1: z.im,
            re2: w.re,
            im2: w.im,
        }
    }

    #[inline]
    pub fn z(&self) -> Complex64 {
        Complex64::new(self.re1, self.im1)
    }

    #[inline]
    pub fn w(&self) -> Complex64 {
        Complex64::new(self.re2, self.im2)
    }

    #[inline]
    pub fn is_finite(&self) -> bool {
        self.re1.is_finite() && self.im1.is_finite() && self.re2.is_finite() && self.im2.is_finite()
    }

    #[inline]
    pub fn norm_sqr(&self) -> f64 {
        self.re1 * self.re1 + self.im1 * self.im1 + self.re2 * self.re2 + self.im2 * self.im2
    }

    /// Euclidean norm.
    #[inline]
    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Sum of the absolute real coordinates; equals `x + y` on the closed
    /// first quadrant of R².
    #[inline]
    pub fn norm_l1(&self) -> f64 {
        self.re1.abs() + self.im1.abs() + self.re2.abs() + self.im2.abs()
    }

    #[inline]
    pub fn dist(&self, other: &C2Point) -> f64 {
        (*self - *other).norm()
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.re1, self.im1, self.re2, self.im2]
    }

    /// Multiplies both coordinates by the complex scalar `s`.
    #[inline]
    pub fn scale_complex(&self, s: Complex64) -> Self {
        Self::from_complex(self.z() * s, self.w() * s)
    }
}

impl Add for C2Point {
    type Output = C2Point;
    #[inline]
    fn add(self, o: C2Point) -> C2Point {
        C2Point::new(
            self.re1 + o.re1,
            self.im1 + o.im1,
            self.re2 + o.re2,
            self.im2 + o.im2,
        )
    }
}

impl Sub for C2Point {
    type Output = C2Point;
    #[inline]
    fn sub(self, o: C2Point) -> C2Point {
        C2Point::new(
            self.re1 - o.re1,
            self.im1 - o.im1,
            self.re2 - o.re2,
            self.im2 - o.im2,
        )
    }
}

impl Mul<f64> for C2Point {
    type Output = C2Point;
    #[inline]
    fn mul(self, s: f64) -> C2Point {
        C2Point::new(self.re1 * s, self.im1 * s, self.re2 * s, self.im2 * s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norms() {
        let p = C2Point::new(3.0, 0.0, 0.0, 4.0);
        assert_eq!(p.norm(), 5.0);
        assert_eq!(p.norm_l1(), 7.0);
        assert_eq!(C2Point::real(0.25, 0.5).norm_l1(), 0.75);
    }

    #[test]
    fn complex_round_trip() {
        let z = Complex64::new(1.0, -2.0);
        let w = Complex64::new(0.5, 3.0);
        let p = C2Point::from_complex(z, w);
        assert_eq!(p.z(), z);
        assert_eq!(p.w(), w);
        assert_eq!(p.scale_complex(Complex64::i()).z(), z * Complex64::i());
    }

    #[test]
    fn finiteness() {
        assert!(C2Point::ORIGIN.is_finite());
        assert!(!C2Point::new(f64::NAN, 0.0, 0.0, 0.0).is_finite());
        assert!(!C2Point::new(0.0, 0.0, f64::INFINITY, 0.0).is_finite());
    }
}
