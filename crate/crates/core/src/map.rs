// SPDX-License-Identifier: Apache-2.0

//! Polynomial automorphisms of C²: the conjugated Hénon family
//! `(z² + c + a·w, a·z)`, general Hénon maps `(a·w + P(z), z)`, and
//! invertible linear maps. Every map may carry a translation conjugacy
//! `p ↦ F(p + s) - s`, which is how attracting fixed points are moved to
//! the origin.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::DynamicsError;
use crate::point::C2Point;

/// 2×2 complex matrix acting on column vectors `(z, w)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2(pub [[Complex64; 2]; 2]);

impl Mat2 {
    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Mat2([[one, zero], [zero, one]])
    }

    pub fn diagonal(d1: Complex64, d2: Complex64) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        Mat2([[d1, zero], [zero, d2]])
    }

    #[inline]
    pub fn det(&self) -> Complex64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn inverse(&self) -> Option<Mat2> {
        let d = self.det();
        if d.norm() == 0.0 {
            return None;
        }
        let m = &self.0;
        let inv = Mat2([[m[1][1] / d, -m[0][1] / d], [-m[1][0] / d, m[0][0] / d]]);
        inv.0.iter().flatten().all(|c| c.is_finite()).then_some(inv)
    }

    #[inline]
    pub fn apply(&self, p: &C2Point) -> C2Point {
        let (z, w) = (p.z(), p.w());
        let m = &self.0;
        C2Point::from_complex(m[0][0] * z + m[0][1] * w, m[1][0] * z + m[1][1] * w)
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        let (a, b) = (&self.0, &o.0);
        let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Mat2(out)
    }

    pub fn sub(&self, o: &Mat2) -> Mat2 {
        let mut out = self.0;
        for (row, orow) in out.iter_mut().zip(o.0.iter()) {
            for (cell, ocell) in row.iter_mut().zip(orow.iter()) {
                *cell -= ocell;
            }
        }
        Mat2(out)
    }

    /// Largest eigenvalue modulus.
    pub fn spectral_radius(&self) -> f64 {
        let m = &self.0;
        let tr = m[0][0] + m[1][1];
        let disc = (tr * tr - 4.0 * self.det()).sqrt();
        let l1 = (tr + disc) * 0.5;
        let l2 = (tr - disc) * 0.5;
        l1.norm().max(l2.norm())
    }

    /// Largest entrywise modulus difference.
    pub fn max_abs_diff(&self, o: &Mat2) -> f64 {
        self.sub(o)
            .0
            .iter()
            .flatten()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum MapFamily {
    /// `(z² + c + a·w, a·z)`
    ConjugatedHenon {
        a: Complex64,
        c: Complex64,
    },
    /// `(a·w + P(z), z)` with `P(z) = Σ coeffs[k]·z^k`
    GeneralHenon {
        a: Complex64,
        coeffs: Vec<Complex64>,
    },
    Linear {
        matrix: Mat2,
    },
}

/// One polynomial automorphism of C².
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MapSpec", into = "MapSpec")]
pub struct AutoMap {
    family: MapFamily,
    shift: C2Point,
}

const SINGULAR_THRESHOLD: f64 = 1e-300;

impl AutoMap {
    pub fn conjugated_henon(a: Complex64, c: Complex64) -> Result<Self, DynamicsError> {
        if !(a.is_finite() && c.is_finite()) {
            return Err(DynamicsError::InvalidMap("non-finite parameter".into()));
        }
        if a.norm() == 0.0 {
            return Err(DynamicsError::InvalidMap("a must be nonzero".into()));
        }
        Ok(Self {
            family: MapFamily::ConjugatedHenon { a, c },
            shift: C2Point::ORIGIN,
        })
    }

    /// Real-parameter shorthand for [`AutoMap::conjugated_henon`].
    pub fn henon(a: f64, c: f64) -> Result<Self, DynamicsError> {
        Self::conjugated_henon(Complex64::new(a, 0.0), Complex64::new(c, 0.0))
    }

    pub fn general_henon(a: Complex64, coeffs: Vec<Complex64>) -> Result<Self, DynamicsError> {
        if a.norm() == 0.0 || !a.is_finite() {
            return Err(DynamicsError::InvalidMap(
                "a must be finite and nonzero".into(),
            ));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(DynamicsError::InvalidMap("non-finite coefficient".into()));
        }
        let degree = coeffs.iter().rposition(|c| c.norm() != 0.0);
        if degree.is_none_or(|d| d < 2) {
            return Err(DynamicsError::InvalidMap(
                "P must have degree at least 2".into(),
            ));
        }
        Ok(Self {
            family: MapFamily::GeneralHenon { a, coeffs },
            shift: C2Point::ORIGIN,
        })
    }

    pub fn linear(matrix: Mat2) -> Result<Self, DynamicsError> {
        if matrix.inverse().is_none() {
            return Err(DynamicsError::InvalidMap("linear map is singular".into()));
        }
        Ok(Self {
            family: MapFamily::Linear { matrix },
            shift: C2Point::ORIGIN,
        })
    }

    /// The reference contraction `(z/2, w/2)`.
    pub fn halving() -> Self {
        let half = Complex64::new(0.5, 0.0);
        Self::linear(Mat2::diagonal(half, half)).expect("halving map is invertible")
    }

    pub fn family(&self) -> &MapFamily {
        &self.family
    }

    pub fn shift(&self) -> C2Point {
        self.shift
    }

    pub fn is_linear(&self) -> bool {
        matches!(self.family, MapFamily::Linear { .. })
    }

    /// The Hénon `a` parameter, if the map has one.
    pub fn henon_a(&self) -> Option<Complex64> {
        match &self.family {
            MapFamily::ConjugatedHenon { a, .. } | MapFamily::GeneralHenon { a, .. } => Some(*a),
            MapFamily::Linear { .. } => None,
        }
    }

    /// Conjugates by the translation `p ↦ p + offset` on top of any
    /// existing conjugacy.
    pub fn translated(&self, offset: C2Point) -> Self {
        Self {
            family: self.family.clone(),
            shift: self.shift + offset,
        }
    }

    #[inline]
    fn raw_apply(&self, p: &C2Point) -> C2Point {
        let (z, w) = (p.z(), p.w());
        match &self.family {
            MapFamily::ConjugatedHenon { a, c } => C2Point::from_complex(z * z + c + a * w, a * z),
            MapFamily::GeneralHenon { a, coeffs } => {
                C2Point::from_complex(a * w + horner(coeffs, z), z)
            }
            MapFamily::Linear { matrix } => matrix.apply(p),
        }
    }

    fn raw_inverse(&self, p: &C2Point) -> C2Point {
        let (z, w) = (p.z(), p.w());
        match &self.family {
            MapFamily::ConjugatedHenon { a, c } => {
                let z0 = w / a;
                C2Point::from_complex(z0, (z - c - z0 * z0) / a)
            }
            MapFamily::GeneralHenon { a, coeffs } => {
                C2Point::from_complex(w, (z - horner(coeffs, w)) / a)
            }
            MapFamily::Linear { matrix } => matrix
                .inverse()
                .expect("validated at construction")
                .apply(p),
        }
    }

    fn raw_jacobian(&self, p: &C2Point) -> Mat2 {
        let z = p.z();
        let zero = Complex64::new(0.0, 0.0);
        match &self.family {
            MapFamily::ConjugatedHenon { a, .. } => Mat2([[2.0 * z, *a], [*a, zero]]),
            MapFamily::GeneralHenon { a, coeffs } => Mat2([
                [horner_derivative(coeffs, z), *a],
                [Complex64::new(1.0, 0.0), zero],
            ]),
            MapFamily::Linear { matrix } => *matrix,
        }
    }

    /// Evaluates the map. Non-finite results are reported as
    /// [`DynamicsError::EscapeOverflow`].
    #[inline]
    pub fn apply(&self, p: &C2Point) -> Result<C2Point, DynamicsError> {
        let out = if self.shift == C2Point::ORIGIN {
            self.raw_apply(p)
        } else {
            self.raw_apply(&(*p + self.shift)) - self.shift
        };
        if out.is_finite() {
            Ok(out)
        } else {
            Err(DynamicsError::EscapeOverflow)
        }
    }

    pub fn apply_inverse(&self, p: &C2Point) -> Result<C2Point, DynamicsError> {
        let out = self.raw_inverse(&(*p + self.shift)) - self.shift;
        if out.is_finite() {
            Ok(out)
        } else {
            Err(DynamicsError::EscapeOverflow)
        }
    }

    pub fn jacobian(&self, p: &C2Point) -> Mat2 {
        self.raw_jacobian(&(*p + self.shift))
    }

    pub fn jacobian_at_origin(&self) -> Mat2 {
        self.jacobian(&C2Point::ORIGIN)
    }

    /// Whether the derivative at the origin is numerically singular.
    pub fn linear_part_singular(&self) -> bool {
        match &self.family {
            MapFamily::ConjugatedHenon { a, .. } | MapFamily::GeneralHenon { a, .. } => {
                a.norm() < SINGULAR_THRESHOLD
            }
            MapFamily::Linear { matrix } => matrix.det().norm() < SINGULAR_THRESHOLD,
        }
    }

    /// Sum of coefficient moduli of the first component's polynomial part.
    pub(crate) fn coefficient_mass(&self) -> f64 {
        match &self.family {
            MapFamily::ConjugatedHenon { a, c } => a.norm() + 1.0 + c.norm(),
            MapFamily::GeneralHenon { a, coeffs } => {
                a.norm() + coeffs.iter().map(|c| c.norm()).sum::<f64>()
            }
            MapFamily::Linear { matrix } => matrix.0.iter().flatten().map(|c| c.norm()).sum(),
        }
    }
}

#[inline]
fn horner(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
}

fn horner_derivative(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, (k, c)| {
            acc * z + c * k as f64
        })
}

const NEWTON_TOL: f64 = 1e-12;
const NEWTON_MAX_STEPS: usize = 100;
const NEWTON_MAX_HALVINGS: usize = 60;

/// Locates an attracting fixed point by damped Newton iteration from the
/// origin and returns the map conjugated so that this point sits at 0,
/// together with the located point.
pub fn normalize_fixed_point(map: &AutoMap) -> Result<(AutoMap, C2Point), DynamicsError> {
    let residual = |p: &C2Point| -> Result<C2Point, DynamicsError> { Ok(map.apply(p)? - *p) };
    let mut p = C2Point::ORIGIN;
    let mut g = residual(&p)?;
    let mut steps = 0;
    while g.norm() >= NEWTON_TOL {
        if steps == NEWTON_MAX_STEPS {
            return Err(DynamicsError::NoConvergence {
                iterations: steps,
                residual: g.norm(),
            });
        }
        steps += 1;
        let jac = map.jacobian(&p).sub(&Mat2::identity());
        let inv = jac.inverse().ok_or(DynamicsError::NoConvergence {
            iterations: steps,
            residual: g.norm(),
        })?;
        let full_step = inv.apply(&g);
        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..NEWTON_MAX_HALVINGS {
            let candidate = p - full_step * scale;
            if let Ok(gc) = residual(&candidate) {
                if gc.norm() <= g.norm() {
                    accepted = Some((candidate, gc));
                    break;
                }
            }
            scale *= 0.5;
        }
        match accepted {
            Some((np, ng)) => {
                p = np;
                g = ng;
            }
            None => {
                return Err(DynamicsError::NoConvergence {
                    iterations: steps,
                    residual: g.norm(),
                })
            }
        }
    }
    let spectral_radius = map.jacobian(&p).spectral_radius();
    if spectral_radius >= 1.0 {
        return Err(DynamicsError::RepellingFixedPoint { spectral_radius });
    }
    Ok((map.translated(p), p))
}

/// Complex number that serializes as a bare real when its imaginary part
/// is zero and as `[re, im]` otherwise.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexValue {
    Real(f64),
    Pair([f64; 2]),
}

impl From<ComplexValue> for Complex64 {
    fn from(v: ComplexValue) -> Self {
        match v {
            ComplexValue::Real(re) => Complex64::new(re, 0.0),
            ComplexValue::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

impl From<Complex64> for ComplexValue {
    fn from(c: Complex64) -> Self {
        if c.im == 0.0 {
            ComplexValue::Real(c.re)
        } else {
            ComplexValue::Pair([c.re, c.im])
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyTag {
    #[default]
    ConjugatedHenon,
    GeneralHenon,
    Linear,
}

/// Wire form of an [`AutoMap`].
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpec {
    #[serde(default, skip_serializing_if = "is_default_family")]
    pub family: FamilyTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<ComplexValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<ComplexValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<ComplexValue>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<[[ComplexValue; 2]; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<C2Point>,
}

fn is_default_family(f: &FamilyTag) -> bool {
    *f == FamilyTag::ConjugatedHenon
}

impl TryFrom<MapSpec> for AutoMap {
    type Error = DynamicsError;

    fn try_from(s: MapSpec) -> Result<Self, Self::Error> {
        let missing = |f: &str| DynamicsError::InvalidMap(format!("missing field `{f}`"));
        let map = match s.family {
            FamilyTag::ConjugatedHenon => AutoMap::conjugated_henon(
                s.a.ok_or_else(|| missing("a"))?.into(),
                s.c.map(Into::into).unwrap_or_default(),
            )?,
            FamilyTag::GeneralHenon => AutoMap::general_henon(
                s.a.ok_or_else(|| missing("a"))?.into(),
                s.coeffs
                    .ok_or_else(|| missing("coeffs"))?
                    .into_iter()
                    .map(Into::into)
                    .collect(),
            )?,
            FamilyTag::Linear => {
                let m = s.matrix.ok_or_else(|| missing("matrix"))?;
                AutoMap::linear(Mat2([
                    [m[0][0].into(), m[0][1].into()],
                    [m[1][0].into(), m[1][1].into()],
                ]))?
            }
        };
        Ok(match s.shift {
            Some(shift) => map.translated(shift),
            None => map,
        })
    }
}

impl From<AutoMap> for MapSpec {
    fn from(m: AutoMap) -> Self {
        let shift = (m.shift != C2Point::ORIGIN).then_some(m.shift);
        match m.family {
            MapFamily::ConjugatedHenon { a, c } => MapSpec {
                a: Some(a.into()),
                c: Some(c.into()),
                shift,
                ..Default::default()
            },
            MapFamily::GeneralHenon { a, coeffs } => MapSpec {
                family: FamilyTag::GeneralHenon,
                a: Some(a.into()),
                coeffs: Some(coeffs.into_iter().map(Into::into).collect()),
                shift,
                ..Default::default()
            },
            MapFamily::Linear { matrix } => {
                let m = matrix.0;
                MapSpec {
                    family: FamilyTag::Linear,
                    matrix: Some([
                        [m[0][0].into(), m[0][1].into()],
                        [m[1][0].into(), m[1][1].into()],
                    ]),
                    shift,
                    ..Default::default()
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn apply_examples() {
        let f = AutoMap::henon(0.5, 0.0).unwrap();
        assert_eq!(f.apply(&C2Point::ORIGIN).unwrap(), C2Point::ORIGIN);
        assert_eq!(
            f.apply(&C2Point::real(1.0, 1.0)).unwrap(),
            C2Point::real(1.5, 0.5)
        );
        assert_eq!(
            f.apply(&C2Point::real(10.0, 0.0)).unwrap(),
            C2Point::real(100.0, 5.0)
        );
    }

    #[test]
    fn inverse_examples() {
        let f = AutoMap::henon(0.5, 0.0).unwrap();
        assert_eq!(
            f.apply_inverse(&C2Point::real(1.5, 0.5)).unwrap(),
            C2Point::real(1.0, 1.0)
        );
        assert_eq!(f.apply_inverse(&C2Point::ORIGIN).unwrap(), C2Point::ORIGIN);
        let g = AutoMap::henon(0.25, 0.1).unwrap();
        let p = C2Point::real(0.3, -0.2);
        assert!(g.apply_inverse(&g.apply(&p).unwrap()).unwrap().dist(&p) < 1e-12);
    }

    #[test]
    fn overflow_is_reported() {
        let f = AutoMap::henon(0.5, 0.0).unwrap();
        assert_eq!(
            f.apply(&C2Point::real(1e200, 0.0)),
            Err(DynamicsError::EscapeOverflow)
        );
    }

    #[test]
    fn construction_rejects_degenerate_maps() {
        assert!(AutoMap::henon(0.0, 0.3).is_err());
        assert!(AutoMap::general_henon(c(0.5), vec![c(1.0), c(2.0)]).is_err());
        assert!(AutoMap::general_henon(c(0.5), vec![c(1.0), c(0.0), c(2.0), c(0.0)]).is_ok());
        assert!(AutoMap::linear(Mat2::diagonal(c(1.0), c(0.0))).is_err());
    }

    #[test]
    fn general_henon_matches_formula_and_inverts() {
        // P(z) = z^3 - 0.5 z + 0.2
        let f = AutoMap::general_henon(
            Complex64::new(0.3, 0.1),
            vec![c(0.2), c(-0.5), c(0.0), c(1.0)],
        )
        .unwrap();
        let p = C2Point::new(0.4, -0.3, 0.7, 0.2);
        let (z, w) = (p.z(), p.w());
        let expected =
            C2Point::from_complex(Complex64::new(0.3, 0.1) * w + z * z * z - 0.5 * z + 0.2, z);
        assert!(f.apply(&p).unwrap().dist(&expected) < 1e-15);
        assert!(f.apply_inverse(&f.apply(&p).unwrap()).unwrap().dist(&p) < 1e-14);
    }

    #[test]
    fn jacobian_examples() {
        let j = AutoMap::henon(0.5, 0.0).unwrap().jacobian_at_origin();
        assert_eq!(j, Mat2([[c(0.0), c(0.5)], [c(0.5), c(0.0)]]));
        let j = AutoMap::henon(1e-3, 0.0).unwrap().jacobian_at_origin();
        assert_eq!(j, Mat2([[c(0.0), c(1e-3)], [c(1e-3), c(0.0)]]));
    }

    #[test]
    fn normalize_at_origin_is_identity() {
        let f = AutoMap::henon(0.5, 0.0).unwrap();
        let (g, p) = normalize_fixed_point(&f).unwrap();
        assert_eq!(p, C2Point::ORIGIN);
        assert_eq!(g, f);
    }

    #[test]
    fn normalize_moves_fixed_point_to_origin() {
        let f = AutoMap::henon(0.05, 0.1).unwrap();
        let (g, p) = normalize_fixed_point(&f).unwrap();
        assert!(f.apply(&p).unwrap().dist(&p) < 1e-12);
        assert!(g.apply(&C2Point::ORIGIN).unwrap().norm() < 1e-12);
        // closed form: z = (0.9975 - sqrt(0.9975^2 - 0.4)) / 2, w = a z
        let z = (0.9975 - (0.9975f64 * 0.9975 - 0.4).sqrt()) / 2.0;
        assert!((p.re1 - z).abs() < 1e-12 && (p.re2 - 0.05 * z).abs() < 1e-12);
    }

    #[test]
    fn normalize_fails_far_outside_cardioid() {
        let f = AutoMap::henon(0.5, 10.0).unwrap();
        assert!(matches!(
            normalize_fixed_point(&f),
            Err(DynamicsError::NoConvergence { .. })
        ));
    }

    #[test]
    fn serde_round_trip() {
        let maps = [
            AutoMap::henon(0.5, 0.0).unwrap(),
            AutoMap::conjugated_henon(Complex64::new(0.1, 0.2), c(0.3))
                .unwrap()
                .translated(C2Point::real(0.1, 0.0)),
            AutoMap::general_henon(c(0.4), vec![c(0.0), c(0.0), c(1.0)]).unwrap(),
            AutoMap::halving(),
        ];
        for m in maps {
            let s = serde_json::to_string(&m).unwrap();
            let back: AutoMap = serde_json::from_str(&s).unwrap();
            assert_eq!(back, m, "{s}");
        }
        assert_eq!(
            serde_json::to_string(&AutoMap::henon(0.5, 0.0).unwrap()).unwrap(),
            r#"{"a":0.5,"c":0.0}"#
        );
        assert!(serde_json::from_str::<AutoMap>(r#"{"a":0.0}"#).is_err());
    }
}
