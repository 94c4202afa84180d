// SPDX-License-Identifier: Apache-2.0

use crate::dynamics::{classify_orbit, OrbitVerdict};
use crate::error::BasinError;
use crate::filtration::Filtration;
use crate::point::C2Point;
use crate::schedule::IterationSchedule;

/// Membership in `Ω*`, the set of points whose orbit converges to the
/// origin: ATTRACTED once the orbit enters a certified contraction ball at
/// any step.
pub fn omega_star_member(
    schedule: &IterationSchedule,
    p: &C2Point,
    budget: u64,
    filtration: Filtration,
    attract_radius: f64,
) -> Result<OrbitVerdict, BasinError> {
    Ok(classify_orbit(
        schedule,
        p,
        budget,
        filtration,
        attract_radius,
    )?)
}

/// Membership in `Ω = ∪ F(j)⁻¹ B(r_{j+1})`: ATTRACTED at the end of the
/// first stage `j` with `‖F(j)(p)‖ < r_{j+1}`. Escape is checked after every
/// application. The verdict's `stage` counts map applications.
///
/// When every radius is at most `attract_radius` and every map is certified
/// on that ball, ATTRACTED here implies ATTRACTED for
/// [`omega_star_member`] at the same budget.
pub fn omega_member(
    schedule: &IterationSchedule,
    p: &C2Point,
    budget: u64,
    filtration: Filtration,
) -> Result<OrbitVerdict, BasinError> {
    if schedule.radii().is_none() {
        return Err(BasinError::MissingRadii);
    }
    let mut cursor = schedule.cursor();
    let mut state = *p;
    let mut n = 0u64;
    loop {
        if filtration.in_v_plus(&state) {
            return Ok(OrbitVerdict::escaped(n, state));
        }
        if n == budget {
            return Ok(OrbitVerdict::undecided(state));
        }
        match cursor.map().apply(&state) {
            Ok(next) => state = next,
            Err(_) => return Ok(OrbitVerdict::escaped(n + 1, state)),
        }
        n += 1;
        if let Some(j) = cursor.advance() {
            let r = schedule.radius_after_stage(j).expect("radii present");
            if state.norm() < r && !filtration.in_v_plus(&state) {
                return Ok(OrbitVerdict::attracted(n, state));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::OrbitStatus;
    use crate::map::AutoMap;
    use crate::schedule::Stage;

    fn filt() -> Filtration {
        Filtration::new(3.0).unwrap()
    }

    #[test]
    fn missing_radii() {
        let s = IterationSchedule::single(AutoMap::henon(0.5, 0.0).unwrap());
        assert_eq!(
            omega_member(&s, &C2Point::ORIGIN, 10, filt()),
            Err(BasinError::MissingRadii)
        );
    }

    #[test]
    fn origin_is_member_at_stage_one() {
        let s = IterationSchedule::single(AutoMap::henon(0.5, 0.0).unwrap())
            .with_radii(vec![1e-9])
            .unwrap();
        let v = omega_member(&s, &C2Point::ORIGIN, 10, filt()).unwrap();
        assert_eq!((v.status, v.stage), (OrbitStatus::Attracted, Some(1)));
        let v = omega_star_member(&s, &C2Point::ORIGIN, 10, filt(), 1e-3).unwrap();
        assert_eq!(v.status, OrbitStatus::Attracted);
    }

    #[test]
    fn stage_alignment() {
        // halving map in stages of 3: ‖F(1)p‖ = ‖p‖/8
        let s = IterationSchedule::new(vec![Stage::new(AutoMap::halving(), 3)]).unwrap();
        let p = C2Point::real(1.0, 0.0);
        let v = omega_member(
            &s.clone().with_radii(vec![1.0, 0.2]).unwrap(),
            &p,
            10,
            filt(),
        )
        .unwrap();
        assert_eq!((v.status, v.stage), (OrbitStatus::Attracted, Some(3)));
        // r = 0.1 is missed at stage 1 and caught at stage 2 (1/64 < 0.1)
        let v = omega_member(
            &s.clone().with_radii(vec![1.0, 0.1]).unwrap(),
            &p,
            10,
            filt(),
        )
        .unwrap();
        assert_eq!((v.status, v.stage), (OrbitStatus::Attracted, Some(6)));
        let v = omega_member(&s.with_radii(vec![1.0, 0.1]).unwrap(), &p, 5, filt()).unwrap();
        assert_eq!(v.status, OrbitStatus::Undecided);
    }

    #[test]
    fn v_plus_escapes() {
        let s = IterationSchedule::single(AutoMap::henon(0.5, 0.0).unwrap())
            .with_radii(vec![0.25])
            .unwrap();
        let p = C2Point::real(5.0, 1.0);
        assert_eq!(
            omega_member(&s, &p, 10, filt()).unwrap().status,
            OrbitStatus::Escaped
        );
        assert_eq!(
            omega_star_member(&s, &p, 10, filt(), 0.25).unwrap().status,
            OrbitStatus::Escaped
        );
    }
}
