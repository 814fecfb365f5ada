//! Canonical angle wrapping.
//!
//! All phase comparisons in this crate go through these helpers so that a
//! single branch convention is used everywhere: `arg`-like quantities live in
//! `(-π, π]`, stored pulse phases live in `[0, 2π)`.

use std::f64::consts::PI;

const TWO_PI: f64 = 2.0 * PI;

/// Wrap an angle to the half-open interval `[0, 2π)`.
pub fn wrap_two_pi(angle: f64) -> f64 {
    let mut a = angle.rem_euclid(TWO_PI);
    // rem_euclid can return exactly 2π when angle is a tiny negative number.
    if a >= TWO_PI {
        a -= TWO_PI;
    }
    a
}

/// Wrap an angle to the interval `(-π, π]`.
pub fn wrap_pi(angle: f64) -> f64 {
    let a = wrap_two_pi(angle);
    if a > PI {
        a - TWO_PI
    } else {
        a
    }
}

/// Signed distance between two angles, reduced to `(-π, π]`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    wrap_pi(a - b)
}

/// True when two angles agree modulo 2π within `tol` radians.
pub fn angles_close(a: f64, b: f64, tol: f64) -> bool {
    angle_diff(a, b).abs() <= tol
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wraps_into_ranges() {
        assert!((wrap_two_pi(-0.1) - (TWO_PI - 0.1)).abs() < 1e-14);
        assert_eq!(wrap_two_pi(0.0), 0.0);
        assert!((wrap_pi(3.0 * PI) - PI).abs() < 1e-14);
        assert!(wrap_pi(TWO_PI).abs() < 1e-14);
        // π maps to +π, not -π
        assert!(wrap_pi(PI) > 0.0);
    }

    #[test]
    fn diff_is_signed_and_small() {
        assert!((angle_diff(0.1, TWO_PI - 0.1) - 0.2).abs() < 1e-13);
        assert!((angle_diff(TWO_PI - 0.1, 0.1) + 0.2).abs() < 1e-13);
        assert!(angles_close(5.0 * PI, PI, 1e-12));
    }

    #[test]
    fn huge_angles_stay_finite() {
        let a = wrap_two_pi(1.0e9);
        assert!((0.0..TWO_PI).contains(&a));
    }
}
