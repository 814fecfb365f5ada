//! Exact 2×2 complex matrix algebra and the Cayley–Klein single-pulse
//! parametrization.
//!
//! A single coherent pulse acting on a two-state system has the propagator
//!
//! ```text
//!             ⎡ ε e^{iα}            √(1-ε²) e^{iφ} ⎤
//! U(ε, α; φ) = ⎢                                    ⎥
//!             ⎣ -√(1-ε²) e^{-iφ}    ε e^{-iα}      ⎦
//! ```
//!
//! where the real deviation parameter ε ∈ [0, 1] measures how far the pulse
//! is from a perfect π pulse (ε = 0 ⇔ full population swap), α is an unknown
//! dynamical phase, and φ is the controlled pulse phase. No assumption is
//! made about how ε and α depend on the physical imperfections; that is what
//! makes phase sequences designed in this parametrization universal.

use num_complex::Complex64;
use thiserror::Error;

use crate::angles::wrap_pi;

/// Errors produced by the SU(2) primitives.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Su2Error {
    #[error("deviation parameter out of range: |eps| = {0} > 1")]
    EpsOutOfRange(f64),
    #[error("rotation axis is not a unit vector: |axis| = {0}")]
    NonUnitAxis(f64),
    #[error("matrix is not unitary within {tol}: deviation {deviation}")]
    NotUnitary { deviation: f64, tol: f64 },
    #[error("ordered product of an empty factor sequence")]
    EmptyProduct,
}

/// A 2×2 complex matrix, nominally unitary.
///
/// Entries are stored explicitly; `u11` is row 1, column 1. Constructors in
/// this crate produce matrices that satisfy `U†U = 1` to 1e-12 elementwise,
/// but the type itself does not enforce unitarity so that intermediate
/// diagnostics (e.g. finite-difference quotients) can reuse it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Unitary2 {
    pub u11: Complex64,
    pub u12: Complex64,
    pub u21: Complex64,
    pub u22: Complex64,
}

impl Unitary2 {
    pub fn new(u11: Complex64, u12: Complex64, u21: Complex64, u22: Complex64) -> Self {
        Self { u11, u12, u21, u22 }
    }

    pub fn identity() -> Self {
        Self::new(
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
        )
    }

    /// Matrix product `self · rhs`.
    pub fn mul(&self, rhs: &Self) -> Self {
        Self::new(
            self.u11 * rhs.u11 + self.u12 * rhs.u21,
            self.u11 * rhs.u12 + self.u12 * rhs.u22,
            self.u21 * rhs.u11 + self.u22 * rhs.u21,
            self.u21 * rhs.u12 + self.u22 * rhs.u22,
        )
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        Self::new(
            self.u11.conj(),
            self.u21.conj(),
            self.u12.conj(),
            self.u22.conj(),
        )
    }

    pub fn trace(&self) -> Complex64 {
        self.u11 + self.u22
    }

    pub fn det(&self) -> Complex64 {
        self.u11 * self.u22 - self.u12 * self.u21
    }

    /// Scalar multiple.
    pub fn scale(&self, c: Complex64) -> Self {
        Self::new(c * self.u11, c * self.u12, c * self.u21, c * self.u22)
    }

    /// Largest elementwise deviation of `U†U` from the identity.
    pub fn unitarity_error(&self) -> f64 {
        let g = self.dagger().mul(self);
        let one = Complex64::new(1.0, 0.0);
        [
            (g.u11 - one).norm(),
            g.u12.norm(),
            g.u21.norm(),
            (g.u22 - one).norm(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    /// Largest elementwise absolute difference to `other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        [
            (self.u11 - other.u11).norm(),
            (self.u12 - other.u12).norm(),
            (self.u21 - other.u21).norm(),
            (self.u22 - other.u22).norm(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    /// Largest elementwise difference to `other` after removing the global
    /// phase that best aligns the two matrices.
    pub fn max_abs_diff_up_to_phase(&self, other: &Self) -> f64 {
        let overlap = other.dagger().mul(self).trace();
        if overlap.norm() < 1e-30 {
            return self.max_abs_diff(other);
        }
        let phase = overlap / overlap.norm();
        self.max_abs_diff(&other.scale(phase))
    }
}

impl std::ops::Mul for Unitary2 {
    type Output = Unitary2;
    fn mul(self, rhs: Unitary2) -> Unitary2 {
        Unitary2::mul(&self, &rhs)
    }
}

/// Cayley–Klein parameters of a single pulse: deviation ε and dynamical
/// phase α, with an optional common off-diagonal phase β.
///
/// Values extracted from genuine unitaries have ε ∈ [0, 1]; the constructor
/// additionally accepts ε ∈ [-1, 0) so that the odd-power structure of the
/// composite leakage can be tested directly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CayleyKlein {
    pub eps: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl CayleyKlein {
    /// Parameters with the common phase β = 0 (β is absorbed into the pulse
    /// phases for composite sequences).
    pub fn new(eps: f64, alpha: f64) -> Self {
        Self {
            eps,
            alpha,
            beta: 0.0,
        }
    }

    pub fn with_beta(eps: f64, alpha: f64, beta: f64) -> Self {
        Self { eps, alpha, beta }
    }
}

/// Rotation-parameter form of an SU(2) element: angle θ about a unit axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationParams {
    pub theta: f64,
    pub axis: [f64; 3],
}

impl RotationParams {
    pub fn new(theta: f64, axis: [f64; 3]) -> Self {
        Self { theta, axis }
    }

    fn axis_norm(&self) -> f64 {
        (self.axis[0] * self.axis[0] + self.axis[1] * self.axis[1] + self.axis[2] * self.axis[2])
            .sqrt()
    }
}

/// Build the single-pulse propagator `U(ε, α; φ)` with β folded into φ.
///
/// Returns the matrix `[[ε e^{iα}, √(1-ε²) e^{i(φ+β)}], [-√(1-ε²) e^{-i(φ+β)}, ε e^{-iα}]]`,
/// unitary whenever |ε| ≤ 1.
pub fn from_cayley_klein(p: CayleyKlein, phi: f64) -> Result<Unitary2, Su2Error> {
    if p.eps.abs() > 1.0 {
        return Err(Su2Error::EpsOutOfRange(p.eps));
    }
    let off = (1.0 - p.eps * p.eps).max(0.0).sqrt();
    let ea = Complex64::from_polar(1.0, p.alpha);
    let ef = Complex64::from_polar(1.0, phi + p.beta);
    Ok(Unitary2::new(
        p.eps * ea,
        off * ef,
        -off * ef.conj(),
        p.eps * ea.conj(),
    ))
}

/// Decomposition of a unitary into Cayley–Klein parameters.
///
/// `alpha` is undefined when ε vanishes (ideal π pulse) and `phi` is
/// undefined when ε reaches 1 (no population transfer); degenerate values
/// are reported as `None` rather than as errors because both limits are
/// routine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CkDecomposition {
    pub eps: f64,
    pub alpha: Option<f64>,
    pub phi: Option<f64>,
}

/// Extract `(ε, α, φ)` from a unitary, inverting [`from_cayley_klein`].
///
/// Requires `u` unitary within 1e-10. The round trip
/// `from_cayley_klein(to_cayley_klein(u))` reproduces `u` to 1e-10 whenever
/// `0 < ε < 1`.
pub fn to_cayley_klein(u: &Unitary2) -> Result<CkDecomposition, Su2Error> {
    let deviation = u.unitarity_error();
    let tol = 1e-10;
    if deviation > tol {
        return Err(Su2Error::NotUnitary { deviation, tol });
    }
    let eps = u.u11.norm();
    let alpha = (eps >= 1e-14).then(|| wrap_pi(u.u11.arg()));
    let phi = (eps <= 1.0 - 1e-14).then(|| wrap_pi(u.u12.arg()));
    Ok(CkDecomposition { eps, alpha, phi })
}

/// Rotation propagator `cos(θ/2)·1 - i sin(θ/2)(n̂·σ)`.
pub fn rotation_unitary(r: RotationParams) -> Result<Unitary2, Su2Error> {
    let norm = r.axis_norm();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Su2Error::NonUnitAxis(norm));
    }
    let (nx, ny, nz) = (r.axis[0], r.axis[1], r.axis[2]);
    let c = (r.theta / 2.0).cos();
    let s = (r.theta / 2.0).sin();
    Ok(Unitary2::new(
        Complex64::new(c, -s * nz),
        Complex64::new(-s * ny, -s * nx),
        Complex64::new(s * ny, -s * nx),
        Complex64::new(c, s * nz),
    ))
}

/// Ordered product `U_N ⋯ U_2 U_1` of a pulse train (first pulse applied
/// first, i.e. rightmost factor).
pub fn ordered_product(factors: &[Unitary2]) -> Result<Unitary2, Su2Error> {
    let (first, rest) = factors.split_first().ok_or(Su2Error::EmptyProduct)?;
    let mut acc = *first;
    for f in rest {
        acc = f.mul(&acc);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angles::angles_close;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    /// Test-only matrix exponential by scaled Taylor series, independent of
    /// the closed-form constructors it checks.
    pub(crate) fn expm(m: &Unitary2) -> Unitary2 {
        let norm = [m.u11, m.u12, m.u21, m.u22]
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        let squarings = norm.log2().ceil().max(0.0) as u32 + 1;
        let scale = Complex64::new(1.0 / f64::from(1u32 << squarings), 0.0);
        let a = m.scale(scale);
        let mut term = Unitary2::identity();
        let mut sum = Unitary2::identity();
        for k in 1..30 {
            term = term.mul(&a);
            term = term.scale(Complex64::new(1.0 / k as f64, 0.0));
            sum = Unitary2::new(
                sum.u11 + term.u11,
                sum.u12 + term.u12,
                sum.u21 + term.u21,
                sum.u22 + term.u22,
            );
        }
        let mut out = sum;
        for _ in 0..squarings {
            out = out.mul(&out);
        }
        out
    }

    #[test]
    fn ideal_pi_pulse() {
        let u = from_cayley_klein(CayleyKlein::new(0.0, 1.234), 0.0).unwrap();
        let expected = Unitary2::new(
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, 0.0),
        );
        assert!(u.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn eps_one_is_identity_up_to_alpha() {
        let u = from_cayley_klein(CayleyKlein::new(1.0, 0.0), 2.5).unwrap();
        assert!(u.max_abs_diff(&Unitary2::identity()) < 1e-15);
    }

    #[test]
    fn generic_entries_match_parameters() {
        let u = from_cayley_klein(CayleyKlein::new(0.3, 0.7), 1.1).unwrap();
        assert!((u.u11.norm() - 0.3).abs() < 1e-15);
        assert!((u.u11.arg() - 0.7).abs() < 1e-15);
        assert!((u.u12.norm() - 0.91f64.sqrt()).abs() < 1e-15);
        assert!((u.u12.arg() - 1.1).abs() < 1e-15);
        assert!(u.unitarity_error() < 1e-15);
    }

    #[test]
    fn eps_out_of_range_rejected() {
        assert_eq!(
            from_cayley_klein(CayleyKlein::new(1.5, 0.0), 0.0),
            Err(Su2Error::EpsOutOfRange(1.5))
        );
    }

    #[test]
    fn decomposition_flags_degenerate_parameters() {
        let id = Unitary2::identity();
        let d = to_cayley_klein(&id).unwrap();
        assert!((d.eps - 1.0).abs() < 1e-15);
        assert!(d.phi.is_none());

        let pi_pulse = from_cayley_klein(CayleyKlein::new(0.0, 0.0), 0.0).unwrap();
        let d = to_cayley_klein(&pi_pulse).unwrap();
        assert!(d.eps < 1e-15);
        assert!(d.alpha.is_none());
        assert_eq!(d.phi, Some(0.0));
    }

    #[test]
    fn round_trip_generic() {
        let u = from_cayley_klein(CayleyKlein::new(0.3, 0.7), 1.1).unwrap();
        let d = to_cayley_klein(&u).unwrap();
        assert!((d.eps - 0.3).abs() < 1e-12);
        assert!((d.alpha.unwrap() - 0.7).abs() < 1e-12);
        assert!((d.phi.unwrap() - 1.1).abs() < 1e-12);
        let back = from_cayley_klein(CayleyKlein::new(d.eps, d.alpha.unwrap()), d.phi.unwrap())
            .unwrap();
        assert!(back.max_abs_diff(&u) < 1e-12);
    }

    #[test]
    fn non_unitary_rejected() {
        let mut u = Unitary2::identity();
        u.u11 = Complex64::new(2.0, 0.0);
        assert!(matches!(
            to_cayley_klein(&u),
            Err(Su2Error::NotUnitary { .. })
        ));
    }

    #[test]
    fn rotation_about_x_by_pi() {
        let u = rotation_unitary(RotationParams::new(PI, [1.0, 0.0, 0.0])).unwrap();
        let expected = Unitary2::new(
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, -1.0),
            Complex64::new(0.0, -1.0),
            Complex64::new(0.0, 0.0),
        );
        assert!(u.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn zero_angle_is_identity() {
        let u = rotation_unitary(RotationParams::new(0.0, [0.0, 1.0, 0.0])).unwrap();
        assert!(u.max_abs_diff(&Unitary2::identity()) < 1e-15);
    }

    #[test]
    fn non_unit_axis_rejected() {
        let r = RotationParams::new(1.0, [1.0, 1.0, 0.0]);
        assert!(matches!(
            rotation_unitary(r),
            Err(Su2Error::NonUnitAxis(_))
        ));
    }

    #[test]
    fn tilted_rotation_matches_matrix_exponential() {
        // θ = π√1.25 about (1, 0, 0.5)/√1.25, checked against exp(-iθ/2 n·σ)
        // computed by series summation.
        let norm = 1.25f64.sqrt();
        let theta = PI * norm;
        let axis = [1.0 / norm, 0.0, 0.5 / norm];
        let u = rotation_unitary(RotationParams::new(theta, axis)).unwrap();

        let half = -theta / 2.0;
        let gen = Unitary2::new(
            Complex64::new(0.0, 1.0) * Complex64::new(axis[2] * half, 0.0),
            Complex64::new(0.0, 1.0) * Complex64::new(axis[0] * half, -axis[1] * half),
            Complex64::new(0.0, 1.0) * Complex64::new(axis[0] * half, axis[1] * half),
            Complex64::new(0.0, 1.0) * Complex64::new(-axis[2] * half, 0.0),
        );
        let expected = expm(&gen);
        assert!(
            u.max_abs_diff(&expected) < 1e-12,
            "diff {}",
            u.max_abs_diff(&expected)
        );
    }

    #[test]
    fn product_of_single_factor() {
        let u = from_cayley_klein(CayleyKlein::new(0.2, 0.5), 0.3).unwrap();
        assert!(ordered_product(&[u]).unwrap().max_abs_diff(&u) < 1e-15);
    }

    #[test]
    fn product_with_inverse_is_identity() {
        let u = from_cayley_klein(CayleyKlein::new(0.37, -0.9), 2.2).unwrap();
        let p = ordered_product(&[u, u.dagger()]).unwrap();
        assert!(p.max_abs_diff(&Unitary2::identity()) < 1e-12);
    }

    #[test]
    fn empty_product_rejected() {
        assert_eq!(ordered_product(&[]), Err(Su2Error::EmptyProduct));
    }

    #[test]
    fn four_ideal_pi_pulses_give_diagonal_phase() {
        // Phases (0, φ1, φ2, φ3) at ε = 0 produce diag(e^{iΛ}, e^{-iΛ})
        // with Λ = φ1 - φ2 + φ3.
        let phases = [0.0, 0.4, 1.7, 2.9];
        let factors: Vec<Unitary2> = phases
            .iter()
            .map(|&p| from_cayley_klein(CayleyKlein::new(0.0, 0.0), p).unwrap())
            .collect();
        let u = ordered_product(&factors).unwrap();
        let lambda = 0.4 - 1.7 + 2.9;
        assert!(u.u12.norm() < 1e-14);
        assert!(u.u21.norm() < 1e-14);
        assert!(angles_close(u.u11.arg(), lambda, 1e-13));
        assert!(angles_close(u.u22.arg(), -lambda, 1e-13));
    }

    proptest! {
        #[test]
        fn constructors_are_unitary(
            eps in 0.0f64..=1.0,
            alpha in -10.0f64..10.0,
            phi in -10.0f64..10.0,
        ) {
            let u = from_cayley_klein(CayleyKlein::new(eps, alpha), phi).unwrap();
            prop_assert!(u.unitarity_error() < 1e-12);
            prop_assert!((u.det().norm() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn rotations_are_unitary(theta in -20.0f64..20.0, az in -1.0f64..1.0, phi in 0.0f64..7.0) {
            let s = (1.0 - az * az).max(0.0).sqrt();
            let axis = [s * phi.cos(), s * phi.sin(), az];
            let u = rotation_unitary(RotationParams::new(theta, axis)).unwrap();
            prop_assert!(u.unitarity_error() < 1e-12);
        }

        #[test]
        fn long_products_stay_unitary(seed in 0u64..1000) {
            // Deviation from unitarity should grow at most linearly in the
            // factor count at machine-precision scale.
            let mut state = seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1);
            let mut next = || {
                state ^= state >> 12;
                state ^= state << 25;
                state ^= state >> 27;
                (state.wrapping_mul(0x2545f4914f6cdd1d) >> 11) as f64 / (1u64 << 53) as f64
            };
            let factors: Vec<Unitary2> = (0..64)
                .map(|_| {
                    let eps = next();
                    let alpha = (next() - 0.5) * 6.0;
                    let phi = (next() - 0.5) * 6.0;
                    from_cayley_klein(CayleyKlein::new(eps, alpha), phi).unwrap()
                })
                .collect();
            let p = ordered_product(&factors).unwrap();
            prop_assert!(p.unitarity_error() < 1e-10 * 64.0);
        }

        #[test]
        fn composite_u12_is_odd_in_eps(
            eps in 0.0f64..=0.99,
            alpha in -3.0f64..3.0,
            seed in 0u64..200,
        ) {
            let phases: Vec<f64> = (0..6)
                .map(|k| ((seed.wrapping_mul(k + 3) % 360) as f64).to_radians())
                .collect();
            let build = |e: f64| {
                let fs: Vec<Unitary2> = phases
                    .iter()
                    .map(|&p| from_cayley_klein(CayleyKlein::new(e, alpha), p).unwrap())
                    .collect();
                ordered_product(&fs).unwrap()
            };
            let plus = build(eps);
            let minus = build(-eps);
            prop_assert!((plus.u12 + minus.u12).norm() < 1e-12);
        }
    }
}
