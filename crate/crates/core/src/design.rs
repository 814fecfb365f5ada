//! Analytic construction of universal composite phase-gate sequences.
//!
//! For an even number of nominal π pulses `N = 2n` the one-parameter phase
//! law
//!
//! ```text
//! φ_k = (k-1)·Φ/N + (2π/N)(k-1)(k-2)   (mod 2π),   k = 1..N
//! ```
//!
//! realizes the phase gate `G(Φ) = diag(e^{iΦ/2}, e^{-iΦ/2})` in the ideal
//! limit and cancels the leading `m = ⌊N/4⌋` odd-order leakage coefficients
//! of the composite propagator for arbitrary dynamical phase. The law was
//! obtained from the explicit solutions at N = 4, 8, 12 and holds numerically
//! for every even N up to 26; for larger N the predicted order is treated as
//! conjectured.

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::angles::{wrap_pi, wrap_two_pi};
use crate::su2::{from_cayley_klein, ordered_product, CayleyKlein, Unitary2};

/// Largest even pulse count for which the phase law has been confirmed; the
/// universality order for larger sequences is reported as conjectured.
pub const MAX_CONFIRMED_PULSES: usize = 26;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum DesignError {
    #[error("pulse count must be even and positive, got {0}")]
    InvalidPulseCount(usize),
    #[error("phase list is empty")]
    EmptyPhases,
}

/// An ordered list of pulse phases together with the gate it is meant to
/// implement.
///
/// Phases are stored wrapped to `[0, 2π)` with the first phase gauge-fixed
/// to zero; the target phase keeps the caller's pre-wrap value so reports can
/// show both.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSequence {
    phases: Vec<f64>,
    target_phase: f64,
    family: String,
}

impl PhaseSequence {
    /// Build a gate sequence from raw phases. The list must have even,
    /// positive length; phases are wrapped and gauge-fixed so that
    /// `phases[0] = 0`.
    pub fn gate(phases: Vec<f64>, target_phase: f64, family: &str) -> Result<Self, DesignError> {
        if phases.is_empty() || phases.len() % 2 != 0 {
            return Err(DesignError::InvalidPulseCount(phases.len()));
        }
        Ok(Self::from_raw(phases, target_phase, family))
    }

    /// Build a sequence of any positive length. Odd pulse counts cannot
    /// implement a phase gate but are accepted for externally supplied
    /// sequences; [`PhaseSequence::is_phase_gate_shaped`] reports the parity.
    pub fn external(
        phases: Vec<f64>,
        target_phase: f64,
        family: &str,
    ) -> Result<Self, DesignError> {
        if phases.is_empty() {
            return Err(DesignError::EmptyPhases);
        }
        if phases.len() % 2 != 0 {
            log::warn!(
                "sequence '{family}' has odd pulse count {}; it cannot act as a phase gate",
                phases.len()
            );
        }
        Ok(Self::from_raw(phases, target_phase, family))
    }

    fn from_raw(phases: Vec<f64>, target_phase: f64, family: &str) -> Self {
        let first = phases[0];
        let phases = phases
            .into_iter()
            .map(|p| wrap_two_pi(p - first))
            .collect();
        Self {
            phases,
            target_phase,
            family: family.to_string(),
        }
    }

    pub fn n_pulses(&self) -> usize {
        self.phases.len()
    }

    /// Pulse phases in radians, wrapped to `[0, 2π)`, first phase zero.
    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    /// Target gate phase exactly as requested (not wrapped).
    pub fn target_phase(&self) -> f64 {
        self.target_phase
    }

    /// Target gate phase wrapped to `[0, 2π)`.
    pub fn target_phase_wrapped(&self) -> f64 {
        wrap_two_pi(self.target_phase)
    }

    pub fn family(&self) -> &str {
        &self.family
    }

    pub fn is_phase_gate_shaped(&self) -> bool {
        self.phases.len() % 2 == 0
    }

    /// Predicted universality order `m = ⌊N/4⌋`: the number of leading odd
    /// powers of ε whose leakage coefficients cancel.
    pub fn predicted_order(&self) -> usize {
        self.phases.len() / 4
    }

    /// Whether the predicted order is only conjectured (pulse counts beyond
    /// the numerically confirmed range).
    pub fn order_is_conjectured(&self) -> bool {
        self.phases.len() > MAX_CONFIRMED_PULSES
    }

    /// Copy of this sequence with a constant offset added to every phase.
    /// The offset changes the composite propagator only by a diagonal
    /// conjugation, so populations and gate fidelity are unaffected.
    pub fn with_phase_offset(&self, offset: f64) -> Self {
        Self {
            phases: self.phases.iter().map(|p| wrap_two_pi(p + offset)).collect(),
            target_phase: self.target_phase,
            family: self.family.clone(),
        }
    }
}

/// Ideal diagonal phase of a sequence: the composite at ε = 0 equals
/// `diag(e^{iΛ}, e^{-iΛ})` up to a global sign, and the realized gate phase
/// is `Φ = 2Λ (mod 2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GatePhase {
    pub lambda: f64,
    pub phi: f64,
}

/// Generate the analytic universal composite phase-gate sequence for an even
/// pulse count and target phase (radians).
///
/// `n_pulses = 2` is accepted with a warning: it is an ideal phase gate but
/// has universality order zero, useful only as a baseline.
pub fn generate_sequence(n_pulses: usize, target_phase: f64) -> Result<PhaseSequence, DesignError> {
    if n_pulses == 0 || n_pulses % 2 != 0 {
        return Err(DesignError::InvalidPulseCount(n_pulses));
    }
    if n_pulses == 2 {
        log::warn!("two-pulse sequence has universality order 0; no error cancellation");
    }
    let n = n_pulses as f64;
    let phases = (1..=n_pulses)
        .map(|k| {
            let k1 = (k - 1) as f64;
            let k2 = (k as f64) - 2.0;
            wrap_two_pi(k1 * target_phase / n + (2.0 * PI / n) * k1 * k2)
        })
        .collect();
    PhaseSequence::gate(phases, target_phase, "ucpg-analytic")
}

/// Alternating-sum ideal phase `Λ = φ2 - φ3 + φ4 - ⋯ + φ_N` of an
/// even-length sequence, together with the gate phase `Φ = 2Λ mod 2π`.
pub fn ideal_gate_phase(seq: &PhaseSequence) -> GatePhase {
    let lambda: f64 = seq
        .phases()
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, &p)| if i % 2 == 1 { p } else { -p })
        .sum();
    let lambda = wrap_pi(lambda);
    GatePhase {
        lambda,
        phi: wrap_two_pi(2.0 * lambda),
    }
}

/// The target phase gate `G(Φ) = diag(e^{iΦ/2}, e^{-iΦ/2})`.
pub fn target_gate(phi: f64) -> Unitary2 {
    Unitary2::new(
        Complex64::from_polar(1.0, phi / 2.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::from_polar(1.0, -phi / 2.0),
    )
}

/// The compact four-pulse solution family `(0, φ1, 2φ1+π, 3φ1+π)` with
/// target phase `4φ1`. For every φ1 this coincides with
/// `generate_sequence(4, 4φ1)`.
pub fn four_pulse_solution_family(phi1: f64) -> PhaseSequence {
    let phases = vec![0.0, phi1, 2.0 * phi1 + PI, 3.0 * phi1 + PI];
    PhaseSequence::gate(phases, 4.0 * phi1, "ucpg-analytic")
        .expect("four phases always form a valid gate sequence")
}

/// Ordered ε = 0 product of a sequence, using the Cayley–Klein form of an
/// ideal π pulse for each factor.
pub fn ideal_composite(seq: &PhaseSequence) -> Unitary2 {
    let factors: Vec<Unitary2> = seq
        .phases()
        .iter()
        .map(|&p| {
            from_cayley_klein(CayleyKlein::new(0.0, 0.0), p)
                .expect("eps = 0 is always in range")
        })
        .collect();
    ordered_product(&factors).expect("sequence is nonempty")
}
