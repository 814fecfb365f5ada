//! Universal composite phase gates for driven two-level systems.
//!
//! A phase gate imparts a relative phase between the two basis amplitudes of a
//! qubit without transferring population. Replacing the single control pulse
//! by a sequence of nominal π pulses with engineered relative phases makes the
//! gate robust: the leading error contributions of the individual pulses
//! interfere destructively for *any* imperfection of the driving field.
//!
//! The crate is organized around that workflow:
//!
//! - [`su2`]: exact 2×2 complex matrix algebra, propagator constructors, and
//!   the Cayley–Klein parametrization `(ε, α, φ)` of a single pulse.
//! - [`design`]: the closed-form phase law that produces a universal
//!   composite phase gate for any even pulse count and target phase.
//! - [`verify`]: order-by-order confirmation that a phase sequence cancels
//!   the leakage element `U12` to the predicted power of ε, uniformly in the
//!   unknown dynamical phase α.
//! - [`pulse`]: physical single-pulse propagators (closed-form rectangular,
//!   time-integrated truncated-Gaussian) under simultaneous pulse-area and
//!   detuning errors, and their composition into gate propagators.
//! - [`scan`]: fidelity landscapes over the `(ε_A, δ)` error plane, contour
//!   extraction, cross-sections, and plateau metrics.
//! - [`seqfile`]: the on-disk sequence format, and two-block reference
//!   constructions for comparison against published composite phase gates.
//! - [`svgplot`]: filled-contour SVG rendering of fidelity maps.

pub mod angles;
pub mod design;
pub mod pulse;
pub mod scan;
pub mod seqfile;
pub mod su2;
pub mod svgplot;
pub mod verify;

pub use design::{
    four_pulse_solution_family, generate_sequence, ideal_gate_phase, target_gate, GatePhase,
    PhaseSequence,
};
pub use pulse::{
    composite_propagator, rect_pulse_propagator, shaped_pulse_propagator, ErrorPoint,
    IntegratorConfig, PulseEnvelope,
};
pub use scan::{
    cross_section, extract_contours, fidelity, plateau_metrics, scan, Axis, ContourSet,
    Evaluator, FidelityMap, PlateauMetrics, ScanGrid,
};
pub use seqfile::{load_sequence, save_sequence, two_block_construction, SequenceFile, TwoBlockSpec};
pub use su2::{
    from_cayley_klein, ordered_product, rotation_unitary, to_cayley_klein, CayleyKlein,
    RotationParams, Unitary2,
};
pub use verify::{
    composite_from_parametrization, estimate_leakage_order, harmonic_coefficients,
    verify_cancellation_ladder, verify_cancellation_ladder_with, HarmonicSpectrum, LadderReport,
    OrderEstimate,
};
