//! Order-by-order verification of universal error cancellation.
//!
//! For an even-length sequence of identical pulses in the Cayley–Klein
//! parametrization, the off-diagonal leakage element of the composite
//! propagator admits an odd-power expansion
//!
//! ```text
//! U12(ε, α) = ε C1(α) + ε³ C3(α) + ε⁵ C5(α) + ⋯
//! ```
//!
//! where each coefficient is a trigonometric polynomial in `e^{iα}`. A
//! sequence is universal to order `m` when `C1 = C3 = ⋯ = C_{2m-1} = 0` for
//! *every* α, leaving `U12 = O(ε^{2m+1})`.
//!
//! The coefficients are extracted exactly: every entry of every pulse factor
//! is a monomial in `(ε, w, e^{iα})` with `w = √(1-ε²)`, so the composite
//! U12 is a homogeneous polynomial in `(ε, w)` with Laurent coefficients in
//! `e^{iα}`, computed by folding the pulse factors one at a time. Plain
//! finite differences on the assembled product cannot resolve the high-order
//! coefficients: the product carries ~1e-15 of rounding noise, which a
//! ninth-derivative quotient amplifies past any useful threshold. The
//! polynomial route keeps each coefficient at full double precision
//! regardless of order.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::design::PhaseSequence;
use crate::su2::{from_cayley_klein, ordered_product, CayleyKlein, Su2Error, Unitary2};

/// Harmonic amplitudes at a vanishing order must stay below this bound,
/// uniformly in α.
pub const CANCELLATION_THRESHOLD: f64 = 1e-8;

/// The first surviving order must exceed this bound for cancellation to be
/// judged non-accidental.
pub const NONVANISHING_THRESHOLD: f64 = 1e-4;

/// Basis coefficients below this magnitude are treated as exact zeros when
/// evaluating the leakage scaling. Genuinely vanishing coefficients compute
/// to ≲1e-11 from accumulated rounding, four decades under the smallest
/// physical coefficient admitted by [`NONVANISHING_THRESHOLD`].
pub const COEFF_CLEANING_THRESHOLD: f64 = 1e-10;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum VerifyError {
    #[error("expansion order must be a positive odd integer, got {0}")]
    InvalidOrder(usize),
    #[error("need at least {needed} alpha samples for order {order}, got {got}")]
    TooFewAlphaSamples { order: usize, needed: usize, got: usize },
    #[error("eps grid must span at least one decade (got {min} to {max})")]
    FitRangeTooNarrow { min: f64, max: f64 },
    #[error("eps grid entries must be finite and strictly positive")]
    BadEpsGrid,
    #[error("alpha grid must contain at least 64 points, got {0}")]
    TooFewAlphaPoints(usize),
    #[error("leakage vanishes identically; no exponent to fit")]
    DegenerateLeakage,
    #[error(transparent)]
    Su2(#[from] Su2Error),
}

/// One sampled value of the composite leakage element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeakageSample {
    pub eps: f64,
    pub alpha: f64,
    pub u12: Complex64,
}

/// Composite propagator assembled directly from the Cayley–Klein form of
/// each pulse: the ordered product of `U(ε, α; φ_k)` over the sequence.
pub fn composite_from_parametrization(
    seq: &PhaseSequence,
    eps: f64,
    alpha: f64,
) -> Result<Unitary2, Su2Error> {
    let factors: Vec<Unitary2> = seq
        .phases()
        .iter()
        .map(|&p| from_cayley_klein(CayleyKlein::new(eps, alpha), p))
        .collect::<Result<_, _>>()?;
    ordered_product(&factors)
}

/// Exact expansion of the composite U12 over the monomial basis
/// `ε^d w^{N-d} e^{ihα}` with `w = √(1-ε²)`.
///
/// `terms[d][j]` is the coefficient of `ε^d w^{N-d} e^{i(2j-d)α}`; the
/// harmonic index runs over `h = -d, -d+2, …, d`.
#[derive(Debug, Clone)]
pub struct LeakagePolynomial {
    n_pulses: usize,
    terms: Vec<Vec<Complex64>>,
    /// Largest coefficient magnitude seen in any partial product. The final
    /// coefficients are small after cancellation, but rounding scales with
    /// what they canceled from.
    peak_intermediate: f64,
}

/// One matrix entry of a partial product: homogeneous of degree `deg` in
/// `(ε, w)` with Laurent coefficients in `e^{iα}`, same layout as
/// [`LeakagePolynomial::terms`].
#[derive(Clone)]
struct EntryPoly {
    deg: usize,
    terms: Vec<Vec<Complex64>>,
}

impl EntryPoly {
    fn zero(deg: usize) -> Self {
        Self {
            deg,
            terms: (0..=deg).map(|d| vec![Complex64::default(); d + 1]).collect(),
        }
    }

    fn one() -> Self {
        let mut p = Self::zero(0);
        p.terms[0][0] = Complex64::new(1.0, 0.0);
        p
    }

    /// Accumulate `scale_w · w · p` into `self` (degree of self = p.deg + 1).
    fn add_w_mul(&mut self, p: &EntryPoly, scale: Complex64) {
        for d in 0..=p.deg {
            for j in 0..=d {
                self.terms[d][j] += scale * p.terms[d][j];
            }
        }
    }

    /// Accumulate `ε e^{±iα} · p` into `self`.
    fn add_eps_mul(&mut self, p: &EntryPoly, raise_harmonic: bool) {
        for d in 0..=p.deg {
            for j in 0..=d {
                // (d, h=2j-d) -> (d+1, h±1)
                let j_new = if raise_harmonic { j + 1 } else { j };
                self.terms[d + 1][j_new] += p.terms[d][j];
            }
        }
    }
}

impl LeakagePolynomial {
    /// Fold the pulse factors of `seq` into the exact U12 expansion.
    pub fn build(seq: &PhaseSequence) -> Self {
        // Matrix entries of the partial product, row-major.
        let mut entries = [
            EntryPoly::one(),
            EntryPoly::zero(0),
            EntryPoly::zero(0),
            EntryPoly::one(),
        ];
        let mut peak: f64 = 1.0;
        for (k, &phi) in seq.phases().iter().enumerate() {
            let ephi = Complex64::from_polar(1.0, phi);
            let mut next = [
                EntryPoly::zero(k + 1),
                EntryPoly::zero(k + 1),
                EntryPoly::zero(k + 1),
                EntryPoly::zero(k + 1),
            ];
            // New = F · Old with F = [[ε e^{iα}, w e^{iφ}], [-w e^{-iφ}, ε e^{-iα}]].
            for col in 0..2 {
                let top = &entries[col];
                let bot = &entries[2 + col];
                next[col].add_eps_mul(top, true);
                next[col].add_w_mul(bot, ephi);
                next[2 + col].add_w_mul(top, -ephi.conj());
                next[2 + col].add_eps_mul(bot, false);
            }
            entries = next;
            for e in &entries {
                for row in &e.terms {
                    for c in row {
                        peak = peak.max(c.norm());
                    }
                }
            }
        }
        Self {
            n_pulses: seq.n_pulses(),
            terms: entries[1].terms.clone(),
            peak_intermediate: peak,
        }
    }

    /// Estimated rounding scale of the stored basis coefficients: the peak
    /// intermediate magnitude times the pulse count, in units of machine
    /// epsilon.
    pub fn noise_floor(&self) -> f64 {
        self.peak_intermediate * self.n_pulses as f64 * f64::EPSILON
    }

    /// Estimated rounding scale of an extracted Taylor coefficient: the
    /// basis-coefficient floor amplified by the binomial weights that the
    /// combination applies at this order.
    pub fn taylor_noise_floor(&self, order: usize) -> f64 {
        let mut weight_sum = 0.0;
        for d in (1..=order.min(self.terms.len().saturating_sub(1))).step_by(2) {
            if (order - d) % 2 != 0 {
                continue;
            }
            let q = (order - d) / 2;
            let s = (self.n_pulses - d) as f64 / 2.0;
            weight_sum += generalized_binomial(s, q).abs();
        }
        self.noise_floor() * weight_sum.max(1.0)
    }

    pub fn n_pulses(&self) -> usize {
        self.n_pulses
    }

    /// Evaluate U12 at a concrete `(ε, α)`.
    pub fn u12(&self, eps: f64, alpha: f64) -> Complex64 {
        let w = (1.0 - eps * eps).max(0.0).sqrt();
        let n = self.n_pulses;
        let mut total = Complex64::default();
        for (d, row) in self.terms.iter().enumerate() {
            let scale = eps.powi(d as i32) * w.powi((n - d) as i32);
            if scale == 0.0 {
                continue;
            }
            let mut row_sum = Complex64::default();
            for (j, &c) in row.iter().enumerate() {
                if c != Complex64::default() {
                    let h = 2.0 * j as f64 - d as f64;
                    row_sum += c * Complex64::from_polar(1.0, h * alpha);
                }
            }
            total += row_sum * scale;
        }
        total
    }

    /// Taylor coefficient of `ε^order` in U12(ε, α) at fixed α, combining the
    /// basis rows with the binomial series of `w^{N-d} = (1-ε²)^{(N-d)/2}`.
    pub fn taylor_coefficient(&self, order: usize, alpha: f64) -> Complex64 {
        let mut total = Complex64::default();
        for (d, row) in self.terms.iter().enumerate() {
            if d > order || (order - d) % 2 != 0 {
                continue;
            }
            let q = (order - d) / 2;
            let s = (self.n_pulses - d) as f64 / 2.0;
            let sign = if q % 2 == 0 { 1.0 } else { -1.0 };
            let weight = sign * generalized_binomial(s, q);
            for (j, &c) in row.iter().enumerate() {
                if c != Complex64::default() {
                    let h = 2.0 * j as f64 - d as f64;
                    total += weight * c * Complex64::from_polar(1.0, h * alpha);
                }
            }
        }
        total
    }

    /// Largest basis-coefficient magnitude.
    pub fn max_coefficient(&self) -> f64 {
        self.terms
            .iter()
            .flatten()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    /// Copy with every basis coefficient below `threshold` replaced by zero.
    pub fn cleaned(&self, threshold: f64) -> Self {
        Self {
            n_pulses: self.n_pulses,
            peak_intermediate: self.peak_intermediate,
            terms: self
                .terms
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|&c| if c.norm() < threshold { Complex64::default() } else { c })
                        .collect()
                })
                .collect(),
        }
    }
}

fn generalized_binomial(s: f64, q: usize) -> f64 {
    let mut num = 1.0;
    for i in 0..q {
        num *= s - i as f64;
    }
    let mut den = 1.0;
    for i in 1..=q {
        den *= i as f64;
    }
    num / den
}

/// Harmonic content of one Taylor coefficient `C_order(α)`: complex
/// amplitudes of `e^{ihα}` obtained by a discrete Fourier transform over a
/// uniform α grid.
#[derive(Debug, Clone, Serialize)]
pub struct HarmonicSpectrum {
    pub order: usize,
    /// Amplitude of `e^{ihα}` for every |h| ≤ order. Only odd h can be
    /// nonzero for an even pulse train.
    pub coefficients: BTreeMap<i32, Complex64>,
    /// Estimated rounding scale of the extracted coefficients.
    pub noise_floor: f64,
}

impl HarmonicSpectrum {
    /// Largest harmonic amplitude in the spectrum.
    pub fn max_amplitude(&self) -> f64 {
        self.coefficients
            .values()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }
}

/// Extract the harmonic amplitudes of the `ε^order` coefficient of U12.
///
/// Samples `C_order(α)` on `alpha_samples` uniform points of `[0, 2π)` and
/// Fourier-transforms over α. Requires `alpha_samples ≥ 4·order + 1` so the
/// spectrum is alias-free with margin.
pub fn harmonic_coefficients(
    seq: &PhaseSequence,
    order: usize,
    alpha_samples: usize,
) -> Result<HarmonicSpectrum, VerifyError> {
    if order == 0 || order % 2 == 0 {
        return Err(VerifyError::InvalidOrder(order));
    }
    let needed = 4 * order + 1;
    if alpha_samples < needed {
        return Err(VerifyError::TooFewAlphaSamples {
            order,
            needed,
            got: alpha_samples,
        });
    }
    let poly = LeakagePolynomial::build(seq);
    Ok(spectrum_from_poly(&poly, order, alpha_samples))
}

fn spectrum_from_poly(
    poly: &LeakagePolynomial,
    order: usize,
    alpha_samples: usize,
) -> HarmonicSpectrum {
    let m = alpha_samples;
    let samples: Vec<Complex64> = (0..m)
        .map(|j| {
            let alpha = 2.0 * std::f64::consts::PI * j as f64 / m as f64;
            poly.taylor_coefficient(order, alpha)
        })
        .collect();
    // Include two harmonics beyond the order so tests can show that nothing
    // lives there, staying inside the alias-free band of the sample count.
    let h_max = (order as i32 + 2).min((m as i32 - 1) / 2);
    let mut coefficients = BTreeMap::new();
    for h in -h_max..=h_max {
        let mut acc = Complex64::default();
        for (j, &v) in samples.iter().enumerate() {
            let ang = -2.0 * std::f64::consts::PI * (h as f64) * (j as f64) / m as f64;
            acc += v * Complex64::from_polar(1.0, ang);
        }
        coefficients.insert(h, acc / m as f64);
    }
    let noise_floor = poly.taylor_noise_floor(order);
    if noise_floor > 1e-9 {
        log::warn!(
            "coefficient extraction noise floor {noise_floor:.3e} exceeds 1e-9; \
             order-{order} amplitudes may be unreliable"
        );
    }
    HarmonicSpectrum {
        order,
        coefficients,
        noise_floor,
    }
}

/// Pass/fail record for one expansion order.
#[derive(Debug, Clone, Serialize)]
pub struct OrderCheck {
    pub order: usize,
    /// Largest harmonic amplitude of `C_order`.
    pub max_harmonic_amplitude: f64,
    /// Largest |C_order(α)| over the α grid (uniformity, not an average).
    pub max_over_alpha: f64,
    /// Effective amplitude threshold this order was judged against. Equals
    /// [`CANCELLATION_THRESHOLD`] unless the extraction noise floor of a
    /// long sequence exceeds it, in which case the floor takes over (the
    /// check then means "consistent with zero at double precision").
    pub threshold: f64,
    pub pass: bool,
}

/// Result of walking the cancellation ladder of a sequence.
#[derive(Debug, Clone, Serialize)]
pub struct LadderReport {
    pub n_pulses: usize,
    pub family: String,
    pub target_phase: f64,
    /// Predicted universality order m = ⌊N/4⌋.
    pub predicted_order: usize,
    /// Leading surviving power of ε, `2m + 1`.
    pub predicted_exponent: usize,
    /// True when the pulse count exceeds the range where the phase law has
    /// been confirmed, so the predicted order is conjectured.
    pub conjectured: bool,
    pub per_order: Vec<OrderCheck>,
    /// Check that the first surviving order is genuinely nonzero.
    pub surviving_order: OrderCheck,
    pub pass: bool,
    /// First (order, harmonic) that failed cancellation, if any.
    pub first_failure: Option<(usize, i32)>,
}

/// Walk the cancellation ladder of `seq`: every odd order `1, 3, …, 2m-1`
/// must vanish below [`CANCELLATION_THRESHOLD`] uniformly in α, and the next
/// order `2m+1` must exceed [`NONVANISHING_THRESHOLD`].
pub fn verify_cancellation_ladder(seq: &PhaseSequence) -> LadderReport {
    verify_cancellation_ladder_with(seq, None, None)
}

/// [`verify_cancellation_ladder`] with an optional cap on the highest
/// checked order and an explicit α sample count.
pub fn verify_cancellation_ladder_with(
    seq: &PhaseSequence,
    max_order: Option<usize>,
    alpha_samples: Option<usize>,
) -> LadderReport {
    let m = seq.predicted_order();
    let surviving = 2 * m + 1;
    let alpha_samples = alpha_samples
        .unwrap_or(0)
        .max(4 * surviving + 1)
        .max(64);
    let top_vanishing = max_order.unwrap_or(2 * m).min(2 * m);
    let poly = LeakagePolynomial::build(seq);

    let mut per_order = Vec::new();
    let mut first_failure = None;
    for order in (1..=top_vanishing).step_by(2) {
        let spectrum = spectrum_from_poly(&poly, order, alpha_samples);
        let threshold = CANCELLATION_THRESHOLD.max(poly.taylor_noise_floor(order));
        let check = order_check(&poly, &spectrum, alpha_samples, threshold, |amp, thr| {
            amp < thr
        });
        if !check.pass && first_failure.is_none() {
            let worst = spectrum
                .coefficients
                .iter()
                .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
                .map(|(&h, _)| h)
                .unwrap_or(0);
            first_failure = Some((order, worst));
        }
        per_order.push(check);
    }

    let spectrum = spectrum_from_poly(&poly, surviving, alpha_samples);
    let surviving_order = order_check(
        &poly,
        &spectrum,
        alpha_samples,
        NONVANISHING_THRESHOLD,
        |amp, thr| amp > thr,
    );

    let pass = per_order.iter().all(|c| c.pass) && surviving_order.pass;
    LadderReport {
        n_pulses: seq.n_pulses(),
        family: seq.family().to_string(),
        target_phase: seq.target_phase(),
        predicted_order: m,
        predicted_exponent: surviving,
        conjectured: seq.order_is_conjectured(),
        per_order,
        surviving_order,
        pass,
        first_failure,
    }
}

fn order_check(
    poly: &LeakagePolynomial,
    spectrum: &HarmonicSpectrum,
    alpha_samples: usize,
    threshold: f64,
    accept: impl Fn(f64, f64) -> bool,
) -> OrderCheck {
    let max_over_alpha = (0..alpha_samples)
        .map(|j| {
            let alpha = 2.0 * std::f64::consts::PI * j as f64 / alpha_samples as f64;
            poly.taylor_coefficient(spectrum.order, alpha).norm()
        })
        .fold(0.0, f64::max);
    let max_harmonic_amplitude = spectrum.max_amplitude();
    let metric = max_harmonic_amplitude.max(max_over_alpha);
    OrderCheck {
        order: spectrum.order,
        max_harmonic_amplitude,
        max_over_alpha,
        threshold,
        pass: accept(metric, threshold),
    }
}

/// Result of fitting the leakage scaling exponent.
#[derive(Debug, Clone, Serialize)]
pub struct OrderEstimate {
    pub fitted_exponent: f64,
    pub predicted_exponent: usize,
    /// α maximizing |U12| at the largest sampled ε.
    pub worst_alpha: f64,
    /// RMS residual of the log-log fit.
    pub fit_residual: f64,
}

impl OrderEstimate {
    /// Fit agrees with the prediction within ±0.1.
    pub fn pass(&self) -> bool {
        (self.fitted_exponent - self.predicted_exponent as f64).abs() <= 0.1
    }
}

/// Default log-spaced ε grid for exponent fits.
pub fn default_eps_grid() -> Vec<f64> {
    log_spaced(1e-3, 3e-2, 12)
}

/// Default α grid (64 uniform points on `[0, 2π)`).
pub fn default_alpha_grid() -> Vec<f64> {
    (0..64)
        .map(|j| 2.0 * std::f64::consts::PI * j as f64 / 64.0)
        .collect()
}

/// `n` logarithmically spaced points from `lo` to `hi` inclusive.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (llo, lhi) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (llo + (lhi - llo) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Fit the scaling exponent of `max_α |U12(ε, α)|` against ε by least
/// squares in log-log coordinates.
///
/// Basis coefficients that vanish to rounding are zeroed first
/// ([`COEFF_CLEANING_THRESHOLD`]); without that step the ~1e-13 rounding
/// residue of the canceled low orders dominates the signal at small ε for
/// long sequences and corrupts the slope. Maximizing over α avoids the
/// isolated α values where the leading coefficient itself vanishes.
pub fn estimate_leakage_order(
    seq: &PhaseSequence,
    eps_grid: &[f64],
    alpha_grid: &[f64],
) -> Result<OrderEstimate, VerifyError> {
    if eps_grid.iter().any(|&e| !e.is_finite() || e <= 0.0) || eps_grid.len() < 2 {
        return Err(VerifyError::BadEpsGrid);
    }
    if alpha_grid.len() < 64 {
        return Err(VerifyError::TooFewAlphaPoints(alpha_grid.len()));
    }
    let min = eps_grid.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = eps_grid.iter().cloned().fold(0.0, f64::max);
    if max / min < 10.0 {
        return Err(VerifyError::FitRangeTooNarrow { min, max });
    }

    let poly = LeakagePolynomial::build(seq).cleaned(COEFF_CLEANING_THRESHOLD);

    let mut log_eps = Vec::with_capacity(eps_grid.len());
    let mut log_max = Vec::with_capacity(eps_grid.len());
    let mut worst_alpha = 0.0;
    let mut largest_eps = 0.0;
    for &eps in eps_grid {
        let mut best = 0.0;
        let mut best_alpha = 0.0;
        for &alpha in alpha_grid {
            let mag = poly.u12(eps, alpha).norm();
            if mag > best {
                best = mag;
                best_alpha = alpha;
            }
        }
        if best <= 0.0 {
            return Err(VerifyError::DegenerateLeakage);
        }
        if eps > largest_eps {
            largest_eps = eps;
            worst_alpha = best_alpha;
        }
        log_eps.push(eps.ln());
        log_max.push(best.ln());
    }

    let n = log_eps.len() as f64;
    let mean_x: f64 = log_eps.iter().sum::<f64>() / n;
    let mean_y: f64 = log_max.iter().sum::<f64>() / n;
    let sxx: f64 = log_eps.iter().map(|x| (x - mean_x).powi(2)).sum();
    let sxy: f64 = log_eps
        .iter()
        .zip(&log_max)
        .map(|(x, y)| (x - mean_x) * (y - mean_y))
        .sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let residual = (log_eps
        .iter()
        .zip(&log_max)
        .map(|(x, y)| (y - (slope * x + intercept)).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();

    Ok(OrderEstimate {
        fitted_exponent: slope,
        predicted_exponent: 2 * seq.predicted_order() + 1,
        worst_alpha,
        fit_residual: residual,
    })
}

/// Leakage samples over a grid, for diagnostics and external fits.
pub fn leakage_samples(
    seq: &PhaseSequence,
    eps_grid: &[f64],
    alpha_grid: &[f64],
) -> Result<Vec<LeakageSample>, VerifyError> {
    let mut out = Vec::with_capacity(eps_grid.len() * alpha_grid.len());
    for &eps in eps_grid {
        for &alpha in alpha_grid {
            let u = composite_from_parametrization(seq, eps, alpha)?;
            out.push(LeakageSample {
                eps,
                alpha,
                u12: u.u12,
            });
        }
    }
    Ok(out)
}
