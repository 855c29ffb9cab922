//! Damped Jaynes–Cummings qubit in a zero-temperature Lorentzian reservoir.
//!
//! Amplitudes are kept in the frame rotating at the qubit frequency; the
//! Schrödinger-frame phase `e^{−iω₀t}` is applied only when the reduced
//! state is built. With `δ = λ − iΔ` and `d = √(δ² − 2γ₀λ)`,
//!
//! ```text
//! c_e(t) = c_e(0) e^{−δt/2} [cosh(dt/2) + δ sinh(dt/2)/d]
//! ```

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::opalg::{pauli, ComplexMatrix};
use crate::qfi::{qfi_mixed, ParamState, QfiResult};

/// Excited amplitude of the `|+⟩` probe.
pub const PROBE_AMPLITUDE: f64 = FRAC_1_SQRT_2;

/// `|c_e|` at or below this makes `ċ_e / c_e` undefined.
pub const VANISHING_AMPLITUDE: f64 = 1e-12;

const SERIES_THRESHOLD: f64 = 1e-6;
const POSITIVITY_TOL: f64 = 1e-9;

/// Lorentzian reservoir and probe frequency.
///
/// `delta` is the detuning `ω₀ − ω_c`; the spectral density is centered on
/// the cavity frequency `ω_c`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReservoirParams {
    pub lambda: f64,
    pub gamma0: f64,
    pub delta: f64,
    pub omega0: f64,
    pub omega_c: f64,
}

impl ReservoirParams {
    pub fn new(lambda: f64, gamma0: f64, delta: f64, omega0: f64) -> Result<Self> {
        let p = Self { lambda, gamma0, delta, omega0, omega_c: omega0 - delta };
        p.validate()?;
        Ok(p)
    }

    pub fn from_cavity(lambda: f64, gamma0: f64, omega0: f64, omega_c: f64) -> Result<Self> {
        let p = Self { lambda, gamma0, delta: omega0 - omega_c, omega0, omega_c };
        p.validate()?;
        Ok(p)
    }

    /// `γ₀ = 0` is accepted: it is the decoupled qubit.
    pub fn validate(&self) -> Result<()> {
        let finite = [self.lambda, self.gamma0, self.delta, self.omega0, self.omega_c];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter { name: "reservoir", reason: "non-finite value".into() });
        }
        if self.lambda <= 0.0 {
            return Err(Error::InvalidParameter { name: "lambda", reason: format!("must be > 0, got {}", self.lambda) });
        }
        if self.gamma0 < 0.0 {
            return Err(Error::InvalidParameter { name: "gamma0", reason: format!("must be ≥ 0, got {}", self.gamma0) });
        }
        let mismatch = (self.delta - (self.omega0 - self.omega_c)).abs();
        if mismatch > 1e-12 * self.omega0.abs().max(1.0) {
            return Err(Error::InvalidParameter {
                name: "delta",
                reason: format!("differs from omega0 - omega_c by {mismatch:e}"),
            });
        }
        Ok(())
    }

    /// Moves the qubit frequency with the cavity fixed, so `Δ` follows `ω₀`.
    pub fn at_omega0_fixed_cavity(&self, omega0: f64) -> Self {
        Self { omega0, delta: omega0 - self.omega_c, ..*self }
    }

    /// Moves the qubit frequency and the cavity together, so `Δ` is fixed.
    pub fn at_omega0_fixed_detuning(&self, omega0: f64) -> Self {
        Self { omega0, omega_c: omega0 - self.delta, ..*self }
    }

    /// `δ = λ − iΔ`.
    pub fn rate(&self) -> C64 {
        C64::new(self.lambda, -self.delta)
    }

    /// Lorentzian spectral density `γ₀λ² / (2π((ω − ω_c)² + λ²))`.
    pub fn spectral_density(&self, omega: f64) -> f64 {
        let x = omega - self.omega_c;
        self.gamma0 * self.lambda * self.lambda / (2.0 * std::f64::consts::PI * (x * x + self.lambda * self.lambda))
    }

    /// Bath correlation function `f(s) = (γ₀λ/2) e^{−δs}` in the rotating frame.
    pub fn correlation(&self, s: f64) -> C64 {
        (-self.rate() * s).exp() * (0.5 * self.gamma0 * self.lambda)
    }
}

/// Principal branch of `√(δ² − 2γ₀λ)`: `Re d ≥ 0`, and `Im d ≥ 0` on ties.
pub fn complex_rate_d(p: &ReservoirParams) -> C64 {
    let delta = p.rate();
    let d = (delta * delta - 2.0 * p.gamma0 * p.lambda).sqrt();
    if d.re == 0.0 && d.im < 0.0 {
        -d
    } else {
        d
    }
}

/// `(cosh(dτ/2), sinh(dτ/2)/d)` with a series near `dτ = 0`.
pub(crate) fn cosh_shc(d: C64, tau: f64) -> (C64, C64) {
    let x = d * (0.5 * tau);
    if (d * tau).norm() < SERIES_THRESHOLD {
        let x2 = x * x;
        let ch = 1.0 + x2 / 2.0 + x2 * x2 / 24.0;
        let shc = (1.0 + x2 / 6.0 + x2 * x2 / 120.0) * (0.5 * tau);
        (ch, shc)
    } else {
        (x.cosh(), x.sinh() / d)
    }
}

/// Rotating-frame excited amplitude for `t ≥ 0`.
pub fn ce_closed_form(p: &ReservoirParams, t: f64, ce0: C64) -> C64 {
    ce_closed_form_with_d(p, complex_rate_d(p), t, ce0)
}

/// As [`ce_closed_form`] with an explicit root `d`; the result does not
/// depend on which square root is supplied.
pub fn ce_closed_form_with_d(p: &ReservoirParams, d: C64, t: f64, ce0: C64) -> C64 {
    let delta = p.rate();
    let (ch, shc) = cosh_shc(d, t);
    ce0 * (-delta * (0.5 * t)).exp() * (ch + delta * shc)
}

/// `ċ_e(t) = −c_e(0) γ₀λ e^{−δt/2} sinh(dt/2)/d`.
pub fn ce_dot_closed_form(p: &ReservoirParams, t: f64, ce0: C64) -> C64 {
    let d = complex_rate_d(p);
    let (_, shc) = cosh_shc(d, t);
    -ce0 * (p.gamma0 * p.lambda) * (-p.rate() * (0.5 * t)).exp() * shc
}

/// `ċ_e / c_e`, independent of `c_e(0)`.
fn log_derivative(p: &ReservoirParams, t: f64) -> Result<C64> {
    let c = ce_closed_form(p, t, C64::new(1.0, 0.0));
    let cd = ce_dot_closed_form(p, t, C64::new(1.0, 0.0));
    if c.norm() <= VANISHING_AMPLITUDE {
        // One Newton step places the zero; bracket it generously.
        let reach = if cd.norm() > 0.0 { 2.0 * c.norm() / cd.norm() } else { 0.0 };
        return Err(Error::AmplitudeVanished { t, bracket: ((t - reach).max(0.0), t + reach) });
    }
    Ok(cd / c)
}

/// `γ(t) = −2 Re[ċ_e / c_e]`.
pub fn decay_rate(p: &ReservoirParams, t: f64) -> Result<f64> {
    Ok(-2.0 * log_derivative(p, t)?.re)
}

/// `S(t) = −Im[ċ_e / c_e]`.
pub fn lamb_shift(p: &ReservoirParams, t: f64) -> Result<f64> {
    Ok(-log_derivative(p, t)?.im)
}

/// Source of rotating-frame excited amplitudes for a given reservoir.
pub trait AmplitudeProvider: Send + Sync {
    fn ce(&self, p: &ReservoirParams, t: f64) -> Result<C64>;
}

/// Uncontrolled closed-form dynamics.
#[derive(Clone, Copy, Debug)]
pub struct ClosedForm {
    pub ce0: C64,
}

impl Default for ClosedForm {
    fn default() -> Self {
        Self { ce0: C64::new(PROBE_AMPLITUDE, 0.0) }
    }
}

impl AmplitudeProvider for ClosedForm {
    fn ce(&self, p: &ReservoirParams, t: f64) -> Result<C64> {
        Ok(ce_closed_form(p, t, self.ce0))
    }
}

/// Reduced qubit state for the `|+⟩` probe, basis order `(|e⟩, |g⟩)`.
pub fn reduced_state_from_amplitude(omega0: f64, t: f64, ce: C64) -> Result<ComplexMatrix> {
    let pop = ce.norm_sqr();
    let coh = C64::new(0.0, -omega0 * t).exp() * ce * PROBE_AMPLITUDE;
    // Smallest eigenvalue of [[a, b], [b*, 1 − a]].
    let min_eig = 0.5 - ((pop - 0.5).powi(2) + coh.norm_sqr()).sqrt();
    if min_eig < -POSITIVITY_TOL {
        return Err(Error::PositivityViolation { min_eigenvalue: min_eig });
    }
    ComplexMatrix::from_vec(2, vec![C64::new(pop, 0.0), coh, coh.conj(), C64::new(1.0 - pop, 0.0)])
}

pub fn reduced_state(p: &ReservoirParams, t: f64, ce_fn: &dyn AmplitudeProvider) -> Result<ComplexMatrix> {
    reduced_state_from_amplitude(p.omega0, t, ce_fn.ce(p, t)?)
}

/// How the estimated frequency `ω₀` enters the reduced state.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OmegaDependence {
    /// `Δ` fixed; `ω₀` only enters the `e^{±iω₀t}` phases. Exact derivative.
    PhaseOnly,
    /// `ω_c` fixed; `Δ = ω₀ − ω_c` moves with `ω₀`. Finite differences.
    #[default]
    Full,
}

/// `ρ_S(ω₀, t)` as a parameterized family around `p.omega0`.
pub fn reduced_family<'a>(
    p: ReservoirParams,
    provider: &'a dyn AmplitudeProvider,
    mode: OmegaDependence,
) -> ParamState<'a> {
    let family = move |w: f64, t: f64| {
        let q = match mode {
            OmegaDependence::PhaseOnly => p.at_omega0_fixed_detuning(w),
            OmegaDependence::Full => p.at_omega0_fixed_cavity(w),
        };
        reduced_state(&q, t, provider)
    };
    let state = ParamState::new(family, p.omega0);
    match mode {
        OmegaDependence::PhaseOnly => state.with_phase_generator(pauli::sigma_z().scale(C64::new(0.5, 0.0))),
        OmegaDependence::Full => state,
    }
}

/// QFI of the reduced state at each grid time, evaluated in parallel.
pub fn qfi_trajectory(
    p: &ReservoirParams,
    provider: &dyn AmplitudeProvider,
    grid: &[f64],
    mode: OmegaDependence,
) -> Result<Vec<(f64, QfiResult)>> {
    p.validate()?;
    check_grid(grid)?;
    let state = reduced_family(*p, provider, mode);
    grid.par_iter().map(|&t| Ok((t, qfi_mixed(&state, t)?))).collect()
}

pub(crate) fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::InvalidParameter { name: "grid", reason: "times must be finite and ≥ 0".into() });
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter { name: "grid", reason: "times must be ascending".into() });
    }
    Ok(())
}

/// `n` evenly spaced points from `t_min` to `t_max` inclusive.
pub fn uniform_grid(t_min: f64, t_max: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![t_min],
        _ => {
            let step = (t_max - t_min) / (n - 1) as f64;
            (0..n).map(|k| if k + 1 == n { t_max } else { t_min + step * k as f64 }).collect()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AmplitudeSource {
    ClosedForm,
    Volterra,
    AuxOde,
    DiscreteModes,
}

/// Sampled `c_e(t)` with its provenance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeTrajectory {
    pub times: Vec<f64>,
    pub ce: Vec<C64>,
    pub source: AmplitudeSource,
}

impl AmplitudeTrajectory {
    pub fn new(times: Vec<f64>, ce: Vec<C64>, source: AmplitudeSource) -> Result<Self> {
        if times.len() != ce.len() {
            return Err(Error::DimensionMismatch { expected: times.len(), found: ce.len() });
        }
        check_grid(&times)?;
        if let Some((k, c)) = ce.iter().enumerate().find(|(_, c)| c.norm() > 1.0 + 1e-9) {
            return Err(Error::InvalidParameter {
                name: "ce",
                reason: format!("|c_e| = {} > 1 at t = {}", c.norm(), times[k]),
            });
        }
        Ok(Self { times, ce, source })
    }

    pub fn closed_form(p: &ReservoirParams, times: Vec<f64>, ce0: C64) -> Result<Self> {
        let ce = times.iter().map(|&t| ce_closed_form(p, t, ce0)).collect();
        Self::new(times, ce, AmplitudeSource::ClosedForm)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Largest `|c − c_ref(t)| / |c_ref(t)|` over samples with `t ≤ t_max`.
    pub fn max_relative_error<F: Fn(f64) -> C64>(&self, reference: F, t_max: f64) -> f64 {
        self.times
            .iter()
            .zip(&self.ce)
            .filter(|(t, _)| **t <= t_max)
            .map(|(&t, &c)| {
                let r = reference(t);
                (c - r).norm() / r.norm()
            })
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qfi::qfi_mixed;
    use proptest::prelude::*;

    fn fig() -> ReservoirParams {
        ReservoirParams::new(0.5, 5.0, 1.5, 10.0).unwrap()
    }

    fn probe() -> C64 {
        C64::new(PROBE_AMPLITUDE, 0.0)
    }

    #[test]
    fn rate_d_examples() {
        let free = ReservoirParams::new(0.5, 0.0, 0.0, 10.0).unwrap();
        assert!((complex_rate_d(&free) - C64::new(0.5, 0.0)).norm() < 1e-15);

        let d = complex_rate_d(&fig());
        assert!((d * d - C64::new(-7.0, -1.5)).norm() < 1e-12);
        assert!(d.re >= 0.0);

        let strong = ReservoirParams::new(0.5, 5.0, 0.0, 10.0).unwrap();
        let d = complex_rate_d(&strong);
        assert!(d.re.abs() < 1e-15 && d.im > 0.0);
        assert!((d.im - (2.0f64 * 5.0 * 0.5 - 0.25).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(ReservoirParams::new(0.0, 1.0, 0.0, 1.0).is_err());
        assert!(ReservoirParams::new(1.0, -1.0, 0.0, 1.0).is_err());
        let mut p = fig();
        p.delta += 1e-3;
        assert!(p.validate().is_err());
    }

    #[test]
    fn closed_form_initial_and_decoupled() {
        assert_eq!(ce_closed_form(&fig(), 0.0, probe()), probe());
        let free = ReservoirParams::new(0.5, 0.0, 1.5, 10.0).unwrap();
        for t in [0.3, 2.0, 9.0] {
            assert!((ce_closed_form(&free, t, probe()) - probe()).norm() < 1e-14);
        }
    }

    #[test]
    fn critical_damping_uses_series() {
        // Δ = 0, γ₀ = λ/2 puts d exactly at zero: c = e^{−λt/2}(1 + λt/2).
        let p = ReservoirParams::new(0.8, 0.4, 0.0, 10.0).unwrap();
        assert_eq!(complex_rate_d(&p), C64::new(0.0, 0.0));
        for t in [0.0, 0.5, 3.0] {
            let want = (-0.4f64 * t).exp() * (1.0 + 0.4 * t);
            assert!((ce_closed_form(&p, t, C64::new(1.0, 0.0)).re - want).abs() < 1e-14);
        }
        // Continuity through the threshold.
        let near = ReservoirParams::new(0.8, 0.4 + 1e-13, 0.0, 10.0).unwrap();
        let a = ce_closed_form(&near, 2.0, C64::new(1.0, 0.0));
        let b = ce_closed_form(&p, 2.0, C64::new(1.0, 0.0));
        assert!((a - b).norm() < 1e-10);
    }

    #[test]
    fn decay_rate_and_shift_vanish_at_origin_and_without_coupling() {
        assert_eq!(decay_rate(&fig(), 0.0).unwrap(), 0.0);
        assert_eq!(lamb_shift(&fig(), 0.0).unwrap(), 0.0);
        let free = ReservoirParams::new(0.5, 0.0, 1.5, 10.0).unwrap();
        for t in [0.1, 1.0, 7.0] {
            assert_eq!(decay_rate(&free, t).unwrap(), 0.0);
        }
    }

    #[test]
    fn decay_rate_turns_negative() {
        let p = fig();
        let min = uniform_grid(0.0, 10.0, 2001)
            .into_iter()
            .map(|t| decay_rate(&p, t).unwrap())
            .fold(f64::INFINITY, f64::min);
        assert!(min < 0.0, "min decay rate {min}");
    }

    #[test]
    fn resonant_real_regime_has_no_shift() {
        let p = ReservoirParams::new(2.0, 0.3, 0.0, 10.0).unwrap();
        for t in [0.2, 1.0, 4.0] {
            assert_eq!(lamb_shift(&p, t).unwrap(), 0.0);
        }
    }

    #[test]
    fn lamb_shift_matches_phase_derivative() {
        let p = fig();
        let h = 1e-5;
        let arg = |t: f64| ce_closed_form(&p, t, probe()).arg();
        let fd = (arg(1.0 + h) - arg(1.0 - h)) / (2.0 * h);
        assert!((lamb_shift(&p, 1.0).unwrap() + fd).abs() < 1e-6);
    }

    #[test]
    fn vanishing_amplitude_reports_bracket() {
        // Resonant, strongly coupled: c_e is real and crosses zero.
        let p = ReservoirParams::new(0.5, 5.0, 0.0, 10.0).unwrap();
        let grid = uniform_grid(0.0, 3.0, 30001);
        let c = |t: f64| ce_closed_form(&p, t, C64::new(1.0, 0.0)).re;
        let k = grid.windows(2).position(|w| c(w[0]) * c(w[1]) <= 0.0).unwrap();
        let (mut a, mut b) = (grid[k], grid[k + 1]);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if c(a) * c(m) <= 0.0 { b = m } else { a = m }
        }
        match decay_rate(&p, a) {
            Err(Error::AmplitudeVanished { bracket, .. }) => assert!(bracket.0 <= a && a <= bracket.1),
            other => panic!("expected AmplitudeVanished, got {other:?}"),
        }
    }

    /// Adaptive Simpson quadrature.
    fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
        #[allow(clippy::too_many_arguments)]
        fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
            let m = 0.5 * (a + b);
            let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
            let (flm, frm) = (f(lm), f(rm));
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                return left + right + (left + right - whole) / 15.0;
            }
            rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
        let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        rec(f, a, b, fa, fm, fb, whole, tol, 40)
    }

    #[test]
    fn decay_rate_integrates_back_to_amplitude() {
        let p = fig();
        let gamma = |t: f64| decay_rate(&p, t).unwrap();
        for t in [0.5, 2.0, 5.0, 10.0] {
            let predicted = PROBE_AMPLITUDE * (-0.5 * integrate(&gamma, 0.0, t, 1e-11)).exp();
            let actual = ce_closed_form(&p, t, probe()).norm();
            assert!((predicted - actual).abs() < 1e-6, "t={t}: {predicted} vs {actual}");
        }
    }

    #[test]
    fn markovian_limit() {
        let p = ReservoirParams::new(50.0, 0.5, 0.0, 10.0).unwrap();
        for t in uniform_grid(0.0, 5.0, 501) {
            let pop = ce_closed_form(&p, t, probe()).norm_sqr();
            let markov = 0.5 * (-0.5 * t).exp();
            assert!((pop / markov - 1.0).abs() < 0.02, "t={t}");
        }
    }

    #[test]
    fn reduced_state_examples() {
        let p = fig();
        let rho = reduced_state(&p, 0.0, &ClosedForm::default()).unwrap();
        let plus = ComplexMatrix::projector(&pauli::plus());
        assert!(rho.max_abs_diff(&plus) < 1e-15);

        let decayed = reduced_state_from_amplitude(10.0, 1.0, C64::new(0.0, 0.0)).unwrap();
        assert!(decayed.max_abs_diff(&ComplexMatrix::diagonal(&[C64::new(0.0, 0.0), C64::new(1.0, 0.0)])) < 1e-15);

        let rho = reduced_state(&p, 2.0, &ClosedForm::default()).unwrap();
        assert!((&rho * &rho).trace().re < 1.0 - 1e-3);
        crate::qfi::validate_density(&rho).unwrap();
    }

    #[test]
    fn reduced_state_rejects_overfull_amplitude() {
        let err = reduced_state_from_amplitude(1.0, 0.0, C64::new(0.9, 0.0)).unwrap_err();
        assert!(matches!(err, Error::PositivityViolation { .. }));
    }

    #[test]
    fn phase_only_qfi_is_two_t_squared_population() {
        let p = fig();
        let provider = ClosedForm::default();
        let state = reduced_family(p, &provider, OmegaDependence::PhaseOnly);
        let t = 2.0;
        let f = qfi_mixed(&state, t).unwrap().value;
        let want = 2.0 * t * t * ce_closed_form(&p, t, probe()).norm_sqr();
        assert!((f - want).abs() < 1e-8, "{f} vs {want}");
    }

    #[test]
    fn noiseless_qfi_is_heisenberg_in_both_modes() {
        let p = ReservoirParams::new(0.5, 0.0, 1.5, 10.0).unwrap();
        let grid = uniform_grid(0.0, 10.0, 41);
        for mode in [OmegaDependence::PhaseOnly, OmegaDependence::Full] {
            for (t, r) in qfi_trajectory(&p, &ClosedForm::default(), &grid, mode).unwrap() {
                assert!((r.value - t * t).abs() < 1e-8, "{mode:?} t={t}: {}", r.value);
            }
        }
    }

    #[test]
    fn trajectory_rejects_unsorted_grid() {
        assert!(qfi_trajectory(&fig(), &ClosedForm::default(), &[1.0, 0.5], OmegaDependence::Full).is_err());
    }

    #[test]
    fn omega_shifts() {
        let p = fig();
        let q = p.at_omega0_fixed_cavity(10.5);
        assert_eq!((q.delta, q.omega_c), (2.0, p.omega_c));
        let q = p.at_omega0_fixed_detuning(10.5);
        assert_eq!((q.delta, q.omega_c), (1.5, 9.0));
    }

    #[test]
    fn grid_endpoints() {
        let g = uniform_grid(0.0, 10.0, 500);
        assert_eq!((g[0], g[499], g.len()), (0.0, 10.0, 500));
    }

    proptest! {
        #[test]
        fn closed_form_is_branch_invariant(
            lambda in 0.05f64..5.0, gamma0 in 0.0f64..10.0, delta in -5.0f64..5.0, t in 0.0f64..10.0,
        ) {
            let p = ReservoirParams::new(lambda, gamma0, delta, 10.0).unwrap();
            let d = complex_rate_d(&p);
            let plus = ce_closed_form_with_d(&p, d, t, probe());
            let minus = ce_closed_form_with_d(&p, -d, t, probe());
            prop_assert!((plus - minus).norm() <= 1e-10 * plus.norm().max(1.0));
        }

        #[test]
        fn amplitude_never_exceeds_initial_probe_bound(
            lambda in 0.05f64..5.0, gamma0 in 0.0f64..10.0, delta in -5.0f64..5.0, t in 0.0f64..20.0,
        ) {
            // The amplitude is a contraction of the single-excitation sector.
            let p = ReservoirParams::new(lambda, gamma0, delta, 10.0).unwrap();
            prop_assert!(ce_closed_form(&p, t, probe()).norm() <= PROBE_AMPLITUDE + 1e-9);
        }

        #[test]
        fn derivative_matches_finite_difference(
            lambda in 0.1f64..3.0, gamma0 in 0.0f64..6.0, delta in -3.0f64..3.0, t in 0.1f64..8.0,
        ) {
            let p = ReservoirParams::new(lambda, gamma0, delta, 10.0).unwrap();
            let h = 1e-5;
            let fd = (ce_closed_form(&p, t + h, probe()) - ce_closed_form(&p, t - h, probe())) / (2.0 * h);
            prop_assert!((fd - ce_dot_closed_form(&p, t, probe())).norm() <= 1e-6 * (1.0 + gamma0 * lambda));
        }
    }
}
