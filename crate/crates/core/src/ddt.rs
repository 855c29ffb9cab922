//! Dynamical decoupling by instantaneous kicks.
//!
//! A kick `U = exp(−iθ·axis)` applied at every `kT` (`k ≥ 1`) conjugates the
//! qubit's raising operator. For the σ_z, θ = π/2 kick, `Uσ₊U† = −σ₊`, so in
//! the toggling frame the bath kernel picks up the sign `s(t)s(τ)` with
//! `s(t) = (−1)^⌊t/T⌋`. Between pulses the amplitude obeys the uncontrolled
//! second-order equation; at a pulse `c_e` is continuous and `ċ_e` flips sign.
//!
//! The pair `(c_e, ċ_e)` sampled just before pulse `k` evolves as
//! `v_{k+1} = e^{−δT/2} M v_k` with
//!
//! ```text
//! M = [[C + δS/d, −2S/d], [(d² − δ²)S/(2d), δS/d − C]],   C = cosh(dT/2), S = sinh(dT/2)
//! ```
//!
//! `det M = −1`, and its eigenvalues are `η± = (δS ± K)/d` with
//! `K = √(d² + δ²S²)`. Writing the powers of `M` through `η±` gives the
//! closed form
//!
//! ```text
//! c_e(t) = c_e(0) e^{−δt/2} [A_n cosh(dτ/2) + B_n sinh(dτ/2)],   τ = t − nT
//! A_n = [(K + dC)η₊ⁿ + (K − dC)η₋ⁿ] / (2K)
//! B_n = [dδC(η₊ⁿ + η₋ⁿ) + (η₊ⁿ − η₋ⁿ)(Kδ − (d² − δ²)S)] / (2dK)
//! ```
//!
//! Pulses fire at `kT` for `k ≥ 1`; a pulse at exactly `t` has not fired yet
//! (left limit). A pulse at `t = 0` would act on `ċ_e(0) = 0` and is omitted.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::jcmodel::{self, cosh_shc, AmplitudeProvider, OmegaDependence, ReservoirParams, PROBE_AMPLITUDE};
use crate::opalg::{self, matexp, pauli, ComplexMatrix};
use crate::qfi::QfiResult;

/// `|K|` below this routes the closed form to the recurrence.
pub const DEGENERATE_K: f64 = 1e-10;

const UNITARY_TOL: f64 = 1e-10;

/// Kick sequence `exp(−i·kick_angle·axis)` every `period`.
#[derive(Clone, Debug, PartialEq)]
pub struct PulseSchedule {
    pub period: f64,
    pub axis: ComplexMatrix,
    pub kick_angle: f64,
}

impl PulseSchedule {
    pub fn new(period: f64, axis: ComplexMatrix, kick_angle: f64) -> Result<Self> {
        let s = Self { period, axis, kick_angle };
        s.validate()?;
        Ok(s)
    }

    /// σ_z kicks by π/2.
    pub fn sigma_z(period: f64) -> Result<Self> {
        Self::new(period, pauli::sigma_z(), std::f64::consts::FRAC_PI_2)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.period > 0.0 && self.period.is_finite()) {
            return Err(Error::InvalidParameter { name: "period", reason: format!("must be > 0, got {}", self.period) });
        }
        if !self.kick_angle.is_finite() {
            return Err(Error::InvalidParameter { name: "kick_angle", reason: "must be finite".into() });
        }
        if !self.axis.is_hermitian(opalg::HERMITIAN_TOL) {
            return Err(Error::NonHermitian { residual: self.axis.hermiticity_residual() });
        }
        Ok(())
    }

    pub fn kick_unitary(&self) -> Result<ComplexMatrix> {
        matexp(&self.axis, C64::new(0.0, -self.kick_angle))
    }

    /// Kick diagonal elements `(U_ee, U_gg)` when the kick flips the sign of
    /// σ₊, the case covered by the amplitude equations.
    pub fn sign_flip_kick(&self) -> Result<(C64, C64)> {
        let u = self.kick_unitary()?;
        if u.dim() != 2 || u[(0, 1)].norm() > UNITARY_TOL || u[(1, 0)].norm() > UNITARY_TOL {
            return Err(Error::UnsupportedKick);
        }
        let (ue, ug) = (u[(0, 0)], u[(1, 1)]);
        if (ue * ug.conj() + 1.0).norm() > UNITARY_TOL {
            return Err(Error::UnsupportedKick);
        }
        Ok((ue, ug))
    }

    /// Number of pulses fired by time `t` and the time since the last one,
    /// `τ ∈ (0, T]` for `t > 0`.
    pub fn interval(&self, t: f64) -> (u64, f64) {
        if t <= 0.0 {
            return (0, 0.0);
        }
        let mut n = (t / self.period).floor() as u64;
        let mut tau = t - n as f64 * self.period;
        if n > 0 && tau <= 0.0 {
            n -= 1;
            tau = self.period;
        }
        (n, tau)
    }
}

/// `(c_e, ċ_e)` just before pulse `n + 1`, i.e. at `t = nT` from the left,
/// after `n` pulses have acted on earlier intervals.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RecurrenceState {
    pub ce: C64,
    pub ce_dot: C64,
    pub n: u64,
}

impl RecurrenceState {
    pub fn initial(ce0: C64) -> Self {
        Self { ce: ce0, ce_dot: C64::new(0.0, 0.0), n: 0 }
    }
}

/// Transfer matrix entries `[[α, δ], [ε, β]]` evaluated after a time `tau`
/// inside an interval, with `S/d` taken through its series near `d = 0`.
fn transfer(p: &ReservoirParams, d: C64, tau: f64) -> [[C64; 2]; 2] {
    let delta = p.rate();
    let (ch, shc) = cosh_shc(d, tau);
    [
        [ch + delta * shc, -2.0 * shc],
        [(d * d - delta * delta) * shc * 0.5, delta * shc - ch],
    ]
}

/// Pre-pulse states for `n = 0, 1, …, n_max` by repeated multiplication.
pub fn recurrence_states(p: &ReservoirParams, sched: &PulseSchedule, ce0: C64, n_max: u64) -> Vec<RecurrenceState> {
    let d = jcmodel::complex_rate_d(p);
    let m = transfer(p, d, sched.period);
    let damp = (-p.rate() * (0.5 * sched.period)).exp();
    let mut out = Vec::with_capacity(n_max as usize + 1);
    let mut s = RecurrenceState::initial(ce0);
    out.push(s);
    for _ in 0..n_max {
        s = RecurrenceState {
            ce: damp * (m[0][0] * s.ce + m[0][1] * s.ce_dot),
            ce_dot: damp * (m[1][0] * s.ce + m[1][1] * s.ce_dot),
            n: s.n + 1,
        };
        out.push(s);
    }
    out
}

fn propagate_within(p: &ReservoirParams, d: C64, s: &RecurrenceState, tau: f64) -> C64 {
    let m = transfer(p, d, tau);
    (-p.rate() * (0.5 * tau)).exp() * (m[0][0] * s.ce + m[0][1] * s.ce_dot)
}

/// Controlled amplitude by interval-wise propagation; valid for any `K`.
pub fn ce_ddt_recurrence(p: &ReservoirParams, sched: &PulseSchedule, t: f64, ce0: C64) -> C64 {
    let (n, tau) = sched.interval(t);
    let last = *recurrence_states(p, sched, ce0, n).last().expect("at least the initial state");
    propagate_within(p, jcmodel::complex_rate_d(p), &last, tau)
}

/// `(Mⁿ)₁₁` and `(Mⁿ)₂₁` through the eigenvalues of `M`, in the `d`-free form
/// `η± = δs ± κ`, `s = S/d`, `κ = K/d`.
fn matrix_power_column(p: &ReservoirParams, d: C64, period: f64, n: u64) -> Result<(C64, C64)> {
    let delta = p.rate();
    let (ch, s) = cosh_shc(d, period);
    let kappa = (1.0 + delta * delta * s * s).sqrt();
    let k = d * kappa;
    if k.norm() < DEGENERATE_K {
        return Err(Error::DegenerateK { k_abs: k.norm(), d_abs: d.norm() });
    }
    let (ep, em) = (delta * s + kappa, delta * s - kappa);
    let (pp, pm) = (pow(ep, n), pow(em, n));
    let m11 = ((kappa + ch) * pp + (kappa - ch) * pm) / (2.0 * kappa);
    let m21 = (d * d - delta * delta) * s * 0.5 * (pp - pm) / (2.0 * kappa);
    Ok((m11, m21))
}

fn pow(z: C64, n: u64) -> C64 {
    match i32::try_from(n) {
        Ok(k) => z.powi(k),
        Err(_) => z.powf(n as f64),
    }
}

/// `(A_n, B_n)`; fails with `DegenerateK` when `|K| < 1e-10`.
pub fn ddt_coefficients(p: &ReservoirParams, sched: &PulseSchedule, n: u64) -> Result<(C64, C64)> {
    let d = jcmodel::complex_rate_d(p);
    let (m11, m21) = matrix_power_column(p, d, sched.period, n)?;
    Ok((m11, (p.rate() * m11 - 2.0 * m21) / d))
}

/// Controlled amplitude from the diagonalized transfer matrix.
pub fn ce_ddt_closed_form(p: &ReservoirParams, sched: &PulseSchedule, t: f64, ce0: C64) -> Result<C64> {
    sched.sign_flip_kick()?;
    let (n, tau) = sched.interval(t);
    let d = jcmodel::complex_rate_d(p);
    let (m11, m21) = matrix_power_column(p, d, sched.period, n)?;
    let (ch, shc) = cosh_shc(d, tau);
    // A_n cosh + B_n sinh with B_n sinh = (δ(Mⁿ)₁₁ − 2(Mⁿ)₂₁)·sinh/d.
    let bracket = m11 * ch + (p.rate() * m11 - 2.0 * m21) * shc;
    Ok(ce0 * (-p.rate() * (0.5 * t)).exp() * bracket)
}

/// Closed form, falling back to the recurrence when `M` is degenerate.
pub fn ce_ddt(p: &ReservoirParams, sched: &PulseSchedule, t: f64, ce0: C64) -> Result<C64> {
    match ce_ddt_closed_form(p, sched, t, ce0) {
        Err(Error::DegenerateK { .. }) => Ok(ce_ddt_recurrence(p, sched, t, ce0)),
        other => other,
    }
}

/// Amplitude source under a kick schedule.
#[derive(Clone, Debug)]
pub struct Controlled {
    pub schedule: PulseSchedule,
    pub ce0: C64,
}

impl Controlled {
    pub fn new(schedule: PulseSchedule) -> Result<Self> {
        schedule.sign_flip_kick()?;
        Ok(Self { schedule, ce0: C64::new(PROBE_AMPLITUDE, 0.0) })
    }
}

impl AmplitudeProvider for Controlled {
    fn ce(&self, p: &ReservoirParams, t: f64) -> Result<C64> {
        ce_ddt(p, &self.schedule, t, self.ce0)
    }
}

/// Control unitaries `U_C(kT) = Uᵏ` for `k = 0, …, n − 1`.
pub fn control_unitaries(sched: &PulseSchedule, n: usize) -> Result<Vec<ComplexMatrix>> {
    let u = sched.kick_unitary()?;
    let mut out = Vec::with_capacity(n);
    let mut acc = ComplexMatrix::identity(u.dim());
    for _ in 0..n {
        out.push(acc.clone());
        acc = &u * &acc;
    }
    Ok(out)
}

/// Averages of `H_S` and `H_SE` over the control frames:
/// `(1/n)Σ U_k H_S U_k†` and `(1/n)Σ (U_k⊗1) H_SE (U_k⊗1)†`.
pub fn effective_hamiltonians(
    h_s: &ComplexMatrix,
    h_se: &ComplexMatrix,
    controls: &[ComplexMatrix],
) -> Result<(ComplexMatrix, ComplexMatrix)> {
    if controls.is_empty() {
        return Err(Error::InvalidParameter { name: "controls", reason: "must be nonempty".into() });
    }
    let dim_s = h_s.dim();
    if h_se.dim() % dim_s != 0 {
        return Err(Error::DimensionMismatch { expected: dim_s, found: h_se.dim() });
    }
    let dim_e = h_se.dim() / dim_s;
    for m in [h_s, h_se] {
        if !m.is_hermitian(opalg::HERMITIAN_TOL) {
            return Err(Error::NonHermitian { residual: m.hermiticity_residual() });
        }
    }
    let id_e = ComplexMatrix::identity(dim_e);
    let mut s_eff = ComplexMatrix::zeros(dim_s);
    let mut se_eff = ComplexMatrix::zeros(h_se.dim());
    for u in controls {
        if u.dim() != dim_s {
            return Err(Error::DimensionMismatch { expected: dim_s, found: u.dim() });
        }
        u.ensure_unitary(UNITARY_TOL)?;
        s_eff = &s_eff + &h_s.conjugate_by(u);
        se_eff = &se_eff + &h_se.conjugate_by(&opalg::kron(u, &id_e)?);
    }
    let w = 1.0 / controls.len() as f64;
    Ok((&s_eff * w, &se_eff * w))
}

/// QFI of the reduced state under the kick schedule.
pub fn ddt_qfi_trajectory(
    p: &ReservoirParams,
    sched: &PulseSchedule,
    grid: &[f64],
    mode: OmegaDependence,
) -> Result<Vec<(f64, QfiResult)>> {
    let provider = Controlled::new(sched.clone())?;
    jcmodel::qfi_trajectory(p, &provider, grid, mode)
}
