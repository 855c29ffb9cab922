//! Independent numerical references for the closed forms.
//!
//! * [`volterra_ce`] marches the memory equation
//!   `ċ_e(t) = −s(t) ∫₀ᵗ f(t−τ) s(τ) c_e(τ) dτ` with trapezoidal history sums;
//! * [`aux_ode_ce`] integrates the equivalent local system
//!   `ċ_e = −(γ₀λ/2) z`, `ż = −δz + c_e` with RK4, flipping `z` at pulses;
//! * [`discrete_global_evolve`] integrates the Schrödinger equation of the
//!   qubit coupled to a finite set of bath modes, with the kicks acting
//!   directly on the wavefunction.
//!
//! `s(t) = (−1)^⌊t/T⌋` is the toggling-frame sign under σ_z π/2 kicks and is
//! identically 1 without control.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::ddt::PulseSchedule;
use crate::error::{Error, Result};
use crate::jcmodel::{AmplitudeSource, AmplitudeTrajectory, ReservoirParams, PROBE_AMPLITUDE};
use crate::opalg::ComplexMatrix;
use crate::qfi::{self, QfiResult};

/// Default RK4 step of the discrete-mode solver.
pub const GLOBAL_DT: f64 = 1e-3;

/// Largest tolerated `|1 − Σ|C|²|` in the discrete-mode solver.
pub const NORM_DRIFT_LIMIT: f64 = 1e-6;

const ALIGN_TOL: f64 = 1e-9;

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

fn probe() -> C64 {
    C64::new(PROBE_AMPLITUDE, 0.0)
}

/// Number of `dt` steps covering `[0, t_max]`; `t_max` must be a multiple of `dt`.
fn step_count(t_max: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter { name: "dt", reason: format!("must be > 0, got {dt}") });
    }
    if !(t_max >= 0.0 && t_max.is_finite()) {
        return Err(Error::InvalidParameter { name: "t_max", reason: format!("must be ≥ 0, got {t_max}") });
    }
    let n = (t_max / dt).round();
    if (n * dt - t_max).abs() > ALIGN_TOL * t_max.max(1.0) {
        return Err(Error::InvalidParameter { name: "t_max", reason: format!("{t_max} is not a multiple of dt = {dt}") });
    }
    Ok(n as usize)
}

/// Steps per pulse period, when the schedule's kicks are supported and
/// aligned to the grid.
fn steps_per_period(sched: Option<&PulseSchedule>, dt: f64) -> Result<Option<usize>> {
    let Some(s) = sched else { return Ok(None) };
    s.sign_flip_kick()?;
    let m = (s.period / dt).round();
    if m < 1.0 || (m * dt - s.period).abs() > ALIGN_TOL * s.period {
        return Err(Error::GridMisalignment { period: s.period, dt });
    }
    Ok(Some(m as usize))
}

/// Sign of the interval `(t_j, t_{j+1})`.
fn interval_sign(j: usize, per_period: Option<usize>) -> f64 {
    match per_period {
        Some(m) if (j / m) % 2 == 1 => -1.0,
        _ => 1.0,
    }
}

/// Trapezoidal Volterra march on the grid `t_j = j·dt`.
///
/// Each history sub-interval carries its own parity sign, so the scheme stays
/// second order across pulses. The `c_{n+1}` term of the new history sum is
/// solved for implicitly.
pub fn volterra_ce(p: &ReservoirParams, t_max: f64, dt: f64, sched: Option<&PulseSchedule>) -> Result<AmplitudeTrajectory> {
    p.validate()?;
    let mut limit = 1.0 / p.lambda;
    if p.gamma0 > 0.0 {
        limit = limit.min(1.0 / p.gamma0);
    }
    if let Some(s) = sched {
        limit = limit.min(s.period);
    }
    if dt > limit / 20.0 * (1.0 + 1e-12) {
        return Err(Error::StepTooLarge { reason: format!("dt = {dt} exceeds {:e}", limit / 20.0) });
    }
    let n_steps = step_count(t_max, dt)?;
    let per_period = steps_per_period(sched, dt)?;

    let f: Vec<C64> = (0..=n_steps).map(|k| p.correlation(k as f64 * dt)).collect();
    let half = 0.5 * dt;
    let mut c = Vec::with_capacity(n_steps + 1);
    // a_j = c_j·s_int(j) (left end of interval j), b_j = c_j·s_int(j−1) (right end of interval j−1).
    let mut a = Vec::with_capacity(n_steps + 1);
    let mut b = Vec::with_capacity(n_steps + 1);
    c.push(probe());
    a.push(probe() * interval_sign(0, per_period));
    b.push(zero());
    let mut history = zero();
    let implicit = 1.0 + dt * dt * f[0] / 4.0;

    for n in 0..n_steps {
        let sigma = interval_sign(n, per_period);
        // History at t_{n+1} without the unknown c_{n+1} term.
        let mut partial = zero();
        for j in 0..=n {
            partial += f[n + 1 - j] * a[j];
        }
        for j in 1..=n {
            partial += f[n + 1 - j] * b[j];
        }
        partial *= half;
        let next = (c[n] - half * sigma * (history + partial)) / implicit;
        if !next.is_finite() || next.norm() > 1.0 + 1e-6 {
            return Err(Error::StepTooLarge { reason: format!("|c_e| = {} at t = {}", next.norm(), (n + 1) as f64 * dt) });
        }
        history = partial + half * f[0] * sigma * next;
        c.push(next);
        a.push(next * interval_sign(n + 1, per_period));
        b.push(next * sigma);
    }
    let times = (0..=n_steps).map(|j| j as f64 * dt).collect();
    AmplitudeTrajectory::new(times, c, AmplitudeSource::Volterra)
}

/// RK4 integration of `(c_e, z)` on the grid `t_j = j·dt`, with `z → −z` at
/// pulse instants.
pub fn aux_ode_ce(p: &ReservoirParams, t_max: f64, dt: f64, sched: Option<&PulseSchedule>) -> Result<AmplitudeTrajectory> {
    p.validate()?;
    let n_steps = step_count(t_max, dt)?;
    let per_period = steps_per_period(sched, dt)?;
    let delta = p.rate();
    let g = 0.5 * p.gamma0 * p.lambda;
    let rhs = |c: C64, z: C64| (-g * z, -delta * z + c);

    let mut c = probe();
    let mut z = zero();
    let mut out = Vec::with_capacity(n_steps + 1);
    out.push(c);
    for n in 0..n_steps {
        if let Some(m) = per_period {
            if n > 0 && n % m == 0 {
                z = -z;
            }
        }
        let (k1c, k1z) = rhs(c, z);
        let (k2c, k2z) = rhs(c + 0.5 * dt * k1c, z + 0.5 * dt * k1z);
        let (k3c, k3z) = rhs(c + 0.5 * dt * k2c, z + 0.5 * dt * k2z);
        let (k4c, k4z) = rhs(c + dt * k3c, z + dt * k3z);
        c += dt / 6.0 * (k1c + 2.0 * k2c + 2.0 * k3c + k4c);
        z += dt / 6.0 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z);
        out.push(c);
    }
    let times = (0..=n_steps).map(|j| j as f64 * dt).collect();
    AmplitudeTrajectory::new(times, out, AmplitudeSource::AuxOde)
}

/// Finite set of bath modes `ω_k` with couplings `g_k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteModeBath {
    pub mode_freqs: Vec<f64>,
    pub couplings: Vec<C64>,
}

impl DiscreteModeBath {
    pub fn count(&self) -> usize {
        self.mode_freqs.len()
    }

    /// `Σ|g_k|²`.
    pub fn total_weight(&self) -> f64 {
        self.couplings.iter().map(|g| g.norm_sqr()).sum()
    }
}

/// `∫ J(ω) dω` over `[ω_c − window, ω_c + window]`: `(γ₀λ/π)·arctan(window/λ)`.
pub fn spectral_weight(p: &ReservoirParams, window: f64) -> f64 {
    p.gamma0 * p.lambda / std::f64::consts::PI * (window / p.lambda).atan()
}

/// Midpoint discretization of the Lorentzian over `ω_c ± window` into `k`
/// equal bins, `g_k = √(J(ω_k)Δω)`.
pub fn sample_bath(p: &ReservoirParams, k: usize, window: f64) -> Result<DiscreteModeBath> {
    p.validate()?;
    if k < 50 {
        return Err(Error::InvalidParameter { name: "k", reason: format!("need at least 50 modes, got {k}") });
    }
    if window.is_nan() || window < 10.0 * p.lambda {
        return Err(Error::InvalidParameter {
            name: "window",
            reason: format!("need at least 10λ = {}, got {window}", 10.0 * p.lambda),
        });
    }
    let dw = 2.0 * window / k as f64;
    let mode_freqs: Vec<f64> = (0..k).map(|j| p.omega_c - window + (j as f64 + 0.5) * dw).collect();
    let couplings = mode_freqs.iter().map(|&w| C64::new((p.spectral_density(w) * dw).sqrt(), 0.0)).collect();
    Ok(DiscreteModeBath { mode_freqs, couplings })
}

/// Schrödinger-picture amplitudes of `C_e|e,0⟩ + C_g|g,0⟩ + Σ C_k|g,1_k⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct GlobalState {
    pub t: f64,
    pub omega0: f64,
    pub ce: C64,
    pub cg: C64,
    pub ck: Vec<C64>,
    /// Product of the `U_ee` factors applied by kicks so far.
    pub kick_phase_e: C64,
}

impl GlobalState {
    pub fn norm_sqr(&self) -> f64 {
        self.ce.norm_sqr() + self.cg.norm_sqr() + self.ck.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    /// Excited amplitude in the frame rotating at `ω₀` and, under control, the
    /// toggling frame of the kicks.
    pub fn frame_ce(&self) -> C64 {
        self.ce * C64::new(0.0, 0.5 * self.omega0 * self.t).exp() / self.kick_phase_e
    }

    /// Lab-frame qubit marginal, basis order `(|e⟩, |g⟩)`. Under control it
    /// differs from the toggling-frame state by conjugation with the kicks
    /// applied so far.
    pub fn reduced_state(&self) -> ComplexMatrix {
        let bath: f64 = self.ck.iter().map(|c| c.norm_sqr()).sum();
        let coh = self.ce * self.cg.conj();
        ComplexMatrix::from_vec(
            2,
            vec![C64::new(self.ce.norm_sqr(), 0.0), coh, coh.conj(), C64::new(self.cg.norm_sqr() + bath, 0.0)],
        )
        .expect("2×2 data")
    }

    /// `Tr ρ_S² = 1 − 2|C_e|²Σ|C_k|²`, from the amplitudes directly.
    pub fn purity_from_amplitudes(&self) -> f64 {
        let bath: f64 = self.ck.iter().map(|c| c.norm_sqr()).sum();
        1.0 - 2.0 * self.ce.norm_sqr() * bath
    }

    /// Global state vector `(C_e, C_g, C_1, …, C_K)`.
    pub fn vector(&self) -> Vec<C64> {
        let mut v = Vec::with_capacity(self.ck.len() + 2);
        v.push(self.ce);
        v.push(self.cg);
        v.extend_from_slice(&self.ck);
        v
    }
}

/// RK4 integration of the single-excitation Schrödinger equation up to each
/// requested time (ascending), applying kicks at `kT < t`.
///
/// Integration runs on `x_e = e^{iω₀t/2}C_e`, `x_k = e^{iω₀t/2}C_k`:
/// `i ẋ_e = Σ g_k x_k`, `i ẋ_k = (ω_k − ω₀)x_k + g_k* x_e`; `C_g` only
/// carries its free phase and the kicks.
pub fn discrete_global_trajectory(
    bath: &DiscreteModeBath,
    p: &ReservoirParams,
    times: &[f64],
    sched: Option<&PulseSchedule>,
    dt: f64,
) -> Result<Vec<GlobalState>> {
    if bath.couplings.len() != bath.mode_freqs.len() {
        return Err(Error::DimensionMismatch { expected: bath.mode_freqs.len(), found: bath.couplings.len() });
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter { name: "dt", reason: format!("must be > 0, got {dt}") });
    }
    crate::jcmodel::check_grid(times)?;
    let kick = sched.map(|s| s.sign_flip_kick()).transpose()?;

    let detune: Vec<f64> = bath.mode_freqs.iter().map(|w| w - p.omega0).collect();
    let g = &bath.couplings;
    // `sign` = (kick factor on |g⟩)/(kick factor on |e⟩) = ±1.
    let deriv = |sign: f64, xe: C64, xk: &[C64], dxk: &mut [C64]| -> C64 {
        let mut acc = zero();
        for k in 0..xk.len() {
            acc += g[k] * xk[k];
            dxk[k] = C64::new(0.0, -1.0) * (detune[k] * xk[k] + sign * g[k].conj() * xe);
        }
        C64::new(0.0, -sign) * acc
    };

    let n = g.len();
    let mut xe = probe();
    let mut xk = vec![zero(); n];
    // Kick factors accumulated on the excited and ground/bath components.
    let mut phase_e = C64::new(1.0, 0.0);
    let mut phase_g = C64::new(1.0, 0.0);
    let mut sign = 1.0;
    let (mut k1, mut k2, mut k3, mut k4) = (vec![zero(); n], vec![zero(); n], vec![zero(); n], vec![zero(); n]);
    let mut tmp = vec![zero(); n];

    let mut now = 0.0;
    let mut next_pulse = 1u64;
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        loop {
            let pulse_t = sched.map(|s| next_pulse as f64 * s.period);
            let stop = match pulse_t {
                Some(tp) if tp < target => tp,
                _ => target,
            };
            let span = stop - now;
            if span > 0.0 {
                let steps = (span / dt).ceil().max(1.0) as usize;
                let h = span / steps as f64;
                for _ in 0..steps {
                    let e1 = deriv(sign, xe, &xk, &mut k1);
                    for k in 0..n {
                        tmp[k] = xk[k] + 0.5 * h * k1[k];
                    }
                    let e2 = deriv(sign, xe + 0.5 * h * e1, &tmp, &mut k2);
                    for k in 0..n {
                        tmp[k] = xk[k] + 0.5 * h * k2[k];
                    }
                    let e3 = deriv(sign, xe + 0.5 * h * e2, &tmp, &mut k3);
                    for k in 0..n {
                        tmp[k] = xk[k] + h * k3[k];
                    }
                    let e4 = deriv(sign, xe + h * e3, &tmp, &mut k4);
                    xe += h / 6.0 * (e1 + 2.0 * e2 + 2.0 * e3 + e4);
                    for k in 0..n {
                        xk[k] += h / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
                    }
                }
                let norm = xe.norm_sqr() + 0.5 + xk.iter().map(|c| c.norm_sqr()).sum::<f64>();
                let drift = (norm - 1.0).abs();
                if drift > NORM_DRIFT_LIMIT {
                    return Err(Error::NormDrift { t: stop, drift });
                }
            }
            now = stop;
            match (pulse_t, kick) {
                (Some(tp), Some((ue, ug))) if tp < target => {
                    // Lab amplitudes are (phase_e·x_e, phase_g·x_k); the
                    // coupling between them picks up phase_g/phase_e.
                    phase_e *= ue;
                    phase_g *= ug;
                    sign = -sign;
                    next_pulse += 1;
                }
                _ => break,
            }
        }
        let free = C64::new(0.0, -0.5 * p.omega0 * target).exp();
        out.push(GlobalState {
            t: target,
            omega0: p.omega0,
            ce: free * phase_e * xe,
            cg: free.conj() * phase_g * probe(),
            ck: xk.iter().map(|x| free * phase_g * x).collect(),
            kick_phase_e: phase_e,
        });
    }
    Ok(out)
}

/// Global amplitudes at time `t` with the default step.
pub fn discrete_global_evolve(
    bath: &DiscreteModeBath,
    p: &ReservoirParams,
    t: f64,
    sched: Option<&PulseSchedule>,
) -> Result<GlobalState> {
    Ok(discrete_global_trajectory(bath, p, &[t], sched, GLOBAL_DT)?.remove(0))
}

/// QFI of the global pure state and of its qubit marginal for `ω₀`, the bath
/// held fixed. Derivatives use the same five-point stencil as the reduced
/// QFI.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GlobalQfi {
    pub global: f64,
    pub reduced: QfiResult,
}

pub fn global_qfi(
    bath: &DiscreteModeBath,
    p: &ReservoirParams,
    t: f64,
    sched: Option<&PulseSchedule>,
) -> Result<GlobalQfi> {
    let h = qfi::DEFAULT_FD_STEP * p.omega0.abs().max(1.0);
    let at = |k: f64| discrete_global_evolve(bath, &p.at_omega0_fixed_cavity(p.omega0 + k * h), t, sched);
    let (m2, m1, c0, p1, p2) = (at(-2.0)?, at(-1.0)?, at(0.0)?, at(1.0)?, at(2.0)?);
    let stencil = |a: C64, b: C64, c: C64, d: C64| (a - d + 8.0 * (c - b)) / (12.0 * h);

    let psi = c0.vector();
    let vs = [m2.vector(), m1.vector(), p1.vector(), p2.vector()];
    let dpsi: Vec<C64> = (0..psi.len()).map(|i| stencil(vs[0][i], vs[1][i], vs[2][i], vs[3][i])).collect();
    let norm = crate::opalg::norm(&psi);
    let unit: Vec<C64> = psi.iter().map(|z| z / norm).collect();
    let dunit: Vec<C64> = dpsi.iter().map(|z| z / norm).collect();
    let global = qfi::qfi_pure(&unit, &dunit)?;

    let rs = [m2.reduced_state(), m1.reduced_state(), p1.reduced_state(), p2.reduced_state()];
    let mut drho = ComplexMatrix::zeros(2);
    for i in 0..2 {
        for j in 0..2 {
            drho[(i, j)] = stencil(rs[0][(i, j)], rs[1][(i, j)], rs[2][(i, j)], rs[3][(i, j)]);
        }
    }
    let reduced = qfi::qfi_from_derivative(&c0.reduced_state(), &drho)?;
    Ok(GlobalQfi { global, reduced })
}

/// Largest `| |c(t)| − |c_ref(t)| | / |c_ref(t)|` over `t ≤ t_max`.
pub fn max_modulus_deviation<F: Fn(f64) -> C64>(traj: &AmplitudeTrajectory, reference: F, t_max: f64) -> f64 {
    traj.times
        .iter()
        .zip(&traj.ce)
        .filter(|(t, _)| **t <= t_max)
        .map(|(&t, c)| {
            let r = reference(t).norm();
            (c.norm() - r).abs() / r
        })
        .fold(0.0, f64::max)
}

/// Bath-size ladder for the convergence study: fixed spacing `Δω = 0.1`,
/// window growing with `K`.
pub fn convergence_ladder() -> [(usize, f64); 3] {
    [(100, 5.0), (200, 10.0), (400, 20.0)]
}
