//! Quantum Fisher information for pure states, linear generators and
//! parameterized density-matrix families.
//!
//! Mixed-state QFI is evaluated in the eigenbasis `{λ_k, |ψ_k⟩}` of `ρ` as
//!
//! ```text
//! F = Σ_{k,l : λ_k+λ_l > ε} 2 |⟨ψ_k|∂ρ|ψ_l⟩|² / (λ_k + λ_l)
//! ```
//!
//! which contains both the classical (eigenvalue) and quantum (eigenvector)
//! contributions without differentiating eigenvalues.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::opalg::{self, eig_hermitian, ComplexMatrix};

/// Pairs with `λ_k + λ_l` at or below this are skipped.
pub const DEGENERACY_CUTOFF: f64 = 1e-10;

/// Tolerance for density-matrix validation (Hermiticity, trace, positivity).
pub const DENSITY_TOL: f64 = 1e-10;

/// Default relative finite-difference step.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

const NORM_TOL: f64 = 1e-10;

/// How `∂_ω ρ` is obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DerivMode {
    /// `∂_ω ρ = −i t [G, ρ]` for families `ρ(ω, t) = e^{−iωtG} ρ₀ e^{iωtG}`.
    AnalyticPhase,
    /// Fourth-order central differences with step `fd_step · max(1, |ω|)`.
    FiniteDifference,
}

type Family<'a> = dyn Fn(f64, f64) -> Result<ComplexMatrix> + Send + Sync + 'a;

/// A density matrix `ρ(ω, t)` evaluated at a fixed parameter value `omega`.
pub struct ParamState<'a> {
    rho_at: Box<Family<'a>>,
    pub omega: f64,
    pub deriv_mode: DerivMode,
    pub fd_step: f64,
    phase_generator: Option<ComplexMatrix>,
}

impl<'a> ParamState<'a> {
    /// Finite-difference family; `rho_at(ω, t)` must be deterministic.
    pub fn new<F>(rho_at: F, omega: f64) -> Self
    where
        F: Fn(f64, f64) -> Result<ComplexMatrix> + Send + Sync + 'a,
    {
        Self {
            rho_at: Box::new(rho_at),
            omega,
            deriv_mode: DerivMode::FiniteDifference,
            fd_step: DEFAULT_FD_STEP,
            phase_generator: None,
        }
    }

    /// Declares that `ω` enters only through `e^{−iωtG}` and switches to the
    /// analytic derivative.
    pub fn with_phase_generator(mut self, generator: ComplexMatrix) -> Self {
        self.phase_generator = Some(generator);
        self.deriv_mode = DerivMode::AnalyticPhase;
        self
    }

    pub fn with_deriv_mode(mut self, mode: DerivMode) -> Self {
        self.deriv_mode = mode;
        self
    }

    pub fn with_fd_step(mut self, step: f64) -> Self {
        self.fd_step = step;
        self
    }

    fn eval(&self, omega: f64, t: f64) -> Result<ComplexMatrix> {
        let rho = (self.rho_at)(omega, t)?;
        validate_density(&rho)?;
        Ok(rho)
    }

    pub fn rho(&self, t: f64) -> Result<ComplexMatrix> {
        self.eval(self.omega, t)
    }

    /// `∂_ω ρ` at `(omega, t)`.
    pub fn drho(&self, t: f64) -> Result<ComplexMatrix> {
        match self.deriv_mode {
            DerivMode::AnalyticPhase => {
                let g = self.phase_generator.as_ref().ok_or(Error::DerivativeUnavailable)?;
                let rho = self.rho(t)?;
                Ok(g.commutator(&rho).scale(C64::new(0.0, -t)))
            }
            DerivMode::FiniteDifference => {
                let h = self.fd_step * self.omega.abs().max(1.0);
                let w = self.omega;
                let p2 = self.eval(w + 2.0 * h, t)?;
                let p1 = self.eval(w + h, t)?;
                let m1 = self.eval(w - h, t)?;
                let m2 = self.eval(w - 2.0 * h, t)?;
                let num = &(&(&m2 - &p2) + &(&p1 * 8.0)) - &(&m1 * 8.0);
                Ok(&num * (1.0 / (12.0 * h)))
            }
        }
    }
}

/// Mixed-state QFI together with the weight discarded by the cutoff.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QfiResult {
    pub value: f64,
    pub dropped_weight: f64,
}

/// Checks Hermiticity, unit trace and positivity within [`DENSITY_TOL`].
pub fn validate_density(rho: &ComplexMatrix) -> Result<()> {
    let herm = rho.hermiticity_residual();
    if herm > DENSITY_TOL {
        return Err(Error::InvalidDensityMatrix { reason: format!("Hermiticity residual {herm:e}") });
    }
    let tr = rho.trace();
    if (tr - C64::new(1.0, 0.0)).norm() > DENSITY_TOL {
        return Err(Error::InvalidDensityMatrix { reason: format!("trace {tr}") });
    }
    let min = eig_hermitian(rho)?.values[0];
    if min < -DENSITY_TOL {
        return Err(Error::InvalidDensityMatrix { reason: format!("eigenvalue {min:e}") });
    }
    Ok(())
}

fn check_normalized(psi: &[C64]) -> Result<()> {
    let norm = opalg::norm(psi);
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized { norm });
    }
    Ok(())
}

/// `4(⟨∂ψ|∂ψ⟩ − |⟨ψ|∂ψ⟩|²)` for a normalized `ψ`.
pub fn qfi_pure(psi: &[C64], dpsi: &[C64]) -> Result<f64> {
    check_normalized(psi)?;
    if psi.len() != dpsi.len() {
        return Err(Error::DimensionMismatch { expected: psi.len(), found: dpsi.len() });
    }
    let overlap = opalg::inner(psi, dpsi);
    let f = 4.0 * (opalg::inner(dpsi, dpsi).re - overlap.norm_sqr());
    Ok(f.max(0.0))
}

/// `4t² Var[G]` in the initial state, the QFI of `e^{−iωtG}|ψ₀⟩`.
pub fn qfi_variance(generator: &ComplexMatrix, psi0: &[C64], t: f64) -> Result<f64> {
    check_normalized(psi0)?;
    if generator.dim() != psi0.len() {
        return Err(Error::DimensionMismatch { expected: generator.dim(), found: psi0.len() });
    }
    if !generator.is_hermitian(opalg::HERMITIAN_TOL) {
        return Err(Error::NonHermitian { residual: generator.hermiticity_residual() });
    }
    let g_psi = generator.apply(psi0);
    let mean = opalg::inner(psi0, &g_psi).re;
    let second = opalg::inner(&g_psi, &g_psi).re;
    Ok((4.0 * t * t * (second - mean * mean)).max(0.0))
}

/// QFI of a state `rho` with known derivative `drho`.
pub fn qfi_from_derivative(rho: &ComplexMatrix, drho: &ComplexMatrix) -> Result<QfiResult> {
    if rho.dim() != drho.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: drho.dim() });
    }
    let es = eig_hermitian(rho)?;
    let d = es.to_eigenbasis(drho);
    let n = rho.dim();
    let mut value = 0.0;
    let mut dropped = 0.0;
    for k in 0..n {
        for l in 0..n {
            let w = 2.0 * d[(k, l)].norm_sqr();
            let denom = es.values[k] + es.values[l];
            if denom > DEGENERACY_CUTOFF {
                value += w / denom;
            } else {
                dropped += w;
            }
        }
    }
    Ok(QfiResult { value, dropped_weight: dropped })
}

/// QFI of `state` at time `t`.
pub fn qfi_mixed(state: &ParamState<'_>, t: f64) -> Result<QfiResult> {
    let rho = state.rho(t)?;
    let drho = state.drho(t)?;
    qfi_from_derivative(&rho, &drho)
}

/// Symmetric logarithmic derivative `L` solving `2∂ρ = Lρ + ρL`.
#[derive(Clone, Debug)]
pub struct Sld {
    pub operator: ComplexMatrix,
    /// `ρ` has eigenvalues below the cutoff; `L` is set to zero on the
    /// kernel–kernel block, where it is not determined.
    pub rank_deficient: bool,
}

pub fn sld(rho: &ComplexMatrix, drho: &ComplexMatrix) -> Result<Sld> {
    validate_density(rho)?;
    if rho.dim() != drho.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: drho.dim() });
    }
    let herm = drho.hermiticity_residual();
    if herm > DENSITY_TOL * drho.max_abs().max(1.0) {
        return Err(Error::NonHermitian { residual: herm });
    }
    let tr = drho.trace().norm();
    if tr > DENSITY_TOL {
        return Err(Error::InvalidDensityMatrix { reason: format!("derivative has trace {tr:e}") });
    }

    let es = eig_hermitian(rho)?;
    let d = es.to_eigenbasis(drho);
    let n = rho.dim();
    let mut l_eig = ComplexMatrix::zeros(n);
    for k in 0..n {
        for l in 0..n {
            let denom = es.values[k] + es.values[l];
            if denom > DEGENERACY_CUTOFF {
                l_eig[(k, l)] = d[(k, l)] * (2.0 / denom);
            }
        }
    }
    let rank_deficient = es.values.iter().any(|&v| v < DEGENERACY_CUTOFF);
    let operator = &(&es.vectors * &l_eig) * &es.vectors.adjoint();
    Ok(Sld { operator, rank_deficient })
}
