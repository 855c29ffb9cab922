//! Checker for decoupled sensing on finite-dimensional Hamiltonians.
//!
//! Given `H = H_S ⊗ 1 + H_SE` on `H_S ⊗ H_E` and a mixed-unitary channel
//! `Φ(A) = Σ_k w_k U_k A U_k†` acting on the system, the signal survives
//! decoupling with an environment-free generator iff
//!
//! 1. `Φ(H_S)` is not proportional to the identity;
//! 2. `Tr{[Φ(H_S) − (Tr H_S/d)1] · Φ(⟨ψ|H_SE|ψ⟩_E)} = 0` for every `|ψ⟩_E`;
//! 3. `⟨i|Φ(⟨ψ|H_SE|ψ⟩_E)|i⟩` is the same for every eigenvector `|i⟩` of
//!    `Φ(H_S)`, for every `|ψ⟩_E`.
//!
//! Clauses 2 and 3 quantify over all environment states. Both reduce to finite
//! matrix identities, which are evaluated exactly: with `X = (Φ⊗1)(H_SE)` and
//! `G = Φ(H_S) − (Tr H_S/d)1`, clause 2 is `Tr_S[(G⊗1)X] = 0` and clause 3 is
//! equality of the blocks `B_ii = (⟨i|⊗1) X (|i⟩⊗1)`. Sampled environment
//! states corroborate the exact tests through an independent code path.
//!
//! In clause 3 "constant" is read as constant in `i` for each fixed `ψ`; the
//! constant may depend on `ψ`.

use std::fmt::Write as _;

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::opalg::{self, eig_hermitian, ComplexMatrix};

pub const DEFAULT_TOLERANCE: f64 = 1e-8;

/// Smallest number of Haar-random environment states per check.
pub const MIN_ENV_SAMPLES: usize = 20;

const UNITARY_TOL: f64 = 1e-10;
const WEIGHT_TOL: f64 = 1e-12;
const CLUSTER_GAP: f64 = 1e-9;

/// `Φ(A) = Σ_k w_k U_k A U_k†`.
#[derive(Clone, Debug, PartialEq)]
pub struct MixedUnitaryChannel {
    weights: Vec<f64>,
    unitaries: Vec<ComplexMatrix>,
}

impl MixedUnitaryChannel {
    pub fn new(weights: Vec<f64>, unitaries: Vec<ComplexMatrix>) -> Result<Self> {
        let bad = |reason: String| Err(Error::NotAChannel { reason });
        if weights.is_empty() || weights.len() != unitaries.len() {
            return bad(format!("{} weights for {} unitaries", weights.len(), unitaries.len()));
        }
        if let Some(w) = weights.iter().find(|w| w.is_nan() || **w < 0.0) {
            return bad(format!("negative weight {w}"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return bad(format!("weights sum to {total}"));
        }
        let dim = unitaries[0].dim();
        for (k, u) in unitaries.iter().enumerate() {
            if u.dim() != dim {
                return bad(format!("unitary {k} has dimension {} not {dim}", u.dim()));
            }
            let r = u.unitarity_residual();
            if r > UNITARY_TOL {
                return bad(format!("unitary {k} has residual {r:e}"));
            }
        }
        Ok(Self { weights, unitaries })
    }

    pub fn identity(dim: usize) -> Self {
        Self { weights: vec![1.0], unitaries: vec![ComplexMatrix::identity(dim)] }
    }

    pub fn dim(&self) -> usize {
        self.unitaries[0].dim()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn unitaries(&self) -> &[ComplexMatrix] {
        &self.unitaries
    }

    pub fn apply(&self, a: &ComplexMatrix) -> Result<ComplexMatrix> {
        if a.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: a.dim() });
        }
        let mut out = ComplexMatrix::zeros(a.dim());
        for (w, u) in self.weights.iter().zip(&self.unitaries) {
            out = &out + &(&a.conjugate_by(u) * *w);
        }
        Ok(out)
    }

    /// `(Φ ⊗ 1)(A)` for `A` on `H_S ⊗ H_E`.
    pub fn apply_on_system(&self, a: &ComplexMatrix, dim_e: usize) -> Result<ComplexMatrix> {
        let expected = self.dim() * dim_e;
        if a.dim() != expected {
            return Err(Error::DimensionMismatch { expected, found: a.dim() });
        }
        let id = ComplexMatrix::identity(dim_e);
        let mut out = ComplexMatrix::zeros(a.dim());
        for (w, u) in self.weights.iter().zip(&self.unitaries) {
            out = &out + &(&a.conjugate_by(&opalg::kron(u, &id)?) * *w);
        }
        Ok(out)
    }
}

/// `(⟨u| ⊗ 1) A (|w⟩ ⊗ 1)`, a `dim_e × dim_e` operator.
fn system_block(a: &ComplexMatrix, u: &[C64], w: &[C64], dim_s: usize, dim_e: usize) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(dim_e);
    for i in 0..dim_s {
        let ui = u[i].conj();
        if ui == C64::new(0.0, 0.0) {
            continue;
        }
        for j in 0..dim_s {
            let c = ui * w[j];
            if c == C64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..dim_e {
                for l in 0..dim_e {
                    out[(k, l)] += c * a[(i * dim_e + k, j * dim_e + l)];
                }
            }
        }
    }
    out
}

fn check_dims(h_se: &ComplexMatrix, dim_s: usize, dim_e: usize) -> Result<()> {
    if h_se.dim() != dim_s * dim_e {
        return Err(Error::DimensionMismatch { expected: dim_s * dim_e, found: h_se.dim() });
    }
    Ok(())
}

/// `⟨ψ|H_SE|ψ⟩_E`, a `dim_s × dim_s` operator.
pub fn env_contraction(h_se: &ComplexMatrix, psi_e: &[C64], dim_s: usize, dim_e: usize) -> Result<ComplexMatrix> {
    check_dims(h_se, dim_s, dim_e)?;
    if psi_e.len() != dim_e {
        return Err(Error::DimensionMismatch { expected: dim_e, found: psi_e.len() });
    }
    let norm = opalg::norm(psi_e);
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized { norm });
    }
    let mut out = ComplexMatrix::zeros(dim_s);
    for i in 0..dim_s {
        for j in 0..dim_s {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..dim_e {
                for l in 0..dim_e {
                    acc += psi_e[k].conj() * h_se[(i * dim_e + k, j * dim_e + l)] * psi_e[l];
                }
            }
            out[(i, j)] = acc;
        }
    }
    Ok(out)
}

/// Largest `|eigenvalue|` of a Hermitian operator.
fn spectral_norm(a: &ComplexMatrix) -> Result<f64> {
    let es = eig_hermitian(&a.hermitian_part())?;
    Ok(es.values.iter().fold(0.0, |m, v| m.max(v.abs())))
}

/// Unit eigenvector of a Hermitian operator with the largest `|eigenvalue|`.
fn dominant_vector(a: &ComplexMatrix) -> Result<Vec<C64>> {
    let es = eig_hermitian(&a.hermitian_part())?;
    let k = (0..es.dim()).max_by(|&i, &j| es.values[i].abs().total_cmp(&es.values[j].abs())).unwrap_or(0);
    Ok(es.vector(k))
}

fn frobenius(a: &ComplexMatrix) -> f64 {
    a.as_slice().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Satisfied,
    Violated,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Satisfied => "satisfied",
            Verdict::Violated => "violated",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Clause {
    Nontriviality,
    Orthogonality,
    ConstantDiagonal,
}

/// An environment state at which a clause fails, with the residual obtained
/// by re-evaluating the clause there. Nontriviality witnesses carry no state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub clause: Clause,
    pub psi_e: Vec<C64>,
    pub residual: f64,
}

/// Outcome of a condition check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub nontrivial_hs: bool,
    /// Spectral distance of `Φ(H_S)` from `(Tr H_S/d)1`.
    pub nontriviality_residual: f64,
    /// `‖Tr_S[(G⊗1)X]‖`, the worst case over all environment states.
    pub orthogonality_residual: f64,
    /// Largest `|Tr[G·Φ(⟨ψ|H_SE|ψ⟩)]|` over the sampled states.
    pub orthogonality_sampled: f64,
    /// `max_ij ‖B_ii − B_jj‖` in the computed eigenbasis of `Φ(H_S)`.
    pub constant_diag_residual: f64,
    /// Largest diagonal spread over the sampled states.
    pub constant_diag_sampled: f64,
    /// Departure of each degenerate cluster's compression from `1 ⊗ B`;
    /// zero when it is basis independent and `B` is common.
    pub cluster_residual: f64,
    /// Eigenvalue clusters of `Φ(H_S)` with more than one member.
    pub degenerate_clusters: Vec<Vec<usize>>,
    pub verdict: Verdict,
    pub samples_used: usize,
    pub tolerance: f64,
    pub witnesses: Vec<Witness>,
    pub note: String,
}

impl ConditionReport {
    /// Key–value rendering, one `key = value` per line.
    ///
    /// Keys: `verdict`, `nontrivial_hs`, `nontriviality_residual`,
    /// `orthogonality_residual`, `orthogonality_sampled`,
    /// `constant_diag_residual`, `constant_diag_sampled`, `cluster_residual`,
    /// `degenerate_clusters` (`;`-separated groups of `,`-separated indices),
    /// `samples_used`, `tolerance`, `witness.<k>.clause`,
    /// `witness.<k>.residual`, `witness.<k>.psi_e` (`re+imi` entries separated
    /// by spaces), and `note`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "verdict = {}", self.verdict.as_str());
        let _ = writeln!(s, "nontrivial_hs = {}", self.nontrivial_hs);
        let _ = writeln!(s, "nontriviality_residual = {:e}", self.nontriviality_residual);
        let _ = writeln!(s, "orthogonality_residual = {:e}", self.orthogonality_residual);
        let _ = writeln!(s, "orthogonality_sampled = {:e}", self.orthogonality_sampled);
        let _ = writeln!(s, "constant_diag_residual = {:e}", self.constant_diag_residual);
        let _ = writeln!(s, "constant_diag_sampled = {:e}", self.constant_diag_sampled);
        let _ = writeln!(s, "cluster_residual = {:e}", self.cluster_residual);
        let clusters: Vec<String> = self
            .degenerate_clusters
            .iter()
            .map(|c| c.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(","))
            .collect();
        let _ = writeln!(s, "degenerate_clusters = {}", clusters.join(";"));
        let _ = writeln!(s, "samples_used = {}", self.samples_used);
        let _ = writeln!(s, "tolerance = {:e}", self.tolerance);
        for (k, w) in self.witnesses.iter().enumerate() {
            let clause = match w.clause {
                Clause::Nontriviality => "nontriviality",
                Clause::Orthogonality => "orthogonality",
                Clause::ConstantDiagonal => "constant-diagonal",
            };
            let psi: Vec<String> = w.psi_e.iter().map(|z| format!("{}{:+}i", z.re, z.im)).collect();
            let _ = writeln!(s, "witness.{k}.clause = {clause}");
            let _ = writeln!(s, "witness.{k}.residual = {:e}", w.residual);
            let _ = writeln!(s, "witness.{k}.psi_e = {}", psi.join(" "));
        }
        let _ = writeln!(s, "note = {}", self.note);
        s
    }
}

/// Check inputs and options shared by the corollary and theorem checks.
#[derive(Clone, Copy, Debug)]
pub struct CheckOptions {
    pub n_env_samples: usize,
    pub tolerance: f64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self { n_env_samples: 64, tolerance: DEFAULT_TOLERANCE }
    }
}

/// Everything derived from `(H_S, H_SE, Φ)` that the clauses need.
struct Prepared {
    dim_s: usize,
    dim_e: usize,
    g: ComplexMatrix,
    x: ComplexMatrix,
    basis: Vec<Vec<C64>>,
}

impl Prepared {
    fn new(
        h_s: &ComplexMatrix,
        h_se: &ComplexMatrix,
        dims: (usize, usize),
        channel: &MixedUnitaryChannel,
    ) -> Result<(Self, Vec<Vec<usize>>)> {
        let (dim_s, dim_e) = dims;
        if h_s.dim() != dim_s {
            return Err(Error::DimensionMismatch { expected: dim_s, found: h_s.dim() });
        }
        if channel.dim() != dim_s {
            return Err(Error::DimensionMismatch { expected: dim_s, found: channel.dim() });
        }
        check_dims(h_se, dim_s, dim_e)?;
        for m in [h_s, h_se] {
            if !m.is_hermitian(opalg::HERMITIAN_TOL) {
                return Err(Error::NonHermitian { residual: m.hermiticity_residual() });
            }
        }
        let phi_hs = channel.apply(h_s)?;
        let mean = h_s.trace() / dim_s as f64;
        let g = &phi_hs - &ComplexMatrix::identity(dim_s).scale(mean);
        let x = channel.apply_on_system(h_se, dim_e)?;
        let es = eig_hermitian(&phi_hs)?;
        let scale = es.values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let clusters = es.clusters(CLUSTER_GAP * scale);
        let basis = (0..dim_s).map(|k| es.vector(k)).collect();
        Ok((Self { dim_s, dim_e, g, x, basis }, clusters))
    }

    fn diag_block(&self, i: usize) -> ComplexMatrix {
        system_block(&self.x, &self.basis[i], &self.basis[i], self.dim_s, self.dim_e)
    }

    /// `Tr{G · Φ(⟨ψ|H_SE|ψ⟩)}` through the contraction, not the exact operator.
    fn orthogonality_at(&self, h_se: &ComplexMatrix, channel: &MixedUnitaryChannel, psi: &[C64]) -> Result<f64> {
        let contracted = channel.apply(&env_contraction(h_se, psi, self.dim_s, self.dim_e)?)?;
        Ok((&self.g * &contracted).trace().norm())
    }

    /// Spread of `⟨i|Φ(⟨ψ|H_SE|ψ⟩)|i⟩` over the eigenbasis.
    fn diag_spread_at(&self, h_se: &ComplexMatrix, channel: &MixedUnitaryChannel, psi: &[C64]) -> Result<f64> {
        let contracted = channel.apply(&env_contraction(h_se, psi, self.dim_s, self.dim_e)?)?;
        let diag: Vec<f64> = self.basis.iter().map(|v| contracted.expectation(v).re).collect();
        let max = diag.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = diag.iter().cloned().fold(f64::INFINITY, f64::min);
        Ok(max - min)
    }
}

/// Environment states used for corroboration: computational basis, the
/// `(|a⟩ ± |b⟩)/√2` and `(|a⟩ ± i|b⟩)/√2` pairs, and `n_haar` Haar-random states.
fn env_samples<R: Rng + ?Sized>(dim_e: usize, n_haar: usize, rng: &mut R) -> Vec<Vec<C64>> {
    let zero = C64::new(0.0, 0.0);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::new();
    for a in 0..dim_e {
        let mut v = vec![zero; dim_e];
        v[a] = C64::new(1.0, 0.0);
        out.push(v);
    }
    for a in 0..dim_e {
        for b in a + 1..dim_e {
            for phase in [C64::new(1.0, 0.0), C64::new(-1.0, 0.0), C64::new(0.0, 1.0), C64::new(0.0, -1.0)] {
                let mut v = vec![zero; dim_e];
                v[a] = C64::new(h, 0.0);
                v[b] = phase * h;
                out.push(v);
            }
        }
    }
    for _ in 0..n_haar {
        let mut v: Vec<C64> =
            (0..dim_e).map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect();
        let n = opalg::norm(&v);
        v.iter_mut().for_each(|z| *z /= n);
        out.push(v);
    }
    out
}

/// Checks the three clauses for `Φ = channel`.
pub fn check_theorem<R: Rng + ?Sized>(
    h_s: &ComplexMatrix,
    h_se: &ComplexMatrix,
    dims: (usize, usize),
    channel: &MixedUnitaryChannel,
    opts: CheckOptions,
    rng: &mut R,
) -> Result<ConditionReport> {
    if opts.n_env_samples < MIN_ENV_SAMPLES {
        return Err(Error::InvalidParameter {
            name: "n_env_samples",
            reason: format!("must be at least {MIN_ENV_SAMPLES}, got {}", opts.n_env_samples),
        });
    }
    let tol = opts.tolerance;
    let (prep, clusters) = Prepared::new(h_s, h_se, dims, channel)?;
    let (dim_s, dim_e) = dims;
    let mut witnesses = Vec::new();

    // Clause 1.
    let nontriviality_residual = spectral_norm(&prep.g)?;
    let nontrivial_hs = nontriviality_residual > tol;
    if !nontrivial_hs {
        witnesses.push(Witness { clause: Clause::Nontriviality, psi_e: Vec::new(), residual: nontriviality_residual });
    }

    // Clause 2, exact.
    let gx = &opalg::kron(&prep.g, &ComplexMatrix::identity(dim_e))? * &prep.x;
    let o = opalg::partial_trace_sys(&gx, dim_s, dim_e)?;
    let orthogonality_residual = spectral_norm(&o)?;
    if orthogonality_residual > tol {
        let psi = dominant_vector(&o)?;
        let residual = prep.orthogonality_at(h_se, channel, &psi)?;
        witnesses.push(Witness { clause: Clause::Orthogonality, psi_e: psi, residual });
    }

    // Clause 3, exact in the computed eigenbasis.
    let blocks: Vec<ComplexMatrix> = (0..dim_s).map(|i| prep.diag_block(i)).collect();
    let mut constant_diag_residual = 0.0f64;
    let mut worst_pair = None;
    for i in 0..dim_s {
        for j in i + 1..dim_s {
            let r = spectral_norm(&(&blocks[i] - &blocks[j]))?;
            if r > constant_diag_residual {
                constant_diag_residual = r;
                worst_pair = Some((i, j));
            }
        }
    }

    // Basis (in)dependence inside degenerate clusters.
    let common = {
        let mut acc = ComplexMatrix::zeros(dim_e);
        for b in &blocks {
            acc = &acc + b;
        }
        &acc * (1.0 / dim_s as f64)
    };
    let mut cluster_residual = 0.0f64;
    let mut averages = Vec::with_capacity(clusters.len());
    for c in &clusters {
        let mut avg = ComplexMatrix::zeros(dim_e);
        for &a in c {
            avg = &avg + &blocks[a];
            cluster_residual = cluster_residual.max(spectral_norm(&(&blocks[a] - &common))?);
            for &b in c {
                if a != b {
                    let off = system_block(&prep.x, &prep.basis[a], &prep.basis[b], dim_s, dim_e);
                    cluster_residual = cluster_residual.max(frobenius(&off));
                }
            }
        }
        averages.push(&avg * (1.0 / c.len() as f64));
    }
    let mut average_spread = 0.0f64;
    let mut worst_avg = None;
    for a in 0..averages.len() {
        for b in a + 1..averages.len() {
            let r = spectral_norm(&(&averages[a] - &averages[b]))?;
            if r > average_spread {
                average_spread = r;
                worst_avg = Some((a, b));
            }
        }
    }
    let degenerate_clusters: Vec<Vec<usize>> = clusters.iter().filter(|c| c.len() > 1).cloned().collect();

    let diag_status = if degenerate_clusters.is_empty() {
        if constant_diag_residual <= tol { Verdict::Satisfied } else { Verdict::Violated }
    } else if average_spread > tol {
        Verdict::Violated
    } else if cluster_residual <= tol && constant_diag_residual <= tol {
        Verdict::Satisfied
    } else {
        Verdict::Inconclusive
    };
    if diag_status == Verdict::Violated {
        let op = if degenerate_clusters.is_empty() {
            let (i, j) = worst_pair.expect("a violating pair exists");
            &blocks[i] - &blocks[j]
        } else {
            let (a, b) = worst_avg.expect("a violating cluster pair exists");
            &averages[a] - &averages[b]
        };
        let psi = dominant_vector(&op)?;
        let residual = prep.diag_spread_at(h_se, channel, &psi)?;
        witnesses.push(Witness { clause: Clause::ConstantDiagonal, psi_e: psi, residual });
    }

    // Sampled corroboration.
    let samples = env_samples(dim_e, opts.n_env_samples, rng);
    let mut orthogonality_sampled = 0.0f64;
    let mut constant_diag_sampled = 0.0f64;
    let mut worst_orth_sample: Option<(f64, &Vec<C64>)> = None;
    let mut worst_diag_sample: Option<(f64, &Vec<C64>)> = None;
    for psi in &samples {
        let o = prep.orthogonality_at(h_se, channel, psi)?;
        if o > orthogonality_sampled {
            orthogonality_sampled = o;
            worst_orth_sample = Some((o, psi));
        }
        let d = prep.diag_spread_at(h_se, channel, psi)?;
        if d > constant_diag_sampled {
            constant_diag_sampled = d;
            worst_diag_sample = Some((d, psi));
        }
    }
    let orth_violated = orthogonality_residual > tol || orthogonality_sampled > tol;
    if orthogonality_residual <= tol {
        if let Some((r, psi)) = worst_orth_sample.filter(|(r, _)| *r > tol) {
            witnesses.push(Witness { clause: Clause::Orthogonality, psi_e: psi.clone(), residual: r });
        }
    }
    let diag_status = if diag_status != Verdict::Violated && constant_diag_sampled > tol && degenerate_clusters.is_empty() {
        if let Some((r, psi)) = worst_diag_sample {
            witnesses.push(Witness { clause: Clause::ConstantDiagonal, psi_e: psi.clone(), residual: r });
        }
        Verdict::Violated
    } else {
        diag_status
    };

    let verdict = if !nontrivial_hs || orth_violated || diag_status == Verdict::Violated {
        Verdict::Violated
    } else if diag_status == Verdict::Inconclusive {
        Verdict::Inconclusive
    } else {
        Verdict::Satisfied
    };
    let mut note = String::from(
        "clauses 2 and 3 are decided by exact operator identities; sampled states corroborate and \
         can only falsify",
    );
    if verdict == Verdict::Inconclusive {
        note.push_str("; the diagonal clause depends on the basis chosen inside a degenerate eigenspace");
    }

    Ok(ConditionReport {
        nontrivial_hs,
        nontriviality_residual,
        orthogonality_residual,
        orthogonality_sampled,
        constant_diag_residual,
        constant_diag_sampled,
        cluster_residual,
        degenerate_clusters,
        verdict,
        samples_used: samples.len(),
        tolerance: tol,
        witnesses,
        note,
    })
}

/// The theorem with `Φ` the identity channel.
pub fn check_corollary<R: Rng + ?Sized>(
    h_s: &ComplexMatrix,
    h_se: &ComplexMatrix,
    dims: (usize, usize),
    opts: CheckOptions,
    rng: &mut R,
) -> Result<ConditionReport> {
    check_theorem(h_s, h_se, dims, &MixedUnitaryChannel::identity(dims.0), opts, rng)
}

/// Re-evaluates a witness from scratch.
pub fn evaluate_witness(
    h_s: &ComplexMatrix,
    h_se: &ComplexMatrix,
    dims: (usize, usize),
    channel: &MixedUnitaryChannel,
    witness: &Witness,
) -> Result<f64> {
    let (prep, _) = Prepared::new(h_s, h_se, dims, channel)?;
    match witness.clause {
        Clause::Nontriviality => spectral_norm(&prep.g),
        Clause::Orthogonality => prep.orthogonality_at(h_se, channel, &witness.psi_e),
        Clause::ConstantDiagonal => prep.diag_spread_at(h_se, channel, &witness.psi_e),
    }
}

/// Largest `‖V†V − 1‖` entry of a vector set.
fn orthonormality_residual(basis: &[Vec<C64>]) -> f64 {
    let mut r = 0.0f64;
    for (a, u) in basis.iter().enumerate() {
        for (b, v) in basis.iter().enumerate() {
            let want = if a == b { 1.0 } else { 0.0 };
            r = r.max((opalg::inner(u, v) - want).norm());
        }
    }
    r
}

/// Pinching onto an orthonormal basis, realized as the Fourier-phase unitaries
/// `U_m = Σ_j e^{2πi·jm/d}|b_j⟩⟨b_j|` with weights `1/d`.
pub fn pinching_channel(basis: &[Vec<C64>]) -> Result<MixedUnitaryChannel> {
    let d = basis.len();
    if d == 0 {
        return Err(Error::NotOrthonormal { residual: f64::INFINITY });
    }
    if let Some(v) = basis.iter().find(|v| v.len() != d) {
        return Err(Error::DimensionMismatch { expected: d, found: v.len() });
    }
    let residual = orthonormality_residual(basis);
    if residual > 1e-10 {
        return Err(Error::NotOrthonormal { residual });
    }
    let projectors: Vec<ComplexMatrix> = basis.iter().map(|v| ComplexMatrix::projector(v)).collect();
    let unitaries = (0..d)
        .map(|m| {
            let mut u = ComplexMatrix::zeros(d);
            for (j, p) in projectors.iter().enumerate() {
                let phase = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * ((j * m) % d) as f64 / d as f64);
                u = &u + &p.scale(phase);
            }
            u
        })
        .collect();
    MixedUnitaryChannel::new(vec![1.0 / d as f64; d], unitaries)
}

/// Copies of each unitary out of `n`, by largest-remainder rounding of `w·n`.
pub fn discretize_counts(weights: &[f64], n: usize) -> Result<Vec<usize>> {
    if n < weights.len() {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: format!("{n} slots for {} unitaries", weights.len()),
        });
    }
    let scaled: Vec<f64> = weights.iter().map(|w| w * n as f64).collect();
    let mut counts: Vec<usize> = scaled.iter().map(|x| x.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| (scaled[b] - scaled[b].floor()).total_cmp(&(scaled[a] - scaled[a].floor())).then(a.cmp(&b)));
    for &k in order.iter().take(n.saturating_sub(assigned)) {
        counts[k] += 1;
    }
    for (k, (&c, &w)) in counts.iter().zip(weights).enumerate() {
        if c == 0 && w > 0.0 {
            return Err(Error::InfeasibleRounding { index: k, weight: w, n });
        }
    }
    Ok(counts)
}

/// Length-`n` control sequence whose uniform average approximates the channel.
pub fn discretize_channel(channel: &MixedUnitaryChannel, n: usize) -> Result<Vec<ComplexMatrix>> {
    let counts = discretize_counts(channel.weights(), n)?;
    Ok(channel
        .unitaries()
        .iter()
        .zip(counts)
        .flat_map(|(u, c)| std::iter::repeat_n(u.clone(), c))
        .collect())
}
