//! Dense complex linear algebra for the small operators used throughout the
//! crate: Hermitian eigendecomposition, tensor products, partial traces and
//! the matrix exponential.
//!
//! Matrices are stored row-major. Nothing here is tuned for large dimensions;
//! every physical object in this crate is at most a few hundred states wide.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Largest dimension [`kron`] will produce unless asked otherwise.
pub const KRON_DIM_CAP: usize = 4096;

/// Relative tolerance on the Hermiticity precondition of [`eig_hermitian`].
pub const HERMITIAN_TOL: f64 = 1e-10;

const JACOBI_MAX_SWEEPS: usize = 100;
const EXPM_MAX_SQUARINGS: u32 = 1100;

/// Dense square matrix of complex scalars.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![C64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from row-major entries; `data.len()` must be a square.
    pub fn from_vec(dim: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: data.len() });
        }
        Ok(Self { dim, data })
    }

    pub fn from_real(dim: usize, data: &[f64]) -> Result<Self> {
        Self::from_vec(dim, data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn from_rows<R: AsRef<[C64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: row.len() });
            }
            data.extend_from_slice(row);
        }
        Ok(Self { dim, data })
    }

    pub fn diagonal(entries: &[C64]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, &z) in entries.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    /// `|a⟩⟨b|`
    pub fn outer(a: &[C64], b: &[C64]) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch { expected: a.len(), found: b.len() });
        }
        let dim = a.len();
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = a[i] * b[j].conj();
            }
        }
        Ok(m)
    }

    /// `|ψ⟩⟨ψ|`
    pub fn projector(psi: &[C64]) -> Self {
        Self::outer(psi, psi).expect("equal lengths")
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.dim).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(j, i)] = self[(i, j)].conj();
            }
        }
        m
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|&z| z * s).collect() }
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        (0..self.dim)
            .map(|j| (0..self.dim).map(|i| self[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// `max |A[i][j] − conj(A[j][i])|`
    pub fn hermiticity_residual(&self) -> f64 {
        let n = self.dim;
        let mut r: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                r = r.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        r
    }

    /// Hermitian within `tol · max(1, max|A|)`.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_residual() <= tol * self.max_abs().max(1.0)
    }

    /// `max |U†U − 1|`
    pub fn unitarity_residual(&self) -> f64 {
        (&self.adjoint() * self).max_abs_diff(&Self::identity(self.dim))
    }

    pub fn ensure_unitary(&self, tol: f64) -> Result<()> {
        let residual = self.unitarity_residual();
        if residual > tol {
            return Err(Error::NotUnitary { residual });
        }
        Ok(())
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.dim, "dimension mismatch");
        let n = self.dim;
        (0..n).map(|i| (0..n).map(|j| self.data[i * n + j] * v[j]).sum()).collect()
    }

    /// `⟨ψ|A|ψ⟩`
    pub fn expectation(&self, psi: &[C64]) -> C64 {
        inner(psi, &self.apply(psi))
    }

    /// `A·B − B·A`
    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    /// `U A U†`
    pub fn conjugate_by(&self, u: &Self) -> Self {
        &(u * self) * &u.adjoint()
    }

    /// Hermitian part `(A + A†)/2`.
    pub fn hermitian_part(&self) -> Self {
        (self + &self.adjoint()).scale(C64::new(0.5, 0.0))
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for j in 0..self.dim {
                let z = self[(i, j)];
                write!(f, "{:+.6e}{:+.6e}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let n = self.dim;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let row = &rhs.data[k * n..(k + 1) * n];
                let dst = &mut out.data[i * n..(i + 1) * n];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn neg(self) -> ComplexMatrix {
        self.scale(C64::new(-1.0, 0.0))
    }
}

impl Mul<f64> for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: f64) -> ComplexMatrix {
        self.scale(C64::new(rhs, 0.0))
    }
}

impl Mul<C64> for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: C64) -> ComplexMatrix {
        self.scale(rhs)
    }
}

/// `⟨a|b⟩`
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    assert_eq!(a.len(), b.len(), "dimension mismatch");
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    /// Eigenvectors stored as the columns of a unitary matrix.
    pub vectors: ComplexMatrix,
}

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k)
    }

    /// `V Λ V†`
    pub fn reconstruct(&self) -> ComplexMatrix {
        let lambda: Vec<C64> = self.values.iter().map(|&x| C64::new(x, 0.0)).collect();
        &(&self.vectors * &ComplexMatrix::diagonal(&lambda)) * &self.vectors.adjoint()
    }

    /// Matrix elements `⟨v_k|A|v_l⟩` of `a` in this eigenbasis.
    pub fn to_eigenbasis(&self, a: &ComplexMatrix) -> ComplexMatrix {
        &(&self.vectors.adjoint() * a) * &self.vectors
    }

    /// Groups of indices whose eigenvalues lie within `gap` of their neighbour.
    pub fn clusters(&self, gap: f64) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = Vec::new();
        for (k, &v) in self.values.iter().enumerate() {
            match out.last_mut() {
                Some(c) if (v - self.values[*c.last().unwrap()]).abs() < gap => c.push(k),
                _ => out.push(vec![k]),
            }
        }
        out
    }
}

/// Cyclic complex Jacobi eigendecomposition of a Hermitian matrix.
///
/// The input is checked to be Hermitian within `1e-10·max|A|` and then
/// symmetrized before iterating. Eigenvalues are returned in ascending order.
pub fn eig_hermitian(a: &ComplexMatrix) -> Result<EigenSystem> {
    let n = a.dim();
    let scale = a.max_abs();
    let residual = a.hermiticity_residual();
    if residual > HERMITIAN_TOL * scale {
        return Err(Error::NonHermitian { residual });
    }
    if a.data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::ConvergenceFailure { routine: "eig_hermitian" });
    }

    let mut m = a.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    for i in 0..n {
        m[(i, i)] = C64::new(m[(i, i)].re, 0.0);
    }

    let frob = m.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let target = (f64::EPSILON * frob).powi(2);
    let mut converged = n < 2 || frob == 0.0;
    let mut sweep = 0;
    while !converged {
        if sweep == JACOBI_MAX_SWEEPS {
            return Err(Error::ConvergenceFailure { routine: "eig_hermitian" });
        }
        sweep += 1;
        for p in 0..n - 1 {
            for q in p + 1..n {
                rotate(&mut m, &mut v, p, q);
            }
        }
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)].norm_sqr())
            .sum();
        converged = off <= target;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let values = order.iter().map(|&i| m[(i, i)].re).collect();
    let mut vectors = ComplexMatrix::zeros(n);
    for (dst, &src) in order.iter().enumerate() {
        for i in 0..n {
            vectors[(i, dst)] = v[(i, src)];
        }
    }
    Ok(EigenSystem { values, vectors })
}

/// One Jacobi rotation annihilating `m[p][q]`, accumulated into `v`.
fn rotate(m: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let b = m[(p, q)];
    let b_abs = b.norm();
    if b_abs == 0.0 {
        return;
    }
    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;
    // Below this the rotation angle underflows relative to the diagonal.
    if b_abs < f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
        m[(p, q)] = C64::new(0.0, 0.0);
        m[(q, p)] = C64::new(0.0, 0.0);
        return;
    }
    let phase = b / b_abs;
    let tau = (aqq - app) / (2.0 * b_abs);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    // J = diag(1, e^{-iφ}) · [[c, s], [-s, c]] restricted to (p, q).
    let jpp = C64::new(c, 0.0);
    let jpq = C64::new(s, 0.0);
    let jqp = -phase.conj() * s;
    let jqq = phase.conj() * c;

    let n = m.dim();
    for k in 0..n {
        let akp = m[(k, p)];
        let akq = m[(k, q)];
        m[(k, p)] = akp * jpp + akq * jqp;
        m[(k, q)] = akp * jpq + akq * jqq;
    }
    for k in 0..n {
        let apk = m[(p, k)];
        let aqk = m[(q, k)];
        m[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
        m[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
    }
    m[(p, q)] = C64::new(0.0, 0.0);
    m[(q, p)] = C64::new(0.0, 0.0);
    m[(p, p)] = C64::new(m[(p, p)].re, 0.0);
    m[(q, q)] = C64::new(m[(q, q)].re, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * jpp + vkq * jqp;
        v[(k, q)] = vkp * jpq + vkq * jqq;
    }
}

/// Tensor product `A ⊗ B` with the default dimension cap.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    kron_with_cap(a, b, KRON_DIM_CAP)
}

pub fn kron_with_cap(a: &ComplexMatrix, b: &ComplexMatrix, cap: usize) -> Result<ComplexMatrix> {
    let (da, db) = (a.dim(), b.dim());
    let dim = da
        .checked_mul(db)
        .filter(|&d| d <= cap)
        .ok_or(Error::DimensionOverflow { dim: da.saturating_mul(db), cap })?;
    let mut out = ComplexMatrix::zeros(dim);
    for i in 0..da {
        for j in 0..da {
            let aij = a[(i, j)];
            for k in 0..db {
                for l in 0..db {
                    out[(i * db + k, j * db + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    Ok(out)
}

pub fn kron_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().flat_map(|&x| b.iter().map(move |&y| x * y)).collect()
}

fn check_bipartite(a: &ComplexMatrix, dim_s: usize, dim_e: usize) -> Result<()> {
    let expected = dim_s * dim_e;
    if a.dim() != expected {
        return Err(Error::DimensionMismatch { expected, found: a.dim() });
    }
    Ok(())
}

/// `Tr_E A` for `A` acting on `H_S ⊗ H_E`.
pub fn partial_trace_env(a: &ComplexMatrix, dim_s: usize, dim_e: usize) -> Result<ComplexMatrix> {
    check_bipartite(a, dim_s, dim_e)?;
    let mut out = ComplexMatrix::zeros(dim_s);
    for i in 0..dim_s {
        for j in 0..dim_s {
            out[(i, j)] = (0..dim_e).map(|k| a[(i * dim_e + k, j * dim_e + k)]).sum();
        }
    }
    Ok(out)
}

/// `Tr_S A` for `A` acting on `H_S ⊗ H_E`.
pub fn partial_trace_sys(a: &ComplexMatrix, dim_s: usize, dim_e: usize) -> Result<ComplexMatrix> {
    check_bipartite(a, dim_s, dim_e)?;
    let mut out = ComplexMatrix::zeros(dim_e);
    for k in 0..dim_e {
        for l in 0..dim_e {
            out[(k, l)] = (0..dim_s).map(|i| a[(i * dim_e + k, i * dim_e + l)]).sum();
        }
    }
    Ok(out)
}

/// `exp(s·A)` by truncated Taylor series with scaling and squaring.
///
/// The argument is halved until its 1-norm is below 1/2, the series is summed
/// until the next term no longer changes the result, and the partial sum is
/// squared back up.
pub fn matexp(a: &ComplexMatrix, s: C64) -> Result<ComplexMatrix> {
    let n = a.dim();
    let x = a.scale(s);
    let norm = x.norm_one();
    if !norm.is_finite() {
        return Err(Error::ConvergenceFailure { routine: "matexp" });
    }
    if norm == 0.0 {
        return Ok(ComplexMatrix::identity(n));
    }
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    if squarings > EXPM_MAX_SQUARINGS {
        return Err(Error::ConvergenceFailure { routine: "matexp" });
    }
    let x = x.scale(C64::new(0.5f64.powi(squarings as i32), 0.0));

    let mut sum = ComplexMatrix::identity(n);
    let mut term = ComplexMatrix::identity(n);
    let mut converged = false;
    for k in 1..=40 {
        term = (&term * &x).scale(C64::new(1.0 / k as f64, 0.0));
        sum = &sum + &term;
        if term.max_abs() <= f64::EPSILON * 1e-2 * sum.max_abs() {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::ConvergenceFailure { routine: "matexp" });
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    Ok(sum)
}

/// Single-qubit operators in the `(|e⟩, |g⟩)` ordering, so that
/// `σ_z = diag(1, −1)` and `σ_+ = |e⟩⟨g|`.
pub mod pauli {
    use super::{ComplexMatrix, C64};

    fn m(entries: [C64; 4]) -> ComplexMatrix {
        ComplexMatrix::from_vec(2, entries.to_vec()).expect("2x2")
    }

    const O: C64 = C64::new(0.0, 0.0);
    const ONE: C64 = C64::new(1.0, 0.0);
    const I: C64 = C64::new(0.0, 1.0);

    pub fn identity() -> ComplexMatrix {
        ComplexMatrix::identity(2)
    }

    pub fn sigma_x() -> ComplexMatrix {
        m([O, ONE, ONE, O])
    }

    pub fn sigma_y() -> ComplexMatrix {
        m([O, -I, I, O])
    }

    pub fn sigma_z() -> ComplexMatrix {
        m([ONE, O, O, -ONE])
    }

    pub fn sigma_plus() -> ComplexMatrix {
        m([O, ONE, O, O])
    }

    pub fn sigma_minus() -> ComplexMatrix {
        m([O, O, ONE, O])
    }

    pub fn excited() -> Vec<C64> {
        vec![ONE, O]
    }

    pub fn ground() -> Vec<C64> {
        vec![O, ONE]
    }

    /// `(|e⟩ + |g⟩)/√2`
    pub fn plus() -> Vec<C64> {
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        vec![h, h]
    }
}
