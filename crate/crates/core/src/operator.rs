//! Dense operator algebra on truncated Hilbert spaces.
//!
//! Operators are stored either as real or as complex dense matrices. Every
//! Hamiltonian assembled by this crate is real symmetric in the chosen phase
//! conventions, so the real storage is the fast path; complex storage is used
//! for generic Hermitian input and for matrix exponentials.

use crate::error::{Error, Result};
use faer::{c64, Mat, Side};
use std::ops::{Add, Mul, Sub};

/// Absolute per-element tolerance for Hermiticity checks.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// A dense square operator with real or complex storage.
#[derive(Clone, Debug)]
pub enum Operator {
    Real(Mat<f64>),
    Complex(Mat<c64>),
}

impl Operator {
    pub fn zeros(dim: usize) -> Self {
        Operator::Real(Mat::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Operator::Real(Mat::identity(dim, dim))
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        Operator::Real(Mat::from_fn(n, n, |i, j| if i == j { values[i] } else { 0.0 }))
    }

    pub fn from_real(m: Mat<f64>) -> Result<Self> {
        check_square(m.nrows(), m.ncols())?;
        Ok(Operator::Real(m))
    }

    pub fn from_complex(m: Mat<c64>) -> Result<Self> {
        check_square(m.nrows(), m.ncols())?;
        Ok(Operator::Complex(m))
    }

    pub fn from_fn_real(dim: usize, f: impl FnMut(usize, usize) -> f64) -> Self {
        Operator::Real(Mat::from_fn(dim, dim, f))
    }

    pub fn from_fn_complex(dim: usize, f: impl FnMut(usize, usize) -> c64) -> Self {
        Operator::Complex(Mat::from_fn(dim, dim, f))
    }

    pub fn dim(&self) -> usize {
        match self {
            Operator::Real(m) => m.nrows(),
            Operator::Complex(m) => m.nrows(),
        }
    }

    pub fn is_real(&self) -> bool {
        matches!(self, Operator::Real(_))
    }

    pub fn get(&self, i: usize, j: usize) -> c64 {
        match self {
            Operator::Real(m) => c64::new(m[(i, j)], 0.0),
            Operator::Complex(m) => m[(i, j)],
        }
    }

    pub fn as_real(&self) -> Option<&Mat<f64>> {
        match self {
            Operator::Real(m) => Some(m),
            Operator::Complex(_) => None,
        }
    }

    pub fn to_complex(&self) -> Mat<c64> {
        match self {
            Operator::Real(m) => Mat::from_fn(m.nrows(), m.ncols(), |i, j| c64::new(m[(i, j)], 0.0)),
            Operator::Complex(m) => m.clone(),
        }
    }

    /// Largest absolute imaginary part of any entry.
    pub fn max_imag(&self) -> f64 {
        match self {
            Operator::Real(_) => 0.0,
            Operator::Complex(m) => {
                let mut worst = 0.0f64;
                for j in 0..m.ncols() {
                    for i in 0..m.nrows() {
                        worst = worst.max(m[(i, j)].im.abs());
                    }
                }
                worst
            }
        }
    }

    /// Real part of the operator, failing if any imaginary part exceeds `tol`.
    pub fn into_real(self, tol: f64) -> Result<Mat<f64>> {
        match self {
            Operator::Real(m) => Ok(m),
            Operator::Complex(m) => {
                let op = Operator::Complex(m);
                let worst = op.max_imag();
                if worst > tol {
                    return Err(Error::Validation(format!(
                        "operator has imaginary part {worst:e} above {tol:e}"
                    )));
                }
                let Operator::Complex(m) = op else { unreachable!() };
                Ok(Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)].re))
            }
        }
    }

    /// Converts complex storage with identically zero imaginary parts to real storage.
    pub fn compact(self) -> Self {
        if let Operator::Complex(_) = &self {
            if self.max_imag() == 0.0 {
                return Operator::Real(self.into_real(0.0).expect("zero imaginary part"));
            }
        }
        self
    }

    pub fn adjoint(&self) -> Self {
        match self {
            Operator::Real(m) => Operator::Real(m.transpose().to_owned()),
            Operator::Complex(m) => Operator::Complex(m.adjoint().to_owned()),
        }
    }

    pub fn matmul(&self, other: &Operator) -> Result<Self> {
        check_same(self.dim(), other.dim())?;
        Ok(match (self, other) {
            (Operator::Real(a), Operator::Real(b)) => Operator::Real(a * b),
            _ => Operator::Complex(self.to_complex() * other.to_complex()),
        })
    }

    pub fn scale(&self, s: f64) -> Self {
        match self {
            Operator::Real(m) => Operator::Real(Mat::from_fn(m.nrows(), m.ncols(), |i, j| s * m[(i, j)])),
            Operator::Complex(m) => Operator::Complex(Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * s)),
        }
    }

    pub fn scale_complex(&self, s: c64) -> Self {
        let m = self.to_complex();
        Operator::Complex(Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * s))
    }

    fn combine(&self, other: &Operator, sign: f64) -> Result<Self> {
        check_same(self.dim(), other.dim())?;
        let n = self.dim();
        Ok(match (self, other) {
            (Operator::Real(a), Operator::Real(b)) => {
                Operator::Real(Mat::from_fn(n, n, |i, j| a[(i, j)] + sign * b[(i, j)]))
            }
            _ => {
                let (a, b) = (self.to_complex(), other.to_complex());
                Operator::Complex(Mat::from_fn(n, n, |i, j| a[(i, j)] + b[(i, j)] * sign))
            }
        })
    }

    pub fn try_add(&self, other: &Operator) -> Result<Self> {
        self.combine(other, 1.0)
    }

    pub fn try_sub(&self, other: &Operator) -> Result<Self> {
        self.combine(other, -1.0)
    }

    /// Kronecker product with `self` as the slow (outer) index.
    pub fn kron(&self, other: &Operator) -> Self {
        match (self, other) {
            (Operator::Real(a), Operator::Real(b)) => Operator::Real(kron_real(a, b)),
            _ => {
                let (a, b) = (self.to_complex(), other.to_complex());
                let (na, nb) = (a.nrows(), b.nrows());
                Operator::Complex(Mat::from_fn(na * nb, na * nb, |r, c| {
                    a[(r / nb, c / nb)] * b[(r % nb, c % nb)]
                }))
            }
        }
    }

    pub fn commutator(&self, other: &Operator) -> Result<Self> {
        self.matmul(other)?.try_sub(&other.matmul(self)?)
    }

    pub fn frobenius_norm(&self) -> f64 {
        match self {
            Operator::Real(m) => m.norm_l2(),
            Operator::Complex(m) => m.norm_l2(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                worst = worst.max(self.get(i, j).norm());
            }
        }
        worst
    }

    /// Largest per-element deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in 0..=j {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    /// Largest per-element deviation from anti-Hermiticity.
    pub fn antihermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in 0..=j {
                worst = worst.max((self.get(i, j) + self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    pub fn apply(&self, v: &[c64]) -> Vec<c64> {
        let n = self.dim();
        assert_eq!(v.len(), n, "vector length must match operator dimension");
        let mut out = vec![c64::new(0.0, 0.0); n];
        match self {
            Operator::Real(m) => {
                for j in 0..n {
                    let vj = v[j];
                    if vj == c64::new(0.0, 0.0) {
                        continue;
                    }
                    for (i, o) in out.iter_mut().enumerate() {
                        *o += vj * m[(i, j)];
                    }
                }
            }
            Operator::Complex(m) => {
                for j in 0..n {
                    let vj = v[j];
                    for (i, o) in out.iter_mut().enumerate() {
                        *o += m[(i, j)] * vj;
                    }
                }
            }
        }
        out
    }

    /// Expectation value ⟨v|O|v⟩ (not normalized).
    pub fn expectation(&self, v: &[c64]) -> c64 {
        inner(v, &self.apply(v))
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        self.try_add(rhs).expect("dimension mismatch in operator addition")
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        self.try_sub(rhs).expect("dimension mismatch in operator subtraction")
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        self.matmul(rhs).expect("dimension mismatch in operator product")
    }
}

impl Mul<f64> for &Operator {
    type Output = Operator;
    fn mul(self, rhs: f64) -> Operator {
        self.scale(rhs)
    }
}

fn check_square(r: usize, c: usize) -> Result<()> {
    if r != c || r == 0 {
        return Err(Error::InvalidDimension(format!("expected non-empty square matrix, got {r}x{c}")));
    }
    Ok(())
}

fn check_same(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::Validation(format!("dimension mismatch: {a} vs {b}")));
    }
    Ok(())
}

/// ⟨a|b⟩ with the first argument conjugated.
pub fn inner(a: &[c64], b: &[c64]) -> c64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(v: &[c64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn kron_real(a: &Mat<f64>, b: &Mat<f64>) -> Mat<f64> {
    let (na, nb) = (a.nrows(), b.nrows());
    let mut out = Mat::zeros(na * nb, na * nb);
    add_kron(&mut out, 1.0, a, b);
    out
}

/// Accumulates `coeff · (a ⊗ b)` into `target`, skipping zero entries of `a`.
pub fn add_kron(target: &mut Mat<f64>, coeff: f64, a: &Mat<f64>, b: &Mat<f64>) {
    let (na, nb) = (a.nrows(), b.nrows());
    assert_eq!(target.nrows(), na * nb, "target dimension must equal product dimension");
    for ja in 0..na {
        for ia in 0..na {
            let x = coeff * a[(ia, ja)];
            if x == 0.0 {
                continue;
            }
            for jb in 0..nb {
                let col = ja * nb + jb;
                for ib in 0..nb {
                    let y = b[(ib, jb)];
                    if y != 0.0 {
                        target[(ia * nb + ib, col)] += x * y;
                    }
                }
            }
        }
    }
}

/// A dense operator validated to be Hermitian within [`HERMITIAN_TOL`].
#[derive(Clone, Debug)]
pub struct HermitianOp {
    op: Operator,
}

impl HermitianOp {
    pub fn new(op: Operator) -> Result<Self> {
        let defect = op.hermiticity_defect();
        if !defect.is_finite() || defect > HERMITIAN_TOL {
            return Err(Error::Validation(format!(
                "operator is not Hermitian: max element defect {defect:e}"
            )));
        }
        Ok(HermitianOp { op })
    }

    pub fn from_real(m: Mat<f64>) -> Result<Self> {
        Self::new(Operator::from_real(m)?)
    }

    pub fn from_complex(m: Mat<c64>) -> Result<Self> {
        Self::new(Operator::from_complex(m)?.compact())
    }

    pub fn identity(dim: usize) -> Self {
        HermitianOp { op: Operator::identity(dim) }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        HermitianOp { op: Operator::diagonal(values) }
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn op(&self) -> &Operator {
        &self.op
    }

    pub fn into_op(self) -> Operator {
        self.op
    }

    pub fn is_real(&self) -> bool {
        self.op.is_real()
    }

    pub fn get(&self, i: usize, j: usize) -> c64 {
        self.op.get(i, j)
    }

    pub fn add(&self, other: &HermitianOp) -> Result<HermitianOp> {
        Ok(HermitianOp { op: self.op.try_add(&other.op)? })
    }

    pub fn scale(&self, s: f64) -> HermitianOp {
        HermitianOp { op: self.op.scale(s) }
    }

    /// U·H·U† for a (unitary) operator U.
    pub fn conjugate(&self, u: &Operator) -> Result<HermitianOp> {
        let out = u.matmul(&self.op)?.matmul(&u.adjoint())?;
        HermitianOp::new(symmetrize_rounding(out))
    }

    /// P·H·P for an orthogonal projector P.
    pub fn project(&self, p: &HermitianOp) -> Result<HermitianOp> {
        let out = p.op.matmul(&self.op)?.matmul(&p.op)?;
        HermitianOp::new(symmetrize_rounding(out))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.op.frobenius_norm()
    }

    pub fn eig(&self) -> Result<EigenSystem> {
        eig_hermitian(self)
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        eigvals_hermitian(self)
    }
}

/// Removes the rounding-level asymmetry introduced by dense products, which
/// can exceed the absolute Hermiticity tolerance for large-norm operators.
fn symmetrize_rounding(op: Operator) -> Operator {
    let n = op.dim();
    match op {
        Operator::Real(m) => Operator::Real(Mat::from_fn(n, n, |i, j| 0.5 * (m[(i, j)] + m[(j, i)]))),
        Operator::Complex(m) => {
            Operator::Complex(Mat::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5))
        }
    }
}

/// Kronecker product of Hermitian operators, matter (first) index slow.
pub fn tensor(a: &HermitianOp, b: &HermitianOp) -> HermitianOp {
    HermitianOp { op: a.op.kron(&b.op) }
}

/// Eigenvalues ascending with column eigenvectors.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    pub vectors: Operator,
}

impl EigenSystem {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn vector(&self, k: usize) -> Vec<c64> {
        match &self.vectors {
            Operator::Real(m) => (0..m.nrows()).map(|i| c64::new(m[(i, k)], 0.0)).collect(),
            Operator::Complex(m) => (0..m.nrows()).map(|i| m[(i, k)]).collect(),
        }
    }

    pub fn real_vector(&self, k: usize) -> Option<Vec<f64>> {
        self.vectors.as_real().map(|m| (0..m.nrows()).map(|i| m[(i, k)]).collect())
    }
}

/// Hermitian eigendecomposition with ascending eigenvalues and the phase
/// convention that the largest-magnitude component of each eigenvector is
/// real and positive (first such component on ties).
pub fn eig_hermitian(h: &HermitianOp) -> Result<EigenSystem> {
    match &h.op {
        Operator::Real(m) => {
            let evd = m
                .self_adjoint_eigen(Side::Lower)
                .map_err(|e| Error::Eigen(format!("{e:?}")))?;
            let s = evd.S().column_vector();
            let values: Vec<f64> = (0..s.nrows()).map(|i| s[i]).collect();
            let mut u = evd.U().to_owned();
            for k in 0..u.ncols() {
                let p = pivot_index((0..u.nrows()).map(|i| u[(i, k)].abs()));
                if u[(p, k)] < 0.0 {
                    for i in 0..u.nrows() {
                        u[(i, k)] = -u[(i, k)];
                    }
                }
            }
            let (values, u) = sort_real(values, u);
            Ok(EigenSystem { values, vectors: Operator::Real(u) })
        }
        Operator::Complex(m) => {
            let evd = m
                .self_adjoint_eigen(Side::Lower)
                .map_err(|e| Error::Eigen(format!("{e:?}")))?;
            let s = evd.S().column_vector();
            let values: Vec<f64> = (0..s.nrows()).map(|i| s[i].re).collect();
            let mut u = evd.U().to_owned();
            for k in 0..u.ncols() {
                let p = pivot_index((0..u.nrows()).map(|i| u[(i, k)].norm()));
                let z = u[(p, k)];
                let phase = z.conj() / z.norm();
                for i in 0..u.nrows() {
                    u[(i, k)] *= phase;
                }
                u[(p, k)] = c64::new(u[(p, k)].re, 0.0);
            }
            let order = ascending_order(&values);
            let values_sorted = order.iter().map(|&k| values[k]).collect();
            let u_sorted = Mat::from_fn(u.nrows(), u.ncols(), |i, j| u[(i, order[j])]);
            Ok(EigenSystem { values: values_sorted, vectors: Operator::Complex(u_sorted) })
        }
    }
}

/// Eigenvalues only, ascending.
pub fn eigvals_hermitian(h: &HermitianOp) -> Result<Vec<f64>> {
    let mut values = match &h.op {
        Operator::Real(m) => m
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::Eigen(format!("{e:?}")))?,
        Operator::Complex(m) => m
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| Error::Eigen(format!("{e:?}")))?,
    };
    values.sort_by(f64::total_cmp);
    Ok(values)
}

fn pivot_index(mags: impl Iterator<Item = f64>) -> usize {
    let mags: Vec<f64> = mags.collect();
    let max = mags.iter().cloned().fold(0.0f64, f64::max);
    mags.iter().position(|&m| m >= max * (1.0 - 1e-10)).unwrap_or(0)
}

fn ascending_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    order
}

fn sort_real(values: Vec<f64>, u: Mat<f64>) -> (Vec<f64>, Mat<f64>) {
    let order = ascending_order(&values);
    if order.iter().enumerate().all(|(i, &k)| i == k) {
        return (values, u);
    }
    let vals = order.iter().map(|&k| values[k]).collect();
    let sorted = Mat::from_fn(u.nrows(), u.ncols(), |i, j| u[(i, order[j])]);
    (vals, sorted)
}

/// exp(K) for anti-Hermitian K, via the eigendecomposition of the Hermitian iK.
pub fn expm_antihermitian(k: &Operator) -> Result<Operator> {
    let defect = k.antihermiticity_defect();
    if !defect.is_finite() || defect > HERMITIAN_TOL {
        return Err(Error::Validation(format!(
            "generator is not anti-Hermitian: max element defect {defect:e}"
        )));
    }
    let n = k.dim();
    let ik = k.scale_complex(c64::new(0.0, 1.0));
    let ik = match ik {
        Operator::Complex(m) => Mat::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5),
        Operator::Real(_) => unreachable!(),
    };
    let evd = ik
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let phases: Vec<c64> = (0..n).map(|j| c64::from_polar(1.0, -s[j].re)).collect();
    let scaled = Mat::from_fn(n, n, |i, j| u[(i, j)] * phases[j]);
    Ok(Operator::Complex(&scaled * u.adjoint()))
}

/// Annihilation and creation operators on a Fock space of dimension `dim`.
pub fn ladder(dim: usize) -> Result<(Operator, Operator)> {
    if dim < 2 {
        return Err(Error::InvalidDimension(format!("ladder needs dim >= 2, got {dim}")));
    }
    let a = Operator::from_fn_real(dim, |i, j| if j == i + 1 { (j as f64).sqrt() } else { 0.0 });
    let adag = a.adjoint();
    Ok((a, adag))
}

/// Squeeze operator S(r) = exp[(r/2)(a² − a†²)] on the truncated space.
pub fn squeeze_matrix(r: f64, dim: usize) -> Result<Mat<f64>> {
    if !r.is_finite() {
        return Err(Error::InvalidParameter(format!("squeeze parameter must be finite, got {r}")));
    }
    if dim < 2 {
        return Err(Error::InvalidDimension(format!("squeeze needs dim >= 2, got {dim}")));
    }
    if r == 0.0 {
        return Ok(Mat::identity(dim, dim));
    }
    let gen = Operator::from_fn_real(dim, |i, j| {
        let (lo, hi) = (i.min(j), i.max(j));
        if hi == lo + 2 {
            let amp = ((lo + 1) as f64 * (lo + 2) as f64).sqrt() * 0.5 * r;
            if i < j {
                amp
            } else {
                -amp
            }
        } else {
            0.0
        }
    });
    expm_antihermitian(&gen)?.into_real(1e-10)
}

/// Fock-space number operator diagonal.
pub fn number_diag(dim: usize) -> Vec<f64> {
    (0..dim).map(|n| n as f64).collect()
}

/// X = (a + a†)/√2.
pub fn quad_x(dim: usize) -> Mat<f64> {
    Mat::from_fn(dim, dim, |i, j| {
        if j == i + 1 {
            (j as f64 / 2.0).sqrt()
        } else if i == j + 1 {
            (i as f64 / 2.0).sqrt()
        } else {
            0.0
        }
    })
}

/// P̂ with P = (a† − a)·i/√2 = i·P̂, so P̂ = (a† − a)/√2 is real antisymmetric.
pub fn quad_p_imag(dim: usize) -> Mat<f64> {
    Mat::from_fn(dim, dim, |i, j| {
        if i == j + 1 {
            (i as f64 / 2.0).sqrt()
        } else if j == i + 1 {
            -(j as f64 / 2.0).sqrt()
        } else {
            0.0
        }
    })
}

/// Truncation of the exact operator X², not the square of the truncated X.
pub fn quad_x_sq(dim: usize) -> Mat<f64> {
    quad_sq(dim, 1.0)
}

/// Truncation of the exact operator P², not the square of the truncated P.
pub fn quad_p_sq(dim: usize) -> Mat<f64> {
    quad_sq(dim, -1.0)
}

fn quad_sq(dim: usize, sign: f64) -> Mat<f64> {
    Mat::from_fn(dim, dim, |i, j| {
        let (lo, hi) = (i.min(j), i.max(j));
        if i == j {
            i as f64 + 0.5
        } else if hi == lo + 2 {
            sign * 0.5 * ((lo + 1) as f64 * (lo + 2) as f64).sqrt()
        } else {
            0.0
        }
    })
}

/// Two-level operators in the basis (|0⟩ ground, |1⟩ excited).
pub mod pauli {
    use super::Operator;

    /// σ⁺ = |1⟩⟨0|.
    pub fn raising() -> Operator {
        Operator::from_fn_real(2, |i, j| if i == 1 && j == 0 { 1.0 } else { 0.0 })
    }

    /// σ⁻ = |0⟩⟨1|.
    pub fn lowering() -> Operator {
        Operator::from_fn_real(2, |i, j| if i == 0 && j == 1 { 1.0 } else { 0.0 })
    }

    pub fn x() -> Operator {
        Operator::from_fn_real(2, |i, j| if i != j { 1.0 } else { 0.0 })
    }

    /// σ^y = i(σ⁻ − σ⁺).
    pub fn y() -> Operator {
        use faer::c64;
        Operator::from_fn_complex(2, |i, j| match (i, j) {
            (0, 1) => c64::new(0.0, 1.0),
            (1, 0) => c64::new(0.0, -1.0),
            _ => c64::new(0.0, 0.0),
        })
    }

    /// σ^z = σ⁺σ⁻ − σ⁻σ⁺ (excited state +1).
    pub fn z() -> Operator {
        Operator::diagonal(&[-1.0, 1.0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn ladder_small_truncations() {
        let (a, adag) = ladder(2).unwrap();
        assert_eq!(a.get(0, 1).re, 1.0);
        assert_eq!(a.get(1, 0).re, 0.0);
        assert_eq!(adag.get(1, 0).re, 1.0);
        let (a4, _) = ladder(4).unwrap();
        assert!(close(a4.get(2, 3).re, 3f64.sqrt(), 1e-15));
        assert!(matches!(ladder(1), Err(Error::InvalidDimension(_))));
    }

    #[test]
    fn ladder_commutator_corner() {
        let (a, adag) = ladder(40).unwrap();
        let c = a.commutator(&adag).unwrap();
        for i in 0..40 {
            for j in 0..40 {
                let expected = if i != j {
                    0.0
                } else if i == 39 {
                    -39.0
                } else {
                    1.0
                };
                assert!(close(c.get(i, j).re, expected, 1e-12), "({i},{j})");
            }
        }
    }

    #[test]
    fn tensor_identity_and_spectrum() {
        let id6 = tensor(&HermitianOp::identity(2), &HermitianOp::identity(3));
        assert!((id6.op().try_sub(&Operator::identity(6)).unwrap()).max_abs() == 0.0);
        let sx = HermitianOp::new(pauli::x()).unwrap();
        let vals = tensor(&sx, &HermitianOp::identity(2)).eigenvalues().unwrap();
        for (v, e) in vals.iter().zip([-1.0, -1.0, 1.0, 1.0]) {
            assert!(close(*v, e, 1e-14));
        }
    }

    #[test]
    fn eig_diag_and_sigma_x() {
        let es = HermitianOp::diagonal(&[3.0, 1.0, 2.0]).eig().unwrap();
        assert_eq!(es.values, vec![1.0, 2.0, 3.0]);
        let es = HermitianOp::new(pauli::x()).unwrap().eig().unwrap();
        assert!(close(es.values[0], -1.0, 1e-14) && close(es.values[1], 1.0, 1e-14));
        let s = 0.5f64.sqrt();
        let v0 = es.real_vector(0).unwrap();
        let v1 = es.real_vector(1).unwrap();
        assert!(close(v0[0], s, 1e-14) && close(v0[1], -s, 1e-14));
        assert!(close(v1[0], s, 1e-14) && close(v1[1], s, 1e-14));
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let m = Mat::from_fn(2, 2, |i, j| if i == 0 && j == 1 { 1.0 } else { 0.0 });
        assert!(matches!(HermitianOp::from_real(m), Err(Error::Validation(_))));
    }

    #[test]
    fn expm_zero_and_pauli() {
        let z = expm_antihermitian(&Operator::zeros(3)).unwrap();
        assert!(z.try_sub(&Operator::identity(3)).unwrap().max_abs() < 1e-14);
        let k = pauli::x().scale_complex(c64::new(0.0, std::f64::consts::FRAC_PI_2));
        let u = expm_antihermitian(&k).unwrap();
        let expected = pauli::x().scale_complex(c64::new(0.0, 1.0));
        assert!(u.try_sub(&expected).unwrap().max_abs() < 1e-12);
        assert!(matches!(expm_antihermitian(&pauli::x()), Err(Error::Validation(_))));
    }

    #[test]
    fn squeeze_identity_and_vacuum_occupation() {
        let s0 = squeeze_matrix(0.0, 5).unwrap();
        assert_eq!(s0, Mat::<f64>::identity(5, 5));
        let r = 0.2;
        let s = squeeze_matrix(r, 60).unwrap();
        let occ: f64 = (0..60).map(|n| n as f64 * s[(n, 0)].powi(2)).sum();
        assert!(close(occ, r.sinh().powi(2), 1e-8), "{occ}");
    }

    #[test]
    fn quadrature_squares_are_exact_truncations() {
        let n = 8;
        let x2 = quad_x_sq(n);
        let p2 = quad_p_sq(n);
        for i in 0..n {
            assert!(close(x2[(i, i)] + p2[(i, i)], 2.0 * i as f64 + 1.0, 1e-15));
        }
        let x = quad_x(n);
        let xx = &x * &x;
        for i in 0..n - 1 {
            for j in 0..n - 1 {
                assert!(close(xx[(i, j)], x2[(i, j)], 1e-14));
            }
        }
    }
}
