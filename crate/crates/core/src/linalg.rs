//! Dense complex matrices sized for up to twelve qubits.

use std::ops::{Deref, Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest supported matrix dimension (twelve qubits).
pub const MAX_DIM: usize = 1 << 12;

/// Jacobi stops once the off-diagonal Frobenius norm is below this (scaled by
/// the matrix norm when that exceeds one).
const JACOBI_OFF_TOL: f64 = 1e-13;
const JACOBI_MAX_SWEEPS: usize = 64;

/// Eigenvalues in `[-NEGATIVE_CLAMP, 0)` are rounding noise on a PSD matrix.
pub const NEGATIVE_CLAMP: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Square complex matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::InvalidParameter("matrix dimension must be at least 1".into()));
    }
    if dim > MAX_DIM {
        return Err(Error::DimensionTooLarge(dim));
    }
    Ok(())
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self { dim, data: vec![ZERO; dim * dim] })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        let mut m = Self::zeros(dim)?;
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        Ok(m)
    }

    /// Zero matrix acting on `n_qubits` qubits, i.e. of dimension `2^n_qubits`.
    pub fn for_qubits(n_qubits: usize) -> Result<Self> {
        if n_qubits >= usize::BITS as usize {
            return Err(Error::DimensionTooLarge(usize::MAX));
        }
        Self::zeros(1 << n_qubits)
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Result<Self> {
        check_dim(dim)?;
        let mut data = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                data.push(f(r, c));
            }
        }
        Ok(Self { dim, data })
    }

    /// Builds a matrix from row-major entries; `data.len()` must be a square.
    pub fn from_row_major(data: Vec<Complex64>) -> Result<Self> {
        let dim = (data.len() as f64).sqrt().round() as usize;
        if dim * dim != data.len() {
            return Err(Error::InvalidParameter(format!(
                "{} entries do not form a square matrix",
                data.len()
            )));
        }
        check_dim(dim)?;
        Ok(Self { dim, data })
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidParameter("rows must all have length equal to the row count".into()));
        }
        Self::from_fn(dim, |r, c| Complex64::new(rows[r][c], 0.0))
    }

    pub fn pauli_x() -> Self {
        Self { dim: 2, data: vec![ZERO, ONE, ONE, ZERO] }
    }

    pub fn pauli_z() -> Self {
        Self { dim: 2, data: vec![ONE, ZERO, ZERO, -ONE] }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.dim..(r + 1) * self.dim]
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut data = vec![ZERO; n * n];
        for r in 0..n {
            for c in 0..n {
                data[c * n + r] = self.data[r * n + c].conj();
            }
        }
        Self { dim: n, data }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|z| z * factor).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        same_dim(self, other)?;
        Ok(Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    /// `max |a[i,j] - conj(a[j,i])|`.
    pub fn max_hermitian_deviation(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for r in 0..n {
            for c in r..n {
                worst = worst.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        worst
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch { left: self.dim, right: v.len() });
        }
        Ok((0..self.dim)
            .map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.dim + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.dim + c]
    }
}

fn same_dim(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<()> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch { left: a.dim, right: b.dim });
    }
    Ok(())
}

/// Kronecker product: `result[(i*nb + k), (j*nb + l)] = a[i,j] * b[k,l]`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (na, nb) = (a.dim, b.dim);
    let n = na.checked_mul(nb).ok_or(Error::DimensionTooLarge(usize::MAX))?;
    let mut out = ComplexMatrix::zeros(n)?;
    for i in 0..na {
        for j in 0..na {
            let aij = a[(i, j)];
            if aij == ZERO {
                continue;
            }
            for k in 0..nb {
                let dst = (i * nb + k) * n + j * nb;
                for (l, bkl) in b.row(k).iter().enumerate() {
                    out.data[dst + l] = aij * bkl;
                }
            }
        }
    }
    Ok(out)
}

pub fn matmul(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    same_dim(a, b)?;
    let n = a.dim;
    let mut out = vec![ZERO; n * n];
    for i in 0..n {
        let out_row = &mut out[i * n..(i + 1) * n];
        for (k, aik) in a.row(i).iter().enumerate() {
            if *aik == ZERO {
                continue;
            }
            for (o, bkj) in out_row.iter_mut().zip(b.row(k)) {
                *o += aik * bkj;
            }
        }
    }
    Ok(ComplexMatrix { dim: n, data: out })
}

/// Element-wise (Hadamard/Schur) product.
pub fn schur(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    same_dim(a, b)?;
    Ok(ComplexMatrix {
        dim: a.dim,
        data: a.data.iter().zip(&b.data).map(|(x, y)| x * y).collect(),
    })
}

pub fn frobenius_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    same_dim(a, b)?;
    Ok(a.data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt())
}

/// `Tr[a b]` without forming the product.
pub fn trace_of_product(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<Complex64> {
    same_dim(a, b)?;
    let n = a.dim;
    let mut acc = ZERO;
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    Ok(acc)
}

/// Eigenvalues of a Hermitian matrix, sorted descending.
///
/// Cyclic complex Jacobi: each rotation first removes the phase of the pivot
/// `a[p,q]` and then applies the real symmetric 2×2 rotation that annihilates
/// it. Sweeps continue until the off-diagonal Frobenius norm drops below
/// `1e-13` (relative to the matrix norm when that exceeds one). Input must be
/// Hermitian within `tol`; it is symmetrized before iterating.
pub fn hermitian_eigenvalues(a: &ComplexMatrix, tol: f64) -> Result<Vec<f64>> {
    let deviation = a.max_hermitian_deviation();
    if deviation > tol {
        return Err(Error::NotHermitian { deviation });
    }
    let n = a.dim;
    let mut m = a.clone();
    for r in 0..n {
        m[(r, r)] = Complex64::new(m[(r, r)].re, 0.0);
        for c in r + 1..n {
            let avg = (m[(r, c)] + m[(c, r)].conj()) * 0.5;
            m[(r, c)] = avg;
            m[(c, r)] = avg.conj();
        }
    }

    let target = JACOBI_OFF_TOL * m.frobenius_norm().max(1.0);
    let mut off = off_diagonal_norm(&m);
    let mut sweeps = 0;
    while off > target {
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence { sweeps, off_norm: off });
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut m, p, q);
            }
        }
        off = off_diagonal_norm(&m);
        sweeps += 1;
    }

    let mut eig: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
    eig.sort_by(|x, y| y.total_cmp(x));
    Ok(eig)
}

fn off_diagonal_norm(m: &ComplexMatrix) -> f64 {
    let n = m.dim;
    let mut acc = 0.0;
    for r in 0..n {
        for c in 0..n {
            if r != c {
                acc += m[(r, c)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

fn rotate(m: &mut ComplexMatrix, p: usize, q: usize) {
    let n = m.dim;
    let apq = m[(p, q)];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;
    let phase = apq / r;

    let theta = (aqq - app) / (2.0 * r);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        let t = 1.0 / (theta.abs() + (theta * theta + 1.0).sqrt());
        if theta < 0.0 { -t } else { t }
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    // G = diag(1, conj(phase)) · [[c, s], [-s, c]] on the (p, q) plane.
    let g_pp = Complex64::new(c, 0.0);
    let g_pq = Complex64::new(s, 0.0);
    let g_qp = -phase.conj() * s;
    let g_qq = phase.conj() * c;

    for k in 0..n {
        let akp = m.data[k * n + p];
        let akq = m.data[k * n + q];
        m.data[k * n + p] = akp * g_pp + akq * g_qp;
        m.data[k * n + q] = akp * g_pq + akq * g_qq;
    }
    for k in 0..n {
        let apk = m.data[p * n + k];
        let aqk = m.data[q * n + k];
        m.data[p * n + k] = g_pp.conj() * apk + g_qp.conj() * aqk;
        m.data[q * n + k] = g_pq.conj() * apk + g_qq.conj() * aqk;
    }
    m[(p, q)] = ZERO;
    m[(q, p)] = ZERO;
    m[(p, p)] = Complex64::new(app - t * r, 0.0);
    m[(q, q)] = Complex64::new(aqq + t * r, 0.0);
}

/// Tolerance on Hermiticity and unit trace accepted by [`DensityMatrix::new`].
pub const DENSITY_TOL: f64 = 1e-9;

/// A qubit-register state: Hermitian, unit trace, dimension `2^n`.
///
/// Positivity is not checked on construction (it would cost an
/// eigendecomposition); every state produced by this crate is PSD.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if !m.dim.is_power_of_two() || m.dim < 2 {
            return Err(Error::NotPowerOfTwo(m.dim));
        }
        let deviation = m.max_hermitian_deviation();
        if deviation > DENSITY_TOL {
            return Err(Error::InvalidDensity(format!("not Hermitian (deviation {deviation:e})")));
        }
        let tr = m.trace();
        if (tr - ONE).norm() > DENSITY_TOL {
            return Err(Error::InvalidDensity(format!("trace is {tr}, expected 1")));
        }
        Ok(Self(m))
    }

    pub fn maximally_mixed(n_qubits: usize) -> Result<Self> {
        let id = ComplexMatrix::identity(1usize.checked_shl(n_qubits as u32).unwrap_or(0))?;
        let d = id.dim() as f64;
        Self::new(id.scale(Complex64::new(1.0 / d, 0.0)))
    }

    /// `|ψ⟩⟨ψ|` for a (not necessarily normalized) state vector.
    pub fn from_pure(psi: &[Complex64]) -> Result<Self> {
        let norm_sqr: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if norm_sqr == 0.0 {
            return Err(Error::InvalidDensity("zero state vector".into()));
        }
        let m = ComplexMatrix::from_fn(psi.len(), |r, c| psi[r] * psi[c].conj() / norm_sqr)?;
        Self::new(m)
    }

    pub fn n_qubits(&self) -> usize {
        self.0.dim.trailing_zeros() as usize
    }

    pub fn as_matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        hermitian_eigenvalues(&self.0, DENSITY_TOL)
    }
}

impl Deref for DensityMatrix {
    type Target = ComplexMatrix;

    fn deref(&self) -> &ComplexMatrix {
        &self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn basis(dim: usize, i: usize) -> Vec<Complex64> {
        let mut v = vec![ZERO; dim];
        v[i] = ONE;
        v
    }

    #[test]
    fn kron_identities_and_dims() {
        let i2 = ComplexMatrix::identity(2).unwrap();
        assert_eq!(kron(&i2, &i2).unwrap(), ComplexMatrix::identity(4).unwrap());
        assert_eq!(kron(&ComplexMatrix::pauli_x(), &i2).unwrap().dim(), 4);
    }

    #[test]
    fn kron_xx_flips_both_qubits() {
        let xx = kron(&ComplexMatrix::pauli_x(), &ComplexMatrix::pauli_x()).unwrap();
        assert_eq!(xx.mul_vec(&basis(4, 0)).unwrap(), basis(4, 3));
        assert_eq!(xx.mul_vec(&basis(4, 1)).unwrap(), basis(4, 2));
    }

    #[test]
    fn kron_rejects_oversized_result() {
        let big = ComplexMatrix::identity(MAX_DIM).unwrap();
        let err = kron(&big, &ComplexMatrix::identity(2).unwrap()).unwrap_err();
        assert!(matches!(err, Error::DimensionTooLarge(_)));
        assert!(matches!(ComplexMatrix::zeros(MAX_DIM * 2), Err(Error::DimensionTooLarge(_))));
        assert!(ComplexMatrix::zeros(0).is_err());
    }

    #[test]
    fn kron_index_layout() {
        let a = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]).unwrap();
        let b = ComplexMatrix::from_real_rows(&[&[5.0, 6.0, 7.0], &[8.0, 9.0, 10.0], &[11.0, 12.0, 13.0]])
            .unwrap();
        let k = kron(&a, &b).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                for r in 0..3 {
                    for s in 0..3 {
                        assert_eq!(k[(i * 3 + r, j * 3 + s)], a[(i, j)] * b[(r, s)]);
                    }
                }
            }
        }
    }

    #[test]
    fn basic_ops() {
        let id16 = ComplexMatrix::identity(16).unwrap().scale(c(1.0 / 16.0));
        assert!((id16.trace() - ONE).norm() < 1e-15);

        let a = ComplexMatrix::from_fn(3, |r, col| Complex64::new(r as f64 + 0.5, col as f64 - 1.0)).unwrap();
        assert_eq!(a.adjoint().adjoint(), a);
        assert_eq!(frobenius_distance(&a, &a).unwrap(), 0.0);

        let b = ComplexMatrix::from_fn(3, |r, col| Complex64::new((r * col) as f64, 1.0)).unwrap();
        assert_eq!(schur(&a, &b).unwrap(), schur(&b, &a).unwrap());
        let ab = matmul(&a, &b).unwrap();
        assert!((ab.trace() - trace_of_product(&a, &b).unwrap()).norm() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_errors() {
        let a = ComplexMatrix::identity(2).unwrap();
        let b = ComplexMatrix::identity(4).unwrap();
        assert!(matches!(matmul(&a, &b), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(schur(&a, &b), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(frobenius_distance(&a, &b), Err(Error::DimensionMismatch { .. })));
        assert!(a.mul_vec(&[ONE]).is_err());
    }

    #[test]
    fn eigenvalues_of_pauli_and_scalar() {
        let e = hermitian_eigenvalues(&ComplexMatrix::pauli_x(), 1e-12).unwrap();
        assert!((e[0] - 1.0).abs() < 1e-14 && (e[1] + 1.0).abs() < 1e-14);

        let id16 = ComplexMatrix::identity(16).unwrap().scale(c(1.0 / 16.0));
        for v in hermitian_eigenvalues(&id16, 1e-12).unwrap() {
            assert!((v - 1.0 / 16.0).abs() < 1e-15);
        }
    }

    #[test]
    fn eigenvalues_of_complex_hermitian_2x2() {
        // [[2, 1-i], [1+i, 3]]: trace 5, det 4, eigenvalues 4 and 1.
        let m = ComplexMatrix::from_row_major(vec![
            c(2.0),
            Complex64::new(1.0, -1.0),
            Complex64::new(1.0, 1.0),
            c(3.0),
        ])
        .unwrap();
        let e = hermitian_eigenvalues(&m, 1e-12).unwrap();
        assert!((e[0] - 4.0).abs() < 1e-13 && (e[1] - 1.0).abs() < 1e-13);
    }

    #[test]
    fn eigenvalues_of_rank_one_projector() {
        let mut psi = vec![ZERO; 16];
        psi[0] = ONE;
        psi[15] = ONE;
        let rho = DensityMatrix::from_pure(&psi).unwrap();
        let idempotent = matmul(&rho, &rho).unwrap();
        assert!(frobenius_distance(&idempotent, &rho).unwrap() < 1e-15);
        let e = rho.eigenvalues().unwrap();
        assert!((e[0] - 1.0).abs() < 1e-12);
        assert!(e[1..].iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn non_hermitian_is_rejected() {
        let m = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[0.0, 1.0]]).unwrap();
        assert!(matches!(hermitian_eigenvalues(&m, 1e-9), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::maximally_mixed(4).is_ok());
        let bad_trace = ComplexMatrix::identity(4).unwrap();
        assert!(matches!(DensityMatrix::new(bad_trace), Err(Error::InvalidDensity(_))));
        let three = ComplexMatrix::identity(3).unwrap().scale(c(1.0 / 3.0));
        assert!(matches!(DensityMatrix::new(three), Err(Error::NotPowerOfTwo(3))));
    }
}
