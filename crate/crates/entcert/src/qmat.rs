//! Dense complex matrices, Hermitian eigenvalues, partial transpose and
//! density-matrix validation.
//!
//! Basis convention: index bit `n - 1 - q` holds qubit `q`, so qubit 0 is the
//! most significant bit and `|0...0>` is row 0.

use num_complex::Complex64;
use std::fmt;
use thiserror::Error;

pub type C64 = Complex64;

pub const VALIDATION_TOL: f64 = 1e-9;
pub const ALGEBRAIC_TOL: f64 = 1e-12;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QmatError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("not Hermitian: max |m - m^dagger| = {deviation:e} exceeds tolerance {tol:e}")]
    NotHermitian { deviation: f64, tol: f64 },
    #[error("trace is {value} + {imag}i, expected 1 within {tol:e}")]
    Trace { value: f64, imag: f64, tol: f64 },
    #[error("negative eigenvalue {value:e} below -{tol:e}")]
    NegativeEigenvalue { value: f64, tol: f64 },
    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    QubitOutOfRange { index: usize, n_qubits: usize },
    #[error("expectation value has imaginary residue {residue:e} above {tol:e}")]
    ImaginaryResidue { residue: f64, tol: f64 },
    #[error("state vector norm squared is {norm_sq}, expected 1 within {tol:e}")]
    Norm { norm_sq: f64, tol: f64 },
    #[error("unsupported qubit count {0} (1..=8 supported)")]
    QubitCount(usize),
}

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self.data[r * self.cols + c];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self, QmatError> {
        if rows * cols != data.len() {
            return Err(QmatError::Dimension(format!("{rows}x{cols} needs {} entries, got {}", rows * cols, data.len())));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Square matrix from real row-major entries.
    pub fn from_real(dim: usize, entries: &[f64]) -> Result<Self, QmatError> {
        Self::new(dim, dim, entries.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn diagonal(values: &[C64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, v) in values.iter().enumerate() {
            m.data[i * n + i] = *v;
        }
        m
    }

    /// `|u><v|`
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        Self::from_fn(u.len(), v.len(), |r, c| u[r] * v[c].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: C64) {
        self.data[r * self.cols + c] = v;
    }

    fn require_square(&self) -> Result<usize, QmatError> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(QmatError::NotSquare { rows: self.rows, cols: self.cols })
        }
    }

    pub fn kron(&self, other: &Self) -> Self {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut data = vec![ZERO; rows * cols];
        for ar in 0..self.rows {
            for ac in 0..self.cols {
                let a = self.get(ar, ac);
                if a == ZERO {
                    continue;
                }
                for br in 0..other.rows {
                    let row = ar * other.rows + br;
                    let base = row * cols + ac * other.cols;
                    let src = &other.data[br * other.cols..(br + 1) * other.cols];
                    for (dst, b) in data[base..base + other.cols].iter_mut().zip(src) {
                        *dst = a * b;
                    }
                }
            }
        }
        Self { rows, cols, data }
    }

    /// Matrix product. Panics if the inner dimensions differ.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul inner dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            let out_row = &mut out.data[r * other.cols..(r + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[r * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let src = &other.data[k * other.cols..(k + 1) * other.cols];
                for (dst, b) in out_row.iter_mut().zip(src) {
                    *dst += a * b;
                }
            }
        }
        out
    }

    fn zip_with(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Self {
        assert!(self.rows == other.rows && self.cols == other.cols, "elementwise operation on mismatched shapes");
        let data = self.data.iter().zip(&other.data).map(|(a, b)| f(*a, *b)).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r).conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }

    pub fn trace(&self) -> Result<C64, QmatError> {
        let n = self.require_square()?;
        Ok((0..n).map(|i| self.get(i, i)).sum())
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    pub fn anticommutator(&self, other: &Self) -> Self {
        self.mul(other).add(&other.mul(self))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert!(self.rows == other.rows && self.cols == other.cols, "shape mismatch");
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut dev: f64 = 0.0;
        for r in 0..n {
            for c in r..n {
                dev = dev.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        dev
    }

    /// Conjugate `self` by `u`: `u self u^dagger`.
    pub fn conjugate_by(&self, u: &Self) -> Self {
        u.mul(self).mul(&u.adjoint())
    }

    /// Transpose the tensor indices of the qubits in `subset`.
    pub fn partial_transpose(&self, n_qubits: usize, subset: &[usize]) -> Result<Self, QmatError> {
        let dim = self.require_square()?;
        if dim != 1 << n_qubits {
            return Err(QmatError::Dimension(format!("dimension {dim} is not 2^{n_qubits}")));
        }
        let mut mask = 0usize;
        for &q in subset {
            if q >= n_qubits {
                return Err(QmatError::QubitOutOfRange { index: q, n_qubits });
            }
            mask |= 1 << (n_qubits - 1 - q);
        }
        Ok(Self::from_fn(dim, dim, |r, c| {
            let r2 = (r & !mask) | (c & mask);
            let c2 = (c & !mask) | (r & mask);
            self.get(r2, c2)
        }))
    }
}

pub mod pauli {
    use super::{ComplexMatrix, C64};

    pub fn identity() -> ComplexMatrix {
        ComplexMatrix::identity(2)
    }

    pub fn x() -> ComplexMatrix {
        ComplexMatrix::from_real(2, &[0.0, 1.0, 1.0, 0.0]).expect("2x2")
    }

    pub fn y() -> ComplexMatrix {
        let i = C64::new(0.0, 1.0);
        ComplexMatrix::new(2, 2, vec![C64::new(0.0, 0.0), -i, i, C64::new(0.0, 0.0)]).expect("2x2")
    }

    pub fn z() -> ComplexMatrix {
        ComplexMatrix::from_real(2, &[1.0, 0.0, 0.0, -1.0]).expect("2x2")
    }

    /// `|b><b|` on one qubit.
    pub fn projector(bit: usize) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(2, 2);
        m.set(bit, bit, C64::new(1.0, 0.0));
        m
    }

    /// Kronecker product of a list of matrices, left to right.
    pub fn kron_all(factors: &[ComplexMatrix]) -> ComplexMatrix {
        factors.iter().fold(ComplexMatrix::identity(1), |acc, f| acc.kron(f))
    }
}

/// Eigen-decomposition of a Hermitian matrix by cyclic Jacobi rotations.
/// Returns ascending eigenvalues and the matching eigenvectors as columns.
pub fn hermitian_eigen(m: &ComplexMatrix, tol: f64) -> Result<(Vec<f64>, ComplexMatrix), QmatError> {
    let n = m.require_square()?;
    let deviation = m.hermitian_deviation();
    if deviation > tol {
        return Err(QmatError::NotHermitian { deviation, tol });
    }
    // Symmetrize so the iteration works on an exactly Hermitian matrix.
    let mut a = ComplexMatrix::from_fn(n, n, |r, c| (m.get(r, c) + m.get(c, r).conj()) * 0.5);
    let mut v = ComplexMatrix::identity(n);
    let scale = a.max_abs().max(f64::MIN_POSITIVE);

    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a.get(p, q).norm_sqr();
            }
        }
        if off.sqrt() <= 1e-15 * scale * n as f64 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                let abs = apq.norm();
                if abs <= 1e-300 || abs <= 1e-18 * scale {
                    continue;
                }
                let phase = apq / abs;
                let app = a.get(p, p).re;
                let aqq = a.get(q, q).re;
                let theta = (aqq - app) / (2.0 * abs);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // U acts on the (p, q) plane: U = D R with D = diag(1, conj(phase)).
                let u_pp = C64::new(c, 0.0);
                let u_pq = C64::new(s, 0.0);
                let u_qp = -phase.conj() * s;
                let u_qq = phase.conj() * c;
                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, akp * u_pp + akq * u_qp);
                    a.set(k, q, akp * u_pq + akq * u_qq);
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, vkp * u_pp + vkq * u_qp);
                    v.set(k, q, vkp * u_pq + vkq * u_qq);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, u_pp.conj() * apk + u_qp.conj() * aqk);
                    a.set(q, k, u_pq.conj() * apk + u_qq.conj() * aqk);
                }
                a.set(p, q, ZERO);
                a.set(q, p, ZERO);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a.get(i, i).re).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));
    let values = order.iter().map(|&i| diag[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| v.get(r, order[c]));
    Ok((values, vectors))
}

pub fn hermitian_eigenvalues(m: &ComplexMatrix, tol: f64) -> Result<Vec<f64>, QmatError> {
    hermitian_eigen(m, tol).map(|(values, _)| values)
}

/// Cholesky factorization attempt; true when `m` is numerically positive definite.
fn cholesky_succeeds(m: &ComplexMatrix) -> bool {
    let n = m.rows();
    let mut l = vec![ZERO; n * n];
    for j in 0..n {
        let mut d = m.get(j, j).re;
        for k in 0..j {
            d -= l[j * n + k].norm_sqr();
        }
        // Also rejects NaN.
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(d > 0.0) {
            return false;
        }
        let d = d.sqrt();
        l[j * n + j] = C64::new(d, 0.0);
        for i in (j + 1)..n {
            let mut s = m.get(i, j);
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k].conj();
            }
            l[i * n + j] = s / d;
        }
    }
    true
}

/// A validated density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    matrix: ComplexMatrix,
    tolerance: f64,
}

impl DensityMatrix {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    /// Zero-based entry access.
    #[inline]
    pub fn entry(&self, r: usize, c: usize) -> C64 {
        self.matrix.get(r, c)
    }

    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let d = 1 << n_qubits;
        Self::from_trusted(ComplexMatrix::identity(d).scale_real(1.0 / d as f64), n_qubits)
    }

    /// Wrap a matrix that is a density matrix by construction (a channel output,
    /// a convex mixture of validated states). Skips the eigenvalue check.
    pub(crate) fn from_trusted(matrix: ComplexMatrix, n_qubits: usize) -> Self {
        debug_assert_eq!(matrix.rows(), 1 << n_qubits);
        Self { n_qubits, matrix, tolerance: VALIDATION_TOL }
    }

    /// Convex combination `sum w_i rho_i` of states on the same qubits.
    pub fn mixture(terms: &[(f64, &DensityMatrix)]) -> Result<Self, QmatError> {
        let first = terms.first().ok_or_else(|| QmatError::Dimension("empty mixture".into()))?;
        let n = first.1.n_qubits;
        let d = 1 << n;
        let mut acc = ComplexMatrix::zeros(d, d);
        for (w, rho) in terms {
            if rho.n_qubits != n {
                return Err(QmatError::Dimension("mixture of different qubit counts".into()));
            }
            acc = acc.add(&rho.matrix.scale_real(*w));
        }
        validate_density(&acc, n, first.1.tolerance)
    }
}

/// Check the density-matrix invariants, naming the first one that fails.
pub fn validate_density(m: &ComplexMatrix, n_qubits: usize, tol: f64) -> Result<DensityMatrix, QmatError> {
    if n_qubits == 0 || n_qubits > 8 {
        return Err(QmatError::QubitCount(n_qubits));
    }
    let d = 1usize << n_qubits;
    if m.rows() != d || m.cols() != d {
        return Err(QmatError::Dimension(format!("expected {d}x{d} for {n_qubits} qubits, got {}x{}", m.rows(), m.cols())));
    }
    let deviation = m.hermitian_deviation();
    if deviation > tol {
        return Err(QmatError::NotHermitian { deviation, tol });
    }
    let tr = m.trace()?;
    if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
        return Err(QmatError::Trace { value: tr.re, imag: tr.im, tol });
    }
    let herm = ComplexMatrix::from_fn(d, d, |r, c| (m.get(r, c) + m.get(c, r).conj()) * 0.5);
    let shifted = herm.add(&ComplexMatrix::identity(d).scale_real(tol));
    if !cholesky_succeeds(&shifted) {
        let values = hermitian_eigenvalues(&herm, tol)?;
        let min = values.first().copied().unwrap_or(0.0);
        if min < -tol {
            return Err(QmatError::NegativeEigenvalue { value: min, tol });
        }
    }
    Ok(DensityMatrix { n_qubits, matrix: herm, tolerance: tol })
}

/// `Re Tr(rho op)` after checking dimensions, hermiticity and the imaginary residue.
pub fn expectation(rho: &DensityMatrix, op: &ComplexMatrix) -> Result<f64, QmatError> {
    let d = rho.dim();
    if op.rows() != d || op.cols() != d {
        return Err(QmatError::Dimension(format!("operator is {}x{}, state is {d}x{d}", op.rows(), op.cols())));
    }
    let tol = rho.tolerance;
    let deviation = op.hermitian_deviation();
    if deviation > tol {
        return Err(QmatError::NotHermitian { deviation, tol });
    }
    let value = trace_product(rho.matrix(), op);
    let residue = value.im.abs();
    if residue > tol * op.max_abs().max(1.0) {
        return Err(QmatError::ImaginaryResidue { residue, tol });
    }
    Ok(value.re)
}

/// `Tr(a b)` without forming the product.
pub fn trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    let n = a.rows();
    let mut acc = ZERO;
    for i in 0..n {
        for j in 0..n {
            let bji = b.get(j, i);
            if bji != ZERO {
                acc += a.get(i, j) * bji;
            }
        }
    }
    acc
}

pub fn partial_transpose(rho: &DensityMatrix, subset: &[usize]) -> Result<ComplexMatrix, QmatError> {
    rho.matrix.partial_transpose(rho.n_qubits, subset)
}

/// True iff the partial transpose over `subset` has no eigenvalue below `-tol`.
pub fn is_ppt(rho: &DensityMatrix, subset: &[usize], tol: f64) -> Result<bool, QmatError> {
    let pt = partial_transpose(rho, subset)?;
    Ok(min_eigenvalue(&pt, tol)? >= -tol)
}

pub fn min_eigenvalue(m: &ComplexMatrix, tol: f64) -> Result<f64, QmatError> {
    Ok(hermitian_eigenvalues(m, tol.max(ALGEBRAIC_TOL))?.first().copied().unwrap_or(0.0))
}

/// Normalized state vector on `n_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    n_qubits: usize,
    amplitudes: Vec<C64>,
}

impl PureState {
    pub fn new(n_qubits: usize, amplitudes: Vec<C64>, tol: f64) -> Result<Self, QmatError> {
        if n_qubits == 0 || n_qubits > 8 {
            return Err(QmatError::QubitCount(n_qubits));
        }
        if amplitudes.len() != 1 << n_qubits {
            return Err(QmatError::Dimension(format!("{} amplitudes for {n_qubits} qubits", amplitudes.len())));
        }
        let norm_sq: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > tol {
            return Err(QmatError::Norm { norm_sq, tol });
        }
        Ok(Self { n_qubits, amplitudes })
    }

    /// Normalize an arbitrary non-zero vector.
    pub fn normalized(n_qubits: usize, amplitudes: Vec<C64>) -> Result<Self, QmatError> {
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(QmatError::Norm { norm_sq: 0.0, tol: VALIDATION_TOL });
        }
        Self::new(n_qubits, amplitudes.into_iter().map(|a| a / norm).collect(), VALIDATION_TOL)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Result<Self, QmatError> {
        let mut amps = vec![ZERO; 1 << n_qubits];
        let slot = amps.get_mut(index).ok_or_else(|| QmatError::Dimension(format!("basis index {index} out of range")))?;
        *slot = ONE;
        Self::new(n_qubits, amps, VALIDATION_TOL)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn inner(&self, other: &PureState) -> C64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn kron(&self, other: &PureState) -> PureState {
        let mut amps = Vec::with_capacity(self.amplitudes.len() * other.amplitudes.len());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amps.push(a * b);
            }
        }
        PureState { n_qubits: self.n_qubits + other.n_qubits, amplitudes: amps }
    }

    pub fn projector(&self) -> DensityMatrix {
        DensityMatrix::from_trusted(ComplexMatrix::outer(&self.amplitudes, &self.amplitudes), self.n_qubits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, n, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }

    fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
        let a = random_matrix(rng, n);
        a.add(&a.adjoint()).scale_real(0.5)
    }

    #[test]
    fn kron_of_sigma_x_pair_is_antidiagonal() {
        let k = pauli::x().kron(&pauli::x());
        for r in 0..4 {
            for c in 0..4 {
                let expect = if r + c == 3 { 1.0 } else { 0.0 };
                assert_eq!(k.get(r, c), C64::new(expect, 0.0));
            }
        }
        assert_eq!(pauli::identity().kron(&pauli::identity()), ComplexMatrix::identity(4));
    }

    #[test]
    fn kron_mixed_product_rule() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (a, b, c, d) = (random_matrix(&mut rng, 2), random_matrix(&mut rng, 2), random_matrix(&mut rng, 2), random_matrix(&mut rng, 2));
        let lhs = a.kron(&b).mul(&c.kron(&d));
        let rhs = a.mul(&c).kron(&b.mul(&d));
        // Explicit entry formula for the 4x4 product.
        for r in 0..4 {
            for col in 0..4 {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..4 {
                    acc += a.get(r / 2, k / 2) * b.get(r % 2, k % 2) * c.get(k / 2, col / 2) * d.get(k % 2, col % 2);
                }
                assert!((lhs.get(r, col) - acc).norm() < 1e-12);
            }
        }
        assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }

    #[test]
    fn eigenvalues_of_paulis() {
        for m in [pauli::z(), pauli::x(), pauli::y()] {
            let ev = hermitian_eigenvalues(&m, 1e-12).unwrap();
            assert!((ev[0] + 1.0).abs() < 1e-12 && (ev[1] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn eigen_reconstruction_and_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [3, 8, 16] {
            let h = random_hermitian(&mut rng, n);
            let (values, vectors) = hermitian_eigen(&h, 1e-12).unwrap();
            let tr = h.trace().unwrap().re;
            assert!((values.iter().sum::<f64>() - tr).abs() < 1e-10);
            assert!(values.windows(2).all(|w| w[0] <= w[1]));
            let lambda = ComplexMatrix::diagonal(&values.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>());
            let rebuilt = vectors.mul(&lambda).mul(&vectors.adjoint());
            assert!(rebuilt.max_abs_diff(&h) < 10.0 * 1e-9);
        }
    }

    #[test]
    fn eigen_rejects_bad_input() {
        let rect = ComplexMatrix::zeros(2, 3);
        assert!(matches!(hermitian_eigenvalues(&rect, 1e-9), Err(QmatError::NotSquare { .. })));
        let mut m = ComplexMatrix::zeros(2, 2);
        m.set(0, 1, C64::new(1.0, 0.0));
        assert!(matches!(hermitian_eigenvalues(&m, 1e-9), Err(QmatError::NotHermitian { .. })));
    }

    fn bell_phi_plus() -> DensityMatrix {
        let s = 1.0 / 2f64.sqrt();
        let amps = vec![C64::new(s, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(s, 0.0)];
        PureState::new(2, amps, 1e-12).unwrap().projector()
    }

    #[test]
    fn bell_partial_transpose_spectrum() {
        let pt = partial_transpose(&bell_phi_plus(), &[1]).unwrap();
        let ev = hermitian_eigenvalues(&pt, 1e-12).unwrap();
        let expect = [-0.5, 0.5, 0.5, 0.5];
        for (a, b) in ev.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(!is_ppt(&bell_phi_plus(), &[1], 1e-9).unwrap());
        assert!(is_ppt(&DensityMatrix::maximally_mixed(3), &[0, 2], 1e-9).unwrap());
    }

    #[test]
    fn partial_transpose_out_of_range() {
        let rho = DensityMatrix::maximally_mixed(2);
        assert!(matches!(partial_transpose(&rho, &[2]), Err(QmatError::QubitOutOfRange { .. })));
    }

    #[test]
    fn validation_names_the_failed_invariant() {
        let d = 8;
        let ok = ComplexMatrix::identity(d).scale_real(1.0 / d as f64);
        assert!(validate_density(&ok, 3, 1e-9).is_ok());
        let doubled = ok.scale_real(2.0);
        assert!(matches!(validate_density(&doubled, 3, 1e-9), Err(QmatError::Trace { .. })));
        assert!(matches!(validate_density(&ok, 2, 1e-9), Err(QmatError::Dimension(_))));
        let mut neg = ComplexMatrix::zeros(2, 2);
        neg.set(0, 0, C64::new(1.5, 0.0));
        neg.set(1, 1, C64::new(-0.5, 0.0));
        assert!(matches!(validate_density(&neg, 1, 1e-9), Err(QmatError::NegativeEigenvalue { .. })));
        let mut skew = ok.clone();
        skew.set(0, 1, C64::new(0.1, 0.0));
        assert!(matches!(validate_density(&skew, 3, 1e-9), Err(QmatError::NotHermitian { .. })));
    }

    #[test]
    fn ghz_projector_validates() {
        for n in 2..=6 {
            let d = 1 << n;
            let s = 1.0 / 2f64.sqrt();
            let mut amps = vec![C64::new(0.0, 0.0); d];
            amps[0] = C64::new(s, 0.0);
            amps[d - 1] = C64::new(s, 0.0);
            let proj = PureState::new(n, amps, 1e-12).unwrap().projector();
            assert!(validate_density(proj.matrix(), n, 1e-9).is_ok());
        }
    }

    #[test]
    fn expectation_basics() {
        let zero = PureState::basis(2, 0).unwrap().projector();
        let zz = pauli::z().kron(&pauli::z());
        assert!((expectation(&zero, &zz).unwrap() - 1.0).abs() < 1e-15);
        let mixed = DensityMatrix::maximally_mixed(2);
        assert!(expectation(&mixed, &pauli::x().kron(&pauli::y())).unwrap().abs() < 1e-15);
        assert!(matches!(expectation(&mixed, &pauli::x()), Err(QmatError::Dimension(_))));
        let mut bad = ComplexMatrix::zeros(4, 4);
        bad.set(0, 1, C64::new(1.0, 0.0));
        assert!(matches!(expectation(&mixed, &bad), Err(QmatError::NotHermitian { .. })));
    }

    #[test]
    fn pure_state_norm_checked() {
        let amps = vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)];
        assert!(matches!(PureState::new(1, amps.clone(), 1e-9), Err(QmatError::Norm { .. })));
        assert!(PureState::normalized(1, amps).is_ok());
    }
}
