//! Dense complex matrices and the linear-algebra primitives shared by all
//! modules: Kronecker products, partial traces, dephasing, Hermitian
//! eigendecomposition, positivity tests and von Neumann entropy.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use num_traits::Zero;
// In test builds std is linked and its inherent f64 methods shadow the
// trait, so this import only fires in the no_std library build.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = Complex64;

/// Tolerance below which a Hermitian deviation is accepted by default.
pub const HERM_TOL: f64 = 1e-9;
/// Tolerance below which a negative eigenvalue is accepted (and clamped).
pub const PSD_TOL: f64 = 1e-9;
/// Tolerance on unit trace for density-matrix checks.
pub const TRACE_TOL: f64 = 1e-6;

/// Dimensions of a bipartite space `A ⊗ B`, with the composite index
/// convention `(j, a) -> j * b + a` (`A` slow, `B` fast). For a channel,
/// `a` is the input dimension and `b` the output dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DimPair {
    pub a: usize,
    pub b: usize,
}

impl DimPair {
    pub fn new(a: usize, b: usize) -> Result<Self> {
        if a == 0 || b == 0 {
            return Err(Error::ZeroDimension);
        }
        Ok(DimPair { a, b })
    }

    /// Dimension of the composite space.
    pub fn prod(self) -> usize {
        self.a * self.b
    }

    /// Composite index of `(j, alpha)`.
    #[inline]
    pub fn idx(self, j: usize, alpha: usize) -> usize {
        j * self.b + alpha
    }
}

/// Which factor of a bipartite space to keep in a partial trace.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Dense complex matrix in row-major order.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<C64>,
}

impl core::fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix {
            rows,
            cols,
            entries: vec![C64::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    /// Matrix with a single unit entry at `(r, c)`.
    pub fn unit(rows: usize, cols: usize, r: usize, c: usize) -> Self {
        let mut m = CMatrix::zeros(rows, cols);
        m[(r, c)] = C64::new(1.0, 0.0);
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        CMatrix {
            rows,
            cols,
            entries,
        }
    }

    /// Build from nested rows; all rows must have equal length.
    pub fn from_rows(rows: Vec<Vec<C64>>) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut entries = Vec::with_capacity(nrows * ncols);
        for row in &rows {
            if row.len() != ncols {
                return Err(Error::ShapeMismatch {
                    expected: (nrows, ncols),
                    found: (nrows, row.len()),
                });
            }
            entries.extend_from_slice(row);
        }
        Ok(CMatrix {
            rows: nrows,
            cols: ncols,
            entries,
        })
    }

    /// Diagonal matrix from real values.
    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        let mut m = CMatrix::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = C64::new(v, 0.0);
        }
        m
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

    pub fn all_finite(&self) -> bool {
        self.entries
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn trace(&self) -> C64 {
        debug_assert!(self.is_square());
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    pub fn transpose(&self) -> CMatrix {
        CMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conjugate(&self) -> CMatrix {
        CMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)].conj())
    }

    pub fn adjoint(&self) -> CMatrix {
        CMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scaled(&self, s: C64) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scaled_re(&self, s: f64) -> CMatrix {
        self.scaled(C64::new(s, 0.0))
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Largest modulus of an off-diagonal entry.
    pub fn max_offdiag_abs(&self) -> f64 {
        let mut m = 0.0f64;
        for i in 0..self.rows {
            for j in 0..self.cols {
                if i != j {
                    m = m.max(self[(i, j)].norm());
                }
            }
        }
        m
    }

    /// Largest entrywise deviation from `other`; panics on shape mismatch.
    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.entries
            .iter()
            .zip(&other.entries)
            .fold(0.0, |m, (x, y)| m.max((x - y).norm()))
    }

    /// Largest entrywise deviation from the own adjoint.
    pub fn herm_residual(&self) -> f64 {
        let mut m = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                m = m.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        m
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `self += s * other`; panics on shape mismatch.
    pub fn add_scaled(&mut self, s: C64, other: &CMatrix) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (x, y) in self.entries.iter_mut().zip(&other.entries) {
            *x += s * y;
        }
    }

    pub fn matmul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(
            self.cols, other.rows,
            "matmul shape mismatch: {}x{} * {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self[(i, k)];
                if aik.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += aik * other[(k, j)];
                }
            }
        }
        out
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.entries[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.entries[r * self.cols + c]
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, other: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(x, y)| x + y)
                .collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, other: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(x, y)| x - y)
                .collect(),
        }
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, other: &CMatrix) -> CMatrix {
        self.matmul(other)
    }
}

/// Kronecker product: `(a ⊗ b)[(i*rb + k), (j*cb + l)] = a[i,j] * b[k,l]`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ra, ca, rb, cb) = (a.rows, a.cols, b.rows, b.cols);
    let mut out = CMatrix::zeros(ra * rb, ca * cb);
    for i in 0..ra {
        for j in 0..ca {
            let aij = a[(i, j)];
            if aij.is_zero() {
                continue;
            }
            for k in 0..rb {
                for l in 0..cb {
                    out[(i * rb + k, j * cb + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Partial trace of a square matrix on `A ⊗ B` over the factor not kept.
pub fn partial_trace(m: &CMatrix, dims: DimPair, keep: Subsystem) -> Result<CMatrix> {
    let side = dims.prod();
    if m.rows != side || m.cols != side {
        return Err(Error::ShapeMismatch {
            expected: (side, side),
            found: (m.rows, m.cols),
        });
    }
    match keep {
        Subsystem::A => {
            let mut out = CMatrix::zeros(dims.a, dims.a);
            for j in 0..dims.a {
                for k in 0..dims.a {
                    let mut s = C64::zero();
                    for alpha in 0..dims.b {
                        s += m[(dims.idx(j, alpha), dims.idx(k, alpha))];
                    }
                    out[(j, k)] = s;
                }
            }
            Ok(out)
        }
        Subsystem::B => {
            let mut out = CMatrix::zeros(dims.b, dims.b);
            for alpha in 0..dims.b {
                for beta in 0..dims.b {
                    let mut s = C64::zero();
                    for j in 0..dims.a {
                        s += m[(dims.idx(j, alpha), dims.idx(j, beta))];
                    }
                    out[(alpha, beta)] = s;
                }
            }
            Ok(out)
        }
    }
}

/// Projection onto the diagonal: keeps the diagonal, zeroes everything else.
pub fn dephase(m: &CMatrix) -> CMatrix {
    assert!(m.is_square(), "dephase needs a square matrix");
    let mut out = CMatrix::zeros(m.rows, m.cols);
    for i in 0..m.rows {
        out[(i, i)] = m[(i, i)];
    }
    out
}

const JACOBI_MAX_SWEEPS: usize = 100;

/// Cyclic Jacobi diagonalization of the Hermitian part of `m`.
fn jacobi(m: &CMatrix, with_vectors: bool) -> (Vec<f64>, Option<CMatrix>) {
    let n = m.rows;
    let mut a = CMatrix::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)].conj()).scale(0.5));
    let mut v = if with_vectors {
        Some(CMatrix::identity(n))
    } else {
        None
    };
    if n > 1 {
        let scale = a.max_abs().max(1e-300);
        for _sweep in 0..JACOBI_MAX_SWEEPS {
            if a.max_offdiag_abs() <= 1e-15 * scale {
                break;
            }
            for p in 0..n - 1 {
                for q in p + 1..n {
                    let apq = a[(p, q)];
                    let r = apq.norm();
                    let app = a[(p, p)].re;
                    let aqq = a[(q, q)].re;
                    if r == 0.0 {
                        continue;
                    }
                    if r <= f64::EPSILON * (app.abs() + aqq.abs()) {
                        a[(p, q)] = C64::zero();
                        a[(q, p)] = C64::zero();
                        continue;
                    }
                    let phase = apq.unscale(r);
                    let tau = (aqq - app) / (2.0 * r);
                    let t = if tau >= 0.0 {
                        1.0 / (tau + (1.0 + tau * tau).sqrt())
                    } else {
                        1.0 / (tau - (1.0 + tau * tau).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    // Plane rotation W with W† A W zeroing the (p, q) entry:
                    // W = [[c, s], [-s e^{-i phi}, c e^{-i phi}]] on the (p, q) plane.
                    let w_pp = C64::new(c, 0.0);
                    let w_pq = C64::new(s, 0.0);
                    let w_qp = phase.conj().scale(-s);
                    let w_qq = phase.conj().scale(c);
                    for i in 0..n {
                        if i == p || i == q {
                            continue;
                        }
                        let aip = a[(i, p)];
                        let aiq = a[(i, q)];
                        let nip = aip * w_pp + aiq * w_qp;
                        let niq = aip * w_pq + aiq * w_qq;
                        a[(i, p)] = nip;
                        a[(p, i)] = nip.conj();
                        a[(i, q)] = niq;
                        a[(q, i)] = niq.conj();
                    }
                    a[(p, p)] = C64::new(app - t * r, 0.0);
                    a[(q, q)] = C64::new(aqq + t * r, 0.0);
                    a[(p, q)] = C64::zero();
                    a[(q, p)] = C64::zero();
                    if let Some(vm) = v.as_mut() {
                        for i in 0..n {
                            let vip = vm[(i, p)];
                            let viq = vm[(i, q)];
                            vm[(i, p)] = vip * w_pp + viq * w_qp;
                            vm[(i, q)] = vip * w_pq + viq * w_qq;
                        }
                    }
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = v.map(|vm| CMatrix::from_fn(n, n, |i, j| vm[(i, order[j])]));
    (values, vectors)
}

fn require_square(m: &CMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows,
            cols: m.cols,
        });
    }
    if !m.all_finite() {
        return Err(Error::NonFinite);
    }
    Ok(())
}

/// Eigenvalues and eigenvectors of a Hermitian matrix, ascending. The
/// decomposition satisfies `m = V diag(values) V†` with unitary `V`
/// (columns are eigenvectors). The Hermitian part of `m` is used.
pub fn eigh(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    require_square(m)?;
    let (values, vectors) = jacobi(m, true);
    Ok((values, vectors.unwrap()))
}

/// Eigenvalues only, ascending.
pub fn eigvalsh(m: &CMatrix) -> Result<Vec<f64>> {
    require_square(m)?;
    Ok(jacobi(m, false).0)
}

/// Positive-semidefiniteness test: true iff the smallest eigenvalue is at
/// least `-tol`. Errors when `m` is not Hermitian within `tol`.
pub fn is_psd(m: &CMatrix, tol: f64) -> Result<bool> {
    require_square(m)?;
    let residual = m.herm_residual();
    if residual > tol {
        return Err(Error::NotHermitian { residual });
    }
    let values = eigvalsh(m)?;
    Ok(values.first().is_none_or(|&min| min >= -tol))
}

/// Von Neumann entropy in bits: `-sum_i l_i log2 l_i` over eigenvalues
/// `l_i > 0`. Eigenvalues in `[-PSD_TOL, 0)` are clamped to zero; anything
/// lower, a non-unit trace or a non-Hermitian input is rejected.
pub fn vn_entropy(rho: &CMatrix) -> Result<f64> {
    require_square(rho)?;
    let residual = rho.herm_residual();
    if residual > HERM_TOL {
        return Err(Error::NotHermitian { residual });
    }
    let trace = rho.trace().re;
    if (trace - 1.0).abs() > TRACE_TOL {
        return Err(Error::TraceMismatch {
            expected: 1.0,
            found: trace,
        });
    }
    let values = eigvalsh(rho)?;
    if let Some(&min) = values.first() {
        if min < -PSD_TOL {
            return Err(Error::NotPositive {
                min_eigenvalue: min,
            });
        }
    }
    let mut entropy = 0.0;
    for &value in &values {
        if value > 0.0 {
            entropy -= value * value.log2();
        }
    }
    Ok(entropy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn kron_identity_blocks() {
        let i2 = CMatrix::identity(2);
        assert_eq!(kron(&i2, &i2), CMatrix::identity(4));

        let flip = CMatrix::from_rows(vec![
            vec![c(0.0, 0.0), c(1.0, 0.0)],
            vec![c(1.0, 0.0), c(0.0, 0.0)],
        ])
        .unwrap();
        let one = CMatrix::identity(1);
        assert_eq!(kron(&flip, &one), flip);

        let left = CMatrix::diag(&[1.0, 2.0]);
        let right = CMatrix::diag(&[3.0, 4.0]);
        assert_eq!(kron(&left, &right), CMatrix::diag(&[3.0, 4.0, 6.0, 8.0]));
    }

    #[test]
    fn kron_is_associative() {
        let a = CMatrix::from_fn(2, 3, |i, j| c(i as f64 + 0.5, j as f64 - 1.0));
        let b = CMatrix::from_fn(3, 2, |i, j| c(j as f64, i as f64 * 0.25));
        let d = CMatrix::from_fn(2, 2, |i, j| c(1.0 - i as f64, 0.5 * j as f64));
        let lhs = kron(&kron(&a, &b), &d);
        let rhs = kron(&a, &kron(&b, &d));
        assert_eq!(lhs.max_abs_diff(&rhs), 0.0);
    }

    #[test]
    fn partial_trace_of_product() {
        let dims = DimPair::new(2, 2).unwrap();
        let rho = CMatrix::from_rows(vec![
            vec![c(0.7, 0.0), c(0.1, 0.2)],
            vec![c(0.1, -0.2), c(0.3, 0.0)],
        ])
        .unwrap();
        let m = kron(&CMatrix::identity(2), &rho);
        let kept = partial_trace(&m, dims, Subsystem::A).unwrap();
        assert!(kept.max_abs_diff(&CMatrix::identity(2)) < 1e-15);

        let zero_zero = CMatrix::unit(4, 4, 0, 0);
        let kept_b = partial_trace(&zero_zero, dims, Subsystem::B).unwrap();
        assert!(kept_b.max_abs_diff(&CMatrix::unit(2, 2, 0, 0)) < 1e-15);
    }

    #[test]
    fn partial_trace_rejects_bad_shape() {
        let dims = DimPair::new(2, 3).unwrap();
        let m = CMatrix::identity(4);
        assert!(matches!(
            partial_trace(&m, dims, Subsystem::A),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn dephase_examples() {
        let d = CMatrix::diag(&[1.0, 2.0, 3.0]);
        assert_eq!(dephase(&d), d);

        let plus = CMatrix::from_rows(vec![
            vec![c(0.5, 0.0), c(0.5, 0.0)],
            vec![c(0.5, 0.0), c(0.5, 0.0)],
        ])
        .unwrap();
        assert_eq!(dephase(&plus), CMatrix::diag(&[0.5, 0.5]));

        let m = CMatrix::from_fn(3, 3, |i, j| c(i as f64, j as f64 + 1.0));
        assert_eq!(dephase(&dephase(&m)), dephase(&m));
    }

    #[test]
    fn psd_examples() {
        assert!(is_psd(&CMatrix::identity(4), 1e-9).unwrap());
        assert!(!is_psd(&CMatrix::diag(&[1.0, -0.1]), 1e-9).unwrap());

        let plus = CMatrix::from_rows(vec![
            vec![c(0.5, 0.0), c(0.5, 0.0)],
            vec![c(0.5, 0.0), c(0.5, 0.0)],
        ])
        .unwrap();
        assert!(is_psd(&plus, 1e-9).unwrap());

        let skew = CMatrix::from_rows(vec![
            vec![c(0.0, 0.0), c(1.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0)],
        ])
        .unwrap();
        assert!(matches!(is_psd(&skew, 1e-9), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn entropy_examples() {
        let pure = CMatrix::unit(3, 3, 1, 1);
        assert!(vn_entropy(&pure).unwrap().abs() < 1e-12);

        let mixed = CMatrix::diag(&[0.5, 0.5]);
        assert!((vn_entropy(&mixed).unwrap() - 1.0).abs() < 1e-12);

        let two_level = CMatrix::diag(&[0.5, 0.0, 0.0, 0.5]);
        assert!((vn_entropy(&two_level).unwrap() - 1.0).abs() < 1e-12);

        let not_normalized = CMatrix::diag(&[0.9, 0.9]);
        assert!(matches!(
            vn_entropy(&not_normalized),
            Err(Error::TraceMismatch { .. })
        ));
    }

    #[test]
    fn eigh_reconstructs_hermitian() {
        let h = CMatrix::from_rows(vec![
            vec![c(2.0, 0.0), c(0.3, 0.4), c(0.0, -0.2)],
            vec![c(0.3, -0.4), c(-1.0, 0.0), c(0.5, 0.0)],
            vec![c(0.0, 0.2), c(0.5, 0.0), c(0.25, 0.0)],
        ])
        .unwrap();
        let (values, vectors) = eigh(&h).unwrap();
        assert!(values.windows(2).all(|w| w[0] <= w[1]));

        let lambda = CMatrix::diag(&values);
        let rebuilt = &(&vectors * &lambda) * &vectors.adjoint();
        assert!(rebuilt.max_abs_diff(&h) < 1e-12);

        let gram = &vectors.adjoint() * &vectors;
        assert!(gram.max_abs_diff(&CMatrix::identity(3)) < 1e-12);
    }

    #[test]
    fn eigvalsh_matches_known_spectrum() {
        let plus = CMatrix::from_rows(vec![
            vec![c(0.5, 0.0), c(0.5, 0.0)],
            vec![c(0.5, 0.0), c(0.5, 0.0)],
        ])
        .unwrap();
        let values = eigvalsh(&plus).unwrap();
        assert!((values[0] - 0.0).abs() < 1e-14);
        assert!((values[1] - 1.0).abs() < 1e-14);
    }
}
