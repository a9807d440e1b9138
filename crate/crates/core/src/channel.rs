//! Quantum channels carried by their Choi matrices.
//!
//! A channel `phi: A -> B` is stored as the Choi matrix `J` on `A ⊗ B`,
//! whose entry at composite row `(j, alpha)` and column `(k, beta)` is
//! `<alpha| phi(|j><k|) |beta>`. Validity means `J` is positive
//! semidefinite and its partial trace over `B` is the identity on `A`.

use alloc::vec::Vec;

use num_complex::Complex64 as C64;
use num_traits::Zero;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::incoherent::StochasticMatrix;
use crate::mat::{eigh, eigvalsh, kron, partial_trace, CMatrix, DimPair, Subsystem};

/// Eigenvalues below this are dropped when extracting Kraus operators.
pub const KRAUS_EIG_CUTOFF: f64 = 1e-12;

/// Outcome of the channel validity check.
#[derive(Clone, Debug)]
pub struct ValidationReport {
    pub is_hermitian: bool,
    pub min_eigenvalue: f64,
    /// Largest deviation of the partial trace over the output from the
    /// identity on the input.
    pub trace_residual: f64,
    pub verdict: bool,
}

/// A quantum channel `A -> B`, stored as its Choi matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Channel {
    dims: DimPair,
    choi: CMatrix,
}

impl Channel {
    /// Checked constructor: validates the Choi conditions at tolerance `tol`.
    pub fn new(choi: CMatrix, dims: DimPair, tol: f64) -> Result<Self> {
        let report = validate_choi(&choi, dims, tol)?;
        if !report.verdict {
            return Err(Error::InvalidChannel {
                min_eigenvalue: report.min_eigenvalue,
                trace_residual: report.trace_residual,
            });
        }
        Ok(Channel { dims, choi })
    }

    /// Constructor for Choi matrices known valid by construction.
    pub fn from_choi_unchecked(choi: CMatrix, dims: DimPair) -> Self {
        debug_assert_eq!(choi.rows(), dims.prod());
        debug_assert_eq!(choi.cols(), dims.prod());
        Channel { dims, choi }
    }

    pub fn dims(&self) -> DimPair {
        self.dims
    }

    /// Input dimension `|A|`.
    pub fn input_dim(&self) -> usize {
        self.dims.a
    }

    /// Output dimension `|B|`.
    pub fn output_dim(&self) -> usize {
        self.dims.b
    }

    pub fn choi(&self) -> &CMatrix {
        &self.choi
    }

    /// Choi entry `phi_{jk,alpha beta}`.
    #[inline]
    pub fn entry(&self, j: usize, k: usize, alpha: usize, beta: usize) -> C64 {
        self.choi[(self.dims.idx(j, alpha), self.dims.idx(k, beta))]
    }
}

/// A set of Kraus operators for a channel `A -> B`; each operator is
/// a `|B| x |A|` matrix and together they sum to the identity on `A`.
#[derive(Clone, Debug)]
pub struct KrausSet {
    dims: DimPair,
    ops: Vec<CMatrix>,
}

impl KrausSet {
    /// Checked constructor: verifies shapes and completeness.
    pub fn new(dims: DimPair, ops: Vec<CMatrix>) -> Result<Self> {
        if ops.is_empty() {
            return Err(Error::EmptyKrausSet);
        }
        for op in &ops {
            if op.rows() != dims.b || op.cols() != dims.a {
                return Err(Error::KrausShapeMismatch {
                    expected: (dims.b, dims.a),
                    found: (op.rows(), op.cols()),
                });
            }
        }
        let mut sum = CMatrix::zeros(dims.a, dims.a);
        for op in &ops {
            sum = &sum + &(&op.adjoint() * op);
        }
        let residual = sum.max_abs_diff(&CMatrix::identity(dims.a));
        if residual > crate::DEFAULT_TOL {
            return Err(Error::IncompleteKraus { residual });
        }
        Ok(KrausSet { dims, ops })
    }

    pub fn dims(&self) -> DimPair {
        self.dims
    }

    pub fn ops(&self) -> &[CMatrix] {
        &self.ops
    }
}

/// Validity check for a candidate Choi matrix: Hermiticity, positivity
/// and the partial-trace condition, reported with residuals.
pub fn validate_choi(choi: &CMatrix, dims: DimPair, tol: f64) -> Result<ValidationReport> {
    let side = dims.prod();
    if choi.rows() != side || choi.cols() != side {
        return Err(Error::ShapeMismatch {
            expected: (side, side),
            found: (choi.rows(), choi.cols()),
        });
    }
    if !choi.all_finite() {
        return Err(Error::NonFinite);
    }
    let is_hermitian = choi.herm_residual() <= tol;
    let min_eigenvalue = eigvalsh(choi)?
        .first()
        .copied()
        .unwrap_or(0.0);
    let reduced = partial_trace(choi, dims, Subsystem::A)?;
    let trace_residual = reduced.max_abs_diff(&CMatrix::identity(dims.a));
    let verdict = is_hermitian && min_eigenvalue >= -tol && trace_residual <= tol;
    Ok(ValidationReport {
        is_hermitian,
        min_eigenvalue,
        trace_residual,
        verdict,
    })
}

/// Choi matrix of the channel given by a Kraus set:
/// `J[(j,alpha),(k,beta)] = sum_m M_m[alpha,j] conj(M_m[beta,k])`.
pub fn choi_from_kraus(kraus: &KrausSet) -> Channel {
    let dims = kraus.dims();
    let side = dims.prod();
    let mut choi = CMatrix::zeros(side, side);
    let mut vec_op: Vec<C64> = Vec::with_capacity(side);
    for op in kraus.ops() {
        vec_op.clear();
        for j in 0..dims.a {
            for alpha in 0..dims.b {
                vec_op.push(op[(alpha, j)]);
            }
        }
        for r in 0..side {
            let vr = vec_op[r];
            if vr.is_zero() {
                continue;
            }
            for s in 0..side {
                choi[(r, s)] += vr * vec_op[s].conj();
            }
        }
    }
    Channel::from_choi_unchecked(choi, dims)
}

/// Kraus operators recovered from a Choi matrix via eigendecomposition.
/// Eigenvalues below [`KRAUS_EIG_CUTOFF`] are dropped. Each operator is
/// `sqrt(lambda)` times the reshaped eigenvector, with the first nonzero
/// component of the eigenvector rotated to be real and positive.
pub fn kraus_from_choi(channel: &Channel) -> Result<KrausSet> {
    let dims = channel.dims();
    let (values, vectors) = eigh(channel.choi())?;
    let side = dims.prod();
    let mut ops = Vec::new();
    for (col, &value) in values.iter().enumerate() {
        if value < KRAUS_EIG_CUTOFF {
            continue;
        }
        let mut phase = C64::new(1.0, 0.0);
        for r in 0..side {
            let entry = vectors[(r, col)];
            if entry.norm() > KRAUS_EIG_CUTOFF {
                phase = entry.conj().unscale(entry.norm());
                break;
            }
        }
        let weight = phase.scale(value.sqrt());
        let op = CMatrix::from_fn(dims.b, dims.a, |alpha, j| {
            vectors[(dims.idx(j, alpha), col)] * weight
        });
        ops.push(op);
    }
    KrausSet::new(dims, ops)
}

/// Apply a channel to a density matrix:
/// `[phi(rho)]_{alpha beta} = sum_{jk} rho_{jk} phi_{jk,alpha beta}`.
pub fn apply_channel(channel: &Channel, rho: &CMatrix) -> Result<CMatrix> {
    let dims = channel.dims();
    if rho.rows() != dims.a || rho.cols() != dims.a {
        return Err(Error::ShapeMismatch {
            expected: (dims.a, dims.a),
            found: (rho.rows(), rho.cols()),
        });
    }
    let mut out = CMatrix::zeros(dims.b, dims.b);
    for j in 0..dims.a {
        for k in 0..dims.a {
            let rjk = rho[(j, k)];
            if rjk.is_zero() {
                continue;
            }
            for alpha in 0..dims.b {
                for beta in 0..dims.b {
                    out[(alpha, beta)] += rjk * channel.entry(j, k, alpha, beta);
                }
            }
        }
    }
    Ok(out)
}

/// Composition `second ∘ first` of `first: A -> B` and `second: B -> B'`:
/// `(second ∘ first)_{jk,a'b'} = sum_{ab} first_{jk,ab} second_{ab,a'b'}`.
pub fn compose(second: &Channel, first: &Channel) -> Result<Channel> {
    if second.input_dim() != first.output_dim() {
        return Err(Error::ShapeMismatch {
            expected: (first.output_dim(), first.output_dim()),
            found: (second.input_dim(), second.input_dim()),
        });
    }
    let da = first.input_dim();
    let db = first.output_dim();
    let dbp = second.output_dim();
    let dims = DimPair { a: da, b: dbp };
    let mut choi = CMatrix::zeros(dims.prod(), dims.prod());
    for j in 0..da {
        for k in 0..da {
            for ap in 0..dbp {
                for bp in 0..dbp {
                    let mut s = C64::zero();
                    for alpha in 0..db {
                        for beta in 0..db {
                            s += first.entry(j, k, alpha, beta)
                                * second.entry(alpha, beta, ap, bp);
                        }
                    }
                    choi[(dims.idx(j, ap), dims.idx(k, bp))] = s;
                }
            }
        }
    }
    Ok(Channel::from_choi_unchecked(choi, dims))
}

/// The completely dephasing channel on a `d`-dimensional system; its Choi
/// matrix is `sum_j |jj><jj|`.
pub fn dephasing_channel(d: usize) -> Channel {
    let dims = DimPair { a: d, b: d };
    let mut choi = CMatrix::zeros(dims.prod(), dims.prod());
    for j in 0..d {
        let x = dims.idx(j, j);
        choi[(x, x)] = C64::new(1.0, 0.0);
    }
    Channel::from_choi_unchecked(choi, dims)
}

/// The identity channel on a `d`-dimensional system.
pub fn identity_channel(d: usize) -> Channel {
    let dims = DimPair { a: d, b: d };
    let mut choi = CMatrix::zeros(dims.prod(), dims.prod());
    for j in 0..d {
        for k in 0..d {
            choi[(dims.idx(j, j), dims.idx(k, k))] = C64::new(1.0, 0.0);
        }
    }
    Channel::from_choi_unchecked(choi, dims)
}

/// The classical channel of a row-stochastic matrix: a diagonal Choi
/// matrix with `P[j, alpha]` at position `(j, alpha)`.
pub fn classical_channel(p: &StochasticMatrix) -> Channel {
    let dims = DimPair {
        a: p.rows(),
        b: p.cols(),
    };
    let mut choi = CMatrix::zeros(dims.prod(), dims.prod());
    for j in 0..dims.a {
        for alpha in 0..dims.b {
            let x = dims.idx(j, alpha);
            choi[(x, x)] = C64::new(p.get(j, alpha), 0.0);
        }
    }
    Channel::from_choi_unchecked(choi, dims)
}

/// The constant channel sending every input to `rho_b`; its Choi matrix
/// is `I_A ⊗ rho_b`.
pub fn constant_channel(rho_b: &CMatrix, da: usize) -> Result<Channel> {
    if da == 0 {
        return Err(Error::ZeroDimension);
    }
    require_density(rho_b)?;
    let dims = DimPair {
        a: da,
        b: rho_b.rows(),
    };
    let choi = kron(&CMatrix::identity(da), rho_b);
    Ok(Channel::from_choi_unchecked(choi, dims))
}

/// Convex mixture of a channel with a constant preparation:
/// `rho -> p phi(rho) + (1 - p) rho_b`.
pub fn mixture(p: f64, phi: &Channel, rho_b: &CMatrix) -> Result<Channel> {
    if !(0.0..=1.0).contains(&p) || !p.is_finite() {
        return Err(Error::ProbabilityOutOfRange { value: p });
    }
    if rho_b.rows() != phi.output_dim() || rho_b.cols() != phi.output_dim() {
        return Err(Error::ShapeMismatch {
            expected: (phi.output_dim(), phi.output_dim()),
            found: (rho_b.rows(), rho_b.cols()),
        });
    }
    require_density(rho_b)?;
    let constant = kron(&CMatrix::identity(phi.input_dim()), rho_b);
    let mut choi = phi.choi().scaled_re(p);
    choi.add_scaled(C64::new(1.0 - p, 0.0), &constant);
    Ok(Channel::from_choi_unchecked(choi, phi.dims()))
}

/// Checks the diagonal-image condition used for maximally incoherent
/// operations: every image of a basis state, `phi(|j><j|)`, must be
/// diagonal within `tol`. This is the necessary condition on basis
/// states, not a full membership test for arbitrary representations.
pub fn is_mio(phi: &Channel, tol: f64) -> bool {
    let dims = phi.dims();
    for j in 0..dims.a {
        for alpha in 0..dims.b {
            for beta in 0..dims.b {
                if alpha != beta && phi.entry(j, j, alpha, beta).norm() > tol {
                    return false;
                }
            }
        }
    }
    true
}

/// Density-matrix check: Hermitian, PSD and unit trace within tolerances.
pub fn require_density(rho: &CMatrix) -> Result<()> {
    if !rho.is_square() {
        return Err(Error::NotSquare {
            rows: rho.rows(),
            cols: rho.cols(),
        });
    }
    if !rho.all_finite() {
        return Err(Error::NonFinite);
    }
    let residual = rho.herm_residual();
    if residual > crate::mat::HERM_TOL {
        return Err(Error::NotHermitian { residual });
    }
    let trace = rho.trace().re;
    if (trace - 1.0).abs() > crate::mat::TRACE_TOL {
        return Err(Error::TraceMismatch {
            expected: 1.0,
            found: trace,
        });
    }
    let min = eigvalsh(rho)?.first().copied().unwrap_or(0.0);
    if min < -crate::mat::PSD_TOL {
        return Err(Error::NotPositive {
            min_eigenvalue: min,
        });
    }
    Ok(())
}
