//! Superchannels: linear maps sending channels `A -> B` to channels
//! `A' -> B'`, carried by their Choi matrices on `(A ⊗ B) ⊗ (A' ⊗ B')`.
//!
//! The composite row index of `(j, alpha, j', alpha')` is
//! `((j |B| + alpha) |A'| + j') |B'| + alpha'`. Validity of a candidate
//! Choi matrix means positivity plus a block condition: summing the
//! output-side diagonal must produce `delta_{alpha beta}` times a reduced
//! block depending only on `(j, k)`, and those blocks must sum to the
//! identity on `A'`. These two conditions are exactly what makes the
//! induced map send every channel to a channel.

use alloc::vec::Vec;

use num_complex::Complex64 as C64;
use num_traits::Zero;
#[allow(unused_imports)]
use num_traits::Float;

use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::incoherent::{deterministic_ic, DeterministicAssignment};
use crate::mat::{eigh, eigvalsh, kron, CMatrix, DimPair};

/// Trace of a selective outcome below which the outcome is reported with
/// probability zero and no state.
pub const SELECTIVE_TRACE_CUTOFF: f64 = 1e-12;

/// Default cap on extreme-point enumeration in [`is_misc`].
pub const MISC_ENUMERATION_CAP: usize = 4096;

/// Outcome of the superchannel validity check.
#[derive(Clone, Debug)]
pub struct SuperValidationReport {
    pub is_hermitian: bool,
    pub min_eigenvalue: f64,
    /// Largest deviation of the output-diagonal block sums from the
    /// required structure: independence of the input-output index pair on
    /// the diagonal, and vanishing off it.
    pub slice_residual: f64,
    /// Largest deviation of the summed diagonal blocks from the identity
    /// on the output input-space.
    pub completeness_residual: f64,
    /// Deviation of the total trace from `|B| * |A'|`.
    pub trace_residual: f64,
    /// The reduced blocks, indexed row-major by `(j, k)`; each is
    /// an `|A'| x |A'|` matrix.
    pub reduced_blocks: Vec<CMatrix>,
    pub verdict: bool,
}

/// A superchannel from channels on `in_dims` to channels on `out_dims`,
/// stored as its Choi matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Superchannel {
    in_dims: DimPair,
    out_dims: DimPair,
    choi: CMatrix,
}

impl Superchannel {
    /// Checked constructor: validates the Choi conditions at tolerance `tol`.
    pub fn new(choi: CMatrix, in_dims: DimPair, out_dims: DimPair, tol: f64) -> Result<Self> {
        let report = validate_super_choi(&choi, in_dims, out_dims, tol)?;
        if !report.verdict {
            return Err(Error::InvalidSuperchannel {
                min_eigenvalue: report.min_eigenvalue,
                slice_residual: report.slice_residual,
                completeness_residual: report.completeness_residual,
            });
        }
        Ok(Superchannel {
            in_dims,
            out_dims,
            choi,
        })
    }

    /// Constructor for Choi matrices known valid (or deliberately not) by
    /// construction; `validate_super_choi` is the check.
    pub fn from_choi_unchecked(choi: CMatrix, in_dims: DimPair, out_dims: DimPair) -> Self {
        debug_assert_eq!(choi.rows(), in_dims.prod() * out_dims.prod());
        Superchannel {
            in_dims,
            out_dims,
            choi,
        }
    }

    pub fn in_dims(&self) -> DimPair {
        self.in_dims
    }

    pub fn out_dims(&self) -> DimPair {
        self.out_dims
    }

    pub fn choi(&self) -> &CMatrix {
        &self.choi
    }

    #[inline]
    fn idx(&self, j: usize, alpha: usize, jp: usize, alphap: usize) -> usize {
        (self.in_dims.idx(j, alpha) * self.out_dims.a + jp) * self.out_dims.b + alphap
    }

    /// Choi entry at `(j, alpha, j', alpha')`, `(k, beta, k', beta')`.
    #[inline]
    #[allow(clippy::too_many_arguments)]
    pub fn entry(
        &self,
        j: usize,
        k: usize,
        alpha: usize,
        beta: usize,
        jp: usize,
        kp: usize,
        alphap: usize,
        betap: usize,
    ) -> C64 {
        self.choi[(self.idx(j, alpha, jp, alphap), self.idx(k, beta, kp, betap))]
    }
}

/// Kraus operators of a superchannel: `|A'||B'| x |A||B|` matrices acting
/// on vectorized Choi matrices, `J_out = sum_m M_m J_in M_m^†`.
#[derive(Clone, Debug)]
pub struct SuperKrausSet {
    in_dims: DimPair,
    out_dims: DimPair,
    ops: Vec<CMatrix>,
}

impl SuperKrausSet {
    pub fn new(in_dims: DimPair, out_dims: DimPair, ops: Vec<CMatrix>) -> Result<Self> {
        for op in &ops {
            if op.rows() != out_dims.prod() || op.cols() != in_dims.prod() {
                return Err(Error::KrausShapeMismatch {
                    expected: (out_dims.prod(), in_dims.prod()),
                    found: (op.rows(), op.cols()),
                });
            }
        }
        Ok(SuperKrausSet {
            in_dims,
            out_dims,
            ops,
        })
    }

    pub fn in_dims(&self) -> DimPair {
        self.in_dims
    }

    pub fn out_dims(&self) -> DimPair {
        self.out_dims
    }

    pub fn ops(&self) -> &[CMatrix] {
        &self.ops
    }
}

/// Validity check for a candidate superchannel Choi matrix.
pub fn validate_super_choi(
    choi: &CMatrix,
    in_dims: DimPair,
    out_dims: DimPair,
    tol: f64,
) -> Result<SuperValidationReport> {
    let side = in_dims.prod() * out_dims.prod();
    if choi.rows() != side || choi.cols() != side {
        return Err(Error::ShapeMismatch {
            expected: (side, side),
            found: (choi.rows(), choi.cols()),
        });
    }
    if !choi.all_finite() {
        return Err(Error::NonFinite);
    }
    let probe = Superchannel::from_choi_unchecked(choi.clone(), in_dims, out_dims);

    let is_hermitian = choi.herm_residual() <= tol;
    let min_eigenvalue = eigvalsh(choi)?.first().copied().unwrap_or(0.0);

    // Reduced blocks from the (alpha = beta = 0) slice, then every other
    // (alpha, beta) slice is compared against them.
    let dap = out_dims.a;
    let mut reduced_blocks = Vec::with_capacity(in_dims.a * in_dims.a);
    for j in 0..in_dims.a {
        for k in 0..in_dims.a {
            let block = CMatrix::from_fn(dap, dap, |jp, kp| {
                (0..out_dims.b)
                    .map(|ap| probe.entry(j, k, 0, 0, jp, kp, ap, ap))
                    .sum()
            });
            reduced_blocks.push(block);
        }
    }

    let mut slice_residual = 0.0f64;
    for j in 0..in_dims.a {
        for k in 0..in_dims.a {
            let block = &reduced_blocks[j * in_dims.a + k];
            for alpha in 0..in_dims.b {
                for beta in 0..in_dims.b {
                    for jp in 0..dap {
                        for kp in 0..dap {
                            let sum: C64 = (0..out_dims.b)
                                .map(|ap| probe.entry(j, k, alpha, beta, jp, kp, ap, ap))
                                .sum();
                            let expected = if alpha == beta {
                                block[(jp, kp)]
                            } else {
                                C64::zero()
                            };
                            slice_residual = slice_residual.max((sum - expected).norm());
                        }
                    }
                }
            }
        }
    }

    let mut completeness = CMatrix::zeros(dap, dap);
    for j in 0..in_dims.a {
        completeness = &completeness + &reduced_blocks[j * in_dims.a + j];
    }
    let completeness_residual = completeness.max_abs_diff(&CMatrix::identity(dap));

    let expected_trace = (in_dims.b * out_dims.a) as f64;
    let trace_residual = (choi.trace().re - expected_trace).abs();

    let verdict = is_hermitian
        && min_eigenvalue >= -tol
        && slice_residual <= tol
        && completeness_residual <= tol
        && trace_residual <= tol;
    Ok(SuperValidationReport {
        is_hermitian,
        min_eigenvalue,
        slice_residual,
        completeness_residual,
        trace_residual,
        reduced_blocks,
        verdict,
    })
}

/// Choi matrix assembled from superchannel Kraus operators. No validity is
/// imposed; an empty set yields the zero matrix.
pub fn choi_from_superkraus(kraus: &SuperKrausSet) -> Superchannel {
    let in_dims = kraus.in_dims();
    let out_dims = kraus.out_dims();
    let side = in_dims.prod() * out_dims.prod();
    let mut choi = CMatrix::zeros(side, side);
    let mut vec_op: Vec<C64> = Vec::with_capacity(side);
    for op in kraus.ops() {
        vec_op.clear();
        for x in 0..in_dims.prod() {
            for y in 0..out_dims.prod() {
                vec_op.push(op[(y, x)]);
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
    Superchannel::from_choi_unchecked(choi, in_dims, out_dims)
}

/// Kraus operators recovered from a superchannel Choi matrix via
/// eigendecomposition, dropping eigenvalues below the Kraus cutoff.
pub fn superkraus_from_choi(s: &Superchannel) -> Result<SuperKrausSet> {
    let (values, vectors) = eigh(s.choi())?;
    let side = s.choi().rows();
    let in_prod = s.in_dims().prod();
    let out_prod = s.out_dims().prod();
    let mut ops = Vec::new();
    for (col, &value) in values.iter().enumerate() {
        if value < crate::channel::KRAUS_EIG_CUTOFF {
            continue;
        }
        let mut phase = C64::new(1.0, 0.0);
        for r in 0..side {
            let entry = vectors[(r, col)];
            if entry.norm() > crate::channel::KRAUS_EIG_CUTOFF {
                phase = entry.conj().unscale(entry.norm());
                break;
            }
        }
        let weight = phase.scale(value.sqrt());
        let op = CMatrix::from_fn(out_prod, in_prod, |y, x| {
            vectors[(x * out_prod + y, col)] * weight
        });
        ops.push(op);
    }
    SuperKrausSet::new(s.in_dims(), s.out_dims(), ops)
}

/// Apply a superchannel to a channel by contracting Choi matrices:
/// `out_{j'k',a'b'} = sum_{jk,ab} phi_{jk,ab} Theta_{jk,ab,j'k',a'b'}`.
pub fn apply_superchannel(s: &Superchannel, phi: &Channel) -> Result<Channel> {
    if phi.dims() != s.in_dims() {
        return Err(Error::ShapeMismatch {
            expected: (s.in_dims().a, s.in_dims().b),
            found: (phi.dims().a, phi.dims().b),
        });
    }
    let in_dims = s.in_dims();
    let out_dims = s.out_dims();
    let mut choi = CMatrix::zeros(out_dims.prod(), out_dims.prod());
    for jp in 0..out_dims.a {
        for kp in 0..out_dims.a {
            for ap in 0..out_dims.b {
                for bp in 0..out_dims.b {
                    let mut sum = C64::zero();
                    for j in 0..in_dims.a {
                        for k in 0..in_dims.a {
                            for alpha in 0..in_dims.b {
                                for beta in 0..in_dims.b {
                                    let weight = phi.entry(j, k, alpha, beta);
                                    if weight.is_zero() {
                                        continue;
                                    }
                                    sum += weight
                                        * s.entry(j, k, alpha, beta, jp, kp, ap, bp);
                                }
                            }
                        }
                    }
                    choi[(out_dims.idx(jp, ap), out_dims.idx(kp, bp))] = sum;
                }
            }
        }
    }
    Ok(Channel::from_choi_unchecked(choi, out_dims))
}

/// Apply a superchannel through its Kraus operators,
/// `J_out = sum_m M_m J_in M_m^†`.
pub fn apply_superkraus(kraus: &SuperKrausSet, phi: &Channel) -> Result<Channel> {
    if phi.dims() != kraus.in_dims() {
        return Err(Error::ShapeMismatch {
            expected: (kraus.in_dims().a, kraus.in_dims().b),
            found: (phi.dims().a, phi.dims().b),
        });
    }
    let out_prod = kraus.out_dims().prod();
    let mut choi = CMatrix::zeros(out_prod, out_prod);
    for op in kraus.ops() {
        let term = &(op * phi.choi()) * &op.adjoint();
        choi.add_scaled(C64::new(1.0, 0.0), &term);
    }
    Ok(Channel::from_choi_unchecked(choi, kraus.out_dims()))
}

/// One outcome of a selective superchannel application.
#[derive(Clone, Debug)]
pub struct SelectiveOutcome {
    pub probability: f64,
    /// Subnormalized Choi matrix rescaled to trace `|A'|`; absent when the
    /// outcome has probability below the cutoff.
    pub choi: Option<CMatrix>,
}

/// Selective application of a Kraus-represented superchannel. Outcome `m`
/// occurs with probability `tr(M_m J M_m^†) / |A'|` and leaves the
/// rescaled Choi matrix `|A'| M_m J M_m^† / tr(...)`.
pub fn selective_apply(kraus: &SuperKrausSet, phi: &Channel) -> Result<Vec<SelectiveOutcome>> {
    if phi.dims() != kraus.in_dims() {
        return Err(Error::ShapeMismatch {
            expected: (kraus.in_dims().a, kraus.in_dims().b),
            found: (phi.dims().a, phi.dims().b),
        });
    }
    let dap = kraus.out_dims().a as f64;
    let mut outcomes = Vec::with_capacity(kraus.ops().len());
    for op in kraus.ops() {
        let image = &(op * phi.choi()) * &op.adjoint();
        let trace = image.trace().re;
        if trace <= SELECTIVE_TRACE_CUTOFF {
            outcomes.push(SelectiveOutcome {
                probability: 0.0,
                choi: None,
            });
        } else {
            outcomes.push(SelectiveOutcome {
                probability: trace / dap,
                choi: Some(image.scaled_re(dap / trace)),
            });
        }
    }
    Ok(outcomes)
}

/// The memoryless superchannel `phi -> post ∘ phi ∘ pre` built from a
/// pre-processing channel `pre: A' -> A` and a post-processing channel
/// `post: B -> B'`. Its Choi entries factorize as
/// `Theta_{jk,ab,j'k',a'b'} = pre_{j'k',jk} post_{ab,a'b'}`.
pub fn sandwich(pre: &Channel, post: &Channel) -> Result<Superchannel> {
    let in_dims = DimPair {
        a: pre.output_dim(),
        b: post.input_dim(),
    };
    let out_dims = DimPair {
        a: pre.input_dim(),
        b: post.output_dim(),
    };
    let side = in_dims.prod() * out_dims.prod();
    let mut choi = CMatrix::zeros(side, side);
    let idx = |j: usize, alpha: usize, jp: usize, ap: usize| {
        (in_dims.idx(j, alpha) * out_dims.a + jp) * out_dims.b + ap
    };
    for j in 0..in_dims.a {
        for k in 0..in_dims.a {
            for alpha in 0..in_dims.b {
                for beta in 0..in_dims.b {
                    for jp in 0..out_dims.a {
                        for kp in 0..out_dims.a {
                            let pre_entry = pre.entry(jp, kp, j, k);
                            if pre_entry.is_zero() {
                                continue;
                            }
                            for ap in 0..out_dims.b {
                                for bp in 0..out_dims.b {
                                    let value = pre_entry * post.entry(alpha, beta, ap, bp);
                                    choi[(idx(j, alpha, jp, ap), idx(k, beta, kp, bp))] = value;
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(Superchannel::from_choi_unchecked(choi, in_dims, out_dims))
}

/// Whether every operator in the set has at most one entry of modulus
/// above `tol` per column. This certifies the given representation as
/// incoherent; it does not decide whether some other representation of
/// the same superchannel would be.
pub fn is_incoherent_expression(kraus: &SuperKrausSet, tol: f64) -> bool {
    for op in kraus.ops() {
        for col in 0..op.cols() {
            let mut seen = false;
            for row in 0..op.rows() {
                if op[(row, col)].norm() > tol {
                    if seen {
                        return false;
                    }
                    seen = true;
                }
            }
        }
    }
    true
}

/// Whether the superchannel maps every incoherent channel to an incoherent
/// channel, decided by enumerating the `|B|^|A|` extreme incoherent
/// channels (convexity extends the verdict to the full set). Errors when
/// the enumeration would exceed `cap`.
pub fn is_misc(s: &Superchannel, tol: f64, cap: usize) -> Result<bool> {
    let in_dims = s.in_dims();
    let required = in_dims
        .b
        .checked_pow(in_dims.a as u32)
        .filter(|&n| n <= cap)
        .ok_or(Error::EnumerationCapExceeded {
            required: in_dims.b.checked_pow(in_dims.a as u32).unwrap_or(usize::MAX),
            cap,
        })?;
    let mut map = alloc::vec![0usize; in_dims.a];
    for _ in 0..required {
        let f = DeterministicAssignment::new(map.clone());
        let extreme = deterministic_ic(&f, in_dims)?;
        let image = apply_superchannel(s, &extreme)?;
        if !crate::incoherent::is_incoherent(&image, tol) {
            return Ok(false);
        }
        // Advance the odometer over assignments.
        for digit in map.iter_mut() {
            *digit += 1;
            if *digit < in_dims.b {
                break;
            }
            *digit = 0;
        }
    }
    Ok(true)
}

/// The identity superchannel on channels of the given dimensions.
pub fn identity_superchannel(dims: DimPair) -> Superchannel {
    let kraus = SuperKrausSet::new(dims, dims, alloc::vec![CMatrix::identity(dims.prod())])
        .expect("identity operator has the right shape");
    choi_from_superkraus(&kraus)
}

/// Kraus operators `{|j alpha><j alpha|}` of the completely dephasing
/// superchannel on channels of the given dimensions.
pub fn dephasing_superkraus(dims: DimPair) -> SuperKrausSet {
    let prod = dims.prod();
    let ops = (0..prod)
        .map(|x| CMatrix::unit(prod, prod, x, x))
        .collect();
    SuperKrausSet::new(dims, dims, ops).expect("projectors have the right shape")
}

/// The completely dephasing superchannel; applying it to a channel keeps
/// exactly the diagonal of its Choi matrix.
pub fn dephasing_superchannel(dims: DimPair) -> Superchannel {
    choi_from_superkraus(&dephasing_superkraus(dims))
}

/// Factor a single Kraus operator of shape `|A'||B'| x |A||B|` as a
/// Kronecker product `U ⊗ V` with `U` an `|A'| x |A|` coisometry
/// (`U U^† = I`) and `V` a `|B'| x |B|` isometry (`V^† V = I`).
///
/// The operator is viewed as an `|A'| x |A|` grid of `|B'| x |B|` blocks;
/// the largest block normalized to Frobenius norm `sqrt(|B|)` is the
/// candidate `V` (its largest entry rotated real-positive), each block's
/// projection onto `V` gives the corresponding `U` entry, and both the
/// reconstruction and the (co)isometry conditions are verified at `tol`.
pub fn kron_factorize(
    u: &CMatrix,
    in_dims: DimPair,
    out_dims: DimPair,
    tol: f64,
) -> Result<(CMatrix, CMatrix)> {
    let (rows, cols) = (out_dims.prod(), in_dims.prod());
    if u.rows() != rows || u.cols() != cols {
        return Err(Error::ShapeMismatch {
            expected: (rows, cols),
            found: (u.rows(), u.cols()),
        });
    }
    let (da, db) = (in_dims.a, in_dims.b);
    let (dap, dbp) = (out_dims.a, out_dims.b);

    let block = |jp: usize, j: usize| {
        CMatrix::from_fn(dbp, db, |ap, alpha| u[(jp * dbp + ap, j * db + alpha)])
    };

    let mut best = (0usize, 0usize);
    let mut best_norm = -1.0f64;
    for jp in 0..dap {
        for j in 0..da {
            let norm = block(jp, j).frobenius_norm();
            if norm > best_norm {
                best_norm = norm;
                best = (jp, j);
            }
        }
    }
    if best_norm <= tol {
        return Err(Error::NotKronProduct { residual: best_norm });
    }

    let mut right = block(best.0, best.1).scaled_re((db as f64).sqrt() / best_norm);
    let mut peak = C64::new(0.0, 0.0);
    let mut peak_norm = -1.0f64;
    for r in 0..dbp {
        for c in 0..db {
            let entry = right[(r, c)];
            if entry.norm() > peak_norm {
                peak_norm = entry.norm();
                peak = entry;
            }
        }
    }
    right = right.scaled(peak.conj().unscale(peak.norm()));

    let left = CMatrix::from_fn(dap, da, |jp, j| {
        let b = block(jp, j);
        let mut overlap = C64::zero();
        for r in 0..dbp {
            for c in 0..db {
                overlap += right[(r, c)].conj() * b[(r, c)];
            }
        }
        overlap.unscale(db as f64)
    });

    let residual = kron(&left, &right).max_abs_diff(u);
    if residual > tol {
        return Err(Error::NotKronProduct { residual });
    }
    let co_residual = (&left * &left.adjoint()).max_abs_diff(&CMatrix::identity(dap));
    if co_residual > tol {
        return Err(Error::NotCoisometry {
            residual: co_residual,
        });
    }
    let iso_residual = (&right.adjoint() * &right).max_abs_diff(&CMatrix::identity(db));
    if iso_residual > tol {
        return Err(Error::NotIsometry {
            residual: iso_residual,
        });
    }
    Ok((left, right))
}
