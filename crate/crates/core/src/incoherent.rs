//! Incoherent channels: the fully dephasing action on channels, membership
//! tests, and the greedy convex decomposition of an incoherent channel into
//! deterministic relabelings via its row-stochastic skeleton.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;

use crate::channel::Channel;
use crate::error::{Error, Result, StochasticDefect};
use crate::mat::{dephase, CMatrix, DimPair};

/// Entries with magnitude at or below this are treated as exact zeros
/// inside the decomposition iteration, guaranteeing termination.
pub const DECOMP_ZERO_TOL: f64 = 1e-12;

/// A real nonnegative matrix whose rows each sum to one.
#[derive(Clone, Debug, PartialEq)]
pub struct StochasticMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl StochasticMatrix {
    /// Checked constructor; entries are row-major. Rows must sum to one
    /// within `1e-9` and entries must be nonnegative.
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::ZeroDimension);
        }
        assert_eq!(entries.len(), rows * cols, "entry count must be rows*cols");
        for r in 0..rows {
            let mut sum = 0.0;
            for c in 0..cols {
                let value = entries[r * cols + c];
                if value < 0.0 || value.is_nan() {
                    return Err(Error::NotRowStochastic {
                        row: r,
                        detail: StochasticDefect::NegativeEntry { col: c, value },
                    });
                }
                sum += value;
            }
            if (sum - 1.0).abs() > crate::DEFAULT_TOL {
                return Err(Error::NotRowStochastic {
                    row: r,
                    detail: StochasticDefect::RowSum { sum },
                });
            }
        }
        Ok(StochasticMatrix {
            rows,
            cols,
            entries,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.entries[r * self.cols + c]
    }
}

/// A deterministic relabeling `j -> f(j)` of input basis states to output
/// basis states; the extreme points of the incoherent channels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeterministicAssignment {
    map: Vec<usize>,
}

impl DeterministicAssignment {
    pub fn new(map: Vec<usize>) -> Self {
        DeterministicAssignment { map }
    }

    pub fn input_dim(&self) -> usize {
        self.map.len()
    }

    #[inline]
    pub fn apply(&self, j: usize) -> usize {
        self.map[j]
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }
}

/// A convex combination of deterministic relabelings.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvexDecomposition {
    pub weights: Vec<f64>,
    pub terms: Vec<DeterministicAssignment>,
}

impl ConvexDecomposition {
    /// Reassemble the row-stochastic matrix `sum_l p_l D^(l)`.
    pub fn reconstruct(&self, rows: usize, cols: usize) -> Vec<f64> {
        let mut out = vec![0.0; rows * cols];
        for (weight, term) in self.weights.iter().zip(&self.terms) {
            for j in 0..rows {
                out[j * cols + term.apply(j)] += weight;
            }
        }
        out
    }
}

/// The fully dephased version of a channel: dephasing composed on both
/// sides, which on the Choi matrix keeps exactly the diagonal.
pub fn dephased(phi: &Channel) -> Channel {
    Channel::from_choi_unchecked(dephase(phi.choi()), phi.dims())
}

/// A channel is incoherent iff its Choi matrix is diagonal within `tol`;
/// equivalently, iff it is fixed by [`dephased`].
pub fn is_incoherent(phi: &Channel, tol: f64) -> bool {
    phi.choi().max_offdiag_abs() <= tol
}

/// Greedy decomposition of a row-stochastic matrix into a convex
/// combination of 0/1 row-stochastic matrices.
///
/// At each step, every row selects the largest column index attaining its
/// row maximum; the minimum of those maxima is subtracted along the
/// selected pattern and recorded as a weight. The residual loses at least
/// one nonzero entry per step, so at most `m(n-1) + 1` terms are produced
/// and the weights sum to one.
pub fn decompose_row_stochastic(p: &StochasticMatrix) -> ConvexDecomposition {
    let (m, n) = (p.rows(), p.cols());
    let mut residual: Vec<f64> = (0..m * n).map(|i| p.entries[i]).collect();
    let mut weights = Vec::new();
    let mut terms = Vec::new();

    let max_steps = m * (n - 1) + 1;
    for _step in 0..=max_steps {
        let peak = residual.iter().fold(0.0f64, |acc, &x| acc.max(x));
        if peak <= DECOMP_ZERO_TOL {
            break;
        }
        let mut selection = Vec::with_capacity(m);
        let mut kappa = f64::INFINITY;
        for j in 0..m {
            let mut best = f64::NEG_INFINITY;
            let mut best_col = 0;
            for alpha in 0..n {
                let value = residual[j * n + alpha];
                if value >= best {
                    best = value;
                    best_col = alpha;
                }
            }
            selection.push(best_col);
            kappa = kappa.min(best);
        }
        let zeros_before = residual.iter().filter(|&&x| x <= DECOMP_ZERO_TOL).count();
        for (j, &alpha) in selection.iter().enumerate() {
            residual[j * n + alpha] -= kappa;
        }
        let zeros_after = residual.iter().filter(|&&x| x <= DECOMP_ZERO_TOL).count();
        debug_assert!(
            zeros_after > zeros_before,
            "decomposition step created no new zero entry"
        );
        weights.push(kappa);
        terms.push(DeterministicAssignment::new(selection));
    }
    ConvexDecomposition { weights, terms }
}

/// Decompose an incoherent channel into extreme incoherent channels by
/// decomposing its diagonal skeleton `P[j, alpha] = chi_{jj,alpha alpha}`.
pub fn ic_decompose(chi: &Channel, tol: f64) -> Result<ConvexDecomposition> {
    let offdiag = chi.choi().max_offdiag_abs();
    if offdiag > tol {
        return Err(Error::NotIncoherent { residual: offdiag });
    }
    let dims = chi.dims();
    let mut entries = Vec::with_capacity(dims.a * dims.b);
    for j in 0..dims.a {
        for alpha in 0..dims.b {
            let value = chi.entry(j, j, alpha, alpha).re;
            // Eigenvalue noise can leave tiny negatives on the diagonal.
            entries.push(if value < 0.0 && value >= -tol { 0.0 } else { value });
        }
    }
    let skeleton = StochasticMatrix::new(dims.a, dims.b, entries)?;
    Ok(decompose_row_stochastic(&skeleton))
}

/// The extreme incoherent channel of a deterministic relabeling: Choi
/// matrix `sum_j |j, f(j)><j, f(j)|`.
pub fn deterministic_ic(f: &DeterministicAssignment, dims: DimPair) -> Result<Channel> {
    if f.input_dim() != dims.a {
        return Err(Error::ShapeMismatch {
            expected: (dims.a, 1),
            found: (f.input_dim(), 1),
        });
    }
    let mut choi = CMatrix::zeros(dims.prod(), dims.prod());
    for j in 0..dims.a {
        let alpha = f.apply(j);
        if alpha >= dims.b {
            return Err(Error::AssignmentOutOfRange {
                index: j,
                value: alpha,
                bound: dims.b,
            });
        }
        let x = dims.idx(j, alpha);
        choi[(x, x)] = C64::new(1.0, 0.0);
    }
    Ok(Channel::from_choi_unchecked(choi, dims))
}
