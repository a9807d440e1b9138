use core::fmt;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;

/// Errors reported by matrix, channel, superchannel and coherence operations.
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// A matrix did not have the expected shape.
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    /// An operation that needs a square matrix got a rectangular one.
    NotSquare { rows: usize, cols: usize },
    /// Matrix entries contained NaN or infinity.
    NonFinite,
    /// A matrix expected to be Hermitian deviated from its adjoint.
    NotHermitian { residual: f64 },
    /// A matrix expected to be positive semidefinite had a negative eigenvalue.
    NotPositive { min_eigenvalue: f64 },
    /// A matrix expected to have the given trace did not.
    TraceMismatch { expected: f64, found: f64 },
    /// A Choi matrix failed the channel validity conditions.
    InvalidChannel {
        min_eigenvalue: f64,
        trace_residual: f64,
    },
    /// A Choi matrix failed the superchannel validity conditions.
    InvalidSuperchannel {
        min_eigenvalue: f64,
        slice_residual: f64,
        completeness_residual: f64,
    },
    /// Kraus operators in one set had inconsistent shapes.
    KrausShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    /// Kraus operators did not sum to the identity on the input space.
    IncompleteKraus { residual: f64 },
    /// A Kraus set was empty where at least one operator is required.
    EmptyKrausSet,
    /// A claimed probability was outside `[0, 1]`.
    ProbabilityOutOfRange { value: f64 },
    /// A matrix had a negative entry or a row not summing to one.
    NotRowStochastic { row: usize, detail: StochasticDefect },
    /// A channel expected to be incoherent had off-diagonal Choi entries.
    NotIncoherent { residual: f64 },
    /// A deterministic assignment mapped outside the output range.
    AssignmentOutOfRange {
        index: usize,
        value: usize,
        bound: usize,
    },
    /// A matrix could not be written as a Kronecker product of the
    /// requested block shape.
    NotKronProduct { residual: f64 },
    /// The left Kronecker factor was not a coisometry.
    NotCoisometry { residual: f64 },
    /// The right Kronecker factor was not an isometry.
    NotIsometry { residual: f64 },
    /// Extreme-point enumeration would exceed the configured cap.
    EnumerationCapExceeded { required: usize, cap: usize },
    /// The phase matrix did not satisfy the isometry (orthogonality) condition.
    InvalidPhaseMatrix { residual: f64 },
    /// Maximal coherence requires the input dimension not to exceed the output.
    InputExceedsOutput { input: usize, output: usize },
    /// A dimension was zero where a positive one is required.
    ZeroDimension,
    /// No generator family is compatible with the requested dimensions.
    NoCompatibleGenerator,
}

/// What went wrong in a row-stochastic matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StochasticDefect {
    NegativeEntry { col: usize, value: f64 },
    RowSum { sum: f64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::ShapeMismatch { expected, found } => write!(
                f,
                "shape mismatch: expected {}x{}, found {}x{}",
                expected.0, expected.1, found.0, found.1
            ),
            Error::NotSquare { rows, cols } => {
                write!(f, "matrix is not square: {rows}x{cols}")
            }
            Error::NonFinite => write!(f, "matrix contains non-finite entries"),
            Error::NotHermitian { residual } => {
                write!(f, "matrix is not Hermitian (residual {residual:.3e})")
            }
            Error::NotPositive { min_eigenvalue } => write!(
                f,
                "matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})"
            ),
            Error::TraceMismatch { expected, found } => {
                write!(f, "trace mismatch: expected {expected}, found {found}")
            }
            Error::InvalidChannel {
                min_eigenvalue,
                trace_residual,
            } => write!(
                f,
                "not a valid channel (min eigenvalue {min_eigenvalue:.3e}, trace residual {trace_residual:.3e})"
            ),
            Error::InvalidSuperchannel {
                min_eigenvalue,
                slice_residual,
                completeness_residual,
            } => write!(
                f,
                "not a valid superchannel (min eigenvalue {min_eigenvalue:.3e}, slice residual {slice_residual:.3e}, completeness residual {completeness_residual:.3e})"
            ),
            Error::KrausShapeMismatch { expected, found } => write!(
                f,
                "Kraus operator shape mismatch: expected {}x{}, found {}x{}",
                expected.0, expected.1, found.0, found.1
            ),
            Error::IncompleteKraus { residual } => write!(
                f,
                "Kraus operators do not sum to the identity (residual {residual:.3e})"
            ),
            Error::EmptyKrausSet => write!(f, "Kraus set is empty"),
            Error::ProbabilityOutOfRange { value } => {
                write!(f, "probability {value} is outside [0, 1]")
            }
            Error::NotRowStochastic { row, detail } => match detail {
                StochasticDefect::NegativeEntry { col, value } => write!(
                    f,
                    "matrix is not row-stochastic: entry ({row}, {col}) = {value} is negative"
                ),
                StochasticDefect::RowSum { sum } => write!(
                    f,
                    "matrix is not row-stochastic: row {row} sums to {sum}"
                ),
            },
            Error::NotIncoherent { residual } => write!(
                f,
                "channel is not incoherent (off-diagonal residual {residual:.3e})"
            ),
            Error::AssignmentOutOfRange {
                index,
                value,
                bound,
            } => write!(
                f,
                "assignment f({index}) = {value} is outside the output range 0..{bound}"
            ),
            Error::NotKronProduct { residual } => write!(
                f,
                "matrix is not a Kronecker product (residual {residual:.3e})"
            ),
            Error::NotCoisometry { residual } => write!(
                f,
                "left factor is not a coisometry (residual {residual:.3e})"
            ),
            Error::NotIsometry { residual } => write!(
                f,
                "right factor is not an isometry (residual {residual:.3e})"
            ),
            Error::EnumerationCapExceeded { required, cap } => write!(
                f,
                "enumeration needs {required} extreme points, above the cap of {cap}"
            ),
            Error::InvalidPhaseMatrix { residual } => write!(
                f,
                "phase matrix violates the orthogonality condition (residual {residual:.3e})"
            ),
            Error::InputExceedsOutput { input, output } => write!(
                f,
                "requires input dimension <= output dimension, got {input} > {output}"
            ),
            Error::ZeroDimension => write!(f, "dimensions must be at least 1"),
            Error::NoCompatibleGenerator => {
                write!(f, "no generator family is compatible with the requested dimensions")
            }
        }
    }
}

impl core::error::Error for Error {}
