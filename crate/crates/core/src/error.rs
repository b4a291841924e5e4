use thiserror::Error;

/// Errors raised by the analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChainError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix must have at least one state")]
    Empty,

    #[error("entry ({row}, {col}) = {value} is not a probability")]
    InvalidEntry { row: usize, col: usize, value: f64 },

    #[error("row {row} sums to {sum}, not 1")]
    RowSum { row: usize, sum: f64 },

    #[error("probability {value} at index {index} is outside [0, 1]")]
    InvalidProbability { index: usize, value: f64 },

    #[error("weights sum to {sum}, not 1")]
    MassDefect { sum: f64 },

    #[error("damping weight {value} at index {index} must be strictly positive")]
    NonPositiveDamping { index: usize, value: f64 },

    #[error("epsilon {0} is outside the admissible range")]
    InvalidEpsilon(f64),

    #[error("singular linear system: {0}")]
    Singular(String),

    #[error("power iteration stopped after {iterations} iterations with last change {change:e}")]
    NotConverged {
        iterations: usize,
        change: f64,
        last: Vec<f64>,
    },

    #[error("unsupported regime: {0}")]
    Unsupported(String),

    #[error("wrong regime: {0}")]
    RegimeMismatch(String),

    #[error("class {class} is not closed: state {state} leaks mass {leak}")]
    NotClosed {
        class: usize,
        state: usize,
        leak: f64,
    },

    #[error("eigenvalue computation failed: {0}")]
    Eigen(String),

    #[error("Vandermonde system is ill-conditioned (estimate {condition:e}); adjust the cluster tolerance")]
    IllConditioned { condition: f64 },

    #[error("spectrum looks non-semisimple: {0}")]
    NonSemisimple(String),

    #[error("coefficient imaginary residue {residue:e} exceeds tolerance")]
    ComplexResidue { residue: f64 },

    #[error("non-leading eigenvalue {re} + {im}i is within the cluster tolerance of 1")]
    NearUnitEigenvalue { re: f64, im: f64 },

    #[error("lambda {0} must lie in [0, 1)")]
    InvalidLambda(f64),

    #[error("ergodicity condition fails: class {class} has Delta_N = {delta}")]
    ConditionViolated { class: usize, delta: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl ChainError {
    /// Stable snake_case name of the variant, used in machine-readable errors.
    pub fn kind(&self) -> &'static str {
        match self {
            Self::DimensionMismatch { .. } => "dimension_mismatch",
            Self::Empty => "empty",
            Self::InvalidEntry { .. } => "invalid_entry",
            Self::RowSum { .. } => "row_sum",
            Self::InvalidProbability { .. } => "invalid_probability",
            Self::MassDefect { .. } => "mass_defect",
            Self::NonPositiveDamping { .. } => "non_positive_damping",
            Self::InvalidEpsilon(_) => "invalid_epsilon",
            Self::Singular(_) => "singular",
            Self::NotConverged { .. } => "not_converged",
            Self::Unsupported(_) => "unsupported",
            Self::RegimeMismatch(_) => "regime_mismatch",
            Self::NotClosed { .. } => "not_closed",
            Self::Eigen(_) => "eigen",
            Self::IllConditioned { .. } => "ill_conditioned",
            Self::NonSemisimple(_) => "non_semisimple",
            Self::ComplexResidue { .. } => "complex_residue",
            Self::NearUnitEigenvalue { .. } => "near_unit_eigenvalue",
            Self::InvalidLambda(_) => "invalid_lambda",
            Self::ConditionViolated { .. } => "condition_violated",
            Self::InvalidArgument(_) => "invalid_argument",
        }
    }
}

pub type Result<T> = std::result::Result<T, ChainError>;
