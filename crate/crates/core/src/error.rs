use thiserror::Error;

/// Errors produced while building or evaluating maps, witnesses and states.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("permutation needs at least 2 entries, got {0}")]
    TooShort(usize),
    #[error("token {position} ({token:?}) is not a positive integer")]
    NotAnInteger { position: usize, token: String },
    #[error("token {position}: value {value} is outside 1..={n}")]
    OutOfRange {
        position: usize,
        value: i64,
        n: usize,
    },
    #[error("token {position}: duplicate image value {value}")]
    Duplicate { position: usize, value: usize },
    #[error("index {index} is outside 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("the identity permutation does not induce an entanglement witness")]
    IdentityPermutation,
    #[error("{}", range_message(*.t, *.t_max, .t_max_display))]
    ParameterOutOfRange {
        t: f64,
        t_max: f64,
        t_max_display: String,
    },
    #[error("permutation is not an involution")]
    NotInvolutive,
    #[error("permutation is an involution; the construction needs a cycle of length >= 3")]
    Involutive,
    #[error("cycle {cycle} is trivial or does not exist (nontrivial cycles: {available})")]
    BadCycle { cycle: usize, available: usize },
    #[error("power j={j} must lie in 1..={max}")]
    BadPower { j: usize, max: usize },
    #[error("permutation has a single cycle, so there is no cross-cycle support")]
    SingleCycle,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix has a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("not a density matrix: {0}")]
    NotADensityMatrix(String),
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("expectation value has imaginary part {0:e}")]
    ComplexExpectation(f64),
    #[error("x={0} is outside the admissible range {1}")]
    BadFamilyParameter(f64, &'static str),
    #[error(
        "a hypothesis-satisfying matrix turned out positive semidefinite (min eigenvalue {0:e})"
    )]
    LemmaViolated(f64),
    #[error("{0} produced non-finite values")]
    NoConvergence(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

fn range_message(t: f64, t_max: f64, t_max_display: &str) -> String {
    if t > t_max {
        format!("t={t} exceeds t_max={t_max_display}; t must satisfy 0 < t ≤ {t_max_display}")
    } else {
        format!("t must satisfy 0 < t ≤ {t_max_display}, got t={t}")
    }
}
