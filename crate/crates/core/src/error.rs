use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("weights sum to {sum}, expected 1 (tolerance 1e-12)")]
    WeightSum { sum: f64 },

    #[error("weight {weight} at index {index} is not strictly positive")]
    NonpositiveWeight { index: usize, weight: f64 },

    #[error("support point {point} lies outside [{lower}, {upper}]")]
    PointOutOfRange { point: f64, lower: f64, upper: f64 },

    #[error("support points {first} and {second} are closer than 1e-10")]
    DuplicatePoint { first: f64, second: f64 },

    #[error("support points are not strictly increasing at index {index}")]
    UnsortedSupport { index: usize },

    #[error("invalid design: {0}")]
    InvalidDesign(String),

    #[error("invalid design interval [{lower}, {upper}]")]
    InvalidInterval { lower: f64, upper: f64 },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid prior: {0}")]
    InvalidPrior(String),

    #[error("prior is not symmetric about 0")]
    AsymmetricPrior,

    #[error("invalid parameter set: {0}")]
    InvalidParameterSet(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("M11 X = M12 has no solution; the Schur complement is undefined")]
    InconsistentSystem,

    #[error("Schur complement is undefined for this design")]
    UndefinedSchur,

    #[error("convergence failure: {0}")]
    ConvergenceFailure(String),

    #[error("iteration limit of {0} reached")]
    IterationLimit(usize),

    #[error("T = {t} exceeds R = {r}; the optimal value is inconsistent")]
    InconsistentEfficiency { t: f64, r: f64 },

    #[error("certificate failure: {0}")]
    CertificateFailure(String),

    #[error("efficiency lower bound violated: {value} < {bound}")]
    BoundViolation { value: f64, bound: f64 },

    #[error("root bracketing failed: {0}")]
    RootBracketFailure(String),

    #[error("{n} observations cannot cover {support} support points")]
    TooFewObservations { n: usize, support: usize },

    #[error("regression fit is singular: {0}")]
    SingularFit(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("malformed input: {0}")]
    Parse(String),
}

impl Error {
    /// Process exit code used by the CLI for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::ConvergenceFailure(_)
            | Error::IterationLimit(_)
            | Error::RootBracketFailure(_)
            | Error::CertificateFailure(_) => 3,
            _ => 2,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
