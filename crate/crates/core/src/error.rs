use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Tensor shapes do not match the declared dimension.
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("algebra has no unit (residual {residual:.3e})")]
    NoUnit { residual: f64 },

    #[error("Frobenius pairing is degenerate (relative smallest singular value {0:.3e})")]
    DegeneratePairing(f64),

    #[error("invalid block at eigenvalue {lambda}: {reason}")]
    InvalidBlock { lambda: f64, reason: String },

    #[error("duplicate eigenvalue {0}")]
    DuplicateEigenvalue(f64),

    #[error("empty spectrum")]
    EmptySpectrum,

    #[error("cannot certify tail: {0}")]
    Certification(String),

    #[error("invalid bordism: {0}")]
    InvalidBordism(String),

    #[error("arity mismatch: left has {left} outgoing circles, right has {right} incoming")]
    Arity { left: usize, right: usize },

    #[error("imaginary labels are evaluated by the Lorentzian limit (use `lorentz`)")]
    ImaginaryLabel,

    #[error("volume labels are not allowed here: {0}")]
    VolumeLabel(String),

    #[error("no Lorentzian limit for closed components")]
    ClosedLorentzian,

    #[error("ground eigenvalue is {0}, normalize spectrum first")]
    GroundNotZero(f64),

    #[error("weight {0:?} is not dominant")]
    NotDominant(Vec<i64>),

    #[error("unsupported group type: {0}")]
    UnsupportedGroup(String),

    #[error("singular metric")]
    SingularMetric,

    #[error("metric is neither allowable nor Lorentzian")]
    NotAllowable,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid density: {0}")]
    Density(String),

    #[error("json: {0}")]
    Json(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
