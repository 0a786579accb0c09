use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no radial confinement: alpha_z = {alpha_z} must be below 1/sqrt(2)")]
    NoRadialConfinement { alpha_z: f64 },

    #[error("negative radicand {radicand:e} for effective radial frequency")]
    NoEffectiveConfinement { radicand: f64 },

    #[error("ions {0} and {1} coincide")]
    CoincidentIons(usize, usize),

    #[error("all ions lie on the trap axis; rotation frequency undefined")]
    AllAxial,

    #[error("no confining rotation frequency: {0}")]
    NoConfiningFrequency(String),

    #[error("newton refinement did not converge after {iterations} iterations (|grad| = {gradient_norm:e})")]
    NotConverged { iterations: usize, gradient_norm: f64 },

    #[error("state is not converged (|grad| = {0:e})")]
    UnconvergedState(f64),

    #[error("hessian is not positive definite: eigenvalue {value:e} at index {index}")]
    NotPositiveDefinite { index: usize, value: f64 },

    #[error("frame mismatch: {0}")]
    FrameMismatch(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("quadrature under-resolved: need at least {required} panels, got {given}")]
    UnderResolved { required: usize, given: usize },

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("carrier frequency {nu} is resonant with mode {mode} (omega = {omega})")]
    Resonance { mode: usize, omega: f64, nu: f64 },

    #[error("no gate pair: {0}")]
    NoPair(String),

    #[error("unknown species '{0}'")]
    UnknownSpecies(String),

    #[error("invalid magnetic quantum number m_j = {m_j} for j = {j}")]
    InvalidMj { j: f64, m_j: f64 },

    #[error("state-dependent force unavailable in the {0} regime")]
    RegimeUnavailable(&'static str),

    #[error("singular intensity-ratio equation: {0}")]
    SingularRatio(String),

    #[error("unphysical intensity ratio {ratio:e} for {scheme} (negative intensity)")]
    NegativeRatio { scheme: String, ratio: f64 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("{stage} stage failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn at_stage(self, stage: &'static str) -> Error {
        Error::Stage { stage, source: Box::new(self) }
    }

    /// Stable short identifier, looking through stage wrappers.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid-parameter",
            Error::NoRadialConfinement { .. } => "no-radial-confinement",
            Error::NoEffectiveConfinement { .. } => "no-effective-confinement",
            Error::CoincidentIons(..) => "coincident-ions",
            Error::AllAxial => "all-axial",
            Error::NoConfiningFrequency(_) => "no-confining-frequency",
            Error::NotConverged { .. } => "not-converged",
            Error::UnconvergedState(_) => "unconverged-state",
            Error::NotPositiveDefinite { .. } => "not-positive-definite",
            Error::FrameMismatch(_) => "frame-mismatch",
            Error::DimensionMismatch(_) => "dimension-mismatch",
            Error::UnderResolved { .. } => "under-resolved",
            Error::Calibration(_) => "calibration",
            Error::Resonance { .. } => "resonance",
            Error::NoPair(_) => "no-pair",
            Error::UnknownSpecies(_) => "unknown-species",
            Error::InvalidMj { .. } => "invalid-mj",
            Error::RegimeUnavailable(_) => "regime-unavailable",
            Error::SingularRatio(_) => "singular-ratio",
            Error::NegativeRatio { .. } => "negative-ratio",
            Error::Parse { .. } => "parse",
            Error::Config(_) => "config",
            Error::Stage { source, .. } => source.code(),
            Error::Io(_) => "io",
        }
    }

    pub fn stage(&self) -> Option<&'static str> {
        match self {
            Error::Stage { stage, .. } => Some(stage),
            _ => None,
        }
    }
}
