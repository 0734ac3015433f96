use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate geometry: d = {d} m must exceed |h_t - h_r| = {gap} m")]
    DegenerateGeometry { d: f64, gap: f64 },

    #[error("offset AoA {alpha}° outside support region [{lo}°, {hi}°]")]
    OutOfSupport { alpha: f64, lo: f64, hi: f64 },

    #[error("non-physical ray: |phi - alpha| = {0}° is not below 90°")]
    NonPhysical(f64),

    #[error("invalid material: {0}")]
    InvalidMaterial(String),

    #[error("total absorption: reflection coefficient vanished")]
    TotalAbsorption,

    #[error("directive pattern vanished (rho = {0:e})")]
    ZeroPattern(f64),

    #[error("support region is empty")]
    EmptySupport,

    #[error("cluster `{0}` has no component above the receiver sensitivity")]
    EmptyCluster(String),

    #[error("clusters `{first}` and `{second}` overlap in angle")]
    ClusterOverlap { first: String, second: String },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("validation failed: {}", .0.join("; "))]
    Validation(Vec<String>),

    #[error("no reference entry for {0}")]
    MissingReference(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for errors caused by bad input rather than by the model.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. } | Error::Validation(_) | Error::Io(_) | Error::MissingReference(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}
