use std::path::PathBuf;

/// Convenience alias used throughout the crate.
pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("q = {q} lies outside the potential domain [-{half_width}, {half_width}]")]
    OutsideDomain { q: f64, half_width: f64 },

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("invalid spectral configuration: {0}")]
    InvalidSpectral(String),

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error(
        "state n = {n} does not decay at the box edge (ratio {decay:.3e} > {limit:.1e}); enlarge box_half_length"
    )]
    BoundaryDecay { n: usize, decay: f64, limit: f64 },

    #[error("state n = {n} is not retained (system holds n = {first}..={last})")]
    StateOutOfRange { n: usize, first: usize, last: usize },

    #[error("invalid coefficient specification: {0}")]
    InvalidCoefficients(String),

    #[error("origin data of state n = {n} is {value:.3e}, too small to divide by")]
    DegenerateOrigin { n: usize, value: f64 },

    #[error("invalid initial conditions: {0}")]
    InvalidInitialConditions(String),

    #[error("energy drift {drift:.3e} exceeds {limit:.1e}; reduce the step size (h = {h})")]
    StepTooLarge { drift: f64, limit: f64, h: f64 },

    #[error("no complete oscillation found in trajectory")]
    NoOscillation,

    #[error("wave function node near (u, v) = ({u}, {v}): R^2 = {r2:.3e}")]
    Node { u: f64, v: f64, r2: f64 },

    #[error("point (u, v) = ({u}, {v}) is outside the eigensystem domain")]
    DomainExit { u: f64, v: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("crest search window leaves the field at ({u}, {v})")]
    WindowOutsideField { u: f64, v: f64 },

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("malformed file {path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Name of the pipeline stage that produced this error, if tagged.
    pub fn stage(&self) -> Option<&'static str> {
        match self {
            Error::Stage { stage, .. } => Some(stage),
            _ => None,
        }
    }
}

/// Attaches a pipeline stage name to an error.
pub trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|source| match source {
            already @ Error::Stage { .. } => already,
            other => Error::Stage {
                stage,
                source: Box::new(other),
            },
        })
    }
}
