use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid array shape {n1}x{n2}: both axes need at least one element")]
    InvalidShape { n1: usize, n2: usize },

    #[error("spatial frequency ({f1}, {f2}) is outside [0, 1)")]
    InvalidFrequency { f1: f64, f2: f64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("infeasible geometry: {0}")]
    InfeasibleGeometry(String),

    #[error("user index {index} out of range for {users} users")]
    UserOutOfRange { index: usize, users: usize },

    #[error("user {user} has zero signal energy, cannot calibrate noise for SNR {snr_db} dB")]
    DegenerateSignal { user: usize, snr_db: f64 },

    #[error("least-squares system with {unknowns} unknowns needs at least as many measurements, got {measurements}")]
    Underdetermined { unknowns: usize, measurements: usize },

    #[error("singular least-squares system on support {support:?}")]
    Singular { support: Vec<usize> },

    #[error("true channel of user {user} has zero norm")]
    DegenerateTruth { user: usize },

    #[error("unknown estimator `{0}` (expected one of ds_omp, row_structured, baseline_omp, oracle_ls)")]
    UnknownEstimator(String),

    #[error("oracle estimator needs the true channel realization")]
    MissingTruth,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("refusing to overwrite {0} (pass --force)")]
    OutputExists(PathBuf),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
