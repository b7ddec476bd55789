use std::path::PathBuf;

/// Errors produced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1} qubits")]
    DimensionMismatch(usize, usize),

    #[error("{n_qubits} qubits exceeds the dense cap of {n_max}")]
    Resource { n_qubits: usize, n_max: usize },

    #[error("operator is not Hermitian (deviation {0:.3e})")]
    NonHermitian(f64),

    #[error("eigenphase within {0:.1e} of the branch cut; shrink the time step")]
    BranchCut(f64),

    #[error("invalid product-formula order {0}: must be 1 or even")]
    InvalidOrder(u32),

    #[error("no symbolic leading error for order {order} with {groups} groups")]
    UnsupportedSymbolic { order: u32, groups: usize },

    #[error("grouping {grouping} is not compatible with model {model}")]
    IncompatibleGrouping { model: String, grouping: String },

    #[error("group {0} is not internally commuting")]
    NonCommutingGroup(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("mode index {index} out of range for {n_modes} modes")]
    ModeOutOfRange { index: usize, n_modes: usize },

    #[error("error target not reached below r = {r_max}")]
    SearchExhausted { r_max: u64 },

    #[error("failed to parse {what}: {detail}")]
    Parse { what: &'static str, detail: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
