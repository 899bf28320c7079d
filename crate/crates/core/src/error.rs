use thiserror::Error;

/// Errors raised anywhere in the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid channel model: {0}")]
    InvalidChannelModel(String),

    #[error("channel {index} outside 1..={n_channels}")]
    ChannelOutOfRange { index: usize, n_channels: usize },

    #[error("invalid power set: {0}")]
    InvalidPowerSet(String),

    #[error("invalid sender profile: {0}")]
    InvalidSender(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("missing fading draws for a Rayleigh channel")]
    MissingFading,

    #[error("action space of size (N*K)^X = {size} exceeds cap {cap}")]
    ActionSpaceTooLarge { size: u128, cap: u64 },

    #[error("action space size overflows u64")]
    ActionSpaceOverflow,

    #[error("invalid agent config: {0}")]
    InvalidAgent(String),

    #[error("invalid dqn params: {0}")]
    InvalidDqn(String),

    #[error("network architecture mismatch")]
    ArchitectureMismatch,

    #[error("non-finite gradient at parameter {0}")]
    NonFiniteGradient(usize),

    #[error("replay memory holds {size} experiences, batch needs {needed}")]
    InsufficientMemory { size: usize, needed: usize },

    #[error("degenerate t-test: differences have zero variance and mean {mean}")]
    DegenerateTTest { mean: f64 },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    /// Config validation failure, qualified by the JSON path of the bad field.
    #[error("{path}: {message}")]
    Config { path: String, message: String },
}

impl Error {
    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
