use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid episode: {0}")]
    InvalidEpisode(String),

    #[error("node {0} is not a sink")]
    NotASink(usize),

    #[error("episode has {nodes} nodes, canonicalization is capped at {cap}")]
    TooManyNodes { nodes: usize, cap: usize },

    #[error("family is not downward closed: {0}")]
    NotDownwardClosed(String),

    #[error("machine is not simple: state {0} has overlapping incoming guards")]
    NotSimple(usize),

    #[error("negative minimal-window probability at length {k} for state {state}")]
    NegativeJoint { state: usize, k: usize },

    #[error("episode is unreachable under the model (zero minimal-window mass)")]
    Unreachable,

    #[error("empty sequence")]
    EmptySequence,

    #[error("windows are not ordered by start and end")]
    UnorderedWindows,

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    /// Process exit code used by the command line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 1,
            Error::Parse { .. }
            | Error::Io(_)
            | Error::InvalidEpisode(_)
            | Error::NotASink(_)
            | Error::TooManyNodes { .. }
            | Error::EmptySequence
            | Error::UnorderedWindows
            | Error::NotDownwardClosed(_) => 2,
            Error::InvalidModel(_)
            | Error::NotSimple(_)
            | Error::NegativeJoint { .. }
            | Error::Unreachable => 3,
        }
    }
}
