use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("track count must be at least 1")]
    InvalidTrackCount,

    #[error("radix {0} is not supported (need 4 <= r <= {max})", max = crate::tape::MAX_RADIX)]
    InvalidRadix(u32),

    #[error("counter {counter} out of range 1..={k}")]
    CounterOutOfRange { counter: usize, k: usize },

    #[error("line {line}: {message}")]
    CommandParse { line: usize, message: String },

    #[error("malformed tape token `{token}` at index {index}: {reason}")]
    MalformedCell {
        index: usize,
        token: String,
        reason: String,
    },

    #[error("expected exactly one head mark, found {0}")]
    HeadCount(usize),

    #[error("no rule matches the configuration around offset {offset}: {reason}")]
    NoRuleMatches { offset: i64, reason: String },

    #[error("pending mutation slot for counter {counter} is occupied")]
    QueueFull { counter: usize },

    #[error("a command was already submitted this step")]
    CommandAlreadySubmitted,

    #[error("ghost position track is disabled")]
    GhostDisabled,

    #[error("delay-1 wrapper invariant broken: {0}")]
    WrapperInvariant(String),
}
