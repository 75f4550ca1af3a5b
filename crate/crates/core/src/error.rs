use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("XES parse error at line {line}: {message}")]
    Xes { line: usize, message: String },

    #[error("trace {trace}, event {event}: missing `concept:name`")]
    MissingActivityName { trace: usize, event: usize },

    #[error("trace {trace}, event {event}: cannot parse timestamp `{value}`")]
    XesTimestamp {
        trace: usize,
        event: usize,
        value: String,
    },

    #[error("CSV column `{0}` not found in header")]
    MissingColumn(String),

    #[error("CSV line {line}: cannot parse timestamp `{value}`")]
    CsvTimestamp { line: u64, value: String },

    #[error("CSV: {0}")]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("event log is already endpoint-augmented")]
    AlreadyAugmented,

    #[error("event log is empty")]
    EmptyLog,

    #[error("directly-follows graph has no arcs")]
    EmptyDfg,

    #[error("activity `{0}` does not occur in the log")]
    UnknownActivity(String),

    #[error("skip anchor `{0}` is the last element of a trace; augment the log first")]
    DanglingSkipAnchor(String),

    #[error("balance undefined for a candidate whose activities never occur")]
    UndefinedBalance,

    #[error("transition {0} has flow arcs and cannot be removed")]
    ConnectedTransition(String),

    #[error("unknown transition {0}")]
    UnknownTransition(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown preset `{name}`; valid presets: {}", valid.join(", "))]
    UnknownPreset { name: String, valid: Vec<String> },

    #[error("repaired log has no activities besides the artificial endpoints")]
    NoActivities,
}
