//! Pulse-level IR: sample envelopes, timed schedules, and backend
//! calibration data (channels, frequencies, coherence times, cmd_def).

pub mod backend;
pub mod envelope;
pub mod schedule;

pub use backend::BackendConfig;
pub use envelope::Envelope;
pub use schedule::{Channel, Schedule, ScheduleInstruction, TimedInstruction};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PulseError {
    #[error("overlapping play on channel {channel} at t0={t0}")]
    Overlap { channel: String, t0: usize },
    #[error("invalid envelope: {0}")]
    InvalidEnvelope(String),
    #[error("{path}: {msg}")]
    Validation { path: String, msg: String },
    #[error("no cmd_def entry `{name}` for qubits {qubits:?}")]
    UnknownCmdDef { name: String, qubits: Vec<usize> },
    #[error("bad channel name `{0}`")]
    BadChannel(String),
    #[error("json: {0}")]
    Json(String),
}
