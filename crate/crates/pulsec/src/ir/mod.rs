//! Gate-level intermediate representation: gates, circuits, a wire-ordered
//! DAG view, a tiny assembly dialect, and exact unitaries.

pub mod circuit;
pub mod dag;
pub mod gate;
pub mod parse;
pub mod unitary;

pub use circuit::{Circuit, Operation};
pub use dag::Dag;
pub use gate::Gate;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IrError {
    #[error("gate {gate} expects {expected} qubit(s), got {got}")]
    Arity {
        gate: String,
        expected: usize,
        got: usize,
    },
    #[error("qubit {qubit} out of range for {num_qubits}-qubit circuit")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },
    #[error("qubit {qubit} listed twice in one operation")]
    DuplicateQubit { qubit: usize },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("gate {gate} has no unitary")]
    NoUnitary { gate: String },
    #[error("unitary construction capped at {max} qubits, circuit has {num_qubits}")]
    CircuitTooLarge { num_qubits: usize, max: usize },
}
