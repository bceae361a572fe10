//! Pulse-level compiler for fixed-frequency transmon devices.
//!
//! The crate is organised around a small gate IR (`ir`), a pulse IR with
//! backend calibration data (`pulse`), construction of an augmented basis
//! from those calibrations (`basis`), two-qubit synthesis (`synth`), a
//! transpiler that rewrites circuits onto the augmented basis and lowers
//! them to schedules (`transpile`), and a three-level Schrodinger/Lindblad
//! simulator used to validate pulses end to end (`sim`).
//!
//! Angles are degrees everywhere in public APIs; durations are integer
//! multiples of the backend sample time `dt`.

pub mod basis;
pub mod ir;
pub mod math;
pub mod parallel;
pub mod pulse;
pub mod sim;
pub mod synth;
pub mod transpile;

pub use ir::circuit::{Circuit, Operation};
pub use ir::gate::Gate;
pub use pulse::backend::BackendConfig;
pub use pulse::schedule::Schedule;
