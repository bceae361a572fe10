//! Pulse-level simulation of one- and two-transmon systems.
//!
//! Each transmon is modelled as three levels in the frame rotating at its
//! own 0-1 frequency, so the only static term is the anharmonicity on
//! level 2. Drive channels couple through the lowering operator; a
//! cross-resonance channel couples the target's lowering operator with a
//! control-state-dependent sign. States evolve under RK4 with four substeps
//! per sample, either as pure states or as density matrices with amplitude
//! damping and pure dephasing.

pub mod calibrate;
pub mod counter;
pub mod device;
pub mod evolve;
pub mod rb;
pub mod stats;
pub mod tomography;

pub use device::{CrCoupling, DeviceModel};
pub use evolve::{
    basis_state, bloch_of_state, evolve_schedule_open, evolve_schedule_pure, partial_trace_qutrit,
    qutrit_density, BlochVector,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("qubit {0} is not part of the device model")]
    QubitNotInModel(usize),
    #[error("channel {0} has no interpretation in this device model")]
    UnknownChannel(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("pulse error: {0}")]
    Pulse(#[from] crate::pulse::PulseError),
    #[error("calibration failed: {0}")]
    Calibration(String),
}
