//! Two-qubit synthesis: canonical (KAK) decomposition, discrete gate
//! costs against several entangling bases, and numerical decomposition
//! search for the cases without a closed form.

pub mod cost;
pub mod kak;
pub mod optimize;

pub use cost::{cost_table, synthesize, BasisGate, CostTable, Decomposition};
pub use kak::{canonical_coords, canonical_gate, kak_decompose, KakDecomposition};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("input is not a 4x4 unitary")]
    NotUnitary,
    #[error("canonical decomposition did not converge")]
    KakFailed,
    #[error("synthesis stalled at fidelity {best:.6} with {layers} layers of {basis}")]
    DidNotConverge {
        basis: String,
        layers: usize,
        best: f64,
    },
    #[error("ir error: {0}")]
    Ir(#[from] crate::ir::IrError),
}
