//! Transpiler (placeholder).
