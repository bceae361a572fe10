//! Wire-ordered DAG view of a circuit.
//!
//! Operations are stored in a canonical linearization; the partial order is
//! recovered through wire adjacency queries. Rewrite passes mutate this
//! structure through splices and adjacent-position swaps, both of which
//! keep the linearization consistent with the dependency order.

use super::circuit::{Circuit, Operation};

#[derive(Debug, Clone)]
pub struct Dag {
    pub num_qubits: usize,
    ops: Vec<Operation>,
}

impl Dag {
    pub fn from_circuit(c: &Circuit) -> Self {
        Dag {
            num_qubits: c.num_qubits,
            ops: c.ops.clone(),
        }
    }

    pub fn to_circuit(&self) -> Circuit {
        Circuit {
            num_qubits: self.num_qubits,
            ops: self.ops.clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn ops(&self) -> &[Operation] {
        &self.ops
    }

    pub fn op(&self, i: usize) -> &Operation {
        &self.ops[i]
    }

    /// Index of the next operation after `idx` touching `wire`.
    pub fn next_on_wire(&self, idx: usize, wire: usize) -> Option<usize> {
        (idx + 1..self.ops.len()).find(|&j| self.ops[j].qubits.contains(&wire))
    }

    /// Index of the closest operation before `idx` touching `wire`.
    pub fn prev_on_wire(&self, idx: usize, wire: usize) -> Option<usize> {
        (0..idx).rev().find(|&j| self.ops[j].qubits.contains(&wire))
    }

    /// True when `i < j` and no operation strictly between them touches any
    /// wire shared by both: the pair is consecutive on every common wire.
    pub fn adjacent_on_shared_wires(&self, i: usize, j: usize) -> bool {
        assert!(i < j);
        let shared: Vec<usize> = self.ops[i]
            .qubits
            .iter()
            .copied()
            .filter(|q| self.ops[j].qubits.contains(q))
            .collect();
        if shared.is_empty() {
            return false;
        }
        for k in i + 1..j {
            if self.ops[k].qubits.iter().any(|q| shared.contains(q)) {
                return false;
            }
        }
        true
    }

    /// Swap positions `i` and `i + 1`. Caller is responsible for checking
    /// that the two operations commute (or act on disjoint wires).
    pub fn swap_adjacent(&mut self, i: usize) {
        self.ops.swap(i, i + 1);
    }

    /// Replace `ops[start..end]` with `replacement`.
    pub fn splice(&mut self, start: usize, end: usize, replacement: Vec<Operation>) {
        self.ops.splice(start..end, replacement);
    }

    pub fn remove(&mut self, i: usize) -> Operation {
        self.ops.remove(i)
    }

    pub fn set(&mut self, i: usize, op: Operation) {
        self.ops[i] = op;
    }

    pub fn insert(&mut self, i: usize, op: Operation) {
        self.ops.insert(i, op);
    }
}
