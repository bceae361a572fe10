use super::gate::Gate;
use super::IrError;

#[derive(Debug, Clone, PartialEq)]
pub struct Operation {
    pub gate: Gate,
    pub qubits: Vec<usize>,
}

impl Operation {
    pub fn new(gate: Gate, qubits: &[usize]) -> Self {
        Operation {
            gate,
            qubits: qubits.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    pub num_qubits: usize,
    pub ops: Vec<Operation>,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Self {
        Circuit {
            num_qubits,
            ops: Vec::new(),
        }
    }

    /// Append a gate after validating arity and qubit indices.
    pub fn push(&mut self, gate: Gate, qubits: &[usize]) -> Result<(), IrError> {
        if let Some(expected) = gate.arity() {
            if qubits.len() != expected {
                return Err(IrError::Arity {
                    gate: gate.name(),
                    expected,
                    got: qubits.len(),
                });
            }
        } else if qubits.is_empty() {
            return Err(IrError::Arity {
                gate: gate.name(),
                expected: 1,
                got: 0,
            });
        }
        for (i, &q) in qubits.iter().enumerate() {
            if q >= self.num_qubits {
                return Err(IrError::QubitOutOfRange {
                    qubit: q,
                    num_qubits: self.num_qubits,
                });
            }
            if qubits[..i].contains(&q) {
                return Err(IrError::DuplicateQubit { qubit: q });
            }
        }
        self.ops.push(Operation::new(gate, qubits));
        Ok(())
    }

    /// Gate count excluding barriers.
    pub fn gate_count(&self) -> usize {
        self.ops.iter().filter(|o| !o.gate.is_barrier()).count()
    }

    pub fn count_gate<F: Fn(&Gate) -> bool>(&self, pred: F) -> usize {
        self.ops.iter().filter(|o| pred(&o.gate)).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn push_validates() {
        let mut c = Circuit::new(2);
        assert!(c.push(Gate::H, &[0]).is_ok());
        assert!(c.push(Gate::Cnot, &[0, 1]).is_ok());
        assert!(matches!(
            c.push(Gate::Cnot, &[0]),
            Err(IrError::Arity { .. })
        ));
        assert!(matches!(
            c.push(Gate::X, &[5]),
            Err(IrError::QubitOutOfRange { .. })
        ));
        assert!(matches!(
            c.push(Gate::Swap, &[1, 1]),
            Err(IrError::DuplicateQubit { .. })
        ));
        assert_eq!(c.gate_count(), 2);
    }

    #[test]
    fn barrier_any_arity() {
        let mut c = Circuit::new(3);
        assert!(c.push(Gate::Barrier, &[0, 1, 2]).is_ok());
        assert!(c.push(Gate::Barrier, &[1]).is_ok());
        assert!(c.push(Gate::Barrier, &[]).is_err());
        assert_eq!(c.gate_count(), 0);
    }
}
