//! Text form for circuits.
//!
//! ```text
//! # comment
//! qubits 3
//! h q[0]
//! rx(30) q[1]
//! cnot q[0], q[1]
//! cr(-22.5) q[1], q[2]
//! barrier q[0], q[1], q[2]
//! ```
//!
//! Gate names are case-insensitive, parameters are degrees. `cx` is an
//! alias for `cnot`, `opencnot` for `open_cnot`. `iswap` and `sqrt_iswap`
//! parse as custom gates that carry their matrices; any other unknown
//! parameterless name parses as an opaque custom gate.

use super::circuit::Circuit;
use super::gate::Gate;
use super::unitary::{iswap_matrix, sqrt_iswap_matrix};
use super::IrError;

pub fn parse_circuit(src: &str) -> Result<Circuit, IrError> {
    let mut circuit: Option<Circuit> = None;
    for (idx, raw) in src.lines().enumerate() {
        let lineno = idx + 1;
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let lower = line.to_ascii_lowercase();
        match circuit {
            None => {
                let mut parts = lower.split_whitespace();
                if parts.next() != Some("qubits") {
                    return Err(IrError::Parse {
                        line: lineno,
                        msg: "expected `qubits N` header".into(),
                    });
                }
                let n: usize = parts
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or(IrError::Parse {
                        line: lineno,
                        msg: "invalid qubit count".into(),
                    })?;
                if parts.next().is_some() {
                    return Err(IrError::Parse {
                        line: lineno,
                        msg: "trailing tokens after qubit count".into(),
                    });
                }
                if n == 0 {
                    return Err(IrError::Parse {
                        line: lineno,
                        msg: "circuit needs at least one qubit".into(),
                    });
                }
                circuit = Some(Circuit::new(n));
            }
            Some(ref mut circ) => parse_statement(&lower, lineno, circ)?,
        }
    }
    circuit.ok_or(IrError::Parse {
        line: 0,
        msg: "empty input, expected `qubits N` header".into(),
    })
}

fn parse_statement(line: &str, lineno: usize, circ: &mut Circuit) -> Result<(), IrError> {
    let err = |msg: String| IrError::Parse { line: lineno, msg };

    let name_end = line
        .find(|ch: char| !(ch.is_ascii_alphanumeric() || ch == '_'))
        .unwrap_or(line.len());
    let name = &line[..name_end];
    if name.is_empty() {
        return Err(err("expected gate name".into()));
    }
    let mut rest = line[name_end..].trim_start();

    let mut params: Vec<f64> = Vec::new();
    if rest.starts_with('(') {
        let close = rest
            .find(')')
            .ok_or_else(|| err("unterminated parameter list".into()))?;
        let inner = &rest[1..close];
        for tok in inner.split(',') {
            let tok = tok.trim();
            if tok.is_empty() {
                return Err(err("empty parameter".into()));
            }
            let v: f64 = tok
                .parse()
                .map_err(|_| err(format!("invalid parameter `{tok}`")))?;
            params.push(v);
        }
        rest = rest[close + 1..].trim_start();
    }

    let mut qubits: Vec<usize> = Vec::new();
    if !rest.is_empty() {
        for tok in rest.split(',') {
            let tok = tok.trim();
            let inner = tok
                .strip_prefix("q[")
                .and_then(|t| t.strip_suffix(']'))
                .ok_or_else(|| err(format!("expected qubit reference `q[i]`, got `{tok}`")))?;
            let q: usize = inner
                .parse()
                .map_err(|_| err(format!("invalid qubit index `{inner}`")))?;
            qubits.push(q);
        }
    }
    if qubits.is_empty() {
        return Err(err(format!("gate `{name}` lists no qubits")));
    }

    let gate = build_gate(name, &params, qubits.len(), lineno)?;
    circ.push(gate, &qubits).map_err(|e| IrError::Parse {
        line: lineno,
        msg: e.to_string(),
    })
}

fn build_gate(name: &str, params: &[f64], nq: usize, lineno: usize) -> Result<Gate, IrError> {
    let err = |msg: String| IrError::Parse { line: lineno, msg };
    let want = |n: usize| -> Result<(), IrError> {
        if params.len() == n {
            Ok(())
        } else {
            Err(err(format!(
                "gate `{name}` expects {n} parameter(s), got {}",
                params.len()
            )))
        }
    };
    let gate = match name {
        "x" => {
            want(0)?;
            Gate::X
        }
        "h" => {
            want(0)?;
            Gate::H
        }
        "rx" => {
            want(1)?;
            Gate::Rx(params[0])
        }
        "ry" => {
            want(1)?;
            Gate::Ry(params[0])
        }
        "rz" => {
            want(1)?;
            Gate::Rz(params[0])
        }
        "u3" => {
            want(3)?;
            Gate::U3(params[0], params[1], params[2])
        }
        "direct_rx" => {
            want(1)?;
            Gate::DirectRx(params[0])
        }
        "cnot" | "cx" => {
            want(0)?;
            Gate::Cnot
        }
        "open_cnot" | "opencnot" => {
            want(0)?;
            Gate::OpenCnot
        }
        "swap" => {
            want(0)?;
            Gate::Swap
        }
        "cr" => {
            want(1)?;
            Gate::Cr(params[0])
        }
        "zz" => {
            want(1)?;
            Gate::Zz(params[0])
        }
        "fsim" => {
            want(1)?;
            Gate::Fsim(params[0])
        }
        "barrier" => {
            want(0)?;
            Gate::Barrier
        }
        "iswap" => {
            want(0)?;
            Gate::Custom {
                name: "iswap".into(),
                arity: 2,
                matrix: Some(iswap_matrix()),
            }
        }
        "sqrt_iswap" => {
            want(0)?;
            Gate::Custom {
                name: "sqrt_iswap".into(),
                arity: 2,
                matrix: Some(sqrt_iswap_matrix()),
            }
        }
        other => {
            if !params.is_empty() {
                return Err(err(format!("unknown parameterized gate `{other}`")));
            }
            Gate::Custom {
                name: other.to_string(),
                arity: nq,
                matrix: None,
            }
        }
    };
    Ok(gate)
}

pub fn circuit_to_string(c: &Circuit) -> String {
    let mut out = String::new();
    out.push_str(&format!("qubits {}\n", c.num_qubits));
    for op in &c.ops {
        let refs: Vec<String> = op.qubits.iter().map(|q| format!("q[{q}]")).collect();
        out.push_str(&format!("{} {}\n", op.gate, refs.join(", ")));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::unitary::{circuit_unitary, unitary_distance};

    #[test]
    fn roundtrip_every_gate() {
        let src = "\
qubits 3
x q[0]
h q[1]
rx(30) q[0]
ry(-45.5) q[1]
rz(90) q[2]
u3(180, -90, 90) q[0]
direct_rx(12.25) q[1]
cnot q[0], q[1]
open_cnot q[1], q[2]
swap q[0], q[2]
cr(45) q[0], q[1]
zz(50) q[1], q[2]
fsim(37) q[0], q[1]
barrier q[0], q[1], q[2]
iswap q[0], q[1]
sqrt_iswap q[1], q[2]
";
        let c = parse_circuit(src).unwrap();
        assert_eq!(c.num_qubits, 3);
        assert_eq!(c.ops.len(), 16);
        let emitted = circuit_to_string(&c);
        let c2 = parse_circuit(&emitted).unwrap();
        assert_eq!(c, c2);
        assert_eq!(emitted, circuit_to_string(&c2));
    }

    #[test]
    fn case_comments_aliases() {
        let src = "\
# leading comment
Qubits 2

CX q[0], q[1]   # trailing comment
OPENCNOT q[0], q[1]
RX(1e1) q[0]
";
        let c = parse_circuit(src).unwrap();
        assert_eq!(c.ops[0].gate, Gate::Cnot);
        assert_eq!(c.ops[1].gate, Gate::OpenCnot);
        assert_eq!(c.ops[2].gate, Gate::Rx(10.0));
    }

    #[test]
    fn parsed_circuit_has_expected_unitary() {
        let src = "qubits 2\nh q[0]\ncnot q[0], q[1]\n";
        let c = parse_circuit(src).unwrap();
        let u = circuit_unitary(&c).unwrap();
        let mut manual = crate::ir::circuit::Circuit::new(2);
        manual.push(Gate::H, &[0]).unwrap();
        manual.push(Gate::Cnot, &[0, 1]).unwrap();
        let v = circuit_unitary(&manual).unwrap();
        assert!(unitary_distance(&u, &v) < 1e-12);
    }

    #[test]
    fn unknown_gate_is_opaque_custom() {
        let c = parse_circuit("qubits 1\nmystery q[0]\n").unwrap();
        match &c.ops[0].gate {
            Gate::Custom {
                name,
                arity,
                matrix,
            } => {
                assert_eq!(name, "mystery");
                assert_eq!(*arity, 1);
                assert!(matrix.is_none());
            }
            other => panic!("unexpected gate {other:?}"),
        }
    }

    #[test]
    fn errors_carry_line_numbers() {
        let cases = [
            ("x q[0]\n", 1, "header"),
            ("qubits 2\nrx q[0]\n", 2, "parameter"),
            ("qubits 2\nrx(a) q[0]\n", 2, "invalid parameter"),
            ("qubits 2\ncnot q[0]\n", 2, "2 qubit"),
            ("qubits 2\nx q[5]\n", 2, "out of range"),
            ("qubits 2\nswap q[0], q[0]\n", 2, "twice"),
            ("qubits 2\nmystery(3) q[0]\n", 2, "unknown parameterized"),
            ("qubits 2\nx foo\n", 2, "qubit reference"),
            ("qubits 2\nbarrier\n", 2, "no qubits"),
            ("qubits 0\n", 1, "at least one"),
        ];
        for (src, line, frag) in cases {
            match parse_circuit(src) {
                Err(IrError::Parse { line: l, msg }) => {
                    assert_eq!(l, line, "source {src:?}");
                    assert!(
                        msg.contains(frag),
                        "message `{msg}` missing `{frag}` for {src:?}"
                    );
                }
                other => panic!("expected parse error for {src:?}, got {other:?}"),
            }
        }
        assert!(matches!(
            parse_circuit(""),
            Err(IrError::Parse { line: 0, .. })
        ));
    }
}
