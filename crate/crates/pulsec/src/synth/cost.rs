//! Gate-cost accounting and two-qubit decomposition against a choice of
//! entangling basis.
//!
//! Closed forms cover most of the search space: a canonical-coordinate match
//! gives single-application decompositions, the z = 0 plane of the chamber
//! has an exact two-application circuit for CNOT-like bases, and the full
//! chamber decomposes into at most three cross-resonance tones with angles
//! read straight off the coordinates. The iSWAP-family bases fall back to a
//! seeded multistart simplex search.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::ir::unitary::{
    circuit_unitary, cnot_matrix, cr_matrix, euler_zxz, iswap_matrix, sqrt_iswap_matrix,
};
use crate::ir::{Circuit, Gate, Operation};
use crate::math::{dagger, kron, normalize_angle_deg, trace};
use crate::synth::kak::{kak_decompose, KakDecomposition};
use crate::synth::optimize::{multistart_minimize, seeded_starts, NmOptions};
use crate::synth::SynthError;

/// Entangling gates a decomposition can be counted against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasisGate {
    Cnot,
    Cr90,
    ISwap,
    SqrtISwap,
    /// Cross-resonance with a free angle per application.
    CrTheta,
}

impl BasisGate {
    pub fn label(&self) -> &'static str {
        match self {
            BasisGate::Cnot => "cnot",
            BasisGate::Cr90 => "cr90",
            BasisGate::ISwap => "iswap",
            BasisGate::SqrtISwap => "sqrt_iswap",
            BasisGate::CrTheta => "cr_theta",
        }
    }

    /// Cost charged per application. CR with a free angle is charged by
    /// angle instead (theta / 90 per tone).
    pub fn weight(&self) -> f64 {
        match self {
            BasisGate::SqrtISwap => 0.5,
            _ => 1.0,
        }
    }

    /// Matrix of one application, for the fixed-matrix bases.
    fn matrix(&self) -> Option<Array2<C64>> {
        match self {
            BasisGate::Cnot => Some(cnot_matrix()),
            BasisGate::Cr90 => Some(cr_matrix(90.0)),
            BasisGate::ISwap => Some(iswap_matrix()),
            BasisGate::SqrtISwap => Some(sqrt_iswap_matrix()),
            BasisGate::CrTheta => None,
        }
    }

    /// Canonical coordinates of a single application, if fixed.
    fn coords(&self) -> Option<(f64, f64, f64)> {
        match self {
            BasisGate::Cnot | BasisGate::Cr90 => Some((45.0, 0.0, 0.0)),
            BasisGate::ISwap => Some((45.0, 45.0, 0.0)),
            BasisGate::SqrtISwap => Some((22.5, 22.5, 0.0)),
            BasisGate::CrTheta => None,
        }
    }

    fn gate(&self) -> Gate {
        match self {
            BasisGate::Cnot => Gate::Cnot,
            BasisGate::Cr90 => Gate::Cr(90.0),
            BasisGate::ISwap => Gate::Custom {
                name: "iswap".into(),
                arity: 2,
                matrix: Some(iswap_matrix()),
            },
            BasisGate::SqrtISwap => Gate::Custom {
                name: "sqrt_iswap".into(),
                arity: 2,
                matrix: Some(sqrt_iswap_matrix()),
            },
            BasisGate::CrTheta => Gate::Cr(0.0),
        }
    }
}

pub const ALL_BASES: [BasisGate; 5] = [
    BasisGate::Cnot,
    BasisGate::Cr90,
    BasisGate::ISwap,
    BasisGate::SqrtISwap,
    BasisGate::CrTheta,
];

/// Minimum average gate fidelity accepted by the numerical search.
pub const FIDELITY_FLOOR: f64 = 0.999;

/// A synthesized two-qubit circuit for a target unitary.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub basis: BasisGate,
    /// Number of basis-gate applications in the circuit.
    pub applications: usize,
    /// Weighted cost: applications * weight, or sum(|theta|)/90 for CR.
    pub cost: f64,
    /// Average gate fidelity of the circuit against the target.
    pub fidelity: f64,
    pub circuit: Circuit,
    /// CR tone angles, in application order (empty for fixed bases).
    pub cr_angles: Vec<f64>,
}

/// Average gate fidelity between two two-qubit unitaries,
/// `(|tr(U^dag V)|^2 + 4) / 20`.
pub fn avg_gate_fidelity(u: &Array2<C64>, v: &Array2<C64>) -> f64 {
    let t = trace(&dagger(u).dot(v));
    (t.norm_sqr() + 4.0) / 20.0
}

const COORD_TOL: f64 = 1e-6;

fn coords_close(got: (f64, f64, f64), want: (f64, f64, f64)) -> bool {
    (got.0 - want.0).abs() < COORD_TOL
        && (got.1 - want.1).abs() < COORD_TOL
        && (got.2 - want.2).abs() < COORD_TOL
}

/// Append a single-qubit unitary as up to three RZ/RX rotations.
fn push_local(circ: &mut Circuit, l: &Array2<C64>, q: usize) {
    let (a, t, c) = euler_zxz(l);
    for (angle, is_x) in [(c, false), (t, true), (a, false)] {
        let angle = normalize_angle_deg(angle);
        if angle.abs() < 1e-9 {
            continue;
        }
        let gate = if is_x { Gate::Rx(angle) } else { Gate::Rz(angle) };
        circ.push(gate, &[q]).expect("valid 1q op");
    }
}

fn push_ops(dst: &mut Circuit, ops: &[Operation]) {
    for op in ops {
        dst.push(op.gate.clone(), &op.qubits).expect("valid op");
    }
}

/// Rewrites `u` as locals + `template` + locals, which is possible exactly
/// when both share canonical coordinates.
fn express_via(u: &Array2<C64>, template: &Circuit) -> Result<Option<Circuit>, SynthError> {
    let g = circuit_unitary(template)?;
    let ku = kak_decompose(u)?;
    let kg = kak_decompose(&g)?;
    if !coords_close(ku.coords_deg(), kg.coords_deg()) {
        return Ok(None);
    }
    let mut circ = Circuit::new(2);
    // u = (K1a G1a^d x K1b G1b^d) . g . (G2a^d K2a x G2b^d K2b) up to phase
    push_local(&mut circ, &dagger(&kg.k2a).dot(&ku.k2a), 0);
    push_local(&mut circ, &dagger(&kg.k2b).dot(&ku.k2b), 1);
    push_ops(&mut circ, &template.ops);
    push_local(&mut circ, &ku.k1a.dot(&dagger(&kg.k1a)), 0);
    push_local(&mut circ, &ku.k1b.dot(&dagger(&kg.k1b)), 1);
    Ok(Some(circ))
}

fn single_gate_circuit(gate: Gate) -> Circuit {
    let mut c = Circuit::new(2);
    c.push(gate, &[0, 1]).expect("2q gate");
    c
}

/// `CNOT . (RX(alpha) x RZ(beta)) . CNOT`, which equals
/// `exp(-i alpha/2 XX) exp(-i beta/2 ZZ)` and covers the z = 0 chamber
/// plane for alpha = 2a, beta = 2b.
fn two_cnot_template(alpha_deg: f64, beta_deg: f64) -> Circuit {
    let mut c = Circuit::new(2);
    c.push(Gate::Cnot, &[0, 1]).unwrap();
    if alpha_deg.abs() > 1e-12 {
        c.push(Gate::Rx(alpha_deg), &[0]).unwrap();
    }
    if beta_deg.abs() > 1e-12 {
        c.push(Gate::Rz(beta_deg), &[1]).unwrap();
    }
    c.push(Gate::Cnot, &[0, 1]).unwrap();
    c
}

fn swap_template() -> Circuit {
    let mut c = Circuit::new(2);
    c.push(Gate::Cnot, &[0, 1]).unwrap();
    c.push(Gate::Cnot, &[1, 0]).unwrap();
    c.push(Gate::Cnot, &[0, 1]).unwrap();
    c
}

/// Replace every CNOT with its single-tone cross-resonance expansion
/// `CNOT = RZ(90)_c RX(90)_t CR(-90)` (up to phase).
fn expand_cnots_to_cr90(circ: &Circuit) -> Circuit {
    let mut out = Circuit::new(circ.num_qubits);
    for op in &circ.ops {
        if matches!(op.gate, Gate::Cnot) {
            let (c, t) = (op.qubits[0], op.qubits[1]);
            out.push(Gate::Cr(-90.0), &[c, t]).unwrap();
            out.push(Gate::Rx(90.0), &[t]).unwrap();
            out.push(Gate::Rz(90.0), &[c]).unwrap();
        } else {
            out.push(op.gate.clone(), &op.qubits).unwrap();
        }
    }
    out
}

/// Exact product-of-exponentials circuit for the canonical gate using CR
/// tones: one conjugated tone per nonzero coordinate.
///
/// `exp(-i a XX)` is CR(2a) conjugated by H on the control, `exp(-i b YY)`
/// needs an X- and Z-axis frame change, and `exp(-i c ZZ)` is CR(2c)
/// conjugated by H on the target.
fn cr_canonical_ops(a: f64, b: f64, c: f64) -> (Vec<Operation>, Vec<f64>) {
    let mut ops = Vec::new();
    let mut angles = Vec::new();
    let tiny = 1e-9;
    if c.abs() > tiny {
        ops.push(Operation::new(Gate::H, &[1]));
        ops.push(Operation::new(Gate::Cr(2.0 * c), &[0, 1]));
        ops.push(Operation::new(Gate::H, &[1]));
        angles.push(2.0 * c);
    }
    if b.abs() > tiny {
        ops.push(Operation::new(Gate::Rx(90.0), &[0]));
        ops.push(Operation::new(Gate::Rz(-90.0), &[1]));
        ops.push(Operation::new(Gate::Cr(2.0 * b), &[0, 1]));
        ops.push(Operation::new(Gate::Rx(-90.0), &[0]));
        ops.push(Operation::new(Gate::Rz(90.0), &[1]));
        angles.push(2.0 * b);
    }
    if a.abs() > tiny {
        ops.push(Operation::new(Gate::H, &[0]));
        ops.push(Operation::new(Gate::Cr(2.0 * a), &[0, 1]));
        ops.push(Operation::new(Gate::H, &[0]));
        angles.push(2.0 * a);
    }
    (ops, angles)
}

/// Decomposition into CR tones with free angles: exact for every target.
fn synthesize_cr_theta(
    u: &Array2<C64>,
    kak: &KakDecomposition,
) -> Result<Decomposition, SynthError> {
    let (a, b, c) = kak.coords_deg();
    let (n_ops, angles) = cr_canonical_ops(a, b, c);
    let mut circ = Circuit::new(2);
    push_local(&mut circ, &kak.k2a, 0);
    push_local(&mut circ, &kak.k2b, 1);
    push_ops(&mut circ, &n_ops);
    push_local(&mut circ, &kak.k1a, 0);
    push_local(&mut circ, &kak.k1b, 1);
    let fidelity = avg_gate_fidelity(u, &circuit_unitary(&circ)?);
    let cost = angles.iter().map(|t| t.abs()).sum::<f64>() / 90.0;
    Ok(Decomposition {
        basis: BasisGate::CrTheta,
        applications: angles.len(),
        cost,
        fidelity,
        circuit: circ,
        cr_angles: angles,
    })
}

/// Parameter layout for the numerical ansatz: one ZXZ triple per qubit per
/// local layer, interleaved with fixed basis-gate applications.
fn ansatz_unitary(basis_matrix: &Array2<C64>, params: &[f64], layers: usize) -> Array2<C64> {
    use crate::ir::unitary::{rx_matrix, rz_matrix};
    let local = |p: &[f64]| -> Array2<C64> {
        let l0 = rz_matrix(p[0]).dot(&rx_matrix(p[1])).dot(&rz_matrix(p[2]));
        let l1 = rz_matrix(p[3]).dot(&rx_matrix(p[4])).dot(&rz_matrix(p[5]));
        kron(&l0, &l1)
    };
    // circuit order L0 G L1 ... G Lk; matrix order reversed
    let mut u = local(&params[0..6]);
    for layer in 1..=layers {
        u = basis_matrix.dot(&u);
        u = local(&params[6 * layer..6 * layer + 6]).dot(&u);
    }
    u
}

fn euler_params(l: &Array2<C64>) -> [f64; 3] {
    let (a, t, c) = euler_zxz(l);
    [a, t, c]
}

/// Multistart simplex search for `u` as `layers` applications of a fixed
/// basis gate with free locals between them. Deterministic for a given
/// (basis, layers) pair.
fn numeric_decomposition(
    u: &Array2<C64>,
    basis: BasisGate,
    layers: usize,
    kak: &KakDecomposition,
) -> Result<Option<Decomposition>, SynthError> {
    let g = basis.matrix().expect("numeric search needs a fixed basis");
    let dim = 6 * (layers + 1);
    let objective = |p: &[f64]| 1.0 - avg_gate_fidelity(u, &ansatz_unitary(&g, p, layers));

    // structured starts: identity locals, and the target's own KAK locals
    // on the outside with identity in the middle
    let mut kak_start = vec![0.0; dim];
    let [a2a, t2a, c2a] = euler_params(&kak.k2a);
    let [a2b, t2b, c2b] = euler_params(&kak.k2b);
    let [a1a, t1a, c1a] = euler_params(&kak.k1a);
    let [a1b, t1b, c1b] = euler_params(&kak.k1b);
    kak_start[0..6].copy_from_slice(&[a2a, t2a, c2a, a2b, t2b, c2b]);
    kak_start[dim - 6..dim].copy_from_slice(&[a1a, t1a, c1a, a1b, t1b, c1b]);
    let structured = vec![vec![0.0; dim], kak_start];

    let basis_salt = ALL_BASES.iter().position(|b| *b == basis).unwrap() as u64;
    let seed = 0xC0FFEE ^ (basis_salt.wrapping_mul(1009)) ^ (layers as u64).wrapping_mul(7919);

    let opts = NmOptions {
        max_iter: 3000,
        ..NmOptions::default()
    };
    let mut best: Option<(Vec<f64>, f64)> = None;
    for round in 0..2u64 {
        let count = if round == 0 { 16 } else { 64 };
        let starts = seeded_starts(structured.clone(), dim, count, 180.0, seed ^ round);
        let found = multistart_minimize(&objective, starts, 40.0, opts);
        if best.as_ref().map_or(true, |b| found.1 < b.1) {
            best = Some(found);
        }
        if best.as_ref().unwrap().1 < 1.0 - FIDELITY_FLOOR {
            break;
        }
    }
    let (params, value) = best.unwrap();
    if 1.0 - value < FIDELITY_FLOOR {
        return Ok(None);
    }

    let mut circ = Circuit::new(2);
    let gate = basis.gate();
    for layer in 0..=layers {
        let p = &params[6 * layer..6 * layer + 6];
        let l0 = crate::ir::unitary::rz_matrix(p[0])
            .dot(&crate::ir::unitary::rx_matrix(p[1]))
            .dot(&crate::ir::unitary::rz_matrix(p[2]));
        let l1 = crate::ir::unitary::rz_matrix(p[3])
            .dot(&crate::ir::unitary::rx_matrix(p[4]))
            .dot(&crate::ir::unitary::rz_matrix(p[5]));
        push_local(&mut circ, &l0, 0);
        push_local(&mut circ, &l1, 1);
        if layer < layers {
            circ.push(gate.clone(), &[0, 1]).unwrap();
        }
    }
    let fidelity = avg_gate_fidelity(u, &circuit_unitary(&circ)?);
    if fidelity < FIDELITY_FLOOR {
        return Ok(None);
    }
    Ok(Some(Decomposition {
        basis,
        applications: layers,
        cost: layers as f64 * basis.weight(),
        fidelity,
        circuit: circ,
        cr_angles: Vec::new(),
    }))
}

fn finish_exact(
    u: &Array2<C64>,
    basis: BasisGate,
    circ: Circuit,
    applications: usize,
) -> Result<Decomposition, SynthError> {
    let fidelity = avg_gate_fidelity(u, &circuit_unitary(&circ)?);
    debug_assert!(fidelity > 0.999999, "exact path fidelity {fidelity}");
    Ok(Decomposition {
        basis,
        applications,
        cost: applications as f64 * basis.weight(),
        fidelity,
        circuit: circ,
        cr_angles: Vec::new(),
    })
}

/// Decompose a two-qubit unitary into at most three applications of the
/// basis gate, preferring exact constructions where the canonical
/// coordinates allow them.
pub fn synthesize(u: &Array2<C64>, basis: BasisGate) -> Result<Decomposition, SynthError> {
    let kak = kak_decompose(u)?;
    let (a, b, c) = kak.coords_deg();

    // locals only
    if coords_close((a, b, c), (0.0, 0.0, 0.0)) {
        let mut circ = Circuit::new(2);
        push_local(&mut circ, &kak.k1a.dot(&kak.k2a), 0);
        push_local(&mut circ, &kak.k1b.dot(&kak.k2b), 1);
        let fidelity = avg_gate_fidelity(u, &circuit_unitary(&circ)?);
        return Ok(Decomposition {
            basis,
            applications: 0,
            cost: 0.0,
            fidelity,
            circuit: circ,
            cr_angles: Vec::new(),
        });
    }

    if basis == BasisGate::CrTheta {
        return synthesize_cr_theta(u, &kak);
    }

    // one application: classes match
    if coords_close((a, b, c), basis.coords().unwrap()) {
        let circ = express_via(u, &single_gate_circuit(basis.gate()))?
            .expect("matching coordinates must express");
        return finish_exact(u, basis, circ, 1);
    }

    match basis {
        BasisGate::Cnot | BasisGate::Cr90 => {
            let expand = |t: &Circuit| -> Circuit {
                if basis == BasisGate::Cr90 {
                    expand_cnots_to_cr90(t)
                } else {
                    t.clone()
                }
            };
            if c.abs() < COORD_TOL {
                let t = expand(&two_cnot_template(2.0 * a, 2.0 * b));
                let circ = express_via(u, &t)?.expect("z = 0 template must express");
                return finish_exact(u, basis, circ, 2);
            }
            if coords_close((a, b, c), (45.0, 45.0, 45.0)) {
                let t = expand(&swap_template());
                let circ = express_via(u, &t)?.expect("swap template must express");
                return finish_exact(u, basis, circ, 3);
            }
            // generic chamber point: three applications, found numerically
            if let Some(d) = numeric_decomposition(u, basis, 3, &kak)? {
                return Ok(d);
            }
            Err(SynthError::DidNotConverge {
                basis: basis.label().into(),
                layers: 3,
                best: 0.0,
            })
        }
        BasisGate::ISwap | BasisGate::SqrtISwap => {
            if c.abs() < COORD_TOL {
                if let Some(d) = numeric_decomposition(u, basis, 2, &kak)? {
                    return Ok(d);
                }
            }
            if let Some(d) = numeric_decomposition(u, basis, 3, &kak)? {
                return Ok(d);
            }
            Err(SynthError::DidNotConverge {
                basis: basis.label().into(),
                layers: 3,
                best: 0.0,
            })
        }
        BasisGate::CrTheta => unreachable!(),
    }
}

/// Weighted cost of `u` against a basis without keeping the circuit.
pub fn discrete_cost(u: &Array2<C64>, basis: BasisGate) -> Result<f64, SynthError> {
    Ok(synthesize(u, basis)?.cost)
}

/// Total CR rotation (in units of 90 degrees) needed for `u`.
pub fn parametrized_cr_cost(u: &Array2<C64>) -> Result<f64, SynthError> {
    Ok(synthesize(u, BasisGate::CrTheta)?.cost)
}

/// One target row of the cost table.
#[derive(Debug, Clone)]
pub struct CostRow {
    pub name: String,
    pub cells: Vec<Decomposition>,
}

/// Cost comparison of standard targets against every basis.
#[derive(Debug, Clone)]
pub struct CostTable {
    pub theta_deg: f64,
    pub rows: Vec<CostRow>,
}

impl CostTable {
    /// Machine-readable long form.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("gate,basis,applications,cost,fidelity\n");
        for row in &self.rows {
            for cell in &row.cells {
                out.push_str(&format!(
                    "{},{},{},{:.6},{:.6}\n",
                    row.name, cell.basis.label(), cell.applications, cell.cost, cell.fidelity
                ));
            }
        }
        out
    }

    /// Aligned text matrix. Fixed-basis columns show weighted cost; the
    /// free-angle CR column shows the number of tones.
    pub fn to_text(&self) -> String {
        let headers = ["gate", "cnot", "cr90", "iswap", "sqrt_iswap", "cr(theta)"];
        let mut table: Vec<Vec<String>> = vec![headers.iter().map(|s| s.to_string()).collect()];
        for row in &self.rows {
            let mut line = vec![row.name.clone()];
            for cell in &row.cells {
                let text = if cell.basis == BasisGate::CrTheta {
                    format!("{}", cell.applications)
                } else if (cell.cost - cell.cost.round()).abs() < 1e-9 {
                    format!("{}", cell.cost.round() as i64)
                } else {
                    format!("{:.1}", cell.cost)
                };
                line.push(text);
            }
            table.push(line);
        }
        let widths: Vec<usize> = (0..headers.len())
            .map(|i| table.iter().map(|r| r[i].len()).max().unwrap())
            .collect();
        let mut out = String::new();
        for (ri, row) in table.iter().enumerate() {
            let line: Vec<String> = row
                .iter()
                .enumerate()
                .map(|(i, cell)| {
                    if i == 0 {
                        format!("{:<w$}", cell, w = widths[i])
                    } else {
                        format!("{:>w$}", cell, w = widths[i])
                    }
                })
                .collect();
            out.push_str(line.join("  ").trim_end());
            out.push('\n');
            if ri == 0 {
                let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
                out.push_str(&rule.join("--"));
                out.push('\n');
            }
        }
        out
    }
}

/// Build the cost table for the standard targets: CNOT, SWAP, ZZ(theta)
/// and FSIM(theta), against every basis.
pub fn cost_table(theta_deg: f64) -> Result<CostTable, SynthError> {
    use crate::ir::unitary::{fsim_matrix, swap_matrix, zz_matrix};
    let targets: Vec<(String, Array2<C64>)> = vec![
        ("cnot".into(), cnot_matrix()),
        ("swap".into(), swap_matrix()),
        (format!("zz({})", theta_deg), zz_matrix(theta_deg)),
        (format!("fsim({})", theta_deg), fsim_matrix(theta_deg)),
    ];
    let mut rows = Vec::new();
    for (name, m) in targets {
        let mut cells = Vec::new();
        for basis in ALL_BASES {
            cells.push(synthesize(&m, basis)?);
        }
        rows.push(CostRow { name, cells });
    }
    Ok(CostTable {
        theta_deg,
        rows,
    })
}
