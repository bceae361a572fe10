//! Exact gate and circuit unitaries.
//!
//! Conventions, fixed once here and relied on everywhere else:
//! - `RZ(t) = diag(e^{-it/2}, e^{+it/2})`, `RX(t) = exp(-i t X / 2)`.
//! - `CR(t) = exp(-i (t/2) Z(x)X)`: the controlled rotation generated by a
//!   cross-resonance drive, control in the Z factor, target in the X factor.
//!   Equivalently block-diag(RX(t), RX(-t)) in the control basis.
//! - `ZZ(t) = exp(-i (t/2) Z(x)Z)`.
//! - Multi-qubit basis ordering: the first listed qubit is the most
//!   significant bit of the index, and circuit qubit 0 is the most
//!   significant bit of the full register.
//!
//! All angles in degrees.

use super::circuit::Circuit;
use super::gate::Gate;
use super::IrError;
use crate::math::{c, det, identity, kron, normalize_angle_deg, rad, C64};
use ndarray::Array2;

pub const MAX_UNITARY_QUBITS: usize = 10;

pub fn pauli_x() -> Array2<C64> {
    ndarray::arr2(&[[c(0.0, 0.0), c(1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]])
}

pub fn pauli_y() -> Array2<C64> {
    ndarray::arr2(&[[c(0.0, 0.0), c(0.0, -1.0)], [c(0.0, 1.0), c(0.0, 0.0)]])
}

pub fn pauli_z() -> Array2<C64> {
    ndarray::arr2(&[[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(-1.0, 0.0)]])
}

pub fn x_matrix() -> Array2<C64> {
    pauli_x()
}

pub fn h_matrix() -> Array2<C64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ndarray::arr2(&[[c(s, 0.0), c(s, 0.0)], [c(s, 0.0), c(-s, 0.0)]])
}

pub fn rx_matrix(deg: f64) -> Array2<C64> {
    let h = rad(deg) / 2.0;
    ndarray::arr2(&[
        [c(h.cos(), 0.0), c(0.0, -h.sin())],
        [c(0.0, -h.sin()), c(h.cos(), 0.0)],
    ])
}

pub fn ry_matrix(deg: f64) -> Array2<C64> {
    let h = rad(deg) / 2.0;
    ndarray::arr2(&[
        [c(h.cos(), 0.0), c(-h.sin(), 0.0)],
        [c(h.sin(), 0.0), c(h.cos(), 0.0)],
    ])
}

pub fn rz_matrix(deg: f64) -> Array2<C64> {
    let h = rad(deg) / 2.0;
    ndarray::arr2(&[
        [c(0.0, -h).exp(), c(0.0, 0.0)],
        [c(0.0, 0.0), c(0.0, h).exp()],
    ])
}

/// `diag(1, e^{i a})`: RZ up to global phase. Frame changes implement this.
pub fn phase_matrix(deg: f64) -> Array2<C64> {
    ndarray::arr2(&[
        [c(1.0, 0.0), c(0.0, 0.0)],
        [c(0.0, 0.0), c(0.0, rad(deg)).exp()],
    ])
}

pub fn u3_matrix(theta: f64, phi: f64, lam: f64) -> Array2<C64> {
    let (t, p, l) = (rad(theta), rad(phi), rad(lam));
    let (ct, st) = ((t / 2.0).cos(), (t / 2.0).sin());
    ndarray::arr2(&[
        [c(ct, 0.0), -c(0.0, l).exp() * st],
        [c(0.0, p).exp() * st, c(0.0, p + l).exp() * ct],
    ])
}

pub fn cnot_matrix() -> Array2<C64> {
    let mut m = Array2::zeros((4, 4));
    m[[0, 0]] = c(1.0, 0.0);
    m[[1, 1]] = c(1.0, 0.0);
    m[[2, 3]] = c(1.0, 0.0);
    m[[3, 2]] = c(1.0, 0.0);
    m
}

/// CNOT conditioned on the control being |0> instead of |1>.
pub fn open_cnot_matrix() -> Array2<C64> {
    let mut m = Array2::zeros((4, 4));
    m[[0, 1]] = c(1.0, 0.0);
    m[[1, 0]] = c(1.0, 0.0);
    m[[2, 2]] = c(1.0, 0.0);
    m[[3, 3]] = c(1.0, 0.0);
    m
}

pub fn swap_matrix() -> Array2<C64> {
    let mut m = Array2::zeros((4, 4));
    m[[0, 0]] = c(1.0, 0.0);
    m[[1, 2]] = c(1.0, 0.0);
    m[[2, 1]] = c(1.0, 0.0);
    m[[3, 3]] = c(1.0, 0.0);
    m
}

pub fn cz_matrix() -> Array2<C64> {
    let mut m = identity(4);
    m[[3, 3]] = c(-1.0, 0.0);
    m
}

pub fn cr_matrix(deg: f64) -> Array2<C64> {
    let mut m = Array2::zeros((4, 4));
    let top = rx_matrix(deg);
    let bot = rx_matrix(-deg);
    for i in 0..2 {
        for j in 0..2 {
            m[[i, j]] = top[[i, j]];
            m[[i + 2, j + 2]] = bot[[i, j]];
        }
    }
    m
}

pub fn zz_matrix(deg: f64) -> Array2<C64> {
    let h = rad(deg) / 2.0;
    let mut m = Array2::zeros((4, 4));
    m[[0, 0]] = c(0.0, -h).exp();
    m[[1, 1]] = c(0.0, h).exp();
    m[[2, 2]] = c(0.0, h).exp();
    m[[3, 3]] = c(0.0, -h).exp();
    m
}

pub fn iswap_matrix() -> Array2<C64> {
    let mut m = Array2::zeros((4, 4));
    m[[0, 0]] = c(1.0, 0.0);
    m[[1, 2]] = c(0.0, 1.0);
    m[[2, 1]] = c(0.0, 1.0);
    m[[3, 3]] = c(1.0, 0.0);
    m
}

pub fn sqrt_iswap_matrix() -> Array2<C64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut m = Array2::zeros((4, 4));
    m[[0, 0]] = c(1.0, 0.0);
    m[[1, 1]] = c(s, 0.0);
    m[[1, 2]] = c(0.0, s);
    m[[2, 1]] = c(0.0, s);
    m[[2, 2]] = c(s, 0.0);
    m[[3, 3]] = c(1.0, 0.0);
    m
}

/// Parameterized iSWAP-family gate: single-qubit Z rotations by `deg` on
/// both qubits, an iSWAP, a CZ, then the same Z rotations again.
pub fn fsim_matrix(deg: f64) -> Array2<C64> {
    let local = kron(&rz_matrix(deg), &rz_matrix(deg));
    local.dot(&cz_matrix()).dot(&iswap_matrix()).dot(&local)
}

pub fn gate_unitary(gate: &Gate) -> Result<Array2<C64>, IrError> {
    match gate {
        Gate::X => Ok(x_matrix()),
        Gate::H => Ok(h_matrix()),
        Gate::Rx(a) => Ok(rx_matrix(*a)),
        Gate::Ry(a) => Ok(ry_matrix(*a)),
        Gate::Rz(a) => Ok(rz_matrix(*a)),
        Gate::U3(t, p, l) => Ok(u3_matrix(*t, *p, *l)),
        Gate::DirectRx(a) => Ok(rx_matrix(*a)),
        Gate::Cnot => Ok(cnot_matrix()),
        Gate::OpenCnot => Ok(open_cnot_matrix()),
        Gate::Swap => Ok(swap_matrix()),
        Gate::Cr(a) => Ok(cr_matrix(*a)),
        Gate::Zz(a) => Ok(zz_matrix(*a)),
        Gate::Fsim(a) => Ok(fsim_matrix(*a)),
        Gate::Barrier => Err(IrError::NoUnitary {
            gate: "barrier".into(),
        }),
        Gate::Custom { name, matrix, .. } => match matrix {
            Some(m) => Ok(m.clone()),
            None => Err(IrError::NoUnitary { gate: name.clone() }),
        },
    }
}

/// Expand a k-qubit unitary onto the full register. `qubits[0]` is the
/// most significant bit of the gate's own index space.
pub fn embed_unitary(num_qubits: usize, qubits: &[usize], m: &Array2<C64>) -> Array2<C64> {
    let k = qubits.len();
    assert_eq!(m.nrows(), 1 << k);
    let dim = 1usize << num_qubits;
    let mut full = Array2::<C64>::zeros((dim, dim));
    // Bit position (from LSB) of circuit qubit q under big-endian ordering.
    let pos: Vec<usize> = qubits.iter().map(|&q| num_qubits - 1 - q).collect();
    for col in 0..dim {
        let mut sub_in = 0usize;
        for (b, &p) in pos.iter().enumerate() {
            sub_in |= ((col >> p) & 1) << (k - 1 - b);
        }
        let mut base = col;
        for &p in &pos {
            base &= !(1usize << p);
        }
        for sub_out in 0..(1 << k) {
            let amp = m[[sub_out, sub_in]];
            if amp == c(0.0, 0.0) {
                continue;
            }
            let mut row = base;
            for (b, &p) in pos.iter().enumerate() {
                row |= ((sub_out >> (k - 1 - b)) & 1) << p;
            }
            full[[row, col]] = amp;
        }
    }
    full
}

/// Product of all gate unitaries in circuit order. Barriers are skipped.
pub fn circuit_unitary(circuit: &Circuit) -> Result<Array2<C64>, IrError> {
    if circuit.num_qubits > MAX_UNITARY_QUBITS {
        return Err(IrError::CircuitTooLarge {
            num_qubits: circuit.num_qubits,
            max: MAX_UNITARY_QUBITS,
        });
    }
    let dim = 1usize << circuit.num_qubits;
    let mut u = identity(dim);
    for op in &circuit.ops {
        if op.gate.is_barrier() {
            continue;
        }
        let g = gate_unitary(&op.gate)?;
        let full = embed_unitary(circuit.num_qubits, &op.qubits, &g);
        u = full.dot(&u);
    }
    Ok(u)
}

/// Rescale so that det = 1 (projective representative of the same gate).
pub fn strip_global_phase(u: &Array2<C64>) -> Array2<C64> {
    let n = u.nrows() as f64;
    let phase = det(u).arg() / n;
    u.mapv(|z| z * c(0.0, -phase).exp())
}

/// ZXZ Euler angles: find (a, t, c) in degrees with
/// `U ~ RZ(a) RX(t) RZ(c)` up to global phase.
pub fn euler_zxz(u: &Array2<C64>) -> (f64, f64, f64) {
    let v = strip_global_phase(u);
    let n00 = v[[0, 0]].norm();
    let n10 = v[[1, 0]].norm();
    let t = 2.0 * n10.atan2(n00);
    let eps = 1e-9;
    let (a, cang);
    if n10 < eps {
        // Diagonal: pure RZ.
        cang = 0.0;
        a = -2.0 * v[[0, 0]].arg();
    } else if n00 < eps {
        // Anti-diagonal: RX(180) times RZ.
        cang = 0.0;
        a = 2.0 * (v[[1, 0]].arg() + std::f64::consts::FRAC_PI_2);
    } else {
        let sum = -2.0 * v[[0, 0]].arg();
        let diff = 2.0 * (v[[1, 0]].arg() + std::f64::consts::FRAC_PI_2);
        a = (sum + diff) / 2.0;
        cang = (sum - diff) / 2.0;
    }
    (
        normalize_angle_deg(a.to_degrees()),
        normalize_angle_deg(t.to_degrees()),
        normalize_angle_deg(cang.to_degrees()),
    )
}

/// Distance used by equivalence checks: `phase_distance` from `math`,
/// re-exported with the IR-facing name.
pub fn unitary_distance(u: &Array2<C64>, v: &Array2<C64>) -> f64 {
    crate::math::phase_distance(u, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{dagger, expm_i_hermitian, max_abs_diff, phase_aligned_diff, random_unitary};
    use rand::SeedableRng;

    fn assert_close(a: &Array2<C64>, b: &Array2<C64>, tol: f64) {
        let d = max_abs_diff(a, b);
        assert!(d < tol, "matrices differ by {d:.3e}");
    }

    #[test]
    fn generators_match_exponentials() {
        for theta in [-170.0, -45.0, 0.0, 30.0, 90.0, 180.0] {
            let zx = kron(&pauli_z(), &pauli_x());
            let zz = kron(&pauli_z(), &pauli_z());
            assert_close(&cr_matrix(theta), &expm_i_hermitian(&zx, rad(theta) / 2.0), 1e-12);
            assert_close(&zz_matrix(theta), &expm_i_hermitian(&zz, rad(theta) / 2.0), 1e-12);
            let x = pauli_x();
            assert_close(&rx_matrix(theta), &expm_i_hermitian(&x, rad(theta) / 2.0), 1e-12);
        }
    }

    #[test]
    fn cr_is_controlled_x_rotation() {
        // Control |0>: RX(+t) on target. Control |1>: RX(-t).
        let m = cr_matrix(63.0);
        let rx_p = rx_matrix(63.0);
        let rx_m = rx_matrix(-63.0);
        for i in 0..2 {
            for j in 0..2 {
                assert!((m[[i, j]] - rx_p[[i, j]]).norm() < 1e-12);
                assert!((m[[i + 2, j + 2]] - rx_m[[i, j]]).norm() < 1e-12);
                assert!(m[[i, j + 2]].norm() < 1e-15);
                assert!(m[[i + 2, j]].norm() < 1e-15);
            }
        }
    }

    #[test]
    fn cnot_from_single_cr_with_locals() {
        // CNOT = e^{i pi/4} RZ(90)_c RX(90)_t CR(-90), exactly.
        let u = embed_unitary(2, &[0], &rz_matrix(90.0))
            .dot(&embed_unitary(2, &[1], &rx_matrix(90.0)))
            .dot(&cr_matrix(-90.0));
        let scaled = u.mapv(|z| z * c(0.0, std::f64::consts::FRAC_PI_4).exp());
        assert_close(&scaled, &cnot_matrix(), 1e-12);
    }

    #[test]
    fn echoed_cr_equals_plain_cr() {
        // Circuit order [X_c, CR(-t/2), X_c, CR(t/2)] composes to CR(t).
        for t in [30.0, 45.0, -90.0, 137.0] {
            let xc = embed_unitary(2, &[0], &x_matrix());
            let u = cr_matrix(t / 2.0)
                .dot(&xc)
                .dot(&cr_matrix(-t / 2.0))
                .dot(&xc);
            assert_close(&u, &cr_matrix(t), 1e-12);
        }
    }

    #[test]
    fn echoed_cnot_expansion_is_cnot() {
        // Circuit order: X(c), RX(90, t), CR(45), X(c), CR(-45), RZ(90, c).
        // Equals CNOT times the fixed global phase e^{-i pi/4}.
        let mut circ = Circuit::new(2);
        circ.push(Gate::X, &[0]).unwrap();
        circ.push(Gate::Rx(90.0), &[1]).unwrap();
        circ.push(Gate::Cr(45.0), &[0, 1]).unwrap();
        circ.push(Gate::X, &[0]).unwrap();
        circ.push(Gate::Cr(-45.0), &[0, 1]).unwrap();
        circ.push(Gate::Rz(90.0), &[0]).unwrap();
        let u = circuit_unitary(&circ).unwrap();
        let expected = cnot_matrix().mapv(|z| z * c(0.0, -std::f64::consts::FRAC_PI_4).exp());
        assert_close(&u, &expected, 1e-12);
        assert!(phase_aligned_diff(&u, &cnot_matrix()) < 1e-12);
    }

    #[test]
    fn open_cnot_is_x_conjugated_cnot() {
        let xc = embed_unitary(2, &[0], &x_matrix());
        let u = xc.dot(&cnot_matrix()).dot(&xc);
        assert_close(&u, &open_cnot_matrix(), 1e-12);
    }

    #[test]
    fn zz_template_identity() {
        // H_t CR(t) H_t = CNOT RZ(t)_t CNOT with zero relative phase.
        for t in [30.0, 45.0, 50.0, 90.0, -70.0] {
            let ht = embed_unitary(2, &[1], &h_matrix());
            let lhs = ht.dot(&cr_matrix(t)).dot(&ht);
            let rzt = embed_unitary(2, &[1], &rz_matrix(t));
            let rhs = cnot_matrix().dot(&rzt).dot(&cnot_matrix());
            assert_close(&lhs, &rhs, 1e-12);
            assert_close(&lhs, &zz_matrix(t), 1e-12);
        }
    }

    #[test]
    fn u3_two_pulse_identity() {
        // U3(t, p, l) ~ P(p) RX(-90) P(t - 180) RX(-90) P(l + 180).
        for &t in &[0.0, 17.0, 90.0, 180.0, 233.0] {
            for &p in &[-120.0, 0.0, 45.0] {
                for &l in &[-90.0, 30.0] {
                    let u = phase_matrix(p)
                        .dot(&rx_matrix(-90.0))
                        .dot(&phase_matrix(t - 180.0))
                        .dot(&rx_matrix(-90.0))
                        .dot(&phase_matrix(l + 180.0));
                    let d = phase_aligned_diff(&u, &u3_matrix(t, p, l));
                    assert!(d < 1e-12, "t={t} p={p} l={l}: {d:.3e}");
                }
            }
        }
    }

    #[test]
    fn u3_single_pulse_identity() {
        // U3(t, p, l) ~ RZ(p + 90) RX(t) RZ(l - 90).
        for &t in &[0.0, 17.0, 90.0, 180.0, 233.0] {
            for &p in &[-120.0, 0.0, 45.0] {
                for &l in &[-90.0, 30.0] {
                    let u = rz_matrix(p + 90.0)
                        .dot(&rx_matrix(t))
                        .dot(&rz_matrix(l - 90.0));
                    let d = phase_aligned_diff(&u, &u3_matrix(t, p, l));
                    assert!(d < 1e-12, "t={t} p={p} l={l}: {d:.3e}");
                }
            }
        }
    }

    #[test]
    fn x_as_u3_collapses_middle_frame() {
        // X = U3(180, -90, 90): with the two-pulse form the middle frame
        // change is zero, leaving two back-to-back RX(-90) pulses.
        assert!(phase_aligned_diff(&u3_matrix(180.0, -90.0, 90.0), &x_matrix()) < 1e-12);
        let u = phase_matrix(-90.0)
            .dot(&rx_matrix(-90.0))
            .dot(&rx_matrix(-90.0))
            .dot(&phase_matrix(180.0 + 90.0));
        assert!(phase_aligned_diff(&u, &x_matrix()) < 1e-12);
    }

    #[test]
    fn h_as_zxz() {
        let u = rz_matrix(90.0).dot(&rx_matrix(90.0)).dot(&rz_matrix(90.0));
        assert!(phase_aligned_diff(&u, &h_matrix()) < 1e-12);
    }

    #[test]
    fn cz_from_zz_and_locals() {
        let locals = kron(&rz_matrix(90.0), &rz_matrix(90.0));
        let u = zz_matrix(-90.0).dot(&locals);
        let scaled = u.mapv(|z| z * c(0.0, std::f64::consts::FRAC_PI_4).exp());
        assert_close(&scaled, &cz_matrix(), 1e-12);
    }

    #[test]
    fn sqrt_iswap_squares_to_iswap() {
        let s = sqrt_iswap_matrix();
        assert_close(&s.dot(&s), &iswap_matrix(), 1e-12);
    }

    #[test]
    fn fsim_is_unitary_for_all_angles() {
        for t in [0.0, 20.0, 37.0, 90.0, 180.0] {
            let m = fsim_matrix(t);
            assert_close(&dagger(&m).dot(&m), &identity(4), 1e-12);
        }
        assert_close(
            &fsim_matrix(0.0),
            &cz_matrix().dot(&iswap_matrix()),
            1e-12,
        );
    }

    #[test]
    fn euler_zxz_roundtrip() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let check = |u: &Array2<C64>| {
            let (a, t, cc) = euler_zxz(u);
            let rebuilt = rz_matrix(a).dot(&rx_matrix(t)).dot(&rz_matrix(cc));
            let d = phase_aligned_diff(&rebuilt, u);
            assert!(d < 1e-9, "distance {d:.3e}");
        };
        for _ in 0..50 {
            let u = random_unitary(2, &mut rng);
            check(&u);
        }
        check(&rz_matrix(77.0));
        check(&x_matrix());
        check(&h_matrix());
        check(&identity(2));
        check(&rx_matrix(-90.0));
        let (a, t, cc) = euler_zxz(&rx_matrix(90.0));
        assert!(a.abs() < 1e-9 && (t - 90.0).abs() < 1e-9 && cc.abs() < 1e-9);
    }

    #[test]
    fn embedding_conventions() {
        // CNOT with control q1, target q0 under big-endian indexing.
        let m = embed_unitary(2, &[1, 0], &cnot_matrix());
        let mut expected = Array2::<C64>::zeros((4, 4));
        expected[[0, 0]] = c(1.0, 0.0);
        expected[[3, 1]] = c(1.0, 0.0);
        expected[[2, 2]] = c(1.0, 0.0);
        expected[[1, 3]] = c(1.0, 0.0);
        assert_close(&m, &expected, 1e-15);
        // X on the last of three qubits sits in the LSB slot.
        let m = embed_unitary(3, &[2], &x_matrix());
        let expected = kron(&identity(4), &x_matrix());
        assert_close(&m, &expected, 1e-15);
        // Contiguous ordered pair equals a plain kron.
        let m = embed_unitary(3, &[0, 1], &cr_matrix(54.0));
        let expected = kron(&cr_matrix(54.0), &identity(2));
        assert_close(&m, &expected, 1e-12);
    }

    #[test]
    fn circuit_unitary_matches_manual_product() {
        let mut circ = Circuit::new(2);
        circ.push(Gate::H, &[0]).unwrap();
        circ.push(Gate::Barrier, &[0, 1]).unwrap();
        circ.push(Gate::Cnot, &[0, 1]).unwrap();
        let u = circuit_unitary(&circ).unwrap();
        let manual = cnot_matrix().dot(&kron(&h_matrix(), &identity(2)));
        assert_close(&u, &manual, 1e-12);
    }

    #[test]
    fn circuit_unitary_size_cap() {
        let circ = Circuit::new(11);
        assert!(matches!(
            circuit_unitary(&circ),
            Err(IrError::CircuitTooLarge { .. })
        ));
    }

    #[test]
    fn custom_gate_without_matrix_has_no_unitary() {
        let g = Gate::Custom {
            name: "mystery".into(),
            arity: 1,
            matrix: None,
        };
        assert!(matches!(gate_unitary(&g), Err(IrError::NoUnitary { .. })));
    }
}
