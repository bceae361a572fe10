//! Schedule propagation: pure states and density matrices under RK4.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::math::dagger;
use crate::pulse::{Channel, Schedule};
use crate::sim::device::{lower_op, number_op, proj2, ztilde_op, DeviceModel};
use crate::sim::SimError;

const TWO_PI: f64 = std::f64::consts::TAU;
/// RK4 substeps per envelope sample.
const SUBSTEPS: usize = 4;

/// One drive line: complex samples multiplying `scale * (d op + d* op^dag)`.
struct DriveTerm {
    samples: Vec<C64>,
    op: Array2<C64>,
    op_dag: Array2<C64>,
    scale: f64,
}

/// Precompiled Hamiltonian pieces for one schedule on one device.
pub struct Propagator {
    h_static: Array2<C64>,
    drives: Vec<DriveTerm>,
    n_samples: usize,
    dim: usize,
    dt_ns: f64,
}

impl Propagator {
    pub fn new(dev: &DeviceModel, sched: &Schedule) -> Result<Self, SimError> {
        let dim = dev.dim();
        let mut h_static = Array2::<C64>::zeros((dim, dim));
        for i in 0..dev.num_qutrits() {
            let p2 = dev.embed(&proj2(), i);
            let alpha = dev.anharmonicity_ghz[i];
            h_static = h_static + p2.mapv(|v| v * C64::new(TWO_PI * alpha, 0.0));
            let delta = dev.detuning_ghz[i];
            if delta != 0.0 {
                let n = dev.embed(&number_op(), i);
                h_static = h_static + n.mapv(|v| v * C64::new(TWO_PI * delta, 0.0));
            }
        }

        let n_samples = sched.duration();
        let mut drives = Vec::new();
        // Drive-line distortion: a static line phase plus AM-PM skew
        // proportional to instantaneous power, so stronger pulses rotate
        // about a slightly different equatorial axis.
        let skewed = |samples: Vec<C64>, i: usize| -> Vec<C64> {
            let skew = dev.amp_skew_rad[i];
            let phase = dev.drive_phase_rad[i];
            if skew == 0.0 && phase == 0.0 {
                return samples;
            }
            samples
                .into_iter()
                .map(|s| s * C64::from_polar(1.0, phase + skew * s.norm_sqr()))
                .collect()
        };
        for ch in sched.channels() {
            let samples = sched.render_channel(ch, n_samples, dev.dt_ns);
            match ch {
                Channel::Drive(q) => {
                    let i = dev
                        .local_index(q)
                        .ok_or(SimError::QubitNotInModel(q))?;
                    let samples = skewed(samples, i);
                    let op = dev.embed(&dagger(&lower_op()), i);
                    let op_dag = dagger(&op);
                    drives.push(DriveTerm {
                        samples,
                        op,
                        op_dag,
                        scale: TWO_PI * dev.rabi_ghz[i] / 2.0,
                    });
                }
                Channel::Control(c, t) => {
                    let cr = dev
                        .cr
                        .filter(|cr| cr.control == c && cr.target == t)
                        .ok_or_else(|| SimError::UnknownChannel(ch.to_string()))?;
                    let ci = dev.local_index(c).ok_or(SimError::QubitNotInModel(c))?;
                    let ti = dev.local_index(t).ok_or(SimError::QubitNotInModel(t))?;
                    let samples = skewed(samples, ci);
                    let bt_dag = dev.embed(&dagger(&lower_op()), ti);
                    let zc = dev.embed(&ztilde_op(), ci);
                    let zx_op = zc.dot(&bt_dag);
                    let zx_dag = dagger(&zx_op);
                    drives.push(DriveTerm {
                        samples: samples.clone(),
                        op: zx_op,
                        op_dag: zx_dag,
                        scale: TWO_PI * cr.gzx_ghz / 2.0,
                    });
                    let ix_dag = dagger(&bt_dag);
                    drives.push(DriveTerm {
                        samples,
                        op: bt_dag,
                        op_dag: ix_dag,
                        scale: TWO_PI * cr.gix_ghz / 2.0,
                    });
                }
            }
        }
        Ok(Propagator {
            h_static,
            drives,
            n_samples,
            dim,
            dt_ns: dev.dt_ns,
        })
    }

    /// Hamiltonian during sample `k`, in rad/ns.
    fn hamiltonian(&self, k: usize) -> Array2<C64> {
        let mut h = self.h_static.clone();
        for d in &self.drives {
            let s = d.samples[k];
            if s.norm_sqr() == 0.0 {
                continue;
            }
            let sc = C64::new(d.scale, 0.0);
            h = h + d.op.mapv(|v| v * (sc * s)) + d.op_dag.mapv(|v| v * (sc * s.conj()));
        }
        h
    }

    /// Propagate a pure state through the whole schedule.
    pub fn evolve_pure(&self, psi0: &Array1<C64>) -> Result<Array1<C64>, SimError> {
        if psi0.len() != self.dim {
            return Err(SimError::Dimension {
                expected: self.dim,
                got: psi0.len(),
            });
        }
        let mut psi = psi0.clone();
        let h_sub = self.dt_ns / SUBSTEPS as f64;
        for k in 0..self.n_samples {
            let h = self.hamiltonian(k);
            let deriv = |p: &Array1<C64>| -> Array1<C64> {
                h.dot(p).mapv(|v| v * C64::new(0.0, -1.0))
            };
            for _ in 0..SUBSTEPS {
                let k1 = deriv(&psi);
                let k2 = deriv(&(&psi + &k1.mapv(|v| v * C64::new(h_sub / 2.0, 0.0))));
                let k3 = deriv(&(&psi + &k2.mapv(|v| v * C64::new(h_sub / 2.0, 0.0))));
                let k4 = deriv(&(&psi + &k3.mapv(|v| v * C64::new(h_sub, 0.0))));
                psi = &psi
                    + &(k1 + k2.mapv(|v| v * C64::new(2.0, 0.0))
                        + k3.mapv(|v| v * C64::new(2.0, 0.0))
                        + k4)
                        .mapv(|v| v * C64::new(h_sub / 6.0, 0.0));
            }
        }
        Ok(psi)
    }

    /// Propagate a density matrix with the given collapse operators.
    pub fn evolve_open(
        &self,
        rho0: &Array2<C64>,
        collapse: &[Array2<C64>],
    ) -> Result<Array2<C64>, SimError> {
        if rho0.nrows() != self.dim || rho0.ncols() != self.dim {
            return Err(SimError::Dimension {
                expected: self.dim,
                got: rho0.nrows(),
            });
        }
        let ldl: Vec<(Array2<C64>, Array2<C64>)> = collapse
            .iter()
            .map(|l| (l.clone(), dagger(l).dot(l)))
            .collect();
        let mut rho = rho0.clone();
        let h_sub = self.dt_ns / SUBSTEPS as f64;
        let half = C64::new(0.5, 0.0);
        for k in 0..self.n_samples {
            let h = self.hamiltonian(k);
            let deriv = |r: &Array2<C64>| -> Array2<C64> {
                let mut d = (h.dot(r) - r.dot(&h)).mapv(|v| v * C64::new(0.0, -1.0));
                for (l, ll) in &ldl {
                    let jump = l.dot(r).dot(&dagger(l));
                    let anti = ll.dot(r).mapv(|v| v * half) + r.dot(ll).mapv(|v| v * half);
                    d = d + jump - anti;
                }
                d
            };
            for _ in 0..SUBSTEPS {
                let k1 = deriv(&rho);
                let k2 = deriv(&(&rho + &k1.mapv(|v| v * C64::new(h_sub / 2.0, 0.0))));
                let k3 = deriv(&(&rho + &k2.mapv(|v| v * C64::new(h_sub / 2.0, 0.0))));
                let k4 = deriv(&(&rho + &k3.mapv(|v| v * C64::new(h_sub, 0.0))));
                rho = &rho
                    + &(k1 + k2.mapv(|v| v * C64::new(2.0, 0.0))
                        + k3.mapv(|v| v * C64::new(2.0, 0.0))
                        + k4)
                        .mapv(|v| v * C64::new(h_sub / 6.0, 0.0));
            }
        }
        Ok(rho)
    }
}

/// Relaxation and dephasing collapse operators for every qutrit in the
/// model: amplitude damping `b / sqrt(T1)` and number-operator dephasing at
/// the rate left over once T1 is taken out of T2.
pub fn collapse_ops(dev: &DeviceModel) -> Vec<Array2<C64>> {
    let mut ops = Vec::new();
    for i in 0..dev.num_qutrits() {
        let t1 = dev.t1_ns[i];
        let t2 = dev.t2_ns[i];
        if t1.is_finite() && t1 > 0.0 {
            let l = dev.embed(&lower_op(), i);
            ops.push(l.mapv(|v| v * C64::new((1.0 / t1).sqrt(), 0.0)));
        }
        if t2.is_finite() && t2 > 0.0 {
            let gamma_phi = (1.0 / t2 - 1.0 / (2.0 * t1)).max(0.0);
            if gamma_phi > 0.0 {
                let l = dev.embed(&number_op(), i);
                ops.push(l.mapv(|v| v * C64::new((2.0 * gamma_phi).sqrt(), 0.0)));
            }
        }
    }
    ops
}

/// Pure-state evolution from a schedule.
pub fn evolve_schedule_pure(
    dev: &DeviceModel,
    sched: &Schedule,
    psi0: &Array1<C64>,
) -> Result<Array1<C64>, SimError> {
    Propagator::new(dev, sched)?.evolve_pure(psi0)
}

/// Open-system evolution from a schedule, with the device's T1/T2.
pub fn evolve_schedule_open(
    dev: &DeviceModel,
    sched: &Schedule,
    rho0: &Array2<C64>,
) -> Result<Array2<C64>, SimError> {
    Propagator::new(dev, sched)?.evolve_open(rho0, &collapse_ops(dev))
}

/// Computational basis state |levels[0], levels[1], ...> with the first
/// entry most significant.
pub fn basis_state(dev: &DeviceModel, levels: &[usize]) -> Array1<C64> {
    assert_eq!(levels.len(), dev.num_qutrits());
    let mut idx = 0;
    for &l in levels {
        assert!(l < 3);
        idx = idx * 3 + l;
    }
    let mut psi = Array1::<C64>::zeros(dev.dim());
    psi[idx] = C64::new(1.0, 0.0);
    psi
}

/// Density matrix of a pure state.
pub fn qutrit_density(psi: &Array1<C64>) -> Array2<C64> {
    let n = psi.len();
    let mut rho = Array2::<C64>::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            rho[[i, j]] = psi[i] * psi[j].conj();
        }
    }
    rho
}

/// Trace out all qutrits except `keep` (local index, 0 = most significant).
/// Only defined for one- and two-qutrit density matrices.
pub fn partial_trace_qutrit(rho: &Array2<C64>, num_qutrits: usize, keep: usize) -> Array2<C64> {
    match num_qutrits {
        1 => rho.clone(),
        2 => {
            let mut out = Array2::<C64>::zeros((3, 3));
            for a in 0..3 {
                for b in 0..3 {
                    let mut s = C64::new(0.0, 0.0);
                    for c in 0..3 {
                        let (i, j) = if keep == 0 {
                            (3 * a + c, 3 * b + c)
                        } else {
                            (3 * c + a, 3 * c + b)
                        };
                        s += rho[[i, j]];
                    }
                    out[[a, b]] = s;
                }
            }
            out
        }
        n => panic!("partial trace not implemented for {n} qutrits"),
    }
}

/// Qubit-subspace Bloch vector of a single-qutrit density matrix, plus the
/// leakage population. The (x, y, z) components are renormalized over the
/// 0-1 populations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub p2: f64,
}

pub fn bloch_of_density(rho3: &Array2<C64>) -> BlochVector {
    let p0 = rho3[[0, 0]].re;
    let p1 = rho3[[1, 1]].re;
    let p2 = rho3[[2, 2]].re;
    let pq = (p0 + p1).max(1e-300);
    BlochVector {
        x: 2.0 * rho3[[0, 1]].re / pq,
        y: -2.0 * rho3[[0, 1]].im / pq,
        z: (p0 - p1) / pq,
        p2,
    }
}

/// Bloch vector of one qutrit of a pure state.
pub fn bloch_of_state(psi: &Array1<C64>, num_qutrits: usize, keep: usize) -> BlochVector {
    let rho = qutrit_density(psi);
    let r3 = partial_trace_qutrit(&rho, num_qutrits, keep);
    bloch_of_density(&r3)
}
