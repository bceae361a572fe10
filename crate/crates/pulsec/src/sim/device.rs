//! Three-level device model built from a backend description.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::basis::extract_cr;
use crate::pulse::BackendConfig;
use crate::sim::SimError;

/// Lowering operator of a three-level transmon, with the bosonic sqrt(2)
/// on the 1-2 element.
pub fn lower_op() -> Array2<C64> {
    let mut b = Array2::<C64>::zeros((3, 3));
    b[[0, 1]] = C64::new(1.0, 0.0);
    b[[1, 2]] = C64::new(std::f64::consts::SQRT_2, 0.0);
    b
}

/// Number operator diag(0, 1, 2).
pub fn number_op() -> Array2<C64> {
    Array2::from_diag(&ndarray::arr1(&[
        C64::new(0.0, 0.0),
        C64::new(1.0, 0.0),
        C64::new(2.0, 0.0),
    ]))
}

/// Pauli Z on the qubit subspace, zero on level 2: diag(1, -1, 0).
pub fn ztilde_op() -> Array2<C64> {
    Array2::from_diag(&ndarray::arr1(&[
        C64::new(1.0, 0.0),
        C64::new(-1.0, 0.0),
        C64::new(0.0, 0.0),
    ]))
}

/// Projector onto level 2.
pub fn proj2() -> Array2<C64> {
    let mut p = Array2::<C64>::zeros((3, 3));
    p[[2, 2]] = C64::new(1.0, 0.0);
    p
}

/// Cross-resonance coupling of a directed qubit pair, in GHz.
#[derive(Debug, Clone, Copy)]
pub struct CrCoupling {
    pub control: usize,
    pub target: usize,
    /// ZX rate: sign of the effective target drive follows the control
    /// state.
    pub gzx_ghz: f64,
    /// Direct (control-independent) IX rate on the target.
    pub gix_ghz: f64,
}

/// Everything the propagator needs to know about the simulated subsystem.
/// `qubits` lists global qubit indices, most significant first.
#[derive(Debug, Clone)]
pub struct DeviceModel {
    pub qubits: Vec<usize>,
    pub dt_ns: f64,
    pub anharmonicity_ghz: Vec<f64>,
    /// Static frequency offset of each transmon from its drive frame.
    /// Zero on a calibrated backend; nonzero models a mistuned qubit.
    pub detuning_ghz: Vec<f64>,
    pub rabi_ghz: Vec<f64>,
    /// AM-PM phase skew of each drive line, rad per unit drive power.
    pub amp_skew_rad: Vec<f64>,
    /// Static phase of each drive line, rad.
    pub drive_phase_rad: Vec<f64>,
    pub t1_ns: Vec<f64>,
    pub t2_ns: Vec<f64>,
    pub cr: Option<CrCoupling>,
}

/// The IX rate of the cross-resonance drive relative to its ZX rate.
/// The direct always-on path to the target is a few times stronger than
/// the state-dependent one at these detunings.
pub const IX_OVER_ZX: f64 = 3.0;

impl DeviceModel {
    fn check_qubit(backend: &BackendConfig, q: usize) -> Result<(), SimError> {
        if q >= backend.num_qubits {
            return Err(SimError::QubitNotInModel(q));
        }
        Ok(())
    }

    fn base(backend: &BackendConfig, qubits: Vec<usize>) -> Result<Self, SimError> {
        for &q in &qubits {
            Self::check_qubit(backend, q)?;
        }
        Ok(DeviceModel {
            anharmonicity_ghz: qubits
                .iter()
                .map(|&q| backend.anharmonicity_ghz[q])
                .collect(),
            detuning_ghz: vec![0.0; qubits.len()],
            rabi_ghz: qubits.iter().map(|&q| backend.rabi_ghz[q]).collect(),
            amp_skew_rad: qubits
                .iter()
                .map(|&q| backend.amp_skew_rad.get(q).copied().unwrap_or(0.0))
                .collect(),
            drive_phase_rad: qubits
                .iter()
                .map(|&q| backend.drive_phase_rad.get(q).copied().unwrap_or(0.0))
                .collect(),
            t1_ns: qubits.iter().map(|&q| backend.t1_us[q] * 1000.0).collect(),
            t2_ns: qubits.iter().map(|&q| backend.t2_us[q] * 1000.0).collect(),
            qubits,
            dt_ns: backend.dt_ns,
            cr: None,
        })
    }

    /// Model for a single qubit.
    pub fn single(backend: &BackendConfig, q: usize) -> Result<Self, SimError> {
        Self::base(backend, vec![q])
    }

    /// Model for a directed coupled pair. The ZX rate is not a free
    /// parameter: it is pinned so that one stock cross-resonance tone from
    /// the backend's CNOT definition rotates the target by exactly 45
    /// degrees, which is what that tone is calibrated to do.
    pub fn pair(backend: &BackendConfig, control: usize, target: usize) -> Result<Self, SimError> {
        let mut dev = Self::base(backend, vec![control, target])?;
        let tpl = extract_cr(backend, control, target)?;
        let area_ns = tpl.amp.norm() * tpl.unit_area_samples() * backend.dt_ns;
        // 2 pi * gzx * area = pi/4  =>  gzx = 1/(8 area)
        let gzx = 0.125 / area_ns;
        dev.cr = Some(CrCoupling {
            control,
            target,
            gzx_ghz: gzx,
            gix_ghz: IX_OVER_ZX * gzx,
        });
        Ok(dev)
    }

    pub fn num_qutrits(&self) -> usize {
        self.qubits.len()
    }

    pub fn dim(&self) -> usize {
        3usize.pow(self.qubits.len() as u32)
    }

    pub fn local_index(&self, q: usize) -> Option<usize> {
        self.qubits.iter().position(|&x| x == q)
    }

    /// Embed a single-qutrit operator at local position `i` (0 = most
    /// significant).
    pub fn embed(&self, op: &Array2<C64>, i: usize) -> Array2<C64> {
        let n = self.num_qutrits();
        let mut m = Array2::<C64>::eye(1);
        for k in 0..n {
            let factor = if k == i {
                op.clone()
            } else {
                Array2::<C64>::eye(3)
            };
            m = crate::math::kron(&m, &factor);
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulse::BackendConfig;

    #[test]
    fn lower_op_commutator() {
        let b = lower_op();
        let bd = crate::math::dagger(&b);
        let comm = b.dot(&bd) - bd.dot(&b);
        // [b, b^dag] = diag(1, 1, -2) for a three-level truncation
        assert!((comm[[0, 0]].re - 1.0).abs() < 1e-15);
        assert!((comm[[1, 1]].re - 1.0).abs() < 1e-15);
        assert!((comm[[2, 2]].re + 2.0).abs() < 1e-15);
    }

    #[test]
    fn pair_model_derives_zx_rate() {
        let backend = BackendConfig::almaden_mock();
        let dev = DeviceModel::pair(&backend, 0, 1).unwrap();
        let cr = dev.cr.unwrap();
        // 0.3 amp * 452.51 samples * 0.22 ns ~ 29.87 ns of area
        let area = 0.3 * 452.5123612667969 * 0.22;
        assert!((cr.gzx_ghz - 0.125 / area).abs() < 1e-12);
        assert!((cr.gix_ghz / cr.gzx_ghz - 3.0).abs() < 1e-12);
        assert_eq!(dev.dim(), 9);
    }

    #[test]
    fn single_model_shapes() {
        let backend = BackendConfig::almaden_mock();
        let dev = DeviceModel::single(&backend, 2).unwrap();
        assert_eq!(dev.qubits, vec![2]);
        assert_eq!(dev.dim(), 3);
        assert!(DeviceModel::single(&backend, 99).is_err());
    }

    #[test]
    fn embed_obeys_ordering() {
        let backend = BackendConfig::almaden_mock();
        let dev = DeviceModel::pair(&backend, 0, 1).unwrap();
        let n = number_op();
        let left = dev.embed(&n, 0);
        // |1>|0> has index 3 under most-significant-first ordering
        assert!((left[[3, 3]].re - 1.0).abs() < 1e-15);
        assert!((left[[1, 1]].re).abs() < 1e-15);
        let right = dev.embed(&n, 1);
        assert!((right[[1, 1]].re - 1.0).abs() < 1e-15);
        assert!((right[[3, 3]].re).abs() < 1e-15);
    }
}
