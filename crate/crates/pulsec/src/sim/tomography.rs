//! State tomography and the sweep experiments built on it: the direct-RX
//! angle sweep with its phase-correction fit, and the cross-resonance
//! target-qubit trajectories for both control states.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::basis::{build_cr_theta, build_direct_rx, virtual_rz, PhaseCorrectionTable};
use crate::parallel::par_map;
use crate::pulse::{BackendConfig, Schedule};
use crate::sim::device::DeviceModel;
use crate::sim::evolve::{
    basis_state, evolve_schedule_open, evolve_schedule_pure, partial_trace_qutrit, qutrit_density,
    BlochVector,
};
use crate::sim::SimError;

/// Measurement axis of one tomography propagation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Qutrit-embedded pre-rotation mapping the axis expectation onto z.
/// X uses RY(-90), Y uses RX(+90); the 1-2 level stays untouched.
fn prerotation(axis: Axis) -> Array2<C64> {
    let mut u = Array2::<C64>::eye(3);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    match axis {
        Axis::Z => {}
        Axis::X => {
            // RY(-90): [[c, s], [-s, c]] at 45 degrees
            u[[0, 0]] = C64::new(r, 0.0);
            u[[0, 1]] = C64::new(r, 0.0);
            u[[1, 0]] = C64::new(-r, 0.0);
            u[[1, 1]] = C64::new(r, 0.0);
        }
        Axis::Y => {
            // RX(90): [[c, -i s], [-i s, c]] at 45 degrees
            u[[0, 0]] = C64::new(r, 0.0);
            u[[0, 1]] = C64::new(0.0, -r);
            u[[1, 0]] = C64::new(0.0, -r);
            u[[1, 1]] = C64::new(r, 0.0);
        }
    }
    u
}

fn has_noise(dev: &DeviceModel) -> bool {
    dev.t1_ns.iter().chain(dev.t2_ns.iter()).any(|t| t.is_finite())
}

/// Level populations (p0, p1, p2) of local qutrit `i` from a diagonal.
fn level_probs(diag: &[f64], n_qutrits: usize, i: usize) -> (f64, f64, f64) {
    let place = 3usize.pow((n_qutrits - 1 - i) as u32);
    let mut p = [0.0; 3];
    for (idx, &v) in diag.iter().enumerate() {
        p[(idx / place) % 3] += v;
    }
    (p[0], p[1], p[2])
}

/// One measurement-basis run: propagate, pre-rotate, read populations.
fn measure_axis(
    dev: &DeviceModel,
    sched: &Schedule,
    q: usize,
    axis: Axis,
) -> Result<(f64, f64, f64), SimError> {
    let i = dev.local_index(q).ok_or(SimError::QubitNotInModel(q))?;
    let u = dev.embed(&prerotation(axis), i);
    let diag: Vec<f64> = if has_noise(dev) {
        let rho0 = qutrit_density(&basis_state(dev, &vec![0; dev.num_qutrits()]));
        let rho = evolve_schedule_open(dev, sched, &rho0)?;
        let rot = u.dot(&rho).dot(&u.t().mapv(|v| v.conj()));
        (0..dev.dim()).map(|k| rot[[k, k]].re).collect()
    } else {
        let psi = evolve_schedule_pure(dev, sched, &basis_state(dev, &vec![0; dev.num_qutrits()]))?;
        u.dot(&psi).iter().map(|a| a.norm_sqr()).collect()
    };
    Ok(level_probs(&diag, dev.num_qutrits(), i))
}

fn axis_value(p0: f64, p1: f64) -> f64 {
    if p0 + p1 <= 0.0 {
        0.0
    } else {
        (p0 - p1) / (p0 + p1)
    }
}

/// Bloch vector of qubit `q` after the schedule, via three propagations
/// with measurement-basis pre-rotations. Expectations are exact.
pub fn tomography(dev: &DeviceModel, sched: &Schedule, q: usize) -> Result<BlochVector, SimError> {
    let (x0, x1, _) = measure_axis(dev, sched, q, Axis::X)?;
    let (y0, y1, _) = measure_axis(dev, sched, q, Axis::Y)?;
    let (z0, z1, p2) = measure_axis(dev, sched, q, Axis::Z)?;
    Ok(BlochVector {
        x: axis_value(x0, x1),
        y: axis_value(y0, y1),
        z: axis_value(z0, z1),
        p2,
    })
}

/// Tomography with binomial shot sampling: each axis measurement draws
/// `shots` outcomes from its excited-state probability.
pub fn tomography_sampled(
    dev: &DeviceModel,
    sched: &Schedule,
    q: usize,
    shots: u64,
    seed: u64,
) -> Result<BlochVector, SimError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sample = |axis: Axis| -> Result<(f64, f64), SimError> {
        let (p0, p1, p2) = measure_axis(dev, sched, q, axis)?;
        let p_excited = if p0 + p1 <= 0.0 { 0.0 } else { p1 / (p0 + p1) };
        let mut ones = 0u64;
        for _ in 0..shots {
            if rng.gen::<f64>() < p_excited {
                ones += 1;
            }
        }
        let frac = ones as f64 / shots as f64;
        Ok((1.0 - 2.0 * frac, p2))
    };
    let (x, _) = sample(Axis::X)?;
    let (y, _) = sample(Axis::Y)?;
    let (z, p2) = sample(Axis::Z)?;
    Ok(BlochVector { x, y, z, p2 })
}

/// The 41-point angle grid used by the published sweep: 0..180 degrees.
pub fn default_theta_grid() -> Vec<f64> {
    (0..41).map(|k| k as f64 * 4.5).collect()
}

#[derive(Debug, Clone, Copy)]
pub struct SweepPoint {
    pub theta_deg: f64,
    pub bloch: BlochVector,
}

fn sweep_with<F>(thetas: &[f64], build: F) -> Result<Vec<SweepPoint>, SimError>
where
    F: Fn(f64) -> Result<SweepPoint, SimError> + Sync + Send,
{
    par_map(thetas.to_vec(), |t| build(t))
        .into_iter()
        .collect()
}

/// Sweep DirectRx(theta) over the grid and record the Bloch vector after
/// each pulse.
pub fn sweep_direct_rx(
    backend: &BackendConfig,
    q: usize,
    thetas: &[f64],
) -> Result<Vec<SweepPoint>, SimError> {
    let dev = DeviceModel::single(backend, q)?;
    sweep_with(thetas, |theta_deg| {
        let sched = build_direct_rx(backend, q, theta_deg)?;
        let bloch = tomography(&dev, &sched, q)?;
        Ok(SweepPoint { theta_deg, bloch })
    })
}

/// Axis (phase) error of one sweep point: the angle by which the rotation
/// axis is tilted away from +X in the XY plane. None near the poles, where
/// the transverse component is too small to carry axis information.
pub fn phase_error_deg(p: &SweepPoint) -> Option<f64> {
    if p.theta_deg.to_radians().sin().abs() < 0.05 {
        return None;
    }
    Some(p.bloch.x.atan2(-p.bloch.y).to_degrees())
}

/// Fit the per-angle phase error and tabulate the virtual-Z correction
/// (its negation) against angle. Pole-adjacent points, where the measured
/// transverse component is dominated by rotation-angle residuals rather
/// than axis tilt, are filled in by linear extrapolation from the two
/// nearest resolved neighbors.
pub fn fit_phase_corrections(sweep: &[SweepPoint]) -> Result<PhaseCorrectionTable, SimError> {
    let raw: Vec<(f64, Option<f64>)> = sweep
        .iter()
        .map(|p| (p.theta_deg, phase_error_deg(p).map(|e| -e)))
        .collect();
    let known: Vec<(f64, f64)> = raw
        .iter()
        .filter_map(|&(t, c)| c.map(|c| (t, c)))
        .collect();
    if known.len() < 2 {
        return Err(SimError::Pulse(crate::pulse::PulseError::Validation {
            path: "/sweep".into(),
            msg: "too few resolvable sweep points to fit corrections".into(),
        }));
    }
    let entries: Vec<(f64, f64)> = raw
        .iter()
        .map(|&(t, c)| match c {
            Some(c) => (t, c),
            None => {
                let mut nearest: Vec<&(f64, f64)> = known.iter().collect();
                nearest.sort_by(|a, b| {
                    (a.0 - t).abs().partial_cmp(&(b.0 - t).abs()).unwrap()
                });
                let (t0, c0) = *nearest[0];
                let (t1, c1) = *nearest[1];
                (t, c0 + (c1 - c0) * (t - t0) / (t1 - t0))
            }
        })
        .collect();
    PhaseCorrectionTable::new(entries).map_err(SimError::Pulse)
}

/// Sweep with the correction table applied: each pulse is framed by the
/// virtual-Z pair that re-aligns its rotation axis with +X.
pub fn sweep_direct_rx_corrected(
    backend: &BackendConfig,
    q: usize,
    thetas: &[f64],
    table: &PhaseCorrectionTable,
) -> Result<Vec<SweepPoint>, SimError> {
    let dev = DeviceModel::single(backend, q)?;
    sweep_with(thetas, |theta_deg| {
        let c = table.correction_for(theta_deg);
        let mut sched = Schedule::new(format!("corrected rx({theta_deg})"));
        sched.add_schedule(0, &virtual_rz(q, -c)).map_err(SimError::Pulse)?;
        let pulse = build_direct_rx(backend, q, theta_deg)?;
        let end = pulse.duration();
        sched.add_schedule(0, &pulse).map_err(SimError::Pulse)?;
        sched.add_schedule(end, &virtual_rz(q, c)).map_err(SimError::Pulse)?;
        let bloch = tomography(&dev, &sched, q)?;
        Ok(SweepPoint { theta_deg, bloch })
    })
}

/// CSV rows for a sweep: `theta_deg,x,y,z,p2` with a fingerprint comment.
pub fn sweep_csv(rows: &[SweepPoint], fingerprint: u64, seed: u64) -> String {
    let mut out = format!("# model={fingerprint:016x} seed={seed}\ntheta_deg,x,y,z,p2\n");
    for p in rows {
        out.push_str(&format!(
            "{:.6},{:.9},{:.9},{:.9},{:.9}\n",
            p.theta_deg, p.bloch.x, p.bloch.y, p.bloch.z, p.bloch.p2
        ));
    }
    out
}

/// Target-qubit Bloch vectors after an echoed CR(theta), for the control
/// prepared in |0> and in |1>.
#[derive(Debug, Clone, Copy)]
pub struct CrTomographyPoint {
    pub theta_deg: f64,
    pub control0: BlochVector,
    pub control1: BlochVector,
}

/// Sweep the echoed CR angle and record the target trajectory for both
/// control states. The two rotate oppositely: (0, -sin, cos) against
/// (0, +sin, cos).
pub fn cr_tomography(
    backend: &BackendConfig,
    ctl: usize,
    tgt: usize,
    thetas: &[f64],
) -> Result<Vec<CrTomographyPoint>, SimError> {
    let dev = DeviceModel::pair(backend, ctl, tgt)?;
    let ti = dev.local_index(tgt).ok_or(SimError::QubitNotInModel(tgt))?;
    let run = |theta_deg: f64| -> Result<CrTomographyPoint, SimError> {
        let sched = build_cr_theta(backend, ctl, tgt, theta_deg)?;
        let mut blochs = [BlochVector { x: 0.0, y: 0.0, z: 1.0, p2: 0.0 }; 2];
        for (slot, ctl_level) in [(0usize, 0usize), (1, 1)] {
            let psi0 = basis_state(&dev, &[ctl_level, 0]);
            let psi = evolve_schedule_pure(&dev, &sched, &psi0)?;
            let rho_t = partial_trace_qutrit(&qutrit_density(&psi), 2, ti);
            blochs[slot] = crate::sim::evolve::bloch_of_density(&rho_t);
        }
        Ok(CrTomographyPoint {
            theta_deg,
            control0: blochs[0],
            control1: blochs[1],
        })
    };
    par_map(thetas.to_vec(), run).into_iter().collect()
}

/// Stable FNV-1a fingerprint of the backend the data was generated
/// against, stamped into CSV headers.
pub fn model_fingerprint(backend: &BackendConfig) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in backend.to_json().as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x1_0000_01b3);
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::rad;

    fn backend() -> BackendConfig {
        BackendConfig::almaden_mock()
    }

    #[test]
    fn identity_schedule_reads_plus_z() {
        let b = backend();
        let dev = DeviceModel::single(&b, 0).unwrap();
        let v = tomography(&dev, &Schedule::new("idle"), 0).unwrap();
        assert!(v.x.abs() < 1e-9 && v.y.abs() < 1e-9);
        assert!((v.z - 1.0).abs() < 1e-9);
    }

    #[test]
    fn direct_rx_90_lands_on_equator() {
        let b = backend();
        let dev = DeviceModel::single(&b, 0).unwrap();
        let sched = build_direct_rx(&b, 0, 90.0).unwrap();
        let v = tomography(&dev, &sched, 0).unwrap();
        assert!(v.z.abs() < 0.01, "z = {}", v.z);
        assert!((v.y + 1.0).abs() < 0.02, "y = {}", v.y);
    }

    #[test]
    fn direct_rx_67_matches_cosine() {
        let b = backend();
        let dev = DeviceModel::single(&b, 0).unwrap();
        let sched = build_direct_rx(&b, 0, 67.0).unwrap();
        let v = tomography(&dev, &sched, 0).unwrap();
        assert!((v.z - rad(67.0).cos()).abs() < 0.02, "z = {}", v.z);
    }

    #[test]
    fn tomography_agrees_with_density_bloch() {
        let b = backend();
        let mut dev = DeviceModel::single(&b, 0).unwrap();
        // noiseless so the pure-state path is exercised
        dev.t1_ns = vec![f64::INFINITY];
        dev.t2_ns = vec![f64::INFINITY];
        let sched = build_direct_rx(&b, 0, 67.0).unwrap();
        let v = tomography(&dev, &sched, 0).unwrap();
        let psi = evolve_schedule_pure(&dev, &sched, &basis_state(&dev, &[0])).unwrap();
        let w = crate::sim::evolve::bloch_of_state(&psi, 1, 0);
        assert!((v.x - w.x).abs() < 1e-12);
        assert!((v.y - w.y).abs() < 1e-12);
        assert!((v.z - w.z).abs() < 1e-12);
        assert!((v.p2 - w.p2).abs() < 1e-12);
    }

    #[test]
    fn sampled_tomography_converges_and_is_seeded() {
        let b = backend();
        let dev = DeviceModel::single(&b, 0).unwrap();
        let sched = build_direct_rx(&b, 0, 90.0).unwrap();
        let a = tomography_sampled(&dev, &sched, 0, 4096, 7).unwrap();
        let c = tomography_sampled(&dev, &sched, 0, 4096, 7).unwrap();
        assert_eq!((a.x, a.y, a.z), (c.x, c.y, c.z));
        let exact = tomography(&dev, &sched, 0).unwrap();
        assert!((a.y - exact.y).abs() < 0.06, "sampled y {}", a.y);
    }

    #[test]
    fn sweep_z_tracks_cosine_and_special_angles_have_no_dephasing() {
        let b = backend();
        let grid = default_theta_grid();
        assert_eq!(grid.len(), 41);
        let rows = sweep_direct_rx(&b, 0, &grid).unwrap();
        for p in &rows {
            assert!(
                (p.bloch.z - rad(p.theta_deg).cos()).abs() < 0.02,
                "z at {} = {}",
                p.theta_deg,
                p.bloch.z
            );
        }
        for target in [0.0, 90.0, 180.0] {
            let p = rows.iter().find(|p| p.theta_deg == target).unwrap();
            assert!(p.bloch.x.abs() < 1e-3, "x at {} = {}", target, p.bloch.x);
        }
    }

    #[test]
    fn small_angle_z_is_linear() {
        let b = backend();
        for theta in [2.0, 5.0, 8.0, 10.0] {
            let dev = DeviceModel::single(&b, 0).unwrap();
            let sched = build_direct_rx(&b, 0, theta).unwrap();
            let v = tomography(&dev, &sched, 0).unwrap();
            assert!(
                (v.z - rad(theta).cos()).abs() < 1e-3,
                "z at {theta} = {}",
                v.z
            );
        }
    }

    #[test]
    fn corrections_shrink_x_deviation() {
        let b = backend();
        let grid = default_theta_grid();
        let base = sweep_direct_rx(&b, 0, &grid).unwrap();
        let table = fit_phase_corrections(&base).unwrap();
        let corrected = sweep_direct_rx_corrected(&b, 0, &grid, &table).unwrap();
        let max_x = |rows: &[SweepPoint]| {
            rows.iter()
                .map(|p| p.bloch.x.abs())
                .fold(0.0f64, f64::max)
        };
        let before = max_x(&base);
        let after = max_x(&corrected);
        assert!(
            after * 5.0 <= before,
            "correction only improved {before} -> {after}"
        );
    }

    #[test]
    fn cr_trajectories_counter_rotate() {
        let b = backend();
        let thetas = [30.0, 60.0, 90.0, 120.0];
        let rows = cr_tomography(&b, 0, 1, &thetas).unwrap();
        for p in &rows {
            let (s, c) = rad(p.theta_deg).sin_cos();
            assert!((p.control0.y + s).abs() < 0.02, "y0 at {}", p.theta_deg);
            assert!((p.control0.z - c).abs() < 0.02, "z0 at {}", p.theta_deg);
            assert!((p.control1.y - s).abs() < 0.02, "y1 at {}", p.theta_deg);
            assert!((p.control1.z - c).abs() < 0.02, "z1 at {}", p.theta_deg);
            assert!(p.control0.x.abs() < 0.02 && p.control1.x.abs() < 0.02);
        }
    }

    #[test]
    fn sweep_csv_shape() {
        let b = backend();
        let rows = sweep_direct_rx(&b, 0, &[0.0, 90.0]).unwrap();
        let csv = sweep_csv(&rows, model_fingerprint(&b), 42);
        let mut lines = csv.lines();
        assert!(lines.next().unwrap().starts_with("# model="));
        assert_eq!(lines.next().unwrap(), "theta_deg,x,y,z,p2");
        assert_eq!(lines.count(), 2);
    }
}
