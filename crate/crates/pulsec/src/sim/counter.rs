//! Qutrit counter experiment: calibrate the three subspace pi pulses, chain
//! them into a 0 -> 1 -> 2 -> 0 cycle, and track how much population
//! survives in the ground state after each pass.

use ndarray::Array2;

use num_complex::Complex64 as C64;

use crate::basis::Transition;
use crate::pulse::{BackendConfig, Schedule};

use super::calibrate::{calibrate_transition, transition_guess, transition_schedule};
use super::device::DeviceModel;
use super::evolve::{basis_state, collapse_ops, qutrit_density, Propagator};
use super::tomography::model_fingerprint;
use super::SimError;

/// Transfer each calibrated hop must reach before the cycle is trusted.
const TRANSFER_FLOOR: f64 = 0.98;

/// One full counter cycle as a schedule: pi(0-1), then pi(1-2), then the
/// two-photon pi(0-2) that returns the population to the ground state.
pub fn counter_cycle(backend: &BackendConfig, q: usize) -> Result<Schedule, SimError> {
    let mut cycle = Schedule::new("counter_cycle");
    let mut t = 0;
    for transition in [Transition::Q01, Transition::Q12, Transition::Q02] {
        let (amp0, det0) = transition_guess(backend, q, transition);
        let cal = calibrate_transition(backend, q, transition, amp0.min(1.0), det0)?;
        if cal.transfer < TRANSFER_FLOOR {
            return Err(SimError::Calibration(format!(
                "counter needs a calibrated {} pulse on qubit {q} (best transfer {:.3})",
                transition.label(),
                cal.transfer
            )));
        }
        let pulse = transition_schedule(backend, q, transition, cal.amp, cal.detuning_ghz);
        cycle
            .add_schedule(t, &pulse)
            .map_err(|e| SimError::Calibration(e.to_string()))?;
        t += pulse.duration();
    }
    Ok(cycle)
}

/// Run the counter for `cycles` passes and report the ground-state
/// probability after each one, starting with the untouched state at cycle 0.
pub fn qutrit_counter(
    backend: &BackendConfig,
    q: usize,
    cycles: usize,
    noisy: bool,
) -> Result<Vec<(usize, f64)>, SimError> {
    let dev = DeviceModel::single(backend, q)?;
    let cycle = counter_cycle(backend, q)?;
    let prop = Propagator::new(&dev, &cycle)?;
    let mut rows = Vec::with_capacity(cycles + 1);
    rows.push((0, 1.0));
    if noisy {
        let collapse = collapse_ops(&dev);
        let mut rho: Array2<C64> = qutrit_density(&basis_state(&dev, &[0]));
        for c in 1..=cycles {
            rho = prop.evolve_open(&rho, &collapse)?;
            rows.push((c, rho[[0, 0]].re));
        }
    } else {
        let mut psi = basis_state(&dev, &[0]);
        for c in 1..=cycles {
            psi = prop.evolve_pure(&psi)?;
            rows.push((c, psi[0].norm_sqr()));
        }
    }
    Ok(rows)
}

/// CSV with the shared `# model=... seed=...` comment header. The counter
/// itself is deterministic; the seed is echoed for provenance only.
pub fn counter_csv(rows: &[(usize, f64)], fingerprint: u64, seed: u64) -> String {
    let mut out = format!("# model={fingerprint:016x} seed={seed}\ncycle,p0\n");
    for (cycle, p0) in rows {
        out.push_str(&format!("{cycle},{p0:.12}\n"));
    }
    out
}

/// Model hash for the CSV header.
pub fn counter_fingerprint(backend: &BackendConfig) -> u64 {
    model_fingerprint(backend)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn backend() -> BackendConfig {
        BackendConfig::almaden_mock()
    }

    #[test]
    fn zero_cycles_reports_unity() {
        let rows = qutrit_counter(&backend(), 0, 0, false).unwrap();
        assert_eq!(rows, vec![(0, 1.0)]);
    }

    #[test]
    fn cycle_visits_every_level() {
        let b = backend();
        let dev = DeviceModel::single(&b, 0).unwrap();
        let cycle = counter_cycle(&b, 0).unwrap();
        let prop = Propagator::new(&dev, &cycle).unwrap();
        let hops = cycle.instructions().len();
        assert!(hops >= 3, "expected three pulses, got {hops}");

        let psi1 = prop.evolve_pure(&basis_state(&dev, &[0])).unwrap();
        assert!(psi1[0].norm_sqr() > 0.99, "cycle should return to ground");
        let from1 = prop.evolve_pure(&basis_state(&dev, &[1])).unwrap();
        assert!(
            from1[0].norm_sqr() < 0.5,
            "a state starting in |1> must not end grounded: {:.3}",
            from1[0].norm_sqr()
        );
    }

    #[test]
    fn noiseless_ten_cycles_stay_grounded() {
        let rows = qutrit_counter(&backend(), 0, 10, false).unwrap();
        assert_eq!(rows.len(), 11);
        for &(c, p0) in &rows {
            assert!(p0 >= 0.99, "cycle {c} ground population {p0:.5}");
        }
    }

    #[test]
    fn noisy_counter_decays_monotonically() {
        let rows = qutrit_counter(&backend(), 0, 10, true).unwrap();
        for w in rows.windows(2) {
            assert!(
                w[1].1 <= w[0].1 + 1e-3,
                "p0 rose from {:.6} to {:.6} at cycle {}",
                w[0].1,
                w[1].1,
                w[1].0
            );
        }
        let last = rows.last().unwrap().1;
        assert!(
            last < 0.99 && last > 0.8,
            "ten noisy cycles should visibly dent p0, got {last:.5}"
        );
    }

    #[test]
    fn counter_without_coupling_reports_uncalibrated() {
        let mut b = backend();
        b.rabi_ghz[0] = 1e-6;
        let err = qutrit_counter(&b, 0, 1, false).unwrap_err();
        let msg = err.to_string();
        assert!(
            msg.contains("calibrat") || msg.contains("no oscillation"),
            "unexpected error: {msg}"
        );
    }

    #[test]
    fn csv_has_header_and_rows() {
        let b = backend();
        let rows = qutrit_counter(&b, 0, 3, false).unwrap();
        let csv = counter_csv(&rows, counter_fingerprint(&b), 7);
        let mut lines = csv.lines();
        let head = lines.next().unwrap();
        assert!(head.starts_with("# model=") && head.ends_with("seed=7"));
        assert_eq!(lines.next().unwrap(), "cycle,p0");
        assert_eq!(csv.lines().count(), 6);
        assert!(csv.lines().nth(2).unwrap().starts_with("0,1.000000000000"));
    }
}
