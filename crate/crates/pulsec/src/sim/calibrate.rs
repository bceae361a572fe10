//! Pulse calibration against the simulator: single-qubit rotation
//! amplitudes, the derivative-quadrature weight, and the level-transition
//! pulses used by the three-level demos.

use ndarray::Array1;
use num_complex::Complex64 as C64;

use crate::basis::{subspace_shape, Transition};
use crate::pulse::backend::{MOCK_PULSE_DURATION, MOCK_PULSE_SIGMA};
use crate::pulse::{BackendConfig, Channel, Envelope, Schedule, ScheduleInstruction};
use crate::sim::device::DeviceModel;
use crate::sim::evolve::{basis_state, bloch_of_state, evolve_schedule_pure};
use crate::sim::SimError;

use crate::math::golden_min;

/// Bisection root of a monotone-through-zero function on [lo, hi].
fn bisect_root(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, iters: usize) -> Option<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Some(lo);
    }
    if flo * fhi > 0.0 {
        return None;
    }
    for _ in 0..iters {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if flo * fm <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    Some(0.5 * (lo + hi))
}

fn drag_schedule(q: usize, amp: f64, beta: f64) -> Schedule {
    let mut s = Schedule::new("cal");
    s.add(
        0,
        ScheduleInstruction::Play {
            channel: Channel::Drive(q),
            envelope: Envelope::Drag {
                duration: MOCK_PULSE_DURATION,
                amp: C64::new(amp, 0.0),
                sigma: MOCK_PULSE_SIGMA,
                beta,
            },
        },
    )
    .expect("empty schedule accepts pulse");
    s
}

fn run_drag(dev: &DeviceModel, q: usize, amp: f64, beta: f64) -> Array1<C64> {
    let sched = drag_schedule(q, amp, beta);
    evolve_schedule_pure(dev, &sched, &basis_state(dev, &[0])).expect("calibration evolution")
}

/// Calibrated single-qubit pulse parameters for one qubit.
#[derive(Debug, Clone, Copy)]
pub struct SingleQubitCalibration {
    pub x_amp: f64,
    pub rx90_amp: f64,
    pub drag_beta: f64,
    /// Residual ground population after the calibrated pi pulse.
    pub x_residual: f64,
    /// Residual Bloch x after the calibrated half-pi pulse.
    pub rx90_phase_residual: f64,
}

/// Tune the pi and half-pi amplitudes and the derivative weight. The
/// half-pi amplitude zeroes the z component after one pulse; the
/// derivative weight then zeroes the axis (phase) error at 90 degrees; the
/// two are iterated since they interact weakly.
pub fn calibrate_single_qubit(
    backend: &BackendConfig,
    q: usize,
) -> Result<SingleQubitCalibration, SimError> {
    let dev = DeviceModel::single(backend, q)?;

    let guess90 = crate::pulse::backend::MOCK_RX90_AMP;
    let mut beta = crate::pulse::backend::MOCK_DRAG_BETA;
    let mut amp90 = guess90;
    for _ in 0..3 {
        let b = beta;
        amp90 = bisect_root(
            |a| bloch_of_state(&run_drag(&dev, q, a, b), 1, 0).z,
            0.7 * guess90,
            1.3 * guess90,
            60,
        )
        .ok_or_else(|| SimError::Calibration("half-pi amplitude did not bracket".into()))?;
        let a90 = amp90;
        beta = bisect_root(
            |bb| bloch_of_state(&run_drag(&dev, q, a90, bb), 1, 0).x,
            -1.0,
            6.0,
            60,
        )
        .ok_or_else(|| SimError::Calibration("derivative weight did not bracket".into()))?;
    }

    let bx = beta;
    let guess_x = crate::pulse::backend::MOCK_X_AMP;
    let x_amp = golden_min(
        |a| run_drag(&dev, q, a, bx)[0].norm_sqr(),
        0.8 * guess_x,
        1.2 * guess_x,
        80,
    );

    let x_residual = run_drag(&dev, q, x_amp, beta)[0].norm_sqr();
    let rx90_phase_residual = bloch_of_state(&run_drag(&dev, q, amp90, beta), 1, 0).x;
    Ok(SingleQubitCalibration {
        x_amp,
        rx90_amp: amp90,
        drag_beta: beta,
        x_residual,
        rx90_phase_residual,
    })
}

/// Calibrated transition pulse: amplitude and detuning for a pi transfer.
#[derive(Debug, Clone, Copy)]
pub struct TransitionCalibration {
    pub transition: Transition,
    pub amp: f64,
    pub detuning_ghz: f64,
    /// Transfer probability achieved at the calibrated point.
    pub transfer: f64,
}

/// Schedule holding the calibrated pi pulse of one transition.
pub fn transition_schedule(
    backend: &BackendConfig,
    q: usize,
    transition: Transition,
    amp: f64,
    detuning_ghz: f64,
) -> Schedule {
    crate::basis::build_subspace_pulse(backend, q, transition, C64::new(amp, 0.0), detuning_ghz)
        .expect("subspace pulse construction")
}

fn transfer_probability(
    dev: &DeviceModel,
    backend: &BackendConfig,
    q: usize,
    transition: Transition,
    amp: f64,
    detuning_ghz: f64,
) -> f64 {
    transfer_shaped(
        dev,
        backend,
        q,
        transition,
        amp,
        detuning_ghz,
        subspace_shape(transition),
    )
}

fn transfer_shaped(
    dev: &DeviceModel,
    backend: &BackendConfig,
    q: usize,
    transition: Transition,
    amp: f64,
    detuning_ghz: f64,
    shape: (usize, usize, f64),
) -> f64 {
    let (from, to) = match transition {
        Transition::Q01 => (0usize, 1usize),
        Transition::Q12 => (1, 2),
        Transition::Q02 => (0, 2),
    };
    // Out-of-range amplitudes are just worthless search points, not a
    // reason to abort a sweep; score them as zero transfer.
    let Ok(sched) = crate::basis::build_subspace_pulse_shaped(
        backend,
        q,
        transition,
        C64::new(amp, 0.0),
        detuning_ghz,
        shape,
    ) else {
        return 0.0;
    };
    let psi = evolve_schedule_pure(dev, &sched, &basis_state(dev, &[from]))
        .expect("calibration evolution");
    psi[to].norm_sqr()
}

/// Coordinate descent on (amplitude, detuning) maximizing the transfer
/// probability of a pi pulse on the given transition.
pub fn calibrate_transition(
    backend: &BackendConfig,
    q: usize,
    transition: Transition,
    amp_guess: f64,
    detuning_guess_ghz: f64,
) -> Result<TransitionCalibration, SimError> {
    let dev = DeviceModel::single(backend, q)?;
    let mut amp = amp_guess;
    let mut det = detuning_guess_ghz;
    let mut amp_window = 0.5 * amp_guess.abs().max(0.05);
    let mut det_window = 0.02;
    for _ in 0..6 {
        let d = det;
        amp = golden_min(
            |a| 1.0 - transfer_probability(&dev, backend, q, transition, a, d),
            amp - amp_window,
            amp + amp_window,
            40,
        );
        let a = amp;
        det = golden_min(
            |dd| 1.0 - transfer_probability(&dev, backend, q, transition, a, dd),
            det - det_window,
            det + det_window,
            40,
        );
        amp_window *= 0.35;
        det_window *= 0.35;
    }
    let transfer = transfer_probability(&dev, backend, q, transition, amp, det);
    Ok(TransitionCalibration {
        transition,
        amp,
        detuning_ghz: det,
        transfer,
    })
}

/// Default starting points for the transition calibrations: the 1-2 drive
/// sits at the anharmonicity, the 0-2 two-photon drive at half of it. The
/// amplitude guesses come from the pulse areas and matrix elements.
pub fn transition_guess(backend: &BackendConfig, q: usize, transition: Transition) -> (f64, f64) {
    transition_guess_shaped(backend, q, transition, subspace_shape(transition))
}

fn transition_guess_shaped(
    backend: &BackendConfig,
    q: usize,
    transition: Transition,
    shape: (usize, usize, f64),
) -> (f64, f64) {
    let alpha = backend.anharmonicity_ghz[q];
    let g = backend.rabi_ghz[q];
    let (duration, width, sigma) = shape;
    let riser = crate::pulse::envelope::riser_sample_sum((duration - width) / 2, sigma);
    let area_ns = (width as f64 + 2.0 * riser) * backend.dt_ns;
    match transition {
        Transition::Q01 => (1.0 / (2.0 * g * area_ns), 0.0),
        // sqrt(2) matrix element on the 1-2 leg
        Transition::Q12 => (1.0 / (2.0 * g * std::f64::consts::SQRT_2 * area_ns), alpha),
        // two-photon rate ~ sqrt(2) (g amp)^2 / (2 |alpha| / 2); solve for amp
        Transition::Q02 => {
            let rate_needed = 1.0 / (2.0 * area_ns);
            let amp = (rate_needed * alpha.abs() / (std::f64::consts::SQRT_2 * g * g)).sqrt();
            (amp, alpha / 2.0)
        }
    }
}

/// Pulse shape used by [`rabi_calibrate`]. Default is the transition's
/// stock shape; an explicit duration pins the length so different
/// transitions can be compared head to head.
fn rabi_shape(transition: Transition, duration: Option<usize>) -> (usize, usize, f64) {
    match duration {
        None => subspace_shape(transition),
        Some(d) => match transition {
            Transition::Q01 => (d, 0, d as f64 / 4.0),
            Transition::Q12 | Transition::Q02 => (d, d.saturating_sub(64), 8.0),
        },
    }
}

/// Result of a Rabi amplitude sweep on one transition.
#[derive(Debug, Clone)]
pub struct RabiCalibration {
    pub transition: Transition,
    /// Amplitude of the first transfer maximum.
    pub amp: f64,
    /// Drive detuning used, GHz.
    pub detuning_ghz: f64,
    /// Transfer probability at the returned amplitude.
    pub transfer: f64,
    /// Raw (amplitude, transfer) curve from the sweep.
    pub sweep: Vec<(f64, f64)>,
}

/// Rabi calibration: sweep the drive amplitude at a fixed pulse shape, find
/// the first maximum of the resulting population oscillation, and refine it.
/// Resonant drives keep their analytic detuning; the two-photon drive gets a
/// frequency polish afterwards because its Stark shift rides on amplitude.
pub fn rabi_calibrate(
    backend: &BackendConfig,
    q: usize,
    transition: Transition,
    duration: Option<usize>,
) -> Result<RabiCalibration, SimError> {
    let shape = rabi_shape(transition, duration);
    let (amp_guess, mut det) = transition_guess_shaped(backend, q, transition, shape);
    let dev = DeviceModel::single(backend, q)?;
    let top = (2.2 * amp_guess).min(1.0).max(1e-3);

    let n = 61;
    let sweep: Vec<(f64, f64)> = (1..=n)
        .map(|i| {
            let a = top * i as f64 / n as f64;
            let p = transfer_shaped(&dev, backend, q, transition, a, det, shape);
            (a, p)
        })
        .collect();
    let peak = sweep.iter().map(|p| p.1).fold(0.0, f64::max);
    if peak < 0.5 {
        return Err(SimError::Calibration(format!(
            "no oscillation detected on the {} drive of qubit {q} (peak transfer {peak:.3})",
            transition.label()
        )));
    }

    // first local maximum comparable to the best one; later maxima are the
    // 3pi, 5pi, ... rotations
    let mut idx = sweep.len() - 1;
    for i in 0..sweep.len() {
        let left = if i == 0 { 0.0 } else { sweep[i - 1].1 };
        let right = if i + 1 < sweep.len() { sweep[i + 1].1 } else { 0.0 };
        if sweep[i].1 >= left && sweep[i].1 >= right && sweep[i].1 >= 0.8 * peak {
            idx = i;
            break;
        }
    }
    let lo = if idx == 0 { 0.0 } else { sweep[idx - 1].0 };
    let hi = sweep[(idx + 1).min(sweep.len() - 1)].0;
    let mut amp = golden_min(
        |a| 1.0 - transfer_shaped(&dev, backend, q, transition, a, det, shape),
        lo,
        hi,
        60,
    );
    if matches!(transition, Transition::Q12 | Transition::Q02) {
        det = golden_min(
            |d| 1.0 - transfer_shaped(&dev, backend, q, transition, amp, d, shape),
            det - 0.004,
            det + 0.004,
            40,
        );
        amp = golden_min(
            |a| 1.0 - transfer_shaped(&dev, backend, q, transition, a, det, shape),
            0.92 * amp,
            1.08 * amp,
            40,
        );
    }
    let transfer = transfer_shaped(&dev, backend, q, transition, amp, det, shape);
    Ok(RabiCalibration {
        transition,
        amp,
        detuning_ghz: det,
        transfer,
        sweep,
    })
}
