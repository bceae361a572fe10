//! Augmented basis construction.
//!
//! The vendor backend only calibrates `x`, `rx90`, and `cnot`. Everything
//! else the optimizing compiler emits is bootstrapped from those entries:
//!
//! - direct X / RX(theta): the calibrated X pulse, amplitude-scaled. One
//!   pulse instead of the two-pulse U3 realization.
//! - virtual RZ: a frame change, zero duration and error-free.
//! - CR(theta): the cross-resonance tone pulled out of the cnot cmd_def
//!   and stretched to the target angle by solving for the flat-top width
//!   while holding the riser shape fixed. Rotation angle is proportional
//!   to pulse area.
//! - qutrit subspace pulses: frequency-shifted tones addressing 1->2 and
//!   the two-photon 0->2 transition.

pub mod corrections;

pub use corrections::PhaseCorrectionTable;

use crate::math::{c, normalize_angle_deg, C64};
use crate::pulse::backend::BackendConfig;
use crate::pulse::envelope::{riser_sample_sum, Envelope};
use crate::pulse::schedule::{Channel, Schedule, ScheduleInstruction};
use crate::pulse::PulseError;

/// Gate angle realized by the unmodified cmd_def CR tone: each half of the
/// echoed CNOT rotates the target by 45 degrees.
pub const CMD_DEF_TONE_DEG: f64 = 45.0;

/// Calibrated X pulse envelope for one qubit.
pub fn x_pulse(backend: &BackendConfig, q: usize) -> Result<Envelope, PulseError> {
    single_play_envelope(backend, "x", q)
}

/// Calibrated RX(90) pulse envelope for one qubit.
pub fn rx90_pulse(backend: &BackendConfig, q: usize) -> Result<Envelope, PulseError> {
    single_play_envelope(backend, "rx90", q)
}

fn single_play_envelope(
    backend: &BackendConfig,
    name: &str,
    q: usize,
) -> Result<Envelope, PulseError> {
    let cd = backend.cmd_def(name, &[q])?;
    for ti in &cd.sequence {
        if let ScheduleInstruction::Play { envelope, .. } = &ti.instruction {
            return Ok(envelope.clone());
        }
    }
    Err(PulseError::Validation {
        path: format!("cmd_def {name} q{q}"),
        msg: "no play instruction".into(),
    })
}

/// Single-pulse X gate: the calibrated pi pulse on the drive channel.
pub fn build_direct_x(backend: &BackendConfig, q: usize) -> Result<Schedule, PulseError> {
    let env = x_pulse(backend, q)?;
    let mut s = Schedule::new(format!("direct_x q{q}"));
    s.add(
        0,
        ScheduleInstruction::Play {
            channel: Channel::Drive(q),
            envelope: env,
        },
    )?;
    Ok(s)
}

/// Single-pulse RX(theta): the X pulse scaled by theta/180. The angle is
/// folded into (-180, 180] first so the pulse never exceeds the calibrated
/// amplitude; angles within 1e-9 degrees of zero produce an empty schedule.
pub fn build_direct_rx(
    backend: &BackendConfig,
    q: usize,
    theta_deg: f64,
) -> Result<Schedule, PulseError> {
    let theta = normalize_angle_deg(theta_deg);
    let mut s = Schedule::new(format!("direct_rx({theta}) q{q}"));
    if theta.abs() < 1e-9 {
        return Ok(s);
    }
    let base = x_pulse(backend, q)?;
    let scale = theta / 180.0;
    let env = base.with_amp(base.amp() * c(scale, 0.0));
    s.add(
        0,
        ScheduleInstruction::Play {
            channel: Channel::Drive(q),
            envelope: env,
        },
    )?;
    Ok(s)
}

/// Virtual RZ(lambda): a frame change of -lambda on the drive channel.
/// With drive phase phi steering the rotation axis to angle +phi in the
/// XY plane, deferring RZ(lambda) means rotating every later axis by
/// -lambda, hence the sign flip.
pub fn virtual_rz(q: usize, lambda_deg: f64) -> Schedule {
    let mut s = Schedule::new(format!("rz({lambda_deg}) q{q}"));
    s.add(
        0,
        ScheduleInstruction::FrameChange {
            channel: Channel::Drive(q),
            phase_deg: -lambda_deg,
        },
    )
    .expect("frame change cannot overlap");
    s
}

/// Pieces of the echoed CR block recovered from a cnot cmd_def entry.
#[derive(Debug, Clone)]
pub struct CrTemplate {
    /// Positive half-tone (role cr_plus), a GaussianSquare.
    pub tone: Envelope,
    /// Echo pi pulse on the control drive channel.
    pub echo_x: Envelope,
    /// RX(90) pulse on the target drive channel.
    pub target_rot: Envelope,
    /// Frame change on the control channel that completes the CNOT.
    pub frame_fix_deg: f64,
    pub amp: C64,
    pub sigma: f64,
    pub width: usize,
    pub duration: usize,
}

impl CrTemplate {
    pub fn riser(&self) -> usize {
        (self.duration - self.width) / 2
    }

    /// Sample-sum of one tone at unit amplitude: flat top plus both risers.
    pub fn unit_area_samples(&self) -> f64 {
        self.width as f64 + 2.0 * riser_sample_sum(self.riser(), self.sigma)
    }
}

/// Pull the role-tagged tones and echo pulses out of the cnot cmd_def for
/// the directed pair (ctl, tgt).
pub fn extract_cr(
    backend: &BackendConfig,
    ctl: usize,
    tgt: usize,
) -> Result<CrTemplate, PulseError> {
    let cd = backend.cmd_def("cnot", &[ctl, tgt])?;
    let path = format!("cmd_def cnot ({ctl}, {tgt})");
    let find = |role: &str| -> Result<&ScheduleInstruction, PulseError> {
        cd.sequence
            .iter()
            .find(|ti| ti.role.as_deref() == Some(role))
            .map(|ti| &ti.instruction)
            .ok_or_else(|| PulseError::Validation {
                path: path.clone(),
                msg: format!("missing role tag `{role}`"),
            })
    };
    let play_env = |role: &str| -> Result<Envelope, PulseError> {
        match find(role)? {
            ScheduleInstruction::Play { envelope, .. } => Ok(envelope.clone()),
            _ => Err(PulseError::Validation {
                path: path.clone(),
                msg: format!("role `{role}` is not a play"),
            }),
        }
    };
    let tone = play_env("cr_plus")?;
    let minus = play_env("cr_minus")?;
    let echo_x = play_env("echo_x1")?;
    let target_rot = play_env("target_rot")?;
    let frame_fix_deg = match find("frame_fix")? {
        ScheduleInstruction::FrameChange { phase_deg, .. } => *phase_deg,
        _ => {
            return Err(PulseError::Validation {
                path,
                msg: "role `frame_fix` is not a frame change".into(),
            })
        }
    };
    let (amp, sigma, width, duration) = match &tone {
        Envelope::GaussianSquare {
            duration,
            amp,
            sigma,
            width,
        } => (*amp, *sigma, *width, *duration),
        other => {
            return Err(PulseError::Validation {
                path,
                msg: format!("cr_plus tone is not a GaussianSquare: {other:?}"),
            })
        }
    };
    if (minus.amp() + amp).norm() > 1e-9 {
        return Err(PulseError::Validation {
            path,
            msg: "cr_minus amplitude is not the negation of cr_plus".into(),
        });
    }
    Ok(CrTemplate {
        tone,
        echo_x,
        target_rot,
        frame_fix_deg,
        amp,
        sigma,
        width,
        duration,
    })
}

/// Stretch the calibrated CR tone to a target gate angle (degrees, sign
/// selects the drive sign). The flat-top width is solved from the area
/// rule `area(phi) = (phi / 45) * area(45)` with riser shape held fixed;
/// if the needed area is below the bare-riser area the flat top vanishes
/// and the amplitude is scaled down instead.
pub fn build_cr_tone(
    backend: &BackendConfig,
    ctl: usize,
    tgt: usize,
    phi_deg: f64,
) -> Result<Envelope, PulseError> {
    let template = extract_cr(backend, ctl, tgt)?;
    let phi = normalize_angle_deg(phi_deg);
    if phi.abs() < 1e-9 {
        return Err(PulseError::InvalidEnvelope(
            "zero-angle CR tone".to_string(),
        ));
    }
    let riser = template.riser();
    let riser_sum = 2.0 * riser_sample_sum(riser, template.sigma);
    let unit_area = template.unit_area_samples();
    let target_sum = phi.abs() / CMD_DEF_TONE_DEG * unit_area;
    let sign = if phi >= 0.0 { 1.0 } else { -1.0 };
    let flat = target_sum - riser_sum;
    if flat >= 0.5 {
        let width = flat.round() as usize;
        Ok(Envelope::GaussianSquare {
            duration: width + 2 * riser,
            amp: template.amp * c(sign, 0.0),
            sigma: template.sigma,
            width,
        })
    } else {
        // Riser-only pulse, amplitude-scaled to the target area.
        let scale = target_sum / riser_sum;
        Ok(Envelope::GaussianSquare {
            duration: 2 * riser,
            amp: template.amp * c(sign * scale, 0.0),
            sigma: template.sigma,
            width: 0,
        })
    }
}

/// Full echoed CR(theta) schedule:
/// X(ctl), tone(-theta/2), X(ctl), tone(+theta/2), which composes to
/// exp(-i (theta/2) Z(x)X) exactly while cancelling the always-on IX term.
pub fn build_cr_theta(
    backend: &BackendConfig,
    ctl: usize,
    tgt: usize,
    theta_deg: f64,
) -> Result<Schedule, PulseError> {
    let template = extract_cr(backend, ctl, tgt)?;
    let minus = build_cr_tone(backend, ctl, tgt, -theta_deg / 2.0)?;
    let plus = build_cr_tone(backend, ctl, tgt, theta_deg / 2.0)?;
    let dc = Channel::Drive(ctl);
    let u = Channel::Control(ctl, tgt);
    let mut s = Schedule::new(format!("cr({theta_deg}) q{ctl}, q{tgt}"));
    let echo = template.echo_x.clone();
    let p = echo.duration();
    let d1 = minus.duration();
    s.add_with_role(
        0,
        ScheduleInstruction::Play {
            channel: dc,
            envelope: echo.clone(),
        },
        Some("echo_x1".into()),
    )?;
    s.add_with_role(
        p,
        ScheduleInstruction::Play {
            channel: u,
            envelope: minus,
        },
        Some("cr_first".into()),
    )?;
    s.add_with_role(
        p + d1,
        ScheduleInstruction::Play {
            channel: dc,
            envelope: echo,
        },
        Some("echo_x2".into()),
    )?;
    s.add_with_role(
        2 * p + d1,
        ScheduleInstruction::Play {
            channel: u,
            envelope: plus,
        },
        Some("cr_second".into()),
    )?;
    Ok(s)
}

/// Three-level transitions addressable on one transmon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transition {
    /// Computational transition, resonant drive.
    Q01,
    /// 1 -> 2, sits `anharmonicity` below the drive frequency.
    Q12,
    /// Two-photon 0 -> 2 at half the total detuning.
    Q02,
}

impl Transition {
    pub fn parse(s: &str) -> Option<Transition> {
        match s {
            "01" | "q01" => Some(Transition::Q01),
            "12" | "q12" => Some(Transition::Q12),
            "02" | "q02" => Some(Transition::Q02),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Transition::Q01 => "01",
            Transition::Q12 => "12",
            Transition::Q02 => "02",
        }
    }
}

/// Default shapes for the subspace drives. Narrowband GaussianSquare
/// envelopes: the soft risers keep the square's spectral sidelobes from
/// reaching the neighbouring transition 300 MHz away.
pub fn subspace_shape(transition: Transition) -> (usize, usize, f64) {
    // (duration, width, sigma)
    match transition {
        Transition::Q01 => (160, 0, 40.0),
        Transition::Q12 => (240, 176, 8.0),
        // the 0->2 drive parks virtual population in |1>; the long risers
        // bring it back adiabatically instead of stranding it
        Transition::Q02 => (576, 320, 24.0),
    }
}

/// Pulse addressing one transition of qubit q. `amp` comes from Rabi
/// calibration; `detuning_ghz` is the frequency offset from the 0->1
/// drive (alpha for 1->2, alpha/2 plus a calibrated Stark correction for
/// the two-photon 0->2).
pub fn build_subspace_pulse(
    backend: &BackendConfig,
    q: usize,
    transition: Transition,
    amp: C64,
    detuning_ghz: f64,
) -> Result<Schedule, PulseError> {
    let shape = subspace_shape(transition);
    build_subspace_pulse_shaped(backend, q, transition, amp, detuning_ghz, shape)
}

/// Like [`build_subspace_pulse`] but with an explicit (duration, width,
/// sigma) shape, for Rabi sweeps that pin the duration across transitions.
/// Q01 keeps its Drag form and ignores `width`.
pub fn build_subspace_pulse_shaped(
    backend: &BackendConfig,
    q: usize,
    transition: Transition,
    amp: C64,
    detuning_ghz: f64,
    shape: (usize, usize, f64),
) -> Result<Schedule, PulseError> {
    let (duration, width, sigma) = shape;
    let mut s = Schedule::new(format!("{} pulse q{q}", transition.label()));
    let envelope = match transition {
        Transition::Q01 => match x_pulse(backend, q)?.with_amp(amp) {
            Envelope::Drag {
                duration: d0,
                beta,
                ..
            } if d0 != duration => Envelope::Drag {
                duration,
                amp,
                sigma,
                beta,
            },
            other => other,
        },
        Transition::Q12 | Transition::Q02 => Envelope::FreqShifted {
            base: Box::new(Envelope::GaussianSquare {
                duration,
                amp,
                sigma,
                width,
            }),
            delta_ghz: detuning_ghz,
        },
    };
    s.add(
        0,
        ScheduleInstruction::Play {
            channel: Channel::Drive(q),
            envelope,
        },
    )?;
    Ok(s)
}
