//! Backend calibration data: device topology, frequencies, coherence
//! times, drive strengths, and the vendor pulse library (cmd_def).
//!
//! `almaden_mock()` builds a five-qubit line with one calibrated X and
//! RX(90) pulse per qubit and an echoed cross-resonance CNOT per directed
//! coupler, matching the layout this compiler bootstraps its augmented
//! basis from.

use super::envelope::Envelope;
use super::schedule::{Channel, ScheduleInstruction, TimedInstruction};
use super::PulseError;
use crate::math::c;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

/// One calibrated gate: name, qubit list, and its pulse sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CmdDef {
    pub name: String,
    pub qubits: Vec<usize>,
    pub sequence: Vec<TimedInstruction>,
}

impl CmdDef {
    pub fn duration(&self) -> usize {
        self.sequence
            .iter()
            .map(|ti| ti.t0 + ti.instruction.duration())
            .max()
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendConfig {
    pub name: String,
    pub dt_ns: f64,
    pub num_qubits: usize,
    /// Undirected couplers; cmd_def carries a cnot entry for each direction.
    pub coupling: Vec<[usize; 2]>,
    pub qubit_freq_ghz: Vec<f64>,
    pub anharmonicity_ghz: Vec<f64>,
    pub t1_us: Vec<f64>,
    pub t2_us: Vec<f64>,
    /// Qubit-frame Rabi rate per unit drive amplitude, GHz.
    pub rabi_ghz: Vec<f64>,
    /// AM-PM skew of each drive line: phase picked up per unit drive
    /// power (radians per amplitude squared). Third-order amplifier
    /// nonlinearity tilts the drive axis in proportion to instantaneous
    /// pulse power; this is the dominant source of the sinusoidal
    /// dephasing seen in scaled-rotation sweeps.
    #[serde(default)]
    pub amp_skew_rad: Vec<f64>,
    /// Static phase of each drive line, radians. Calibrated so the total
    /// axis tilt vanishes at the rx90 working amplitude.
    #[serde(default)]
    pub drive_phase_rad: Vec<f64>,
    pub cmd_def: Vec<CmdDef>,
}

/// Calibrated one-qubit pulse parameters for the mock backend. The
/// amplitudes are tuned against the bundled three-level simulator so the
/// X pulse moves |0> to |1> with 99.9%+ population and the DRAG beta
/// cancels the phase error of the 90-degree rotation.
pub const MOCK_PULSE_DURATION: usize = 160;
pub const MOCK_PULSE_SIGMA: f64 = 40.0;
pub const MOCK_X_AMP: f64 = 0.268_228_329;
pub const MOCK_RX90_AMP: f64 = 0.134_051_306;
pub const MOCK_DRAG_BETA: f64 = 1.205_800_974;
pub const MOCK_CR_AMP: f64 = 0.3;
pub const MOCK_CR_DURATION: usize = 512;
pub const MOCK_CR_WIDTH: usize = 384;
pub const MOCK_CR_SIGMA: f64 = 32.0;
pub const MOCK_RABI_GHZ: f64 = 0.099;
pub const MOCK_AMP_SKEW_RAD: f64 = 0.23;
pub const MOCK_DRIVE_PHASE_RAD: f64 = -0.002_675_172_545;
/// CR tone phase: compensates the control line's distortion at the tone's
/// working amplitude, plus a balance offset splitting the residual
/// target Stark tilt evenly between the two control branches (the strong
/// and weak tone halves swap order between them, so their tilts differ).
pub const MOCK_CR_PHASE_RAD: f64 =
    -(MOCK_DRIVE_PHASE_RAD + MOCK_AMP_SKEW_RAD * MOCK_CR_AMP * MOCK_CR_AMP) + 0.0067;

impl BackendConfig {
    pub fn from_json(s: &str) -> Result<Self, PulseError> {
        let cfg: BackendConfig =
            serde_json::from_str(s).map_err(|e| PulseError::Json(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("backend config serializes")
    }

    pub fn coupled(&self, a: usize, b: usize) -> bool {
        self.coupling
            .iter()
            .any(|&[x, y]| (x == a && y == b) || (x == b && y == a))
    }

    pub fn neighbors(&self, q: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .coupling
            .iter()
            .filter_map(|&[x, y]| {
                if x == q {
                    Some(y)
                } else if y == q {
                    Some(x)
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out
    }

    pub fn cmd_def(&self, name: &str, qubits: &[usize]) -> Result<&CmdDef, PulseError> {
        self.cmd_def
            .iter()
            .find(|cd| cd.name == name && cd.qubits == qubits)
            .ok_or_else(|| PulseError::UnknownCmdDef {
                name: name.to_string(),
                qubits: qubits.to_vec(),
            })
    }

    pub fn validate(&self) -> Result<(), PulseError> {
        let err = |path: &str, msg: String| {
            Err(PulseError::Validation {
                path: path.to_string(),
                msg,
            })
        };
        if self.dt_ns <= 0.0 {
            return err("/dt_ns", format!("must be positive, got {}", self.dt_ns));
        }
        if self.num_qubits == 0 {
            return err("/num_qubits", "must be positive".into());
        }
        for (field, len) in [
            ("qubit_freq_ghz", self.qubit_freq_ghz.len()),
            ("anharmonicity_ghz", self.anharmonicity_ghz.len()),
            ("t1_us", self.t1_us.len()),
            ("t2_us", self.t2_us.len()),
            ("rabi_ghz", self.rabi_ghz.len()),
        ] {
            if len != self.num_qubits {
                return err(
                    &format!("/{field}"),
                    format!("expected {} entries, got {len}", self.num_qubits),
                );
            }
        }
        // optional fields: absent means ideal drive lines
        for (field, len) in [
            ("amp_skew_rad", self.amp_skew_rad.len()),
            ("drive_phase_rad", self.drive_phase_rad.len()),
        ] {
            if len != 0 && len != self.num_qubits {
                return err(
                    &format!("/{field}"),
                    format!("expected 0 or {} entries, got {len}", self.num_qubits),
                );
            }
        }
        for (q, f) in self.qubit_freq_ghz.iter().enumerate() {
            if *f <= 0.0 {
                return err(&format!("/qubit_freq_ghz/{q}"), "must be positive".into());
            }
        }
        for (q, a) in self.anharmonicity_ghz.iter().enumerate() {
            if *a >= 0.0 {
                return err(
                    &format!("/anharmonicity_ghz/{q}"),
                    "transmon anharmonicity must be negative".into(),
                );
            }
        }
        for q in 0..self.num_qubits {
            if self.t1_us[q] <= 0.0 {
                return err(&format!("/t1_us/{q}"), "must be positive".into());
            }
            if self.t2_us[q] <= 0.0 || self.t2_us[q] > 2.0 * self.t1_us[q] {
                return err(
                    &format!("/t2_us/{q}"),
                    format!(
                        "must lie in (0, 2*t1] = (0, {}], got {}",
                        2.0 * self.t1_us[q],
                        self.t2_us[q]
                    ),
                );
            }
            if self.rabi_ghz[q] <= 0.0 {
                return err(&format!("/rabi_ghz/{q}"), "must be positive".into());
            }
        }
        for (i, pair) in self.coupling.iter().enumerate() {
            if pair[0] == pair[1] {
                return err(&format!("/coupling/{i}"), "self-coupling".into());
            }
            for (j, &q) in pair.iter().enumerate() {
                if q >= self.num_qubits {
                    return err(
                        &format!("/coupling/{i}/{j}"),
                        format!("qubit {q} out of range"),
                    );
                }
            }
        }
        for (i, cd) in self.cmd_def.iter().enumerate() {
            let base = format!("/cmd_def/{i}");
            for &q in &cd.qubits {
                if q >= self.num_qubits {
                    return err(&base, format!("qubit {q} out of range"));
                }
            }
            if cd.sequence.is_empty() {
                return err(&format!("{base}/sequence"), "empty sequence".into());
            }
            for (j, ti) in cd.sequence.iter().enumerate() {
                let ipath = format!("{base}/sequence/{j}");
                let ch = ti.instruction.channel();
                match ch {
                    Channel::Drive(q) => {
                        if q >= self.num_qubits {
                            return err(&ipath, format!("channel {ch} out of range"));
                        }
                        if !cd.qubits.contains(&q) {
                            return err(
                                &ipath,
                                format!("channel {ch} not among gate qubits {:?}", cd.qubits),
                            );
                        }
                    }
                    Channel::Control(a, b) => {
                        if !self.coupled(a, b) {
                            return err(&ipath, format!("channel {ch} has no coupler"));
                        }
                        if !(cd.qubits.contains(&a) && cd.qubits.contains(&b)) {
                            return err(
                                &ipath,
                                format!("channel {ch} not among gate qubits {:?}", cd.qubits),
                            );
                        }
                    }
                }
                if let ScheduleInstruction::Play { envelope, .. } = &ti.instruction {
                    if let Err(e) = envelope.validate() {
                        return err(&format!("{ipath}/envelope"), e.to_string());
                    }
                }
            }
        }
        Ok(())
    }

    /// Five fixed-frequency transmons on a line, styled after a 20-qubit
    /// production device's corner. Deterministic and fully calibrated
    /// against the bundled simulator.
    pub fn almaden_mock() -> BackendConfig {
        let n = 5;
        let x_pulse = |q: usize, amp: f64| TimedInstruction {
            t0: 0,
            instruction: ScheduleInstruction::Play {
                channel: Channel::Drive(q),
                envelope: Envelope::Drag {
                    duration: MOCK_PULSE_DURATION,
                    amp: c(amp, 0.0),
                    sigma: MOCK_PULSE_SIGMA,
                    beta: MOCK_DRAG_BETA,
                },
            },
            role: None,
        };
        let mut cmd_def = Vec::new();
        for q in 0..n {
            cmd_def.push(CmdDef {
                name: "x".into(),
                qubits: vec![q],
                sequence: vec![x_pulse(q, MOCK_X_AMP)],
            });
            cmd_def.push(CmdDef {
                name: "rx90".into(),
                qubits: vec![q],
                sequence: vec![x_pulse(q, MOCK_RX90_AMP)],
            });
        }
        let coupling: Vec<[usize; 2]> = vec![[0, 1], [1, 2], [2, 3], [3, 4]];
        for &[a, b] in &coupling {
            for (ctl, tgt) in [(a, b), (b, a)] {
                cmd_def.push(cnot_cmd_def(ctl, tgt));
            }
        }
        BackendConfig {
            name: "almaden_mock".into(),
            dt_ns: 0.22,
            num_qubits: n,
            coupling,
            qubit_freq_ghz: vec![5.0, 4.93, 5.07, 4.86, 5.12],
            anharmonicity_ghz: vec![-0.3; n],
            t1_us: vec![94.0; n],
            t2_us: vec![88.0; n],
            rabi_ghz: vec![MOCK_RABI_GHZ; n],
            amp_skew_rad: vec![MOCK_AMP_SKEW_RAD; n],
            drive_phase_rad: vec![MOCK_DRIVE_PHASE_RAD; n],
            cmd_def,
        }
    }
}

/// Echoed cross-resonance CNOT: a 90-degree target rotation in parallel
/// with the first echo X, two CR half-tones of opposite sign split by the
/// second echo X, and a trailing frame change realizing the virtual
/// RZ(90) on the control.
fn cnot_cmd_def(ctl: usize, tgt: usize) -> CmdDef {
    let p = MOCK_PULSE_DURATION;
    let w = MOCK_CR_DURATION;
    let drag = |amp: f64| Envelope::Drag {
        duration: p,
        amp: c(amp, 0.0),
        sigma: MOCK_PULSE_SIGMA,
        beta: MOCK_DRAG_BETA,
    };
    let tone = |sign: f64| Envelope::GaussianSquare {
        duration: w,
        amp: C64::from_polar(MOCK_CR_AMP, MOCK_CR_PHASE_RAD) * c(sign, 0.0),
        sigma: MOCK_CR_SIGMA,
        width: MOCK_CR_WIDTH,
    };
    let play = |t0: usize, channel: Channel, envelope: Envelope, role: &str| TimedInstruction {
        t0,
        instruction: ScheduleInstruction::Play { channel, envelope },
        role: Some(role.to_string()),
    };
    let dc = Channel::Drive(ctl);
    let dt_ch = Channel::Drive(tgt);
    let u = Channel::Control(ctl, tgt);
    CmdDef {
        name: "cnot".into(),
        qubits: vec![ctl, tgt],
        sequence: vec![
            play(0, dt_ch, drag(MOCK_RX90_AMP), "target_rot"),
            play(0, dc, drag(MOCK_X_AMP), "echo_x1"),
            play(p, u, tone(1.0), "cr_plus"),
            play(p + w, dc, drag(MOCK_X_AMP), "echo_x2"),
            play(2 * p + w, u, tone(-1.0), "cr_minus"),
            TimedInstruction {
                t0: 2 * p + 2 * w,
                instruction: ScheduleInstruction::FrameChange {
                    channel: dc,
                    phase_deg: -90.0,
                },
                role: Some("frame_fix".to_string()),
            },
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mock_backend_is_valid() {
        let b = BackendConfig::almaden_mock();
        b.validate().unwrap();
        assert_eq!(b.num_qubits, 5);
        assert_eq!(b.cmd_def.len(), 5 * 2 + 4 * 2);
    }

    #[test]
    fn mock_cnot_timing() {
        let b = BackendConfig::almaden_mock();
        let cd = b.cmd_def("cnot", &[0, 1]).unwrap();
        assert_eq!(cd.duration(), 1344);
        let roles: Vec<&str> = cd
            .sequence
            .iter()
            .map(|ti| ti.role.as_deref().unwrap())
            .collect();
        assert_eq!(
            roles,
            ["target_rot", "echo_x1", "cr_plus", "echo_x2", "cr_minus", "frame_fix"]
        );
        // Both directions exist.
        assert!(b.cmd_def("cnot", &[1, 0]).is_ok());
        assert!(b.cmd_def("cnot", &[0, 2]).is_err());
        // One-qubit cmd_defs.
        assert_eq!(b.cmd_def("x", &[3]).unwrap().duration(), 160);
        assert_eq!(b.cmd_def("rx90", &[3]).unwrap().duration(), 160);
    }

    #[test]
    fn json_roundtrip() {
        let b = BackendConfig::almaden_mock();
        let j = b.to_json();
        let back = BackendConfig::from_json(&j).unwrap();
        assert_eq!(b, back);
    }

    #[test]
    fn validation_reports_paths() {
        let mut b = BackendConfig::almaden_mock();
        b.t2_us[2] = 500.0;
        match b.validate() {
            Err(PulseError::Validation { path, .. }) => assert_eq!(path, "/t2_us/2"),
            other => panic!("expected validation error, got {other:?}"),
        }
        let mut b = BackendConfig::almaden_mock();
        b.qubit_freq_ghz.pop();
        match b.validate() {
            Err(PulseError::Validation { path, .. }) => assert_eq!(path, "/qubit_freq_ghz"),
            other => panic!("expected validation error, got {other:?}"),
        }
        let mut b = BackendConfig::almaden_mock();
        b.coupling[0] = [0, 0];
        match b.validate() {
            Err(PulseError::Validation { path, .. }) => assert_eq!(path, "/coupling/0"),
            other => panic!("expected validation error, got {other:?}"),
        }
        let mut b = BackendConfig::almaden_mock();
        if let ScheduleInstruction::Play { envelope, .. } =
            &mut b.cmd_def[0].sequence[0].instruction
        {
            *envelope = envelope.with_amp(c(1.5, 0.0));
        }
        match b.validate() {
            Err(PulseError::Validation { path, msg }) => {
                assert_eq!(path, "/cmd_def/0/sequence/0/envelope");
                assert!(msg.contains("exceeds 1"));
            }
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn anharmonicity_must_be_negative() {
        let mut b = BackendConfig::almaden_mock();
        b.anharmonicity_ghz[0] = 0.1;
        assert!(matches!(
            b.validate(),
            Err(PulseError::Validation { .. })
        ));
    }
}
