//! Pulse envelopes. Durations are integer sample counts; `amp` is the
//! complex peak amplitude and must stay within the unit disc. Gaussian
//! flanks are lifted so the waveform starts and ends at zero, which keeps
//! spectral sidelobes (and with them 1->2 leakage) small.

use super::PulseError;
use crate::math::{c, C64};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Envelope {
    /// Lifted Gaussian, center at duration/2.
    Gaussian { duration: usize, amp: C64, sigma: f64 },
    /// Gaussian with a derivative quadrature term; `beta` is in samples.
    Drag {
        duration: usize,
        amp: C64,
        sigma: f64,
        beta: f64,
    },
    /// Flat top of `width` samples with lifted Gaussian risers.
    GaussianSquare {
        duration: usize,
        amp: C64,
        sigma: f64,
        width: usize,
    },
    Constant { duration: usize, amp: C64 },
    /// Any envelope ring-modulated by `exp(-i 2 pi delta_ghz t)`, with t
    /// measured from the start of the pulse. Used to address the 1->2 and
    /// 0->2 transitions, which sit `anharmonicity` (or half of it) below
    /// the 0->1 drive frequency.
    FreqShifted { base: Box<Envelope>, delta_ghz: f64 },
}

impl Envelope {
    pub fn duration(&self) -> usize {
        match self {
            Envelope::Gaussian { duration, .. }
            | Envelope::Drag { duration, .. }
            | Envelope::GaussianSquare { duration, .. }
            | Envelope::Constant { duration, .. } => *duration,
            Envelope::FreqShifted { base, .. } => base.duration(),
        }
    }

    pub fn amp(&self) -> C64 {
        match self {
            Envelope::Gaussian { amp, .. }
            | Envelope::Drag { amp, .. }
            | Envelope::GaussianSquare { amp, .. }
            | Envelope::Constant { amp, .. } => *amp,
            Envelope::FreqShifted { base, .. } => base.amp(),
        }
    }

    /// Same shape with a different peak amplitude.
    pub fn with_amp(&self, new_amp: C64) -> Envelope {
        let mut e = self.clone();
        match &mut e {
            Envelope::Gaussian { amp, .. }
            | Envelope::Drag { amp, .. }
            | Envelope::GaussianSquare { amp, .. }
            | Envelope::Constant { amp, .. } => *amp = new_amp,
            Envelope::FreqShifted { base, .. } => **base = base.with_amp(new_amp),
        }
        e
    }

    pub fn validate(&self) -> Result<(), PulseError> {
        let bad = |msg: String| Err(PulseError::InvalidEnvelope(msg));
        if self.duration() == 0 {
            return bad("duration must be positive".into());
        }
        if self.amp().norm() > 1.0 + 1e-9 {
            return bad(format!("|amp| = {:.4} exceeds 1", self.amp().norm()));
        }
        match self {
            Envelope::Gaussian { sigma, .. } | Envelope::Drag { sigma, .. } => {
                if *sigma <= 0.0 {
                    return bad("sigma must be positive".into());
                }
            }
            Envelope::GaussianSquare {
                duration,
                sigma,
                width,
                ..
            } => {
                if *sigma <= 0.0 {
                    return bad("sigma must be positive".into());
                }
                if width > duration {
                    return bad(format!("width {width} exceeds duration {duration}"));
                }
                if (duration - width) % 2 != 0 {
                    return bad("duration - width must be even".into());
                }
            }
            Envelope::Constant { .. } => {}
            Envelope::FreqShifted { base, .. } => base.validate()?,
        }
        Ok(())
    }

    /// Complex baseband samples; sample k is the value at t = (k + 1/2) dt.
    pub fn samples(&self, dt_ns: f64) -> Vec<C64> {
        match self {
            Envelope::Gaussian {
                duration,
                amp,
                sigma,
            } => lifted_gaussian(*duration, *sigma)
                .into_iter()
                .map(|g| amp * g)
                .collect(),
            Envelope::Drag {
                duration,
                amp,
                sigma,
                beta,
            } => {
                let mu = *duration as f64 / 2.0;
                let e0 = (-(mu * mu) / (2.0 * sigma * sigma)).exp();
                (0..*duration)
                    .map(|k| {
                        let t = k as f64 + 0.5;
                        let g = (-((t - mu) * (t - mu)) / (2.0 * sigma * sigma)).exp();
                        let re = (g - e0) / (1.0 - e0);
                        let dg = -(t - mu) / (sigma * sigma) * g / (1.0 - e0);
                        amp * c(re, beta * dg)
                    })
                    .collect()
            }
            Envelope::GaussianSquare {
                duration,
                amp,
                sigma,
                width,
            } => {
                let r = (*duration - *width) / 2;
                let e0 = (-(r as f64 * r as f64) / (2.0 * sigma * sigma)).exp();
                (0..*duration)
                    .map(|k| {
                        let t = k as f64 + 0.5;
                        let g = if t < r as f64 {
                            let d = t - r as f64;
                            ((-(d * d) / (2.0 * sigma * sigma)).exp() - e0) / (1.0 - e0)
                        } else if t <= (r + width) as f64 {
                            1.0
                        } else {
                            let d = t - (r + width) as f64;
                            ((-(d * d) / (2.0 * sigma * sigma)).exp() - e0) / (1.0 - e0)
                        };
                        amp * g
                    })
                    .collect()
            }
            Envelope::Constant { duration, amp } => vec![*amp; *duration],
            Envelope::FreqShifted { base, delta_ghz } => {
                let two_pi = 2.0 * std::f64::consts::PI;
                base.samples(dt_ns)
                    .into_iter()
                    .enumerate()
                    .map(|(k, s)| {
                        let t = (k as f64 + 0.5) * dt_ns;
                        s * c(0.0, -two_pi * delta_ghz * t).exp()
                    })
                    .collect()
            }
        }
    }

    /// Integral of the envelope over the pulse, in amp * ns units.
    pub fn area_ns(&self, dt_ns: f64) -> C64 {
        self.samples(dt_ns).into_iter().sum::<C64>() * dt_ns
    }
}

fn lifted_gaussian(duration: usize, sigma: f64) -> Vec<f64> {
    let mu = duration as f64 / 2.0;
    let e0 = (-(mu * mu) / (2.0 * sigma * sigma)).exp();
    (0..duration)
        .map(|k| {
            let t = k as f64 + 0.5;
            let g = (-((t - mu) * (t - mu)) / (2.0 * sigma * sigma)).exp();
            (g - e0) / (1.0 - e0)
        })
        .collect()
}

/// Sample sum of one lifted Gaussian riser of `riser` samples with the
/// given sigma (both flanks of a GaussianSquare together contribute twice
/// this). Used when stretching cross-resonance tones.
pub fn riser_sample_sum(riser: usize, sigma: f64) -> f64 {
    let e0 = (-(riser as f64 * riser as f64) / (2.0 * sigma * sigma)).exp();
    (0..riser)
        .map(|k| {
            let t = k as f64 + 0.5 - riser as f64;
            ((-(t * t) / (2.0 * sigma * sigma)).exp() - e0) / (1.0 - e0)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_edges_are_lifted_to_zero() {
        let e = Envelope::Gaussian {
            duration: 160,
            amp: c(0.5, 0.0),
            sigma: 40.0,
        };
        let s = e.samples(0.22);
        assert_eq!(s.len(), 160);
        assert!(s[0].norm() < 0.01);
        assert!(s[159].norm() < 0.01);
        let peak = s.iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!((peak - 0.5).abs() < 0.01);
        // Symmetry.
        for k in 0..80 {
            assert!((s[k] - s[159 - k]).norm() < 1e-12);
        }
    }

    #[test]
    fn drag_has_antisymmetric_quadrature() {
        let e = Envelope::Drag {
            duration: 160,
            amp: c(0.3, 0.0),
            sigma: 40.0,
            beta: 2.0,
        };
        let s = e.samples(0.22);
        for k in 0..80 {
            assert!((s[k].im + s[159 - k].im).abs() < 1e-12);
        }
        assert!(s[40].im > 0.0); // rising edge, positive derivative
        assert!(s[120].im < 0.0);
    }

    #[test]
    fn gaussian_square_flat_top() {
        let e = Envelope::GaussianSquare {
            duration: 512,
            amp: c(0.3, 0.0),
            sigma: 32.0,
            width: 384,
        };
        let s = e.samples(0.22);
        for k in 64..448 {
            assert!((s[k].re - 0.3).abs() < 1e-12, "k={k}");
        }
        assert!(s[0].norm() < 0.01);
        assert!(s[511].norm() < 0.01);
        // Area = flat + both risers.
        let area = e.area_ns(1.0).re / 0.3;
        let riser = riser_sample_sum(64, 32.0);
        assert!((area - (384.0 + 2.0 * riser)).abs() < 1e-9);
        assert!(riser > 30.0 && riser < 40.0);
    }

    #[test]
    fn freq_shifted_wraps_base() {
        let base = Envelope::Constant {
            duration: 100,
            amp: c(0.5, 0.0),
        };
        let e = Envelope::FreqShifted {
            base: Box::new(base.clone()),
            delta_ghz: -0.3,
        };
        let dt = 0.22;
        let s = e.samples(dt);
        assert_eq!(e.duration(), 100);
        for (k, v) in s.iter().enumerate() {
            assert!((v.norm() - 0.5).abs() < 1e-12);
            let expect = 2.0 * std::f64::consts::PI * 0.3 * ((k as f64 + 0.5) * dt);
            let diff = (v.arg() - expect).rem_euclid(2.0 * std::f64::consts::PI);
            assert!(diff < 1e-9 || diff > 2.0 * std::f64::consts::PI - 1e-9);
        }
    }

    #[test]
    fn with_amp_rescales_including_nested() {
        let e = Envelope::FreqShifted {
            base: Box::new(Envelope::Gaussian {
                duration: 64,
                amp: c(0.2, 0.0),
                sigma: 16.0,
            }),
            delta_ghz: 0.1,
        };
        let e2 = e.with_amp(c(0.0, 0.4));
        assert_eq!(e2.amp(), c(0.0, 0.4));
        assert_eq!(e2.duration(), 64);
    }

    #[test]
    fn validation_rules() {
        assert!(Envelope::Constant {
            duration: 0,
            amp: c(0.1, 0.0)
        }
        .validate()
        .is_err());
        assert!(Envelope::Constant {
            duration: 5,
            amp: c(1.2, 0.0)
        }
        .validate()
        .is_err());
        assert!(Envelope::GaussianSquare {
            duration: 100,
            amp: c(0.1, 0.0),
            sigma: 10.0,
            width: 120
        }
        .validate()
        .is_err());
        assert!(Envelope::GaussianSquare {
            duration: 101,
            amp: c(0.1, 0.0),
            sigma: 10.0,
            width: 40
        }
        .validate()
        .is_err());
        assert!(Envelope::Gaussian {
            duration: 10,
            amp: c(0.1, 0.0),
            sigma: -1.0
        }
        .validate()
        .is_err());
        assert!(Envelope::Drag {
            duration: 160,
            amp: c(0.24, 0.0),
            sigma: 40.0,
            beta: 2.4
        }
        .validate()
        .is_ok());
    }

    #[test]
    fn serde_roundtrip() {
        let e = Envelope::FreqShifted {
            base: Box::new(Envelope::GaussianSquare {
                duration: 240,
                amp: c(0.3, -0.1),
                sigma: 8.0,
                width: 200,
            }),
            delta_ghz: -0.15,
        };
        let j = serde_json::to_string(&e).unwrap();
        let back: Envelope = serde_json::from_str(&j).unwrap();
        assert_eq!(e, back);
    }
}
