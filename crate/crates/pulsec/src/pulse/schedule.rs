//! Timed pulse schedules.
//!
//! A schedule is a list of (t0, instruction) pairs over named channels.
//! Two plays on one channel may not overlap in time. Frame changes are
//! zero-width: at render time they fold into the phase of every later
//! sample on the channel, which is how virtual Z rotations stay free.

use super::envelope::Envelope;
use super::PulseError;
use crate::math::{c, rad, C64};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// `Drive(q)` is the resonant drive line of qubit q ("d0"). `Control(c, t)`
/// is the cross-resonance line driving qubit c at qubit t's frequency
/// ("u0_1"); the two directions of a coupler are distinct channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Channel {
    Drive(usize),
    Control(usize, usize),
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Channel::Drive(q) => write!(f, "d{q}"),
            Channel::Control(a, b) => write!(f, "u{a}_{b}"),
        }
    }
}

impl FromStr for Channel {
    type Err = PulseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || PulseError::BadChannel(s.to_string());
        if let Some(rest) = s.strip_prefix('d') {
            return rest.parse().map(Channel::Drive).map_err(|_| bad());
        }
        if let Some(rest) = s.strip_prefix('u') {
            let (a, b) = rest.split_once('_').ok_or_else(bad)?;
            return Ok(Channel::Control(
                a.parse().map_err(|_| bad())?,
                b.parse().map_err(|_| bad())?,
            ));
        }
        Err(bad())
    }
}

impl Serialize for Channel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Channel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ScheduleInstruction {
    Play { channel: Channel, envelope: Envelope },
    FrameChange { channel: Channel, phase_deg: f64 },
}

impl ScheduleInstruction {
    pub fn channel(&self) -> Channel {
        match self {
            ScheduleInstruction::Play { channel, .. } => *channel,
            ScheduleInstruction::FrameChange { channel, .. } => *channel,
        }
    }

    pub fn duration(&self) -> usize {
        match self {
            ScheduleInstruction::Play { envelope, .. } => envelope.duration(),
            ScheduleInstruction::FrameChange { .. } => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimedInstruction {
    pub t0: usize,
    #[serde(flatten)]
    pub instruction: ScheduleInstruction,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub role: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Schedule {
    #[serde(default)]
    pub name: String,
    instructions: Vec<TimedInstruction>,
}

impl Schedule {
    pub fn new(name: impl Into<String>) -> Self {
        Schedule {
            name: name.into(),
            instructions: Vec::new(),
        }
    }

    pub fn instructions(&self) -> &[TimedInstruction] {
        &self.instructions
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    /// End time of the schedule: latest play end (frames are zero-width,
    /// but a trailing frame still extends the schedule to its own t0).
    pub fn duration(&self) -> usize {
        self.instructions
            .iter()
            .map(|ti| ti.t0 + ti.instruction.duration())
            .max()
            .unwrap_or(0)
    }

    pub fn channels(&self) -> Vec<Channel> {
        let mut chans: Vec<Channel> = self
            .instructions
            .iter()
            .map(|ti| ti.instruction.channel())
            .collect();
        chans.sort();
        chans.dedup();
        chans
    }

    /// Earliest start among instructions on the given channel set, used by
    /// schedulers to pack blocks.
    pub fn channel_end(&self, channel: Channel) -> usize {
        self.instructions
            .iter()
            .filter(|ti| ti.instruction.channel() == channel)
            .map(|ti| ti.t0 + ti.instruction.duration())
            .max()
            .unwrap_or(0)
    }

    pub fn add(&mut self, t0: usize, instruction: ScheduleInstruction) -> Result<(), PulseError> {
        self.add_with_role(t0, instruction, None)
    }

    pub fn add_with_role(
        &mut self,
        t0: usize,
        instruction: ScheduleInstruction,
        role: Option<String>,
    ) -> Result<(), PulseError> {
        if let ScheduleInstruction::Play { channel, envelope } = &instruction {
            envelope.validate()?;
            let (s0, e0) = (t0, t0 + envelope.duration());
            for ti in &self.instructions {
                if let ScheduleInstruction::Play {
                    channel: ch2,
                    envelope: env2,
                } = &ti.instruction
                {
                    if ch2 == channel {
                        let (s1, e1) = (ti.t0, ti.t0 + env2.duration());
                        if s0 < e1 && s1 < e0 {
                            return Err(PulseError::Overlap {
                                channel: channel.to_string(),
                                t0,
                            });
                        }
                    }
                }
            }
        }
        let pos = self
            .instructions
            .partition_point(|ti| ti.t0 <= t0);
        self.instructions.insert(
            pos,
            TimedInstruction {
                t0,
                instruction,
                role,
            },
        );
        Ok(())
    }

    /// Insert every instruction of `other`, shifted by `offset`.
    pub fn add_schedule(&mut self, offset: usize, other: &Schedule) -> Result<(), PulseError> {
        for ti in &other.instructions {
            self.add_with_role(ti.t0 + offset, ti.instruction.clone(), ti.role.clone())?;
        }
        Ok(())
    }

    /// Baseband samples for one channel over `n` samples, with frame
    /// changes folded in: a frame change at time t multiplies every later
    /// sample on the channel by `exp(i * phase)`.
    pub fn render_channel(&self, channel: Channel, n: usize, dt_ns: f64) -> Vec<C64> {
        let mut out = vec![c(0.0, 0.0); n];
        let mut events: Vec<&TimedInstruction> = self
            .instructions
            .iter()
            .filter(|ti| ti.instruction.channel() == channel)
            .collect();
        // Stable by t0; equal-time frame changes precede the play they
        // prefix because insertion keeps source order.
        events.sort_by_key(|ti| ti.t0);
        let mut frame = c(1.0, 0.0);
        for ev in events {
            match &ev.instruction {
                ScheduleInstruction::FrameChange { phase_deg, .. } => {
                    frame *= c(0.0, rad(*phase_deg)).exp();
                }
                ScheduleInstruction::Play { envelope, .. } => {
                    for (k, s) in envelope.samples(dt_ns).into_iter().enumerate() {
                        let idx = ev.t0 + k;
                        if idx < n {
                            out[idx] += frame * s;
                        }
                    }
                }
            }
        }
        out
    }

    /// Real RF waveform: baseband mixed up to the local oscillator,
    /// `Re[s(t) exp(i 2 pi f_lo t)]`.
    pub fn render_channel_rf(
        &self,
        channel: Channel,
        n: usize,
        dt_ns: f64,
        lo_ghz: f64,
    ) -> Vec<f64> {
        let base = self.render_channel(channel, n, dt_ns);
        base.into_iter()
            .enumerate()
            .map(|(k, s)| {
                let t = (k as f64 + 0.5) * dt_ns;
                (s * c(0.0, 2.0 * std::f64::consts::PI * lo_ghz * t).exp()).re
            })
            .collect()
    }
}
