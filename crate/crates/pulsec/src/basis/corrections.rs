//! Phase correction table for direct RX pulses.
//!
//! A single amplitude-scaled pulse realizes RX(theta) with a small
//! angle-dependent phase error (the effective Z rotation dragged along by
//! the 2-level approximation breaking down). The table maps rotation
//! angle to the virtual-Z correction that cancels it; values are measured
//! once per qubit by tomography sweeps and then applied for free at
//! compile time.

use crate::pulse::PulseError;

pub const CSV_HEADER: &str = "theta_deg,correction_deg";

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseCorrectionTable {
    /// (theta_deg, correction_deg), sorted by theta.
    entries: Vec<(f64, f64)>,
}

impl PhaseCorrectionTable {
    pub fn new(mut entries: Vec<(f64, f64)>) -> Result<Self, PulseError> {
        if entries.len() < 2 {
            return Err(PulseError::Validation {
                path: "corrections".into(),
                msg: "need at least two entries".into(),
            });
        }
        entries.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        if entries.windows(2).any(|w| (w[1].0 - w[0].0).abs() < 1e-12) {
            return Err(PulseError::Validation {
                path: "corrections".into(),
                msg: "duplicate theta".into(),
            });
        }
        Ok(PhaseCorrectionTable { entries })
    }

    pub fn entries(&self) -> &[(f64, f64)] {
        &self.entries
    }

    /// Linear interpolation, clamped to the end values outside the range.
    pub fn correction_for(&self, theta_deg: f64) -> f64 {
        let e = &self.entries;
        if theta_deg <= e[0].0 {
            return e[0].1;
        }
        if theta_deg >= e[e.len() - 1].0 {
            return e[e.len() - 1].1;
        }
        let hi = e.partition_point(|(t, _)| *t < theta_deg);
        let (t0, c0) = e[hi - 1];
        let (t1, c1) = e[hi];
        let f = (theta_deg - t0) / (t1 - t0);
        c0 + f * (c1 - c0)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for (t, c) in &self.entries {
            out.push_str(&format!("{t:.6},{c:.6}\n"));
        }
        out
    }

    pub fn from_csv(s: &str) -> Result<Self, PulseError> {
        let mut lines = s.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().unwrap_or("");
        if header.trim() != CSV_HEADER {
            return Err(PulseError::Validation {
                path: "corrections csv".into(),
                msg: format!("bad header `{header}`, expected `{CSV_HEADER}`"),
            });
        }
        let mut entries = Vec::new();
        for (i, line) in lines.enumerate() {
            let mut cols = line.split(',');
            let parse = |tok: Option<&str>| -> Result<f64, PulseError> {
                tok.map(str::trim)
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| PulseError::Validation {
                        path: format!("corrections csv row {}", i + 2),
                        msg: format!("bad row `{line}`"),
                    })
            };
            let t = parse(cols.next())?;
            let c = parse(cols.next())?;
            entries.push((t, c));
        }
        PhaseCorrectionTable::new(entries)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolates_and_clamps() {
        let t = PhaseCorrectionTable::new(vec![(0.0, 0.0), (90.0, -1.0), (180.0, 0.0)]).unwrap();
        assert_eq!(t.correction_for(0.0), 0.0);
        assert_eq!(t.correction_for(90.0), -1.0);
        assert!((t.correction_for(45.0) + 0.5).abs() < 1e-12);
        assert!((t.correction_for(135.0) + 0.5).abs() < 1e-12);
        assert_eq!(t.correction_for(-20.0), 0.0);
        assert_eq!(t.correction_for(200.0), 0.0);
    }

    #[test]
    fn csv_roundtrip() {
        let t =
            PhaseCorrectionTable::new(vec![(0.0, 0.0), (45.0, -0.31), (90.0, -0.62)]).unwrap();
        let csv = t.to_csv();
        assert!(csv.starts_with("theta_deg,correction_deg\n"));
        let back = PhaseCorrectionTable::from_csv(&csv).unwrap();
        assert_eq!(back.entries().len(), 3);
        assert!((back.correction_for(45.0) + 0.31).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(PhaseCorrectionTable::new(vec![(0.0, 0.0)]).is_err());
        assert!(PhaseCorrectionTable::new(vec![(0.0, 0.0), (0.0, 1.0)]).is_err());
        assert!(PhaseCorrectionTable::from_csv("nope\n1,2\n").is_err());
        assert!(PhaseCorrectionTable::from_csv("theta_deg,correction_deg\n1,x\n").is_err());
    }

    #[test]
    fn entries_sorted_on_construction() {
        let t = PhaseCorrectionTable::new(vec![(90.0, -1.0), (0.0, 0.0)]).unwrap();
        assert_eq!(t.entries()[0].0, 0.0);
    }
}
