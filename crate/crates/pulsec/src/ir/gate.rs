use crate::math::C64;
use ndarray::Array2;
use std::fmt;

/// Gate set understood by the compiler. All angles are in degrees.
///
/// `DirectRx` is the calibrated single-pulse rotation produced by the
/// optimizing passes; front-end circuits normally contain only the other
/// variants. `Custom` carries parser extensions (iswap, sqrt_iswap) and
/// user-named gates; synthesis and equivalence checking need the matrix,
/// gates without one are opaque.
#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    X,
    H,
    Rx(f64),
    Ry(f64),
    Rz(f64),
    U3(f64, f64, f64),
    DirectRx(f64),
    Cnot,
    OpenCnot,
    Swap,
    Cr(f64),
    Zz(f64),
    Fsim(f64),
    Barrier,
    Custom {
        name: String,
        arity: usize,
        matrix: Option<Array2<C64>>,
    },
}

impl Gate {
    /// Number of qubits the gate acts on; `None` means any (barrier).
    pub fn arity(&self) -> Option<usize> {
        match self {
            Gate::X | Gate::H | Gate::Rx(_) | Gate::Ry(_) | Gate::Rz(_) => Some(1),
            Gate::U3(..) | Gate::DirectRx(_) => Some(1),
            Gate::Cnot | Gate::OpenCnot | Gate::Swap => Some(2),
            Gate::Cr(_) | Gate::Zz(_) | Gate::Fsim(_) => Some(2),
            Gate::Barrier => None,
            Gate::Custom { arity, .. } => Some(*arity),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Gate::X => "x".into(),
            Gate::H => "h".into(),
            Gate::Rx(_) => "rx".into(),
            Gate::Ry(_) => "ry".into(),
            Gate::Rz(_) => "rz".into(),
            Gate::U3(..) => "u3".into(),
            Gate::DirectRx(_) => "direct_rx".into(),
            Gate::Cnot => "cnot".into(),
            Gate::OpenCnot => "open_cnot".into(),
            Gate::Swap => "swap".into(),
            Gate::Cr(_) => "cr".into(),
            Gate::Zz(_) => "zz".into(),
            Gate::Fsim(_) => "fsim".into(),
            Gate::Barrier => "barrier".into(),
            Gate::Custom { name, .. } => name.clone(),
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match self {
            Gate::Rx(a) | Gate::Ry(a) | Gate::Rz(a) | Gate::DirectRx(a) => vec![*a],
            Gate::Cr(a) | Gate::Zz(a) | Gate::Fsim(a) => vec![*a],
            Gate::U3(t, p, l) => vec![*t, *p, *l],
            _ => vec![],
        }
    }

    /// True for gates that are diagonal in the computational basis.
    pub fn is_diagonal(&self) -> bool {
        matches!(self, Gate::Rz(_) | Gate::Zz(_))
    }

    pub fn is_barrier(&self) -> bool {
        matches!(self, Gate::Barrier)
    }
}

fn fmt_angle(v: f64) -> String {
    // f64 Display is the shortest string that round-trips, which keeps
    // emitted circuits byte-stable.
    if v == 0.0 {
        "0".to_string()
    } else {
        format!("{}", v)
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let params = self.params();
        if params.is_empty() {
            write!(f, "{}", self.name())
        } else {
            let joined: Vec<String> = params.iter().map(|p| fmt_angle(*p)).collect();
            write!(f, "{}({})", self.name(), joined.join(", "))
        }
    }
}
