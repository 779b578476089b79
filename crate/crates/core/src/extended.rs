use num_traits::Float;
use serde::{Deserialize, Serialize};

/// A real number that may carry a signalled infinity.
///
/// Divergence (for example `E e^{-sZ}` for `s` below the integrability
/// number) is reported as [`ExtendedReal::PosInf`] or [`ExtendedReal::NegInf`].
/// A `Finite` value whose payload is `f64::INFINITY` is an overflow, not a
/// divergence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ExtendedReal {
    Finite(f64),
    PosInf,
    NegInf,
}

impl ExtendedReal {
    pub fn is_finite(self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(v) => Some(v),
            _ => None,
        }
    }

    /// Collapses the signal onto IEEE infinities.
    pub fn to_f64(self) -> f64 {
        match self {
            ExtendedReal::Finite(v) => v,
            ExtendedReal::PosInf => f64::INFINITY,
            ExtendedReal::NegInf => f64::NEG_INFINITY,
        }
    }

    /// `exp` of an extended log-value.
    pub(crate) fn exp(self) -> ExtendedReal {
        match self {
            ExtendedReal::Finite(v) => ExtendedReal::Finite(v.exp()),
            ExtendedReal::PosInf => ExtendedReal::PosInf,
            ExtendedReal::NegInf => ExtendedReal::Finite(0.0),
        }
    }

    pub(crate) fn map(self, f: impl FnOnce(f64) -> f64) -> ExtendedReal {
        match self {
            ExtendedReal::Finite(v) => ExtendedReal::Finite(f(v)),
            other => other,
        }
    }
}
