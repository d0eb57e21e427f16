//! Cylindrical Bessel functions of integer order 0 and 1.
//!
//! Values come from the `libm` port of the fdlibm routines (rational
//! approximations below |x| = 2, Hankel asymptotic forms above).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BesselKind {
    First,
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BesselOrder {
    Zero,
    One,
}

/// `J_ν(x)` for `x ≥ 0` or `Y_ν(x)` for `x > 0`.
pub fn bessel(kind: BesselKind, order: BesselOrder, x: f64) -> Result<f64> {
    if x.is_nan() {
        return Err(Error::Domain("Bessel argument is NaN".into()));
    }
    match kind {
        BesselKind::First if x < 0.0 => Err(Error::Domain(format!(
            "Bessel function of the first kind needs x >= 0, got {x}"
        ))),
        BesselKind::Second if x <= 0.0 => Err(Error::Domain(format!(
            "Bessel function of the second kind needs x > 0, got {x}"
        ))),
        BesselKind::First => Ok(match order {
            BesselOrder::Zero => libm::j0(x),
            BesselOrder::One => libm::j1(x),
        }),
        BesselKind::Second => Ok(match order {
            BesselOrder::Zero => libm::y0(x),
            BesselOrder::One => libm::y1(x),
        }),
    }
}

#[inline]
pub fn j0(x: f64) -> f64 {
    libm::j0(x)
}

#[inline]
pub fn j1(x: f64) -> f64 {
    libm::j1(x)
}

#[inline]
pub fn y0(x: f64) -> f64 {
    libm::y0(x)
}

#[inline]
pub fn y1(x: f64) -> f64 {
    libm::y1(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_at_origin() {
        assert_eq!(bessel(BesselKind::First, BesselOrder::Zero, 0.0).unwrap(), 1.0);
        assert_eq!(bessel(BesselKind::First, BesselOrder::One, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn first_root_of_j0() {
        let v = bessel(BesselKind::First, BesselOrder::Zero, 2.404825557695773).unwrap();
        assert!(v.abs() < 1e-9, "{v}");
    }

    #[test]
    fn domain_errors() {
        for x in [0.0, -1.0] {
            assert!(bessel(BesselKind::Second, BesselOrder::Zero, x).is_err());
            assert!(bessel(BesselKind::Second, BesselOrder::One, x).is_err());
        }
        assert!(bessel(BesselKind::First, BesselOrder::Zero, -0.5).is_err());
        assert!(bessel(BesselKind::First, BesselOrder::One, f64::NAN).is_err());
    }
}
