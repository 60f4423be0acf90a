//! The dilatation knob of the family and points of the open unit disk.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{HqcError, Result};

/// Values of `k` at or above `1 - DEGENERATE_EPS` are rejected by the closed forms.
pub const DEGENERATE_EPS: f64 = 1e-6;

/// Which of the two parameters the caller is supplying.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Input is the dilatation bound `k`.
    KToBigK,
    /// Input is the distortion constant `K`.
    BigKToK,
}

/// The pair `(k, K)` with `k = (K-1)/(K+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DilatationParam {
    k: f64,
    #[serde(rename = "K")]
    big_k: f64,
}

impl DilatationParam {
    pub fn from_k(k: f64) -> Result<Self> {
        if !k.is_finite() || !(0.0..1.0).contains(&k) {
            return Err(HqcError::domain(format!("k = {k} must satisfy 0 <= k < 1")));
        }
        Ok(Self { k, big_k: (1.0 + k) / (1.0 - k) })
    }

    pub fn from_big_k(big_k: f64) -> Result<Self> {
        if !big_k.is_finite() || big_k < 1.0 {
            return Err(HqcError::domain(format!("K = {big_k} must satisfy K >= 1")));
        }
        Ok(Self { k: (big_k - 1.0) / (big_k + 1.0), big_k })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn big_k(&self) -> f64 {
        self.big_k
    }

    /// Reject parameters too close to `k = 1` for the `(k-1)^-3` closed forms.
    pub fn ensure_nondegenerate(&self) -> Result<()> {
        if self.k >= 1.0 - DEGENERATE_EPS {
            return Err(HqcError::Degenerate { k: self.k, eps: DEGENERATE_EPS });
        }
        Ok(())
    }
}

pub fn param_convert(x: f64, direction: Direction) -> Result<DilatationParam> {
    match direction {
        Direction::KToBigK => DilatationParam::from_k(x),
        Direction::BigKToK => DilatationParam::from_big_k(x),
    }
}

/// A point of the open unit disk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiskPoint(Complex64);

impl DiskPoint {
    pub fn new(z: Complex64) -> Result<Self> {
        if !(z.re.is_finite() && z.im.is_finite()) || z.norm() >= 1.0 {
            return Err(HqcError::domain(format!("z = {z} is not in the open unit disk")));
        }
        Ok(Self(z))
    }

    pub fn from_polar(r: f64, theta: f64) -> Result<Self> {
        Self::new(Complex64::from_polar(r, theta))
    }

    pub fn origin() -> Self {
        Self(Complex64::new(0.0, 0.0))
    }

    pub fn z(&self) -> Complex64 {
        self.0
    }

    pub fn modulus(&self) -> f64 {
        self.0.norm()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn conformal_case() {
        let p = param_convert(0.0, Direction::KToBigK).unwrap();
        assert_eq!(p.big_k(), 1.0);
    }

    #[test]
    fn big_k_three_is_half() {
        let p = param_convert(3.0, Direction::BigKToK).unwrap();
        assert_eq!(p.k(), 0.5);
    }

    #[test]
    fn fifth_gives_three_halves() {
        let p = param_convert(0.2, Direction::KToBigK).unwrap();
        assert!((p.big_k() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn out_of_range_rejected() {
        assert!(param_convert(1.0, Direction::KToBigK).unwrap_err().is_domain());
        assert!(param_convert(-0.1, Direction::KToBigK).is_err());
        assert!(param_convert(0.5, Direction::BigKToK).is_err());
        assert!(param_convert(f64::NAN, Direction::BigKToK).is_err());
    }

    #[test]
    fn degeneracy_guard() {
        let p = DilatationParam::from_k(1.0 - 1e-7).unwrap();
        assert!(matches!(p.ensure_nondegenerate(), Err(HqcError::Degenerate { .. })));
        assert!(DilatationParam::from_k(0.99).unwrap().ensure_nondegenerate().is_ok());
    }

    #[test]
    fn disk_point_rejects_boundary() {
        assert!(DiskPoint::new(Complex64::new(1.0, 0.0)).is_err());
        assert!(DiskPoint::new(Complex64::new(0.6, 0.8)).is_err());
        assert!(DiskPoint::new(Complex64::new(0.6, 0.79)).is_ok());
    }

    proptest! {
        #[test]
        fn round_trip(k in 0.0f64..0.999) {
            let p = DilatationParam::from_k(k).unwrap();
            let back = DilatationParam::from_big_k(p.big_k()).unwrap();
            prop_assert!((back.k() - k).abs() <= 4.0 * f64::EPSILON);
            prop_assert!((p.big_k() - (1.0 + p.k()) / (1.0 - p.k())).abs() <= 4.0 * f64::EPSILON * p.big_k());
        }
    }
}
