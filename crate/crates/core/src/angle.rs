//! Exact roots of unity, stored as a reduced fraction of a full turn.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::arith::gcd;

/// `e(num/den)` with `0 <= num < den` and `gcd(num, den) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Angle {
    num: u64,
    den: u64,
}

impl Angle {
    pub const ZERO: Angle = Angle { num: 0, den: 1 };

    pub fn new(num: i64, den: u64) -> Angle {
        assert!(den > 0, "zero denominator");
        let n = num.rem_euclid(den as i64) as u64;
        let g = gcd(n, den);
        Angle { num: n / g, den: den / g }
    }

    pub fn from_unsigned(num: u64, den: u64) -> Angle {
        assert!(den > 0, "zero denominator");
        let n = num % den;
        let g = gcd(n, den);
        Angle { num: n / g, den: den / g }
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    /// The multiplicative order of the root of unity.
    pub fn den(&self) -> u64 {
        self.den
    }

    pub fn turns(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn add(self, other: Angle) -> Angle {
        let den = crate::arith::lcm(self.den, other.den);
        let a = self.num as u128 * (den / self.den) as u128 + other.num as u128 * (den / other.den) as u128;
        Angle::from_unsigned((a % den as u128) as u64, den)
    }

    pub fn neg(self) -> Angle {
        Angle::from_unsigned(self.den - self.num, self.den)
    }

    pub fn scale(self, k: u64) -> Angle {
        Angle::from_unsigned(((self.num as u128 * k as u128) % self.den as u128) as u64, self.den)
    }

    pub fn to_complex(self) -> Complex64 {
        e(self.turns())
    }
}

/// `e(x) = exp(2 pi i x)`.
pub fn e(x: f64) -> Complex64 {
    let r = x - x.floor();
    Complex64::from_polar(1.0, TAU * r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduces_and_wraps() {
        assert_eq!(Angle::new(5, 3), Angle::new(2, 3));
        assert_eq!(Angle::new(-1, 4), Angle::new(3, 4));
        assert_eq!(Angle::new(4, 6), Angle::new(2, 3));
        assert_eq!(Angle::new(3, 3), Angle::ZERO);
        assert_eq!(Angle::new(1, 3).add(Angle::new(1, 6)), Angle::new(1, 2));
        assert_eq!(Angle::new(1, 3).neg(), Angle::new(2, 3));
    }

    #[test]
    fn complex_boundary() {
        let z = Angle::new(1, 4).to_complex();
        assert!((z - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        assert!((e(1.25) - Complex64::new(0.0, 1.0)).norm() < 1e-15);
    }
}
