//! Exact arithmetic for roots of unity.
//!
//! A [`Phase`] is a point e^{2πi·t} on the unit circle with t ∈ ℚ, stored as the
//! reduced fraction t mod 1. Products, inverses, conjugates and integer powers are
//! exact, so identities between pairings, cocycles and coboundaries can be checked
//! with zero residual; conversion to `Complex64` happens only at the boundary to
//! the numerical layer.

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::Zero;
use std::fmt;
use std::ops::{Div, Mul, MulAssign};

/// A unit complex number e^{2πi·turns} with exact rational `turns` ∈ [0, 1).
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Phase {
    turns: Rational64,
}

impl Phase {
    pub const ONE: Phase = Phase {
        turns: Rational64::new_raw(0, 1),
    };

    pub const MINUS_ONE: Phase = Phase {
        turns: Rational64::new_raw(1, 2),
    };

    /// e^{2πi·num/den}. Panics if `den == 0`.
    pub fn from_fraction(num: i64, den: i64) -> Phase {
        assert!(den != 0, "phase denominator must be nonzero");
        Phase {
            turns: Rational64::new(num, den),
        }
        .normalized()
    }

    /// The primitive n-th root of unity e^{2πi/n} raised to `k`.
    pub fn root_of_unity(n: i64, k: i64) -> Phase {
        Phase::from_fraction(k, n)
    }

    pub fn i() -> Phase {
        Phase::from_fraction(1, 4)
    }

    fn normalized(self) -> Phase {
        let mut t = self.turns;
        if t < Rational64::zero() || t >= Rational64::from_integer(1) {
            let floor = t.floor();
            t -= floor;
        }
        Phase { turns: t }
    }

    /// Exponent as a reduced fraction of a full turn, in [0, 1).
    pub fn turns(self) -> Rational64 {
        self.turns
    }

    /// Numerator of the exponent over [`Phase::denominator`].
    pub fn numerator(self) -> i64 {
        *self.turns.numer()
    }

    /// Order of the phase as a root of unity (the reduced denominator of the exponent).
    pub fn denominator(self) -> i64 {
        *self.turns.denom()
    }

    pub fn is_one(self) -> bool {
        self.turns.is_zero()
    }

    pub fn conj(self) -> Phase {
        Phase {
            turns: -self.turns,
        }
        .normalized()
    }

    pub fn inv(self) -> Phase {
        self.conj()
    }

    pub fn pow(self, k: i64) -> Phase {
        Phase {
            turns: self.turns * Rational64::from_integer(k),
        }
        .normalized()
    }

    pub fn to_c64(self) -> Complex64 {
        let theta = 2.0 * std::f64::consts::PI * (*self.turns.numer() as f64)
            / (*self.turns.denom() as f64);
        Complex64::new(theta.cos(), theta.sin())
    }
}

impl Default for Phase {
    fn default() -> Self {
        Phase::ONE
    }
}

impl Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase {
            turns: self.turns + rhs.turns,
        }
        .normalized()
    }
}

impl MulAssign for Phase {
    fn mul_assign(&mut self, rhs: Phase) {
        *self = *self * rhs;
    }
}

impl Div for Phase {
    type Output = Phase;
    fn div(self, rhs: Phase) -> Phase {
        self * rhs.inv()
    }
}

impl fmt::Debug for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e(2πi·{}/{})", self.turns.numer(), self.turns.denom())
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            write!(f, "1")
        } else if self.turns == Rational64::new(1, 2) {
            write!(f, "-1")
        } else if self.turns == Rational64::new(1, 4) {
            write!(f, "i")
        } else if self.turns == Rational64::new(3, 4) {
            write!(f, "-i")
        } else {
            write!(f, "e(2πi·{})", self.turns)
        }
    }
}

/// Product of a slice of phases, exactly.
pub fn product(phases: &[Phase]) -> Phase {
    phases.iter().copied().fold(Phase::ONE, |a, b| a * b)
}

/// Mean of phases as a complex number: (1/n)Σ e^{2πi·tⱼ}. Used where averages of
/// phases (no longer unit complex numbers) enter the numerical layer.
pub fn mean_c64(phases: &[Phase]) -> Complex64 {
    let s: Complex64 = phases.iter().map(|p| p.to_c64()).sum();
    s / phases.len() as f64
}

/// Checks |Phase::to_c64| == 1 up to float roundoff; the exact layer guarantees it,
/// this guards the boundary conversion.
pub fn unit_modulus_residual(p: Phase) -> f64 {
    (p.to_c64().norm() - 1.0).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Rational64;

    #[test]
    fn normalization_wraps_into_unit_interval() {
        assert_eq!(Phase::from_fraction(5, 4), Phase::from_fraction(1, 4));
        assert_eq!(Phase::from_fraction(-1, 4), Phase::from_fraction(3, 4));
        assert_eq!(Phase::from_fraction(8, 4), Phase::ONE);
        assert_eq!(Phase::from_fraction(-7, 2), Phase::MINUS_ONE);
    }

    #[test]
    fn multiplication_is_exact_exponent_addition() {
        let a = Phase::from_fraction(1, 3);
        let b = Phase::from_fraction(1, 6);
        assert_eq!(a * b, Phase::MINUS_ONE);
        assert_eq!(a * a * a, Phase::ONE);
        assert_eq!(Phase::i() * Phase::i(), Phase::MINUS_ONE);
    }

    #[test]
    fn conjugate_inverts() {
        for (n, d) in [(0, 1), (1, 2), (1, 4), (3, 8), (5, 12)] {
            let p = Phase::from_fraction(n, d);
            assert_eq!(p * p.conj(), Phase::ONE);
            assert_eq!(p.inv(), p.conj());
        }
    }

    #[test]
    fn powers_match_repeated_products() {
        let p = Phase::from_fraction(3, 8);
        let mut acc = Phase::ONE;
        for k in 0..=10 {
            assert_eq!(p.pow(k), acc);
            acc = acc * p;
        }
        assert_eq!(p.pow(-1), p.conj());
    }

    #[test]
    fn to_c64_hits_the_unit_circle_on_the_nose_for_quarter_turns() {
        assert_eq!(Phase::ONE.to_c64(), num_complex::Complex64::new(1.0, 0.0));
        let i = Phase::i().to_c64();
        assert!((i.re).abs() < 1e-15 && (i.im - 1.0).abs() < 1e-15);
        let m = Phase::MINUS_ONE.to_c64();
        assert!((m.re + 1.0).abs() < 1e-15 && m.im.abs() < 1e-15);
    }

    #[test]
    fn turns_are_reduced() {
        let p = Phase::from_fraction(2, 8);
        assert_eq!(p.turns(), Rational64::new(1, 4));
        assert_eq!(p.denominator(), 4);
        assert_eq!(p.numerator(), 1);
    }

    #[test]
    fn unit_modulus_holds_at_the_float_boundary() {
        for d in 1..=64 {
            for n in 0..d {
                assert!(unit_modulus_residual(Phase::from_fraction(n, d)) < 1e-12);
            }
        }
    }
}
