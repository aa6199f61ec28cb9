//! Arbitrary-precision complex numbers over MPFR floats.
//!
//! Every binary operation is carried at the larger of the two operand
//! precisions.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rug::float::Round;
use rug::{Float, Rational};

#[derive(Debug, Clone, PartialEq)]
pub struct BigComplex {
    pub re: Float,
    pub im: Float,
}

impl BigComplex {
    pub fn new(re: Float, im: Float) -> Self {
        let prec = re.prec().max(im.prec());
        let mut out = BigComplex { re, im };
        out.set_prec(prec);
        out
    }

    pub fn zero(prec: u32) -> Self {
        BigComplex { re: Float::new(prec), im: Float::new(prec) }
    }

    pub fn one(prec: u32) -> Self {
        BigComplex { re: Float::with_val(prec, 1), im: Float::new(prec) }
    }

    pub fn from_real(re: Float) -> Self {
        let im = Float::new(re.prec());
        BigComplex { re, im }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec().max(self.im.prec())
    }

    pub fn set_prec(&mut self, prec: u32) {
        self.re.set_prec(prec);
        self.im.set_prec(prec);
    }

    pub fn with_prec(mut self, prec: u32) -> Self {
        self.set_prec(prec);
        self
    }

    /// `exp(i pi x)` for an exact rational `x`; the argument is reduced
    /// modulo 2 exactly before any rounding happens.
    pub fn exp_i_pi(x: &Rational, prec: u32) -> Self {
        let turns = Rational::from(x / 2u32).floor();
        let reduced = Rational::from(x - Rational::from(2 * turns));
        let arg = Float::with_val(prec + 8, &reduced);
        let re = Float::with_val(prec, arg.cos_pi_ref());
        let im = Float::with_val(prec, arg.sin_pi_ref());
        BigComplex { re, im }
    }

    /// `modulus * exp(i pi phase)`.
    pub fn from_polar_pi(modulus: &Float, phase: &Rational, prec: u32) -> Self {
        let rot = BigComplex::exp_i_pi(phase, prec);
        rot.mul_real(modulus)
    }

    pub fn mul_real(&self, x: &Float) -> Self {
        let prec = self.prec().max(x.prec());
        BigComplex {
            re: Float::with_val(prec, &self.re * x),
            im: Float::with_val(prec, &self.im * x),
        }
    }

    pub fn norm_sqr(&self) -> Float {
        let prec = self.prec();
        let mut out = Float::with_val(prec, self.re.square_ref());
        out += Float::with_val(prec, self.im.square_ref());
        out
    }

    pub fn abs(&self) -> Float {
        let prec = self.prec();
        Float::with_val(prec, self.re.hypot_ref(&self.im))
    }

    /// `log2 |z|`, or `-inf` for zero.
    pub fn log2_abs(&self) -> f64 {
        let a = self.abs();
        if a.is_zero() {
            return f64::NEG_INFINITY;
        }
        a.log2().to_f64()
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn pow_u64(&self, mut exp: u64) -> Self {
        let prec = self.prec();
        let mut result = BigComplex::one(prec);
        let mut base = self.clone();
        while exp > 0 {
            if exp & 1 == 1 {
                result = &result * &base;
            }
            exp >>= 1;
            if exp > 0 {
                base = &base * &base;
            }
        }
        result
    }

    pub fn conj(&self) -> Self {
        BigComplex { re: self.re.clone(), im: Float::with_val(self.im.prec(), -&self.im) }
    }

    /// Round both parts to `f64` (for reports, not for computation).
    pub fn to_f64_pair(&self) -> (f64, f64) {
        (self.re.to_f64_round(Round::Nearest), self.im.to_f64_round(Round::Nearest))
    }
}

impl<'a> Add<&'a BigComplex> for &'a BigComplex {
    type Output = BigComplex;

    fn add(self, rhs: &'a BigComplex) -> BigComplex {
        let prec = self.prec().max(rhs.prec());
        BigComplex {
            re: Float::with_val(prec, &self.re + &rhs.re),
            im: Float::with_val(prec, &self.im + &rhs.im),
        }
    }
}

impl<'a> Sub<&'a BigComplex> for &'a BigComplex {
    type Output = BigComplex;

    fn sub(self, rhs: &'a BigComplex) -> BigComplex {
        let prec = self.prec().max(rhs.prec());
        BigComplex {
            re: Float::with_val(prec, &self.re - &rhs.re),
            im: Float::with_val(prec, &self.im - &rhs.im),
        }
    }
}

impl<'a> Mul<&'a BigComplex> for &'a BigComplex {
    type Output = BigComplex;

    fn mul(self, rhs: &'a BigComplex) -> BigComplex {
        let prec = self.prec().max(rhs.prec());
        // ac - bd and ad + bc, each fused into a single rounding
        let re = Float::with_val(prec, self.re.mul_sub_mul_ref(&rhs.re, &self.im, &rhs.im));
        let im = Float::with_val(prec, self.re.mul_add_mul_ref(&rhs.im, &self.im, &rhs.re));
        BigComplex { re, im }
    }
}

impl Neg for BigComplex {
    type Output = BigComplex;

    fn neg(self) -> BigComplex {
        BigComplex { re: -self.re, im: -self.im }
    }
}

impl fmt::Display for BigComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or(20);
        let sign = if self.im.is_sign_negative() { '-' } else { '+' };
        let im = Float::with_val(self.im.prec(), self.im.abs_ref());
        write!(
            f,
            "{} {} {}i",
            self.re.to_string_radix(10, Some(digits)),
            sign,
            im.to_string_radix(10, Some(digits))
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::float::Constant;

    #[test]
    fn arithmetic_at_max_precision() {
        let a = BigComplex::new(Float::with_val(64, 1.5), Float::with_val(64, -2));
        let b = BigComplex::new(Float::with_val(200, 0.25), Float::with_val(200, 3));
        let p = &a * &b;
        assert_eq!(p.prec(), 200);
        // (1.5 - 2i)(0.25 + 3i) = 0.375 + 6 + (4.5 - 0.5)i
        assert_eq!(p.re, 6.375);
        assert_eq!(p.im, 4);
        let s = &a + &b;
        assert_eq!(s.re, 1.75);
        assert_eq!(s.im, 1);
        assert_eq!(s.prec(), 200);
        let d = &a - &b;
        assert_eq!(d.im, -5);
    }

    #[test]
    fn roots_of_unity_are_exact_at_rational_points() {
        let z = BigComplex::exp_i_pi(&Rational::from((1, 2)), 128);
        assert_eq!(z.re, 0);
        assert_eq!(z.im, 1);
        let z = BigComplex::exp_i_pi(&Rational::from((-7, 3)), 128);
        // exp(-7 pi i / 3) = exp(-pi i / 3)
        assert_eq!(z.re, 0.5);
        let s3 = Float::with_val(128, 3).sqrt() / 2;
        assert!((Float::with_val(128, &z.im + &s3)).abs() < Float::with_val(128, Float::i_exp(1, -125)));
        // twelfth power of a 12th root of unity
        let w = BigComplex::exp_i_pi(&Rational::from((1, 6)), 256).pow_u64(12);
        assert!((w.re.clone() - 1u32).abs() < Float::with_val(256, Float::i_exp(1, -250)));
        assert!(w.im.clone().abs() < Float::with_val(256, Float::i_exp(1, -250)));
    }

    #[test]
    fn pow_and_abs() {
        let z = BigComplex::new(Float::with_val(128, 3), Float::with_val(128, 4));
        assert_eq!(z.abs(), 5);
        assert_eq!(z.norm_sqr(), 25);
        let z5 = z.pow_u64(5);
        assert_eq!(z5.abs(), 3125);
        assert_eq!(z.pow_u64(0), BigComplex::one(128));
        let pi = Float::with_val(128, Constant::Pi);
        let p = BigComplex::from_polar_pi(&pi, &Rational::from(1), 128);
        assert_eq!(p.re, -pi);
    }
}
