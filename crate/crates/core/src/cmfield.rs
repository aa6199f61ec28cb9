//! Fundamental discriminants of imaginary quadratic fields and the CM point
//! `theta` with `O_K = Z[theta]`.

use rug::Rational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A validated fundamental discriminant `d <= -7`.
///
/// Enumeration work downstream is linear in `|d|`, so values are held in an
/// `i64`; products that can leave that range are formed in `i128`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "i64")]
pub struct Discriminant(i64);

impl Discriminant {
    pub fn value(self) -> i64 {
        self.0
    }

    /// `|d|` as an unsigned integer.
    pub fn abs(self) -> u64 {
        self.0.unsigned_abs()
    }

    /// True for `d = 0 (mod 4)`, false for `d = 1 (mod 4)`.
    pub fn is_even(self) -> bool {
        self.0.rem_euclid(4) == 0
    }
}

impl std::fmt::Display for Discriminant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

impl TryFrom<i64> for Discriminant {
    type Error = Error;

    fn try_from(d: i64) -> Result<Self> {
        validate_discriminant(d)
    }
}

impl From<Discriminant> for i64 {
    fn from(d: Discriminant) -> i64 {
        d.0
    }
}

fn is_squarefree(mut m: u64) -> bool {
    if m % 4 == 0 {
        return false;
    }
    if m % 2 == 0 {
        m /= 2;
    }
    let mut p = 3u64;
    while p.saturating_mul(p) <= m {
        if m % p == 0 {
            m /= p;
            if m % p == 0 {
                return false;
            }
        }
        p += 2;
    }
    true
}

/// True when `d` is the discriminant of a quadratic field (sign not checked).
pub fn is_fundamental(d: i64) -> bool {
    if d == 0 || d == 1 {
        return false;
    }
    match d.rem_euclid(4) {
        1 => is_squarefree(d.unsigned_abs()),
        0 => {
            let m = d / 4;
            matches!(m.rem_euclid(4), 2 | 3) && is_squarefree(m.unsigned_abs())
        }
        _ => false,
    }
}

pub fn validate_discriminant(d: i64) -> Result<Discriminant> {
    if d >= 0 {
        return Err(Error::NotImaginary(d));
    }
    if d == -3 || d == -4 {
        return Err(Error::ExcludedField(d));
    }
    if !is_fundamental(d) {
        return Err(Error::NotFundamental(d));
    }
    Ok(Discriminant(d))
}

/// Coefficients of `min(theta, Q) = X^2 + b_theta X + c_theta` together with
/// `theta = theta_re + i sqrt(theta_im_sq)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThetaParams {
    pub b_theta: i64,
    pub c_theta: i64,
    pub theta_re: Rational,
    pub theta_im_sq: Rational,
}

pub fn theta_params(d: Discriminant) -> ThetaParams {
    let v = d.value();
    let theta_im_sq = Rational::from((-v, 4));
    if d.is_even() {
        ThetaParams {
            b_theta: 0,
            c_theta: -v / 4,
            theta_re: Rational::new(),
            theta_im_sq,
        }
    } else {
        ThetaParams {
            b_theta: 1,
            c_theta: (1 - v) / 4,
            theta_re: Rational::from((-1, 2)),
            theta_im_sq,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_fundamental(d: i64) -> bool {
        // d = f^2 d0 with d0 a discriminant and f > 1 means non-fundamental.
        if d.rem_euclid(4) > 1 {
            return false;
        }
        (2..=d.unsigned_abs()).all(|f: u64| {
            let f2 = (f * f) as i64;
            if d % f2 != 0 {
                return true;
            }
            let d0 = d / f2;
            d0.rem_euclid(4) > 1
        })
    }

    #[test]
    fn example_discriminants() {
        assert_eq!(validate_discriminant(-40).unwrap().value(), -40);
        assert_eq!(validate_discriminant(-3), Err(Error::ExcludedField(-3)));
        assert_eq!(validate_discriminant(-4), Err(Error::ExcludedField(-4)));
        assert_eq!(validate_discriminant(-12), Err(Error::NotFundamental(-12)));
        assert_eq!(validate_discriminant(5), Err(Error::NotImaginary(5)));
        assert_eq!(validate_discriminant(0), Err(Error::NotImaginary(0)));
        assert_eq!(validate_discriminant(-1), Err(Error::NotFundamental(-1)));
    }

    #[test]
    fn fundamental_matches_brute_force() {
        for d in -2000..-4 {
            assert_eq!(is_fundamental(d), brute_fundamental(d), "d = {d}");
        }
    }

    #[test]
    fn theta_examples() {
        let t = theta_params(validate_discriminant(-40).unwrap());
        assert_eq!((t.b_theta, t.c_theta), (0, 10));
        assert_eq!(t.theta_re, 0);
        assert_eq!(t.theta_im_sq, 10);

        let t = theta_params(validate_discriminant(-7).unwrap());
        assert_eq!((t.b_theta, t.c_theta), (1, 2));
        assert_eq!(t.theta_re, Rational::from((-1, 2)));
        assert_eq!(t.theta_im_sq, Rational::from((7, 4)));

        let t = theta_params(validate_discriminant(-8).unwrap());
        assert_eq!((t.b_theta, t.c_theta), (0, 2));
        assert_eq!(t.theta_im_sq, 2);
    }

    #[test]
    fn min_poly_has_field_discriminant() {
        for d in (-3000..=-7).filter(|&d| is_fundamental(d)) {
            let disc = validate_discriminant(d).unwrap();
            let t = theta_params(disc);
            assert_eq!(t.b_theta * t.b_theta - 4 * t.c_theta, d);
            assert!(t.theta_im_sq > 0);
            // (Im theta)^2 = -d/4
            assert_eq!(t.theta_im_sq.clone() * 4, -d);
        }
    }

    #[test]
    fn serde_rejects_invalid() {
        let ok: Discriminant = serde_json::from_str("-23").unwrap();
        assert_eq!(ok.value(), -23);
        assert!(serde_json::from_str::<Discriminant>("-12").is_err());
    }
}
