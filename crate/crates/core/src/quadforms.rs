//! Reduced primitive positive definite binary quadratic forms.
//!
//! The reduced forms of discriminant `d` are in bijection with the form class
//! group `C(d)`; only the set of classes is needed downstream, so no
//! composition law is implemented.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cmfield::Discriminant;

/// The form `a X^2 + b XY + c Y^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QuadForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl QuadForm {
    pub fn new(a: i64, b: i64, c: i64) -> Self {
        QuadForm { a, b, c }
    }

    pub fn discriminant(&self) -> i128 {
        let (a, b, c) = (self.a as i128, self.b as i128, self.c as i128);
        b * b - 4 * a * c
    }

    pub fn is_primitive(&self) -> bool {
        gcd(gcd(self.a.unsigned_abs(), self.b.unsigned_abs()), self.c.unsigned_abs()) == 1
    }

    /// `-a < b <= a < c` or `0 <= b <= a = c`.
    pub fn is_reduced(&self) -> bool {
        let QuadForm { a, b, c } = *self;
        (-a < b && b <= a && a < c) || (0 <= b && b <= a && a == c)
    }
}

impl fmt::Display for QuadForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}, {}]", self.a, self.b, self.c)
    }
}

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Largest `a` allowed for a reduced form, `floor(sqrt(|d| / 3))`.
pub fn max_leading_coefficient(d: Discriminant) -> i64 {
    let bound = d.abs() / 3;
    let mut a = (bound as f64).sqrt() as u64;
    while a * a > bound {
        a -= 1;
    }
    while (a + 1) * (a + 1) <= bound {
        a += 1;
    }
    a as i64
}

/// All reduced primitive forms of discriminant `d`, sorted by `(a, b, c)`.
pub fn reduced_forms(d: Discriminant) -> Vec<QuadForm> {
    let disc = d.value() as i128;
    let mut out = Vec::new();
    for a in 1..=max_leading_coefficient(d) {
        // b has the parity of d
        let start = if (-a + 1 - d.value()).rem_euclid(2) == 0 { -a + 1 } else { -a + 2 };
        for b in (start..=a).step_by(2) {
            let num = (b as i128) * (b as i128) - disc;
            let den = 4 * a as i128;
            if num % den != 0 {
                continue;
            }
            let c = (num / den) as i64;
            let q = QuadForm { a, b, c };
            if q.is_reduced() && q.is_primitive() {
                out.push(q);
            }
        }
    }
    out.sort();
    out
}

/// The principal form: `[1, 0, -d/4]` or `[1, 1, (1-d)/4]`.
pub fn unit_form(d: Discriminant) -> QuadForm {
    let v = d.value();
    if d.is_even() {
        QuadForm::new(1, 0, -v / 4)
    } else {
        QuadForm::new(1, 1, (1 - v) / 4)
    }
}

pub fn class_number(d: Discriminant) -> usize {
    reduced_forms(d).len()
}
