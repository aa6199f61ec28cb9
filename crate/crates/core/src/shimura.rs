//! Explicit Galois action on the conjugates of `g_(0,1/N)(theta)^(12N)`.
//!
//! Pairs `(alpha, Q)` with `alpha` in `W_{N,theta} / {+-1}` and `Q` a reduced
//! form of discriminant `d` correspond one-to-one with `Gal(K_(N) / K)`. The
//! element `(alpha, Q)` sends the value at `theta` with index `(0, 1/N)` to
//! the value at `theta_Q` with index `(0, 1/N) * alpha * u_Q`.
//!
//! Matrices act on row vectors from the right throughout.

use std::fmt;

use rug::Rational;
use serde::{Deserialize, Serialize};

use crate::cmfield::{theta_params, Discriminant};
use crate::error::{Error, Result};
use crate::quadforms::{gcd, reduced_forms, QuadForm};

pub(crate) fn check_level(level: u64) -> Result<()> {
    if level < 2 || level > u32::MAX as u64 {
        return Err(Error::InvalidLevel(level));
    }
    Ok(())
}

fn reduce(x: i128, level: u64) -> u64 {
    x.rem_euclid(level as i128) as u64
}

/// A 2x2 matrix over `Z/NZ`, row-major, entries in `[0, N)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Mat2N {
    pub entries: [u64; 4],
    pub level: u64,
}

impl Mat2N {
    pub fn new(entries: [i64; 4], level: u64) -> Self {
        Mat2N {
            entries: entries.map(|e| reduce(e as i128, level)),
            level,
        }
    }

    pub fn identity(level: u64) -> Self {
        Mat2N::new([1, 0, 0, 1], level)
    }

    pub fn det(&self) -> u64 {
        let [a, b, c, d] = self.entries.map(|e| e as i128);
        reduce(a * d - b * c, self.level)
    }

    pub fn is_invertible(&self) -> bool {
        gcd(self.det(), self.level) == 1
    }

    pub fn mul(&self, other: &Mat2N) -> Result<Mat2N> {
        if self.level != other.level {
            return Err(Error::LevelMismatch(self.level, other.level));
        }
        let [a, b, c, d] = self.entries.map(|e| e as u128);
        let [e, f, g, h] = other.entries.map(|e| e as u128);
        let n = self.level as u128;
        Ok(Mat2N {
            entries: [
                ((a * e + b * g) % n) as u64,
                ((a * f + b * h) % n) as u64,
                ((c * e + d * g) % n) as u64,
                ((c * f + d * h) % n) as u64,
            ],
            level: self.level,
        })
    }

    pub fn neg(&self) -> Mat2N {
        Mat2N {
            entries: self.entries.map(|e| (self.level - e) % self.level),
            level: self.level,
        }
    }

    /// The lexicographically smaller of `M` and `-M`.
    pub fn canonical(&self) -> Mat2N {
        let n = self.neg();
        if n.entries < self.entries {
            n
        } else {
            *self
        }
    }
}

impl fmt::Display for Mat2N {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.entries;
        write!(f, "[[{a}, {b}], [{c}, {d}]]")
    }
}

/// The Siegel index `(r/N, s/N)`, stored by its numerators in `[0, N)`.
///
/// Up to the 12N-th power, `(r, s)` and `(-r, -s)` give the same value, so
/// most callers work with [`SiegelIndex::canonical`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SiegelIndex {
    pub r: u64,
    pub s: u64,
    pub level: u64,
}

impl SiegelIndex {
    pub fn new(r: i64, s: i64, level: u64) -> Result<Self> {
        check_level(level)?;
        let (r, s) = (reduce(r as i128, level), reduce(s as i128, level));
        if r == 0 && s == 0 {
            return Err(Error::ZeroIndex { level });
        }
        Ok(SiegelIndex { r, s, level })
    }

    /// `(0, 1/N)`.
    pub fn base(level: u64) -> Self {
        SiegelIndex { r: 0, s: 1, level }
    }

    pub fn neg(&self) -> Self {
        let n = self.level;
        SiegelIndex { r: (n - self.r) % n, s: (n - self.s) % n, level: n }
    }

    pub fn canonical(&self) -> Self {
        let n = self.neg();
        if (n.r, n.s) < (self.r, self.s) {
            n
        } else {
            *self
        }
    }

    pub fn is_canonical(&self) -> bool {
        self.canonical() == *self
    }

    /// The row vector product `(r, s) * M`, components reduced into `[0, N)`
    /// but without the sign normalisation.
    pub fn apply(&self, m: &Mat2N) -> Result<SiegelIndex> {
        if self.level != m.level {
            return Err(Error::LevelMismatch(self.level, m.level));
        }
        let n = self.level as u128;
        let (r, s) = (self.r as u128, self.s as u128);
        let [a, b, c, d] = m.entries.map(|e| e as u128);
        let out = SiegelIndex {
            r: ((r * a + s * c) % n) as u64,
            s: ((r * b + s * d) % n) as u64,
            level: self.level,
        };
        if out.r == 0 && out.s == 0 {
            return Err(Error::ZeroIndex { level: self.level });
        }
        Ok(out)
    }

    pub fn r1(&self) -> Rational {
        Rational::from((self.r, self.level))
    }

    pub fn r2(&self) -> Rational {
        Rational::from((self.s, self.level))
    }
}

impl fmt::Display for SiegelIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}/{}, {}/{})", self.r, self.level, self.s, self.level)
    }
}

/// Exact CM point `theta_Q = (-b + sqrt(d)) / 2a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CmPoint {
    pub a: i64,
    pub b: i64,
    pub disc: Discriminant,
}

impl CmPoint {
    pub fn re(&self) -> Rational {
        Rational::from((-self.b, 2 * self.a))
    }

    /// `Im(theta_Q)^2 = -d / 4a^2`.
    pub fn im_sq(&self) -> Rational {
        let a = self.a as i128;
        Rational::from((-(self.disc.value() as i128), 4 * a * a))
    }
}

impl fmt::Display for CmPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} + sqrt({}))/{}", -self.b, self.disc, 2 * self.a)
    }
}

pub fn theta_point(q: &QuadForm, d: Discriminant) -> CmPoint {
    CmPoint { a: q.a, b: q.b, disc: d }
}

/// Which row of the `u_p` case table applies at the prime `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UCase {
    /// `p` does not divide `a`.
    Coprime,
    /// `p | a`, `p` does not divide `c`.
    DividesA,
    /// `p | a` and `p | c`.
    DividesAC,
}

pub fn u_case(q: &QuadForm, p: u64) -> UCase {
    let p = p as i64;
    if q.a % p != 0 {
        UCase::Coprime
    } else if q.c % p != 0 {
        UCase::DividesA
    } else {
        UCase::DividesAC
    }
}

/// Integer entries of `u_p` for the given case.
pub fn u_case_entries(q: &QuadForm, d: Discriminant, case: UCase) -> Result<[i64; 4]> {
    let QuadForm { a, b, c } = *q;
    if q.discriminant() != d.value() as i128 {
        return Err(Error::InvalidArgument(format!("form {q} does not have discriminant {d}")));
    }
    if d.is_even() {
        if b % 2 != 0 {
            return Err(Error::InvalidArgument(format!("form {q} has odd b for even discriminant")));
        }
        let h = b / 2;
        Ok(match case {
            UCase::Coprime => [a, h, 0, 1],
            UCase::DividesA => [-h, -c, 1, 0],
            UCase::DividesAC => [-a - h, -c - h, 1, -1],
        })
    } else {
        Ok(match case {
            UCase::Coprime => [a, (b - 1) / 2, 0, 1],
            UCase::DividesA => [-(b + 1) / 2, -c, 1, 0],
            UCase::DividesAC => [-a - (b + 1) / 2, -c + (1 - b) / 2, 1, -1],
        })
    }
}

/// Prime factorisation by trial division, `(p, e)` pairs in increasing order.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Combine `x = r1 (mod m1)` and `x = r2 (mod m2)` for coprime moduli.
fn crt_pair(r1: u64, m1: u64, r2: u64, m2: u64) -> u64 {
    // x = r1 + m1 * k with k = (r2 - r1) * m1^{-1} mod m2
    let inv = mod_inverse(m1 % m2, m2).expect("moduli are coprime");
    let diff = (r2 as i128 - r1 as i128).rem_euclid(m2 as i128) as u128;
    let k = diff * inv as u128 % m2 as u128;
    (r1 as u128 + m1 as u128 * k) as u64
}

pub(crate) fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(0);
    }
    let (mut old_r, mut r) = (a as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    (old_r == 1).then(|| old_s.rem_euclid(m as i128) as u64)
}

/// The matrix `u_Q` reduced modulo `N`, assembled prime by prime with the
/// Chinese remainder theorem.
pub fn u_matrix(q: &QuadForm, d: Discriminant, level: u64) -> Result<Mat2N> {
    check_level(level)?;
    let mut entries = [0u64; 4];
    let mut modulus = 1u64;
    for (p, e) in factorize(level) {
        let pe = p.pow(e);
        let local = u_case_entries(q, d, u_case(q, p))?;
        for (acc, x) in entries.iter_mut().zip(local) {
            let x = reduce(x as i128, pe);
            *acc = crt_pair(*acc, modulus, x, pe);
        }
        modulus *= pe;
    }
    let m = Mat2N { entries, level };
    if !m.is_invertible() {
        return Err(Error::NonInvertible { entries, level });
    }
    Ok(m)
}

/// `W_{N,theta} / {+-1}` as canonical representatives: the identity first,
/// then the rest in lexicographic order of entries.
pub fn w_group(d: Discriminant, level: u64) -> Result<Vec<Mat2N>> {
    check_level(level)?;
    let t = theta_params(d);
    let n = level as i128;
    let (bt, ct) = (t.b_theta as i128, t.c_theta as i128 % n);
    let mut set = std::collections::BTreeSet::new();
    for s in 0..n {
        for tt in 0..n {
            let m = Mat2N {
                entries: [reduce(tt - bt * s, level), reduce(-ct * s, level), s as u64, tt as u64],
                level,
            };
            if m.is_invertible() {
                set.insert(m.canonical());
            }
        }
    }
    let id = Mat2N::identity(level).canonical();
    let mut out = Vec::with_capacity(set.len());
    if set.remove(&id) {
        out.push(id);
    }
    out.extend(set);
    Ok(out)
}

/// Canonical representative of `idx * M`.
pub fn act_on_index(idx: &SiegelIndex, m: &Mat2N) -> Result<SiegelIndex> {
    Ok(idx.apply(m)?.canonical())
}

/// One conjugate of the base value: `g_index(tau)` for `tau = theta_Q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConjugateDescriptor {
    pub index: SiegelIndex,
    pub tau: CmPoint,
    pub form: QuadForm,
    pub w_elt: Mat2N,
}

/// Every conjugate: outer loop over reduced forms, inner loop over `w_group`.
pub fn conjugate_set(d: Discriminant, level: u64) -> Result<Vec<ConjugateDescriptor>> {
    let w = w_group(d, level)?;
    let base = SiegelIndex::base(level);
    let mut out = Vec::new();
    for q in reduced_forms(d) {
        let u = u_matrix(&q, d, level)?;
        let tau = theta_point(&q, d);
        for alpha in &w {
            let index = act_on_index(&base, &alpha.mul(&u)?)?;
            out.push(ConjugateDescriptor { index, tau, form: q, w_elt: *alpha });
        }
    }
    Ok(out)
}
