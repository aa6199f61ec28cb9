//! Class polynomials of `g_(0,1/N)(theta)^e` and their certification.
//!
//! The polynomial is the product of `X - v` over every conjugate value `v`,
//! formed by a balanced product tree over big-float complex coefficients and
//! then rounded to integers. A result is accepted only when every
//! coefficient lies within tolerance of an integer, every imaginary part is
//! within tolerance of zero, and two successive precisions agree exactly.

use std::fmt;

use rayon::prelude::*;
use rug::{Float, Integer};
use serde::{Deserialize, Serialize};

use crate::cmfield::Discriminant;
use crate::complex::BigComplex;
use crate::error::{Error, Result};
use crate::quadforms::{class_number, gcd};
use crate::shimura::{check_level, conjugate_set, w_group, ConjugateDescriptor, SiegelIndex};
use crate::siegel::{bernoulli2, log2_q_abs, siegel_eval, siegel_power, EvalConfig, EvalRequest};

pub const DEFAULT_TOLERANCE: f64 = 1e-10;

/// Which power of the Siegel function is used: `12N` or `12N / gcd(6, N)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExponentMode {
    Full,
    Reduced,
}

impl ExponentMode {
    pub fn exponent(self, level: u64) -> u64 {
        match self {
            ExponentMode::Full => 12 * level,
            ExponentMode::Reduced => 12 * level / gcd(6, level),
        }
    }
}

impl fmt::Display for ExponentMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExponentMode::Full => "full",
            ExponentMode::Reduced => "reduced",
        })
    }
}

impl std::str::FromStr for ExponentMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(ExponentMode::Full),
            "reduced" => Ok(ExponentMode::Reduced),
            _ => Err(Error::InvalidArgument(format!("unknown exponent mode {s:?}"))),
        }
    }
}

/// Range of `(N, d)` for which the generator property is established.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Region {
    /// `N >= 21`, any `d <= -7`.
    MainTheorem,
    /// `N = 2, d <= -43`; `N = 3, d <= -39`; `N >= 4, d <= -31`.
    Extended,
    /// `N = 2, -40 <= d <= -7`; `N = 3, -35 <= d <= -7`; `4 <= N <= 20, -24 <= d <= -7`.
    FiniteCase,
    Unknown,
}

impl Region {
    pub fn classify(d: Discriminant, level: u64) -> Region {
        let d = d.value();
        if d > -7 {
            return Region::Unknown;
        }
        if level >= 21 {
            return Region::MainTheorem;
        }
        let extended = match level {
            2 => d <= -43,
            3 => d <= -39,
            4.. => d <= -31,
            _ => false,
        };
        if extended {
            return Region::Extended;
        }
        let finite = match level {
            2 => d >= -40,
            3 => d >= -35,
            4..=20 => d >= -24,
            _ => false,
        };
        if finite {
            Region::FiniteCase
        } else {
            Region::Unknown
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Region::MainTheorem => "main-theorem",
            Region::Extended => "extended",
            Region::FiniteCase => "finite-case",
            Region::Unknown => "unknown",
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolyMeta {
    pub disc: Discriminant,
    pub level: u64,
    pub mode: ExponentMode,
    /// Exponent `e` of the mode; the roots are `g^(e * power)`.
    pub exponent: u64,
    pub power: u64,
    pub precision_bits: u32,
    pub max_rounding_residual: f64,
    pub max_imaginary_residual: f64,
    pub region: Region,
}

/// Monic integer polynomial, coefficients stored leading first.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassPolynomial {
    pub coefficients: Vec<Integer>,
    pub meta: PolyMeta,
}

impl ClassPolynomial {
    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn constant_term(&self) -> &Integer {
        self.coefficients.last().expect("nonempty")
    }

    /// `P(x)` by Horner's rule at the precision of `x`.
    pub fn eval(&self, x: &BigComplex) -> BigComplex {
        let prec = x.prec();
        let mut acc = BigComplex::zero(prec);
        for c in &self.coefficients {
            acc = &acc * x;
            acc.re += c;
        }
        acc
    }
}

impl fmt::Display for ClassPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let deg = self.degree();
        let mut first = true;
        for (i, c) in self.coefficients.iter().enumerate() {
            if *c == 0 {
                continue;
            }
            let power = deg - i;
            let sign = if *c < 0 { "-" } else if first { "" } else { "+" };
            let mag = Integer::from(c.abs_ref());
            let coef = if mag == 1 && power > 0 { String::new() } else { mag.to_string() };
            let var = match power {
                0 => String::new(),
                1 => "X".to_string(),
                p => format!("X^{p}"),
            };
            if !first {
                f.write_str(" ")?;
            }
            write!(f, "{sign}{}{coef}{var}", if first || sign.is_empty() { "" } else { " " })?;
            first = false;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassPolyConfig {
    pub tolerance: f64,
    pub eval: EvalConfig,
}

impl Default for ClassPolyConfig {
    fn default() -> Self {
        ClassPolyConfig { tolerance: DEFAULT_TOLERANCE, eval: EvalConfig::default() }
    }
}

/// Result of rounding a list of complex coefficients to integers.
#[derive(Debug, Clone, PartialEq)]
pub struct Rounded {
    pub integers: Vec<Integer>,
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub max_imaginary: f64,
}

/// Round real parts to the nearest integer; fail when a residual or an
/// imaginary part reaches `tol`.
pub fn integrality_round(coeffs: &[BigComplex], tol: f64) -> Result<Rounded> {
    let mut integers = Vec::with_capacity(coeffs.len());
    let mut residuals = Vec::with_capacity(coeffs.len());
    let mut max_residual = 0f64;
    let mut max_imaginary = 0f64;
    for (index, c) in coeffs.iter().enumerate() {
        let nearest = Float::with_val(c.re.prec(), c.re.round_ref());
        let residual = Float::with_val(c.re.prec(), &c.re - &nearest).abs().to_f64();
        let imaginary = c.im.to_f64().abs();
        if !(residual < tol) || !(imaginary < tol) {
            return Err(Error::IntegralityFailure { index, residual, imaginary });
        }
        integers.push(nearest.to_integer().expect("finite"));
        residuals.push(residual);
        max_residual = max_residual.max(residual);
        max_imaginary = max_imaginary.max(imaginary);
    }
    Ok(Rounded { integers, residuals, max_residual, max_imaginary })
}

pub fn is_unit(p: &ClassPolynomial) -> bool {
    let c = p.constant_term();
    *c == 1 || *c == -1
}

fn poly_mul(a: &[BigComplex], b: &[BigComplex]) -> Vec<BigComplex> {
    let prec = a[0].prec().max(b[0].prec());
    let mut out = vec![BigComplex::zero(prec); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = &out[i + j] + &(x * y);
        }
    }
    out
}

fn tree_product(factors: &[Vec<BigComplex>]) -> Vec<BigComplex> {
    match factors.len() {
        0 => unreachable!("empty product"),
        1 => factors[0].clone(),
        n => {
            let (left, right) = factors.split_at(n / 2);
            let (l, r) = rayon::join(|| tree_product(left), || tree_product(right));
            poly_mul(&l, &r)
        }
    }
}

/// `prod (X - r)` with coefficients lowest degree first.
pub fn product_from_roots(roots: &[BigComplex]) -> Vec<BigComplex> {
    if roots.is_empty() {
        return vec![BigComplex::one(64)];
    }
    let factors: Vec<Vec<BigComplex>> = roots
        .iter()
        .map(|r| vec![-r.clone(), BigComplex::one(r.prec())])
        .collect();
    tree_product(&factors)
}

/// Values `g_index(theta_Q)^exponent` for every descriptor, in order.
pub fn conjugate_values(
    conjugates: &[ConjugateDescriptor],
    exponent: u64,
    precision: u32,
    cfg: &EvalConfig,
) -> Result<Vec<BigComplex>> {
    conjugates
        .par_iter()
        .map(|c| siegel_power(&EvalRequest::new(c.index, c.tau, exponent, precision)?, cfg))
        .collect()
}

/// Upper bound on `log2 |g_index(theta_Q)|`: leading `q`-power plus one bit
/// for `|1 - q_z| <= 2` and a little for the product.
fn log2_root_bound(c: &ConjugateDescriptor) -> f64 {
    let half_b2 = bernoulli2(&c.index.r1()).to_f64() / 2.0;
    half_b2 * log2_q_abs(&c.tau) + 1.2
}

/// `log2 |g_index(theta_Q)|` from a 64-bit evaluation, or the bound above if
/// that is unavailable.
fn log2_root_estimate(c: &ConjugateDescriptor) -> f64 {
    EvalRequest::new(c.index, c.tau, 1, 64)
        .and_then(|req| siegel_eval(&req, &EvalConfig::default()))
        .map(|v| v.log2_abs())
        .ok()
        .filter(|x| x.is_finite())
        .unwrap_or_else(|| log2_root_bound(c))
}

/// Starting precision: enough bits to resolve the largest possible
/// coefficient, `2^(sum of positive log2 |root|) * 2^degree`, with margin.
pub fn initial_precision(conjugates: &[ConjugateDescriptor], exponent: u64) -> u32 {
    let magnitude: f64 = conjugates
        .par_iter()
        .map(|c| (log2_root_estimate(c) * exponent as f64).max(0.0))
        .sum();
    let bits = 1.25 * (magnitude + conjugates.len() as f64 + 64.0);
    let bits = (bits.ceil() as u32).max(256);
    bits.div_ceil(64) * 64
}

fn round_at(
    conjugates: &[ConjugateDescriptor],
    mode_exponent: u64,
    power: u64,
    precision: u32,
    cfg: &ClassPolyConfig,
) -> Result<Rounded> {
    let extra = 64 - power.leading_zeros();
    let mut values = conjugate_values(conjugates, mode_exponent, precision + extra, &cfg.eval)?;
    if power > 1 {
        values = values.par_iter().map(|v| v.pow_u64(power)).collect();
    }
    let mut coeffs = product_from_roots(&values);
    coeffs.reverse();
    integrality_round(&coeffs, cfg.tolerance)
}

/// Build and certify the class polynomial of `g_(0,1/N)(theta)^(e n)` where
/// `e` is given by `mode`.
///
/// Starts at `precision` (or [`initial_precision`]) and doubles until two
/// successive precisions round to identical integers within tolerance.
pub fn class_polynomial(
    d: Discriminant,
    level: u64,
    mode: ExponentMode,
    power: u64,
    precision: Option<u32>,
    cfg: &ClassPolyConfig,
) -> Result<ClassPolynomial> {
    check_level(level)?;
    if power == 0 {
        return Err(Error::InvalidArgument("power must be positive".into()));
    }
    let exponent = mode.exponent(level);
    let conjugates = conjugate_set(d, level)?;
    let expected_degree = class_number(d) * w_group(d, level)?.len();
    assert_eq!(conjugates.len(), expected_degree, "degree law");

    let cap = cfg.eval.precision_cap;
    let mut prec = precision.unwrap_or_else(|| initial_precision(&conjugates, exponent * power));
    let mut previous: Option<Rounded> = None;
    while prec <= cap {
        match round_at(&conjugates, exponent, power, prec, cfg) {
            Ok(rounded) => {
                if let Some(prev) = &previous {
                    if prev.integers == rounded.integers {
                        return Ok(ClassPolynomial {
                            coefficients: rounded.integers,
                            meta: PolyMeta {
                                disc: d,
                                level,
                                mode,
                                exponent,
                                power,
                                precision_bits: prec,
                                max_rounding_residual: rounded.max_residual,
                                max_imaginary_residual: rounded.max_imaginary,
                                region: Region::classify(d, level),
                            },
                        });
                    }
                }
                previous = Some(rounded);
            }
            Err(Error::IntegralityFailure { .. }) => previous = None,
            Err(e) => return Err(e),
        }
        prec = match prec.checked_mul(2) {
            Some(p) => p,
            None => break,
        };
    }
    Err(Error::PrecisionExhausted { cap })
}

/// `log2(|P(x)| / max |coefficient|)`.
pub fn root_residual_log2(p: &ClassPolynomial, x: &BigComplex) -> f64 {
    let value = p.eval(x).log2_abs();
    let max_coeff = p
        .coefficients
        .iter()
        .map(|c| Integer::from(c.abs_ref()))
        .max()
        .expect("nonempty");
    value - Float::with_val(64, &max_coeff).log2().to_f64()
}

/// The base value `g_(0,1/N)(theta)^exponent`.
pub fn base_value(d: Discriminant, level: u64, exponent: u64, precision: u32, cfg: &EvalConfig) -> Result<BigComplex> {
    check_level(level)?;
    let tau = crate::shimura::theta_point(&crate::quadforms::unit_form(d), d);
    siegel_power(&EvalRequest::new(SiegelIndex::base(level), tau, exponent, precision)?, cfg)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorReport {
    pub disc: Discriminant,
    pub level: u64,
    pub exponent: u64,
    pub count: usize,
    /// `log2` of the smallest pairwise distance; `+inf` for a single value.
    pub min_gap_log2: f64,
    pub closest_pair: Option<(usize, usize)>,
    pub threshold_log2: f64,
    pub region: Region,
}

/// Evaluate every conjugate at the reduced exponent and check that they are
/// pairwise separated by more than `2^(-precision/2)`.
pub fn verify_generator(d: Discriminant, level: u64, precision: u32, cfg: &EvalConfig) -> Result<GeneratorReport> {
    check_level(level)?;
    let exponent = ExponentMode::Reduced.exponent(level);
    let conjugates = conjugate_set(d, level)?;
    let values = conjugate_values(&conjugates, exponent, precision, cfg)?;
    let threshold_log2 = -(precision as f64) / 2.0;
    let mut min_gap_log2 = f64::INFINITY;
    let mut closest_pair = None;
    for i in 0..values.len() {
        for j in i + 1..values.len() {
            let gap = (&values[i] - &values[j]).log2_abs();
            if gap < min_gap_log2 {
                min_gap_log2 = gap;
                closest_pair = Some((i, j));
            }
        }
    }
    if let Some((first, second)) = closest_pair {
        if min_gap_log2 <= threshold_log2 {
            return Err(Error::SeparationFailure { first, second, gap_log2: min_gap_log2, threshold_log2 });
        }
    }
    Ok(GeneratorReport {
        disc: d,
        level,
        exponent,
        count: values.len(),
        min_gap_log2,
        closest_pair,
        threshold_log2,
        region: Region::classify(d, level),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmfield::validate_discriminant;

    fn disc(d: i64) -> Discriminant {
        validate_discriminant(d).unwrap()
    }

    fn c(re: f64, im: f64) -> BigComplex {
        BigComplex::new(Float::with_val(128, re), Float::with_val(128, im))
    }

    #[test]
    fn exponents() {
        assert_eq!(ExponentMode::Full.exponent(6), 72);
        assert_eq!(ExponentMode::Reduced.exponent(6), 12);
        assert_eq!(ExponentMode::Reduced.exponent(5), 60);
        assert_eq!(ExponentMode::Reduced.exponent(4), 24);
        assert_eq!(ExponentMode::Reduced.exponent(21), 84);
        assert_eq!("reduced".parse::<ExponentMode>().unwrap(), ExponentMode::Reduced);
        assert!("half".parse::<ExponentMode>().is_err());
    }

    #[test]
    fn regions() {
        assert_eq!(Region::classify(disc(-7), 21), Region::MainTheorem);
        assert_eq!(Region::classify(disc(-40), 6), Region::Extended);
        assert_eq!(Region::classify(disc(-31), 4), Region::Extended);
        assert_eq!(Region::classify(disc(-43), 2), Region::Extended);
        assert_eq!(Region::classify(disc(-40), 2), Region::FiniteCase);
        assert_eq!(Region::classify(disc(-23), 5), Region::FiniteCase);
        assert_eq!(Region::classify(disc(-35), 3), Region::FiniteCase);
        // every fundamental discriminant falls in some region
        for d in (-400..=-7).filter(|&d| crate::cmfield::is_fundamental(d)) {
            for n in 2..=30 {
                assert_ne!(Region::classify(disc(d), n), Region::Unknown, "({d}, {n})");
            }
        }
    }

    #[test]
    fn rounding() {
        let r = integrality_round(&[c(1.0, 0.0), c(20559.999999999999, 1e-13)], 1e-10).unwrap();
        assert_eq!(r.integers, vec![Integer::from(1), Integer::from(20560)]);
        assert!(r.max_residual < 1e-10);
        let r = integrality_round(&[c(-7.0, 0.0), c(3.0, 0.0)], 1e-10).unwrap();
        assert_eq!(r.integers, vec![Integer::from(-7), Integer::from(3)]);
        assert_eq!(r.max_residual, 0.0);
        assert!(matches!(integrality_round(&[c(0.5, 0.0)], 1e-10), Err(Error::IntegralityFailure { index: 0, .. })));
        assert!(matches!(integrality_round(&[c(2.0, 1e-3)], 1e-10), Err(Error::IntegralityFailure { .. })));
    }

    fn poly(coeffs: &[i64]) -> ClassPolynomial {
        ClassPolynomial {
            coefficients: coeffs.iter().map(|&x| Integer::from(x)).collect(),
            meta: PolyMeta {
                disc: disc(-7),
                level: 2,
                mode: ExponentMode::Full,
                exponent: 24,
                power: 1,
                precision_bits: 64,
                max_rounding_residual: 0.0,
                max_imaginary_residual: 0.0,
                region: Region::FiniteCase,
            },
        }
    }

    #[test]
    fn unit_test_on_constant_term() {
        assert!(!is_unit(&poly(&[1, -2])));
        assert!(is_unit(&poly(&[1, 1])));
        assert!(is_unit(&poly(&[1, 5, -1])));
    }

    #[test]
    fn display() {
        assert_eq!(poly(&[1, 20560, 0, -1]).to_string(), "X^3 + 20560X^2 - 1");
        assert_eq!(poly(&[1, -1]).to_string(), "X - 1");
    }

    #[test]
    fn tree_matches_sequential_expansion() {
        let roots: Vec<_> = (0..11).map(|i| c(i as f64 - 3.5, (i % 3) as f64)).collect();
        let tree = product_from_roots(&roots);
        let mut seq = vec![BigComplex::one(128)];
        for r in &roots {
            let mut next = vec![BigComplex::zero(128); seq.len() + 1];
            for (i, a) in seq.iter().enumerate() {
                next[i + 1] = &next[i + 1] + a;
                next[i] = &next[i] - &(a * r);
            }
            seq = next;
        }
        assert_eq!(tree.len(), 12);
        for (a, b) in tree.iter().zip(&seq) {
            assert!((a - b).log2_abs() < -80.0 || (a - b).is_zero());
        }
    }

    #[test]
    fn single_conjugate_case() {
        // d = -7, N = 2: W is trivial and h = 1
        let p = class_polynomial(disc(-7), 2, ExponentMode::Reduced, 1, None, &ClassPolyConfig::default()).unwrap();
        assert_eq!(p.degree(), 1);
        let r = verify_generator(disc(-7), 2, 128, &EvalConfig::default()).unwrap();
        assert_eq!(r.count, 1);
        assert!(r.closest_pair.is_none());
    }

    #[test]
    fn example_leading_coefficients() {
        let p = class_polynomial(disc(-40), 6, ExponentMode::Reduced, 1, None, &ClassPolyConfig::default()).unwrap();
        assert_eq!(p.degree(), 16);
        assert_eq!(p.coefficients[0], 1);
        assert_eq!(p.coefficients[1], 20560);
        assert_eq!(*p.constant_term(), 1);
        assert!(p.meta.precision_bits <= 1024);
    }

    #[test]
    fn power_two_roots_are_squares() {
        let cfg = ClassPolyConfig::default();
        let p1 = class_polynomial(disc(-8), 3, ExponentMode::Reduced, 1, None, &cfg).unwrap();
        let p2 = class_polynomial(disc(-8), 3, ExponentMode::Reduced, 2, None, &cfg).unwrap();
        assert_eq!(p1.degree(), p2.degree());
        // for a monic P with roots v_i, the polynomial with roots v_i^2 is
        // (-1)^deg P(X) P(-X) in X^2; check constant terms: prod v_i^2
        let c1 = p1.constant_term().clone();
        assert_eq!(*p2.constant_term(), Integer::from(&c1 * &c1));
        let base = base_value(disc(-8), 3, 2 * ExponentMode::Reduced.exponent(3), 512, &cfg.eval).unwrap();
        assert!(root_residual_log2(&p2, &base) < -64.0);
    }
}
