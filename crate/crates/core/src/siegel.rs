//! Siegel functions at CM points.
//!
//! `g_(r1,r2)(tau) = -q_tau^(B2(r1)/2) exp(pi i r2 (r1 - 1)) (1 - q_z)
//!     prod_{n >= 1} (1 - q_tau^n q_z)(1 - q_tau^n / q_z)`
//!
//! with `q_tau = exp(2 pi i tau)`, `z = r1 tau + r2` and `q_z = exp(2 pi i z)`.
//! Indices are taken with `0 <= r1 < 1`, so every factor beyond the first
//! has modulus at most `|q_tau|^(n-1)` and the tail of the product is
//! geometric.
//!
//! All phases are exact rationals times `pi`; only moduli involve `sqrt(|d|)`.

use std::f64::consts::{LN_2, PI};

use rug::float::Constant;
use rug::{Float, Rational};

use crate::complex::BigComplex;
use crate::error::{Error, Result};
use crate::shimura::{CmPoint, SiegelIndex};

/// Extra bits carried through the truncation bound.
pub const GUARD_BITS: u32 = 32;
/// Working precision above the requested one, covering rounding in the product.
const WORK_BITS: u32 = 64;
pub const DEFAULT_PRECISION_CAP: u32 = 1 << 20;
/// Environment variable read by [`EvalConfig::from_env`].
pub const PRECISION_CAP_ENV: &str = "RAYCLASS_PRECISION_CAP";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalConfig {
    pub precision_cap: u32,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig { precision_cap: DEFAULT_PRECISION_CAP }
    }
}

impl EvalConfig {
    /// Default configuration, with the cap overridden by `RAYCLASS_PRECISION_CAP`
    /// when it holds a positive integer.
    pub fn from_env() -> Self {
        let cap = std::env::var(PRECISION_CAP_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<u32>().ok())
            .filter(|&v| v > 0)
            .unwrap_or(DEFAULT_PRECISION_CAP);
        EvalConfig { precision_cap: cap }
    }

    fn check(&self, precision: u32) -> Result<()> {
        if precision == 0 || precision > self.precision_cap {
            return Err(Error::PrecisionUnachievable { requested: precision, cap: self.precision_cap });
        }
        Ok(())
    }
}

/// Evaluate `g_index(tau)^exponent` to `precision` bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalRequest {
    pub index: SiegelIndex,
    pub tau: CmPoint,
    pub exponent: u64,
    pub precision: u32,
}

impl EvalRequest {
    pub fn new(index: SiegelIndex, tau: CmPoint, exponent: u64, precision: u32) -> Result<Self> {
        if exponent == 0 {
            return Err(Error::InvalidArgument("exponent must be positive".into()));
        }
        Ok(EvalRequest { index, tau, exponent, precision })
    }
}

/// `B2(x) = x^2 - x + 1/6`.
pub fn bernoulli2(x: &Rational) -> Rational {
    let sq = Rational::from(x * x);
    sq - x + Rational::from((1, 6))
}

/// `log2 |q_tau| = -pi sqrt(|d|) / (a ln 2)` for `tau = theta_Q`.
pub fn log2_q_abs(tau: &CmPoint) -> f64 {
    -PI * (tau.disc.abs() as f64).sqrt() / (tau.a as f64 * LN_2)
}

/// Smallest `n_max` such that the discarded factors change the logarithm of
/// the product by less than `2^-(precision + 32)`, using the bound
/// `sum_{n > n_max} 2 q^(n-1) / (1 - q) = 2 q^n_max / (1 - q)^2`.
pub fn truncation_cutoff(q_abs: f64, precision: u32) -> u32 {
    assert!(q_abs > 0.0 && q_abs < 1.0, "q_abs must lie in (0, 1), got {q_abs}");
    cutoff_from_log2(q_abs.log2(), precision)
}

pub(crate) fn cutoff_from_log2(log2_q: f64, precision: u32) -> u32 {
    assert!(log2_q < 0.0);
    let drop = -log2_q;
    let one_minus_q = if drop > 60.0 { 0.0 } else { (1.0 - log2_q.exp2()).log2() };
    // need n * drop > precision + guard + 1 - 2 log2(1 - q)
    let target = precision as f64 + GUARD_BITS as f64 + 1.0 - 2.0 * one_minus_q;
    ((target / drop).floor() as u32 + 1).max(1)
}

/// Exact and floating data shared by every index at one CM point.
struct PointData {
    /// `Re(tau)`, exact.
    x: Rational,
    /// `pi * Im(tau)` at working precision.
    pi_y: Float,
    log2_q: f64,
}

impl PointData {
    fn new(tau: &CmPoint, prec: u32) -> Self {
        let sqrt_d = Float::with_val(prec, tau.disc.abs()).sqrt();
        let pi = Float::with_val(prec, Constant::Pi);
        let pi_y = Float::with_val(prec, &pi * &sqrt_d) / (2 * tau.a);
        PointData { x: tau.re(), pi_y, log2_q: log2_q_abs(tau) }
    }

    /// `exp(-2 pi y t) * exp(i pi * 2 t x + extra)`: the value `exp(2 pi i t tau)`
    /// for a rational `t`, rotated by an extra rational phase.
    fn exp_2pi_i(&self, t: &Rational, extra: &Rational, prec: u32) -> BigComplex {
        let t_float = Float::with_val(prec, t);
        let modulus = (Float::with_val(prec, &self.pi_y * &t_float) * -2i32).exp();
        let phase = Rational::from(2 * Rational::from(t * &self.x)) + extra;
        BigComplex::from_polar_pi(&modulus, &phase, prec)
    }
}

fn eval_raw(index: &SiegelIndex, tau: &CmPoint, prec: u32, cutoff: Option<u32>) -> BigComplex {
    let point = PointData::new(tau, prec);
    let r1 = index.r1();
    let r2 = index.r2();

    // -q_tau^(B2(r1)/2) exp(pi i r2 (r1 - 1)): modulus from Im(tau), phase exact
    let half_b2 = bernoulli2(&r1) / 2;
    let lead_phase = Rational::from(&r2 * Rational::from(&r1 - 1)) + 1;
    let lead = point.exp_2pi_i(&half_b2, &lead_phase, prec);

    // q_z = exp(2 pi i (r1 tau + r2)) = exp(2 pi i r1 tau) exp(2 pi i r2)
    let two_r2 = Rational::from(2 * &r2);
    let qz = point.exp_2pi_i(&r1, &two_r2, prec);
    let qz_inv = point.exp_2pi_i(&Rational::from(-&r1), &Rational::from(-&two_r2), prec);
    let q = point.exp_2pi_i(&Rational::from(1), &Rational::new(), prec);

    let one = BigComplex::one(prec);
    let mut value = &lead * &(&one - &qz);
    let n_max = cutoff.unwrap_or_else(|| cutoff_from_log2(point.log2_q, prec));
    let mut qn = q.clone();
    for n in 1..=n_max {
        let a = &one - &(&qn * &qz);
        let b = &one - &(&qn * &qz_inv);
        value = &value * &(&a * &b);
        if n < n_max {
            qn = &qn * &q;
        }
    }
    value
}

/// `q_tau = exp(2 pi i tau)` at `prec` bits.
pub fn q_tau(tau: &CmPoint, prec: u32) -> BigComplex {
    PointData::new(tau, prec).exp_2pi_i(&Rational::from(1), &Rational::new(), prec)
}

/// `g_index(tau)` with relative error below `2^-precision`. The result
/// carries a few bits more than requested.
pub fn siegel_eval(req: &EvalRequest, cfg: &EvalConfig) -> Result<BigComplex> {
    if req.exponent != 1 {
        return Err(Error::InvalidArgument(format!(
            "siegel_eval takes exponent 1, got {}; use siegel_power",
            req.exponent
        )));
    }
    cfg.check(req.precision)?;
    let work = req.precision + WORK_BITS;
    Ok(eval_raw(&req.index, &req.tau, work, None).with_prec(req.precision + 8))
}

/// Like [`siegel_eval`] but with the product cut at a caller-chosen `n_max`
/// and no output rounding. Used to test truncation stability.
pub fn siegel_eval_with_cutoff(index: &SiegelIndex, tau: &CmPoint, prec: u32, n_max: u32) -> BigComplex {
    eval_raw(index, tau, prec, Some(n_max))
}

fn bit_length(x: u64) -> u32 {
    64 - x.leading_zeros()
}

/// `g_index(tau)^exponent` with relative error below `2^-precision`. The
/// base is evaluated with `log2(exponent)` extra bits so that the relative
/// error growth through the power stays inside the guard.
pub fn siegel_power(req: &EvalRequest, cfg: &EvalConfig) -> Result<BigComplex> {
    cfg.check(req.precision)?;
    if req.exponent == 0 {
        return Err(Error::InvalidArgument("exponent must be positive".into()));
    }
    let work = req.precision + WORK_BITS + 2 * bit_length(req.exponent);
    let base = eval_raw(&req.index, &req.tau, work, None);
    Ok(base.pow_u64(req.exponent).with_prec(req.precision + 8))
}
