//! Numeric verification of the inequalities that force the base value to be
//! fixed only by the identity of `Gal(K_(N) / K)`.
//!
//! Scalar bounds (parts (i) to (vi)) are scanned over finite grids at 128
//! bits. The comparison lemmas evaluate Siegel functions directly and check
//! `|g_(0,1/N)(theta)| < |g_(r/N,s/N)(theta_Q)|` over the whole index domain.
//!
//! A sample counts as passing only when its margin exceeds `2^8` times the
//! evaluation error bound.

use std::fmt;

use rayon::prelude::*;
use rug::float::Constant;
use rug::{Float, Rational};
use serde::Serialize;

use crate::cmfield::Discriminant;
use crate::error::{Error, Result};
use crate::quadforms::{reduced_forms, unit_form, QuadForm};
use crate::shimura::{check_level, theta_point, SiegelIndex};
use crate::siegel::{siegel_eval, EvalConfig, EvalRequest};

pub const SCAN_PRECISION: u32 = 128;
/// Evaluation error bound, relative, for a handful of correctly rounded ops.
const NOISE_LOG2: i32 = -(SCAN_PRECISION as i32) + 8;
/// A margin must exceed `2^8` times the error bound.
const SAFETY_LOG2: i32 = 8;

pub const DEFAULT_NMAX: u64 = 10_000;
/// Parts (ii) and (iii) scan every `s` for each `N`, so their default range is shorter.
pub const DEFAULT_NMAX_QUADRATIC: u64 = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Lemma31Part {
    I,
    II,
    III,
    IV,
    V,
    VI,
}

impl Lemma31Part {
    pub const ALL: [Lemma31Part; 6] =
        [Lemma31Part::I, Lemma31Part::II, Lemma31Part::III, Lemma31Part::IV, Lemma31Part::V, Lemma31Part::VI];

    fn roman(self) -> &'static str {
        match self {
            Lemma31Part::I => "i",
            Lemma31Part::II => "ii",
            Lemma31Part::III => "iii",
            Lemma31Part::IV => "iv",
            Lemma31Part::V => "v",
            Lemma31Part::VI => "vi",
        }
    }

    /// Smallest level the part applies to.
    pub fn min_level(self) -> u64 {
        match self {
            Lemma31Part::I => 21,
            Lemma31Part::III => 4,
            _ => 2,
        }
    }

    /// Whether the inequality is strict; (ii) and (iii) attain equality.
    pub fn is_strict(self) -> bool {
        !matches!(self, Lemma31Part::II | Lemma31Part::III)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Comparison {
    /// Forms with `a >= 2`, every nonzero `(r, s)`.
    L32,
    /// The principal form, `r != 0 (mod N)`.
    L33,
    /// The principal form, `r = 0`, `s != 0, +-1 (mod N)`.
    L34,
}

impl Comparison {
    pub const ALL: [Comparison; 3] = [Comparison::L32, Comparison::L33, Comparison::L34];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(into = "String")]
pub enum LemmaId {
    Scalar(Lemma31Part),
    Comparison(Comparison),
}

impl fmt::Display for LemmaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LemmaId::Scalar(p) => write!(f, "3.1({})", p.roman()),
            LemmaId::Comparison(Comparison::L32) => f.write_str("3.2"),
            LemmaId::Comparison(Comparison::L33) => f.write_str("3.3"),
            LemmaId::Comparison(Comparison::L34) => f.write_str("3.4"),
        }
    }
}

impl From<LemmaId> for String {
    fn from(id: LemmaId) -> String {
        id.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaReport {
    pub lemma: LemmaId,
    /// Human-readable description of the scanned parameters.
    pub range: String,
    /// Smallest `bound - value` over the scan (relative where noted in `range`).
    pub worst_margin: f64,
    /// Parameters at which `worst_margin` occurs.
    pub worst_at: String,
    pub pass: bool,
    pub samples: usize,
    pub strict: bool,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lemma31Params {
    pub n_min: u64,
    pub n_max: u64,
    pub discriminants: Vec<Discriminant>,
    /// Grid of `X >= 1/2` for parts (v) and (vi), exact.
    pub x_grid: Vec<Rational>,
}

impl Lemma31Params {
    /// The default scan for `part`: `N` from its hypothesis up to `10^4`
    /// (`500` for (ii) and (iii)); `X` in `{0.50, 0.51, ..., 10.00}`.
    pub fn default_for(part: Lemma31Part, discriminants: Vec<Discriminant>) -> Self {
        let n_max = match part {
            Lemma31Part::II | Lemma31Part::III => DEFAULT_NMAX_QUADRATIC,
            _ => DEFAULT_NMAX,
        };
        Lemma31Params {
            n_min: part.min_level(),
            n_max,
            discriminants,
            x_grid: (50..=1000).map(|k| Rational::from((k, 100))).collect(),
        }
    }
}

struct Sample {
    label: String,
    /// `bound - value`, or a relative version of it.
    margin: Float,
    /// Error bound on `margin`.
    noise: Float,
}

impl Sample {
    fn new(label: String, bound: Float, value: Float) -> Sample {
        let scale = Float::with_val(SCAN_PRECISION, bound.abs_ref()).max(&Float::with_val(SCAN_PRECISION, value.abs_ref()));
        let noise = scale * Float::with_val(SCAN_PRECISION, Float::i_exp(1, NOISE_LOG2));
        Sample { label, margin: bound - value, noise }
    }
}

fn f(x: impl Into<f64>) -> Float {
    Float::with_val(SCAN_PRECISION, x.into())
}

fn pi() -> Float {
    Float::with_val(SCAN_PRECISION, Constant::Pi)
}

fn safe(margin: &Float, noise: &Float, strict: bool) -> bool {
    let threshold = Float::with_val(SCAN_PRECISION, noise << SAFETY_LOG2);
    if strict {
        *margin > threshold
    } else {
        *margin >= -threshold
    }
}

fn summarize(lemma: LemmaId, range: String, strict: bool, samples: Vec<Sample>, note: Option<String>) -> LemmaReport {
    let count = samples.len();
    let mut pass = true;
    let mut worst: Option<Sample> = None;
    for s in samples {
        pass &= safe(&s.margin, &s.noise, strict);
        if worst.as_ref().is_none_or(|w| s.margin < w.margin) {
            worst = Some(s);
        }
    }
    let (worst_margin, worst_at) = match worst {
        Some(w) => (w.margin.to_f64(), w.label),
        None => (f64::INFINITY, "empty domain".to_string()),
    };
    LemmaReport { lemma, range, worst_margin, worst_at, pass, samples: count, strict, note }
}

/// `|1 - zeta_N| = 2 sin(pi / N)`.
fn chord(n: u64) -> Float {
    let x = Float::with_val(SCAN_PRECISION + 8, Rational::from((1, n)));
    Float::with_val(SCAN_PRECISION, x.sin_pi_ref()) * 2u32
}

fn lemma31_i(n: u64) -> Float {
    // B^(1/(DN)) = exp(-sqrt(3) pi / N)
    let e = (f(3).sqrt() * pi() / n as f64).neg_exp();
    chord(n) / (f(1) - e)
}

fn lemma31_iv(n: u64) -> Float {
    let s7pi = f(7).sqrt() * pi();
    let nn = Rational::from((1, n)) - Rational::from((1, n * n));
    let lead = (Float::with_val(SCAN_PRECISION, &s7pi * &nn) / 2u32).neg_exp();
    let denom = f(1) - (s7pi / n as f64).neg_exp();
    lead * chord(n) / denom
}

trait NegExp {
    fn neg_exp(self) -> Float;
}

impl NegExp for Float {
    fn neg_exp(self) -> Float {
        (-self).exp()
    }
}

/// Check one part of the scalar bounds over `params`.
pub fn lemma31_check(part: Lemma31Part, params: &Lemma31Params) -> Result<LemmaReport> {
    let id = LemmaId::Scalar(part);
    let needs_levels = !matches!(part, Lemma31Part::V | Lemma31Part::VI);
    if needs_levels && (params.n_min < part.min_level() || params.n_max < params.n_min) {
        return Err(Error::InvalidArgument(format!(
            "part ({}) needs {} <= n_min <= n_max, got [{}, {}]",
            part.roman(),
            part.min_level(),
            params.n_min,
            params.n_max
        )));
    }
    let levels: Vec<u64> = (params.n_min..=params.n_max).collect();
    let range = format!("N in [{}, {}]", params.n_min, params.n_max);
    match part {
        Lemma31Part::I => {
            let values: Vec<Float> = levels.par_iter().map(|&n| lemma31_i(n)).collect();
            let samples = levels
                .iter()
                .zip(&values)
                .map(|(n, v)| Sample::new(format!("N={n}"), f(1.306), v.clone()))
                .collect();
            let mut note = None;
            let decreasing = values.windows(2).all(|w| w[1] < w[0]);
            if !decreasing {
                note = Some("not decreasing over the scanned levels".into());
            }
            let mut report = summarize(id, range, true, samples, note);
            report.pass &= decreasing;
            Ok(report)
        }
        Lemma31Part::II | Lemma31Part::III => {
            let samples: Vec<Sample> = levels
                .par_iter()
                .flat_map_iter(|&n| {
                    let s_range = if part == Lemma31Part::II { 1..=n - 1 } else { 2..=n / 2 };
                    let bound = if part == Lemma31Part::II { f(1) } else { f(0.5).sqrt() };
                    let top = chord(n);
                    s_range.map(move |s| {
                        let x = Float::with_val(SCAN_PRECISION + 8, Rational::from((s, n)));
                        let bottom = Float::with_val(SCAN_PRECISION, x.sin_pi_ref()).abs() * 2u32;
                        Sample::new(format!("N={n}, s={s}"), bound.clone(), Float::with_val(SCAN_PRECISION, &top / &bottom))
                    })
                })
                .collect();
            Ok(summarize(id, range, false, samples, None))
        }
        Lemma31Part::IV => {
            let samples = levels
                .par_iter()
                .map(|&n| Sample::new(format!("N={n}"), f(0.76), lemma31_iv(n)))
                .collect();
            Ok(summarize(id, range, true, samples, None))
        }
        Lemma31Part::V | Lemma31Part::VI => {
            if params.discriminants.is_empty() {
                return Err(Error::InvalidArgument("parts (v) and (vi) need at least one discriminant".into()));
            }
            if let Some(x) = params.x_grid.iter().find(|x| **x < Rational::from((1, 2))) {
                return Err(Error::InvalidArgument(format!("X = {x} is below 1/2")));
            }
            let grid: Vec<(Discriminant, &Rational)> = params
                .discriminants
                .iter()
                .flat_map(|d| params.x_grid.iter().map(move |x| (*d, x)))
                .collect();
            let samples = grid
                .par_iter()
                .map(|&(d, x)| lemma31_v_vi(part, d, x))
                .collect();
            let range = format!(
                "d in {:?}, X in [{}, {}] ({} points); relative margin",
                params.discriminants.iter().map(|d| d.value()).collect::<Vec<_>>(),
                params.x_grid.first().map(|x| x.to_f64()).unwrap_or(0.0),
                params.x_grid.last().map(|x| x.to_f64()).unwrap_or(0.0),
                params.x_grid.len()
            );
            Ok(summarize(id, range, true, samples, None))
        }
    }
}

/// `1 / (1 - u) < 1 + w` rewritten as `u / (1 - u) < w`, with
/// `u = B^y`, `w = B^(y / 1.03)`, `y = X / D` for (v) and `y = X` for (vi).
/// The margin is `1 - (u / (1 - u)) / w`, free of cancellation.
fn lemma31_v_vi(part: Lemma31Part, d: Discriminant, x: &Rational) -> Sample {
    let abs_d = f(d.abs() as f64);
    let log_b = -(pi() * abs_d.clone().sqrt());
    let y = match part {
        Lemma31Part::V => Float::with_val(SCAN_PRECISION, x) / (abs_d / 3u32).sqrt(),
        _ => Float::with_val(SCAN_PRECISION, x),
    };
    let u = Float::with_val(SCAN_PRECISION, &log_b * &y).exp();
    let w = (log_b * y / f(1.03)).exp();
    let lhs = Float::with_val(SCAN_PRECISION, &u / (f(1) - &u));
    let ratio = lhs / w;
    let label = format!("d={}, X={}", d, x.to_f64());
    let noise = Float::with_val(SCAN_PRECISION, Float::i_exp(1, NOISE_LOG2));
    Sample { label, margin: f(1) - ratio, noise }
}

/// Directly compare `|g_(0,1/N)(theta)|` with `|g_(r/N,s/N)(theta_Q)|` over the
/// domain of the chosen lemma at 128 bits.
pub fn lemma_comparison_scan(d: Discriminant, level: u64, which: Comparison, cfg: &EvalConfig) -> Result<LemmaReport> {
    check_level(level)?;
    let id = LemmaId::Comparison(which);
    let unit = unit_form(d);
    let mut note = None;
    let (forms, range): (Vec<QuadForm>, String) = match which {
        Comparison::L32 => {
            if level < 21 {
                note = Some(format!("N = {level} < 21: outside the lemma's hypothesis, checked as a finite case"));
            }
            let forms: Vec<_> = reduced_forms(d).into_iter().filter(|q| q.a >= 2).collect();
            (forms, format!("d={d}, N={level}, forms with a>=2, (r,s) != (0,0) mod N; relative margin"))
        }
        Comparison::L33 => (vec![unit], format!("d={d}, N={level}, Q={unit}, r != 0 mod N; relative margin")),
        Comparison::L34 => (vec![unit], format!("d={d}, N={level}, Q={unit}, r=0, s != 0,+-1 mod N; relative margin")),
    };
    if which == Comparison::L32 && forms.is_empty() {
        let note = Some(format!("skipped: no reduced form of discriminant {d} has a >= 2"));
        return Ok(summarize(id, range, true, Vec::new(), note));
    }

    let mut points = Vec::new();
    for q in &forms {
        for r in 0..level {
            for s in 0..level {
                let keep = match which {
                    Comparison::L32 => r != 0 || s != 0,
                    Comparison::L33 => r != 0,
                    Comparison::L34 => r == 0 && s != 0 && s != 1 && s != level - 1,
                };
                if keep {
                    points.push((*q, r, s));
                }
            }
        }
    }
    if points.is_empty() && note.is_none() {
        note = Some("empty index domain".into());
    }

    let theta = theta_point(&unit, d);
    let base_req = EvalRequest::new(SiegelIndex::base(level), theta, 1, SCAN_PRECISION)?;
    let base = siegel_eval(&base_req, cfg)?.abs();
    let samples: Vec<Sample> = points
        .par_iter()
        .map(|&(q, r, s)| {
            let idx = SiegelIndex::new(r as i64, s as i64, level)?;
            let req = EvalRequest::new(idx, theta_point(&q, d), 1, SCAN_PRECISION)?;
            let cand = siegel_eval(&req, cfg)?.abs();
            let ratio = Float::with_val(SCAN_PRECISION, &base / &cand);
            let noise = Float::with_val(SCAN_PRECISION, Float::i_exp(1, NOISE_LOG2));
            Ok(Sample { label: format!("Q={q}, (r,s)=({r},{s})"), margin: f(1) - ratio, noise })
        })
        .collect::<Result<_>>()?;
    Ok(summarize(id, range, true, samples, note))
}
