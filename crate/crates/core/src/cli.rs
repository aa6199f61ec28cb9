//! Command-line front end.
//!
//! Exit status: 0 on success, 1 when a mathematical check fails
//! (integrality, separation, a lemma scan), 2 on usage errors.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rug::Integer;
use serde::{Deserialize, Serialize};

use crate::bounds::{lemma31_check, lemma_comparison_scan, Comparison, Lemma31Params, Lemma31Part, LemmaReport};
use crate::classpoly::{class_polynomial, is_unit, verify_generator, ClassPolyConfig, ClassPolynomial, ExponentMode};
use crate::cmfield::{validate_discriminant, Discriminant};
use crate::error::Error;
use crate::quadforms::{class_number, reduced_forms};
use crate::shimura::{conjugate_set, w_group};
use crate::siegel::EvalConfig;

#[derive(Debug, Parser)]
#[command(name = "rayclass", version, about = "Ray class invariants over imaginary quadratic fields")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Full,
    Reduced,
}

impl From<ModeArg> for ExponentMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Full => ExponentMode::Full,
            ModeArg::Reduced => ExponentMode::Reduced,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LemmaArg {
    #[value(name = "3.1")]
    L31,
    #[value(name = "3.2")]
    L32,
    #[value(name = "3.3")]
    L33,
    #[value(name = "3.4")]
    L34,
}

#[derive(Debug, Clone, clap::Args)]
pub struct DiscArg {
    /// Fundamental discriminant d <= -7.
    #[arg(long = "disc", allow_hyphen_values = true)]
    pub disc: i64,
}

#[derive(Debug, Clone, clap::Args)]
pub struct FieldArgs {
    #[command(flatten)]
    pub disc: DiscArg,
    /// Level N >= 2.
    #[arg(long)]
    pub level: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Reduced forms of discriminant D, one "a b c" per line.
    Forms {
        #[command(flatten)]
        disc: DiscArg,
        #[arg(long)]
        json: bool,
    },
    /// Canonical representatives of W_{N,theta} / {+-1}.
    Wgroup {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        json: bool,
    },
    /// Every conjugate as (Siegel index, CM point, form, W element).
    Conjugates {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long)]
        json: bool,
    },
    /// Certified class polynomial of g_(0,1/N)(theta)^(e n).
    Classpoly {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, value_enum, default_value = "reduced")]
        mode: ModeArg,
        /// Extra power n >= 1.
        #[arg(long, default_value_t = 1)]
        power: u64,
        /// Starting precision in bits; adaptive when omitted.
        #[arg(long)]
        precision: Option<u32>,
        #[arg(long)]
        json: bool,
        /// JSON file caching certified polynomials.
        #[arg(long)]
        cache: Option<PathBuf>,
    },
    /// Check that all conjugates at the reduced exponent are distinct.
    VerifyGenerator {
        #[command(flatten)]
        field: FieldArgs,
        #[arg(long, default_value_t = 256)]
        precision: u32,
        #[arg(long)]
        json: bool,
    },
    /// Scan the inequality lemmas.
    VerifyLemmas {
        #[command(flatten)]
        field: FieldArgs,
        /// Only this lemma; all of them when omitted.
        #[arg(long, value_enum)]
        lemma: Option<LemmaArg>,
        /// Upper end of the level scan for the scalar bounds.
        #[arg(long)]
        nmax: Option<u64>,
        #[arg(long)]
        json: bool,
    },
}

/// Serialized class polynomial. Big integers are decimal strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassPolyJson {
    pub discriminant: i64,
    pub level: u64,
    pub exponent: u64,
    pub power: u64,
    pub degree: usize,
    pub coefficients: Vec<String>,
    pub precision_bits: u32,
    pub max_rounding_residual: String,
    pub is_unit: bool,
    pub region: String,
}

impl ClassPolyJson {
    pub fn from_poly(p: &ClassPolynomial) -> Self {
        ClassPolyJson {
            discriminant: p.meta.disc.value(),
            level: p.meta.level,
            exponent: p.meta.exponent,
            power: p.meta.power,
            degree: p.degree(),
            coefficients: p.coefficients.iter().map(|c| c.to_string()).collect(),
            precision_bits: p.meta.precision_bits,
            max_rounding_residual: format!("{:e}", p.meta.max_rounding_residual),
            is_unit: is_unit(p),
            region: p.meta.region.to_string(),
        }
    }

    pub fn integers(&self) -> Result<Vec<Integer>, Error> {
        self.coefficients
            .iter()
            .map(|c| c.parse::<Integer>().map_err(|e| Error::InvalidArgument(format!("bad coefficient {c:?}: {e}"))))
            .collect()
    }
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct Cache {
    entries: BTreeMap<String, ClassPolyJson>,
}

fn cache_key(d: Discriminant, level: u64, mode: ExponentMode, power: u64) -> String {
    format!("{}:{}:{}:{}", d, level, mode, power)
}

fn load_cache(path: &Path) -> Cache {
    std::fs::read_to_string(path)
        .ok()
        .and_then(|s| serde_json::from_str(&s).ok())
        .unwrap_or_default()
}

/// A cached entry is used only if it is monic with the degree the conjugate
/// count predicts.
fn cache_entry_valid(entry: &ClassPolyJson, d: Discriminant, level: u64) -> bool {
    let Ok(w) = w_group(d, level) else { return false };
    let degree = class_number(d) * w.len();
    let Ok(ints) = entry.integers() else { return false };
    entry.degree == degree && ints.len() == degree + 1 && ints[0] == 1
}

enum Failure {
    Usage(String),
    Math(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::IntegralityFailure { .. } | Error::PrecisionExhausted { .. } | Error::SeparationFailure { .. } => {
                Failure::Math(e.to_string())
            }
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Math(format!("i/o error: {e}"))
    }
}

fn emit_json<T: Serialize>(out: &mut dyn Write, value: &T) -> std::io::Result<()> {
    let s = serde_json::to_string_pretty(value).expect("serializable");
    writeln!(out, "{s}")
}

/// Run with the process arguments, writing to stdout and stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{rendered}");
            } else {
                let _ = write!(err, "{rendered}");
            }
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
        Err(Failure::Math(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            1
        }
    }
}

fn field(args: &FieldArgs) -> Result<(Discriminant, u64), Failure> {
    let d = validate_discriminant(args.disc.disc)?;
    crate::shimura::check_level(args.level)?;
    Ok((d, args.level))
}

/// Returns `Ok(false)` when a check ran to completion and failed.
fn execute(cmd: Command, out: &mut dyn Write) -> Result<bool, Failure> {
    let eval = EvalConfig::from_env();
    match cmd {
        Command::Forms { disc, json } => {
            let d = validate_discriminant(disc.disc)?;
            let forms = reduced_forms(d);
            if json {
                emit_json(out, &forms)?;
            } else {
                for q in forms {
                    writeln!(out, "{} {} {}", q.a, q.b, q.c)?;
                }
            }
            Ok(true)
        }
        Command::Wgroup { field: f, json } => {
            let (d, n) = field(&f)?;
            let w = w_group(d, n)?;
            if json {
                let entries: Vec<[u64; 4]> = w.iter().map(|m| m.entries).collect();
                emit_json(out, &entries)?;
            } else {
                for m in w {
                    let [a, b, c, e] = m.entries;
                    writeln!(out, "{a} {b} {c} {e}")?;
                }
            }
            Ok(true)
        }
        Command::Conjugates { field: f, json } => {
            let (d, n) = field(&f)?;
            let set = conjugate_set(d, n)?;
            if json {
                emit_json(out, &set)?;
            } else {
                for c in set {
                    writeln!(out, "{} at {} form {} w {}", c.index, c.tau, c.form, c.w_elt)?;
                }
            }
            Ok(true)
        }
        Command::Classpoly { field: f, mode, power, precision, json, cache } => {
            let (d, n) = field(&f)?;
            let mode = ExponentMode::from(mode);
            let key = cache_key(d, n, mode, power);
            let mut store = cache.as_deref().map(load_cache);
            let hit = store
                .as_ref()
                .and_then(|c| c.entries.get(&key))
                .filter(|e| cache_entry_valid(e, d, n))
                .cloned();
            let doc = match hit {
                Some(doc) => doc,
                None => {
                    let cfg = ClassPolyConfig { eval, ..ClassPolyConfig::default() };
                    let poly = class_polynomial(d, n, mode, power, precision, &cfg)?;
                    let doc = ClassPolyJson::from_poly(&poly);
                    if let (Some(path), Some(store)) = (cache.as_deref(), store.as_mut()) {
                        store.entries.insert(key, doc.clone());
                        let s = serde_json::to_string_pretty(store).expect("serializable");
                        std::fs::write(path, s)?;
                    }
                    doc
                }
            };
            if json {
                emit_json(out, &doc)?;
            } else {
                for c in &doc.coefficients {
                    writeln!(out, "{c}")?;
                }
            }
            Ok(true)
        }
        Command::VerifyGenerator { field: f, precision, json } => {
            let (d, n) = field(&f)?;
            let report = verify_generator(d, n, precision, &eval)?;
            if json {
                #[derive(Serialize)]
                struct Doc {
                    discriminant: i64,
                    level: u64,
                    exponent: u64,
                    count: usize,
                    min_gap_log2: Option<f64>,
                    threshold_log2: f64,
                    distinct: bool,
                    region: String,
                }
                emit_json(
                    out,
                    &Doc {
                        discriminant: d.value(),
                        level: n,
                        exponent: report.exponent,
                        count: report.count,
                        min_gap_log2: report.min_gap_log2.is_finite().then_some(report.min_gap_log2),
                        threshold_log2: report.threshold_log2,
                        distinct: true,
                        region: report.region.to_string(),
                    },
                )?;
            } else {
                writeln!(out, "conjugates {}", report.count)?;
                writeln!(out, "exponent {}", report.exponent)?;
                writeln!(out, "min_gap_log2 {:.3}", report.min_gap_log2)?;
                writeln!(out, "threshold_log2 {:.3}", report.threshold_log2)?;
                writeln!(out, "region {}", report.region)?;
                writeln!(out, "distinct yes")?;
            }
            Ok(true)
        }
        Command::VerifyLemmas { field: f, lemma, nmax, json } => {
            let (d, n) = field(&f)?;
            let lemmas = match lemma {
                Some(l) => vec![l],
                None => vec![LemmaArg::L31, LemmaArg::L32, LemmaArg::L33, LemmaArg::L34],
            };
            let mut reports: Vec<LemmaReport> = Vec::new();
            for l in lemmas {
                match l {
                    LemmaArg::L31 => {
                        for part in Lemma31Part::ALL {
                            let mut params = Lemma31Params::default_for(part, vec![d]);
                            if let Some(k) = nmax {
                                params.n_max = k.max(params.n_min);
                            }
                            reports.push(lemma31_check(part, &params)?);
                        }
                    }
                    LemmaArg::L32 => reports.push(lemma_comparison_scan(d, n, Comparison::L32, &eval)?),
                    LemmaArg::L33 => reports.push(lemma_comparison_scan(d, n, Comparison::L33, &eval)?),
                    LemmaArg::L34 => reports.push(lemma_comparison_scan(d, n, Comparison::L34, &eval)?),
                }
            }
            if json {
                emit_json(out, &reports)?;
            } else {
                for r in &reports {
                    writeln!(
                        out,
                        "{} {} worst_margin={:e} at {} samples={} [{}]{}",
                        r.lemma,
                        if r.pass { "PASS" } else { "FAIL" },
                        r.worst_margin,
                        r.worst_at,
                        r.samples,
                        r.range,
                        r.note.as_deref().map(|n| format!(" note: {n}")).unwrap_or_default()
                    )?;
                }
            }
            Ok(reports.iter().all(|r| r.pass))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("rayclass").chain(args.iter().copied());
        let code = run_with(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn forms_text() {
        let (code, out, _) = call(&["forms", "--disc", "-40"]);
        assert_eq!(code, 0);
        assert_eq!(out, "1 0 10\n2 0 5\n");
    }

    #[test]
    fn usage_errors() {
        let (code, _, err) = call(&["classpoly", "--disc", "5", "--level", "6"]);
        assert_eq!(code, 2);
        assert!(err.contains("not negative"), "{err}");
        let (code, _, err) = call(&["classpoly", "--disc", "-12", "--level", "6"]);
        assert_eq!(code, 2);
        assert!(err.contains("fundamental"));
        assert_eq!(call(&["wgroup", "--disc", "-40", "--level", "1"]).0, 2);
        assert_eq!(call(&["frobnicate"]).0, 2);
        assert_eq!(call(&["classpoly", "--disc", "-40"]).0, 2);
        assert_eq!(call(&["--help"]).0, 0);
    }

    #[test]
    fn wgroup_text() {
        let (code, out, _) = call(&["wgroup", "--disc", "-40", "--level", "6"]);
        assert_eq!(code, 0);
        assert_eq!(out.lines().count(), 8);
        assert_eq!(out.lines().next(), Some("1 0 0 1"));
    }

    #[test]
    fn conjugates_json() {
        let (code, out, _) = call(&["conjugates", "--disc", "-40", "--level", "6", "--json"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v.as_array().unwrap().len(), 16);
        assert_eq!(v[0]["index"]["s"], 1);
        assert_eq!(v[0]["tau"]["disc"], -40);
    }

    #[test]
    fn generator_and_lemmas() {
        let (code, out, _) = call(&["verify-generator", "--disc", "-40", "--level", "6"]);
        assert_eq!(code, 0);
        assert!(out.starts_with("conjugates 16\n"));
        let (code, out, _) = call(&["verify-lemmas", "--disc", "-40", "--level", "6", "--lemma", "3.4"]);
        assert_eq!(code, 0, "{out}");
        assert!(out.starts_with("3.4 PASS"));
        let (code, out, _) = call(&["verify-lemmas", "--disc", "-40", "--level", "6", "--lemma", "3.1", "--nmax", "60", "--json"]);
        assert_eq!(code, 0);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v.as_array().unwrap().len(), 6);
        assert_eq!(v[0]["lemma"], "3.1(i)");
    }
}
