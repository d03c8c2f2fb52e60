//! Command-line driver: configuration, caching, stage dispatch and reports.

pub mod cache;
pub mod config;
pub mod eigendata;
pub mod pipeline;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::brandt::EigenformRecord;
use crate::cyclotomic::CyclotomicElement;
use crate::error::Error;
use crate::theta::{LadderStep, ThetaValue};
use cache::{atomic_write, write_json};
use config::{parse_format, validate_config, OutputFormat, RunConfig, Violation, ASSUMED};
use pipeline::Pipeline;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_PRECISION: i32 = 3;
pub const EXIT_INCONSISTENCY: i32 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Stage {
    Order,
    Domain,
    Brandt,
    Forms,
    Theta,
    Limit,
    Validate,
}

#[derive(Parser, Debug)]
#[command(name = "theta-geodesics", version, about = "Theta elements from geodesics on the Bruhat-Tits tree")]
pub struct Args {
    /// Run configuration (key = value lines).
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, value_enum, default_value = "limit")]
    pub stage: Stage,
    /// Overrides the configured p-adic working precision.
    #[arg(long)]
    pub precision: Option<u32>,
    #[arg(long)]
    pub cache: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// text or structured.
    #[arg(long)]
    pub format: Option<String>,
}

/// Exit code for a pipeline error.
pub fn exit_code(e: &Error) -> i32 {
    match e.root() {
        Error::Precision { .. } => EXIT_PRECISION,
        Error::Argument(_) => EXIT_CONFIG,
        _ => EXIT_INCONSISTENCY,
    }
}

#[derive(Serialize)]
struct ErrorRecord {
    step: Option<u32>,
    kind: &'static str,
    message: String,
}

fn error_record(e: &Error) -> ErrorRecord {
    let step = match e {
        Error::Step { step, .. } => Some(*step),
        _ => None,
    };
    let kind = match e.root() {
        Error::Domain(_) => "domain",
        Error::Argument(_) => "argument",
        Error::Precision { .. } => "precision",
        Error::Parity(_) => "parity",
        Error::Inconsistency(_) => "inconsistency",
        Error::NotFound(_) => "not-found",
        Error::Ambiguous(_) => "ambiguous",
        Error::Step { .. } => unreachable!(),
    };
    ErrorRecord { step, kind, message: e.root().to_string() }
}

#[derive(Serialize)]
pub struct ValueRecord {
    pub order: u64,
    /// Numerators over the common denominator, coefficient of ζ^i at index i.
    pub coeffs: Vec<String>,
    pub denominator: String,
}

impl From<&CyclotomicElement> for ValueRecord {
    fn from(x: &CyclotomicElement) -> Self {
        let den = x.denominator();
        ValueRecord {
            order: x.order(),
            coeffs: x.coeffs().iter().map(|c| (c * den.clone()).to_integer().to_string()).collect(),
            denominator: den.to_string(),
        }
    }
}

#[derive(Serialize)]
pub struct PadicRecord {
    /// Base-p digits of the unit part, least significant first.
    pub digits: Vec<u64>,
    pub valuation: Option<i64>,
    pub precision: u32,
}

#[derive(Serialize)]
pub struct ThetaReport {
    pub fingerprint: String,
    pub conductor_exponent: u32,
    pub display: String,
    pub value: ValueRecord,
    pub padic_rendering: Option<PadicRecord>,
}

fn padic_record(v: &ThetaValue) -> Option<PadicRecord> {
    let x = v.padic.as_ref()?;
    let p = BigInt::from(x.prime());
    let mut u = x.unit_part().clone();
    let mut digits = Vec::with_capacity(x.precision() as usize);
    for _ in 0..x.precision() {
        let (q, r) = u.div_mod_floor(&p);
        digits.push(r.to_u64().unwrap());
        u = q;
    }
    Some(PadicRecord { digits, valuation: x.valuation(), precision: x.precision() })
}

pub fn theta_report(fingerprint: &str, n: u32, v: &ThetaValue) -> ThetaReport {
    ThetaReport {
        fingerprint: fingerprint.into(),
        conductor_exponent: n,
        display: v.value.to_string(),
        value: ValueRecord::from(&v.value),
        padic_rendering: padic_record(v),
    }
}

#[derive(Serialize)]
pub struct SummaryEntry {
    pub conductor_exponent: u32,
    pub value: String,
    /// v_p of the difference to the previous entry; "inf" when equal.
    pub distance: Option<String>,
}

#[derive(Serialize)]
pub struct Summary {
    pub fingerprint: String,
    pub p: u64,
    pub entries: Vec<SummaryEntry>,
}

pub fn summary(fingerprint: &str, p: u64, steps: &[LadderStep]) -> Summary {
    Summary {
        fingerprint: fingerprint.into(),
        p,
        entries: steps
            .iter()
            .map(|s| SummaryEntry {
                conductor_exponent: s.point.character.conductor_exponent,
                value: s.value.value.to_string(),
                distance: s.distance.map(|d| d.map_or("inf".to_string(), |v| v.to_string())),
            })
            .collect(),
    }
}

#[derive(Serialize)]
struct ValidationReport<'a> {
    valid: bool,
    violations: &'a [Violation],
    assumed_not_verified: &'a [&'a str],
}

struct Output {
    dir: Option<PathBuf>,
    format: OutputFormat,
    stdout: std::io::Stdout,
}

impl Output {
    fn file<T: Serialize>(&self, name: &str, value: &T) -> crate::Result<()> {
        match &self.dir {
            Some(d) => write_json(&d.join(name), value),
            None => Ok(()),
        }
    }

    fn show<T: Serialize>(&mut self, text: &str, value: &T) {
        let mut out = self.stdout.lock();
        let _ = match self.format {
            OutputFormat::Text => writeln!(out, "{text}"),
            OutputFormat::Structured => writeln!(out, "{}", serde_json::to_string(value).unwrap_or_default()),
        };
    }
}

/// Parses arguments, runs one stage and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let mut cfg = match RunConfig::load(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return EXIT_CONFIG;
        }
    };
    if let Some(p) = args.precision {
        cfg.precision = p;
    }
    if let Some(c) = &args.cache {
        cfg.cache = Some(c.clone());
    }
    if let Some(o) = &args.out {
        cfg.out = Some(o.clone());
    }
    if let Some(f) = &args.format {
        match parse_format(f) {
            Ok(f) => cfg.format = f,
            Err(e) => {
                eprintln!("{e}");
                return EXIT_USAGE;
            }
        }
    }
    let mut out = Output { dir: cfg.out.clone(), format: cfg.format, stdout: std::io::stdout() };
    let violations = validate_config(&cfg);
    let report = ValidationReport { valid: violations.is_empty(), violations: &violations, assumed_not_verified: ASSUMED };
    if args.stage == Stage::Validate || !violations.is_empty() {
        let mut text = String::new();
        for v in &violations {
            text.push_str(&format!("violated {}: {}\n", v.hypothesis, v.message));
        }
        text.push_str(&format!("assumed, not verified: {}\n", ASSUMED.join(", ")));
        text.push_str(if violations.is_empty() { "config valid" } else { "config invalid" });
        out.show(&text, &report);
        if let Err(e) = out.file("validation.json", &report) {
            eprintln!("{e}");
        }
        return if violations.is_empty() { EXIT_OK } else { EXIT_CONFIG };
    }
    let mut pipe = match Pipeline::new(cfg) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("{e}");
            return exit_code(&e);
        }
    };
    let result = run_stage(&mut pipe, args.stage, &mut out);
    if let Some(d) = &out.dir {
        let mut log = pipe.log.join("\n");
        log.push('\n');
        let _ = atomic_write(&d.join("timings.log"), log.as_bytes());
    }
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let rec = error_record(&e);
            eprintln!("error{}: {}", rec.step.map(|s| format!(" at step {s}")).unwrap_or_default(), rec.message);
            let _ = out.file("error.json", &rec);
            exit_code(&e)
        }
    }
}

fn run_stage(pipe: &mut Pipeline, stage: Stage, out: &mut Output) -> crate::Result<()> {
    let fp = pipe.fingerprint();
    let p = pipe.cfg.p;
    match stage {
        Stage::Validate => unreachable!(),
        Stage::Order => {
            let r = pipe.orders_report()?;
            let text = r
                .orders
                .iter()
                .map(|o| format!("tame level {} p-level {}: {:?}", o.tame_level, o.p_level, o.order.basis))
                .collect::<Vec<_>>()
                .join("\n");
            out.show(&format!("maximal: {:?}\n{text}", r.maximal.basis), &r);
            out.file("orders.json", &r)
        }
        Stage::Domain => {
            let mut levels = vec![(pipe.cfg.n1, 1)];
            for &n in &pipe.cfg.ladder {
                levels.push((pipe.cfg.n1, n));
                levels.push((pipe.cfg.n2, n));
            }
            levels.sort();
            levels.dedup();
            for (lvl, n) in levels {
                let l = pipe.level(lvl, n)?;
                let rec = serde_json::json!({ "gamma1": l.gamma1.record(), "gamma": l.gamma.record() });
                let text = format!(
                    "N={lvl} n={n}: h={} |E_gamma1|={} |E_gamma|={} stabilizers={:?}",
                    l.classes.class_number(),
                    l.gamma1.len(),
                    l.gamma.len(),
                    l.gamma.stabilizers
                );
                out.show(&text, &rec);
                out.file(&format!("domain_N{lvl}_n{n}.json"), &rec)?;
            }
            Ok(())
        }
        Stage::Brandt => {
            let recs = pipe.brandt_records()?;
            let text = recs.iter().map(|r| format!("B({}) computed, h={}", r.m, r.h)).collect::<Vec<_>>().join("\n");
            out.show(&text, &recs);
            out.file("brandt.json", &recs)
        }
        Stage::Forms => {
            for pt in pipe.points()? {
                let n = pt.character.conductor_exponent;
                let fs = pipe.forms(&pt.character, n)?;
                #[derive(Serialize)]
                struct FormsRecord {
                    conductor_exponent: u32,
                    f: EigenformRecord,
                    g: EigenformRecord,
                    h: EigenformRecord,
                    a_p: [String; 3],
                }
                let rec = FormsRecord {
                    conductor_exponent: n,
                    f: fs.f.record(),
                    g: fs.g.record(),
                    h: fs.h.record(),
                    a_p: [fs.a_f.to_string(), fs.a_g.to_string(), fs.a_h.to_string()],
                };
                let show = |v: &[CyclotomicElement]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
                let text = format!("n={n}: f=({}) g=({}) h=({})", show(&fs.f.values), show(&fs.g.values), show(&fs.h.values));
                out.show(&text, &rec);
                out.file(&format!("forms_n{n}.json"), &rec)?;
            }
            Ok(())
        }
        Stage::Theta | Stage::Limit => {
            let steps = pipe.limit()?;
            for s in &steps {
                let n = s.point.character.conductor_exponent;
                let r = theta_report(&fp, n, &s.value);
                let padic = s.value.padic.as_ref().map(|x| format!(" = {x}")).unwrap_or_default();
                out.show(&format!("n={n}: theta = {}{padic}", s.value.value), &r);
                out.file(&format!("theta_n{n}.json"), &r)?;
            }
            if stage == Stage::Limit {
                let sm = summary(&fp, p, &steps);
                let text = sm
                    .entries
                    .iter()
                    .filter_map(|e| e.distance.as_ref().map(|d| format!("v_{p}(theta_{} - previous) = {d}", e.conductor_exponent)))
                    .collect::<Vec<_>>()
                    .join("\n");
                if !text.is_empty() {
                    out.show(&text, &sm);
                }
                out.file("summary.json", &sm)?;
            }
            Ok(())
        }
    }
}

/// Rational value of a theta report, if it has one.
pub fn report_rational(r: &ValueRecord) -> Option<num_rational::BigRational> {
    if r.order != 1 || r.coeffs.len() != 1 {
        return None;
    }
    let n: BigInt = r.coeffs[0].parse().ok()?;
    let d: BigInt = r.denominator.parse().ok()?;
    (!d.is_zero()).then(|| num_rational::BigRational::new(n, d))
}

