//! Flat `key = value` run configuration and its validation.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::arith;
use crate::error::{Error, Result};

/// How ε is chosen at each ladder step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum EpsilonMode {
    /// Trivial ε at every conductor exponent.
    Trivial,
    /// Primitive characters from the standard ladder.
    Primitive,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum PsiSpec {
    Trivial,
    /// Real character of the given odd squarefree modulus.
    Quadratic(u64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum OutputFormat {
    Text,
    Structured,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub p: u64,
    pub ell: u64,
    pub n1: u64,
    pub n2: u64,
    pub ladder: Vec<u32>,
    pub epsilon: EpsilonMode,
    pub psi: PsiSpec,
    pub precision: u32,
    pub eigendata: Option<PathBuf>,
    pub cache: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            p: 5,
            ell: 3,
            n1: 1,
            n2: 1,
            ladder: vec![1],
            epsilon: EpsilonMode::Trivial,
            psi: PsiSpec::Trivial,
            precision: 20,
            eigendata: None,
            cache: None,
            out: None,
            format: OutputFormat::Text,
        }
    }
}

pub const KEYS: &[&str] = &["p", "ell", "N1", "N2", "ladder", "epsilon", "psi", "precision", "eigendata", "cache", "out", "format"];

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Argument(format!("{key}: cannot parse {v:?}")))
}

impl RunConfig {
    /// Parses the config text; relative paths are resolved against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut c = RunConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Argument(format!("line {}: expected key = value", lineno + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            match k {
                "p" => c.p = parse_num(k, v)?,
                "ell" => c.ell = parse_num(k, v)?,
                "N1" => c.n1 = parse_num(k, v)?,
                "N2" => c.n2 = parse_num(k, v)?,
                "ladder" => {
                    c.ladder = v
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(|s| parse_num(k, s))
                        .collect::<Result<_>>()?
                }
                "epsilon" => {
                    c.epsilon = match v {
                        "trivial" => EpsilonMode::Trivial,
                        "primitive" => EpsilonMode::Primitive,
                        _ => return Err(Error::Argument(format!("epsilon: expected trivial or primitive, got {v:?}"))),
                    }
                }
                "psi" => {
                    c.psi = match v.split_once(':') {
                        None if v == "trivial" => PsiSpec::Trivial,
                        Some(("quadratic", m)) => PsiSpec::Quadratic(parse_num(k, m.trim())?),
                        _ => return Err(Error::Argument(format!("psi: expected trivial or quadratic:M, got {v:?}"))),
                    }
                }
                "precision" => c.precision = parse_num(k, v)?,
                "eigendata" => c.eigendata = Some(base.join(v)),
                "cache" => c.cache = Some(base.join(v)),
                "out" => c.out = Some(base.join(v)),
                "format" => c.format = parse_format(v)?,
                _ => return Err(Error::Argument(format!("unknown key {k:?}; known keys: {}", KEYS.join(", ")))),
            }
        }
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Argument(format!("{}: {e}", path.display())))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Canonical text of the parameters that determine results.
    pub fn canonical(&self) -> String {
        let ladder: Vec<String> = self.ladder.iter().map(|n| n.to_string()).collect();
        let psi = match self.psi {
            PsiSpec::Trivial => "trivial".to_string(),
            PsiSpec::Quadratic(m) => format!("quadratic:{m}"),
        };
        let eps = match self.epsilon {
            EpsilonMode::Trivial => "trivial",
            EpsilonMode::Primitive => "primitive",
        };
        format!(
            "p={}\nell={}\nN1={}\nN2={}\nladder={}\nepsilon={eps}\npsi={psi}\nprecision={}\n",
            self.p,
            self.ell,
            self.n1,
            self.n2,
            ladder.join(","),
            self.precision
        )
    }
}

pub fn parse_format(v: &str) -> Result<OutputFormat> {
    match v {
        "text" => Ok(OutputFormat::Text),
        "structured" => Ok(OutputFormat::Structured),
        _ => Err(Error::Argument(format!("format: expected text or structured, got {v:?}"))),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub hypothesis: &'static str,
    pub message: String,
}

/// Hypotheses that cannot be checked from the configuration.
pub const ASSUMED: &[&str] = &["CR-Sigma", "odd", "P", "Hb'"];

/// Every violated constraint, in a fixed order; empty means valid.
pub fn validate_config(c: &RunConfig) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut bad = |hypothesis: &'static str, message: String| out.push(Violation { hypothesis, message });
    if !arith::is_prime(c.p) {
        bad("p prime", format!("p = {} is not prime", c.p));
    }
    if c.p < 5 {
        bad("p>=5", format!("p = {} is smaller than 5", c.p));
    }
    if !arith::is_prime(c.ell) {
        bad("ell prime", format!("ell = {} is not prime", c.ell));
    }
    if c.ell == 2 {
        bad("ell!=2", "ell = 2 is excluded".into());
    }
    if c.p == c.ell {
        bad("p!=ell", format!("p and ell are both {}", c.p));
    }
    if c.n1 == 0 || c.n2 == 0 {
        bad("positive levels", "N1 and N2 must be positive".into());
    } else {
        if !arith::is_squarefree(c.n2) {
            bad("N2 squarefree", format!("N2 = {} is not squarefree", c.n2));
        }
        if !c.n1.is_multiple_of(c.n2) {
            bad("N2|N1", format!("N2 = {} does not divide N1 = {}", c.n2, c.n1));
        }
        if arith::gcd_u64(c.n1 * c.n2, c.p * c.ell) != 1 {
            bad("gcd(N1N2,p*ell)=1", format!("N1·N2 = {} meets p·ell = {}", c.n1 * c.n2, c.p * c.ell));
        }
        if c.n1.is_multiple_of(2) {
            bad("odd tame level", format!("N1 = {} is even; only odd tame levels are implemented", c.n1));
        }
    }
    if c.ladder.is_empty() || c.ladder.contains(&0) || c.ladder.windows(2).any(|w| w[0] >= w[1]) {
        bad("ladder", "conductor exponents must be positive and strictly increasing".into());
    }
    if c.precision == 0 {
        bad("precision", "precision must be positive".into());
    }
    if let PsiSpec::Quadratic(m) = c.psi {
        if c.n2 == 0 || !c.n2.is_multiple_of(m) || m % 2 == 0 || !arith::is_squarefree(m) {
            bad("psi modulus", format!("quadratic modulus {m} must be odd, squarefree and divide N2"));
        }
    }
    out
}
