//! Columnar eigenvalue tables.
//!
//! One row per coefficient: `form n m numerator denominator order [c_0 c_1 …]`,
//! where `form` is f, g or h, `n` the conductor exponent the row applies to
//! (0 for every exponent), and the value is (numerator/denominator)·Σ c_i ζ_order^i.
//! Omitted coefficients mean c = (1). Blank lines and `#` comments are skipped.

use std::path::Path;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::character::parse_rational;
use crate::cyclotomic::CyclotomicElement;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FormLabel {
    F,
    G,
    H,
}

impl FormLabel {
    pub fn name(&self) -> &'static str {
        match self {
            FormLabel::F => "f",
            FormLabel::G => "g",
            FormLabel::H => "h",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenRow {
    pub form: FormLabel,
    pub n: u32,
    pub m: u64,
    pub value: CyclotomicElement,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Eigendata {
    pub rows: Vec<EigenRow>,
}

impl Eigendata {
    pub fn parse(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let err = |what: &str| Error::Argument(format!("eigendata line {}: {what}", i + 1));
            let cols: Vec<&str> = line.split_whitespace().collect();
            if cols.len() < 6 {
                return Err(err("expected at least 6 columns"));
            }
            let form = match cols[0] {
                "f" => FormLabel::F,
                "g" => FormLabel::G,
                "h" => FormLabel::H,
                other => return Err(err(&format!("unknown form {other:?}"))),
            };
            let n: u32 = cols[1].parse().map_err(|_| err("bad conductor exponent"))?;
            let m: u64 = cols[2].parse().map_err(|_| err("bad index"))?;
            let num: BigInt = cols[3].parse().map_err(|_| err("bad numerator"))?;
            let den: BigInt = cols[4].parse().map_err(|_| err("bad denominator"))?;
            if den == BigInt::from(0) {
                return Err(err("zero denominator"));
            }
            let order: u64 = cols[5].parse().map_err(|_| err("bad cyclotomic order"))?;
            if order == 0 {
                return Err(err("cyclotomic order must be positive"));
            }
            let coeffs: Vec<BigRational> = if cols.len() == 6 {
                vec![BigRational::from_integer(1.into())]
            } else {
                cols[6..].iter().map(|s| parse_rational(s)).collect::<Result<_>>()?
            };
            let value = CyclotomicElement::new(order, coeffs).scale(&BigRational::new(num, den)).simplify();
            rows.push(EigenRow { form, n, m, value });
        }
        Ok(Eigendata { rows })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Argument(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn rows_for(&self, form: FormLabel, n: u32) -> impl Iterator<Item = &EigenRow> {
        self.rows.iter().filter(move |r| r.form == form && (r.n == 0 || r.n == n))
    }

    /// (m, a_m) for m ≠ p, in file order.
    pub fn targets(&self, form: FormLabel, n: u32, p: u64) -> Vec<(u64, CyclotomicElement)> {
        self.rows_for(form, n).filter(|r| r.m != p).map(|r| (r.m, r.value.clone())).collect()
    }

    pub fn a_p(&self, form: FormLabel, n: u32, p: u64) -> Result<CyclotomicElement> {
        let mut it = self.rows_for(form, n).filter(|r| r.m == p);
        let first = it
            .next()
            .ok_or_else(|| Error::Argument(format!("no a_{p} for {} at conductor exponent {n}", form.name())))?;
        if it.any(|r| r.value != first.value) {
            return Err(Error::Argument(format!("conflicting a_{p} rows for {}", form.name())));
        }
        Ok(first.value.clone())
    }
}
