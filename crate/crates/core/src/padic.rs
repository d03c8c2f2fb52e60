//! Fixed-precision p-adic scalars, Teichmüller lifts, Hensel square roots and
//! discrete logarithms of principal units.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{self, pow};
use crate::error::{Error, Result};

/// An element `p^valuation * unit` of Q_p with `precision` significant digits.
/// Zero is stored with `valuation = None`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PAdicScalar {
    prime: u64,
    valuation: Option<i64>,
    unit: BigInt,
    precision: u32,
}

impl PAdicScalar {
    pub fn zero(p: u64, precision: u32) -> Self {
        PAdicScalar { prime: p, valuation: None, unit: BigInt::zero(), precision }
    }

    pub fn one(p: u64, precision: u32) -> Self {
        Self::from_integer(&BigInt::one(), p, precision)
    }

    pub fn from_integer(x: &BigInt, p: u64, precision: u32) -> Self {
        Self::from_rational(&BigRational::from_integer(x.clone()), p, precision)
    }

    pub fn from_rational(x: &BigRational, p: u64, precision: u32) -> Self {
        assert!(precision >= 1, "precision must be positive");
        match arith::vp(x, p) {
            None => Self::zero(p, precision),
            Some(v) => {
                let pv = pow(p, v.unsigned_abs() as u32);
                let u = if v >= 0 {
                    x / BigRational::from_integer(pv)
                } else {
                    x * BigRational::from_integer(pv)
                };
                PAdicScalar {
                    prime: p,
                    valuation: Some(v),
                    unit: arith::residue(&u, p, precision),
                    precision,
                }
            }
        }
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn valuation(&self) -> Option<i64> {
        self.valuation
    }

    pub fn unit_part(&self) -> &BigInt {
        &self.unit
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn is_zero(&self) -> bool {
        self.valuation.is_none()
    }

    pub fn is_unit(&self) -> bool {
        self.valuation == Some(0)
    }

    fn modulus(&self) -> BigInt {
        pow(self.prime, self.precision)
    }

    /// Integer residue of an integral scalar modulo `p^k`, `k <= valuation + precision`.
    pub fn residue(&self, k: u32) -> Result<BigInt> {
        let m = pow(self.prime, k);
        match self.valuation {
            None => Ok(BigInt::zero()),
            Some(v) if v < 0 => Err(Error::Domain(format!("scalar has negative valuation {v}"))),
            Some(v) => {
                if (k as i64) > v + self.precision as i64 {
                    return Err(Error::Precision {
                        required: k,
                        available: (v + self.precision as i64) as u32,
                    });
                }
                Ok((&self.unit * pow(self.prime, v as u32)).mod_floor(&m))
            }
        }
    }

    /// Exact rational `p^v * unit` (the chosen representative of the class).
    pub fn to_rational(&self) -> BigRational {
        match self.valuation {
            None => BigRational::zero(),
            Some(v) => {
                let pv = BigRational::from_integer(pow(self.prime, v.unsigned_abs() as u32));
                let u = BigRational::from_integer(self.unit.clone());
                if v >= 0 {
                    u * pv
                } else {
                    u / pv
                }
            }
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.prime, other.prime);
        let precision = self.precision.min(other.precision);
        match (self.valuation, other.valuation) {
            (Some(a), Some(b)) => {
                let m = pow(self.prime, precision);
                PAdicScalar {
                    prime: self.prime,
                    valuation: Some(a + b),
                    unit: (&self.unit * &other.unit).mod_floor(&m),
                    precision,
                }
            }
            _ => Self::zero(self.prime, precision),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.prime, other.prime);
        let (a, b) = match (self.valuation, other.valuation) {
            (None, _) => return other.clone(),
            (_, None) => return self.clone(),
            (Some(a), Some(b)) => (a, b),
        };
        let (lo, hi, vlo, vhi) = if a <= b { (self, other, a, b) } else { (other, self, b, a) };
        let abs_prec = (vlo + lo.precision as i64).min(vhi + hi.precision as i64);
        let rel = (abs_prec - vlo) as u32;
        let m = pow(self.prime, rel);
        let sum = (&lo.unit + &hi.unit * pow(self.prime, (vhi - vlo) as u32)).mod_floor(&m);
        if sum.is_zero() {
            return Self::zero(self.prime, rel.max(1));
        }
        let extra = arith::vp_int(&sum, self.prime).unwrap();
        let new_rel = rel - extra;
        if new_rel == 0 {
            return Self::zero(self.prime, 1);
        }
        let unit = (sum / pow(self.prime, extra)).mod_floor(&pow(self.prime, new_rel));
        PAdicScalar {
            prime: self.prime,
            valuation: Some(vlo + extra as i64),
            unit,
            precision: new_rel,
        }
    }

    pub fn neg(&self) -> Self {
        match self.valuation {
            None => self.clone(),
            Some(_) => PAdicScalar { unit: (-&self.unit).mod_floor(&self.modulus()), ..self.clone() },
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn inverse(&self) -> Result<Self> {
        match self.valuation {
            None => Err(Error::Domain("inverse of zero".into())),
            Some(v) => Ok(PAdicScalar {
                prime: self.prime,
                valuation: Some(-v),
                unit: arith::modinv(&self.unit, &self.modulus()).unwrap(),
                precision: self.precision,
            }),
        }
    }

    pub fn pow(&self, e: u64) -> Self {
        let mut acc = Self::one(self.prime, self.precision);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }
}

impl fmt::Display for PAdicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.valuation {
            None => write!(f, "O({}^{})", self.prime, self.precision),
            Some(0) => write!(f, "{} + O({}^{})", self.unit, self.prime, self.precision),
            Some(v) => write!(f, "{}^{} * ({} + O({}^{}))", self.prime, v, self.unit, self.prime, self.precision),
        }
    }
}

/// p-adic valuation of a nonzero rational.
pub fn padic_valuation(x: &BigRational, p: u64) -> Result<i64> {
    arith::vp(x, p).ok_or_else(|| Error::Domain("valuation of zero is infinite".into()))
}

/// The (p-1)-th root of unity congruent to `a` mod p, to `n` digits.
pub fn teichmuller(a: &BigInt, p: u64, n: u32) -> Result<PAdicScalar> {
    let pb = BigInt::from(p);
    if a.mod_floor(&pb).is_zero() {
        return Err(Error::Domain(format!("{a} is divisible by {p}")));
    }
    let m = pow(p, n);
    let mut x = a.mod_floor(&m);
    // x -> x^p converges: each step gains one digit.
    for _ in 0..n {
        x = x.modpow(&pb, &m);
    }
    Ok(PAdicScalar::from_integer(&x, p, n))
}

/// Square root of a unit quadratic residue, branch with the smallest residue mod p.
pub fn hensel_sqrt(u: &BigInt, p: u64, m: u32) -> Result<PAdicScalar> {
    let pb = BigInt::from(p);
    if p == 2 {
        return Err(Error::Argument("hensel_sqrt needs an odd prime".into()));
    }
    let r = u.mod_floor(&pb);
    if r.is_zero() || arith::legendre(u, p) != 1 {
        return Err(Error::Domain(format!("{u} is not a unit square mod {p}")));
    }
    let mut x = (1..p)
        .map(BigInt::from)
        .find(|x| (x * x - u).mod_floor(&pb).is_zero())
        .unwrap();
    let mut k = 1u32;
    while k < m {
        k = (2 * k).min(m);
        let mk = pow(p, k);
        let inv = arith::modinv(&(BigInt::from(2) * &x), &mk).unwrap();
        x = (&x - (&x * &x - u) * inv).mod_floor(&mk);
    }
    Ok(PAdicScalar::from_integer(&x, p, m))
}

/// Discrete logarithm of a principal unit `u ≡ 1 mod p` to base `1+p`, modulo `p^(n-1)`:
/// the exponent `k` with `(1+p)^k ≡ u mod p^n`, recovered one digit at a time.
pub fn log_one_plus_p(u: &BigInt, p: u64, n: u32) -> Result<BigInt> {
    let pb = BigInt::from(p);
    if !(u - 1u32).mod_floor(&pb).is_zero() {
        return Err(Error::Domain(format!("{u} is not a principal unit mod {p}")));
    }
    if n <= 1 {
        return Ok(BigInt::zero());
    }
    let g = BigInt::from(p + 1);
    let modn = pow(p, n);
    let mut k = BigInt::zero();
    for d in 0..(n - 1) {
        // fix digit d so that (1+p)^k ≡ u mod p^(d+2)
        let md = pow(p, d + 2);
        let step = pow(p, d);
        let mut found = false;
        for digit in 0..p {
            let cand = &k + &step * digit;
            if (g.modpow(&cand, &md) - u).mod_floor(&md).is_zero() {
                k = cand;
                found = true;
                break;
            }
        }
        if !found {
            return Err(Error::Inconsistency("discrete logarithm digit not found".into()));
        }
    }
    debug_assert!((g.modpow(&k, &modn) - u).mod_floor(&modn).is_zero());
    Ok(k)
}

/// Smallest positive primitive root modulo the odd prime `p`.
pub fn primitive_root(p: u64) -> u64 {
    if p == 2 {
        return 1;
    }
    let factors = arith::factorize(p - 1);
    let pb = BigInt::from(p);
    (2..p)
        .find(|&g| {
            factors.iter().all(|&(q, _)| {
                !BigInt::from(g).modpow(&BigInt::from((p - 1) / q), &pb).is_one()
            })
        })
        .expect("primitive root exists")
}

/// Index of `a` mod p with respect to `primitive_root(p)`.
pub fn index_mod_p(a: &BigInt, p: u64) -> Result<u64> {
    let pb = BigInt::from(p);
    let r = a.mod_floor(&pb);
    if r.is_zero() {
        return Err(Error::Domain(format!("{a} is divisible by {p}")));
    }
    let g = BigInt::from(primitive_root(p));
    let mut x = BigInt::one();
    for k in 0..(p - 1) {
        if x == r {
            return Ok(k);
        }
        x = (x * &g).mod_floor(&pb);
    }
    unreachable!("primitive root generates the unit group")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{big, ratio};

    #[test]
    fn valuations() {
        assert_eq!(padic_valuation(&ratio(1, 1), 5).unwrap(), 0);
        assert_eq!(padic_valuation(&ratio(50, 1), 5).unwrap(), 2);
        assert_eq!(padic_valuation(&ratio(3, 25), 5).unwrap(), -2);
        assert!(padic_valuation(&ratio(0, 1), 5).is_err());
    }

    #[test]
    fn teichmuller_values() {
        assert_eq!(teichmuller(&big(1), 5, 10).unwrap().unit_part(), &big(1));
        assert_eq!(teichmuller(&big(2), 5, 2).unwrap().unit_part(), &big(7));
        assert_eq!(teichmuller(&big(4), 5, 2).unwrap().unit_part(), &big(24));
        assert!(teichmuller(&big(10), 5, 3).is_err());
    }

    #[test]
    fn hensel_values() {
        assert_eq!(hensel_sqrt(&big(4), 5, 10).unwrap().unit_part(), &big(2));
        assert_eq!(hensel_sqrt(&big(-1), 5, 3).unwrap().unit_part(), &big(57));
        assert!(hensel_sqrt(&big(2), 5, 4).is_err());
    }

    #[test]
    fn scalar_arithmetic() {
        let x = PAdicScalar::from_rational(&ratio(3, 25), 5, 6);
        let y = PAdicScalar::from_rational(&ratio(50, 7), 5, 6);
        assert_eq!(x.mul(&y).valuation(), Some(0));
        assert_eq!(x.mul(&y).to_rational(), BigRational::from_integer(
            arith::residue(&ratio(150, 175), 5, 6)));
        let s = PAdicScalar::from_integer(&big(1), 5, 4).add(&PAdicScalar::from_integer(&big(4), 5, 4));
        assert_eq!(s.valuation(), Some(1));
        assert_eq!(s.precision(), 3);
        let inv = x.inverse().unwrap();
        assert_eq!(inv.valuation(), Some(2));
        assert!(x.mul(&inv).sub(&PAdicScalar::one(5, 6)).is_zero());
    }

    #[test]
    fn discrete_log() {
        assert_eq!(log_one_plus_p(&big(6), 5, 2).unwrap(), big(1));
        assert_eq!(log_one_plus_p(&big(36), 5, 3).unwrap(), big(2));
        assert_eq!(log_one_plus_p(&big(1), 5, 3).unwrap(), big(0));
    }
}
