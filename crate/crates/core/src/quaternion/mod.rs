//! Definite quaternion algebras over Q, their lattices, orders, ideals and
//! local splittings.

pub mod enumerate;
pub mod lattice;
pub mod order;
pub mod splitting;

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{self, legendre, rat};
use crate::error::{Error, Result};

pub use enumerate::{lll_reduce, short_vectors};
pub use lattice::Lattice;
pub use order::{eichler_order, maximal_order, LeftIdeal, Order};
pub use splitting::{splitting_map, Mat2, SplittingMap};

/// Coordinates (x0, x1, x2, x3) on the basis 1, i, j, k.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Quaternion(pub [BigRational; 4]);

impl Quaternion {
    pub fn new(c: [BigRational; 4]) -> Self {
        Quaternion(c)
    }

    pub fn from_ints(c: [i64; 4]) -> Self {
        Quaternion([rat(c[0]), rat(c[1]), rat(c[2]), rat(c[3])])
    }

    pub fn from_rational(x: BigRational) -> Self {
        Quaternion([x, BigRational::zero(), BigRational::zero(), BigRational::zero()])
    }

    pub fn zero() -> Self {
        Self::from_ints([0, 0, 0, 0])
    }

    pub fn one() -> Self {
        Self::from_ints([1, 0, 0, 0])
    }

    pub fn coords(&self) -> &[BigRational; 4] {
        &self.0
    }

    pub fn add(&self, o: &Self) -> Self {
        Quaternion(std::array::from_fn(|t| &self.0[t] + &o.0[t]))
    }

    pub fn sub(&self, o: &Self) -> Self {
        Quaternion(std::array::from_fn(|t| &self.0[t] - &o.0[t]))
    }

    pub fn neg(&self) -> Self {
        Quaternion(std::array::from_fn(|t| -&self.0[t]))
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        Quaternion(std::array::from_fn(|t| &self.0[t] * r))
    }

    pub fn conj(&self) -> Self {
        Quaternion([self.0[0].clone(), -&self.0[1], -&self.0[2], -&self.0[3]])
    }

    pub fn trace(&self) -> BigRational {
        &self.0[0] * rat(2)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|x| x.is_zero())
    }

    pub fn is_integral_at(&self, p: u64) -> bool {
        self.0.iter().all(|x| arith::is_p_integral(x, p))
    }
}

impl fmt::Display for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = ["", "i", "j", "k"];
        let mut first = true;
        for (c, n) in self.0.iter().zip(names) {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            let a = c.abs();
            let body = if n.is_empty() {
                a.to_string()
            } else if a == rat(1) {
                n.to_string()
            } else {
                format!("{a}*{n}")
            };
            if first {
                write!(f, "{}{}", if c.is_negative() { "-" } else { "" }, body)?;
            } else {
                write!(f, " {sign} {body}")?;
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// The algebra (a, b | Q): i² = a, j² = b, k = ij = -ji.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuaternionAlgebra {
    pub a: i64,
    pub b: i64,
    pub ell: u64,
    /// Auxiliary prime of the ℓ ≡ 1 mod 8 construction.
    pub aux_prime: Option<u64>,
}

impl QuaternionAlgebra {
    pub fn mul(&self, x: &Quaternion, y: &Quaternion) -> Quaternion {
        let a = rat(self.a);
        let b = rat(self.b);
        let ab = &a * &b;
        let [x0, x1, x2, x3] = &x.0;
        let [y0, y1, y2, y3] = &y.0;
        Quaternion([
            x0 * y0 + &a * x1 * y1 + &b * x2 * y2 - &ab * x3 * y3,
            x0 * y1 + x1 * y0 - &b * x2 * y3 + &b * x3 * y2,
            x0 * y2 + x2 * y0 + &a * x1 * y3 - &a * x3 * y1,
            x0 * y3 + x3 * y0 + x1 * y2 - x2 * y1,
        ])
    }

    pub fn norm(&self, x: &Quaternion) -> BigRational {
        let a = rat(self.a);
        let b = rat(self.b);
        let [x0, x1, x2, x3] = &x.0;
        x0 * x0 - &a * x1 * x1 - &b * x2 * x2 + &a * &b * x3 * x3
    }

    pub fn inverse(&self, x: &Quaternion) -> Result<Quaternion> {
        let n = self.norm(x);
        if n.is_zero() {
            return Err(Error::Domain("inverse of zero quaternion".into()));
        }
        Ok(x.conj().scale(&n.recip()))
    }

    /// Bilinear form tr(x ȳ) whose half is the norm form.
    pub fn trace_form(&self, x: &Quaternion, y: &Quaternion) -> BigRational {
        self.mul(x, &y.conj()).trace()
    }

    pub fn pow(&self, x: &Quaternion, e: u32) -> Quaternion {
        (0..e).fold(Quaternion::one(), |acc, _| self.mul(&acc, x))
    }

    /// Finite primes v with Hilbert symbol (a, b)_v = -1.
    pub fn ramified_primes(&self) -> Vec<u64> {
        let mut cand: Vec<u64> = vec![2];
        for x in [self.a, self.b] {
            for (q, _) in arith::factorize(x.unsigned_abs()) {
                cand.push(q);
            }
        }
        cand.sort();
        cand.dedup();
        cand.into_iter().filter(|&q| hilbert_symbol(self.a, self.b, q) == -1).collect()
    }

    pub fn is_definite(&self) -> bool {
        self.a < 0 && self.b < 0
    }
}

/// Hilbert symbol (a, b)_q at a finite prime q.
pub fn hilbert_symbol(a: i64, b: i64, q: u64) -> i32 {
    assert!(a != 0 && b != 0);
    let split = |x: i64| {
        let mut v = 0u32;
        let mut u = x;
        while u % q as i64 == 0 {
            u /= q as i64;
            v += 1;
        }
        (v, u)
    };
    let (al, u) = split(a);
    let (be, v) = split(b);
    if q == 2 {
        let eps = |x: i64| ((x - 1) / 2).rem_euclid(2);
        let omg = |x: i64| ((x * x - 1) / 8).rem_euclid(2);
        let e = eps(u) * eps(v) + al as i64 * omg(v) + be as i64 * omg(u);
        return if e % 2 == 0 { 1 } else { -1 };
    }
    let sign = if (al as u64 * be as u64 * ((q - 1) / 2)).is_multiple_of(2) { 1 } else { -1 };
    let lu = legendre(&BigInt::from(u), q);
    let lv = legendre(&BigInt::from(v), q);
    sign * lu.pow(be) * lv.pow(al)
}

/// The algebra ramified at {ℓ, ∞} with the parameters of the classical
/// maximal-order construction.
pub fn make_algebra(ell: u64) -> Result<QuaternionAlgebra> {
    if ell == 2 || !arith::is_prime(ell) {
        return Err(Error::Argument(format!("ℓ = {ell} must be an odd prime")));
    }
    let l = ell as i64;
    let alg = if ell % 4 == 3 {
        QuaternionAlgebra { a: -1, b: -l, ell, aux_prime: None }
    } else if ell % 8 == 5 {
        QuaternionAlgebra { a: -2, b: -l, ell, aux_prime: None }
    } else {
        let q = auxiliary_prime(ell)?;
        QuaternionAlgebra { a: -l, b: -(q as i64), ell, aux_prime: Some(q) }
    };
    if alg.ramified_primes() != vec![ell] || !alg.is_definite() {
        return Err(Error::Inconsistency(format!("algebra {alg:?} is not ramified exactly at {ell}")));
    }
    Ok(alg)
}

const AUX_SEARCH_LIMIT: u64 = 1_000_000;

/// Smallest prime q ≡ 3 mod 4 with (ℓ/q) = -1.
pub fn auxiliary_prime(ell: u64) -> Result<u64> {
    (3..AUX_SEARCH_LIMIT)
        .step_by(4)
        .find(|&q| arith::is_prime(q) && legendre(&BigInt::from(ell), q) == -1)
        .ok_or_else(|| Error::NotFound(format!("no auxiliary prime below {AUX_SEARCH_LIMIT}")))
}

/// Smallest s ≥ 0 with s² ≡ -ℓ mod q and s ≡ -q mod ℓ.
pub fn auxiliary_s(ell: u64, q: u64) -> u64 {
    let m = ell * q;
    (0..m)
        .find(|&s| {
            let s2 = (s as u128 * s as u128 % q as u128) as u64;
            (s2 + ell).is_multiple_of(q) && (s + q).is_multiple_of(ell)
        })
        .expect("CRT solution exists")
}
