//! Exact elements of cyclotomic fields Q(ζ_M), stored as coefficient vectors in
//! the power basis 1, ζ, …, ζ^(φ(M)-1) modulo the M-th cyclotomic polynomial.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::totient;
use crate::linalg::{self, FieldElem};

fn poly_divexact(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    // monic integer division, coefficients lowest degree first
    let mut r = num.to_vec();
    let dn = den.len() - 1;
    let mut q = vec![BigInt::zero(); num.len() - dn];
    for k in (0..q.len()).rev() {
        let c = r[k + dn].clone();
        q[k] = c.clone();
        for (i, d) in den.iter().enumerate() {
            r[k + i] -= &c * d;
        }
    }
    debug_assert!(r.iter().all(|x| x.is_zero()));
    q
}

/// Coefficients of the M-th cyclotomic polynomial, lowest degree first.
pub fn cyclotomic_poly(m: u64) -> Vec<BigInt> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Vec<BigInt>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = cache.lock().unwrap().get(&m) {
        return v.clone();
    }
    let mut num = vec![BigInt::zero(); m as usize + 1];
    num[0] = BigInt::from(-1);
    num[m as usize] = BigInt::one();
    for d in 1..m {
        if m.is_multiple_of(d) {
            num = poly_divexact(&num, &cyclotomic_poly(d));
        }
    }
    cache.lock().unwrap().insert(m, num.clone());
    num
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CyclotomicElement {
    order: u64,
    coeffs: Vec<BigRational>,
}

fn reduce(order: u64, mut c: Vec<BigRational>) -> Vec<BigRational> {
    let phi = cyclotomic_poly(order);
    let d = phi.len() - 1;
    for k in (d..c.len()).rev() {
        let lead = c[k].clone();
        if lead.is_zero() {
            continue;
        }
        for (i, f) in phi.iter().enumerate() {
            c[k - d + i] -= &lead * BigRational::from_integer(f.clone());
        }
    }
    c.resize(d, BigRational::zero());
    c
}

impl CyclotomicElement {
    pub fn new(order: u64, coeffs: Vec<BigRational>) -> Self {
        assert!(order >= 1);
        CyclotomicElement { order, coeffs: reduce(order, coeffs) }
    }

    pub fn from_rational(x: BigRational) -> Self {
        CyclotomicElement { order: 1, coeffs: vec![x] }
    }

    pub fn from_int(x: i64) -> Self {
        Self::from_rational(BigRational::from_integer(BigInt::from(x)))
    }

    pub fn zero() -> Self {
        Self::from_int(0)
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    /// ζ_M^k.
    pub fn zeta_pow(order: u64, k: i64) -> Self {
        let e = k.mod_floor(&(order as i64)) as usize;
        let mut c = vec![BigRational::zero(); e + 1];
        c[e] = BigRational::one();
        Self::new(order, c)
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    /// Same element viewed in Q(ζ_L), `order | L`.
    pub fn lift(&self, l: u64) -> Self {
        assert!(l.is_multiple_of(self.order), "{} does not divide {}", self.order, l);
        if l == self.order {
            return self.clone();
        }
        let s = (l / self.order) as usize;
        let mut c = vec![BigRational::zero(); s * self.coeffs.len().max(1)];
        for (i, x) in self.coeffs.iter().enumerate() {
            c[i * s] = x.clone();
        }
        Self::new(l, c)
    }

    fn common(&self, o: &Self) -> (Self, Self) {
        let l = self.order.lcm(&o.order);
        (self.lift(l), o.lift(l))
    }

    /// Rewrite in the smallest Q(ζ_d), d | order, that contains the element.
    pub fn simplify(&self) -> Self {
        let mut best = self.clone();
        for d in 1..=self.order {
            if !self.order.is_multiple_of(d) || d >= best.order {
                continue;
            }
            // try to express in Q(ζ_d): solve via lifting the basis of Q(ζ_d)
            let phi_d = totient(d) as usize;
            let cols: Vec<Self> = (0..phi_d).map(|k| Self::zeta_pow(d, k as i64).lift(self.order)).collect();
            let n = self.coeffs.len();
            let mat: Vec<Vec<BigRational>> = (0..n)
                .map(|r| cols.iter().map(|c| c.coeffs[r].clone()).collect())
                .collect();
            let mut aug: Vec<Vec<BigRational>> = mat
                .iter()
                .zip(&self.coeffs)
                .map(|(row, b)| {
                    let mut r = row.clone();
                    r.push(b.clone());
                    r
                })
                .collect();
            let piv = linalg::rref(&mut aug);
            if piv.contains(&phi_d) {
                continue;
            }
            let mut sol = vec![BigRational::zero(); phi_d];
            for (r, &c) in piv.iter().enumerate() {
                sol[c] = aug[r][phi_d].clone();
            }
            best = Self::new(d, sol);
            break;
        }
        best
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        let s = self.simplify();
        if s.order <= 2 {
            Some(s.coeffs[0].clone())
        } else {
            None
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn add(&self, o: &Self) -> Self {
        let (a, b) = self.common(o);
        let coeffs = a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x + y).collect();
        CyclotomicElement { order: a.order, coeffs }
    }

    pub fn neg(&self) -> Self {
        CyclotomicElement { order: self.order, coeffs: self.coeffs.iter().map(|x| -x).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        let (a, b) = self.common(o);
        let n = a.coeffs.len();
        let mut c = vec![BigRational::zero(); 2 * n];
        for (i, x) in a.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                c[i + j] += x * y;
            }
        }
        Self::new(a.order, c)
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        CyclotomicElement { order: self.order, coeffs: self.coeffs.iter().map(|x| x * r).collect() }
    }

    pub fn inverse(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.coeffs.len();
        // column k = self * ζ^k
        let cols: Vec<Self> = (0..n).map(|k| self.mul(&Self::zeta_pow(self.order, k as i64))).collect();
        let mat: Vec<Vec<BigRational>> =
            (0..n).map(|r| cols.iter().map(|c| c.coeffs[r].clone()).collect()).collect();
        let mut e = vec![BigRational::zero(); n];
        e[0] = BigRational::one();
        linalg::solve(&mat, &e).map(|c| Self::new(self.order, c))
    }

    pub fn pow(&self, e: i64) -> Self {
        let base = if e < 0 { self.inverse().expect("inverse of zero") } else { self.clone() };
        let mut acc = Self::one();
        for _ in 0..e.unsigned_abs() {
            acc = acc.mul(&base);
        }
        acc
    }

    /// Least common denominator of the coefficients.
    pub fn denominator(&self) -> BigInt {
        crate::arith::lcm_denoms(self.coeffs.iter())
    }

    /// Complex embedding ζ_M ↦ exp(2πi/M), for diagnostics only.
    pub fn to_complex(&self) -> (f64, f64) {
        use num_traits::ToPrimitive;
        let mut re = 0.0;
        let mut im = 0.0;
        for (k, c) in self.coeffs.iter().enumerate() {
            let t = 2.0 * std::f64::consts::PI * k as f64 / self.order as f64;
            let v = c.to_f64().unwrap_or(f64::NAN);
            re += v * t.cos();
            im += v * t.sin();
        }
        (re, im)
    }
}

impl PartialEq for CyclotomicElement {
    fn eq(&self, o: &Self) -> bool {
        let (a, b) = self.common(o);
        a.coeffs == b.coeffs
    }
}

impl Eq for CyclotomicElement {}

impl FieldElem for CyclotomicElement {
    fn zero_like(&self) -> Self {
        Self::zero()
    }
    fn one_like(&self) -> Self {
        Self::one()
    }
    fn is_zero_elem(&self) -> bool {
        self.is_zero()
    }
    fn add_elem(&self, o: &Self) -> Self {
        self.add(o)
    }
    fn sub_elem(&self, o: &Self) -> Self {
        self.sub(o)
    }
    fn mul_elem(&self, o: &Self) -> Self {
        self.mul(o)
    }
    fn inv_elem(&self) -> Self {
        self.inverse().expect("inverse of zero")
    }
}

impl From<BigRational> for CyclotomicElement {
    fn from(x: BigRational) -> Self {
        Self::from_rational(x)
    }
}

impl fmt::Display for CyclotomicElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.simplify();
        if let Some(r) = s.as_rational() {
            return write!(f, "{r}");
        }
        let mut first = true;
        for (k, c) in s.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else if first { "" } else { "+" };
            let a = c.abs();
            let coef = if a.is_one() && k > 0 { String::new() } else { format!("{a}") };
            let mono = match k {
                0 => String::new(),
                1 => format!("z{}", s.order),
                _ => format!("z{}^{}", s.order, k),
            };
            let sep = if !coef.is_empty() && !mono.is_empty() { "*" } else { "" };
            write!(f, "{}{}{}{}", if first { sign.to_string() } else { format!(" {sign} ") }, coef, sep, mono)?;
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}
