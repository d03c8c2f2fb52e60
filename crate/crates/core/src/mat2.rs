//! 2×2 matrices over Q, used as truncated elements of GL₂(Q_p).

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::arith::{self, rat};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Mat2 {
    pub a: BigRational,
    pub b: BigRational,
    pub c: BigRational,
    pub d: BigRational,
}

impl Mat2 {
    pub fn new(a: BigRational, b: BigRational, c: BigRational, d: BigRational) -> Self {
        Mat2 { a, b, c, d }
    }

    pub fn from_ints(a: i64, b: i64, c: i64, d: i64) -> Self {
        Mat2::new(rat(a), rat(b), rat(c), rat(d))
    }

    pub fn from_bigints(a: BigInt, b: BigInt, c: BigInt, d: BigInt) -> Self {
        Mat2::new(a.into(), b.into(), c.into(), d.into())
    }

    pub fn identity() -> Self {
        Mat2::from_ints(1, 0, 0, 1)
    }

    pub fn zero() -> Self {
        Mat2::from_ints(0, 0, 0, 0)
    }

    /// The Atkin-Lehner-type involution [[0,1],[1,0]].
    pub fn w() -> Self {
        Mat2::from_ints(0, 1, 1, 0)
    }

    pub fn diag(x: BigRational, y: BigRational) -> Self {
        Mat2::new(x, BigRational::zero(), BigRational::zero(), y)
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        Mat2::new(
            &self.a * &o.a + &self.b * &o.c,
            &self.a * &o.b + &self.b * &o.d,
            &self.c * &o.a + &self.d * &o.c,
            &self.c * &o.b + &self.d * &o.d,
        )
    }

    pub fn add(&self, o: &Mat2) -> Mat2 {
        Mat2::new(&self.a + &o.a, &self.b + &o.b, &self.c + &o.c, &self.d + &o.d)
    }

    pub fn scale(&self, r: &BigRational) -> Mat2 {
        Mat2::new(&self.a * r, &self.b * r, &self.c * r, &self.d * r)
    }

    pub fn det(&self) -> BigRational {
        &self.a * &self.d - &self.b * &self.c
    }

    pub fn trace(&self) -> BigRational {
        &self.a + &self.d
    }

    /// Adjugate: M·adj(M) = det(M)·1.
    pub fn adj(&self) -> Mat2 {
        Mat2::new(self.d.clone(), -&self.b, -&self.c, self.a.clone())
    }

    pub fn inverse(&self) -> Option<Mat2> {
        let d = self.det();
        (!d.is_zero()).then(|| self.adj().scale(&d.recip()))
    }

    pub fn entries(&self) -> [&BigRational; 4] {
        [&self.a, &self.b, &self.c, &self.d]
    }

    pub fn is_integral_at(&self, p: u64) -> bool {
        self.entries().iter().all(|x| arith::is_p_integral(x, p))
    }

    /// Minimum p-adic valuation of the entries; `None` for the zero matrix.
    pub fn min_valuation(&self, p: u64) -> Option<i64> {
        self.entries().iter().filter_map(|x| arith::vp(x, p)).min()
    }

    /// Entries reduced into [0, p^k); requires p-integrality.
    pub fn reduce(&self, p: u64, k: u32) -> Mat2 {
        let r = |x: &BigRational| BigRational::from_integer(arith::residue(x, p, k));
        Mat2::new(r(&self.a), r(&self.b), r(&self.c), r(&self.d))
    }

    pub fn is_identity(&self) -> bool {
        self.a.is_one() && self.d.is_one() && self.b.is_zero() && self.c.is_zero()
    }
}

impl fmt::Display for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}
