//! Geodesics on the Bruhat-Tits tree of PGL₂(Q_p) as classes in
//! GL₂(Q_p)/Q_p^×Γ₀(p^r Z_p), with canonical matrix normal forms.

use std::fmt;
use std::hash::{Hash, Hasher};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{self, pow};
use crate::error::{Error, Result};
use crate::mat2::Mat2;

/// Which family of normal forms a representative belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FormTag {
    /// [[p^m, 0], [c, p^n]], c mod p^(n+r).
    Lower,
    /// [[0, p^m], [p^n, d]], d mod p^n.
    Anti,
    /// [[a, 1], [p^n, 0]], 0 < v(a) < r.
    CornerLeft,
    /// [[a·p^m, p^m], [1, 0]], 0 < v(a) < r, m > 0.
    CornerRight,
    /// [[p^m, b], [0, p^n]], m − r < v(b) < m.
    Upper,
    /// [[p^l, 1], [c, d]], v(d) < v(c) < v(d) + r.
    MixedTop,
    /// [[a, b], [p^k, 1]], v(b) > 0, v(b) < v(a) < v(b) + r.
    MixedBottom,
}

impl FormTag {
    pub fn name(&self) -> &'static str {
        match self {
            FormTag::Lower => "lower",
            FormTag::Anti => "anti",
            FormTag::CornerLeft => "corner-left",
            FormTag::CornerRight => "corner-right",
            FormTag::Upper => "upper",
            FormTag::MixedTop => "mixed-top",
            FormTag::MixedBottom => "mixed-bottom",
        }
    }
}

/// A geodesic of length r (a vertex when r = 0) in normal form.
#[derive(Clone, Debug)]
pub struct GeodesicClass {
    pub p: u64,
    pub r: u32,
    pub tag: FormTag,
    /// Normal-form matrix with integer entries.
    pub rep: Mat2,
}

impl PartialEq for GeodesicClass {
    fn eq(&self, o: &Self) -> bool {
        self.p == o.p && self.r == o.r && self.rep == o.rep
    }
}

impl Eq for GeodesicClass {}

impl Hash for GeodesicClass {
    fn hash<H: Hasher>(&self, h: &mut H) {
        self.p.hash(h);
        self.r.hash(h);
        self.rep.hash(h);
    }
}

impl fmt::Display for GeodesicClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.rep, self.r)
    }
}

/// λ = p^lambda_exp and t ∈ Γ₀(p^r) with λ·M·t equal to the normal form.
#[derive(Clone, Debug, PartialEq)]
pub struct ReductionWitness {
    pub lambda_exp: i64,
    pub t: Mat2,
}

fn v(x: &BigRational, p: u64) -> Option<i64> {
    arith::vp(x, p)
}

/// v(x) ≤ v(y) with v(0) = ∞.
fn le(x: Option<i64>, y: Option<i64>) -> bool {
    match (x, y) {
        (_, None) => true,
        (None, Some(_)) => false,
        (Some(a), Some(b)) => a <= b,
    }
}

fn plus(x: Option<i64>, k: i64) -> Option<i64> {
    x.map(|a| a + k)
}

fn pr(p: u64, e: i64) -> BigRational {
    debug_assert!(e >= 0);
    BigRational::from_integer(pow(p, e as u32))
}

fn res(x: &BigRational, p: u64, e: i64) -> BigRational {
    if e <= 0 {
        return BigRational::zero();
    }
    BigRational::from_integer(arith::residue(x, p, e as u32))
}

/// Normal form of M at length r.
///
/// With `precision = Some(k)` the entries are treated as known modulo p^k
/// (after clearing the common power of p) and a precision error is raised when
/// the class is not determined by that much information.
pub fn reduce(m: &Mat2, p: u64, r: u32, precision: Option<u32>) -> Result<(GeodesicClass, ReductionWitness)> {
    let det = m.det();
    if det.is_zero() {
        return Err(Error::Domain("singular matrix".into()));
    }
    let kmin = m.min_valuation(p).expect("nonzero matrix");
    let lam = if kmin >= 0 {
        BigRational::from_integer(pow(p, kmin as u32)).recip()
    } else {
        BigRational::from_integer(pow(p, (-kmin) as u32))
    };
    let m1 = m.scale(&lam);
    let n_det = v(&m1.det(), p).unwrap();
    if let Some(prec) = precision {
        let avail = prec as i64 - kmin.max(0);
        if avail < n_det + r as i64 {
            return Err(Error::Precision {
                required: (n_det + r as i64 + kmin.max(0)) as u32,
                available: prec,
            });
        }
    }
    let (x, tag) = normal_form(&m1, p, r, n_det);
    let t = m1.inverse().unwrap().mul(&x);
    Ok((GeodesicClass { p, r, tag, rep: x }, ReductionWitness { lambda_exp: -kmin, t }))
}

fn normal_form(m: &Mat2, p: u64, r: u32, n: i64) -> (Mat2, FormTag) {
    let (a, b, c, d) = (&m.a, &m.b, &m.c, &m.d);
    let (va, vb, vc, vd) = (v(a, p), v(b, p), v(c, p), v(d, p));
    let ri = r as i64;
    let zero = BigRational::zero;
    let one = BigRational::one;
    if r == 0 {
        // GL₂(Z_p) contains the column swap
        let (a, c, va) = if le(va, vb) { (a, c, va) } else { (b, d, vb) };
        let mm = va.unwrap();
        let nn = n - mm;
        let cc = res(&(c * pr(p, mm) / a), p, nn);
        return (Mat2::new(pr(p, mm), zero(), cc, pr(p, nn)), FormTag::Lower);
    }
    if le(va, vb) {
        let mm = va.unwrap();
        let nn = n - mm;
        let cc = res(&(c * pr(p, mm) / a), p, nn + ri);
        return (Mat2::new(pr(p, mm), zero(), cc, pr(p, nn)), FormTag::Lower);
    }
    let beta = vb.unwrap();
    if le(plus(vb, ri), va) {
        let nn = n - beta;
        let dd = res(&(d * pr(p, beta) / b), p, nn);
        return (Mat2::new(zero(), pr(p, beta), pr(p, nn), dd), FormTag::Anti);
    }
    let alpha = va.unwrap();
    if le(vc, vd) {
        let gamma = vc.unwrap();
        let aa = res(&(a * pr(p, gamma) / c), p, beta + ri);
        let tag = if beta == 0 { FormTag::CornerLeft } else { FormTag::CornerRight };
        return (Mat2::new(aa, pr(p, beta), pr(p, gamma), zero()), tag);
    }
    let eps = vd.unwrap();
    if le(plus(vd, ri), vc) {
        let bb = res(&(b * pr(p, eps) / d), p, alpha);
        return (Mat2::new(pr(p, alpha), bb, zero(), pr(p, eps)), FormTag::Upper);
    }
    let k = vc.unwrap();
    if beta == 0 {
        let cc = res(&(c * pr(p, alpha) / a), p, n + ri - alpha);
        let dd = res(&(d / b), p, n);
        (Mat2::new(pr(p, alpha), one(), cc, dd), FormTag::MixedTop)
    } else {
        debug_assert_eq!(eps, 0);
        let aa = res(&(a * pr(p, k) / c), p, n + ri - k);
        let bb = res(&(b / d), p, n);
        (Mat2::new(aa, bb, pr(p, k), one()), FormTag::MixedBottom)
    }
}

/// Exact-input reduction.
pub fn reduce_exact(m: &Mat2, p: u64, r: u32) -> GeodesicClass {
    reduce(m, p, r, None).expect("nonsingular").0
}

impl GeodesicClass {
    /// The privileged geodesic of length r: the identity matrix.
    pub fn privileged(p: u64, r: u32) -> Self {
        reduce_exact(&Mat2::identity(), p, r)
    }

    pub fn from_matrix(m: &Mat2, p: u64, r: u32) -> Result<Self> {
        Ok(reduce(m, p, r, None)?.0)
    }

    pub fn length(&self) -> u32 {
        self.r
    }

    /// v_p(det) of the representative.
    pub fn det_valuation(&self) -> i64 {
        v(&self.rep.det(), self.p).unwrap()
    }

    /// Class of A·g.
    pub fn left_act(&self, a: &Mat2) -> Result<Self> {
        Self::from_matrix(&a.mul(&self.rep), self.p, self.r)
    }

    /// The r+1 vertices M·diag(1, p^i), i = 0..r.
    pub fn points(&self) -> Vec<GeodesicClass> {
        (0..=self.r)
            .map(|i| {
                let d = Mat2::diag(BigRational::one(), pr(self.p, i as i64));
                reduce_exact(&self.rep.mul(&d), self.p, 0)
            })
            .collect()
    }

    pub fn origin(&self) -> GeodesicClass {
        reduce_exact(&self.rep, self.p, 0)
    }

    pub fn terminus(&self) -> GeodesicClass {
        let d = Mat2::diag(BigRational::one(), pr(self.p, self.r as i64));
        reduce_exact(&self.rep.mul(&d), self.p, 0)
    }

    /// Initial subgeodesic of length r−1.
    pub fn truncate(&self) -> Result<GeodesicClass> {
        if self.r == 0 {
            return Err(Error::Argument("cannot truncate a vertex".into()));
        }
        Ok(reduce_exact(&self.rep, self.p, self.r - 1))
    }

    /// All geodesics of length r+1 whose truncation is this one.
    pub fn extend(&self) -> Vec<GeodesicClass> {
        let p = self.p;
        let step = pr(p, self.r as i64);
        let mut out: Vec<GeodesicClass> = (0..p)
            .map(|x| {
                let lower = BigRational::from_integer(BigInt::from(x)) * &step;
                let t = Mat2::new(BigRational::one(), BigRational::zero(), lower, BigRational::one());
                reduce_exact(&self.rep.mul(&t), p, self.r + 1)
            })
            .collect();
        if self.r == 0 {
            out.push(reduce_exact(&self.rep.mul(&Mat2::w()), p, 1));
        }
        out
    }

    /// Ordering key: the privileged geodesic first, then entries lexicographically.
    pub fn sort_key(&self) -> (bool, [BigRational; 4]) {
        let e = self.rep.entries();
        (!self.rep.is_identity(), [e[0].clone(), e[1].clone(), e[2].clone(), e[3].clone()])
    }

    pub fn record(&self, precision: u32) -> GeodesicRecord {
        GeodesicRecord {
            schema: 1,
            p: self.p,
            r: self.r,
            form_tag: self.tag.name().into(),
            entries: self.rep.entries().iter().map(|x| x.to_string()).collect(),
            precision,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeodesicRecord {
    pub schema: u32,
    pub p: u64,
    pub r: u32,
    pub form_tag: String,
    /// a, b, c, d as decimal strings.
    pub entries: Vec<String>,
    pub precision: u32,
}

impl GeodesicRecord {
    pub fn to_class(&self) -> Result<GeodesicClass> {
        if self.entries.len() != 4 {
            return Err(Error::Argument("geodesic record needs four entries".into()));
        }
        let e: Vec<BigRational> = self
            .entries
            .iter()
            .map(|s| crate::character::parse_rational(s))
            .collect::<Result<_>>()?;
        let m = Mat2::new(e[0].clone(), e[1].clone(), e[2].clone(), e[3].clone());
        let g = GeodesicClass::from_matrix(&m, self.p, self.r)?;
        if g.rep != m {
            return Err(Error::Argument("record entries are not a normal form".into()));
        }
        Ok(g)
    }
}

/// All (p+1)p^(n−1) geodesics of length n starting at `v` (n ≥ 1), by
/// iterated extension.
pub fn geodesics_from_vertex(v: &GeodesicClass, n: u32) -> Result<Vec<GeodesicClass>> {
    if v.r != 0 {
        return Err(Error::Argument("start must be a vertex".into()));
    }
    if n == 0 {
        return Err(Error::Argument("length must be positive".into()));
    }
    let mut layer = vec![v.clone()];
    for _ in 0..n {
        layer = layer.iter().flat_map(|g| g.extend()).collect();
    }
    Ok(layer)
}

/// Tree distance between two vertices, from elementary divisors of M⁻¹M'.
pub fn vertex_distance(u: &GeodesicClass, w: &GeodesicClass) -> u64 {
    let x = u.rep.inverse().unwrap().mul(&w.rep);
    let kmin = x.min_valuation(u.p).unwrap();
    let vd = v(&x.det(), u.p).unwrap();
    (vd - 2 * kmin) as u64
}

/// The two integral shift matrices [[p^n, 1], [0, p^n]] and [[0, 1], [−p^{2n}, 0]].
pub fn shift_matrices(p: u64, n: u32) -> (Mat2, Mat2) {
    let pn = pr(p, n as i64);
    let s1 = Mat2::new(pn.clone(), BigRational::one(), BigRational::zero(), pn.clone());
    let s2 = Mat2::new(BigRational::zero(), BigRational::one(), -(&pn * &pn), BigRational::zero());
    (s1, s2)
}

/// t ∈ Γ₀(p^r Z_p): p-integral entries, unit determinant, lower-left ≡ 0 mod p^r.
pub fn in_gamma0(t: &Mat2, p: u64, r: u32) -> bool {
    t.is_integral_at(p)
        && v(&t.det(), p) == Some(0)
        && v(&t.c, p).is_none_or(|x| x >= r as i64)
}
