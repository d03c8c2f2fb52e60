//! Geodesic functions built from quaternionic eigenforms, their transport
//! between levels, and the theta element as a finite sum over geodesics.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{self, pow};
use crate::brandt::{CycRecord, EigenformVector, IdealClassSet};
use crate::btree::{shift_matrices, GeodesicClass};
use crate::character::{adelic_value_at_p_power, ArithmeticPoint, PAdicFiniteCharacter};
use crate::cyclotomic::CyclotomicElement;
use crate::error::{Error, Result};
use crate::mat2::Mat2;
use crate::padic::PAdicScalar;
use crate::quaternion::{Lattice, LeftIdeal};
use crate::quotient::{with_precision_retry, Group, QuotientContext, QuotientDomain};

/// A function on the Γ-classes of length-n geodesics, stored as one value per
/// representative.
#[derive(Clone, Debug, PartialEq)]
pub struct GeodesicFunction {
    pub n: u32,
    pub reps: Vec<GeodesicClass>,
    pub values: Vec<CyclotomicElement>,
    pub provenance: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeodesicFunctionRecord {
    pub schema: u32,
    pub n: u32,
    pub reps: Vec<crate::btree::GeodesicRecord>,
    pub values: Vec<CycRecord>,
    pub provenance: String,
}

impl GeodesicFunction {
    pub fn constant(domain: &QuotientDomain, c: CyclotomicElement) -> Self {
        GeodesicFunction {
            n: domain.n,
            reps: domain.edges.clone(),
            values: vec![c; domain.len()],
            provenance: "constant".into(),
        }
    }

    pub fn scale(&self, c: &CyclotomicElement) -> Self {
        GeodesicFunction {
            values: self.values.iter().map(|v| v.mul(c).simplify()).collect(),
            provenance: format!("{}·({c})", self.provenance),
            ..self.clone()
        }
    }

    /// Value on the Γ-class of the literal matrix `m`, read as a length-n geodesic.
    pub fn eval(&self, ctx: &QuotientContext, m: &Mat2) -> Result<CyclotomicElement> {
        let g = GeodesicClass::from_matrix(m, ctx.p, self.n)?;
        match ctx.locate(&g, &self.reps, Group::Gamma)? {
            Some((i, _)) => Ok(self.values[i].clone()),
            None => Err(Error::Inconsistency(format!("{g} matches no representative"))),
        }
    }

    pub fn record(&self) -> GeodesicFunctionRecord {
        GeodesicFunctionRecord {
            schema: 1,
            n: self.n,
            reps: self.reps.iter().map(|g| g.record(0)).collect(),
            values: self.values.iter().map(CycRecord::from).collect(),
            provenance: self.provenance.clone(),
        }
    }

    pub fn from_record(r: &GeodesicFunctionRecord) -> Result<Self> {
        if r.reps.len() != r.values.len() {
            return Err(Error::Argument("representative and value counts differ".into()));
        }
        Ok(GeodesicFunction {
            n: r.n,
            reps: r.reps.iter().map(|g| g.to_class()).collect::<Result<_>>()?,
            values: r.values.iter().map(|v| v.value()).collect::<Result<_>>()?,
            provenance: r.provenance.clone(),
        })
    }
}

/// J_g = {y ∈ R_N : ι(y)·g ≡ 0 mod p^d, lower-left ≡ 0 mod p^(d+n)}, d = v_p(det g):
/// a left Rⁿ-ideal whose class corresponds to the Γ-class of g.
pub fn geodesic_ideal(ctx: &QuotientContext, classes: &IdealClassSet, g: &GeodesicClass) -> Result<LeftIdeal> {
    let lam = ctx.hom_lattice(&g.rep, &Mat2::identity(), g.r, Group::Gamma)?;
    LeftIdeal::new(&classes.order, Lattice::from_basis(&lam.basis)).map_err(|_| Error::Precision {
        required: ctx.precision + 1,
        available: ctx.precision,
    })
}

/// Ideal-class index of each representative of `domain`.
pub fn match_classes(ctx: &QuotientContext, classes: &IdealClassSet, domain: &QuotientDomain) -> Result<Vec<usize>> {
    let h = classes.class_number();
    let found = with_precision_retry(ctx, |c| {
        let idx: Vec<usize> = domain
            .edges
            .iter()
            .map(|g| {
                let j = geodesic_ideal(c, classes, g)?;
                classes.class_of(&j).ok_or(Error::Precision { required: c.precision + 1, available: c.precision })
            })
            .collect::<Result<_>>()?;
        let mut seen = vec![false; h];
        for &i in &idx {
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::Precision { required: c.precision + 1, available: c.precision });
            }
        }
        Ok(idx)
    });
    match found {
        Err(Error::Precision { available, .. }) => {
            Err(Error::Inconsistency(format!("ideal-class matching is not a bijection at precision {available}")))
        }
        other => other,
    }
}

/// Transfers an eigenform vector on ideal classes to the Γ-representatives of
/// `domain` through the ideals J_g.
pub fn function_from_eigenvector(
    v: &EigenformVector,
    classes: &IdealClassSet,
    ctx: &QuotientContext,
    domain: &QuotientDomain,
) -> Result<GeodesicFunction> {
    if domain.group != Group::Gamma || domain.n != ctx.n {
        return Err(Error::Argument("expected a Γ-domain at the context level".into()));
    }
    if classes.order.lattice != ctx.order.lattice {
        return Err(Error::Argument("ideal classes and domain use different orders".into()));
    }
    let h = classes.class_number();
    if v.values.len() != h || domain.len() != h {
        return Err(Error::Argument(format!(
            "{} values, {} representatives, class number {h}",
            v.values.len(),
            domain.len()
        )));
    }
    let idx = match_classes(ctx, classes, domain)?;
    Ok(GeodesicFunction {
        n: domain.n,
        reps: domain.edges.clone(),
        values: idx.iter().map(|&i| v.values[i].clone()).collect(),
        provenance: format!("eigenvector on level p^{}", domain.n),
    })
}

fn pull_back(f: &GeodesicFunction, ctx: &QuotientContext, target: &QuotientDomain, label: String) -> Result<GeodesicFunction> {
    let values = with_precision_retry(ctx, |c| {
        target
            .edges
            .iter()
            .map(|g| {
                let t = GeodesicClass::from_matrix(&g.rep, c.p, f.n)?;
                match c.locate(&t, &f.reps, Group::Gamma)? {
                    Some((i, _)) => Ok(f.values[i].clone()),
                    None => Err(Error::Inconsistency(format!("{t} has no class in the source domain"))),
                }
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(GeodesicFunction { n: target.n, reps: target.edges.clone(), values, provenance: format!("{}; {label}", f.provenance) })
}

/// Values of a level-p^m function on the representatives of a level-p^n
/// domain (n ≥ m), via the initial length-m subgeodesic.
pub fn transport_level_p(f: &GeodesicFunction, ctx_m: &QuotientContext, target: &QuotientDomain) -> Result<GeodesicFunction> {
    if target.n < f.n {
        return Err(Error::Argument(format!("cannot transport from p-level {} down to {}", f.n, target.n)));
    }
    if target.n == f.n && target.edges == f.reps {
        return Ok(f.clone());
    }
    pull_back(f, ctx_m, target, format!("p-level {}→{}", f.n, target.n))
}

/// Values of a function for a coarser tame order on the representatives of a
/// domain for the finer one; `coarse` is the context of the coarser order.
pub fn transport_level_n(f: &GeodesicFunction, coarse: &QuotientContext, target: &QuotientDomain) -> Result<GeodesicFunction> {
    if target.n != f.n {
        return Err(Error::Argument("tame transport keeps the p-level".into()));
    }
    if target.edges == f.reps && coarse.tame.level_number() == target.level {
        return Ok(f.clone());
    }
    pull_back(f, coarse, target, format!("tame level {}→{}", coarse.tame.level_number(), target.level))
}

/// For each representative g, the classes of g·s₁ and g·s₂.
pub fn twist_shift_classes(ctx: &QuotientContext, domain: &QuotientDomain) -> Result<Vec<(usize, usize)>> {
    let mats: Vec<Mat2> = domain.edges.iter().map(|g| g.rep.clone()).collect();
    shifted_classes(ctx, domain, &mats)
}

fn resolve(ctx: &QuotientContext, domain: &QuotientDomain, m: &Mat2) -> Result<usize> {
    let g = GeodesicClass::from_matrix(m, ctx.p, domain.n)?;
    ctx.locate(&g, &domain.edges, Group::Gamma)?
        .map(|(i, _)| i)
        .ok_or_else(|| Error::Inconsistency(format!("{g} matches no level-{} representative", domain.n)))
}

fn shifted_classes(ctx: &QuotientContext, domain: &QuotientDomain, mats: &[Mat2]) -> Result<Vec<(usize, usize)>> {
    let (s1, s2) = shift_matrices(ctx.p, domain.n);
    mats.iter()
        .map(|m| Ok((resolve(ctx, domain, &m.mul(&s1))?, resolve(ctx, domain, &m.mul(&s2))?)))
        .collect()
}

/// A length-n geodesic through a fixed edge, as a literal matrix with its class.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeGeodesic {
    pub matrix: Mat2,
    pub class: usize,
}

/// The p^(n−1) matrices M·[[1,0],[p·x,1]], x mod p^(n−1): the length-n
/// geodesics whose first edge is the edge M.
pub fn edge_lifts(m: &Mat2, p: u64, n: u32) -> Vec<Mat2> {
    let count = p.pow(n.saturating_sub(1));
    (0..count)
        .map(|x| {
            let c = BigRational::from_integer(BigInt::from(p * x));
            m.mul(&Mat2::new(BigRational::one(), BigRational::zero(), c, BigRational::one()))
        })
        .collect()
}

pub fn geodesics_over_edge(e: &Mat2, ctx: &QuotientContext, domain: &QuotientDomain) -> Result<Vec<EdgeGeodesic>> {
    edge_lifts(e, ctx.p, domain.n)
        .into_iter()
        .map(|m| Ok(EdgeGeodesic { class: resolve(ctx, domain, &m)?, matrix: m }))
        .collect()
}

/// Inputs of the theta sum: F¹ on edges, Gⁿ and Hⁿ at level n, the three
/// p-th eigenvalues and the character ε.
#[derive(Clone, Debug)]
pub struct TripleInput {
    pub f: GeodesicFunction,
    pub g: GeodesicFunction,
    pub h: GeodesicFunction,
    pub a_f: CyclotomicElement,
    pub a_g: CyclotomicElement,
    pub a_h: CyclotomicElement,
    pub eps: PAdicFiniteCharacter,
    pub n: u32,
}

impl TripleInput {
    pub fn check(&self, p: u64) -> Result<()> {
        if self.f.n != 1 || self.g.n != self.n || self.h.n != self.n {
            return Err(Error::Argument(format!(
                "function levels ({}, {}, {}) do not match (1, {n}, {n})",
                self.f.n,
                self.g.n,
                self.h.n,
                n = self.n
            )));
        }
        if self.n == 0 {
            return Err(Error::Argument("conductor exponent must be positive".into()));
        }
        let c = self.eps.conductor_exponent;
        if c != 0 && c != self.n {
            return Err(Error::Argument(format!("ε has conductor p^{c}, expected p^{}", self.n)));
        }
        if self.eps.prime != p {
            return Err(Error::Argument("ε is a character at a different prime".into()));
        }
        for (name, a) in [("a_p(f)", &self.a_f), ("a_p(g)", &self.a_g), ("a_p(h)", &self.a_h)] {
            if a.is_zero() {
                return Err(Error::Argument(format!("{name} vanishes")));
            }
        }
        if let Some(x) = self.a_f.as_rational() {
            if arith::vp(&x, p) != Some(0) {
                return Err(Error::Argument(format!("a_p(f) = {x} is not a {p}-adic unit")));
            }
        }
        Ok(())
    }
}

/// Exact theta value plus, when rational, its p-adic expansion.
#[derive(Clone, Debug, PartialEq)]
pub struct ThetaValue {
    pub value: CyclotomicElement,
    pub padic: Option<PAdicScalar>,
}

impl ThetaValue {
    pub fn new(value: CyclotomicElement, p: u64, precision: u32) -> Self {
        let value = value.simplify();
        let padic = value.as_rational().map(|x| PAdicScalar::from_rational(&x, p, precision.max(1)));
        ThetaValue { value, padic }
    }
}

/// Per-edge data of the sum: for each lift g of the edge, the classes of
/// g·s₁ and g·s₂.
pub fn edge_shift_data(ctx_n: &QuotientContext, edges: &[Mat2], domain_n: &QuotientDomain) -> Result<Vec<Vec<(usize, usize)>>> {
    with_precision_retry(ctx_n, |c| {
        edges
            .par_iter()
            .map(|e| shifted_classes(c, domain_n, &edge_lifts(e, c.p, domain_n.n)))
            .collect()
    })
}

/// Σ_g Gⁿ(g·s₁)·Hⁿ(g·s₂) for each edge.
pub fn inner_sums(shifts: &[Vec<(usize, usize)>], g: &GeodesicFunction, h: &GeodesicFunction) -> Vec<CyclotomicElement> {
    shifts
        .iter()
        .map(|lifts| {
            lifts
                .iter()
                .fold(CyclotomicElement::zero(), |acc, &(a, b)| acc.add(&g.values[a].mul(&h.values[b])))
                .simplify()
        })
        .collect()
}

/// ε⁻¹(pⁿ)·p^(2n)·(1 − 1/p) / (a_p(f)·a_p(g)·a_p(h))ⁿ.
pub fn prefactor(t: &TripleInput, p: u64) -> Result<CyclotomicElement> {
    let n = t.n;
    let eps = adelic_value_at_p_power(&t.eps.inverse(), n);
    let scal = BigRational::from_integer(pow(p, 2 * n)) * BigRational::new(BigInt::from(p - 1), BigInt::from(p));
    let den = t.a_f.mul(&t.a_g).mul(&t.a_h).pow(n as i64);
    let inv = den.inverse().ok_or_else(|| Error::Argument("eigenvalue product is not invertible".into()))?;
    Ok(eps.mul(&inv).scale(&scal).simplify())
}

/// Σ_e F¹(e)/#Stab(e) · inner(e), times the prefactor.
pub fn assemble(pre: &CyclotomicElement, f: &GeodesicFunction, stabilizers: &[usize], inner: &[CyclotomicElement]) -> Result<CyclotomicElement> {
    if stabilizers.len() != f.values.len() || inner.len() != f.values.len() {
        return Err(Error::Argument("stabilizer data does not match the edge list".into()));
    }
    let mut acc = CyclotomicElement::zero();
    for ((fv, &s), i) in f.values.iter().zip(stabilizers).zip(inner) {
        if s == 0 {
            return Err(Error::Argument("stabilizer order 0".into()));
        }
        acc = acc.add(&fv.mul(i).scale(&BigRational::new(BigInt::one(), BigInt::from(s))));
    }
    Ok(acc.mul(pre).simplify())
}

/// The theta element. `edge_matrices[i]` is a matrix representing the edge
/// class of `edges.edges[i]`; the integrand is evaluated on these literal
/// matrices, so any left Γ-translates give the same value.
pub fn theta_element(
    t: &TripleInput,
    edges: &QuotientDomain,
    edge_matrices: &[Mat2],
    ctx_n: &QuotientContext,
    domain_n: &QuotientDomain,
) -> Result<ThetaValue> {
    let p = ctx_n.p;
    t.check(p)?;
    if edges.n != 1 || domain_n.n != t.n || ctx_n.n != t.n {
        return Err(Error::Argument("domain levels do not match the input".into()));
    }
    if edge_matrices.len() != edges.len() || t.f.values.len() != edges.len() {
        return Err(Error::Argument("edge data has inconsistent length".into()));
    }
    if t.g.reps != domain_n.edges || t.h.reps != domain_n.edges {
        return Err(Error::Argument("Gⁿ, Hⁿ are not given on the level-n representatives".into()));
    }
    let shifts = edge_shift_data(ctx_n, edge_matrices, domain_n)?;
    let inner = inner_sums(&shifts, &t.g, &t.h);
    let pre = prefactor(t, p)?;
    let v = assemble(&pre, &t.f, &edges.stabilizers, &inner)?;
    Ok(ThetaValue::new(v, p, ctx_n.precision))
}

/// min over coefficients of v_p(a − b) in a common cyclotomic field; None if equal.
pub fn padic_distance(a: &CyclotomicElement, b: &CyclotomicElement, p: u64) -> Option<i64> {
    let d = a.sub(b);
    d.coeffs().iter().filter_map(|c| arith::vp(c, p)).min()
}

#[derive(Clone, Debug)]
pub struct LadderStep {
    pub point: ArithmeticPoint,
    pub value: ThetaValue,
    /// Distance to the previous value: None for the first entry, Some(None) if equal.
    pub distance: Option<Option<i64>>,
}

/// Runs `run` on each ladder point and records p-adic distances between
/// consecutive values.
pub fn limit_driver(p: u64, ladder: &[ArithmeticPoint], mut run: impl FnMut(&ArithmeticPoint) -> Result<ThetaValue>) -> Result<Vec<LadderStep>> {
    let mut out: Vec<LadderStep> = Vec::with_capacity(ladder.len());
    for pt in ladder {
        let value = run(pt)?;
        let distance = out.last().map(|prev| padic_distance(&value.value, &prev.value.value, p));
        out.push(LadderStep { point: pt.clone(), value, distance });
    }
    Ok(out)
}
