//! Fundamental domains for Γ¹ ⊂ Γ = ι_p(R[1/p]^×) acting on geodesics of the
//! Bruhat-Tits tree, with Hom-lattice equivalence tests.

use std::collections::VecDeque;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{self, pow};
use crate::btree::{geodesics_from_vertex, reduce, GeodesicClass, GeodesicRecord};
use crate::error::{Error, Result};
use crate::hnf::congruence_kernel;
use crate::linalg::Matrix;
use crate::mat2::Mat2;
use crate::quaternion::enumerate::short_vectors;
use crate::quaternion::order::{combine, lattice_elements_of_norm, refine_at};
use crate::quaternion::{splitting_map, Lattice, Order, Quaternion, SplittingMap};

const MAX_PRECISION: u32 = 1024;
const MAX_VERTICES: usize = 10_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Group {
    /// Image of the reduced-norm-one elements.
    Gamma1,
    /// Image of the full unit group of R[1/p].
    Gamma,
}

impl Group {
    pub fn name(&self) -> &'static str {
        match self {
            Group::Gamma1 => "gamma1",
            Group::Gamma => "gamma",
        }
    }
}

/// Shared data: the tame order R_N (maximal at p), the order Rⁿ of p-level n
/// inside it, and ι_p images of a basis of R_N.
#[derive(Clone, Debug)]
pub struct QuotientContext {
    pub p: u64,
    pub n: u32,
    pub tame: Order,
    pub order: Order,
    pub split: SplittingMap,
    basis: Vec<Quaternion>,
    images: Vec<Mat2>,
    /// Digits to which `images` are correct.
    pub precision: u32,
}

/// Λ(u, v) = {x ∈ R_N : adj(v)ι(x)u ≡ 0 mod p^D, lower-left ≡ 0 mod p^(D+r)}
/// with D = v_p(det u) + v_p(det v); every element has norm ≥ p^D.
#[derive(Clone, Debug)]
pub struct HomLattice {
    pub basis: Vec<Quaternion>,
    pub gram: Matrix<BigRational>,
    pub d: u32,
}

impl HomLattice {
    pub fn target_norm(&self, p: u64) -> BigRational {
        BigRational::from_integer(pow(p, self.d))
    }

    /// Elements of norm exactly p^D, up to sign, in increasing coordinate order.
    pub fn minimal_elements(&self, p: u64) -> Result<Vec<Quaternion>> {
        let target = self.target_norm(p);
        let mut out = Vec::new();
        for (c, val) in short_vectors(&self.gram, &target) {
            if val < target {
                return Err(Error::Inconsistency(format!("Hom-lattice vector of norm {val} below {target}")));
            }
            out.push(normalize_sign(combine(&self.basis, &c)));
        }
        out.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(out)
    }

    pub fn minimal_norm(&self) -> BigRational {
        let (_, red) = crate::quaternion::enumerate::lll_reduce(&self.gram);
        let mut bound = (0..red.len()).map(|i| red[i][i].clone()).min().unwrap();
        loop {
            if let Some((_, v)) = short_vectors(&self.gram, &bound).into_iter().next() {
                return v;
            }
            bound *= BigRational::from_integer(BigInt::from(2));
        }
    }
}

/// First nonzero coordinate positive.
pub fn normalize_sign(x: Quaternion) -> Quaternion {
    match x.0.iter().find(|c| !c.is_zero()) {
        Some(c) if c.is_negative() => x.neg(),
        _ => x,
    }
}

fn vdet(m: &Mat2, p: u64) -> u32 {
    arith::vp(&m.det(), p).expect("nonsingular") as u32
}

impl QuotientContext {
    pub fn new(tame: &Order, p: u64, n: u32, precision: u32) -> Result<Self> {
        if tame.level.iter().any(|&(q, _)| q == p) {
            return Err(Error::Argument(format!("tame order already has level at {p}")));
        }
        let order = refine_at(tame, p, n)?;
        let split = splitting_map(&tame.alg, p, precision)?;
        let basis = tame.basis();
        let mut loss = 0u32;
        let mut images = Vec::with_capacity(4);
        for b in &basis {
            let s = b.0.iter().filter_map(|c| arith::vp(c, p)).min().unwrap_or(0).min(0);
            loss = loss.max((-s) as u32);
            let m = split.image(b);
            if !m.is_integral_at(p) {
                return Err(Error::Precision { required: 2 * (-s) as u32 + 1, available: precision });
            }
            images.push(m.reduce(p, precision));
        }
        let out = QuotientContext { p, n, tame: tame.clone(), order, split, basis, images, precision: precision - loss };
        out.check_order_images()?;
        Ok(out)
    }

    pub fn with_precision(&self, precision: u32) -> Result<Self> {
        Self::new(&self.tame, self.p, self.n, precision)
    }

    fn check_order_images(&self) -> Result<()> {
        let pn = BigRational::from_integer(pow(self.p, self.n));
        for b in self.order.basis() {
            let m = self.image(&b)?;
            if !(&m.c / &pn).is_integer() {
                return Err(Error::Inconsistency("order basis is not upper triangular mod p^n".into()));
            }
        }
        Ok(())
    }

    fn coords(&self, x: &Quaternion) -> Result<Vec<BigInt>> {
        let c = self
            .tame
            .lattice
            .coords(x)
            .ok_or_else(|| Error::Domain(format!("{x} is not in the tame order")))?;
        c.iter()
            .map(|v| if v.is_integer() { Ok(v.to_integer()) } else { Err(Error::Domain(format!("{x} is not in the tame order"))) })
            .collect()
    }

    /// ι_p(x) for x ∈ R_N, integral residues mod p^precision.
    pub fn image(&self, x: &Quaternion) -> Result<Mat2> {
        let c = self.coords(x)?;
        let mut acc = Mat2::zero();
        for (ci, im) in c.iter().zip(&self.images) {
            if !ci.is_zero() {
                acc = acc.add(&im.scale(&BigRational::from_integer(ci.clone())));
            }
        }
        Ok(acc.reduce(self.p, self.precision))
    }

    /// Class of ι_p(x)·g for x ∈ R_N of nonzero norm.
    pub fn act(&self, x: &Quaternion, g: &GeodesicClass) -> Result<GeodesicClass> {
        let m = self.image(x)?.mul(&g.rep);
        Ok(reduce(&m, self.p, g.r, Some(self.precision))?.0)
    }

    pub fn hom_lattice(&self, u: &Mat2, v: &Mat2, r: u32, group: Group) -> Result<HomLattice> {
        let p = self.p;
        if !u.is_integral_at(p) || !v.is_integral_at(p) {
            return Err(Error::Argument("Hom-lattice endpoints must be integral".into()));
        }
        let d = vdet(u, p) + vdet(v, p);
        if group == Group::Gamma1 && d % 2 == 1 {
            return Err(Error::Parity(d as i64));
        }
        if d + r > self.precision {
            return Err(Error::Precision { required: d + r, available: self.precision });
        }
        let adj = v.adj();
        let ys: Vec<Mat2> = self.images.iter().map(|im| adj.mul(im).mul(u)).collect();
        let md = pow(p, d);
        let mdr = pow(p, d + r);
        let mut cons = Vec::with_capacity(4);
        for e in 0..4 {
            let coeffs: Vec<BigInt> = ys.iter().map(|y| arith::residue(y.entries()[e], p, d + r)).collect();
            cons.push((coeffs, if e == 2 { mdr.clone() } else { md.clone() }));
        }
        let ker = congruence_kernel(4, &cons);
        let basis: Vec<Quaternion> = ker.iter().map(|c| combine(&self.basis, c)).collect();
        let lat = Lattice::from_basis(&basis);
        Ok(HomLattice { basis: lat.basis(), gram: lat.gram(&self.tame.alg), d })
    }

    /// All x (up to sign) with ι(x)·g ~ h; x/p^(D/2) or x lies in Γ.
    pub fn witnesses(&self, g: &GeodesicClass, h: &GeodesicClass, group: Group) -> Result<Vec<Quaternion>> {
        if g.r != h.r || g.p != h.p {
            return Err(Error::Argument("geodesics of different length".into()));
        }
        match self.hom_lattice(&g.rep, &h.rep, g.r, group) {
            Err(Error::Parity(_)) => Ok(vec![]),
            Err(e) => Err(e),
            Ok(l) => l.minimal_elements(self.p),
        }
    }

    /// Canonical witness γ with γ·g = h, if any.
    pub fn equivalence(&self, g: &GeodesicClass, h: &GeodesicClass, group: Group) -> Result<Option<Quaternion>> {
        Ok(self.witnesses(g, h, group)?.into_iter().next())
    }

    /// Order of the stabilizer of g in Γ, as a subgroup of PGL₂.
    pub fn stabilizer_order(&self, g: &GeodesicClass) -> Result<usize> {
        Ok(self.witnesses(g, g, Group::Gamma1)?.len())
    }

    /// Index of the first representative in `reps` equivalent to g.
    pub fn locate(&self, g: &GeodesicClass, reps: &[GeodesicClass], group: Group) -> Result<Option<(usize, Quaternion)>> {
        for (i, h) in reps.iter().enumerate() {
            if let Some(w) = self.equivalence(g, h, group)? {
                return Ok(Some((i, w)));
            }
        }
        Ok(None)
    }

    /// An element of Γ outside Γ¹: an element of R_N of reduced norm p, or p³
    /// if there is none. Among candidates, the sign-normalized one with the
    /// fewest nonzero coordinates, then smallest absolute coordinates.
    pub fn find_norm_p_element(&self) -> Option<Quaternion> {
        let alg = &self.tame.alg;
        [1u32, 3].iter().find_map(|&e| {
            let target = BigRational::from_integer(pow(self.p, e));
            let mut v = lattice_elements_of_norm(alg, &self.tame.lattice, &target);
            v.sort_by_key(canonical_key);
            v.into_iter().next().map(normalize_sign)
        })
    }

    pub fn index_gamma_over_gamma1(&self) -> u32 {
        if self.find_norm_p_element().is_some() {
            2
        } else {
            1
        }
    }
}

fn canonical_key(x: &Quaternion) -> (usize, Vec<BigRational>, Vec<bool>) {
    let x = normalize_sign(x.clone());
    let support = x.0.iter().filter(|c| !c.is_zero()).count();
    let abs: Vec<BigRational> = x.0.iter().map(|c| c.abs()).collect();
    let neg: Vec<bool> = x.0.iter().map(|c| c.is_negative()).collect();
    (support, abs, neg)
}

#[derive(Clone, Debug)]
pub struct Gluing {
    pub from: GeodesicClass,
    pub to: usize,
    pub witness: Quaternion,
}

#[derive(Clone, Debug)]
pub struct QuotientDomain {
    pub group: Group,
    pub p: u64,
    pub ell: u64,
    pub level: u64,
    pub n: u32,
    pub edges: Vec<GeodesicClass>,
    pub vertices: Vec<GeodesicClass>,
    pub gluings: Vec<Gluing>,
    pub stabilizers: Vec<usize>,
}

impl QuotientDomain {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn record(&self) -> DomainRecord {
        DomainRecord {
            schema: 1,
            group: self.group.name().into(),
            p: self.p,
            ell: self.ell,
            level: self.level,
            n: self.n,
            edges: self.edges.iter().map(|g| g.record(0)).collect(),
            gluings: self
                .gluings
                .iter()
                .map(|g| GluingRecord {
                    from: g.from.record(0),
                    to: g.to,
                    witness_coords: g.witness.0.iter().map(|c| c.to_string()).collect(),
                })
                .collect(),
            stabilizers: self.stabilizers.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GluingRecord {
    pub from: GeodesicRecord,
    pub to: usize,
    pub witness_coords: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainRecord {
    pub schema: u32,
    pub group: String,
    pub p: u64,
    pub ell: u64,
    #[serde(rename = "N")]
    pub level: u64,
    pub n: u32,
    #[serde(rename = "E")]
    pub edges: Vec<GeodesicRecord>,
    #[serde(rename = "P")]
    pub gluings: Vec<GluingRecord>,
    pub stabilizers: Vec<usize>,
}

impl DomainRecord {
    pub fn to_domain(&self) -> Result<QuotientDomain> {
        let group = match self.group.as_str() {
            "gamma1" => Group::Gamma1,
            "gamma" => Group::Gamma,
            other => return Err(Error::Argument(format!("unknown group tag {other}"))),
        };
        let edges = self.edges.iter().map(|r| r.to_class()).collect::<Result<Vec<_>>>()?;
        let gluings = self
            .gluings
            .iter()
            .map(|g| {
                let c: Vec<BigRational> =
                    g.witness_coords.iter().map(|s| crate::character::parse_rational(s)).collect::<Result<_>>()?;
                if c.len() != 4 {
                    return Err(Error::Argument("witness needs four coordinates".into()));
                }
                Ok(Gluing { from: g.from.to_class()?, to: g.to, witness: Quaternion([c[0].clone(), c[1].clone(), c[2].clone(), c[3].clone()]) })
            })
            .collect::<Result<Vec<_>>>()?;
        let vertices = vec![];
        Ok(QuotientDomain {
            group,
            p: self.p,
            ell: self.ell,
            level: self.level,
            n: self.n,
            edges,
            vertices,
            gluings,
            stabilizers: self.stabilizers.clone(),
        })
    }
}

/// Γ¹-domain by breadth-first search over vertex classes.
///
/// Every Γ¹-class of vertices is visited by walking to all neighbours, and for
/// each visited vertex v all of Geod_n(v) is compared against the collected
/// representatives.
pub fn fundamental_domain_gamma1(ctx: &QuotientContext) -> Result<QuotientDomain> {
    let p = ctx.p;
    let v0 = GeodesicClass::privileged(p, 0);
    let mut vertices = vec![v0.clone()];
    let mut queue = VecDeque::from([v0]);
    let mut edges: Vec<GeodesicClass> = Vec::new();
    let mut gluings = Vec::new();
    while let Some(v) = queue.pop_front() {
        let mut geods = if ctx.n == 0 { vec![v.clone()] } else { geodesics_from_vertex(&v, ctx.n)? };
        geods.sort_by_key(|g| g.sort_key());
        for g in geods {
            if ctx.locate(&g, &edges, Group::Gamma1)?.is_none() {
                edges.push(g);
            }
        }
        let mut nbrs: Vec<GeodesicClass> = v.extend().iter().map(|e| e.terminus()).collect();
        nbrs.sort_by_key(|g| g.sort_key());
        for w in nbrs {
            match ctx.locate(&w, &vertices, Group::Gamma1)? {
                Some((to, witness)) => gluings.push(Gluing { from: w, to, witness }),
                None => {
                    vertices.push(w.clone());
                    queue.push_back(w);
                    if vertices.len() > MAX_VERTICES {
                        return Err(Error::Inconsistency("vertex search did not close up".into()));
                    }
                }
            }
        }
    }
    let stabilizers = edges.iter().map(|g| ctx.stabilizer_order(g)).collect::<Result<_>>()?;
    Ok(QuotientDomain {
        group: Group::Gamma1,
        p,
        ell: ctx.tame.alg.ell,
        level: ctx.tame.level_number(),
        n: ctx.n,
        edges,
        vertices,
        gluings,
        stabilizers,
    })
}

/// Merge Γ¹-classes into Γ-classes using the norm-p element δ: x and x' of odd
/// determinant-valuation difference are identified when δ̄·x' ~ x under Γ¹.
pub fn gamma_classes(ctx: &QuotientContext, d: &QuotientDomain, h: usize) -> Result<QuotientDomain> {
    if d.group != Group::Gamma1 {
        return Err(Error::Argument("expected a Γ¹-domain".into()));
    }
    let mut out = d.clone();
    out.group = Group::Gamma;
    if d.len() == h {
        return Ok(out);
    }
    let delta = ctx
        .find_norm_p_element()
        .ok_or_else(|| Error::Inconsistency(format!("{} Γ¹-classes but class number {h} and no norm-p element", d.len())))?;
    let delta_bar = delta.conj();
    let mut x: VecDeque<usize> = (0..d.len()).collect();
    let mut keep = Vec::new();
    while let Some(i) = x.pop_front() {
        keep.push(i);
        let xi = &d.edges[i];
        let mut rest = VecDeque::new();
        for j in x {
            let xj = &d.edges[j];
            let odd = (xi.det_valuation() - xj.det_valuation()).rem_euclid(2) == 1;
            let merged = odd && ctx.equivalence(&ctx.act(&delta_bar, xj)?, xi, Group::Gamma1)?.is_some();
            if !merged {
                rest.push_back(j);
            }
        }
        x = rest;
    }
    if keep.len() != h {
        return Err(Error::Inconsistency(format!("Γ-domain has {} classes, class number is {h}", keep.len())));
    }
    out.edges = keep.iter().map(|&i| d.edges[i].clone()).collect();
    out.stabilizers = keep.iter().map(|&i| d.stabilizers[i]).collect();
    out.gluings = vec![];
    Ok(out)
}

/// Runs `f` on contexts of increasing precision until it stops raising
/// precision errors.
pub fn with_precision_retry<T>(ctx: &QuotientContext, f: impl Fn(&QuotientContext) -> Result<T>) -> Result<T> {
    let mut c = ctx.clone();
    loop {
        match f(&c) {
            Err(Error::Precision { required, available }) => {
                let next = (2 * c.split.precision).max(required + 6);
                if next > MAX_PRECISION {
                    return Err(Error::Precision { required, available });
                }
                c = c.with_precision(next)?;
            }
            other => return other,
        }
    }
}

/// Γ¹- and Γ-domains together.
pub fn domains(ctx: &QuotientContext, h: usize) -> Result<(QuotientDomain, QuotientDomain)> {
    with_precision_retry(ctx, |c| {
        let d1 = fundamental_domain_gamma1(c)?;
        let d = gamma_classes(c, &d1, h)?;
        Ok((d1, d))
    })
}

/// Random geodesic of length r reached by a walk of `steps` moves from the
/// privileged vertex; `pick` supplies choices.
pub fn random_geodesic(p: u64, r: u32, steps: u32, mut pick: impl FnMut(u64) -> u64) -> GeodesicClass {
    let mut v = GeodesicClass::privileged(p, 0);
    for _ in 0..steps {
        let nb = v.extend();
        v = nb[pick(nb.len() as u64) as usize].terminus();
    }
    let mut g = v;
    for _ in 0..r {
        let ext = g.extend();
        g = ext[pick(ext.len() as u64) as usize].clone();
    }
    g
}
