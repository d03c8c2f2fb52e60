//! The nine-step theta pipeline with cache reuse.

use std::collections::HashMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::cache::{cache_key, Cache, KeyParams, SCHEMA};
use super::config::{EpsilonMode, PsiSpec, RunConfig};
use super::eigendata::{Eigendata, FormLabel};
use crate::brandt::{
    brandt_matrix, eigenform_vector, left_ideal_classes, lift_character, sturm_bound, BrandtRecord, EigenformRecord,
    EigenformVector, IdealClassSet, LiftedCharacter,
};
use crate::character::{character_ladder, ArithmeticPoint, DirichletCharacter, PAdicFiniteCharacter};
use crate::cyclotomic::CyclotomicElement;
use crate::error::{Error, Result};
use crate::quaternion::order::OrderRecord;
use crate::quaternion::{eichler_order, make_algebra, maximal_order, Order};
use crate::quotient::{domains, DomainRecord, QuotientContext, QuotientDomain};
use crate::theta::{
    assemble, edge_shift_data, function_from_eigenvector, inner_sums, limit_driver, prefactor, transport_level_n,
    GeodesicFunction, LadderStep, ThetaValue, TripleInput,
};

/// Orders, ideal classes and domains at one (tame level, p-level).
#[derive(Clone, Debug)]
pub struct LevelData {
    pub tame_level: u64,
    pub ctx: QuotientContext,
    pub classes: IdealClassSet,
    pub gamma1: QuotientDomain,
    pub gamma: QuotientDomain,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct DomainPair {
    gamma1: DomainRecord,
    gamma: DomainRecord,
}

#[derive(Clone, Debug)]
pub struct FormSet {
    pub f: EigenformVector,
    pub g: EigenformVector,
    pub h: EigenformVector,
    pub a_f: CyclotomicElement,
    pub a_g: CyclotomicElement,
    pub a_h: CyclotomicElement,
}

#[derive(Clone, Debug, Serialize)]
pub struct OrdersReport {
    pub maximal: OrderRecord,
    pub orders: Vec<LevelOrder>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelOrder {
    pub tame_level: u64,
    pub p_level: u32,
    pub order: OrderRecord,
}

pub fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub struct Pipeline {
    pub cfg: RunConfig,
    cache: Option<Cache>,
    eigendata: Option<Eigendata>,
    levels: HashMap<(u64, u32), LevelData>,
    /// Timings and cache events, kept apart from result files.
    pub log: Vec<String>,
}

impl Pipeline {
    pub fn new(cfg: RunConfig) -> Result<Self> {
        let eigendata = cfg.eigendata.as_deref().map(Eigendata::load).transpose()?;
        Ok(Self::with_eigendata(cfg, eigendata))
    }

    pub fn with_eigendata(cfg: RunConfig, eigendata: Option<Eigendata>) -> Self {
        let cache = cfg.cache.clone().map(Cache::new);
        Pipeline { cfg, cache, eigendata, levels: HashMap::new(), log: Vec::new() }
    }

    pub fn fingerprint(&self) -> String {
        let mut text = self.cfg.canonical();
        if let Some(e) = &self.eigendata {
            text.push_str(&eigendata_canonical(e));
        }
        hex_digest(text.as_bytes())
    }

    fn key(&self, stage: &str, level: u64, n: u32) -> String {
        let k = KeyParams { p: self.cfg.p, ell: self.cfg.ell, level, n, precision: self.cfg.precision, schema: SCHEMA };
        cache_key(stage, &k)
    }

    pub fn maximal_order(&self) -> Result<Order> {
        maximal_order(&make_algebra(self.cfg.ell)?)
    }

    pub fn tame_order(&self, level: u64) -> Result<Order> {
        eichler_order(&self.maximal_order()?, level)
    }

    /// The tame levels used: N₁, and N₂ when it differs.
    pub fn tame_levels(&self) -> Vec<u64> {
        if self.cfg.n2 == self.cfg.n1 {
            vec![self.cfg.n1]
        } else {
            vec![self.cfg.n1, self.cfg.n2]
        }
    }

    pub fn orders_report(&self) -> Result<OrdersReport> {
        let max = self.maximal_order()?;
        let mut orders = Vec::new();
        for level in self.tame_levels() {
            let tame = eichler_order(&max, level)?;
            let mut p_levels = vec![1];
            p_levels.extend(self.cfg.ladder.iter().copied().filter(|&n| n > 1));
            for n in p_levels {
                let ctx = QuotientContext::new(&tame, self.cfg.p, n, self.cfg.precision)?;
                orders.push(LevelOrder {
                    tame_level: level,
                    p_level: n,
                    order: OrderRecord::new(&max.alg, ctx.order.level_number(), &ctx.order.basis()),
                });
            }
        }
        Ok(OrdersReport { maximal: OrderRecord::new(&max.alg, 1, &max.basis()), orders })
    }

    pub fn context(&self, tame_level: u64, n: u32) -> Result<QuotientContext> {
        QuotientContext::new(&self.tame_order(tame_level)?, self.cfg.p, n, self.cfg.precision)
    }

    pub fn classes(&self, ctx: &QuotientContext) -> Result<IdealClassSet> {
        left_ideal_classes(&ctx.order)
    }

    /// Domains at (tame level, p-level), read from the cache when possible.
    pub fn level(&mut self, tame_level: u64, n: u32) -> Result<LevelData> {
        if let Some(l) = self.levels.get(&(tame_level, n)) {
            return Ok(l.clone());
        }
        let t0 = Instant::now();
        let ctx = self.context(tame_level, n)?;
        let classes = self.classes(&ctx)?;
        let key = self.key("domain", tame_level, n);
        let cached = self.cache.as_ref().and_then(|c| c.get::<DomainPair>(&key));
        let (gamma1, gamma) = match cached {
            Some(pair) => {
                self.log.push(format!("cache hit {key}"));
                (pair.gamma1.to_domain()?, pair.gamma.to_domain()?)
            }
            None => {
                let (d1, d) = domains(&ctx, classes.class_number())?;
                if let Some(c) = &self.cache {
                    c.put(&key, &DomainPair { gamma1: d1.record(), gamma: d.record() })?;
                    self.log.push(format!("cache store {key}"));
                }
                (d1, d)
            }
        };
        if gamma.len() != classes.class_number() {
            return Err(Error::Inconsistency(format!("{key}: {} Γ-classes for class number {}", gamma.len(), classes.class_number())));
        }
        self.log.push(format!("level N={tame_level} n={n}: {:.3}s", t0.elapsed().as_secs_f64()));
        let l = LevelData { tame_level, ctx, classes, gamma1, gamma };
        self.levels.insert((tame_level, n), l.clone());
        Ok(l)
    }

    pub fn brandt_records(&mut self) -> Result<Vec<BrandtRecord>> {
        let ctx = self.context(self.cfg.n1, 1)?;
        let classes = self.classes(&ctx)?;
        let chi = LiftedCharacter::trivial(&classes.order);
        let bound = sturm_bound(2, self.cfg.n1 * self.cfg.p, self.cfg.ell)?;
        Ok((0..=bound).map(|m| brandt_matrix(&classes, &chi, m).record()).collect())
    }

    fn psi(&self) -> Result<DirichletCharacter> {
        match self.cfg.psi {
            PsiSpec::Trivial => Ok(DirichletCharacter::trivial(1)),
            PsiSpec::Quadratic(m) => DirichletCharacter::quadratic(m),
        }
    }

    /// Points of the ladder: weight 2 with ε of conductor p^n (trivial ε is
    /// taken at modulus p^n).
    pub fn points(&self) -> Result<Vec<ArithmeticPoint>> {
        match self.cfg.epsilon {
            EpsilonMode::Primitive => character_ladder(self.cfg.p, &self.cfg.ladder),
            EpsilonMode::Trivial => self
                .cfg
                .ladder
                .iter()
                .map(|&n| Ok(ArithmeticPoint { weight: 2, character: PAdicFiniteCharacter::new(self.cfg.p, n, 0, 0)? }))
                .collect(),
        }
    }

    fn eigendata(&self) -> Result<&Eigendata> {
        self.eigendata.as_ref().ok_or_else(|| Error::Argument("eigendata file is required for this stage".into()))
    }

    fn form_vector(&self, label: FormLabel, n: u32, classes: &IdealClassSet, chi: &DirichletCharacter) -> Result<EigenformVector> {
        let targets = self.eigendata()?.targets(label, n, self.cfg.p);
        let mut tag = format!("{}|{}|", label.name(), chi.modulus());
        for x in 1..=chi.modulus() {
            tag.push_str(&chi.eval(&x.into()).to_string());
            tag.push(',');
        }
        for (m, a) in &targets {
            tag.push_str(&format!("{m}:{a};"));
        }
        let stage = format!("forms_{}", &hex_digest(tag.as_bytes())[..16]);
        let key = self.key(&stage, classes.order.level_number(), n);
        if let Some(r) = self.cache.as_ref().and_then(|c| c.get::<EigenformRecord>(&key)) {
            return EigenformVector::from_record(&r);
        }
        let lifted = lift_character(chi, &classes.order)?;
        let v = eigenform_vector(classes, &lifted, &targets)?;
        if let Some(c) = &self.cache {
            c.put(&key, &v.record())?;
        }
        Ok(v)
    }

    /// Step 4: eigenform vectors of f on R¹ (trivial character) and of g, h on
    /// R₂ⁿ with characters ψε⁻¹ and ψ⁻¹ε.
    pub fn forms(&mut self, eps: &PAdicFiniteCharacter, n: u32) -> Result<FormSet> {
        let p = self.cfg.p;
        let l1 = self.level(self.cfg.n1, 1)?;
        let l2 = self.level(self.cfg.n2, n)?;
        let psi = self.psi()?;
        let e = eps.to_dirichlet();
        let chi_g = psi.mul(&e.inverse());
        let chi_h = psi.inverse().mul(&e);
        let f = self.form_vector(FormLabel::F, n, &l1.classes, &DirichletCharacter::trivial(1))?;
        let g = self.form_vector(FormLabel::G, n, &l2.classes, &chi_g)?;
        let h = self.form_vector(FormLabel::H, n, &l2.classes, &chi_h)?;
        let ed = self.eigendata()?;
        Ok(FormSet {
            f,
            g,
            h,
            a_f: ed.a_p(FormLabel::F, n, p)?,
            a_g: ed.a_p(FormLabel::G, n, p)?,
            a_h: ed.a_p(FormLabel::H, n, p)?,
        })
    }

    /// Step 5: the triple (F¹, Gⁿ, Hⁿ) on the representatives of R¹ and Rⁿ.
    pub fn functions(&mut self, forms: &FormSet, n: u32) -> Result<(GeodesicFunction, GeodesicFunction, GeodesicFunction)> {
        let l1 = self.level(self.cfg.n1, 1)?;
        let ln = self.level(self.cfg.n1, n)?;
        let l2 = self.level(self.cfg.n2, n)?;
        let f = function_from_eigenvector(&forms.f, &l1.classes, &l1.ctx, &l1.gamma)?;
        let lift = |v: &EigenformVector| -> Result<GeodesicFunction> {
            let coarse = function_from_eigenvector(v, &l2.classes, &l2.ctx, &l2.gamma)?;
            transport_level_n(&coarse, &l2.ctx, &ln.gamma)
        };
        Ok((f, lift(&forms.g)?, lift(&forms.h)?))
    }

    /// Steps 1–9 for one ladder point; errors carry the failing step.
    pub fn theta(&mut self, point: &ArithmeticPoint) -> Result<ThetaValue> {
        let t0 = Instant::now();
        let eps = point.character.clone();
        let n = eps.conductor_exponent;
        if n == 0 || eps.prime != self.cfg.p {
            return Err(Error::Argument("ladder characters need conductor p^n with n ≥ 1".into()).at_step(1));
        }
        let tame = self.tame_order(self.cfg.n1).map_err(|e| e.at_step(2))?;
        QuotientContext::new(&tame, self.cfg.p, n, self.cfg.precision).map_err(|e| e.at_step(2))?;
        let mut levels = vec![(self.cfg.n1, 1), (self.cfg.n1, n), (self.cfg.n2, n)];
        levels.dedup();
        for (lvl, k) in levels {
            self.level(lvl, k).map_err(|e| e.at_step(3))?;
        }
        let forms = self.forms(&eps, n).map_err(|e| e.at_step(4))?;
        let (f, g, h) = self.functions(&forms, n).map_err(|e| e.at_step(5))?;
        let l1 = self.level(self.cfg.n1, 1)?;
        let ln = self.level(self.cfg.n1, n)?;
        let edges: Vec<_> = l1.gamma.edges.iter().map(|e| e.rep.clone()).collect();
        let shifts = edge_shift_data(&ln.ctx, &edges, &ln.gamma).map_err(|e| e.at_step(6))?;
        if shifts.iter().flatten().any(|&(a, b)| a >= g.values.len() || b >= h.values.len()) {
            return Err(Error::Inconsistency("shift class out of range".into()).at_step(7));
        }
        let inner = inner_sums(&shifts, &g, &h);
        let input = TripleInput { f, g, h, a_f: forms.a_f, a_g: forms.a_g, a_h: forms.a_h, eps, n };
        input.check(self.cfg.p).map_err(|e| e.at_step(8))?;
        let pre = prefactor(&input, self.cfg.p).map_err(|e| e.at_step(8))?;
        let v = assemble(&pre, &input.f, &l1.gamma.stabilizers, &inner).map_err(|e| e.at_step(9))?;
        self.log.push(format!("theta n={n}: {:.3}s", t0.elapsed().as_secs_f64()));
        Ok(ThetaValue::new(v, self.cfg.p, self.cfg.precision))
    }

    pub fn limit(&mut self) -> Result<Vec<LadderStep>> {
        let points = self.points().map_err(|e| e.at_step(1))?;
        let p = self.cfg.p;
        limit_driver(p, &points, |pt| self.theta(pt))
    }
}

fn eigendata_canonical(e: &Eigendata) -> String {
    e.rows.iter().map(|r| format!("{} {} {} {}\n", r.form.name(), r.n, r.m, r.value)).collect()
}
