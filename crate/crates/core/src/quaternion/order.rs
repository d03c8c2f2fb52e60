//! Maximal and Eichler orders, left ideals and index-p sublattices.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::enumerate::short_vectors;
use super::lattice::Lattice;
use super::splitting::splitting_map;
use super::{auxiliary_s, Quaternion, QuaternionAlgebra};
use crate::arith::{self, big, ratio};
use crate::error::{Error, Result};
use crate::hnf::congruence_kernel;

/// An order together with its level factorisation (primes q with exponent e,
/// the order being Γ₀(q^e)-shaped at q).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Order {
    pub alg: QuaternionAlgebra,
    pub lattice: Lattice,
    pub level: Vec<(u64, u32)>,
}

fn q4(c: [i64; 4], d: i64) -> Quaternion {
    Quaternion(std::array::from_fn(|t| ratio(c[t], d)))
}

impl Order {
    pub fn basis(&self) -> Vec<Quaternion> {
        self.lattice.basis()
    }

    pub fn contains(&self, x: &Quaternion) -> bool {
        self.lattice.contains(x)
    }

    pub fn level_number(&self) -> u64 {
        self.level.iter().map(|&(q, e)| q.pow(e)).product()
    }

    /// Reduced discriminant: sqrt of |det(trd(b_i b_j))|.
    pub fn discriminant(&self) -> BigInt {
        let d = self.lattice.reduced_trace_det(&self.alg).abs();
        assert!(d.is_integer(), "order with non-integral trace form");
        d.to_integer().sqrt()
    }

    pub fn is_order(&self) -> bool {
        self.contains(&Quaternion::one()) && self.lattice.is_closed_under_mul(&self.alg)
    }

    /// Elements of norm exactly `n`, up to sign.
    pub fn elements_of_norm(&self, n: &BigRational) -> Vec<Quaternion> {
        lattice_elements_of_norm(&self.alg, &self.lattice, n)
    }

    /// Number of units (both signs).
    pub fn unit_count(&self) -> usize {
        2 * self.elements_of_norm(&BigRational::one()).len()
    }

    pub fn record(&self) -> OrderRecord {
        OrderRecord::new(&self.alg, self.level_number(), &self.basis())
    }
}

/// Lattice vectors of reduced norm `n`, up to sign, as quaternions.
pub fn lattice_elements_of_norm(alg: &QuaternionAlgebra, l: &Lattice, n: &BigRational) -> Vec<Quaternion> {
    let basis = l.basis();
    short_vectors(&l.gram(alg), n)
        .into_iter()
        .filter(|(_, v)| v == n)
        .map(|(c, _)| combine(&basis, &c))
        .collect()
}

pub fn combine(basis: &[Quaternion], c: &[BigInt]) -> Quaternion {
    let mut q = Quaternion::zero();
    for (ci, bi) in c.iter().zip(basis) {
        if ci.is_zero() {
            continue;
        }
        q = q.add(&bi.scale(&BigRational::from_integer(ci.clone())));
    }
    q
}

/// The maximal order of the classical explicit construction.
pub fn maximal_order(alg: &QuaternionAlgebra) -> Result<Order> {
    let ell = alg.ell as i64;
    let basis = if alg.ell % 4 == 3 {
        vec![q4([1, 0, 1, 0], 2), q4([0, 1, 0, 1], 2), q4([0, 0, 1, 0], 1), q4([0, 0, 0, 1], 1)]
    } else if alg.ell % 8 == 5 {
        vec![q4([1, 0, 1, 1], 2), q4([0, 1, 2, 1], 4), q4([0, 0, 1, 0], 1), q4([0, 0, 0, 1], 1)]
    } else {
        let q = alg.aux_prime.ok_or_else(|| Error::Argument("missing auxiliary prime".into()))? as i64;
        let s = auxiliary_s(alg.ell, q as u64) as i64;
        vec![
            q4([1, 0, 1, 0], 2),
            q4([0, 1, 0, 1], 2),
            q4([0, 0, 0, 1], 1),
            q4([0, 0, ell, s + q], ell * q),
        ]
    };
    let order = Order { alg: alg.clone(), lattice: Lattice::from_basis(&basis), level: vec![] };
    if !order.is_order() {
        return Err(Error::Inconsistency(format!("basis for ℓ = {} is not closed under multiplication", alg.ell)));
    }
    if order.discriminant() != big(ell) {
        return Err(Error::Inconsistency(format!(
            "order for ℓ = {} has discriminant {}",
            alg.ell,
            order.discriminant()
        )));
    }
    Ok(order)
}

/// Refine `order` at the prime q: keep x with ι_q(x) lower-left ≡ 0 mod q^e.
pub fn refine_at(order: &Order, q: u64, e: u32) -> Result<Order> {
    if e == 0 {
        return Ok(order.clone());
    }
    if q == order.alg.ell {
        return Err(Error::Argument(format!("level prime {q} equals the ramified prime")));
    }
    if order.level.iter().any(|&(r, _)| r == q) {
        return Err(Error::Argument(format!("order already has level at {q}")));
    }
    let split = splitting_map(&order.alg, q, e)?;
    let basis = order.basis();
    let mut coeffs = Vec::with_capacity(4);
    for b in &basis {
        coeffs.push(split.lower_left(b, e)?);
    }
    let ker = congruence_kernel(4, &[(coeffs, arith::pow(q, e))]);
    let gens: Vec<Quaternion> = ker.iter().map(|u| combine(&basis, u)).collect();
    let mut level = order.level.clone();
    level.push((q, e));
    level.sort();
    let out = Order { alg: order.alg.clone(), lattice: Lattice::from_basis(&gens), level };
    if !out.is_order() {
        return Err(Error::Inconsistency(format!("refinement at {q}^{e} is not an order")));
    }
    Ok(out)
}

/// Eichler order of level `n` inside `max` (n coprime to 2ℓ).
pub fn eichler_order(max: &Order, n: u64) -> Result<Order> {
    if n == 0 {
        return Err(Error::Argument("level must be positive".into()));
    }
    if n.is_multiple_of(max.alg.ell) {
        return Err(Error::Argument(format!("level {n} shares a factor with ℓ = {}", max.alg.ell)));
    }
    if n.is_multiple_of(2) {
        return Err(Error::Argument(format!("even level {n} is not supported")));
    }
    let mut o = max.clone();
    for (q, e) in arith::factorize(n) {
        o = refine_at(&o, q, e)?;
    }
    Ok(o)
}

/// All 1+p+p²+p³ sublattices of index p, via the four Hermite shapes.
pub fn sublattices_index_p(l: &Lattice, p: u64) -> Vec<Lattice> {
    let b = l.basis();
    let pi = p as i64;
    let mut out = Vec::new();
    let mut shapes: Vec<[[i64; 4]; 4]> = Vec::new();
    for pivot in 0..4 {
        // pivot row p·e_pivot, rows e_t + x_t e_pivot for t > pivot, e_t for t < pivot
        let free = 3 - pivot;
        let count = (p as usize).pow(free as u32);
        for idx in 0..count {
            let mut m = [[0i64; 4]; 4];
            let mut rest = idx;
            for (t, row) in m.iter_mut().enumerate() {
                row[t] = 1;
            }
            m[pivot][pivot] = pi;
            for t in (pivot + 1)..4 {
                m[t][pivot] = (rest % p as usize) as i64;
                rest /= p as usize;
            }
            shapes.push(m);
        }
    }
    for m in shapes {
        let gens: Vec<Quaternion> = m
            .iter()
            .map(|row| combine(&b, &row.iter().map(|&x| big(x)).collect::<Vec<_>>()))
            .collect();
        out.push(Lattice::from_basis(&gens));
    }
    out
}

/// A left ideal of a fixed order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeftIdeal {
    pub lattice: Lattice,
}

impl LeftIdeal {
    pub fn new(order: &Order, lattice: Lattice) -> Result<Self> {
        let ob = order.basis();
        for b in lattice.basis() {
            for r in &ob {
                if !lattice.contains(&order.alg.mul(r, &b)) {
                    return Err(Error::Domain("lattice is not a left ideal of the order".into()));
                }
            }
        }
        Ok(LeftIdeal { lattice })
    }

    pub fn unit(order: &Order) -> Self {
        LeftIdeal { lattice: order.lattice.clone() }
    }

    pub fn norm(&self, alg: &QuaternionAlgebra) -> BigRational {
        self.lattice.norm(alg)
    }

    pub fn right_order(&self, alg: &QuaternionAlgebra) -> Result<Lattice> {
        self.lattice.right_order(alg)
    }

    pub fn right_unit_count(&self, alg: &QuaternionAlgebra) -> Result<usize> {
        let ro = self.right_order(alg)?;
        Ok(2 * lattice_elements_of_norm(alg, &ro, &BigRational::one()).len())
    }

    /// Some b with self = other·b, if the classes agree.
    pub fn equivalence(&self, other: &LeftIdeal, alg: &QuaternionAlgebra) -> Option<Quaternion> {
        let prod = other.lattice.conj().product(alg, &self.lattice);
        let target = self.norm(alg) * other.norm(alg);
        let x = lattice_elements_of_norm(alg, &prod, &target).into_iter().next()?;
        Some(x.scale(&other.norm(alg).recip()))
    }

    pub fn is_equivalent(&self, other: &LeftIdeal, alg: &QuaternionAlgebra) -> bool {
        self.equivalence(other, alg).is_some()
    }
}

/// Serialised form of an order or ideal basis.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderRecord {
    pub schema: u32,
    pub algebra: AlgebraRecord,
    pub level: u64,
    pub basis: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlgebraRecord {
    pub a: i64,
    pub b: i64,
    pub ell: u64,
}

impl OrderRecord {
    pub fn new(alg: &QuaternionAlgebra, level: u64, basis: &[Quaternion]) -> Self {
        OrderRecord {
            schema: 1,
            algebra: AlgebraRecord { a: alg.a, b: alg.b, ell: alg.ell },
            level,
            basis: basis
                .iter()
                .map(|q| q.0.iter().map(|x| format!("{}/{}", x.numer(), x.denom())).collect())
                .collect(),
        }
    }

    pub fn basis(&self) -> Result<Vec<Quaternion>> {
        self.basis
            .iter()
            .map(|row| {
                if row.len() != 4 {
                    return Err(Error::Argument("basis rows need 4 entries".into()));
                }
                let mut c: [BigRational; 4] = std::array::from_fn(|_| BigRational::zero());
                for (t, s) in row.iter().enumerate() {
                    c[t] = crate::character::parse_rational(s)?;
                }
                Ok(Quaternion(c))
            })
            .collect()
    }
}
