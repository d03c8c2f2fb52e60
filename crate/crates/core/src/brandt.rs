//! Left ideal classes of Eichler orders, lifted characters, Brandt matrices
//! and extraction of eigenform value vectors.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{self, big, rat};
use crate::character::{decompose_dirichlet, DirichletCharacter, LocalComponent};
use crate::cyclotomic::CyclotomicElement;
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::quaternion::enumerate::short_vectors;
use crate::quaternion::order::{combine, lattice_elements_of_norm};
use crate::quaternion::{splitting_map, Lattice, LeftIdeal, Order, Quaternion, SplittingMap};

/// Representatives of the left ideal classes of an order.
#[derive(Clone, Debug)]
pub struct IdealClassSet {
    pub order: Order,
    pub reps: Vec<LeftIdeal>,
    pub norms: Vec<BigRational>,
    /// w_i = #(O_r(I_i)^×)/2.
    pub unit_orders: Vec<usize>,
}

impl IdealClassSet {
    pub fn class_number(&self) -> usize {
        self.reps.len()
    }

    pub fn mass(&self) -> BigRational {
        self.unit_orders
            .iter()
            .map(|&w| BigRational::new(BigInt::one(), BigInt::from(2 * w)))
            .sum()
    }

    /// Index of the class containing `ideal`.
    pub fn class_of(&self, ideal: &LeftIdeal) -> Option<usize> {
        let alg = &self.order.alg;
        self.reps.iter().position(|r| ideal.is_equivalent(r, alg))
    }
}

/// Σ 1/(2w_i) for an Eichler order of level M coprime to ℓ:
/// (ℓ−1)/24 · ∏_{q^e ∥ M} q^{e−1}(q+1).
pub fn eichler_mass(ell: u64, level: &[(u64, u32)]) -> BigRational {
    let mut m = BigRational::new(big(ell as i64 - 1), big(24));
    for &(q, e) in level {
        m *= BigRational::from_integer(arith::pow(q, e - 1) * big(q as i64 + 1));
    }
    m
}

/// Smallest prime not dividing ℓ·level.
fn neighbour_prime(order: &Order) -> u64 {
    let bad = order.alg.ell * order.level_number();
    (2u64..).find(|&q| arith::is_prime(q) && !bad.is_multiple_of(q)).unwrap()
}

/// All 2-dimensional subspaces of F_q^4 as reduced echelon 2×4 matrices.
fn planes(q: u64) -> Vec<[[u64; 4]; 2]> {
    let mut out = Vec::new();
    for c1 in 0..4 {
        for c2 in (c1 + 1)..4 {
            let free1: Vec<usize> = ((c1 + 1)..4).filter(|&c| c != c2).collect();
            let free2: Vec<usize> = ((c2 + 1)..4).collect();
            let nfree = free1.len() + free2.len();
            for idx in 0..q.pow(nfree as u32) {
                let mut m = [[0u64; 4]; 2];
                m[0][c1] = 1;
                m[1][c2] = 1;
                let mut rest = idx;
                for &c in free1.iter() {
                    m[0][c] = rest % q;
                    rest /= q;
                }
                for &c in free2.iter() {
                    m[1][c] = rest % q;
                    rest /= q;
                }
                out.push(m);
            }
        }
    }
    out
}

/// Left ideals J ⊂ I with I/J ≅ F_q² that are stable under the order.
pub fn neighbours(order: &Order, ideal: &LeftIdeal, q: u64) -> Vec<LeftIdeal> {
    let alg = &order.alg;
    let basis = ideal.lattice.basis();
    let qr = rat(q as i64);
    let ob = order.basis();
    planes(q)
        .into_par_iter()
        .filter_map(|pl| {
            let mut gens: Vec<Quaternion> = basis.iter().map(|b| b.scale(&qr)).collect();
            for row in pl.iter() {
                let c: Vec<BigInt> = row.iter().map(|&x| BigInt::from(x)).collect();
                gens.push(combine(&basis, &c));
            }
            let l = Lattice::from_basis(&gens);
            let stable = l
                .basis()
                .iter()
                .all(|b| ob.iter().all(|r| l.contains(&alg.mul(r, b))));
            stable.then_some(LeftIdeal { lattice: l })
        })
        .collect()
}

const NEIGHBOUR_CAP: usize = 20_000;

/// Class representatives by breadth-first q-neighbour search, stopped once the
/// mass formula is met.
pub fn left_ideal_classes(order: &Order) -> Result<IdealClassSet> {
    let alg = &order.alg;
    let target = eichler_mass(alg.ell, &order.level);
    let q = neighbour_prime(order);
    let first = LeftIdeal::unit(order);
    let mut reps = vec![first.clone()];
    let mut units = vec![first.right_unit_count(alg)? / 2];
    let mut mass = BigRational::new(BigInt::one(), BigInt::from(2 * units[0]));
    let mut queue = std::collections::VecDeque::from([first]);
    let mut seen = 0usize;
    while mass < target {
        let Some(cur) = queue.pop_front() else {
            return Err(Error::Inconsistency(format!("neighbour graph exhausted with mass {mass} < {target}")));
        };
        for nb in neighbours(order, &cur, q) {
            seen += 1;
            if seen > NEIGHBOUR_CAP {
                return Err(Error::Inconsistency("neighbour search cap reached before the mass".into()));
            }
            if reps.iter().any(|r| nb.is_equivalent(r, alg)) {
                continue;
            }
            let w = nb.right_unit_count(alg)? / 2;
            mass += BigRational::new(BigInt::one(), BigInt::from(2 * w));
            reps.push(nb.clone());
            units.push(w);
            queue.push_back(nb);
            if mass >= target {
                break;
            }
        }
    }
    if mass != target {
        return Err(Error::Inconsistency(format!("mass overshoot: {mass} vs {target}")));
    }
    let norms = reps.iter().map(|r| r.norm(alg)).collect();
    Ok(IdealClassSet { order: order.clone(), reps, norms, unit_orders: units })
}

/// χ̃(b) = ∏_q χ_q(ι_q(b)₂₂), read through one fixed splitting per prime.
#[derive(Clone, Debug)]
pub struct LiftedCharacter {
    pub chi: DirichletCharacter,
    locals: Vec<(LocalComponent, SplittingMap)>,
}

pub fn lift_character(chi: &DirichletCharacter, order: &Order) -> Result<LiftedCharacter> {
    let c = chi.modulus();
    if c.is_multiple_of(order.alg.ell) {
        return Err(Error::Argument(format!("character modulus {c} meets the discriminant")));
    }
    if !order.level_number().is_multiple_of(c) {
        return Err(Error::Argument(format!("modulus {c} does not divide the level {}", order.level_number())));
    }
    let mut locals = Vec::new();
    for comp in decompose_dirichlet(chi) {
        let s = splitting_map(&order.alg, comp.prime, comp.exponent)?;
        locals.push((comp, s));
    }
    Ok(LiftedCharacter { chi: chi.clone(), locals })
}

impl LiftedCharacter {
    pub fn trivial(order: &Order) -> Self {
        lift_character(&DirichletCharacter::trivial(1), order).expect("trivial character")
    }

    pub fn is_trivial(&self) -> bool {
        self.chi.is_trivial()
    }

    pub fn eval(&self, b: &Quaternion) -> CyclotomicElement {
        let mut acc = CyclotomicElement::one();
        for (comp, s) in &self.locals {
            match s.lower_right(b, comp.exponent) {
                Ok(d) => acc = acc.mul(&comp.eval(&d)),
                Err(_) => return CyclotomicElement::zero(),
            }
        }
        acc
    }
}

pub type CycMatrix = Vec<Vec<CyclotomicElement>>;

#[derive(Clone, Debug, PartialEq)]
pub struct BrandtMatrix {
    pub m: u64,
    pub entries: CycMatrix,
}

impl BrandtMatrix {
    pub fn h(&self) -> usize {
        self.entries.len()
    }

    pub fn as_rational(&self) -> Option<Matrix<BigRational>> {
        self.entries
            .iter()
            .map(|r| r.iter().map(|x| x.as_rational()).collect::<Option<Vec<_>>>())
            .collect()
    }

    pub fn mul(&self, o: &BrandtMatrix) -> CycMatrix {
        linalg::mat_mul(&self.entries, &o.entries)
    }

    pub fn record(&self) -> BrandtRecord {
        BrandtRecord {
            schema: 1,
            m: self.m,
            h: self.h(),
            entries: self.entries.iter().flatten().map(CycRecord::from).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycRecord {
    pub order: u64,
    pub coeffs: Vec<String>,
}

impl From<&CyclotomicElement> for CycRecord {
    fn from(x: &CyclotomicElement) -> Self {
        let s = x.simplify();
        CycRecord { order: s.order(), coeffs: s.coeffs().iter().map(|c| c.to_string()).collect() }
    }
}

impl CycRecord {
    pub fn value(&self) -> Result<CyclotomicElement> {
        let c = self
            .coeffs
            .iter()
            .map(|s| crate::character::parse_rational(s))
            .collect::<Result<Vec<_>>>()?;
        Ok(CyclotomicElement::new(self.order, c))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BrandtRecord {
    pub schema: u32,
    pub m: u64,
    pub h: usize,
    pub entries: Vec<CycRecord>,
}

/// b_ij(m): sum of χ̃(b)/(2w_j) over b ∈ I_j⁻¹I_i with n(b) = m·n(I_i)/n(I_j).
pub fn brandt_entry(classes: &IdealClassSet, chi: &LiftedCharacter, m: u64, i: usize, j: usize) -> CyclotomicElement {
    let alg = &classes.order.alg;
    let wj = BigRational::from_integer(BigInt::from(2 * classes.unit_orders[j]));
    if m == 0 {
        return if chi.is_trivial() {
            CyclotomicElement::from_rational(wj.recip())
        } else {
            CyclotomicElement::zero()
        };
    }
    let ii = &classes.reps[i];
    let jj = &classes.reps[j];
    let prod = jj.lattice.conj().product(alg, &ii.lattice);
    let target = rat(m as i64) * &classes.norms[i] * &classes.norms[j];
    let inv_nj = classes.norms[j].recip();
    let mut acc = CyclotomicElement::zero();
    for x in lattice_elements_of_norm(alg, &prod, &target) {
        let b = x.scale(&inv_nj);
        acc = acc.add(&chi.eval(&b)).add(&chi.eval(&b.neg()));
    }
    acc.scale(&wj.recip()).simplify()
}

pub fn brandt_matrix(classes: &IdealClassSet, chi: &LiftedCharacter, m: u64) -> BrandtMatrix {
    let h = classes.class_number();
    let flat: Vec<CyclotomicElement> = (0..h * h)
        .into_par_iter()
        .map(|t| brandt_entry(classes, chi, m, t / h, t % h))
        .collect();
    let entries = flat.chunks(h).map(|r| r.to_vec()).collect();
    BrandtMatrix { m, entries }
}

/// (b_ij(0), …, b_ij(M)).
pub fn theta_series_coefficients(
    classes: &IdealClassSet,
    chi: &LiftedCharacter,
    i: usize,
    j: usize,
    bound: u64,
) -> Vec<CyclotomicElement> {
    (0..=bound).map(|m| brandt_entry(classes, chi, m, i, j)).collect()
}

/// ⌊k·ND·∏_{q|ND}(1+1/q)/12⌋, clamped below by 1.
pub fn sturm_bound(k: u64, n: u64, d: u64) -> Result<u64> {
    if k == 0 || n == 0 {
        return Err(Error::Argument("weight and level must be positive".into()));
    }
    if d <= 1 {
        return Err(Error::Argument("a definite algebra has discriminant > 1".into()));
    }
    let nd = n * d;
    let mut v = BigRational::from_integer(big((k * nd) as i64));
    for (q, _) in arith::factorize(nd) {
        v *= BigRational::new(big(q as i64 + 1), big(q as i64));
    }
    let r = arith::floor(&(v / rat(12))).to_u64().unwrap();
    Ok(r.max(1))
}

/// Simultaneous eigenvectors of commuting matrices with rational eigenvalues.
#[derive(Clone, Debug, PartialEq)]
pub struct Diagonalization {
    /// Columns of C⁻¹ (eigenvectors), each normalised.
    pub eigenvectors: Vec<Vec<BigRational>>,
    /// eigenvalues[v][t] = eigenvalue of matrix t on eigenvector v.
    pub eigenvalues: Vec<Vec<BigRational>>,
}

impl Diagonalization {
    /// The transition matrix C with C·B·C⁻¹ diagonal.
    pub fn transition(&self) -> Matrix<BigRational> {
        let h = self.eigenvectors.len();
        let cinv: Matrix<BigRational> = (0..h).map(|r| (0..h).map(|c| self.eigenvectors[c][r].clone()).collect()).collect();
        linalg::inverse(&cinv).expect("eigenvectors form a basis")
    }
}

fn normalise_rational(v: &[BigRational]) -> Vec<BigRational> {
    let den = arith::lcm_denoms(v.iter());
    let ints: Vec<BigInt> = v.iter().map(|x| (x * BigRational::from_integer(den.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |a, x| a.gcd(x));
    let first_neg = ints.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative());
    let s = if first_neg { -g } else { g };
    ints.iter().map(|x| BigRational::new(x.clone(), s.clone())).collect()
}

/// Integer eigenvalues of `a` restricted to span(w): eigenvalues of Brandt
/// matrices are algebraic integers, so rational ones are integers within the
/// Gershgorin radius.
fn integer_eigenspaces(a: &Matrix<BigRational>, w: &[Vec<BigRational>]) -> Vec<(BigRational, Vec<Vec<BigRational>>)> {
    let h = a.len();
    let radius = a
        .iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<BigRational>())
        .max()
        .unwrap_or_else(BigRational::zero);
    let r = arith::floor(&radius).to_i64().unwrap() + 1;
    let images: Vec<Vec<BigRational>> = w.iter().map(|v| linalg::mat_vec(a, v)).collect();
    let mut out = Vec::new();
    for lam in -r..=r {
        let l = rat(lam);
        // columns (A − λ)w_k
        let m: Matrix<BigRational> = (0..h)
            .map(|row| (0..w.len()).map(|k| &images[k][row] - &l * &w[k][row]).collect())
            .collect();
        let ker = linalg::kernel(&m, w.len(), &BigRational::zero());
        if ker.is_empty() {
            continue;
        }
        let vecs = ker
            .iter()
            .map(|c| {
                (0..h)
                    .map(|row| c.iter().zip(w).map(|(ck, wk)| ck * &wk[row]).sum())
                    .collect()
            })
            .collect();
        out.push((l, vecs));
    }
    out
}

pub fn simultaneous_diagonalize(mats: &[Matrix<BigRational>]) -> Result<Diagonalization> {
    let Some(first) = mats.first() else {
        return Err(Error::Argument("no matrices to diagonalise".into()));
    };
    let h = first.len();
    for a in mats {
        for b in mats {
            if linalg::mat_mul(a, b) != linalg::mat_mul(b, a) {
                return Err(Error::Argument("matrices do not commute".into()));
            }
        }
    }
    let id: Vec<Vec<BigRational>> = (0..h).map(|i| (0..h).map(|j| rat((i == j) as i64)).collect()).collect();
    // (eigenvalue history, subspace basis)
    let mut blocks: Vec<(Vec<BigRational>, Vec<Vec<BigRational>>)> = vec![(vec![], id)];
    for a in mats {
        let mut next = Vec::new();
        for (hist, w) in blocks {
            let spaces = integer_eigenspaces(a, &w);
            let dim: usize = spaces.iter().map(|s| s.1.len()).sum();
            if dim != w.len() {
                return Err(Error::NotFound("eigenvalues outside Q; supply target eigenvalues instead".into()));
            }
            for (l, vs) in spaces {
                let mut hh = hist.clone();
                hh.push(l);
                next.push((hh, vs));
            }
        }
        blocks = next;
    }
    if let Some((hist, _)) = blocks.iter().find(|b| b.1.len() > 1) {
        let s: Vec<String> = hist.iter().map(|x| x.to_string()).collect();
        return Err(Error::Ambiguous(format!("eigensystem ({}) is not separated", s.join(", "))));
    }
    blocks.sort_by(|a, b| b.0.cmp(&a.0));
    Ok(Diagonalization {
        eigenvectors: blocks.iter().map(|b| normalise_rational(&b.1[0])).collect(),
        eigenvalues: blocks.into_iter().map(|b| b.0).collect(),
    })
}

/// A quaternionic eigenform as its values on the class representatives.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenformVector {
    pub values: Vec<CyclotomicElement>,
    pub eigenvalues: Vec<(u64, CyclotomicElement)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EigenformRecord {
    pub schema: u32,
    pub values: Vec<CycRecord>,
    pub eigenvalues: Vec<(u64, CycRecord)>,
    pub normalization: String,
}

impl EigenformVector {
    pub fn record(&self) -> EigenformRecord {
        EigenformRecord {
            schema: 1,
            values: self.values.iter().map(CycRecord::from).collect(),
            eigenvalues: self.eigenvalues.iter().map(|(m, a)| (*m, CycRecord::from(a))).collect(),
            normalization: "first-positive-content-1".into(),
        }
    }

    pub fn from_record(r: &EigenformRecord) -> Result<Self> {
        Ok(EigenformVector {
            values: r.values.iter().map(|c| c.value()).collect::<Result<_>>()?,
            eigenvalues: r
                .eigenvalues
                .iter()
                .map(|(m, c)| Ok((*m, c.value()?)))
                .collect::<Result<_>>()?,
        })
    }

    pub fn constant(h: usize) -> Self {
        EigenformVector { values: vec![CyclotomicElement::one(); h], eigenvalues: vec![] }
    }
}

/// Scale so the first nonzero entry becomes 1, then clear denominators and
/// divide by the content of all coefficients.
fn normalise_cyclotomic(v: &[CyclotomicElement]) -> Vec<CyclotomicElement> {
    let Some(first) = v.iter().find(|x| !x.is_zero()) else {
        return v.to_vec();
    };
    let inv = first.inverse().unwrap();
    let scaled: Vec<CyclotomicElement> = v.iter().map(|x| x.mul(&inv).simplify()).collect();
    let coeffs: Vec<BigRational> = scaled.iter().flat_map(|x| x.coeffs().to_vec()).collect();
    let den = arith::lcm_denoms(coeffs.iter());
    let g = coeffs
        .iter()
        .map(|c| (c * BigRational::from_integer(den.clone())).to_integer())
        .fold(BigInt::zero(), |a, x| a.gcd(&x));
    let f = BigRational::new(den, g);
    scaled.iter().map(|x| x.scale(&f).simplify()).collect()
}

/// Common kernel of B(m) − a_m over the targets (Routine: match a known
/// classical eigensystem to a quaternionic eigenvector).
pub fn eigenform_vector(
    classes: &IdealClassSet,
    chi: &LiftedCharacter,
    targets: &[(u64, CyclotomicElement)],
) -> Result<EigenformVector> {
    let h = classes.class_number();
    if targets.is_empty() {
        return Err(Error::Argument("no target eigenvalues".into()));
    }
    let mut rows: CycMatrix = Vec::new();
    for (m, a) in targets {
        let b = brandt_matrix(classes, chi, *m);
        for i in 0..h {
            let mut row = b.entries[i].clone();
            row[i] = row[i].sub(a);
            rows.push(row);
        }
    }
    let ker = linalg::kernel(&rows, h, &CyclotomicElement::zero());
    match ker.len() {
        0 => Err(Error::NotFound("no eigenvector with the target eigenvalues".into())),
        1 => Ok(EigenformVector { values: normalise_cyclotomic(&ker[0]), eigenvalues: targets.to_vec() }),
        k => Err(Error::Ambiguous(format!("{k}-dimensional eigenspace for the targets"))),
    }
}

/// Indices m ≤ bound coprime to the given number.
pub fn coprime_indices(bound: u64, avoid: u64) -> Vec<u64> {
    (1..=bound).filter(|m| m.gcd(&avoid) == 1).collect()
}

/// Short vectors of a lattice, exposed for cross-checks.
pub fn lattice_short_vectors(alg: &crate::quaternion::QuaternionAlgebra, l: &Lattice, bound: &BigRational) -> Vec<Quaternion> {
    let basis = l.basis();
    short_vectors(&l.gram(alg), bound).into_iter().map(|(c, _)| combine(&basis, &c)).collect()
}
