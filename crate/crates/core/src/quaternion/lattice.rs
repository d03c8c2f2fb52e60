//! Z-lattices in a quaternion algebra, stored as a common denominator and an
//! integral Hermite normal form.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{Quaternion, QuaternionAlgebra};
use crate::arith::lcm_denoms;
use crate::error::{Error, Result};
use crate::hnf::{congruence_kernel, hnf};
use crate::linalg;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Lattice {
    den: BigInt,
    rows: Vec<[BigInt; 4]>,
}

fn gcd_rat(a: &BigRational, b: &BigRational) -> BigRational {
    if a.is_zero() {
        return b.abs();
    }
    if b.is_zero() {
        return a.abs();
    }
    let n = (a.numer() * b.denom()).gcd(&(b.numer() * a.denom()));
    BigRational::new(n, a.denom() * b.denom())
}

/// Nonnegative generator of the Z-module spanned by rationals.
pub fn rational_gcd<'a, I: IntoIterator<Item = &'a BigRational>>(xs: I) -> BigRational {
    xs.into_iter().fold(BigRational::zero(), |acc, x| gcd_rat(&acc, x))
}

impl Lattice {
    pub fn from_basis(gens: &[Quaternion]) -> Self {
        let den = lcm_denoms(gens.iter().flat_map(|g| g.0.iter()));
        let d = BigRational::from_integer(den.clone());
        let int_rows: Vec<Vec<BigInt>> = gens
            .iter()
            .map(|g| g.0.iter().map(|x| (x * &d).to_integer()).collect())
            .collect();
        Self::from_int_rows(den, &int_rows)
    }

    fn from_int_rows(den: BigInt, rows: &[Vec<BigInt>]) -> Self {
        let h = hnf(rows);
        let content = h.iter().flatten().fold(den.clone(), |acc, x| acc.gcd(x));
        let rows = h
            .into_iter()
            .map(|r| std::array::from_fn(|t| &r[t] / &content))
            .collect();
        Lattice { den: &den / &content, rows }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn is_full(&self) -> bool {
        self.rank() == 4
    }

    pub fn basis(&self) -> Vec<Quaternion> {
        self.rows
            .iter()
            .map(|r| Quaternion(std::array::from_fn(|t| BigRational::new(r[t].clone(), self.den.clone()))))
            .collect()
    }

    fn basis_matrix(&self) -> linalg::Matrix<BigRational> {
        self.basis().into_iter().map(|q| q.0.to_vec()).collect()
    }

    /// Coordinates of `x` on the canonical basis, if `x` lies in its Q-span.
    pub fn coords(&self, x: &Quaternion) -> Option<Vec<BigRational>> {
        // Echelon back-substitution along pivot columns.
        let mut rem: Vec<BigRational> = x.0.iter().map(|c| c * BigRational::from_integer(self.den.clone())).collect();
        let mut out = vec![BigRational::zero(); self.rank()];
        for (i, row) in self.rows.iter().enumerate() {
            let piv = row.iter().position(|v| !v.is_zero()).unwrap();
            for c in 0..piv {
                if !rem[c].is_zero() {
                    return None;
                }
            }
            let coef = &rem[piv] / BigRational::from_integer(row[piv].clone());
            for t in 0..4 {
                rem[t] -= &coef * BigRational::from_integer(row[t].clone());
            }
            out[i] = coef;
        }
        rem.iter().all(|v| v.is_zero()).then_some(out)
    }

    pub fn contains(&self, x: &Quaternion) -> bool {
        self.coords(x).is_some_and(|c| c.iter().all(|v| v.is_integer()))
    }

    pub fn contains_lattice(&self, other: &Lattice) -> bool {
        other.basis().iter().all(|b| self.contains(b))
    }

    /// Covolume with respect to Z⁴ (product of pivots over den⁴), full rank only.
    pub fn covolume(&self) -> BigRational {
        assert!(self.is_full(), "covolume of a degenerate lattice");
        let mut pivs = BigInt::one();
        for (i, r) in self.rows.iter().enumerate() {
            pivs *= &r[i];
        }
        BigRational::new(pivs, num_traits::pow(self.den.clone(), 4))
    }

    /// [self : other] = covol(other)/covol(self).
    pub fn index_of(&self, other: &Lattice) -> BigRational {
        other.covolume() / self.covolume()
    }

    pub fn sum(&self, other: &Lattice) -> Lattice {
        let mut gens = self.basis();
        gens.extend(other.basis());
        Lattice::from_basis(&gens)
    }

    pub fn intersection(&self, other: &Lattice) -> Result<Lattice> {
        if !self.is_full() || !other.is_full() {
            return Err(Error::Argument("intersection needs full-rank lattices".into()));
        }
        let b1 = self.basis_matrix();
        let b2inv = linalg::inverse(&other.basis_matrix()).expect("full rank");
        let t = linalg::mat_mul(&b1, &b2inv);
        let d = lcm_denoms(t.iter().flatten());
        let dr = BigRational::from_integer(d.clone());
        let cons: Vec<(Vec<BigInt>, BigInt)> = (0..4)
            .map(|j| ((0..4).map(|i| (&t[i][j] * &dr).to_integer()).collect(), d.clone()))
            .collect();
        let ker = congruence_kernel(4, &cons);
        let gens: Vec<Quaternion> = ker
            .iter()
            .map(|u| {
                let mut q = Quaternion::zero();
                for (ui, bi) in u.iter().zip(&b1) {
                    for tt in 0..4 {
                        q.0[tt] += BigRational::from_integer(ui.clone()) * &bi[tt];
                    }
                }
                q
            })
            .collect();
        Ok(Lattice::from_basis(&gens))
    }

    pub fn scale(&self, r: &BigRational) -> Lattice {
        Lattice::from_basis(&self.basis().iter().map(|b| b.scale(r)).collect::<Vec<_>>())
    }

    pub fn conj(&self) -> Lattice {
        Lattice::from_basis(&self.basis().iter().map(|b| b.conj()).collect::<Vec<_>>())
    }

    pub fn left_mul(&self, alg: &QuaternionAlgebra, x: &Quaternion) -> Lattice {
        Lattice::from_basis(&self.basis().iter().map(|b| alg.mul(x, b)).collect::<Vec<_>>())
    }

    pub fn right_mul(&self, alg: &QuaternionAlgebra, x: &Quaternion) -> Lattice {
        Lattice::from_basis(&self.basis().iter().map(|b| alg.mul(b, x)).collect::<Vec<_>>())
    }

    /// Z-span of all products xy with x ∈ self, y ∈ other.
    pub fn product(&self, alg: &QuaternionAlgebra, other: &Lattice) -> Lattice {
        let a = self.basis();
        let b = other.basis();
        let gens: Vec<Quaternion> = a.iter().flat_map(|x| b.iter().map(move |y| alg.mul(x, y))).collect();
        Lattice::from_basis(&gens)
    }

    /// Gram matrix of the norm form: A_ij = tr(b_i b̄_j)/2.
    pub fn gram(&self, alg: &QuaternionAlgebra) -> linalg::Matrix<BigRational> {
        let b = self.basis();
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        b.iter()
            .map(|x| b.iter().map(|y| alg.trace_form(x, y) * &half).collect())
            .collect()
    }

    /// Reduced norm: the generator of the Z-module spanned by all norms.
    pub fn norm(&self, alg: &QuaternionAlgebra) -> BigRational {
        let b = self.basis();
        let mut vals = Vec::new();
        for i in 0..b.len() {
            vals.push(alg.norm(&b[i]));
            for j in (i + 1)..b.len() {
                vals.push(alg.trace_form(&b[i], &b[j]));
            }
        }
        rational_gcd(&vals)
    }

    /// Determinant of the trace form tr(b_i b̄_j).
    pub fn trace_discriminant(&self, alg: &QuaternionAlgebra) -> BigRational {
        let b = self.basis();
        let m: linalg::Matrix<BigRational> =
            b.iter().map(|x| b.iter().map(|y| alg.trace_form(x, y)).collect()).collect();
        linalg::det(&m)
    }

    /// Reduced trace form tr(b_i b_j); its determinant is -disc² for an order.
    pub fn reduced_trace_det(&self, alg: &QuaternionAlgebra) -> BigRational {
        let b = self.basis();
        let m: linalg::Matrix<BigRational> =
            b.iter().map(|x| b.iter().map(|y| alg.mul(x, y).trace()).collect()).collect();
        linalg::det(&m)
    }

    /// {x : x·self ⊆ self}.
    pub fn left_order(&self, alg: &QuaternionAlgebra) -> Result<Lattice> {
        let mut acc: Option<Lattice> = None;
        for b in self.basis() {
            let binv = alg.inverse(&b)?;
            let piece = self.right_mul(alg, &binv);
            acc = Some(match acc {
                None => piece,
                Some(a) => a.intersection(&piece)?,
            });
        }
        acc.ok_or_else(|| Error::Argument("empty lattice".into()))
    }

    /// {x : self·x ⊆ self}.
    pub fn right_order(&self, alg: &QuaternionAlgebra) -> Result<Lattice> {
        let mut acc: Option<Lattice> = None;
        for b in self.basis() {
            let binv = alg.inverse(&b)?;
            let piece = self.left_mul(alg, &binv);
            acc = Some(match acc {
                None => piece,
                Some(a) => a.intersection(&piece)?,
            });
        }
        acc.ok_or_else(|| Error::Argument("empty lattice".into()))
    }

    pub fn is_closed_under_mul(&self, alg: &QuaternionAlgebra) -> bool {
        let b = self.basis();
        b.iter().all(|x| b.iter().all(|y| self.contains(&alg.mul(x, y))))
    }

    pub fn den(&self) -> &BigInt {
        &self.den
    }

    pub fn int_rows(&self) -> &[[BigInt; 4]] {
        &self.rows
    }
}

/// The standard lattice Z⟨1, i, j, k⟩.
pub fn standard() -> Lattice {
    Lattice::from_basis(&[
        Quaternion::from_ints([1, 0, 0, 0]),
        Quaternion::from_ints([0, 1, 0, 0]),
        Quaternion::from_ints([0, 0, 1, 0]),
        Quaternion::from_ints([0, 0, 0, 1]),
    ])
}
