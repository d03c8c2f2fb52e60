//! Local splitting B ⊗ Q_p ≅ M₂(Q_p), truncated modulo p^prec.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::{Quaternion, QuaternionAlgebra};
use crate::arith::{self, legendre, pow};
use crate::error::{Error, Result};
use crate::linalg;
pub use crate::mat2::Mat2;
use crate::padic::hensel_sqrt;

#[derive(Clone, Debug)]
pub struct SplittingMap {
    pub prime: u64,
    pub precision: u32,
    /// Images of 1, i, j, k, entries in [0, p^prec).
    images: [Mat2; 4],
    /// Inverse of the 4×4 matrix whose columns are the flattened images.
    coord_inverse: linalg::Matrix<BigRational>,
}

fn big_rat(x: &BigInt) -> BigRational {
    BigRational::from_integer(x.clone())
}

/// Build ι_p for a prime p not dividing 2ab.
pub fn splitting_map(alg: &QuaternionAlgebra, p: u64, precision: u32) -> Result<SplittingMap> {
    if p == 2 || (alg.a * alg.b) % p as i64 == 0 {
        return Err(Error::Argument(format!(
            "splitting at {p} needs p ∤ 2ab with (a, b) = ({}, {})",
            alg.a, alg.b
        )));
    }
    if precision == 0 {
        return Err(Error::Argument("precision must be positive".into()));
    }
    let a = BigInt::from(alg.a);
    let b = BigInt::from(alg.b);
    let (ii, jj) = if legendre(&a, p) == 1 {
        let al = hensel_sqrt(&a, p, precision)?.residue(precision)?;
        let i = Mat2::from_bigints(-&al, BigInt::zero(), BigInt::zero(), al.clone());
        let j = Mat2::from_bigints(BigInt::zero(), b.clone(), BigInt::from(1), BigInt::zero());
        (i, j)
    } else {
        let (z, x) = (0u64..)
            .find_map(|z| {
                let c = &a * BigInt::from(z * z) + &b;
                (legendre(&c, p) == 1).then_some((z, c))
            })
            .map(|(z, c)| (BigInt::from(z), hensel_sqrt(&c, p, precision).and_then(|s| s.residue(precision))))
            .unwrap();
        let x = x?;
        let i = Mat2::from_bigints(BigInt::zero(), BigInt::from(-1), -&a, BigInt::zero());
        let j = Mat2::from_bigints(-&x, -&z, &a * &z, x);
        (i, j)
    };
    let k = ii.mul(&jj);
    let one = Mat2::identity();
    let images = [one, ii, jj, k].map(|mm| mm.reduce(p, precision));
    let cols: Vec<Vec<BigRational>> = images
        .iter()
        .map(|mm| mm.entries().iter().map(|x| (*x).clone()).collect())
        .collect();
    let mat: linalg::Matrix<BigRational> = (0..4).map(|r| (0..4).map(|c| cols[c][r].clone()).collect()).collect();
    let coord_inverse = linalg::inverse(&mat).ok_or_else(|| Error::Inconsistency("splitting images are dependent".into()))?;
    Ok(SplittingMap { prime: p, precision, images, coord_inverse })
}

impl SplittingMap {
    pub fn images(&self) -> &[Mat2; 4] {
        &self.images
    }

    /// ι(x) for p-integral x, entries reduced into [0, p^prec).
    pub fn image_integral(&self, x: &Quaternion) -> Result<Mat2> {
        if !x.is_integral_at(self.prime) {
            return Err(Error::Domain(format!("{x} is not {}-integral", self.prime)));
        }
        let mut acc = Mat2::zero();
        for (c, im) in x.0.iter().zip(&self.images) {
            if c.is_zero() {
                continue;
            }
            let r = big_rat(&arith::residue(c, self.prime, self.precision));
            acc = acc.add(&im.scale(&r));
        }
        Ok(acc.reduce(self.prime, self.precision))
    }

    /// ι(x) for any x: p^{-s}·ι(p^s x) with s the least shift making p^s x integral.
    pub fn image(&self, x: &Quaternion) -> Mat2 {
        let s = x
            .0
            .iter()
            .filter_map(|c| arith::vp(c, self.prime))
            .min()
            .map(|v| (-v).max(0))
            .unwrap_or(0) as u32;
        if s == 0 {
            return self.image_integral(x).expect("integral");
        }
        let ps = big_rat(&pow(self.prime, s));
        self.image_integral(&x.scale(&ps)).expect("integral").scale(&ps.recip())
    }

    /// Unique integral x mod p^prec with ι(x) ≡ m.
    pub fn preimage(&self, m: &Mat2) -> Result<Quaternion> {
        if !m.is_integral_at(self.prime) {
            return Err(Error::Domain("preimage of a non-integral matrix".into()));
        }
        let v: Vec<BigRational> = m.entries().iter().map(|x| (*x).clone()).collect();
        let sol = linalg::mat_vec(&self.coord_inverse, &v);
        Ok(Quaternion(std::array::from_fn(|t| big_rat(&arith::residue(&sol[t], self.prime, self.precision)))))
    }

    /// Lower-left entry of ι(x) modulo p^k, for p-integral x.
    pub fn lower_left(&self, x: &Quaternion, k: u32) -> Result<BigInt> {
        let m = self.image_integral(x)?;
        Ok(arith::residue(&m.c, self.prime, k))
    }

    /// Lower-right entry of ι(x) modulo p^k, for p-integral x.
    pub fn lower_right(&self, x: &Quaternion, k: u32) -> Result<BigInt> {
        let m = self.image_integral(x)?;
        Ok(arith::residue(&m.d, self.prime, k))
    }

    /// Integer linear forms on quaternion coordinates giving the entries of ι,
    /// as rows (entry index → coefficients on 1, i, j, k) mod p^prec.
    pub fn entry_forms(&self) -> [[BigInt; 4]; 4] {
        std::array::from_fn(|e| {
            std::array::from_fn(|t| self.images[t].entries()[e].numer().clone())
        })
    }
}
