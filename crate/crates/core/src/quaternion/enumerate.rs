//! Exact LLL reduction of positive definite Gram matrices and Fincke-Pohst
//! enumeration of short vectors.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::arith::{floor, lcm_denoms, ratio, round};
use crate::linalg::Matrix;

/// Gram-Schmidt data (mu, B) from a Gram matrix.
fn gso(g: &Matrix<BigRational>) -> (Matrix<BigRational>, Vec<BigRational>) {
    let n = g.len();
    let mut mu = vec![vec![BigRational::zero(); n]; n];
    let mut b = vec![BigRational::zero(); n];
    for i in 0..n {
        for j in 0..i {
            let mut s = g[i][j].clone();
            for k in 0..j {
                s -= &mu[j][k] * &mu[i][k] * &b[k];
            }
            mu[i][j] = s / &b[j];
        }
        let mut s = g[i][i].clone();
        for k in 0..i {
            s -= &mu[i][k] * &mu[i][k] * &b[k];
        }
        b[i] = s;
    }
    (mu, b)
}

/// LLL with δ = 3/4. Returns the unimodular U (rows = new basis in old
/// coordinates) and the reduced Gram matrix U G Uᵀ.
pub fn lll_reduce(g: &Matrix<BigRational>) -> (Matrix<BigInt>, Matrix<BigRational>) {
    let n = g.len();
    let den = lcm_denoms(g.iter().flatten());
    let dr = BigRational::from_integer(den.clone());
    // Integral Gram matrix of the current basis, updated in place.
    let mut gi: Matrix<BigInt> = g.iter().map(|r| r.iter().map(|x| (x * &dr).to_integer()).collect()).collect();
    let mut u: Matrix<BigInt> = (0..n)
        .map(|i| (0..n).map(|j| BigInt::from((i == j) as u8)).collect())
        .collect();
    let to_rat = |m: &Matrix<BigInt>| -> Matrix<BigRational> {
        m.iter().map(|r| r.iter().map(|x| BigRational::from_integer(x.clone())).collect()).collect()
    };
    let delta = ratio(3, 4);
    let mut k = 1;
    while k < n {
        let (mut mu, b) = gso(&to_rat(&gi));
        for j in (0..k).rev() {
            let r = round(&mu[k][j]);
            if r.is_zero() {
                continue;
            }
            let (head, tail) = u.split_at_mut(k);
            for (x, y) in tail[0].iter_mut().zip(&head[j]) {
                *x -= &r * y;
            }
            let gkk = &gi[k][k] - BigInt::from(2) * &r * &gi[k][j] + &r * &r * &gi[j][j];
            for l in 0..n {
                if l != k {
                    let v = &gi[k][l] - &r * &gi[j][l];
                    gi[k][l] = v.clone();
                    gi[l][k] = v;
                }
            }
            gi[k][k] = gkk;
            let rr = BigRational::from_integer(r);
            for i in 0..j {
                let t = &rr * &mu[j][i];
                mu[k][i] -= t;
            }
            mu[k][j] -= &rr;
        }
        let rhs = (&delta - &mu[k][k - 1] * &mu[k][k - 1]) * &b[k - 1];
        if b[k] >= rhs {
            k += 1;
        } else {
            u.swap(k, k - 1);
            gi.swap(k, k - 1);
            for row in gi.iter_mut() {
                row.swap(k, k - 1);
            }
            k = (k - 1).max(1);
        }
    }
    let red = gi.iter().map(|r| r.iter().map(|x| BigRational::new(x.clone(), den.clone())).collect()).collect();
    (u, red)
}

/// All nonzero integer vectors x (up to sign) with xGxᵀ ≤ bound, with their values.
/// The first nonzero coordinate of each returned vector is positive.
pub fn short_vectors(g: &Matrix<BigRational>, bound: &BigRational) -> Vec<(Vec<BigInt>, BigRational)> {
    let n = g.len();
    if n == 0 || bound.is_negative() {
        return vec![];
    }
    let (u, red) = lll_reduce(g);
    let (mu, b) = gso(&red);
    // Q(y) = Σ_i b_i (y_i + Σ_{j>i} mu_ji y_j)²
    let mut found: Vec<Vec<BigInt>> = Vec::new();
    let mut y = vec![BigInt::zero(); n];
    enumerate_level(n - 1, &mu, &b, bound.clone(), &mut y, &mut found);
    let mut out = Vec::new();
    for yv in found {
        if yv.iter().all(|v| v.is_zero()) {
            continue;
        }
        let mut x = vec![BigInt::zero(); n];
        for i in 0..n {
            if yv[i].is_zero() {
                continue;
            }
            for j in 0..n {
                x[j] += &yv[i] * &u[i][j];
            }
        }
        let first = x.iter().find(|v| !v.is_zero()).unwrap();
        if first.is_negative() {
            continue;
        }
        let val = eval(g, &x);
        out.push((x, val));
    }
    out.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    out
}

fn enumerate_level(
    i: usize,
    mu: &Matrix<BigRational>,
    b: &[BigRational],
    remaining: BigRational,
    y: &mut Vec<BigInt>,
    out: &mut Vec<Vec<BigInt>>,
) {
    let n = b.len();
    let mut c = BigRational::zero();
    for j in (i + 1)..n {
        c += &mu[j][i] * BigRational::from_integer(y[j].clone());
    }
    let r = &remaining / &b[i];
    let s: BigInt = floor(&r).max(BigInt::zero()).sqrt() + 1;
    let centre = floor(&-&c);
    let lo = &centre - &s;
    let hi = &centre + &s + 1;
    let mut x = lo;
    while x <= hi {
        let t = BigRational::from_integer(x.clone()) + &c;
        let used = &t * &t * &b[i];
        if used <= remaining {
            y[i] = x.clone();
            if i == 0 {
                out.push(y.clone());
            } else {
                enumerate_level(i - 1, mu, b, &remaining - &used, y, out);
            }
        }
        x += BigInt::one();
    }
    y[i] = BigInt::zero();
}

pub fn eval(g: &Matrix<BigRational>, x: &[BigInt]) -> BigRational {
    let n = g.len();
    let mut s = BigRational::zero();
    for i in 0..n {
        if x[i].is_zero() {
            continue;
        }
        for j in 0..n {
            if !x[j].is_zero() {
                s += &g[i][j] * BigRational::from_integer(&x[i] * &x[j]);
            }
        }
    }
    s
}

/// Vectors (up to sign) with value exactly `target`.
pub fn vectors_of_value(g: &Matrix<BigRational>, target: &BigRational) -> Vec<Vec<BigInt>> {
    short_vectors(g, target)
        .into_iter()
        .filter(|(_, v)| v == target)
        .map(|(x, _)| x)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;

    fn m(rows: &[&[i64]]) -> Matrix<BigRational> {
        rows.iter().map(|r| r.iter().map(|&x| rat(x)).collect()).collect()
    }

    #[test]
    fn counts_on_z4() {
        let g = m(&[&[1, 0, 0, 0], &[0, 1, 0, 0], &[0, 0, 1, 0], &[0, 0, 0, 1]]);
        // r_4(1)=8, r_4(2)=24, r_4(3)=32 counted up to sign
        assert_eq!(vectors_of_value(&g, &rat(1)).len(), 4);
        assert_eq!(vectors_of_value(&g, &rat(2)).len(), 12);
        assert_eq!(vectors_of_value(&g, &rat(3)).len(), 16);
        assert_eq!(vectors_of_value(&g, &rat(5)).len(), 24);
    }

    #[test]
    fn lll_skewed() {
        let g = m(&[&[1, 100, 0], &[100, 10001, 0], &[0, 0, 3]]);
        let (u, red) = lll_reduce(&g);
        assert_eq!(red[0][0], rat(1));
        assert_eq!(red[1][1], rat(1));
        let d = crate::linalg::det(&u.iter().map(|r| r.iter().map(|x| BigRational::from_integer(x.clone())).collect()).collect());
        assert_eq!(d.abs(), rat(1));
    }
}
