//! Dense linear algebra over exact fields (rationals and cyclotomic fields).

use num_rational::BigRational;
use num_traits::{One, Zero};

/// Minimal field interface used by the elimination routines.
pub trait FieldElem: Clone + PartialEq {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn is_zero_elem(&self) -> bool;
    fn add_elem(&self, o: &Self) -> Self;
    fn sub_elem(&self, o: &Self) -> Self;
    fn mul_elem(&self, o: &Self) -> Self;
    fn inv_elem(&self) -> Self;
}

impl FieldElem for BigRational {
    fn zero_like(&self) -> Self {
        BigRational::zero()
    }
    fn one_like(&self) -> Self {
        BigRational::one()
    }
    fn is_zero_elem(&self) -> bool {
        self.is_zero()
    }
    fn add_elem(&self, o: &Self) -> Self {
        self + o
    }
    fn sub_elem(&self, o: &Self) -> Self {
        self - o
    }
    fn mul_elem(&self, o: &Self) -> Self {
        self * o
    }
    fn inv_elem(&self) -> Self {
        self.recip()
    }
}

pub type Matrix<T> = Vec<Vec<T>>;

/// Reduced row echelon form in place; returns pivot columns.
pub fn rref<T: FieldElem>(m: &mut Matrix<T>) -> Vec<usize> {
    let rows = m.len();
    if rows == 0 {
        return vec![];
    }
    let cols = m[0].len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(pr) = (r..rows).find(|&i| !m[i][c].is_zero_elem()) else { continue };
        m.swap(r, pr);
        let inv = m[r][c].inv_elem();
        for x in m[r].iter_mut() {
            *x = x.mul_elem(&inv);
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero_elem() {
                let f = m[i][c].clone();
                for j in 0..cols {
                    let t = m[r][j].mul_elem(&f);
                    m[i][j] = m[i][j].sub_elem(&t);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Basis of the right kernel {x : m x = 0}.
pub fn kernel<T: FieldElem>(m: &Matrix<T>, cols: usize, sample: &T) -> Vec<Vec<T>> {
    let mut a = m.clone();
    let pivots = rref(&mut a);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![sample.zero_like(); cols];
            v[f] = sample.one_like();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = a[r][f].zero_like().sub_elem(&a[r][f]);
            }
            v
        })
        .collect()
}

/// Solve `m x = b` for square invertible `m`.
pub fn solve<T: FieldElem>(m: &Matrix<T>, b: &[T]) -> Option<Vec<T>> {
    let n = m.len();
    let mut aug: Matrix<T> = m
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.len() != n || pivots.iter().any(|&c| c >= n) {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n].clone()).collect())
}

pub fn inverse<T: FieldElem>(m: &Matrix<T>) -> Option<Matrix<T>> {
    let n = m.len();
    let sample = &m[0][0];
    let mut aug: Matrix<T> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            for j in 0..n {
                r.push(if i == j { sample.one_like() } else { sample.zero_like() });
            }
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.len() != n || pivots[n - 1] >= n {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub fn mat_mul<T: FieldElem>(a: &Matrix<T>, b: &Matrix<T>) -> Matrix<T> {
    let n = a.len();
    let k = b.len();
    let m = b[0].len();
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| {
                    let mut s = a[i][0].zero_like();
                    for t in 0..k {
                        s = s.add_elem(&a[i][t].mul_elem(&b[t][j]));
                    }
                    s
                })
                .collect()
        })
        .collect()
}

pub fn mat_vec<T: FieldElem>(a: &Matrix<T>, v: &[T]) -> Vec<T> {
    a.iter()
        .map(|row| {
            let mut s = row[0].zero_like();
            for (x, y) in row.iter().zip(v) {
                s = s.add_elem(&x.mul_elem(y));
            }
            s
        })
        .collect()
}

pub fn det<T: FieldElem>(m: &Matrix<T>) -> T {
    let n = m.len();
    let mut a = m.clone();
    let mut d = a[0][0].one_like();
    for c in 0..n {
        let Some(pr) = (c..n).find(|&i| !a[i][c].is_zero_elem()) else {
            return d.zero_like();
        };
        if pr != c {
            a.swap(pr, c);
            d = d.zero_like().sub_elem(&d);
        }
        d = d.mul_elem(&a[c][c]);
        let inv = a[c][c].inv_elem();
        for i in (c + 1)..n {
            if !a[i][c].is_zero_elem() {
                let f = a[i][c].mul_elem(&inv);
                for j in c..n {
                    let t = a[c][j].mul_elem(&f);
                    a[i][j] = a[i][j].sub_elem(&t);
                }
            }
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;

    fn m(rows: &[&[i64]]) -> Matrix<BigRational> {
        rows.iter().map(|r| r.iter().map(|&x| rat(x)).collect()).collect()
    }

    #[test]
    fn kernel_and_inverse() {
        let a = m(&[&[1, 2, 3], &[2, 4, 6]]);
        let k = kernel(&a, 3, &rat(0));
        assert_eq!(k.len(), 2);
        for v in &k {
            assert!(mat_vec(&a, v).iter().all(|x| x.is_zero()));
        }
        let b = m(&[&[2, 1], &[1, 1]]);
        let bi = inverse(&b).unwrap();
        assert_eq!(mat_mul(&b, &bi), m(&[&[1, 0], &[0, 1]]));
        assert_eq!(det(&b), rat(1));
        assert_eq!(solve(&b, &[rat(3), rat(2)]).unwrap(), vec![rat(1), rat(1)]);
    }
}
