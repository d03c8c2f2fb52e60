//! Integer Hermite normal form and lattices cut out by congruences.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

/// Row-style Hermite normal form: nonzero rows only, echelon with positive
/// pivots and the entries above each pivot reduced into `[0, pivot)`.
pub fn hnf(rows: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    if rows.is_empty() {
        return vec![];
    }
    let ncols = rows[0].len();
    let mut a: Vec<Vec<BigInt>> = rows.iter().filter(|r| r.iter().any(|x| !x.is_zero())).cloned().collect();
    let mut r = 0;
    for c in 0..ncols {
        if r >= a.len() {
            break;
        }
        loop {
            let best = (r..a.len())
                .filter(|&i| !a[i][c].is_zero())
                .min_by(|&i, &j| a[i][c].abs().cmp(&a[j][c].abs()));
            let Some(b) = best else { break };
            a.swap(r, b);
            let mut done = true;
            for i in (r + 1)..a.len() {
                if a[i][c].is_zero() {
                    continue;
                }
                let q = a[i][c].div_floor(&a[r][c]);
                let (head, tail) = a.split_at_mut(i);
                for (x, y) in tail[0].iter_mut().zip(&head[r]) {
                    *x -= &q * y;
                }
                if !a[i][c].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if a[r][c].is_zero() {
            continue;
        }
        if a[r][c].is_negative() {
            for x in a[r].iter_mut() {
                *x = -&*x;
            }
        }
        for i in 0..r {
            let q = a[i][c].div_floor(&a[r][c]);
            if q.is_zero() {
                continue;
            }
            let (head, tail) = a.split_at_mut(r);
            for (x, y) in head[i].iter_mut().zip(&tail[0]) {
                *x -= &q * y;
            }
        }
        r += 1;
        a.retain(|row| row.iter().any(|x| !x.is_zero()));
    }
    a.retain(|row| row.iter().any(|x| !x.is_zero()));
    a
}

/// Basis of {v ∈ Z^n : c·v ≡ 0 mod m for each (c, m) in `constraints`}.
pub fn congruence_kernel(n: usize, constraints: &[(Vec<BigInt>, BigInt)]) -> Vec<Vec<BigInt>> {
    let k = constraints.len();
    let mut rows = Vec::with_capacity(n + k);
    for i in 0..n {
        let mut row = Vec::with_capacity(k + n);
        for (c, m) in constraints {
            row.push(c[i].mod_floor(m));
        }
        for j in 0..n {
            row.push(BigInt::from((i == j) as u8));
        }
        rows.push(row);
    }
    for (j, (_, m)) in constraints.iter().enumerate() {
        let mut row = vec![BigInt::zero(); k + n];
        row[j] = m.clone();
        rows.push(row);
    }
    hnf(&rows)
        .into_iter()
        .filter(|r| r[..k].iter().all(|x| x.is_zero()))
        .map(|r| r[k..].to_vec())
        .collect()
}
