//! Dense Gaussian elimination over E and F_q.

use crate::error::{BpdError, Result};
use crate::field::{Elem, FieldTower, Gf16};

/// All `t`-subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, t: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if t > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..t).collect();
    loop {
        out.push(idx.clone());
        let Some(i) = (0..t).rev().find(|&i| idx[i] < n - t + i) else {
            return out;
        };
        idx[i] += 1;
        for j in i + 1..t {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Determinant of a square matrix over E.
pub fn det_gf16(mut m: Vec<Vec<Gf16>>) -> Gf16 {
    let n = m.len();
    let mut det = Gf16::ONE;
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&r| !m[r][col].is_zero()) else {
            return Gf16::ZERO;
        };
        m.swap(col, pivot);
        let p = m[col][col];
        det *= p;
        let p_inv = p.inv().expect("pivot is nonzero");
        for r in col + 1..n {
            let f = m[r][col] * p_inv;
            if f.is_zero() {
                continue;
            }
            for c in col..n {
                let v = m[col][c];
                m[r][c] += f * v;
            }
        }
    }
    det
}

/// Inverse of a square matrix over E.
pub fn invert_gf16(m: &[Vec<Gf16>]) -> Result<Vec<Vec<Gf16>>> {
    let n = m.len();
    let mut a: Vec<Vec<Gf16>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Gf16::ONE } else { Gf16::ZERO }));
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !a[r][col].is_zero())
            .ok_or(BpdError::Singular)?;
        a.swap(col, pivot);
        let p_inv = a[col][col].inv()?;
        for v in a[col].iter_mut() {
            *v *= p_inv;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col];
            for c in 0..2 * n {
                let v = a[col][c];
                a[r][c] += f * v;
            }
        }
    }
    Ok(a.into_iter().map(|row| row[n..].to_vec()).collect())
}

/// Solves `a · x = b` over F_q for square `a`.
pub fn solve(tower: &FieldTower, mut a: Vec<Vec<Elem>>, mut b: Vec<Elem>) -> Result<Vec<Elem>> {
    let n = a.len();
    if b.len() != n || a.iter().any(|row| row.len() != n) {
        return Err(BpdError::DimensionMismatch {
            expected: n,
            got: b.len(),
        });
    }
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !a[r][col].is_zero())
            .ok_or(BpdError::Singular)?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        let p_inv = tower.inv(a[col][col])?;
        for v in a[col].iter_mut() {
            *v = tower.mul(*v, p_inv);
        }
        b[col] = tower.mul(b[col], p_inv);
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col];
            for c in col..n {
                let v = tower.mul(f, a[col][c]);
                a[r][c] = tower.add(a[r][c], v);
            }
            b[r] = tower.add(b[r], tower.mul(f, b[col]));
        }
    }
    Ok(b)
}
