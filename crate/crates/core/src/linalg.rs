//! Exact dense linear algebra over `BigRational` (small matrices only).

use num_rational::BigRational as Q;
use num_traits::{One, Zero};

pub type Matrix = Vec<Vec<Q>>;

/// Reduced row echelon form in place; returns the pivot columns.
pub fn rref(m: &mut Matrix) -> Vec<usize> {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = Q::one() / &m[r][c];
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in c..cols {
                    let delta = &f * &m[r][j];
                    m[i][j] -= delta;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(m: &Matrix) -> usize {
    let mut a = m.clone();
    rref(&mut a).len()
}

/// Basis of `{x : m x = 0}`; `cols` is needed when `m` has no rows.
pub fn nullspace(m: &Matrix, cols: usize) -> Vec<Vec<Q>> {
    let mut a = m.clone();
    let pivots = rref(&mut a);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut x = vec![Q::zero(); cols];
            x[f] = Q::one();
            for (row, &pc) in pivots.iter().enumerate() {
                x[pc] = -a[row][f].clone();
            }
            x
        })
        .collect()
}

/// Unique solution of the square system `a x = b`, if `a` is invertible.
pub fn solve(a: &Matrix, b: &[Q]) -> Option<Vec<Q>> {
    let n = a.len();
    let mut aug: Matrix = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.len() < n || pivots.iter().any(|&p| p >= n) {
        return None;
    }
    Some(aug.into_iter().map(|row| row[n].clone()).collect())
}

pub fn det(m: &Matrix) -> Q {
    let n = m.len();
    let mut a = m.clone();
    let mut d = Q::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else {
            return Q::zero();
        };
        if p != c {
            a.swap(p, c);
            d = -d;
        }
        d *= &a[c][c];
        for i in c + 1..n {
            if !a[i][c].is_zero() {
                let f = &a[i][c] / &a[c][c];
                for j in c..n {
                    let delta = &f * &a[c][j];
                    a[i][j] -= delta;
                }
            }
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn m(rows: &[&[i64]]) -> Matrix {
        rows.iter()
            .map(|r| {
                r.iter()
                    .map(|&x| Q::from_integer(BigInt::from(x)))
                    .collect()
            })
            .collect()
    }

    #[test]
    fn determinant_and_rank() {
        let a = m(&[&[2, 1], &[1, 3]]);
        assert_eq!(det(&a), Q::from_integer(5.into()));
        assert_eq!(rank(&m(&[&[1, 2], &[2, 4]])), 1);
    }

    #[test]
    fn nullspace_is_annihilated() {
        let a = m(&[&[1, 1, 1]]);
        let ns = nullspace(&a, 3);
        assert_eq!(ns.len(), 2);
        for v in ns {
            let s: Q = v.iter().fold(Q::zero(), |acc, x| acc + x);
            assert!(s.is_zero());
        }
    }

    #[test]
    fn solve_singular_is_none() {
        let a = m(&[&[1, 2], &[2, 4]]);
        let b = vec![Q::one(), Q::one()];
        assert!(solve(&a, &b).is_none());
        let a = m(&[&[1, 1], &[1, -1]]);
        let x = solve(&a, &[Q::from_integer(2.into()), Q::zero()]).unwrap();
        assert_eq!(x, vec![Q::one(), Q::one()]);
    }
}
