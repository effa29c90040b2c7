//! Small exact linear-algebra helpers over Q and Z used by the polytope and
//! lattice-membership code. Everything here is dense and desk-scale.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub fn big_rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Solve A x = b over Q by Gaussian elimination. A is m x n (rows of length n).
/// Returns one solution if the system is consistent, `None` otherwise.
pub fn solve(a: &[Vec<BigRational>], b: &[BigRational]) -> Option<Vec<BigRational>> {
    let m = a.len();
    if m == 0 {
        return Some(Vec::new());
    }
    let n = a[0].len();
    let mut aug: Vec<Vec<BigRational>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();
    let mut pivot_of_col = vec![usize::MAX; n];
    let mut row = 0;
    for col in 0..n {
        let Some(pr) = (row..m).find(|&r| !aug[r][col].is_zero()) else {
            continue;
        };
        aug.swap(row, pr);
        let inv = aug[row][col].recip();
        for c in col..=n {
            aug[row][c] = &aug[row][c] * &inv;
        }
        for r in 0..m {
            if r != row && !aug[r][col].is_zero() {
                let f = aug[r][col].clone();
                for c in col..=n {
                    let delta = &f * &aug[row][c];
                    aug[r][c] = &aug[r][c] - delta;
                }
            }
        }
        pivot_of_col[col] = row;
        row += 1;
        if row == m {
            break;
        }
    }
    // consistency: zero rows must have zero rhs
    for r in row..m {
        if !aug[r][n].is_zero() {
            return None;
        }
    }
    let mut x = vec![BigRational::zero(); n];
    for col in 0..n {
        if pivot_of_col[col] != usize::MAX {
            x[col] = aug[pivot_of_col[col]][n].clone();
        }
    }
    // verify (guards against free-variable bookkeeping mistakes)
    for r in 0..m {
        let mut acc = BigRational::zero();
        for c in 0..n {
            acc += &a[r][c] * &x[c];
        }
        if acc != b[r] {
            return None;
        }
    }
    Some(x)
}

pub fn rank(a: &[Vec<BigRational>]) -> usize {
    let m = a.len();
    if m == 0 {
        return 0;
    }
    let n = a[0].len();
    let mut w: Vec<Vec<BigRational>> = a.to_vec();
    let mut row = 0;
    for col in 0..n {
        let Some(pr) = (row..m).find(|&r| !w[r][col].is_zero()) else {
            continue;
        };
        w.swap(row, pr);
        let inv = w[row][col].recip();
        for c in col..n {
            w[row][c] = &w[row][c] * &inv;
        }
        for r in 0..m {
            if r != row && !w[r][col].is_zero() {
                let f = w[r][col].clone();
                for c in col..n {
                    let delta = &f * &w[row][c];
                    w[r][c] = &w[r][c] - delta;
                }
            }
        }
        row += 1;
        if row == m {
            break;
        }
    }
    row
}

/// Determinant of an integer matrix by cofactor expansion; fine for n <= 8.
pub fn det_i128(a: &[Vec<i128>]) -> i128 {
    let n = a.len();
    match n {
        0 => 1,
        1 => a[0][0],
        2 => a[0][0] * a[1][1] - a[0][1] * a[1][0],
        _ => {
            let mut acc = 0i128;
            for (j, &top) in a[0].iter().enumerate() {
                if top == 0 {
                    continue;
                }
                let minor: Vec<Vec<i128>> = a[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|&(c, _)| c != j)
                            .map(|(_, &v)| v)
                            .collect()
                    })
                    .collect();
                let s = if j % 2 == 0 { 1 } else { -1 };
                acc += s * top * det_i128(&minor);
            }
            acc
        }
    }
}

/// Characteristic polynomial det(tI - A) of an integer matrix via the
/// Faddeev-LeVerrier recursion. Returns coefficients c_0..c_n with
/// det(tI - A) = sum_k c_k t^{n-k}, c_0 = 1. All divisions are exact.
pub fn char_poly(a: &[Vec<i128>]) -> Vec<i128> {
    let n = a.len();
    let mut coeffs = vec![1i128];
    let mut m: Vec<Vec<i128>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1 } else { 0 }).collect())
        .collect();
    let mut ck = 1i128;
    for k in 1..=n {
        // m <- A * m_prev + c_{k-1} I was folded in already; step: AM
        let am: Vec<Vec<i128>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| (0..n).map(|l| a[i][l] * m[l][j]).sum())
                    .collect()
            })
            .collect();
        let tr: i128 = (0..n).map(|i| am[i][i]).sum();
        ck = -tr / (k as i128);
        debug_assert_eq!(-tr % (k as i128), 0);
        coeffs.push(ck);
        m = am;
        for i in 0..n {
            m[i][i] += ck;
        }
    }
    let _ = ck;
    coeffs
}

/// Multiply two integer polynomials (coefficient lists, ascending).
pub fn poly_mul_i128(a: &[i128], b: &[i128]) -> Vec<i128> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0i128; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn is_integral(x: &BigRational) -> bool {
    x.denom().abs() == BigInt::one()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rmat(a: &[&[i64]]) -> Vec<Vec<BigRational>> {
        a.iter()
            .map(|row| row.iter().map(|&v| big_rat(v, 1)).collect())
            .collect()
    }

    #[test]
    fn solve_and_consistency() {
        let a = rmat(&[&[2, 1], &[1, -1]]);
        let b = vec![big_rat(5, 1), big_rat(1, 1)];
        let x = solve(&a, &b).unwrap();
        assert_eq!(x, vec![big_rat(2, 1), big_rat(1, 1)]);
        // inconsistent
        let a = rmat(&[&[1, 1], &[2, 2]]);
        let b = vec![big_rat(1, 1), big_rat(3, 1)];
        assert!(solve(&a, &b).is_none());
    }

    #[test]
    fn char_poly_of_permutation() {
        // 3-cycle: char poly t^3 - 1
        let a = vec![vec![0, 0, 1], vec![1, 0, 0], vec![0, 1, 0]];
        assert_eq!(char_poly(&a), vec![1, 0, 0, -1]);
    }

    #[test]
    fn det_small() {
        let a = vec![vec![1, 2, 3], vec![4, 5, 6], vec![7, 8, 10]];
        assert_eq!(det_i128(&a), -3);
    }
}
