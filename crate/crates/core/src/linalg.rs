//! Small dense linear algebra: exact rank over ℚ and thresholded numerical
//! rank.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Clears denominators row by row so the matrix has integer entries with
/// the same row space.
fn integer_rows(rows: &[Vec<BigRational>]) -> Vec<Vec<BigInt>> {
    rows.iter()
        .map(|row| {
            let l = row
                .iter()
                .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
            row.iter()
                .map(|q| (q * BigRational::from_integer(l.clone())).to_integer())
                .collect()
        })
        .collect()
}

/// Exact rank of a rational matrix by fraction-free (Bareiss) elimination.
pub fn rank_rational(rows: &[Vec<BigRational>]) -> usize {
    let mut a = integer_rows(rows);
    let m = a.len();
    if m == 0 {
        return 0;
    }
    let n = a[0].len();
    let mut rank = 0;
    let mut prev = BigInt::one();
    for col in 0..n {
        if rank == m {
            break;
        }
        let Some(p) = (rank..m).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(rank, p);
        for r in rank + 1..m {
            for c in col + 1..n {
                let v = &a[rank][col] * &a[r][c] - &a[r][col] * &a[rank][c];
                a[r][c] = v / &prev;
            }
            a[r][col] = BigInt::zero();
        }
        prev = a[rank][col].clone();
        rank += 1;
    }
    rank
}

/// Numerical rank by Gaussian elimination with complete pivoting. A pivot
/// counts when it exceeds `rel_tol` times the first (largest) pivot.
pub fn rank_numeric(rows: &[Vec<f64>], rel_tol: f64) -> usize {
    let mut a: Vec<Vec<f64>> = rows.to_vec();
    let m = a.len();
    if m == 0 {
        return 0;
    }
    let n = a[0].len();
    let mut first_pivot = None;
    let mut rank = 0;
    while rank < m.min(n) {
        let mut best = (0.0, rank, rank);
        for (r, row) in a.iter().enumerate().skip(rank) {
            for (c, v) in row.iter().enumerate().skip(rank) {
                if v.abs() > best.0 {
                    best = (v.abs(), r, c);
                }
            }
        }
        let (mag, pr, pc) = best;
        if mag == 0.0 || !mag.is_finite() {
            break;
        }
        let scale = *first_pivot.get_or_insert(mag);
        if mag <= rel_tol * scale {
            break;
        }
        a.swap(rank, pr);
        for row in a.iter_mut() {
            row.swap(rank, pc);
        }
        let (top, rest) = a.split_at_mut(rank + 1);
        let pivot_row = &top[rank];
        for row in rest.iter_mut().take(m - rank - 1) {
            let f = row[rank] / pivot_row[rank];
            if f != 0.0 {
                for (v, p) in row[rank..n].iter_mut().zip(&pivot_row[rank..n]) {
                    *v -= f * p;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Converts an `f64` to the exact rational it represents.
pub fn rational_from_f64(x: f64) -> Option<BigRational> {
    BigRational::from_float(x)
}

pub fn is_zero_vector(v: &[BigRational]) -> bool {
    v.iter().all(Zero::is_zero)
}

pub fn max_abs(v: &[BigRational]) -> BigRational {
    v.iter()
        .map(|q| q.abs())
        .max()
        .unwrap_or_else(BigRational::zero)
}
