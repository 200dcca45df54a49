//! Exact Gauss–Jordan elimination over the rationals.

use num_rational::BigRational;
use num_traits::{One, Zero};

pub type Matrix = Vec<Vec<BigRational>>;

/// Reduced row echelon form. Returns the nonzero rows and the pivot column of
/// each. The result is unique for a given row space.
pub fn rref(rows: &[Vec<BigRational>], ncols: usize) -> (Matrix, Vec<usize>) {
    let mut m: Matrix = rows
        .iter()
        .map(|r| {
            assert_eq!(r.len(), ncols, "ragged matrix");
            r.clone()
        })
        .collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        let Some(found) = (row..m.len()).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(row, found);
        let inv = BigRational::one() / m[row][col].clone();
        for v in m[row].iter_mut() {
            *v = v.clone() * inv.clone();
        }
        let pivot_row = m[row].clone();
        for (i, other) in m.iter_mut().enumerate() {
            if i == row || other[col].is_zero() {
                continue;
            }
            let factor = other[col].clone();
            for (v, p) in other.iter_mut().zip(&pivot_row) {
                *v = v.clone() - factor.clone() * p.clone();
            }
        }
        pivots.push(col);
        row += 1;
        if row == m.len() {
            break;
        }
    }
    m.truncate(row);
    (m, pivots)
}

pub fn rank(rows: &[Vec<BigRational>], ncols: usize) -> usize {
    rref(rows, ncols).1.len()
}

/// Basis of `{x : A x = 0}`, one vector per free column with that column set
/// to one.
pub fn nullspace(rows: &[Vec<BigRational>], ncols: usize) -> Matrix {
    let (r, pivots) = rref(rows, ncols);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![BigRational::zero(); ncols];
            v[f] = BigRational::one();
            for (row, &p) in r.iter().zip(&pivots) {
                v[p] = -row[f].clone();
            }
            v
        })
        .collect()
}

/// Canonical basis (RREF rows) of the span of `vectors`.
pub fn canonical_span(vectors: &[Vec<BigRational>], ncols: usize) -> Matrix {
    rref(vectors, ncols).0
}

pub fn same_span(a: &[Vec<BigRational>], b: &[Vec<BigRational>], ncols: usize) -> bool {
    canonical_span(a, ncols) == canonical_span(b, ncols)
}
