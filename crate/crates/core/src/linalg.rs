//! Exact Gaussian elimination over rationals.

use num_traits::Zero;

use crate::rational::Rational;
use crate::{Error, Result};

/// Solves `A x = b` for several right-hand sides at once. `matrix` is a
/// dense square `n x n` matrix in row-major order, `rhs` holds `n` rows of
/// width `k`. Returns the `n x k` solution or an internal error when the
/// matrix is singular (callers construct nonsingular systems by design).
pub fn solve_linear(mut matrix: Vec<Vec<Rational>>, mut rhs: Vec<Vec<Rational>>) -> Result<Vec<Vec<Rational>>> {
    let n = matrix.len();
    assert_eq!(rhs.len(), n, "rhs must have one row per equation");
    let width = rhs.first().map_or(0, Vec::len);

    for col in 0..n {
        let pivot_row = (col..n)
            .find(|&r| !matrix[r][col].is_zero())
            .ok_or_else(|| Error::CertificateFailure("singular linear system".to_string()))?;
        matrix.swap(col, pivot_row);
        rhs.swap(col, pivot_row);

        let pivot = matrix[col][col].clone();
        for j in col..n {
            matrix[col][j] = &matrix[col][j] / &pivot;
        }
        for j in 0..width {
            rhs[col][j] = &rhs[col][j] / &pivot;
        }

        for row in 0..n {
            if row == col || matrix[row][col].is_zero() {
                continue;
            }
            let factor = std::mem::replace(&mut matrix[row][col], Rational::zero());
            for j in (col + 1)..n {
                if !matrix[col][j].is_zero() {
                    let delta = &matrix[col][j] * &factor;
                    matrix[row][j] = &matrix[row][j] - &delta;
                }
            }
            for j in 0..width {
                if !rhs[col][j].is_zero() {
                    let delta = &rhs[col][j] * &factor;
                    rhs[row][j] = &rhs[row][j] - &delta;
                }
            }
        }
    }

    Ok(rhs)
}
