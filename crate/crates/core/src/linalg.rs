//! Small dense linear algebra used when building charts and crossing maps.
//!
//! Everything here operates on matrices whose side is the complex dimension
//! plus one, so clarity and determinism win over speed.

use nalgebra::DMatrix;

/// Relative pivot tolerance for rank decisions in the Gram factorization.
pub const RANK_TOL: f64 = 1e-10;

/// Pivoted square-root (Cholesky) factorization of a symmetric
/// positive-definite matrix.
///
/// Returns the rows of the factor in the *original* ordering, i.e. row `i`
/// of the result satisfies `G = R R^T` with `R[i]` the coordinates of item
/// `i`. Returns `None` when a pivot falls below `RANK_TOL` relative to the
/// largest initial diagonal entry, which signals a degenerate (rank
/// deficient or indefinite) input.
pub fn pivoted_sqrt_factor(g: &DMatrix<f64>) -> Option<Vec<Vec<f64>>> {
    let k = g.nrows();
    assert_eq!(k, g.ncols());
    if k == 0 {
        return Some(Vec::new());
    }
    let mut perm: Vec<usize> = (0..k).collect();
    // l is stored in permuted row order; column j is built at step j.
    let mut l = vec![vec![0.0f64; k]; k];
    let mut resid: Vec<f64> = (0..k).map(|i| g[(i, i)]).collect();
    let max_diag = resid.iter().cloned().fold(0.0f64, f64::max);
    if max_diag <= 0.0 {
        return None;
    }
    let tol = RANK_TOL * max_diag;
    for j in 0..k {
        // Pick the largest remaining residual diagonal as pivot.
        let (p, &dmax) = resid
            .iter()
            .enumerate()
            .skip(j)
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty");
        if dmax <= tol {
            return None;
        }
        perm.swap(j, p);
        resid.swap(j, p);
        l.swap(j, p);
        let ljj = dmax.sqrt();
        l[j][j] = ljj;
        let row_j = l[j][..j].to_vec();
        for i in (j + 1)..k {
            let mut s = g[(perm[i], perm[j])];
            for (a, b) in l[i][..j].iter().zip(&row_j) {
                s -= a * b;
            }
            let v = s / ljj;
            l[i][j] = v;
            resid[i] -= v * v;
        }
    }
    // Undo the permutation: item perm[i] currently sits in row i.
    let mut rows = vec![Vec::new(); k];
    for (i, row) in l.into_iter().enumerate() {
        rows[perm[i]] = row;
    }
    Some(rows)
}

/// Inverse of a small square matrix via LU with partial pivoting.
pub fn invert(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    m.clone().try_inverse()
}

/// Squared Euclidean norm of a slice.
pub fn norm_sq(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// Euclidean norm of a slice.
pub fn norm(v: &[f64]) -> f64 {
    norm_sq(v).sqrt()
}

/// Dot product of two slices of equal length.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Scale a vector in place so its Euclidean norm is one.
///
/// Returns the previous norm; callers treat a norm near zero as a logic
/// error upstream.
pub fn normalize(v: &mut [f64]) -> f64 {
    let n = norm(v);
    if n > 0.0 {
        for x in v.iter_mut() {
            *x /= n;
        }
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_reproduces_gram() {
        // Gram matrix of a unit equilateral triangle relative to one vertex.
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0]);
        let rows = pivoted_sqrt_factor(&g).expect("positive definite");
        for i in 0..2 {
            for j in 0..2 {
                let d = dot(&rows[i], &rows[j]);
                assert!((d - g[(i, j)]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn factor_rejects_indefinite() {
        // Triangle with squared lengths (1, 1, 9) violates the triangle
        // inequality, so its Gram matrix is indefinite.
        let g = DMatrix::from_row_slice(2, 2, &[1.0, -3.5, -3.5, 1.0]);
        assert!(pivoted_sqrt_factor(&g).is_none());
    }

    #[test]
    fn factor_rejects_rank_deficient() {
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(pivoted_sqrt_factor(&g).is_none());
    }
}
