use num_traits::Zero;

use super::qsqrt2::{QSqrt2, Rat};
use crate::error::{Error, Result};

/// Sparse row: `(column, value)` pairs with distinct columns.
pub type SparseRow = Vec<(usize, QSqrt2)>;

/// Minimum-norm solution of `M x = b` over ℚ(√2), or [`Error::Inconsistent`].
///
/// `M` is given by dense rows. Rank-deficient and underdetermined systems are fine; the result
/// is the unique solution lying in the row space of `M`.
pub fn solve_linear_exact(m: &[Vec<QSqrt2>], b: &[QSqrt2]) -> Result<Vec<QSqrt2>> {
    let ncols = m.first().map_or(0, |r| r.len());
    if m.iter().any(|r| r.len() != ncols) {
        return Err(Error::Dimension("ragged matrix".into()));
    }
    let rows: Vec<SparseRow> = m
        .iter()
        .map(|r| r.iter().enumerate().filter(|(_, v)| !v.is_zero()).map(|(j, v)| (j, v.clone())).collect())
        .collect();
    min_norm_solution(&rows, ncols, b, None)
}

/// Weighted minimum-norm solution of `M x = b`: minimizes `Σ w_k x_k²`.
///
/// Computed as `x = W⁻¹Mᵀz` with `(M W⁻¹ Mᵀ) z = b`; that Gram system is consistent exactly when
/// `M x = b` is.
pub fn min_norm_solution(
    rows: &[SparseRow],
    ncols: usize,
    b: &[QSqrt2],
    weights: Option<&[Rat]>,
) -> Result<Vec<QSqrt2>> {
    let m = rows.len();
    if b.len() != m {
        return Err(Error::Dimension(format!("{m} rows but {} right-hand sides", b.len())));
    }
    if let Some(w) = weights {
        if w.len() != ncols {
            return Err(Error::Dimension("weight vector length".into()));
        }
    }
    let inv_w: Option<Vec<QSqrt2>> =
        weights.map(|w| w.iter().map(|wk| QSqrt2::from_rat(wk.recip())).collect());

    // column -> [(row, value)]
    let mut cols: Vec<Vec<(usize, &QSqrt2)>> = vec![Vec::new(); ncols];
    for (i, r) in rows.iter().enumerate() {
        for (j, v) in r {
            if *j >= ncols {
                return Err(Error::Dimension(format!("column {j} out of range")));
            }
            cols[*j].push((i, v));
        }
    }
    let mut g = vec![vec![QSqrt2::zero(); m]; m];
    for (k, col) in cols.iter().enumerate() {
        for (a, &(i, vi)) in col.iter().enumerate() {
            let vi_w = match &inv_w {
                Some(iw) => vi * &iw[k],
                None => vi.clone(),
            };
            for &(j, vj) in &col[a..] {
                let t = &vi_w * vj;
                g[i][j] += &t;
                if i != j {
                    g[j][i] += &t;
                }
            }
        }
    }
    let z = solve_square_consistent(g, b.to_vec())?;

    let mut x = vec![QSqrt2::zero(); ncols];
    for (i, r) in rows.iter().enumerate() {
        if z[i].is_zero() {
            continue;
        }
        for (j, v) in r {
            x[*j] += &z[i] * v;
        }
    }
    if let Some(iw) = &inv_w {
        for (xk, w) in x.iter_mut().zip(iw) {
            if !xk.is_zero() {
                *xk = &*xk * w;
            }
        }
    }
    Ok(x)
}

/// Solves a square, possibly singular system by Gaussian elimination; free unknowns are set to 0.
pub(crate) fn solve_square_consistent(mut a: Vec<Vec<QSqrt2>>, mut b: Vec<QSqrt2>) -> Result<Vec<QSqrt2>> {
    let n = a.len();
    let mut pivot_cols = Vec::new();
    let mut row = 0;
    for col in 0..n {
        let Some(p) = (row..n).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(row, p);
        b.swap(row, p);
        let inv = a[row][col].inv().expect("nonzero pivot");
        let nz: Vec<usize> = (col + 1..n).filter(|&j| !a[row][j].is_zero()).collect();
        for r in (row + 1)..n {
            if a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] * &inv;
            for &j in &nz {
                let t = &f * &a[row][j];
                a[r][j] -= &t;
            }
            let t = &f * &b[row];
            b[r] -= &t;
            a[r][col] = QSqrt2::zero();
        }
        pivot_cols.push(col);
        row += 1;
    }
    if (row..n).any(|r| !b[r].is_zero()) {
        return Err(Error::Inconsistent);
    }
    let mut x = vec![QSqrt2::zero(); n];
    for (r, &col) in pivot_cols.iter().enumerate().rev() {
        let mut acc = b[r].clone();
        for j in (col + 1)..n {
            if !a[r][j].is_zero() && !x[j].is_zero() {
                acc -= &(&a[r][j] * &x[j]);
            }
        }
        x[col] = acc / &a[r][col];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> QSqrt2 {
        QSqrt2::frac(n, d)
    }

    #[test]
    fn identity_system() {
        let m = vec![vec![q(1, 1), q(0, 1)], vec![q(0, 1), q(1, 1)]];
        assert_eq!(solve_linear_exact(&m, &[q(1, 2), q(3, 1)]).unwrap(), vec![q(1, 2), q(3, 1)]);
    }

    #[test]
    fn minimum_norm_underdetermined() {
        let m = vec![vec![q(1, 1), q(1, 1)]];
        assert_eq!(solve_linear_exact(&m, &[q(2, 1)]).unwrap(), vec![q(1, 1), q(1, 1)]);
    }

    #[test]
    fn redundant_rows_and_inconsistency() {
        let m = vec![vec![q(1, 1), q(1, 1)], vec![q(2, 1), q(2, 1)]];
        assert_eq!(solve_linear_exact(&m, &[q(2, 1), q(4, 1)]).unwrap(), vec![q(1, 1), q(1, 1)]);
        assert!(matches!(solve_linear_exact(&m, &[q(2, 1), q(5, 1)]), Err(Error::Inconsistent)));
    }

    #[test]
    fn weighted_norm() {
        // min x² + 2y² s.t. x + y = 3  ->  x = 2, y = 1
        let rows = vec![vec![(0, q(1, 1)), (1, q(1, 1))]];
        let w = [Rat::from_integer(1.into()), Rat::from_integer(2.into())];
        let x = min_norm_solution(&rows, 2, &[q(3, 1)], Some(&w)).unwrap();
        assert_eq!(x, vec![q(2, 1), q(1, 1)]);
    }

    #[test]
    fn sqrt2_coefficients() {
        // √2 x = 1 -> x = √2/2
        let m = vec![vec![QSqrt2::sqrt2()]];
        let x = solve_linear_exact(&m, &[q(1, 1)]).unwrap();
        assert_eq!(x[0], QSqrt2::sqrt2_times(crate::exactfield::rat(1, 2)));
    }
}
