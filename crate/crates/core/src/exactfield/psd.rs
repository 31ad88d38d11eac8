use num_traits::Zero;

use super::matrix::ExactSymMatrix;
use super::qsqrt2::QSqrt2;

/// Outcome of [`is_psd_exact`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PsdDecision {
    /// Positive semidefinite. `pivots[k]` is the k-th Schur pivot (zero when row k was already zero).
    Psd { pivots: Vec<QSqrt2> },
    /// Not PSD; `witness` satisfies `witnessᵀ A witness = value < 0`.
    NotPsd { witness: Vec<QSqrt2>, value: QSqrt2, stage: usize },
}

impl PsdDecision {
    pub fn is_psd(&self) -> bool {
        matches!(self, PsdDecision::Psd { .. })
    }
}

/// Decides `A ⪰ 0` exactly by symmetric Schur complementation in natural order.
///
/// A negative pivot, or a zero pivot whose row is not zero, disproves PSD; the failing 1×1 or
/// 2×2 principal form of the current Schur complement is lifted back through the recorded
/// elimination rows to a vector `x` with `xᵀAx < 0`.
pub fn is_psd_exact(a: &ExactSymMatrix) -> PsdDecision {
    let n = a.n();
    let mut s: Vec<Vec<QSqrt2>> = a.rows();
    // elimination rows: Some((1/d_k, row k of the Schur complement at stage k)) or None for skips
    let mut elim: Vec<Option<(QSqrt2, Vec<QSqrt2>)>> = Vec::with_capacity(n);
    let mut pivots = Vec::with_capacity(n);

    for k in 0..n {
        let d = s[k][k].clone();
        match d.signum() {
            -1 => {
                let mut z = vec![QSqrt2::zero(); n];
                z[k] = QSqrt2::from_int(1);
                return fail(a, &elim, z, k);
            }
            0 => {
                if let Some(j) = ((k + 1)..n).find(|&j| !s[k][j].is_zero()) {
                    // (t e_k + e_j)ᵀ S (t e_k + e_j) = 2t S_kj + S_jj = −1
                    let one = QSqrt2::from_int(1);
                    let t = -(&one + &s[j][j]) / (QSqrt2::from_int(2) * &s[k][j]);
                    let mut z = vec![QSqrt2::zero(); n];
                    z[k] = t;
                    z[j] = one;
                    return fail(a, &elim, z, k);
                }
                pivots.push(QSqrt2::zero());
                elim.push(None);
            }
            _ => {
                let inv = d.inv().expect("nonzero pivot");
                let row: Vec<QSqrt2> = s[k].clone();
                let nz: Vec<usize> = ((k + 1)..n).filter(|&j| !row[j].is_zero()).collect();
                for &i in &nz {
                    let f = &row[i] * &inv;
                    for &j in nz.iter().filter(|&&j| j >= i) {
                        let upd = &f * &row[j];
                        s[i][j] -= &upd;
                        if i != j {
                            s[j][i] = s[i][j].clone();
                        }
                    }
                }
                pivots.push(d);
                elim.push(Some((inv, row)));
            }
        }
    }
    PsdDecision::Psd { pivots }
}

fn fail(
    a: &ExactSymMatrix,
    elim: &[Option<(QSqrt2, Vec<QSqrt2>)>],
    mut x: Vec<QSqrt2>,
    stage: usize,
) -> PsdDecision {
    // back-substitute so that every completed square vanishes
    for j in (0..stage).rev() {
        if let Some((inv, row)) = &elim[j] {
            let mut acc = QSqrt2::zero();
            for i in (j + 1)..x.len() {
                if !row[i].is_zero() && !x[i].is_zero() {
                    acc += &row[i] * &x[i];
                }
            }
            x[j] = -(acc * inv);
        }
    }
    let value = a.quad_form(&x);
    debug_assert!(value.is_negative());
    PsdDecision::NotPsd { witness: x, value, stage }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> ExactSymMatrix {
        ExactSymMatrix::from_rows(
            rows.iter().map(|r| r.iter().map(|&v| QSqrt2::from_int(v)).collect()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn two_by_two_cases() {
        assert!(is_psd_exact(&m(&[&[2, 1], &[1, 2]])).is_psd());
        match is_psd_exact(&m(&[&[0, 1], &[1, 0]])) {
            PsdDecision::NotPsd { witness, value, .. } => {
                assert!(value.is_negative());
                // (t, 1) with t = -1/2: direction (1, -1) up to scaling
                assert_eq!(witness[0], QSqrt2::frac(-1, 2));
                assert_eq!(witness[1], QSqrt2::from_int(1));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn zero_rows_are_skipped() {
        let a = m(&[&[0, 0, 0], &[0, 1, 1], &[0, 1, 1]]);
        match is_psd_exact(&a) {
            PsdDecision::Psd { pivots } => {
                assert_eq!(pivots, vec![QSqrt2::zero(), QSqrt2::from_int(1), QSqrt2::zero()])
            }
            other => panic!("{other:?}"),
        }
        assert!(is_psd_exact(&ExactSymMatrix::zeros(0)).is_psd());
    }

    #[test]
    fn late_failure_lifts_witness() {
        // positive leading pivots, negative final Schur complement
        let a = m(&[&[4, 2, 2], &[2, 2, 3], &[2, 3, 1]]);
        match is_psd_exact(&a) {
            PsdDecision::NotPsd { witness, value, .. } => {
                assert_eq!(a.quad_form(&witness), value);
                assert!(value.is_negative());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sqrt2_entries() {
        // [[1, √2], [√2, 2]] is PSD and singular; [[1, √2], [√2, 1]] is not
        let s2 = QSqrt2::sqrt2();
        let one = QSqrt2::from_int(1);
        let a = ExactSymMatrix::from_rows(vec![vec![one.clone(), s2.clone()], vec![s2.clone(), QSqrt2::from_int(2)]]).unwrap();
        assert!(is_psd_exact(&a).is_psd());
        let b = ExactSymMatrix::from_rows(vec![vec![one.clone(), s2.clone()], vec![s2, one]]).unwrap();
        assert!(!is_psd_exact(&b).is_psd());
    }
}
