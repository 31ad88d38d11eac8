//! Compressions of the multiplication operator `M_f` on the cosine subspace of `L²[0,1]`.
//!
//! `f(x) = 1 + 2 Σₖ aₖ cos(2kπx)` and the orthonormal basis is `1, √2 cos(2πx), √2 cos(4πx), …`.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactfield::{rat, ExactSymMatrix, QSqrt2, Rat};

/// Cosine coefficients `a₁, …, a_m` of `f`; `a₀ = 1` is implicit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<QSqrt2>", into = "Vec<QSqrt2>")]
pub struct FourierCoeffs {
    a: Vec<QSqrt2>,
}

impl FourierCoeffs {
    pub fn new(a: Vec<QSqrt2>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::Invalid("at least one Fourier coefficient is required".into()));
        }
        Ok(FourierCoeffs { a })
    }

    pub fn zeros(m: usize) -> Self {
        FourierCoeffs { a: vec![QSqrt2::zero(); m.max(1)] }
    }

    pub fn m(&self) -> usize {
        self.a.len()
    }

    pub fn as_slice(&self) -> &[QSqrt2] {
        &self.a
    }

    /// `a_k` with `a₀ = 1` and zero padding past `m`.
    pub fn get(&self, k: usize) -> QSqrt2 {
        match k {
            0 => QSqrt2::one(),
            k if k <= self.a.len() => self.a[k - 1].clone(),
            _ => QSqrt2::zero(),
        }
    }

    pub fn all_nonneg(&self) -> bool {
        self.a.iter().all(|v| !v.is_negative())
    }

    /// First index (1-based) with `a_k < 0`.
    pub fn first_negative(&self) -> Option<usize> {
        self.a.iter().position(|v| v.is_negative()).map(|i| i + 1)
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.a.iter().map(QSqrt2::to_f64).collect()
    }

    /// Evaluates `f(x)` in floating point.
    pub fn eval(&self, x: f64) -> f64 {
        let tau = 2.0 * std::f64::consts::PI;
        1.0 + 2.0
            * self.a.iter().enumerate().map(|(k, a)| a.to_f64() * (tau * (k + 1) as f64 * x).cos()).sum::<f64>()
    }
}

impl TryFrom<Vec<QSqrt2>> for FourierCoeffs {
    type Error = Error;
    fn try_from(a: Vec<QSqrt2>) -> Result<Self> {
        FourierCoeffs::new(a)
    }
}

impl From<FourierCoeffs> for Vec<QSqrt2> {
    fn from(f: FourierCoeffs) -> Self {
        f.a
    }
}

/// `∫₀¹ cos(2jπx) cos(2kπx) cos(2ℓπx) dx`.
///
/// The product is `¼ Σ cos(2(j ± k ± ℓ)πx)` over the four sign patterns of `(±k, ±ℓ)`; each
/// vanishing frequency contributes `¼`. Symmetric in all three arguments.
pub fn cos_product_integral(j: u64, k: u64, l: u64) -> Rat {
    let (j, k, l) = (j as i128, k as i128, l as i128);
    let hits = [j + k + l, j + k - l, j - k + l, j - k - l].iter().filter(|&&s| s == 0).count();
    rat(hits as i64, 4)
}

/// The `n × n` compression `A⁽ⁿ⁾ = P_n M_f P_n` (1-indexed):
/// `A₁₁ = 1`, `A₁ₖ = √2 a_{k−1}`, `A_jk = a_{|j−k|} + a_{j+k−2}` for `j, k ≥ 2`.
pub fn compression(f: &FourierCoeffs, n: usize) -> ExactSymMatrix {
    ExactSymMatrix::from_fn(n, |i, j| {
        // 0-indexed i ≤ j
        if i == 0 && j == 0 {
            QSqrt2::one()
        } else if i == 0 {
            QSqrt2::sqrt2() * f.get(j)
        } else {
            f.get(j - i) + f.get(i + j)
        }
    })
}

/// Reads `(a₁, …, a₆)` back from a 5×5 compression and checks every entry against the pattern.
pub fn coeffs_from_seed(a: &ExactSymMatrix) -> Result<FourierCoeffs> {
    if a.n() != 5 {
        return Err(Error::Dimension(format!("seed matrix must be 5x5, got {}x{}", a.n(), a.n())));
    }
    let half = QSqrt2::from_rat(rat(1, 2));
    let over_sqrt2 = |v: &QSqrt2| v * &(QSqrt2::sqrt2() * &half);
    let a1 = a.get(3, 4).clone();
    let a2 = over_sqrt2(a.get(0, 2));
    let a3 = over_sqrt2(a.get(0, 3));
    let a4 = over_sqrt2(a.get(0, 4));
    let a5 = a.get(1, 4) - &a3;
    let a6 = a.get(3, 3) - QSqrt2::one();
    let f = FourierCoeffs { a: vec![a1, a2, a3, a4, a5, a6] };

    let expect = compression(&f, 5);
    for i in 0..5 {
        for j in i..5 {
            if expect.get(i, j) != a.get(i, j) {
                return Err(Error::PatternMismatch(format!(
                    "entry ({}, {}) is {} but the coefficients read off require {}",
                    i + 1,
                    j + 1,
                    a.get(i, j),
                    expect.get(i, j)
                )));
            }
        }
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactfield::parse_qs;

    fn qs(s: &str) -> QSqrt2 {
        parse_qs(s).unwrap()
    }

    #[test]
    fn product_integral_table() {
        assert_eq!(cos_product_integral(1, 0, 1), rat(1, 2));
        assert_eq!(cos_product_integral(2, 1, 1), rat(1, 4));
        assert_eq!(cos_product_integral(1, 1, 1), rat(0, 1));
        assert_eq!(cos_product_integral(0, 3, 3), rat(1, 2));
        assert_eq!(cos_product_integral(0, 0, 0), rat(1, 1));
        assert_eq!(cos_product_integral(5, 2, 3), rat(1, 4));
    }

    #[test]
    fn small_compressions() {
        assert_eq!(compression(&FourierCoeffs::zeros(3), 4), ExactSymMatrix::identity(4));
        let f = FourierCoeffs::new(vec![QSqrt2::one()]).unwrap();
        let a = compression(&f, 3);
        let want = [["1", "1*sqrt2", "0"], ["1*sqrt2", "1", "1"], ["0", "1", "1"]];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(a.get(i, j), &qs(want[i][j]), "({i},{j})");
            }
        }
    }

    #[test]
    fn seed_pattern() {
        assert_eq!(coeffs_from_seed(&ExactSymMatrix::identity(5)).unwrap(), FourierCoeffs::zeros(6));
        let f = FourierCoeffs::new(["1/3", "2", "0", "1/7", "5", "-1+1*sqrt2"].iter().map(|s| qs(s)).collect()).unwrap();
        let a = compression(&f, 5);
        assert_eq!(coeffs_from_seed(&a).unwrap(), f);
        let mut bad = a.clone();
        bad.set(1, 1, a.get(1, 1) + QSqrt2::frac(1, 1000));
        match coeffs_from_seed(&bad) {
            Err(Error::PatternMismatch(msg)) => assert!(msg.contains("(2, 2)"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }
}
