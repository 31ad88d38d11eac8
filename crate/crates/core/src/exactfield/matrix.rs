use num_traits::Zero;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::qsqrt2::QSqrt2;
use crate::error::{Error, ParseError, Result};

/// Symmetric `n × n` matrix over ℚ(√2); only the upper triangle is stored (row-major).
#[derive(Clone, PartialEq, Eq)]
pub struct ExactSymMatrix {
    n: usize,
    upper: Vec<QSqrt2>,
}

#[inline]
pub(crate) fn upper_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * n - i * (i + 1) / 2 + j
}

impl ExactSymMatrix {
    pub fn zeros(n: usize) -> Self {
        ExactSymMatrix { n, upper: vec![QSqrt2::zero(); n * (n + 1) / 2] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { QSqrt2::from_int(1) } else { QSqrt2::zero() })
    }

    /// Builds the matrix from `f(i, j)` evaluated on the upper triangle `i <= j`.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> QSqrt2) -> Self {
        let mut upper = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                upper.push(f(i, j));
            }
        }
        ExactSymMatrix { n, upper }
    }

    /// From upper-triangle values in row-major order.
    pub fn from_upper(n: usize, upper: Vec<QSqrt2>) -> Result<Self> {
        if upper.len() != n * (n + 1) / 2 {
            return Err(Error::Dimension(format!(
                "expected {} upper-triangle entries for n = {n}, got {}",
                n * (n + 1) / 2,
                upper.len()
            )));
        }
        Ok(ExactSymMatrix { n, upper })
    }

    /// From full rows; fails unless the rows form a nonempty symmetric square matrix.
    pub fn from_rows(rows: Vec<Vec<QSqrt2>>) -> std::result::Result<Self, ParseError> {
        let n = rows.len();
        if n == 0 {
            return Err(ParseError::Matrix("empty matrix".into()));
        }
        if let Some(r) = rows.iter().position(|r| r.len() != n) {
            return Err(ParseError::Matrix(format!("row {r} does not have {n} entries")));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if rows[i][j] != rows[j][i] {
                    return Err(ParseError::Matrix(format!("not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self::from_fn(n, |i, j| rows[i][j].clone()))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &QSqrt2 {
        &self.upper[upper_index(self.n, i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: QSqrt2) {
        let k = upper_index(self.n, i, j);
        self.upper[k] = v;
    }

    pub fn upper(&self) -> &[QSqrt2] {
        &self.upper
    }

    pub fn rows(&self) -> Vec<Vec<QSqrt2>> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j).clone()).collect()).collect()
    }

    /// Leading `k × k` principal submatrix.
    pub fn leading(&self, k: usize) -> Self {
        assert!(k <= self.n);
        Self::from_fn(k, |i, j| self.get(i, j).clone())
    }

    pub fn principal(&self, idx: &[usize]) -> Self {
        Self::from_fn(idx.len(), |i, j| self.get(idx[i], idx[j]).clone())
    }

    pub fn scaled(&self, c: &QSqrt2) -> Self {
        ExactSymMatrix { n: self.n, upper: self.upper.iter().map(|v| v * c).collect() }
    }

    pub fn checked_add(&self, o: &Self) -> Result<Self> {
        self.same_size(o)?;
        Ok(ExactSymMatrix {
            n: self.n,
            upper: self.upper.iter().zip(&o.upper).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn checked_sub(&self, o: &Self) -> Result<Self> {
        self.same_size(o)?;
        Ok(ExactSymMatrix {
            n: self.n,
            upper: self.upper.iter().zip(&o.upper).map(|(a, b)| a - b).collect(),
        })
    }

    fn same_size(&self, o: &Self) -> Result<()> {
        if self.n != o.n {
            return Err(Error::Dimension(format!("{}x{} vs {}x{}", self.n, self.n, o.n, o.n)));
        }
        Ok(())
    }

    /// `xᵀ A x`.
    pub fn quad_form(&self, x: &[QSqrt2]) -> QSqrt2 {
        assert_eq!(x.len(), self.n);
        let mut acc = QSqrt2::zero();
        for i in 0..self.n {
            if x[i].is_zero() {
                continue;
            }
            let mut row = QSqrt2::zero();
            for j in 0..self.n {
                if !x[j].is_zero() {
                    row += self.get(i, j) * &x[j];
                }
            }
            acc += &x[i] * &row;
        }
        acc
    }

    /// Entry `(i, j)` of the smallest value, row-major over the upper triangle.
    pub fn min_entry(&self) -> ((usize, usize), &QSqrt2) {
        let mut best = ((0, 0), self.get(0, 0));
        for i in 0..self.n {
            for j in i..self.n {
                let v = self.get(i, j);
                if v < best.1 {
                    best = ((i, j), v);
                }
            }
        }
        best
    }

    pub fn to_f64_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j).to_f64()).collect()).collect()
    }
}

/// `⟨A, B⟩ = Σᵢⱼ AᵢⱼBᵢⱼ`, computed exactly.
pub fn frobenius_exact(a: &ExactSymMatrix, b: &ExactSymMatrix) -> Result<QSqrt2> {
    a.same_size(b)?;
    let n = a.n;
    let mut diag = QSqrt2::zero();
    let mut off = QSqrt2::zero();
    for i in 0..n {
        for j in i..n {
            let (x, y) = (a.get(i, j), b.get(i, j));
            if x.is_zero() || y.is_zero() {
                continue;
            }
            if i == j {
                diag += x * y;
            } else {
                off += x * y;
            }
        }
    }
    Ok(diag + &off + &off)
}

impl std::fmt::Debug for ExactSymMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.rows().iter()).finish()
    }
}

impl Serialize for ExactSymMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.rows().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ExactSymMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<QSqrt2>>::deserialize(deserializer)?;
        ExactSymMatrix::from_rows(rows).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn upper_index_covers_triangle() {
        let n = 4;
        let mut seen = vec![false; n * (n + 1) / 2];
        for i in 0..n {
            for j in i..n {
                let k = upper_index(n, i, j);
                assert!(!seen[k]);
                seen[k] = true;
                assert_eq!(k, upper_index(n, j, i));
            }
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn frobenius_of_unit_entry() {
        let mut e = ExactSymMatrix::zeros(3);
        e.set(0, 0, QSqrt2::from_int(1));
        assert_eq!(frobenius_exact(&e, &e).unwrap(), QSqrt2::from_int(1));
        assert!(frobenius_exact(&e, &ExactSymMatrix::zeros(2)).is_err());
    }

    #[test]
    fn rejects_asymmetric_rows() {
        let one = QSqrt2::from_int(1);
        let z = QSqrt2::zero();
        assert!(ExactSymMatrix::from_rows(vec![vec![one.clone(), one.clone()], vec![z.clone(), one]]).is_err());
        assert!(ExactSymMatrix::from_rows(vec![]).is_err());
    }
}
