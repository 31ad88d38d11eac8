use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::ParseError;
use crate::exactfield::{upper_index, ExactSymMatrix};

/// Real symmetric `n × n` matrix with finite entries; upper triangle stored row-major.
#[derive(Clone, PartialEq, Debug)]
pub struct SymMatrix {
    n: usize,
    upper: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        SymMatrix { n, upper: vec![0.0; n * (n + 1) / 2] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut upper = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                upper.push(f(i, j));
            }
        }
        SymMatrix { n, upper }
    }

    /// Panics unless `upper.len() == n(n+1)/2`.
    pub fn from_upper(n: usize, upper: Vec<f64>) -> Self {
        assert_eq!(upper.len(), n * (n + 1) / 2, "upper triangle length");
        SymMatrix { n, upper }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, ParseError> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(ParseError::Matrix("expected a nonempty square matrix".into()));
        }
        for i in 0..n {
            for j in 0..n {
                if !rows[i][j].is_finite() {
                    return Err(ParseError::Matrix(format!("non-finite entry at ({i}, {j})")));
                }
                if rows[i][j] != rows[j][i] {
                    return Err(ParseError::Matrix(format!("not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self::from_fn(n, |i, j| rows[i][j]))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.upper[upper_index(self.n, i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = upper_index(self.n, i, j);
        self.upper[k] = v;
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j)).collect()).collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        frobenius(self, self).sqrt()
    }

    pub fn quad_form(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                acc += x[i] * self.get(i, j) * x[j];
            }
        }
        acc
    }

    pub fn scaled(&self, c: f64) -> Self {
        SymMatrix { n: self.n, upper: self.upper.iter().map(|v| v * c).collect() }
    }

    pub(crate) fn to_dense(&self) -> Vec<f64> {
        let n = self.n;
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                d[i * n + j] = self.get(i, j);
            }
        }
        d
    }
}

/// `⟨A, B⟩ = Tr(AB)` for float matrices of equal size.
pub fn frobenius(a: &SymMatrix, b: &SymMatrix) -> f64 {
    assert_eq!(a.n, b.n, "size mismatch");
    let mut acc = 0.0;
    for i in 0..a.n {
        for j in i..a.n {
            let t = a.get(i, j) * b.get(i, j);
            acc += if i == j { t } else { 2.0 * t };
        }
    }
    acc
}

impl From<&ExactSymMatrix> for SymMatrix {
    fn from(a: &ExactSymMatrix) -> Self {
        SymMatrix { n: a.n(), upper: a.upper().iter().map(|v| v.to_f64()).collect() }
    }
}

impl Serialize for SymMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.rows().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SymMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(deserializer)?;
        SymMatrix::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}
