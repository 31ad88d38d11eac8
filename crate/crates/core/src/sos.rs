//! Gram-matrix expansions for cosine polynomials and homogeneous forms, and the exact SOS check.
//!
//! Each expansion is a linear map from the upper triangle of a Gram matrix to a coefficient
//! vector. The same [`LinearMap`] feeds the solver (as constraint rows) and the exact verifier.

use std::collections::HashMap;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::cones::SymMatrix;
use crate::error::{Error, Result};
use crate::exactfield::{is_psd_exact, rat, upper_index, ExactSymMatrix, QSqrt2, Rat};
use crate::multop::FourierCoeffs;

/// Cosine polynomial `c₀ + Σ_{k≥1} c_k cos(2kπx)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TrigPoly {
    pub c: Vec<QSqrt2>,
}

impl TrigPoly {
    /// `f = 1 + 2 Σ a_k cos(2kπx)`.
    pub fn from_coeffs(f: &FourierCoeffs) -> Self {
        let two = QSqrt2::from_int(2);
        let mut c = vec![QSqrt2::one()];
        c.extend(f.as_slice().iter().map(|a| a * &two));
        TrigPoly { c }
    }

    /// Inverse of [`TrigPoly::from_coeffs`]; needs `c₀ = 1` and at least one cosine term.
    pub fn to_coeffs(&self) -> Result<FourierCoeffs> {
        if self.c.first() != Some(&QSqrt2::one()) {
            return Err(Error::Invalid("constant term must be 1".into()));
        }
        let half = QSqrt2::from_rat(rat(1, 2));
        FourierCoeffs::new(self.c[1..].iter().map(|v| v * &half).collect())
    }

    pub fn eval(&self, x: f64) -> f64 {
        let tau = 2.0 * std::f64::consts::PI;
        self.c.iter().enumerate().map(|(k, c)| c.to_f64() * (tau * k as f64 * x).cos()).sum()
    }
}

/// Exponent vectors of total degree exactly `d` in `n` variables, lexicographically descending
/// (`x₁^d` first, `x_n^d` last). Within one degree this is also the graded lex order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonomialBasis {
    n: usize,
    d: usize,
    list: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
}

impl MonomialBasis {
    pub fn new(n: usize, d: usize) -> Self {
        assert!(n >= 1, "at least one variable");
        assert!(d <= u8::MAX as usize, "degree too large");
        let mut list = Vec::new();
        let mut cur = vec![0u8; n];
        fill(&mut list, &mut cur, 0, d);
        let index = list.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        MonomialBasis { n, d, list, index }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.list.len()
    }

    pub fn is_empty(&self) -> bool {
        self.list.is_empty()
    }

    pub fn exponents(&self) -> &[Vec<u8>] {
        &self.list
    }

    pub fn index_of(&self, e: &[u8]) -> Option<usize> {
        self.index.get(e).copied()
    }
}

fn fill(out: &mut Vec<Vec<u8>>, cur: &mut Vec<u8>, pos: usize, left: usize) {
    if pos + 1 == cur.len() {
        cur[pos] = left as u8;
        out.push(cur.clone());
        return;
    }
    for e in (0..=left).rev() {
        cur[pos] = e as u8;
        fill(out, cur, pos + 1, left - e);
    }
    cur[pos] = 0;
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Sparse linear map from the upper triangle of a `size × size` symmetric matrix to `outputs`
/// coefficients: `terms[u]` lists `(output, weight)` for upper entry `u`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearMap {
    pub size: usize,
    pub outputs: usize,
    pub terms: Vec<Vec<(usize, Rat)>>,
}

impl LinearMap {
    fn new(size: usize, outputs: usize) -> Self {
        LinearMap { size, outputs, terms: vec![Vec::new(); size * (size + 1) / 2] }
    }

    fn push(&mut self, i: usize, j: usize, out: usize, w: Rat) {
        let u = upper_index(self.size, i, j);
        if let Some(t) = self.terms[u].iter_mut().find(|(o, _)| *o == out) {
            t.1 += w;
        } else {
            self.terms[u].push((out, w));
        }
    }

    pub fn apply_exact(&self, g: &ExactSymMatrix) -> Result<Vec<QSqrt2>> {
        self.check(g.n())?;
        let mut out = vec![QSqrt2::zero(); self.outputs];
        for (u, terms) in self.terms.iter().enumerate() {
            let v = &g.upper()[u];
            if v.is_zero() {
                continue;
            }
            for (o, w) in terms {
                out[*o] += v.scale(w);
            }
        }
        Ok(out)
    }

    pub fn apply_f64(&self, g: &SymMatrix) -> Result<Vec<f64>> {
        self.check(g.n())?;
        let mut out = vec![0.0; self.outputs];
        for (u, terms) in self.terms.iter().enumerate() {
            let v = g.upper()[u];
            for (o, w) in terms {
                out[*o] += v * crate::exactfield::rat_to_f64(w);
            }
        }
        Ok(out)
    }

    /// The matrix `Y` with `⟨apply(G), y⟩ = ⟨G, Y⟩` (Frobenius), for every symmetric `G`.
    pub fn adjoint_exact(&self, y: &[QSqrt2]) -> Result<ExactSymMatrix> {
        if y.len() != self.outputs {
            return Err(Error::Dimension(format!("expected {} coefficients, got {}", self.outputs, y.len())));
        }
        let half = rat(1, 2);
        let mut upper = Vec::with_capacity(self.terms.len());
        for i in 0..self.size {
            for j in i..self.size {
                let u = upper_index(self.size, i, j);
                let mut acc: QSqrt2 = self.terms[u].iter().map(|(o, w)| y[*o].scale(w)).sum();
                if i != j {
                    acc = acc.scale(&half);
                }
                upper.push(acc);
            }
        }
        ExactSymMatrix::from_upper(self.size, upper)
    }

    /// Row form: for each output, `(upper index, weight)` pairs.
    pub fn rows(&self) -> Vec<Vec<(usize, Rat)>> {
        let mut rows = vec![Vec::new(); self.outputs];
        for (u, terms) in self.terms.iter().enumerate() {
            for (o, w) in terms {
                rows[*o].push((u, w.clone()));
            }
        }
        rows
    }

    fn check(&self, n: usize) -> Result<()> {
        if n != self.size {
            return Err(Error::Dimension(format!("Gram matrix is {n}x{n}, basis needs {}", self.size)));
        }
        Ok(())
    }
}

/// `G ↦ vᵀGv` for `v = (1, cos 2πx, …, cos 2m′πx)`, as cosine coefficients `c₀ … c_{2m′}`.
pub fn trig_gram_map(m_prime: usize) -> LinearMap {
    let size = m_prime + 1;
    let mut map = LinearMap::new(size, 2 * m_prime + 1);
    let one = Rat::one();
    for j in 0..size {
        for k in j..size {
            if j == 0 && k == 0 {
                map.push(0, 0, 0, one.clone());
            } else if j == 0 {
                map.push(0, k, k, rat(2, 1));
            } else if j == k {
                // cos² = ½ + ½ cos(2·)
                map.push(j, j, 0, rat(1, 2));
                map.push(j, j, 2 * j, rat(1, 2));
            } else {
                // 2 cos j cos k = cos(k−j) + cos(k+j)
                map.push(j, k, k - j, one.clone());
                map.push(j, k, k + j, one.clone());
            }
        }
    }
    map
}

pub fn trig_gram_expand(g: &ExactSymMatrix) -> TrigPoly {
    let m_prime = g.n() - 1;
    TrigPoly { c: trig_gram_map(m_prime).apply_exact(g).expect("sized from g") }
}

pub fn trig_gram_expand_f64(g: &SymMatrix) -> Vec<f64> {
    trig_gram_map(g.n() - 1).apply_f64(g).expect("sized from g")
}

/// `G ↦ wᵀGw` with `w` the monomials of `basis`, as coefficients over `MonomialBasis(n, 2d)`.
pub fn poly_gram_map(basis: &MonomialBasis) -> LinearMap {
    let out = MonomialBasis::new(basis.n, 2 * basis.d);
    let size = basis.len();
    let mut map = LinearMap::new(size, out.len());
    let mut sum = vec![0u8; basis.n];
    for i in 0..size {
        for j in i..size {
            for (s, (a, b)) in sum.iter_mut().zip(basis.list[i].iter().zip(&basis.list[j])) {
                *s = a + b;
            }
            let o = out.index_of(&sum).expect("degree 2d monomial");
            map.push(i, j, o, if i == j { Rat::one() } else { rat(2, 1) });
        }
    }
    map
}

pub fn poly_gram_expand(g: &ExactSymMatrix, basis: &MonomialBasis) -> Result<Vec<QSqrt2>> {
    poly_gram_map(basis).apply_exact(g)
}

pub fn poly_gram_expand_f64(g: &SymMatrix, basis: &MonomialBasis) -> Result<Vec<f64>> {
    poly_gram_map(basis).apply_f64(g)
}

/// `C ↦ (Σxᵢ²)ᵏ q_C` over `MonomialBasis(n, 4 + 2k)`, where `q_C(x) = Σ C_ij xᵢ² xⱼ²`.
pub fn target_map(n: usize, k: usize) -> LinearMap {
    let out = MonomialBasis::new(n, 4 + 2 * k);
    let mut map = LinearMap::new(n, out.len());
    let mult = sum_squares_power(n, k);
    let mut e = vec![0u8; n];
    for i in 0..n {
        for j in i..n {
            let w0 = if i == j { Rat::one() } else { rat(2, 1) };
            for (me, mc) in &mult {
                e.copy_from_slice(me);
                e[i] += 2;
                e[j] += 2;
                let o = out.index_of(&e).expect("degree 4+2k monomial");
                map.push(i, j, o, &w0 * mc);
            }
        }
    }
    map
}

// (Σ xᵢ²)^k as (exponent, coefficient) pairs
fn sum_squares_power(n: usize, k: usize) -> Vec<(Vec<u8>, Rat)> {
    let mut cur: HashMap<Vec<u8>, Rat> = HashMap::from([(vec![0u8; n], Rat::one())]);
    for _ in 0..k {
        let mut next: HashMap<Vec<u8>, Rat> = HashMap::new();
        for (e, c) in &cur {
            for i in 0..n {
                let mut f = e.clone();
                f[i] += 2;
                *next.entry(f).or_insert_with(Rat::zero) += c;
            }
        }
        cur = next;
    }
    let mut v: Vec<_> = cur.into_iter().collect();
    v.sort_by(|a, b| b.0.cmp(&a.0));
    v
}

pub fn expand_target(c: &ExactSymMatrix, k: usize) -> Vec<QSqrt2> {
    target_map(c.n(), k).apply_exact(c).expect("sized from c")
}

pub fn expand_target_f64(c: &SymMatrix, k: usize) -> Vec<f64> {
    target_map(c.n(), k).apply_f64(c).expect("sized from c")
}

/// Which basis a Gram matrix is written in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BasisSpec {
    /// `v = (1, cos 2πx, …, cos 2m′πx)`; targets are cosine coefficients.
    Trig { m_prime: usize },
    /// Monomials of degree exactly `d` in `n` variables; targets are over degree `2d`.
    Monomial { n: usize, d: usize },
}

impl BasisSpec {
    pub fn gram_size(&self) -> usize {
        match *self {
            BasisSpec::Trig { m_prime } => m_prime + 1,
            BasisSpec::Monomial { n, d } => binomial(n + d - 1, d),
        }
    }

    pub fn map(&self) -> LinearMap {
        match *self {
            BasisSpec::Trig { m_prime } => trig_gram_map(m_prime),
            BasisSpec::Monomial { n, d } => poly_gram_map(&MonomialBasis::new(n, d)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GramCertificate {
    pub basis: BasisSpec,
    pub gram: ExactSymMatrix,
    pub target: Vec<QSqrt2>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SosCheck {
    Holds,
    Shape(String),
    /// Coefficient `index` of the expansion differs from the target.
    Mismatch { index: usize, expansion: QSqrt2, target: QSqrt2 },
    NotPsd { value: QSqrt2 },
}

/// Detailed version of [`verify_sos_identity`].
pub fn check_sos_identity(cert: &GramCertificate) -> SosCheck {
    if let BasisSpec::Monomial { n, .. } = cert.basis {
        if n == 0 {
            return SosCheck::Shape("monomial basis needs n >= 1".into());
        }
    }
    if matches!(cert.basis, BasisSpec::Monomial { n, d } if binomial(n + d - 1, d) > 4096) {
        return SosCheck::Shape("monomial basis too large".into());
    }
    if cert.gram.n() != cert.basis.gram_size() {
        return SosCheck::Shape(format!(
            "Gram matrix is {}x{}, basis has {} elements",
            cert.gram.n(),
            cert.gram.n(),
            cert.basis.gram_size()
        ));
    }
    let expansion = cert.basis.map().apply_exact(&cert.gram).expect("sizes checked");
    let zero = QSqrt2::zero();
    match cert.basis {
        BasisSpec::Monomial { .. } if cert.target.len() != expansion.len() => {
            return SosCheck::Shape(format!(
                "target has {} coefficients, expected {}",
                cert.target.len(),
                expansion.len()
            ));
        }
        _ => {}
    }
    // cosine targets may be shorter or longer; missing coefficients are zero
    let len = expansion.len().max(cert.target.len());
    for idx in 0..len {
        let e = expansion.get(idx).unwrap_or(&zero);
        let t = cert.target.get(idx).unwrap_or(&zero);
        if e != t {
            return SosCheck::Mismatch { index: idx, expansion: e.clone(), target: t.clone() };
        }
    }
    match is_psd_exact(&cert.gram) {
        crate::exactfield::PsdDecision::Psd { .. } => SosCheck::Holds,
        crate::exactfield::PsdDecision::NotPsd { value, .. } => SosCheck::NotPsd { value },
    }
}

/// `true` iff the Gram expansion equals the target exactly and the Gram matrix is PSD.
pub fn verify_sos_identity(cert: &GramCertificate) -> bool {
    check_sos_identity(cert) == SosCheck::Holds
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex(rows: &[&[i64]]) -> ExactSymMatrix {
        ExactSymMatrix::from_rows(rows.iter().map(|r| r.iter().map(|&v| QSqrt2::from_int(v)).collect()).collect())
            .unwrap()
    }

    #[test]
    fn trig_examples() {
        let e11 = ex(&[&[1, 0], &[0, 0]]);
        assert_eq!(trig_gram_expand(&e11).c, vec![QSqrt2::one(), QSqrt2::zero(), QSqrt2::zero()]);
        let id = ExactSymMatrix::identity(2);
        assert_eq!(trig_gram_expand(&id).c, vec![QSqrt2::frac(3, 2), QSqrt2::zero(), QSqrt2::frac(1, 2)]);
    }

    #[test]
    fn monomial_order() {
        let b = MonomialBasis::new(2, 2);
        assert_eq!(b.exponents(), &[vec![2, 0], vec![1, 1], vec![0, 2]]);
        assert_eq!(MonomialBasis::new(5, 3).len(), binomial(7, 3));
        assert_eq!(MonomialBasis::new(3, 0).exponents(), &[vec![0, 0, 0]]);
    }

    #[test]
    fn poly_examples() {
        let b = MonomialBasis::new(1, 1);
        assert_eq!(poly_gram_expand(&ex(&[&[1]]), &b).unwrap(), vec![QSqrt2::one()]);
        let b = MonomialBasis::new(2, 1);
        let got = poly_gram_expand(&ExactSymMatrix::identity(2), &b).unwrap();
        // x², xy, y²
        assert_eq!(got, vec![QSqrt2::one(), QSqrt2::zero(), QSqrt2::one()]);
    }

    #[test]
    fn target_examples() {
        let i2 = ExactSymMatrix::identity(2);
        let k0 = expand_target(&i2, 0);
        // x⁴, x³y, x²y², xy³, y⁴
        let want: Vec<QSqrt2> = [1, 0, 0, 0, 1].iter().map(|&v| QSqrt2::from_int(v)).collect();
        assert_eq!(k0, want);
        let k1 = expand_target(&i2, 1);
        let want: Vec<QSqrt2> = [1, 0, 1, 0, 1, 0, 1].iter().map(|&v| QSqrt2::from_int(v)).collect();
        assert_eq!(k1, want);
    }

    #[test]
    fn sos_rejects_broken_identity_and_negation() {
        let g = ExactSymMatrix::identity(2);
        let target = trig_gram_expand(&g).c;
        let cert = GramCertificate { basis: BasisSpec::Trig { m_prime: 1 }, gram: g.clone(), target: target.clone() };
        assert!(verify_sos_identity(&cert));
        let mut bad = cert.clone();
        bad.gram.set(0, 0, QSqrt2::frac(1, 2));
        assert!(matches!(check_sos_identity(&bad), SosCheck::Mismatch { index: 0, .. }));
        let neg = GramCertificate {
            basis: cert.basis,
            gram: g.scaled(&QSqrt2::from_int(-1)),
            target: target.iter().map(|v| -v).collect(),
        };
        assert!(matches!(check_sos_identity(&neg), SosCheck::NotPsd { .. }));
    }
}
