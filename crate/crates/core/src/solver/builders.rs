use num_traits::{One, Zero};

use super::exact::ExactConicProblem;
use super::problem::{Block, BlockKind, ConicProblem};
use super::SolverError;
use crate::cones::{horn_matrix, SymMatrix};
use crate::exactfield::{frobenius_exact, upper_index, ExactSymMatrix, QSqrt2, Rat, SparseRow};
use crate::multop::{compression, FourierCoeffs};
use crate::sos::{poly_gram_map, target_map, trig_gram_map, MonomialBasis};

/// `Σ_{p≤q} w_pq C_pq` form of `⟨C, A⟩`: diagonal weight `A_pp`, off-diagonal `2 A_pq`.
pub(crate) fn frobenius_row(a: &ExactSymMatrix, offset: usize) -> SparseRow {
    let n = a.n();
    let two = QSqrt2::from_int(2);
    let mut row = Vec::new();
    for i in 0..n {
        for j in i..n {
            let v = a.get(i, j);
            if v.is_zero() {
                continue;
            }
            let w = if i == j { v.clone() } else { v * &two };
            row.push((offset + upper_index(n, i, j), w));
        }
    }
    row
}

/// The seed SDP: `a ∈ NONNEG(m)`, `B ∈ PSD(m′+1)`, `vᵀBv = 1 + 2Σ a_k cos(2kπx)` coefficientwise,
/// and `⟨A⁽⁵⁾(a), H⟩ = −ε`.
pub fn build_seed_problem(eps: &Rat, m: usize, m_prime: usize) -> Result<ExactConicProblem, SolverError> {
    if m == 0 || m_prime == 0 || m_prime > m {
        return Err(SolverError::Invalid(format!("need 1 <= m' <= m, got m = {m}, m' = {m_prime}")));
    }
    let blocks = vec![Block::named(BlockKind::Nonneg, m, "a"), Block::named(BlockKind::Psd, m_prime + 1, "B")];
    let b_off = m;
    let gram = trig_gram_map(m_prime);
    let gram_rows = gram.rows();
    let outputs = m.max(2 * m_prime) + 1;
    let mut rows: Vec<SparseRow> = Vec::with_capacity(outputs + 1);
    let mut rhs = Vec::with_capacity(outputs + 1);
    for k in 0..outputs {
        let mut row: SparseRow = Vec::new();
        if (1..=m).contains(&k) {
            row.push((k - 1, QSqrt2::from_int(-2)));
        }
        if let Some(gr) = gram_rows.get(k) {
            row.extend(gr.iter().map(|(u, w)| (b_off + u, QSqrt2::from_rat(w.clone()))));
        }
        rows.push(row);
        rhs.push(if k == 0 { QSqrt2::one() } else { QSqrt2::zero() });
    }

    // ⟨A⁽⁵⁾(a), H⟩ is affine in a
    let h = horn_matrix();
    let base = frobenius_exact(&compression(&FourierCoeffs::zeros(m), 5), &h).expect("5x5");
    let mut row: SparseRow = Vec::new();
    for k in 0..m {
        let mut e = vec![QSqrt2::zero(); m];
        e[k] = QSqrt2::one();
        let f = FourierCoeffs::new(e).expect("m >= 1");
        let coef = frobenius_exact(&compression(&f, 5), &h).expect("5x5") - &base;
        if !coef.is_zero() {
            row.push((k, coef));
        }
    }
    rows.push(row);
    rhs.push(-QSqrt2::from_rat(eps.clone()) - base);
    ExactConicProblem::new(blocks, rows, rhs)
}

/// The e-COP SDP for an `n × n` matrix `A`: `C` free symmetric, `G ∈ PSD` over the monomials of
/// degree `2 + k`, `(Σxᵢ²)ᵏ q_C = wᵀGw` coefficientwise, and `⟨C, A⟩ = −ε′`.
///
/// Block order: `C` (FREE, upper triangle), then `G` (PSD).
pub fn build_ecop_problem(a: &ExactSymMatrix, k: usize, eps_prime: &Rat) -> Result<ExactConicProblem, SolverError> {
    if !(1..=2).contains(&k) {
        return Err(SolverError::Invalid(format!("k must be 1 or 2, got {k}")));
    }
    let n = a.n();
    let basis = MonomialBasis::new(n, 2 + k);
    let nc = n * (n + 1) / 2;
    let blocks = vec![Block::named(BlockKind::Free, nc, "C"), Block::named(BlockKind::Psd, basis.len(), "G")];
    let gram_rows = poly_gram_map(&basis).rows();
    let target_rows = target_map(n, k).rows();
    let mut rows: Vec<SparseRow> = Vec::with_capacity(gram_rows.len() + 1);
    let mut rhs = Vec::with_capacity(gram_rows.len() + 1);
    for (gr, tr) in gram_rows.iter().zip(&target_rows) {
        let mut row: SparseRow = tr.iter().map(|(u, w)| (*u, -QSqrt2::from_rat(w.clone()))).collect();
        row.extend(gr.iter().map(|(u, w)| (nc + u, QSqrt2::from_rat(w.clone()))));
        rows.push(row);
        rhs.push(QSqrt2::zero());
    }
    rows.push(frobenius_row(a, 0));
    rhs.push(-QSqrt2::from_rat(eps_prime.clone()));
    ExactConicProblem::new(blocks, rows, rhs)
}

/// `P + N = A` with `P ∈ PSD(n)` and `N ≥ 0` (upper triangle). Block order: `P`, `N`.
pub fn build_spn_problem(a: &SymMatrix) -> ConicProblem {
    let n = a.n();
    let d = n * (n + 1) / 2;
    let blocks = vec![Block::named(BlockKind::Psd, n, "P"), Block::named(BlockKind::Nonneg, d, "N")];
    let rows = (0..d).map(|u| vec![(u, 1.0), (d + u, 1.0)]).collect();
    ConicProblem::new(blocks, vec![0.0; 2 * d], rows, a.upper().to_vec()).expect("well formed")
}

/// `(Σxᵢ²)ʳ q_A = wᵀGw` with `G` PSD over the monomials of degree `2 + r`.
pub fn build_parrilo_problem(a: &SymMatrix, r: usize) -> ConicProblem {
    let n = a.n();
    let basis = MonomialBasis::new(n, 2 + r);
    let gram_rows = poly_gram_map(&basis).rows();
    let target = crate::sos::expand_target_f64(a, r);
    let rows = gram_rows
        .iter()
        .map(|gr| gr.iter().map(|(u, w)| (*u, crate::exactfield::rat_to_f64(w))).collect())
        .collect();
    let blocks = vec![Block::named(BlockKind::Psd, basis.len(), "G")];
    ConicProblem::new(blocks, vec![0.0; basis.len() * (basis.len() + 1) / 2], rows, target).expect("well formed")
}
