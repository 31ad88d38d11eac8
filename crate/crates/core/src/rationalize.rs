//! Turning solver floats into exact points: rounding into ℚ(√2), exact projection onto the
//! equality constraints, exact cone checks.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactfield::{
    is_psd_exact, rat_from_f64, sign_of, solve_square_consistent, ExactSymMatrix, PsdDecision,
    QSqrt2, Rat, SparseRow,
};
use crate::solver::{Block, BlockKind, ExactConicProblem};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundingSpec {
    pub denominator_bound: u64,
    pub allow_sqrt2: bool,
    /// Maximum number of continued-fraction terms examined.
    pub continued_fraction_depth: usize,
}

impl Default for RoundingSpec {
    fn default() -> Self {
        RoundingSpec { denominator_bound: 1_000_000, allow_sqrt2: false, continued_fraction_depth: 64 }
    }
}

impl RoundingSpec {
    pub fn new(denominator_bound: u64) -> Result<Self> {
        if denominator_bound == 0 {
            return Err(Error::Invalid("denominator bound must be at least 1".into()));
        }
        Ok(RoundingSpec { denominator_bound, ..Default::default() })
    }

    pub fn with_sqrt2(mut self, allow: bool) -> Self {
        self.allow_sqrt2 = allow;
        self
    }
}

/// Best rational approximation of `x` with denominator at most `bound`, looking at no more than
/// `depth` continued-fraction terms (convergents and the final semiconvergent).
pub fn best_rational(x: &Rat, bound: u64, depth: usize) -> Rat {
    let bound = BigInt::from(bound.max(1));
    if x.denom() <= &bound {
        return x.clone();
    }
    let (mut p0, mut q0, mut p1, mut q1) = (BigInt::zero(), BigInt::one(), BigInt::one(), BigInt::zero());
    let (mut n, mut d) = (x.numer().clone(), x.denom().clone());
    for _ in 0..depth.max(1) {
        let a = n.div_floor(&d);
        let q2 = &q0 + &a * &q1;
        if q2 > bound {
            break;
        }
        let p2 = &p0 + &a * &p1;
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let r = &n - &a * &d;
        (n, d) = (d, r);
        if d.is_zero() {
            break;
        }
    }
    if q1.is_zero() {
        // not even one term fits; only happens for depth exhaustion paths, fall back to floor
        return Rat::from_integer(x.floor().to_integer());
    }
    let conv = Rat::new(p1.clone(), q1.clone());
    let k = (&bound - &q0).div_floor(&q1);
    if k.is_positive() {
        let semi = Rat::new(&p0 + &k * &p1, &q0 + &k * &q1);
        if (&semi - x).abs() < (&conv - x).abs() {
            return semi;
        }
    }
    conv
}

fn lcm_denom(v: &QSqrt2) -> BigInt {
    v.rational_part().denom().lcm(v.sqrt2_part().denom())
}

/// Rounds a float into ℚ(√2). With `allow_sqrt2` the candidates `p + t√2` for `p ∈ {0, round(x)}`
/// compete with the plain rational; the closest wins, ties going to the smaller denominator.
pub fn round_scalar(x: f64, spec: &RoundingSpec) -> QSqrt2 {
    let Some(xr) = rat_from_f64(x) else {
        return QSqrt2::zero();
    };
    let plain = QSqrt2::from_rat(best_rational(&xr, spec.denominator_bound, spec.continued_fraction_depth));
    if !spec.allow_sqrt2 {
        return plain;
    }
    let mut cands = vec![plain];
    for p in [0.0, x.round()] {
        let t = (x - p) / std::f64::consts::SQRT_2;
        if let Some(tr) = rat_from_f64(t) {
            let t = best_rational(&tr, spec.denominator_bound, spec.continued_fraction_depth);
            cands.push(QSqrt2::new(rat_from_f64(p).expect("finite"), t));
        }
    }
    let err = |c: &QSqrt2| {
        let p = c.rational_part().to_f64().unwrap_or(f64::NAN);
        let t = c.sqrt2_part().to_f64().unwrap_or(f64::NAN);
        ((x - p) - t * std::f64::consts::SQRT_2).abs()
    };
    cands
        .into_iter()
        .min_by(|a, b| err(a).total_cmp(&err(b)).then_with(|| lcm_denom(a).cmp(&lcm_denom(b))))
        .expect("nonempty")
}

pub fn round_vector(x: &[f64], spec: &RoundingSpec) -> Vec<QSqrt2> {
    x.iter().map(|v| round_scalar(*v, spec)).collect()
}

/// Rounds a solver vector onto the grid `ℤ/D`.
///
/// A shared denominator keeps the exact projection and the Schur complements small; independent
/// per-coordinate denominators multiply together.
pub fn round_to_grid(x: &[f64], bound: u64) -> Vec<QSqrt2> {
    let d = BigInt::from(bound.max(1));
    x.iter()
        .map(|v| {
            let scaled = rat_from_f64(*v * bound as f64).unwrap_or_else(Rat::zero);
            QSqrt2::from_rat(Rat::new(scaled.round().to_integer(), d.clone()))
        })
        .collect()
}

/// An exact point of an [`ExactConicProblem`] that satisfies every equality and cone constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertifiedPoint {
    pub blocks: Vec<Block>,
    pub x: Vec<QSqrt2>,
}

impl CertifiedPoint {
    pub fn block(&self, i: usize) -> &[QSqrt2] {
        let off = crate::solver::block_offsets(&self.blocks);
        &self.x[off[i]..off[i + 1]]
    }

    /// A PSD or FREE block read as a symmetric matrix from its upper triangle.
    pub fn matrix(&self, i: usize, n: usize) -> ExactSymMatrix {
        ExactSymMatrix::from_upper(n, self.block(i).to_vec()).expect("block holds an upper triangle")
    }
}

/// Frobenius weights of the coordinates: off-diagonal PSD entries count twice.
pub fn coordinate_weights(blocks: &[Block]) -> Vec<Rat> {
    let mut w = Vec::new();
    for b in blocks {
        match b.kind {
            BlockKind::Psd => {
                for i in 0..b.size {
                    for j in i..b.size {
                        w.push(Rat::from_integer(if i == j { 1 } else { 2 }.into()));
                    }
                }
            }
            _ => w.extend(std::iter::repeat(Rat::one()).take(b.size)),
        }
    }
    w
}

/// Exact weighted minimum-norm correction `δ` with `A(x + δ) = b`.
///
/// Columns that occur in a single row are eliminated in closed form; what remains is a small
/// KKT system over the shared columns and the rows without private columns.
pub fn project_affine(rows: &[SparseRow], b: &[QSqrt2], x: &[QSqrt2], weights: &[Rat]) -> Result<Vec<QSqrt2>> {
    let ncols = x.len();
    let mut count = vec![0usize; ncols];
    for r in rows {
        for (j, _) in r {
            count[*j] += 1;
        }
    }
    let resid: Vec<QSqrt2> = rows
        .iter()
        .zip(b)
        .map(|(r, bi)| {
            let mut acc = bi.clone();
            for (j, v) in r {
                if !x[*j].is_zero() {
                    acc -= &(v * &x[*j]);
                }
            }
            acc
        })
        .collect();
    let inv_w: Vec<QSqrt2> = weights.iter().map(|w| QSqrt2::from_rat(w.recip())).collect();

    let shared: Vec<usize> = (0..ncols).filter(|&j| count[j] > 1).collect();
    let mut pos = vec![usize::MAX; ncols];
    for (k, &j) in shared.iter().enumerate() {
        pos[j] = k;
    }
    // d_i = Σ_{private j} a_ij² / w_j
    let d: Vec<QSqrt2> = rows
        .iter()
        .map(|r| r.iter().filter(|(j, _)| count[*j] == 1).map(|(j, v)| v * v * &inv_w[*j]).sum())
        .collect();
    let hard: Vec<usize> = (0..rows.len()).filter(|&i| d[i].is_zero()).collect();
    let ns = shared.len();
    let size = ns + hard.len();

    let mut kkt = vec![vec![QSqrt2::zero(); size]; size];
    let mut rhs = vec![QSqrt2::zero(); size];
    for (k, &j) in shared.iter().enumerate() {
        kkt[k][k] = QSqrt2::from_rat(weights[j].clone());
    }
    for (i, r) in rows.iter().enumerate() {
        if d[i].is_zero() {
            continue;
        }
        let s: Vec<(usize, &QSqrt2)> = r.iter().filter(|(j, _)| count[*j] > 1).map(|(j, v)| (pos[*j], v)).collect();
        if s.is_empty() {
            continue;
        }
        let inv_d = d[i].inv().expect("positive");
        for &(a, va) in &s {
            let t = va * &inv_d;
            rhs[a] += &(&t * &resid[i]);
            for &(bb, vb) in &s {
                kkt[a][bb] += &(&t * vb);
            }
        }
    }
    for (h, &i) in hard.iter().enumerate() {
        for (j, v) in &rows[i] {
            kkt[ns + h][pos[*j]] = v.clone();
            kkt[pos[*j]][ns + h] = v.clone();
        }
        rhs[ns + h] = resid[i].clone();
    }
    let sol = solve_square_consistent(kkt, rhs).map_err(|_| Error::ProjectionInconsistent)?;

    let mut delta = vec![QSqrt2::zero(); ncols];
    for (k, &j) in shared.iter().enumerate() {
        delta[j] = sol[k].clone();
    }
    for (i, r) in rows.iter().enumerate() {
        if d[i].is_zero() {
            continue;
        }
        let mut e = resid[i].clone();
        for (j, v) in r {
            if count[*j] > 1 && !delta[*j].is_zero() {
                e -= &(v * &delta[*j]);
            }
        }
        if e.is_zero() {
            continue;
        }
        let f = e / &d[i];
        for (j, v) in r {
            if count[*j] == 1 {
                delta[*j] = v * &inv_w[*j] * &f;
            }
        }
    }
    Ok(delta)
}

/// Projects `candidate` exactly onto the equality set of `p`, then checks every NONNEG block by
/// sign and every PSD block by exact Schur complementation.
pub fn project_and_certify(candidate: &[QSqrt2], p: &ExactConicProblem) -> Result<CertifiedPoint> {
    if candidate.len() != p.dim() {
        return Err(Error::Dimension(format!("candidate has {} coordinates, problem has {}", candidate.len(), p.dim())));
    }
    let delta = project_affine(&p.rows, &p.b, candidate, &coordinate_weights(&p.blocks))?;
    let x: Vec<QSqrt2> = candidate.iter().zip(delta).map(|(c, d)| c + d).collect();
    if let Some(i) = p.first_violated_row(&x) {
        return Err(Error::ConeCheck(format!("row {i} still violated after projection")));
    }
    check_cones(&p.blocks, &x)?;
    Ok(CertifiedPoint { blocks: p.blocks.clone(), x })
}

/// Exact cone membership of every block of `x`; the error names the block and the location.
pub fn check_cones(blocks: &[Block], x: &[QSqrt2]) -> Result<()> {
    let off = crate::solver::block_offsets(blocks);
    for (bi, blk) in blocks.iter().enumerate() {
        let name = blk.name.clone().unwrap_or_else(|| format!("#{bi}"));
        let v = &x[off[bi]..off[bi + 1]];
        match blk.kind {
            BlockKind::Free => {}
            BlockKind::Nonneg => {
                if let Some(k) = v.iter().position(|e| sign_of(e) < 0) {
                    return Err(Error::ConeCheck(format!("block {name}, entry {} is {}", k + 1, v[k])));
                }
            }
            BlockKind::Psd => {
                let m = ExactSymMatrix::from_upper(blk.size, v.to_vec())?;
                if let PsdDecision::NotPsd { stage, value, .. } = is_psd_exact(&m) {
                    return Err(Error::ConeCheck(format!(
                        "block {name} not PSD: Schur stage {}, witness value {:.3e}",
                        stage + 1,
                        value.to_f64()
                    )));
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactfield::{parse_qs, rat};

    #[test]
    fn rounding_examples() {
        let s10 = RoundingSpec::new(10).unwrap();
        assert_eq!(round_scalar(0.5, &s10), QSqrt2::frac(1, 2));
        assert_eq!(round_scalar(0.33333333, &s10), QSqrt2::frac(1, 3));
        let s = RoundingSpec::new(200).unwrap().with_sqrt2(true);
        let x = 16.0 * std::f64::consts::SQRT_2 / 27.0;
        assert_eq!(round_scalar(x, &s), parse_qs("16/27*sqrt2").unwrap());
    }

    #[test]
    fn semiconvergent_is_used() {
        // pi with q <= 100: 311/99 beats the convergent 22/7
        let x = rat_from_f64(std::f64::consts::PI).unwrap();
        assert_eq!(best_rational(&x, 100, 64), rat(311, 99));
        assert_eq!(best_rational(&x, 7, 64), rat(22, 7));
        assert_eq!(best_rational(&x, 1000, 64), rat(355, 113));
    }

    #[test]
    fn projection_matches_dense_min_norm() {
        // x0 + x1 + x2 = 3, x2 + x3 = 1 (x2 shared)
        let rows: Vec<SparseRow> = vec![
            vec![(0, QSqrt2::one()), (1, QSqrt2::one()), (2, QSqrt2::one())],
            vec![(2, QSqrt2::one()), (3, QSqrt2::one())],
        ];
        let b = [QSqrt2::from_int(3), QSqrt2::one()];
        let x = vec![QSqrt2::zero(); 4];
        let w = vec![Rat::one(), rat(2, 1), Rat::one(), Rat::one()];
        let fast = project_affine(&rows, &b, &x, &w).unwrap();
        let dense = crate::exactfield::min_norm_solution(&rows, 4, &b, Some(&w)).unwrap();
        assert_eq!(fast, dense);
    }
}
