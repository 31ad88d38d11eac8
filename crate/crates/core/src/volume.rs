//! Unit-ball sections of the cone chain in `Sym_n`: uniform sampling, volume-radius estimates,
//! the exact orthant count for NN, the explicit CP decompositions behind the lower bound, and a
//! samplewise inclusion check for DNN ⊆ {PSD, NN} ⊆ SPN.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Pow, Signed, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cones::{eig_sym, is_spn, SpnOptions, SymMatrix, Verdict};
use crate::error::{Error, Result};
use crate::exactfield::{frobenius_exact, rat, sign_of, ExactSymMatrix, QSqrt2, Rat};

/// `dim Sym_n = n(n+1)/2`.
pub fn sym_dim(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Orthonormal coordinates → matrix: `Eᵢᵢ` for the diagonal, `(Eᵢⱼ + Eⱼᵢ)/√2` off it.
pub fn coords_to_matrix(n: usize, coords: &[f64]) -> SymMatrix {
    assert_eq!(coords.len(), sym_dim(n), "need n(n+1)/2 coordinates");
    let mut k = 0;
    let mut upper = Vec::with_capacity(coords.len());
    for i in 0..n {
        for j in i..n {
            upper.push(if i == j { coords[k] } else { coords[k] * std::f64::consts::FRAC_1_SQRT_2 });
            k += 1;
        }
    }
    SymMatrix::from_upper(n, upper)
}

pub fn matrix_to_coords(a: &SymMatrix) -> Vec<f64> {
    let n = a.n();
    let mut out = Vec::with_capacity(sym_dim(n));
    for i in 0..n {
        for j in i..n {
            out.push(if i == j { a.get(i, i) } else { a.get(i, j) * std::f64::consts::SQRT_2 });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct BallSample {
    pub matrix: SymMatrix,
    pub coords: Vec<f64>,
}

/// Uniform point of the Frobenius unit ball of `Sym_n`: Gaussian direction, radius `U^{1/d}`.
pub fn sample_ball<R: Rng + ?Sized>(n: usize, rng: &mut R) -> BallSample {
    assert!(n >= 1, "n must be at least 1");
    let d = sym_dim(n);
    let mut g: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
    let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
    let u: f64 = rng.gen();
    let r = u.powf(1.0 / d as f64);
    let s = if norm > 0.0 { r / norm } else { 0.0 };
    for v in g.iter_mut() {
        *v *= s;
    }
    BallSample { matrix: coords_to_matrix(n, &g), coords: g }
}

const CHUNK: usize = 1024;

/// RNG for chunk `c` of the stream `seed`; results do not depend on how chunks map to threads.
fn chunk_rng(seed: u64, c: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(c as u64);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VolumeCone {
    Nn,
    Psd,
    Dnn,
    Spn,
}

impl VolumeCone {
    pub const ALL: [VolumeCone; 4] = [VolumeCone::Nn, VolumeCone::Psd, VolumeCone::Dnn, VolumeCone::Spn];

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for VolumeCone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VolumeCone::Nn => "nn",
            VolumeCone::Psd => "psd",
            VolumeCone::Dnn => "dnn",
            VolumeCone::Spn => "spn",
        })
    }
}

impl FromStr for VolumeCone {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "nn" => Ok(VolumeCone::Nn),
            "psd" => Ok(VolumeCone::Psd),
            "dnn" => Ok(VolumeCone::Dnn),
            "spn" => Ok(VolumeCone::Spn),
            other => Err(Error::Invalid(format!("unknown cone {other:?} (expected nn, psd, dnn, spn)"))),
        }
    }
}

/// Entrywise `≥ 0`, exact on the float values.
pub fn nn_predicate(a: &SymMatrix) -> Verdict {
    if a.upper().iter().all(|v| *v >= 0.0) {
        Verdict::In
    } else {
        Verdict::Out
    }
}

/// `λ_min ≥ 0` by Jacobi.
pub fn psd_predicate(a: &SymMatrix) -> Verdict {
    if eig_sym(a)[0] >= 0.0 {
        Verdict::In
    } else {
        Verdict::Out
    }
}

pub fn dnn_predicate(a: &SymMatrix) -> Verdict {
    if nn_predicate(a) == Verdict::In && psd_predicate(a) == Verdict::In {
        Verdict::In
    } else {
        Verdict::Out
    }
}

pub fn spn_predicate(a: &SymMatrix) -> Verdict {
    is_spn(a, &SpnOptions::default()).verdict
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VradEstimate {
    pub cone: String,
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    pub hits: u64,
    /// Samples whose verdict was `unknown`; left out of the fraction.
    pub excluded: u64,
    pub excluded_fraction: f64,
    pub fraction: f64,
    pub fraction_stderr: f64,
    pub vrad: f64,
    /// 95% interval from the delta method.
    pub vrad_ci: (f64, f64),
}

impl VradEstimate {
    pub fn from_counts(cone: &str, n: usize, samples: usize, seed: u64, hits: u64, excluded: u64) -> Self {
        let d = sym_dim(n) as f64;
        let used = samples as u64 - excluded;
        let (p, se) = if used > 0 {
            let p = hits as f64 / used as f64;
            (p, (p * (1.0 - p) / used as f64).sqrt())
        } else {
            (f64::NAN, f64::NAN)
        };
        let vrad = p.powf(1.0 / d);
        let half = if p > 0.0 { 1.96 * se * p.powf(1.0 / d - 1.0) / d } else { f64::NAN };
        let ci = if p > 0.0 { ((vrad - half).max(0.0), (vrad + half).min(1.0)) } else { (0.0, f64::NAN) };
        VradEstimate {
            cone: cone.to_string(),
            n,
            samples,
            seed,
            hits,
            excluded,
            excluded_fraction: excluded as f64 / samples.max(1) as f64,
            fraction: p,
            fraction_stderr: se,
            vrad,
            vrad_ci: ci,
        }
    }

    /// Standard error of `vrad` (delta method).
    pub fn vrad_stderr(&self) -> f64 {
        let d = sym_dim(self.n) as f64;
        self.fraction_stderr * self.fraction.powf(1.0 / d - 1.0) / d
    }
}

fn check_samples(samples: usize) -> Result<()> {
    if samples < 1000 {
        return Err(Error::Invalid(format!("need at least 1000 samples, got {samples}")));
    }
    Ok(())
}

/// Fraction of the unit ball on which `predicate` holds, and the volume radius `fraction^{1/d}`.
pub fn vrad_estimate<F>(n: usize, predicate: F, samples: usize, seed: u64) -> Result<VradEstimate>
where
    F: Fn(&SymMatrix) -> Verdict + Sync,
{
    check_samples(samples)?;
    if n == 0 {
        return Err(Error::Invalid("n must be at least 1".into()));
    }
    let chunks = samples.div_ceil(CHUNK);
    let (hits, excluded) = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c);
            let len = CHUNK.min(samples - c * CHUNK);
            let (mut h, mut e) = (0u64, 0u64);
            for _ in 0..len {
                match predicate(&sample_ball(n, &mut rng).matrix) {
                    Verdict::In => h += 1,
                    Verdict::Unknown => e += 1,
                    Verdict::Out => {}
                }
            }
            (h, e)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok(VradEstimate::from_counts("custom", n, samples, seed, hits, excluded))
}

/// `2^{-n(n+1)/2}`: each orthant of the coordinate space holds the same share of the ball and NN
/// is exactly one of them.
pub fn nn_fraction_exact(n: usize) -> Rat {
    Rat::new(BigInt::one(), BigInt::from(2u8).pow(sym_dim(n) as u32))
}

/// Exact `d`-th root of a nonnegative rational, when it is rational.
pub fn exact_root(x: &Rat, d: u32) -> Option<Rat> {
    if x.is_negative() || d == 0 {
        return None;
    }
    let root = |v: &BigInt| {
        let r = v.nth_root(d);
        (Pow::pow(&r, d) == *v).then_some(r)
    };
    Some(Rat::new(root(x.numer())?, root(x.denom())?))
}

/// `vrad(NN ∩ B_n)` computed symbolically from [`nn_fraction_exact`].
pub fn vrad_nn_exact(n: usize) -> Rat {
    exact_root(&nn_fraction_exact(n), sym_dim(n) as u32).expect("2^-d has an exact d-th root")
}

/// `Σ vᵢvᵢᵀ` with every `vᵢ ≥ 0`: a CP certificate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CpFactorization {
    pub matrix: ExactSymMatrix,
    pub vectors: Vec<Vec<QSqrt2>>,
}

impl CpFactorization {
    pub fn verify(&self) -> bool {
        let n = self.matrix.n();
        if self.vectors.iter().any(|v| v.len() != n || v.iter().any(|x| sign_of(x) < 0)) {
            return false;
        }
        let sum = ExactSymMatrix::from_fn(n, |i, j| self.vectors.iter().map(|v| &v[i] * &v[j]).sum());
        sum == self.matrix
    }

    pub fn frobenius_norm_sq(&self) -> QSqrt2 {
        frobenius_exact(&self.matrix, &self.matrix).expect("square")
    }
}

/// `target = coefficient · (positive − negative)` with both parts CP and of Frobenius norm ≤ 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Claim2Decomposition {
    pub i: usize,
    pub j: usize,
    pub n: usize,
    pub target: ExactSymMatrix,
    pub coefficient: QSqrt2,
    pub positive: CpFactorization,
    pub negative: Option<CpFactorization>,
    pub checks: Vec<(String, bool)>,
}

impl Claim2Decomposition {
    pub fn verified(&self) -> bool {
        self.checks.iter().all(|(_, ok)| *ok)
    }

    fn run_checks(&mut self) {
        let n = self.n;
        let neg = self.negative.as_ref().map_or_else(|| ExactSymMatrix::zeros(n), |f| f.matrix.clone());
        let rhs = self.positive.matrix.checked_sub(&neg).expect("same size").scaled(&self.coefficient);
        let one = QSqrt2::one();
        let mut checks = vec![
            ("identity".to_string(), rhs == self.target),
            ("positive-cp".to_string(), self.positive.verify()),
            ("positive-norm".to_string(), self.positive.frobenius_norm_sq() <= one),
        ];
        if let Some(f) = &self.negative {
            checks.push(("negative-cp".into(), f.verify()));
            checks.push(("negative-norm".into(), f.frobenius_norm_sq() <= one));
        }
        self.checks = checks;
    }
}

fn unit(n: usize, i: usize, value: QSqrt2) -> Vec<QSqrt2> {
    let mut v = vec![QSqrt2::zero(); n];
    v[i] = value;
    v
}

/// `(Eᵢⱼ+Eⱼᵢ)/√2 = √2·(F/2) − √2·((Eᵢᵢ+Eⱼⱼ)/2)` with `F = xxᵀ`, `x` the indicator of `{i, j}`.
/// Indices are 1-based, `1 ≤ i < j ≤ n`.
pub fn claim2_decompose(i: usize, j: usize, n: usize) -> Result<Claim2Decomposition> {
    if !(1 <= i && i < j && j <= n) {
        return Err(Error::Invalid(format!("need 1 <= i < j <= n, got i = {i}, j = {j}, n = {n}")));
    }
    let (a, b) = (i - 1, j - 1);
    let half_sqrt2 = QSqrt2::sqrt2_times(rat(1, 2));
    let mut target = ExactSymMatrix::zeros(n);
    target.set(a, b, half_sqrt2.clone());
    // F/2 = yyᵀ with y = x/√2
    let mut y = vec![QSqrt2::zero(); n];
    y[a] = half_sqrt2.clone();
    y[b] = half_sqrt2.clone();
    let mut f_half = ExactSymMatrix::zeros(n);
    for p in [a, b] {
        for q in [a, b] {
            f_half.set(p, q, QSqrt2::frac(1, 2));
        }
    }
    let mut d_half = ExactSymMatrix::zeros(n);
    d_half.set(a, a, QSqrt2::frac(1, 2));
    d_half.set(b, b, QSqrt2::frac(1, 2));
    let mut out = Claim2Decomposition {
        i,
        j,
        n,
        target,
        coefficient: QSqrt2::sqrt2(),
        positive: CpFactorization { matrix: f_half, vectors: vec![y] },
        negative: Some(CpFactorization {
            matrix: d_half,
            vectors: vec![unit(n, a, half_sqrt2.clone()), unit(n, b, half_sqrt2)],
        }),
        checks: Vec::new(),
    };
    out.run_checks();
    Ok(out)
}

/// `Eᵢᵢ = eᵢeᵢᵀ`: CP with Frobenius norm 1 (1-based `i`).
pub fn claim2_diagonal(i: usize, n: usize) -> Result<Claim2Decomposition> {
    if !(1 <= i && i <= n) {
        return Err(Error::Invalid(format!("need 1 <= i <= n, got i = {i}, n = {n}")));
    }
    let mut e = ExactSymMatrix::zeros(n);
    e.set(i - 1, i - 1, QSqrt2::one());
    let mut out = Claim2Decomposition {
        i,
        j: i,
        n,
        target: e.clone(),
        coefficient: QSqrt2::one(),
        positive: CpFactorization { matrix: e, vectors: vec![unit(n, i - 1, QSqrt2::one())] },
        negative: None,
        checks: Vec::new(),
    };
    out.run_checks();
    Ok(out)
}

/// Samplewise violations of DNN ⊆ PSD, DNN ⊆ NN, PSD ⊆ SPN, NN ⊆ SPN.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct InclusionViolations {
    pub dnn_not_psd: u64,
    pub dnn_not_nn: u64,
    pub psd_not_spn: u64,
    pub nn_not_spn: u64,
}

impl InclusionViolations {
    pub fn total(&self) -> u64 {
        self.dnn_not_psd + self.dnn_not_nn + self.psd_not_spn + self.nn_not_spn
    }

    fn add(self, o: Self) -> Self {
        InclusionViolations {
            dnn_not_psd: self.dnn_not_psd + o.dnn_not_psd,
            dnn_not_nn: self.dnn_not_nn + o.dnn_not_nn,
            psd_not_spn: self.psd_not_spn + o.psd_not_spn,
            nn_not_spn: self.nn_not_spn + o.nn_not_spn,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VolumeReport {
    pub n: usize,
    pub samples: usize,
    pub seed: u64,
    pub estimates: Vec<VradEstimate>,
    pub violations: InclusionViolations,
}

impl VolumeReport {
    pub fn estimate(&self, cone: VolumeCone) -> Option<&VradEstimate> {
        self.estimates.iter().find(|e| e.cone == cone.to_string())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }

    /// One row per cone: fraction, stderr, vrad, CI, samples, excluded.
    pub fn to_csv(&self) -> String {
        #[derive(Serialize)]
        struct Row<'a> {
            cone: &'a str,
            n: usize,
            fraction: f64,
            stderr: f64,
            vrad: f64,
            ci_lo: f64,
            ci_hi: f64,
            samples: usize,
            excluded: u64,
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        for e in &self.estimates {
            w.serialize(Row {
                cone: &e.cone,
                n: e.n,
                fraction: e.fraction,
                stderr: e.fraction_stderr,
                vrad: e.vrad,
                ci_lo: e.vrad_ci.0,
                ci_hi: e.vrad_ci.1,
                samples: e.samples,
                excluded: e.excluded,
            })
            .expect("in-memory writer");
        }
        String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf8")
    }
}

#[derive(Default, Clone, Copy)]
struct Tally {
    hits: [u64; 4],
    unknown: [u64; 4],
    viol: InclusionViolations,
}

impl Tally {
    fn add(mut self, o: Tally) -> Tally {
        for k in 0..4 {
            self.hits[k] += o.hits[k];
            self.unknown[k] += o.unknown[k];
        }
        self.viol = self.viol.add(o.viol);
        self
    }
}

/// Estimates for the requested cones on one shared sample stream, with samplewise inclusion
/// counts among whichever of them were evaluated.
pub fn volume_report(n: usize, cones: &[VolumeCone], samples: usize, seed: u64) -> Result<VolumeReport> {
    check_samples(samples)?;
    if n == 0 {
        return Err(Error::Invalid("n must be at least 1".into()));
    }
    let want = |c: VolumeCone| cones.contains(&c);
    let need_nn = want(VolumeCone::Nn) || want(VolumeCone::Dnn) || want(VolumeCone::Spn);
    let need_psd = want(VolumeCone::Psd) || want(VolumeCone::Dnn) || want(VolumeCone::Spn);
    let need_spn = want(VolumeCone::Spn);
    let chunks = samples.div_ceil(CHUNK);
    let tally = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c);
            let len = CHUNK.min(samples - c * CHUNK);
            let mut t = Tally::default();
            for _ in 0..len {
                let a = sample_ball(n, &mut rng).matrix;
                let nn = need_nn && nn_predicate(&a) == Verdict::In;
                let psd = need_psd && psd_predicate(&a) == Verdict::In;
                let dnn = nn && psd;
                let spn = if need_spn { spn_predicate(&a) } else { Verdict::Unknown };
                for (cone, inside) in [(VolumeCone::Nn, nn), (VolumeCone::Psd, psd), (VolumeCone::Dnn, dnn)] {
                    if inside {
                        t.hits[cone.index()] += 1;
                    }
                }
                match spn {
                    Verdict::In => t.hits[VolumeCone::Spn.index()] += 1,
                    Verdict::Unknown => t.unknown[VolumeCone::Spn.index()] += 1,
                    Verdict::Out => {}
                }
                // DNN is evaluated as NN ∧ PSD, so the first two stay zero by construction unless
                // the predicates disagree with themselves; they are still counted.
                if dnn && psd_predicate(&a) != Verdict::In {
                    t.viol.dnn_not_psd += 1;
                }
                if dnn && nn_predicate(&a) != Verdict::In {
                    t.viol.dnn_not_nn += 1;
                }
                if need_spn && spn == Verdict::Out {
                    if psd {
                        t.viol.psd_not_spn += 1;
                    }
                    if nn {
                        t.viol.nn_not_spn += 1;
                    }
                }
            }
            t
        })
        .reduce(Tally::default, Tally::add);
    let estimates = cones
        .iter()
        .map(|&c| {
            VradEstimate::from_counts(&c.to_string(), n, samples, seed, tally.hits[c.index()], tally.unknown[c.index()])
        })
        .collect();
    Ok(VolumeReport { n, samples, seed, estimates, violations: tally.viol })
}

/// All four cones on one stream (`n ≤ 5`; SPN solves an SDP for the samples that need it).
pub fn sandwich_check(n: usize, samples: usize, seed: u64) -> Result<VolumeReport> {
    if n > 5 {
        return Err(Error::Invalid(format!("sandwich check is limited to n <= 5, got {n}")));
    }
    volume_report(n, &VolumeCone::ALL, samples, seed)
}
