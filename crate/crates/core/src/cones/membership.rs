use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use super::eig::eig_sym_vectors;
use super::sym::SymMatrix;
use crate::error::{Error, Result};
use crate::exactfield::{frobenius_exact, is_psd_exact, rat_from_f64, ExactSymMatrix, QSqrt2};
use crate::solver::{self, build_parrilo_problem, build_spn_problem, SolveStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cone {
    Nn,
    Psd,
    Dnn,
    Spn,
    CopRelax(usize),
    NotCpWitness,
    NotSpnWitness,
}

impl fmt::Display for Cone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cone::Nn => f.write_str("NN"),
            Cone::Psd => f.write_str("PSD"),
            Cone::Dnn => f.write_str("DNN"),
            Cone::Spn => f.write_str("SPN"),
            Cone::CopRelax(r) => write!(f, "COP-relax-{r}"),
            Cone::NotCpWitness => f.write_str("notCP-witness"),
            Cone::NotSpnWitness => f.write_str("notSPN-witness"),
        }
    }
}

impl std::str::FromStr for Cone {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "NN" => Cone::Nn,
            "PSD" => Cone::Psd,
            "DNN" => Cone::Dnn,
            "SPN" => Cone::Spn,
            "notCP-witness" => Cone::NotCpWitness,
            "notSPN-witness" => Cone::NotSpnWitness,
            _ => match s.strip_prefix("COP-relax-").and_then(|r| r.parse().ok()) {
                Some(r) => Cone::CopRelax(r),
                None => return Err(format!("unknown cone label {s:?}")),
            },
        })
    }
}

impl Serialize for Cone {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Cone {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    In,
    Out,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Witness {
    /// 1-based position of the smallest entry.
    Entry { i: usize, j: usize, value: f64 },
    /// Eigenvector of the smallest eigenvalue.
    Vector { x: Vec<f64>, value: f64 },
    Eigenvalues { values: Vec<f64> },
    /// `A = P + N`.
    Decomposition { p: SymMatrix, n: SymMatrix },
    /// Exact `W` with `⟨A, W⟩ = value`; `W` lies in the dual of the tested cone.
    Dual { w: ExactSymMatrix, value: QSqrt2 },
    Gram { gram: SymMatrix, residual: f64, min_eig: f64 },
}

/// `verdict` is `in` or `out` only together with a witness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipReport {
    pub cone: Cone,
    pub verdict: Verdict,
    pub margin: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl MembershipReport {
    fn unknown(cone: Cone, margin: f64) -> Self {
        MembershipReport { cone, verdict: Verdict::Unknown, margin, witness: None }
    }

    pub fn is_in(&self) -> bool {
        self.verdict == Verdict::In
    }

    pub fn is_out(&self) -> bool {
        self.verdict == Verdict::Out
    }
}

/// The 5×5 Horn matrix.
pub fn horn_matrix() -> ExactSymMatrix {
    const H: [[i64; 5]; 5] = [
        [1, -1, 1, 1, -1],
        [-1, 1, -1, 1, 1],
        [1, -1, 1, -1, 1],
        [1, 1, -1, 1, -1],
        [-1, 1, 1, -1, 1],
    ];
    ExactSymMatrix::from_fn(5, |i, j| QSqrt2::from_int(H[i][j]))
}

/// Entrywise nonnegativity, strict (no slack).
pub fn is_nn(a: &SymMatrix) -> MembershipReport {
    let n = a.n();
    let (mut bi, mut bj, mut best) = (0, 0, f64::INFINITY);
    for i in 0..n {
        for j in i..n {
            if a.get(i, j) < best {
                (bi, bj, best) = (i, j, a.get(i, j));
            }
        }
    }
    MembershipReport {
        cone: Cone::Nn,
        verdict: if best >= 0.0 { Verdict::In } else { Verdict::Out },
        margin: best,
        witness: Some(Witness::Entry { i: bi + 1, j: bj + 1, value: best }),
    }
}

pub fn is_nn_exact(a: &ExactSymMatrix) -> MembershipReport {
    let ((i, j), v) = a.min_entry();
    MembershipReport {
        cone: Cone::Nn,
        verdict: if v.is_negative() { Verdict::Out } else { Verdict::In },
        margin: v.to_f64(),
        witness: Some(Witness::Entry { i: i + 1, j: j + 1, value: v.to_f64() }),
    }
}

/// `λ_min(A) ≥ −tol`.
pub fn is_psd(a: &SymMatrix, tol: f64) -> MembershipReport {
    let e = eig_sym_vectors(a);
    let lmin = e.values.first().copied().unwrap_or(0.0);
    if lmin >= -tol {
        MembershipReport { cone: Cone::Psd, verdict: Verdict::In, margin: lmin, witness: Some(Witness::Eigenvalues { values: e.values }) }
    } else {
        MembershipReport {
            cone: Cone::Psd,
            verdict: Verdict::Out,
            margin: lmin,
            witness: Some(Witness::Vector { x: e.vectors[0].clone(), value: lmin }),
        }
    }
}

pub fn is_dnn(a: &SymMatrix, tol: f64) -> MembershipReport {
    let nn = is_nn(a);
    let psd = is_psd(a, tol);
    let margin = nn.margin.min(psd.margin);
    if nn.is_out() {
        return MembershipReport { cone: Cone::Dnn, ..nn };
    }
    if psd.is_out() {
        return MembershipReport { cone: Cone::Dnn, ..psd };
    }
    MembershipReport { cone: Cone::Dnn, verdict: Verdict::In, margin, witness: psd.witness }
}

#[derive(Debug, Clone)]
pub struct SpnOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// A DNN matrix to try as a dual witness before anything else.
    pub witness: Option<ExactSymMatrix>,
}

impl Default for SpnOptions {
    fn default() -> Self {
        SpnOptions { tol: solver::DEFAULT_TOL, max_iter: solver::DEFAULT_MAX_ITER, witness: None }
    }
}

fn exact_of(a: &SymMatrix) -> ExactSymMatrix {
    // every finite double is a dyadic rational, so this is the matrix the float stands for
    ExactSymMatrix::from_fn(a.n(), |i, j| QSqrt2::from_rat(rat_from_f64(a.get(i, j)).expect("finite")))
}

/// `A = P + N` with `P ⪰ 0`, `N ≥ 0`.
///
/// `in` carries the decomposition; `out` carries an exact DNN matrix `W` with `⟨A, W⟩ < 0`, taken
/// from the options, from a negative diagonal or 2×2 minor, or from the solver's Farkas ray.
pub fn is_spn(a: &SymMatrix, opts: &SpnOptions) -> MembershipReport {
    let n = a.n();
    if let Some(w) = &opts.witness {
        if let Ok(r) = not_in_cone_witness(&exact_of(a), w, WitnessMode::Spn) {
            if r.is_out() {
                return MembershipReport { cone: Cone::Spn, ..r };
            }
        }
    }
    if is_nn(a).is_in() {
        return MembershipReport {
            cone: Cone::Spn,
            verdict: Verdict::In,
            margin: 0.0,
            witness: Some(Witness::Decomposition { p: SymMatrix::zeros(n), n: a.clone() }),
        };
    }
    let psd = is_psd(a, opts.tol);
    if psd.is_in() {
        return MembershipReport {
            cone: Cone::Spn,
            verdict: Verdict::In,
            margin: psd.margin,
            witness: Some(Witness::Decomposition { p: a.clone(), n: SymMatrix::zeros(n) }),
        };
    }
    if let Some(r) = small_dual_witness(a) {
        return r;
    }

    let prob = build_spn_problem(a);
    let sol = match solver::solve(&prob, opts.tol, opts.max_iter) {
        Ok(s) => s,
        Err(_) => return MembershipReport::unknown(Cone::Spn, f64::NAN),
    };
    match sol.status {
        SolveStatus::Feasible | SolveStatus::Optimal => {
            let p = prob.psd_matrix(&sol.x, 0);
            let nn = SymMatrix::from_upper(n, prob.block_slice(&sol.x, 1).to_vec());
            MembershipReport {
                cone: Cone::Spn,
                verdict: Verdict::In,
                margin: sol.min_cone_margin,
                witness: Some(Witness::Decomposition { p, n: nn }),
            }
        }
        SolveStatus::InfeasibleEvidence => {
            // Farkas: W = −Y (Y_pp = y_pp, Y_pq = y_pq/2) is DNN with ⟨A, W⟩ = −bᵀy < 0
            let w = SymMatrix::from_fn(n, |i, j| {
                let y = sol.y[crate::exactfield::upper_index(n, i, j)];
                if i == j {
                    -y
                } else {
                    -y / 2.0
                }
            });
            exact_dnn_witness(a, &w).unwrap_or_else(|| MembershipReport::unknown(Cone::Spn, f64::NAN))
        }
        _ => MembershipReport::unknown(Cone::Spn, sol.min_cone_margin),
    }
}

// E_ii for a negative diagonal, or xxᵀ (x ≥ 0) for a 2×2 principal block that is not copositive
fn small_dual_witness(a: &SymMatrix) -> Option<MembershipReport> {
    let n = a.n();
    for i in 0..n {
        if a.get(i, i) < 0.0 {
            let mut w = SymMatrix::zeros(n);
            w.set(i, i, 1.0);
            return exact_dnn_witness(a, &w);
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let (p, q, r) = (a.get(i, i), a.get(i, j), a.get(j, j));
            if q < 0.0 && q * q > p * r {
                // eigenvector of the smaller eigenvalue of [[p, q], [q, r]]; both parts share a sign
                let lmin = 0.5 * (p + r) - (0.25 * (p - r) * (p - r) + q * q).sqrt();
                let (u, v) = if (p - lmin).abs() > (r - lmin).abs() { (q, lmin - p) } else { (lmin - r, q) };
                let (u, v) = (u.abs(), v.abs());
                let mut w = SymMatrix::zeros(n);
                w.set(i, i, u * u);
                w.set(j, j, v * v);
                w.set(i, j, u * v);
                if let Some(r) = exact_dnn_witness(a, &w) {
                    return Some(r);
                }
            }
        }
    }
    None
}

// Rationalises a numerical DNN matrix, repairs it into the DNN cone exactly and keeps it only if
// ⟨A, W⟩ < 0 holds exactly.
fn exact_dnn_witness(a: &SymMatrix, w: &SymMatrix) -> Option<MembershipReport> {
    let n = a.n();
    let scale = w.frobenius_norm();
    if !(scale > 0.0) || !scale.is_finite() {
        return None;
    }
    let mut we = ExactSymMatrix::from_fn(n, |i, j| {
        let v = (w.get(i, j) / scale).max(0.0);
        QSqrt2::from_rat(rat_from_f64(v).expect("finite"))
    });
    let ae = exact_of(a);
    let mut shift = 0.0;
    for _ in 0..4 {
        if is_psd_exact(&we).is_psd() {
            let value = frobenius_exact(&ae, &we).ok()?;
            if value.is_negative() {
                return Some(MembershipReport {
                    cone: Cone::Spn,
                    verdict: Verdict::Out,
                    margin: value.to_f64(),
                    witness: Some(Witness::Dual { w: we, value }),
                });
            }
            return None;
        }
        let lmin = super::eig::eig_sym(&SymMatrix::from(&we))[0];
        shift = (2.0 * (-lmin).max(0.0)).max(shift * 10.0).max(1e-14);
        let d = QSqrt2::from_rat(rat_from_f64(shift).expect("finite"));
        for i in 0..n {
            let v = we.get(i, i) + &d;
            we.set(i, i, v);
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum WitnessMode {
    /// `W` copositive (certified by the caller); `⟨A, W⟩ < 0` proves `A ∉ CP`.
    Cp,
    /// `W` DNN (checked here); `⟨A, W⟩ < 0` proves `A ∉ SPN`.
    Spn,
}

/// Dual-violation test. In CP mode a 5×5 `W` may be paired with a larger `A` through its leading
/// 5×5 block: `⟨P₅AP₅, W⟩ < 0` already rules out `A ∈ CP`.
pub fn not_in_cone_witness(a: &ExactSymMatrix, w: &ExactSymMatrix, mode: WitnessMode) -> Result<MembershipReport> {
    let cone = match mode {
        WitnessMode::Cp => Cone::NotCpWitness,
        WitnessMode::Spn => Cone::NotSpnWitness,
    };
    let a_used = if a.n() == w.n() {
        a.clone()
    } else if mode == WitnessMode::Cp && w.n() == 5 && a.n() > 5 {
        a.leading(5)
    } else {
        return Err(Error::Dimension(format!("A is {}x{}, W is {}x{}", a.n(), a.n(), w.n(), w.n())));
    };
    if mode == WitnessMode::Spn {
        let ((i, j), v) = w.min_entry();
        if v.is_negative() {
            return Err(Error::Invalid(format!("witness has negative entry at ({}, {})", i + 1, j + 1)));
        }
        if !is_psd_exact(w).is_psd() {
            return Err(Error::Invalid("witness is not PSD".into()));
        }
    }
    let value = frobenius_exact(&a_used, w)?;
    let margin = value.to_f64();
    if value.is_negative() {
        Ok(MembershipReport { cone, verdict: Verdict::Out, margin, witness: Some(Witness::Dual { w: w.clone(), value }) })
    } else {
        Ok(MembershipReport::unknown(cone, margin))
    }
}

/// `(Σxᵢ²)ʳ q_A` is SOS, decided numerically; `in` carries the Gram matrix.
pub fn parrilo_membership(a: &SymMatrix, r: usize, tol: f64) -> Result<MembershipReport> {
    if r > 2 {
        return Err(Error::Invalid(format!("r = {r} exceeds 2")));
    }
    let cone = Cone::CopRelax(r);
    let prob = build_parrilo_problem(a, r);
    let sol = match solver::solve(&prob, tol, solver::DEFAULT_MAX_ITER) {
        Ok(s) => s,
        Err(_) => return Ok(MembershipReport::unknown(cone, f64::NAN)),
    };
    if !sol.is_feasible() {
        return Ok(MembershipReport::unknown(cone, sol.min_cone_margin));
    }
    let gram = prob.psd_matrix(&sol.x, 0);
    Ok(MembershipReport {
        cone,
        verdict: Verdict::In,
        margin: sol.min_cone_margin,
        witness: Some(Witness::Gram { gram, residual: sol.primal_residual, min_eig: sol.min_cone_margin }),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleCheck {
    pub violation: bool,
    pub min_value: f64,
    pub point: Vec<f64>,
    pub evaluated: usize,
}

/// Minimum of `xᵀAx` over the standard simplex: all vertices, all edge midpoints, and `samples`
/// uniform draws. A negative value disproves copositivity; its absence proves nothing.
pub fn copositivity_sample_check(a: &SymMatrix, samples: usize, rng_seed: u64) -> SampleCheck {
    let n = a.n();
    let mut best = (f64::INFINITY, vec![0.0; n]);
    let consider = |x: &[f64], best: &mut (f64, Vec<f64>)| {
        let v = a.quad_form(x);
        if v < best.0 {
            best.0 = v;
            best.1.copy_from_slice(x);
        }
    };
    let mut x = vec![0.0; n];
    let mut evaluated = 0;
    for i in 0..n {
        x.fill(0.0);
        x[i] = 1.0;
        consider(&x, &mut best);
        evaluated += 1;
        for j in (i + 1)..n {
            x.fill(0.0);
            x[i] = 0.5;
            x[j] = 0.5;
            consider(&x, &mut best);
            evaluated += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    for _ in 0..samples {
        let mut s = 0.0;
        for v in x.iter_mut() {
            *v = Exp1.sample(&mut rng);
            s += *v;
        }
        x.iter_mut().for_each(|v| *v /= s);
        consider(&x, &mut best);
        evaluated += 1;
    }
    SampleCheck { violation: best.0 < 0.0, min_value: best.0, point: best.1, evaluated }
}
