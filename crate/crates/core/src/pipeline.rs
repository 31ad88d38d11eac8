//! End to end: seed SDP → rounding → exact certificate, extension to larger `n`, the e-COP
//! construction, and re-verification of certificate files.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::cones::{copositivity_sample_check, horn_matrix, SymMatrix};
use crate::error::{Error, ParseError, Result};
use crate::exactfield::{frobenius_exact, is_psd_exact, rat, rat_serde, sign_of, ExactSymMatrix, QSqrt2, Rat};
use crate::multop::{compression, FourierCoeffs};
use crate::rationalize::{project_and_certify, round_to_grid, CertifiedPoint, RoundingSpec};
use crate::solver::{
    build_ecop_problem, build_seed_problem, solve, ExactConicProblem, SolveStatus, DEFAULT_MAX_ITER,
};
use crate::solver::{Block, BlockKind};
use crate::sos::{
    check_sos_identity, expand_target, poly_gram_map, BasisSpec, GramCertificate, MonomialBasis, SosCheck, TrigPoly,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Number of rounds in the retry ladder.
pub const LADDER_ROUNDS: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    #[serde(with = "rat_serde")]
    pub epsilon: Rat,
    #[serde(with = "rat_serde")]
    pub epsilon_prime: Rat,
    pub m: usize,
    pub m_prime: usize,
    pub k: usize,
    pub n_target: usize,
    pub rounding: RoundingSpec,
    pub solver_tol: f64,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            epsilon: rat(1, 20),
            epsilon_prime: rat(1, 10),
            m: 10,
            m_prime: 5,
            k: 1,
            n_target: 5,
            rounding: RoundingSpec::default(),
            solver_tol: 1e-9,
            seed: 0,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |s: &str| Err(Error::Invalid(s.to_string()));
        if self.epsilon <= Rat::zero() {
            return bad("epsilon must be positive");
        }
        if self.epsilon_prime <= Rat::zero() {
            return bad("epsilon' must be positive");
        }
        if self.n_target < 5 {
            return bad("n_target must be at least 5");
        }
        if self.m == 0 || self.m_prime == 0 || self.m_prime > self.m {
            return bad("need 1 <= m' <= m");
        }
        if !(1..=2).contains(&self.k) {
            return bad("k must be 1 or 2");
        }
        if self.rounding.denominator_bound == 0 {
            return bad("denominator bound must be at least 1");
        }
        if !(self.solver_tol > 0.0) {
            return bad("solver tolerance must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CertificateKind {
    /// DNN but not CP.
    #[serde(rename = "e-DNN")]
    EDnn,
    /// COP but not SPN.
    #[serde(rename = "e-COP")]
    ECop,
}

impl fmt::Display for CertificateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CertificateKind::EDnn => "e-DNN",
            CertificateKind::ECop => "e-COP",
        })
    }
}

/// A self-contained, exactly checkable claim.
///
/// e-DNN: `matrix` is `A` (optionally with the cosine coefficients it compresses and a trig Gram
/// matrix for `f`), `dual_value = ⟨A[..5, ..5], H⟩ < 0`.
/// e-COP: `matrix` is `C`, `dnn_matrix` the DNN matrix `A` it separates, `gram` a Gram matrix
/// for `(Σxᵢ²)ᵏ q_C`, `dual_value = ⟨C, A⟩ < 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub kind: CertificateKind,
    pub version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<PipelineConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<FourierCoeffs>,
    pub matrix: ExactSymMatrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dnn_matrix: Option<ExactSymMatrix>,
    pub dual_value: QSqrt2,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gram: Option<GramCertificate>,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

impl Certificate {
    pub fn n(&self) -> usize {
        self.matrix.n()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificates always serialize")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(ParseError::Json(e.to_string())))
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut s = self.to_json();
        s.push('\n');
        std::fs::write(path, s)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub kind: CertificateKind,
    pub n: usize,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    pub fn failed(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{} {:<14} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail)?;
        }
        Ok(())
    }
}

fn push(checks: &mut Vec<CheckResult>, name: &str, passed: bool, detail: impl Into<String>) {
    checks.push(CheckResult { name: name.to_string(), passed, detail: detail.into() });
}

fn nn_check(checks: &mut Vec<CheckResult>, name: &str, a: &ExactSymMatrix) {
    let ((i, j), v) = a.min_entry();
    let ok = sign_of(v) >= 0;
    push(checks, name, ok, format!("min entry ({}, {}) = {:.6e}", i + 1, j + 1, v.to_f64()));
}

fn psd_check(checks: &mut Vec<CheckResult>, name: &str, a: &ExactSymMatrix) {
    match is_psd_exact(a) {
        crate::exactfield::PsdDecision::Psd { pivots } => {
            let zeros = pivots.iter().filter(|p| p.is_zero()).count();
            push(checks, name, true, format!("exact Schur pivots nonnegative ({zeros} zero)"));
        }
        crate::exactfield::PsdDecision::NotPsd { value, stage, .. } => {
            push(checks, name, false, format!("fails at Schur stage {}, xᵀMx = {:.6e}", stage + 1, value.to_f64()));
        }
    }
}

fn sos_detail(r: &SosCheck) -> String {
    match r {
        SosCheck::Holds => "identity holds exactly, Gram matrix PSD".into(),
        SosCheck::Shape(s) => s.clone(),
        SosCheck::Mismatch { index, expansion, target } => {
            format!("coefficient {index}: expansion {expansion} != target {target}")
        }
        SosCheck::NotPsd { value } => format!("Gram matrix not PSD (xᵀGx = {:.6e})", value.to_f64()),
    }
}

fn padded_eq(a: &[QSqrt2], b: &[QSqrt2]) -> bool {
    let z = QSqrt2::zero();
    (0..a.len().max(b.len())).all(|i| a.get(i).unwrap_or(&z) == b.get(i).unwrap_or(&z))
}

/// Every exact check appropriate to the certificate kind, from its contents alone.
pub fn verify_certificate(cert: &Certificate) -> VerifyReport {
    let mut checks = Vec::new();
    let n = cert.n();
    match cert.kind {
        CertificateKind::EDnn => {
            if n < 5 {
                push(&mut checks, "shape", false, format!("need n >= 5, got {n}"));
                return VerifyReport { kind: cert.kind, n, checks };
            }
            if let Some(f) = &cert.coeffs {
                let ok = compression(f, n) == cert.matrix;
                push(&mut checks, "compression", ok, if ok { "matrix equals A(n) of the coefficients" } else { "matrix differs from A(n) of the coefficients" });
                match f.first_negative() {
                    None => push(&mut checks, "coeffs-nonneg", true, format!("all {} coefficients >= 0", f.m())),
                    Some(k) => push(&mut checks, "coeffs-nonneg", false, format!("a_{} < 0", k + 1)),
                }
            }
            nn_check(&mut checks, "nn", &cert.matrix);
            psd_check(&mut checks, "psd", &cert.matrix);
            let v = frobenius_exact(&cert.matrix.leading(5), &horn_matrix()).expect("5x5");
            let ok = v == cert.dual_value && v.is_negative();
            push(&mut checks, "not-cp", ok, format!("<P5 A P5, H> = {v} (stated {})", cert.dual_value));
            if let Some(g) = &cert.gram {
                let r = check_sos_identity(g);
                push(&mut checks, "sos", r == SosCheck::Holds, sos_detail(&r));
                if !matches!(g.basis, BasisSpec::Trig { .. }) {
                    push(&mut checks, "sos-target", false, "e-DNN Gram certificate must use the trig basis");
                } else if let Some(f) = &cert.coeffs {
                    let ok = padded_eq(&g.target, &TrigPoly::from_coeffs(f).c);
                    push(&mut checks, "sos-target", ok, if ok { "target is f" } else { "target is not 1 + 2 sum a_k cos(2k pi x)" });
                }
            }
        }
        CertificateKind::ECop => {
            let Some(a) = &cert.dnn_matrix else {
                push(&mut checks, "shape", false, "e-COP certificate needs dnn_matrix");
                return VerifyReport { kind: cert.kind, n, checks };
            };
            if a.n() != n {
                push(&mut checks, "shape", false, format!("C is {n}x{n}, A is {0}x{0}", a.n()));
                return VerifyReport { kind: cert.kind, n, checks };
            }
            nn_check(&mut checks, "dnn-nn", a);
            psd_check(&mut checks, "dnn-psd", a);
            match &cert.gram {
                Some(g) => match g.basis {
                    BasisSpec::Monomial { n: gn, d } if gn == n && d >= 2 => {
                        let k = d - 2;
                        let ok = g.target == expand_target(&cert.matrix, k);
                        push(&mut checks, "sos-target", ok, if ok { format!("target is (sum x_i^2)^{k} q_C") } else { format!("target is not (sum x_i^2)^{k} q_C") });
                        let r = check_sos_identity(g);
                        push(&mut checks, "sos", r == SosCheck::Holds, sos_detail(&r));
                    }
                    _ => push(&mut checks, "sos-target", false, format!("e-COP Gram certificate needs a monomial basis in {n} variables")),
                },
                None => push(&mut checks, "sos", false, "missing Gram certificate"),
            }
            let v = frobenius_exact(&cert.matrix, a).expect("sizes checked");
            let ok = v == cert.dual_value && v.is_negative();
            push(&mut checks, "not-spn", ok, format!("<C, A> = {v} (stated {})", cert.dual_value));
        }
    }
    VerifyReport { kind: cert.kind, n, checks }
}

pub fn run_verify(path: &Path) -> Result<VerifyReport> {
    Ok(verify_certificate(&Certificate::read(path)?))
}

/// What the retry ladder ended up using.
#[derive(Debug, Clone)]
struct LadderOutcome {
    point: CertifiedPoint,
    round: usize,
    bound: u64,
    tol: f64,
    iterations: usize,
}

/// Solve, round, project, check; on certification failure double the denominator bound, and from
/// the third round on also tighten the solver tolerance by 1e-2.
fn solve_and_certify(ep: &ExactConicProblem, config: &PipelineConfig, what: &str) -> Result<LadderOutcome> {
    let p = ep.to_float();
    let mut last = String::new();
    let mut cached: Option<(f64, crate::solver::ConicSolution)> = None;
    for round in 0..LADDER_ROUNDS {
        let bound = config.rounding.denominator_bound.saturating_mul(1 << round);
        let tol = if round >= 2 { config.solver_tol * 1e-2 } else { config.solver_tol };
        let sol = match &cached {
            Some((t, s)) if *t == tol => s.clone(),
            _ => {
                let s = match solve(&p, tol, DEFAULT_MAX_ITER) {
                    Ok(s) => s,
                    Err(e) => {
                        last = format!("{what}: {e}");
                        continue;
                    }
                };
                cached = Some((tol, s.clone()));
                s
            }
        };
        match sol.status {
            SolveStatus::Feasible | SolveStatus::Optimal => {}
            SolveStatus::InfeasibleEvidence => {
                return Err(Error::SolveFailed(format!("{what}: solver found evidence of infeasibility")));
            }
            SolveStatus::Unknown => {
                last = format!("{what}: solver status unknown ({})", sol.note.clone().unwrap_or_default());
                continue;
            }
        }
        let cand = round_to_grid(&sol.x, bound);
        match project_and_certify(&cand, ep) {
            Ok(point) => return Ok(LadderOutcome { point, round, bound, tol, iterations: sol.iterations }),
            Err(e) => last = format!("{what}: {e}"),
        }
    }
    Err(Error::CertificationExhausted { rounds: LADDER_ROUNDS, last })
}

fn ladder_metadata(meta: &mut BTreeMap<String, String>, o: &LadderOutcome) {
    meta.insert("ladder_round".into(), (o.round + 1).to_string());
    meta.insert("denominator_bound".into(), o.bound.to_string());
    meta.insert("solver_tol".into(), format!("{:e}", o.tol));
    meta.insert("solver_iterations".into(), o.iterations.to_string());
}

fn ensure_verifies(cert: Certificate) -> Result<Certificate> {
    let report = verify_certificate(&cert);
    if report.all_passed() {
        return Ok(cert);
    }
    let failed: Vec<String> = report.failed().map(|c| format!("{}: {}", c.name, c.detail)).collect();
    Err(Error::ConeCheck(failed.join("; ")))
}

/// Seed SDP → 5×5 e-DNN certificate with `a`, `A⁽⁵⁾`, the trig Gram matrix and `⟨A⁽⁵⁾, H⟩`.
pub fn run_seed(config: &PipelineConfig) -> Result<Certificate> {
    config.validate()?;
    let ep = build_seed_problem(&config.epsilon, config.m, config.m_prime)?;
    let out = solve_and_certify(&ep, config, "seed SDP")?;
    let coeffs = FourierCoeffs::new(out.point.block(0).to_vec())?;
    let gram = out.point.matrix(1, config.m_prime + 1);
    let a5 = compression(&coeffs, 5);
    let dual_value = frobenius_exact(&a5, &horn_matrix())?;
    let mut metadata = BTreeMap::new();
    ladder_metadata(&mut metadata, &out);
    let target = TrigPoly::from_coeffs(&coeffs).c;
    ensure_verifies(Certificate {
        kind: CertificateKind::EDnn,
        version: VERSION.to_string(),
        config: Some(config.clone()),
        coeffs: Some(coeffs),
        matrix: a5,
        dnn_matrix: None,
        dual_value,
        gram: Some(GramCertificate { basis: BasisSpec::Trig { m_prime: config.m_prime }, gram, target }),
        metadata,
    })
}

/// `A⁽ⁿ⁾` from the certificate's coefficients, checked NN, PSD and not-CP through `P₅A⁽ⁿ⁾P₅ = A⁽⁵⁾`.
pub fn run_extend(cert: &Certificate, n: usize) -> Result<Certificate> {
    if cert.kind != CertificateKind::EDnn {
        return Err(Error::Invalid("extend needs an e-DNN certificate".into()));
    }
    if n < 5 {
        return Err(Error::Invalid(format!("n must be at least 5, got {n}")));
    }
    let Some(coeffs) = &cert.coeffs else {
        return Err(Error::Invalid("certificate carries no Fourier coefficients".into()));
    };
    let a = compression(coeffs, n);
    let dual_value = frobenius_exact(&a.leading(5), &horn_matrix())?;
    let mut metadata = cert.metadata.clone();
    metadata.insert("extended_from".into(), cert.n().to_string());
    let mut config = cert.config.clone();
    if let Some(c) = config.as_mut() {
        c.n_target = n;
    }
    ensure_verifies(Certificate {
        kind: CertificateKind::EDnn,
        version: VERSION.to_string(),
        config,
        coeffs: Some(coeffs.clone()),
        matrix: a,
        dnn_matrix: None,
        dual_value,
        gram: cert.gram.clone(),
        metadata,
    })
}

/// Samples used by the copositivity sanity layer in [`run_ecop`].
pub const ECOP_SAMPLES: usize = 20_000;

/// e-COP certificate separating the e-DNN matrix of `cert`: `C` with `(Σxᵢ²)ᵏ q_C` SOS and
/// `⟨C, A⟩ = −ε′`. Falls back from `k = 1` to `k = 2` when the first attempt fails.
pub fn run_ecop(cert: &Certificate, config: &PipelineConfig) -> Result<Certificate> {
    config.validate()?;
    if cert.kind != CertificateKind::EDnn {
        return Err(Error::Invalid("ecop needs an e-DNN certificate".into()));
    }
    let a = &cert.matrix;
    let n = a.n();
    let mut attempts: Vec<usize> = vec![config.k];
    if config.k == 1 {
        attempts.push(2);
    }
    let mut errors = Vec::new();
    for &k in &attempts {
        let ep = build_ecop_problem(a, k, &config.epsilon_prime)?;
        let out = match solve_and_certify(&ep, config, &format!("e-COP SDP (k = {k})")) {
            Ok(o) => o,
            Err(e) => {
                errors.push(e.to_string());
                continue;
            }
        };
        let c = out.point.matrix(0, n);
        let basis = BasisSpec::Monomial { n, d: 2 + k };
        let g = out.point.matrix(1, basis.gram_size());
        let dual_value = frobenius_exact(&c, a)?;
        let mut metadata = BTreeMap::new();
        ladder_metadata(&mut metadata, &out);
        metadata.insert("k".into(), k.to_string());
        if k != config.k {
            metadata.insert("k_fallback".into(), format!("k = {} failed ({}); used k = {k}", config.k, errors.join("; ")));
        }
        let sample = copositivity_sample_check(&SymMatrix::from(&c), ECOP_SAMPLES, config.seed);
        metadata.insert(
            "sample_check".into(),
            format!("min x'Cx on simplex over {} points = {:.6e}", sample.evaluated, sample.min_value),
        );
        let mut cfg = config.clone();
        cfg.k = k;
        cfg.n_target = n;
        return ensure_verifies(Certificate {
            kind: CertificateKind::ECop,
            version: VERSION.to_string(),
            config: Some(cfg),
            coeffs: None,
            matrix: c.clone(),
            dnn_matrix: Some(a.clone()),
            dual_value,
            gram: Some(GramCertificate { basis, target: expand_target(&c, k), gram: g }),
            metadata,
        });
    }
    Err(Error::SolveFailed(errors.join("; ")))
}

/// Gram certificate for `(Σxᵢ²)ᵏ q_C` with `C` held fixed: solve, round, project, exact PSD check.
pub fn certify_cop_relaxation(c: &ExactSymMatrix, k: usize, config: &PipelineConfig) -> Result<GramCertificate> {
    let n = c.n();
    let basis = MonomialBasis::new(n, 2 + k);
    let target = expand_target(c, k);
    let rows = poly_gram_map(&basis)
        .rows()
        .into_iter()
        .map(|r| r.into_iter().map(|(u, w)| (u, QSqrt2::from_rat(w))).collect())
        .collect();
    let ep = ExactConicProblem::new(vec![Block::named(BlockKind::Psd, basis.len(), "G")], rows, target.clone())?;
    let out = solve_and_certify(&ep, config, &format!("Gram SDP (k = {k})"))?;
    Ok(GramCertificate { basis: BasisSpec::Monomial { n, d: 2 + k }, gram: out.point.matrix(0, basis.len()), target })
}
