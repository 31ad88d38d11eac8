//! Homogeneous self-dual embedding, Mehrotra predictor-corrector, Nesterov-Todd scaling.
//!
//! Primal `min cᵀx + c_Fᵀx_F, A x + A_F x_F = b, x ∈ K`; dual `max bᵀy, Aᵀy + s = c, A_Fᵀy = c_F`.
//! PSD blocks are kept as dense matrices; the free block enters the Newton system as the saddle
//! point `[[M, A_F], [A_Fᵀ, 0]]` with `M = A G⁻¹ Aᵀ`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::problem::{BlockKind, ConicProblem, ConicSolution, SolveStatus};
use super::SolverError;
use crate::cones::{eig_sym, SymMatrix};

struct NnBlock {
    off: usize,
    cols: Vec<Vec<(usize, f64)>>,
    c: DVector<f64>,
}

struct PsdBlock {
    off: usize,
    n: usize,
    // (row, full symmetric entries (p, q, value)) for rows touching this block
    rows: Vec<(usize, Vec<(usize, usize, f64)>)>,
    c: DMatrix<f64>,
}

struct Model {
    m: usize,
    b: DVector<f64>,
    nn: Vec<NnBlock>,
    psd: Vec<PsdBlock>,
    free_idx: Vec<usize>,
    af: DMatrix<f64>,
    cf: DVector<f64>,
    nu: f64,
}

#[derive(Clone)]
struct Vars {
    nn: Vec<DVector<f64>>,
    psd: Vec<DMatrix<f64>>,
}

impl Vars {
    fn dot(&self, o: &Vars) -> f64 {
        self.nn.iter().zip(&o.nn).map(|(a, b)| a.dot(b)).sum::<f64>()
            + self.psd.iter().zip(&o.psd).map(|(a, b)| a.dot(b)).sum::<f64>()
    }

    fn axpy(&mut self, a: f64, o: &Vars) {
        for (x, y) in self.nn.iter_mut().zip(&o.nn) {
            x.axpy(a, y, 1.0);
        }
        for (x, y) in self.psd.iter_mut().zip(&o.psd) {
            x.zip_apply(y, |u, v| *u += a * v);
        }
    }

    fn add(&self, o: &Vars) -> Vars {
        let mut r = self.clone();
        r.axpy(1.0, o);
        r
    }

    fn scale(&self, a: f64) -> Vars {
        Vars { nn: self.nn.iter().map(|v| v * a).collect(), psd: self.psd.iter().map(|v| v * a).collect() }
    }

    fn norm_inf(&self) -> f64 {
        self.nn.iter().map(|v| v.amax()).chain(self.psd.iter().map(|v| v.amax())).fold(0.0, f64::max)
    }
}

impl Model {
    fn build(p: &ConicProblem, keep: &[usize]) -> Model {
        let m = keep.len();
        let off = p.offsets();
        let b = DVector::from_iterator(m, keep.iter().map(|&i| p.b()[i]));
        let mut nn = Vec::new();
        let mut psd = Vec::new();
        let mut free_idx = Vec::new();
        // coordinate -> (block kind slot, local index)
        enum Slot {
            Nn(usize, usize),
            Psd(usize, usize, usize),
            Free(usize),
        }
        let mut slot = Vec::with_capacity(p.dim());
        let mut nu = 0.0;
        for (bi, blk) in p.blocks().iter().enumerate() {
            match blk.kind {
                BlockKind::Nonneg => {
                    let c = DVector::from_column_slice(&p.c()[off[bi]..off[bi + 1]]);
                    for k in 0..blk.size {
                        slot.push(Slot::Nn(nn.len(), k));
                    }
                    nn.push(NnBlock { off: off[bi], cols: vec![Vec::new(); blk.size], c });
                    nu += blk.size as f64;
                }
                BlockKind::Psd => {
                    let n = blk.size;
                    let mut c = DMatrix::zeros(n, n);
                    let mut k = off[bi];
                    for i in 0..n {
                        for j in i..n {
                            slot.push(Slot::Psd(psd.len(), i, j));
                            let v = p.c()[k];
                            if i == j {
                                c[(i, i)] = v;
                            } else {
                                c[(i, j)] = v / 2.0;
                                c[(j, i)] = v / 2.0;
                            }
                            k += 1;
                        }
                    }
                    psd.push(PsdBlock { off: off[bi], n, rows: Vec::new(), c });
                    nu += n as f64;
                }
                BlockKind::Free => {
                    for k in 0..blk.size {
                        slot.push(Slot::Free(free_idx.len()));
                        free_idx.push(off[bi] + k);
                    }
                }
            }
        }
        let mut af = DMatrix::zeros(m, free_idx.len());
        let cf = DVector::from_iterator(free_idx.len(), free_idx.iter().map(|&k| p.c()[k]));
        for (r, &orig) in keep.iter().enumerate() {
            let mut per_psd: Vec<Vec<(usize, usize, f64)>> = vec![Vec::new(); psd.len()];
            for &(j, v) in &p.rows()[orig] {
                match slot[j] {
                    Slot::Nn(b, k) => nn[b].cols[k].push((r, v)),
                    Slot::Psd(b, i, jj) => {
                        if i == jj {
                            per_psd[b].push((i, i, v));
                        } else {
                            per_psd[b].push((i, jj, v / 2.0));
                            per_psd[b].push((jj, i, v / 2.0));
                        }
                    }
                    Slot::Free(k) => af[(r, k)] += v,
                }
            }
            for (b, e) in per_psd.into_iter().enumerate() {
                if !e.is_empty() {
                    psd[b].rows.push((r, e));
                }
            }
        }
        Model { m, b, nn, psd, free_idx, af, cf, nu }
    }

    fn identity(&self) -> Vars {
        Vars {
            nn: self.nn.iter().map(|b| DVector::from_element(b.cols.len(), 1.0)).collect(),
            psd: self.psd.iter().map(|b| DMatrix::identity(b.n, b.n)).collect(),
        }
    }

    /// A random interior point near the identity: diagonally dominant PSD blocks, NONNEG entries in [½, 3⁄2].
    fn jittered(&self, seed: u64) -> Vars {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut u = move || rng.gen_range(-1.0..1.0);
        Vars {
            nn: self.nn.iter().map(|b| DVector::from_fn(b.cols.len(), |_, _| 1.0 + 0.5 * u())).collect(),
            psd: self
                .psd
                .iter()
                .map(|b| {
                    let mut m = DMatrix::identity(b.n, b.n);
                    for i in 0..b.n {
                        m[(i, i)] += 0.5 * u();
                        for j in i + 1..b.n {
                            let v = 0.25 * u() / b.n as f64;
                            m[(i, j)] = v;
                            m[(j, i)] = v;
                        }
                    }
                    m
                })
                .collect(),
        }
    }

    fn c_vars(&self) -> Vars {
        Vars { nn: self.nn.iter().map(|b| b.c.clone()).collect(), psd: self.psd.iter().map(|b| b.c.clone()).collect() }
    }

    fn a_op(&self, x: &Vars, xf: &DVector<f64>) -> DVector<f64> {
        let mut out = &self.af * xf;
        for (blk, xv) in self.nn.iter().zip(&x.nn) {
            for (k, col) in blk.cols.iter().enumerate() {
                for &(r, v) in col {
                    out[r] += v * xv[k];
                }
            }
        }
        for (blk, xm) in self.psd.iter().zip(&x.psd) {
            for (r, ent) in &blk.rows {
                out[*r] += ent.iter().map(|&(p, q, v)| v * xm[(p, q)]).sum::<f64>();
            }
        }
        out
    }

    fn at_op(&self, y: &DVector<f64>) -> (Vars, DVector<f64>) {
        let nn = self
            .nn
            .iter()
            .map(|blk| DVector::from_iterator(blk.cols.len(), blk.cols.iter().map(|col| col.iter().map(|&(r, v)| v * y[r]).sum())))
            .collect();
        let psd = self
            .psd
            .iter()
            .map(|blk| {
                let mut m = DMatrix::zeros(blk.n, blk.n);
                for (r, ent) in &blk.rows {
                    for &(p, q, v) in ent {
                        m[(p, q)] += v * y[*r];
                    }
                }
                m
            })
            .collect();
        (Vars { nn, psd }, self.af.tr_mul(y))
    }
}

struct NnScale {
    w: DVector<f64>,
    lam: DVector<f64>,
}

struct PsdScale {
    r: DMatrix<f64>,
    rinv: DMatrix<f64>,
    w: DMatrix<f64>,
    lam: DVector<f64>,
}

struct Scaling {
    nn: Vec<NnScale>,
    psd: Vec<PsdScale>,
}

impl Scaling {
    fn compute(x: &Vars, s: &Vars) -> Option<Scaling> {
        let mut nn = Vec::new();
        for (xv, sv) in x.nn.iter().zip(&s.nn) {
            if xv.iter().chain(sv.iter()).any(|v| !(*v > 0.0) || !v.is_finite()) {
                return None;
            }
            let w = xv.zip_map(sv, |a, b| (b / a).sqrt());
            let lam = xv.zip_map(sv, |a, b| (a * b).sqrt());
            nn.push(NnScale { w, lam });
        }
        let mut psd = Vec::new();
        for (xm, sm) in x.psd.iter().zip(&s.psd) {
            let lx = xm.clone().cholesky()?.unpack();
            let ls = sm.clone().cholesky()?.unpack();
            let svd = (ls.transpose() * &lx).svd(true, true);
            let u = svd.u?;
            let vt = svd.v_t?;
            let lam = svd.singular_values;
            if lam.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
                return None;
            }
            let isq = lam.map(|v| 1.0 / v.sqrt());
            // R = L_x V Λ^{-1/2},  R⁻¹ = Λ^{-1/2} Uᵀ L_sᵀ
            let mut r = lx * vt.transpose();
            for (j, mut col) in r.column_iter_mut().enumerate() {
                col *= isq[j];
            }
            let mut rinv = u.transpose() * ls.transpose();
            for (i, mut row) in rinv.row_iter_mut().enumerate() {
                row *= isq[i];
            }
            let w = &r * r.transpose();
            psd.push(PsdScale { r, rinv, w, lam });
        }
        Some(Scaling { nn, psd })
    }

    /// `G⁻¹ v`, with `G = WᵀW`.
    fn ginv(&self, v: &Vars) -> Vars {
        Vars {
            nn: self.nn.iter().zip(&v.nn).map(|(sc, x)| x.zip_map(&sc.w, |a, w| a / (w * w))).collect(),
            psd: self.psd.iter().zip(&v.psd).map(|(sc, x)| &sc.w * x * &sc.w).collect(),
        }
    }

    /// `W dx`.
    fn scale_x(&self, v: &Vars) -> Vars {
        Vars {
            nn: self.nn.iter().zip(&v.nn).map(|(sc, x)| x.component_mul(&sc.w)).collect(),
            psd: self.psd.iter().zip(&v.psd).map(|(sc, x)| &sc.rinv * x * sc.rinv.transpose()).collect(),
        }
    }

    /// `W⁻ᵀ ds`.
    fn scale_s(&self, v: &Vars) -> Vars {
        Vars {
            nn: self.nn.iter().zip(&v.nn).map(|(sc, x)| x.component_div(&sc.w)).collect(),
            psd: self.psd.iter().zip(&v.psd).map(|(sc, x)| sc.r.transpose() * x * &sc.r).collect(),
        }
    }

    /// `G⁻¹ Wᵀ d`.
    fn ginv_wt(&self, v: &Vars) -> Vars {
        Vars {
            nn: self.nn.iter().zip(&v.nn).map(|(sc, x)| x.component_div(&sc.w)).collect(),
            psd: self.psd.iter().zip(&v.psd).map(|(sc, x)| &sc.r * x * sc.r.transpose()).collect(),
        }
    }

    fn lam_sq(&self) -> Vars {
        Vars {
            nn: self.nn.iter().map(|sc| sc.lam.component_mul(&sc.lam)).collect(),
            psd: self.psd.iter().map(|sc| DMatrix::from_diagonal(&sc.lam.component_mul(&sc.lam))).collect(),
        }
    }

    /// Solves `λ ∘ d = r` for `d`.
    fn lam_solve(&self, r: &Vars) -> Vars {
        Vars {
            nn: self.nn.iter().zip(&r.nn).map(|(sc, x)| x.component_div(&sc.lam)).collect(),
            psd: self
                .psd
                .iter()
                .zip(&r.psd)
                .map(|(sc, x)| DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| 2.0 * x[(i, j)] / (sc.lam[i] + sc.lam[j])))
                .collect(),
        }
    }

    /// Largest `α` with `λ + α d` in the cone (`d` in scaled coordinates); `∞` if unbounded.
    fn max_step(&self, d: &Vars) -> f64 {
        let mut alpha = f64::INFINITY;
        for (sc, v) in self.nn.iter().zip(&d.nn) {
            for (l, dv) in sc.lam.iter().zip(v.iter()) {
                if *dv < 0.0 {
                    alpha = alpha.min(-l / dv);
                }
            }
        }
        for (sc, v) in self.psd.iter().zip(&d.psd) {
            let isq = sc.lam.map(|l| 1.0 / l.sqrt());
            let t = DMatrix::from_fn(v.nrows(), v.ncols(), |i, j| isq[i] * v[(i, j)] * isq[j]);
            let t = (&t + t.transpose()) * 0.5;
            let emin = t.symmetric_eigenvalues().min();
            if emin < 0.0 {
                alpha = alpha.min(-1.0 / emin);
            }
        }
        alpha
    }
}

fn jordan(u: &Vars, v: &Vars) -> Vars {
    Vars {
        nn: u.nn.iter().zip(&v.nn).map(|(a, b)| a.component_mul(b)).collect(),
        psd: u.psd.iter().zip(&v.psd).map(|(a, b)| (a * b + b * a) * 0.5).collect(),
    }
}

struct Kkt {
    k: DMatrix<f64>,
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    m: usize,
}

impl Kkt {
    fn factor(model: &Model, sc: &Scaling) -> Option<Kkt> {
        let m = model.m;
        let nf = model.free_idx.len();
        let mut k = DMatrix::<f64>::zeros(m + nf, m + nf);
        {
            let mut mm = k.view_mut((0, 0), (m, m));
            for (blk, s) in model.nn.iter().zip(&sc.nn) {
                for (j, col) in blk.cols.iter().enumerate() {
                    let d = 1.0 / (s.w[j] * s.w[j]);
                    for &(r1, v1) in col {
                        for &(r2, v2) in col {
                            mm[(r1, r2)] += v1 * v2 * d;
                        }
                    }
                }
            }
            for (blk, s) in model.psd.iter().zip(&sc.psd) {
                let n = blk.n;
                let mut bj = DMatrix::zeros(n, n);
                for (rj, ej) in &blk.rows {
                    bj.fill(0.0);
                    for &(p, q, v) in ej {
                        bj.ger(v, &s.w.column(p), &s.w.column(q), 1.0);
                    }
                    for (ri, ei) in &blk.rows {
                        if ri > rj {
                            continue;
                        }
                        let t: f64 = ei.iter().map(|&(p, q, v)| v * bj[(q, p)]).sum();
                        mm[(*ri, *rj)] += t;
                        if ri != rj {
                            mm[(*rj, *ri)] += t;
                        }
                    }
                }
            }
            let reg = 1e-14 * (0..m).map(|i| mm[(i, i)].abs()).fold(0.0, f64::max).max(1e-300);
            for i in 0..m {
                mm[(i, i)] += reg;
            }
        }
        if nf > 0 {
            k.view_mut((0, m), (m, nf)).copy_from(&model.af);
            k.view_mut((m, 0), (nf, m)).copy_from(&model.af.transpose());
        }
        if k.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let lu = k.clone().lu();
        Some(Kkt { k, lu, m })
    }

    fn solve(&self, r1: &DVector<f64>, r2: &DVector<f64>) -> Option<(DVector<f64>, DVector<f64>)> {
        let mut rhs = DVector::zeros(self.k.nrows());
        rhs.rows_mut(0, self.m).copy_from(r1);
        rhs.rows_mut(self.m, r2.len()).copy_from(r2);
        let mut sol = self.lu.solve(&rhs)?;
        // one step of iterative refinement
        let res = &rhs - &self.k * &sol;
        if let Some(corr) = self.lu.solve(&res) {
            sol += corr;
        }
        if sol.iter().any(|v| !v.is_finite()) {
            return None;
        }
        Some((sol.rows(0, self.m).into_owned(), sol.rows(self.m, r2.len()).into_owned()))
    }
}

struct Dir {
    dx: Vars,
    ds: Vars,
    dxf: DVector<f64>,
    dy: DVector<f64>,
    dtau: f64,
    dkappa: f64,
}

struct Residuals {
    rp: DVector<f64>,
    rd: Vars,
    rdf: DVector<f64>,
    rg: f64,
}

struct Point {
    x: Vars,
    s: Vars,
    xf: DVector<f64>,
    y: DVector<f64>,
    tau: f64,
    kappa: f64,
}

/// Rows kept after dropping linear dependencies, or a Farkas ray proving inconsistency.
enum Preprocess {
    Keep(Vec<usize>),
    Inconsistent(Vec<f64>),
}

fn preprocess(p: &ConicProblem) -> Preprocess {
    let m = p.num_constraints();
    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); p.dim()];
    for (i, r) in p.rows().iter().enumerate() {
        for &(j, v) in r {
            cols[j].push((i, v));
        }
    }
    let mut g = DMatrix::<f64>::zeros(m, m);
    for col in &cols {
        for &(i, a) in col {
            for &(j, b) in col {
                g[(i, j)] += a * b;
            }
        }
    }
    // incremental Cholesky of the kept rows' Gram matrix
    let mut keep: Vec<usize> = Vec::new();
    let mut l: Vec<Vec<f64>> = Vec::new();
    for i in 0..m {
        let gii = g[(i, i)];
        let mut li = vec![0.0; keep.len()];
        for (a, &ka) in keep.iter().enumerate() {
            let s: f64 = (0..a).map(|t| l[a][t] * li[t]).sum();
            li[a] = (g[(ka, i)] - s) / l[a][a];
        }
        let d = gii - li.iter().map(|v| v * v).sum::<f64>();
        if gii > 0.0 && d > 1e-10 * gii {
            li.push(d.sqrt());
            l.push(li);
            keep.push(i);
            continue;
        }
        // dependent: a_i ≈ Σ z_a a_{keep[a]}
        let mut z = vec![0.0; keep.len()];
        for a in (0..keep.len()).rev() {
            let s: f64 = ((a + 1)..keep.len()).map(|t| l[t][a] * z[t]).sum();
            z[a] = (li[a] - s) / l[a][a];
        }
        let gap = p.b()[i] - z.iter().zip(&keep).map(|(za, &ka)| za * p.b()[ka]).sum::<f64>();
        let scale = 1.0 + p.b()[i].abs() + z.iter().zip(&keep).map(|(za, &ka)| (za * p.b()[ka]).abs()).sum::<f64>();
        if gap.abs() > 1e-9 * scale {
            let mut y = vec![0.0; m];
            y[i] = 1.0 / gap;
            for (za, &ka) in z.iter().zip(&keep) {
                y[ka] = -za / gap;
            }
            return Preprocess::Inconsistent(y);
        }
    }
    Preprocess::Keep(keep)
}

pub(super) fn solve(p: &ConicProblem, tol: f64, max_iter: usize, start: Option<u64>) -> Result<ConicSolution, SolverError> {
    if !(tol > 0.0) {
        return Err(SolverError::Invalid("tol must be positive".into()));
    }
    let keep = match preprocess(p) {
        Preprocess::Keep(k) => k,
        Preprocess::Inconsistent(y) => {
            return Ok(ConicSolution {
                status: SolveStatus::InfeasibleEvidence,
                x: vec![0.0; p.dim()],
                y,
                primal_residual: f64::NAN,
                dual_residual: f64::NAN,
                min_cone_margin: f64::NAN,
                iterations: 0,
                note: Some("equality constraints are inconsistent".into()),
            })
        }
    };
    let model = Model::build(p, &keep);
    let m = model.m;
    let nf = model.free_idx.len();
    let cv = model.c_vars();
    let cnorm = cv.norm_inf().max(model.cf.amax());

    let (x0, s0) = match start {
        Some(seed) => (model.jittered(seed), model.jittered(seed ^ 0x9e37_79b9_7f4a_7c15)),
        None => (model.identity(), model.identity()),
    };
    let mut pt = Point {
        x: x0,
        s: s0,
        xf: DVector::zeros(nf),
        y: DVector::zeros(m),
        tau: 1.0,
        kappa: 1.0,
    };
    let breakdown = |iter: usize, reason: &str| SolverError::Breakdown { iter, reason: reason.to_string() };

    for iter in 0..=max_iter {
        let (aty, afty) = model.at_op(&pt.y);
        let ax = model.a_op(&pt.x, &pt.xf);
        let cx = cv.dot(&pt.x) + model.cf.dot(&pt.xf);
        let by = model.b.dot(&pt.y);
        let res = Residuals {
            rp: &model.b * pt.tau - &ax,
            rd: {
                let mut r = cv.scale(pt.tau);
                r.axpy(-1.0, &aty);
                r.axpy(-1.0, &pt.s);
                r
            },
            rdf: &model.cf * pt.tau - &afty,
            rg: pt.kappa + cx - by,
        };

        // convergence on the de-homogenised point
        let pres = (&res.rp / pt.tau).amax();
        let dres = (res.rd.norm_inf().max(res.rdf.amax()) / pt.tau) / (1.0 + cnorm);
        let pobj = cx / pt.tau;
        let dobj = by / pt.tau;
        let gap = (pobj - dobj).abs().min(pt.x.dot(&pt.s) / (pt.tau * pt.tau)) / (1.0 + pobj.abs());
        if pres <= 0.5 * tol && dres <= tol && gap <= tol {
            return Ok(finish(p, &model, &keep, &pt, iter, tol));
        }
        // primal residual stuck at roundoff level while everything else has converged
        if pres <= 1e3 * tol && dres <= tol && gap <= tol * 1e-3 {
            let sol = finish(p, &model, &keep, &pt, iter, tol);
            if sol.is_feasible() {
                return Ok(sol);
            }
        }
        // infeasibility: a Farkas ray with bᵀy > 0
        if by > 0.0 {
            let r = aty.add(&pt.s).scale(1.0 / by).norm_inf().max(afty.amax() / by);
            if r <= tol {
                let mut y = vec![0.0; p.num_constraints()];
                for (k, &orig) in keep.iter().enumerate() {
                    y[orig] = pt.y[k] / by;
                }
                return Ok(ConicSolution {
                    status: SolveStatus::InfeasibleEvidence,
                    x: vec![0.0; p.dim()],
                    y,
                    primal_residual: f64::NAN,
                    dual_residual: r,
                    min_cone_margin: f64::NAN,
                    iterations: iter,
                    note: None,
                });
            }
        }
        if cx < 0.0 && (&ax / (-cx)).amax() <= tol {
            return Ok(unknown(p, iter, "dual infeasible (objective unbounded below)"));
        }
        if iter == max_iter {
            break;
        }

        let sc = Scaling::compute(&pt.x, &pt.s).ok_or_else(|| breakdown(iter, "iterate left the cone interior"))?;
        let mu = (pt.x.dot(&pt.s) + pt.tau * pt.kappa) / (model.nu + 1.0);
        let kkt = Kkt::factor(&model, &sc).ok_or_else(|| breakdown(iter, "non-finite Newton system"))?;

        // dτ-coefficient part
        let ginv_c = sc.ginv(&cv);
        let (dy2, dxf2) = kkt
            .solve(&(&model.b + model.a_op(&ginv_c, &DVector::zeros(nf))), &model.cf)
            .ok_or_else(|| breakdown(iter, "singular Newton system"))?;
        let dx2 = {
            let mut t = model.at_op(&dy2).0;
            t.axpy(-1.0, &cv);
            sc.ginv(&t)
        };
        let den2 = cv.dot(&dx2) + model.cf.dot(&dxf2) - model.b.dot(&dy2);

        let direction = |eta: f64, delta: &Vars, rtk: f64| -> Option<Dir> {
            let mut u = sc.ginv(&res.rd.scale(-eta));
            u.axpy(1.0, &sc.ginv_wt(delta));
            let rhs = &res.rp * eta - model.a_op(&u, &DVector::zeros(nf));
            let (dy1, dxf1) = kkt.solve(&rhs, &(&res.rdf * eta))?;
            let mut dx1 = sc.ginv(&model.at_op(&dy1).0);
            dx1.axpy(1.0, &u);
            let num = -eta * res.rg - rtk / pt.tau - (cv.dot(&dx1) + model.cf.dot(&dxf1) - model.b.dot(&dy1));
            let den = -pt.kappa / pt.tau + den2;
            let dtau = num / den;
            if !dtau.is_finite() {
                return None;
            }
            let mut dx = dx1;
            dx.axpy(dtau, &dx2);
            let dy = dy1 + &dy2 * dtau;
            // ds from the dual equation keeps the dual residual exact under roundoff
            let mut ds = res.rd.scale(eta);
            ds.axpy(-1.0, &model.at_op(&dy).0);
            ds.axpy(dtau, &cv);
            Some(Dir {
                dx,
                ds,
                dxf: dxf1 + &dxf2 * dtau,
                dy,
                dtau,
                dkappa: (rtk - pt.kappa * dtau) / pt.tau,
            })
        };
        let step = |d: &Dir| -> f64 {
            let mut a = sc.max_step(&sc.scale_x(&d.dx)).min(sc.max_step(&sc.scale_s(&d.ds)));
            if d.dtau < 0.0 {
                a = a.min(-pt.tau / d.dtau);
            }
            if d.dkappa < 0.0 {
                a = a.min(-pt.kappa / d.dkappa);
            }
            a
        };

        // predictor
        let lam2 = sc.lam_sq();
        let delta_a = sc.lam_solve(&lam2.scale(-1.0));
        let da = direction(1.0, &delta_a, -pt.tau * pt.kappa).ok_or_else(|| breakdown(iter, "predictor solve failed"))?;
        let alpha_a = step(&da).min(1.0);
        let sigma = (1.0 - alpha_a).powi(3).clamp(0.0, 1.0);

        // corrector
        let mut r = lam2.scale(-1.0);
        r.axpy(sigma * mu, &model.identity());
        r.axpy(-1.0, &jordan(&sc.scale_s(&da.ds), &sc.scale_x(&da.dx)));
        let delta = sc.lam_solve(&r);
        let rtk = -pt.tau * pt.kappa + sigma * mu - da.dtau * da.dkappa;
        let d = direction(1.0 - sigma, &delta, rtk).ok_or_else(|| breakdown(iter, "corrector solve failed"))?;
        let alpha = (0.99 * step(&d)).min(1.0);
        if !(alpha > 1e-14) {
            return Err(breakdown(iter, "step length collapsed"));
        }

        pt.x.axpy(alpha, &d.dx);
        pt.s.axpy(alpha, &d.ds);
        pt.xf += &d.dxf * alpha;
        pt.y += &d.dy * alpha;
        pt.tau += alpha * d.dtau;
        pt.kappa += alpha * d.dkappa;
        for v in pt.x.psd.iter_mut().chain(pt.s.psd.iter_mut()) {
            let t = v.transpose();
            *v = (&*v + t) * 0.5;
        }
    }
    Ok(unknown(p, max_iter, "iteration limit reached"))
}

fn unknown(p: &ConicProblem, iter: usize, note: &str) -> ConicSolution {
    ConicSolution {
        status: SolveStatus::Unknown,
        x: vec![0.0; p.dim()],
        y: vec![0.0; p.num_constraints()],
        primal_residual: f64::NAN,
        dual_residual: f64::NAN,
        min_cone_margin: f64::NAN,
        iterations: iter,
        note: Some(note.to_string()),
    }
}

fn finish(p: &ConicProblem, model: &Model, keep: &[usize], pt: &Point, iter: usize, tol: f64) -> ConicSolution {
    let mut x = vec![0.0; p.dim()];
    for (blk, v) in model.nn.iter().zip(&pt.x.nn) {
        for k in 0..v.len() {
            x[blk.off + k] = v[k] / pt.tau;
        }
    }
    for (blk, mtx) in model.psd.iter().zip(&pt.x.psd) {
        let mut k = blk.off;
        for i in 0..blk.n {
            for j in i..blk.n {
                x[k] = mtx[(i, j)] / pt.tau;
                k += 1;
            }
        }
    }
    for (k, &idx) in model.free_idx.iter().enumerate() {
        x[idx] = pt.xf[k] / pt.tau;
    }
    let mut y = vec![0.0; p.num_constraints()];
    for (k, &orig) in keep.iter().enumerate() {
        y[orig] = pt.y[k] / pt.tau;
    }

    polish(p, keep, &mut x);
    let primal_residual = p.residual_inf(&x);
    let (aty, afty) = model.at_op(&pt.y);
    let mut rd = model.c_vars();
    rd.axpy(-1.0 / pt.tau, &aty);
    rd.axpy(-1.0 / pt.tau, &pt.s);
    let dual_residual = rd.norm_inf().max((&model.cf - afty / pt.tau).amax());

    let mut margin = f64::INFINITY;
    for (i, blk) in p.blocks().iter().enumerate() {
        match blk.kind {
            BlockKind::Nonneg => {
                margin = p.block_slice(&x, i).iter().copied().fold(margin, f64::min);
            }
            BlockKind::Psd => {
                let ev = eig_sym(&SymMatrix::from_upper(blk.size, p.block_slice(&x, i).to_vec()));
                margin = margin.min(ev[0]);
            }
            BlockKind::Free => {}
        }
    }

    let (status, note) = if primal_residual < tol && margin >= -tol {
        (if p.is_feasibility() { SolveStatus::Feasible } else { SolveStatus::Optimal }, None)
    } else {
        (
            SolveStatus::Unknown,
            Some(format!("converged but independent check failed: residual {primal_residual:.3e}, margin {margin:.3e}")),
        )
    };
    ConicSolution { status, x, y, primal_residual, dual_residual, min_cone_margin: margin, iterations: iter, note }
}

/// Least-squares correction `x ← x − Aᵀ(AAᵀ)⁻¹(Ax − b)` over the kept rows, applied while it
/// lowers the residual.
fn polish(p: &ConicProblem, keep: &[usize], x: &mut [f64]) {
    let m = keep.len();
    if m == 0 {
        return;
    }
    let mut g = DMatrix::<f64>::zeros(m, m);
    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); p.dim()];
    for (r, &orig) in keep.iter().enumerate() {
        for &(j, v) in &p.rows()[orig] {
            cols[j].push((r, v));
        }
    }
    for col in &cols {
        for &(i, a) in col {
            for &(j, b) in col {
                g[(i, j)] += a * b;
            }
        }
    }
    let Some(chol) = g.cholesky() else { return };
    let mut best = p.residual_inf(x);
    for _ in 0..2 {
        let r = DVector::from_iterator(
            m,
            keep.iter().map(|&i| p.rows()[i].iter().map(|(j, v)| v * x[*j]).sum::<f64>() - p.b()[i]),
        );
        let z = chol.solve(&r);
        let mut trial = x.to_vec();
        for (j, col) in cols.iter().enumerate() {
            trial[j] -= col.iter().map(|&(i, v)| v * z[i]).sum::<f64>();
        }
        let res = p.residual_inf(&trial);
        if !(res < best) {
            return;
        }
        best = res;
        x.copy_from_slice(&trial);
    }
}
