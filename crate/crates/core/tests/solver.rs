use conecert::cones::{eig_sym, horn_matrix, SymMatrix};
use conecert::exactfield::*;
use conecert::solver::*;

const TOL: f64 = 1e-9;

fn nonneg(n: usize) -> Block {
    Block::new(BlockKind::Nonneg, n)
}

/// Residual and cone membership recomputed from scratch, without the solver's own numbers.
fn assert_independently_feasible(p: &ConicProblem, sol: &ConicSolution) {
    assert!(sol.is_feasible(), "status {:?}", sol.status);
    let res = p.residual_inf(&sol.x);
    assert!(res < TOL, "residual {res:e}");
    let off = p.offsets();
    for (i, b) in p.blocks().iter().enumerate() {
        let min = match b.kind {
            BlockKind::Psd => eig_sym(&p.psd_matrix(&sol.x, i))[0],
            BlockKind::Nonneg => sol.x[off[i]..off[i + 1]].iter().cloned().fold(f64::INFINITY, f64::min),
            BlockKind::Free => continue,
        };
        assert!(min >= -TOL, "block {i} margin {min:e}");
    }
}

fn point_problem(rhs: f64) -> ConicProblem {
    ConicProblem::new(vec![nonneg(1)], vec![0.0], vec![vec![(0, 1.0)]], vec![rhs]).unwrap()
}

fn lp() -> ConicProblem {
    // min x₁ + 2x₂ + 3x₃  s.t.  x₁ + x₂ + x₃ = 1,  x₂ − x₃ = 0
    ConicProblem::new(
        vec![nonneg(3)],
        vec![1.0, 2.0, 3.0],
        vec![vec![(0, 1.0), (1, 1.0), (2, 1.0)], vec![(1, 1.0), (2, -1.0)]],
        vec![1.0, 0.0],
    )
    .unwrap()
}

fn min_eig_sdp(c: &SymMatrix) -> ConicProblem {
    // min ⟨C, X⟩ s.t. tr X = 1, X ⪰ 0: optimum is λ_min(C)
    let n = c.n();
    let mut cost = Vec::new();
    let mut trace = Vec::new();
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            cost.push(if i == j { c.get(i, i) } else { 2.0 * c.get(i, j) });
            if i == j {
                trace.push((k, 1.0));
            }
            k += 1;
        }
    }
    ConicProblem::new(vec![Block::new(BlockKind::Psd, n)], cost, vec![trace], vec![1.0]).unwrap()
}

fn seed(eps: i64, m: usize, mp: usize) -> ConicProblem {
    build_seed_problem(&rat(1, eps), m, mp).unwrap().to_float()
}

#[test]
fn point_feasible() {
    let p = point_problem(1.0);
    let sol = solve_default(&p).unwrap();
    assert_independently_feasible(&p, &sol);
    assert!((sol.x[0] - 1.0).abs() < 1e-9);
}

#[test]
fn point_infeasible() {
    let sol = solve_default(&point_problem(-1.0)).unwrap();
    assert_eq!(sol.status, SolveStatus::InfeasibleEvidence);
    // Farkas ray: Aᵀy ≥ 0 and bᵀy = 1 (here b = −1, so y < 0)
    assert!(sol.y[0] < 0.0);
}

#[test]
fn lp_optimum() {
    let p = lp();
    let sol = solve_default(&p).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal);
    assert_independently_feasible(&p, &sol);
    assert!((sol.x[0] - 1.0).abs() < 1e-6, "{:?}", sol.x);
}

#[test]
fn sdp_minimum_eigenvalue() {
    let c = SymMatrix::from_rows(&[vec![2.0, 1.0, 0.0], vec![1.0, 2.0, 1.0], vec![0.0, 1.0, 2.0]]).unwrap();
    let p = min_eig_sdp(&c);
    let sol = solve_default(&p).unwrap();
    assert_independently_feasible(&p, &sol);
    let obj: f64 = p.c().iter().zip(&sol.x).map(|(a, b)| a * b).sum();
    assert!((obj - (2.0 - 2f64.sqrt())).abs() < 1e-7, "{obj}");
}

#[test]
fn seed_problem_shape() {
    let p = seed(20, 6, 3);
    assert_eq!(p.dim(), 6 + 10);
    assert_eq!(p.num_constraints(), 8);
}

#[test]
fn seed_problems() {
    let p = seed(20, 10, 5);
    assert_independently_feasible(&p, &solve_default(&p).unwrap());
    // at m = 6 no positive ε is reachable under f = 1 + 2Σaₖcos(2kπx)
    assert_eq!(solve_default(&seed(20, 6, 3)).unwrap().status, SolveStatus::InfeasibleEvidence);
    for mp in 1..=3 {
        let st = solve_default(&seed(20, 6, mp)).unwrap().status;
        assert!(!matches!(st, SolveStatus::Feasible | SolveStatus::Optimal), "m' = {mp}: {st:?}");
    }
}

#[test]
fn ecop_problem_needs_an_exceptional_matrix() {
    let a2 = ExactSymMatrix::from_rows(vec![vec![QSqrt2::from_int(1), QSqrt2::frac(1, 2)], vec![QSqrt2::frac(1, 2), QSqrt2::from_int(1)]]).unwrap();
    let st = solve_default(&build_ecop_problem(&a2, 1, &rat(1, 10)).unwrap().to_float()).unwrap().status;
    assert!(!matches!(st, SolveStatus::Feasible | SolveStatus::Optimal), "{st:?}");
    let st = solve_default(&build_ecop_problem(&ExactSymMatrix::identity(5), 1, &rat(1, 10)).unwrap().to_float()).unwrap().status;
    assert!(!matches!(st, SolveStatus::Feasible | SolveStatus::Optimal), "{st:?}");
}

#[test]
fn status_survives_scaling() {
    let fixtures = [point_problem(1.0), point_problem(-1.0), lp(), seed(20, 10, 5), seed(20, 6, 3)];
    for p in &fixtures {
        let base = solve_default(p).unwrap().status;
        for f in [1e-3, 7.0, 1e3] {
            let st = solve_default(&p.scaled(f)).unwrap().status;
            assert_eq!(st, base, "factor {f}");
        }
    }
}

#[test]
fn random_starts_both_converge() {
    let parrilo = build_parrilo_problem(&SymMatrix::from(&horn_matrix()), 1);
    for p in [lp(), seed(20, 10, 5), parrilo] {
        for s in [1, 2] {
            let sol = solve_from(&p, TOL, DEFAULT_MAX_ITER, s).unwrap();
            assert_independently_feasible(&p, &sol);
        }
    }
}

#[test]
fn rejects_bad_input() {
    assert!(ConicProblem::new(vec![], vec![], vec![], vec![]).is_err());
    assert!(ConicProblem::new(vec![nonneg(1)], vec![0.0, 1.0], vec![], vec![]).is_err());
    assert!(ConicProblem::new(vec![nonneg(1)], vec![0.0], vec![vec![(3, 1.0)]], vec![1.0]).is_err());
    assert!(solve(&point_problem(1.0), 0.0, 10).is_err());
}
