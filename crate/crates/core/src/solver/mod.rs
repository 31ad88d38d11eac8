//! Dense primal-dual interior-point solver for problems over NONNEG, PSD and FREE blocks, and
//! builders for the SDPs used by the certificate pipeline and the membership tests.

mod builders;
mod exact;
mod ipm;
mod problem;

pub use builders::{build_ecop_problem, build_parrilo_problem, build_seed_problem, build_spn_problem};
pub use exact::ExactConicProblem;
pub use problem::{Block, BlockKind, ConicProblem, ConicSolution, SolveStatus};

/// Start offset of every block plus the total dimension.
pub fn block_offsets(blocks: &[Block]) -> Vec<usize> {
    problem::offsets(blocks)
}

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ITER: usize = 200;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolverError {
    #[error("invalid problem: {0}")]
    Invalid(String),
    #[error("numerical breakdown at iteration {iter}: {reason}")]
    Breakdown { iter: usize, reason: String },
}

/// Solves `p` to tolerance `tol` (residuals and relative gap).
///
/// Pure feasibility problems (`c = 0`) come back as a point in the relative interior of the
/// feasible set when one exists; the self-dual embedding's central path ends at a maximally
/// complementary solution.
pub fn solve(p: &ConicProblem, tol: f64, max_iter: usize) -> Result<ConicSolution, SolverError> {
    ipm::solve(p, tol, max_iter, None)
}

/// Same as [`solve`] but from a random interior starting point derived from `start_seed`.
pub fn solve_from(p: &ConicProblem, tol: f64, max_iter: usize, start_seed: u64) -> Result<ConicSolution, SolverError> {
    ipm::solve(p, tol, max_iter, Some(start_seed))
}

pub fn solve_default(p: &ConicProblem) -> Result<ConicSolution, SolverError> {
    solve(p, DEFAULT_TOL, DEFAULT_MAX_ITER)
}
