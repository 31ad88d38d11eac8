//! Exact arithmetic over ℚ and ℚ(√2): numbers, symmetric matrices, PSD decisions and linear solves.
//!
//! Everything a certificate claims is rechecked here; floating point never enters these paths.

mod linsolve;
mod matrix;
mod psd;
mod qsqrt2;
mod text;

pub use linsolve::{min_norm_solution, solve_linear_exact, SparseRow};
pub(crate) use linsolve::solve_square_consistent;
pub use matrix::{frobenius_exact, ExactSymMatrix};
pub(crate) use matrix::upper_index;
pub use psd::{is_psd_exact, PsdDecision};
pub use qsqrt2::{rat, rat_from_f64, rat_to_f64, sign_of, QSqrt2, Rat};
pub use text::{format_rat, parse_qs, parse_rat, rat_serde};
