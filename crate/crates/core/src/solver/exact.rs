use num_traits::Zero;

use super::problem::{check_blocks, offsets, Block, BlockKind, ConicProblem};
use super::SolverError;
use crate::exactfield::{QSqrt2, SparseRow};

/// A feasibility problem `A x = b`, `x ∈ K` with exact coefficients; the float copy is what the
/// solver sees, the exact one is what certificates are projected onto.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactConicProblem {
    pub blocks: Vec<Block>,
    pub rows: Vec<SparseRow>,
    pub b: Vec<QSqrt2>,
}

impl ExactConicProblem {
    pub fn new(blocks: Vec<Block>, rows: Vec<SparseRow>, b: Vec<QSqrt2>) -> Result<Self, SolverError> {
        check_blocks(&blocks)?;
        if rows.len() != b.len() {
            return Err(SolverError::Invalid(format!("{} rows but {} right-hand sides", rows.len(), b.len())));
        }
        let dim = *offsets(&blocks).last().unwrap();
        if rows.iter().flatten().any(|(j, _)| *j >= dim) {
            return Err(SolverError::Invalid("column index out of range".into()));
        }
        Ok(ExactConicProblem { blocks, rows, b })
    }

    pub fn dim(&self) -> usize {
        *offsets(&self.blocks).last().unwrap()
    }

    pub fn offsets(&self) -> Vec<usize> {
        offsets(&self.blocks)
    }

    pub fn to_float(&self) -> ConicProblem {
        let rows = self.rows.iter().map(|r| r.iter().map(|(j, v)| (*j, v.to_f64())).collect()).collect();
        ConicProblem::new(self.blocks.clone(), vec![0.0; self.dim()], rows, self.b.iter().map(QSqrt2::to_f64).collect())
            .expect("validated on construction")
    }

    /// Index of the first row violated by `x`, if any.
    pub fn first_violated_row(&self, x: &[QSqrt2]) -> Option<usize> {
        self.rows.iter().zip(&self.b).position(|(r, bi)| {
            let mut acc = QSqrt2::zero();
            for (j, v) in r {
                if !x[*j].is_zero() {
                    acc += v * &x[*j];
                }
            }
            &acc != bi
        })
    }

    pub fn block_index(&self, name: &str) -> Option<usize> {
        self.blocks.iter().position(|b| b.name.as_deref() == Some(name))
    }

    pub fn kinds(&self) -> Vec<BlockKind> {
        self.blocks.iter().map(|b| b.kind).collect()
    }
}
