use serde::{Deserialize, Serialize};

use super::SolverError;
use crate::cones::SymMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum BlockKind {
    Nonneg,
    Psd,
    Free,
}

/// One variable block. A PSD block of size `s` contributes its `s(s+1)/2` upper-triangle entries
/// (row-major) as coordinates; a constraint row `r` acts on it as `Σ_{p≤q} r_pq X_pq`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub kind: BlockKind,
    pub size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl Block {
    pub fn new(kind: BlockKind, size: usize) -> Self {
        Block { kind, size, name: None }
    }

    pub fn named(kind: BlockKind, size: usize, name: &str) -> Self {
        Block { kind, size, name: Some(name.to_string()) }
    }

    /// Number of scalar coordinates.
    pub fn dim(&self) -> usize {
        match self.kind {
            BlockKind::Psd => self.size * (self.size + 1) / 2,
            _ => self.size,
        }
    }
}

pub(crate) fn offsets(blocks: &[Block]) -> Vec<usize> {
    let mut off = Vec::with_capacity(blocks.len() + 1);
    let mut acc = 0;
    for b in blocks {
        off.push(acc);
        acc += b.dim();
    }
    off.push(acc);
    off
}

pub(crate) fn check_blocks(blocks: &[Block]) -> Result<(), SolverError> {
    if blocks.is_empty() {
        return Err(SolverError::Invalid("no variable blocks".into()));
    }
    if let Some(b) = blocks.iter().find(|b| b.size == 0) {
        return Err(SolverError::Invalid(format!("block {:?} has size 0", b.name)));
    }
    Ok(())
}

/// `min cᵀx` subject to `A x = b` and `x` in the product cone of `blocks`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConicProblem {
    blocks: Vec<Block>,
    c: Vec<f64>,
    rows: Vec<Vec<(usize, f64)>>,
    b: Vec<f64>,
}

impl ConicProblem {
    /// `rows` are sparse `(coordinate, value)` lists; duplicate coordinates are summed.
    pub fn new(
        blocks: Vec<Block>,
        c: Vec<f64>,
        rows: Vec<Vec<(usize, f64)>>,
        b: Vec<f64>,
    ) -> Result<Self, SolverError> {
        check_blocks(&blocks)?;
        let dim = *offsets(&blocks).last().unwrap();
        if c.len() != dim {
            return Err(SolverError::Invalid(format!("objective has length {}, expected {dim}", c.len())));
        }
        if rows.len() != b.len() {
            return Err(SolverError::Invalid(format!("{} rows but {} right-hand sides", rows.len(), b.len())));
        }
        if c.iter().chain(&b).any(|v| !v.is_finite()) {
            return Err(SolverError::Invalid("non-finite data".into()));
        }
        let mut clean = Vec::with_capacity(rows.len());
        for r in rows {
            let mut r2: Vec<(usize, f64)> = Vec::with_capacity(r.len());
            for (j, v) in r {
                if j >= dim || !v.is_finite() {
                    return Err(SolverError::Invalid(format!("bad entry ({j}, {v})")));
                }
                match r2.iter_mut().find(|(k, _)| *k == j) {
                    Some(e) => e.1 += v,
                    None => r2.push((j, v)),
                }
            }
            r2.retain(|(_, v)| *v != 0.0);
            r2.sort_by_key(|e| e.0);
            clean.push(r2);
        }
        Ok(ConicProblem { blocks, c, rows: clean, b })
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn rows(&self) -> &[Vec<(usize, f64)>] {
        &self.rows
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn dim(&self) -> usize {
        *offsets(&self.blocks).last().unwrap()
    }

    pub fn num_constraints(&self) -> usize {
        self.rows.len()
    }

    pub fn offsets(&self) -> Vec<usize> {
        offsets(&self.blocks)
    }

    pub fn block_slice<'a>(&self, x: &'a [f64], i: usize) -> &'a [f64] {
        let off = self.offsets();
        &x[off[i]..off[i + 1]]
    }

    /// A PSD block of `x` as a matrix.
    pub fn psd_matrix(&self, x: &[f64], i: usize) -> SymMatrix {
        assert_eq!(self.blocks[i].kind, BlockKind::Psd, "block {i} is not PSD");
        SymMatrix::from_upper(self.blocks[i].size, self.block_slice(x, i).to_vec())
    }

    /// `‖A x − b‖_∞`.
    pub fn residual_inf(&self, x: &[f64]) -> f64 {
        self.rows
            .iter()
            .zip(&self.b)
            .map(|(r, bi)| (r.iter().map(|(j, v)| v * x[*j]).sum::<f64>() - bi).abs())
            .fold(0.0, f64::max)
    }

    /// Same problem with `b` and `c` multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        ConicProblem {
            blocks: self.blocks.clone(),
            c: self.c.iter().map(|v| v * factor).collect(),
            rows: self.rows.clone(),
            b: self.b.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn is_feasibility(&self) -> bool {
        self.c.iter().all(|v| *v == 0.0)
    }
}

#[derive(Serialize, Deserialize)]
struct ProblemJson {
    blocks: Vec<Block>,
    c: Vec<f64>,
    a_eq: Vec<Vec<f64>>,
    b_eq: Vec<f64>,
}

impl Serialize for ConicProblem {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let dim = self.dim();
        let a_eq = self
            .rows
            .iter()
            .map(|r| {
                let mut d = vec![0.0; dim];
                for (j, v) in r {
                    d[*j] = *v;
                }
                d
            })
            .collect();
        ProblemJson { blocks: self.blocks.clone(), c: self.c.clone(), a_eq, b_eq: self.b.clone() }
            .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ConicProblem {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let j = ProblemJson::deserialize(deserializer)?;
        let dim: usize = j.blocks.iter().map(Block::dim).sum();
        if j.a_eq.iter().any(|r| r.len() != dim) {
            return Err(serde::de::Error::custom(format!("every a_eq row must have {dim} entries")));
        }
        let rows = j
            .a_eq
            .into_iter()
            .map(|r| r.into_iter().enumerate().filter(|(_, v)| *v != 0.0).collect())
            .collect();
        ConicProblem::new(j.blocks, j.c, rows, j.b_eq).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    Feasible,
    InfeasibleEvidence,
    Unknown,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConicSolution {
    pub status: SolveStatus,
    /// Primal point in problem coordinates.
    pub x: Vec<f64>,
    /// Dual multipliers; for `InfeasibleEvidence` a Farkas ray normalised to `bᵀy = 1`.
    pub y: Vec<f64>,
    /// `‖A x − b‖_∞` over all original rows.
    pub primal_residual: f64,
    pub dual_residual: f64,
    /// Smallest NONNEG entry / PSD eigenvalue of `x` (checked with Jacobi, not the solver's own factors).
    pub min_cone_margin: f64,
    pub iterations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl ConicSolution {
    pub fn is_feasible(&self) -> bool {
        matches!(self.status, SolveStatus::Feasible | SolveStatus::Optimal)
    }
}
