//! Cone programming: standard-form programs over the nonnegative orthant and
//! (rotated) second-order cones, a primal-dual interior-point solver, dual
//! extraction and a polyhedral outer approximation.
//!
//! Programs are stated as
//!
//! ```text
//!     minimize    c'x
//!     subject to  A x = b,   x in K
//! ```
//!
//! where `K` is a product of cone blocks partitioning the variable vector.
//! Free blocks carry no conic restriction; inequalities are expected to be
//! lowered to equality rows with nonnegative slack columns.

pub mod build;
mod kkt;
mod polyhedral;
mod rotated;
mod solver;

pub use build::{BuiltProgram, ProgramBuilder, RowId, RowSense, VarId, VarKind};
pub use kkt::BlockStructure;
pub use polyhedral::{polyhedral_approximation, PolyhedralLp};
pub use rotated::{rotated_to_soc, RotatedConversion};
pub use solver::{solve, solve_with, SolverOptions};

use serde::Serialize;
use thiserror::Error;

/// One block of the cone layout. Blocks partition the variable vector in
/// order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Cone {
    /// No conic restriction.
    Free(usize),
    /// Componentwise nonnegative.
    Nonneg(usize),
    /// `x0 >= ||x[1..]||`, dimension >= 2.
    Soc(usize),
    /// `2 x0 x1 >= ||x[2..]||^2`, `x0, x1 >= 0`, dimension >= 3.
    RotatedSoc(usize),
}

impl Cone {
    pub fn dim(&self) -> usize {
        match *self {
            Cone::Free(d) | Cone::Nonneg(d) | Cone::Soc(d) | Cone::RotatedSoc(d) => d,
        }
    }
}

#[derive(Debug, Error)]
pub enum ConicError {
    #[error("malformed program: {0}")]
    BadProgram(String),
    #[error("numerical failure after {iterations} iterations (residuals {residuals:?})")]
    NumericalFailure {
        iterations: usize,
        residuals: Residuals,
    },
    #[error("dual extraction: {0}")]
    DualExtraction(String),
}

/// Compressed sparse row matrix; the only operations the solver needs.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Self {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nrows];
        for (r, c, v) in triplets {
            assert!(r < nrows && c < ncols, "triplet out of bounds");
            if v != 0.0 {
                rows[r].push((c, v));
            }
        }
        let mut row_ptr = Vec::with_capacity(nrows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for row in &mut rows {
            row.sort_by_key(|(c, _)| *c);
            // Merge duplicates.
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
            for &(c, v) in row.iter() {
                match merged.last_mut() {
                    Some((lc, lv)) if *lc == c => *lv += v,
                    _ => merged.push((c, v)),
                }
            }
            for (c, v) in merged {
                if v != 0.0 {
                    col_idx.push(c);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        CsrMatrix {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    /// `out = A x`.
    pub fn mul_vec(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(out.len(), self.nrows);
        for r in 0..self.nrows {
            let mut acc = 0.0;
            for (c, v) in self.row(r) {
                acc += v * x[c];
            }
            out[r] = acc;
        }
    }

    /// `out = A' y`.
    pub fn tr_mul_vec(&self, y: &[f64], out: &mut [f64]) {
        debug_assert_eq!(y.len(), self.nrows);
        debug_assert_eq!(out.len(), self.ncols);
        out.fill(0.0);
        for r in 0..self.nrows {
            let yr = y[r];
            if yr != 0.0 {
                for (c, v) in self.row(r) {
                    out[c] += v * yr;
                }
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Standard-form cone program.
#[derive(Debug, Clone, PartialEq)]
pub struct ConicProgram {
    /// Objective row `c`.
    pub objective: Vec<f64>,
    /// Equality matrix `A`.
    pub rows: CsrMatrix,
    /// Equality right-hand side `b`.
    pub rhs: Vec<f64>,
    /// Cone layout partitioning the variable vector.
    pub cones: Vec<Cone>,
    /// Variable names, used for dual mapping and canonical dumps.
    pub names: Vec<String>,
    /// Optional block-arrow structure hint for the KKT factorization.
    pub structure: Option<BlockStructure>,
}

impl ConicProgram {
    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rhs.len()
    }

    pub fn validate(&self) -> Result<(), ConicError> {
        let n = self.num_vars();
        let total: usize = self.cones.iter().map(|c| c.dim()).sum();
        if total != n {
            return Err(ConicError::BadProgram(format!(
                "cone layout covers {total} of {n} variables"
            )));
        }
        for cone in &self.cones {
            match *cone {
                Cone::Soc(d) if d < 2 => {
                    return Err(ConicError::BadProgram(
                        "second-order cone needs dimension >= 2".into(),
                    ))
                }
                Cone::RotatedSoc(d) if d < 3 => {
                    return Err(ConicError::BadProgram(
                        "rotated cone needs dimension >= 3".into(),
                    ))
                }
                _ => {}
            }
        }
        if self.rows.ncols() != n || self.rows.nrows() != self.rhs.len() {
            return Err(ConicError::BadProgram("matrix dimensions disagree".into()));
        }
        if !self.names.is_empty() && self.names.len() != n {
            return Err(ConicError::BadProgram("name vector length mismatch".into()));
        }
        let finite = self.objective.iter().all(|v| v.is_finite())
            && self.rhs.iter().all(|v| v.is_finite())
            && self.rows.values.iter().all(|v| v.is_finite());
        if !finite {
            return Err(ConicError::BadProgram("non-finite data".into()));
        }
        if let Some(structure) = &self.structure {
            structure.validate(self)?;
        }
        Ok(())
    }

    /// Text dump of the program for solver-to-solver diffing.
    pub fn dump(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        let name = |c: usize| -> String {
            self.names
                .get(c)
                .cloned()
                .unwrap_or_else(|| format!("x{c}"))
        };
        writeln!(out, "vars {}", self.num_vars()).unwrap();
        writeln!(out, "rows {}", self.num_rows()).unwrap();
        let mut offset = 0;
        for cone in &self.cones {
            let kind = match cone {
                Cone::Free(_) => "free",
                Cone::Nonneg(_) => "nonneg",
                Cone::Soc(_) => "soc",
                Cone::RotatedSoc(_) => "rsoc",
            };
            writeln!(out, "cone {kind} {} {}", offset, cone.dim()).unwrap();
            offset += cone.dim();
        }
        for (c, v) in self.objective.iter().enumerate() {
            if *v != 0.0 {
                writeln!(out, "obj {} {:.17e}", name(c), v).unwrap();
            }
        }
        for r in 0..self.num_rows() {
            write!(out, "row {r} = {:.17e} :", self.rhs[r]).unwrap();
            for (c, v) in self.rows.row(r) {
                write!(out, " {}:{:.17e}", name(c), v).unwrap();
            }
            writeln!(out).unwrap();
        }
        out
    }
}

/// Scaled residual norms of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Residuals {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        self.primal.max(self.dual).max(self.gap)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SolveStatus {
    Optimal,
    /// `y, z` hold a Farkas certificate: `A'y + z ~ 0`, `z in K*`, `b'y = 1`.
    InfeasibleCertificate,
    /// `x` holds an unbounded ray: `A x ~ 0`, `x in K`, `c'x = -1`.
    UnboundedCertificate,
    IterationLimit,
}

/// Primal-dual solution (or certificate) of a cone program.
#[derive(Debug, Clone)]
pub struct ConicSolution {
    pub status: SolveStatus,
    pub x: Vec<f64>,
    /// Equality multipliers.
    pub y: Vec<f64>,
    /// Cone duals, zero on free blocks.
    pub z: Vec<f64>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub residuals: Residuals,
    pub iterations: usize,
}

/// Identifies the lowered rows a subproblem dual lives on.
#[derive(Debug, Clone, Default)]
pub struct DualMap {
    /// Rows lowered from equalities; multipliers are free.
    pub equality_rows: Vec<usize>,
    /// Rows lowered from `>=` inequalities; multipliers are nonnegative.
    pub linking_rows: Vec<usize>,
}

/// Subproblem dual in the naming of the decomposition: `theta` on equality
/// rows, `lambda >= 0` on inequality rows, and per-cone duals
/// `(mu, sigma)` with `||sigma|| <= mu`.
#[derive(Debug, Clone)]
pub struct DualSolution {
    pub theta: Vec<f64>,
    pub lambda: Vec<f64>,
    pub cone_duals: Vec<(f64, Vec<f64>)>,
    /// Subproblem value (primal optimum, equal to the dual objective by
    /// strong duality).
    pub value: f64,
}

/// Extract subproblem duals from an optimal solution, verifying stationarity
/// and the sign/cone conditions within `tol`.
pub fn extract_subproblem_duals(
    program: &ConicProgram,
    solution: &ConicSolution,
    map: &DualMap,
    tol: f64,
) -> Result<DualSolution, ConicError> {
    if solution.status != SolveStatus::Optimal {
        return Err(ConicError::DualExtraction(format!(
            "solution status {:?} is not optimal",
            solution.status
        )));
    }
    let n = program.num_vars();
    // Stationarity: c - A'y - z = 0 on every column.
    let mut at_y = vec![0.0; n];
    program.rows.tr_mul_vec(&solution.y, &mut at_y);
    let scale = 1.0 + program.objective.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut worst = 0.0f64;
    for c in 0..n {
        let r = program.objective[c] - at_y[c] - solution.z[c];
        worst = worst.max(r.abs());
    }
    if worst > tol * scale {
        return Err(ConicError::DualExtraction(format!(
            "stationarity residual {worst:.3e} exceeds {:.3e}",
            tol * scale
        )));
    }
    let lambda: Vec<f64> = map
        .linking_rows
        .iter()
        .map(|&r| {
            let v = solution.y[r];
            // Inequality multipliers must be nonnegative; clamp round-off.
            if v < 0.0 {
                v.max(0.0)
            } else {
                v
            }
        })
        .collect();
    for (&r, &v) in map.linking_rows.iter().zip(&lambda) {
        let raw = solution.y[r];
        if raw < -tol.sqrt() {
            return Err(ConicError::DualExtraction(format!(
                "linking row {r} multiplier {raw:.3e} is negative"
            )));
        }
        let _ = v;
    }
    let theta: Vec<f64> = map.equality_rows.iter().map(|&r| solution.y[r]).collect();
    // Cone duals read straight off z.
    let mut cone_duals = Vec::new();
    let mut offset = 0;
    for cone in &program.cones {
        let d = cone.dim();
        match cone {
            Cone::Soc(_) => {
                let mu = solution.z[offset];
                let sigma = solution.z[offset + 1..offset + d].to_vec();
                let norm = sigma.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm > mu + tol.sqrt() * scale {
                    return Err(ConicError::DualExtraction(format!(
                        "cone dual at {offset}: ||sigma|| = {norm:.3e} exceeds mu = {mu:.3e}"
                    )));
                }
                cone_duals.push((mu, sigma));
            }
            Cone::RotatedSoc(_) => {
                // Report in the rotated block's own self-dual coordinates.
                let a = solution.z[offset];
                let b = solution.z[offset + 1];
                let sigma = solution.z[offset + 2..offset + d].to_vec();
                cone_duals.push(((2.0 * a * b).max(0.0).sqrt(), sigma));
            }
            _ => {}
        }
        offset += d;
    }
    Ok(DualSolution {
        theta,
        lambda,
        cone_duals,
        value: solution.primal_objective,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csr_products() {
        let a = CsrMatrix::from_triplets(2, 3, [(0, 0, 1.0), (0, 2, 2.0), (1, 1, -1.0)]);
        let mut out = vec![0.0; 2];
        a.mul_vec(&[1.0, 2.0, 3.0], &mut out);
        assert_eq!(out, vec![7.0, -2.0]);
        let mut tr = vec![0.0; 3];
        a.tr_mul_vec(&[1.0, 1.0], &mut tr);
        assert_eq!(tr, vec![1.0, -1.0, 2.0]);
    }

    #[test]
    fn csr_merges_duplicates() {
        let a = CsrMatrix::from_triplets(1, 2, [(0, 0, 1.0), (0, 0, 2.0), (0, 1, -1.0)]);
        assert_eq!(a.nnz(), 2);
        let mut out = vec![0.0; 1];
        a.mul_vec(&[1.0, 0.0], &mut out);
        assert_eq!(out[0], 3.0);
    }

    #[test]
    fn layout_must_partition() {
        let prog = ConicProgram {
            objective: vec![0.0; 3],
            rows: CsrMatrix::from_triplets(0, 3, []),
            rhs: vec![],
            cones: vec![Cone::Nonneg(2)],
            names: vec![],
            structure: None,
        };
        assert!(prog.validate().is_err());
    }
}
