//! Incremental construction of standard-form cone programs.
//!
//! Model layers declare named variables and rows in whatever order is
//! convenient; the builder inserts slacks for inequalities, coalesces the
//! cone layout and records where each row came from so duals can be mapped
//! back.

use super::kkt::BlockStructure;
use super::{Cone, ConicProgram, CsrMatrix, DualMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Free,
    Nonneg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowSense {
    Eq,
    /// `coeffs' v >= rhs`, lowered with a nonnegative slack.
    Ge,
    /// `coeffs' v <= rhs`, lowered with a nonnegative slack.
    Le,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RowId(pub usize);

#[derive(Debug, Clone)]
struct VarDecl {
    name: String,
    kind: VarKind,
    obj: f64,
    block: Option<u32>,
    /// Start of a second-order block this variable opens, with its length.
    opens_cone: Option<(Cone, usize)>,
}

#[derive(Debug, Clone)]
struct RowDecl {
    tag: &'static str,
    sense: RowSense,
    coeffs: Vec<(VarId, f64)>,
    rhs: f64,
    block: Option<u32>,
}

/// Where a lowered row/column came from, for dual mapping and dumps.
#[derive(Debug, Clone)]
pub struct BuiltProgram {
    pub program: ConicProgram,
    /// Row tags in declaration order (rows are not permuted).
    pub row_tags: Vec<&'static str>,
    pub row_senses: Vec<RowSense>,
    /// Original right-hand sides before sense normalization.
    pub row_rhs: Vec<f64>,
    /// Sparse first-declared coefficients per row (before slacks).
    pub row_coeffs: Vec<Vec<(VarId, f64)>>,
    /// Final column of each declared variable.
    pub var_column: Vec<usize>,
    /// Declared variable names in declaration order.
    pub var_names: Vec<String>,
}

impl BuiltProgram {
    pub fn column(&self, var: VarId) -> usize {
        self.var_column[var.0]
    }

    /// Dual map over all rows: equalities and inequalities by declared sense.
    pub fn dual_map(&self) -> DualMap {
        let mut map = DualMap::default();
        for (r, sense) in self.row_senses.iter().enumerate() {
            match sense {
                RowSense::Eq => map.equality_rows.push(r),
                _ => map.linking_rows.push(r),
            }
        }
        map
    }

    /// Multiplier of a declared row normalized to the `>=` convention:
    /// nonnegative for binding `>=` rows, nonpositive for `<=` rows mapped to
    /// their natural sign.
    pub fn normalized_dual(&self, row: RowId, y: &[f64]) -> f64 {
        match self.row_senses[row.0] {
            RowSense::Le => -y[row.0],
            _ => y[row.0],
        }
    }
}

#[derive(Debug, Default)]
pub struct ProgramBuilder {
    vars: Vec<VarDecl>,
    rows: Vec<RowDecl>,
    n_blocks: u32,
}

impl ProgramBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn add_var(&mut self, name: impl Into<String>, kind: VarKind, obj: f64) -> VarId {
        self.vars.push(VarDecl {
            name: name.into(),
            kind,
            obj,
            block: None,
            opens_cone: None,
        });
        VarId(self.vars.len() - 1)
    }

    /// Declare a contiguous rotated second-order block
    /// `2 v0 v1 >= v2^2 + ...`; returns the member ids in order.
    pub fn add_rotated_block(&mut self, names: Vec<String>) -> Vec<VarId> {
        let dim = names.len();
        assert!(dim >= 3, "rotated block needs dimension >= 3");
        let first = self.vars.len();
        for (i, name) in names.into_iter().enumerate() {
            self.vars.push(VarDecl {
                name,
                kind: VarKind::Free,
                obj: 0.0,
                block: None,
                opens_cone: if i == 0 {
                    Some((Cone::RotatedSoc(dim), dim))
                } else {
                    None
                },
            });
        }
        (first..first + dim).map(VarId).collect()
    }

    /// Declare a contiguous standard second-order block `v0 >= ||v[1..]||`.
    pub fn add_soc_block(&mut self, names: Vec<String>) -> Vec<VarId> {
        let dim = names.len();
        assert!(dim >= 2, "second-order block needs dimension >= 2");
        let first = self.vars.len();
        for (i, name) in names.into_iter().enumerate() {
            self.vars.push(VarDecl {
                name,
                kind: VarKind::Free,
                obj: 0.0,
                block: None,
                opens_cone: if i == 0 {
                    Some((Cone::Soc(dim), dim))
                } else {
                    None
                },
            });
        }
        (first..first + dim).map(VarId).collect()
    }

    pub fn set_objective(&mut self, var: VarId, coeff: f64) {
        self.vars[var.0].obj = coeff;
    }

    pub fn add_objective(&mut self, var: VarId, coeff: f64) {
        self.vars[var.0].obj += coeff;
    }

    pub fn objective_coeff(&self, var: VarId) -> f64 {
        self.vars[var.0].obj
    }

    pub fn set_var_block(&mut self, var: VarId, block: u32) {
        self.vars[var.0].block = Some(block);
    }

    pub fn add_row(
        &mut self,
        tag: &'static str,
        sense: RowSense,
        coeffs: Vec<(VarId, f64)>,
        rhs: f64,
    ) -> RowId {
        self.rows.push(RowDecl {
            tag,
            sense,
            coeffs,
            rhs,
            block: None,
        });
        RowId(self.rows.len() - 1)
    }

    pub fn add_row_in_block(
        &mut self,
        tag: &'static str,
        sense: RowSense,
        coeffs: Vec<(VarId, f64)>,
        rhs: f64,
        block: u32,
    ) -> RowId {
        let id = self.add_row(tag, sense, coeffs, rhs);
        self.rows[id.0].block = Some(block);
        id
    }

    pub fn declare_blocks(&mut self, count: u32) {
        self.n_blocks = self.n_blocks.max(count);
    }

    /// Lower to standard form. Rows keep declaration order; inequality rows
    /// gain trailing slack columns placed in the block of their row.
    pub fn finish(mut self) -> BuiltProgram {
        // Slack variables appended after all declared variables.
        let declared = self.vars.len();
        let mut slack_of_row: Vec<Option<usize>> = vec![None; self.rows.len()];
        for (r, row) in self.rows.iter().enumerate() {
            if row.sense != RowSense::Eq {
                let id = self.vars.len();
                self.vars.push(VarDecl {
                    name: format!("slack.{}", r),
                    kind: VarKind::Nonneg,
                    obj: 0.0,
                    block: row.block,
                    opens_cone: None,
                });
                slack_of_row[r] = Some(id);
            }
        }
        // Column order: declaration order already keeps cone blocks
        // contiguous; scalar kinds coalesce into runs at the end.
        let n = self.vars.len();
        let var_column: Vec<usize> = (0..n).collect();
        let mut objective = vec![0.0; n];
        let mut names = Vec::with_capacity(n);
        for (i, var) in self.vars.iter().enumerate() {
            objective[i] = var.obj;
            names.push(var.name.clone());
        }
        let mut cones: Vec<Cone> = Vec::new();
        let mut i = 0;
        while i < n {
            if let Some((cone, dim)) = self.vars[i].opens_cone {
                cones.push(cone);
                i += dim;
                continue;
            }
            let kind = self.vars[i].kind;
            let mut j = i + 1;
            while j < n && self.vars[j].opens_cone.is_none() && self.vars[j].kind == kind {
                j += 1;
            }
            cones.push(match kind {
                VarKind::Free => Cone::Free(j - i),
                VarKind::Nonneg => Cone::Nonneg(j - i),
            });
            i = j;
        }
        let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
        let mut rhs = vec![0.0; self.rows.len()];
        let mut row_tags = Vec::with_capacity(self.rows.len());
        let mut row_senses = Vec::with_capacity(self.rows.len());
        let mut row_rhs = Vec::with_capacity(self.rows.len());
        let mut row_coeffs = Vec::with_capacity(self.rows.len());
        for (r, row) in self.rows.iter().enumerate() {
            for &(v, coeff) in &row.coeffs {
                triplets.push((r, v.0, coeff));
            }
            match row.sense {
                RowSense::Eq => {}
                RowSense::Ge => triplets.push((r, slack_of_row[r].unwrap(), -1.0)),
                RowSense::Le => triplets.push((r, slack_of_row[r].unwrap(), 1.0)),
            }
            rhs[r] = row.rhs;
            row_tags.push(row.tag);
            row_senses.push(row.sense);
            row_rhs.push(row.rhs);
            row_coeffs.push(row.coeffs.clone());
        }
        let structure = if self.n_blocks > 0 {
            Some(BlockStructure {
                col_block: self.vars.iter().map(|v| v.block).collect(),
                row_block: self.rows.iter().map(|r| r.block).collect(),
                n_blocks: self.n_blocks,
            })
        } else {
            None
        };
        let program = ConicProgram {
            objective,
            rows: CsrMatrix::from_triplets(rhs.len(), n, triplets),
            rhs,
            cones,
            names,
            structure,
        };
        BuiltProgram {
            program,
            row_tags,
            row_senses,
            row_rhs,
            row_coeffs,
            var_column,
            var_names: self.vars[..declared]
                .iter()
                .map(|v| v.name.clone())
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conic::{solve, SolveStatus};

    #[test]
    fn builder_lowered_lp_solves() {
        let mut b = ProgramBuilder::new();
        let x = b.add_var("x", VarKind::Nonneg, 1.0);
        let y = b.add_var("y", VarKind::Nonneg, 1.0);
        b.add_row("cover", RowSense::Ge, vec![(x, 1.0), (y, 1.0)], 2.0);
        b.add_row("cap", RowSense::Le, vec![(x, 1.0)], 0.5);
        let built = b.finish();
        built.program.validate().unwrap();
        let sol = solve(&built.program, 1e-8, 200).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.primal_objective - 2.0).abs() < 1e-6);
        assert!(sol.x[built.column(x)] <= 0.5 + 1e-7);
        // The >= row is binding: normalized dual is nonnegative.
        assert!(built.normalized_dual(RowId(0), &sol.y) >= -1e-8);
    }

    #[test]
    fn builder_keeps_cone_blocks_contiguous() {
        let mut b = ProgramBuilder::new();
        let _x = b.add_var("x", VarKind::Free, 0.0);
        let blk = b.add_rotated_block(vec!["a".into(), "b".into(), "c".into()]);
        let _s = b.add_var("s", VarKind::Nonneg, 1.0);
        b.add_row("fix", RowSense::Eq, vec![(blk[0], 1.0)], 1.0);
        let built = b.finish();
        assert!(built.program.validate().is_ok());
        assert_eq!(
            built.program.cones,
            vec![
                Cone::Free(1),
                Cone::RotatedSoc(3),
                Cone::Nonneg(1),
            ]
        );
    }
}
