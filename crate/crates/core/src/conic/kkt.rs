//! Quasi-definite KKT systems
//!
//! ```text
//!     [ -(H + d I)   A'  ] [dx]   [ r1 ]
//!     [  A           d I ] [dy] = [ r2 ]
//! ```
//!
//! factored either densely or, when the program carries a block-arrow
//! structure (independent variable/row blocks coupled only through a shared
//! border), block by block with a Schur complement on the border. The border
//! path is what keeps extensive-form solves affordable: scenario blocks are
//! factored independently and only the first-stage border goes dense.

use nalgebra::{DMatrix, DVector};

use super::{Cone, ConicError, ConicProgram, CsrMatrix};

/// Assignment of variables and rows to independent blocks; `None` marks the
/// shared border. A row assigned to block `k` may touch block-`k` columns and
/// border columns only; border rows may touch border columns only.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BlockStructure {
    pub col_block: Vec<Option<u32>>,
    pub row_block: Vec<Option<u32>>,
    pub n_blocks: u32,
}

impl BlockStructure {
    pub fn validate(&self, program: &ConicProgram) -> Result<(), ConicError> {
        if self.col_block.len() != program.num_vars() || self.row_block.len() != program.num_rows()
        {
            return Err(ConicError::BadProgram(
                "block structure length mismatch".into(),
            ));
        }
        for (r, c, _) in program.rows.triplets() {
            match (self.row_block[r], self.col_block[c]) {
                (Some(rb), Some(cb)) if rb != cb => {
                    return Err(ConicError::BadProgram(format!(
                        "row {r} of block {rb} touches column {c} of block {cb}"
                    )))
                }
                (None, Some(_)) => {
                    return Err(ConicError::BadProgram(format!(
                        "border row {r} touches block column {c}"
                    )))
                }
                _ => {}
            }
        }
        // Second-order blocks carry a dense scaling, so they must not
        // straddle block boundaries; orthant scaling is diagonal and may.
        let mut offset = 0;
        for cone in &program.cones {
            let d = cone.dim();
            if matches!(cone, Cone::Soc(_) | Cone::RotatedSoc(_)) && d > 0 {
                let first = self.col_block[offset];
                if (offset..offset + d).any(|c| self.col_block[c] != first) {
                    return Err(ConicError::BadProgram(
                        "cone straddles block boundary".into(),
                    ));
                }
            }
            offset += d;
        }
        Ok(())
    }
}

/// Block-diagonal scaling `H` in cone-block form.
pub struct ScalingBlocks {
    /// Diagonal entries; nonzero only on nonnegative-orthant columns.
    pub diag: Vec<f64>,
    /// Dense symmetric blocks for each second-order cone: (column offset, matrix).
    pub soc: Vec<(usize, DMatrix<f64>)>,
}

impl ScalingBlocks {
    pub fn new(n: usize) -> Self {
        ScalingBlocks {
            diag: vec![0.0; n],
            soc: Vec::new(),
        }
    }

    /// `out += H v`.
    pub fn apply(&self, v: &[f64], out: &mut [f64]) {
        for (i, (&d, &vi)) in self.diag.iter().zip(v).enumerate() {
            if d != 0.0 {
                out[i] += d * vi;
            }
        }
        for (offset, block) in &self.soc {
            let q = block.nrows();
            for i in 0..q {
                let mut acc = 0.0;
                for j in 0..q {
                    acc += block[(i, j)] * v[offset + j];
                }
                out[offset + i] += acc;
            }
        }
    }
}

struct BlockData {
    /// Global ids: columns then `n + row`.
    members: Vec<usize>,
    /// Border positions this block couples to, sorted.
    touched: Vec<usize>,
    lu: Option<nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>>,
    /// `E_k`, block-local by touched-border, from the symmetric KKT matrix.
    coupling: DMatrix<f64>,
    /// `D_k^{-1} E_k`.
    gain: DMatrix<f64>,
}

/// Factorization context reused across interior-point iterations.
pub struct KktSolver {
    n: usize,
    m: usize,
    blocks: Vec<BlockData>,
    /// Global index (column id, or n + row id) -> (block id or BORDER, local position).
    place: Vec<(i64, usize)>,
    border: Vec<usize>,
    border_lu: Option<nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>>,
    pub static_reg: f64,
}

const BORDER: i64 = -1;

impl KktSolver {
    pub fn new(program: &ConicProgram, static_reg: f64) -> Self {
        let n = program.num_vars();
        let m = program.num_rows();
        let total = n + m;
        let structure = program.structure.clone().unwrap_or_default();
        let n_blocks = structure.n_blocks as usize;
        let mut place = vec![(BORDER, 0usize); total];
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); n_blocks];
        let mut border = Vec::new();
        if n_blocks > 0 {
            for c in 0..n {
                match structure.col_block[c] {
                    Some(k) => members[k as usize].push(c),
                    None => border.push(c),
                }
            }
            for r in 0..m {
                match structure.row_block[r] {
                    Some(k) => members[k as usize].push(n + r),
                    None => border.push(n + r),
                }
            }
        } else {
            border.extend(0..total);
        }
        for (bi, list) in members.iter().enumerate() {
            for (local, &g) in list.iter().enumerate() {
                place[g] = (bi as i64, local);
            }
        }
        for (local, &g) in border.iter().enumerate() {
            place[g] = (BORDER, local);
        }
        // Border positions each block actually couples to.
        let mut touched: Vec<Vec<usize>> = vec![Vec::new(); n_blocks];
        if n_blocks > 0 {
            for (r, c, _) in program.rows.triplets() {
                let rp = place[n + r];
                let cp = place[c];
                match (rp.0, cp.0) {
                    (k, BORDER) if k >= 0 => touched[k as usize].push(cp.1),
                    (BORDER, k) if k >= 0 => touched[k as usize].push(rp.1),
                    _ => {}
                }
            }
        }
        let blocks = members
            .into_iter()
            .zip(touched)
            .map(|(members, mut touched)| {
                touched.sort_unstable();
                touched.dedup();
                BlockData {
                    members,
                    touched,
                    lu: None,
                    coupling: DMatrix::zeros(0, 0),
                    gain: DMatrix::zeros(0, 0),
                }
            })
            .collect();
        KktSolver {
            n,
            m,
            blocks,
            place,
            border,
            border_lu: None,
            static_reg,
        }
    }

    pub fn border_dim(&self) -> usize {
        self.border.len()
    }

    /// Assemble and factor the regularized KKT matrix for the given scaling.
    /// Returns false when a factorization degenerates; the caller is expected
    /// to retry with stronger regularization.
    pub fn factor(&mut self, a: &CsrMatrix, h: &ScalingBlocks) -> bool {
        let n = self.n;
        let delta = self.static_reg;
        let nb = self.border.len();
        let place = &self.place;
        let mut block_mats: Vec<DMatrix<f64>> = self
            .blocks
            .iter()
            .map(|b| DMatrix::zeros(b.members.len(), b.members.len()))
            .collect();
        let mut couplings: Vec<DMatrix<f64>> = self
            .blocks
            .iter()
            .map(|b| DMatrix::zeros(b.members.len(), b.touched.len()))
            .collect();
        let mut border_mat = DMatrix::zeros(nb, nb);
        // Adds the symmetric pair M[g1,g2] and M[g2,g1]; for couplings only
        // the block-by-border side is stored, the transpose is implied.
        let blocks = &self.blocks;
        let mut put_sym = |g1: usize, g2: usize, v: f64| {
            let (b1, l1) = place[g1];
            let (b2, l2) = place[g2];
            match (b1, b2) {
                (BORDER, BORDER) => {
                    border_mat[(l1, l2)] += v;
                    if g1 != g2 {
                        border_mat[(l2, l1)] += v;
                    }
                }
                (k1, k2) if k1 == k2 => {
                    let mat = &mut block_mats[k1 as usize];
                    mat[(l1, l2)] += v;
                    if g1 != g2 {
                        mat[(l2, l1)] += v;
                    }
                }
                (k, BORDER) => {
                    let t = blocks[k as usize]
                        .touched
                        .binary_search(&l2)
                        .expect("touched set covers coupling");
                    couplings[k as usize][(l1, t)] += v;
                }
                (BORDER, k) => {
                    let t = blocks[k as usize]
                        .touched
                        .binary_search(&l1)
                        .expect("touched set covers coupling");
                    couplings[k as usize][(l2, t)] += v;
                }
                _ => unreachable!("cross-block coupling rejected at validation"),
            }
        };
        for c in 0..n {
            put_sym(c, c, -delta - h.diag[c]);
        }
        for (offset, block) in &h.soc {
            let q = block.nrows();
            for i in 0..q {
                put_sym(offset + i, offset + i, -block[(i, i)]);
                for j in i + 1..q {
                    if block[(i, j)] != 0.0 {
                        put_sym(offset + i, offset + j, -block[(i, j)]);
                    }
                }
            }
        }
        for r in 0..self.m {
            put_sym(n + r, n + r, delta);
        }
        for (r, c, v) in a.triplets() {
            put_sym(n + r, c, v);
        }
        for (bi, mat) in block_mats.into_iter().enumerate() {
            let coupling = std::mem::replace(&mut couplings[bi], DMatrix::zeros(0, 0));
            let lu = mat.lu();
            let mut gain = coupling.clone();
            if !lu.solve_mut(&mut gain) || gain.iter().any(|v| !v.is_finite()) {
                return false;
            }
            let update = coupling.transpose() * &gain;
            let block = &mut self.blocks[bi];
            for (ti, &gi) in block.touched.iter().enumerate() {
                for (tj, &gj) in block.touched.iter().enumerate() {
                    border_mat[(gi, gj)] -= update[(ti, tj)];
                }
            }
            block.lu = Some(lu);
            block.coupling = coupling;
            block.gain = gain;
        }
        self.border_lu = Some(border_mat.lu());
        true
    }

    /// Solve the factored system for `[rhs_x; rhs_y]`, writing `dx, dy`.
    /// Returns false if the backsolve degenerates.
    pub fn solve(&self, rhs_x: &[f64], rhs_y: &[f64], dx: &mut [f64], dy: &mut [f64]) -> bool {
        let n = self.n;
        let gather = |g: usize| -> f64 {
            if g < n {
                rhs_x[g]
            } else {
                rhs_y[g - n]
            }
        };
        let mut block_u: Vec<DVector<f64>> = Vec::with_capacity(self.blocks.len());
        let mut border_rhs =
            DVector::from_iterator(self.border.len(), self.border.iter().map(|&g| gather(g)));
        for block in &self.blocks {
            let rk = DVector::from_iterator(
                block.members.len(),
                block.members.iter().map(|&g| gather(g)),
            );
            let u = match block.lu.as_ref().expect("factored").solve(&rk) {
                Some(u) => u,
                None => return false,
            };
            let et_u = block.coupling.transpose() * &u;
            for (ti, &gi) in block.touched.iter().enumerate() {
                border_rhs[gi] -= et_u[ti];
            }
            block_u.push(u);
        }
        let db = if self.border.is_empty() {
            DVector::zeros(0)
        } else {
            match self.border_lu.as_ref().expect("factored").solve(&border_rhs) {
                Some(d) => d,
                None => return false,
            }
        };
        if db.iter().any(|v| !v.is_finite()) {
            return false;
        }
        let mut scatter = |g: usize, v: f64| {
            if g < n {
                dx[g] = v;
            } else {
                dy[g - n] = v;
            }
        };
        for (&g, &v) in self.border.iter().zip(db.iter()) {
            scatter(g, v);
        }
        for (block, u) in self.blocks.iter().zip(&block_u) {
            let mut dk = u.clone();
            if !block.touched.is_empty() {
                let sel = DVector::from_iterator(
                    block.touched.len(),
                    block.touched.iter().map(|&t| db[t]),
                );
                dk -= &block.gain * sel;
            }
            for (local, &g) in block.members.iter().enumerate() {
                scatter(g, dk[local]);
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_structured_program(seed: u64) -> ConicProgram {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
        // Two blocks of 3 columns / 2 rows each, a 2-column border and one
        // border row.
        let n = 8;
        let m = 5;
        let mut triplets = Vec::new();
        for blk in 0..2usize {
            for r in 0..2 {
                let row = blk * 2 + r;
                for c in 0..3 {
                    triplets.push((row, blk * 3 + c, rng.gen_range(-1.0..1.0)));
                }
                triplets.push((row, 6 + blk, rng.gen_range(-1.0..1.0)));
            }
        }
        for c in 6..8 {
            triplets.push((4, c, rng.gen_range(-1.0..1.0)));
        }
        let col_block = (0..n)
            .map(|c| {
                if c < 3 {
                    Some(0)
                } else if c < 6 {
                    Some(1)
                } else {
                    None
                }
            })
            .collect();
        let row_block = (0..m)
            .map(|r| {
                if r < 2 {
                    Some(0)
                } else if r < 4 {
                    Some(1)
                } else {
                    None
                }
            })
            .collect();
        ConicProgram {
            objective: vec![0.0; n],
            rows: CsrMatrix::from_triplets(m, n, triplets),
            rhs: vec![0.0; m],
            cones: vec![Cone::Nonneg(n)],
            names: vec![],
            structure: Some(BlockStructure {
                col_block,
                row_block,
                n_blocks: 2,
            }),
        }
    }

    fn dense_reference(
        program: &ConicProgram,
        h: &ScalingBlocks,
        delta: f64,
        rhs: &DVector<f64>,
    ) -> DVector<f64> {
        let n = program.num_vars();
        let m = program.num_rows();
        let mut mat = DMatrix::zeros(n + m, n + m);
        for c in 0..n {
            mat[(c, c)] = -delta - h.diag[c];
        }
        for r in 0..m {
            mat[(n + r, n + r)] = delta;
        }
        for (r, c, v) in program.rows.triplets() {
            mat[(n + r, c)] += v;
            mat[(c, n + r)] += v;
        }
        mat.lu().solve(rhs).unwrap()
    }

    #[test]
    fn blocked_matches_dense() {
        for seed in 0..5 {
            let program = random_structured_program(seed);
            program.validate().unwrap();
            let n = program.num_vars();
            let m = program.num_rows();
            let mut h = ScalingBlocks::new(n);
            for (i, d) in h.diag.iter_mut().enumerate() {
                *d = 0.5 + (i as f64) * 0.25;
            }
            let mut kkt = KktSolver::new(&program, 1e-9);
            assert!(kkt.factor(&program.rows, &h));
            let rhs_x: Vec<f64> = (0..n).map(|i| (i as f64) - 3.0).collect();
            let rhs_y: Vec<f64> = (0..m).map(|i| 1.0 + i as f64).collect();
            let mut dx = vec![0.0; n];
            let mut dy = vec![0.0; m];
            assert!(kkt.solve(&rhs_x, &rhs_y, &mut dx, &mut dy));
            let full = DVector::from_iterator(n + m, rhs_x.iter().chain(&rhs_y).copied());
            let reference = dense_reference(&program, &h, 1e-9, &full);
            for i in 0..n {
                assert!((dx[i] - reference[i]).abs() < 1e-8, "dx[{i}]");
            }
            for i in 0..m {
                assert!((dy[i] - reference[n + i]).abs() < 1e-8, "dy[{i}]");
            }
        }
    }

    #[test]
    fn structure_validation_rejects_cross_block_rows() {
        let mut program = random_structured_program(1);
        let mut triplets: Vec<_> = program.rows.triplets().collect();
        triplets.push((0, 4, 1.0));
        program.rows = CsrMatrix::from_triplets(5, 8, triplets);
        assert!(program.validate().is_err());
    }
}
