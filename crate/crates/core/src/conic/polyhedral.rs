//! Polyhedral outer approximation of second-order cones via the tower-of-
//! variables construction: each cone is replaced by a logarithmic number of
//! planar rotation stages, so any point of the polyhedron violates the cone
//! by at most a factor `1 + accuracy`. Produces a pure LP; row duals of the
//! original rows carry over one-to-one.

use std::f64::consts::PI;

use super::kkt::BlockStructure;
use super::rotated::rotated_to_soc;
use super::{Cone, ConicProgram, CsrMatrix};

#[derive(Debug, Clone)]
pub struct PolyhedralLp {
    pub program: ConicProgram,
    /// Rows `0..original_rows` correspond to the input program's rows.
    pub original_rows: usize,
    /// Columns `0..original_cols` correspond to the input program's columns.
    pub original_cols: usize,
    pub accuracy: f64,
    /// Tower levels used per planar stage.
    pub levels: usize,
}

/// Replace every second-order cone by its tower polyhedron with the given
/// accuracy. Rotated cones are first rewritten as standard ones (an exact,
/// variable-count-preserving step).
pub fn polyhedral_approximation(program: &ConicProgram, accuracy: f64) -> PolyhedralLp {
    assert!(
        accuracy > 0.0 && accuracy < 0.5,
        "accuracy must lie in (0, 0.5)"
    );
    let program = if program
        .cones
        .iter()
        .any(|c| matches!(c, Cone::RotatedSoc(_)))
    {
        rotated_to_soc(program).program
    } else {
        program.clone()
    };
    let n0 = program.num_vars();
    let m0 = program.num_rows();
    // Deepest chain of planar stages any coordinate passes through.
    let max_depth = program
        .cones
        .iter()
        .filter_map(|c| match c {
            Cone::Soc(d) if *d >= 3 => Some(((*d - 1) as f64).log2().ceil() as u32),
            Cone::Soc(_) => Some(1),
            _ => None,
        })
        .max()
        .unwrap_or(1)
        .max(1);
    let per_stage = (1.0 + accuracy).powf(1.0 / max_depth as f64) - 1.0;
    let theta_max = (1.0 / (1.0 + per_stage)).acos();
    let levels = ((PI / theta_max).log2().ceil() as usize).saturating_sub(1).max(1);
    let mut build = LpBuild {
        objective: program.objective.clone(),
        triplets: program.rows.triplets().collect(),
        rhs: program.rhs.clone(),
        names: if program.names.is_empty() {
            (0..n0).map(|c| format!("x{c}")).collect()
        } else {
            program.names.clone()
        },
        kinds: Vec::new(),
        col_block: Vec::new(),
        row_block: vec![None; m0],
        next_block: 0,
    };
    // Original columns: cone members become explicit-sign columns.
    let mut offset = 0;
    for cone in &program.cones {
        let d = cone.dim();
        match cone {
            Cone::Free(_) => build.kinds.extend(std::iter::repeat(false).take(d)),
            Cone::Nonneg(_) => build.kinds.extend(std::iter::repeat(true).take(d)),
            Cone::Soc(_) => {
                // The head is nonnegative inside the cone; members are free.
                build.kinds.push(true);
                build.kinds.extend(std::iter::repeat(false).take(d - 1));
            }
            Cone::RotatedSoc(_) => unreachable!("rewritten above"),
        }
        let _ = offset;
        offset += d;
    }
    build.col_block = vec![None; n0];
    // Emit towers.
    let mut offset = 0;
    for cone in &program.cones {
        let d = cone.dim();
        if let Cone::Soc(_) = cone {
            let block = build.fresh_block();
            let head = offset;
            let members: Vec<usize> = (offset + 1..offset + d).collect();
            build.bound_norm(&members, head, levels, block);
        }
        offset += d;
    }
    let n = build.kinds.len();
    let m = build.rhs.len();
    // Coalesce kinds into cone runs.
    let mut cones = Vec::new();
    let mut run_start = 0;
    while run_start < n {
        let kind = build.kinds[run_start];
        let mut run_end = run_start + 1;
        while run_end < n && build.kinds[run_end] == kind {
            run_end += 1;
        }
        cones.push(if kind {
            Cone::Nonneg(run_end - run_start)
        } else {
            Cone::Free(run_end - run_start)
        });
        run_start = run_end;
    }
    let structure = if build.next_block > 0 {
        Some(BlockStructure {
            col_block: build.col_block.clone(),
            row_block: build.row_block.clone(),
            n_blocks: build.next_block,
        })
    } else {
        None
    };
    PolyhedralLp {
        program: ConicProgram {
            objective: build.objective,
            rows: CsrMatrix::from_triplets(m, n, build.triplets),
            rhs: build.rhs,
            cones,
            names: build.names,
            structure,
        },
        original_rows: m0,
        original_cols: n0,
        accuracy,
        levels,
    }
}

struct LpBuild {
    objective: Vec<f64>,
    triplets: Vec<(usize, usize, f64)>,
    rhs: Vec<f64>,
    names: Vec<String>,
    /// true = nonnegative, false = free.
    kinds: Vec<bool>,
    col_block: Vec<Option<u32>>,
    row_block: Vec<Option<u32>>,
    next_block: u32,
}

impl LpBuild {
    fn fresh_block(&mut self) -> u32 {
        self.next_block += 1;
        self.next_block - 1
    }

    fn add_col(&mut self, name: String, nonneg: bool, block: u32) -> usize {
        let id = self.kinds.len();
        self.kinds.push(nonneg);
        self.objective.push(0.0);
        self.names.push(name);
        self.col_block.push(Some(block));
        id
    }

    fn add_row(&mut self, coeffs: &[(usize, f64)], rhs: f64, block: u32) -> usize {
        let r = self.rhs.len();
        for &(c, v) in coeffs {
            self.triplets.push((r, c, v));
        }
        self.rhs.push(rhs);
        self.row_block.push(Some(block));
        r
    }

    /// `out >= |x|` via two slacked rows.
    fn abs_bound(&mut self, x: usize, out: usize, block: u32) {
        let s1 = self.add_col(format!("abs+{x}"), true, block);
        self.add_row(&[(out, 1.0), (x, -1.0), (s1, -1.0)], 0.0, block);
        let s2 = self.add_col(format!("abs-{x}"), true, block);
        self.add_row(&[(out, 1.0), (x, 1.0), (s2, -1.0)], 0.0, block);
    }

    /// Tower stage bounding `||(p, q)||` by `bound` within the stage factor.
    fn planar_stage(&mut self, p: usize, q: usize, bound: usize, levels: usize, block: u32) {
        let mut xi = self.add_col(format!("t{block}.xi0"), true, block);
        let mut eta = self.add_col(format!("t{block}.eta0"), true, block);
        self.abs_bound(p, xi, block);
        self.abs_bound(q, eta, block);
        for j in 1..=levels {
            let theta = PI / 2f64.powi(j as i32 + 1);
            let (sin, cos) = theta.sin_cos();
            let xi_next = self.add_col(format!("t{block}.xi{j}"), true, block);
            let eta_next = self.add_col(format!("t{block}.eta{j}"), true, block);
            self.add_row(
                &[(xi_next, 1.0), (xi, -cos), (eta, -sin)],
                0.0,
                block,
            );
            let s1 = self.add_col(format!("t{block}.r{j}+"), true, block);
            self.add_row(
                &[(eta_next, 1.0), (xi, sin), (eta, -cos), (s1, -1.0)],
                0.0,
                block,
            );
            let s2 = self.add_col(format!("t{block}.r{j}-"), true, block);
            self.add_row(
                &[(eta_next, 1.0), (xi, -sin), (eta, cos), (s2, -1.0)],
                0.0,
                block,
            );
            xi = xi_next;
            eta = eta_next;
        }
        let theta_last = PI / 2f64.powi(levels as i32 + 1);
        let s_top = self.add_col(format!("t{block}.cap"), true, block);
        self.add_row(&[(bound, 1.0), (xi, -1.0), (s_top, -1.0)], 0.0, block);
        let s_tan = self.add_col(format!("t{block}.tan"), true, block);
        self.add_row(
            &[(xi, theta_last.tan()), (eta, -1.0), (s_tan, -1.0)],
            0.0,
            block,
        );
    }

    /// Bound `||members|| <= head` through a binary reduction tree.
    fn bound_norm(&mut self, members: &[usize], head: usize, levels: usize, block: u32) {
        match members.len() {
            0 => {}
            1 => self.abs_bound(members[0], head, block),
            2 => self.planar_stage(members[0], members[1], head, levels, block),
            _ => {
                let mut current: Vec<usize> = members.to_vec();
                while current.len() > 2 {
                    let mut next = Vec::with_capacity(current.len() / 2 + 1);
                    let mut it = current.chunks(2);
                    for pair in &mut it {
                        if pair.len() == 2 {
                            let mid = self.add_col(format!("t{block}.u{}", self.kinds.len()), true, block);
                            self.planar_stage(pair[0], pair[1], mid, levels, block);
                            next.push(mid);
                        } else {
                            next.push(pair[0]);
                        }
                    }
                    current = next;
                }
                self.planar_stage(current[0], current[1], head, levels, block);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conic::{solve, SolveStatus};

    fn norm_min_program(a: &[f64]) -> ConicProgram {
        let d = a.len();
        let mut objective = vec![0.0; d + 1];
        objective[0] = 1.0;
        let triplets: Vec<_> = (0..d).map(|i| (i, i + 1, 1.0)).collect();
        ConicProgram {
            objective,
            rows: CsrMatrix::from_triplets(d, d + 1, triplets),
            rhs: a.to_vec(),
            cones: vec![Cone::Soc(d + 1)],
            names: vec![],
            structure: None,
        }
    }

    #[test]
    fn lp_lower_bounds_socp_within_accuracy() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(21);
        for _ in 0..8 {
            let d = rng.gen_range(2..4usize);
            let a: Vec<f64> = (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let exact = a.iter().map(|v| v * v).sum::<f64>().sqrt();
            let accuracy = 1e-3;
            let lp = polyhedral_approximation(&norm_min_program(&a), accuracy);
            lp.program.validate().unwrap();
            let sol = solve(&lp.program, 1e-8, 300).unwrap();
            assert_eq!(sol.status, SolveStatus::Optimal);
            // Outer approximation: LP optimum <= SOCP optimum <= (1+nu) LP.
            assert!(
                sol.primal_objective <= exact + 1e-7,
                "lp {} above exact {exact}",
                sol.primal_objective
            );
            assert!(
                exact <= (1.0 + accuracy) * sol.primal_objective + 1e-7,
                "lp {} too loose for {exact}",
                sol.primal_objective
            );
        }
    }

    #[test]
    fn size_grows_logarithmically_as_accuracy_shrinks() {
        let a = [1.0, 2.0];
        let coarse = polyhedral_approximation(&norm_min_program(&a), 1e-2);
        let fine = polyhedral_approximation(&norm_min_program(&a), 1e-3);
        assert!(fine.levels > coarse.levels);
        assert!(fine.levels <= coarse.levels + 3, "logarithmic growth");
        let exact = 5.0f64.sqrt();
        let sol = solve(&fine.program, 1e-8, 300).unwrap();
        let err_fine = exact - sol.primal_objective;
        let sol = solve(&coarse.program, 1e-8, 300).unwrap();
        let err_coarse = exact - sol.primal_objective;
        assert!(err_fine >= -1e-7 && err_coarse >= -1e-7);
        assert!(err_fine <= err_coarse + 1e-9, "finer accuracy tightens");
    }

    #[test]
    fn axis_point_feasible_in_both() {
        // (x, 0, 0) with x >= 0 lies in the cone and in the polyhedron, so
        // the LP optimum sits within the approximation band around 3.
        let accuracy = 1e-3;
        let lp = polyhedral_approximation(&norm_min_program(&[3.0, 0.0]), accuracy);
        let sol = solve(&lp.program, 1e-8, 300).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!(sol.primal_objective <= 3.0 + 1e-7);
        assert!(sol.primal_objective >= 3.0 / (1.0 + accuracy) - 1e-7);
    }
}
