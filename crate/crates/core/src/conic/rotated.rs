//! Rewrites rotated second-order cones `2ab >= ||c||^2, a,b >= 0` as standard
//! cones `||(sqrt(2) c, a-b)|| <= a+b` through the orthogonal change of
//! variables `t = a+b, u = a-b, c' = sqrt(2) c`. Objective values and
//! feasibility are preserved exactly; duals map back through the transpose
//! inverse of the substitution.

use super::{Cone, ConicProgram, ConicSolution, CsrMatrix};

#[derive(Debug, Clone, Copy)]
struct RotBlock {
    offset: usize,
    dim: usize,
}

#[derive(Debug, Clone)]
pub struct RotatedConversion {
    pub program: ConicProgram,
    blocks: Vec<RotBlock>,
}

/// Convert every rotated cone into a standard second-order cone.
pub fn rotated_to_soc(program: &ConicProgram) -> RotatedConversion {
    let n = program.num_vars();
    let mut blocks = Vec::new();
    let mut cones = Vec::with_capacity(program.cones.len());
    let mut offset = 0;
    for cone in &program.cones {
        match *cone {
            Cone::RotatedSoc(d) => {
                blocks.push(RotBlock { offset, dim: d });
                cones.push(Cone::Soc(d));
            }
            other => cones.push(other),
        }
        offset += cone.dim();
    }
    // Column maps: coefficient alpha on (a, b, c_i) becomes
    // ((alpha_a + alpha_b)/2, (alpha_a - alpha_b)/2, alpha_c/sqrt(2)).
    let inv_sqrt2 = 1.0 / 2.0f64.sqrt();
    let mut objective = program.objective.clone();
    for blk in &blocks {
        let (a, b) = (blk.offset, blk.offset + 1);
        let (ca, cb) = (objective[a], objective[b]);
        objective[a] = 0.5 * (ca + cb);
        objective[b] = 0.5 * (ca - cb);
        for i in blk.offset + 2..blk.offset + blk.dim {
            objective[i] *= inv_sqrt2;
        }
    }
    let mut triplets: Vec<(usize, usize, f64)> = Vec::with_capacity(program.rows.nnz() * 2);
    // Offsets inside rotated blocks need pairwise treatment; gather per row.
    let col_to_block: Vec<Option<usize>> = {
        let mut map = vec![None; n];
        for (bi, blk) in blocks.iter().enumerate() {
            for c in blk.offset..blk.offset + blk.dim {
                map[c] = Some(bi);
            }
        }
        map
    };
    for (r, c, v) in program.rows.triplets() {
        match col_to_block[c] {
            None => triplets.push((r, c, v)),
            Some(bi) => {
                let blk = blocks[bi];
                if c == blk.offset {
                    // coefficient on a
                    triplets.push((r, blk.offset, 0.5 * v));
                    triplets.push((r, blk.offset + 1, 0.5 * v));
                } else if c == blk.offset + 1 {
                    // coefficient on b
                    triplets.push((r, blk.offset, 0.5 * v));
                    triplets.push((r, blk.offset + 1, -0.5 * v));
                } else {
                    triplets.push((r, c, v * inv_sqrt2));
                }
            }
        }
    }
    let mut names = program.names.clone();
    if !names.is_empty() {
        for blk in &blocks {
            let a = names[blk.offset].clone();
            let b = names[blk.offset + 1].clone();
            names[blk.offset] = format!("{a}+{b}");
            names[blk.offset + 1] = format!("{a}-{b}");
        }
    }
    RotatedConversion {
        program: ConicProgram {
            objective,
            rows: CsrMatrix::from_triplets(program.num_rows(), n, triplets),
            rhs: program.rhs.clone(),
            cones,
            names,
            structure: program.structure.clone(),
        },
        blocks,
    }
}

impl RotatedConversion {
    /// Map a converted primal point back to the original variables.
    pub fn primal_back(&self, x: &[f64]) -> Vec<f64> {
        let mut out = x.to_vec();
        let inv_sqrt2 = 1.0 / 2.0f64.sqrt();
        for blk in &self.blocks {
            let t = x[blk.offset];
            let u = x[blk.offset + 1];
            out[blk.offset] = 0.5 * (t + u);
            out[blk.offset + 1] = 0.5 * (t - u);
            for i in blk.offset + 2..blk.offset + blk.dim {
                out[i] = x[i] * inv_sqrt2;
            }
        }
        out
    }

    /// Map converted cone duals back to the original variables.
    pub fn dual_back(&self, z: &[f64]) -> Vec<f64> {
        let mut out = z.to_vec();
        let sqrt2 = 2.0f64.sqrt();
        for blk in &self.blocks {
            let zt = z[blk.offset];
            let zu = z[blk.offset + 1];
            out[blk.offset] = zt + zu;
            out[blk.offset + 1] = zt - zu;
            for i in blk.offset + 2..blk.offset + blk.dim {
                out[i] = z[i] * sqrt2;
            }
        }
        out
    }

    pub(crate) fn solution_back(
        &self,
        original: &ConicProgram,
        solution: ConicSolution,
    ) -> ConicSolution {
        let x = self.primal_back(&solution.x);
        let z = self.dual_back(&solution.z);
        let pobj: f64 = original
            .objective
            .iter()
            .zip(&x)
            .map(|(c, v)| c * v)
            .sum();
        ConicSolution {
            x,
            z,
            primal_objective: if solution.primal_objective.is_finite() {
                pobj
            } else {
                solution.primal_objective
            },
            ..solution
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conic::{solve, SolveStatus};

    fn rotated_program() -> ConicProgram {
        // min -c1 over 2ab >= c1^2 + c2^2 with a = 1, b = 2, c2 = 0.5.
        ConicProgram {
            objective: vec![0.0, 0.0, -1.0, 0.0],
            rows: CsrMatrix::from_triplets(
                3,
                4,
                [(0, 0, 1.0), (1, 1, 1.0), (2, 3, 1.0)],
            ),
            rhs: vec![1.0, 2.0, 0.5],
            cones: vec![Cone::RotatedSoc(4)],
            names: vec![],
            structure: None,
        }
    }

    #[test]
    fn boundary_maps_to_boundary() {
        // (a, b, c) = (1, 1, (sqrt(2), 0)): 2ab = 2 = ||c||^2.
        let sqrt2 = 2.0f64.sqrt();
        let x_rot = [1.0, 1.0, sqrt2, 0.0];
        // Forward map: (t, u, c') = (a+b, a-b, sqrt(2) c).
        let t = x_rot[0] + x_rot[1];
        let u = x_rot[0] - x_rot[1];
        let c1 = sqrt2 * x_rot[2];
        let c2 = sqrt2 * x_rot[3];
        let norm = (u * u + c1 * c1 + c2 * c2).sqrt();
        assert!((norm - 2.0).abs() < 1e-12);
        assert!((t - 2.0).abs() < 1e-12, "boundary stays boundary");
    }

    #[test]
    fn infeasible_point_stays_infeasible() {
        // (a, b) = (1, 0), c = (1, 0): 0 >= 1 fails; after mapping
        // ||(sqrt2, 1)|| = sqrt(3) > 1 fails too.
        let t = 1.0 + 0.0;
        let u = 1.0 - 0.0;
        let c1 = 2.0f64.sqrt();
        assert!((u * u + c1 * c1).sqrt() > t);
    }

    #[test]
    fn zero_c_always_feasible() {
        for (a, b) in [(0.0f64, 0.0f64), (1.0, 0.0), (2.0, 3.0)] {
            assert!(2.0 * a * b >= 0.0);
            let (t, u) = (a + b, a - b);
            assert!(t >= (u * u).sqrt() - 1e-15);
        }
    }

    #[test]
    fn optimal_values_coincide() {
        let original = rotated_program();
        let converted = rotated_to_soc(&original);
        let direct = solve(&original, 1e-8, 200).unwrap();
        let via = solve(&converted.program, 1e-8, 200).unwrap();
        assert_eq!(direct.status, SolveStatus::Optimal);
        assert_eq!(via.status, SolveStatus::Optimal);
        assert!((direct.primal_objective - via.primal_objective).abs() < 1e-7);
        // Analytic optimum: c1^2 <= 2*1*2 - 0.25 => c1 = sqrt(3.75).
        let expected = -(3.75f64).sqrt();
        assert!((direct.primal_objective - expected).abs() < 1e-6);
        // Primal maps back into the rotated cone.
        let a = direct.x[0];
        let b = direct.x[1];
        let c_norm2 = direct.x[2] * direct.x[2] + direct.x[3] * direct.x[3];
        assert!(2.0 * a * b - c_norm2 > -1e-7);
    }

    #[test]
    fn duality_pairing_is_preserved() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(5);
        let original = rotated_program();
        let conversion = rotated_to_soc(&original);
        for _ in 0..50 {
            let xs: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let zs: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let x_back = conversion.primal_back(&xs);
            let z_back = conversion.dual_back(&zs);
            let pair_new: f64 = xs.iter().zip(&zs).map(|(a, b)| a * b).sum();
            let pair_old: f64 = x_back.iter().zip(&z_back).map(|(a, b)| a * b).sum();
            assert!((pair_new - pair_old).abs() < 1e-12);
        }
    }
}
