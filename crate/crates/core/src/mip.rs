//! Branch-and-bound for binary mixed-integer programs over a pluggable
//! continuous relaxation: LP relaxations for decomposition masters, conic
//! relaxations for extensive-form models.
//!
//! Search is best-bound-first with deterministic tie-breaking on node ids;
//! branching picks the most fractional binary, ties broken by lowest column
//! index. The only heuristic is rounding the root relaxation into a fixed
//! restriction to seed the incumbent.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use crate::conic::{ConicError, ConicProgram, ConicSolution, SolveStatus};

pub const INTEGRALITY_TOL: f64 = 1e-6;

/// A binary variable together with the two rows encoding `x >= lb` and
/// `x <= ub` in the lowered relaxation; node fixings override the row
/// right-hand sides, so every binary carries finite bounds.
#[derive(Debug, Clone)]
pub struct Binary {
    pub column: usize,
    pub lower_row: usize,
    pub upper_row: usize,
}

#[derive(Debug, Clone)]
pub struct MixedIntegerProgram {
    pub relaxation: ConicProgram,
    pub binaries: Vec<Binary>,
}

pub type NodeSolver<'a> = dyn Fn(&ConicProgram) -> Result<ConicSolution, ConicError> + 'a;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MipStatus {
    /// Incumbent proven optimal within the requested gap.
    Optimal,
    /// A node or time limit was hit; best incumbent and bound are reported.
    Limit,
    /// No integer-feasible point exists.
    Infeasible,
}

#[derive(Debug, Clone)]
pub struct Incumbent {
    pub status: MipStatus,
    /// Best integer-feasible point, if any.
    pub x: Option<Vec<f64>>,
    pub objective: f64,
    /// Proven global lower bound (minimization).
    pub bound: f64,
    /// `(objective - bound) / max(1, |objective|)`.
    pub gap: f64,
    /// Nodes whose relaxation was solved.
    pub nodes: usize,
    /// Continuous solves, including the rounding heuristic.
    pub solves: usize,
    /// One line per processed node: `node <id> parent <id> bound <b> action <a>`.
    pub log: Vec<String>,
}

fn relative_gap(objective: f64, bound: f64) -> f64 {
    if objective.is_finite() && bound.is_finite() {
        (objective - bound).max(0.0) / objective.abs().max(1.0)
    } else {
        f64::INFINITY
    }
}

#[derive(Debug, Clone)]
struct Node {
    id: usize,
    parent: usize,
    fixings: Vec<(usize, u8)>,
    /// Inherited relaxation bound; children never fall below their parent.
    bound: f64,
    depth: usize,
}

/// Heap entry ordered so the open node with the smallest (bound, id) pops
/// first.
struct HeapEntry {
    node: Node,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for HeapEntry {}
impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .node
            .bound
            .total_cmp(&self.node.bound)
            .then_with(|| other.node.id.cmp(&self.node.id))
    }
}

/// Pick the most fractional unfixed binary; ties break on the lowest column
/// index. `None` when every binary is integral within tolerance.
pub fn select_branching(x: &[f64], binaries: &[Binary], fixed: &[bool]) -> Option<usize> {
    let mut best: Option<(f64, usize)> = None;
    for (bi, bin) in binaries.iter().enumerate() {
        if fixed.get(bi).copied().unwrap_or(false) {
            continue;
        }
        let v = x[bin.column];
        let frac = (v - v.round()).abs();
        if frac > INTEGRALITY_TOL {
            let score = frac.min(1.0 - frac).min(frac);
            let better = match best {
                None => true,
                Some((s, _)) => score > s + 1e-15,
            };
            if better {
                best = Some((score, bi));
            }
        }
    }
    best.map(|(_, bi)| bi)
}

/// Create the two children fixing the selected binary to 0 and 1.
fn branch(node: &Node, bin_index: usize, next_id: &mut usize) -> (Node, Node) {
    let mut make = |value: u8| {
        let mut fixings = node.fixings.clone();
        fixings.push((bin_index, value));
        let child = Node {
            id: *next_id,
            parent: node.id,
            fixings,
            bound: node.bound,
            depth: node.depth + 1,
        };
        *next_id += 1;
        child
    };
    (make(0), make(1))
}

/// Branch-and-bound over the given node solver. Deterministic for fixed
/// inputs and limits. `initial` seeds the incumbent with a point the caller
/// knows to be feasible, together with its objective.
pub fn solve_mip(
    mip: &MixedIntegerProgram,
    node_solver: &NodeSolver,
    rel_gap: f64,
    node_limit: usize,
    time_limit: Option<Duration>,
    initial: Option<(Vec<f64>, f64)>,
) -> Result<Incumbent, ConicError> {
    assert!((0.0..1.0).contains(&rel_gap), "rel_gap must lie in [0, 1)");
    let start = Instant::now();
    let mut work = mip.relaxation.clone();
    let mut log = Vec::new();
    let (mut incumbent_x, mut incumbent_obj) = match initial {
        Some((x, obj)) => (Some(x), obj),
        None => (None, f64::INFINITY),
    };
    let mut solves = 0usize;
    let mut nodes = 0usize;
    let mut next_id = 1usize;
    // Bound proven for subtrees no longer open (pruned or exhausted).
    let mut closed_floor = f64::INFINITY;
    let mut heap: BinaryHeap<HeapEntry> = BinaryHeap::new();
    let root = Node {
        id: 0,
        parent: 0,
        fixings: Vec::new(),
        bound: f64::NEG_INFINITY,
        depth: 0,
    };
    heap.push(HeapEntry { node: root });
    let mut timed_out = false;
    while let Some(HeapEntry { node }) = heap.pop() {
        // Best-bound order: this node's bound is the minimum over open nodes.
        if incumbent_x.is_some() && relative_gap(incumbent_obj, node.bound) <= rel_gap {
            heap.push(HeapEntry { node });
            break;
        }
        if nodes >= node_limit || time_limit.is_some_and(|l| start.elapsed() >= l) {
            timed_out = true;
            heap.push(HeapEntry { node });
            break;
        }
        nodes += 1;
        apply_fixings(&mut work, mip, &node.fixings);
        let solution = node_solver(&work)?;
        solves += 1;
        match solution.status {
            SolveStatus::InfeasibleCertificate => {
                log.push(format!(
                    "node {} parent {} bound inf action infeasible",
                    node.id, node.parent
                ));
                continue;
            }
            SolveStatus::UnboundedCertificate => {
                return Err(ConicError::BadProgram(
                    "node relaxation is unbounded; the integer program is ill-posed".into(),
                ));
            }
            SolveStatus::Optimal | SolveStatus::IterationLimit => {}
        }
        let node_bound = if solution.status == SolveStatus::Optimal {
            // The dual objective stays a valid bound at finite tolerance.
            solution.dual_objective.max(node.bound)
        } else {
            node.bound
        };
        let slack = rel_gap * incumbent_obj.abs().max(1.0) + 1e-9;
        if incumbent_x.is_some() && node_bound >= incumbent_obj - slack {
            closed_floor = closed_floor.min(node_bound);
            log.push(format!(
                "node {} parent {} bound {node_bound:.12e} action pruned-bound",
                node.id, node.parent
            ));
            continue;
        }
        let mut fixed = vec![false; mip.binaries.len()];
        for &(bi, _) in &node.fixings {
            fixed[bi] = true;
        }
        match select_branching(&solution.x, &mip.binaries, &fixed) {
            None if solution.status == SolveStatus::Optimal => {
                log.push(format!(
                    "node {} parent {} bound {node_bound:.12e} action integral",
                    node.id, node.parent
                ));
                if solution.primal_objective < incumbent_obj {
                    incumbent_obj = solution.primal_objective;
                    incumbent_x = Some(round_binaries(&solution.x, &mip.binaries));
                }
                closed_floor = closed_floor.min(node_bound);
            }
            None => {
                // Stalled relaxation with nothing left to fix; drop the node
                // but keep its inherited bound honest.
                closed_floor = closed_floor.min(node_bound);
                log.push(format!(
                    "node {} parent {} bound {node_bound:.12e} action stalled",
                    node.id, node.parent
                ));
            }
            Some(bin_index) => {
                if node.id == 0 {
                    if let Some((x, obj)) =
                        rounded_restriction(&mut work, mip, node_solver, &solution, &mut solves)
                    {
                        if obj < incumbent_obj {
                            incumbent_obj = obj;
                            incumbent_x = Some(x);
                        }
                    }
                }
                log.push(format!(
                    "node {} parent {} bound {node_bound:.12e} action branch x{}",
                    node.id,
                    node.parent,
                    mip.binaries[bin_index].column
                ));
                let bounded = Node {
                    bound: node_bound,
                    ..node
                };
                let (zero, one) = branch(&bounded, bin_index, &mut next_id);
                heap.push(HeapEntry { node: zero });
                heap.push(HeapEntry { node: one });
            }
        }
    }
    let open_min = heap
        .iter()
        .map(|e| e.node.bound)
        .fold(f64::INFINITY, f64::min);
    let bound = open_min.min(closed_floor).min(incumbent_obj);
    match (&incumbent_x, timed_out) {
        (None, false) => Ok(Incumbent {
            status: MipStatus::Infeasible,
            x: None,
            objective: f64::INFINITY,
            bound,
            gap: f64::INFINITY,
            nodes,
            solves,
            log,
        }),
        (None, true) => Ok(Incumbent {
            status: MipStatus::Limit,
            x: None,
            objective: f64::INFINITY,
            bound,
            gap: f64::INFINITY,
            nodes,
            solves,
            log,
        }),
        (Some(_), _) => {
            let gap = relative_gap(incumbent_obj, bound);
            let proven = !timed_out || gap <= rel_gap;
            Ok(Incumbent {
                status: if proven {
                    MipStatus::Optimal
                } else {
                    MipStatus::Limit
                },
                x: incumbent_x,
                objective: incumbent_obj,
                bound,
                gap,
                nodes,
                solves,
                log,
            })
        }
    }
}

fn apply_fixings(work: &mut ConicProgram, mip: &MixedIntegerProgram, fixings: &[(usize, u8)]) {
    for bin in &mip.binaries {
        work.rhs[bin.lower_row] = mip.relaxation.rhs[bin.lower_row];
        work.rhs[bin.upper_row] = mip.relaxation.rhs[bin.upper_row];
    }
    for &(bi, value) in fixings {
        let bin = &mip.binaries[bi];
        work.rhs[bin.lower_row] = value as f64;
        work.rhs[bin.upper_row] = value as f64;
    }
}

fn round_binaries(x: &[f64], binaries: &[Binary]) -> Vec<f64> {
    let mut out = x.to_vec();
    for bin in binaries {
        out[bin.column] = out[bin.column].round().clamp(0.0, 1.0);
    }
    out
}

fn rounded_restriction(
    work: &mut ConicProgram,
    mip: &MixedIntegerProgram,
    node_solver: &NodeSolver,
    relaxed: &ConicSolution,
    solves: &mut usize,
) -> Option<(Vec<f64>, f64)> {
    let fixings: Vec<(usize, u8)> = mip
        .binaries
        .iter()
        .enumerate()
        .map(|(bi, bin)| (bi, u8::from(relaxed.x[bin.column] >= 0.5)))
        .collect();
    apply_fixings(work, mip, &fixings);
    *solves += 1;
    match node_solver(work) {
        Ok(sol) if sol.status == SolveStatus::Optimal => {
            Some((round_binaries(&sol.x, &mip.binaries), sol.primal_objective))
        }
        _ => None,
    }
}

/// Declare a binary on an existing builder variable: emits the two bound rows
/// and returns the `Binary` handle resolvable after `finish`.
pub fn binary_rows(
    builder: &mut crate::conic::ProgramBuilder,
    var: crate::conic::VarId,
) -> (crate::conic::RowId, crate::conic::RowId) {
    use crate::conic::RowSense;
    let lower = builder.add_row("bin-lb", RowSense::Ge, vec![(var, 1.0)], 0.0);
    let upper = builder.add_row("bin-ub", RowSense::Le, vec![(var, 1.0)], 1.0);
    (lower, upper)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conic::{solve, Cone, CsrMatrix, ProgramBuilder, RowSense, VarKind};

    fn node_solver(p: &ConicProgram) -> Result<ConicSolution, ConicError> {
        solve(p, 1e-8, 200)
    }

    fn knapsack_mip() -> MixedIntegerProgram {
        // max 3a + 2b s.t. a + b <= 1  ==  min -3a - 2b.
        let mut b = ProgramBuilder::new();
        let a = b.add_var("a", VarKind::Nonneg, -3.0);
        let bb = b.add_var("b", VarKind::Nonneg, -2.0);
        b.add_row("cap", RowSense::Le, vec![(a, 1.0), (bb, 1.0)], 1.0);
        let (la, ua) = binary_rows(&mut b, a);
        let (lb, ub) = binary_rows(&mut b, bb);
        let built = b.finish();
        MixedIntegerProgram {
            relaxation: built.program.clone(),
            binaries: vec![
                Binary {
                    column: built.column(a),
                    lower_row: la.0,
                    upper_row: ua.0,
                },
                Binary {
                    column: built.column(bb),
                    lower_row: lb.0,
                    upper_row: ub.0,
                },
            ],
        }
    }

    #[test]
    fn knapsack_optimum() {
        let mip = knapsack_mip();
        let inc = solve_mip(&mip, &node_solver, 1e-6, 1000, None, None).unwrap();
        assert_eq!(inc.status, MipStatus::Optimal);
        assert!((inc.objective + 3.0).abs() < 1e-6, "got {}", inc.objective);
        let x = inc.x.unwrap();
        assert_eq!(x[mip.binaries[0].column], 1.0);
        assert_eq!(x[mip.binaries[1].column], 0.0);
    }

    #[test]
    fn integral_root_needs_no_branching() {
        let mut b = ProgramBuilder::new();
        let a = b.add_var("a", VarKind::Nonneg, -1.0);
        let (la, ua) = binary_rows(&mut b, a);
        let built = b.finish();
        let mip = MixedIntegerProgram {
            relaxation: built.program.clone(),
            binaries: vec![Binary {
                column: built.column(a),
                lower_row: la.0,
                upper_row: ua.0,
            }],
        };
        let inc = solve_mip(&mip, &node_solver, 1e-6, 100, None, None).unwrap();
        assert_eq!(inc.status, MipStatus::Optimal);
        assert_eq!(inc.nodes, 1, "root only");
        assert!((inc.objective + 1.0).abs() < 1e-6);
    }

    #[test]
    fn contradictory_bounds_are_infeasible() {
        let mut b = ProgramBuilder::new();
        let a = b.add_var("a", VarKind::Nonneg, 1.0);
        // lb = 1 and ub = 0 contradict before any branching.
        let la = b.add_row("lb", RowSense::Ge, vec![(a, 1.0)], 1.0);
        let ua = b.add_row("ub", RowSense::Le, vec![(a, 1.0)], 0.0);
        let built = b.finish();
        let mip = MixedIntegerProgram {
            relaxation: built.program.clone(),
            binaries: vec![Binary {
                column: built.column(a),
                lower_row: la.0,
                upper_row: ua.0,
            }],
        };
        let inc = solve_mip(&mip, &node_solver, 1e-6, 100, None, None).unwrap();
        assert_eq!(inc.status, MipStatus::Infeasible);
    }

    #[test]
    fn branching_prefers_most_fractional_lowest_column() {
        let bins: Vec<Binary> = (0..2)
            .map(|i| Binary {
                column: i,
                lower_row: 0,
                upper_row: 0,
            })
            .collect();
        let free = vec![false, false];
        assert_eq!(select_branching(&[0.5, 0.2], &bins, &free), Some(0));
        assert_eq!(select_branching(&[0.2, 0.5], &bins, &free), Some(1));
        assert_eq!(select_branching(&[0.5, 0.5], &bins, &free), Some(0));
        assert_eq!(select_branching(&[1.0, 0.0], &bins, &free), None);
    }

    #[test]
    fn matches_exhaustive_enumeration_small() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(77);
        for _case in 0..10 {
            let nb = rng.gen_range(2..6usize);
            let mut b = ProgramBuilder::new();
            let vars: Vec<_> = (0..nb)
                .map(|i| b.add_var(format!("b{i}"), VarKind::Nonneg, rng.gen_range(-2.0..2.0)))
                .collect();
            let coeffs: Vec<_> = vars.iter().map(|v| (*v, rng.gen_range(0.2..1.0))).collect();
            let cap = rng.gen_range(0.7..(nb as f64) * 0.8);
            b.add_row("cap", RowSense::Le, coeffs.clone(), cap);
            let bounds: Vec<_> = vars.iter().map(|v| binary_rows(&mut b, *v)).collect();
            let built = b.finish();
            let mip = MixedIntegerProgram {
                relaxation: built.program.clone(),
                binaries: vars
                    .iter()
                    .zip(&bounds)
                    .map(|(v, (l, u))| Binary {
                        column: built.column(*v),
                        lower_row: l.0,
                        upper_row: u.0,
                    })
                    .collect(),
            };
            let mut best = f64::INFINITY;
            for mask in 0..(1u32 << nb) {
                let x: Vec<f64> = (0..nb).map(|i| ((mask >> i) & 1) as f64).collect();
                let load: f64 = coeffs
                    .iter()
                    .enumerate()
                    .map(|(i, (_, w))| w * x[i])
                    .sum();
                if load <= cap + 1e-12 {
                    let obj: f64 = (0..nb)
                        .map(|i| built.program.objective[built.column(vars[i])] * x[i])
                        .sum();
                    best = best.min(obj);
                }
            }
            let inc = solve_mip(&mip, &node_solver, 1e-8, 10_000, None, None).unwrap();
            assert_eq!(inc.status, MipStatus::Optimal);
            assert!(
                (inc.objective - best).abs() < 1e-6,
                "branch-and-bound {} vs enumeration {best}",
                inc.objective
            );
        }
    }

    #[test]
    fn deterministic_node_counts_and_log() {
        let mip = knapsack_mip();
        let a = solve_mip(&mip, &node_solver, 1e-6, 1000, None, None).unwrap();
        let b = solve_mip(&mip, &node_solver, 1e-6, 1000, None, None).unwrap();
        assert_eq!(a.nodes, b.nodes);
        assert_eq!(a.log, b.log);
        assert_eq!(a.objective, b.objective);
    }

    #[test]
    fn bound_never_exceeds_incumbent() {
        let mip = knapsack_mip();
        let inc = solve_mip(&mip, &node_solver, 1e-6, 1000, None, None).unwrap();
        assert!(inc.bound <= inc.objective + 1e-9);
        assert!(inc.gap <= 1e-6 + 1e-9);
    }

    #[test]
    fn unbounded_relaxation_is_an_error() {
        let program = ConicProgram {
            objective: vec![-1.0],
            rows: CsrMatrix::from_triplets(1, 1, [(0, 0, 0.0)]),
            rhs: vec![0.0],
            cones: vec![Cone::Nonneg(1)],
            names: vec![],
            structure: None,
        };
        let mip = MixedIntegerProgram {
            relaxation: program,
            binaries: vec![],
        };
        assert!(solve_mip(&mip, &node_solver, 1e-6, 10, None, None).is_err());
    }
}
