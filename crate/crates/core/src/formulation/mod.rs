//! Translation of a planning instance into optimization structures: the
//! first-stage investment block, per-scenario conic recourse blocks, and
//! extensive-form models in stochastic or chance-constrained shape.
//!
//! Rows carry stable tags (see [`tags`]) so that constraint coverage can be
//! audited and canonical dumps diffed across implementations.

mod evaluate;
mod extensive;
mod first_stage;
mod recourse;

pub mod tags;

pub use evaluate::{check_radiality, evaluate_plan, PlanCosts, RadialityVerdict};
pub use extensive::{build_extensive, ExtensiveMode, ExtensiveModel};
pub use first_stage::{build_first_stage, FirstStage};
pub use recourse::{build_recourse, lower_recourse, LoweredRecourse, RecourseBlock};

use serde::Serialize;

use crate::conic::RowSense;
use crate::network::Instance;

/// End of a corridor, in branch-list orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum End {
    From,
    To,
}

impl End {
    pub fn flip(self) -> End {
        match self {
            End::From => End::To,
            End::To => End::From,
        }
    }
}

/// First-stage (investment) variables. Indices refer to positions in the
/// instance's node/branch lists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum FirstStageVar {
    /// Substation reinforcement decision at a substation node.
    SubBuild { node: usize },
    /// Added substation capacity (per-unit MVA).
    SubCapacity { node: usize },
    /// Capacitor installation decision at a candidate site.
    CapBuild { node: usize },
    /// Installed capacitor size (per-unit MVAr).
    CapSize { node: usize },
    /// Conductor investment on a corridor.
    Invest { branch: usize },
    /// Keep the existing conductor of a replacement corridor.
    KeepExisting { branch: usize },
    /// Corridor connection status.
    Connect { branch: usize },
    /// Parent-assignment indicator: the given end's node is parented through
    /// this corridor.
    Parent { branch: usize, child: End },
}

/// Second-stage (operation) variables of one time-block/scenario cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum RecourseVar {
    /// Sending-end active flow out of the given end.
    FlowP { branch: usize, from: End },
    /// Sending-end reactive flow out of the given end.
    FlowQ { branch: usize, from: End },
    /// Active injection at a substation node.
    InjP { node: usize },
    /// Reactive injection at a substation node.
    InjQ { node: usize },
    /// Substation transformer active output.
    SubP { node: usize },
    /// Substation transformer reactive output.
    SubQ { node: usize },
    /// Active load curtailed at a node.
    Curtail { node: usize },
    /// Scaled squared voltage of a node.
    VoltSq { node: usize },
    /// Per-corridor copy of the scaled squared voltage at one end.
    VoltCopy { branch: usize, end: End },
    /// Voltage-product cosine variable of a corridor.
    JabrR { branch: usize },
    /// Voltage-product sine variable of a corridor (antisymmetric in the
    /// corridor orientation).
    JabrL { branch: usize },
}

/// A symbolic row over first-stage coefficients `x`, recourse coefficients
/// `y` and a constant right-hand side.
#[derive(Debug, Clone)]
pub struct LinkedRow {
    pub tag: &'static str,
    pub sense: RowSense,
    /// Coefficients on first-stage columns.
    pub x: Vec<(usize, f64)>,
    /// Coefficients on this block's recourse columns.
    pub y: Vec<(usize, f64)>,
    pub rhs: f64,
}

/// Consistent naming for canonical dumps and solver variable names.
pub fn first_stage_name(instance: &Instance, var: FirstStageVar) -> String {
    let node_id = |i: usize| instance.network.nodes[i].id;
    let branch = |b: usize| instance.network.branches[b].name();
    match var {
        FirstStageVar::SubBuild { node } => format!("vsub[{}]", node_id(node)),
        FirstStageVar::SubCapacity { node } => format!("Ssub[{}]", node_id(node)),
        FirstStageVar::CapBuild { node } => format!("vcap[{}]", node_id(node)),
        FirstStageVar::CapSize { node } => format!("Qcap[{}]", node_id(node)),
        FirstStageVar::Invest { branch: b } => format!("k[{}]", branch(b)),
        FirstStageVar::KeepExisting { branch: b } => format!("f[{}]", branch(b)),
        FirstStageVar::Connect { branch: b } => format!("y[{}]", branch(b)),
        FirstStageVar::Parent { branch: b, child } => {
            let br = &instance.network.branches[b];
            let (c, p) = match child {
                End::From => (br.from, br.to),
                End::To => (br.to, br.from),
            };
            format!("z[{c}<-{p}|{}]", branch(b))
        }
    }
}

pub fn recourse_name(instance: &Instance, var: RecourseVar, t: usize, s: usize) -> String {
    let node_id = |i: usize| instance.network.nodes[i].id;
    let branch = |b: usize| instance.network.branches[b].name();
    let dir = |b: usize, from: End| {
        let br = &instance.network.branches[b];
        match from {
            End::From => format!("{}>{}", br.from, br.to),
            End::To => format!("{}>{}", br.to, br.from),
        }
    };
    let core = match var {
        RecourseVar::FlowP { branch: b, from } => format!("P[{}]", dir(b, from)),
        RecourseVar::FlowQ { branch: b, from } => format!("Q[{}]", dir(b, from)),
        RecourseVar::InjP { node } => format!("PI[{}]", node_id(node)),
        RecourseVar::InjQ { node } => format!("QI[{}]", node_id(node)),
        RecourseVar::SubP { node } => format!("Psb[{}]", node_id(node)),
        RecourseVar::SubQ { node } => format!("Qsb[{}]", node_id(node)),
        RecourseVar::Curtail { node } => format!("r[{}]", node_id(node)),
        RecourseVar::VoltSq { node } => format!("u[{}]", node_id(node)),
        RecourseVar::VoltCopy { branch: b, end } => {
            let br = &instance.network.branches[b];
            let n = match end {
                End::From => br.from,
                End::To => br.to,
            };
            format!("uc[{n}|{}]", branch(b))
        }
        RecourseVar::JabrR { branch: b } => format!("R[{}]", branch(b)),
        RecourseVar::JabrL { branch: b } => format!("L[{}]", branch(b)),
    };
    format!("{core}@t{t}s{s}")
}

/// Canonical text form of a row set: rows sorted lexicographically with
/// coefficient lists sorted by variable name, for golden files and
/// cross-implementation diffing.
pub fn canonical_rows(rows: &[(String, RowSense, f64, Vec<(String, f64)>)]) -> String {
    let mut lines: Vec<String> = rows
        .iter()
        .map(|(tag, sense, rhs, coeffs)| {
            let mut parts: Vec<String> = coeffs
                .iter()
                .filter(|(_, v)| *v != 0.0)
                .map(|(name, v)| format!("{name}:{v:.12e}"))
                .collect();
            parts.sort();
            let sense = match sense {
                RowSense::Eq => "=",
                RowSense::Ge => ">=",
                RowSense::Le => "<=",
            };
            format!("{tag} {sense} {rhs:.12e} | {}", parts.join(","))
        })
        .collect();
    lines.sort();
    lines.join("\n")
}

/// Stable hash of a canonical dump, for permutation-invariant equality tests.
pub fn canonical_hash(dump: &str) -> u64 {
    use std::collections::hash_map::DefaultHasher;
    use std::hash::{Hash, Hasher};
    let mut hasher = DefaultHasher::new();
    dump.hash(&mut hasher);
    hasher.finish()
}
