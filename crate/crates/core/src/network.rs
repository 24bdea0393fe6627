//! Planning instance data model: grid topology, demands, candidate
//! investments, time blocks, scenarios and economics.
//!
//! Instances are stored as JSON with top-level keys `base`, `nodes`,
//! `substations`, `branches`, `capacitors`, `time_blocks`, `scenarios` and
//! `economics`. Electrical quantities are per-unit on `base.mva`; demands are
//! in MW/MVAr and costs in dollars. See `docs/instance-format.md`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Probabilities must sum to one within this slack.
pub const PROBABILITY_SUM_TOL: f64 = 1e-12;

const HOURS_PER_YEAR: f64 = 8760.0;

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("io error reading {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("validation error: {0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> InstanceError {
    InstanceError::Invalid(msg.into())
}

/// How a corridor participates in the plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BranchClass {
    /// In service today, no replacement candidate. Carries only the existing rating.
    Existing,
    /// A new route that can be built. Carries only the candidate rating.
    Candidate,
    /// An existing conductor that may be swapped for a higher-capacity one.
    /// Carries both ratings.
    Replacement,
}

impl fmt::Display for BranchClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BranchClass::Existing => write!(f, "existing"),
            BranchClass::Candidate => write!(f, "candidate"),
            BranchClass::Replacement => write!(f, "replacement"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: u32,
    /// Base active demand, MW.
    #[serde(default)]
    pub p_demand: f64,
    /// Base reactive demand, MVAr.
    #[serde(default)]
    pub q_demand: f64,
    /// Stated load power factor; when present it must match `q/p`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power_factor: Option<f64>,
    #[serde(default = "default_v_min")]
    pub v_min: f64,
    #[serde(default = "default_v_max")]
    pub v_max: f64,
}

fn default_v_min() -> f64 {
    0.95
}
fn default_v_max() -> f64 {
    1.05
}

impl Node {
    /// Reactive-relief ratio: curtailing 1 MW of active demand frees
    /// `beta` MVAr of reactive demand.
    pub fn beta(&self) -> f64 {
        if let Some(pf) = self.power_factor {
            pf.acos().tan()
        } else if self.p_demand > 0.0 {
            self.q_demand / self.p_demand
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Substation {
    pub node: u32,
    /// Existing transformer active capacity, MW.
    pub p_max: f64,
    /// Existing transformer reactive capacity, MVAr.
    pub q_max: f64,
    /// Power factor splitting added capacity between P and Q headroom.
    pub power_factor: f64,
    /// Fixed cost of reinforcing this substation, $.
    pub fixed_cost: f64,
    /// Variable reinforcement cost, $/MW of added capacity.
    pub variable_cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub from: u32,
    pub to: u32,
    pub class: BranchClass,
    /// Series conductance, pu.
    pub g: f64,
    /// Series susceptance, pu (negative for inductive lines).
    pub b: f64,
    /// Total shunt susceptance of the pi model, pu.
    #[serde(default)]
    pub b_shunt: f64,
    pub length_km: f64,
    /// Rated current of the in-service conductor, pu.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub i_max_existing: Option<f64>,
    /// Rated current of the candidate conductor, pu.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub i_max_candidate: Option<f64>,
    /// Investment cost, $/km.
    #[serde(default)]
    pub fixed_cost_per_km: f64,
    /// Variable investment cost; accepted for completeness, not part of the
    /// investment objective.
    #[serde(default)]
    pub variable_cost: f64,
    /// Annual maintenance cost of a connected branch, $/yr.
    #[serde(default)]
    pub maintenance_cost: f64,
}

impl Branch {
    pub fn name(&self) -> String {
        format!("{}-{}", self.from, self.to)
    }

    /// Whether the corridor exists before any investment.
    pub fn is_existing(&self) -> bool {
        matches!(self.class, BranchClass::Existing | BranchClass::Replacement)
    }

    /// Whether investment is possible on the corridor.
    pub fn is_candidate(&self) -> bool {
        matches!(
            self.class,
            BranchClass::Candidate | BranchClass::Replacement
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacitorSite {
    pub node: u32,
    /// Maximum installable capacity, kVAr.
    pub q_max_kvar: f64,
    /// Fixed installation cost, $.
    pub fixed_cost: f64,
    /// Variable installation cost, $/kVAr.
    pub variable_cost_per_kvar: f64,
    /// Annual operating cost, $/yr; only charged when
    /// [`EconomicData::include_capacitor_operating_cost`] is set.
    #[serde(default)]
    pub operating_cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeBlock {
    /// Fraction of peak demand this block runs at.
    pub load_factor: f64,
    pub duration_hours: f64,
    /// Base energy price, $/MWh.
    pub price_per_mwh: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub probability: f64,
    /// Multiplier applied to both demand and energy price.
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ScenarioSet {
    pub scenarios: Vec<Scenario>,
}

impl ScenarioSet {
    pub fn len(&self) -> usize {
        self.scenarios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scenarios.is_empty()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.scenarios.iter().map(|s| s.probability).collect()
    }

    /// A single scenario at the given load/price level.
    pub fn deterministic(level: f64) -> Self {
        ScenarioSet {
            scenarios: vec![Scenario {
                probability: 1.0,
                scale: level,
            }],
        }
    }

    fn validate(&self) -> Result<(), InstanceError> {
        if self.scenarios.is_empty() {
            return Err(invalid("no scenarios"));
        }
        let total: f64 = self.scenarios.iter().map(|s| s.probability).sum();
        if (total - 1.0).abs() > PROBABILITY_SUM_TOL {
            return Err(invalid(format!(
                "probabilities do not sum to 1 (got {total})"
            )));
        }
        for (i, s) in self.scenarios.iter().enumerate() {
            if s.probability <= 0.0 {
                return Err(invalid(format!("scenario {i} has probability <= 0")));
            }
            if s.scale <= 0.0 {
                return Err(invalid(format!("scenario {i} has scaling factor <= 0")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EconomicData {
    /// Annual interest rate as a fraction.
    pub interest_rate: f64,
    pub lifespan_years: u32,
    /// Loss cost as a multiple of the block energy price.
    #[serde(default = "default_loss_multiplier")]
    pub loss_cost_multiplier: f64,
    /// Curtailment penalty as a multiple of the loss cost.
    #[serde(default = "default_penalty_multiplier")]
    pub curtailment_penalty_multiplier: f64,
    /// Charge capacitor operating cost as an investment-side additive term.
    #[serde(default)]
    pub include_capacitor_operating_cost: bool,
}

fn default_loss_multiplier() -> f64 {
    10.0
}
fn default_penalty_multiplier() -> f64 {
    10.0
}

impl EconomicData {
    pub fn capital_recovery_factor(&self) -> f64 {
        capital_recovery_factor(self.interest_rate, self.lifespan_years)
    }

    fn validate(&self) -> Result<(), InstanceError> {
        if self.interest_rate < 0.0 {
            return Err(invalid("interest rate must be >= 0"));
        }
        if self.lifespan_years < 1 {
            return Err(invalid("lifespan must be >= 1 year"));
        }
        if self.loss_cost_multiplier < 0.0 || self.curtailment_penalty_multiplier < 0.0 {
            return Err(invalid("cost multipliers must be >= 0"));
        }
        Ok(())
    }
}

/// Per-unit base of the instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerUnitBase {
    pub mva: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kv: Option<f64>,
}

/// The grid part of an instance: nodes, substations, corridors, capacitor
/// sites and the per-unit base. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub base: PerUnitBase,
    pub nodes: Vec<Node>,
    pub substations: Vec<Substation>,
    pub branches: Vec<Branch>,
    #[serde(default)]
    pub capacitors: Vec<CapacitorSite>,
}

impl Network {
    pub fn node_index(&self, id: u32) -> Option<usize> {
        self.nodes.iter().position(|n| n.id == id)
    }

    pub fn is_substation(&self, id: u32) -> bool {
        self.substations.iter().any(|s| s.node == id)
    }

    pub fn substation_at(&self, id: u32) -> Option<&Substation> {
        self.substations.iter().find(|s| s.node == id)
    }

    pub fn capacitor_at(&self, id: u32) -> Option<&CapacitorSite> {
        self.capacitors.iter().find(|c| c.node == id)
    }

    /// Branch indices incident to each node, in branch-list order.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for (bi, br) in self.branches.iter().enumerate() {
            let fi = self.node_index(br.from).expect("validated endpoint");
            let ti = self.node_index(br.to).expect("validated endpoint");
            adj[fi].push(bi);
            adj[ti].push(bi);
        }
        adj
    }

    /// Total hours represented by the time blocks; maintenance charges are
    /// spread over this horizon.
    pub fn validate(&self) -> Result<(), InstanceError> {
        if self.base.mva <= 0.0 {
            return Err(invalid("per-unit base must be positive"));
        }
        if self.nodes.is_empty() {
            return Err(invalid("no nodes"));
        }
        let mut seen = BTreeMap::new();
        for n in &self.nodes {
            if seen.insert(n.id, ()).is_some() {
                return Err(invalid(format!("duplicate node id {}", n.id)));
            }
            if n.v_min >= n.v_max {
                return Err(invalid(format!(
                    "node {}: voltage bounds require v_min < v_max",
                    n.id
                )));
            }
            if n.v_min <= 0.0 {
                return Err(invalid(format!("node {}: v_min must be positive", n.id)));
            }
            if n.p_demand < 0.0 || n.q_demand < 0.0 {
                return Err(invalid(format!("node {}: demands must be >= 0", n.id)));
            }
            if let Some(pf) = n.power_factor {
                if !(pf > 0.0 && pf <= 1.0) {
                    return Err(invalid(format!(
                        "node {}: power factor must lie in (0, 1]",
                        n.id
                    )));
                }
                // The stated factor must agree with the demand pair, otherwise
                // curtailment cannot relieve reactive demand and recourse
                // feasibility is lost.
                if n.p_demand > 0.0 {
                    let implied = pf.acos().tan();
                    if (implied - n.q_demand / n.p_demand).abs() > 1e-6 {
                        return Err(invalid(format!(
                            "node {}: stated power factor is inconsistent with p/q demand",
                            n.id
                        )));
                    }
                } else if n.q_demand > 0.0 {
                    return Err(invalid(format!(
                        "node {}: reactive demand without active demand cannot be curtailed",
                        n.id
                    )));
                }
            }
        }
        if self.substations.is_empty() {
            return Err(invalid("no substations"));
        }
        for s in &self.substations {
            if !seen.contains_key(&s.node) {
                return Err(invalid(format!("substation at unknown node {}", s.node)));
            }
            if s.p_max < 0.0 || s.q_max < 0.0 || s.fixed_cost < 0.0 || s.variable_cost < 0.0 {
                return Err(invalid(format!(
                    "substation {}: capacities and costs must be >= 0",
                    s.node
                )));
            }
            if !(s.power_factor > 0.0 && s.power_factor <= 1.0) {
                return Err(invalid(format!(
                    "substation {}: power factor must lie in (0, 1]",
                    s.node
                )));
            }
        }
        if self.branches.is_empty() {
            return Err(invalid("no branches"));
        }
        for br in &self.branches {
            if !seen.contains_key(&br.from) || !seen.contains_key(&br.to) {
                return Err(invalid(format!(
                    "branch {} has an endpoint outside the node set",
                    br.name()
                )));
            }
            if br.from == br.to {
                return Err(invalid(format!("branch {} is a self-loop", br.name())));
            }
            if br.g < 0.0 {
                return Err(invalid(format!(
                    "branch {}: series conductance must be >= 0",
                    br.name()
                )));
            }
            if br.length_km < 0.0
                || br.fixed_cost_per_km < 0.0
                || br.variable_cost < 0.0
                || br.maintenance_cost < 0.0
            {
                return Err(invalid(format!(
                    "branch {}: lengths and costs must be >= 0",
                    br.name()
                )));
            }
            let has_e = br.i_max_existing.is_some();
            let has_c = br.i_max_candidate.is_some();
            match br.class {
                BranchClass::Existing if !(has_e && !has_c) => {
                    return Err(invalid(format!(
                        "branch {}: existing-only corridors carry exactly the existing rating",
                        br.name()
                    )))
                }
                BranchClass::Candidate if !(has_c && !has_e) => {
                    return Err(invalid(format!(
                        "branch {}: candidate-only corridors carry exactly the candidate rating",
                        br.name()
                    )))
                }
                BranchClass::Replacement if !(has_e && has_c) => {
                    return Err(invalid(format!(
                        "branch {}: replacement corridors carry both ratings",
                        br.name()
                    )))
                }
                _ => {}
            }
            for rating in [br.i_max_existing, br.i_max_candidate].into_iter().flatten() {
                if rating <= 0.0 {
                    return Err(invalid(format!(
                        "branch {}: current ratings must be positive",
                        br.name()
                    )));
                }
            }
        }
        for c in &self.capacitors {
            if !seen.contains_key(&c.node) {
                return Err(invalid(format!("capacitor at unknown node {}", c.node)));
            }
            if self.is_substation(c.node) {
                return Err(invalid(format!(
                    "capacitor site {} must not be a substation node",
                    c.node
                )));
            }
            if c.q_max_kvar < 0.0
                || c.fixed_cost < 0.0
                || c.variable_cost_per_kvar < 0.0
                || c.operating_cost < 0.0
            {
                return Err(invalid(format!(
                    "capacitor {}: capacities and costs must be >= 0",
                    c.node
                )));
            }
        }
        Ok(())
    }
}

/// A fully validated planning instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    #[serde(flatten)]
    pub network: Network,
    pub time_blocks: Vec<TimeBlock>,
    pub scenarios: ScenarioSet,
    pub economics: EconomicData,
}

impl Instance {
    pub fn validate(&self) -> Result<(), InstanceError> {
        self.network.validate()?;
        if self.time_blocks.is_empty() {
            return Err(invalid("no time blocks"));
        }
        let mut total_hours = 0.0;
        for (t, b) in self.time_blocks.iter().enumerate() {
            if b.duration_hours <= 0.0 {
                return Err(invalid(format!("time block {t}: duration must be > 0")));
            }
            if b.load_factor <= 0.0 || b.price_per_mwh < 0.0 {
                return Err(invalid(format!(
                    "time block {t}: load factor must be > 0 and price >= 0"
                )));
            }
            total_hours += b.duration_hours;
        }
        if total_hours > HOURS_PER_YEAR + 1e-9 {
            return Err(invalid(format!(
                "time blocks cover {total_hours} hours, more than a year"
            )));
        }
        self.scenarios.validate()?;
        self.economics.validate()?;
        Ok(())
    }

    /// Hours represented by the time blocks.
    pub fn represented_hours(&self) -> f64 {
        self.time_blocks.iter().map(|b| b.duration_hours).sum()
    }

    /// Loss cost in scenario `s`, block `t`, $/MWh.
    pub fn loss_cost(&self, t: usize, s: usize) -> f64 {
        self.economics.loss_cost_multiplier
            * self.scenarios.scenarios[s].scale
            * self.time_blocks[t].price_per_mwh
    }

    /// Curtailment penalty in scenario `s`, block `t`, $/MWh.
    pub fn penalty_cost(&self, t: usize, s: usize) -> f64 {
        self.economics.curtailment_penalty_multiplier * self.loss_cost(t, s)
    }

    /// Active demand at node index `i` in block `t`, scenario `s`, per-unit.
    pub fn demand_p(&self, i: usize, t: usize, s: usize) -> f64 {
        self.network.nodes[i].p_demand * self.block_scale(t, s) / self.network.base.mva
    }

    /// Reactive demand at node index `i` in block `t`, scenario `s`, per-unit.
    pub fn demand_q(&self, i: usize, t: usize, s: usize) -> f64 {
        self.network.nodes[i].q_demand * self.block_scale(t, s) / self.network.base.mva
    }

    fn block_scale(&self, t: usize, s: usize) -> f64 {
        self.time_blocks[t].load_factor * self.scenarios.scenarios[s].scale
    }

    /// Replace the scenario set, e.g. with a generated one.
    pub fn with_scenarios(mut self, scenarios: ScenarioSet) -> Self {
        self.scenarios = scenarios;
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }
}

/// Load and validate an instance from a JSON file.
pub fn load_instance(path: impl AsRef<Path>) -> Result<Instance, InstanceError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| InstanceError::Io {
        path: path.display().to_string(),
        source,
    })?;
    load_instance_str(&text)
}

/// Load and validate an instance from JSON text.
pub fn load_instance_str(text: &str) -> Result<Instance, InstanceError> {
    let instance: Instance = serde_json::from_str(text)?;
    instance.validate()?;
    Ok(instance)
}

/// Annualization factor `r(1+r)^n / ((1+r)^n - 1)`; the zero-rate limit is
/// `1/n`.
pub fn capital_recovery_factor(rate: f64, years: u32) -> f64 {
    assert!(years >= 1, "lifespan must be at least one year");
    assert!(rate >= 0.0, "interest rate must be nonnegative");
    if rate == 0.0 {
        return 1.0 / years as f64;
    }
    let growth = (1.0 + rate).powi(years as i32);
    rate * growth / (growth - 1.0)
}

/// `count` equiprobable scenarios with scaling factors drawn i.i.d. uniformly
/// from `[lo, hi]`. Deterministic for a fixed seed.
pub fn generate_scenarios(count: usize, lo: f64, hi: f64, seed: u64) -> ScenarioSet {
    assert!(count >= 1, "need at least one scenario");
    assert!(lo > 0.0 && lo <= hi, "need 0 < lo <= hi");
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let dist = Uniform::new_inclusive(lo, hi);
    let probability = 1.0 / count as f64;
    let scenarios = (0..count)
        .map(|_| Scenario {
            probability,
            scale: dist.sample(&mut rng),
        })
        .collect();
    ScenarioSet { scenarios }
}

/// Connectivity report for the union of in-service and candidate corridors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopologyDiagnostics {
    /// Whether every node can reach a substation through some corridor.
    pub connected: bool,
    /// Node ids with no corridor path to any substation.
    pub unreachable: Vec<u32>,
    /// Corridors where an existing conductor has a replacement candidate.
    pub replacement_pairs: Vec<String>,
    /// Corridors that exist only as new routes.
    pub new_candidates: Vec<String>,
}

/// Reports connectivity of the union graph, replacement corridors and nodes
/// unreachable from every substation. Diagnostic only.
pub fn validate_topology(network: &Network) -> TopologyDiagnostics {
    let n = network.nodes.len();
    let adj = network.adjacency();
    let mut reached = vec![false; n];
    let mut stack: Vec<usize> = network
        .substations
        .iter()
        .filter_map(|s| network.node_index(s.node))
        .collect();
    for &s in &stack {
        reached[s] = true;
    }
    while let Some(i) = stack.pop() {
        for &bi in &adj[i] {
            let br = &network.branches[bi];
            for end in [br.from, br.to] {
                let j = network.node_index(end).expect("validated endpoint");
                if !reached[j] {
                    reached[j] = true;
                    stack.push(j);
                }
            }
        }
    }
    let unreachable: Vec<u32> = network
        .nodes
        .iter()
        .enumerate()
        .filter(|(i, _)| !reached[*i])
        .map(|(_, node)| node.id)
        .collect();
    TopologyDiagnostics {
        connected: unreachable.is_empty(),
        unreachable,
        replacement_pairs: network
            .branches
            .iter()
            .filter(|b| b.class == BranchClass::Replacement)
            .map(|b| b.name())
            .collect(),
        new_candidates: network
            .branches
            .iter()
            .filter(|b| b.class == BranchClass::Candidate)
            .map(|b| b.name())
            .collect(),
    }
}

/// Instance files bundled with the crate.
pub mod bundled {
    use super::{load_instance_str, Instance};

    /// Five-node stand-in system: one substation, five replacement corridors
    /// and two new routes, three time blocks, ten scenarios.
    pub const FIVE_NODE: &str = include_str!("../../../instances/bundled5.json");

    /// Eighteen-node stand-in system with two substations.
    pub const EIGHTEEN_NODE: &str = include_str!("../../../instances/bundled18.json");

    pub fn five_node() -> Instance {
        load_instance_str(FIVE_NODE).expect("bundled instance is valid")
    }

    pub fn eighteen_node() -> Instance {
        load_instance_str(EIGHTEEN_NODE).expect("bundled instance is valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crf_matches_closed_form() {
        let crf = capital_recovery_factor(0.10, 15);
        assert!((crf - 0.1314738).abs() < 1e-7, "got {crf}");
        // Zero-rate limit.
        assert!((capital_recovery_factor(0.0, 10) - 0.1).abs() < 1e-15);
        // Annualized substation fixed cost from the bundled economics.
        let annual = 200_000.0 * crf;
        assert!((annual - 26_294.75).abs() < 0.01, "got {annual}");
    }

    #[test]
    fn crf_monotone_on_grid() {
        let rates = [0.0, 0.02, 0.05, 0.08, 0.1, 0.15, 0.25];
        for years in [1u32, 2, 5, 10, 15, 30] {
            for w in rates.windows(2) {
                assert!(
                    capital_recovery_factor(w[1], years) > capital_recovery_factor(w[0], years),
                    "crf must increase with rate"
                );
            }
        }
        for &rate in &rates[1..] {
            for years in [1u32, 2, 5, 10, 15, 30].windows(2) {
                assert!(
                    capital_recovery_factor(rate, years[1])
                        < capital_recovery_factor(rate, years[0]),
                    "crf must decrease with lifespan at positive rate"
                );
            }
        }
    }

    #[test]
    fn scenario_generation_is_deterministic() {
        let a = generate_scenarios(20, 0.6, 1.8, 42);
        let b = generate_scenarios(20, 0.6, 1.8, 42);
        assert_eq!(a, b);
        let c = generate_scenarios(20, 0.6, 1.8, 43);
        assert_ne!(a, c);
    }

    #[test]
    fn scenario_generation_degenerate_range() {
        let s = generate_scenarios(1, 1.0, 1.0, 7);
        assert_eq!(s.len(), 1);
        assert_eq!(s.scenarios[0].scale, 1.0);
        assert_eq!(s.scenarios[0].probability, 1.0);
    }

    #[test]
    fn scenario_generation_support() {
        let s = generate_scenarios(10, 0.6, 1.8, 3);
        let mean: f64 = s.scenarios.iter().map(|x| x.scale).sum::<f64>() / 10.0;
        assert!(s.scenarios.iter().all(|x| (0.6..=1.8).contains(&x.scale)));
        assert!((0.6..=1.8).contains(&mean));
        assert!(s
            .scenarios
            .iter()
            .all(|x| (x.probability - 0.1).abs() < 1e-15));
    }

    #[test]
    fn scenario_uniformity_kolmogorov_smirnov() {
        // Empirical CDF of 1e5 draws against U[0,1] after rescaling; the 1%
        // critical value of the KS statistic is 1.6276/sqrt(n).
        let n = 100_000;
        let set = generate_scenarios(n, 0.6, 1.8, 12345);
        let mut u: Vec<f64> = set
            .scenarios
            .iter()
            .map(|s| (s.scale - 0.6) / 1.2)
            .collect();
        u.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut d: f64 = 0.0;
        for (i, &x) in u.iter().enumerate() {
            let lo = i as f64 / n as f64;
            let hi = (i + 1) as f64 / n as f64;
            d = d.max((x - lo).abs()).max((hi - x).abs());
        }
        let critical = 1.6276 / (n as f64).sqrt();
        assert!(d < critical, "KS statistic {d} exceeds 1% critical {critical}");
    }

    #[test]
    fn bundled_five_node_loads() {
        let instance = bundled::five_node();
        assert_eq!(instance.network.nodes.len(), 5);
        assert_eq!(instance.network.substations.len(), 1);
        let candidates = instance
            .network
            .branches
            .iter()
            .filter(|b| b.is_candidate())
            .count();
        assert_eq!(candidates, 7);
        assert_eq!(instance.scenarios.len(), 10);
        assert_eq!(instance.time_blocks.len(), 3);
    }

    #[test]
    fn bundled_five_node_topology() {
        let instance = bundled::five_node();
        let diag = validate_topology(&instance.network);
        assert!(diag.connected);
        assert_eq!(diag.replacement_pairs.len(), 5);
        assert_eq!(diag.new_candidates.len(), 2);
    }

    #[test]
    fn topology_flags_unreachable_leaf() {
        let mut instance = bundled::five_node();
        // Drop every branch touching node 3; it becomes unreachable.
        instance
            .network
            .branches
            .retain(|b| b.from != 3 && b.to != 3);
        let diag = validate_topology(&instance.network);
        assert!(!diag.connected);
        assert_eq!(diag.unreachable, vec![3]);
    }

    #[test]
    fn topology_single_substation_no_loads() {
        let instance = load_instance_str(
            r#"{
                "base": {"mva": 1.0},
                "nodes": [{"id": 1}, {"id": 2}],
                "substations": [{"node": 1, "p_max": 1.0, "q_max": 1.0,
                                 "power_factor": 0.9, "fixed_cost": 0.0, "variable_cost": 0.0}],
                "branches": [{"from": 1, "to": 2, "class": "existing", "g": 1.0, "b": -2.0,
                              "length_km": 1.0, "i_max_existing": 1.0}],
                "time_blocks": [{"load_factor": 1.0, "duration_hours": 100.0, "price_per_mwh": 50.0}],
                "scenarios": [{"probability": 1.0, "scale": 1.0}],
                "economics": {"interest_rate": 0.1, "lifespan_years": 15}
            }"#,
        )
        .unwrap();
        let diag = validate_topology(&instance.network);
        assert!(diag.connected);
        assert!(diag.unreachable.is_empty());
        assert!(diag.replacement_pairs.is_empty());
        assert!(diag.new_candidates.is_empty());
    }

    #[test]
    fn rejects_bad_probabilities() {
        let mut instance = bundled::five_node();
        for s in &mut instance.scenarios.scenarios {
            s.probability *= 0.9;
        }
        let err = load_instance_str(&instance.to_json()).unwrap_err();
        assert!(err.to_string().contains("probabilities do not sum to 1"));
    }

    #[test]
    fn rejects_empty_branch_list() {
        let mut instance = bundled::five_node();
        instance.network.branches.clear();
        let err = load_instance_str(&instance.to_json()).unwrap_err();
        assert!(err.to_string().contains("no branches"), "{err}");
    }

    #[test]
    fn rejects_inconsistent_power_factor() {
        let mut instance = bundled::five_node();
        instance.network.nodes[1].power_factor = Some(0.5);
        assert!(instance.validate().is_err());
    }

    #[test]
    fn parse_error_carries_location() {
        let err = load_instance_str("{ not json").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line"), "{msg}");
    }

    #[test]
    fn round_trip_preserves_instance() {
        let instance = bundled::five_node();
        let reparsed = load_instance_str(&instance.to_json()).unwrap();
        assert_eq!(instance, reparsed);
        let instance = bundled::eighteen_node();
        let reparsed = load_instance_str(&instance.to_json()).unwrap();
        assert_eq!(instance, reparsed);
    }

    #[test]
    fn beta_from_power_factor_and_demands() {
        let node = Node {
            id: 1,
            p_demand: 1.0,
            q_demand: 0.484_322,
            power_factor: None,
            v_min: 0.95,
            v_max: 1.05,
        };
        assert!((node.beta() - 0.484_322).abs() < 1e-12);
        let stated = Node {
            power_factor: Some(0.9),
            ..node
        };
        assert!((stated.beta() - (0.9f64).acos().tan()).abs() < 1e-12);
    }
}
