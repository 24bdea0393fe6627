//! Row-tag registry. Every emitted constraint carries one of these tags;
//! the coverage audit asserts that a generic instance exercises all of them.
//! `docs/formats.md` documents what each tag means.

/// First-stage (investment and topology) rows.
pub const FIRST_STAGE: &[&str] = &[
    "pair-choice",          // replace-or-keep on replacement corridors
    "use-existing",         // connection needs the kept conductor
    "use-candidate",        // connection needs the invested conductor
    "no-parent-substation", // substations have no parent
    "edge-orientation",     // connected corridors are oriented
    "one-parent",           // every load node has exactly one parent
    "sub-size-gate",        // capacity only with the reinforcement decision
    "cap-size-gate",        // capacitor size only with the installation
];

/// Recourse (operation) rows of one time-block/scenario cell.
pub const RECOURSE: &[&str] = &[
    "balance-p",          // nodal active balance with curtailment
    "balance-q",          // nodal reactive balance with capacitor relief
    "sub-injection-p",    // substation active output definition
    "sub-injection-q",    // substation reactive output definition
    "flow-def-p",         // active flow in voltage-product variables
    "flow-def-q",         // reactive flow in voltage-product variables
    "current-limit",      // squared-current cap tied to the invested rating
    "volt-copy-cap",      // corridor voltage copy gated by connection
    "volt-copy-floor",    // copy never exceeds the nodal voltage
    "volt-copy-residual", // nodal voltage minus copy gated by disconnection
    "volt-box-lo",        // lower voltage bound
    "volt-box-hi",        // upper voltage bound
    "jabr-sign",          // cosine product variable is nonnegative
    "jabr-cone",          // rotated cone tying copies to products
    "sub-capacity-p",     // transformer active capacity with reinforcement
    "sub-capacity-q",     // transformer reactive capacity with reinforcement
    "curtail-limit",      // curtailment never exceeds demand
];

/// Extensive-form and master-side rows.
pub const EXTENSIVE: &[&str] = &[
    "chance-budget", // probability mass of ignored scenarios
    "cost-gate",     // scenario cost switched off when ignored
    "bin-lb",        // binary lower bound
    "bin-ub",        // binary upper bound
];

pub const MASTER: &[&str] = &[
    "optimality-cut", // scenario cut modulated by the ignore decision
    "cut-floor",      // scenario cost estimate is nonnegative
    "chance-budget",
    "bin-lb",
    "bin-ub",
];
