//! The distributed B-Matching Proposals process.
//!
//! Each iteration activates one node uniformly at random from `U ∪ V` and
//! lets it propose to a uniformly random node of the other class. The
//! proposal succeeds when the cheapest available copies of both sides leave
//! surplus on the edge; otherwise the proposer lowers its cheapest positive
//! free copy by one grid step.
//!
//! Randomness comes from one ChaCha8 stream per run, seeded from a `u64`,
//! with draws always taken proposer first, then receiver.

use std::fmt;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expanded::{
    check_feasible, free_copies, is_copies_core, CopyEdge, CopyId, ExpandedState,
};
use crate::instance::{format_rational, Instance, NodeRef, Side};
use crate::money::Money;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum InitMode {
    #[default]
    Zero,
    /// Every copy draws a grid value uniformly from `[0, max W]`.
    RandomOnGrid,
    Explicit(ExpandedState),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub seed: u64,
    pub horizon: u64,
    pub init: InitMode,
    /// Iterations between absorbing-state checks; 0 disables them.
    pub core_check_period: u64,
    pub record_trace: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            horizon: 10_000,
            init: InitMode::Zero,
            core_check_period: 0,
            record_trace: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Skipped,
    Matched,
    FailedDecrement,
    FailedNoOp,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Skipped => "skipped",
            Outcome::Matched => "matched",
            Outcome::FailedDecrement => "failed-decrement",
            Outcome::FailedNoOp => "failed-no-op",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One activation: who proposed to whom and what happened.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Activation {
    pub proposer: NodeRef,
    pub receiver: NodeRef,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceRecord {
    /// 1-based iteration number.
    pub iter: u64,
    pub proposer: NodeRef,
    pub receiver: NodeRef,
    pub outcome: Outcome,
    pub total_feasible_aspiration: Money,
    pub matched_edges: usize,
    pub f_plus_size: usize,
}

pub const TRACE_CSV_HEADER: &str =
    "iter,proposer,receiver,outcome,total_feasible_aspiration,matched_edges,f_plus_size";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DynamicsError {
    #[error("initial state is infeasible: {0}")]
    InfeasibleInitial(String),
}

/// Builds the starting state. The random mode draws from its own stream so
/// the activation sequence of a run does not depend on the init mode.
pub fn initial_state(
    inst: &Instance,
    mode: &InitMode,
    seed: u64,
) -> Result<ExpandedState, DynamicsError> {
    match mode {
        InitMode::Zero => Ok(ExpandedState::zero(inst)),
        InitMode::RandomOnGrid => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(1);
            let top = inst.max_weight().0;
            let mut state = ExpandedState::zero(inst);
            for copy in state.all_copies().collect::<Vec<_>>() {
                state.set_aspiration(copy, Money(rng.random_range(0..=top)));
            }
            Ok(state)
        }
        InitMode::Explicit(state) => {
            let report = check_feasible(state, inst);
            if report.pass() {
                Ok(state.clone())
            } else {
                Err(DynamicsError::InfeasibleInitial(format!(
                    "{:?}",
                    report.violations
                )))
            }
        }
    }
}

/// Lowest-aspiration copy among the free copies of `node`, or among all its
/// copies when none is free. Ties go to the lowest index.
fn cheapest_copy(state: &ExpandedState, node: NodeRef) -> CopyId {
    let free = free_copies(state, node, false);
    let candidates: Vec<CopyId> = if free.is_empty() {
        (0..state.copies(node).len())
            .map(|k| CopyId::new(node, k))
            .collect()
    } else {
        free
    };
    candidates
        .into_iter()
        .min_by_key(|&c| (state.aspiration(c), c.index))
        .expect("every node has at least one copy")
}

/// Applies the activation of `proposer` towards `receiver` in place.
pub fn activate(
    state: &mut ExpandedState,
    inst: &Instance,
    proposer: NodeRef,
    receiver: NodeRef,
) -> Outcome {
    debug_assert_ne!(proposer.side, receiver.side);
    if state.matching().nodes_connected(proposer, receiver) {
        return Outcome::Skipped;
    }
    let r = cheapest_copy(state, receiver);
    let p = cheapest_copy(state, proposer);
    let (a_r, a_p) = (state.aspiration(r), state.aspiration(p));
    let w = inst.weight_between(proposer, receiver);

    let gate = a_p + a_r < w;
    debug_assert_eq!(gate, a_p + Money::EPS + a_r <= w);
    if gate {
        let matching = state.matching_mut();
        matching.remove(p);
        matching.remove(r);
        let (u, v) = match proposer.side {
            Side::U => (p, r),
            Side::V => (r, p),
        };
        matching
            .insert(CopyEdge {
                u: u.node.index,
                i: u.index,
                v: v.node.index,
                j: v.index,
            })
            .expect("both copies were just freed and the nodes are not connected");
        state.set_aspiration(p, w - a_r);
        return Outcome::Matched;
    }

    let positive = free_copies(state, proposer, true);
    match positive
        .into_iter()
        .min_by_key(|&c| (state.aspiration(c), c.index))
    {
        Some(m) => {
            state.set_aspiration(m, state.aspiration(m) - Money::EPS);
            Outcome::FailedDecrement
        }
        None => Outcome::FailedNoOp,
    }
}

/// Draws proposer then receiver and activates them.
pub fn step<R: Rng + ?Sized>(
    state: &mut ExpandedState,
    inst: &Instance,
    rng: &mut R,
) -> Activation {
    let g = rng.random_range(0..inst.num_nodes());
    let proposer = if g < inst.num_u() {
        NodeRef::u(g)
    } else {
        NodeRef::v(g - inst.num_u())
    };
    let other = proposer.side.opposite();
    let receiver = NodeRef {
        side: other,
        index: rng.random_range(0..inst.class_size(other)),
    };
    let outcome = activate(state, inst, proposer, receiver);
    Activation {
        proposer,
        receiver,
        outcome,
    }
}

/// A steppable run over a borrowed instance.
#[derive(Debug, Clone)]
pub struct Simulator<'a> {
    inst: &'a Instance,
    state: ExpandedState,
    rng: ChaCha8Rng,
    iter: u64,
}

impl<'a> Simulator<'a> {
    pub fn new(inst: &'a Instance, state: ExpandedState, seed: u64) -> Self {
        Simulator {
            inst,
            state,
            rng: ChaCha8Rng::seed_from_u64(seed),
            iter: 0,
        }
    }

    pub fn step(&mut self) -> Activation {
        self.iter += 1;
        step(&mut self.state, self.inst, &mut self.rng)
    }

    /// Trace row describing the current state after `activation`.
    pub fn record(&self, activation: Activation) -> TraceRecord {
        TraceRecord {
            iter: self.iter,
            proposer: activation.proposer,
            receiver: activation.receiver,
            outcome: activation.outcome,
            total_feasible_aspiration: self.state.total_feasible_aspiration(),
            matched_edges: self.state.matching().len(),
            f_plus_size: self.state.f_plus_size(),
        }
    }

    pub fn iterations(&self) -> u64 {
        self.iter
    }

    pub fn state(&self) -> &ExpandedState {
        &self.state
    }

    pub fn into_state(self) -> ExpandedState {
        self.state
    }

    pub fn is_core(&self) -> bool {
        is_copies_core(&self.state, self.inst)
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub state: ExpandedState,
    pub trace: Vec<TraceRecord>,
    pub iterations: u64,
    pub converged: bool,
    /// First checked iteration at which the state was copies-core.
    pub iterations_to_core: Option<u64>,
}

/// Steps up to the horizon, stopping early once a periodic check finds a
/// copies-core state. The final state is always checked once so that
/// `converged` is meaningful even with checks disabled.
pub fn run(inst: &Instance, config: &RunConfig) -> Result<RunResult, DynamicsError> {
    let start = initial_state(inst, &config.init, config.seed)?;
    let mut sim = Simulator::new(inst, start, config.seed);
    let mut trace = Vec::new();
    let period = config.core_check_period;
    let mut hit = (period > 0 && sim.is_core()).then_some(0);

    while hit.is_none() && sim.iterations() < config.horizon {
        let act = sim.step();
        if config.record_trace {
            trace.push(sim.record(act));
        }
        if period > 0 && sim.iterations().is_multiple_of(period) && sim.is_core() {
            hit = Some(sim.iterations());
        }
    }
    let converged = hit.is_some() || sim.is_core();
    let iterations = sim.iterations();
    Ok(RunResult {
        state: sim.into_state(),
        trace,
        iterations,
        converged,
        iterations_to_core: hit,
    })
}

/// Every possible activation from `state`, simulated without randomness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub proposer: NodeRef,
    pub receiver: NodeRef,
    pub outcome: Outcome,
    pub changes_state: bool,
}

pub fn enumerate_enabled_transitions(state: &ExpandedState, inst: &Instance) -> Vec<Transition> {
    let mut out = Vec::new();
    for side in [Side::U, Side::V] {
        for p in 0..inst.class_size(side) {
            for r in 0..inst.class_size(side.opposite()) {
                let proposer = NodeRef { side, index: p };
                let receiver = NodeRef {
                    side: side.opposite(),
                    index: r,
                };
                let mut next = state.clone();
                let outcome = activate(&mut next, inst, proposer, receiver);
                out.push(Transition {
                    proposer,
                    receiver,
                    outcome,
                    changes_state: next != *state,
                });
            }
        }
    }
    out
}

/// True when no activation changes the state.
pub fn is_absorbing(state: &ExpandedState, inst: &Instance) -> bool {
    enumerate_enabled_transitions(state, inst)
        .iter()
        .all(|t| !t.changes_state)
}

pub fn write_trace_csv<W: Write>(
    inst: &Instance,
    trace: &[TraceRecord],
    mut out: W,
) -> std::io::Result<()> {
    writeln!(out, "{TRACE_CSV_HEADER}")?;
    for r in trace {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.iter,
            inst.name(r.proposer),
            inst.name(r.receiver),
            r.outcome,
            r.total_feasible_aspiration,
            r.matched_edges,
            r.f_plus_size
        )?;
    }
    Ok(())
}

/// Sidecar written next to a trace file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceMeta {
    pub epsilon: String,
    pub seed: u64,
    pub horizon: u64,
    pub instance_digest: String,
}

impl TraceMeta {
    pub fn new(inst: &Instance, config: &RunConfig) -> Self {
        TraceMeta {
            epsilon: format_rational(inst.epsilon()),
            seed: config.seed,
            horizon: config.horizon,
            instance_digest: inst.digest(),
        }
    }
}
