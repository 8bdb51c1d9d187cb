//! Centralized Hungarian-style solver that drives an instance to a
//! copies-core state.
//!
//! One class is over-aspirated (every copy asks for the largest weight at its
//! node) and the free copies with positive aspiration, `F+`, are then cleared
//! one by one. For the copy under consideration the equality digraph decides
//! which of four moves applies, checked in this order:
//!
//! 1. *decreasing aspiration*: the copy has no tight arc; lower it.
//! 2. *augmenting path*: a directed path reaches a free opposite copy; flip it.
//! 3. *copies exchange*: a path reaches a same-class copy with zero
//!    aspiration; flip it so that copy is the one left free.
//! 4. *aspiration transfer*: lower every reachable same-class copy and raise
//!    every reachable opposite copy by the same amount.
//!
//! Edge saturation and pairwise stability hold after every move, so once
//! `F+` is empty the state is copies-core.

use std::borrow::Cow;
use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt;
use std::io::Write;

use thiserror::Error;

use crate::expanded::{check_feasible, is_pairwise_stable, CopyEdge, CopyId, ExpandedState};
use crate::instance::{Instance, NodeRef, Side};
use crate::money::Money;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StepMode {
    /// Every aspiration change is one grid step.
    #[default]
    Epsilon,
    /// Each change is as large as possible before the equality digraph
    /// gains an arc or a copy reaches zero.
    MinDelta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverConfig {
    pub step_mode: StepMode,
    pub over_aspiration_class: Side,
    /// Re-certify feasibility and stability after every iteration.
    pub check_invariants: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            step_mode: StepMode::Epsilon,
            over_aspiration_class: Side::V,
            check_invariants: cfg!(debug_assertions),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Case {
    DecreasingAspiration,
    AugmentingPath,
    CopiesExchange,
    AspirationTransfer,
}

impl Case {
    pub fn as_str(self) -> &'static str {
        match self {
            Case::DecreasingAspiration => "decreasing-aspiration",
            Case::AugmentingPath => "augmenting-path",
            Case::CopiesExchange => "copies-exchange",
            Case::AspirationTransfer => "aspiration-transfer",
        }
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One inner-loop iteration. Totals are reported for the instance's own U
/// and V classes regardless of which class was over-aspirated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IterationRecord {
    pub iter: usize,
    /// Index of the outer-loop pass this iteration belongs to.
    pub outer: usize,
    pub case: Case,
    /// `|F+|` after the iteration.
    pub f_plus: usize,
    pub total_v_aspiration: Money,
    pub total_u_aspiration: Money,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub state: ExpandedState,
    pub log: Vec<IterationRecord>,
    /// `|F+|` right after over-aspiration.
    pub initial_f_plus: usize,
}

pub const LOG_CSV_HEADER: &str = "iter,case,f_plus,total_v_aspiration,total_u_aspiration";

impl Solution {
    pub fn write_log_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{LOG_CSV_HEADER}")?;
        for r in &self.log {
            writeln!(
                out,
                "{},{},{},{},{}",
                r.iter, r.case, r.f_plus, r.total_v_aspiration, r.total_u_aspiration
            )?;
        }
        Ok(())
    }

    pub fn case_count(&self, case: Case) -> usize {
        self.log.iter().filter(|r| r.case == case).count()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SolveError {
    #[error("solver exceeded its iteration bound of {cap}; this is a bug")]
    InternalNonTermination { cap: usize },
    #[error("loop invariant violated at iteration {iter}: {detail}")]
    InvariantViolated { iter: usize, detail: String },
}

/// Sets every copy of every node in `cls` to that node's largest incident
/// weight; the other class stays at zero.
pub fn over_aspirate(state: &ExpandedState, inst: &Instance, cls: Side) -> ExpandedState {
    let mut out = state.clone();
    for index in 0..inst.class_size(cls) {
        let node = NodeRef { side: cls, index };
        let top = (0..inst.class_size(cls.opposite()))
            .map(|k| {
                inst.weight_between(
                    node,
                    NodeRef {
                        side: cls.opposite(),
                        index: k,
                    },
                )
            })
            .max()
            .unwrap_or(Money::ZERO);
        for k in 0..inst.b(node) {
            out.set_aspiration(CopyId::new(node, k), top);
        }
    }
    out
}

/// Directed graph over copies: matched pairs point `u_i → v_j`, tight pairs
/// of unmatched nodes point `v_j → u_i`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EqualityDigraph {
    adj: BTreeMap<CopyId, Vec<CopyId>>,
}

impl EqualityDigraph {
    /// Out-neighbours in ascending `(node, copy)` order.
    pub fn out(&self, copy: CopyId) -> &[CopyId] {
        self.adj.get(&copy).map_or(&[], Vec::as_slice)
    }

    pub fn arcs(&self) -> impl Iterator<Item = (CopyId, CopyId)> + '_ {
        self.adj
            .iter()
            .flat_map(|(&from, tos)| tos.iter().map(move |&to| (from, to)))
    }

    pub fn num_arcs(&self) -> usize {
        self.adj.values().map(Vec::len).sum()
    }
}

pub fn build_equality_digraph(state: &ExpandedState, inst: &Instance) -> EqualityDigraph {
    let mut adj: BTreeMap<CopyId, Vec<CopyId>> = BTreeMap::new();
    let matching = state.matching();
    for e in matching.edges() {
        adj.entry(e.u_copy()).or_default().push(e.v_copy());
    }
    for u in 0..inst.num_u() {
        for v in 0..inst.num_v() {
            if matching.is_pair_matched(u, v) {
                continue;
            }
            let w = inst.weight(u, v);
            for (i, &au) in state.copies(NodeRef::u(u)).iter().enumerate() {
                for (j, &av) in state.copies(NodeRef::v(v)).iter().enumerate() {
                    if au + av == w {
                        adj.entry(CopyId::v(v, j))
                            .or_default()
                            .push(CopyId::u(u, i));
                    }
                }
            }
        }
    }
    for tos in adj.values_mut() {
        tos.sort_unstable();
    }
    EqualityDigraph { adj }
}

struct Reach {
    order: Vec<CopyId>,
    parent: HashMap<CopyId, CopyId>,
}

impl Reach {
    fn from(graph: &EqualityDigraph, start: CopyId) -> Reach {
        let mut order = vec![start];
        let mut parent = HashMap::new();
        let mut seen = HashSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(x) = queue.pop_front() {
            for &y in graph.out(x) {
                if seen.insert(y) {
                    parent.insert(y, x);
                    order.push(y);
                    queue.push_back(y);
                }
            }
        }
        Reach { order, parent }
    }

    fn path_to(&self, target: CopyId) -> Vec<CopyId> {
        let mut path = vec![target];
        let mut x = target;
        while let Some(&p) = self.parent.get(&x) {
            path.push(p);
            x = p;
        }
        path.reverse();
        path
    }
}

/// Flips a path that alternates tight `v → u` arcs (added) with matched
/// `u → v` arcs (removed).
fn flip_path(state: &mut ExpandedState, path: &[CopyId]) -> Result<(), String> {
    let mut additions = Vec::new();
    for w in path.windows(2) {
        let (x, y) = (w[0], w[1]);
        match (x.side(), y.side()) {
            (Side::V, Side::U) => additions.push(CopyEdge {
                u: y.node.index,
                i: y.index,
                v: x.node.index,
                j: x.index,
            }),
            (Side::U, Side::V) => {
                let removed = state.matching_mut().remove(x);
                if removed.map(|e| e.v_copy()) != Some(y) {
                    return Err(format!("path arc {x:?} -> {y:?} is not a matching edge"));
                }
            }
            _ => return Err("path does not alternate classes".into()),
        }
    }
    for edge in additions {
        state
            .matching_mut()
            .insert(edge)
            .map_err(|e| format!("flip produced an invalid matching: {e}"))?;
    }
    Ok(())
}

/// Slack `a_u + a_v − W` over copies of unmatched node pairs, restricted to
/// the given V copies and U copies outside `exclude_u`.
fn min_slack(
    state: &ExpandedState,
    inst: &Instance,
    v_copies: &[CopyId],
    exclude_u: &HashSet<CopyId>,
) -> Option<Money> {
    let mut best: Option<Money> = None;
    for &d in v_copies {
        let ad = state.aspiration(d);
        for u in 0..inst.num_u() {
            if state.matching().is_pair_matched(u, d.node.index) {
                continue;
            }
            let w = inst.weight(u, d.node.index);
            for (i, &au) in state.copies(NodeRef::u(u)).iter().enumerate() {
                if exclude_u.contains(&CopyId::u(u, i)) {
                    continue;
                }
                let slack = ad + au - w;
                best = Some(best.map_or(slack, |b| b.min(slack)));
            }
        }
    }
    best
}

/// Runs the solver from the all-zero state.
pub fn solve(inst: &Instance, config: &SolverConfig) -> Result<Solution, SolveError> {
    let flipped = config.over_aspiration_class == Side::U;
    let work: Cow<'_, Instance> = if flipped {
        Cow::Owned(inst.transposed())
    } else {
        Cow::Borrowed(inst)
    };
    let mut solution = solve_over_v(&work, config)?;
    if flipped {
        solution.state = solution.state.transposed();
        for r in &mut solution.log {
            std::mem::swap(&mut r.total_u_aspiration, &mut r.total_v_aspiration);
        }
    }
    Ok(solution)
}

/// The solver with V as the over-aspirated class.
fn solve_over_v(inst: &Instance, config: &SolverConfig) -> Result<Solution, SolveError> {
    let mut state = over_aspirate(&ExpandedState::zero(inst), inst, Side::V);
    let cap = state.total_aspiration(Side::V).0 as usize + inst.b_v().iter().sum::<usize>() + 1;
    let initial_f_plus = state.f_plus_size();
    let mut log = Vec::new();
    let mut outer = 0;

    let violated = |iter: usize, detail: String| SolveError::InvariantViolated { iter, detail };
    if config.check_invariants && !is_pairwise_stable(&state, inst) {
        return Err(violated(0, "over-aspiration left an unstable pair".into()));
    }

    loop {
        let f_plus = state.f_plus();
        let Some(&target) = f_plus.first() else { break };
        if target.side() != Side::V {
            return Err(violated(
                log.len(),
                format!("free copy {target:?} of the low class has positive aspiration"),
            ));
        }
        let start_size = f_plus.len();
        loop {
            if log.len() >= cap {
                return Err(SolveError::InternalNonTermination { cap });
            }
            let v_total_before = state.total_aspiration(Side::V);
            let case = inner_step(&mut state, inst, target, config.step_mode)
                .map_err(|d| violated(log.len(), d))?;
            let f_plus_now = state.f_plus_size();
            let record = IterationRecord {
                iter: log.len(),
                outer,
                case,
                f_plus: f_plus_now,
                total_v_aspiration: state.total_aspiration(Side::V),
                total_u_aspiration: state.total_aspiration(Side::U),
            };
            if config.check_invariants {
                check_iteration(&state, inst, &record, start_size, v_total_before)
                    .map_err(|d| violated(record.iter, d))?;
            }
            log.push(record);
            if f_plus_now < start_size {
                break;
            }
        }
        outer += 1;
    }
    Ok(Solution {
        state,
        log,
        initial_f_plus,
    })
}

fn check_iteration(
    state: &ExpandedState,
    inst: &Instance,
    record: &IterationRecord,
    start_size: usize,
    v_total_before: Money,
) -> Result<(), String> {
    let feas = check_feasible(state, inst);
    if !feas.pass() {
        return Err(format!("infeasible state: {:?}", feas.violations));
    }
    if !is_pairwise_stable(state, inst) {
        return Err("pairwise stability broken".into());
    }
    if record.f_plus > start_size {
        return Err(format!("|F+| grew from {start_size} to {}", record.f_plus));
    }
    if matches!(
        record.case,
        Case::DecreasingAspiration | Case::AspirationTransfer
    ) && state.total_aspiration(Side::V) >= v_total_before
    {
        return Err(format!(
            "{} did not lower the over-aspirated total",
            record.case
        ));
    }
    Ok(())
}

/// One inner-loop iteration for the considered free copy `target` of V.
fn inner_step(
    state: &mut ExpandedState,
    inst: &Instance,
    target: CopyId,
    mode: StepMode,
) -> Result<Case, String> {
    let graph = build_equality_digraph(state, inst);

    if graph.out(target).is_empty() {
        let delta = match mode {
            StepMode::Epsilon => Money::EPS,
            StepMode::MinDelta => {
                let a = state.aspiration(target);
                min_slack(state, inst, &[target], &HashSet::new()).map_or(a, |s| s.min(a))
            }
        };
        if delta <= Money::ZERO {
            return Err(format!(
                "non-positive decrease {delta} in decreasing-aspiration case"
            ));
        }
        state.set_aspiration(target, state.aspiration(target) - delta);
        return Ok(Case::DecreasingAspiration);
    }

    let reach = Reach::from(&graph, target);
    let matching = state.matching();
    if let Some(&end) = reach
        .order
        .iter()
        .find(|c| c.side() == Side::U && matching.is_free(**c))
    {
        flip_path(state, &reach.path_to(end))?;
        return Ok(Case::AugmentingPath);
    }
    if let Some(&end) = reach
        .order
        .iter()
        .find(|&&c| c.side() == Side::V && c != target && state.aspiration(c) == Money::ZERO)
    {
        flip_path(state, &reach.path_to(end))?;
        return Ok(Case::CopiesExchange);
    }

    let lowered: Vec<CopyId> = reach
        .order
        .iter()
        .copied()
        .filter(|c| c.side() == Side::V)
        .collect();
    let raised: HashSet<CopyId> = reach
        .order
        .iter()
        .copied()
        .filter(|c| c.side() == Side::U)
        .collect();
    let delta = match mode {
        StepMode::Epsilon => Money::EPS,
        StepMode::MinDelta => {
            let floor = lowered
                .iter()
                .map(|&c| state.aspiration(c))
                .min()
                .expect("target is lowered");
            min_slack(state, inst, &lowered, &raised).map_or(floor, |s| s.min(floor))
        }
    };
    if delta <= Money::ZERO {
        return Err(format!("non-positive transfer {delta}"));
    }
    for &c in &lowered {
        state.set_aspiration(c, state.aspiration(c) - delta);
    }
    let mut raised: Vec<CopyId> = raised.into_iter().collect();
    raised.sort_unstable();
    for c in raised {
        state.set_aspiration(c, state.aspiration(c) + delta);
    }
    Ok(Case::AspirationTransfer)
}
