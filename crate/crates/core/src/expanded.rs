//! The copies-level view of an instance.
//!
//! Every node `g` is expanded into `B(g)` unit-capacity copies. A state pairs
//! one aspiration per copy with a B-copies matching; both the centralized
//! solver and the proposals dynamics mutate this single structure.

use std::fmt;

use indexmap::IndexMap;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::{Instance, NodeRef, Side};
use crate::money::Money;

/// The `index`-th copy of `node`. Indices are zero-based in memory and
/// one-based in every external format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CopyId {
    pub node: NodeRef,
    pub index: usize,
}

impl CopyId {
    pub fn new(node: NodeRef, index: usize) -> Self {
        CopyId { node, index }
    }

    pub fn u(node: usize, index: usize) -> Self {
        CopyId::new(NodeRef::u(node), index)
    }

    pub fn v(node: usize, index: usize) -> Self {
        CopyId::new(NodeRef::v(node), index)
    }

    pub fn side(self) -> Side {
        self.node.side
    }

    pub fn display<'a>(&self, inst: &'a Instance) -> CopyName<'a> {
        CopyName {
            name: inst.name(self.node),
            index: self.index,
        }
    }
}

pub struct CopyName<'a> {
    name: &'a str,
    index: usize,
}

impl fmt::Display for CopyName<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.name, self.index + 1)
    }
}

/// A matched copy pair `(u_i, v_j)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CopyEdge {
    pub u: usize,
    pub i: usize,
    pub v: usize,
    pub j: usize,
}

impl CopyEdge {
    pub fn u_copy(self) -> CopyId {
        CopyId::u(self.u, self.i)
    }

    pub fn v_copy(self) -> CopyId {
        CopyId::v(self.v, self.j)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatchingError {
    #[error("copy {0:?} is already matched")]
    CopyBusy(CopyId),
    #[error("node pair (u{0}, v{1}) is already joined by a copy edge")]
    PairBusy(usize, usize),
    #[error("copy {0:?} does not exist")]
    NoSuchCopy(CopyId),
}

/// A B-copies matching: every copy has degree at most one and each node pair
/// is joined by at most one copy edge. Both invariants are enforced by
/// [`CopiesMatching::insert`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CopiesMatching {
    u_mate: Vec<Vec<Option<(usize, usize)>>>,
    v_mate: Vec<Vec<Option<(usize, usize)>>>,
    len: usize,
}

impl CopiesMatching {
    pub fn empty(inst: &Instance) -> Self {
        CopiesMatching {
            u_mate: inst.b_u().iter().map(|&b| vec![None; b]).collect(),
            v_mate: inst.b_v().iter().map(|&b| vec![None; b]).collect(),
            len: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn slot(&self, copy: CopyId) -> Option<Option<(usize, usize)>> {
        let table = match copy.side() {
            Side::U => &self.u_mate,
            Side::V => &self.v_mate,
        };
        table.get(copy.node.index)?.get(copy.index).copied()
    }

    /// The copy matched to `copy`, if any.
    pub fn mate(&self, copy: CopyId) -> Option<CopyId> {
        let (n, k) = self.slot(copy)??;
        Some(CopyId::new(
            NodeRef {
                side: copy.side().opposite(),
                index: n,
            },
            k,
        ))
    }

    pub fn is_free(&self, copy: CopyId) -> bool {
        self.mate(copy).is_none()
    }

    /// Copy indices `(i, j)` joining `u` and `v`, if the pair is matched.
    pub fn pair_copies(&self, u: usize, v: usize) -> Option<(usize, usize)> {
        self.u_mate[u]
            .iter()
            .enumerate()
            .find_map(|(i, m)| match m {
                Some((mv, j)) if *mv == v => Some((i, *j)),
                _ => None,
            })
    }

    pub fn is_pair_matched(&self, u: usize, v: usize) -> bool {
        self.pair_copies(u, v).is_some()
    }

    /// Whether some copy of `node` is matched to some copy of `other`.
    pub fn nodes_connected(&self, node: NodeRef, other: NodeRef) -> bool {
        match node.side {
            Side::U => self.is_pair_matched(node.index, other.index),
            Side::V => self.is_pair_matched(other.index, node.index),
        }
    }

    pub fn degree(&self, node: NodeRef) -> usize {
        let table = match node.side {
            Side::U => &self.u_mate,
            Side::V => &self.v_mate,
        };
        table[node.index].iter().filter(|m| m.is_some()).count()
    }

    pub fn insert(&mut self, edge: CopyEdge) -> Result<(), MatchingError> {
        for copy in [edge.u_copy(), edge.v_copy()] {
            match self.slot(copy) {
                None => return Err(MatchingError::NoSuchCopy(copy)),
                Some(Some(_)) => return Err(MatchingError::CopyBusy(copy)),
                Some(None) => {}
            }
        }
        if self.is_pair_matched(edge.u, edge.v) {
            return Err(MatchingError::PairBusy(edge.u, edge.v));
        }
        self.u_mate[edge.u][edge.i] = Some((edge.v, edge.j));
        self.v_mate[edge.v][edge.j] = Some((edge.u, edge.i));
        self.len += 1;
        Ok(())
    }

    /// Unmatches `copy`, returning the edge that was removed.
    pub fn remove(&mut self, copy: CopyId) -> Option<CopyEdge> {
        let mate = self.mate(copy)?;
        let (uc, vc) = match copy.side() {
            Side::U => (copy, mate),
            Side::V => (mate, copy),
        };
        self.u_mate[uc.node.index][uc.index] = None;
        self.v_mate[vc.node.index][vc.index] = None;
        self.len -= 1;
        Some(CopyEdge {
            u: uc.node.index,
            i: uc.index,
            v: vc.node.index,
            j: vc.index,
        })
    }

    /// All copy edges ordered by `(u, i)`.
    pub fn edges(&self) -> Vec<CopyEdge> {
        let mut out = Vec::with_capacity(self.len);
        for (u, copies) in self.u_mate.iter().enumerate() {
            for (i, m) in copies.iter().enumerate() {
                if let Some((v, j)) = *m {
                    out.push(CopyEdge { u, i, v, j });
                }
            }
        }
        out
    }

    fn transposed(&self) -> CopiesMatching {
        CopiesMatching {
            u_mate: self.v_mate.clone(),
            v_mate: self.u_mate.clone(),
            len: self.len,
        }
    }
}

/// Copies-level aspirations plus a B-copies matching.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExpandedState {
    asp_u: Vec<Vec<Money>>,
    asp_v: Vec<Vec<Money>>,
    matching: CopiesMatching,
}

impl ExpandedState {
    /// All aspirations zero, empty matching.
    pub fn zero(inst: &Instance) -> Self {
        ExpandedState {
            asp_u: inst.b_u().iter().map(|&b| vec![Money::ZERO; b]).collect(),
            asp_v: inst.b_v().iter().map(|&b| vec![Money::ZERO; b]).collect(),
            matching: CopiesMatching::empty(inst),
        }
    }

    /// Builds a state from per-node aspiration vectors and a list of copy
    /// edges, validating shapes and matching invariants.
    pub fn from_parts(
        inst: &Instance,
        asp_u: Vec<Vec<Money>>,
        asp_v: Vec<Vec<Money>>,
        edges: &[CopyEdge],
    ) -> Result<Self, StateError> {
        let shape_ok = |asp: &[Vec<Money>], bs: &[usize]| {
            asp.len() == bs.len() && asp.iter().zip(bs).all(|(a, b)| a.len() == *b)
        };
        if !shape_ok(&asp_u, inst.b_u()) || !shape_ok(&asp_v, inst.b_v()) {
            return Err(StateError::Shape(
                "aspiration vectors must have one entry per copy".into(),
            ));
        }
        let mut matching = CopiesMatching::empty(inst);
        for e in edges {
            matching.insert(*e)?;
        }
        Ok(ExpandedState {
            asp_u,
            asp_v,
            matching,
        })
    }

    pub fn matching(&self) -> &CopiesMatching {
        &self.matching
    }

    pub fn matching_mut(&mut self) -> &mut CopiesMatching {
        &mut self.matching
    }

    pub fn aspiration(&self, copy: CopyId) -> Money {
        self.copies(copy.node)[copy.index]
    }

    pub fn set_aspiration(&mut self, copy: CopyId, value: Money) {
        self.copies_mut(copy.node)[copy.index] = value;
    }

    /// Aspirations of every copy of `node`, by copy index.
    pub fn copies(&self, node: NodeRef) -> &[Money] {
        match node.side {
            Side::U => &self.asp_u[node.index],
            Side::V => &self.asp_v[node.index],
        }
    }

    fn copies_mut(&mut self, node: NodeRef) -> &mut [Money] {
        match node.side {
            Side::U => &mut self.asp_u[node.index],
            Side::V => &mut self.asp_v[node.index],
        }
    }

    pub fn aspirations(&self, side: Side) -> &[Vec<Money>] {
        match side {
            Side::U => &self.asp_u,
            Side::V => &self.asp_v,
        }
    }

    pub fn total_aspiration(&self, side: Side) -> Money {
        self.aspirations(side).iter().flatten().sum()
    }

    /// Sum of aspirations over matched copies only.
    pub fn total_feasible_aspiration(&self) -> Money {
        self.matching
            .edges()
            .iter()
            .map(|e| self.aspiration(e.u_copy()) + self.aspiration(e.v_copy()))
            .sum()
    }

    pub fn all_copies(&self) -> impl Iterator<Item = CopyId> + '_ {
        let us = self
            .asp_u
            .iter()
            .enumerate()
            .flat_map(|(u, a)| (0..a.len()).map(move |i| CopyId::u(u, i)));
        let vs = self
            .asp_v
            .iter()
            .enumerate()
            .flat_map(|(v, a)| (0..a.len()).map(move |j| CopyId::v(v, j)));
        us.chain(vs)
    }

    /// Free copies with strictly positive aspiration, across all nodes.
    pub fn f_plus(&self) -> Vec<CopyId> {
        self.all_copies()
            .filter(|&c| self.matching.is_free(c) && self.aspiration(c).is_positive())
            .collect()
    }

    pub fn f_plus_size(&self) -> usize {
        self.all_copies()
            .filter(|&c| self.matching.is_free(c) && self.aspiration(c).is_positive())
            .count()
    }

    /// Same state with U and V swapped (pairs with [`Instance::transposed`]).
    pub fn transposed(&self) -> ExpandedState {
        ExpandedState {
            asp_u: self.asp_v.clone(),
            asp_v: self.asp_u.clone(),
            matching: self.matching.transposed(),
        }
    }
}

/// Free copies of `node` ordered by index; with `positive_only` only those
/// with strictly positive aspiration.
pub fn free_copies(state: &ExpandedState, node: NodeRef, positive_only: bool) -> Vec<CopyId> {
    (0..state.copies(node).len())
        .map(|k| CopyId::new(node, k))
        .filter(|&c| state.matching.is_free(c))
        .filter(|&c| !positive_only || state.aspiration(c).is_positive())
        .collect()
}

/// The opposite node whose copy is matched to `copy`.
pub fn partner(state: &ExpandedState, copy: CopyId) -> Option<NodeRef> {
    state.matching.mate(copy).map(|m| m.node)
}

/// Node-level allocation and B-matching obtained by summing copies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodesSolution {
    pub allocation_u: Vec<Money>,
    pub allocation_v: Vec<Money>,
    /// Matched node pairs `(u, v)`, sorted.
    pub matching: Vec<(usize, usize)>,
}

impl NodesSolution {
    pub fn allocation(&self, node: NodeRef) -> Money {
        match node.side {
            Side::U => self.allocation_u[node.index],
            Side::V => self.allocation_v[node.index],
        }
    }

    pub fn total(&self) -> Money {
        self.allocation_u.iter().chain(&self.allocation_v).sum()
    }

    pub fn degree(&self, node: NodeRef) -> usize {
        self.matching
            .iter()
            .filter(|&&(u, v)| match node.side {
                Side::U => u == node.index,
                Side::V => v == node.index,
            })
            .count()
    }
}

/// The reduction from copies to nodes.
pub fn reduce(state: &ExpandedState, _inst: &Instance) -> NodesSolution {
    let mut matching: Vec<(usize, usize)> =
        state.matching.edges().iter().map(|e| (e.u, e.v)).collect();
    matching.sort_unstable();
    matching.dedup();
    NodesSolution {
        allocation_u: state.asp_u.iter().map(|a| a.iter().sum()).collect(),
        allocation_v: state.asp_v.iter().map(|a| a.iter().sum()).collect(),
        matching,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SaturationViolation {
    pub edge: CopyEdge,
    pub sum: Money,
    pub weight: Money,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FeasibilityViolation {
    NegativeAspiration { copy: CopyId, aspiration: Money },
    Unsaturated(SaturationViolation),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeasibilityReport {
    pub violations: Vec<FeasibilityViolation>,
}

impl FeasibilityReport {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }
}

fn saturation_violations(state: &ExpandedState, inst: &Instance) -> Vec<SaturationViolation> {
    state
        .matching
        .edges()
        .into_iter()
        .filter_map(|edge| {
            let sum = state.aspiration(edge.u_copy()) + state.aspiration(edge.v_copy());
            let weight = inst.weight(edge.u, edge.v);
            (sum != weight).then_some(SaturationViolation { edge, sum, weight })
        })
        .collect()
}

/// Feasibility: a valid B-copies matching (guaranteed by construction),
/// non-negative aspirations, and every matched edge exactly saturated.
pub fn check_feasible(state: &ExpandedState, inst: &Instance) -> FeasibilityReport {
    let mut violations: Vec<FeasibilityViolation> = state
        .all_copies()
        .filter(|&c| state.aspiration(c).0 < 0)
        .map(|copy| FeasibilityViolation::NegativeAspiration {
            copy,
            aspiration: state.aspiration(copy),
        })
        .collect();
    violations.extend(
        saturation_violations(state, inst)
            .into_iter()
            .map(FeasibilityViolation::Unsaturated),
    );
    FeasibilityReport { violations }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilityViolation {
    pub u: usize,
    pub i: usize,
    pub v: usize,
    pub j: usize,
    pub sum: Money,
    pub weight: Money,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZeroGainViolation {
    pub copy: CopyId,
    pub aspiration: Money,
}

/// Verdict of the three copies-core conditions, with witnesses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoreReport {
    pub edge_saturation: Vec<SaturationViolation>,
    pub pairwise_stability: Vec<StabilityViolation>,
    pub zero_gain: Vec<ZeroGainViolation>,
}

impl CoreReport {
    pub fn saturation_ok(&self) -> bool {
        self.edge_saturation.is_empty()
    }

    pub fn stability_ok(&self) -> bool {
        self.pairwise_stability.is_empty()
    }

    pub fn zero_gain_ok(&self) -> bool {
        self.zero_gain.is_empty()
    }

    pub fn is_core(&self) -> bool {
        self.saturation_ok() && self.stability_ok() && self.zero_gain_ok()
    }

    pub fn to_json(&self, inst: &Instance) -> serde_json::Value {
        let copy = |c: CopyId| serde_json::json!([inst.name(c.node), c.index + 1]);
        serde_json::json!({
            "is_core": self.is_core(),
            "edge_saturation": {
                "pass": self.saturation_ok(),
                "violations": self.edge_saturation.iter().map(|s| serde_json::json!({
                    "u": copy(s.edge.u_copy()),
                    "v": copy(s.edge.v_copy()),
                    "sum": s.sum,
                    "weight": s.weight,
                })).collect::<Vec<_>>(),
            },
            "pairwise_stability": {
                "pass": self.stability_ok(),
                "violations": self.pairwise_stability.iter().map(|s| serde_json::json!({
                    "u": copy(CopyId::u(s.u, s.i)),
                    "v": copy(CopyId::v(s.v, s.j)),
                    "sum": s.sum,
                    "weight": s.weight,
                })).collect::<Vec<_>>(),
            },
            "zero_gain": {
                "pass": self.zero_gain_ok(),
                "violations": self.zero_gain.iter().map(|z| serde_json::json!({
                    "copy": copy(z.copy),
                    "aspiration": z.aspiration,
                })).collect::<Vec<_>>(),
            },
        })
    }
}

fn stability_violations(
    state: &ExpandedState,
    inst: &Instance,
    first_only: bool,
) -> Vec<StabilityViolation> {
    let mut out = Vec::new();
    for u in 0..inst.num_u() {
        for v in 0..inst.num_v() {
            if state.matching.is_pair_matched(u, v) {
                continue;
            }
            let weight = inst.weight(u, v);
            for (i, &au) in state.asp_u[u].iter().enumerate() {
                for (j, &av) in state.asp_v[v].iter().enumerate() {
                    if au + av < weight {
                        out.push(StabilityViolation {
                            u,
                            i,
                            v,
                            j,
                            sum: au + av,
                            weight,
                        });
                        if first_only {
                            return out;
                        }
                    }
                }
            }
        }
    }
    out
}

/// Pairwise stability alone: every unmatched node pair is covered by every
/// combination of its copies' aspirations.
pub fn is_pairwise_stable(state: &ExpandedState, inst: &Instance) -> bool {
    stability_violations(state, inst, true).is_empty()
}

pub fn check_copies_core(state: &ExpandedState, inst: &Instance) -> CoreReport {
    CoreReport {
        edge_saturation: saturation_violations(state, inst),
        pairwise_stability: stability_violations(state, inst, false),
        zero_gain: state
            .all_copies()
            .filter(|&c| state.matching.is_free(c) && state.aspiration(c) != Money::ZERO)
            .map(|copy| ZeroGainViolation {
                copy,
                aspiration: state.aspiration(copy),
            })
            .collect(),
    }
}

/// Boolean form of [`check_copies_core`], cheapest condition first.
pub fn is_copies_core(state: &ExpandedState, inst: &Instance) -> bool {
    state
        .all_copies()
        .all(|c| !state.matching.is_free(c) || state.aspiration(c) == Money::ZERO)
        && state.matching.edges().iter().all(|e| {
            state.aspiration(e.u_copy()) + state.aspiration(e.v_copy()) == inst.weight(e.u, e.v)
        })
        && is_pairwise_stable(state, inst)
}

/// Draws a random feasible state: a random B-copies matching whose edges
/// split their weight at random, with free copies holding random grid
/// aspirations in `[0, max W]` (zero about half the time).
pub fn sample_feasible_state<R: Rng>(inst: &Instance, rng: &mut R) -> ExpandedState {
    let mut state = ExpandedState::zero(inst);
    let density: f64 = rng.random();
    let mut pairs: Vec<(usize, usize)> = (0..inst.num_u())
        .flat_map(|u| (0..inst.num_v()).map(move |v| (u, v)))
        .collect();
    rand::seq::SliceRandom::shuffle(pairs.as_mut_slice(), rng);
    for (u, v) in pairs {
        if !rng.random_bool(density) {
            continue;
        }
        let free_u = free_copies(&state, NodeRef::u(u), false);
        let free_v = free_copies(&state, NodeRef::v(v), false);
        if free_u.is_empty() || free_v.is_empty() {
            continue;
        }
        let i = free_u[rng.random_range(0..free_u.len())].index;
        let j = free_v[rng.random_range(0..free_v.len())].index;
        state
            .matching
            .insert(CopyEdge { u, i, v, j })
            .expect("both copies free and pair unmatched");
        let w = inst.weight(u, v).0;
        let split = rng.random_range(0..=w);
        state.asp_u[u][i] = Money(split);
        state.asp_v[v][j] = Money(w - split);
    }
    let max_w = inst.max_weight().0;
    for copy in state.all_copies().collect::<Vec<_>>() {
        if state.matching.is_free(copy) && rng.random_bool(0.5) {
            state.set_aspiration(copy, Money(rng.random_range(0..=max_w)));
        }
    }
    state
}

#[derive(Debug, Error)]
pub enum StateError {
    #[error("malformed state: {0}")]
    Malformed(String),
    #[error("state does not fit the instance: {0}")]
    Shape(String),
    #[error("invalid matching: {0}")]
    Matching(#[from] MatchingError),
}

/// On-disk snapshot: per-node aspiration arrays (grid units) and copy edges
/// as `[[u_name, i], [v_name, j]]` with one-based indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub aspirations: IndexMap<String, Vec<i64>>,
    pub matching: Vec<[(String, usize); 2]>,
}

impl ExpandedState {
    pub fn to_file(&self, inst: &Instance) -> StateFile {
        let mut aspirations = IndexMap::new();
        for side in [Side::U, Side::V] {
            for (k, asp) in self.aspirations(side).iter().enumerate() {
                let name = inst.name(NodeRef { side, index: k }).to_string();
                aspirations.insert(name, asp.iter().map(|m| m.0).collect());
            }
        }
        let matching = self
            .matching
            .edges()
            .into_iter()
            .map(|e| {
                [
                    (inst.u_nodes()[e.u].clone(), e.i + 1),
                    (inst.v_nodes()[e.v].clone(), e.j + 1),
                ]
            })
            .collect();
        StateFile {
            aspirations,
            matching,
        }
    }

    pub fn to_json(&self, inst: &Instance) -> String {
        serde_json::to_string_pretty(&self.to_file(inst)).expect("state serializes")
    }

    pub fn from_file(file: &StateFile, inst: &Instance) -> Result<Self, StateError> {
        for name in file.aspirations.keys() {
            if inst.find(name).is_none() {
                return Err(StateError::Shape(format!("unknown node {name}")));
            }
        }
        let read = |side: Side| -> Result<Vec<Vec<Money>>, StateError> {
            (0..inst.class_size(side))
                .map(|index| {
                    let node = NodeRef { side, index };
                    let name = inst.name(node);
                    let values = file.aspirations.get(name).ok_or_else(|| {
                        StateError::Shape(format!("missing aspirations for {name}"))
                    })?;
                    if values.len() != inst.b(node) {
                        return Err(StateError::Shape(format!(
                            "{name} has {} aspirations but B = {}",
                            values.len(),
                            inst.b(node)
                        )));
                    }
                    Ok(values.iter().map(|&x| Money(x)).collect())
                })
                .collect()
        };
        let asp_u = read(Side::U)?;
        let asp_v = read(Side::V)?;
        let mut edges = Vec::with_capacity(file.matching.len());
        for [(a, ai), (b, bi)] in &file.matching {
            let lookup = |name: &str, idx: usize| -> Result<CopyId, StateError> {
                let node = inst
                    .find(name)
                    .ok_or_else(|| StateError::Shape(format!("unknown node {name}")))?;
                if idx == 0 || idx > inst.b(node) {
                    return Err(StateError::Shape(format!(
                        "copy index {idx} of {name} outside 1..={}",
                        inst.b(node)
                    )));
                }
                Ok(CopyId::new(node, idx - 1))
            };
            let (x, y) = (lookup(a, *ai)?, lookup(b, *bi)?);
            let (uc, vc) = match (x.side(), y.side()) {
                (Side::U, Side::V) => (x, y),
                (Side::V, Side::U) => (y, x),
                _ => {
                    return Err(StateError::Shape(format!(
                        "edge {a}-{b} does not join opposite classes"
                    )))
                }
            };
            edges.push(CopyEdge {
                u: uc.node.index,
                i: uc.index,
                v: vc.node.index,
                j: vc.index,
            });
        }
        ExpandedState::from_parts(inst, asp_u, asp_v, &edges)
    }

    pub fn from_json(s: &str, inst: &Instance) -> Result<Self, StateError> {
        let file: StateFile =
            serde_json::from_str(s).map_err(|e| StateError::Malformed(e.to_string()))?;
        ExpandedState::from_file(&file, inst)
    }
}
