//! Exact maximum B-matching values and coalition-level core certification.
//!
//! The primary solver is successive-shortest-path min-cost flow on
//! `source → u (cap B(u)) → v (cap 1, cost −W) → v (cap B(v)) → sink`, one unit
//! per augmentation, stopping at the first augmentation that does not gain
//! weight. An exhaustive enumerator serves as the independent cross-check.

use std::collections::HashSet;

use thiserror::Error;

use crate::exec::{self, Execution};
use crate::expanded::NodesSolution;
use crate::instance::{Instance, NodeRef, Side};
use crate::money::Money;

/// Edge count up to which [`max_b_matching_value`] also runs the enumerator.
pub const ENUMERATION_EDGES: usize = 12;
/// Largest edge count [`brute_force_value`] accepts.
pub const BRUTE_FORCE_LIMIT: usize = 20;
/// Default node limit for [`check_nodes_core`].
pub const DEFAULT_CORE_NODE_LIMIT: usize = 10;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("{what} is too large: {size} exceeds the limit of {limit}")]
    TooLarge {
        what: &'static str,
        size: usize,
        limit: usize,
    },
    #[error("unknown node {0}")]
    UnknownNode(String),
}

/// A subset of U together with a subset of V, as sorted indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Coalition {
    pub u: Vec<usize>,
    pub v: Vec<usize>,
}

impl Coalition {
    pub fn full(inst: &Instance) -> Self {
        Coalition {
            u: (0..inst.num_u()).collect(),
            v: (0..inst.num_v()).collect(),
        }
    }

    pub fn from_masks(u_mask: u64, v_mask: u64, inst: &Instance) -> Self {
        Coalition {
            u: (0..inst.num_u()).filter(|i| u_mask >> i & 1 == 1).collect(),
            v: (0..inst.num_v()).filter(|i| v_mask >> i & 1 == 1).collect(),
        }
    }

    pub fn from_ids<S: AsRef<str>>(ids: &[S], inst: &Instance) -> Result<Self, OracleError> {
        let mut u = HashSet::new();
        let mut v = HashSet::new();
        for id in ids {
            match inst.find(id.as_ref()) {
                Some(NodeRef {
                    side: Side::U,
                    index,
                }) => u.insert(index),
                Some(NodeRef {
                    side: Side::V,
                    index,
                }) => v.insert(index),
                None => return Err(OracleError::UnknownNode(id.as_ref().to_string())),
            };
        }
        let mut u: Vec<usize> = u.into_iter().collect();
        let mut v: Vec<usize> = v.into_iter().collect();
        u.sort_unstable();
        v.sort_unstable();
        Ok(Coalition { u, v })
    }

    pub fn with(&self, node: NodeRef) -> Self {
        let mut out = self.clone();
        let list = match node.side {
            Side::U => &mut out.u,
            Side::V => &mut out.v,
        };
        if let Err(pos) = list.binary_search(&node.index) {
            list.insert(pos, node.index);
        }
        out
    }

    pub fn len(&self) -> usize {
        self.u.len() + self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Edges of the induced subgraph that carry positive weight. Zero-weight
    /// edges never raise a matching's value and are left out.
    pub fn positive_edges(&self, inst: &Instance) -> Vec<(usize, usize)> {
        self.u
            .iter()
            .flat_map(|&u| self.v.iter().map(move |&v| (u, v)))
            .filter(|&(u, v)| inst.weight(u, v).is_positive())
            .collect()
    }

    pub fn allocation(&self, sol: &NodesSolution) -> Money {
        self.u.iter().map(|&u| sol.allocation_u[u]).sum::<Money>()
            + self.v.iter().map(|&v| sol.allocation_v[v]).sum::<Money>()
    }
}

/// An optimal B-matching: its value and the matched node pairs (sorted).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BMatching {
    pub value: Money,
    pub pairs: Vec<(usize, usize)>,
}

/// Maximum B-matching value over a coalition, with a witness matching.
///
/// Small subgraphs (at most [`ENUMERATION_EDGES`] positive edges) are solved
/// by enumeration as well and the two answers must agree.
pub fn max_b_matching_value(inst: &Instance, coalition: &Coalition) -> BMatching {
    let flow = flow_max_b_matching(inst, coalition);
    if coalition.positive_edges(inst).len() <= ENUMERATION_EDGES {
        let brute = enumerate_best(inst, coalition);
        assert_eq!(
            flow.value, brute.value,
            "flow solver disagrees with enumeration on coalition {coalition:?}"
        );
        return brute;
    }
    flow
}

struct Arc {
    to: usize,
    cap: i64,
    cost: i64,
}

struct Network {
    arcs: Vec<Arc>,
    adj: Vec<Vec<usize>>,
}

impl Network {
    fn new(n: usize) -> Self {
        Network {
            arcs: Vec::new(),
            adj: vec![Vec::new(); n],
        }
    }

    fn add(&mut self, from: usize, to: usize, cap: i64, cost: i64) -> usize {
        let id = self.arcs.len();
        self.arcs.push(Arc { to, cap, cost });
        self.arcs.push(Arc {
            to: from,
            cap: 0,
            cost: -cost,
        });
        self.adj[from].push(id);
        self.adj[to].push(id + 1);
        id
    }

    fn n(&self) -> usize {
        self.adj.len()
    }

    /// Bellman-Ford distances over residual arcs; unreachable nodes get 0.
    fn initial_potentials(&self, source: usize) -> Vec<i64> {
        let mut dist = vec![i64::MAX; self.n()];
        dist[source] = 0;
        for _ in 0..self.n() {
            let mut changed = false;
            for from in 0..self.n() {
                if dist[from] == i64::MAX {
                    continue;
                }
                for &a in &self.adj[from] {
                    let arc = &self.arcs[a];
                    if arc.cap > 0 && dist[from] + arc.cost < dist[arc.to] {
                        dist[arc.to] = dist[from] + arc.cost;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        dist.into_iter()
            .map(|d| if d == i64::MAX { 0 } else { d })
            .collect()
    }

    /// Dijkstra on reduced costs. Returns the true distances and the arc used
    /// to enter each node.
    fn shortest_paths(&self, source: usize, potential: &[i64]) -> (Vec<i64>, Vec<Option<usize>>) {
        let n = self.n();
        let mut dist = vec![i64::MAX; n];
        let mut via = vec![None; n];
        let mut done = vec![false; n];
        dist[source] = 0;
        loop {
            let next = (0..n)
                .filter(|&x| !done[x] && dist[x] != i64::MAX)
                .min_by_key(|&x| (dist[x], x));
            let Some(x) = next else { break };
            done[x] = true;
            for &a in &self.adj[x] {
                let arc = &self.arcs[a];
                if arc.cap <= 0 {
                    continue;
                }
                let reduced = arc.cost + potential[x] - potential[arc.to];
                debug_assert!(reduced >= 0, "negative reduced cost");
                let cand = dist[x] + reduced;
                if cand < dist[arc.to] {
                    dist[arc.to] = cand;
                    via[arc.to] = Some(a);
                }
            }
        }
        let real = (0..n)
            .map(|x| {
                if dist[x] == i64::MAX {
                    i64::MAX
                } else {
                    dist[x] - potential[source] + potential[x]
                }
            })
            .collect();
        (real, via)
    }
}

/// Min-cost-flow route to the maximum B-matching value.
pub fn flow_max_b_matching(inst: &Instance, coalition: &Coalition) -> BMatching {
    let (a, b) = (coalition.u.len(), coalition.v.len());
    let source = 0;
    let sink = a + b + 1;
    let mut net = Network::new(a + b + 2);
    for (k, &u) in coalition.u.iter().enumerate() {
        net.add(source, 1 + k, inst.b_u()[u] as i64, 0);
    }
    for (k, &v) in coalition.v.iter().enumerate() {
        net.add(1 + a + k, sink, inst.b_v()[v] as i64, 0);
    }
    let mut pair_arcs = Vec::new();
    for (ku, &u) in coalition.u.iter().enumerate() {
        for (kv, &v) in coalition.v.iter().enumerate() {
            let w = inst.weight(u, v).0;
            if w > 0 {
                let id = net.add(1 + ku, 1 + a + kv, 1, -w);
                pair_arcs.push((id, u, v));
            }
        }
    }

    let mut potential = net.initial_potentials(source);
    let mut total_cost = 0i64;
    loop {
        let (dist, via) = net.shortest_paths(source, &potential);
        if dist[sink] == i64::MAX || dist[sink] >= 0 {
            break;
        }
        let mut x = sink;
        while let Some(a) = via[x] {
            net.arcs[a].cap -= 1;
            net.arcs[a ^ 1].cap += 1;
            x = net.arcs[a ^ 1].to;
        }
        total_cost += dist[sink];
        for (p, d) in potential.iter_mut().zip(&dist) {
            if *d != i64::MAX {
                *p = *d;
            }
        }
    }

    let mut pairs: Vec<(usize, usize)> = pair_arcs
        .into_iter()
        .filter(|&(id, _, _)| net.arcs[id].cap == 0)
        .map(|(_, u, v)| (u, v))
        .collect();
    pairs.sort_unstable();
    BMatching {
        value: Money(-total_cost),
        pairs,
    }
}

fn enumerate_best(inst: &Instance, coalition: &Coalition) -> BMatching {
    let edges = coalition.positive_edges(inst);
    let mut deg_u = vec![0usize; inst.num_u()];
    let mut deg_v = vec![0usize; inst.num_v()];
    let mut chosen = Vec::new();
    let mut best = BMatching {
        value: Money::ZERO,
        pairs: Vec::new(),
    };

    #[allow(clippy::too_many_arguments)]
    fn go(
        k: usize,
        value: Money,
        edges: &[(usize, usize)],
        inst: &Instance,
        deg_u: &mut [usize],
        deg_v: &mut [usize],
        chosen: &mut Vec<(usize, usize)>,
        best: &mut BMatching,
    ) {
        if k == edges.len() {
            if value > best.value {
                best.value = value;
                best.pairs = chosen.clone();
            }
            return;
        }
        let (u, v) = edges[k];
        if deg_u[u] < inst.b_u()[u] && deg_v[v] < inst.b_v()[v] {
            deg_u[u] += 1;
            deg_v[v] += 1;
            chosen.push((u, v));
            go(
                k + 1,
                value + inst.weight(u, v),
                edges,
                inst,
                deg_u,
                deg_v,
                chosen,
                best,
            );
            chosen.pop();
            deg_u[u] -= 1;
            deg_v[v] -= 1;
        }
        go(k + 1, value, edges, inst, deg_u, deg_v, chosen, best);
    }

    go(
        0,
        Money::ZERO,
        &edges,
        inst,
        &mut deg_u,
        &mut deg_v,
        &mut chosen,
        &mut best,
    );
    best
}

/// Exhaustive maximum over every edge subset that is a B-matching.
pub fn brute_force_value(inst: &Instance, coalition: &Coalition) -> Result<Money, OracleError> {
    let m = coalition.positive_edges(inst).len();
    if m > BRUTE_FORCE_LIMIT {
        return Err(OracleError::TooLarge {
            what: "induced subgraph",
            size: m,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    Ok(enumerate_best(inst, coalition).value)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoalitionViolation {
    pub coalition: Coalition,
    pub allocation: Money,
    pub value: Money,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodesCoreReport {
    /// Maximum B-matching value of the grand coalition.
    pub optimum: Money,
    pub total_allocation: Money,
    /// First coalition (in mask order) whose allocation falls short.
    pub blocking: Option<CoalitionViolation>,
}

impl NodesCoreReport {
    pub fn efficient(&self) -> bool {
        self.total_allocation == self.optimum
    }

    pub fn pass(&self) -> bool {
        self.efficient() && self.blocking.is_none()
    }

    pub fn to_json(&self, inst: &Instance) -> serde_json::Value {
        serde_json::json!({
            "pass": self.pass(),
            "optimum": self.optimum,
            "total_allocation": self.total_allocation,
            "blocking_coalition": self.blocking.as_ref().map(|b| serde_json::json!({
                "nodes": b.coalition.u.iter().map(|&u| inst.u_nodes()[u].clone())
                    .chain(b.coalition.v.iter().map(|&v| inst.v_nodes()[v].clone()))
                    .collect::<Vec<_>>(),
                "allocation": b.allocation,
                "value": b.value,
            })),
        })
    }
}

/// Nodes-core check by enumerating every coalition `S_U ∪ S_V`.
pub fn check_nodes_core(
    sol: &NodesSolution,
    inst: &Instance,
    node_limit: usize,
    exec: Execution,
) -> Result<NodesCoreReport, OracleError> {
    let n = inst.num_nodes();
    if n > node_limit {
        return Err(OracleError::TooLarge {
            what: "instance",
            size: n,
            limit: node_limit,
        });
    }
    let nu = inst.num_u();
    let optimum = max_b_matching_value(inst, &Coalition::full(inst)).value;
    let blocking = exec::find_first(1usize << n, exec, |mask| {
        let coalition =
            Coalition::from_masks((mask & ((1 << nu) - 1)) as u64, (mask >> nu) as u64, inst);
        let allocation = coalition.allocation(sol);
        let value = max_b_matching_value(inst, &coalition).value;
        (allocation < value).then_some(CoalitionViolation {
            coalition,
            allocation,
            value,
        })
    });
    Ok(NodesCoreReport {
        optimum,
        total_allocation: sol.total(),
        blocking,
    })
}
