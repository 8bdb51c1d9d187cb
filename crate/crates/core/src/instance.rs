//! Problem instances: a complete bipartite graph with grid-valued weights and
//! per-node B-values.

use std::collections::HashSet;
use std::fmt;
use std::io::Read;

use indexmap::IndexMap;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::money::Money;

/// One of the two node classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    U,
    V,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::U => Side::V,
            Side::V => Side::U,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::U => f.write_str("U"),
            Side::V => f.write_str("V"),
        }
    }
}

/// A node addressed by class and position within the class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeRef {
    pub side: Side,
    pub index: usize,
}

impl NodeRef {
    pub fn u(index: usize) -> Self {
        NodeRef {
            side: Side::U,
            index,
        }
    }

    pub fn v(index: usize) -> Self {
        NodeRef {
            side: Side::V,
            index,
        }
    }
}

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("malformed input: {0}")]
    MalformedInput(String),
    #[error("weight {value} of ({u}, {v}) is not a multiple of epsilon {epsilon}")]
    OffGridWeight {
        u: String,
        v: String,
        value: String,
        epsilon: String,
    },
    #[error("node {node} has non-positive B-value {value}")]
    NonPositiveB { node: String, value: i64 },
    #[error("weight of ({u}, {v}) is negative: {value}")]
    NegativeWeight { u: String, v: String, value: String },
    #[error("removing the requested nodes would empty class {0}")]
    WouldEmptyClass(Side),
    #[error("unknown node {0}")]
    UnknownNode(String),
}

/// Emitted when a B-value exceeds the size of the opposite class and is
/// lowered to that size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClampWarning {
    pub node: String,
    pub requested: usize,
    pub clamped_to: usize,
}

impl fmt::Display for ClampWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "B({}) = {} exceeds the opposite class size; clamped to {}",
            self.node, self.requested, self.clamped_to
        )
    }
}

/// A weighted bipartite B-matching problem on an exact ε-grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    u_nodes: Vec<String>,
    v_nodes: Vec<String>,
    /// Row-major |U|×|V|.
    weights: Vec<Money>,
    b_u: Vec<usize>,
    b_v: Vec<usize>,
    epsilon: Ratio<i64>,
}

impl Instance {
    /// Builds an instance, lowering every B-value above the opposite class
    /// size. Clamps are returned as warnings.
    pub fn with_clamping(
        u_nodes: Vec<String>,
        v_nodes: Vec<String>,
        weights: Vec<Vec<Money>>,
        b_u: Vec<usize>,
        b_v: Vec<usize>,
        epsilon: Ratio<i64>,
    ) -> Result<(Instance, Vec<ClampWarning>), InstanceError> {
        let malformed = |msg: &str| Err(InstanceError::MalformedInput(msg.to_string()));
        if u_nodes.is_empty() || v_nodes.is_empty() {
            return malformed("both node classes must be non-empty");
        }
        if b_u.len() != u_nodes.len() || b_v.len() != v_nodes.len() {
            return malformed("B-value count does not match node count");
        }
        if weights.len() != u_nodes.len() || weights.iter().any(|r| r.len() != v_nodes.len()) {
            return malformed("weights must be a |U|x|V| matrix");
        }
        if epsilon <= Ratio::zero() {
            return malformed("epsilon must be positive");
        }
        let mut seen = HashSet::new();
        for id in u_nodes.iter().chain(&v_nodes) {
            if !seen.insert(id.as_str()) {
                return Err(InstanceError::MalformedInput(format!(
                    "duplicate node id {id}"
                )));
            }
        }
        for (row, u) in weights.iter().zip(&u_nodes) {
            for (w, v) in row.iter().zip(&v_nodes) {
                if w.0 < 0 {
                    return Err(InstanceError::NegativeWeight {
                        u: u.clone(),
                        v: v.clone(),
                        value: w.to_string(),
                    });
                }
            }
        }
        let mut warnings = Vec::new();
        let b_u = clamp_all(&u_nodes, b_u, v_nodes.len(), &mut warnings)?;
        let b_v = clamp_all(&v_nodes, b_v, u_nodes.len(), &mut warnings)?;
        Ok((
            Instance {
                u_nodes,
                v_nodes,
                weights: weights.into_iter().flatten().collect(),
                b_u,
                b_v,
                epsilon,
            },
            warnings,
        ))
    }

    pub fn u_nodes(&self) -> &[String] {
        &self.u_nodes
    }

    pub fn v_nodes(&self) -> &[String] {
        &self.v_nodes
    }

    pub fn num_u(&self) -> usize {
        self.u_nodes.len()
    }

    pub fn num_v(&self) -> usize {
        self.v_nodes.len()
    }

    pub fn num_nodes(&self) -> usize {
        self.num_u() + self.num_v()
    }

    pub fn class_size(&self, side: Side) -> usize {
        match side {
            Side::U => self.num_u(),
            Side::V => self.num_v(),
        }
    }

    pub fn epsilon(&self) -> Ratio<i64> {
        self.epsilon
    }

    /// W(u, v) in grid units.
    pub fn weight(&self, u: usize, v: usize) -> Money {
        self.weights[u * self.v_nodes.len() + v]
    }

    pub fn weight_rows(&self) -> impl Iterator<Item = &[Money]> {
        self.weights.chunks(self.v_nodes.len())
    }

    pub fn b_u(&self) -> &[usize] {
        &self.b_u
    }

    pub fn b_v(&self) -> &[usize] {
        &self.b_v
    }

    pub fn b(&self, node: NodeRef) -> usize {
        match node.side {
            Side::U => self.b_u[node.index],
            Side::V => self.b_v[node.index],
        }
    }

    pub fn b_values(&self, side: Side) -> &[usize] {
        match side {
            Side::U => &self.b_u,
            Side::V => &self.b_v,
        }
    }

    pub fn name(&self, node: NodeRef) -> &str {
        match node.side {
            Side::U => &self.u_nodes[node.index],
            Side::V => &self.v_nodes[node.index],
        }
    }

    pub fn find(&self, id: &str) -> Option<NodeRef> {
        if let Some(i) = self.u_nodes.iter().position(|n| n == id) {
            return Some(NodeRef::u(i));
        }
        self.v_nodes.iter().position(|n| n == id).map(NodeRef::v)
    }

    /// W between a node and a node of the opposite class.
    pub fn weight_between(&self, a: NodeRef, b: NodeRef) -> Money {
        debug_assert_ne!(a.side, b.side);
        match a.side {
            Side::U => self.weight(a.index, b.index),
            Side::V => self.weight(b.index, a.index),
        }
    }

    pub fn max_weight(&self) -> Money {
        self.weights.iter().copied().max().unwrap_or(Money::ZERO)
    }

    /// Number of copies in the expanded graph.
    pub fn num_copies(&self) -> usize {
        self.b_u.iter().sum::<usize>() + self.b_v.iter().sum::<usize>()
    }

    /// Swaps the roles of U and V.
    pub fn transposed(&self) -> Instance {
        let (nu, nv) = (self.num_u(), self.num_v());
        let mut weights = Vec::with_capacity(nu * nv);
        for v in 0..nv {
            for u in 0..nu {
                weights.push(self.weight(u, v));
            }
        }
        Instance {
            u_nodes: self.v_nodes.clone(),
            v_nodes: self.u_nodes.clone(),
            weights,
            b_u: self.b_v.clone(),
            b_v: self.b_u.clone(),
            epsilon: self.epsilon,
        }
    }

    fn weight_matrix(&self) -> Vec<Vec<Money>> {
        self.weight_rows().map(<[Money]>::to_vec).collect()
    }

    pub fn to_file(&self) -> InstanceFile {
        let eps = self.epsilon;
        let mut b_values = IndexMap::new();
        for (n, b) in self.u_nodes.iter().zip(&self.b_u) {
            b_values.insert(n.clone(), *b as i64);
        }
        for (n, b) in self.v_nodes.iter().zip(&self.b_v) {
            b_values.insert(n.clone(), *b as i64);
        }
        InstanceFile {
            epsilon: Decimal(format_rational(eps)),
            u_nodes: self.u_nodes.clone(),
            v_nodes: self.v_nodes.clone(),
            b_values,
            weights: self
                .weight_rows()
                .map(|row| {
                    row.iter()
                        .map(|w| Decimal(format_rational(eps * w.0)))
                        .collect()
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("instance serializes")
    }

    /// Hex SHA-256 of the canonical JSON encoding.
    pub fn digest(&self) -> String {
        let json = serde_json::to_string(&self.to_file()).expect("instance serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

fn clamp_all(
    names: &[String],
    bs: Vec<usize>,
    limit: usize,
    warnings: &mut Vec<ClampWarning>,
) -> Result<Vec<usize>, InstanceError> {
    names
        .iter()
        .zip(bs)
        .map(|(name, b)| {
            if b == 0 {
                return Err(InstanceError::NonPositiveB {
                    node: name.clone(),
                    value: 0,
                });
            }
            if b > limit {
                warnings.push(ClampWarning {
                    node: name.clone(),
                    requested: b,
                    clamped_to: limit,
                });
                Ok(limit)
            } else {
                Ok(b)
            }
        })
        .collect()
}

/// A decimal (or `p/q`) string; plain JSON numbers are accepted on input.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct Decimal(pub String);

impl<'de> Deserialize<'de> for Decimal {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match serde_json::Value::deserialize(d)? {
            serde_json::Value::String(s) => Ok(Decimal(s)),
            serde_json::Value::Number(n) => Ok(Decimal(n.to_string())),
            other => Err(serde::de::Error::custom(format!(
                "expected a decimal string, got {other}"
            ))),
        }
    }
}

/// The on-disk instance format.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub epsilon: Decimal,
    pub u_nodes: Vec<String>,
    pub v_nodes: Vec<String>,
    pub b_values: IndexMap<String, i64>,
    pub weights: Vec<Vec<Decimal>>,
}

/// Result of loading: the instance plus any clamping warnings.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub instance: Instance,
    pub warnings: Vec<ClampWarning>,
}

pub fn load_instance<R: Read>(source: R) -> Result<Loaded, InstanceError> {
    let file: InstanceFile = serde_json::from_reader(source)
        .map_err(|e| InstanceError::MalformedInput(e.to_string()))?;
    from_file(file)
}

pub fn load_instance_str(s: &str) -> Result<Loaded, InstanceError> {
    load_instance(s.as_bytes())
}

pub fn from_file(file: InstanceFile) -> Result<Loaded, InstanceError> {
    let eps128 = parse_rational(&file.epsilon.0)?;
    if !eps128.is_positive() {
        return Err(InstanceError::MalformedInput(format!(
            "epsilon must be positive, got {}",
            file.epsilon.0
        )));
    }
    let epsilon = narrow(eps128)?;
    if file.weights.len() != file.u_nodes.len() {
        return Err(InstanceError::MalformedInput(format!(
            "expected {} weight rows, got {}",
            file.u_nodes.len(),
            file.weights.len()
        )));
    }
    let mut weights = Vec::with_capacity(file.u_nodes.len());
    for (row, u) in file.weights.iter().zip(&file.u_nodes) {
        if row.len() != file.v_nodes.len() {
            return Err(InstanceError::MalformedInput(format!(
                "row for {u} has {} entries, expected {}",
                row.len(),
                file.v_nodes.len()
            )));
        }
        let mut out = Vec::with_capacity(row.len());
        for (w, v) in row.iter().zip(&file.v_nodes) {
            let value = parse_rational(&w.0)?;
            if value.is_negative() {
                return Err(InstanceError::NegativeWeight {
                    u: u.clone(),
                    v: v.clone(),
                    value: w.0.clone(),
                });
            }
            let units = value / eps128;
            if !units.is_integer() {
                return Err(InstanceError::OffGridWeight {
                    u: u.clone(),
                    v: v.clone(),
                    value: w.0.clone(),
                    epsilon: file.epsilon.0.clone(),
                });
            }
            let units = i64::try_from(units.to_integer())
                .map_err(|_| InstanceError::MalformedInput(format!("weight {} too large", w.0)))?;
            out.push(Money(units));
        }
        weights.push(out);
    }
    for key in file.b_values.keys() {
        if !file.u_nodes.contains(key) && !file.v_nodes.contains(key) {
            return Err(InstanceError::MalformedInput(format!(
                "b_values names unknown node {key}"
            )));
        }
    }
    let lookup_b = |name: &String| -> Result<usize, InstanceError> {
        let b = *file
            .b_values
            .get(name)
            .ok_or_else(|| InstanceError::MalformedInput(format!("missing B-value for {name}")))?;
        if b <= 0 {
            return Err(InstanceError::NonPositiveB {
                node: name.clone(),
                value: b,
            });
        }
        Ok(b as usize)
    };
    let b_u = file
        .u_nodes
        .iter()
        .map(lookup_b)
        .collect::<Result<_, _>>()?;
    let b_v = file
        .v_nodes
        .iter()
        .map(lookup_b)
        .collect::<Result<_, _>>()?;
    let (instance, warnings) =
        Instance::with_clamping(file.u_nodes, file.v_nodes, weights, b_u, b_v, epsilon)?;
    Ok(Loaded { instance, warnings })
}

fn narrow(r: Ratio<i128>) -> Result<Ratio<i64>, InstanceError> {
    match (i64::try_from(*r.numer()), i64::try_from(*r.denom())) {
        (Ok(n), Ok(d)) => Ok(Ratio::new(n, d)),
        _ => Err(InstanceError::MalformedInput(format!("{r} out of range"))),
    }
}

/// Parses `"12"`, `"-0.35"`, or `"3/8"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Ratio<i128>, InstanceError> {
    let bad = || InstanceError::MalformedInput(format!("not a decimal number: {s:?}"));
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: i128 = n.trim().parse().map_err(|_| bad())?;
        let d: i128 = d.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        return Ok(Ratio::new(n, d));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty()
        || !int_part.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
        || frac_part.len() > 30
    {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let mut numer: i128 = if digits.is_empty() {
        0
    } else {
        digits.parse().map_err(|_| bad())?
    };
    if neg {
        numer = -numer;
    }
    Ok(Ratio::new(numer, 10i128.pow(frac_part.len() as u32)))
}

/// Decimal when the expansion terminates, `p/q` otherwise.
pub fn format_rational(r: Ratio<i64>) -> String {
    let (n, d) = (*r.numer(), *r.denom());
    if d == 1 {
        return n.to_string();
    }
    let mut rest = d;
    let (mut twos, mut fives) = (0u32, 0u32);
    while rest % 2 == 0 {
        rest /= 2;
        twos += 1;
    }
    while rest % 5 == 0 {
        rest /= 5;
        fives += 1;
    }
    if rest != 1 {
        return format!("{n}/{d}");
    }
    let places = twos.max(fives);
    let scaled = i128::from(n) * 10i128.pow(places) / i128::from(d);
    let sign = if scaled < 0 { "-" } else { "" };
    let scaled = scaled.abs();
    let pow = 10i128.pow(places);
    format!(
        "{sign}{}.{:0width$}",
        scaled / pow,
        scaled % pow,
        width = places as usize
    )
}

/// Ranges for the task-assignment generator. Tasks form class U and robots
/// class V.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TaskAssignmentConfig {
    /// Inclusive range of integer task values V(t).
    pub value_min: u32,
    pub value_max: u32,
    /// Robot accuracy I(r) = k / accuracy_denominator with k drawn from
    /// `[accuracy_numer_min, accuracy_numer_max]`.
    pub accuracy_numer_min: u32,
    pub accuracy_numer_max: u32,
    pub accuracy_denominator: u32,
    pub task_b_min: usize,
    pub task_b_max: usize,
    pub robot_b_min: usize,
    pub robot_b_max: usize,
    /// Proportionality constant between I(r)·V(t) and W(t, r).
    pub scale: String,
    pub epsilon: String,
}

impl Default for TaskAssignmentConfig {
    fn default() -> Self {
        TaskAssignmentConfig {
            value_min: 1,
            value_max: 10,
            accuracy_numer_min: 5,
            accuracy_numer_max: 20,
            accuracy_denominator: 10,
            task_b_min: 1,
            task_b_max: 3,
            robot_b_min: 1,
            robot_b_max: 5,
            scale: "1".into(),
            epsilon: "1".into(),
        }
    }
}

fn check_range<T: PartialOrd + fmt::Display>(
    name: &str,
    lo: T,
    hi: T,
) -> Result<(), InstanceError> {
    if lo > hi {
        return Err(InstanceError::MalformedInput(format!(
            "{name} range is empty: [{lo}, {hi}]"
        )));
    }
    Ok(())
}

/// Random task/robot instance. W(t, r) = scale·I(r)·V(t) floored to the grid,
/// and robots with higher accuracy receive smaller B-values.
pub fn generate_task_assignment(
    num_tasks: usize,
    num_robots: usize,
    seed: u64,
    config: &TaskAssignmentConfig,
) -> Result<Instance, InstanceError> {
    if num_tasks == 0 || num_robots == 0 {
        return Err(InstanceError::MalformedInput(
            "need at least one task and one robot".into(),
        ));
    }
    check_range("value", config.value_min.max(1), config.value_max)?;
    check_range(
        "accuracy",
        config.accuracy_numer_min.max(1),
        config.accuracy_numer_max,
    )?;
    check_range("task B", config.task_b_min.max(1), config.task_b_max)?;
    check_range("robot B", config.robot_b_min.max(1), config.robot_b_max)?;
    if config.accuracy_denominator == 0 {
        return Err(InstanceError::MalformedInput(
            "accuracy_denominator must be positive".into(),
        ));
    }
    let scale = parse_rational(&config.scale)?;
    let eps = parse_rational(&config.epsilon)?;
    if !scale.is_positive() || !eps.is_positive() {
        return Err(InstanceError::MalformedInput(
            "scale and epsilon must be positive".into(),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values: Vec<u32> = (0..num_tasks)
        .map(|_| rng.random_range(config.value_min.max(1)..=config.value_max))
        .collect();
    let task_b: Vec<usize> = (0..num_tasks)
        .map(|_| rng.random_range(config.task_b_min.max(1)..=config.task_b_max))
        .collect();
    let accuracy: Vec<u32> = (0..num_robots)
        .map(|_| rng.random_range(config.accuracy_numer_min.max(1)..=config.accuracy_numer_max))
        .collect();
    let mut robot_b_pool: Vec<usize> = (0..num_robots)
        .map(|_| rng.random_range(config.robot_b_min.max(1)..=config.robot_b_max))
        .collect();
    robot_b_pool.sort_unstable();
    // Most accurate robot gets the smallest B.
    let mut by_accuracy: Vec<usize> = (0..num_robots).collect();
    by_accuracy.sort_by(|&a, &b| accuracy[b].cmp(&accuracy[a]).then(a.cmp(&b)));
    let mut robot_b = vec![0; num_robots];
    for (rank, &r) in by_accuracy.iter().enumerate() {
        robot_b[r] = robot_b_pool[rank];
    }

    let den = i128::from(config.accuracy_denominator);
    let weights = values
        .iter()
        .map(|&value| {
            accuracy
                .iter()
                .map(|&acc| {
                    let real = scale * Ratio::new(i128::from(acc) * i128::from(value), den);
                    Money((real / eps).floor().to_integer() as i64)
                })
                .collect()
        })
        .collect();
    let (inst, _) = Instance::with_clamping(
        (1..=num_tasks).map(|i| format!("t{i}")).collect(),
        (1..=num_robots).map(|i| format!("r{i}")).collect(),
        weights,
        task_b,
        robot_b,
        narrow(eps)?,
    )?;
    Ok(inst)
}

/// Ranges for uniformly random general instances.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RandomInstanceConfig {
    pub num_u: usize,
    pub num_v: usize,
    /// Weights are drawn uniformly from `[weight_min, weight_max]` grid units.
    pub weight_min: i64,
    pub weight_max: i64,
    pub b_min: usize,
    pub b_max: usize,
}

impl Default for RandomInstanceConfig {
    fn default() -> Self {
        RandomInstanceConfig {
            num_u: 9,
            num_v: 9,
            weight_min: 0,
            weight_max: 20,
            b_min: 1,
            b_max: 3,
        }
    }
}

/// Uniform random instance with ε = 1. B-values above the opposite class
/// size are clamped.
pub fn generate_uniform(
    config: &RandomInstanceConfig,
    seed: u64,
) -> Result<Instance, InstanceError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    generate_uniform_with(config, &mut rng)
}

pub fn generate_uniform_with<R: Rng>(
    config: &RandomInstanceConfig,
    rng: &mut R,
) -> Result<Instance, InstanceError> {
    if config.num_u == 0 || config.num_v == 0 {
        return Err(InstanceError::MalformedInput(
            "both classes need at least one node".into(),
        ));
    }
    check_range("weight", config.weight_min.max(0), config.weight_max)?;
    check_range("B", config.b_min.max(1), config.b_max)?;
    let weights = (0..config.num_u)
        .map(|_| {
            (0..config.num_v)
                .map(|_| Money(rng.random_range(config.weight_min.max(0)..=config.weight_max)))
                .collect()
        })
        .collect();
    let mut draw_b = |n: usize| -> Vec<usize> {
        (0..n)
            .map(|_| rng.random_range(config.b_min.max(1)..=config.b_max))
            .collect()
    };
    let b_u = draw_b(config.num_u);
    let b_v = draw_b(config.num_v);
    let (inst, _) = Instance::with_clamping(
        (1..=config.num_u).map(|i| format!("u{i}")).collect(),
        (1..=config.num_v).map(|i| format!("v{i}")).collect(),
        weights,
        b_u,
        b_v,
        Ratio::one(),
    )?;
    Ok(inst)
}

/// Multiplies every B-value by `factor` and re-clamps.
pub fn scale_b_values(inst: &Instance, factor: usize) -> Instance {
    assert!(factor >= 1, "B scaling factor must be at least 1");
    let (scaled, _) = Instance::with_clamping(
        inst.u_nodes.clone(),
        inst.v_nodes.clone(),
        inst.weight_matrix(),
        inst.b_u.iter().map(|b| b * factor).collect(),
        inst.b_v.iter().map(|b| b * factor).collect(),
        inst.epsilon,
    )
    .expect("scaling a valid instance stays valid");
    scaled
}

/// Drops the named nodes and their edges, re-clamping the survivors.
pub fn remove_nodes<S: AsRef<str>>(
    inst: &Instance,
    node_ids: &[S],
) -> Result<Instance, InstanceError> {
    let mut drop_u = vec![false; inst.num_u()];
    let mut drop_v = vec![false; inst.num_v()];
    for id in node_ids {
        match inst.find(id.as_ref()) {
            Some(NodeRef {
                side: Side::U,
                index,
            }) => drop_u[index] = true,
            Some(NodeRef {
                side: Side::V,
                index,
            }) => drop_v[index] = true,
            None => return Err(InstanceError::UnknownNode(id.as_ref().to_string())),
        }
    }
    if drop_u.iter().all(|&d| d) {
        return Err(InstanceError::WouldEmptyClass(Side::U));
    }
    if drop_v.iter().all(|&d| d) {
        return Err(InstanceError::WouldEmptyClass(Side::V));
    }
    let keep_u: Vec<usize> = (0..inst.num_u()).filter(|&u| !drop_u[u]).collect();
    let keep_v: Vec<usize> = (0..inst.num_v()).filter(|&v| !drop_v[v]).collect();
    let weights = keep_u
        .iter()
        .map(|&u| keep_v.iter().map(|&v| inst.weight(u, v)).collect())
        .collect();
    let (out, _) = Instance::with_clamping(
        keep_u.iter().map(|&u| inst.u_nodes[u].clone()).collect(),
        keep_v.iter().map(|&v| inst.v_nodes[v].clone()).collect(),
        weights,
        keep_u.iter().map(|&u| inst.b_u[u]).collect(),
        keep_v.iter().map(|&v| inst.b_v[v]).collect(),
        inst.epsilon,
    )?;
    Ok(out)
}

/// Re-expresses every weight on a grid of width `epsilon`.
pub fn regrid(inst: &Instance, epsilon: Ratio<i64>) -> Result<Instance, InstanceError> {
    if epsilon <= Ratio::zero() {
        return Err(InstanceError::MalformedInput(
            "epsilon must be positive".into(),
        ));
    }
    let old = Ratio::new(
        i128::from(*inst.epsilon.numer()),
        i128::from(*inst.epsilon.denom()),
    );
    let new = Ratio::new(i128::from(*epsilon.numer()), i128::from(*epsilon.denom()));
    let mut weights = Vec::with_capacity(inst.num_u());
    for u in 0..inst.num_u() {
        let mut row = Vec::with_capacity(inst.num_v());
        for v in 0..inst.num_v() {
            let units = old * i128::from(inst.weight(u, v).0) / new;
            if !units.is_integer() {
                return Err(InstanceError::OffGridWeight {
                    u: inst.u_nodes[u].clone(),
                    v: inst.v_nodes[v].clone(),
                    value: format_rational(inst.epsilon * inst.weight(u, v).0),
                    epsilon: format_rational(epsilon),
                });
            }
            let units = i64::try_from(units.to_integer())
                .map_err(|_| InstanceError::MalformedInput("weight overflow".into()))?;
            row.push(Money(units));
        }
        weights.push(row);
    }
    let (out, _) = Instance::with_clamping(
        inst.u_nodes.clone(),
        inst.v_nodes.clone(),
        weights,
        inst.b_u.clone(),
        inst.b_v.clone(),
        epsilon,
    )?;
    Ok(out)
}

/// Greatest grid width dividing every weight of an integer-grid instance
/// (used to validate epsilon sweeps). Returns `None` for all-zero weights.
pub fn weights_gcd(inst: &Instance) -> Option<i64> {
    inst.weights
        .iter()
        .map(|w| w.0)
        .filter(|&w| w != 0)
        .reduce(|a, b| a.gcd(&b))
}

#[cfg(test)]
mod tests {
    use super::*;

    const TINY1: &str = r#"{"epsilon": "1.0", "u_nodes": ["u1"], "v_nodes": ["v1"],
        "b_values": {"u1": 1, "v1": 1}, "weights": [["4.0"]]}"#;

    #[test]
    fn loads_tiny1() {
        let loaded = load_instance_str(TINY1).unwrap();
        assert!(loaded.warnings.is_empty());
        assert_eq!(loaded.instance.weight(0, 0), Money(4));
        assert_eq!(loaded.instance.epsilon(), Ratio::one());
    }

    #[test]
    fn clamps_b_above_opposite_class() {
        let src = TINY1.replace(r#""u1": 1"#, r#""u1": 5"#);
        let loaded = load_instance_str(&src).unwrap();
        assert_eq!(loaded.instance.b_u(), &[1]);
        assert_eq!(
            loaded.warnings,
            vec![ClampWarning {
                node: "u1".into(),
                requested: 5,
                clamped_to: 1
            }]
        );
    }

    #[test]
    fn rejects_off_grid_weight() {
        let src = TINY1
            .replace(r#""1.0""#, r#""0.1""#)
            .replace(r#""4.0""#, r#""0.35""#);
        assert!(matches!(
            load_instance_str(&src),
            Err(InstanceError::OffGridWeight { .. })
        ));
    }

    #[test]
    fn exact_decimal_grid() {
        // 0.3 / 0.1 is exactly 3 in rational arithmetic.
        let src = TINY1
            .replace(r#""1.0""#, r#""0.1""#)
            .replace(r#""4.0""#, r#""0.3""#);
        assert_eq!(
            load_instance_str(&src).unwrap().instance.weight(0, 0),
            Money(3)
        );
    }

    #[test]
    fn rejects_non_positive_b_and_negative_weight() {
        let src = TINY1.replace(r#""v1": 1"#, r#""v1": 0"#);
        assert!(matches!(
            load_instance_str(&src),
            Err(InstanceError::NonPositiveB { value: 0, .. })
        ));
        let src = TINY1.replace(r#""4.0""#, r#""-4""#);
        assert!(matches!(
            load_instance_str(&src),
            Err(InstanceError::NegativeWeight { .. })
        ));
    }

    #[test]
    fn rejects_malformed() {
        for bad in [
            "{",
            r#"{"epsilon": "1", "u_nodes": ["u1"], "v_nodes": ["v1"], "b_values": {"u1": 1}, "weights": [["4"]]}"#,
            r#"{"epsilon": "1", "u_nodes": ["u1"], "v_nodes": ["u1"], "b_values": {"u1": 1}, "weights": [["4"]]}"#,
            r#"{"epsilon": "1", "u_nodes": ["u1"], "v_nodes": ["v1"], "b_values": {"u1": 1, "v1": 1}, "weights": [["4", "5"]]}"#,
            r#"{"epsilon": "0", "u_nodes": ["u1"], "v_nodes": ["v1"], "b_values": {"u1": 1, "v1": 1}, "weights": [["4"]]}"#,
            r#"{"epsilon": "abc", "u_nodes": ["u1"], "v_nodes": ["v1"], "b_values": {"u1": 1, "v1": 1}, "weights": [["4"]]}"#,
        ] {
            assert!(
                matches!(
                    load_instance_str(bad),
                    Err(InstanceError::MalformedInput(_))
                ),
                "{bad}"
            );
        }
    }

    #[test]
    fn rational_parsing_and_formatting() {
        assert_eq!(parse_rational("0.35").unwrap(), Ratio::new(7, 20));
        assert_eq!(parse_rational("3/8").unwrap(), Ratio::new(3, 8));
        assert_eq!(parse_rational("-2").unwrap(), Ratio::from_integer(-2));
        assert_eq!(parse_rational(".5").unwrap(), Ratio::new(1, 2));
        assert!(parse_rational("1.2.3").is_err());
        assert!(parse_rational("").is_err());
        assert_eq!(format_rational(Ratio::new(1, 8)), "0.125");
        assert_eq!(format_rational(Ratio::new(7, 2)), "3.5");
        assert_eq!(format_rational(Ratio::new(1, 3)), "1/3");
        assert_eq!(format_rational(Ratio::from_integer(4)), "4");
    }

    #[test]
    fn task_assignment_generation() {
        let cfg = TaskAssignmentConfig::default();
        let inst = generate_task_assignment(10, 5, 7, &cfg).unwrap();
        assert_eq!((inst.num_u(), inst.num_v()), (10, 5));
        assert_eq!(inst, generate_task_assignment(10, 5, 7, &cfg).unwrap());
        assert_eq!(
            inst.to_json(),
            generate_task_assignment(10, 5, 7, &cfg).unwrap().to_json()
        );
        assert!(inst.b_v().iter().all(|&b| (1..=10).contains(&b)));
        assert!(inst.b_u().iter().all(|&b| (1..=5).contains(&b)));
    }

    #[test]
    fn single_pair_task_assignment_weight() {
        // Pin value and accuracy so the formula is checkable by hand.
        let cfg = TaskAssignmentConfig {
            value_min: 7,
            value_max: 7,
            accuracy_numer_min: 13,
            accuracy_numer_max: 13,
            ..Default::default()
        };
        let inst = generate_task_assignment(1, 1, 99, &cfg).unwrap();
        // floor(1.3 * 7) = 9
        assert_eq!(inst.weight(0, 0), Money(9));
    }

    #[test]
    fn robot_b_negatively_correlated_with_accuracy() {
        let cfg = TaskAssignmentConfig::default();
        for seed in 0..20 {
            let inst = generate_task_assignment(10, 5, seed, &cfg).unwrap();
            // Weight column ratios reveal accuracy order; use the first task row.
            let row: Vec<Money> = (0..5).map(|r| inst.weight(0, r)).collect();
            for a in 0..5 {
                for b in 0..5 {
                    if row[a] > row[b] {
                        assert!(inst.b_v()[a] <= inst.b_v()[b], "seed {seed}");
                    }
                }
            }
        }
    }

    fn nine_by_nine() -> Instance {
        generate_uniform(
            &RandomInstanceConfig {
                num_u: 9,
                num_v: 9,
                ..Default::default()
            },
            3,
        )
        .unwrap()
    }

    #[test]
    fn scaling_b_values() {
        let inst = nine_by_nine();
        assert_eq!(scale_b_values(&inst, 1), inst);
        let doubled = scale_b_values(&inst, 2);
        for (a, b) in inst.b_u().iter().zip(doubled.b_u()) {
            assert_eq!(*b, 2 * a);
        }
        let mut b_u = inst.b_u().to_vec();
        b_u[0] = 4;
        let (inst4, _) = Instance::with_clamping(
            inst.u_nodes().to_vec(),
            inst.v_nodes().to_vec(),
            inst.weight_matrix(),
            b_u,
            inst.b_v().to_vec(),
            inst.epsilon(),
        )
        .unwrap();
        assert_eq!(scale_b_values(&inst4, 3).b_u()[0], 9);
    }

    #[test]
    fn removing_nodes() {
        let src = r#"{"epsilon": "1", "u_nodes": ["u1", "u2"], "v_nodes": ["v1", "v2"],
            "b_values": {"u1": 2, "u2": 1, "v1": 1, "v2": 2}, "weights": [["1", "2"], ["3", "4"]]}"#;
        let inst = load_instance_str(src).unwrap().instance;
        let smaller = remove_nodes(&inst, &["v1"]).unwrap();
        assert_eq!((smaller.num_u(), smaller.num_v()), (2, 1));
        assert_eq!(smaller.weight(1, 0), Money(4));
        assert_eq!(smaller.b_u(), &[1, 1]);
        assert_eq!(remove_nodes::<&str>(&inst, &[]).unwrap(), inst);
        assert!(matches!(
            remove_nodes(&inst, &["v1", "v2"]),
            Err(InstanceError::WouldEmptyClass(Side::V))
        ));
        assert!(matches!(
            remove_nodes(&inst, &["zz"]),
            Err(InstanceError::UnknownNode(_))
        ));
    }

    #[test]
    fn regrid_refines_and_rejects() {
        let inst = nine_by_nine();
        let fine = regrid(&inst, Ratio::new(1, 4)).unwrap();
        assert_eq!(fine.weight(2, 3).0, 4 * inst.weight(2, 3).0);
        let src = TINY1.replace(r#""1.0""#, r#""1""#);
        let tiny = load_instance_str(&src).unwrap().instance;
        assert!(matches!(
            regrid(&tiny, Ratio::from_integer(3)),
            Err(InstanceError::OffGridWeight { .. })
        ));
    }

    #[test]
    fn transpose_is_involution() {
        let inst = nine_by_nine();
        assert_eq!(inst.transposed().transposed(), inst);
        assert_eq!(inst.transposed().weight(4, 2), inst.weight(2, 4));
    }
}
