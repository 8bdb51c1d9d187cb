//! Batch runs of the proposals dynamics and the parameter sweeps built on
//! them.
//!
//! Every sweep generates a fixed set of base instances, derives one instance
//! per sweep point (scaled B-values, a finer grid, removed nodes), runs the
//! dynamics several times on each, and averages the relative total feasible
//! aspiration per iteration bucket. Averages are exact rationals until they
//! are formatted for CSV.

use std::io::Write;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{initial_state, DynamicsError, InitMode, Simulator};
use crate::exec::{map_range, Execution};
use crate::instance::{
    format_rational, generate_task_assignment, generate_uniform, parse_rational, regrid,
    remove_nodes, scale_b_values, Instance, InstanceError, NodeRef, RandomInstanceConfig,
    TaskAssignmentConfig,
};
use crate::money::Money;
use crate::oracle::{flow_max_b_matching, Coalition};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid sweep spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

/// How base instances are generated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InstanceFamily {
    TaskAssignment {
        num_tasks: usize,
        num_robots: usize,
        #[serde(default)]
        config: TaskAssignmentConfig,
    },
    Uniform {
        #[serde(default)]
        config: RandomInstanceConfig,
    },
}

impl InstanceFamily {
    pub fn generate(&self, seed: u64) -> Result<Instance, InstanceError> {
        match self {
            InstanceFamily::TaskAssignment {
                num_tasks,
                num_robots,
                config,
            } => generate_task_assignment(*num_tasks, *num_robots, seed, config),
            InstanceFamily::Uniform { config } => generate_uniform(config, seed),
        }
    }
}

/// Task/robot instances with 10 tasks and 5 robots.
fn default_task_family() -> InstanceFamily {
    InstanceFamily::TaskAssignment {
        num_tasks: 10,
        num_robots: 5,
        config: TaskAssignmentConfig::default(),
    }
}

/// General instances with 9 nodes per class and B in `{1, 2, 3}`.
fn default_uniform_family() -> InstanceFamily {
    InstanceFamily::Uniform {
        config: RandomInstanceConfig::default(),
    }
}

fn default_factors() -> Vec<usize> {
    vec![1, 2, 3]
}

fn default_epsilons() -> Vec<String> {
    ["1", "1/2", "1/4", "1/8"].map(String::from).to_vec()
}

fn default_removals() -> Vec<usize> {
    vec![0, 2, 4]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SweepKind {
    Baseline {
        #[serde(default = "default_task_family")]
        instances: InstanceFamily,
    },
    BScaling {
        #[serde(default = "default_uniform_family")]
        instances: InstanceFamily,
        #[serde(default = "default_factors")]
        factors: Vec<usize>,
    },
    Epsilon {
        #[serde(default = "default_uniform_family")]
        instances: InstanceFamily,
        #[serde(default = "default_epsilons")]
        epsilons: Vec<String>,
    },
    NodeRemoval {
        #[serde(default = "default_uniform_family")]
        instances: InstanceFamily,
        /// Number of nodes removed at each stage.
        #[serde(default = "default_removals")]
        removals: Vec<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitChoice {
    #[default]
    Zero,
    Random,
}

fn default_bucket() -> u64 {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    #[serde(flatten)]
    pub kind: SweepKind,
    pub num_instances: usize,
    pub num_seeds_per_instance: usize,
    pub horizon: u64,
    #[serde(default)]
    pub master_seed: u64,
    /// Width of the aggregation buckets in iterations.
    #[serde(default = "default_bucket")]
    pub bucket: u64,
    /// Iterations between core checks; runs stop at the first hit. Defaults
    /// to the bucket width, 0 disables early stopping.
    #[serde(default)]
    pub check_period: Option<u64>,
    #[serde(default)]
    pub init: InitChoice,
}

impl SweepSpec {
    pub fn from_json(s: &str) -> Result<Self, ExperimentError> {
        let spec: SweepSpec =
            serde_json::from_str(s).map_err(|e| ExperimentError::InvalidSpec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: &str| Err(ExperimentError::InvalidSpec(m.to_string()));
        if self.num_instances == 0 || self.num_seeds_per_instance == 0 {
            return bad("num_instances and num_seeds_per_instance must be positive");
        }
        if self.bucket == 0 {
            return bad("bucket must be positive");
        }
        match &self.kind {
            SweepKind::BScaling { factors, .. } if factors.is_empty() || factors.contains(&0) => {
                bad("factors must be a non-empty list of positive integers")
            }
            SweepKind::Epsilon { epsilons, .. } if epsilons.is_empty() => {
                bad("epsilons must be non-empty")
            }
            SweepKind::NodeRemoval { removals, .. } if removals.is_empty() => {
                bad("removals must be non-empty")
            }
            _ => Ok(()),
        }
    }

    fn check_period(&self) -> u64 {
        self.check_period.unwrap_or(self.bucket)
    }
}

/// Per-run seed: a SplitMix64 chain over `(master, instance, run)`. Run 0
/// seeds instance generation; runs `1..` seed the dynamics.
pub fn derive_seed(master: u64, instance: u64, run: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    mix(mix(mix(master) ^ instance) ^ run)
}

/// Node ids removed when `count` nodes are taken out: the last U node, then
/// the last V node, alternating. Once a class runs out its first node
/// repeats, which makes the removal report the emptied class.
pub fn removal_victims(inst: &Instance, count: usize) -> Vec<String> {
    let (mut nu, mut nv) = (inst.num_u(), inst.num_v());
    (0..count)
        .map(|k| {
            let node = if k % 2 == 0 {
                nu = nu.saturating_sub(1);
                NodeRef::u(nu)
            } else {
                nv = nv.saturating_sub(1);
                NodeRef::v(nv)
            };
            inst.name(node).to_string()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AggregateRow {
    pub sweep_point: String,
    pub iter_bucket: u64,
    pub mean_relative_feasible: BigRational,
    pub frac_at_opt: BigRational,
    pub n_runs: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvergenceRow {
    pub sweep_point: String,
    /// Lower median of iterations-to-core, counting runs that never reached
    /// the core as slower than any that did. `None` when the median run did
    /// not converge.
    pub median_iterations_to_core: Option<u64>,
    pub n_converged: usize,
    pub n_runs: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SweepOutput {
    pub rows: Vec<AggregateRow>,
    pub convergence: Vec<ConvergenceRow>,
}

pub const AGGREGATE_CSV_HEADER: &str =
    "sweep_point,iter_bucket,mean_relative_feasible,frac_at_opt,n_runs";
pub const CONVERGENCE_CSV_HEADER: &str = "sweep_point,median_iterations_to_core,n_converged,n_runs";

impl SweepOutput {
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{AGGREGATE_CSV_HEADER}")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{}",
                r.sweep_point,
                r.iter_bucket,
                format_decimal(&r.mean_relative_feasible, 6),
                format_decimal(&r.frac_at_opt, 6),
                r.n_runs
            )?;
        }
        Ok(())
    }

    pub fn write_convergence_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{CONVERGENCE_CSV_HEADER}")?;
        for r in &self.convergence {
            let median = r
                .median_iterations_to_core
                .map_or_else(|| "NA".to_string(), |m| m.to_string());
            writeln!(
                out,
                "{},{},{},{}",
                r.sweep_point, median, r.n_converged, r.n_runs
            )?;
        }
        Ok(())
    }

    /// Aggregate rows of one sweep point, in bucket order.
    pub fn curve(&self, point: &str) -> Vec<&AggregateRow> {
        self.rows
            .iter()
            .filter(|r| r.sweep_point == point)
            .collect()
    }
}

/// Rounds half away from zero to `places` decimals.
pub fn format_decimal(r: &BigRational, places: u32) -> String {
    let scale = BigInt::from(10u32).pow(places);
    let scaled = r * BigRational::from_integer(scale.clone());
    let rounded = scaled.round().to_integer();
    let neg = rounded.is_negative();
    let abs = rounded.abs();
    let (int, frac) = (&abs / &scale, &abs % &scale);
    let sign = if neg { "-" } else { "" };
    if places == 0 {
        return format!("{sign}{int}");
    }
    format!("{sign}{int}.{frac:0>width$}", width = places as usize)
}

/// Samples of one dynamics run at the bucket boundaries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunSamples {
    pub totals: Vec<Money>,
    pub optimum: Money,
    pub iterations_to_core: Option<u64>,
}

/// Bucket boundaries: 0, bucket, 2·bucket, … and the horizon itself.
pub fn bucket_points(horizon: u64, bucket: u64) -> Vec<u64> {
    let mut pts: Vec<u64> = (0..=horizon / bucket).map(|k| k * bucket).collect();
    if !horizon.is_multiple_of(bucket) {
        pts.push(horizon);
    }
    pts
}

/// Runs the dynamics once, sampling the total feasible aspiration at every
/// bucket boundary. After an early stop the last value is carried forward;
/// a copies-core state is absorbing so nothing would change.
pub fn sample_run(
    inst: &Instance,
    optimum: Money,
    seed: u64,
    init: &InitMode,
    horizon: u64,
    bucket: u64,
    check_period: u64,
) -> Result<RunSamples, DynamicsError> {
    let points = bucket_points(horizon, bucket);
    let mut sim = Simulator::new(inst, initial_state(inst, init, seed)?, seed);
    let mut totals = Vec::with_capacity(points.len());
    let mut hit = (check_period > 0 && sim.is_core()).then_some(0);
    for &p in &points {
        while hit.is_none() && sim.iterations() < p {
            sim.step();
            let t = sim.iterations();
            if check_period > 0 && t.is_multiple_of(check_period) && sim.is_core() {
                hit = Some(t);
            }
        }
        totals.push(sim.state().total_feasible_aspiration());
    }
    Ok(RunSamples {
        totals,
        optimum,
        iterations_to_core: hit,
    })
}

fn relative(total: Money, optimum: Money) -> BigRational {
    if optimum == Money::ZERO {
        return BigRational::one();
    }
    BigRational::new(BigInt::from(total.0), BigInt::from(optimum.0))
}

fn aggregate(
    point: &str,
    runs: &[RunSamples],
    horizon: u64,
    bucket: u64,
) -> (Vec<AggregateRow>, ConvergenceRow) {
    let n = runs.len();
    let denom = BigRational::from_integer(BigInt::from(n));
    let rows = bucket_points(horizon, bucket)
        .into_iter()
        .enumerate()
        .map(|(k, iter_bucket)| {
            let mut sum = BigRational::zero();
            let mut at_opt = 0usize;
            for r in runs {
                sum += relative(r.totals[k], r.optimum);
                at_opt += usize::from(r.totals[k] == r.optimum);
            }
            AggregateRow {
                sweep_point: point.to_string(),
                iter_bucket,
                mean_relative_feasible: sum / &denom,
                frac_at_opt: BigRational::new(BigInt::from(at_opt), BigInt::from(n)),
                n_runs: n,
            }
        })
        .collect();
    let mut times: Vec<Option<u64>> = runs.iter().map(|r| r.iterations_to_core).collect();
    times.sort_by_key(|t| (t.is_none(), *t));
    let conv = ConvergenceRow {
        sweep_point: point.to_string(),
        median_iterations_to_core: times[(n - 1) / 2],
        n_converged: times.iter().filter(|t| t.is_some()).count(),
        n_runs: n,
    };
    (rows, conv)
}

type Transform<'a> = Box<dyn Fn(&Instance) -> Result<Instance, InstanceError> + Sync + 'a>;

/// Shared engine: every `(point, instance, seed)` triple is an independent
/// job; results are reduced in a fixed order.
fn run_points(
    spec: &SweepSpec,
    family: &InstanceFamily,
    points: Vec<(String, Transform<'_>)>,
    exec: Execution,
) -> Result<SweepOutput, ExperimentError> {
    spec.validate()?;
    let ni = spec.num_instances;
    let ns = spec.num_seeds_per_instance;
    let base: Vec<Instance> = map_range(ni, exec, |i| {
        family.generate(derive_seed(spec.master_seed, i as u64, 0))
    })
    .into_iter()
    .collect::<Result<_, _>>()?;

    let np = points.len();
    let derived: Vec<(Instance, Money)> = map_range(np * ni, exec, |k| {
        let inst = (points[k / ni].1)(&base[k % ni])?;
        let opt = flow_max_b_matching(&inst, &Coalition::full(&inst)).value;
        Ok::<_, InstanceError>((inst, opt))
    })
    .into_iter()
    .collect::<Result<_, _>>()?;

    let init = match spec.init {
        InitChoice::Zero => InitMode::Zero,
        InitChoice::Random => InitMode::RandomOnGrid,
    };
    let runs: Vec<RunSamples> = map_range(np * ni * ns, exec, |k| {
        let (pi, rest) = (k / (ni * ns), k % (ni * ns));
        let (i, s) = (rest / ns, rest % ns);
        let (inst, opt) = &derived[pi * ni + i];
        let seed = derive_seed(spec.master_seed, i as u64, s as u64 + 1);
        sample_run(
            inst,
            *opt,
            seed,
            &init,
            spec.horizon,
            spec.bucket,
            spec.check_period(),
        )
    })
    .into_iter()
    .collect::<Result<_, _>>()?;

    let mut out = SweepOutput::default();
    for (pi, (label, _)) in points.iter().enumerate() {
        let (rows, conv) = aggregate(
            label,
            &runs[pi * ni * ns..(pi + 1) * ni * ns],
            spec.horizon,
            spec.bucket,
        );
        out.rows.extend(rows);
        out.convergence.push(conv);
    }
    Ok(out)
}

fn wrong_kind(expected: &str) -> ExperimentError {
    ExperimentError::InvalidSpec(format!("expected a sweep of kind {expected}"))
}

pub fn run_baseline(spec: &SweepSpec, exec: Execution) -> Result<SweepOutput, ExperimentError> {
    let SweepKind::Baseline { instances } = &spec.kind else {
        return Err(wrong_kind("baseline"));
    };
    let points: Vec<(String, Transform)> =
        vec![("baseline".into(), Box::new(|i: &Instance| Ok(i.clone())))];
    run_points(spec, instances, points, exec)
}

pub fn run_b_scaling(spec: &SweepSpec, exec: Execution) -> Result<SweepOutput, ExperimentError> {
    let SweepKind::BScaling { instances, factors } = &spec.kind else {
        return Err(wrong_kind("b-scaling"));
    };
    let points = factors
        .iter()
        .map(|&f| {
            let t: Transform = Box::new(move |i: &Instance| Ok(scale_b_values(i, f)));
            (format!("factor={f}"), t)
        })
        .collect();
    run_points(spec, instances, points, exec)
}

pub fn run_epsilon_sweep(
    spec: &SweepSpec,
    exec: Execution,
) -> Result<SweepOutput, ExperimentError> {
    let SweepKind::Epsilon {
        instances,
        epsilons,
    } = &spec.kind
    else {
        return Err(wrong_kind("epsilon"));
    };
    let mut points = Vec::with_capacity(epsilons.len());
    for e in epsilons {
        let r = parse_rational(e)?;
        let eps = match (i64::try_from(*r.numer()), i64::try_from(*r.denom())) {
            (Ok(n), Ok(d)) if n > 0 => Ratio::new(n, d),
            _ => {
                return Err(ExperimentError::InvalidSpec(format!(
                    "epsilon {e} is not a positive rational"
                )))
            }
        };
        let t: Transform = Box::new(move |i: &Instance| regrid(i, eps));
        points.push((format!("epsilon={}", format_rational(eps)), t));
    }
    run_points(spec, instances, points, exec)
}

pub fn run_node_removal(spec: &SweepSpec, exec: Execution) -> Result<SweepOutput, ExperimentError> {
    let SweepKind::NodeRemoval {
        instances,
        removals,
    } = &spec.kind
    else {
        return Err(wrong_kind("node-removal"));
    };
    let points = removals
        .iter()
        .map(|&k| {
            let t: Transform =
                Box::new(move |i: &Instance| remove_nodes(i, &removal_victims(i, k)));
            (format!("removed={k}"), t)
        })
        .collect();
    run_points(spec, instances, points, exec)
}

pub fn run_sweep(spec: &SweepSpec, exec: Execution) -> Result<SweepOutput, ExperimentError> {
    match spec.kind {
        SweepKind::Baseline { .. } => run_baseline(spec, exec),
        SweepKind::BScaling { .. } => run_b_scaling(spec, exec),
        SweepKind::Epsilon { .. } => run_epsilon_sweep(spec, exec),
        SweepKind::NodeRemoval { .. } => run_node_removal(spec, exec),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(kind: SweepKind) -> SweepSpec {
        SweepSpec {
            kind,
            num_instances: 3,
            num_seeds_per_instance: 2,
            horizon: 2_000,
            master_seed: 11,
            bucket: 100,
            check_period: None,
            init: InitChoice::Zero,
        }
    }

    fn uniform(n: usize) -> InstanceFamily {
        InstanceFamily::Uniform {
            config: RandomInstanceConfig {
                num_u: n,
                num_v: n,
                weight_max: 10,
                ..Default::default()
            },
        }
    }

    fn csv(out: &SweepOutput) -> String {
        let mut buf = Vec::new();
        out.write_csv(&mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn decimal_formatting() {
        let r = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
        assert_eq!(format_decimal(&r(1, 3), 6), "0.333333");
        assert_eq!(format_decimal(&r(2, 3), 6), "0.666667");
        assert_eq!(format_decimal(&r(1, 1), 6), "1.000000");
        assert_eq!(format_decimal(&r(-1, 8), 2), "-0.13");
        assert_eq!(format_decimal(&r(7, 2), 0), "4");
    }

    #[test]
    fn buckets() {
        assert_eq!(bucket_points(0, 100), vec![0]);
        assert_eq!(bucket_points(250, 100), vec![0, 100, 200, 250]);
        assert_eq!(bucket_points(200, 100), vec![0, 100, 200]);
    }

    #[test]
    fn seeds_are_distinct() {
        let mut seen = std::collections::HashSet::new();
        for i in 0..20 {
            for r in 0..20 {
                assert!(seen.insert(derive_seed(5, i, r)));
            }
        }
        assert_ne!(derive_seed(5, 0, 0), derive_seed(6, 0, 0));
    }

    #[test]
    fn horizon_zero_single_row() {
        let mut spec = small(SweepKind::Baseline {
            instances: default_task_family(),
        });
        spec.num_instances = 1;
        spec.num_seeds_per_instance = 1;
        spec.horizon = 0;
        let out = run_baseline(&spec, Execution::Sequential).unwrap();
        assert_eq!(out.rows.len(), 1);
        assert_eq!(out.rows[0].iter_bucket, 0);
        assert!(out.rows[0].mean_relative_feasible.is_zero());
    }

    #[test]
    fn deterministic_and_execution_independent() {
        let spec = small(SweepKind::Baseline {
            instances: uniform(4),
        });
        let a = run_baseline(&spec, Execution::Parallel).unwrap();
        let b = run_baseline(&spec, Execution::Sequential).unwrap();
        assert_eq!(csv(&a), csv(&b));
        assert_eq!(a.convergence, b.convergence);
        let last = a.rows.last().unwrap();
        assert!(last.mean_relative_feasible <= BigRational::one());
    }

    #[test]
    fn b_scaling_curves() {
        let spec = small(SweepKind::BScaling {
            instances: uniform(3),
            factors: vec![1, 2, 3],
        });
        let out = run_b_scaling(&spec, Execution::Parallel).unwrap();
        assert_eq!(out.convergence.len(), 3);
        assert_eq!(out.curve("factor=2").len(), 21);

        let base = run_baseline(
            &small(SweepKind::Baseline {
                instances: uniform(3),
            }),
            Execution::Parallel,
        )
        .unwrap();
        let one = run_b_scaling(
            &small(SweepKind::BScaling {
                instances: uniform(3),
                factors: vec![1],
            }),
            Execution::Parallel,
        )
        .unwrap();
        let strip = |o: &SweepOutput| {
            o.rows
                .iter()
                .map(|r| (r.iter_bucket, r.mean_relative_feasible.clone()))
                .collect::<Vec<_>>()
        };
        assert_eq!(strip(&base), strip(&one));
    }

    #[test]
    fn epsilon_sweep_and_off_grid() {
        let spec = small(SweepKind::Epsilon {
            instances: uniform(3),
            epsilons: default_epsilons(),
        });
        let out = run_epsilon_sweep(&spec, Execution::Parallel).unwrap();
        let labels: Vec<_> = out
            .convergence
            .iter()
            .map(|c| c.sweep_point.as_str())
            .collect();
        assert_eq!(
            labels,
            ["epsilon=1", "epsilon=0.5", "epsilon=0.25", "epsilon=0.125"]
        );

        let bad = small(SweepKind::Epsilon {
            instances: uniform(3),
            epsilons: vec!["3".into()],
        });
        assert!(matches!(
            run_epsilon_sweep(&bad, Execution::Sequential),
            Err(ExperimentError::Instance(
                InstanceError::OffGridWeight { .. }
            ))
        ));
    }

    #[test]
    fn node_removal() {
        let spec = small(SweepKind::NodeRemoval {
            instances: uniform(4),
            removals: vec![0, 2, 4],
        });
        let out = run_node_removal(&spec, Execution::Parallel).unwrap();
        assert_eq!(out.convergence.len(), 3);

        let inst = uniform(3).generate(1).unwrap();
        assert_eq!(removal_victims(&inst, 3), ["u3", "v3", "u2"]);
        let over = small(SweepKind::NodeRemoval {
            instances: uniform(3),
            removals: vec![5],
        });
        assert!(matches!(
            run_node_removal(&over, Execution::Sequential),
            Err(ExperimentError::Instance(InstanceError::WouldEmptyClass(_)))
        ));
    }

    #[test]
    fn spec_json() {
        let spec = SweepSpec::from_json(
            r#"{"kind": "b-scaling", "num_instances": 2, "num_seeds_per_instance": 1, "horizon": 50,
                "factors": [1, 4]}"#,
        )
        .unwrap();
        assert_eq!(spec.bucket, 100);
        assert!(matches!(spec.kind, SweepKind::BScaling { ref factors, .. } if factors == &[1, 4]));
        let spec = SweepSpec::from_json(
            r#"{"kind": "baseline", "num_instances": 1, "num_seeds_per_instance": 1, "horizon": 5,
                "instances": {"family": "task-assignment", "num_tasks": 3, "num_robots": 2}}"#,
        )
        .unwrap();
        assert!(run_sweep(&spec, Execution::Sequential).is_ok());
        assert!(SweepSpec::from_json(
            r#"{"kind": "nope", "num_instances": 1, "num_seeds_per_instance": 1, "horizon": 5}"#
        )
        .is_err());
        assert!(SweepSpec::from_json(
            r#"{"kind": "baseline", "num_instances": 0, "num_seeds_per_instance": 1, "horizon": 5}"#
        )
        .is_err());
    }
}
