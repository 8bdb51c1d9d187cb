use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use bcore::dynamics::{self, InitMode, RunConfig, TraceMeta};
use bcore::exec::Execution;
use bcore::expanded::{check_copies_core, check_feasible, reduce, ExpandedState};
use bcore::experiments::{run_sweep, SweepSpec};
use bcore::instance::{
    format_rational, generate_task_assignment, load_instance, Instance, Side, TaskAssignmentConfig,
};
use bcore::oracle::{self, check_nodes_core, Coalition, DEFAULT_CORE_NODE_LIMIT};
use bcore::paths_transfers::{solve, SolverConfig, StepMode};

/// Core allocations for weighted bipartite B-matching problems.
#[derive(Parser)]
#[command(name = "bcore", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the centralized paths-transfers solver and print the final state.
    Solve(SolveArgs),
    /// Run the randomized proposals dynamics and print a summary.
    Simulate(SimulateArgs),
    /// Check whether a state is copies-core (and optionally nodes-core).
    Certify(CertifyArgs),
    /// Maximum B-matching value of the instance or of a coalition.
    Oracle(OracleArgs),
    /// Generate a random task/robot instance.
    Generate(GenerateArgs),
    /// Run a parameter sweep and print the aggregate CSV.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Epsilon,
    MinDelta,
}

#[derive(Clone, Copy, ValueEnum)]
#[value(rename_all = "UPPER")]
enum ClassArg {
    U,
    V,
}

#[derive(Clone, Copy, ValueEnum)]
enum InitArg {
    Zero,
    Random,
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long, value_enum, default_value = "epsilon")]
    mode: ModeArg,
    /// Class to over-aspirate.
    #[arg(long, value_enum, ignore_case = true, default_value = "V")]
    class: ClassArg,
    /// Write the per-iteration log as CSV.
    #[arg(long)]
    log: Option<PathBuf>,
    /// Re-certify feasibility and stability after every iteration.
    #[arg(long)]
    check_invariants: bool,
}

#[derive(Args)]
struct SimulateArgs {
    instance: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10_000)]
    horizon: u64,
    #[arg(long, value_enum, default_value = "zero")]
    init: InitArg,
    /// Start from this state snapshot instead.
    #[arg(long, conflicts_with = "init")]
    init_state: Option<PathBuf>,
    /// Iterations between core checks; 0 never stops early.
    #[arg(long, default_value_t = 0)]
    check_period: u64,
    /// Write the trace CSV here, with a `.meta.json` sidecar.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write the final state snapshot here.
    #[arg(long)]
    state_out: Option<PathBuf>,
}

#[derive(Args)]
struct CertifyArgs {
    instance: PathBuf,
    state: PathBuf,
    /// Also enumerate every coalition.
    #[arg(long)]
    nodes_core: bool,
    #[arg(long, default_value_t = DEFAULT_CORE_NODE_LIMIT)]
    node_limit: usize,
}

#[derive(Args)]
struct OracleArgs {
    instance: PathBuf,
    /// Comma-separated node ids, e.g. `u1,v2`. Defaults to every node.
    #[arg(long)]
    coalition: Option<String>,
}

#[derive(Args)]
struct GenerateArgs {
    tasks: usize,
    robots: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "1")]
    epsilon: String,
    /// Proportionality constant between accuracy times value and weight.
    #[arg(long, default_value = "1")]
    scale: String,
}

#[derive(Args)]
struct SweepArgs {
    spec: PathBuf,
    /// Also write the iterations-to-core summary CSV here.
    #[arg(long)]
    convergence: Option<PathBuf>,
    /// Run on the current thread only.
    #[arg(long)]
    sequential: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Certify(a) => cmd_certify(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Generate(a) => cmd_generate(a),
        Command::Sweep(a) => cmd_sweep(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn read_instance(path: &Path) -> Result<Instance> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let loaded = load_instance(io::BufReader::new(file))
        .with_context(|| format!("cannot load {}", path.display()))?;
    for w in &loaded.warnings {
        eprintln!("warning: {w}");
    }
    Ok(loaded.instance)
}

fn read_state(path: &Path, inst: &Instance) -> Result<ExpandedState> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    ExpandedState::from_json(&text, inst)
        .with_context(|| format!("cannot load state {}", path.display()))
}

fn print_json(value: &serde_json::Value) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn cmd_solve(a: SolveArgs) -> Result<bool> {
    let inst = read_instance(&a.instance)?;
    let config = SolverConfig {
        step_mode: match a.mode {
            ModeArg::Epsilon => StepMode::Epsilon,
            ModeArg::MinDelta => StepMode::MinDelta,
        },
        over_aspiration_class: match a.class {
            ClassArg::U => Side::U,
            ClassArg::V => Side::V,
        },
        check_invariants: a.check_invariants,
    };
    let sol = solve(&inst, &config)?;
    if let Some(path) = &a.log {
        let mut w = create(path)?;
        sol.write_log_csv(&mut w)?;
        w.flush()?;
    }
    let core = check_copies_core(&sol.state, &inst).is_core();
    let mut out = io::stdout().lock();
    writeln!(out, "{}", sol.state.to_json(&inst))?;
    eprintln!(
        "{} iterations, total allocation {}",
        sol.log.len(),
        reduce(&sol.state, &inst).total()
    );
    if !core {
        eprintln!("error: final state failed the copies-core check");
    }
    Ok(core)
}

fn cmd_simulate(a: SimulateArgs) -> Result<bool> {
    let inst = read_instance(&a.instance)?;
    let init = match (&a.init_state, a.init) {
        (Some(path), _) => InitMode::Explicit(read_state(path, &inst)?),
        (None, InitArg::Zero) => InitMode::Zero,
        (None, InitArg::Random) => InitMode::RandomOnGrid,
    };
    let config = RunConfig {
        seed: a.seed,
        horizon: a.horizon,
        init,
        core_check_period: a.check_period,
        record_trace: a.trace.is_some(),
    };
    let res = dynamics::run(&inst, &config)?;
    if let Some(path) = &a.trace {
        let mut w = create(path)?;
        dynamics::write_trace_csv(&inst, &res.trace, &mut w)?;
        w.flush()?;
        let mut meta_path = path.clone().into_os_string();
        meta_path.push(".meta.json");
        let meta = serde_json::to_string_pretty(&TraceMeta::new(&inst, &config))?;
        fs::write(&meta_path, meta + "\n")
            .with_context(|| format!("cannot write {}", Path::new(&meta_path).display()))?;
    }
    if let Some(path) = &a.state_out {
        fs::write(path, res.state.to_json(&inst) + "\n")
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    let optimum = oracle::flow_max_b_matching(&inst, &Coalition::full(&inst)).value;
    print_json(&json!({
        "seed": a.seed,
        "horizon": a.horizon,
        "iterations": res.iterations,
        "converged": res.converged,
        "iterations_to_core": res.iterations_to_core,
        "total_feasible_aspiration": res.state.total_feasible_aspiration(),
        "total_aspiration": reduce(&res.state, &inst).total(),
        "optimum": optimum,
        "matched_edges": res.state.matching().len(),
        "f_plus_size": res.state.f_plus_size(),
    }))?;
    Ok(true)
}

fn cmd_certify(a: CertifyArgs) -> Result<bool> {
    let inst = read_instance(&a.instance)?;
    let state = read_state(&a.state, &inst)?;
    let feasible = check_feasible(&state, &inst).pass();
    let report = check_copies_core(&state, &inst);
    let mut verdict = feasible && report.is_core();
    let mut body = json!({
        "feasible": feasible,
        "copies_core": report.to_json(&inst),
    });
    if a.nodes_core {
        let nodes = check_nodes_core(
            &reduce(&state, &inst),
            &inst,
            a.node_limit,
            Execution::Parallel,
        )?;
        verdict &= nodes.pass();
        body["nodes_core"] = nodes.to_json(&inst);
    }
    body["pass"] = json!(verdict);
    print_json(&body)?;
    Ok(verdict)
}

fn cmd_oracle(a: OracleArgs) -> Result<bool> {
    let inst = read_instance(&a.instance)?;
    let coalition = match &a.coalition {
        Some(spec) => {
            let ids: Vec<&str> = spec
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .collect();
            Coalition::from_ids(&ids, &inst)?
        }
        None => Coalition::full(&inst),
    };
    let best = oracle::max_b_matching_value(&inst, &coalition);
    let names = |pairs: &[(usize, usize)]| -> Vec<[&str; 2]> {
        pairs
            .iter()
            .map(|&(u, v)| [inst.u_nodes()[u].as_str(), inst.v_nodes()[v].as_str()])
            .collect()
    };
    let members: Vec<&str> = coalition
        .u
        .iter()
        .map(|&u| inst.u_nodes()[u].as_str())
        .chain(coalition.v.iter().map(|&v| inst.v_nodes()[v].as_str()))
        .collect();
    print_json(&json!({
        "coalition": members,
        "value": best.value,
        "value_real": format_rational(inst.epsilon() * best.value.0),
        "matching": names(&best.pairs),
    }))?;
    Ok(true)
}

fn cmd_generate(a: GenerateArgs) -> Result<bool> {
    let config = TaskAssignmentConfig {
        epsilon: a.epsilon,
        scale: a.scale,
        ..Default::default()
    };
    let inst = generate_task_assignment(a.tasks, a.robots, a.seed, &config)?;
    writeln!(io::stdout().lock(), "{}", inst.to_json())?;
    Ok(true)
}

fn cmd_sweep(a: SweepArgs) -> Result<bool> {
    let text =
        fs::read_to_string(&a.spec).with_context(|| format!("cannot read {}", a.spec.display()))?;
    let spec = SweepSpec::from_json(&text)?;
    let exec = if a.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let out = run_sweep(&spec, exec)?;
    if let Some(path) = &a.convergence {
        let mut w = create(path)?;
        out.write_convergence_csv(&mut w)?;
        w.flush()?;
    }
    let mut stdout = io::stdout().lock();
    out.write_csv(&mut stdout)?;
    Ok(true)
}
