use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use matchdecay::{
    run_experiment_with_threads, Checkpoint, ExperimentConfig, ExperimentKind, HarnessError,
};
use matchdecay_core::bonus::{bonus, sandwich};
use matchdecay_core::decay::{rho_estimate, DecayMethod};
use matchdecay_core::generate::{generate, Family};
use matchdecay_core::io::{parse_edge_list, write_edge_list};
use matchdecay_core::message::{
    root_sensitivity, run_tree_recursion, BoundaryCondition, RootedTree,
};
use matchdecay_core::mwm::{self, MwmResult};
use matchdecay_core::weights::{replica_rng, sample_weights};
use matchdecay_core::{ExtReal, Graph, SeedPlan, WeightAssignment, WeightDistribution};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(
    name = "matchdecay",
    version,
    about = "Maximum-weight matching correlation-decay toolkit"
)]
struct Cli {
    /// Master seed for generators and weights.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Worker threads; 0 uses every available core.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a graph as an edge list.
    Gen(GenArgs),
    /// Solve maximum-weight matching on an edge list.
    Mwm(MwmArgs),
    /// Bonus of a vertex and its depth-r local bounds.
    Bonus(BonusArgs),
    /// Run the p/q message recursion on a tree.
    Mp(MpArgs),
    /// Monte Carlo estimates of the decay functional for one edge.
    Decay(DecayArgs),
    /// Run a configured experiment and write CSV plus a JSON summary.
    Experiment(ExperimentArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyName {
    Path,
    Cycle,
    Complete,
    RegularTree,
    RandomTree,
    RandomRegular,
    Er,
    Hex,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    family: FamilyName,
    /// Vertex count.
    #[arg(long, default_value_t = 10)]
    n: usize,
    /// Degree for regular families, maximum degree for random trees.
    #[arg(long, default_value_t = 3)]
    d: usize,
    /// Depth of a regular tree.
    #[arg(long, default_value_t = 3)]
    depth: usize,
    /// Mean degree of the Erdos-Renyi family.
    #[arg(long, default_value_t = 2.0)]
    lambda: f64,
    /// Radius of a hex patch.
    #[arg(long, default_value_t = 3)]
    radius: usize,
    /// Attach exponential weights.
    #[arg(long)]
    weighted: bool,
}

#[derive(Args)]
struct GraphInput {
    /// Edge-list file ("n m" header, then "u v" or "u v w" lines).
    #[arg(long)]
    input: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverName {
    Auto,
    Tree,
    BranchBound,
    Enumeration,
}

#[derive(Args)]
struct MwmArgs {
    #[command(flatten)]
    graph: GraphInput,
    #[arg(long, value_enum, default_value_t = SolverName::Auto)]
    solver: SolverName,
}

#[derive(Args)]
struct BonusArgs {
    #[command(flatten)]
    graph: GraphInput,
    #[arg(long)]
    vertex: usize,
    /// Depth of the local bounds.
    #[arg(long, default_value_t = 2)]
    r: usize,
}

#[derive(Args)]
struct MpArgs {
    #[command(flatten)]
    graph: GraphInput,
    /// Root vertex; must have degree 1.
    #[arg(long, default_value_t = 0)]
    root: usize,
    /// `zero`, `inf`, or a file of "vertex value" lines (value may be `inf`).
    #[arg(long, default_value = "zero")]
    boundary: String,
}

#[derive(Args)]
struct DecayArgs {
    #[command(flatten)]
    graph: GraphInput,
    #[arg(long, default_value_t = 0)]
    edge: usize,
    #[arg(long, default_value_t = 1)]
    r_min: usize,
    #[arg(long, default_value_t = 4)]
    r_max: usize,
    /// `exact`, `bracket-tree` or `bracket-general`.
    #[arg(long, default_value = "bracket-general")]
    method: DecayMethod,
    #[arg(long, default_value_t = 1000)]
    replicas: usize,
}

#[derive(Args)]
struct ExperimentArgs {
    /// key=value config file.
    #[arg(long, conflicts_with = "kind")]
    config: Option<PathBuf>,
    /// Start from the defaults of this experiment.
    #[arg(long)]
    kind: Option<ExperimentKind>,
    /// Resume from and save progress to this file.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Stop after this many chunks (progress stays in the checkpoint).
    #[arg(long)]
    chunk_budget: Option<usize>,
    /// Overrides as key=value.
    overrides: Vec<String>,
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        let code = match e.downcast_ref::<ExitCode>() {
            Some(c) => c.0,
            None => {
                eprintln!("error: {e:#}");
                2
            }
        };
        std::process::exit(code);
    }
}

/// Non-error exit status carried through `anyhow`.
#[derive(Debug)]
struct ExitCode(i32);

impl std::fmt::Display for ExitCode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "exit status {}", self.0)
    }
}

impl std::error::Error for ExitCode {}

fn run(cli: Cli) -> Result<()> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()?;
    let out = cli.out.as_deref();
    match cli.command {
        Command::Gen(a) => emit(out, &gen(&a, cli.seed)?),
        Command::Mwm(a) => emit(out, &pretty(mwm_cmd(&a, cli.seed)?)),
        Command::Bonus(a) => emit(out, &pretty(bonus_cmd(&a, cli.seed)?)),
        Command::Mp(a) => emit(out, &pretty(mp_cmd(&a)?)),
        Command::Decay(a) => emit(out, &pool.install(|| decay_cmd(&a, cli.seed))?),
        Command::Experiment(a) => experiment_cmd(&a, cli.seed, cli.threads, out),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pretty(v: Value) -> String {
    format!("{v:#}\n")
}

fn ext(x: ExtReal) -> Value {
    match x {
        ExtReal::Finite(v) => json!(v),
        ExtReal::Infinity => json!("inf"),
    }
}

fn gen(a: &GenArgs, seed: u64) -> Result<String> {
    let family = match a.family {
        FamilyName::Path => Family::Path { n: a.n },
        FamilyName::Cycle => Family::Cycle { n: a.n },
        FamilyName::Complete => Family::Complete { n: a.n },
        FamilyName::RegularTree => Family::regular_tree(a.d, a.depth),
        FamilyName::RandomTree => {
            let mut degree_weights = vec![1.0; a.d + 1];
            degree_weights[0] = 0.0;
            Family::RandomTree {
                n: a.n,
                degree_weights,
            }
        }
        FamilyName::RandomRegular => Family::RandomRegular { n: a.n, d: a.d },
        FamilyName::Er => Family::ErdosRenyi {
            n: a.n,
            lambda: a.lambda,
        },
        FamilyName::Hex => Family::HexPatch { radius: a.radius },
    };
    let g = generate(&family, seed)?;
    let w = a
        .weighted
        .then(|| sample_weights(&g, WeightDistribution::Exp1, &mut replica_rng(seed, 0)));
    Ok(write_edge_list(&g, w.as_ref()))
}

/// The graph and its weights; unweighted input gets seeded exponential weights.
fn load(input: &GraphInput, seed: u64) -> Result<(Graph, WeightAssignment)> {
    let text = fs::read_to_string(&input.input)
        .with_context(|| format!("reading {}", input.input.display()))?;
    let (g, w) = parse_edge_list(&text)?;
    let w = match w {
        Some(w) => w,
        None => sample_weights(&g, WeightDistribution::Exp1, &mut replica_rng(seed, 0)),
    };
    Ok((g, w))
}

fn mwm_cmd(a: &MwmArgs, seed: u64) -> Result<Value> {
    let (g, w) = load(&a.graph, seed)?;
    let view = g.view();
    let result: MwmResult = match a.solver {
        SolverName::Auto => mwm::solve(&view, &w)?,
        SolverName::Tree => mwm::mwm_tree(&view, &w)?,
        SolverName::BranchBound => mwm::mwm_branch_bound(&view, &w)?,
        SolverName::Enumeration => mwm::mwm_enumerate(&view, &w)?,
    };
    let result = result.certify(&view, &w, mwm::SolverLimits::default().certify_path_cap)?;
    Ok(json!({
        "edges": result.matching.edges(),
        "weight": result.total_weight,
        "certified": result.certified,
        "solver": result.solver,
    }))
}

fn bonus_cmd(a: &BonusArgs, seed: u64) -> Result<Value> {
    let (g, w) = load(&a.graph, seed)?;
    let view = g.view();
    let b = bonus(&view, &w, a.vertex)?;
    let s = sandwich(&view, &w, a.vertex, a.r)?;
    Ok(json!({
        "vertex": a.vertex,
        "r": a.r,
        "bonus": b,
        "lo": ext(s.lo()),
        "hi": ext(s.hi()),
    }))
}

fn parse_boundary(t: &RootedTree, arg: &str) -> Result<BoundaryCondition> {
    Ok(match arg {
        "zero" => BoundaryCondition::zero(t),
        "inf" => BoundaryCondition::infinite(t),
        file => {
            let text = fs::read_to_string(file)
                .with_context(|| format!("reading boundary file {file}"))?;
            let mut pairs = Vec::new();
            for (i, line) in text
                .lines()
                .enumerate()
                .filter(|(_, l)| !l.trim().is_empty())
            {
                let f: Vec<&str> = line.split_whitespace().collect();
                if f.len() != 2 {
                    bail!("boundary line {}: expected `vertex value`", i + 1);
                }
                let v = f[0]
                    .parse()
                    .with_context(|| format!("boundary line {}", i + 1))?;
                let a = match f[1] {
                    "inf" => ExtReal::Infinity,
                    x => ExtReal::Finite(
                        x.parse()
                            .with_context(|| format!("boundary line {}", i + 1))?,
                    ),
                };
                pairs.push((v, a));
            }
            BoundaryCondition::from_pairs(t, &pairs)?
        }
    })
}

fn mp_cmd(a: &MpArgs) -> Result<Value> {
    let text = fs::read_to_string(&a.graph.input)
        .with_context(|| format!("reading {}", a.graph.input.display()))?;
    let (g, _) = parse_edge_list(&text)?;
    let t = RootedTree::new(g, a.root)?;
    let bc = parse_boundary(&t, &a.boundary)?;
    let state = run_tree_recursion(&t, &bc)?;
    let s = root_sensitivity(&t)?;
    Ok(json!({
        "root_p": state.root_p(),
        "root_q": ext(state.root_q()),
        "sensitivity": s.value,
        "bound": s.bound,
        "height": t.height(),
        "max_degree": s.max_degree,
    }))
}

fn decay_cmd(a: &DecayArgs, seed: u64) -> Result<String> {
    if a.r_min > a.r_max {
        bail!("r_min exceeds r_max");
    }
    let (g, _) = load(&a.graph, seed)?;
    let plan = SeedPlan::new(seed, a.replicas);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["r", "method", "replicas", "mean", "stderr", "seed"])?;
    for r in a.r_min..=a.r_max {
        let est = rho_estimate(&g, a.edge, r, a.method, a.replicas, &plan)?;
        w.write_record([
            r.to_string(),
            est.method.to_string(),
            est.n_replicas.to_string(),
            est.mean.to_string(),
            est.std_error.to_string(),
            est.seed.to_string(),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn experiment_config(a: &ExperimentArgs, seed: u64) -> Result<ExperimentConfig> {
    let mut cfg = match (&a.config, a.kind) {
        (Some(path), _) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            ExperimentConfig::parse(&text)?
        }
        (None, Some(kind)) => {
            let mut cfg = ExperimentConfig::defaults(kind);
            cfg.master_seed = seed;
            cfg
        }
        (None, None) => bail!("pass --config FILE or --kind NAME"),
    };
    for o in &a.overrides {
        let (k, v) = o
            .split_once('=')
            .with_context(|| format!("override `{o}` is not key=value"))?;
        cfg.set(k.trim(), v.trim())?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn experiment_cmd(a: &ExperimentArgs, seed: u64, threads: usize, out: Option<&Path>) -> Result<()> {
    let cfg = experiment_config(a, seed)?;
    let hash = cfg.hash();
    let mut cp = match &a.checkpoint {
        Some(p) => Checkpoint::open(p, &hash, cfg.chunk)?,
        None => Checkpoint::in_memory(&hash, cfg.chunk),
    };
    if let Some(n) = a.chunk_budget {
        cp = cp.with_chunk_budget(n);
    }
    let record = match run_experiment_with_threads(&cfg, &mut cp, threads) {
        Err(e @ HarnessError::Interrupted { .. }) => {
            eprintln!("{e}");
            return Err(ExitCode(3).into());
        }
        r => r?,
    };
    emit(out, &record.to_csv()?)?;
    if let Some(p) = out {
        let mut json_path = p.as_os_str().to_owned();
        json_path.push(".json");
        fs::write(&json_path, record.to_json()?)?;
    }
    for c in record.failed_checks() {
        eprintln!("FAILED {}: {}", c.name, c.detail);
    }
    eprintln!(
        "{}: {} rows, {}/{} checks passed in {:.1}s",
        cfg.experiment,
        record.rows.len(),
        record.checks.iter().filter(|c| c.passed).count(),
        record.checks.len(),
        record.wall_time_secs
    );
    if record.passed() {
        Ok(())
    } else {
        Err(ExitCode(1).into())
    }
}
