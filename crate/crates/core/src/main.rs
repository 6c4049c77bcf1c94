use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use lclavg::bench::{
    build_instance, check_supported, format_ratio, rows_to_csv, run_experiment, run_once, ExperimentPlan, Family,
    ProblemId, SolverId,
};
use lclavg::decomp::{compute_decomposition, ColoringZ, DecompParams, NoHooks};
use lclavg::engine::{compute_distance_coloring, node_averaged_complexity, RunResult};
use lclavg::lcl::{check_solution, uniform_inputs, LclSpec};
use lclavg::solvers::{check_hierarchical_2half, HierLabel, RandomZ, SolverConfig};
use lclavg::tree::{read_tree, subdivide_edges, write_tree, IdAssignment, Tree};
use lclavg::Label;

#[derive(Parser)]
#[command(name = "lclavg", version, about = "Node-averaged LOCAL solvers for LCLs on trees")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print a tree of the family.
    Gen(GenArgs),
    /// Solve one instance and print a JSON summary.
    Run(RunArgs),
    /// Check a labeling of a tree.
    Check(CheckArgs),
    /// Print the decomposition trace and the layer of every node.
    Decompose(DecomposeArgs),
    /// Run a sweep and write CSV.
    Bench(BenchArgs),
}

#[derive(Args)]
struct InstanceArgs {
    #[arg(long, default_value = "path")]
    family: Family,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Degree cap of the random family.
    #[arg(long, default_value_t = 4)]
    max_degree: usize,
    /// Read the tree from a file instead of generating it.
    #[arg(long)]
    tree: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    inst: InstanceArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, default_value = "3col")]
    problem: ProblemId,
    #[arg(long, default_value = "det-avg")]
    solver: SolverId,
    #[arg(long, default_value_t = 2)]
    ell: usize,
    #[arg(long, default_value_t = 4.0)]
    c_phase: f64,
    #[arg(long, default_value_t = 2)]
    c_fail: u32,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    inst: InstanceArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Write the labeling here in the format `check` reads.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    tree: PathBuf,
    /// One label per edge of the subdivided tree for 3col, one of W B E D per
    /// node for 2half.
    #[arg(long)]
    labels: PathBuf,
    #[arg(long, default_value = "3col")]
    problem: ProblemId,
    #[arg(long, default_value_t = 2)]
    k: usize,
}

#[derive(Args)]
struct DecomposeArgs {
    #[command(flatten)]
    inst: InstanceArgs,
    #[arg(long, default_value_t = 2)]
    ell: usize,
    /// Use randomized compress instead of the distance coloring.
    #[arg(long)]
    randomized: bool,
    #[arg(long, default_value_t = 2)]
    c_fail: u32,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// JSON plan; the flags below build one when absent.
    #[arg(long)]
    plan: Option<PathBuf>,
    #[arg(long, default_value = "3col")]
    problem: ProblemId,
    #[arg(long, default_value = "det-avg")]
    solver: SolverId,
    #[arg(long, default_value = "path")]
    family: Family,
    #[arg(long, value_delimiter = ',')]
    sizes: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    seeds: Vec<u64>,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 2)]
    ell: usize,
    #[arg(long, default_value_t = 4.0)]
    c_phase: f64,
    #[arg(long, default_value_t = 2)]
    c_fail: u32,
    #[arg(long)]
    wall_time: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure kinds mapped to exit codes.
enum Fail {
    Checker(String),
    Usage(String),
    Runtime(String),
}

impl Fail {
    fn code(&self) -> u8 {
        match self {
            Fail::Checker(_) | Fail::Runtime(_) => 1,
            Fail::Usage(_) => 2,
        }
    }
}

#[derive(Serialize)]
struct Summary {
    problem: ProblemId,
    n: usize,
    seed: u64,
    avg_rounds: f64,
    max_rounds: usize,
    checker: &'static str,
    iterations: usize,
    failures: usize,
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Fail> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Fail::Runtime(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read(p: &PathBuf) -> Result<String, Fail> {
    fs::read_to_string(p).map_err(|e| Fail::Usage(format!("{}: {e}", p.display())))
}

fn instance(a: &InstanceArgs) -> Result<Tree, Fail> {
    match &a.tree {
        Some(p) => read_tree(&read(p)?).map_err(|e| Fail::Usage(e.to_string())),
        None if a.n == 0 => Err(Fail::Usage("--n must be positive".into())),
        None if a.family == Family::Hier && a.k == 0 => Err(Fail::Usage("--k must be at least 1".into())),
        None if a.max_degree < 2 => Err(Fail::Usage("--max-degree must be at least 2".into())),
        None => Ok(build_instance(a.family, a.n, a.seed, a.k, a.max_degree)),
    }
}

fn config(ell: usize, c_fail: u32, c_phase: f64, seed: u64) -> Result<SolverConfig, Fail> {
    let c = SolverConfig { ell, c_fail, c_phase, seed, ..SolverConfig::default() };
    c.validate().map_err(|e| Fail::Usage(e.to_string()))?;
    Ok(c)
}

fn cmd_run(a: RunArgs) -> Result<(), Fail> {
    check_supported(a.solver.problem, a.solver.solver).map_err(|e| Fail::Usage(e.to_string()))?;
    if a.solver.problem == ProblemId::TwoHalf && a.inst.k == 0 {
        return Err(Fail::Usage("--k must be at least 1".into()));
    }
    let tree = instance(&a.inst)?;
    let cfg = config(a.solver.ell, a.solver.c_fail, a.solver.c_phase, a.inst.seed)?;
    let o = run_once(a.solver.problem, a.solver.solver, &tree, a.inst.seed, &cfg, a.inst.k).map_err(Fail::Runtime)?;
    let n = tree.node_count();
    let avg = node_averaged_complexity(&RunResult::new(o.termination.clone(), vec![(); n]));
    let summary = Summary {
        problem: a.solver.problem,
        n,
        seed: a.inst.seed,
        avg_rounds: format_ratio(avg).parse().expect("decimal"),
        max_rounds: o.termination.iter().copied().max().unwrap_or(0),
        checker: if o.checker_ok { "accept" } else { "reject" },
        iterations: o.iterations,
        failures: o.failures,
    };
    println!("{}", serde_json::to_string(&summary).expect("serializable"));
    if let Some(p) = &a.out {
        let text = o.labels.as_deref().ok_or_else(|| Fail::Usage(format!("{} does not expose its labeling", a.solver.solver)))?;
        emit(&Some(p.clone()), text)?;
    }
    if o.checker_ok {
        Ok(())
    } else {
        Err(Fail::Checker("checker rejected the output".into()))
    }
}

fn cmd_check(a: CheckArgs) -> Result<(), Fail> {
    let tree = read_tree(&read(&a.tree)?).map_err(|e| Fail::Usage(e.to_string()))?;
    let text = read(&a.labels)?;
    let tokens: Vec<&str> = text.split_whitespace().collect();
    let msg = match a.problem {
        ProblemId::ThreeColoring => {
            let bt = subdivide_edges(&tree);
            let m = bt.tree().edge_count();
            if tokens.len() != m {
                return Err(Fail::Usage(format!("expected {m} labels, got {}", tokens.len())));
            }
            let labels = tokens
                .iter()
                .map(|t| t.parse::<Label>().map(Some))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| Fail::Usage(format!("bad label: {e}")))?;
            let spec = LclSpec::three_coloring(tree.max_degree().max(1));
            let v = check_solution(&spec, &bt, &uniform_inputs(&bt), &labels).map_err(|e| Fail::Usage(e.to_string()))?;
            if v.is_accept() {
                None
            } else {
                Some(format!("{v:?}"))
            }
        }
        ProblemId::TwoHalf => {
            if a.k == 0 {
                return Err(Fail::Usage("--k must be at least 1".into()));
            }
            if tokens.len() != tree.node_count() {
                return Err(Fail::Usage(format!("expected {} labels, got {}", tree.node_count(), tokens.len())));
            }
            let labels = tokens
                .iter()
                .map(|t| match *t {
                    "W" => Ok(HierLabel::W),
                    "B" => Ok(HierLabel::B),
                    "E" => Ok(HierLabel::E),
                    "D" => Ok(HierLabel::D),
                    other => Err(Fail::Usage(format!("bad label {other:?}"))),
                })
                .collect::<Result<Vec<_>, _>>()?;
            let v = check_hierarchical_2half(&tree, a.k, &labels);
            if v.is_accept() {
                None
            } else {
                Some(format!("{v:?}"))
            }
        }
    };
    match msg {
        None => {
            println!("accept");
            Ok(())
        }
        Some(m) => {
            println!("reject {m}");
            Err(Fail::Checker(m))
        }
    }
}

fn cmd_decompose(a: DecomposeArgs) -> Result<(), Fail> {
    let tree = instance(&a.inst)?;
    let n = tree.node_count();
    let cfg = config(a.ell, a.c_fail, 4.0, a.inst.seed)?;
    let ids = IdAssignment::from_seed(n, a.inst.seed);
    let params = DecompParams::new(a.ell);
    let res = if a.randomized {
        let mut z = RandomZ::new(a.ell, a.c_fail, n, a.inst.seed);
        compute_decomposition(&tree, ids.as_slice(), params, &mut z, &mut NoHooks)
    } else {
        let (col, _) = compute_distance_coloring(&tree, ids.as_slice(), cfg.s()).map_err(|e| Fail::Runtime(e.to_string()))?;
        let mut z = ColoringZ { colors: &col.colors, palette: col.palette_size, ell: a.ell };
        compute_decomposition(&tree, ids.as_slice(), params, &mut z, &mut NoHooks)
    };
    let (state, trace) = res.map_err(|e| Fail::Runtime(e.to_string()))?;
    let mut out = String::from("iteration,free_count,marked_count,promoted_count\n");
    for r in &trace {
        out.push_str(&format!("{},{},{},{}\n", r.iteration, r.free, r.marked, r.promoted));
    }
    out.push('\n');
    out.push_str(&state.dump());
    emit(&a.out, &out)
}

fn cmd_bench(a: BenchArgs) -> Result<(), Fail> {
    let mut plan = match &a.plan {
        Some(p) => ExperimentPlan::parse(&read(p)?).map_err(|e| Fail::Usage(e.to_string()))?,
        None => {
            let mut p = ExperimentPlan::new(a.problem, a.solver, a.family, a.sizes.clone(), a.seeds.clone());
            p.k = a.k;
            p.ell = a.ell;
            p.c_phase = a.c_phase;
            p.c_fail = a.c_fail;
            p.record_wall_time = a.wall_time;
            p.validate().map_err(|e| Fail::Usage(e.to_string()))?;
            p
        }
    };
    if a.out.is_some() {
        plan.out = a.out.clone();
    }
    let rows = run_experiment(&plan).map_err(|e| Fail::Runtime(e.to_string()))?;
    for r in rows.iter().filter(|r| r.error.is_some()) {
        eprintln!("n={} seed={}: {}", r.n, r.seed, r.error.as_deref().unwrap_or(""));
    }
    emit(&plan.out, &rows_to_csv(&rows).map_err(|e| Fail::Runtime(e.to_string()))?)?;
    if rows.iter().all(|r| r.checker_ok) {
        Ok(())
    } else {
        Err(Fail::Checker("some runs were rejected or failed".into()))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Cmd::Gen(a) => instance(&a.inst).and_then(|t| emit(&a.out, &write_tree(&t))),
        Cmd::Run(a) => cmd_run(a),
        Cmd::Check(a) => cmd_check(a),
        Cmd::Decompose(a) => cmd_decompose(a),
        Cmd::Bench(a) => cmd_bench(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Fail::Checker(m) | Fail::Usage(m) | Fail::Runtime(m) => eprintln!("error: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}
