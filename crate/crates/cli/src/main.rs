//! `nsis` — simulation, coupling estimation, and exact small-instance
//! verification for the noisy SIS chain on multigraphs.
//!
//! Exit codes: 0 when the command (and any checks it ran) succeeded, 1
//! when a check failed or a runtime error occurred, 2 on usage errors.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use nsis_cli::checks::verify_battery;
use nsis_cli::config::{ExperimentConfig, GraphFamily, ParamSpec};
use nsis_cli::experiments::{
    degree_bands_csv, degree_concentration_experiment, degree_graphs_csv, regime_csv,
    regime_table, scaling_csv, scaling_experiment, selfloop_csv, selfloop_experiment,
};
use nsis_cli::report::{fmt_f64, out_path, write_json, Table};
use nsis_core::coupling::{tail_curve, tmix_upper_estimate, CouplingKind, PairChoice};
use nsis_core::dynamics::{run_chain, theorem_bounds, Params, TheoremBounds, Trajectory};
use nsis_core::graph::{parse_graph, serialize_graph, Configuration, MultiGraph};
use nsis_core::oracle::{build_kernel, distance_profile, exact_tmix, stationary, ExactTmix};
use nsis_core::seeding::{stream_rng, sub_seed};
use nsis_core::{Error, Result};

#[derive(Parser)]
#[command(
    name = "nsis",
    version,
    about = "Noisy SIS chains on multigraphs: simulation, coupling-based mixing \
             estimates, and exact small-instance verification",
    arg_required_else_help = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw or load a graph and emit its text form plus a JSON census
    GenGraph {
        #[command(flatten)]
        graph: GraphSpecArgs,
        /// Seed for random families (--graph-seed takes precedence)
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output prefix: writes <out>.graph and <out>.json
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one trajectory and record the infected count over time
    Simulate {
        #[command(flatten)]
        graph: GraphSpecArgs,
        #[command(flatten)]
        params: ParamArgs,
        /// Number of steps to run
        #[arg(long)]
        steps: u64,
        /// Record every this-many steps
        #[arg(long, default_value_t = 1)]
        stride: u64,
        /// Initial configuration
        #[arg(long, value_enum, default_value_t = StartArg::AllInfected)]
        start: StartArg,
        /// Master seed (graph draw, trajectory, and random start derive from it)
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output prefix: writes <out>.csv and <out>.json
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate the mixing time from coupled-chain coalescence tails
    Couple {
        #[command(flatten)]
        graph: GraphSpecArgs,
        #[command(flatten)]
        params: ParamArgs,
        /// Coupling construction driving both chains
        #[arg(long, value_enum, default_value_t = CouplingArg::Independent)]
        coupling: CouplingArg,
        /// Mixing threshold the estimate targets
        #[arg(long, default_value_t = 0.25)]
        epsilon: f64,
        /// Coalescence replicas per survival point
        #[arg(long, default_value_t = 1000)]
        replicas: usize,
        /// Largest time on the reported survival curve (default: twice the estimate)
        #[arg(long)]
        t_max: Option<u64>,
        /// Number of points on the survival curve
        #[arg(long, default_value_t = 32)]
        grid_points: usize,
        /// Track this many random pairs instead of the extremal pair
        #[arg(long)]
        random_pairs: Option<usize>,
        /// Abort a replica that has not coalesced after this many steps
        #[arg(long, default_value_t = 1_000_000)]
        step_budget: u64,
        /// Master seed
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output prefix: writes <out>.csv and <out>.json
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact kernel analysis: stationary law, distance profile, mixing time
    Exact {
        #[command(flatten)]
        graph: GraphSpecArgs,
        #[command(flatten)]
        params: ParamArgs,
        /// Mixing threshold for the exact mixing time
        #[arg(long, default_value_t = 0.25)]
        epsilon: f64,
        /// Profile horizon (default: the exact mixing time)
        #[arg(long)]
        profile_t_max: Option<u64>,
        /// Seed for random graph families (--graph-seed takes precedence)
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output prefix: writes <out>-profile.csv, <out>-stationary.csv, <out>.json
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mixing-time scaling study over a size grid, fitted against n·ln n
    Scaling {
        #[command(flatten)]
        graph: GraphSpecArgs,
        #[command(flatten)]
        params: ParamArgs,
        /// Comma-separated, strictly increasing sizes (e.g. 100,200,400)
        #[arg(long, value_delimiter = ',', required = true)]
        n_grid: Vec<usize>,
        /// Mixing threshold
        #[arg(long, default_value_t = 0.25)]
        epsilon: f64,
        /// Coalescence replicas per size
        #[arg(long, default_value_t = 1000)]
        replicas: usize,
        /// Coupling construction
        #[arg(long, value_enum, default_value_t = CouplingArg::Independent)]
        coupling: CouplingArg,
        /// Master seed (per-size graph and replica streams derive from it)
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output prefix: writes <out>.csv and <out>.json
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the exact-oracle check battery and report PASS/FAIL per item
    Verify {
        /// Seed for the battery's randomized items
        #[arg(long, default_value_t = 20260816)]
        seed: u64,
        /// Output prefix: writes <out>.json
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate feasible strong-noise parameter regions per (n, alpha)
    Regimes {
        /// Comma-separated sizes
        #[arg(long, value_delimiter = ',', required = true)]
        n_grid: Vec<usize>,
        /// Comma-separated alpha exponents
        #[arg(long, value_delimiter = ',', required = true)]
        alpha_grid: Vec<f64>,
        /// Maximum degree used to size the suggested lambda (0 otherwise)
        #[arg(long)]
        max_degree: Option<usize>,
        /// Output prefix: writes <out>.csv and <out>.json
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Random-graph concentration studies: vertex degrees or self-loops
    Concentration {
        /// Which statistic to study
        #[arg(long, value_enum)]
        mode: ModeArg,
        /// Number of vertices per sampled graph
        #[arg(long)]
        n: usize,
        /// Edge probability (degrees mode)
        #[arg(long)]
        p: Option<f64>,
        /// Degree of the regular multigraph (self-loops mode)
        #[arg(long)]
        d: Option<usize>,
        /// Number of sampled graphs
        #[arg(long, default_value_t = 100)]
        graphs: usize,
        /// Comma-separated deviation levels (defaults: 0.3,0.5 for degrees; 5,10 for self-loops)
        #[arg(long, value_delimiter = ',')]
        deltas: Option<Vec<f64>>,
        /// Seed (graph i draws from sub-stream i)
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output prefix: writes CSV table(s) and <out>.json
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    Edgeless,
    Path,
    Cycle,
    Star,
    Er,
    Regular,
    GwBinomial,
    GwPoisson,
    File,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum StartArg {
    AllSusceptible,
    AllInfected,
    Random,
}

impl StartArg {
    fn name(self) -> &'static str {
        match self {
            StartArg::AllSusceptible => "all-susceptible",
            StartArg::AllInfected => "all-infected",
            StartArg::Random => "random",
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum CouplingArg {
    Independent,
    CommonUniform,
}

impl CouplingArg {
    fn kind(self) -> CouplingKind {
        match self {
            CouplingArg::Independent => CouplingKind::Independent,
            CouplingArg::CommonUniform => CouplingKind::CommonUniform,
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Degrees,
    SelfLoops,
}

/// Graph selection shared by every chain-running subcommand.
#[derive(Args)]
struct GraphSpecArgs {
    /// Graph family
    #[arg(long, value_enum, default_value_t = FamilyArg::Edgeless)]
    family: FamilyArg,
    /// Number of vertices (inferred from the file for --family file)
    #[arg(long)]
    n: Option<usize>,
    /// Edge probability (er family)
    #[arg(long)]
    p: Option<f64>,
    /// Degree (regular family)
    #[arg(long)]
    d: Option<usize>,
    /// Offspring trials per vertex (gw-binomial family)
    #[arg(long)]
    m: Option<u64>,
    /// Offspring mean (gw-poisson family)
    #[arg(long)]
    theta: Option<f64>,
    /// Path to a serialized graph (file family)
    #[arg(long)]
    graph_file: Option<PathBuf>,
    /// Dedicated seed for the graph draw (default: derived from --seed)
    #[arg(long)]
    graph_seed: Option<u64>,
}

fn need<T>(value: Option<T>, flag: &str, family: &str) -> Result<T> {
    value.ok_or_else(|| Error::Input(format!("graph family '{family}' needs {flag}")))
}

impl GraphSpecArgs {
    fn family(&self) -> Result<GraphFamily> {
        let family = match self.family {
            FamilyArg::Edgeless => GraphFamily::Edgeless,
            FamilyArg::Path => GraphFamily::Path,
            FamilyArg::Cycle => GraphFamily::Cycle,
            FamilyArg::Star => GraphFamily::Star,
            FamilyArg::Er => GraphFamily::Er { p: need(self.p, "--p", "er")? },
            FamilyArg::Regular => GraphFamily::Regular { d: need(self.d, "--d", "regular")? },
            FamilyArg::GwBinomial => GraphFamily::GwBinomial {
                m: need(self.m, "--m", "gw-binomial")?,
                p: need(self.p, "--p", "gw-binomial")?,
            },
            FamilyArg::GwPoisson => {
                GraphFamily::GwPoisson { theta: need(self.theta, "--theta", "gw-poisson")? }
            }
            FamilyArg::File => GraphFamily::File {
                path: need(self.graph_file.clone(), "--graph-file", "file")?,
            },
        };
        family.validate()?;
        Ok(family)
    }

    /// Realizes the graph, drawing random families from `default_seed`
    /// unless `--graph-seed` overrides it.
    fn realize(&self, default_seed: u64) -> Result<(GraphFamily, MultiGraph)> {
        let family = self.family()?;
        if let GraphFamily::File { path } = &family {
            let g = parse_graph(&std::fs::read_to_string(path)?)?;
            if let Some(n) = self.n {
                if g.n() != n {
                    return Err(Error::Input(format!(
                        "--n {n} disagrees with the {} vertices in {}",
                        g.n(),
                        path.display()
                    )));
                }
            }
            return Ok((family, g));
        }
        let n = self
            .n
            .ok_or_else(|| Error::Input("this graph family needs --n".into()))?;
        let seed = self.graph_seed.unwrap_or(default_seed);
        let g = family.realize(n, seed)?;
        Ok((family, g))
    }
}

/// Chain parameters: explicit values or the strong-noise recipe.
#[derive(Args)]
struct ParamArgs {
    /// Spontaneous infection probability of a susceptible vertex
    #[arg(long)]
    a: Option<f64>,
    /// Extra infection probability per infected neighbor
    #[arg(long)]
    lambda: Option<f64>,
    /// Recovery probability of an infected vertex
    #[arg(long)]
    kappa: Option<f64>,
    /// Derive (kappa, a, lambda) from the built-in strong-noise recipe
    #[arg(long, conflicts_with_all = ["a", "lambda", "kappa"])]
    recipe: bool,
    /// Exponent for the recipe's family-specific lambda rule
    #[arg(long, default_value_t = 2.0)]
    recipe_alpha: f64,
}

impl ParamArgs {
    fn spec(&self, default_recipe: bool) -> Result<ParamSpec> {
        if self.recipe {
            return Ok(ParamSpec::Recipe { alpha: self.recipe_alpha });
        }
        match (self.a, self.kappa) {
            (Some(a), Some(kappa)) => {
                Ok(ParamSpec::Explicit { a, lambda: self.lambda.unwrap_or(0.0), kappa })
            }
            (None, None) if self.lambda.is_none() => {
                if default_recipe {
                    Ok(ParamSpec::Recipe { alpha: self.recipe_alpha })
                } else {
                    Err(Error::Input(
                        "supply --a and --kappa (optionally --lambda), or --recipe".into(),
                    ))
                }
            }
            _ => Err(Error::Input(
                "--a and --kappa must be supplied together (optionally --lambda); \
                 or use --recipe"
                    .into(),
            )),
        }
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(msg) = init_workers() {
        eprintln!("error: {msg}");
        std::process::exit(2);
    }
    match run(cli) {
        Ok(true) => {}
        Ok(false) => std::process::exit(1),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(1);
        }
    }
}

/// Applies the NSIS_WORKERS knob. Thanks to per-item seed sub-streams and
/// ordered collection the knob changes wall time, never output bytes.
fn init_workers() -> std::result::Result<(), String> {
    let raw = match std::env::var("NSIS_WORKERS") {
        Ok(raw) => raw,
        Err(std::env::VarError::NotPresent) => return Ok(()),
        Err(e) => return Err(format!("NSIS_WORKERS: {e}")),
    };
    let workers: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&w| w >= 1)
        .ok_or_else(|| format!("NSIS_WORKERS must be a positive integer, got {raw:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build_global()
        .map_err(|e| format!("could not configure {workers} workers: {e}"))
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::GenGraph { graph, seed, out } => cmd_gen_graph(&graph, seed, out.as_deref()),
        Command::Simulate { graph, params, steps, stride, start, seed, out } => {
            cmd_simulate(&graph, &params, steps, stride, start, seed, out.as_deref())
        }
        Command::Couple {
            graph,
            params,
            coupling,
            epsilon,
            replicas,
            t_max,
            grid_points,
            random_pairs,
            step_budget,
            seed,
            out,
        } => cmd_couple(
            &graph,
            &params,
            coupling.kind(),
            epsilon,
            replicas,
            t_max,
            grid_points,
            random_pairs,
            step_budget,
            seed,
            out.as_deref(),
        ),
        Command::Exact { graph, params, epsilon, profile_t_max, seed, out } => {
            cmd_exact(&graph, &params, epsilon, profile_t_max, seed, out.as_deref())
        }
        Command::Scaling {
            graph,
            params,
            n_grid,
            epsilon,
            replicas,
            coupling,
            seed,
            out,
        } => cmd_scaling(
            &graph,
            &params,
            n_grid,
            epsilon,
            replicas,
            coupling.kind(),
            seed,
            out.as_deref(),
        ),
        Command::Verify { seed, out } => cmd_verify(seed, out.as_deref()),
        Command::Regimes { n_grid, alpha_grid, max_degree, out } => {
            cmd_regimes(&n_grid, &alpha_grid, max_degree, out.as_deref())
        }
        Command::Concentration { mode, n, p, d, graphs, deltas, seed, out } => {
            cmd_concentration(mode, n, p, d, graphs, deltas, seed, out.as_deref())
        }
    }
}

/// Emits a table to `<prefix>[-suffix].csv`, or to stdout without `--out`.
fn emit_table(table: &Table, out: Option<&Path>, suffix: &str) -> Result<()> {
    match out {
        Some(prefix) => {
            let path = out_path(prefix, suffix, "csv");
            table.write_csv(&path)?;
            eprintln!("wrote {}", path.display());
        }
        None => print!("{}", table.to_csv()),
    }
    Ok(())
}

/// Emits a JSON document to `<prefix>.json` when `--out` is present.
fn emit_json<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    if let Some(prefix) = out {
        let path = out_path(prefix, "", "json");
        write_json(&path, value)?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn param_comments(t: &mut Table, spec: &ParamSpec, family: &GraphFamily, p: &Params) {
    t.comment("params", spec.describe(family));
    t.comment("a", fmt_f64(p.a()));
    t.comment("lambda", fmt_f64(p.lambda()));
    t.comment("kappa", fmt_f64(p.kappa()));
}

fn cmd_gen_graph(graph: &GraphSpecArgs, seed: u64, out: Option<&Path>) -> Result<bool> {
    let draw_seed = graph.graph_seed.unwrap_or(seed);
    let (family, g) = graph.realize(draw_seed)?;

    #[derive(Serialize)]
    struct GraphCensus {
        family: String,
        seed: u64,
        n: usize,
        max_degree: usize,
        self_loops: usize,
        edge_instances: usize,
    }
    let census = GraphCensus {
        family: family.label(),
        seed: draw_seed,
        n: g.n(),
        max_degree: g.max_degree(),
        self_loops: g.self_loop_count(),
        edge_instances: g.edge_instance_count(),
    };

    let text = serialize_graph(&g);
    match out {
        Some(prefix) => {
            let path = out_path(prefix, "", "graph");
            std::fs::write(&path, &text)?;
            eprintln!("wrote {}", path.display());
            emit_json(&census, out)?;
        }
        None => print!("{text}"),
    }
    Ok(true)
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    graph: &GraphSpecArgs,
    params: &ParamArgs,
    steps: u64,
    stride: u64,
    start: StartArg,
    seed: u64,
    out: Option<&Path>,
) -> Result<bool> {
    let (family, g) = graph.realize(sub_seed(seed, 0))?;
    let spec = params.spec(false)?;
    let p = spec.resolve(g.n(), &family)?;
    let sigma0 = match start {
        StartArg::AllSusceptible => Configuration::all_susceptible(g.n()),
        StartArg::AllInfected => Configuration::all_infected(g.n()),
        StartArg::Random => Configuration::random(g.n(), &mut stream_rng(seed, u64::MAX)),
    };
    let trajectory = run_chain(&g, &p, &sigma0, steps, stride, sub_seed(seed, 1))?;

    let mut table = Table::new(vec!["t", "infected"]);
    table.comment("command", "simulate");
    table.comment("family", family.label());
    table.comment("n", g.n());
    param_comments(&mut table, &spec, &family, &p);
    table.comment("start", start.name());
    table.comment("steps", steps);
    table.comment("stride", stride);
    table.comment("seed", seed);
    for (i, &count) in trajectory.infected_counts.iter().enumerate() {
        table.push(vec![(i as u64 * stride).to_string(), count.to_string()]);
    }
    emit_table(&table, out, "")?;

    #[derive(Serialize)]
    struct SimulationSummary {
        family: String,
        n: usize,
        a: f64,
        lambda: f64,
        kappa: f64,
        start: &'static str,
        seed: u64,
        final_infected: usize,
        trajectory: Trajectory,
    }
    emit_json(
        &SimulationSummary {
            family: family.label(),
            n: g.n(),
            a: p.a(),
            lambda: p.lambda(),
            kappa: p.kappa(),
            start: start.name(),
            seed,
            final_infected: trajectory.final_state.infected_count(),
            trajectory,
        },
        out,
    )?;
    Ok(true)
}

/// `points` times spread evenly over `0..=horizon`, endpoints included.
fn time_grid(horizon: u64, points: usize) -> Vec<u64> {
    let points = points.max(2) as u64;
    let mut grid: Vec<u64> = (0..points).map(|i| horizon * i / (points - 1)).collect();
    grid.dedup();
    grid
}

#[allow(clippy::too_many_arguments)]
fn cmd_couple(
    graph: &GraphSpecArgs,
    params: &ParamArgs,
    kind: CouplingKind,
    epsilon: f64,
    replicas: usize,
    t_max: Option<u64>,
    grid_points: usize,
    random_pairs: Option<usize>,
    step_budget: u64,
    seed: u64,
    out: Option<&Path>,
) -> Result<bool> {
    let (family, g) = graph.realize(sub_seed(seed, 0))?;
    let spec = params.spec(false)?;
    let p = spec.resolve(g.n(), &family)?;

    let estimate =
        tmix_upper_estimate(&g, &p, kind, epsilon, replicas, sub_seed(seed, 1), step_budget)?;
    let horizon = t_max.unwrap_or_else(|| (2 * estimate.t_hat).max(8));
    let pair = match random_pairs {
        Some(k) => PairChoice::Random { k },
        None => PairChoice::Extremal,
    };
    let curve = tail_curve(&g, &p, kind, pair, &time_grid(horizon, grid_points), replicas, sub_seed(seed, 2))?;

    let mut table = Table::new(vec!["t", "survival", "stderr"]);
    table.comment("command", "couple");
    table.comment("family", family.label());
    table.comment("n", g.n());
    param_comments(&mut table, &spec, &family, &p);
    table.comment("coupling", kind.name());
    table.comment("epsilon", fmt_f64(epsilon));
    table.comment("replicas", replicas);
    table.comment("seed", seed);
    table.comment("t_hat", estimate.t_hat);
    table.comment("t_lo", estimate.t_lo);
    table.comment("survival_at_t_hat", fmt_f64(estimate.survival_at_t_hat));
    table.comment("stderr_at_t_hat", fmt_f64(estimate.stderr_at_t_hat));
    for point in &curve {
        table.push(vec![
            point.t.to_string(),
            fmt_f64(point.survival),
            fmt_f64(point.stderr),
        ]);
    }
    emit_table(&table, out, "")?;

    #[derive(Serialize)]
    struct CoupleSummary {
        family: String,
        n: usize,
        a: f64,
        lambda: f64,
        kappa: f64,
        coupling: &'static str,
        epsilon: f64,
        replicas: usize,
        seed: u64,
        estimate: nsis_core::coupling::TmixEstimate,
        curve: Vec<nsis_core::coupling::SurvivalPoint>,
    }
    emit_json(
        &CoupleSummary {
            family: family.label(),
            n: g.n(),
            a: p.a(),
            lambda: p.lambda(),
            kappa: p.kappa(),
            coupling: kind.name(),
            epsilon,
            replicas,
            seed,
            estimate,
            curve,
        },
        out,
    )?;
    Ok(true)
}

fn cmd_exact(
    graph: &GraphSpecArgs,
    params: &ParamArgs,
    epsilon: f64,
    profile_t_max: Option<u64>,
    seed: u64,
    out: Option<&Path>,
) -> Result<bool> {
    let (family, g) = graph.realize(sub_seed(seed, 0))?;
    let spec = params.spec(false)?;
    let p = spec.resolve(g.n(), &family)?;

    let kernel = build_kernel(&g, &p)?;
    let pi = stationary(&kernel)?;
    let tmix = exact_tmix(&kernel, epsilon)?;
    // The closed-form bounds degenerate when gamma <= 0; the exact part of
    // the analysis still stands, so they are reported only when defined.
    let bounds = theorem_bounds(&g, &p, epsilon).ok();
    let horizon = profile_t_max.unwrap_or_else(|| tmix.t.max(1));
    let profile = distance_profile(&kernel, horizon)?;

    let mut profile_table = Table::new(vec!["t", "d", "d_bar"]);
    profile_table.comment("command", "exact");
    profile_table.comment("family", family.label());
    profile_table.comment("n", g.n());
    param_comments(&mut profile_table, &spec, &family, &p);
    profile_table.comment("epsilon", fmt_f64(epsilon));
    profile_table.comment("tmix_exact", tmix.t);
    profile_table.comment("d_at_tmix", fmt_f64(tmix.d_at_t));
    if let Some(b) = &bounds {
        profile_table.comment("theorem_upper", fmt_f64(b.upper));
        profile_table.comment("theorem_lower", fmt_f64(b.lower));
        profile_table.comment("lower_vacuous", b.lower_vacuous);
    }
    for point in &profile {
        profile_table.push(vec![
            point.t.to_string(),
            fmt_f64(point.d),
            fmt_f64(point.d_bar),
        ]);
    }

    let infected_mean: f64 = pi
        .probs()
        .iter()
        .enumerate()
        .map(|(s, &prob)| prob * s.count_ones() as f64)
        .sum();

    match out {
        Some(_) => {
            emit_table(&profile_table, out, "profile")?;
            let mut pi_table = Table::new(vec!["state", "infected", "probability"]);
            pi_table.comment("command", "exact");
            pi_table.comment("n", g.n());
            pi_table.comment("infected_mean", fmt_f64(infected_mean));
            for (s, &prob) in pi.probs().iter().enumerate() {
                pi_table.push(vec![
                    s.to_string(),
                    s.count_ones().to_string(),
                    fmt_f64(prob),
                ]);
            }
            emit_table(&pi_table, out, "stationary")?;
        }
        None => emit_table(&profile_table, None, "")?,
    }

    #[derive(Serialize)]
    struct ExactSummary {
        family: String,
        n: usize,
        a: f64,
        lambda: f64,
        kappa: f64,
        epsilon: f64,
        tmix: ExactTmix,
        theorem: Option<TheoremBounds>,
        stationary_infected_mean: f64,
    }
    emit_json(
        &ExactSummary {
            family: family.label(),
            n: g.n(),
            a: p.a(),
            lambda: p.lambda(),
            kappa: p.kappa(),
            epsilon,
            tmix,
            theorem: bounds,
            stationary_infected_mean: infected_mean,
        },
        out,
    )?;
    Ok(true)
}

#[allow(clippy::too_many_arguments)]
fn cmd_scaling(
    graph: &GraphSpecArgs,
    params: &ParamArgs,
    n_grid: Vec<usize>,
    epsilon: f64,
    replicas: usize,
    coupling: CouplingKind,
    seed: u64,
    out: Option<&Path>,
) -> Result<bool> {
    if graph.n.is_some() {
        return Err(Error::Input("scaling sweeps --n-grid; drop --n".into()));
    }
    if graph.graph_seed.is_some() {
        return Err(Error::Input(
            "scaling derives one graph seed per size from --seed; drop --graph-seed".into(),
        ));
    }
    let family = graph.family()?;
    if matches!(family, GraphFamily::File { .. }) {
        return Err(Error::Input(
            "scaling needs a size-parameterized family, not a fixed graph file".into(),
        ));
    }

    let cfg = ExperimentConfig {
        family,
        n_grid,
        params: params.spec(true)?,
        epsilon,
        replicas,
        seed,
        coupling,
    };
    let report = scaling_experiment(&cfg)?;
    emit_table(&scaling_csv(&report), out, "")?;
    emit_json(&report, out)?;

    for row in &report.rows {
        if let Some(err) = &row.error {
            eprintln!("n = {}: {err}", row.n);
        }
    }
    Ok(report.fit.is_some() && report.rows.iter().all(|r| r.error.is_none()))
}

fn cmd_verify(seed: u64, out: Option<&Path>) -> Result<bool> {
    let outcomes = verify_battery(seed);
    for o in &outcomes {
        println!("{}: {} — {}", o.name, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    let passed = outcomes.iter().filter(|o| o.pass).count();
    println!("{passed}/{} checks passed", outcomes.len());
    emit_json(&outcomes, out)?;
    Ok(passed == outcomes.len())
}

fn cmd_regimes(
    n_grid: &[usize],
    alpha_grid: &[f64],
    max_degree: Option<usize>,
    out: Option<&Path>,
) -> Result<bool> {
    let rows = regime_table(n_grid, alpha_grid, max_degree)?;
    emit_table(&regime_csv(&rows, max_degree), out, "")?;
    emit_json(&rows, out)?;
    // Feasible cells must self-validate; empty cells are information.
    Ok(rows
        .iter()
        .all(|r| r.suggestion.is_none_or(|s| s.satisfies_regime)))
}

#[allow(clippy::too_many_arguments)]
fn cmd_concentration(
    mode: ModeArg,
    n: usize,
    p: Option<f64>,
    d: Option<usize>,
    graphs: usize,
    deltas: Option<Vec<f64>>,
    seed: u64,
    out: Option<&Path>,
) -> Result<bool> {
    match mode {
        ModeArg::Degrees => {
            if d.is_some() {
                return Err(Error::Input("--d only applies to --mode self-loops".into()));
            }
            let p = p.ok_or_else(|| Error::Input("--mode degrees needs --p".into()))?;
            let deltas = deltas.unwrap_or_else(|| vec![0.3, 0.5]);
            let report = degree_concentration_experiment(n, p, graphs, seed, &deltas)?;
            match out {
                Some(_) => {
                    emit_table(&degree_bands_csv(&report), out, "bands")?;
                    emit_table(&degree_graphs_csv(&report), out, "graphs")?;
                }
                None => emit_table(&degree_bands_csv(&report), None, "")?,
            }
            emit_json(&report, out)?;
            Ok(report.bands.iter().all(|b| b.meets_bound))
        }
        ModeArg::SelfLoops => {
            if p.is_some() {
                return Err(Error::Input("--p only applies to --mode degrees".into()));
            }
            let d = d.ok_or_else(|| Error::Input("--mode self-loops needs --d".into()))?;
            let deltas = deltas.unwrap_or_else(|| vec![5.0, 10.0]);
            let report = selfloop_experiment(n, d, graphs, seed, &deltas)?;
            emit_table(&selfloop_csv(&report), out, "")?;
            emit_json(&report, out)?;
            Ok(report.mean_within_3_sigma)
        }
    }
}
