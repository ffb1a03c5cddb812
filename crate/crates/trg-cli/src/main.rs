//! `trg` command line tool: build graphs, plan paths, run benchmarks,
//! render SVG figures.
//!
//! Exit codes: 0 success or valid negative result (e.g. unreachable goal),
//! 1 runtime failure, 2 usage or validation failure.

mod render;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use trg_core::sim::{run_benchmark, BenchConfig};
use trg_core::plan::plan;
use trg_core::{
    build_trg, ElevationMap, PlanOutcome, PlanQuery, Strategy, TrgError, TrgGraph,
    TrgParams,
};

#[derive(Parser)]
#[command(name = "trg", about = "Terrain risk graph planner", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a traversal risk graph from an elevation map.
    Build {
        /// Elevation map (.asc ascii grid or .pgm 16-bit with .meta sidecar)
        #[arg(long)]
        map: PathBuf,
        /// Start position "X,Y" in metres
        #[arg(long, value_parser = parse_xy)]
        start: [f64; 2],
        /// JSON file overriding graph parameters
        #[arg(long)]
        params: Option<PathBuf>,
        /// RNG seed; falls back to TRG_SEED, then 0
        #[arg(long)]
        seed: Option<u64>,
        /// Output graph JSON path
        #[arg(long)]
        out: PathBuf,
    },
    /// Plan a path on a previously built graph.
    Plan {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        map: PathBuf,
        #[arg(long, value_parser = parse_xy)]
        start: [f64; 2],
        #[arg(long, value_parser = parse_xy)]
        goal: [f64; 2],
        /// Risk strategy preset (optimistic=1, balanced=3, conservative=10)
        #[arg(long, default_value = "balanced")]
        strategy: String,
        /// Explicit safety factor; overrides --strategy
        #[arg(long = "Gamma", alias = "gamma")]
        gamma: Option<f64>,
        /// Moving-average smoothing window (odd)
        #[arg(long, default_value_t = 5)]
        smooth_window: usize,
        #[arg(long)]
        params: Option<PathBuf>,
        /// Output prefix; writes <out>.csv and <out>.json
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a benchmark sweep from a JSON config.
    Bench {
        #[arg(long)]
        config: PathBuf,
        /// Output directory for report.json and trials.csv
        #[arg(long)]
        out: PathBuf,
    },
    /// Render a map, optionally with a graph and a planned path, as SVG.
    Render {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        graph: Option<PathBuf>,
        /// Waypoint CSV produced by `trg plan`
        #[arg(long)]
        path: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_xy(s: &str) -> Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected X,Y, got {s:?}"));
    }
    let x = parts[0].trim().parse().map_err(|e| format!("bad X: {e}"))?;
    let y = parts[1].trim().parse().map_err(|e| format!("bad Y: {e}"))?;
    Ok([x, y])
}

/// Validation failures exit 2, anything else at runtime exits 1.
fn exit_for(err: &TrgError) -> ExitCode {
    match err {
        TrgError::Parse { .. }
        | TrgError::InvalidParam(_)
        | TrgError::StartNotStandable
        | TrgError::ScenarioBudget(_) => ExitCode::from(2),
        _ => ExitCode::from(1),
    }
}

fn load_params(path: &Option<PathBuf>) -> trg_core::Result<TrgParams> {
    let params = match path {
        Some(p) => {
            let text = fs::read_to_string(p)?;
            serde_json::from_str(&text).map_err(|e| TrgError::Parse {
                path: p.display().to_string(),
                message: e.to_string(),
            })?
        }
        None => TrgParams::default(),
    };
    params.validate()?;
    Ok(params)
}

fn resolve_seed(flag: Option<u64>) -> Result<u64, String> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var("TRG_SEED") {
        Ok(v) => v.parse().map_err(|e| format!("bad TRG_SEED: {e}")),
        Err(_) => Ok(0),
    }
}

fn cmd_build(
    map: &Path,
    start: [f64; 2],
    params: &Option<PathBuf>,
    seed: Option<u64>,
    out: &Path,
) -> trg_core::Result<()> {
    let params = load_params(params)?;
    let seed = resolve_seed(seed).map_err(TrgError::InvalidParam)?;
    let map = ElevationMap::load_auto(map)?;
    let t0 = Instant::now();
    let graph = build_trg(&map, start, &params, seed)?;
    let dt = t0.elapsed();
    graph.save_json(out)?;
    println!(
        "built graph: {} nodes, {} edges in {:.1} ms -> {}",
        graph.node_count(),
        graph.edge_count(),
        dt.as_secs_f64() * 1e3,
        out.display()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_plan(
    graph: &Path,
    map: &Path,
    start: [f64; 2],
    goal: [f64; 2],
    strategy: &str,
    gamma: Option<f64>,
    smooth_window: usize,
    params: &Option<PathBuf>,
    out: &Path,
) -> trg_core::Result<()> {
    let params = load_params(params)?;
    let safety_factor = match gamma {
        Some(g) => g,
        None => Strategy::parse(strategy)
            .ok_or_else(|| TrgError::InvalidParam(format!("unknown strategy {strategy:?}")))?
            .safety_factor(),
    };
    let map = ElevationMap::load_auto(map)?;
    let graph = TrgGraph::load_json(graph)?;
    let mut query = PlanQuery::new(start, goal, safety_factor);
    query.smooth_window = smooth_window;
    let outcome = plan(&graph, &map, &params, &query)?;

    let csv_path = out.with_extension("csv");
    let json_path = out.with_extension("json");
    // The summary file omits wall-clock timing so identical queries give
    // byte-identical files; timing goes to stdout instead.
    let (summary, time_ms) = match outcome {
        PlanOutcome::Planned(result) => {
            let mut csv = String::from("x,y,z\n");
            for w in &result.waypoints {
                csv.push_str(&format!("{},{},{}\n", w[0], w[1], w[2]));
            }
            fs::write(&csv_path, csv)?;
            (
                serde_json::json!({
                    "status": "planned",
                    "gamma": safety_factor,
                    "total_cost": result.total_cost,
                    "l_path": result.l_path,
                    "w_norm": result.w_norm,
                    "is_subgoal": result.is_subgoal,
                    "waypoints": result.waypoints.len(),
                    "nodes": result.node_path.len(),
                }),
                result.planning_time.as_secs_f64() * 1e3,
            )
        }
        PlanOutcome::Unreachable => {
            fs::write(&csv_path, "x,y,z\n")?;
            (
                serde_json::json!({ "status": "unreachable", "gamma": safety_factor }),
                0.0,
            )
        }
    };
    let text = serde_json::to_string_pretty(&summary)?;
    fs::write(&json_path, &text)?;
    println!("{text}");
    println!("planning_time_ms: {time_ms:.3}");
    Ok(())
}

fn cmd_bench(config: &Path, out: &Path) -> trg_core::Result<()> {
    let text = fs::read_to_string(config)?;
    let config: BenchConfig = serde_json::from_str(&text).map_err(|e| TrgError::Parse {
        path: config.display().to_string(),
        message: e.to_string(),
    })?;
    config.validate()?;
    let report = run_benchmark(&config)?;
    fs::create_dir_all(out)?;
    fs::write(out.join("report.json"), serde_json::to_string_pretty(&report)?)?;
    fs::write(out.join("trials.csv"), report.to_csv())?;
    print!("{}", report.summary_table());
    Ok(())
}

fn cmd_render(
    map: &Path,
    graph: &Option<PathBuf>,
    path: &Option<PathBuf>,
    out: &Path,
) -> trg_core::Result<()> {
    let map = ElevationMap::load_auto(map)?;
    let graph = match graph {
        Some(p) => Some(TrgGraph::load_json(p)?),
        None => None,
    };
    let waypoints = match path {
        Some(p) => Some(render::read_waypoint_csv(p)?),
        None => None,
    };
    let svg = render::render_svg(&map, graph.as_ref(), waypoints.as_deref());
    fs::write(out, svg)?;
    println!("wrote {}", out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Build {
            map,
            start,
            params,
            seed,
            out,
        } => cmd_build(map, *start, params, *seed, out),
        Command::Plan {
            graph,
            map,
            start,
            goal,
            strategy,
            gamma,
            smooth_window,
            params,
            out,
        } => cmd_plan(
            graph,
            map,
            *start,
            *goal,
            strategy,
            *gamma,
            *smooth_window,
            params,
            out,
        ),
        Command::Bench { config, out } => cmd_bench(config, out),
        Command::Render {
            map,
            graph,
            path,
            out,
        } => cmd_render(map, graph, path, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            // unreadable inputs are validation failures for render
            if matches!(cli.command, Command::Render { .. }) {
                ExitCode::from(2)
            } else {
                exit_for(&e)
            }
        }
    }
}
