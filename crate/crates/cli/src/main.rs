//! `poa` command-line front end: generate benchmark worlds, plan missions
//! with the baseline planners and their passable-obstacle-aware variants,
//! and run the benchmark ensembles with CSV/SVG output.

mod svg;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use poa_core::geometry::RobotGeometry;
use poa_core::grid::OccupancyGrid;
use poa_core::io;
use poa_core::planners::{plan_2d, Path2D, PlannerConfig, PlannerId, RrtParams};
use poa_core::poa::{poa_plan, PoaParams, RepairRecord};
use poa_core::scenario::{derive_seed, generate_world, Mission, ScenarioSpec, World};
use poa_core::simulation::{
    planner_view, run_benchmark, simulate_traversal, BenchPlanner, SpeedModel,
};
use poa_core::terrain::{
    plan_3d, preprocess_cloud, Path3D, StabilityLimits, TerrainModel, TerrainParams,
};

use svg::{SvgMarker, SvgPath, SvgScene};

const EXIT_NO_PATH: u8 = 2;
const EXIT_USAGE: u8 = 64;
const EXIT_IO: u8 = 74;

#[derive(Parser)]
#[command(name = "poa", version, about = "Passable-obstacle-aware motion planning toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a world (labelled cloud + ground-truth grids) from a builtin
    /// setup or a scenario file.
    Generate(GenerateArgs),
    /// Plan the mission legs of a generated world and render the result.
    Plan(PlanArgs),
    /// Run planner ensembles over scenarios and summarize them.
    Bench(BenchArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Builtin setup name: setup1, setup2, setup3, setup3d.
    #[arg(long, conflicts_with = "spec")]
    setup: Option<String>,
    /// Scenario file to generate from.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Output directory for the world files.
    #[arg(long)]
    out: PathBuf,
    /// Override the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overwrite existing output files.
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct PlanArgs {
    /// Directory produced by `poa generate`.
    #[arg(long)]
    world: PathBuf,
    /// Baseline planner: astar, rrt_star, gvd.
    #[arg(long)]
    planner: String,
    /// Repair the path through passable obstacles.
    #[arg(long)]
    poa: bool,
    /// Lift the plan onto the 3D terrain with roll/pitch gating.
    #[arg(long = "3d")]
    three_d: bool,
    /// Output directory (default: `<world>/plan-<planner>`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the planning seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Extra scenario fragment overriding planner parameters.
    #[arg(long)]
    params: Option<PathBuf>,
    /// Overwrite existing output files.
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated builtin setups.
    #[arg(long, default_value = "setup1,setup2,setup3")]
    setups: String,
    /// Additional scenario files.
    #[arg(long)]
    spec: Vec<PathBuf>,
    /// Comma-separated planners (baseline or `<planner>+poa`).
    #[arg(long, default_value = "gvd,astar,rrt_star,gvd+poa,astar+poa,rrt_star+poa")]
    planners: String,
    /// Seeded repetitions per scenario.
    #[arg(long, default_value_t = 20)]
    repeats: usize,
    /// Override the base seed of every scenario.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for results.csv and summary.txt.
    #[arg(long, default_value = "bench-out")]
    out: PathBuf,
    /// Overwrite existing output files.
    #[arg(long)]
    force: bool,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Io(String),
    NoPath(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(_) => EXIT_IO,
            CliError::NoPath(_) => EXIT_NO_PATH,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Io(m) | CliError::NoPath(m) => m,
        }
    }
}

fn io_err<E: std::fmt::Display>(context: &str) -> impl FnOnce(E) -> CliError + '_ {
    move |e| CliError::Io(format!("{context}: {e}"))
}

fn log_level() -> u8 {
    match std::env::var("POA_LOG").as_deref() {
        Ok("error") => 0,
        Ok("info") => 2,
        Ok("debug") => 3,
        _ => 1,
    }
}

fn log_info(msg: &str) {
    if log_level() >= 2 {
        eprintln!("[info] {msg}");
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Plan(args) => cmd_plan(args),
        Command::Bench(args) => cmd_bench(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.exit_code())
        }
    }
}

/// Refuse to clobber existing output files unless `--force` is given.
fn ensure_writable(paths: &[PathBuf], force: bool) -> Result<(), CliError> {
    if force {
        return Ok(());
    }
    for p in paths {
        if p.exists() {
            return Err(CliError::Io(format!(
                "{} already exists (use --force to overwrite)",
                p.display()
            )));
        }
    }
    Ok(())
}

fn load_spec(
    setup: Option<&str>,
    file: Option<&Path>,
    seed: Option<u64>,
) -> Result<ScenarioSpec, CliError> {
    let mut spec = match (setup, file) {
        (Some(name), None) => ScenarioSpec::builtin(name)
            .ok_or_else(|| CliError::Usage(format!("unknown setup `{name}`")))?,
        (None, Some(path)) => {
            let text = fs::read_to_string(path).map_err(io_err(&format!(
                "reading {}",
                path.display()
            )))?;
            ScenarioSpec::from_text(&text)
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?
        }
        _ => {
            return Err(CliError::Usage(
                "exactly one of --setup or --spec is required".into(),
            ))
        }
    };
    if let Some(seed) = seed {
        spec.rng_seed = seed;
    }
    Ok(spec)
}

fn cmd_generate(args: GenerateArgs) -> Result<(), CliError> {
    let spec = load_spec(args.setup.as_deref(), args.spec.as_deref(), args.seed)?;
    fs::create_dir_all(&args.out).map_err(io_err("creating output directory"))?;
    let cloud_path = args.out.join("world.cloud");
    let passable_path = args.out.join("passable.grid");
    let unpassable_path = args.out.join("unpassable.grid");
    let spec_path = args.out.join("scenario.spec");
    ensure_writable(
        &[
            cloud_path.clone(),
            passable_path.clone(),
            unpassable_path.clone(),
            spec_path.clone(),
        ],
        args.force,
    )?;
    log_info(&format!("generating world `{}` (seed {})", spec.name, spec.rng_seed));
    let world = generate_world(&spec).map_err(|e| CliError::Usage(e.to_string()))?;
    io::write_cloud(&cloud_path, &world.cloud).map_err(io_err("writing cloud"))?;
    io::write_grid(&passable_path, &world.passable_grid).map_err(io_err("writing passable grid"))?;
    io::write_grid(&unpassable_path, &world.unpassable_grid)
        .map_err(io_err("writing unpassable grid"))?;
    fs::write(&spec_path, spec.to_text()).map_err(io_err("writing resolved spec"))?;
    log_info(&format!(
        "wrote {} points, {}x{} grids",
        world.cloud.len(),
        world.passable_grid.width,
        world.passable_grid.height
    ));
    Ok(())
}

struct LoadedWorld {
    spec: ScenarioSpec,
    world: World,
}

fn load_world(dir: &Path, params: Option<&Path>, seed: Option<u64>) -> Result<LoadedWorld, CliError> {
    let spec_text = fs::read_to_string(dir.join("scenario.spec"))
        .map_err(io_err("reading scenario.spec"))?;
    let merged_text = match params {
        Some(p) => {
            let extra =
                fs::read_to_string(p).map_err(io_err(&format!("reading {}", p.display())))?;
            format!("{spec_text}\n{extra}")
        }
        None => spec_text,
    };
    let mut spec = ScenarioSpec::from_text(&merged_text)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    if let Some(seed) = seed {
        spec.rng_seed = seed;
    }
    let cloud = io::read_cloud(&dir.join("world.cloud")).map_err(io_err("reading world.cloud"))?;
    let passable_grid =
        io::read_grid(&dir.join("passable.grid")).map_err(io_err("reading passable.grid"))?;
    let unpassable_grid =
        io::read_grid(&dir.join("unpassable.grid")).map_err(io_err("reading unpassable.grid"))?;
    let world = World {
        spec: spec.clone(),
        cloud,
        passable_grid,
        unpassable_grid,
        stones: Vec::new(),
        heightfield: poa_core::scenario::Heightfield::flat(),
    };
    Ok(LoadedWorld { spec, world })
}

struct LegOutcome {
    mission: Mission,
    path2d: Option<Path2D>,
    path3d: Option<Path3D>,
    repairs: Vec<RepairRecord>,
    residual_collisions: usize,
    rounds: usize,
}

fn plan_leg_detailed(
    world: &World,
    merged: &OccupancyGrid,
    base: PlannerId,
    with_poa: bool,
    mission: &Mission,
    seed: u64,
    model: Option<&TerrainModel>,
) -> LegOutcome {
    let geom = RobotGeometry::default();
    let mut outcome = LegOutcome {
        mission: mission.clone(),
        path2d: None,
        path3d: None,
        repairs: Vec::new(),
        residual_collisions: 0,
        rounds: 0,
    };
    let runs = if base == PlannerId::RrtStar { 10 } else { 1 };
    let search_grid = if with_poa {
        planner_view(&world.unpassable_grid, base, &geom)
    } else {
        planner_view(merged, base, &geom)
    };
    for run in 0..runs {
        let config = PlannerConfig {
            rrt: RrtParams {
                rng_seed: derive_seed(seed, 0xCAFE + run as u64),
                ..world.spec.rrt
            },
            geometry: geom,
        };
        if let Some(model) = model {
            // 3D planning implies the POA pipeline per round.
            let params = world
                .spec
                .poa
                .unwrap_or_else(|| PoaParams::for_planner(base));
            if let Ok(plan) = plan_3d(
                base,
                &world.passable_grid,
                &search_grid,
                model,
                mission.start,
                mission.goal,
                &config,
                &params,
                &StabilityLimits::default(),
                25,
            ) {
                let better = outcome
                    .path3d
                    .as_ref()
                    .is_none_or(|p| plan.path.length() < p.length());
                if better {
                    outcome.path2d = Some(plan.plan2d.path.clone());
                    outcome.repairs = plan.plan2d.repairs.clone();
                    outcome.residual_collisions = plan.plan2d.residual_collisions.len();
                    outcome.rounds = plan.rounds;
                    outcome.path3d = Some(plan.path);
                }
            }
        } else if with_poa {
            let params = world
                .spec
                .poa
                .unwrap_or_else(|| PoaParams::for_planner(base));
            if let Ok(plan) = poa_plan(
                base,
                &world.passable_grid,
                &search_grid,
                mission.start,
                mission.goal,
                &config,
                &params,
            ) {
                let better = outcome
                    .path2d
                    .as_ref()
                    .is_none_or(|p| plan.path.length() < p.length());
                if better {
                    outcome.repairs = plan.repairs.clone();
                    outcome.residual_collisions = plan.residual_collisions.len();
                    outcome.path2d = Some(plan.path);
                }
            }
        } else if let Ok(path) = plan_2d(base, &search_grid, mission.start, mission.goal, &config) {
            let better = outcome
                .path2d
                .as_ref()
                .is_none_or(|p| path.length() < p.length());
            if better {
                outcome.path2d = Some(path);
            }
        }
    }
    outcome
}

fn path2d_csv(path: &Path2D) -> String {
    let mut out = String::from("x,y,yaw\n");
    for p in &path.waypoints {
        let _ = writeln!(out, "{:.4},{:.4},{:.4}", p.x, p.y, p.theta);
    }
    out
}

fn path3d_csv(path: &Path3D) -> String {
    let mut out = String::from("x,y,z,yaw,roll,pitch\n");
    for p in &path.waypoints {
        let _ = writeln!(
            out,
            "{:.4},{:.4},{:.4},{:.4},{:.4},{:.4}",
            p.x, p.y, p.z, p.yaw, p.roll, p.pitch
        );
    }
    out
}

fn cmd_plan(args: PlanArgs) -> Result<(), CliError> {
    let base = PlannerId::parse(&args.planner)
        .ok_or_else(|| CliError::Usage(format!("unknown planner `{}`", args.planner)))?;
    let loaded = load_world(&args.world, args.params.as_deref(), args.seed)?;
    let spec = &loaded.spec;
    let world = &loaded.world;
    let mut tag = args.planner.clone();
    if args.poa {
        tag.push_str("-poa");
    }
    if args.three_d {
        tag.push_str("-3d");
    }
    let out_dir = args
        .out
        .clone()
        .unwrap_or_else(|| args.world.join(format!("plan-{tag}")));
    fs::create_dir_all(&out_dir).map_err(io_err("creating output directory"))?;

    let model = if args.three_d {
        log_info("reconstructing terrain surface");
        Some(
            preprocess_cloud(
                &world.cloud,
                &world.passable_grid,
                &world.unpassable_grid,
                &TerrainParams::default(),
            )
            .map_err(|e| CliError::NoPath(format!("terrain preprocessing failed: {e}")))?,
        )
    } else {
        None
    };

    let merged = world.merged_grid();
    let missions = spec.missions();
    let mut leg_files: Vec<PathBuf> = missions
        .iter()
        .map(|m| out_dir.join(format!("leg-{}.csv", m.name)))
        .collect();
    leg_files.push(out_dir.join("plan.meta"));
    leg_files.push(out_dir.join("plan.svg"));
    ensure_writable(&leg_files, args.force)?;

    let geom = RobotGeometry::default();
    let speed = SpeedModel::default();
    let seed = args.seed.unwrap_or(spec.rng_seed);
    let mut outcomes = Vec::new();
    for mission in &missions {
        log_info(&format!("planning leg {}", mission.name));
        let use_poa = args.poa || args.three_d;
        outcomes.push(plan_leg_detailed(
            world,
            &merged,
            base,
            use_poa,
            mission,
            seed,
            model.as_ref(),
        ));
    }

    // Meta + per-leg CSVs.
    let mut meta = String::new();
    let _ = writeln!(meta, "command = plan");
    let _ = writeln!(meta, "planner = {}", base.name());
    let _ = writeln!(meta, "poa = {}", args.poa || args.three_d);
    let _ = writeln!(meta, "three_d = {}", args.three_d);
    let _ = writeln!(meta, "seed = {seed}");
    let _ = writeln!(meta, "resume_policy = after_clear_window");
    let mut all_ok = true;
    for outcome in &outcomes {
        let name = &outcome.mission.name;
        match (&outcome.path2d, &outcome.path3d) {
            (Some(path2d), maybe3d) => {
                let leg_csv = out_dir.join(format!("leg-{name}.csv"));
                match maybe3d {
                    Some(path3d) => {
                        fs::write(&leg_csv, path3d_csv(path3d)).map_err(io_err("writing leg csv"))?;
                        let _ = writeln!(meta, "leg.{name}.rounds = {}", outcome.rounds);
                        let _ = writeln!(meta, "leg.{name}.length3d_m = {:.3}", path3d.length());
                        let _ = writeln!(
                            meta,
                            "leg.{name}.max_abs_roll = {:.4}",
                            path3d.max_abs_roll()
                        );
                        let _ = writeln!(
                            meta,
                            "leg.{name}.max_abs_pitch = {:.4}",
                            path3d.max_abs_pitch()
                        );
                    }
                    None => {
                        fs::write(&leg_csv, path2d_csv(path2d)).map_err(io_err("writing leg csv"))?;
                    }
                }
                let time = simulate_traversal(path2d, &world.passable_grid, &geom, &speed);
                let _ = writeln!(meta, "leg.{name}.status = ok");
                let _ = writeln!(meta, "leg.{name}.length_m = {:.3}", path2d.length());
                let _ = writeln!(meta, "leg.{name}.time_s = {:.3}", time);
                let _ = writeln!(meta, "leg.{name}.repairs = {}", outcome.repairs.len());
                let _ = writeln!(
                    meta,
                    "leg.{name}.residual_collisions = {}",
                    outcome.residual_collisions
                );
            }
            _ => {
                all_ok = false;
                let _ = writeln!(meta, "leg.{name}.status = FAILURE");
            }
        }
    }
    fs::write(out_dir.join("plan.meta"), &meta).map_err(io_err("writing plan.meta"))?;

    // One SVG for the whole run.
    let colors = ["#2255cc", "#11794b", "#8133a8", "#b3551b"];
    let xy_paths: Vec<Vec<(f64, f64)>> = outcomes
        .iter()
        .map(|o| {
            o.path2d
                .as_ref()
                .map(|p| p.waypoints.iter().map(|w| (w.x, w.y)).collect())
                .unwrap_or_default()
        })
        .collect();
    let mut scene = SvgScene {
        extent_x: spec.extent_x,
        extent_y: spec.extent_y,
        passable: Some(&world.passable_grid),
        unpassable: Some(&world.unpassable_grid),
        paths: Vec::new(),
        splices: Vec::new(),
        markers: Vec::new(),
    };
    for (i, outcome) in outcomes.iter().enumerate() {
        if !xy_paths[i].is_empty() {
            scene.paths.push(SvgPath {
                points: &xy_paths[i],
                color: colors[i % colors.len()],
                label: &outcome.mission.name,
            });
        }
        for repair in &outcome.repairs {
            scene.splices.push((repair.alternative.x, repair.alternative.y));
        }
    }
    scene.markers.push(SvgMarker {
        x: spec.start.x,
        y: spec.start.y,
        color: "#0a7d2c".into(),
        label: "S".into(),
    });
    for (name, goal) in &spec.goals {
        scene.markers.push(SvgMarker {
            x: goal.x,
            y: goal.y,
            color: "#c02626".into(),
            label: name.clone(),
        });
    }
    fs::write(out_dir.join("plan.svg"), scene.render()).map_err(io_err("writing plan.svg"))?;

    if all_ok {
        Ok(())
    } else {
        Err(CliError::NoPath("one or more legs found no path".into()))
    }
}

fn cmd_bench(args: BenchArgs) -> Result<(), CliError> {
    let mut specs = Vec::new();
    for name in args.setups.split(',').filter(|s| !s.is_empty()) {
        specs.push(
            ScenarioSpec::builtin(name.trim())
                .ok_or_else(|| CliError::Usage(format!("unknown setup `{name}`")))?,
        );
    }
    for path in &args.spec {
        let text =
            fs::read_to_string(path).map_err(io_err(&format!("reading {}", path.display())))?;
        specs.push(
            ScenarioSpec::from_text(&text)
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?,
        );
    }
    if let Some(seed) = args.seed {
        for spec in &mut specs {
            spec.rng_seed = seed;
        }
    }
    let mut planners = Vec::new();
    for name in args.planners.split(',').filter(|s| !s.is_empty()) {
        planners.push(
            BenchPlanner::parse(name.trim())
                .ok_or_else(|| CliError::Usage(format!("unknown planner `{name}`")))?,
        );
    }
    fs::create_dir_all(&args.out).map_err(io_err("creating output directory"))?;
    let csv_path = args.out.join("results.csv");
    let summary_path = args.out.join("summary.txt");
    ensure_writable(&[csv_path.clone(), summary_path.clone()], args.force)?;

    log_info(&format!(
        "benchmarking {} setups x {} planners x {} repeats",
        specs.len(),
        planners.len(),
        args.repeats
    ));
    let result = run_benchmark(&specs, &planners, args.repeats, &SpeedModel::default())
        .map_err(|e| CliError::Usage(e.to_string()))?;
    fs::write(&csv_path, result.to_csv()).map_err(io_err("writing results.csv"))?;
    let summary = result.summary_table();
    fs::write(&summary_path, &summary).map_err(io_err("writing summary.txt"))?;
    print!("{summary}");
    Ok(())
}
