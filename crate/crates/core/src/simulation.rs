//! Kinematic traversal model and the benchmark harness.
//!
//! Traversal time integrates segment length over a local speed: nominal
//! cruise, a curvature penalty on tight turns, and a half-speed crawl while
//! any part of the wheel or body footprint overlaps an occupied passable
//! cell. Passable stones never fail a mission; they cost time.

use std::fmt::Write as _;

use crate::geometry::{normalize_angle, Ellipse2D, Pose2D, RobotGeometry};
use crate::grid::{CellState, OccupancyGrid};
use crate::planners::{plan_2d, Path2D, PlannerConfig, PlannerId, RrtParams};
use crate::poa::{poa_plan, wheel_collision, PoaParams};
use crate::scenario::{derive_seed, generate_world, Mission, ScenarioError, ScenarioSpec, World};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedModel {
    pub v_nominal: f64,
    /// Speed while the footprint overlaps an occupied passable cell.
    pub v_over_passable: f64,
    /// Factor applied when curvature exceeds `1 / (2 * turn_radius_min)`.
    pub v_turn_scale: f64,
}

impl Default for SpeedModel {
    fn default() -> Self {
        Self {
            v_nominal: 0.12,
            v_over_passable: 0.08,
            v_turn_scale: 0.8,
        }
    }
}

/// Euclidean polyline length of a 2D path.
pub fn path_length(path: &Path2D) -> f64 {
    path.length()
}

/// True when the wheels or the body corridor overlap an occupied passable
/// cell at this pose.
pub fn footprint_over_passable(
    pose: &Pose2D,
    passable_grid: &OccupancyGrid,
    geom: &RobotGeometry,
) -> bool {
    if wheel_collision(pose, passable_grid, geom).is_some() {
        return true;
    }
    let corridor_half_width = (geom.track_width / 2.0 - geom.wheel_ellipse_b).max(1e-6);
    let body = Ellipse2D::new(
        pose.x,
        pose.y,
        geom.wheel_ellipse_a.max(corridor_half_width),
        geom.wheel_ellipse_a.min(corridor_half_width),
        if geom.wheel_ellipse_a >= corridor_half_width {
            pose.theta
        } else {
            pose.theta + std::f64::consts::FRAC_PI_2
        },
    );
    let r = body.semi_major;
    let min_col = ((body.center_x - r - passable_grid.origin.x) / passable_grid.resolution).floor();
    let min_row = ((body.center_y - r - passable_grid.origin.y) / passable_grid.resolution).floor();
    let max_col = ((body.center_x + r - passable_grid.origin.x) / passable_grid.resolution).floor();
    let max_row = ((body.center_y + r - passable_grid.origin.y) / passable_grid.resolution).floor();
    for row in min_row.max(0.0) as usize..=(max_row.min(passable_grid.height as f64 - 1.0).max(0.0) as usize) {
        for col in min_col.max(0.0) as usize..=(max_col.min(passable_grid.width as f64 - 1.0).max(0.0) as usize) {
            if !passable_grid.is_occupied(col, row) {
                continue;
            }
            let (min_x, min_y, max_x, max_y) = passable_grid.cell_rect(col, row);
            if body.overlaps_rect(min_x, min_y, max_x, max_y) {
                return true;
            }
        }
    }
    false
}

/// Integrate the traversal time of a path under the speed model.
pub fn simulate_traversal(
    path: &Path2D,
    passable_grid: &OccupancyGrid,
    geom: &RobotGeometry,
    speed: &SpeedModel,
) -> f64 {
    let curvature_limit = 1.0 / (2.0 * geom.turn_radius_min);
    let mut time = 0.0;
    for pair in path.waypoints.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let ds = a.position_distance(&b);
        if ds <= 0.0 {
            continue;
        }
        let mut v = speed.v_nominal;
        let curvature = normalize_angle(b.theta - a.theta).abs() / ds;
        if curvature > curvature_limit {
            v *= speed.v_turn_scale;
        }
        if footprint_over_passable(&a, passable_grid, geom) {
            v = v.min(speed.v_over_passable);
        }
        time += ds / v;
    }
    time
}

/// A benchmark planner: a baseline on the merged grid, or its POA variant
/// on the dual grids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BenchPlanner {
    Plain(PlannerId),
    Poa(PlannerId),
}

impl BenchPlanner {
    pub const DEFAULT_SET: [BenchPlanner; 6] = [
        BenchPlanner::Plain(PlannerId::Gvd),
        BenchPlanner::Plain(PlannerId::AStar),
        BenchPlanner::Plain(PlannerId::RrtStar),
        BenchPlanner::Poa(PlannerId::Gvd),
        BenchPlanner::Poa(PlannerId::AStar),
        BenchPlanner::Poa(PlannerId::RrtStar),
    ];

    pub fn name(&self) -> String {
        match self {
            BenchPlanner::Plain(id) => id.name().to_string(),
            BenchPlanner::Poa(id) => format!("{}+poa", id.name()),
        }
    }

    pub fn parse(text: &str) -> Option<BenchPlanner> {
        let text = text.trim();
        if let Some(base) = text.strip_suffix("+poa") {
            PlannerId::parse(base).map(BenchPlanner::Poa)
        } else {
            PlannerId::parse(text).map(BenchPlanner::Plain)
        }
    }

    pub fn base(&self) -> PlannerId {
        match self {
            BenchPlanner::Plain(id) | BenchPlanner::Poa(id) => *id,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub setup: String,
    pub planner: String,
    pub seed: u64,
    pub leg: String,
    pub distance_m: Option<f64>,
    pub time_s: Option<f64>,
}

impl BenchRow {
    pub fn status(&self) -> &'static str {
        if self.distance_m.is_some() {
            "ok"
        } else {
            "FAILURE"
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchSummary {
    pub setup: String,
    pub planner: String,
    pub missions: usize,
    pub successes: usize,
    pub mean_distance_m: Option<f64>,
    pub min_distance_m: Option<f64>,
    pub mean_time_s: Option<f64>,
}

impl BenchSummary {
    pub fn failure_rate(&self) -> f64 {
        if self.missions == 0 {
            0.0
        } else {
            1.0 - self.successes as f64 / self.missions as f64
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BenchResult {
    pub rows: Vec<BenchRow>,
}

impl BenchResult {
    /// Detail CSV, one row per (setup, planner, seed, leg).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("setup,planner,seed,leg,distance_m,time_s,status\n");
        for row in &self.rows {
            let dist = row.distance_m.map_or(String::new(), |d| format!("{d:.3}"));
            let time = row.time_s.map_or(String::new(), |t| format!("{t:.3}"));
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                row.setup,
                row.planner,
                row.seed,
                row.leg,
                dist,
                time,
                row.status()
            );
        }
        out
    }

    /// Mission-level aggregation per (setup, planner), in first-seen order.
    pub fn summaries(&self) -> Vec<BenchSummary> {
        let mut keys: Vec<(String, String)> = Vec::new();
        for row in &self.rows {
            let key = (row.setup.clone(), row.planner.clone());
            if !keys.contains(&key) {
                keys.push(key);
            }
        }
        let mut out = Vec::new();
        for (setup, planner) in keys {
            let mut seeds: Vec<u64> = Vec::new();
            for row in &self.rows {
                if row.setup == setup && row.planner == planner && !seeds.contains(&row.seed) {
                    seeds.push(row.seed);
                }
            }
            let mut distances = Vec::new();
            let mut times = Vec::new();
            let mut successes = 0usize;
            for seed in &seeds {
                let legs: Vec<&BenchRow> = self
                    .rows
                    .iter()
                    .filter(|r| r.setup == setup && r.planner == planner && r.seed == *seed)
                    .collect();
                if !legs.is_empty() && legs.iter().all(|r| r.distance_m.is_some()) {
                    successes += 1;
                    distances.push(legs.iter().map(|r| r.distance_m.unwrap()).sum::<f64>());
                    times.push(legs.iter().map(|r| r.time_s.unwrap()).sum::<f64>());
                }
            }
            let mean = |v: &[f64]| {
                if v.is_empty() {
                    None
                } else {
                    Some(v.iter().sum::<f64>() / v.len() as f64)
                }
            };
            out.push(BenchSummary {
                setup,
                planner,
                missions: seeds.len(),
                successes,
                mean_distance_m: mean(&distances),
                min_distance_m: distances.iter().copied().reduce(f64::min),
                mean_time_s: mean(&times),
            });
        }
        out
    }

    /// Aligned ASCII table of the mission-level aggregates.
    pub fn summary_table(&self) -> String {
        let summaries = self.summaries();
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<10} {:<14} {:>8} {:>12} {:>12} {:>10} {:>9}",
            "setup", "planner", "missions", "mean_dist_m", "min_dist_m", "mean_time_s", "fail_rate"
        );
        for s in summaries {
            let fmt = |v: Option<f64>| v.map_or("FAILURE".to_string(), |x| format!("{x:.2}"));
            let _ = writeln!(
                out,
                "{:<10} {:<14} {:>8} {:>12} {:>12} {:>10} {:>9.2}",
                s.setup,
                s.planner,
                s.missions,
                fmt(s.mean_distance_m),
                fmt(s.min_distance_m),
                fmt(s.mean_time_s),
                s.failure_rate()
            );
        }
        out
    }
}

/// Configuration-space view of an occupancy map at half the source
/// resolution: a fine cell is occupied when its centre lies within
/// `robot_radius` of any occupied source cell. Point planners search this
/// grid the way they would search a navigation costmap.
pub fn cspace_grid(source: &OccupancyGrid, robot_radius: f64) -> OccupancyGrid {
    let fine_res = source.resolution / 2.0;
    let width = source.width * 2;
    let height = source.height * 2;
    let mut out = OccupancyGrid::new(width, height, fine_res, source.origin, CellState::Free);
    let reach = ((robot_radius + source.resolution) / fine_res).ceil() as isize;
    for row in 0..source.height {
        for col in 0..source.width {
            if !source.is_occupied(col, row) {
                continue;
            }
            let (min_x, min_y, max_x, max_y) = source.cell_rect(col, row);
            // Fine cells around this source cell within the radius.
            let c0 = (col * 2) as isize;
            let r0 = (row * 2) as isize;
            for dr in -reach..=reach + 1 {
                for dc in -reach..=reach + 1 {
                    let (fc, fr) = (c0 + dc, r0 + dr);
                    if fc < 0 || fr < 0 || fc as usize >= width || fr as usize >= height {
                        continue;
                    }
                    let (cx, cy) = out.cell_center(fc as usize, fr as usize);
                    let dx = (min_x - cx).max(0.0).max(cx - max_x);
                    let dy = (min_y - cy).max(0.0).max(cy - max_y);
                    if dx.hypot(dy) <= robot_radius {
                        out.set(fc as usize, fr as usize, CellState::Occupied);
                    }
                }
            }
        }
    }
    out
}

/// Grid a planner searches. A* and RRT* are point planners and get the
/// configuration-space view grown by the robot half-width; GVD carries its
/// own clearance model and keeps the raw grid.
pub fn planner_view(source: &OccupancyGrid, base: PlannerId, geom: &RobotGeometry) -> OccupancyGrid {
    match base {
        PlannerId::Gvd => source.clone(),
        PlannerId::AStar | PlannerId::RrtStar => cspace_grid(source, geom.half_width()),
    }
}

/// Plan one mission leg. RRT*-based planners run ten times and keep the
/// shortest successful path.
pub fn plan_leg(
    world: &World,
    merged_grid: &OccupancyGrid,
    planner: &BenchPlanner,
    mission: &Mission,
    world_seed: u64,
) -> Option<Path2D> {
    let geom = RobotGeometry::default();
    let runs = if planner.base() == PlannerId::RrtStar { 10 } else { 1 };
    let search_grid = match planner {
        BenchPlanner::Plain(id) => planner_view(merged_grid, *id, &geom),
        BenchPlanner::Poa(id) => planner_view(&world.unpassable_grid, *id, &geom),
    };
    let mut best: Option<Path2D> = None;
    for run in 0..runs {
        let rrt = RrtParams {
            rng_seed: derive_seed(world_seed, 0xCAFE + run as u64),
            ..world.spec.rrt
        };
        let config = PlannerConfig { rrt, geometry: geom };
        let path = match planner {
            BenchPlanner::Plain(id) => {
                plan_2d(*id, &search_grid, mission.start, mission.goal, &config).ok()
            }
            BenchPlanner::Poa(id) => {
                let params = world.spec.poa.unwrap_or_else(|| PoaParams::for_planner(*id));
                poa_plan(
                    *id,
                    &world.passable_grid,
                    &world.unpassable_grid,
                    mission.start,
                    mission.goal,
                    &config,
                    &params,
                )
                .ok()
                .map(|p| p.path)
            }
        };
        if let Some(path) = path {
            if best.as_ref().is_none_or(|b| path.length() < b.length()) {
                best = Some(path);
            }
        }
    }
    best
}

/// Run every (setup, planner, seed, leg) combination; failures become
/// FAILURE rows, not errors.
pub fn run_benchmark(
    specs: &[ScenarioSpec],
    planners: &[BenchPlanner],
    repeats: usize,
    speed: &SpeedModel,
) -> Result<BenchResult, ScenarioError> {
    let geom = RobotGeometry::default();
    let mut rows = Vec::new();
    for spec in specs {
        for repeat in 0..repeats.max(1) {
            let world_seed = spec.rng_seed.wrapping_add(repeat as u64);
            let seeded = ScenarioSpec {
                rng_seed: world_seed,
                ..spec.clone()
            };
            let world = generate_world(&seeded)?;
            let merged = world.merged_grid();
            for planner in planners {
                for mission in seeded.missions() {
                    let path = plan_leg(&world, &merged, planner, &mission, world_seed);
                    let (distance_m, time_s) = match &path {
                        Some(p) => (
                            Some(p.length()),
                            Some(simulate_traversal(p, &world.passable_grid, &geom, speed)),
                        ),
                        None => (None, None),
                    };
                    rows.push(BenchRow {
                        setup: seeded.name.clone(),
                        planner: planner.name(),
                        seed: world_seed,
                        leg: mission.name.clone(),
                        distance_m,
                        time_s,
                    });
                }
            }
        }
    }
    Ok(BenchResult { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dubins::dubins_shortest;
    use crate::grid::CellState;

    fn geom() -> RobotGeometry {
        RobotGeometry::default()
    }

    #[test]
    fn single_waypoint_has_zero_length_and_time() {
        let path = Path2D::new(vec![Pose2D::new(1.0, 1.0, 0.0)]);
        let grid = OccupancyGrid::new(10, 10, 0.5, Pose2D::new(0.0, 0.0, 0.0), CellState::Free);
        assert_eq!(path_length(&path), 0.0);
        assert_eq!(
            simulate_traversal(&path, &grid, &geom(), &SpeedModel::default()),
            0.0
        );
    }

    #[test]
    fn three_four_five_triangle() {
        let path = Path2D::new(vec![Pose2D::new(0.0, 0.0, 0.0), Pose2D::new(3.0, 4.0, 0.0)]);
        assert!((path_length(&path) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn dense_dubins_semicircle_length() {
        let p = dubins_shortest(
            Pose2D::new(0.0, 0.0, 0.0),
            Pose2D::new(0.0, 2.0, std::f64::consts::PI),
            1.0,
        )
        .unwrap();
        let path = Path2D::new(p.sample(0.01));
        assert!((path_length(&path) - std::f64::consts::PI).abs() < 0.01);
    }

    fn straight_path_10m() -> Path2D {
        Path2D::new(
            (0..=40)
                .map(|i| Pose2D::new(1.0 + 0.25 * i as f64, 5.0, 0.0))
                .collect(),
        )
    }

    #[test]
    fn nominal_speed_over_clean_ground() {
        let grid = OccupancyGrid::new(30, 30, 0.5, Pose2D::new(0.0, 0.0, 0.0), CellState::Free);
        let t = simulate_traversal(&straight_path_10m(), &grid, &geom(), &SpeedModel::default());
        assert!((t - 10.0 / 0.12).abs() < 1e-6, "time {t}");
    }

    #[test]
    fn passable_ground_at_half_speed_doubles_the_time() {
        let grid = OccupancyGrid::new(30, 30, 0.5, Pose2D::new(0.0, 0.0, 0.0), CellState::Occupied);
        let speed = SpeedModel {
            v_nominal: 0.12,
            v_over_passable: 0.06,
            v_turn_scale: 0.8,
        };
        let t = simulate_traversal(&straight_path_10m(), &grid, &geom(), &speed);
        assert!((t - 10.0 / 0.06).abs() < 1e-6, "time {t}");
    }

    #[test]
    fn traversal_never_beats_nominal_speed() {
        let mut grid = OccupancyGrid::new(30, 30, 0.5, Pose2D::new(0.0, 0.0, 0.0), CellState::Free);
        grid.set(12, 10, CellState::Occupied);
        let p = dubins_shortest(
            Pose2D::new(2.0, 5.0, 0.0),
            Pose2D::new(8.0, 6.0, 1.0),
            0.4,
        )
        .unwrap();
        let path = Path2D::new(p.sample(0.25));
        let speed = SpeedModel::default();
        let t = simulate_traversal(&path, &grid, &geom(), &speed);
        assert!(t >= path_length(&path) / speed.v_nominal - 1e-9);
    }

    #[test]
    fn curvature_scales_turn_speed() {
        // Tight semicircle at the minimum turn radius: every segment turns.
        let p = dubins_shortest(
            Pose2D::new(5.0, 5.0, 0.0),
            Pose2D::new(5.0, 5.8, std::f64::consts::PI),
            0.4,
        )
        .unwrap();
        let path = Path2D::new(p.sample(0.1));
        let grid = OccupancyGrid::new(30, 30, 0.5, Pose2D::new(0.0, 0.0, 0.0), CellState::Free);
        let speed = SpeedModel::default();
        let t = simulate_traversal(&path, &grid, &geom(), &speed);
        let expected = path_length(&path) / (speed.v_nominal * speed.v_turn_scale);
        assert!((t - expected).abs() < 1e-6);
    }

    #[test]
    fn bench_planner_names_round_trip() {
        for p in BenchPlanner::DEFAULT_SET {
            assert_eq!(BenchPlanner::parse(&p.name()), Some(p));
        }
        assert_eq!(BenchPlanner::parse("nope"), None);
    }

    #[test]
    fn benchmark_is_deterministic() {
        let mut spec = ScenarioSpec::setup1();
        spec.name = "tiny".into();
        spec.extent_x = 8.0;
        spec.extent_y = 8.0;
        spec.n_passable = 10;
        spec.n_unpassable = 3;
        spec.goals = vec![("A".into(), Pose2D::new(7.0, 7.0, 0.0))];
        let planners = [
            BenchPlanner::Plain(PlannerId::AStar),
            BenchPlanner::Poa(PlannerId::AStar),
        ];
        let speed = SpeedModel::default();
        let a = run_benchmark(&[spec.clone()], &planners, 2, &speed).unwrap();
        let b = run_benchmark(&[spec], &planners, 2, &speed).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_csv(), b.to_csv());
        assert_eq!(a.rows.len(), 4); // 2 seeds x 2 planners x 1 leg
        assert!(a.to_csv().starts_with("setup,planner,seed,leg,distance_m,time_s,status\n"));
    }
}
