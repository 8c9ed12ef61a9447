//! Lifting 2D plans onto 3D terrain with roll/pitch feasibility gating.
//!
//! The terrain model preprocesses a labelled cloud (inflation-based
//! relabelling, statistical outlier removal, voxel downsampling) and
//! reconstructs the obstacle-free ground as a thin-plate-spline surface over
//! the free-space points only. Waypoints are projected onto the closest map
//! point, so stone tops count for path height, while attitude estimation
//! samples the reconstructed surface to exclude passable obstacles from the
//! inclination of the robot itself.

mod rbf;

pub use rbf::ThinPlateSpline;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::cloud::{Label, LabelledPoint, LabelledPointCloud};
use crate::geometry::{Pose2D, Pose3D, RobotGeometry};
use crate::grid::{GridError, OccupancyGrid};
use crate::kdtree::KdTree;
use crate::planners::{Path2D, PlannerConfig, PlannerId};
use crate::poa::{poa_plan, PoaError, PoaParams, PoaPlan};

#[derive(Debug, Error)]
pub enum TerrainError {
    #[error("point cloud is empty")]
    EmptyCloud,
    #[error("not enough free-space points to reconstruct a surface")]
    DegenerateSurface,
    #[error("no map point near ({x:.2}, {y:.2})")]
    NoNeighbour { x: f64, y: f64 },
    #[error("no feasible 3D path after {rounds} replanning rounds")]
    NoFeasiblePath { rounds: usize },
    #[error(transparent)]
    Poa(#[from] PoaError),
    #[error(transparent)]
    Grid(#[from] GridError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TerrainParams {
    /// Disk radius for obstacle inflation before relabelling.
    pub inflate_radius: f64,
    /// Voxel edge for downsampling.
    pub voxel: f64,
    /// Neighbour count for statistical outlier removal.
    pub outlier_k: usize,
    /// Multiplier on the global distance standard deviation.
    pub outlier_stddev: f64,
    /// Grid pitch for decimating the surface-fit centres.
    pub rbf_decimation: f64,
    /// Hard cap on the number of surface-fit centres.
    pub rbf_max_centers: usize,
    pub rbf_smoothing: f64,
}

impl Default for TerrainParams {
    fn default() -> Self {
        let geom = RobotGeometry::default();
        Self {
            inflate_radius: geom.half_width(),
            voxel: 0.10,
            outlier_k: 8,
            outlier_stddev: 1.0,
            rbf_decimation: 0.25,
            rbf_max_centers: 4000,
            rbf_smoothing: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityLimits {
    pub gamma_max: f64,
    pub phi_max: f64,
}

impl Default for StabilityLimits {
    fn default() -> Self {
        Self {
            gamma_max: 0.175,
            phi_max: 0.175,
        }
    }
}

/// 3D waypoint sequence; `pitch`/`roll` carry the per-waypoint attitude
/// estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct Path3D {
    pub waypoints: Vec<Pose3D>,
}

impl Path3D {
    pub fn length(&self) -> f64 {
        self.waypoints
            .windows(2)
            .map(|w| {
                let dx = w[1].x - w[0].x;
                let dy = w[1].y - w[0].y;
                let dz = w[1].z - w[0].z;
                (dx * dx + dy * dy + dz * dz).sqrt()
            })
            .sum()
    }

    pub fn max_abs_roll(&self) -> f64 {
        self.waypoints.iter().map(|p| p.roll.abs()).fold(0.0, f64::max)
    }

    pub fn max_abs_pitch(&self) -> f64 {
        self.waypoints.iter().map(|p| p.pitch.abs()).fold(0.0, f64::max)
    }
}

/// Preprocessed terrain: relabelled downsampled cloud, a 2D spatial index
/// over it, and the reconstructed free-space surface.
#[derive(Debug, Clone)]
pub struct TerrainModel {
    pub cloud: LabelledPointCloud,
    pub surface: ThinPlateSpline,
    pub voxel: f64,
    index_xy: KdTree<2>,
}

impl TerrainModel {
    /// Nearest cloud point in the (x, y) metric.
    pub fn nearest_xy(&self, x: f64, y: f64) -> Option<(&LabelledPoint, f64)> {
        self.index_xy
            .nearest(&[x, y])
            .map(|(idx, d_sq)| (&self.cloud.points[idx], d_sq.sqrt()))
    }

    pub fn surface_height(&self, x: f64, y: f64) -> f64 {
        self.surface.height(x, y)
    }
}

/// Build a terrain model from a raw labelled cloud and the two grids.
pub fn preprocess_cloud(
    cloud: &LabelledPointCloud,
    passable_grid: &OccupancyGrid,
    unpassable_grid: &OccupancyGrid,
    params: &TerrainParams,
) -> Result<TerrainModel, TerrainError> {
    if cloud.is_empty() {
        return Err(TerrainError::EmptyCloud);
    }
    let inflated_passable = passable_grid.inflated(params.inflate_radius);
    let inflated_unpassable = unpassable_grid.inflated(params.inflate_radius);

    // Relabel by the inflated grids; unpassable wins over passable.
    let relabelled: Vec<LabelledPoint> = cloud
        .iter()
        .map(|p| {
            let label = match inflated_unpassable.world_to_cell(p.x, p.y) {
                Ok((col, row)) if inflated_unpassable.is_occupied(col, row) => {
                    Label::UnpassableObstacle
                }
                Ok((col, row)) if inflated_passable.is_occupied(col, row) => {
                    Label::PassableObstacle
                }
                Ok(_) => Label::FreeSpace,
                Err(_) => p.label,
            };
            LabelledPoint { label, ..*p }
        })
        .collect();

    // Statistical outlier removal on mean k-nearest-neighbour distances.
    let coords: Vec<[f64; 3]> = relabelled.iter().map(|p| [p.x, p.y, p.z]).collect();
    let tree = KdTree::build(coords.clone());
    let mut mean_dists = Vec::with_capacity(relabelled.len());
    for point in &coords {
        let neighbors = tree.k_nearest(point, params.outlier_k + 1);
        // Skip the self-hit at distance zero.
        let sum: f64 = neighbors.iter().skip(1).map(|(_, d)| d.sqrt()).sum();
        let count = neighbors.len().saturating_sub(1).max(1);
        mean_dists.push(sum / count as f64);
    }
    let global_mean = mean_dists.iter().sum::<f64>() / mean_dists.len() as f64;
    let variance = mean_dists
        .iter()
        .map(|d| (d - global_mean).powi(2))
        .sum::<f64>()
        / mean_dists.len() as f64;
    let cutoff = global_mean + params.outlier_stddev * variance.sqrt();
    let inliers: Vec<LabelledPoint> = relabelled
        .iter()
        .zip(&mean_dists)
        .filter(|(_, d)| **d <= cutoff)
        .map(|(p, _)| *p)
        .collect();
    if inliers.is_empty() {
        return Err(TerrainError::EmptyCloud);
    }

    // Voxel-grid downsample: centroid position, majority label.
    let mut voxels: BTreeMap<(i64, i64, i64), Vec<&LabelledPoint>> = BTreeMap::new();
    for p in &inliers {
        let key = (
            (p.x / params.voxel).floor() as i64,
            (p.y / params.voxel).floor() as i64,
            (p.z / params.voxel).floor() as i64,
        );
        voxels.entry(key).or_default().push(p);
    }
    let mut downsampled = LabelledPointCloud::new();
    for bucket in voxels.values() {
        let n = bucket.len() as f64;
        let (mut x, mut y, mut z) = (0.0, 0.0, 0.0);
        let mut label_counts = [0usize; 3];
        for p in bucket {
            x += p.x;
            y += p.y;
            z += p.z;
            label_counts[p.label.code() as usize] += 1;
        }
        let majority = (0..3)
            .max_by_key(|&i| (label_counts[i], std::cmp::Reverse(i)))
            .unwrap();
        let label = Label::from_code(majority as u8).unwrap();
        let mut instance_counts: BTreeMap<u32, usize> = BTreeMap::new();
        for p in bucket {
            if p.label == label {
                if let Some(id) = p.instance_id {
                    *instance_counts.entry(id).or_default() += 1;
                }
            }
        }
        let instance_id = instance_counts
            .iter()
            .max_by_key(|(id, count)| (**count, std::cmp::Reverse(**id)))
            .map(|(id, _)| *id);
        downsampled.push(LabelledPoint {
            x: x / n,
            y: y / n,
            z: z / n,
            label,
            instance_id,
        });
    }

    let free: Vec<[f64; 3]> = downsampled
        .iter()
        .filter(|p| p.label == Label::FreeSpace)
        .map(|p| [p.x, p.y, p.z])
        .collect();
    if free.len() < 10 {
        return Err(TerrainError::DegenerateSurface);
    }

    // Decimate the free points on a coarse grid and cap the centre count.
    let mut cells: BTreeMap<(i64, i64), ([f64; 3], usize)> = BTreeMap::new();
    for p in &free {
        let key = (
            (p[0] / params.rbf_decimation).floor() as i64,
            (p[1] / params.rbf_decimation).floor() as i64,
        );
        let entry = cells.entry(key).or_insert(([0.0; 3], 0));
        for d in 0..3 {
            entry.0[d] += p[d];
        }
        entry.1 += 1;
    }
    let mut centers: Vec<[f64; 3]> = cells
        .values()
        .map(|(sum, count)| [sum[0] / *count as f64, sum[1] / *count as f64, sum[2] / *count as f64])
        .collect();
    if centers.len() > params.rbf_max_centers {
        let stride = (centers.len() + params.rbf_max_centers - 1) / params.rbf_max_centers;
        centers = centers.into_iter().step_by(stride).collect();
    }
    let surface = ThinPlateSpline::fit(&centers, params.rbf_smoothing)
        .ok_or(TerrainError::DegenerateSurface)?;

    let index_xy = KdTree::build(downsampled.iter().map(|p| [p.x, p.y]).collect());
    Ok(TerrainModel {
        cloud: downsampled,
        surface,
        voxel: params.voxel,
        index_xy,
    })
}

/// Vertically project each 2D waypoint onto the closest map point.
pub fn project_path(path: &Path2D, model: &TerrainModel) -> Result<Path3D, TerrainError> {
    let mut waypoints = Vec::with_capacity(path.len());
    for p in &path.waypoints {
        let (nearest, dist) = model
            .nearest_xy(p.x, p.y)
            .ok_or(TerrainError::EmptyCloud)?;
        if dist > 3.0 * model.voxel {
            return Err(TerrainError::NoNeighbour { x: p.x, y: p.y });
        }
        waypoints.push(Pose3D::new(p.x, p.y, nearest.z, p.theta, 0.0, 0.0));
    }
    Ok(Path3D { waypoints })
}

/// Roll and pitch of the robot standing on the reconstructed surface at a
/// waypoint: roll from the height difference across the track, pitch from
/// fore/aft contact points along the heading.
pub fn estimate_attitude(
    waypoint: &Pose3D,
    model: &TerrainModel,
    geom: &RobotGeometry,
) -> (f64, f64) {
    let (dir_x, dir_y) = (waypoint.yaw.cos(), waypoint.yaw.sin());
    let (lat_x, lat_y) = (-waypoint.yaw.sin(), waypoint.yaw.cos());
    let half_track = geom.track_width / 2.0;
    let half_base = geom.wheel_base_contact / 2.0;
    let h_left = model.surface_height(waypoint.x + lat_x * half_track, waypoint.y + lat_y * half_track);
    let h_right = model.surface_height(waypoint.x - lat_x * half_track, waypoint.y - lat_y * half_track);
    let h_fwd = model.surface_height(waypoint.x + dir_x * half_base, waypoint.y + dir_y * half_base);
    let h_back = model.surface_height(waypoint.x - dir_x * half_base, waypoint.y - dir_y * half_base);
    let roll = (h_left - h_right).atan2(geom.track_width);
    let pitch = (h_fwd - h_back).atan2(geom.wheel_base_contact);
    (roll, pitch)
}

/// Fill per-waypoint attitude estimates.
pub fn with_attitudes(mut path: Path3D, model: &TerrainModel, geom: &RobotGeometry) -> Path3D {
    for wp in &mut path.waypoints {
        let (roll, pitch) = estimate_attitude(wp, model, geom);
        wp.roll = roll;
        wp.pitch = pitch;
    }
    path
}

/// Project a 2D path and estimate attitudes in one step.
pub fn lift_path(
    path: &Path2D,
    model: &TerrainModel,
    geom: &RobotGeometry,
) -> Result<Path3D, TerrainError> {
    Ok(with_attitudes(project_path(path, model)?, model, geom))
}

/// Indices of waypoints whose attitude strictly exceeds a limit.
pub fn check_feasibility(path: &Path3D, limits: &StabilityLimits) -> Vec<usize> {
    path.waypoints
        .iter()
        .enumerate()
        .filter(|(_, p)| p.roll.abs() > limits.gamma_max || p.pitch.abs() > limits.phi_max)
        .map(|(i, _)| i)
        .collect()
}

/// Block each unstable waypoint's cell and its eight neighbours in the
/// unpassable grid; the neighbourhood clamps at the grid border.
pub fn block_unstable(grid: &OccupancyGrid, unstable: &[Pose3D]) -> OccupancyGrid {
    let mut out = grid.clone();
    for wp in unstable {
        let Ok((col, row)) = grid.world_to_cell(wp.x, wp.y) else {
            continue;
        };
        for dr in -1i64..=1 {
            for dc in -1i64..=1 {
                let c = col as i64 + dc;
                let r = row as i64 + dr;
                if c >= 0 && r >= 0 && (c as usize) < grid.width && (r as usize) < grid.height {
                    out.set(c as usize, r as usize, crate::grid::CellState::Occupied);
                }
            }
        }
    }
    out
}

/// A feasible 3D plan with its provenance.
#[derive(Debug, Clone)]
pub struct Plan3D {
    pub path: Path3D,
    /// Replanning rounds used (1 = first 2D plan was already feasible).
    pub rounds: usize,
    /// The accepted round's 2D plan.
    pub plan2d: PoaPlan,
    /// Unpassable grid including every blocked cell.
    pub blocked_grid: OccupancyGrid,
}

/// Iterate 2D planning, projection, and attitude gating until every
/// waypoint is stable, blocking unstable cells between rounds.
#[allow(clippy::too_many_arguments)]
pub fn plan_3d(
    base: PlannerId,
    passable_grid: &OccupancyGrid,
    unpassable_grid: &OccupancyGrid,
    model: &TerrainModel,
    start: Pose2D,
    goal: Pose2D,
    config: &PlannerConfig,
    poa_params: &PoaParams,
    limits: &StabilityLimits,
    max_rounds: usize,
) -> Result<Plan3D, TerrainError> {
    let mut working = unpassable_grid.clone();
    for round in 1..=max_rounds.max(1) {
        let plan = poa_plan(base, passable_grid, &working, start, goal, config, poa_params)?;
        let lifted = lift_path(&plan.path, model, &config.geometry)?;
        let unstable = check_feasibility(&lifted, limits);
        if unstable.is_empty() {
            return Ok(Plan3D {
                path: lifted,
                rounds: round,
                plan2d: plan,
                blocked_grid: working,
            });
        }
        let poses: Vec<Pose3D> = unstable.iter().map(|&i| lifted.waypoints[i]).collect();
        working = block_unstable(&working, &poses);
    }
    Err(TerrainError::NoFeasiblePath { rounds: max_rounds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::CellState;
    use std::f64::consts::FRAC_PI_2;

    fn flat_grids(n: usize, res: f64) -> (OccupancyGrid, OccupancyGrid) {
        let g = OccupancyGrid::new(n, n, res, Pose2D::new(0.0, 0.0, 0.0), CellState::Free);
        (g.clone(), g)
    }

    fn lattice_cloud_masked(
        extent: f64,
        spacing: f64,
        height: impl Fn(f64, f64) -> f64,
        skip: impl Fn(f64, f64) -> bool,
    ) -> LabelledPointCloud {
        let n = (extent / spacing) as usize;
        let mut cloud = LabelledPointCloud::new();
        for i in 0..=n {
            for j in 0..=n {
                let x = i as f64 * spacing;
                let y = j as f64 * spacing;
                if skip(x, y) {
                    continue;
                }
                cloud.push(LabelledPoint {
                    x,
                    y,
                    z: height(x, y),
                    label: Label::FreeSpace,
                    instance_id: None,
                });
            }
        }
        cloud
    }

    fn lattice_cloud(extent: f64, spacing: f64, height: impl Fn(f64, f64) -> f64) -> LabelledPointCloud {
        lattice_cloud_masked(extent, spacing, height, |_, _| false)
    }

    fn relaxed_params() -> TerrainParams {
        // Wide outlier net: unit fixtures are clean lattices where border
        // points would otherwise be trimmed.
        TerrainParams {
            outlier_stddev: 5.0,
            rbf_decimation: 0.4,
            ..TerrainParams::default()
        }
    }

    fn model_for(height: impl Fn(f64, f64) -> f64) -> TerrainModel {
        let cloud = lattice_cloud(6.0, 0.2, height);
        let (passable, unpassable) = flat_grids(12, 0.5);
        preprocess_cloud(&cloud, &passable, &unpassable, &relaxed_params()).unwrap()
    }

    fn wide_model_for(height: impl Fn(f64, f64) -> f64) -> TerrainModel {
        let cloud = lattice_cloud(10.0, 0.2, height);
        let (passable, unpassable) = flat_grids(20, 0.5);
        preprocess_cloud(&cloud, &passable, &unpassable, &relaxed_params()).unwrap()
    }

    #[test]
    fn planar_cloud_reconstructs_flat_surface() {
        let model = model_for(|_, _| 0.0);
        for (x, y) in [(1.0, 1.0), (3.3, 2.2), (5.0, 5.0)] {
            assert!(model.surface_height(x, y).abs() < 1e-6);
        }
    }

    #[test]
    fn lone_high_point_is_removed_as_outlier() {
        let mut cloud = lattice_cloud(4.0, 0.2, |_, _| 0.0);
        cloud.push(LabelledPoint {
            x: 2.0,
            y: 2.0,
            z: 5.0,
            label: Label::FreeSpace,
            instance_id: None,
        });
        let (passable, unpassable) = flat_grids(8, 0.5);
        let params = TerrainParams::default();
        let model = preprocess_cloud(&cloud, &passable, &unpassable, &params).unwrap();
        assert!(model.cloud.iter().all(|p| p.z < 1.0), "outlier survived");
    }

    #[test]
    fn downsample_respects_voxel_pigeonhole() {
        let cloud = lattice_cloud(4.0, 0.05, |_, _| 0.0);
        let (passable, unpassable) = flat_grids(8, 0.5);
        let model = preprocess_cloud(&cloud, &passable, &unpassable, &relaxed_params()).unwrap();
        let voxels = (4.0f64 / 0.1).ceil() as usize + 1;
        assert!(model.cloud.len() <= voxels * voxels);
        assert!(model.cloud.len() >= (voxels - 2) * (voxels - 2) / 2);
    }

    #[test]
    fn relabelling_follows_inflated_grids() {
        let (mut passable, unpassable) = flat_grids(8, 0.5);
        passable.set(4, 4, CellState::Occupied); // x, y in [2.0, 2.5]
        let mut cloud = lattice_cloud(4.0, 0.2, |_, _| 0.0);
        cloud.push(LabelledPoint {
            x: 2.25,
            y: 2.25,
            z: 0.1,
            label: Label::FreeSpace,
            instance_id: None,
        });
        let model = preprocess_cloud(&cloud, &passable, &unpassable, &relaxed_params()).unwrap();
        // Points within the inflation radius of the stone cell turn passable.
        let (nearest, _) = model.nearest_xy(2.25, 2.25).unwrap();
        assert_eq!(nearest.label, Label::PassableObstacle);
    }

    #[test]
    fn project_flat_path_is_all_zero() {
        let model = model_for(|_, _| 0.0);
        let path = Path2D::new(vec![
            Pose2D::new(1.0, 1.0, 0.0),
            Pose2D::new(2.0, 1.0, 0.0),
            Pose2D::new(3.0, 1.0, 0.0),
        ]);
        let lifted = project_path(&path, &model).unwrap();
        for wp in &lifted.waypoints {
            assert!(wp.z.abs() < 1e-9);
        }
    }

    #[test]
    fn projection_snaps_to_stone_tops() {
        // The stone occludes the ground point underneath it.
        let mut cloud = lattice_cloud_masked(4.0, 0.2, |_, _| 0.0, |x, y| {
            (x - 2.0).abs() < 0.05 && (y - 2.0).abs() < 0.05
        });
        cloud.push(LabelledPoint {
            x: 2.0,
            y: 2.0,
            z: 0.2,
            label: Label::PassableObstacle,
            instance_id: Some(1),
        });
        let (passable, unpassable) = flat_grids(8, 0.5);
        let model = preprocess_cloud(&cloud, &passable, &unpassable, &relaxed_params()).unwrap();
        let path = Path2D::new(vec![Pose2D::new(2.0, 2.0, 0.0)]);
        let lifted = project_path(&path, &model).unwrap();
        assert!((lifted.waypoints[0].z - 0.2).abs() < 0.05);
    }

    #[test]
    fn projection_outside_hull_fails() {
        let model = model_for(|_, _| 0.0);
        let path = Path2D::new(vec![Pose2D::new(7.5, 3.0, 0.0)]);
        match project_path(&path, &model) {
            Err(TerrainError::NoNeighbour { .. }) => {}
            other => panic!("expected NoNeighbour, got {other:?}"),
        }
    }

    #[test]
    fn attitude_on_inclined_plane() {
        let slope = 0.1f64.tan();
        let model = model_for(move |x, _| x * slope);
        let geom = RobotGeometry::default();
        // Heading along +x: pure pitch.
        let (roll, pitch) = estimate_attitude(&Pose3D::new(3.0, 3.0, 0.0, 0.0, 0.0, 0.0), &model, &geom);
        assert!((pitch - 0.1).abs() < 0.005, "pitch {pitch}");
        assert!(roll.abs() < 0.005, "roll {roll}");
        // Heading along +y: the same plane shows up as roll.
        let (roll, pitch) =
            estimate_attitude(&Pose3D::new(3.0, 3.0, 0.0, FRAC_PI_2, 0.0, 0.0), &model, &geom);
        assert!((roll.abs() - 0.1).abs() < 0.005, "roll {roll}");
        assert!(pitch.abs() < 0.005, "pitch {pitch}");
    }

    #[test]
    fn feasibility_uses_strict_inequality() {
        let limits = StabilityLimits::default();
        let mk = |roll: f64, pitch: f64| Pose3D::new(0.0, 0.0, 0.0, 0.0, pitch, roll);
        let path = Path3D {
            waypoints: vec![
                mk(0.0, 0.0),
                mk(0.0, 0.243),
                mk(0.175, 0.0),
                mk(-0.2, 0.0),
            ],
        };
        assert_eq!(check_feasibility(&path, &limits), vec![1, 3]);
    }

    #[test]
    fn blocking_marks_nine_cells_inside_and_four_in_corners() {
        let (_, grid) = flat_grids(10, 0.5);
        let interior = block_unstable(&grid, &[Pose3D::new(2.25, 2.25, 0.0, 0.0, 0.0, 0.0)]);
        assert_eq!(interior.count(CellState::Occupied), 9);
        let corner = block_unstable(&grid, &[Pose3D::new(0.1, 0.1, 0.0, 0.0, 0.0, 0.0)]);
        assert_eq!(corner.count(CellState::Occupied), 4);
        let untouched = block_unstable(&grid, &[]);
        assert_eq!(untouched.count(CellState::Occupied), 0);
    }

    #[test]
    fn plan_3d_on_flat_terrain_returns_first_round() {
        let model = model_for(|_, _| 0.0);
        let (passable, unpassable) = flat_grids(12, 0.5);
        let plan = plan_3d(
            PlannerId::AStar,
            &passable,
            &unpassable,
            &model,
            Pose2D::new(1.0, 1.0, 0.0),
            Pose2D::new(5.0, 5.0, 0.0),
            &PlannerConfig::default(),
            &PoaParams::default(),
            &StabilityLimits::default(),
            25,
        )
        .unwrap();
        assert_eq!(plan.rounds, 1);
        assert_eq!(plan.path.waypoints.len(), plan.plan2d.path.len());
        assert!(plan.path.max_abs_pitch() < 1e-6);
    }

    #[test]
    fn plan_3d_routes_around_a_steep_hill() {
        // Steep bump centred on the straight corridor, with room to detour.
        let bump = |x: f64, y: f64| {
            let r_sq = (x - 5.0f64).powi(2) + (y - 5.0f64).powi(2);
            0.9 * (-r_sq / (2.0 * 0.8 * 0.8)).exp()
        };
        let model = wide_model_for(bump);
        let (passable, unpassable) = flat_grids(20, 0.5);
        let limits = StabilityLimits::default();
        let geom = RobotGeometry::default();
        let start = Pose2D::new(0.75, 5.0, 0.0);
        let goal = Pose2D::new(9.25, 5.0, 0.0);
        let config = PlannerConfig::default();
        // The raw 2D plan crosses the bump and must exceed the limits.
        let flat_plan = poa_plan(
            PlannerId::AStar,
            &passable,
            &unpassable,
            start,
            goal,
            &config,
            &PoaParams::default(),
        )
        .unwrap();
        let lifted = lift_path(&flat_plan.path, &model, &geom).unwrap();
        assert!(lifted.max_abs_pitch() > limits.phi_max);

        let plan = plan_3d(
            PlannerId::AStar,
            &passable,
            &unpassable,
            &model,
            start,
            goal,
            &config,
            &PoaParams::default(),
            &limits,
            25,
        )
        .unwrap();
        assert!(plan.rounds > 1);
        // Hard audit, independent of the planner's bookkeeping.
        let audited = with_attitudes(plan.path.clone(), &model, &geom);
        for wp in &audited.waypoints {
            assert!(wp.roll.abs() <= limits.gamma_max + 1e-12);
            assert!(wp.pitch.abs() <= limits.phi_max + 1e-12);
        }
        // Blocking only ever adds obstacles.
        assert!(plan.blocked_grid.count(CellState::Occupied) > 0);
    }

    #[test]
    fn fully_ringed_goal_is_infeasible() {
        // A steep circular rampart around the goal blocks every approach.
        let ring = |x: f64, y: f64| {
            let r = ((x - 3.0f64).powi(2) + (y - 3.0f64).powi(2)).sqrt();
            1.2 * (-(r - 1.5f64).powi(2) / (2.0 * 0.3 * 0.3)).exp()
        };
        let model = model_for(ring);
        let (passable, unpassable) = flat_grids(12, 0.5);
        let res = plan_3d(
            PlannerId::AStar,
            &passable,
            &unpassable,
            &model,
            Pose2D::new(0.75, 0.75, 0.0),
            Pose2D::new(3.0, 3.0, 0.0),
            &PlannerConfig::default(),
            &PoaParams::default(),
            &StabilityLimits::default(),
            25,
        );
        match res {
            Err(TerrainError::NoFeasiblePath { .. }) | Err(TerrainError::Poa(_)) => {}
            other => panic!("expected infeasibility, got {other:?}"),
        }
    }
}
