//! Passable-obstacle-aware path repair.
//!
//! The repair walks an initial trajectory planned on the unpassable grid
//! only, checking every `n_skip`-th waypoint for wheel collisions with
//! passable cells. Around a hazardous waypoint it clears a window of
//! `n_clear` waypoints on each side, generates laterally shifted alternative
//! waypoints ordered by least deviation, and splices Dubins curves to and
//! from the first alternative whose curves are free of both passable and
//! unpassable collisions. Segments that no alternative can fix are left
//! unchanged and reported; the obstacle is passable by definition, so the
//! simulator slows down over it instead of failing.

use thiserror::Error;

use crate::dubins::{dubins_shortest, DubinsError};
use crate::geometry::{Ellipse2D, Pose2D, RobotGeometry};
use crate::grid::OccupancyGrid;
use crate::planners::{plan_2d, point_free, Path2D, PlanError, PlannerConfig, PlannerId};

#[derive(Debug, Error, PartialEq)]
pub enum PoaError {
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error("dubins failure during splice: {0}")]
    Dubins(#[from] DubinsError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoaParams {
    /// Waypoints skipped between collision checks.
    pub n_skip: usize,
    /// Waypoints cleared before and after a hazardous waypoint.
    pub n_clear: usize,
    pub shift_min: f64,
    pub shift_max: f64,
    pub shift_step: f64,
    pub turn_radius: f64,
}

impl Default for PoaParams {
    fn default() -> Self {
        Self {
            n_skip: 3,
            n_clear: 10,
            shift_min: -0.6,
            shift_max: 0.6,
            shift_step: 0.05,
            turn_radius: 0.4,
        }
    }
}

impl PoaParams {
    /// Stride and window sizes used in the experiments: 5/20 for the A*
    /// variant, 3/10 for GVD and RRT*.
    pub fn for_planner(id: PlannerId) -> Self {
        match id {
            PlannerId::AStar => Self {
                n_skip: 5,
                n_clear: 20,
                ..Self::default()
            },
            PlannerId::RrtStar | PlannerId::Gvd => Self::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Wheel {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CollisionReport {
    pub waypoint_index: usize,
    pub wheel: Wheel,
    pub cell: (usize, usize),
}

/// One accepted repair: the hazardous waypoint, the lateral shift of the
/// chosen alternative, and the spliced window in the output path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepairRecord {
    pub hazard_index: usize,
    pub shift: f64,
    pub alternative: Pose2D,
    pub window_start: usize,
    pub window_end: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepairOutcome {
    pub path: Path2D,
    pub repairs: Vec<RepairRecord>,
    pub residual_collisions: Vec<CollisionReport>,
}

/// The elliptical collision zones that encompass the two wheels, left first.
pub fn wheel_ellipses(pose: &Pose2D, geom: &RobotGeometry) -> (Ellipse2D, Ellipse2D) {
    let (lx, ly) = pose.lateral_vector();
    let half = geom.track_width / 2.0;
    let make = |side: f64| {
        Ellipse2D::new(
            pose.x + side * half * lx,
            pose.y + side * half * ly,
            geom.wheel_ellipse_a,
            geom.wheel_ellipse_b,
            pose.theta,
        )
    };
    (make(1.0), make(-1.0))
}

/// First occupied passable cell overlapping a wheel ellipse, if any. The
/// body corridor is intentionally not checked: passable obstacles pass under
/// the body.
pub fn wheel_collision(
    pose: &Pose2D,
    passable_grid: &OccupancyGrid,
    geom: &RobotGeometry,
) -> Option<(Wheel, (usize, usize))> {
    let (left, right) = wheel_ellipses(pose, geom);
    for (wheel, ellipse) in [(Wheel::Left, left), (Wheel::Right, right)] {
        if let Some(cell) = ellipse_hits_grid(&ellipse, passable_grid) {
            return Some((wheel, cell));
        }
    }
    None
}

fn ellipse_hits_grid(ellipse: &Ellipse2D, grid: &OccupancyGrid) -> Option<(usize, usize)> {
    let r = ellipse.semi_major;
    let min_col = ((ellipse.center_x - r - grid.origin.x) / grid.resolution).floor().max(0.0) as usize;
    let min_row = ((ellipse.center_y - r - grid.origin.y) / grid.resolution).floor().max(0.0) as usize;
    let max_col = ((ellipse.center_x + r - grid.origin.x) / grid.resolution).floor() as isize;
    let max_row = ((ellipse.center_y + r - grid.origin.y) / grid.resolution).floor() as isize;
    if max_col < 0 || max_row < 0 {
        return None;
    }
    let max_col = (max_col as usize).min(grid.width.saturating_sub(1));
    let max_row = (max_row as usize).min(grid.height.saturating_sub(1));
    for row in min_row..=max_row {
        for col in min_col..=max_col {
            if !grid.is_occupied(col, row) {
                continue;
            }
            let (min_x, min_y, max_x, max_y) = grid.cell_rect(col, row);
            if ellipse.overlaps_rect(min_x, min_y, max_x, max_y) {
                return Some((col, row));
            }
        }
    }
    None
}

/// Check one waypoint of a path for a wheel collision with passable cells.
pub fn check_waypoint(
    path: &Path2D,
    index: usize,
    passable_grid: &OccupancyGrid,
    geom: &RobotGeometry,
) -> Option<CollisionReport> {
    let pose = path.waypoints.get(index)?;
    wheel_collision(pose, passable_grid, geom).map(|(wheel, cell)| CollisionReport {
        waypoint_index: index,
        wheel,
        cell,
    })
}

/// Candidate poses for a hazardous waypoint: lateral shifts of every
/// multiple of `shift_step` within `[shift_min, shift_max]`, zero excluded,
/// ordered by |shift| ascending with ties broken toward positive shifts.
pub fn generate_alternatives(path: &Path2D, index: usize, params: &PoaParams) -> Vec<Pose2D> {
    let pose = path.waypoints[index];
    let pos_max = (params.shift_max / params.shift_step + 1e-9).floor() as usize;
    let neg_max = (-params.shift_min / params.shift_step + 1e-9).floor() as usize;
    let mut out = Vec::with_capacity(pos_max + neg_max);
    for k in 1..=pos_max.max(neg_max) {
        let d = k as f64 * params.shift_step;
        if k <= pos_max {
            out.push(pose.shifted_lateral(d));
        }
        if k <= neg_max {
            out.push(pose.shifted_lateral(-d));
        }
    }
    out
}

/// Wheel collisions present in a path, one report per colliding waypoint.
pub fn audit_wheel_collisions(
    path: &Path2D,
    passable_grid: &OccupancyGrid,
    geom: &RobotGeometry,
) -> Vec<CollisionReport> {
    path.waypoints
        .iter()
        .enumerate()
        .filter_map(|(i, pose)| {
            wheel_collision(pose, passable_grid, geom).map(|(wheel, cell)| CollisionReport {
                waypoint_index: i,
                wheel,
                cell,
            })
        })
        .collect()
}

/// A pose along a splice is safe when the robot centre stays on free
/// unpassable cells and neither wheel touches an occupied passable cell.
fn splice_pose_safe(
    pose: &Pose2D,
    passable_grid: &OccupancyGrid,
    unpassable_grid: &OccupancyGrid,
    geom: &RobotGeometry,
) -> bool {
    point_free(unpassable_grid, pose.x, pose.y)
        && wheel_collision(pose, passable_grid, geom).is_none()
}

/// Repair a trajectory so the wheels avoid passable cells where a lateral
/// shift of at most `shift_max` can manage it.
pub fn repair_path(
    path: &Path2D,
    passable_grid: &OccupancyGrid,
    unpassable_grid: &OccupancyGrid,
    geom: &RobotGeometry,
    params: &PoaParams,
) -> Result<RepairOutcome, PoaError> {
    // Splice samples and waypoint spacing follow the world map resolution;
    // the unpassable planning grid may be finer (configuration space).
    let sample_step = passable_grid.resolution / 2.0;
    let mut wps = path.waypoints.clone();
    let mut repairs = Vec::new();
    let mut i = 0usize;
    while i < wps.len() {
        if wheel_collision(&wps[i], passable_grid, geom).is_none() {
            i += params.n_skip.max(1);
            continue;
        }
        // Window anchors, clamped to the path ends and nudged off hazardous
        // waypoints so the splice does not start or end inside a collision.
        let mut a = i.saturating_sub(params.n_clear);
        let mut b = (i + params.n_clear).min(wps.len() - 1);
        while a > 0 && wheel_collision(&wps[a], passable_grid, geom).is_some() {
            a -= 1;
        }
        while b + 1 < wps.len() && wheel_collision(&wps[b], passable_grid, geom).is_some() {
            b += 1;
        }
        if a >= i || b <= i {
            i += params.n_skip.max(1);
            continue;
        }

        let current = Path2D::new(wps.clone());
        let mut accepted = None;
        for alternative in generate_alternatives(&current, i, params) {
            let to_alt = dubins_shortest(wps[a], alternative, params.turn_radius)?;
            let from_alt = dubins_shortest(alternative, wps[b], params.turn_radius)?;
            let in_samples = to_alt.sample(sample_step);
            let out_samples = from_alt.sample(sample_step);
            let safe = in_samples
                .iter()
                .chain(out_samples.iter())
                .all(|p| splice_pose_safe(p, passable_grid, unpassable_grid, geom));
            if safe {
                accepted = Some((alternative, in_samples, out_samples));
                break;
            }
        }

        match accepted {
            Some((alternative, in_samples, out_samples)) => {
                let mut new_wps = Vec::with_capacity(wps.len());
                new_wps.extend_from_slice(&wps[..=a]);
                new_wps.extend_from_slice(&in_samples[1..]);
                if out_samples.len() > 2 {
                    new_wps.extend_from_slice(&out_samples[1..out_samples.len() - 1]);
                }
                let resume = new_wps.len();
                new_wps.extend_from_slice(&wps[b..]);
                let shift = {
                    let hazard = wps[i];
                    let (lx, ly) = hazard.lateral_vector();
                    (alternative.x - hazard.x) * lx + (alternative.y - hazard.y) * ly
                };
                repairs.push(RepairRecord {
                    hazard_index: i,
                    shift,
                    alternative,
                    window_start: a,
                    window_end: resume,
                });
                wps = new_wps;
                // Resume scanning after the spliced window.
                i = resume + params.n_skip.max(1);
            }
            None => {
                // No alternative fits; the segment stays as it is. Whatever
                // collision survives shows up in the final audit below.
                i += params.n_skip.max(1);
            }
        }
    }
    let repaired = Path2D::new(wps);
    let residual_collisions = audit_wheel_collisions(&repaired, passable_grid, geom);
    Ok(RepairOutcome {
        path: repaired,
        repairs,
        residual_collisions,
    })
}

/// A base plan on the unpassable grid plus its POA repair, with provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct PoaPlan {
    pub path: Path2D,
    pub base_planner: PlannerId,
    pub repairs: Vec<RepairRecord>,
    pub residual_collisions: Vec<CollisionReport>,
}

/// Run a baseline planner on the unpassable grid only, then repair the
/// result against the passable grid.
pub fn poa_plan(
    base: PlannerId,
    passable_grid: &OccupancyGrid,
    unpassable_grid: &OccupancyGrid,
    start: Pose2D,
    goal: Pose2D,
    config: &PlannerConfig,
    params: &PoaParams,
) -> Result<PoaPlan, PoaError> {
    let base_path = plan_2d(base, unpassable_grid, start, goal, config)?
        .resampled(passable_grid.resolution / 2.0);
    let outcome = repair_path(&base_path, passable_grid, unpassable_grid, &config.geometry, params)?;
    Ok(PoaPlan {
        path: outcome.path,
        base_planner: base,
        repairs: outcome.repairs,
        residual_collisions: outcome.residual_collisions,
    })
}
