//! Baseline 2D global planners operating on the unpassable occupancy grid.

mod astar;
mod gvd;
mod rrt_star;

pub use astar::plan_astar;
pub use gvd::{obstacle_clearance, plan_gvd};
pub use rrt_star::{plan_rrt_star, RrtParams};

use thiserror::Error;

use crate::geometry::{normalize_angle, Pose2D, RobotGeometry};
use crate::grid::{CellState, OccupancyGrid};

#[derive(Debug, Error, PartialEq)]
pub enum PlanError {
    #[error("no path between the endpoints")]
    NoPath,
    #[error("invalid endpoint: {0}")]
    InvalidEndpoint(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PlannerId {
    AStar,
    RrtStar,
    Gvd,
}

impl PlannerId {
    pub const ALL: [PlannerId; 3] = [PlannerId::AStar, PlannerId::RrtStar, PlannerId::Gvd];

    pub fn name(self) -> &'static str {
        match self {
            PlannerId::AStar => "astar",
            PlannerId::RrtStar => "rrt_star",
            PlannerId::Gvd => "gvd",
        }
    }

    pub fn parse(name: &str) -> Option<PlannerId> {
        match name {
            "astar" | "a*" => Some(PlannerId::AStar),
            "rrt_star" | "rrt*" => Some(PlannerId::RrtStar),
            "gvd" => Some(PlannerId::Gvd),
            _ => None,
        }
    }
}

impl std::fmt::Display for PlannerId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Everything a baseline planner may need beyond the grid and endpoints.
#[derive(Debug, Clone, Copy)]
pub struct PlannerConfig {
    pub rrt: RrtParams,
    pub geometry: RobotGeometry,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            rrt: RrtParams::default(),
            geometry: RobotGeometry::default(),
        }
    }
}

/// Ordered waypoint sequence with headings.
#[derive(Debug, Clone, PartialEq)]
pub struct Path2D {
    pub waypoints: Vec<Pose2D>,
}

impl Path2D {
    pub fn new(waypoints: Vec<Pose2D>) -> Self {
        Self { waypoints }
    }

    pub fn len(&self) -> usize {
        self.waypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waypoints.is_empty()
    }

    pub fn length(&self) -> f64 {
        self.waypoints
            .windows(2)
            .map(|w| w[0].position_distance(&w[1]))
            .sum()
    }

    /// Insert intermediate waypoints so consecutive waypoints are at most
    /// `spacing` apart. Original vertices are preserved.
    pub fn densified(&self, spacing: f64) -> Path2D {
        assert!(spacing > 0.0);
        let mut out = Vec::with_capacity(self.waypoints.len());
        for pair in self.waypoints.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let dist = a.position_distance(&b);
            let steps = (dist / spacing).ceil().max(1.0) as usize;
            for i in 0..steps {
                let t = i as f64 / steps as f64;
                out.push(Pose2D::new(
                    a.x + (b.x - a.x) * t,
                    a.y + (b.y - a.y) * t,
                    a.theta,
                ));
            }
        }
        if let Some(last) = self.waypoints.last() {
            out.push(*last);
        }
        if out.is_empty() {
            out = self.waypoints.clone();
        }
        Path2D::new(out)
    }

    /// Resample the polyline at a uniform arc-length spacing, keeping both
    /// endpoints. Corners are replaced by chords no farther than half the
    /// spacing from the original path.
    pub fn resampled(&self, spacing: f64) -> Path2D {
        assert!(spacing > 0.0);
        if self.waypoints.len() < 2 {
            return self.clone();
        }
        let total = self.length();
        if total <= spacing {
            return Path2D::new(vec![self.waypoints[0], *self.waypoints.last().unwrap()]);
        }
        let n = (total / spacing).round().max(1.0) as usize;
        let step = total / n as f64;
        let mut out = Vec::with_capacity(n + 1);
        out.push(self.waypoints[0]);
        let mut segment = 0usize;
        let mut offset = 0.0; // arc length consumed within the current segment
        for _ in 1..n {
            let mut remaining = step;
            loop {
                let a = self.waypoints[segment];
                let b = self.waypoints[segment + 1];
                let seg_len = a.position_distance(&b);
                if offset + remaining <= seg_len || segment + 2 == self.waypoints.len() {
                    offset += remaining;
                    let t = if seg_len > 0.0 { (offset / seg_len).min(1.0) } else { 0.0 };
                    out.push(Pose2D::new(
                        a.x + (b.x - a.x) * t,
                        a.y + (b.y - a.y) * t,
                        a.theta,
                    ));
                    break;
                }
                remaining -= seg_len - offset;
                offset = 0.0;
                segment += 1;
            }
        }
        out.push(*self.waypoints.last().unwrap());
        Path2D::new(out).with_recomputed_headings()
    }

    /// Recompute headings from waypoint differences: central differences in
    /// the interior, one-sided at the ends.
    pub fn with_recomputed_headings(mut self) -> Path2D {
        let n = self.waypoints.len();
        if n < 2 {
            return self;
        }
        let pts: Vec<(f64, f64)> = self.waypoints.iter().map(|p| (p.x, p.y)).collect();
        for i in 0..n {
            let (prev, next) = match i {
                0 => (0, 1),
                _ if i == n - 1 => (n - 2, n - 1),
                _ => (i - 1, i + 1),
            };
            let dx = pts[next].0 - pts[prev].0;
            let dy = pts[next].1 - pts[prev].1;
            if dx.hypot(dy) > 1e-12 {
                self.waypoints[i].theta = normalize_angle(dy.atan2(dx));
            } else if i > 0 {
                self.waypoints[i].theta = self.waypoints[i - 1].theta;
            }
        }
        self
    }

    pub fn start(&self) -> Option<Pose2D> {
        self.waypoints.first().copied()
    }

    pub fn goal(&self) -> Option<Pose2D> {
        self.waypoints.last().copied()
    }
}

/// A point-robot is allowed on free and unknown cells; the experiment maps
/// are fully observed, so unknown means unobserved ground, not obstacle.
pub fn cell_traversable(grid: &OccupancyGrid, col: usize, row: usize) -> bool {
    grid.get(col, row) != CellState::Occupied
}

/// Safety margin around occupied cells for continuous collision checks, as
/// a fraction of the resolution. Blocks zero-width corner gaps between
/// diagonally adjacent obstacles without meaningfully shrinking corridors.
const POINT_MARGIN_FRACTION: f64 = 0.06;

/// Point-robot collision test in world coordinates. Points outside the grid
/// extent are treated as collisions so paths stay on the map; points within
/// the margin of an occupied cell collide too.
pub fn point_free(grid: &OccupancyGrid, x: f64, y: f64) -> bool {
    let Ok((col, row)) = grid.world_to_cell(x, y) else {
        return false;
    };
    if !cell_traversable(grid, col, row) {
        return false;
    }
    let margin = grid.resolution * POINT_MARGIN_FRACTION;
    for dr in -1i64..=1 {
        for dc in -1i64..=1 {
            if dr == 0 && dc == 0 {
                continue;
            }
            let (nc, nr) = (col as i64 + dc, row as i64 + dr);
            if nc < 0 || nr < 0 || nc as usize >= grid.width || nr as usize >= grid.height {
                continue;
            }
            if cell_traversable(grid, nc as usize, nr as usize) {
                continue;
            }
            let (min_x, min_y, max_x, max_y) = grid.cell_rect(nc as usize, nr as usize);
            let dx = (min_x - x).max(0.0).max(x - max_x);
            let dy = (min_y - y).max(0.0).max(y - max_y);
            if dx.hypot(dy) <= margin {
                return false;
            }
        }
    }
    true
}

/// Segment collision test sampled at a quarter of the grid resolution.
pub fn segment_free(grid: &OccupancyGrid, ax: f64, ay: f64, bx: f64, by: f64) -> bool {
    let dist = (bx - ax).hypot(by - ay);
    let steps = (dist / (grid.resolution / 4.0)).ceil().max(1.0) as usize;
    for i in 0..=steps {
        let t = i as f64 / steps as f64;
        if !point_free(grid, ax + (bx - ax) * t, ay + (by - ay) * t) {
            return false;
        }
    }
    true
}

/// Check that start and goal are on traversable cells.
pub(crate) fn validate_endpoints(
    grid: &OccupancyGrid,
    start: &Pose2D,
    goal: &Pose2D,
) -> Result<((usize, usize), (usize, usize)), PlanError> {
    let start_cell = grid
        .world_to_cell(start.x, start.y)
        .map_err(|e| PlanError::InvalidEndpoint(format!("start: {e}")))?;
    let goal_cell = grid
        .world_to_cell(goal.x, goal.y)
        .map_err(|e| PlanError::InvalidEndpoint(format!("goal: {e}")))?;
    if !cell_traversable(grid, start_cell.0, start_cell.1) {
        return Err(PlanError::InvalidEndpoint("start cell is occupied".into()));
    }
    if !cell_traversable(grid, goal_cell.0, goal_cell.1) {
        return Err(PlanError::InvalidEndpoint("goal cell is occupied".into()));
    }
    Ok((start_cell, goal_cell))
}

/// Dispatch to a baseline planner.
pub fn plan_2d(
    id: PlannerId,
    grid: &OccupancyGrid,
    start: Pose2D,
    goal: Pose2D,
    config: &PlannerConfig,
) -> Result<Path2D, PlanError> {
    match id {
        PlannerId::AStar => plan_astar(grid, start, goal),
        PlannerId::RrtStar => plan_rrt_star(grid, start, goal, &config.rrt),
        PlannerId::Gvd => plan_gvd(grid, start, goal, &config.geometry),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resample_spaces_waypoints_uniformly() {
        let path = Path2D::new(vec![
            Pose2D::new(0.0, 0.0, 0.0),
            Pose2D::new(1.0, 0.0, 0.0),
            Pose2D::new(1.0, 1.5, 0.0),
        ]);
        let resampled = path.resampled(0.25);
        assert_eq!(resampled.start().unwrap().x, 0.0);
        assert_eq!(resampled.goal().unwrap(), Pose2D::new(1.0, 1.5, std::f64::consts::FRAC_PI_2));
        let spacings: Vec<f64> = resampled
            .waypoints
            .windows(2)
            .map(|w| w[0].position_distance(&w[1]))
            .collect();
        for s in &spacings {
            // Uniform except for the corner chord, which is shorter.
            assert!(*s <= 0.2501, "spacing {s}");
        }
        assert!((resampled.length() - path.length()).abs() < 0.05);
    }

    #[test]
    fn densify_respects_spacing_and_preserves_length() {
        let path = Path2D::new(vec![
            Pose2D::new(0.0, 0.0, 0.0),
            Pose2D::new(1.0, 0.0, 0.0),
            Pose2D::new(1.0, 2.0, 0.0),
        ]);
        let dense = path.densified(0.25);
        assert!((dense.length() - path.length()).abs() < 1e-12);
        for w in dense.waypoints.windows(2) {
            assert!(w[0].position_distance(&w[1]) <= 0.25 + 1e-12);
        }
        assert_eq!(dense.start(), path.start());
        assert_eq!(dense.goal(), path.goal());
    }

    #[test]
    fn headings_follow_the_polyline() {
        let path = Path2D::new(vec![
            Pose2D::new(0.0, 0.0, 0.0),
            Pose2D::new(1.0, 0.0, 0.0),
            Pose2D::new(1.0, 1.0, 0.0),
        ])
        .with_recomputed_headings();
        assert!((path.waypoints[0].theta - 0.0).abs() < 1e-12);
        // Central difference at the corner points diagonally.
        assert!((path.waypoints[1].theta - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
        assert!((path.waypoints[2].theta - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }
}
