//! Graph search over a Generalized Voronoi Diagram.
//!
//! A brushfire transform propagates the nearest occupied cell (the site) to
//! every free cell; ridge cells are those whose neighbourhood sees two
//! well-separated sites. Ridges closer to an obstacle than the robot's
//! half-width are pruned, which is exactly what makes this planner fail in
//! densely cluttered maps.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::geometry::{Pose2D, RobotGeometry};
use crate::grid::OccupancyGrid;

use super::astar::astar_cells;
use super::{segment_free, validate_endpoints, Path2D, PlanError};

const NEIGHBORS: [(isize, isize); 8] = [
    (1, 0),
    (-1, 0),
    (0, 1),
    (0, -1),
    (1, 1),
    (1, -1),
    (-1, 1),
    (-1, -1),
];

struct Brushfire {
    /// Distance from each cell centre to its nearest site centre, in cell
    /// units.
    dist: Vec<f64>,
    /// Nearest site per cell: an occupied cell or a virtual boundary cell
    /// just outside the grid (the map border acts as an obstacle).
    site: Vec<(isize, isize)>,
}

const NO_SITE: (isize, isize) = (isize::MIN, isize::MIN);

fn brushfire(grid: &OccupancyGrid) -> Brushfire {
    let (w, h) = (grid.width, grid.height);
    let mut dist = vec![f64::INFINITY; w * h];
    let mut site = vec![NO_SITE; w * h];
    let mut heap: BinaryHeap<(Reverse<u64>, usize)> = BinaryHeap::new();
    let seed = |idx: usize, d: f64, s: (isize, isize), dist: &mut Vec<f64>, site: &mut Vec<(isize, isize)>, heap: &mut BinaryHeap<(Reverse<u64>, usize)>| {
        if d < dist[idx] - 1e-12 {
            dist[idx] = d;
            site[idx] = s;
            heap.push((Reverse(d.to_bits()), idx));
        }
    };
    for row in 0..h {
        for col in 0..w {
            let idx = row * w + col;
            if grid.is_occupied(col, row) {
                seed(idx, 0.0, (col as isize, row as isize), &mut dist, &mut site, &mut heap);
                continue;
            }
            // Virtual boundary sites one cell outside the grid.
            if col == 0 {
                seed(idx, 1.0, (-1, row as isize), &mut dist, &mut site, &mut heap);
            }
            if col == w - 1 {
                seed(idx, 1.0, (w as isize, row as isize), &mut dist, &mut site, &mut heap);
            }
            if row == 0 {
                seed(idx, 1.0, (col as isize, -1), &mut dist, &mut site, &mut heap);
            }
            if row == h - 1 {
                seed(idx, 1.0, (col as isize, h as isize), &mut dist, &mut site, &mut heap);
            }
        }
    }
    while let Some((Reverse(dbits), idx)) = heap.pop() {
        let d = f64::from_bits(dbits);
        if d > dist[idx] {
            continue;
        }
        let (col, row) = (idx % w, idx / w);
        let s = site[idx];
        for (dc, dr) in NEIGHBORS {
            let nc = col as isize + dc;
            let nr = row as isize + dr;
            if nc < 0 || nr < 0 || nc as usize >= w || nr as usize >= h {
                continue;
            }
            let nidx = nr as usize * w + nc as usize;
            let nd = (nc as f64 - s.0 as f64).hypot(nr as f64 - s.1 as f64);
            if nd < dist[nidx] - 1e-12 {
                dist[nidx] = nd;
                site[nidx] = s;
                heap.push((Reverse(nd.to_bits()), nidx));
            }
        }
    }
    Brushfire { dist, site }
}

/// Extract ridge cells: free cells whose 8-neighbourhood contains a cell
/// governed by a different, non-adjacent site, with enough clearance for the
/// robot. Clearance is measured to the obstacle cell boundary.
fn ridge_cells(grid: &OccupancyGrid, field: &Brushfire, clearance: f64) -> Vec<bool> {
    let (w, h) = (grid.width, grid.height);
    let mut ridge = vec![false; w * h];
    for row in 0..h {
        for col in 0..w {
            let idx = row * w + col;
            if grid.is_occupied(col, row) || !field.dist[idx].is_finite() {
                continue;
            }
            let boundary_dist = field.dist[idx] * grid.resolution - grid.resolution / 2.0;
            if boundary_dist < clearance {
                continue;
            }
            let s = field.site[idx];
            let mut is_ridge = false;
            for (dc, dr) in NEIGHBORS {
                let nc = col as isize + dc;
                let nr = row as isize + dr;
                if nc < 0 || nr < 0 || nc as usize >= w || nr as usize >= h {
                    continue;
                }
                let nidx = nr as usize * w + nc as usize;
                if grid.is_occupied(nc as usize, nr as usize) {
                    continue;
                }
                let ns = field.site[nidx];
                if ns == NO_SITE {
                    continue;
                }
                let sep = (ns.0 - s.0).abs().max((ns.1 - s.1).abs());
                if sep > 1 {
                    is_ridge = true;
                    break;
                }
            }
            ridge[idx] = is_ridge;
        }
    }
    ridge
}

/// Label 8-connected ridge components so endpoint connectors can be matched
/// to the same component.
fn components(w: usize, h: usize, ridge: &[bool]) -> Vec<u32> {
    let mut comp = vec![u32::MAX; w * h];
    let mut next = 0u32;
    for start in 0..w * h {
        if !ridge[start] || comp[start] != u32::MAX {
            continue;
        }
        let mut stack = vec![start];
        comp[start] = next;
        while let Some(idx) = stack.pop() {
            let (col, row) = (idx % w, idx / w);
            for (dc, dr) in NEIGHBORS {
                let nc = col as isize + dc;
                let nr = row as isize + dr;
                if nc < 0 || nr < 0 || nc as usize >= w || nr as usize >= h {
                    continue;
                }
                let nidx = nr as usize * w + nc as usize;
                if ridge[nidx] && comp[nidx] == u32::MAX {
                    comp[nidx] = next;
                    stack.push(nidx);
                }
            }
        }
        next += 1;
    }
    comp
}

/// Ridge cells reachable from a world point by a straight collision-free
/// segment, ordered by distance.
fn connectable_cells(
    grid: &OccupancyGrid,
    ridge: &[bool],
    x: f64,
    y: f64,
    limit: usize,
) -> Vec<(usize, f64)> {
    let w = grid.width;
    let mut candidates: Vec<(usize, f64)> = ridge
        .iter()
        .enumerate()
        .filter(|(_, &r)| r)
        .map(|(idx, _)| {
            let (cx, cy) = grid.cell_center(idx % w, idx / w);
            (idx, (cx - x).hypot(cy - y))
        })
        .collect();
    candidates.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    candidates
        .into_iter()
        .filter(|&(idx, _)| {
            let (cx, cy) = grid.cell_center(idx % w, idx / w);
            segment_free(grid, x, y, cx, cy)
        })
        .take(limit)
        .collect()
}

/// Plan along the clearance-pruned GVD. Fails when the ridge graph is
/// disconnected between the endpoints or when the clearance filter leaves no
/// reachable ridge.
pub fn plan_gvd(
    grid: &OccupancyGrid,
    start: Pose2D,
    goal: Pose2D,
    geometry: &RobotGeometry,
) -> Result<Path2D, PlanError> {
    validate_endpoints(grid, &start, &goal)?;
    let field = brushfire(grid);
    let ridge = ridge_cells(grid, &field, geometry.half_width());
    if !ridge.iter().any(|&r| r) {
        return Err(PlanError::NoPath);
    }
    let comp = components(grid.width, grid.height, &ridge);
    let start_candidates = connectable_cells(grid, &ridge, start.x, start.y, 12);
    let goal_candidates = connectable_cells(grid, &ridge, goal.x, goal.y, 12);
    if start_candidates.is_empty() || goal_candidates.is_empty() {
        return Err(PlanError::NoPath);
    }
    let w = grid.width;
    for &(entry, _) in &start_candidates {
        let Some(&(exit, _)) = goal_candidates.iter().find(|&&(g, _)| comp[g] == comp[entry]) else {
            continue;
        };
        // Ridge cells all carry clearance, so diagonal chains are fine.
        let cells = astar_cells(
            grid.width,
            grid.height,
            grid.resolution,
            |c, r| ridge[r * w + c],
            (entry % w, entry / w),
            (exit % w, exit / w),
            false,
        );
        if let Some((cells, _)) = cells {
            let mut waypoints = Vec::with_capacity(cells.len() + 2);
            waypoints.push(start);
            for &(col, row) in &cells {
                let (x, y) = grid.cell_center(col, row);
                waypoints.push(Pose2D::new(x, y, 0.0));
            }
            waypoints.push(goal);
            waypoints.dedup_by(|a, b| a.position_distance(b) < 1e-9);
            return Ok(Path2D::new(waypoints)
                .densified(grid.resolution / 2.0)
                .with_recomputed_headings());
        }
    }
    Err(PlanError::NoPath)
}

/// Distance from a point to the nearest occupied cell boundary, for tests
/// and the clearance invariant.
pub fn obstacle_clearance(grid: &OccupancyGrid, x: f64, y: f64) -> f64 {
    let mut best = f64::INFINITY;
    for row in 0..grid.height {
        for col in 0..grid.width {
            if !grid.is_occupied(col, row) {
                continue;
            }
            let (min_x, min_y, max_x, max_y) = grid.cell_rect(col, row);
            let dx = (min_x - x).max(0.0).max(x - max_x);
            let dy = (min_y - y).max(0.0).max(y - max_y);
            best = best.min(dx.hypot(dy));
        }
    }
    best
}
