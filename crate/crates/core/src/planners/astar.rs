//! 8-connected grid A* with the octile heuristic.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::geometry::Pose2D;
use crate::grid::OccupancyGrid;

use super::{cell_traversable, validate_endpoints, Path2D, PlanError};

pub(crate) const NEIGHBORS: [(isize, isize); 8] = [
    (1, 0),
    (-1, 0),
    (0, 1),
    (0, -1),
    (1, 1),
    (1, -1),
    (-1, 1),
    (-1, -1),
];

#[derive(PartialEq)]
struct QueueEntry {
    f: f64,
    seq: usize,
    cell: (usize, usize),
}

impl Eq for QueueEntry {}

impl Ord for QueueEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on f, FIFO tie-break for determinism.
        other
            .f
            .total_cmp(&self.f)
            .then(other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for QueueEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn octile(a: (usize, usize), b: (usize, usize), res: f64) -> f64 {
    let dx = (a.0 as f64 - b.0 as f64).abs();
    let dy = (a.1 as f64 - b.1 as f64).abs();
    let (lo, hi) = if dx < dy { (dx, dy) } else { (dy, dx) };
    res * (hi + (std::f64::consts::SQRT_2 - 1.0) * lo)
}

/// Lowest-cost 8-connected cell path through cells accepted by `passable`.
/// Returns the cell sequence and its grid-metric cost. When
/// `forbid_corner_cutting` is set, a diagonal move requires both adjacent
/// orthogonal cells to be passable, so paths cannot squeeze through
/// zero-width gaps between diagonally adjacent obstacles.
pub(crate) fn astar_cells(
    width: usize,
    height: usize,
    resolution: f64,
    passable: impl Fn(usize, usize) -> bool,
    start: (usize, usize),
    goal: (usize, usize),
    forbid_corner_cutting: bool,
) -> Option<(Vec<(usize, usize)>, f64)> {
    if !passable(start.0, start.1) || !passable(goal.0, goal.1) {
        return None;
    }
    let idx = |c: (usize, usize)| c.1 * width + c.0;
    let mut g = vec![f64::INFINITY; width * height];
    let mut parent = vec![usize::MAX; width * height];
    let mut closed = vec![false; width * height];
    let mut heap = BinaryHeap::new();
    let mut seq = 0usize;
    g[idx(start)] = 0.0;
    heap.push(QueueEntry {
        f: octile(start, goal, resolution),
        seq,
        cell: start,
    });
    while let Some(QueueEntry { cell, .. }) = heap.pop() {
        let ci = idx(cell);
        if closed[ci] {
            continue;
        }
        closed[ci] = true;
        if cell == goal {
            let mut cells = vec![cell];
            let mut cur = ci;
            while parent[cur] != usize::MAX {
                cur = parent[cur];
                cells.push((cur % width, cur / width));
            }
            cells.reverse();
            return Some((cells, g[ci]));
        }
        for (dc, dr) in NEIGHBORS {
            let nc = cell.0 as isize + dc;
            let nr = cell.1 as isize + dr;
            if nc < 0 || nr < 0 || nc as usize >= width || nr as usize >= height {
                continue;
            }
            let ncell = (nc as usize, nr as usize);
            if !passable(ncell.0, ncell.1) || closed[idx(ncell)] {
                continue;
            }
            if forbid_corner_cutting
                && dc != 0
                && dr != 0
                && !(passable((cell.0 as isize + dc) as usize, cell.1)
                    && passable(cell.0, (cell.1 as isize + dr) as usize))
            {
                continue;
            }
            let step = if dc != 0 && dr != 0 {
                std::f64::consts::SQRT_2 * resolution
            } else {
                resolution
            };
            let tentative = g[ci] + step;
            let ni = idx(ncell);
            if tentative < g[ni] - 1e-12 {
                g[ni] = tentative;
                parent[ni] = ci;
                seq += 1;
                heap.push(QueueEntry {
                    f: tentative + octile(ncell, goal, resolution),
                    seq,
                    cell: ncell,
                });
            }
        }
    }
    None
}

/// Plan a minimal-cost grid path, densified to half the grid resolution.
pub fn plan_astar(grid: &OccupancyGrid, start: Pose2D, goal: Pose2D) -> Result<Path2D, PlanError> {
    let (start_cell, goal_cell) = validate_endpoints(grid, &start, &goal)?;
    let (cells, _cost) = astar_cells(
        grid.width,
        grid.height,
        grid.resolution,
        |c, r| cell_traversable(grid, c, r),
        start_cell,
        goal_cell,
        true,
    )
    .ok_or(PlanError::NoPath)?;
    let mut waypoints = Vec::with_capacity(cells.len() + 2);
    waypoints.push(start);
    for &(col, row) in &cells {
        let (x, y) = grid.cell_center(col, row);
        waypoints.push(Pose2D::new(x, y, 0.0));
    }
    waypoints.push(goal);
    // Drop duplicated endpoints when start/goal sit exactly on cell centres.
    waypoints.dedup_by(|a, b| a.position_distance(b) < 1e-9);
    Ok(Path2D::new(waypoints)
        .densified(grid.resolution / 2.0)
        .with_recomputed_headings())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::CellState;

    fn empty_grid(n: usize) -> OccupancyGrid {
        OccupancyGrid::new(n, n, 0.5, Pose2D::new(0.0, 0.0, 0.0), CellState::Free)
    }

    #[test]
    fn straight_line_on_empty_grid() {
        let grid = empty_grid(10);
        let path = plan_astar(
            &grid,
            Pose2D::new(0.25, 0.25, 0.0),
            Pose2D::new(0.25, 4.75, 0.0),
        )
        .unwrap();
        assert!((path.length() - 4.5).abs() < 1e-9, "length {}", path.length());
    }

    #[test]
    fn path_through_wall_gap_matches_dijkstra() {
        let mut grid = empty_grid(12);
        for col in 0..12 {
            if col != 7 {
                grid.set(col, 6, CellState::Occupied);
            }
        }
        let start = Pose2D::new(1.25, 1.25, 0.0);
        let goal = Pose2D::new(1.25, 5.25, 0.0);
        let path = plan_astar(&grid, start, goal).unwrap();
        // Independent Dijkstra oracle (uniform-cost search, no heuristic).
        let oracle = dijkstra_cost(&grid, (2, 2), (2, 10));
        assert!((path.length() - oracle.unwrap()).abs() < 1e-9);
        // The path must pass through the gap column.
        assert!(path
            .waypoints
            .iter()
            .any(|p| grid.world_to_cell(p.x, p.y).unwrap() == (7, 6)));
    }

    #[test]
    fn enclosed_goal_has_no_path() {
        let mut grid = empty_grid(10);
        for (dc, dr) in NEIGHBORS {
            grid.set((5 + dc) as usize, (5 + dr) as usize, CellState::Occupied);
        }
        let res = plan_astar(
            &grid,
            Pose2D::new(0.25, 0.25, 0.0),
            Pose2D::new(2.75, 2.75, 0.0),
        );
        assert_eq!(res, Err(PlanError::NoPath));
    }

    #[test]
    fn occupied_endpoint_is_invalid() {
        let mut grid = empty_grid(10);
        grid.set(0, 0, CellState::Occupied);
        let res = plan_astar(
            &grid,
            Pose2D::new(0.25, 0.25, 0.0),
            Pose2D::new(2.75, 2.75, 0.0),
        );
        assert!(matches!(res, Err(PlanError::InvalidEndpoint(_))));
    }

    /// Plain uniform-cost search used as an oracle.
    fn dijkstra_cost(grid: &OccupancyGrid, start: (usize, usize), goal: (usize, usize)) -> Option<f64> {
        let (w, h) = (grid.width, grid.height);
        let mut dist = vec![f64::INFINITY; w * h];
        let idx = |c: (usize, usize)| c.1 * w + c.0;
        dist[idx(start)] = 0.0;
        let mut heap = std::collections::BinaryHeap::new();
        heap.push((std::cmp::Reverse(ordered_float(0.0)), start));
        while let Some((std::cmp::Reverse(d), cell)) = heap.pop() {
            let d = f64::from_bits(d.0);
            if d > dist[idx(cell)] {
                continue;
            }
            if cell == goal {
                return Some(d);
            }
            for (dc, dr) in NEIGHBORS {
                let nc = cell.0 as isize + dc;
                let nr = cell.1 as isize + dr;
                if nc < 0 || nr < 0 || nc as usize >= w || nr as usize >= h {
                    continue;
                }
                let ncell = (nc as usize, nr as usize);
                if !cell_traversable(grid, ncell.0, ncell.1) {
                    continue;
                }
                if dc != 0
                    && dr != 0
                    && !(cell_traversable(grid, (cell.0 as isize + dc) as usize, cell.1)
                        && cell_traversable(grid, cell.0, (cell.1 as isize + dr) as usize))
                {
                    continue;
                }
                let step = if dc != 0 && dr != 0 {
                    std::f64::consts::SQRT_2 * grid.resolution
                } else {
                    grid.resolution
                };
                if d + step < dist[idx(ncell)] {
                    dist[idx(ncell)] = d + step;
                    heap.push((std::cmp::Reverse(ordered_float(d + step)), ncell));
                }
            }
        }
        None
    }

    #[derive(PartialEq, Eq, PartialOrd, Ord)]
    struct OrderedBits(u64);

    fn ordered_float(f: f64) -> OrderedBits {
        OrderedBits(f.to_bits())
    }
}
