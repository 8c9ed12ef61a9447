//! RRT* with cost-propagating rewiring. Fully deterministic for a fixed
//! seed: sampling uses a seeded ChaCha stream and every scan breaks ties by
//! node index.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::Pose2D;
use crate::grid::OccupancyGrid;

use super::{point_free, segment_free, validate_endpoints, Path2D, PlanError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RrtParams {
    pub max_iterations: usize,
    pub step_size: f64,
    pub goal_bias: f64,
    pub rewire_radius: f64,
    pub rng_seed: u64,
}

impl Default for RrtParams {
    fn default() -> Self {
        Self {
            max_iterations: 5000,
            step_size: 0.6,
            goal_bias: 0.08,
            rewire_radius: 1.2,
            rng_seed: 1,
        }
    }
}

struct Node {
    x: f64,
    y: f64,
    parent: usize,
    cost: f64,
    children: Vec<usize>,
}

struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    fn distance(&self, i: usize, x: f64, y: f64) -> f64 {
        (self.nodes[i].x - x).hypot(self.nodes[i].y - y)
    }

    fn nearest(&self, x: f64, y: f64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for i in 0..self.nodes.len() {
            let d = self.distance(i, x, y);
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    fn insert(&mut self, x: f64, y: f64, parent: usize, cost: f64) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node {
            x,
            y,
            parent,
            cost,
            children: Vec::new(),
        });
        self.nodes[parent].children.push(id);
        id
    }

    fn reparent(&mut self, node: usize, new_parent: usize, new_cost: f64) {
        let old_parent = self.nodes[node].parent;
        self.nodes[old_parent].children.retain(|&c| c != node);
        self.nodes[node].parent = new_parent;
        self.nodes[new_parent].children.push(node);
        let delta = new_cost - self.nodes[node].cost;
        // Propagate the improvement through the subtree.
        let mut stack = vec![node];
        while let Some(cur) = stack.pop() {
            self.nodes[cur].cost += delta;
            stack.extend(self.nodes[cur].children.iter().copied());
        }
    }
}

/// Sampling-based plan on the unpassable grid. Segment collisions are tested
/// at half the grid resolution.
pub fn plan_rrt_star(
    grid: &OccupancyGrid,
    start: Pose2D,
    goal: Pose2D,
    params: &RrtParams,
) -> Result<Path2D, PlanError> {
    validate_endpoints(grid, &start, &goal)?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
    let min_x = grid.origin.x;
    let min_y = grid.origin.y;
    let max_x = grid.origin.x + grid.width as f64 * grid.resolution;
    let max_y = grid.origin.y + grid.height as f64 * grid.resolution;

    let mut tree = Tree {
        nodes: vec![Node {
            x: start.x,
            y: start.y,
            parent: usize::MAX,
            cost: 0.0,
            children: Vec::new(),
        }],
    };
    // Best (cost-to-goal, node) able to reach the goal with a free segment.
    let mut best_goal: Option<(f64, usize)> = None;

    for _ in 0..params.max_iterations {
        let (sx, sy) = if rng.gen_bool(params.goal_bias) {
            (goal.x, goal.y)
        } else {
            (rng.gen_range(min_x..max_x), rng.gen_range(min_y..max_y))
        };
        let nearest = tree.nearest(sx, sy);
        let dist = tree.distance(nearest, sx, sy);
        if dist < 1e-9 {
            continue;
        }
        let t = (params.step_size / dist).min(1.0);
        let nx = tree.nodes[nearest].x + (sx - tree.nodes[nearest].x) * t;
        let ny = tree.nodes[nearest].y + (sy - tree.nodes[nearest].y) * t;
        if !point_free(grid, nx, ny) {
            continue;
        }
        if !segment_free(grid, tree.nodes[nearest].x, tree.nodes[nearest].y, nx, ny) {
            continue;
        }

        // Collect collision-free neighbours within the rewire radius.
        let mut neighbors: Vec<(usize, f64)> = Vec::new();
        for i in 0..tree.nodes.len() {
            let d = tree.distance(i, nx, ny);
            if d <= params.rewire_radius
                && segment_free(grid, tree.nodes[i].x, tree.nodes[i].y, nx, ny)
            {
                neighbors.push((i, d));
            }
        }
        if neighbors.is_empty() {
            neighbors.push((nearest, dist.min(params.step_size)));
        }
        let mut parent = nearest;
        let mut parent_cost = tree.nodes[parent].cost + tree.distance(nearest, nx, ny);
        for &(i, d) in &neighbors {
            let c = tree.nodes[i].cost + d;
            if c < parent_cost - 1e-12 {
                parent = i;
                parent_cost = c;
            }
        }
        let new_id = tree.insert(nx, ny, parent, parent_cost);

        // Rewire neighbours through the new node when that is cheaper.
        for &(i, d) in &neighbors {
            if i == parent {
                continue;
            }
            let candidate = parent_cost + d;
            if candidate < tree.nodes[i].cost - 1e-12 {
                tree.reparent(i, new_id, candidate);
            }
        }

        let goal_dist = tree.distance(new_id, goal.x, goal.y);
        if goal_dist <= params.step_size
            && segment_free(grid, nx, ny, goal.x, goal.y)
        {
            let total = tree.nodes[new_id].cost + goal_dist;
            if best_goal.is_none_or(|(c, _)| total < c) {
                best_goal = Some((total, new_id));
            }
        }
    }

    // Costs may have improved after the connection was recorded; re-derive
    // the best connector deterministically.
    let mut best: Option<(f64, usize)> = None;
    for i in 0..tree.nodes.len() {
        let goal_dist = tree.distance(i, goal.x, goal.y);
        if goal_dist <= params.step_size {
            let total = tree.nodes[i].cost + goal_dist;
            if best.is_none_or(|(c, _)| total < c - 1e-12)
                && segment_free(grid, tree.nodes[i].x, tree.nodes[i].y, goal.x, goal.y)
            {
                best = Some((total, i));
            }
        }
    }
    let (_, mut node) = best.or(best_goal).ok_or(PlanError::NoPath)?;

    let mut waypoints = vec![goal];
    loop {
        waypoints.push(Pose2D::new(tree.nodes[node].x, tree.nodes[node].y, 0.0));
        if tree.nodes[node].parent == usize::MAX {
            break;
        }
        node = tree.nodes[node].parent;
    }
    waypoints.reverse();
    waypoints[0] = start;
    Ok(Path2D::new(waypoints)
        .densified(grid.resolution / 2.0)
        .with_recomputed_headings())
}
