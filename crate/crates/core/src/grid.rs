//! 2D occupancy grids shared by the mapping and planning modules.
//!
//! Cell membership uses half-open intervals `[k*res, (k+1)*res)` so every
//! world point maps to exactly one cell.

use thiserror::Error;

use crate::geometry::Pose2D;

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("point ({x}, {y}) lies outside the grid extent")]
    OutOfBounds { x: f64, y: f64 },
    #[error("grids do not share geometry")]
    GeometryMismatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellState {
    Free,
    Occupied,
    Unknown,
}

/// Uniform-resolution occupancy grid. `origin` is the world pose of the
/// outer corner of cell (0, 0); row 0 sits at minimum y.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    pub resolution: f64,
    pub origin: Pose2D,
    pub width: usize,
    pub height: usize,
    cells: Vec<CellState>,
}

impl OccupancyGrid {
    pub fn new(width: usize, height: usize, resolution: f64, origin: Pose2D, fill: CellState) -> Self {
        assert!(resolution > 0.0, "resolution must be positive");
        Self {
            resolution,
            origin,
            width,
            height,
            cells: vec![fill; width * height],
        }
    }

    pub fn same_geometry(&self, other: &OccupancyGrid) -> bool {
        self.width == other.width
            && self.height == other.height
            && self.resolution == other.resolution
            && self.origin == other.origin
    }

    #[inline]
    pub fn index(&self, col: usize, row: usize) -> usize {
        debug_assert!(col < self.width && row < self.height);
        row * self.width + col
    }

    pub fn get(&self, col: usize, row: usize) -> CellState {
        self.cells[self.index(col, row)]
    }

    pub fn set(&mut self, col: usize, row: usize, state: CellState) {
        let idx = self.index(col, row);
        self.cells[idx] = state;
    }

    pub fn cells(&self) -> &[CellState] {
        &self.cells
    }

    pub fn is_occupied(&self, col: usize, row: usize) -> bool {
        self.get(col, row) == CellState::Occupied
    }

    /// Map a world point to its cell index.
    pub fn world_to_cell(&self, x: f64, y: f64) -> Result<(usize, usize), GridError> {
        let gx = (x - self.origin.x) / self.resolution;
        let gy = (y - self.origin.y) / self.resolution;
        if gx < 0.0 || gy < 0.0 {
            return Err(GridError::OutOfBounds { x, y });
        }
        let col = gx.floor() as usize;
        let row = gy.floor() as usize;
        if col >= self.width || row >= self.height {
            return Err(GridError::OutOfBounds { x, y });
        }
        Ok((col, row))
    }

    /// World coordinates of a cell centre.
    pub fn cell_center(&self, col: usize, row: usize) -> (f64, f64) {
        (
            self.origin.x + (col as f64 + 0.5) * self.resolution,
            self.origin.y + (row as f64 + 0.5) * self.resolution,
        )
    }

    /// World-space rectangle covered by a cell.
    pub fn cell_rect(&self, col: usize, row: usize) -> (f64, f64, f64, f64) {
        let min_x = self.origin.x + col as f64 * self.resolution;
        let min_y = self.origin.y + row as f64 * self.resolution;
        (min_x, min_y, min_x + self.resolution, min_y + self.resolution)
    }

    pub fn contains_point(&self, x: f64, y: f64) -> bool {
        self.world_to_cell(x, y).is_ok()
    }

    /// Occupied-if-either union of two grids of identical geometry. Free wins
    /// over unknown so the result stays plannable where either map has seen
    /// ground.
    pub fn merged_with(&self, other: &OccupancyGrid) -> Result<OccupancyGrid, GridError> {
        if !self.same_geometry(other) {
            return Err(GridError::GeometryMismatch);
        }
        let mut out = self.clone();
        for (idx, cell) in out.cells.iter_mut().enumerate() {
            *cell = match (*cell, other.cells[idx]) {
                (CellState::Occupied, _) | (_, CellState::Occupied) => CellState::Occupied,
                (CellState::Free, _) | (_, CellState::Free) => CellState::Free,
                _ => CellState::Unknown,
            };
        }
        Ok(out)
    }

    /// Mark every cell within `radius` metres of an occupied cell as
    /// occupied, measuring distance to the occupied cell's rectangle.
    pub fn inflated(&self, radius: f64) -> OccupancyGrid {
        let mut out = self.clone();
        if radius <= 0.0 {
            return out;
        }
        let reach = (radius / self.resolution).ceil() as isize + 1;
        for row in 0..self.height {
            for col in 0..self.width {
                if !self.is_occupied(col, row) {
                    continue;
                }
                let (min_x, min_y, max_x, max_y) = self.cell_rect(col, row);
                for dr in -reach..=reach {
                    for dc in -reach..=reach {
                        let r = row as isize + dr;
                        let c = col as isize + dc;
                        if r < 0 || c < 0 || r as usize >= self.height || c as usize >= self.width {
                            continue;
                        }
                        let (cx, cy) = self.cell_center(c as usize, r as usize);
                        let dx = (min_x - cx).max(0.0).max(cx - max_x);
                        let dy = (min_y - cy).max(0.0).max(cy - max_y);
                        if dx.hypot(dy) <= radius {
                            out.set(c as usize, r as usize, CellState::Occupied);
                        }
                    }
                }
            }
        }
        out
    }

    pub fn count(&self, state: CellState) -> usize {
        self.cells.iter().filter(|c| **c == state).count()
    }
}

/// Additive log-odds evidence grid with the same geometry conventions as
/// [`OccupancyGrid`]. Cells start at zero and are marked touched on their
/// first update so binarization can keep never-observed cells unknown.
#[derive(Debug, Clone, PartialEq)]
pub struct LogOddsGrid {
    pub resolution: f64,
    pub origin: Pose2D,
    pub width: usize,
    pub height: usize,
    log_odds: Vec<f64>,
    touched: Vec<bool>,
}

impl LogOddsGrid {
    pub fn new(width: usize, height: usize, resolution: f64, origin: Pose2D) -> Self {
        assert!(resolution > 0.0, "resolution must be positive");
        Self {
            resolution,
            origin,
            width,
            height,
            log_odds: vec![0.0; width * height],
            touched: vec![false; width * height],
        }
    }

    pub fn world_to_cell(&self, x: f64, y: f64) -> Result<(usize, usize), GridError> {
        self.as_geometry().world_to_cell(x, y)
    }

    fn as_geometry(&self) -> OccupancyGrid {
        OccupancyGrid::new(self.width, self.height, self.resolution, self.origin, CellState::Unknown)
    }

    pub fn log_odd(&self, col: usize, row: usize) -> f64 {
        self.log_odds[row * self.width + col]
    }

    pub fn is_touched(&self, col: usize, row: usize) -> bool {
        self.touched[row * self.width + col]
    }

    /// Add a measurement's log odds to one cell.
    pub fn add(&mut self, col: usize, row: usize, delta: f64) {
        let idx = row * self.width + col;
        self.log_odds[idx] += delta;
        self.touched[idx] = true;
    }

    pub fn same_geometry(&self, other: &LogOddsGrid) -> bool {
        self.width == other.width
            && self.height == other.height
            && self.resolution == other.resolution
            && self.origin == other.origin
    }

    pub fn empty_like(&self) -> OccupancyGrid {
        OccupancyGrid::new(self.width, self.height, self.resolution, self.origin, CellState::Unknown)
    }
}
