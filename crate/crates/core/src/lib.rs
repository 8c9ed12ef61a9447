//! Passable-obstacle-aware motion planning toolkit.
//!
//! The pipeline classifies obstacles into passable and unpassable classes on
//! dual occupancy grids, plans baseline 2D paths on the unpassable grid
//! only, repairs segments that would hit passable stones with Dubins curve
//! splices, and lifts the result onto 3D terrain with roll/pitch gating.

pub mod cloud;
pub mod dubins;
pub mod geometry;
pub mod grid;
pub mod io;
pub mod kdtree;
pub mod mapping;
pub mod planners;
pub mod poa;
pub mod scenario;
pub mod simulation;
pub mod terrain;

pub use cloud::{Label, LabelledPoint, LabelledPointCloud};
pub use geometry::{Ellipse2D, Pose2D, Pose3D, RobotGeometry};
pub use grid::{CellState, LogOddsGrid, OccupancyGrid};
pub use planners::{Path2D, PlanError, PlannerConfig, PlannerId};
