//! Dual-grid occupancy mapping from labelled point clouds.
//!
//! Each cell of the passable and unpassable grids accumulates log-odds
//! evidence. A measurement's occupation probability is affine in the point
//! counts, `0.5 + p*n_stone - p*n_environment`, clamped away from {0, 1} so
//! its log odds stay finite; the final probability is the logistic of the
//! accumulated log odds.

use crate::cloud::{Label, LabelledPointCloud};
use crate::grid::{CellState, GridError, LogOddsGrid, OccupancyGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeasurementCounts {
    pub n_stone: u32,
    pub n_environment: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MappingParams {
    /// Probability increment per projected point.
    pub p: f64,
    /// Final probability above which a cell is declared occupied.
    pub occupied_threshold: f64,
    /// Minimal distance of a measurement probability from {0, 1}.
    pub p_clamp_epsilon: f64,
}

impl Default for MappingParams {
    fn default() -> Self {
        Self {
            p: 0.01,
            occupied_threshold: 0.65,
            p_clamp_epsilon: 0.001,
        }
    }
}

impl MappingParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.p > 0.0 && self.p < 0.5) {
            return Err(format!("p must be in (0, 0.5), got {}", self.p));
        }
        if !(self.occupied_threshold > 0.5 && self.occupied_threshold < 1.0) {
            return Err(format!(
                "occupied_threshold must be in (0.5, 1), got {}",
                self.occupied_threshold
            ));
        }
        if !(self.p_clamp_epsilon > 0.0 && self.p_clamp_epsilon < 0.5) {
            return Err(format!(
                "p_clamp_epsilon must be in (0, 0.5), got {}",
                self.p_clamp_epsilon
            ));
        }
        Ok(())
    }

    /// Occupancy threshold expressed in log-odds space.
    pub fn threshold_log_odds(&self) -> f64 {
        log_odds_of(self.occupied_threshold)
    }
}

/// Occupation probability of one cell according to the current measurement.
pub fn measurement_probability(counts: MeasurementCounts, params: &MappingParams) -> f64 {
    let raw = 0.5 + params.p * counts.n_stone as f64 - params.p * counts.n_environment as f64;
    raw.clamp(params.p_clamp_epsilon, 1.0 - params.p_clamp_epsilon)
}

/// Log odds of a probability.
pub fn log_odds_of(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Fold one measurement into a cell: the new log odds are the measurement's
/// log odds plus the previous value.
pub fn update_log_odds(grid: &mut LogOddsGrid, col: usize, row: usize, p_current: f64) {
    debug_assert!(p_current > 0.0 && p_current < 1.0);
    grid.add(col, row, log_odds_of(p_current));
}

/// Final occupation probability of a cell from its accumulated log odds.
pub fn final_probability(log_odd: f64) -> f64 {
    1.0 / (1.0 + (-log_odd).exp())
}

/// Binarize an evidence grid: occupied where the final probability exceeds
/// the threshold, free where it does not, unknown where no measurement ever
/// touched the cell. The comparison runs in log-odds space so it is exact.
pub fn binarize(grid: &LogOddsGrid, params: &MappingParams) -> OccupancyGrid {
    let threshold = params.threshold_log_odds();
    let mut out = grid.empty_like();
    for row in 0..grid.height {
        for col in 0..grid.width {
            if !grid.is_touched(col, row) {
                continue;
            }
            let state = if grid.log_odd(col, row) > threshold {
                CellState::Occupied
            } else {
                CellState::Free
            };
            out.set(col, row, state);
        }
    }
    out
}

/// Force every cell occupied in the passable grid to free in the SLAM grid.
pub fn mask_passable(
    slam_grid: &OccupancyGrid,
    passable_grid: &OccupancyGrid,
) -> Result<OccupancyGrid, GridError> {
    if !slam_grid.same_geometry(passable_grid) {
        return Err(GridError::GeometryMismatch);
    }
    let mut out = slam_grid.clone();
    for row in 0..out.height {
        for col in 0..out.width {
            if passable_grid.is_occupied(col, row) {
                out.set(col, row, CellState::Free);
            }
        }
    }
    Ok(out)
}

/// Drop passable-labelled points that do not project onto an occupied cell
/// of the final passable grid. All other points are retained.
pub fn filter_cloud_by_mask(
    cloud: &LabelledPointCloud,
    passable_grid: &OccupancyGrid,
) -> LabelledPointCloud {
    cloud
        .iter()
        .filter(|p| {
            if p.label != Label::PassableObstacle {
                return true;
            }
            matches!(passable_grid.world_to_cell(p.x, p.y), Ok((col, row)) if passable_grid.is_occupied(col, row))
        })
        .copied()
        .collect()
}

/// Accumulated mapping state: the two evidence grids plus the common cloud
/// of every ingested message.
#[derive(Debug, Clone)]
pub struct MappingState {
    pub params: MappingParams,
    pub passable: LogOddsGrid,
    pub unpassable: LogOddsGrid,
    pub accumulated_cloud: LabelledPointCloud,
}

impl MappingState {
    pub fn new(passable: LogOddsGrid, unpassable: LogOddsGrid, params: MappingParams) -> Self {
        assert!(passable.same_geometry(&unpassable), "grids must share geometry");
        Self {
            params,
            passable,
            unpassable,
            accumulated_cloud: LabelledPointCloud::new(),
        }
    }

    /// Project one labelled cloud onto the horizontal plane and fold it into
    /// both grids. Stone points count toward the grid of their own class;
    /// free-space points count as environment for both. The raw cloud is
    /// appended to the accumulated cloud.
    pub fn ingest_cloud(&mut self, cloud: &LabelledPointCloud) -> Result<(), GridError> {
        let ncells = self.passable.width * self.passable.height;
        let mut passable_counts = vec![0u32; ncells];
        let mut unpassable_counts = vec![0u32; ncells];
        let mut environment_counts = vec![0u32; ncells];
        for p in cloud.iter() {
            let (col, row) = self.passable.world_to_cell(p.x, p.y)?;
            let idx = row * self.passable.width + col;
            match p.label {
                Label::PassableObstacle => passable_counts[idx] += 1,
                Label::UnpassableObstacle => unpassable_counts[idx] += 1,
                Label::FreeSpace => environment_counts[idx] += 1,
            }
        }
        let width = self.passable.width;
        for idx in 0..ncells {
            let (col, row) = (idx % width, idx / width);
            if passable_counts[idx] + environment_counts[idx] > 0 {
                let p_current = measurement_probability(
                    MeasurementCounts {
                        n_stone: passable_counts[idx],
                        n_environment: environment_counts[idx],
                    },
                    &self.params,
                );
                update_log_odds(&mut self.passable, col, row, p_current);
            }
            if unpassable_counts[idx] + environment_counts[idx] > 0 {
                let p_current = measurement_probability(
                    MeasurementCounts {
                        n_stone: unpassable_counts[idx],
                        n_environment: environment_counts[idx],
                    },
                    &self.params,
                );
                update_log_odds(&mut self.unpassable, col, row, p_current);
            }
        }
        self.accumulated_cloud.extend_from(cloud);
        Ok(())
    }

    pub fn binarize_passable(&self) -> OccupancyGrid {
        binarize(&self.passable, &self.params)
    }

    pub fn binarize_unpassable(&self) -> OccupancyGrid {
        binarize(&self.unpassable, &self.params)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloud::LabelledPoint;
    use crate::geometry::Pose2D;
    use proptest::prelude::*;

    fn params() -> MappingParams {
        MappingParams::default()
    }

    fn fresh_grid() -> LogOddsGrid {
        LogOddsGrid::new(10, 10, 0.5, Pose2D::new(0.0, 0.0, 0.0))
    }

    fn point(x: f64, y: f64, label: Label) -> LabelledPoint {
        LabelledPoint { x, y, z: 0.0, label, instance_id: None }
    }

    #[test]
    fn empty_measurement_is_uninformative() {
        let p = measurement_probability(MeasurementCounts { n_stone: 0, n_environment: 0 }, &params());
        assert_eq!(p, 0.5);
    }

    #[test]
    fn ten_stone_points_give_point_six() {
        let p = measurement_probability(MeasurementCounts { n_stone: 10, n_environment: 0 }, &params());
        assert!((p - 0.6).abs() < 1e-15);
    }

    #[test]
    fn excess_evidence_clamps_below_one() {
        let p = measurement_probability(MeasurementCounts { n_stone: 100, n_environment: 0 }, &params());
        assert_eq!(p, 0.999);
    }

    #[test]
    fn uninformative_update_leaves_cell_unchanged() {
        let mut g = fresh_grid();
        update_log_odds(&mut g, 3, 4, 0.5);
        assert_eq!(g.log_odd(3, 4), 0.0);
        assert!(g.is_touched(3, 4));
    }

    #[test]
    fn two_updates_accumulate_log_odds() {
        let mut g = fresh_grid();
        update_log_odds(&mut g, 0, 0, 0.6);
        update_log_odds(&mut g, 0, 0, 0.6);
        assert!((g.log_odd(0, 0) - 2.0 * (1.5f64).ln()).abs() < 1e-12);
        assert!((g.log_odd(0, 0) - 0.81093).abs() < 1e-5);
    }

    #[test]
    fn symmetric_updates_cancel() {
        let mut g = fresh_grid();
        update_log_odds(&mut g, 0, 0, 0.4);
        update_log_odds(&mut g, 0, 0, 0.6);
        assert!(g.log_odd(0, 0).abs() < 1e-15);
    }

    #[test]
    fn final_probability_examples() {
        assert_eq!(final_probability(0.0), 0.5);
        assert!((final_probability(0.8109302162163288) - 0.69231).abs() < 1e-5);
        let mut prev = 0.5;
        for i in 1..60 {
            let p = final_probability(i as f64 * 0.5);
            assert!(p > prev);
            prev = p;
        }
        assert!(prev < 1.0 && prev > 0.9999);
    }

    #[test]
    fn ingest_empty_cloud_is_identity() {
        let mut state = MappingState::new(fresh_grid(), fresh_grid(), params());
        let before = state.clone();
        state.ingest_cloud(&LabelledPointCloud::new()).unwrap();
        assert_eq!(state.passable, before.passable);
        assert_eq!(state.unpassable, before.unpassable);
        assert_eq!(state.accumulated_cloud.len(), 0);
    }

    #[test]
    fn ten_passable_points_update_one_cell() {
        let mut state = MappingState::new(fresh_grid(), fresh_grid(), params());
        let cloud: LabelledPointCloud = (0..10)
            .map(|_| point(1.1, 1.2, Label::PassableObstacle))
            .collect();
        state.ingest_cloud(&cloud).unwrap();
        let (col, row) = state.passable.world_to_cell(1.1, 1.2).unwrap();
        assert!((state.passable.log_odd(col, row) - (0.6f64 / 0.4).ln()).abs() < 1e-12);
        // The unpassable grid saw no unpassable or free points there.
        assert!(!state.unpassable.is_touched(col, row));
        assert_eq!(state.accumulated_cloud.len(), 10);
    }

    #[test]
    fn balanced_cell_stays_at_zero() {
        let mut state = MappingState::new(fresh_grid(), fresh_grid(), params());
        let mut cloud = LabelledPointCloud::new();
        for _ in 0..5 {
            cloud.push(point(2.2, 2.2, Label::PassableObstacle));
            cloud.push(point(2.3, 2.3, Label::FreeSpace));
        }
        state.ingest_cloud(&cloud).unwrap();
        let (col, row) = state.passable.world_to_cell(2.2, 2.2).unwrap();
        assert_eq!(state.passable.log_odd(col, row), 0.0);
        assert!(state.passable.is_touched(col, row));
    }

    #[test]
    fn out_of_extent_cloud_is_rejected() {
        let mut state = MappingState::new(fresh_grid(), fresh_grid(), params());
        let cloud: LabelledPointCloud = [point(99.0, 0.0, Label::FreeSpace)].into_iter().collect();
        assert!(state.ingest_cloud(&cloud).is_err());
    }

    #[test]
    fn binarize_untouched_grid_is_unknown() {
        let g = fresh_grid();
        let out = binarize(&g, &params());
        assert_eq!(out.count(CellState::Unknown), 100);
    }

    #[test]
    fn binarize_thresholds() {
        let mut g = fresh_grid();
        g.add(0, 0, 0.81); // final probability 0.692 > 0.65
        g.add(1, 0, -2.0); // final probability 0.119
        let out = binarize(&g, &params());
        assert_eq!(out.get(0, 0), CellState::Occupied);
        assert_eq!(out.get(1, 0), CellState::Free);
    }

    #[test]
    fn mask_forces_passable_cells_free() {
        let origin = Pose2D::new(0.0, 0.0, 0.0);
        let mut slam = OccupancyGrid::new(3, 1, 0.5, origin, CellState::Free);
        let mut passable = OccupancyGrid::new(3, 1, 0.5, origin, CellState::Free);
        slam.set(0, 0, CellState::Occupied);
        slam.set(1, 0, CellState::Occupied);
        passable.set(0, 0, CellState::Occupied);
        let out = mask_passable(&slam, &passable).unwrap();
        assert_eq!(out.get(0, 0), CellState::Free);
        assert_eq!(out.get(1, 0), CellState::Occupied);
        // Identity when the passable grid is all free.
        let all_free = OccupancyGrid::new(3, 1, 0.5, origin, CellState::Free);
        assert_eq!(mask_passable(&slam, &all_free).unwrap(), slam);
        // Idempotent.
        assert_eq!(mask_passable(&out, &passable).unwrap(), out);
    }

    #[test]
    fn filter_removes_shifted_stone_points_only() {
        let origin = Pose2D::new(0.0, 0.0, 0.0);
        let mut passable = OccupancyGrid::new(4, 4, 0.5, origin, CellState::Free);
        passable.set(1, 1, CellState::Occupied);
        let cloud: LabelledPointCloud = [
            point(0.75, 0.75, Label::PassableObstacle), // over occupied cell: kept
            point(1.75, 0.25, Label::PassableObstacle), // over free cell: removed
            point(1.75, 0.25, Label::FreeSpace),        // free space always kept
            point(1.75, 0.25, Label::UnpassableObstacle),
        ]
        .into_iter()
        .collect();
        let filtered = filter_cloud_by_mask(&cloud, &passable);
        assert_eq!(filtered.len(), 3);
        assert_eq!(filtered.count_label(Label::PassableObstacle), 1);
    }

    #[test]
    fn convergence_matches_direct_iteration() {
        // Smallest n with sigmoid(n * logit(p_c)) > theta.
        let theta: f64 = 0.65;
        let p_c: f64 = 0.6;
        let formula = (log_odds_of(theta) / log_odds_of(p_c)).ceil() as u32;
        let mut log_odd = 0.0;
        let mut first_crossing = 0;
        for n in 1..=16 {
            log_odd += log_odds_of(p_c);
            if final_probability(log_odd) > theta {
                first_crossing = n;
                break;
            }
        }
        assert_eq!(first_crossing, formula);
        assert_eq!(first_crossing, 2);
        // Four repeated measurements are certainly enough.
        assert!(final_probability(4.0 * log_odds_of(p_c)) > theta);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn permuting_points_within_a_cloud_is_bitwise_identical(
            pts in proptest::collection::vec((0usize..100, 0u8..3), 1..120),
            seed in 0u64..1000,
        ) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let to_point = |(cell, code): (usize, u8)| {
                let (col, row) = (cell % 10, cell / 10);
                point(col as f64 * 0.5 + 0.25, row as f64 * 0.5 + 0.25, Label::from_code(code).unwrap())
            };
            let cloud: LabelledPointCloud = pts.iter().copied().map(to_point).collect();
            let mut shuffled = pts.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let cloud2: LabelledPointCloud = shuffled.into_iter().map(to_point).collect();

            let mut a = MappingState::new(fresh_grid(), fresh_grid(), params());
            let mut b = MappingState::new(fresh_grid(), fresh_grid(), params());
            a.ingest_cloud(&cloud).unwrap();
            b.ingest_cloud(&cloud2).unwrap();
            prop_assert_eq!(a.passable, b.passable);
            prop_assert_eq!(a.unpassable, b.unpassable);
        }

        #[test]
        fn permuting_cloud_batches_agrees_within_tolerance(
            batches in proptest::collection::vec(
                proptest::collection::vec((0usize..100, 0u8..3), 1..30),
                1..6,
            ),
        ) {
            let to_cloud = |batch: &Vec<(usize, u8)>| -> LabelledPointCloud {
                batch.iter().map(|&(cell, code)| {
                    let (col, row) = (cell % 10, cell / 10);
                    point(col as f64 * 0.5 + 0.25, row as f64 * 0.5 + 0.25, Label::from_code(code).unwrap())
                }).collect()
            };
            let mut a = MappingState::new(fresh_grid(), fresh_grid(), params());
            for batch in &batches {
                a.ingest_cloud(&to_cloud(batch)).unwrap();
            }
            let mut b = MappingState::new(fresh_grid(), fresh_grid(), params());
            for batch in batches.iter().rev() {
                b.ingest_cloud(&to_cloud(batch)).unwrap();
            }
            for row in 0..10 {
                for col in 0..10 {
                    prop_assert!((a.passable.log_odd(col, row) - b.passable.log_odd(col, row)).abs() < 1e-12);
                }
            }
        }

        #[test]
        fn adding_a_stone_point_never_decreases_probability(
            n_stone in 0u32..150,
            n_env in 0u32..150,
        ) {
            let p = params();
            let before = measurement_probability(MeasurementCounts { n_stone, n_environment: n_env }, &p);
            let after = measurement_probability(MeasurementCounts { n_stone: n_stone + 1, n_environment: n_env }, &p);
            prop_assert!(final_probability(log_odds_of(after)) >= final_probability(log_odds_of(before)) - 1e-15);
        }
    }
}
