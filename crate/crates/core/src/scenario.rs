//! Deterministic benchmark world generation: labelled point clouds,
//! ground-truth grids, and mission definitions.
//!
//! Worlds are a pure function of the scenario seed. The unpassable stone
//! layout draws from its own seeded stream so density tiers that share a
//! seed share the layout exactly. Points are sampled on a jittered lattice;
//! stones occlude the ground beneath them and are sampled densely enough
//! that the cells they dominate binarize as occupied under the default
//! mapping parameters. The ground-truth grids are computed from per-cell
//! point counts through the same probability pipeline the mapping module
//! applies, which closes the loop between generation and mapping.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::cloud::{Label, LabelledPoint, LabelledPointCloud};
use crate::geometry::{normalize_angle, Ellipse2D, Pose2D, RobotGeometry};
use crate::grid::{CellState, OccupancyGrid};
use crate::mapping::{measurement_probability, log_odds_of, MappingParams, MeasurementCounts};
use crate::planners::RrtParams;
use crate::poa::PoaParams;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("could not place stone {index} after {attempts} attempts")]
    PlacementFailure { index: usize, attempts: usize },
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

/// Inclusive sampling range for one stone dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SizeRange {
    pub min: f64,
    pub max: f64,
}

impl SizeRange {
    fn sample(&self, rng: &mut impl Rng) -> f64 {
        if self.max > self.min {
            rng.gen_range(self.min..self.max)
        } else {
            self.min
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoneSizes {
    pub half_width: SizeRange,
    pub half_length: SizeRange,
    pub height: SizeRange,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerrainKind {
    Flat,
    Heightfield,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MissionMode {
    /// Visit the goals in order, each leg starting where the last ended.
    Sequential,
    /// One independent mission from the start to each goal.
    Radial,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub name: String,
    pub rng_seed: u64,
    pub extent_x: f64,
    pub extent_y: f64,
    pub grid_resolution: f64,
    pub terrain: TerrainKind,
    /// Height clamp for heightfield terrain, metres.
    pub amplitude: f64,
    pub n_passable: usize,
    pub n_unpassable: usize,
    pub passable_sizes: StoneSizes,
    pub unpassable_sizes: StoneSizes,
    pub start: Pose2D,
    pub goals: Vec<(String, Pose2D)>,
    pub mission_mode: MissionMode,
    pub rrt: RrtParams,
    /// Explicit POA overrides; `None` keeps per-planner defaults.
    pub poa: Option<PoaParams>,
    pub mapping: MappingParams,
}

impl ScenarioSpec {
    fn base(name: &str, n_passable: usize) -> ScenarioSpec {
        ScenarioSpec {
            name: name.to_string(),
            rng_seed: 1,
            extent_x: 15.0,
            extent_y: 15.0,
            grid_resolution: 0.5,
            terrain: TerrainKind::Flat,
            amplitude: 1.0,
            n_passable,
            n_unpassable: 22,
            passable_sizes: StoneSizes {
                half_width: SizeRange { min: 0.11, max: 0.13 },
                half_length: SizeRange { min: 0.38, max: 0.58 },
                height: SizeRange { min: 0.10, max: 0.28 },
            },
            unpassable_sizes: StoneSizes {
                half_width: SizeRange { min: 0.30, max: 0.70 },
                half_length: SizeRange { min: 0.30, max: 0.70 },
                height: SizeRange { min: 0.35, max: 0.80 },
            },
            start: Pose2D::new(1.0, 1.0, 0.0),
            goals: vec![
                ("A".to_string(), Pose2D::new(1.0, 14.0, 0.0)),
                ("B".to_string(), Pose2D::new(14.0, 14.0, 0.0)),
            ],
            mission_mode: MissionMode::Sequential,
            rrt: RrtParams::default(),
            poa: None,
            mapping: MappingParams::default(),
        }
    }

    pub fn setup1() -> ScenarioSpec {
        Self::base("setup1", 104)
    }

    pub fn setup2() -> ScenarioSpec {
        Self::base("setup2", 159)
    }

    pub fn setup3() -> ScenarioSpec {
        Self::base("setup3", 206)
    }

    /// Setup-3 density over uneven terrain with four radial goals.
    pub fn setup3d() -> ScenarioSpec {
        let mut spec = Self::base("setup3d", 206);
        spec.terrain = TerrainKind::Heightfield;
        spec.mission_mode = MissionMode::Radial;
        spec.goals = vec![
            ("A".to_string(), Pose2D::new(1.5, 11.0, 0.0)),
            ("B".to_string(), Pose2D::new(8.0, 8.0, 0.0)),
            ("C".to_string(), Pose2D::new(13.0, 9.0, 0.0)),
            ("D".to_string(), Pose2D::new(5.0, 12.5, 0.0)),
        ];
        spec
    }

    pub fn builtin(name: &str) -> Option<ScenarioSpec> {
        match name {
            "setup1" => Some(Self::setup1()),
            "setup2" => Some(Self::setup2()),
            "setup3" => Some(Self::setup3()),
            "setup3d" => Some(Self::setup3d()),
            _ => None,
        }
    }

    pub fn builtin_setups() -> Vec<ScenarioSpec> {
        vec![Self::setup1(), Self::setup2(), Self::setup3(), Self::setup3d()]
    }

    /// Mission legs implied by the mission mode.
    pub fn missions(&self) -> Vec<Mission> {
        match self.mission_mode {
            MissionMode::Sequential => {
                let mut legs = Vec::new();
                let mut from = self.start;
                for (name, goal) in &self.goals {
                    legs.push(Mission {
                        name: name.clone(),
                        start: from,
                        goal: *goal,
                    });
                    from = *goal;
                }
                legs
            }
            MissionMode::Radial => self
                .goals
                .iter()
                .map(|(name, goal)| Mission {
                    name: name.clone(),
                    start: self.start,
                    goal: *goal,
                })
                .collect(),
        }
    }

    /// Corridor used for the guaranteed steep bump on heightfield worlds:
    /// the longest mission leg.
    fn bump_corridor(&self) -> (Pose2D, Pose2D) {
        self.missions()
            .into_iter()
            .max_by(|a, b| {
                a.start
                    .position_distance(&a.goal)
                    .total_cmp(&b.start.position_distance(&b.goal))
            })
            .map(|m| (m.start, m.goal))
            .unwrap_or((self.start, self.start))
    }

    fn endpoints(&self) -> Vec<(f64, f64)> {
        let mut pts = vec![(self.start.x, self.start.y)];
        pts.extend(self.goals.iter().map(|(_, g)| (g.x, g.y)));
        pts
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.extent_x <= 0.0 || self.extent_y <= 0.0 || self.grid_resolution <= 0.0 {
            return Err(ScenarioError::Invalid("extent and resolution must be positive".into()));
        }
        if self.goals.is_empty() {
            return Err(ScenarioError::Invalid("at least one goal required".into()));
        }
        self.mapping
            .validate()
            .map_err(ScenarioError::Invalid)?;
        let geom = RobotGeometry::default();
        if 2.0 * self.passable_sizes.half_width.max > geom.clearance_width + 1e-9 {
            return Err(ScenarioError::Invalid(
                "passable stones must fit the clearance width".into(),
            ));
        }
        if self.passable_sizes.height.max > geom.clearance_height + 1e-9 {
            return Err(ScenarioError::Invalid(
                "passable stones must fit the clearance height".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mission {
    pub name: String,
    pub start: Pose2D,
    pub goal: Pose2D,
}

/// One generated stone: a half-ellipsoid cap sitting on the terrain.
#[derive(Debug, Clone, PartialEq)]
pub struct Stone {
    pub instance_id: u32,
    pub label: Label,
    pub center_x: f64,
    pub center_y: f64,
    pub half_length: f64,
    pub half_width: f64,
    pub orientation: f64,
    pub height: f64,
}

impl Stone {
    pub fn footprint(&self) -> Ellipse2D {
        Ellipse2D::new(
            self.center_x,
            self.center_y,
            self.half_length,
            self.half_width,
            self.orientation,
        )
    }

    fn local(&self, x: f64, y: f64) -> (f64, f64) {
        let dx = x - self.center_x;
        let dy = y - self.center_y;
        let cos = self.orientation.cos();
        let sin = self.orientation.sin();
        (dx * cos + dy * sin, -dx * sin + dy * cos)
    }

    pub fn contains_xy(&self, x: f64, y: f64) -> bool {
        let (u, v) = self.local(x, y);
        (u / self.half_length).powi(2) + (v / self.half_width).powi(2) <= 1.0
    }

    /// Height of the ellipsoidal cap above the ground at a footprint point.
    pub fn cap_height(&self, x: f64, y: f64) -> f64 {
        let (u, v) = self.local(x, y);
        let arg = 1.0 - (u / self.half_length).powi(2) - (v / self.half_width).powi(2);
        self.height * arg.max(0.0).sqrt()
    }

    /// Three-disc approximation of the footprint used for separation tests.
    fn discs(&self) -> [(f64, f64, f64); 3] {
        let r = self.half_width * 1.15;
        let along = 0.62 * self.half_length;
        let (c, s) = (self.orientation.cos(), self.orientation.sin());
        [
            (self.center_x - along * c, self.center_y - along * s, r),
            (self.center_x, self.center_y, r),
            (self.center_x + along * c, self.center_y + along * s, r),
        ]
    }

    fn gap_to(&self, other: &Stone) -> f64 {
        let mut min = f64::INFINITY;
        for (ax, ay, ar) in self.discs() {
            for (bx, by, br) in other.discs() {
                min = min.min((ax - bx).hypot(ay - by) - ar - br);
            }
        }
        min
    }
}

/// Gaussian bump heightfield with endpoint fade and amplitude clamp.
#[derive(Debug, Clone, PartialEq)]
pub struct Heightfield {
    bumps: Vec<(f64, f64, f64, f64)>, // (cx, cy, amplitude, sigma)
    fade_points: Vec<(f64, f64)>,
    amplitude: f64,
}

impl Heightfield {
    pub fn flat() -> Heightfield {
        Heightfield {
            bumps: Vec::new(),
            fade_points: Vec::new(),
            amplitude: 0.0,
        }
    }

    pub fn z(&self, x: f64, y: f64) -> f64 {
        if self.bumps.is_empty() {
            return 0.0;
        }
        let mut z = 0.0;
        for &(cx, cy, a, sigma) in &self.bumps {
            let r_sq = (x - cx).powi(2) + (y - cy).powi(2);
            z += a * (-r_sq / (2.0 * sigma * sigma)).exp();
        }
        // Flat pads around the mission endpoints.
        for &(px, py) in &self.fade_points {
            let d = (x - px).hypot(y - py);
            let t = ((d - 1.0) / 1.5).clamp(0.0, 1.0);
            z *= t * t * (3.0 - 2.0 * t);
        }
        z.clamp(-self.amplitude, self.amplitude)
    }
}

/// A fully generated world.
#[derive(Debug, Clone)]
pub struct World {
    pub spec: ScenarioSpec,
    pub cloud: LabelledPointCloud,
    pub passable_grid: OccupancyGrid,
    pub unpassable_grid: OccupancyGrid,
    pub stones: Vec<Stone>,
    pub heightfield: Heightfield,
}

impl World {
    /// Union grid a passability-blind planner would see.
    pub fn merged_grid(&self) -> OccupancyGrid {
        self.passable_grid
            .merged_with(&self.unpassable_grid)
            .expect("world grids share geometry")
    }
}

/// Stable seed mixer for the independent RNG streams of a world.
pub fn derive_seed(seed: u64, salt: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(salt)
        .rotate_left(17)
        ^ salt
}

// Stones must be sampled denser than the ground so the cells they cover
// accumulate enough excess stone evidence to binarize as occupied: with
// p = 0.01 and threshold 0.65 a cell needs n_stone - n_environment > 15.
const FREE_SPACING: f64 = 0.045;
const STONE_SPACING: f64 = 0.03;
const JITTER: f64 = 0.02;
const MIN_STONE_POINTS: usize = 50;
/// Clearance between a stone footprint and any mission endpoint.
const ENDPOINT_CLEARANCE: f64 = 1.4;

/// Passable stones gather in seeded banks with open ground between them,
/// which is what makes passability-blind planners detour; a tail of the
/// stones stays uniformly scattered.
const CLUSTER_FRACTION: f64 = 0.85;
const CLUSTER_SIGMA: f64 = 1.1;
const STONES_PER_CLUSTER: usize = 28;

fn sample_gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; two uniform draws keep the stream deterministic.
    let u1: f64 = rng.gen_range(1e-12..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

fn cluster_centers(
    spec: &ScenarioSpec,
    count: usize,
    endpoints: &[(f64, f64)],
    rng: &mut ChaCha8Rng,
) -> Vec<(f64, f64)> {
    let k = ((count as f64 * CLUSTER_FRACTION / STONES_PER_CLUSTER as f64).round() as usize).max(3);
    // Banks may lean on the map boundary; only the endpoints stay clear.
    let margin = 0.8;
    let mut centers: Vec<(f64, f64)> = Vec::with_capacity(k);
    'outer: for _ in 0..20_000 {
        if centers.len() == k {
            break;
        }
        let c = (
            rng.gen_range(margin..spec.extent_x - margin),
            rng.gen_range(margin..spec.extent_y - margin),
        );
        for &(ex, ey) in endpoints {
            if (c.0 - ex).hypot(c.1 - ey) < 2.2 {
                continue 'outer;
            }
        }
        if centers.iter().any(|&(x, y)| (c.0 - x).hypot(c.1 - y) < 2.0) {
            continue;
        }
        centers.push(c);
    }
    centers
}

fn place_stones(
    spec: &ScenarioSpec,
    label: Label,
    count: usize,
    sizes: &StoneSizes,
    existing: &mut Vec<Stone>,
    first_instance: u32,
    rng: &mut ChaCha8Rng,
) -> Result<(), ScenarioError> {
    let endpoints = spec.endpoints();
    // Passable stones may sit close together; unpassable stones keep wide
    // corridors so the clutter comes from the passable class.
    let required_gap = match label {
        Label::UnpassableObstacle => 1.2,
        _ => 0.05,
    };
    let clusters = if label == Label::PassableObstacle && count > 0 {
        cluster_centers(spec, count, &endpoints, rng)
    } else {
        Vec::new()
    };
    for i in 0..count {
        let mut placed = false;
        let attempts = 20_000;
        for _ in 0..attempts {
            let half_length = sizes.half_length.sample(rng);
            let half_width = sizes.half_width.sample(rng).min(half_length);
            // Footprints may overhang the map edge; the lattice clips them.
            let margin = 0.05;
            let (center_x, center_y) = if !clusters.is_empty() && rng.gen_bool(CLUSTER_FRACTION) {
                let (cx, cy) = clusters[rng.gen_range(0..clusters.len())];
                (
                    (cx + CLUSTER_SIGMA * sample_gaussian(rng)).clamp(margin, spec.extent_x - margin),
                    (cy + CLUSTER_SIGMA * sample_gaussian(rng)).clamp(margin, spec.extent_y - margin),
                )
            } else {
                (
                    rng.gen_range(margin..spec.extent_x - margin),
                    rng.gen_range(margin..spec.extent_y - margin),
                )
            };
            let stone = Stone {
                instance_id: first_instance + i as u32,
                label,
                center_x,
                center_y,
                half_length,
                half_width,
                orientation: normalize_angle(rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI)),
                height: sizes.height.sample(rng),
            };
            let clear_of_endpoints = endpoints.iter().all(|&(ex, ey)| {
                (stone.center_x - ex).hypot(stone.center_y - ey)
                    >= stone.half_length + ENDPOINT_CLEARANCE
            });
            if !clear_of_endpoints {
                continue;
            }
            let clear_of_stones = existing.iter().all(|other| stone.gap_to(other) >= required_gap);
            if !clear_of_stones {
                continue;
            }
            existing.push(stone);
            placed = true;
            break;
        }
        if !placed {
            return Err(ScenarioError::PlacementFailure { index: i, attempts });
        }
    }
    Ok(())
}

fn build_heightfield(spec: &ScenarioSpec, rng: &mut ChaCha8Rng) -> Heightfield {
    if spec.terrain == TerrainKind::Flat {
        return Heightfield::flat();
    }
    let mut bumps = Vec::with_capacity(12);
    // Guaranteed super-threshold bump on the longest mission corridor.
    let (from, to) = spec.bump_corridor();
    let t = rng.gen_range(0.40..0.60);
    bumps.push((
        from.x + (to.x - from.x) * t,
        from.y + (to.y - from.y) * t,
        0.9,
        0.8,
    ));
    for _ in 0..11 {
        bumps.push((
            rng.gen_range(0.0..spec.extent_x),
            rng.gen_range(0.0..spec.extent_y),
            rng.gen_range(-0.6..0.6),
            rng.gen_range(0.5..1.5),
        ));
    }
    Heightfield {
        bumps,
        fade_points: spec.endpoints(),
        amplitude: spec.amplitude,
    }
}

/// Sample one stone's surface as a jittered lattice clipped to the
/// footprint, refining the pitch until the cluster has enough points.
fn sample_stone(stone: &Stone, field: &Heightfield, rng: &mut ChaCha8Rng) -> Vec<LabelledPoint> {
    let mut spacing = STONE_SPACING
        .min((std::f64::consts::PI * stone.half_length * stone.half_width / 60.0).sqrt());
    for _ in 0..6 {
        let mut points = Vec::new();
        let reach = stone.half_length;
        let min_x = stone.center_x - reach;
        let min_y = stone.center_y - reach;
        let cells = (2.0 * reach / spacing).ceil() as usize;
        let jitter = JITTER.min(spacing / 2.0);
        for i in 0..=cells {
            for j in 0..=cells {
                let x = min_x + i as f64 * spacing + rng.gen_range(-jitter..jitter);
                let y = min_y + j as f64 * spacing + rng.gen_range(-jitter..jitter);
                if !stone.contains_xy(x, y) {
                    continue;
                }
                points.push(LabelledPoint {
                    x,
                    y,
                    z: field.z(x, y) + stone.cap_height(x, y),
                    label: stone.label,
                    instance_id: Some(stone.instance_id),
                });
            }
        }
        if points.len() >= MIN_STONE_POINTS {
            return points;
        }
        spacing /= 2.0;
    }
    Vec::new()
}

/// Deterministically generate the labelled cloud and ground-truth grids.
pub fn generate_world(spec: &ScenarioSpec) -> Result<World, ScenarioError> {
    spec.validate()?;
    let mut stones = Vec::with_capacity(spec.n_passable + spec.n_unpassable);
    let mut rng_unpassable = ChaCha8Rng::seed_from_u64(derive_seed(spec.rng_seed, 0xA11C_E0));
    place_stones(
        spec,
        Label::UnpassableObstacle,
        spec.n_unpassable,
        &spec.unpassable_sizes,
        &mut stones,
        0,
        &mut rng_unpassable,
    )?;
    let mut rng_passable = ChaCha8Rng::seed_from_u64(derive_seed(spec.rng_seed, 0xB0B0));
    place_stones(
        spec,
        Label::PassableObstacle,
        spec.n_passable,
        &spec.passable_sizes,
        &mut stones,
        spec.n_unpassable as u32,
        &mut rng_passable,
    )?;

    let mut rng_field = ChaCha8Rng::seed_from_u64(derive_seed(spec.rng_seed, 0xF1E1_D0));
    let heightfield = build_heightfield(spec, &mut rng_field);

    // Spatial hash of stones for the occlusion test.
    let bin = 1.0f64;
    let bins_x = (spec.extent_x / bin).ceil() as usize + 1;
    let bins_y = (spec.extent_y / bin).ceil() as usize + 1;
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); bins_x * bins_y];
    for (idx, stone) in stones.iter().enumerate() {
        let reach = stone.half_length + JITTER;
        let min_bx = ((stone.center_x - reach) / bin).floor().max(0.0) as usize;
        let max_bx = (((stone.center_x + reach) / bin).floor() as usize).min(bins_x - 1);
        let min_by = ((stone.center_y - reach) / bin).floor().max(0.0) as usize;
        let max_by = (((stone.center_y + reach) / bin).floor() as usize).min(bins_y - 1);
        for by in min_by..=max_by {
            for bx in min_bx..=max_bx {
                buckets[by * bins_x + bx].push(idx);
            }
        }
    }

    let mut cloud = LabelledPointCloud::new();
    let mut rng_points = ChaCha8Rng::seed_from_u64(derive_seed(spec.rng_seed, 0xF5EE));
    let nx = (spec.extent_x / FREE_SPACING).floor() as usize;
    let ny = (spec.extent_y / FREE_SPACING).floor() as usize;
    for j in 0..ny {
        for i in 0..nx {
            let x = ((i as f64 + 0.5) * FREE_SPACING + rng_points.gen_range(-JITTER..JITTER))
                .clamp(0.0, spec.extent_x - 1e-9);
            let y = ((j as f64 + 0.5) * FREE_SPACING + rng_points.gen_range(-JITTER..JITTER))
                .clamp(0.0, spec.extent_y - 1e-9);
            let bucket = &buckets[(y / bin).floor() as usize * bins_x + (x / bin).floor() as usize];
            if bucket.iter().any(|&s| stones[s].contains_xy(x, y)) {
                continue; // ground occluded by a stone
            }
            cloud.push(LabelledPoint {
                x,
                y,
                z: heightfield.z(x, y),
                label: Label::FreeSpace,
                instance_id: None,
            });
        }
    }
    let mut rng_stone_points = ChaCha8Rng::seed_from_u64(derive_seed(spec.rng_seed, 0x5701));
    for stone in &stones {
        let pts = sample_stone(stone, &heightfield, &mut rng_stone_points);
        cloud.points.extend(pts);
    }

    let (passable_grid, unpassable_grid) = ground_truth_grids(spec, &cloud);
    Ok(World {
        spec: spec.clone(),
        cloud,
        passable_grid,
        unpassable_grid,
        stones,
        heightfield,
    })
}

/// Per-cell point counts pushed through the measurement-probability pipeline.
fn ground_truth_grids(spec: &ScenarioSpec, cloud: &LabelledPointCloud) -> (OccupancyGrid, OccupancyGrid) {
    let width = (spec.extent_x / spec.grid_resolution).round() as usize;
    let height = (spec.extent_y / spec.grid_resolution).round() as usize;
    let origin = Pose2D::new(0.0, 0.0, 0.0);
    let mut passable =
        OccupancyGrid::new(width, height, spec.grid_resolution, origin, CellState::Unknown);
    let mut unpassable = passable.clone();
    let mut counts = vec![[0u32; 3]; width * height];
    for p in cloud.iter() {
        let col = (p.x / spec.grid_resolution).floor() as usize;
        let row = (p.y / spec.grid_resolution).floor() as usize;
        if col < width && row < height {
            counts[row * width + col][p.label.code() as usize] += 1;
        }
    }
    let threshold = spec.mapping.threshold_log_odds();
    for row in 0..height {
        for col in 0..width {
            let [n_free, n_pass, n_unpass] = counts[row * width + col];
            if n_pass + n_free > 0 {
                let p = measurement_probability(
                    MeasurementCounts { n_stone: n_pass, n_environment: n_free },
                    &spec.mapping,
                );
                let state = if log_odds_of(p) > threshold {
                    CellState::Occupied
                } else {
                    CellState::Free
                };
                passable.set(col, row, state);
            }
            if n_unpass + n_free > 0 {
                let p = measurement_probability(
                    MeasurementCounts { n_stone: n_unpass, n_environment: n_free },
                    &spec.mapping,
                );
                let state = if log_odds_of(p) > threshold {
                    CellState::Occupied
                } else {
                    CellState::Free
                };
                unpassable.set(col, row, state);
            }
        }
    }
    (passable, unpassable)
}

// ---------------------------------------------------------------------------
// Scenario text format: one `key = value` per line, `#` comments, nested
// sections through dotted keys.
// ---------------------------------------------------------------------------

impl ScenarioSpec {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let kv = |out: &mut String, k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv(&mut out, "scenario.name", self.name.clone());
        kv(&mut out, "scenario.seed", self.rng_seed.to_string());
        kv(&mut out, "map.extent_x", self.extent_x.to_string());
        kv(&mut out, "map.extent_y", self.extent_y.to_string());
        kv(&mut out, "map.resolution", self.grid_resolution.to_string());
        kv(
            &mut out,
            "map.terrain",
            match self.terrain {
                TerrainKind::Flat => "flat".into(),
                TerrainKind::Heightfield => "heightfield".into(),
            },
        );
        kv(&mut out, "map.amplitude", self.amplitude.to_string());
        kv(&mut out, "stones.passable", self.n_passable.to_string());
        kv(&mut out, "stones.unpassable", self.n_unpassable.to_string());
        let range = |r: SizeRange| format!("{} {}", r.min, r.max);
        kv(&mut out, "stones.passable_half_width", range(self.passable_sizes.half_width));
        kv(&mut out, "stones.passable_half_length", range(self.passable_sizes.half_length));
        kv(&mut out, "stones.passable_height", range(self.passable_sizes.height));
        kv(&mut out, "stones.unpassable_half_width", range(self.unpassable_sizes.half_width));
        kv(&mut out, "stones.unpassable_half_length", range(self.unpassable_sizes.half_length));
        kv(&mut out, "stones.unpassable_height", range(self.unpassable_sizes.height));
        kv(
            &mut out,
            "mission.mode",
            match self.mission_mode {
                MissionMode::Sequential => "sequential".into(),
                MissionMode::Radial => "radial".into(),
            },
        );
        kv(&mut out, "mission.start", format!("{} {}", self.start.x, self.start.y));
        for (name, goal) in &self.goals {
            kv(&mut out, &format!("mission.goal.{name}"), format!("{} {}", goal.x, goal.y));
        }
        kv(&mut out, "rrt.max_iterations", self.rrt.max_iterations.to_string());
        kv(&mut out, "rrt.step_size", self.rrt.step_size.to_string());
        kv(&mut out, "rrt.goal_bias", self.rrt.goal_bias.to_string());
        kv(&mut out, "rrt.rewire_radius", self.rrt.rewire_radius.to_string());
        kv(&mut out, "mapping.p", self.mapping.p.to_string());
        kv(&mut out, "mapping.occupied_threshold", self.mapping.occupied_threshold.to_string());
        kv(&mut out, "mapping.clamp_epsilon", self.mapping.p_clamp_epsilon.to_string());
        if let Some(poa) = &self.poa {
            kv(&mut out, "poa.n_skip", poa.n_skip.to_string());
            kv(&mut out, "poa.n_clear", poa.n_clear.to_string());
            kv(&mut out, "poa.shift_min", poa.shift_min.to_string());
            kv(&mut out, "poa.shift_max", poa.shift_max.to_string());
            kv(&mut out, "poa.shift_step", poa.shift_step.to_string());
            kv(&mut out, "poa.turn_radius", poa.turn_radius.to_string());
        }
        out
    }

    pub fn from_text(text: &str) -> Result<ScenarioSpec, ScenarioError> {
        let mut spec = ScenarioSpec::base("unnamed", 0);
        spec.goals.clear();
        let mut poa = PoaParams::default();
        let mut has_poa = false;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| ScenarioError::Parse {
                line: lineno + 1,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err("expected `key = value`".to_string()))?;
            let key = key.trim();
            let value = value.trim();
            let parse_f64 = |v: &str, what: &str| -> Result<f64, ScenarioError> {
                v.parse()
                    .map_err(|_| err(format!("bad number for {what}: `{v}`")))
            };
            let parse_usize = |v: &str, what: &str| -> Result<usize, ScenarioError> {
                v.parse()
                    .map_err(|_| err(format!("bad integer for {what}: `{v}`")))
            };
            let parse_pair = |v: &str, what: &str| -> Result<(f64, f64), ScenarioError> {
                let mut it = v.split_whitespace();
                let a = it
                    .next()
                    .ok_or_else(|| err(format!("{what} needs two numbers")))?;
                let b = it
                    .next()
                    .ok_or_else(|| err(format!("{what} needs two numbers")))?;
                if it.next().is_some() {
                    return Err(err(format!("{what} needs exactly two numbers")));
                }
                Ok((parse_f64(a, what)?, parse_f64(b, what)?))
            };
            match key {
                "scenario.name" => spec.name = value.to_string(),
                "scenario.seed" => {
                    spec.rng_seed = value
                        .parse()
                        .map_err(|_| err(format!("bad seed `{value}`")))?
                }
                "map.extent_x" => spec.extent_x = parse_f64(value, key)?,
                "map.extent_y" => spec.extent_y = parse_f64(value, key)?,
                "map.resolution" => spec.grid_resolution = parse_f64(value, key)?,
                "map.terrain" => {
                    spec.terrain = match value {
                        "flat" => TerrainKind::Flat,
                        "heightfield" => TerrainKind::Heightfield,
                        other => return Err(err(format!("unknown terrain `{other}`"))),
                    }
                }
                "map.amplitude" => spec.amplitude = parse_f64(value, key)?,
                "stones.passable" => spec.n_passable = parse_usize(value, key)?,
                "stones.unpassable" => spec.n_unpassable = parse_usize(value, key)?,
                "stones.passable_half_width" => {
                    let (min, max) = parse_pair(value, key)?;
                    spec.passable_sizes.half_width = SizeRange { min, max };
                }
                "stones.passable_half_length" => {
                    let (min, max) = parse_pair(value, key)?;
                    spec.passable_sizes.half_length = SizeRange { min, max };
                }
                "stones.passable_height" => {
                    let (min, max) = parse_pair(value, key)?;
                    spec.passable_sizes.height = SizeRange { min, max };
                }
                "stones.unpassable_half_width" => {
                    let (min, max) = parse_pair(value, key)?;
                    spec.unpassable_sizes.half_width = SizeRange { min, max };
                }
                "stones.unpassable_half_length" => {
                    let (min, max) = parse_pair(value, key)?;
                    spec.unpassable_sizes.half_length = SizeRange { min, max };
                }
                "stones.unpassable_height" => {
                    let (min, max) = parse_pair(value, key)?;
                    spec.unpassable_sizes.height = SizeRange { min, max };
                }
                "mission.mode" => {
                    spec.mission_mode = match value {
                        "sequential" => MissionMode::Sequential,
                        "radial" => MissionMode::Radial,
                        other => return Err(err(format!("unknown mission mode `{other}`"))),
                    }
                }
                "mission.start" => {
                    let (x, y) = parse_pair(value, key)?;
                    spec.start = Pose2D::new(x, y, 0.0);
                }
                _ if key.starts_with("mission.goal.") => {
                    let name = key.trim_start_matches("mission.goal.");
                    if name.is_empty() {
                        return Err(err("goal key needs a name".to_string()));
                    }
                    let (x, y) = parse_pair(value, key)?;
                    spec.goals.push((name.to_string(), Pose2D::new(x, y, 0.0)));
                }
                "rrt.max_iterations" => spec.rrt.max_iterations = parse_usize(value, key)?,
                "rrt.step_size" => spec.rrt.step_size = parse_f64(value, key)?,
                "rrt.goal_bias" => spec.rrt.goal_bias = parse_f64(value, key)?,
                "rrt.rewire_radius" => spec.rrt.rewire_radius = parse_f64(value, key)?,
                "mapping.p" => spec.mapping.p = parse_f64(value, key)?,
                "mapping.occupied_threshold" => {
                    spec.mapping.occupied_threshold = parse_f64(value, key)?
                }
                "mapping.clamp_epsilon" => spec.mapping.p_clamp_epsilon = parse_f64(value, key)?,
                "poa.n_skip" => {
                    poa.n_skip = parse_usize(value, key)?;
                    has_poa = true;
                }
                "poa.n_clear" => {
                    poa.n_clear = parse_usize(value, key)?;
                    has_poa = true;
                }
                "poa.shift_min" => {
                    poa.shift_min = parse_f64(value, key)?;
                    has_poa = true;
                }
                "poa.shift_max" => {
                    poa.shift_max = parse_f64(value, key)?;
                    has_poa = true;
                }
                "poa.shift_step" => {
                    poa.shift_step = parse_f64(value, key)?;
                    has_poa = true;
                }
                "poa.turn_radius" => {
                    poa.turn_radius = parse_f64(value, key)?;
                    has_poa = true;
                }
                other => return Err(err(format!("unknown key `{other}`"))),
            }
        }
        if has_poa {
            spec.poa = Some(poa);
        }
        if spec.goals.is_empty() {
            spec.goals = ScenarioSpec::base("", 0).goals;
        }
        Ok(spec)
    }
}
