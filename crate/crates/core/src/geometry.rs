//! Shared domain types: poses, robot geometry, ellipses, and the
//! geometric predicates used by the planners.

use std::f64::consts::{PI, TAU};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("invalid robot geometry: {0}")]
    InvalidGeometry(String),
}

/// Wrap an angle to the half-open interval (-pi, pi].
pub fn normalize_angle(theta: f64) -> f64 {
    let a = theta.rem_euclid(TAU);
    if a > PI {
        a - TAU
    } else {
        a
    }
}

/// Planar robot pose. `theta` is always normalized to (-pi, pi].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose2D {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose2D {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self {
            x,
            y,
            theta: normalize_angle(theta),
        }
    }

    pub fn position_distance(&self, other: &Pose2D) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Unit vector along the heading.
    pub fn heading_vector(&self) -> (f64, f64) {
        (self.theta.cos(), self.theta.sin())
    }

    /// Unit vector pointing to the robot's left (heading rotated +90 degrees).
    pub fn lateral_vector(&self) -> (f64, f64) {
        (-self.theta.sin(), self.theta.cos())
    }

    /// Translate `distance` metres along the lateral (left) axis while
    /// keeping the heading.
    pub fn shifted_lateral(&self, distance: f64) -> Pose2D {
        let (lx, ly) = self.lateral_vector();
        Pose2D::new(self.x + distance * lx, self.y + distance * ly, self.theta)
    }
}

/// Spatial pose with attitude. All angles normalized to (-pi, pi].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose3D {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub yaw: f64,
    pub pitch: f64,
    pub roll: f64,
}

impl Pose3D {
    pub fn new(x: f64, y: f64, z: f64, yaw: f64, pitch: f64, roll: f64) -> Self {
        Self {
            x,
            y,
            z,
            yaw: normalize_angle(yaw),
            pitch: normalize_angle(pitch),
            roll: normalize_angle(roll),
        }
    }
}

/// Axis lengths and clearances of the two-wheeled platform.
///
/// The wheel collision zones are ellipses with semi-major axis
/// `wheel_ellipse_a` along the heading and semi-minor `wheel_ellipse_b`
/// across it, centred `track_width / 2` to each side of the body.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobotGeometry {
    pub track_width: f64,
    pub wheel_ellipse_a: f64,
    pub wheel_ellipse_b: f64,
    pub clearance_height: f64,
    pub clearance_width: f64,
    pub turn_radius_min: f64,
    pub wheel_base_contact: f64,
}

impl RobotGeometry {
    pub fn new(
        track_width: f64,
        wheel_ellipse_a: f64,
        wheel_ellipse_b: f64,
        clearance_height: f64,
        clearance_width: f64,
        turn_radius_min: f64,
        wheel_base_contact: f64,
    ) -> Result<Self, GeometryError> {
        let geom = Self {
            track_width,
            wheel_ellipse_a,
            wheel_ellipse_b,
            clearance_height,
            clearance_width,
            turn_radius_min,
            wheel_base_contact,
        };
        geom.validate()?;
        Ok(geom)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        let fields = [
            ("track_width", self.track_width),
            ("wheel_ellipse_a", self.wheel_ellipse_a),
            ("wheel_ellipse_b", self.wheel_ellipse_b),
            ("clearance_height", self.clearance_height),
            ("clearance_width", self.clearance_width),
            ("turn_radius_min", self.turn_radius_min),
            ("wheel_base_contact", self.wheel_base_contact),
        ];
        for (name, value) in fields {
            if !(value > 0.0) {
                return Err(GeometryError::InvalidGeometry(format!(
                    "{name} must be positive, got {value}"
                )));
            }
        }
        let corridor = self.track_width - 2.0 * self.wheel_ellipse_b;
        if self.clearance_width >= corridor {
            return Err(GeometryError::InvalidGeometry(format!(
                "clearance_width {} does not fit between the wheel ellipses (corridor {})",
                self.clearance_width, corridor
            )));
        }
        Ok(())
    }

    /// Half-width of the platform measured to the outer wheel edge.
    pub fn half_width(&self) -> f64 {
        self.track_width / 2.0 + self.wheel_ellipse_b
    }
}

impl Default for RobotGeometry {
    /// Prototype dimensions used by the scenario generator: 28 cm clearance
    /// height, 26 cm clearance width, 0.60 m track.
    fn default() -> Self {
        Self {
            track_width: 0.60,
            wheel_ellipse_a: 0.30,
            wheel_ellipse_b: 0.12,
            clearance_height: 0.28,
            clearance_width: 0.26,
            turn_radius_min: 0.40,
            wheel_base_contact: 0.30,
        }
    }
}

/// Oriented ellipse in the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ellipse2D {
    pub center_x: f64,
    pub center_y: f64,
    pub semi_major: f64,
    pub semi_minor: f64,
    pub orientation: f64,
}

impl Ellipse2D {
    pub fn new(
        center_x: f64,
        center_y: f64,
        semi_major: f64,
        semi_minor: f64,
        orientation: f64,
    ) -> Self {
        debug_assert!(semi_major >= semi_minor && semi_minor > 0.0);
        Self {
            center_x,
            center_y,
            semi_major,
            semi_minor,
            orientation: normalize_angle(orientation),
        }
    }

    /// Value of the implicit equation at a point: <= 1 means inside or on.
    pub fn implicit(&self, x: f64, y: f64) -> f64 {
        let dx = x - self.center_x;
        let dy = y - self.center_y;
        let cos = self.orientation.cos();
        let sin = self.orientation.sin();
        let u = dx * cos + dy * sin;
        let v = -dx * sin + dy * cos;
        (u / self.semi_major).powi(2) + (v / self.semi_minor).powi(2)
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.implicit(x, y) <= 1.0
    }

    /// Exact overlap test against an axis-aligned rectangle.
    ///
    /// The rectangle is mapped into the frame where the ellipse becomes the
    /// unit circle; there it is a parallelogram and the test reduces to
    /// "distance from origin to the parallelogram <= 1".
    pub fn overlaps_rect(&self, min_x: f64, min_y: f64, max_x: f64, max_y: f64) -> bool {
        let cos = self.orientation.cos();
        let sin = self.orientation.sin();
        let map = |x: f64, y: f64| -> (f64, f64) {
            let dx = x - self.center_x;
            let dy = y - self.center_y;
            let u = dx * cos + dy * sin;
            let v = -dx * sin + dy * cos;
            (u / self.semi_major, v / self.semi_minor)
        };
        let quad = [
            map(min_x, min_y),
            map(max_x, min_y),
            map(max_x, max_y),
            map(min_x, max_y),
        ];
        if point_in_convex_quad((0.0, 0.0), &quad) {
            return true;
        }
        let mut best = f64::INFINITY;
        for i in 0..4 {
            let a = quad[i];
            let b = quad[(i + 1) % 4];
            best = best.min(point_segment_distance((0.0, 0.0), a, b));
        }
        best <= 1.0
    }
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

fn point_in_convex_quad(p: (f64, f64), quad: &[(f64, f64); 4]) -> bool {
    let mut pos = false;
    let mut neg = false;
    for i in 0..4 {
        let c = cross(quad[i], quad[(i + 1) % 4], p);
        if c > 0.0 {
            pos = true;
        }
        if c < 0.0 {
            neg = true;
        }
    }
    !(pos && neg)
}

fn point_segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let abx = b.0 - a.0;
    let aby = b.1 - a.1;
    let apx = p.0 - a.0;
    let apy = p.1 - a.1;
    let len_sq = abx * abx + aby * aby;
    let t = if len_sq > 0.0 {
        ((apx * abx + apy * aby) / len_sq).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let cx = a.0 + t * abx;
    let cy = a.1 + t * aby;
    (p.0 - cx).hypot(p.1 - cy)
}
