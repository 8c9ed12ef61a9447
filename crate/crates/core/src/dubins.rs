//! Shortest curvature-bounded forward paths between oriented poses.
//!
//! Each candidate is one of the six words LSL, RSR, LSR, RSL, RLR, LRL; the
//! planner evaluates the closed form of every word that admits a solution
//! and keeps the shortest, breaking ties by the fixed word order above.

use std::f64::consts::TAU;

use thiserror::Error;

use crate::geometry::Pose2D;

#[derive(Debug, Error, PartialEq)]
pub enum DubinsError {
    #[error("turn radius must be positive, got {0}")]
    InvalidRadius(f64),
    #[error("no word admits a solution")]
    NoSolution,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentKind {
    Left,
    Straight,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum DubinsWord {
    Lsl,
    Rsr,
    Lsr,
    Rsl,
    Rlr,
    Lrl,
}

impl DubinsWord {
    pub const ALL: [DubinsWord; 6] = [
        DubinsWord::Lsl,
        DubinsWord::Rsr,
        DubinsWord::Lsr,
        DubinsWord::Rsl,
        DubinsWord::Rlr,
        DubinsWord::Lrl,
    ];

    pub fn segments(self) -> [SegmentKind; 3] {
        use SegmentKind::*;
        match self {
            DubinsWord::Lsl => [Left, Straight, Left],
            DubinsWord::Rsr => [Right, Straight, Right],
            DubinsWord::Lsr => [Left, Straight, Right],
            DubinsWord::Rsl => [Right, Straight, Left],
            DubinsWord::Rlr => [Right, Left, Right],
            DubinsWord::Lrl => [Left, Right, Left],
        }
    }
}

/// A solved Dubins path anchored at `start`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DubinsPath {
    pub word: DubinsWord,
    /// Metric length of each of the three segments.
    pub segment_lengths: [f64; 3],
    pub turn_radius: f64,
    pub start: Pose2D,
}

impl DubinsPath {
    pub fn length(&self) -> f64 {
        self.segment_lengths.iter().sum()
    }

    /// Pose after travelling `s` metres along the path (clamped to the ends).
    pub fn pose_at(&self, s: f64) -> Pose2D {
        let mut remaining = s.clamp(0.0, self.length()) / self.turn_radius;
        let mut pose = Normalized {
            x: 0.0,
            y: 0.0,
            theta: self.start.theta,
        };
        for (kind, len) in self.word.segments().into_iter().zip(self.segment_lengths) {
            let seg = len / self.turn_radius;
            let step = remaining.min(seg);
            pose = pose.propagate(kind, step);
            remaining -= step;
            if remaining <= 0.0 {
                break;
            }
        }
        Pose2D::new(
            self.start.x + pose.x * self.turn_radius,
            self.start.y + pose.y * self.turn_radius,
            pose.theta,
        )
    }

    pub fn endpoint(&self) -> Pose2D {
        self.pose_at(self.length())
    }

    /// Poses at arc-length intervals of at most `step`, including both ends.
    pub fn sample(&self, step: f64) -> Vec<Pose2D> {
        assert!(step > 0.0, "sample step must be positive");
        let length = self.length();
        if length == 0.0 {
            return vec![self.start];
        }
        let n = (length / step).ceil() as usize;
        (0..=n)
            .map(|i| self.pose_at(length * i as f64 / n as f64))
            .collect()
    }
}

#[derive(Clone, Copy)]
struct Normalized {
    x: f64,
    y: f64,
    theta: f64,
}

impl Normalized {
    fn propagate(self, kind: SegmentKind, t: f64) -> Normalized {
        match kind {
            SegmentKind::Left => Normalized {
                x: self.x + (self.theta + t).sin() - self.theta.sin(),
                y: self.y - (self.theta + t).cos() + self.theta.cos(),
                theta: self.theta + t,
            },
            SegmentKind::Right => Normalized {
                x: self.x - (self.theta - t).sin() + self.theta.sin(),
                y: self.y + (self.theta - t).cos() - self.theta.cos(),
                theta: self.theta - t,
            },
            SegmentKind::Straight => Normalized {
                x: self.x + self.theta.cos() * t,
                y: self.y + self.theta.sin() * t,
                theta: self.theta,
            },
        }
    }
}

fn mod2pi(theta: f64) -> f64 {
    theta.rem_euclid(TAU)
}

/// Segment lengths (in turn-radius units) for one word, if it has a solution.
fn solve_word(word: DubinsWord, alpha: f64, beta: f64, d: f64) -> Option<[f64; 3]> {
    let (sa, ca) = alpha.sin_cos();
    let (sb, cb) = beta.sin_cos();
    let c_ab = (alpha - beta).cos();
    match word {
        DubinsWord::Lsl => {
            let p_sq = 2.0 + d * d - 2.0 * c_ab + 2.0 * d * (sa - sb);
            if p_sq < 0.0 {
                return None;
            }
            let tmp = (cb - ca).atan2(d + sa - sb);
            Some([mod2pi(tmp - alpha), p_sq.sqrt(), mod2pi(beta - tmp)])
        }
        DubinsWord::Rsr => {
            let p_sq = 2.0 + d * d - 2.0 * c_ab + 2.0 * d * (sb - sa);
            if p_sq < 0.0 {
                return None;
            }
            let tmp = (ca - cb).atan2(d - sa + sb);
            Some([mod2pi(alpha - tmp), p_sq.sqrt(), mod2pi(tmp - beta)])
        }
        DubinsWord::Lsr => {
            let p_sq = -2.0 + d * d + 2.0 * c_ab + 2.0 * d * (sa + sb);
            if p_sq < 0.0 {
                return None;
            }
            let p = p_sq.sqrt();
            let tmp = (-ca - cb).atan2(d + sa + sb) - (-2.0f64).atan2(p);
            Some([mod2pi(tmp - alpha), p, mod2pi(tmp - mod2pi(beta))])
        }
        DubinsWord::Rsl => {
            let p_sq = d * d - 2.0 + 2.0 * c_ab - 2.0 * d * (sa + sb);
            if p_sq < 0.0 {
                return None;
            }
            let p = p_sq.sqrt();
            let tmp = (ca + cb).atan2(d - sa - sb) - (2.0f64).atan2(p);
            Some([mod2pi(alpha - tmp), p, mod2pi(beta - tmp)])
        }
        DubinsWord::Rlr => {
            let tmp = (6.0 - d * d + 2.0 * c_ab + 2.0 * d * (sa - sb)) / 8.0;
            if tmp.abs() > 1.0 {
                return None;
            }
            let p = mod2pi(TAU - tmp.acos());
            let t = mod2pi(alpha - (ca - cb).atan2(d - sa + sb) + mod2pi(p / 2.0));
            Some([t, p, mod2pi(alpha - beta - t + mod2pi(p))])
        }
        DubinsWord::Lrl => {
            let tmp = (6.0 - d * d + 2.0 * c_ab + 2.0 * d * (sb - sa)) / 8.0;
            if tmp.abs() > 1.0 {
                return None;
            }
            let p = mod2pi(TAU - tmp.acos());
            let t = mod2pi(-alpha - (ca - cb).atan2(d + sa - sb) + p / 2.0);
            Some([t, p, mod2pi(mod2pi(beta) - alpha - t + mod2pi(p))])
        }
    }
}

/// Shortest Dubins path between two oriented poses. Identical poses yield a
/// zero-length path.
pub fn dubins_shortest(start: Pose2D, goal: Pose2D, turn_radius: f64) -> Result<DubinsPath, DubinsError> {
    if !(turn_radius > 0.0) {
        return Err(DubinsError::InvalidRadius(turn_radius));
    }
    if start == goal {
        return Ok(DubinsPath {
            word: DubinsWord::Lsl,
            segment_lengths: [0.0; 3],
            turn_radius,
            start,
        });
    }
    let dx = goal.x - start.x;
    let dy = goal.y - start.y;
    let big_d = dx.hypot(dy);
    let d = big_d / turn_radius;
    let theta = if big_d > 0.0 { dy.atan2(dx) } else { 0.0 };
    let alpha = mod2pi(start.theta - theta);
    let beta = mod2pi(goal.theta - theta);

    let mut best: Option<DubinsPath> = None;
    for word in DubinsWord::ALL {
        if let Some(lengths) = solve_word(word, alpha, beta, d) {
            let candidate = DubinsPath {
                word,
                segment_lengths: lengths.map(|l| l * turn_radius),
                turn_radius,
                start,
            };
            if best.as_ref().is_none_or(|b| candidate.length() < b.length()) {
                best = Some(candidate);
            }
        }
    }
    best.ok_or(DubinsError::NoSolution)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn pose_close(a: Pose2D, b: Pose2D, pos_tol: f64, ang_tol: f64) -> bool {
        a.position_distance(&b) < pos_tol
            && crate::geometry::normalize_angle(a.theta - b.theta).abs() < ang_tol
    }

    #[test]
    fn collinear_aligned_poses_take_the_straight() {
        let p = dubins_shortest(Pose2D::new(0.0, 0.0, 0.0), Pose2D::new(10.0, 0.0, 0.0), 1.0).unwrap();
        assert!((p.length() - 10.0).abs() < 1e-9);
        assert_eq!(p.word, DubinsWord::Lsl);
    }

    #[test]
    fn identical_poses_give_zero_length() {
        let q = Pose2D::new(1.0, 2.0, 0.5);
        let p = dubins_shortest(q, q, 1.0).unwrap();
        assert_eq!(p.length(), 0.0);
        assert_eq!(p.sample(0.5), vec![q]);
    }

    #[test]
    fn u_turn_is_a_semicircle() {
        let p = dubins_shortest(Pose2D::new(0.0, 0.0, 0.0), Pose2D::new(0.0, 2.0, PI), 1.0).unwrap();
        assert!((p.length() - PI).abs() < 1e-9, "length {}", p.length());
        assert_eq!(p.word, DubinsWord::Lsl);
        // Every sample of the turn stays on the unit circle about (0, 1).
        for pose in p.sample(0.1) {
            let r = pose.x.hypot(pose.y - 1.0);
            assert!((r - 1.0).abs() < 1e-9, "sample off the turn circle: r={r}");
        }
    }

    #[test]
    fn invalid_radius_is_rejected() {
        assert_eq!(
            dubins_shortest(Pose2D::new(0.0, 0.0, 0.0), Pose2D::new(1.0, 0.0, 0.0), 0.0),
            Err(DubinsError::InvalidRadius(0.0))
        );
    }

    #[test]
    fn straight_path_samples_uniformly() {
        let p = dubins_shortest(Pose2D::new(0.0, 0.0, 0.0), Pose2D::new(10.0, 0.0, 0.0), 1.0).unwrap();
        let samples = p.sample(0.5);
        assert_eq!(samples.len(), 21);
        for (i, s) in samples.iter().enumerate() {
            assert!((s.x - 0.5 * i as f64).abs() < 1e-9);
            assert!(s.y.abs() < 1e-9);
        }
    }

    #[test]
    fn endpoint_reconstruction_on_random_pairs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let start = Pose2D::new(
                rng.gen_range(-10.0..10.0),
                rng.gen_range(-10.0..10.0),
                rng.gen_range(-PI..PI),
            );
            let goal = Pose2D::new(
                rng.gen_range(-10.0..10.0),
                rng.gen_range(-10.0..10.0),
                rng.gen_range(-PI..PI),
            );
            let path = dubins_shortest(start, goal, 0.4).unwrap();
            assert!(
                pose_close(path.endpoint(), goal, 1e-6, 1e-6),
                "endpoint {:?} != goal {:?} ({:?})",
                path.endpoint(),
                goal,
                path.word
            );
            assert!(path.length() + 1e-9 >= start.position_distance(&goal));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn length_is_invariant_under_rigid_motion(
            sx in -5.0f64..5.0, sy in -5.0f64..5.0, st in -PI..PI,
            gx in -5.0f64..5.0, gy in -5.0f64..5.0, gt in -PI..PI,
            tx in -3.0f64..3.0, ty in -3.0f64..3.0, rot in -PI..PI,
        ) {
            let start = Pose2D::new(sx, sy, st);
            let goal = Pose2D::new(gx, gy, gt);
            let transform = |p: Pose2D| {
                Pose2D::new(
                    rot.cos() * p.x - rot.sin() * p.y + tx,
                    rot.sin() * p.x + rot.cos() * p.y + ty,
                    p.theta + rot,
                )
            };
            let a = dubins_shortest(start, goal, 0.7).unwrap();
            let b = dubins_shortest(transform(start), transform(goal), 0.7).unwrap();
            prop_assert!((a.length() - b.length()).abs() < 1e-9,
                "{} vs {}", a.length(), b.length());
        }

        #[test]
        fn sampled_poses_follow_the_tangent(
            gx in -6.0f64..6.0, gy in -6.0f64..6.0, gt in -PI..PI,
        ) {
            let start = Pose2D::new(0.0, 0.0, 0.0);
            let goal = Pose2D::new(gx, gy, gt);
            prop_assume!(start.position_distance(&goal) > 1e-6);
            let path = dubins_shortest(start, goal, 0.5).unwrap();
            let samples = path.sample(0.01);
            for w in samples.windows(2) {
                let dx = w[1].x - w[0].x;
                let dy = w[1].y - w[0].y;
                if dx.hypot(dy) < 1e-12 {
                    continue;
                }
                let dir = dy.atan2(dx);
                let mid = crate::geometry::normalize_angle((w[0].theta + crate::geometry::normalize_angle(w[1].theta - w[0].theta) / 2.0) - dir).abs();
                prop_assert!(mid < 0.02, "heading deviates from tangent by {mid}");
            }
        }
    }
}
