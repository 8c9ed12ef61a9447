//! Thin-plate-spline surface over scattered (x, y, z) samples.
//!
//! The interpolant is `f(x) = sum_i w_i * U(|x - c_i|) + a0 + a1*x + a2*y`
//! with the kernel `U(r) = r^2 ln r`. A small diagonal smoothing term keeps
//! the system well conditioned and tolerates noisy samples; affine data is
//! reproduced exactly by the polynomial part regardless of smoothing.

use nalgebra::{DMatrix, DVector};

/// Kernel value; zero at r = 0 by continuity.
fn tps_kernel(r_sq: f64) -> f64 {
    if r_sq <= 0.0 {
        0.0
    } else {
        // r^2 * ln(r) = r_sq * ln(r_sq) / 2
        0.5 * r_sq * r_sq.ln()
    }
}

#[derive(Debug, Clone)]
pub struct ThinPlateSpline {
    centers: Vec<[f64; 2]>,
    weights: Vec<f64>,
    affine: [f64; 3],
}

impl ThinPlateSpline {
    /// Fit the spline through `points` with the given smoothing parameter.
    /// Returns `None` when the system is singular (fewer than three
    /// non-collinear centres).
    pub fn fit(points: &[[f64; 3]], smoothing: f64) -> Option<ThinPlateSpline> {
        let n = points.len();
        if n < 3 {
            return None;
        }
        let dim = n + 3;
        let mut a = DMatrix::<f64>::zeros(dim, dim);
        let mut b = DVector::<f64>::zeros(dim);
        for i in 0..n {
            for j in 0..n {
                let dx = points[i][0] - points[j][0];
                let dy = points[i][1] - points[j][1];
                a[(i, j)] = tps_kernel(dx * dx + dy * dy);
            }
            a[(i, i)] += smoothing;
            a[(i, n)] = 1.0;
            a[(i, n + 1)] = points[i][0];
            a[(i, n + 2)] = points[i][1];
            a[(n, i)] = 1.0;
            a[(n + 1, i)] = points[i][0];
            a[(n + 2, i)] = points[i][1];
            b[i] = points[i][2];
        }
        let solution = a.lu().solve(&b)?;
        Some(ThinPlateSpline {
            centers: points.iter().map(|p| [p[0], p[1]]).collect(),
            weights: solution.as_slice()[..n].to_vec(),
            affine: [solution[n], solution[n + 1], solution[n + 2]],
        })
    }

    pub fn center_count(&self) -> usize {
        self.centers.len()
    }

    /// Surface height at a point. Defined everywhere; extrapolates smoothly
    /// outside the hull of the centres.
    pub fn height(&self, x: f64, y: f64) -> f64 {
        let mut value = self.affine[0] + self.affine[1] * x + self.affine[2] * y;
        for (c, w) in self.centers.iter().zip(&self.weights) {
            let dx = x - c[0];
            let dy = y - c[1];
            value += w * tps_kernel(dx * dx + dy * dy);
        }
        value
    }
}
