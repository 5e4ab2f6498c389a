//! Euclidean projections onto the feasible sets used by the test problems.
//!
//! All sets here are nonempty, closed, convex and compact, so the projection
//! is unique. The projection-theorem property actually consumed by the
//! convergence proofs — projecting does not increase the distance to any
//! member — is exposed to the test suite through these functions.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::Vector;

/// A compact convex feasible set.
#[derive(Debug, Clone, PartialEq)]
pub enum FeasibleSet {
    /// Euclidean ball `{x : |x - center| <= radius}`.
    Ball { center: Vector, radius: f64 },
    /// Axis-aligned box `{x : lo <= x <= hi}` componentwise.
    Box { lo: Vector, hi: Vector },
    /// Scaled probability simplex `{x : x >= 0, sum(x) = scale}`.
    Simplex { dim: usize, scale: f64 },
}

fn check_finite(v: &Vector, what: &'static str) -> Result<()> {
    if v.iter().all(|c| c.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { what })
    }
}

impl FeasibleSet {
    pub fn ball(center: Vector, radius: f64) -> Result<Self> {
        check_finite(&center, "ball center")?;
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::invalid(
                "radius",
                format!("must be positive, got {radius}"),
            ));
        }
        Ok(FeasibleSet::Ball { center, radius })
    }

    pub fn box_bounds(lo: Vector, hi: Vector) -> Result<Self> {
        check_finite(&lo, "box lower bound")?;
        check_finite(&hi, "box upper bound")?;
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                expected: lo.len(),
                got: hi.len(),
            });
        }
        if lo.is_empty() {
            return Err(Error::invalid("box", "dimension must be positive"));
        }
        if lo.iter().zip(hi.iter()).any(|(a, b)| a > b) {
            return Err(Error::invalid("box", "lo > hi in some coordinate"));
        }
        Ok(FeasibleSet::Box { lo, hi })
    }

    /// Box with the same bounds in every coordinate.
    pub fn uniform_box(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::box_bounds(Vector::from_element(dim, lo), Vector::from_element(dim, hi))
    }

    pub fn simplex(dim: usize, scale: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("simplex", "dimension must be positive"));
        }
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::invalid(
                "scale",
                format!("must be positive, got {scale}"),
            ));
        }
        Ok(FeasibleSet::Simplex { dim, scale })
    }

    pub fn dimension(&self) -> usize {
        match self {
            FeasibleSet::Ball { center, .. } => center.len(),
            FeasibleSet::Box { lo, .. } => lo.len(),
            FeasibleSet::Simplex { dim, .. } => *dim,
        }
    }

    fn check_dim(&self, v: &Vector) -> Result<()> {
        if v.len() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                got: v.len(),
            });
        }
        Ok(())
    }

    /// Euclidean projection of `y` onto the set. Members are returned
    /// unchanged.
    pub fn project(&self, y: &Vector) -> Result<Vector> {
        self.check_dim(y)?;
        check_finite(y, "projection input")?;
        Ok(match self {
            FeasibleSet::Ball { center, radius } => {
                let diff = y - center;
                let norm = diff.norm();
                if norm <= *radius {
                    y.clone()
                } else {
                    center + diff * (*radius / norm)
                }
            }
            FeasibleSet::Box { lo, hi } => {
                Vector::from_fn(y.len(), |i, _| y[i].max(lo[i]).min(hi[i]))
            }
            FeasibleSet::Simplex { scale, .. } => simplex_project(y, *scale),
        })
    }

    /// Worst constraint violation of `x`: nonpositive for members, positive
    /// outside, `+inf` on a dimension mismatch.
    pub fn violation(&self, x: &Vector) -> f64 {
        if x.len() != self.dimension() {
            return f64::INFINITY;
        }
        match self {
            FeasibleSet::Ball { center, radius } => (x - center).norm() - radius,
            FeasibleSet::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi.iter()))
                .map(|(&v, (&a, &b))| (a - v).max(v - b))
                .fold(f64::NEG_INFINITY, f64::max),
            FeasibleSet::Simplex { scale, .. } => {
                let negativity = x.iter().map(|&v| -v).fold(f64::NEG_INFINITY, f64::max);
                negativity.max((x.sum() - scale).abs())
            }
        }
    }

    /// `true` iff `x` violates no constraint of the set by more than `tol`.
    /// A dimension mismatch is reported as non-membership.
    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        self.violation(x) <= tol
    }

    /// Strict (relative) interior test, used to certify constructed optima.
    pub fn is_interior(&self, x: &Vector) -> bool {
        if x.len() != self.dimension() {
            return false;
        }
        match self {
            FeasibleSet::Ball { center, radius } => (x - center).norm() < *radius,
            FeasibleSet::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi.iter()))
                .all(|(&v, (&a, &b))| v > a && v < b),
            FeasibleSet::Simplex { scale, .. } => {
                x.iter().all(|&v| v > 0.0) && (x.sum() - scale).abs() <= 1e-9 * scale
            }
        }
    }

    /// A canonical point in the (relative) interior: ball center, box
    /// midpoint, simplex barycenter.
    pub fn interior_point(&self) -> Vector {
        match self {
            FeasibleSet::Ball { center, .. } => center.clone(),
            FeasibleSet::Box { lo, hi } => Vector::from_fn(lo.len(), |i, _| 0.5 * (lo[i] + hi[i])),
            FeasibleSet::Simplex { dim, scale } => Vector::from_element(*dim, scale / *dim as f64),
        }
    }

    /// Radius of the smallest ball centered at `x_star` containing the set:
    /// the farthest-point distance, computed in closed form per set kind.
    pub fn radius_bound(&self, x_star: &Vector) -> Result<f64> {
        self.check_dim(x_star)?;
        if !self.contains(x_star, 1e-9) {
            return Err(Error::invalid("x_star", "not a member of the feasible set"));
        }
        Ok(match self {
            FeasibleSet::Ball { center, radius } => (center - x_star).norm() + radius,
            FeasibleSet::Box { lo, hi } => {
                // farthest corner: per coordinate the larger of the two
                // distances to the faces
                let mut ssq = 0.0;
                for i in 0..lo.len() {
                    let d = (x_star[i] - lo[i]).max(hi[i] - x_star[i]);
                    ssq += d * d;
                }
                ssq.sqrt()
            }
            FeasibleSet::Simplex { dim, scale } => {
                // the distance maximum over a polytope is attained at a vertex
                let ssq: f64 = x_star.iter().map(|v| v * v).sum();
                let mut best: f64 = 0.0;
                for i in 0..*dim {
                    let d2 =
                        ssq - x_star[i] * x_star[i] + (scale - x_star[i]) * (scale - x_star[i]);
                    best = best.max(d2);
                }
                best.sqrt()
            }
        })
    }

    /// Short human-readable form for descriptors and trace headers.
    pub fn label(&self) -> String {
        fn fmt_uniform(v: &Vector) -> Option<f64> {
            (!v.is_empty() && v.iter().all(|&c| c == v[0])).then(|| v[0])
        }
        match self {
            FeasibleSet::Ball { center, radius } => match fmt_uniform(center) {
                Some(c) => format!("ball(center={c},radius={radius},n={})", center.len()),
                None => format!("ball(radius={radius},n={})", center.len()),
            },
            FeasibleSet::Box { lo, hi } => match (fmt_uniform(lo), fmt_uniform(hi)) {
                (Some(a), Some(b)) => format!("box[{a},{b}]^{}", lo.len()),
                _ => format!("box(n={})", lo.len()),
            },
            FeasibleSet::Simplex { dim, scale } => format!("simplex(scale={scale},n={dim})"),
        }
    }

    /// Draws a feasible point by projecting a standard normal sample.
    /// Intended for randomized property checks; the distribution carries no
    /// meaning beyond covering the set and its boundary.
    pub fn sample(&self, rng: &mut impl Rng) -> Vector {
        let y = Vector::from_fn(self.dimension(), |_, _| {
            rng.sample::<f64, _>(StandardNormal)
        });
        self.project(&y).expect("finite sample")
    }
}

/// Sort-then-threshold simplex projection: sort descending, find the largest
/// prefix with a positive threshold, subtract and clip. O(n log n), exact up
/// to rounding; equal inputs map to equal outputs.
fn simplex_project(y: &Vector, scale: f64) -> Vector {
    let mut sorted: Vec<f64> = y.iter().copied().collect();
    sorted.sort_unstable_by(|a, b| b.partial_cmp(a).expect("finite input"));

    // the prefix condition u_j > (cumsum_j - scale)/j holds up to exactly the
    // support size, so the last passing candidate is the threshold
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let candidate = (cumsum - scale) / (j + 1) as f64;
        if u - candidate > 0.0 {
            theta = candidate;
        }
    }
    Vector::from_fn(y.len(), |i, _| (y[i] - theta).max(0.0))
}
