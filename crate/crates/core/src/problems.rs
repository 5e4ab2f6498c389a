//! Nonsmooth convex test instances with a certified optimum.
//!
//! Every factory returns a [`ProblemInstance`] whose optimum `x_star`, optimal
//! value `f_star`, subgradient-norm bound `L` and containment radius `R` hold
//! by construction, so solver runs can be checked against exact gaps and
//! bounds. Randomized instances use the ChaCha8 generator with a 64-bit seed;
//! identical parameters and seed reproduce the instance bit for bit.
//!
//! Subgradients at kinks are deterministic selections: `sign(0) = 0` and
//! lowest-index tie-breaks, so repeated calls at the same point return
//! identical vectors.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::projections::FeasibleSet;
use crate::Vector;

/// Sign with `sign(0) = 0`, the deterministic kink selection used by every
/// oracle here. (`f64::signum` maps 0 to 1, which is also a valid subgradient
/// choice but not the one this crate fixes.)
fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Objective oracle: value and one deterministic subgradient selection.
#[derive(Debug, Clone, PartialEq)]
pub enum Objective {
    /// `f(x) = |x - center|_1`
    L1Distance { center: Vector },
    /// `f(x) = |x - center|_inf`
    LinfDistance { center: Vector },
    /// `f(x) = max_i (slopes[i] . x + offsets[i])`
    PiecewiseLinearMax {
        slopes: Vec<Vector>,
        offsets: Vec<f64>,
    },
    /// `f(x) = |design . x - rhs|_1`
    L1Regression { design: DMatrix<f64>, rhs: Vector },
}

impl Objective {
    pub fn value(&self, x: &Vector) -> f64 {
        match self {
            Objective::L1Distance { center } => x
                .iter()
                .zip(center.iter())
                .map(|(a, c)| (a - c).abs())
                .sum(),
            Objective::LinfDistance { center } => x
                .iter()
                .zip(center.iter())
                .map(|(a, c)| (a - c).abs())
                .fold(0.0, f64::max),
            Objective::PiecewiseLinearMax { slopes, offsets } => slopes
                .iter()
                .zip(offsets.iter())
                .map(|(a, b)| a.dot(x) + b)
                .fold(f64::NEG_INFINITY, f64::max),
            Objective::L1Regression { design, rhs } => {
                let residual = design * x - rhs;
                residual.iter().map(|r| r.abs()).sum()
            }
        }
    }

    pub fn subgradient(&self, x: &Vector) -> Vector {
        match self {
            Objective::L1Distance { center } => {
                Vector::from_fn(x.len(), |i, _| sign(x[i] - center[i]))
            }
            Objective::LinfDistance { center } => {
                let mut best = 0.0;
                let mut arg = 0;
                for i in 0..x.len() {
                    let d = (x[i] - center[i]).abs();
                    if d > best {
                        best = d;
                        arg = i;
                    }
                }
                let mut g = Vector::zeros(x.len());
                if best > 0.0 {
                    g[arg] = sign(x[arg] - center[arg]);
                }
                g
            }
            Objective::PiecewiseLinearMax { slopes, offsets } => {
                let mut best = f64::NEG_INFINITY;
                let mut arg = 0;
                for (i, (a, b)) in slopes.iter().zip(offsets.iter()).enumerate() {
                    let v = a.dot(x) + b;
                    if v > best {
                        best = v;
                        arg = i;
                    }
                }
                slopes[arg].clone()
            }
            Objective::L1Regression { design, rhs } => {
                let residual = design * x - rhs;
                let signs = residual.map(sign);
                design.tr_mul(&signs)
            }
        }
    }
}

/// A test problem packaged with everything the solver and the rate
/// certificates need: oracles, feasible set, optimum, `L` and `R`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    pub name: String,
    pub dimension: usize,
    pub feasible_set: FeasibleSet,
    pub x_star: Vector,
    pub f_star: f64,
    /// Valid (not necessarily tight) bound on subgradient norms over the set.
    pub lipschitz: f64,
    /// Farthest-point radius of the set around `x_star`.
    pub radius: f64,
    pub objective: Objective,
    pub seed: Option<u64>,
    /// Compact `name(parameters)` form for trace headers.
    pub descriptor: String,
}

impl ProblemInstance {
    pub fn value(&self, x: &Vector) -> f64 {
        self.objective.value(x)
    }

    pub fn subgradient(&self, x: &Vector) -> Vector {
        self.objective.subgradient(x)
    }

    /// Shared construction path: membership and optimal-value checks plus the
    /// radius computation, which is never supplied by hand.
    #[allow(clippy::too_many_arguments)]
    fn assemble(
        name: &str,
        feasible_set: FeasibleSet,
        x_star: Vector,
        f_star: f64,
        lipschitz: f64,
        objective: Objective,
        seed: Option<u64>,
        descriptor: String,
    ) -> Result<Self> {
        let dimension = feasible_set.dimension();
        if x_star.len() != dimension {
            return Err(Error::DimensionMismatch {
                expected: dimension,
                got: x_star.len(),
            });
        }
        if !feasible_set.contains(&x_star, 1e-9) {
            return Err(Error::invalid("x_star", "not a member of the feasible set"));
        }
        let at_star = objective.value(&x_star);
        if (at_star - f_star).abs() > 1e-12 * (1.0 + f_star.abs()) {
            return Err(Error::invalid(
                "f_star",
                format!("objective at x_star is {at_star}, declared {f_star}"),
            ));
        }
        let radius = feasible_set.radius_bound(&x_star)?;
        Ok(ProblemInstance {
            name: name.to_string(),
            dimension,
            feasible_set,
            x_star,
            f_star,
            lipschitz,
            radius,
            objective,
            seed,
            descriptor,
        })
    }
}

fn fmt_vec(v: &Vector) -> String {
    if v.len() > 1 && v.iter().all(|&c| c == v[0]) {
        return format!("{}", v[0]);
    }
    let parts: Vec<String> = v.iter().map(|c| format!("{c}")).collect();
    format!("[{}]", parts.join(","))
}

/// `f(x) = |x - c|_1` on the box `[box_lo, box_hi]^n`; `x* = c`, `f* = 0`,
/// `L = sqrt(n)`.
pub fn make_l1_distance(n: usize, c: &Vector, box_lo: f64, box_hi: f64) -> Result<ProblemInstance> {
    if c.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: c.len(),
        });
    }
    let set = FeasibleSet::uniform_box(n, box_lo, box_hi)?;
    if c.iter().any(|&v| v < box_lo || v > box_hi) {
        return Err(Error::invalid("c", "outside the box"));
    }
    let descriptor = format!(
        "l1-distance(n={n},c={},box=[{box_lo},{box_hi}])",
        fmt_vec(c)
    );
    ProblemInstance::assemble(
        "l1-distance",
        set,
        c.clone(),
        0.0,
        (n as f64).sqrt(),
        Objective::L1Distance { center: c.clone() },
        None,
        descriptor,
    )
}

/// `f(x) = |x - c|_inf` on the box; `x* = c`, `f* = 0`, `L = 1`.
pub fn make_linf_distance(
    n: usize,
    c: &Vector,
    box_lo: f64,
    box_hi: f64,
) -> Result<ProblemInstance> {
    if c.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: c.len(),
        });
    }
    let set = FeasibleSet::uniform_box(n, box_lo, box_hi)?;
    if c.iter().any(|&v| v < box_lo || v > box_hi) {
        return Err(Error::invalid("c", "outside the box"));
    }
    let descriptor = format!(
        "linf-distance(n={n},c={},box=[{box_lo},{box_hi}])",
        fmt_vec(c)
    );
    ProblemInstance::assemble(
        "linf-distance",
        set,
        c.clone(),
        0.0,
        1.0,
        Objective::LinfDistance { center: c.clone() },
        None,
        descriptor,
    )
}

/// Max of `m` (sometimes `m + 1`, see below) affine pieces, constructed so
/// that every piece is active at `x_star` and the slopes' convex hull
/// contains the origin; together these certify `x_star` as a global minimizer
/// with value `f_star`.
///
/// Slopes are drawn standard normal. When their sum is nonzero the hull
/// containment is not guaranteed, so one extra piece with slope along
/// `-sum(a_i)` (unit length) is appended, which forces it.
pub fn make_piecewise_linear_max(
    n: usize,
    m: usize,
    seed: u64,
    x_star: &Vector,
    f_star: f64,
    set: &FeasibleSet,
) -> Result<ProblemInstance> {
    if set.dimension() != n || x_star.len() != n {
        return Err(Error::DimensionMismatch {
            expected: set.dimension(),
            got: if x_star.len() != n { x_star.len() } else { n },
        });
    }
    if m < n + 1 {
        return Err(Error::invalid(
            "m",
            format!("need at least n+1 = {} pieces, got {m}", n + 1),
        ));
    }
    if !f_star.is_finite() {
        return Err(Error::NonFinite { what: "f_star" });
    }
    if !set.is_interior(x_star) {
        return Err(Error::invalid(
            "x_star",
            "must lie in the interior of the feasible set",
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut slopes: Vec<Vector> = (0..m)
        .map(|_| Vector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal)))
        .collect();

    let mut mean_slope = Vector::zeros(n);
    for a in &slopes {
        mean_slope += a;
    }
    mean_slope /= m as f64;
    if mean_slope.norm() > 0.0 {
        slopes.push(&mean_slope * (-1.0 / mean_slope.norm()));
    }

    let offsets: Vec<f64> = slopes.iter().map(|a| f_star - a.dot(x_star)).collect();
    let lipschitz = slopes.iter().map(Vector::norm).fold(0.0, f64::max);
    let pieces = slopes.len();
    let descriptor = format!(
        "piecewise-linear-max(n={n},m={m},pieces={pieces},seed={seed},fstar={f_star},set={},rng=chacha8)",
        set.label()
    );
    ProblemInstance::assemble(
        "piecewise-linear-max",
        set.clone(),
        x_star.clone(),
        f_star,
        lipschitz,
        Objective::PiecewiseLinearMax { slopes, offsets },
        Some(seed),
        descriptor,
    )
}

/// `f(x) = |A x - b|_1` with `A` drawn standard normal and `b = A x_hat` for
/// the set's canonical interior point `x_hat`, so `f* = 0` exactly at
/// `x* = x_hat`. `L = sum_i |row_i(A)|`, a valid bound since the residual
/// signs have magnitude at most 1.
pub fn make_l1_regression(
    rows: usize,
    n: usize,
    seed: u64,
    set: &FeasibleSet,
) -> Result<ProblemInstance> {
    if set.dimension() != n {
        return Err(Error::DimensionMismatch {
            expected: set.dimension(),
            got: n,
        });
    }
    if rows < 1 {
        return Err(Error::invalid("rows", "must be at least 1"));
    }
    let x_hat = set.interior_point();
    if !set.contains(&x_hat, 1e-9) {
        return Err(Error::invalid("set", "interior point is not a member"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // row-major draw order, so the instance is reproducible from the seed
    // without reference to any matrix storage convention
    let data: Vec<f64> = (0..rows * n)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    let design = DMatrix::from_row_slice(rows, n, &data);
    let rhs = &design * &x_hat;
    let lipschitz: f64 = design.row_iter().map(|r| r.norm()).sum();

    let descriptor = format!(
        "l1-regression(rows={rows},n={n},seed={seed},set={},rng=chacha8)",
        set.label()
    );
    ProblemInstance::assemble(
        "l1-regression",
        set.clone(),
        x_hat,
        0.0,
        lipschitz,
        Objective::L1Regression { design, rhs },
        Some(seed),
        descriptor,
    )
}
