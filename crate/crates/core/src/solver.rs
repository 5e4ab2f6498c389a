//! The projected subgradient iteration, weighted-average tracking, and the
//! run driver that ties iterates, averages and rate certificates into a
//! trace.
//!
//! A single run is inherently sequential (`x_{t+1}` depends on `x_t`); state
//! is owned by one run and never shared. Problems and schedules are read-only
//! and may back any number of concurrent runs.

use crate::bounds::{eta_pow_neg, BoundAccumulator};
use crate::error::{Error, Result};
use crate::problems::ProblemInstance;
use crate::schedules::StepSchedule;
use crate::{Vector, FEASIBILITY_TOL};

/// Relative tolerance for the online per-iteration certificate check.
pub const PROOF_RESIDUAL_TOL: f64 = 1e-9;

/// Relative slack allowed on declared subgradient-norm bounds.
pub const SUBGRADIENT_NORM_TOL: f64 = 1e-12;

/// Mutable state of one projected-subgradient run.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    /// 1-based index of the current iterate.
    t: usize,
    /// Current iterate `x_t`, always feasible.
    x: Vector,
    /// Pre-projection point from the most recent step.
    y_next: Vector,
    /// Cached objective value `f(x_t)`.
    f_current: f64,
    /// `min_{s<=t} f(x_s)`, non-increasing in `t`.
    min_value: f64,
    /// Earliest iterate attaining `min_value`.
    min_iterate: Vector,
}

impl SolverState {
    /// Starts a run at a feasible `x1`. Fails if `x1` is infeasible or the
    /// objective there is non-finite.
    pub fn new(problem: &ProblemInstance, x1: Vector) -> Result<Self> {
        if x1.len() != problem.dimension {
            return Err(Error::DimensionMismatch {
                expected: problem.dimension,
                got: x1.len(),
            });
        }
        let violation = problem.feasible_set.violation(&x1);
        // NaN counts as infeasible
        if violation.is_nan() || violation > FEASIBILITY_TOL {
            return Err(Error::InvariantViolation {
                name: "feasibility",
                iteration: 1,
                lhs: violation,
                rhs: FEASIBILITY_TOL,
            });
        }
        let f1 = problem.value(&x1);
        if !f1.is_finite() {
            return Err(Error::OracleFailure {
                iteration: 1,
                what: "objective",
            });
        }
        Ok(SolverState {
            t: 1,
            y_next: x1.clone(),
            min_iterate: x1.clone(),
            x: x1,
            f_current: f1,
            min_value: f1,
        })
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn x(&self) -> &Vector {
        &self.x
    }

    /// Pre-projection point `y` from the most recent step (the start point
    /// before any step is taken).
    pub fn y_next(&self) -> &Vector {
        &self.y_next
    }

    /// `f(x_t)` for the current iterate.
    pub fn f_current(&self) -> f64 {
        self.f_current
    }

    pub fn min_value(&self) -> f64 {
        self.min_value
    }

    pub fn min_iterate(&self) -> &Vector {
        &self.min_iterate
    }
}

/// `min_{s<=t} f(x_s) - f_star`: the best-iterate optimality gap, a drop-in
/// replacement for the averaged-iterate gap in every certificate.
pub fn min_iterate_gap(state: &SolverState, f_star: f64) -> f64 {
    state.min_value - f_star
}

/// One projected subgradient step: `x <- project(x - eta * g)` with `g` from
/// the problem's subgradient oracle at the current iterate. Updates the
/// iteration counter and the best-iterate tracker, and validates the
/// declared subgradient-norm bound along the way.
pub fn psg_step(state: &mut SolverState, problem: &ProblemInstance, eta: f64) -> Result<()> {
    if state.x.len() != problem.dimension {
        return Err(Error::DimensionMismatch {
            expected: problem.dimension,
            got: state.x.len(),
        });
    }
    if !(eta.is_finite() && eta > 0.0) {
        return Err(Error::invalid(
            "eta",
            format!("must be positive, got {eta}"),
        ));
    }

    let g = problem.subgradient(&state.x);
    if g.len() != problem.dimension {
        return Err(Error::DimensionMismatch {
            expected: problem.dimension,
            got: g.len(),
        });
    }
    if g.iter().any(|c| !c.is_finite()) {
        return Err(Error::OracleFailure {
            iteration: state.t,
            what: "subgradient",
        });
    }
    let g_norm = g.norm();
    if g_norm > problem.lipschitz * (1.0 + SUBGRADIENT_NORM_TOL) {
        return Err(Error::InvariantViolation {
            name: "subgradient-norm",
            iteration: state.t,
            lhs: g_norm,
            rhs: problem.lipschitz,
        });
    }

    state.y_next = &state.x - g * eta;
    let x_next = problem.feasible_set.project(&state.y_next)?;
    let violation = problem.feasible_set.violation(&x_next);
    if violation.is_nan() || violation > FEASIBILITY_TOL {
        return Err(Error::InvariantViolation {
            name: "feasibility",
            iteration: state.t + 1,
            lhs: violation,
            rhs: FEASIBILITY_TOL,
        });
    }
    let f_next = problem.value(&x_next);
    if !f_next.is_finite() {
        return Err(Error::OracleFailure {
            iteration: state.t + 1,
            what: "objective",
        });
    }

    state.t += 1;
    state.x = x_next;
    state.f_current = f_next;
    if f_next < state.min_value {
        state.min_value = f_next;
        state.min_iterate = state.x.clone();
    }
    Ok(())
}

/// Running `eta_s^(-k)`-weighted average of the iterates.
///
/// The average is kept in normalized form and updated incrementally as
/// `avg += (w / weight_sum) * (x - avg)`, so no raw weighted sum of iterates
/// is ever stored; only the scalar weight sum can overflow, and that is
/// checked on every update.
#[derive(Debug, Clone, PartialEq)]
pub struct AveragingAccumulator {
    k: f64,
    weight_sum: f64,
    average: Vector,
    count: usize,
}

impl AveragingAccumulator {
    pub fn new(k: f64, dimension: usize) -> Result<Self> {
        if !(k.is_finite() && k >= -1.0) {
            return Err(Error::invalid("k", format!("must be >= -1, got {k}")));
        }
        if dimension == 0 {
            return Err(Error::invalid("dimension", "must be positive"));
        }
        Ok(AveragingAccumulator {
            k,
            weight_sum: 0.0,
            average: Vector::zeros(dimension),
            count: 0,
        })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// `sum_s eta_s^(-k)` over the updates so far.
    pub fn weight_sum(&self) -> f64 {
        self.weight_sum
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// The weighted average; the zero vector before the first update.
    pub fn average(&self) -> &Vector {
        &self.average
    }

    /// Folds in the iterate `x` with weight `eta^(-k)`.
    pub fn update(&mut self, x: &Vector, eta: f64) -> Result<()> {
        if x.len() != self.average.len() {
            return Err(Error::DimensionMismatch {
                expected: self.average.len(),
                got: x.len(),
            });
        }
        if !(eta.is_finite() && eta > 0.0) {
            return Err(Error::invalid(
                "eta",
                format!("must be positive, got {eta}"),
            ));
        }
        let w = eta_pow_neg(eta, self.k);
        let new_sum = self.weight_sum + w;
        // strict growth doubles as the finiteness check for w itself
        if !new_sum.is_finite() || new_sum <= self.weight_sum {
            return Err(Error::WeightOverflow {
                update: self.count + 1,
                k: self.k,
            });
        }
        let ratio = w / new_sum;
        self.average.zip_apply(x, |a, xi| *a += ratio * (xi - *a));
        self.weight_sum = new_sum;
        self.count += 1;
        Ok(())
    }
}

/// Which iterations get a trace row. Online checks are unaffected: they run
/// at every iteration regardless of the stride.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StridePolicy {
    /// One row per iteration.
    Full,
    /// Every iteration up to 1000, then geometrically spaced checkpoints
    /// (ratio 1.05), plus the final iteration.
    #[default]
    Auto,
    /// Every `n`-th iteration, plus the first and the final one.
    EveryN(usize),
}

const AUTO_DENSE_LIMIT: usize = 1000;
const AUTO_RATIO: f64 = 1.05;

/// Incremental `eta^(-k)`-weighted mean of scalar objective values, kept in
/// lockstep with the iterate averages to cross-check the best-iterate
/// tracker.
struct WeightedValueMean {
    k: f64,
    weight_sum: f64,
    mean: f64,
}

impl WeightedValueMean {
    fn new(k: f64) -> Self {
        WeightedValueMean {
            k,
            weight_sum: 0.0,
            mean: 0.0,
        }
    }

    fn update(&mut self, value: f64, eta: f64) {
        let w = eta_pow_neg(eta, self.k);
        self.weight_sum += w;
        self.mean += (w / self.weight_sum) * (value - self.mean);
    }
}

struct StrideState {
    policy: StridePolicy,
    horizon: usize,
    next_checkpoint: usize,
}

impl StrideState {
    fn new(policy: StridePolicy, horizon: usize) -> Result<Self> {
        if let StridePolicy::EveryN(0) = policy {
            return Err(Error::invalid("stride", "must be at least 1"));
        }
        Ok(StrideState {
            policy,
            horizon,
            next_checkpoint: AUTO_DENSE_LIMIT + 1,
        })
    }

    fn should_log(&mut self, s: usize) -> bool {
        match self.policy {
            StridePolicy::Full => true,
            StridePolicy::EveryN(n) => s == 1 || s == self.horizon || s.is_multiple_of(n),
            StridePolicy::Auto => {
                if s <= AUTO_DENSE_LIMIT || s == self.horizon {
                    return true;
                }
                if s >= self.next_checkpoint {
                    let scaled = (s as f64 * AUTO_RATIO).ceil() as usize;
                    self.next_checkpoint = scaled.max(s + 1);
                    return true;
                }
                false
            }
        }
    }
}

/// Options for [`run`].
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Start point; projected onto the feasible set before use. Defaults to
    /// the projection of the origin.
    pub start: Option<Vector>,
    /// Check the per-iteration certificate inequality online (needs two extra
    /// norm computations per step).
    pub check_invariants: bool,
    pub stride: StridePolicy,
}

/// One logged iteration. Gaps are stored raw; microscopically negative
/// values from rounding against an exact `f_star` are preserved for checks
/// and only clamped at reporting time.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    /// 1-based iteration index.
    pub s: usize,
    pub eta: f64,
    /// `f(x_s)`.
    pub f_x: f64,
    /// `min_{r<=s} f(x_r) - f_star`.
    pub gap_min: f64,
    /// `f(average_k) - f_star`, aligned with the configured `ks`.
    pub gap_avg: Vec<f64>,
    /// Weighted-ergodic certificate value at prefix length `s`, per `k`.
    pub bound: Vec<f64>,
}

/// Largest observed value of some margin that is expected to stay
/// non-positive, with the iteration where it occurred.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Margin {
    pub value: f64,
    pub s: usize,
}

/// Like [`Margin`], additionally tagged with the averaging exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMargin {
    pub value: f64,
    pub s: usize,
    pub k: f64,
}

/// Aggregates computed over a whole run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub horizon: usize,
    /// Final-row gap per configured `k` (raw).
    pub final_gap: Vec<f64>,
    /// Final-row certificate value per configured `k`.
    pub final_bound: Vec<f64>,
    pub final_gap_min: f64,
    /// Max over logged rows and `k` of `gap_avg - bound`; nonpositive (up to
    /// relative rounding slack) when every certificate held.
    pub max_bound_margin: Option<KMargin>,
    /// Max over logged rows of `gap_min` minus the largest per-`k` weighted
    /// mean of the objective values. The running minimum can never exceed a
    /// convex combination of the values it ranges over, so this stays at
    /// rounding level. (The value at the averaged point is no reference
    /// here: an average can beat every single iterate.)
    pub max_min_dom_margin: Option<Margin>,
    /// Max residual of the online certificate inequality, when enabled.
    pub max_proof_residual: Option<Margin>,
}

/// Full result of a run: logged rows plus final state.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverTrace {
    pub ks: Vec<f64>,
    pub rows: Vec<TraceRow>,
    /// Final weighted average per configured `k`.
    pub final_averages: Vec<Vector>,
    /// `x_{horizon+1}`, the iterate produced by the last step.
    pub final_x: Vector,
    /// Earliest iterate attaining the minimum objective value seen.
    pub min_iterate: Vector,
    pub summary: RunSummary,
}

/// Executes `horizon` projected-subgradient steps, maintaining one weighted
/// average and one certificate evaluator per requested `k`.
///
/// Rows are logged according to the stride policy and always include the
/// final iteration; feasibility and subgradient-norm checks run at every
/// iteration, and the per-iteration certificate inequality is checked online
/// when `options.check_invariants` is set.
pub fn run(
    problem: &ProblemInstance,
    schedule: &StepSchedule,
    ks: &[f64],
    horizon: usize,
    options: &RunOptions,
) -> Result<SolverTrace> {
    if horizon < 1 {
        return Err(Error::invalid("horizon", "must be at least 1"));
    }
    for &k in ks {
        if !(k.is_finite() && k >= -1.0) {
            return Err(Error::invalid("k", format!("must be >= -1, got {k}")));
        }
    }
    schedule.validate(horizon)?;

    let dim = problem.dimension;
    let x1 = match &options.start {
        Some(x0) => problem.feasible_set.project(x0)?,
        None => problem.feasible_set.project(&Vector::zeros(dim))?,
    };
    let mut state = SolverState::new(problem, x1)?;

    let mut averages: Vec<AveragingAccumulator> = ks
        .iter()
        .map(|&k| AveragingAccumulator::new(k, dim))
        .collect::<Result<_>>()?;
    let mut certificates: Vec<BoundAccumulator> = ks
        .iter()
        .map(|&k| BoundAccumulator::new(problem.radius, problem.lipschitz, k))
        .collect::<Result<_>>()?;
    let mut value_means: Vec<WeightedValueMean> =
        ks.iter().map(|&k| WeightedValueMean::new(k)).collect();

    let mut stride = StrideState::new(options.stride, horizon)?;
    let mut rows: Vec<TraceRow> = Vec::new();
    let mut bounds_now = vec![0.0_f64; ks.len()];

    let mut max_bound_margin: Option<KMargin> = None;
    let mut max_min_dom_margin: Option<Margin> = None;
    let mut max_proof_residual: Option<Margin> = None;

    let l_sq = problem.lipschitz * problem.lipschitz;

    for s in 1..=horizon {
        let eta = schedule.eta(s)?;

        for (i, (acc, cert)) in averages.iter_mut().zip(certificates.iter_mut()).enumerate() {
            acc.update(&state.x, eta)?;
            bounds_now[i] = cert.push(eta)?;
            value_means[i].update(state.f_current, eta);
        }

        if stride.should_log(s) {
            let gap_min = state.min_value - problem.f_star;
            let mut gap_avg = Vec::with_capacity(ks.len());
            for acc in &averages {
                gap_avg.push(problem.value(acc.average()) - problem.f_star);
            }
            for (i, (&gap, &bound)) in gap_avg.iter().zip(bounds_now.iter()).enumerate() {
                let margin = gap - bound;
                if max_bound_margin.is_none_or(|m| margin > m.value) {
                    max_bound_margin = Some(KMargin {
                        value: margin,
                        s,
                        k: ks[i],
                    });
                }
            }
            if !ks.is_empty() {
                let largest_value_mean_gap = value_means
                    .iter()
                    .map(|vm| vm.mean - problem.f_star)
                    .fold(f64::NEG_INFINITY, f64::max);
                let margin = gap_min - largest_value_mean_gap;
                if max_min_dom_margin.is_none_or(|m| margin > m.value) {
                    max_min_dom_margin = Some(Margin { value: margin, s });
                }
            }
            rows.push(TraceRow {
                s,
                eta,
                f_x: state.f_current,
                gap_min,
                gap_avg,
                bound: bounds_now.clone(),
            });
        }

        if options.check_invariants {
            let d_sq_before = (&state.x - &problem.x_star).norm_squared();
            let f_before = state.f_current;
            psg_step(&mut state, problem, eta)?;
            let d_sq_after = (&state.x - &problem.x_star).norm_squared();
            let lhs = f_before - problem.f_star;
            let rhs = (d_sq_before - d_sq_after) / (2.0 * eta) + 0.5 * eta * l_sq;
            let residual = lhs - rhs;
            if residual > PROOF_RESIDUAL_TOL * (1.0 + lhs.abs()) {
                return Err(Error::InvariantViolation {
                    name: "per-iteration-inequality",
                    iteration: s,
                    lhs,
                    rhs,
                });
            }
            if max_proof_residual.is_none_or(|m| residual > m.value) {
                max_proof_residual = Some(Margin { value: residual, s });
            }
        } else {
            psg_step(&mut state, problem, eta)?;
        }
    }

    let last = rows.last().expect("final row is always logged");
    let summary = RunSummary {
        horizon,
        final_gap: last.gap_avg.clone(),
        final_bound: last.bound.clone(),
        final_gap_min: last.gap_min,
        max_bound_margin,
        max_min_dom_margin,
        max_proof_residual,
    };
    Ok(SolverTrace {
        ks: ks.to_vec(),
        rows,
        final_averages: averages.into_iter().map(|a| a.average).collect(),
        final_x: state.x.clone(),
        min_iterate: state.min_iterate,
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{make_l1_distance, Objective};
    use crate::projections::FeasibleSet;
    use crate::schedules::StepSchedule;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn abs_problem() -> ProblemInstance {
        make_l1_distance(1, &Vector::zeros(1), -1.0, 1.0).unwrap()
    }

    fn scalar(v: f64) -> Vector {
        Vector::from_vec(vec![v])
    }

    #[test]
    fn step_lands_exactly_on_optimum() {
        let p = abs_problem();
        let mut state = SolverState::new(&p, scalar(1.0)).unwrap();
        psg_step(&mut state, &p, 1.0).unwrap();
        assert_eq!(state.x()[0], 0.0);
        assert_eq!(state.t(), 2);
        assert_eq!(state.min_value(), 0.0);
    }

    #[test]
    fn step_clamps_to_box_edge() {
        let p = abs_problem();
        let mut state = SolverState::new(&p, scalar(0.5)).unwrap();
        psg_step(&mut state, &p, 2.0).unwrap();
        assert_eq!(state.x()[0], -1.0);
        assert_eq!(state.y_next()[0], -1.5);
    }

    #[test]
    fn step_matches_straight_line_reimplementation() {
        // independent re-statement of the two update equations for the
        // l1-distance objective on a box
        let c = Vector::from_vec(vec![0.3, -0.2, 0.5]);
        let p = make_l1_distance(3, &c, -1.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200 {
            let x: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let eta: f64 = rng.random_range(0.01..2.0);
            let mut expected = [0.0_f64; 3];
            for i in 0..3 {
                let d = x[i] - c[i];
                let g = if d > 0.0 {
                    1.0
                } else if d < 0.0 {
                    -1.0
                } else {
                    0.0
                };
                let y = x[i] - eta * g;
                expected[i] = y.clamp(-1.0, 1.0);
            }

            let mut state = SolverState::new(&p, Vector::from_vec(x)).unwrap();
            psg_step(&mut state, &p, eta).unwrap();
            for (got, want) in state.x().iter().zip(expected.iter()) {
                assert!((got - want).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn averaging_k0_is_arithmetic_mean() {
        let mut acc = AveragingAccumulator::new(0.0, 2).unwrap();
        let xs = [
            Vector::from_vec(vec![1.0, 4.0]),
            Vector::from_vec(vec![2.0, -1.0]),
            Vector::from_vec(vec![6.0, 0.5]),
        ];
        for (i, x) in xs.iter().enumerate() {
            acc.update(x, 1.0 / ((i + 1) as f64).sqrt()).unwrap();
        }
        assert_relative_eq!(acc.average()[0], 3.0, max_relative = 1e-14);
        assert_relative_eq!(acc.average()[1], 3.5 / 3.0, max_relative = 1e-14);
        assert_eq!(acc.weight_sum(), 3.0);
    }

    #[test]
    fn averaging_k0_tracks_separate_mean_over_long_horizon() {
        let mut acc = AveragingAccumulator::new(0.0, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut sum = 0.0;
        let t = 10_000;
        for s in 1..=t {
            let v: f64 = rng.random_range(-1.0..1.0);
            sum += v;
            acc.update(&scalar(v), 1.0 / (s as f64).sqrt()).unwrap();
        }
        let mean = sum / t as f64;
        assert!((acc.average()[0] - mean).abs() <= 1e-10 * mean.abs().max(1.0));
    }

    #[test]
    fn averaging_step_weighted_hand_value() {
        // k=-1 weights by eta itself: (1*1 + (1/sqrt(2))*0) / (1 + 1/sqrt(2))
        let mut acc = AveragingAccumulator::new(-1.0, 1).unwrap();
        acc.update(&scalar(1.0), 1.0).unwrap();
        acc.update(&scalar(0.0), 1.0 / 2.0_f64.sqrt()).unwrap();
        assert_relative_eq!(acc.average()[0], 2.0 - 2.0_f64.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(acc.average()[0], 0.585786437626905, max_relative = 1e-12);
    }

    #[test]
    fn averaging_recency_weighted_hand_value() {
        // k=1, etas (1, 1/sqrt(2)) give weights (1, sqrt(2))
        let mut acc = AveragingAccumulator::new(1.0, 2).unwrap();
        acc.update(&Vector::from_vec(vec![1.0, 0.0]), 1.0).unwrap();
        acc.update(&Vector::from_vec(vec![0.0, 1.0]), 1.0 / 2.0_f64.sqrt())
            .unwrap();
        let root2 = 2.0_f64.sqrt();
        let direct = [1.0 / (1.0 + root2), root2 / (1.0 + root2)];
        assert_relative_eq!(acc.average()[0], direct[0], max_relative = 1e-14);
        assert_relative_eq!(acc.average()[1], direct[1], max_relative = 1e-14);
        assert_relative_eq!(acc.average()[0], 0.4142135623730951, max_relative = 1e-12);
        assert_relative_eq!(acc.average()[1], 0.5857864376269051, max_relative = 1e-12);
    }

    #[test]
    fn averaging_weight_overflow_is_reported() {
        let mut acc = AveragingAccumulator::new(8.0, 1).unwrap();
        let err = acc.update(&scalar(0.0), 1e-40).unwrap_err();
        assert!(matches!(err, Error::WeightOverflow { update: 1, k } if k == 8.0));
    }

    #[test]
    fn min_iterate_gap_running_minimum() {
        // drive f-values 3, 1, 2 on f(x)=|x| over [-4,4]
        let p = make_l1_distance(1, &Vector::zeros(1), -4.0, 4.0).unwrap();
        let mut state = SolverState::new(&p, scalar(3.0)).unwrap();
        psg_step(&mut state, &p, 2.0).unwrap(); // x: 3 -> 1
        assert_eq!(state.x()[0], 1.0);
        psg_step(&mut state, &p, 3.0).unwrap(); // x: 1 -> -2
        assert_eq!(state.x()[0], -2.0);
        assert_eq!(min_iterate_gap(&state, 0.0), 1.0);
        assert_eq!(state.min_iterate()[0], 1.0);
    }

    #[test]
    fn min_iterate_gap_single_iterate_at_optimum() {
        let c = Vector::from_vec(vec![5.0]);
        let p = make_l1_distance(1, &c, 0.0, 10.0).unwrap();
        let state = SolverState::new(&p, scalar(0.0)).unwrap();
        // f(0) = 5, and with f_star declared 5 the gap is 0
        assert_eq!(min_iterate_gap(&state, 5.0), 0.0);
    }

    #[test]
    fn run_single_step_example() {
        // schedule constants deliberately differ from the problem's own R, L;
        // the certificate still uses the problem's constants
        let p = abs_problem();
        let sched = StepSchedule::sqrt_decay(2.0, 1.0).unwrap();
        let opts = RunOptions {
            start: Some(scalar(1.0)),
            ..RunOptions::default()
        };
        let trace = run(&p, &sched, &[0.0, 1.0], 1, &opts).unwrap();
        assert_eq!(trace.final_x[0], -1.0);
        assert_eq!(trace.rows.len(), 1);
        let row = &trace.rows[0];
        assert_eq!(row.s, 1);
        assert_eq!(row.eta, 2.0);
        for gap in &row.gap_avg {
            assert_eq!(*gap, 1.0);
        }
        assert_eq!(row.gap_min, 1.0);
    }

    #[test]
    fn run_rejects_bad_config() {
        let p = abs_problem();
        let sched = StepSchedule::sqrt_decay(1.0, 1.0).unwrap();
        assert!(run(&p, &sched, &[0.0], 0, &RunOptions::default()).is_err());
        assert!(run(&p, &sched, &[-2.0], 10, &RunOptions::default()).is_err());

        let short = StepSchedule::custom(vec![1.0, 0.5]).unwrap();
        let err = run(&p, &short, &[0.0], 5, &RunOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Schedule(_)));
    }

    #[test]
    fn run_certificates_hold_on_small_problem() {
        let p = make_l1_distance(10, &Vector::zeros(10), -1.0, 1.0).unwrap();
        let sched = StepSchedule::sqrt_decay(p.radius, p.lipschitz).unwrap();
        let opts = RunOptions {
            start: Some(Vector::from_element(10, 1.0)),
            check_invariants: true,
            stride: StridePolicy::Full,
        };
        let trace = run(&p, &sched, &[-1.0, 0.0, 2.0], 1000, &opts).unwrap();
        assert_eq!(trace.rows.len(), 1000);
        let margin = trace.summary.max_bound_margin.unwrap();
        assert!(
            margin.value <= 1e-9 * trace.summary.final_bound[0].abs().max(1.0),
            "bound violated: {margin:?}"
        );
        let res = trace.summary.max_proof_residual.unwrap();
        assert!(res.value <= 1e-9);
        // min-iterate never loses to every average
        assert!(trace.summary.max_min_dom_margin.unwrap().value <= 1e-12);
        // gap_min column is non-increasing and below f_x - f_star
        for w in trace.rows.windows(2) {
            assert!(w[1].gap_min <= w[0].gap_min);
        }
        for row in &trace.rows {
            assert!(row.gap_min <= row.f_x - p.f_star + 1e-15);
            for gap in &row.gap_avg {
                assert!(*gap >= -1e-12);
            }
        }
    }

    #[test]
    fn run_reports_understated_lipschitz() {
        let mut p = make_l1_distance(4, &Vector::zeros(4), -1.0, 1.0).unwrap();
        p.lipschitz = 0.5; // true bound is 2
        let sched = StepSchedule::sqrt_decay(1.0, 1.0).unwrap();
        let opts = RunOptions {
            start: Some(Vector::from_element(4, 0.9)),
            ..RunOptions::default()
        };
        let err = run(&p, &sched, &[0.0], 10, &opts).unwrap_err();
        assert!(matches!(
            err,
            Error::InvariantViolation {
                name: "subgradient-norm",
                ..
            }
        ));
    }

    #[test]
    fn oracle_failure_names_iteration() {
        let p = ProblemInstance {
            name: "broken".into(),
            dimension: 1,
            feasible_set: FeasibleSet::uniform_box(1, -1.0, 1.0).unwrap(),
            x_star: Vector::zeros(1),
            f_star: 0.0,
            lipschitz: 1.0,
            radius: 1.0,
            objective: Objective::L1Distance {
                center: scalar(f64::NAN),
            },
            seed: None,
            descriptor: "broken".into(),
        };
        let err = SolverState::new(&p, scalar(0.5)).unwrap_err();
        assert!(matches!(
            err,
            Error::OracleFailure {
                iteration: 1,
                what: "objective"
            }
        ));
    }

    #[test]
    fn default_start_is_projected_origin() {
        let c = Vector::from_vec(vec![3.0, 3.0]);
        let p = make_l1_distance(2, &c, 2.0, 4.0).unwrap();
        let sched = StepSchedule::sqrt_decay(p.radius, p.lipschitz).unwrap();
        let trace = run(&p, &sched, &[0.0], 1, &RunOptions::default()).unwrap();
        // origin projects to the nearest box corner (2, 2)
        assert_eq!(trace.rows[0].f_x, 2.0);
    }

    #[test]
    fn stride_auto_is_dense_then_geometric() {
        let mut stride = StrideState::new(StridePolicy::Auto, 100_000).unwrap();
        let logged: Vec<usize> = (1..=100_000).filter(|&s| stride.should_log(s)).collect();
        assert!(logged.contains(&1));
        assert!(logged.contains(&1000));
        assert!(logged.contains(&100_000));
        // dense prefix
        assert_eq!(logged.iter().take_while(|&&s| s <= 1000).count(), 1000);
        // decimated tail: far fewer rows than iterations
        let tail = logged.iter().filter(|&&s| s > 1000).count();
        assert!(tail < 250, "tail has {tail} rows");
        // geometric spacing never shrinks
        let after: Vec<usize> = logged.iter().copied().filter(|&s| s > 1000).collect();
        for w in after.windows(2) {
            assert!(w[1] > w[0]);
        }
    }

    #[test]
    fn stride_every_n_includes_first_and_last() {
        let mut stride = StrideState::new(StridePolicy::EveryN(300), 1000).unwrap();
        let logged: Vec<usize> = (1..=1000).filter(|&s| stride.should_log(s)).collect();
        assert_eq!(logged, vec![1, 300, 600, 900, 1000]);
        assert!(StrideState::new(StridePolicy::EveryN(0), 10).is_err());
    }

    #[test]
    fn constant_schedule_run_matches_constant_rate_identity() {
        let p = make_l1_distance(5, &Vector::zeros(5), -1.0, 1.0).unwrap();
        let horizon = 64;
        let sched = StepSchedule::constant(p.radius, p.lipschitz, horizon).unwrap();
        let opts = RunOptions {
            start: Some(Vector::from_element(5, 1.0)),
            stride: StridePolicy::Full,
            ..RunOptions::default()
        };
        let trace = run(&p, &sched, &[0.0], horizon, &opts).unwrap();
        let expected = p.radius * p.lipschitz / (horizon as f64).sqrt();
        assert_relative_eq!(trace.summary.final_bound[0], expected, max_relative = 1e-12);
        assert!(trace.summary.final_gap[0] <= expected * (1.0 + 1e-9));
    }
}
