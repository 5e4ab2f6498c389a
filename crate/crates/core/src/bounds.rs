//! Exact evaluators for the closed-form convergence-rate certificates.
//!
//! Four rate expressions are covered, all stated for a problem with
//! containment radius `R` and subgradient bound `L`:
//!
//! * [`constant_step_rate`] — `R*L/sqrt(t)`, the classical rate of the plain
//!   iterate average under the horizon-anchored constant step.
//! * [`sqrt_decay_mean_rate`] — `3*R*L/(2*sqrt(t))`, the rate of the plain
//!   average under the `R/(L*sqrt(s))` decay schedule.
//! * [`weighted_ergodic_bound`] — the general certificate for the
//!   `eta_s^(-k)`-weighted average under any positive non-increasing
//!   schedule: `(R^2/eta_t^(k+1) + L^2 * sum_s eta_s^(1-k)) /
//!   (2 * sum_s eta_s^(-k))` for any fixed `k >= -1`.
//! * [`step_weighted_log_rate`] — `(2RL + RL*ln(t)) / (4*(sqrt(t+1)-1))`, the
//!   classical closed-form relaxation of the `k = -1` case under the decay
//!   schedule; it carries the `log t` factor that every `k > -1` weighting
//!   avoids.
//!
//! [`BoundAccumulator`] evaluates the general certificate at every prefix
//! length in one pass so a solver run can annotate each trace row with the
//! bound in O(1) per iteration.

use crate::error::{Error, Result};
use crate::kahan::KahanSum;
use crate::schedules::{ScheduleViolation, StepSchedule, ViolationKind};

/// `eta^(-k)` with exact special cases for the integer exponents that matter
/// most: `k = 0` never calls `pow` (the weight is exactly 1), and `k = -1`,
/// `k = 1` are a plain multiply or divide.
pub(crate) fn eta_pow_neg(eta: f64, k: f64) -> f64 {
    if k == 0.0 {
        1.0
    } else if k == -1.0 {
        eta
    } else if k == 1.0 {
        1.0 / eta
    } else {
        eta.powf(-k)
    }
}

fn check_rl(r: f64, l: f64) -> Result<()> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::invalid("R", format!("must be positive, got {r}")));
    }
    if !(l.is_finite() && l > 0.0) {
        return Err(Error::invalid("L", format!("must be positive, got {l}")));
    }
    Ok(())
}

fn check_t(t: usize) -> Result<f64> {
    if t < 1 {
        return Err(Error::invalid("t", "must be at least 1"));
    }
    Ok(t as f64)
}

fn check_k(k: f64) -> Result<()> {
    if !(k.is_finite() && k >= -1.0) {
        return Err(Error::invalid("k", format!("must be >= -1, got {k}")));
    }
    Ok(())
}

/// `R*L/sqrt(t)`: plain averaging with the constant step anchored to `t`.
pub fn constant_step_rate(r: f64, l: f64, t: usize) -> Result<f64> {
    check_rl(r, l)?;
    let tf = check_t(t)?;
    Ok(r * l / tf.sqrt())
}

/// `3*R*L/(2*sqrt(t))`: plain averaging with the `R/(L*sqrt(s))` schedule.
pub fn sqrt_decay_mean_rate(r: f64, l: f64, t: usize) -> Result<f64> {
    check_rl(r, l)?;
    let tf = check_t(t)?;
    Ok(1.5 * r * l / tf.sqrt())
}

/// `(2RL + RL*ln(t)) / (4*(sqrt(t+1)-1))`: the step-weighted (`k = -1`)
/// closed form under the decay schedule. The logarithm is natural — the
/// harmonic-sum integral bound that produces the expression forces base e.
pub fn step_weighted_log_rate(r: f64, l: f64, t: usize) -> Result<f64> {
    check_rl(r, l)?;
    let tf = check_t(t)?;
    Ok((2.0 * r * l + r * l * tf.ln()) / (4.0 * ((tf + 1.0).sqrt() - 1.0)))
}

/// One-pass prefix evaluator for the general weighted-ergodic certificate.
///
/// `push(eta_s)` extends the prefix by one step and returns the bound at the
/// new length. Sums are compensated, so horizons up to 10^6 lose no digits.
#[derive(Debug, Clone)]
pub struct BoundAccumulator {
    r_sq: f64,
    l_sq: f64,
    k: f64,
    /// `sum_s eta_s^(-k)`
    sum_weights: KahanSum,
    /// `sum_s eta_s^(1-k)`
    sum_weighted_eta: KahanSum,
    last_eta: f64,
    len: usize,
}

impl BoundAccumulator {
    pub fn new(r: f64, l: f64, k: f64) -> Result<Self> {
        check_rl(r, l)?;
        check_k(k)?;
        Ok(BoundAccumulator {
            r_sq: r * r,
            l_sq: l * l,
            k,
            sum_weights: KahanSum::default(),
            sum_weighted_eta: KahanSum::default(),
            last_eta: f64::INFINITY,
            len: 0,
        })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// Number of steps pushed so far.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Extends the prefix with `eta` and returns the bound at length
    /// `len() + 1`. The sequence fed in must stay positive and
    /// non-increasing.
    pub fn push(&mut self, eta: f64) -> Result<f64> {
        let index = self.len + 1;
        if !(eta.is_finite() && eta > 0.0) {
            return Err(ScheduleViolation {
                index,
                kind: ViolationKind::NonPositive { value: eta },
            }
            .into());
        }
        if eta > self.last_eta {
            return Err(ScheduleViolation {
                index,
                kind: ViolationKind::Increasing {
                    previous: self.last_eta,
                    value: eta,
                },
            }
            .into());
        }
        let w = eta_pow_neg(eta, self.k);
        self.sum_weights += w;
        self.sum_weighted_eta += w * eta;
        if !(w.is_finite() && self.sum_weights.value().is_finite()) {
            return Err(Error::WeightOverflow {
                update: index,
                k: self.k,
            });
        }
        self.last_eta = eta;
        self.len = index;
        // R^2/eta_t^(k+1) = R^2 * eta_t^(-k) / eta_t
        Ok(
            (self.r_sq * w / eta + self.l_sq * self.sum_weighted_eta.value())
                / (2.0 * self.sum_weights.value()),
        )
    }

    /// Bound at the current prefix length, if any step has been pushed.
    pub fn value(&self) -> Option<f64> {
        if self.len == 0 {
            return None;
        }
        let w = eta_pow_neg(self.last_eta, self.k);
        Some(
            (self.r_sq * w / self.last_eta + self.l_sq * self.sum_weighted_eta.value())
                / (2.0 * self.sum_weights.value()),
        )
    }
}

/// Batch form of the general certificate over an explicit step prefix
/// `etas = [eta_1, ..., eta_t]`. Recomputes the sums from scratch; the
/// incremental [`BoundAccumulator`] is checked against this.
pub fn weighted_ergodic_bound(r: f64, l: f64, etas: &[f64], k: f64) -> Result<f64> {
    check_rl(r, l)?;
    check_k(k)?;
    if etas.is_empty() {
        return Err(Error::invalid("etas", "prefix must be nonempty"));
    }
    let mut prev = f64::INFINITY;
    let mut sum_weights = KahanSum::default();
    let mut sum_weighted_eta = KahanSum::default();
    for (i, &eta) in etas.iter().enumerate() {
        if !(eta.is_finite() && eta > 0.0) {
            return Err(ScheduleViolation {
                index: i + 1,
                kind: ViolationKind::NonPositive { value: eta },
            }
            .into());
        }
        if eta > prev {
            return Err(ScheduleViolation {
                index: i + 1,
                kind: ViolationKind::Increasing {
                    previous: prev,
                    value: eta,
                },
            }
            .into());
        }
        let w = eta_pow_neg(eta, k);
        if !w.is_finite() {
            return Err(Error::WeightOverflow { update: i + 1, k });
        }
        sum_weights += w;
        sum_weighted_eta += w * eta;
        prev = eta;
    }
    let eta_t = *etas.last().expect("nonempty");
    let w_t = eta_pow_neg(eta_t, k);
    Ok((r * r * w_t / eta_t + l * l * sum_weighted_eta.value()) / (2.0 * sum_weights.value()))
}

/// Identifier plus parameters for one of the closed-form rate evaluators.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundSpec {
    ConstantStep { r: f64, l: f64 },
    SqrtDecayMean { r: f64, l: f64 },
    WeightedErgodic { r: f64, l: f64, k: f64 },
    StepWeightedLog { r: f64, l: f64 },
}

impl BoundSpec {
    /// Evaluates the bound at prefix length `t`. Only the weighted-ergodic
    /// kind consults the schedule; the others are closed forms in `t`.
    pub fn eval(&self, t: usize, schedule: &StepSchedule) -> Result<f64> {
        match *self {
            BoundSpec::ConstantStep { r, l } => constant_step_rate(r, l, t),
            BoundSpec::SqrtDecayMean { r, l } => sqrt_decay_mean_rate(r, l, t),
            BoundSpec::StepWeightedLog { r, l } => step_weighted_log_rate(r, l, t),
            BoundSpec::WeightedErgodic { r, l, k } => {
                check_t(t)?;
                let etas: Vec<f64> = (1..=t)
                    .map(|s| schedule.eta(s))
                    .collect::<Result<Vec<f64>>>()?;
                weighted_ergodic_bound(r, l, &etas, k)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedules::StepSchedule;
    use approx::assert_relative_eq;

    fn sqrt_decay_etas(r: f64, l: f64, t: usize) -> Vec<f64> {
        let sched = StepSchedule::sqrt_decay(r, l).unwrap();
        (1..=t).map(|s| sched.eta(s).unwrap()).collect()
    }

    #[test]
    fn constant_step_rate_values() {
        assert_eq!(constant_step_rate(1.0, 1.0, 1).unwrap(), 1.0);
        assert_eq!(constant_step_rate(1.0, 1.0, 100).unwrap(), 0.1);
        assert_eq!(constant_step_rate(2.0, 3.0, 4).unwrap(), 3.0);
        assert!(constant_step_rate(1.0, 1.0, 0).is_err());
    }

    #[test]
    fn sqrt_decay_mean_rate_values() {
        assert_eq!(sqrt_decay_mean_rate(1.0, 1.0, 1).unwrap(), 1.5);
        assert_eq!(sqrt_decay_mean_rate(1.0, 1.0, 4).unwrap(), 0.75);
        assert_eq!(sqrt_decay_mean_rate(1.0, 1.0, 10_000).unwrap(), 0.015);
    }

    #[test]
    fn step_weighted_log_rate_values() {
        // t=1: ln 1 = 0, so 2/(4(sqrt(2)-1))
        let by_hand = 2.0 / (4.0 * (2.0_f64.sqrt() - 1.0));
        assert_relative_eq!(
            step_weighted_log_rate(1.0, 1.0, 1).unwrap(),
            by_hand,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            step_weighted_log_rate(1.0, 1.0, 100).unwrap(),
            0.1824657725287609,
            max_relative = 1e-14
        );
        // RL factors linearly
        assert_relative_eq!(
            step_weighted_log_rate(2.0, 1.0, 50).unwrap(),
            2.0 * step_weighted_log_rate(1.0, 1.0, 50).unwrap(),
            max_relative = 1e-15
        );
    }

    #[test]
    fn weighted_bound_hand_values() {
        let etas = sqrt_decay_etas(1.0, 1.0, 4);

        // t=1, k=0: (1/eta_1 + eta_1)/2 with eta_1 = 1
        assert_eq!(
            weighted_ergodic_bound(1.0, 1.0, &etas[..1], 0.0).unwrap(),
            1.0
        );
        // t=1, k=-1: (1 + eta_1^2)/(2 eta_1) = 1
        assert_eq!(
            weighted_ergodic_bound(1.0, 1.0, &etas[..1], -1.0).unwrap(),
            1.0
        );

        // t=4, k=0: (sqrt(4) + sum_{s<=4} 1/sqrt(s)) / 8
        let sum: f64 = (1..=4).map(|s| 1.0 / (s as f64).sqrt()).sum();
        let by_hand = (2.0 + sum) / 8.0;
        let got = weighted_ergodic_bound(1.0, 1.0, &etas, 0.0).unwrap();
        assert_relative_eq!(got, by_hand, max_relative = 1e-14);
        assert_relative_eq!(got, 0.5980571312970216, max_relative = 1e-14);
    }

    #[test]
    fn constant_schedule_weighted_bound_collapses_to_constant_rate() {
        for t in [1usize, 10, 100, 10_000] {
            let r = 2.0;
            let l = 0.7;
            let eta = (r / l) / (t as f64).sqrt();
            let etas = vec![eta; t];
            let bound = weighted_ergodic_bound(r, l, &etas, 0.0).unwrap();
            let rate = constant_step_rate(r, l, t).unwrap();
            assert_relative_eq!(bound, rate, max_relative = 1e-12);
        }
    }

    #[test]
    fn incremental_matches_batch_at_checkpoints() {
        let etas = sqrt_decay_etas(3.0, 0.5, 100_000);
        for k in [-1.0, 0.0, 0.5, 2.0] {
            let mut acc = BoundAccumulator::new(3.0, 0.5, k).unwrap();
            let mut last = f64::NAN;
            let checkpoints = [1usize, 2, 10, 100, 1000, 31_623, 100_000];
            let mut ci = 0;
            for (i, &eta) in etas.iter().enumerate() {
                last = acc.push(eta).unwrap();
                if ci < checkpoints.len() && i + 1 == checkpoints[ci] {
                    let batch = weighted_ergodic_bound(3.0, 0.5, &etas[..=i], k).unwrap();
                    assert_relative_eq!(last, batch, max_relative = 1e-12);
                    ci += 1;
                }
            }
            assert_eq!(ci, checkpoints.len());
            assert_eq!(acc.value(), Some(last));
        }
    }

    #[test]
    fn bounds_scale_linearly_in_rl_product() {
        let c = 10.0;
        let t = 50;
        let base_etas = sqrt_decay_etas(1.3, 0.4, t);
        let scaled_etas = sqrt_decay_etas(c * 1.3, c * 0.4, t);
        for k in [-1.0, 0.0, 1.5] {
            let b = weighted_ergodic_bound(1.3, 0.4, &base_etas, k).unwrap();
            let s = weighted_ergodic_bound(c * 1.3, c * 0.4, &scaled_etas, k).unwrap();
            assert_relative_eq!(s, c * c * b, max_relative = 1e-12);
        }
        for f in [
            constant_step_rate,
            sqrt_decay_mean_rate,
            step_weighted_log_rate,
        ] {
            let b = f(1.3, 0.4, t).unwrap();
            let s = f(c * 1.3, c * 0.4, t).unwrap();
            assert!(b > 0.0);
            assert_relative_eq!(s, c * c * b, max_relative = 1e-12);
        }
    }

    #[test]
    fn mean_rate_dominates_weighted_k0_short_range() {
        let mut acc = BoundAccumulator::new(1.0, 1.0, 0.0).unwrap();
        let sched = StepSchedule::sqrt_decay(1.0, 1.0).unwrap();
        for t in 1..=10_000usize {
            let b = acc.push(sched.eta(t).unwrap()).unwrap();
            let m = sqrt_decay_mean_rate(1.0, 1.0, t).unwrap();
            assert!(b <= m * (1.0 + 1e-12), "t={t}: {b} > {m}");
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(BoundAccumulator::new(1.0, 1.0, -1.5).is_err());
        assert!(weighted_ergodic_bound(1.0, 1.0, &[], 0.0).is_err());
        assert!(matches!(
            weighted_ergodic_bound(1.0, 1.0, &[1.0, 1.5], 0.0),
            Err(Error::Schedule(ScheduleViolation { index: 2, .. }))
        ));
        let mut acc = BoundAccumulator::new(1.0, 1.0, 0.0).unwrap();
        acc.push(1.0).unwrap();
        assert!(acc.push(2.0).is_err());
        assert!(acc.push(0.0).is_err());
    }

    #[test]
    fn bound_spec_eval_routes_to_evaluators() {
        let sched = StepSchedule::sqrt_decay(1.0, 1.0).unwrap();
        let t = 16;
        assert_eq!(
            BoundSpec::ConstantStep { r: 1.0, l: 1.0 }
                .eval(t, &sched)
                .unwrap(),
            0.25
        );
        let etas = sqrt_decay_etas(1.0, 1.0, t);
        assert_eq!(
            BoundSpec::WeightedErgodic {
                r: 1.0,
                l: 1.0,
                k: 0.5
            }
            .eval(t, &sched)
            .unwrap(),
            weighted_ergodic_bound(1.0, 1.0, &etas, 0.5).unwrap()
        );
    }
}
