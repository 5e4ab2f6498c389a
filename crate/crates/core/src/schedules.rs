//! Step-size sequences `eta_s` and their validation.
//!
//! The solver's convergence guarantees require a positive, non-increasing
//! sequence, so every schedule can be validated in full over a horizon before
//! a run starts. Two closed-form schedules are built in: the horizon-anchored
//! constant step `R/(L*sqrt(horizon))` and the time-varying decay
//! `R/(L*sqrt(s))`. Arbitrary sequences are supplied as explicit value lists
//! (not closures) so the validation is total.

use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};

/// Reason a schedule failed validation, with the first offending index.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("schedule violation at s={index}: {kind}")]
pub struct ScheduleViolation {
    /// 1-based index of the first violating step.
    pub index: usize,
    pub kind: ViolationKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ViolationKind {
    /// `eta_s <= 0` or non-finite.
    NonPositive { value: f64 },
    /// `eta_s > eta_{s-1}`.
    Increasing { previous: f64, value: f64 },
    /// Custom value list shorter than the requested horizon.
    TooShort { len: usize },
    /// Constant schedule queried past the horizon it was anchored to.
    BeyondDeclaredHorizon { declared: usize },
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ViolationKind::NonPositive { value } => write!(f, "non-positive value {value}"),
            ViolationKind::Increasing { previous, value } => {
                write!(f, "increase from {previous} to {value}")
            }
            ViolationKind::TooShort { len } => {
                write!(f, "custom schedule has only {len} values")
            }
            ViolationKind::BeyondDeclaredHorizon { declared } => {
                write!(f, "constant schedule is anchored to horizon {declared}")
            }
        }
    }
}

/// A step-size sequence.
#[derive(Debug, Clone, PartialEq)]
pub enum StepSchedule {
    /// `eta_s = R/(L*sqrt(horizon))` for `1 <= s <= horizon`.
    Constant { r: f64, l: f64, horizon: usize },
    /// `eta_s = R/(L*sqrt(s))`.
    SqrtDecay { r: f64, l: f64 },
    /// Explicit values; `values[s-1]` is `eta_s`.
    Custom { values: Vec<f64> },
}

fn check_constants(r: f64, l: f64) -> Result<()> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::invalid("R", format!("must be positive, got {r}")));
    }
    if !(l.is_finite() && l > 0.0) {
        return Err(Error::invalid("L", format!("must be positive, got {l}")));
    }
    Ok(())
}

/// Constant step size anchored to a horizon: `R/(L*sqrt(horizon))`.
pub fn eta_constant(r: f64, l: f64, horizon: usize, s: usize) -> Result<f64> {
    check_constants(r, l)?;
    if horizon < 1 {
        return Err(Error::invalid("horizon", "must be at least 1"));
    }
    if s < 1 || s > horizon {
        return Err(Error::StepOutOfRange { s, max: horizon });
    }
    Ok((r / l) / (horizon as f64).sqrt())
}

/// Time-varying step size `R/(L*sqrt(s))`.
pub fn eta_sqrt_decay(r: f64, l: f64, s: usize) -> Result<f64> {
    check_constants(r, l)?;
    if s < 1 {
        return Err(Error::StepOutOfRange { s, max: usize::MAX });
    }
    Ok((r / l) / (s as f64).sqrt())
}

impl StepSchedule {
    pub fn constant(r: f64, l: f64, horizon: usize) -> Result<Self> {
        check_constants(r, l)?;
        if horizon < 1 {
            return Err(Error::invalid("horizon", "must be at least 1"));
        }
        Ok(StepSchedule::Constant { r, l, horizon })
    }

    pub fn sqrt_decay(r: f64, l: f64) -> Result<Self> {
        check_constants(r, l)?;
        Ok(StepSchedule::SqrtDecay { r, l })
    }

    /// Wraps an explicit value list. Positivity and monotonicity are checked
    /// by [`StepSchedule::validate`], not here.
    pub fn custom(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("custom schedule", "value list is empty"));
        }
        Ok(StepSchedule::Custom { values })
    }

    /// Reads a custom schedule file: one decimal value per line, `eta_s` on
    /// line `s`.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_custom(&text)
    }

    /// Parses the custom schedule file format from a string.
    pub fn parse_custom(text: &str) -> Result<Self> {
        let mut values = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                return Err(Error::Parse {
                    line: i + 1,
                    detail: "empty line in schedule file".into(),
                });
            }
            let v: f64 = line.parse().map_err(|e| Error::Parse {
                line: i + 1,
                detail: format!("{e}: {line:?}"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line: i + 1,
                    detail: format!("non-finite value {v}"),
                });
            }
            values.push(v);
        }
        Self::custom(values)
    }

    /// The step size at 1-based index `s`.
    pub fn eta(&self, s: usize) -> Result<f64> {
        match self {
            StepSchedule::Constant { r, l, horizon } => eta_constant(*r, *l, *horizon, s),
            StepSchedule::SqrtDecay { r, l } => eta_sqrt_decay(*r, *l, s),
            StepSchedule::Custom { values } => {
                if s < 1 || s > values.len() {
                    return Err(Error::StepOutOfRange {
                        s,
                        max: values.len(),
                    });
                }
                Ok(values[s - 1])
            }
        }
    }

    /// Largest usable step index, if the schedule is finite.
    pub fn max_horizon(&self) -> Option<usize> {
        match self {
            StepSchedule::Constant { horizon, .. } => Some(*horizon),
            StepSchedule::SqrtDecay { .. } => None,
            StepSchedule::Custom { values } => Some(values.len()),
        }
    }

    /// Checks positivity and monotonicity of every step up to `horizon`,
    /// reporting the first violating index.
    pub fn validate(&self, horizon: usize) -> std::result::Result<(), ScheduleViolation> {
        match self {
            StepSchedule::Custom { values } if values.len() < horizon => {
                return Err(ScheduleViolation {
                    index: values.len() + 1,
                    kind: ViolationKind::TooShort { len: values.len() },
                });
            }
            StepSchedule::Constant {
                horizon: declared, ..
            } if *declared < horizon => {
                return Err(ScheduleViolation {
                    index: declared + 1,
                    kind: ViolationKind::BeyondDeclaredHorizon {
                        declared: *declared,
                    },
                });
            }
            _ => {}
        }
        let mut prev = f64::INFINITY;
        for s in 1..=horizon {
            // eta() cannot fail here: range and constants were checked above
            // or at construction.
            let v = self.eta(s).expect("validated range");
            if !(v.is_finite() && v > 0.0) {
                return Err(ScheduleViolation {
                    index: s,
                    kind: ViolationKind::NonPositive { value: v },
                });
            }
            if v > prev {
                return Err(ScheduleViolation {
                    index: s,
                    kind: ViolationKind::Increasing {
                        previous: prev,
                        value: v,
                    },
                });
            }
            prev = v;
        }
        Ok(())
    }

    /// Short human-readable form for trace headers.
    pub fn label(&self) -> String {
        match self {
            StepSchedule::Constant { r, l, horizon } => {
                format!("constant(R={r},L={l},horizon={horizon})")
            }
            StepSchedule::SqrtDecay { r, l } => format!("sqrt-decay(R={r},L={l})"),
            StepSchedule::Custom { values } => format!("custom(len={})", values.len()),
        }
    }
}
