//! Flows of X1, X2, X3 on the variety and the leaf charts they generate.

mod chart;
mod projection;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, TruncationReason};
use crate::integrator::{integrate, Control, Outcome, StepControl};
use crate::variety::{distance_to_singular, eval_g, eval_x, f_relative, Axis, State, VarietyPoint};

pub use chart::{build_chart, transform_chart, ChartBranch, ChartDiagnostics, LeafChart, NodeStatus};
pub use projection::project;

/// When the Newton projection onto the variety runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Projection {
    Off,
    EveryStep,
    EveryKSteps(usize),
}

/// Tolerances and safeguards for flow integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Largest step in leaf-coordinate units.
    pub max_step: f64,
    pub projection: Projection,
    pub projection_tol: f64,
    /// Minimum allowed distance to the singular lines.
    pub singular_guard: f64,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: 0.05,
            projection: Projection::EveryStep,
            projection_tol: 1e-12,
            singular_guard: 1e-3,
            max_steps: 200_000,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
            ("max_step", self.max_step),
            ("projection_tol", self.projection_tol),
            ("singular_guard", self.singular_guard),
        ];
        for (name, value) in positive {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {value}")));
            }
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidConfig("max_steps must be positive".into()));
        }
        if self.projection == Projection::EveryKSteps(0) {
            return Err(Error::InvalidConfig("every_k_steps needs k >= 1".into()));
        }
        Ok(())
    }

    pub fn step_control(&self) -> StepControl {
        StepControl {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_step: self.max_step,
            min_step: 1e-13 * self.max_step.max(1e-3),
            max_steps: self.max_steps,
        }
    }

    fn projects_at(&self, step: usize) -> bool {
        match self.projection {
            Projection::Off => false,
            Projection::EveryStep => true,
            Projection::EveryKSteps(k) => step % k == 0,
        }
    }
}

/// How a flow leg ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathStatus {
    Completed,
    Truncated(TruncationReason),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowSample {
    pub t: f64,
    pub point: State,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FlowDiagnostics {
    /// Largest |F| / x1^12 over the samples.
    pub max_f_drift: f64,
    /// Largest |G| over the samples.
    pub max_g_drift: f64,
    pub steps: usize,
    pub rejected: usize,
    /// Whether the seed lay on a singular line (guard and projection disabled).
    pub singular_line: bool,
}

/// An integral curve of one field, sampled at every accepted step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowPath {
    pub field: Axis,
    pub samples: Vec<FlowSample>,
    pub status: PathStatus,
    pub diagnostics: FlowDiagnostics,
}

impl FlowPath {
    pub fn end(&self) -> &FlowSample {
        self.samples.last().expect("a path holds at least its seed")
    }
}

/// Result of a single leg without the stored samples.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Leg {
    pub end: State,
    pub t: f64,
    pub status: PathStatus,
    pub steps: usize,
    pub rejected: usize,
}

/// Whether a seed is close enough to the singular lines to be treated as lying on them.
pub fn on_singular_line(q: &State, cfg: &IntegratorConfig) -> bool {
    distance_to_singular(q) < cfg.singular_guard
}

/// Flows `q` along X_axis for time `t`, calling `record` after every accepted step.
///
/// `singular` disables the guard and the projection (the singular lines are invariant).
pub(crate) fn run_leg(
    q: &State,
    axis: Axis,
    t: f64,
    cfg: &IntegratorConfig,
    singular: bool,
    mut record: impl FnMut(f64, &State),
) -> Leg {
    let mut hit_guard = false;
    let mut steps = 0usize;
    let result = integrate(
        |y: &State| eval_x(axis, y).ok(),
        *q,
        t,
        &cfg.step_control(),
        |time, y| {
            steps += 1;
            if !singular {
                if cfg.projects_at(steps) {
                    let before = *y;
                    project(y, cfg.projection_tol);
                    if y.iter().any(|v| !v.is_finite()) {
                        *y = before;
                        record(time, y);
                        return Control::Stop;
                    }
                }
                if distance_to_singular(y) < cfg.singular_guard {
                    hit_guard = true;
                    record(time, y);
                    return Control::Stop;
                }
            }
            record(time, y);
            Control::Continue
        },
    );
    let status = match result.outcome {
        Outcome::Reached => PathStatus::Completed,
        Outcome::Stopped if hit_guard => PathStatus::Truncated(TruncationReason::Singular),
        Outcome::Stopped | Outcome::Underflow => PathStatus::Truncated(TruncationReason::Domain),
    };
    Leg { end: result.y, t: result.t, status, steps: result.accepted, rejected: result.rejected }
}

/// Integrates q' = X_i(q) from the seed to `t_end`.
pub fn integrate_flow(seed: &VarietyPoint, axis: Axis, t_end: f64, cfg: &IntegratorConfig) -> Result<FlowPath> {
    cfg.validate()?;
    if !t_end.is_finite() {
        return Err(Error::NonFinite(format!("t_end = {t_end}")));
    }
    let q0 = *seed.state();
    let singular = on_singular_line(&q0, cfg);
    let mut samples = vec![FlowSample { t: 0.0, point: q0 }];
    let leg = run_leg(&q0, axis, t_end, cfg, singular, |t, y| samples.push(FlowSample { t, point: *y }));
    let mut diagnostics = FlowDiagnostics {
        steps: leg.steps,
        rejected: leg.rejected,
        singular_line: singular,
        ..Default::default()
    };
    for s in &samples {
        if s.point.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("state at t = {}", s.t)));
        }
        diagnostics.max_f_drift = diagnostics.max_f_drift.max(f_relative(&s.point));
        diagnostics.max_g_drift = diagnostics.max_g_drift.max(eval_g(&s.point).abs());
    }
    Ok(FlowPath { field: axis, samples, status: leg.status, diagnostics })
}

/// Flows `q` by `t` along X_axis, failing on truncation.
pub fn flow_point(q: &State, axis: Axis, t: f64, cfg: &IntegratorConfig) -> Result<State> {
    let singular = on_singular_line(q, cfg);
    let leg = run_leg(q, axis, t, cfg, singular, |_, _| {});
    match leg.status {
        PathStatus::Completed => Ok(leg.end),
        PathStatus::Truncated(reason) => Err(Error::Truncated { t: leg.t, reason }),
    }
}

/// φ_σ(u) = φ³(u3, φ²(u2, φ¹(u1, p))).
pub fn phi_sigma(seed: &VarietyPoint, u: [f64; 3], cfg: &IntegratorConfig) -> Result<VarietyPoint> {
    cfg.validate()?;
    let singular = on_singular_line(seed.state(), cfg);
    let mut q = *seed.state();
    for axis in Axis::ALL {
        let leg = run_leg(&q, axis, u[axis.index()], cfg, singular, |_, _| {});
        if let PathStatus::Truncated(reason) = leg.status {
            return Err(Error::Truncated { t: leg.t, reason });
        }
        q = leg.end;
    }
    VarietyPoint::with_tolerance(q, 1e3)
}

/// ‖(φⁱ_h ∘ φʲ_h)(q) − (φʲ_h ∘ φⁱ_h)(q)‖.
pub fn commutator_residual(q: &VarietyPoint, i: Axis, j: Axis, h: f64, cfg: &IntegratorConfig) -> Result<f64> {
    cfg.validate()?;
    if i == j {
        return Ok(0.0);
    }
    let p = q.state();
    let a = flow_point(&flow_point(p, j, h, cfg)?, i, h, cfg)?;
    let b = flow_point(&flow_point(p, i, h, cfg)?, j, h, cfg)?;
    Ok(a.iter().zip(&b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt())
}
