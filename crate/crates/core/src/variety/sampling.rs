//! Sampling points of the variety by solving F = 0 for one y-coordinate.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::polynomials::{eval_f, grad_f};
use super::{VarietyPoint, State};
use crate::error::{Error, Result};

/// Which y-coordinate `sample_point` solves for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveFor {
    Y1,
    Y2,
    Y3,
    /// y2, or y3 when x1 and x3 are too close for the y2 coefficient to be usable.
    #[default]
    Auto,
}

impl SolveFor {
    fn slot(self) -> usize {
        match self {
            SolveFor::Y1 => 3,
            SolveFor::Y2 | SolveFor::Auto => 4,
            SolveFor::Y3 => 5,
        }
    }

    fn name(self) -> &'static str {
        match self {
            SolveFor::Y1 => "y1",
            SolveFor::Y2 | SolveFor::Auto => "y2",
            SolveFor::Y3 => "y3",
        }
    }
}

/// Builds a variety point with x2 = sqrt(x1^2 + x3^2), the two free y-coordinates taken
/// from `y_free` in index order, and the remaining one solved from F = 0 with the sign
/// of `sign`.
pub fn sample_point(x1: f64, x3: f64, y_free: [f64; 2], branch: SolveFor, sign: f64) -> Result<VarietyPoint> {
    for (index, value) in [(1, x1), (3, x3)] {
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::NonPositiveMetric { index, value });
        }
    }
    if y_free.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("free y-coordinates {y_free:?}")));
    }
    let branch = match branch {
        SolveFor::Auto if (x1 - x3).abs() < 1e-8 * x1 => SolveFor::Y3,
        other => other,
    };
    let x2 = (x1 * x1 + x3 * x3).sqrt();
    let slot = branch.slot();
    let mut q: State = [x1, x2, x3, 0.0, 0.0, 0.0];
    let mut free = y_free.into_iter();
    for k in 3..6 {
        if k != slot {
            q[k] = free.next().expect("two free coordinates");
        }
    }
    // F is quadratic in the solved coordinate with no linear term
    let rest = eval_f(&q);
    q[slot] = 1.0;
    let coefficient = eval_f(&q) - rest;
    let scale = x1.max(x2).max(x3).powi(12);
    if coefficient.abs() <= 1e-12 * scale {
        return Err(Error::DegenerateBranch { coordinate: branch.name() });
    }
    let square = -rest / coefficient;
    if square < 0.0 {
        return Err(Error::InfeasibleSample { coordinate: branch.name(), discriminant: square });
    }
    q[slot] = sign.signum() * square.sqrt();
    let slope = grad_f(&q)?[slot];
    if slope != 0.0 {
        q[slot] -= eval_f(&q) / slope;
    }
    VarietyPoint::new(q)
}

/// Box of candidate sample parameters for randomized sampling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleRegion {
    pub x1: [f64; 2],
    pub x3: [f64; 2],
    /// Range of both free y-coordinates.
    pub y: [f64; 2],
    pub branch: SolveFor,
}

impl Default for SampleRegion {
    fn default() -> Self {
        Self { x1: [0.5, 2.0], x3: [0.5, 2.0], y: [-1.0, 1.0], branch: SolveFor::Auto }
    }
}

impl SampleRegion {
    pub fn validate(&self) -> Result<()> {
        for (name, [lo, hi]) in [("x1", self.x1), ("x3", self.x3), ("y", self.y)] {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::InvalidConfig(format!("{name} range [{lo}, {hi}] is empty or not finite")));
            }
        }
        if !(self.x1[0] > 0.0 && self.x3[0] > 0.0) {
            return Err(Error::InvalidConfig("x ranges must be positive".into()));
        }
        Ok(())
    }

    /// One draw: uniform parameters and a random branch sign, then `sample_point`.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<VarietyPoint> {
        let x1 = rng.random_range(self.x1[0]..=self.x1[1]);
        let x3 = rng.random_range(self.x3[0]..=self.x3[1]);
        let y = [rng.random_range(self.y[0]..=self.y[1]), rng.random_range(self.y[0]..=self.y[1])];
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        sample_point(x1, x3, y, self.branch, sign)
    }

    /// Draws until `n` points succeed or `max_attempts` draws have been made.
    pub fn draw_many<R: Rng + ?Sized>(&self, rng: &mut R, n: usize, max_attempts: usize) -> (Vec<VarietyPoint>, usize) {
        let mut out = Vec::with_capacity(n);
        let mut attempts = 0;
        while out.len() < n && attempts < max_attempts {
            attempts += 1;
            if let Ok(p) = self.draw(rng) {
                out.push(p);
            }
        }
        (out, attempts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::variety::{eval_g, f_relative};

    #[test]
    fn solves_y2_example() {
        let p = sample_point(1.0, 2.0, [1.0, 0.0], SolveFor::Y2, 1.0).unwrap();
        assert!((p.y()[1] - 177.6f64.sqrt()).abs() < 1e-9);
        assert!((p.y()[1] - 13.32667).abs() < 1e-5);
        assert!(f_relative(p.state()) <= 1e-10);
        assert!(eval_g(p.state()).abs() <= 1e-12);
    }

    #[test]
    fn equal_outer_coefficients_reject_y2() {
        let err = sample_point(1.0, 1.0, [0.0, 0.0], SolveFor::Y2, 1.0).unwrap_err();
        assert!(matches!(err, Error::DegenerateBranch { .. }));
    }

    #[test]
    fn auto_falls_back_to_y3() {
        let p = sample_point(1.0, 1.0, [0.3, 0.5], SolveFor::Auto, -1.0).unwrap();
        assert_eq!(p.y()[0], 0.3);
        assert_eq!(p.y()[1], 0.5);
        assert!(p.y()[2] < 0.0);
    }

    #[test]
    fn region_draws_are_reproducible() {
        use rand::SeedableRng;
        let region = SampleRegion::default();
        let a = region.draw_many(&mut rand_chacha::ChaCha8Rng::seed_from_u64(7), 5, 100).0;
        let b = region.draw_many(&mut rand_chacha::ChaCha8Rng::seed_from_u64(7), 5, 100).0;
        assert_eq!(a, b);
        assert_eq!(a.len(), 5);
    }

    #[test]
    fn infeasible_region_is_reported() {
        // at x = (2, √5, 1) the y1 term outweighs the constant term once y1^2 > 15
        let err = sample_point(2.0, 1.0, [4.0, 0.0], SolveFor::Y2, 1.0).unwrap_err();
        assert!(matches!(err, Error::InfeasibleSample { .. }), "{err:?}");
    }
}
