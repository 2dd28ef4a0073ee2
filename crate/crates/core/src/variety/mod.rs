//! The variety M⁴ ⊂ R⁶ cut out by G = 0 and F = 0, its vector fields and symmetries.
//!
//! Points are stored as `[x1, x2, x3, y1, y2, y3]`, where x are the metric
//! coefficients and y the logarithmic derivatives of a leaf.

mod fields;
mod group;
mod polynomials;
mod sampling;
mod singular;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use fields::{cmc_obstruction, cmc_quadratic, eval_field_general, eval_x, CmcObstruction};
pub use group::{pushforward_residual, GroupElement};
pub use polynomials::{eval_a, eval_f, eval_g, f_relative, grad_f, grad_f_on_variety, grad_g};
pub use sampling::{sample_point, SampleRegion, SolveFor};
pub use singular::{distance_to_singular, SingularLine};

/// A raw point of R^6.
pub type State = [f64; 6];

/// Absolute bound on |G| for points of moderate size.
pub const TOL_G: f64 = 1e-12;
/// Bound on |F| / x1^12.
pub const TOL_F: f64 = 1e-10;

/// Tolerance on |G| at `q`, scaled by x2^2 once coordinates exceed one.
pub fn g_tolerance(q: &State) -> f64 {
    TOL_G * q[1].powi(2).max(1.0)
}

/// Leaf coordinate direction, equivalently the index of the vector field X_i.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub enum Axis {
    U1,
    U2,
    U3,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::U1, Axis::U2, Axis::U3];

    /// Zero-based position.
    pub fn index(self) -> usize {
        self as usize
    }

    /// One-based field number.
    pub fn number(self) -> usize {
        self as usize + 1
    }
}

impl TryFrom<usize> for Axis {
    type Error = Error;

    fn try_from(n: usize) -> Result<Self> {
        match n {
            1 => Ok(Axis::U1),
            2 => Ok(Axis::U2),
            3 => Ok(Axis::U3),
            other => Err(Error::InvalidIndex(other)),
        }
    }
}

impl From<Axis> for usize {
    fn from(a: Axis) -> usize {
        a.number()
    }
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "u{}", self.number())
    }
}

pub(crate) fn check_positive(q: &State) -> Result<()> {
    for (k, &value) in q[..3].iter().enumerate() {
        if !(value > 0.0) {
            return Err(Error::NonPositiveMetric { index: k + 1, value });
        }
    }
    Ok(())
}

/// A point that passed the membership test: positive x, |G| and |F|/x1^12 within
/// tolerance, and y ≠ 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "State", into = "State")]
pub struct VarietyPoint(State);

impl VarietyPoint {
    pub fn new(q: State) -> Result<Self> {
        Self::with_tolerance(q, 1.0)
    }

    /// Membership test with both tolerances multiplied by `slack`.
    pub fn with_tolerance(q: State, slack: f64) -> Result<Self> {
        if q.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("{q:?}")));
        }
        check_positive(&q)?;
        let g = eval_g(&q).abs();
        let f_rel = f_relative(&q);
        if g > slack * g_tolerance(&q) || f_rel > slack * TOL_F || q[3..].iter().all(|v| *v == 0.0) {
            return Err(Error::OffVariety { g, f_rel });
        }
        Ok(Self(q))
    }

    pub fn state(&self) -> &State {
        &self.0
    }

    pub fn x(&self) -> [f64; 3] {
        [self.0[0], self.0[1], self.0[2]]
    }

    pub fn y(&self) -> [f64; 3] {
        [self.0[3], self.0[4], self.0[5]]
    }
}

impl TryFrom<State> for VarietyPoint {
    type Error = Error;

    fn try_from(q: State) -> Result<Self> {
        Self::new(q)
    }
}

impl From<VarietyPoint> for State {
    fn from(p: VarietyPoint) -> State {
        p.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_from_index() {
        assert_eq!(Axis::try_from(2).unwrap(), Axis::U2);
        assert!(matches!(Axis::try_from(0), Err(Error::InvalidIndex(0))));
        assert!(matches!(Axis::try_from(4), Err(Error::InvalidIndex(4))));
    }

    #[test]
    fn membership_rejects_zero_y() {
        let q = [1.0, std::f64::consts::SQRT_2, 1.0, 0.0, 0.0, 0.0];
        assert!(VarietyPoint::new(q).is_err());
    }

    #[test]
    fn membership_accepts_line_point() {
        let q = SingularLine::Plus.point(0.3);
        assert!(VarietyPoint::new(q).is_ok());
    }

    #[test]
    fn serde_roundtrip_validates() {
        let p = VarietyPoint::new(SingularLine::Minus.point(0.0)).unwrap();
        let text = serde_json::to_string(&p).unwrap();
        let back: VarietyPoint = serde_json::from_str(&text).unwrap();
        assert_eq!(p, back);
        assert!(serde_json::from_str::<VarietyPoint>("[1,1,1,0,1,0]").is_err());
    }
}
