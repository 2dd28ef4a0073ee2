//! The singular half-lines of the variety.

use serde::{Deserialize, Serialize};

use super::State;

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// One of the two half-lines x = s(1, √2, 1), y = (0, ±1, 0), s > 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SingularLine {
    Minus,
    Plus,
}

impl SingularLine {
    pub const BOTH: [SingularLine; 2] = [SingularLine::Minus, SingularLine::Plus];

    fn y2(self) -> f64 {
        match self {
            SingularLine::Minus => -1.0,
            SingularLine::Plus => 1.0,
        }
    }

    /// (e^t, √2 e^t, e^t, 0, ±1, 0). Along the positive line this is the flow of X2; along
    /// the negative line X2 points the other way, so the flow time is -t.
    pub fn point(self, t: f64) -> State {
        let s = t.exp();
        [s, SQRT2 * s, s, 0.0, self.y2(), 0.0]
    }

    /// Euclidean distance from `q` to the closure of this half-line.
    pub fn distance(self, q: &State) -> f64 {
        let [x1, x2, x3, y1, y2, y3] = *q;
        // the x-part is a quadratic in s with minimizer <x, (1, √2, 1)> / 4
        let s = ((x1 + SQRT2 * x2 + x3) / 4.0).max(0.0);
        let dx = (x1 - s).powi(2) + (x2 - SQRT2 * s).powi(2) + (x3 - s).powi(2);
        let dy = y1 * y1 + (y2 - self.y2()).powi(2) + y3 * y3;
        (dx + dy).sqrt()
    }
}

/// Distance from `q` to the singular set, the union of both half-lines.
pub fn distance_to_singular(q: &State) -> f64 {
    SingularLine::Minus.distance(q).min(SingularLine::Plus.distance(q))
}
