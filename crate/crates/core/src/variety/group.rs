//! The finite symmetry group generated by the sign flips and the swap involution.

use serde::{Deserialize, Serialize};

use super::fields::eval_x;
use super::{check_positive, Axis, State};
use crate::error::{Error, Result};

/// A group element: first flip the y-signs by `signs`, then apply the swap if `swap` is set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupElement {
    pub swap: bool,
    pub signs: [i8; 3],
}

impl GroupElement {
    pub const IDENTITY: GroupElement = GroupElement { swap: false, signs: [1, 1, 1] };
    pub const SWAP: GroupElement = GroupElement { swap: true, signs: [1, 1, 1] };

    pub fn new(swap: bool, signs: [i8; 3]) -> Result<Self> {
        if signs.iter().any(|s| *s != 1 && *s != -1) {
            return Err(Error::InvalidConfig(format!("group signs must be +1 or -1, got {signs:?}")));
        }
        Ok(Self { swap, signs })
    }

    pub fn flip(signs: [i8; 3]) -> Self {
        Self { swap: false, signs }
    }

    /// All 16 elements, sign flips first then their composites with the swap.
    pub fn all() -> Vec<GroupElement> {
        let mut out = Vec::with_capacity(16);
        for swap in [false, true] {
            for bits in 0..8u8 {
                let s = |k: u8| if bits & (1 << k) == 0 { 1 } else { -1 };
                out.push(GroupElement { swap, signs: [s(0), s(1), s(2)] });
            }
        }
        out
    }

    /// The generators: the swap and the three single sign flips.
    pub fn generators() -> [GroupElement; 4] {
        [
            Self::SWAP,
            Self::flip([-1, 1, 1]),
            Self::flip([1, -1, 1]),
            Self::flip([1, 1, -1]),
        ]
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn compose(self, first: GroupElement) -> GroupElement {
        // moving a flip past the swap reverses its sign pattern
        let carried = if first.swap { reversed(self.signs) } else { self.signs };
        GroupElement {
            swap: self.swap ^ first.swap,
            signs: [
                carried[0] * first.signs[0],
                carried[1] * first.signs[1],
                carried[2] * first.signs[2],
            ],
        }
    }

    pub fn inverse(self) -> GroupElement {
        Self::all()
            .into_iter()
            .find(|g| g.compose(self) == Self::IDENTITY)
            .expect("every element has an inverse")
    }

    /// Smallest n >= 1 with self^n = identity.
    pub fn order(self) -> usize {
        let mut acc = self;
        let mut n = 1;
        while acc != Self::IDENTITY {
            acc = self.compose(acc);
            n += 1;
        }
        n
    }

    /// Applies the element to a point of R^6.
    pub fn apply(self, q: &State) -> Result<State> {
        let [x1, x2, x3, y1, y2, y3] = *q;
        let [e1, e2, e3] = self.signs.map(f64::from);
        let (y1, y2, y3) = (e1 * y1, e2 * y2, e3 * y3);
        if !self.swap {
            return Ok([x1, x2, x3, y1, y2, y3]);
        }
        check_positive(q)?;
        Ok([
            x3,
            x2,
            x1,
            x2.powi(4) / x1.powi(4) * y3,
            x1.powi(4) / x3.powi(4) * y2,
            x3.powi(4) / x2.powi(4) * y1,
        ])
    }

    /// Axis that X_i is carried to.
    pub fn carried_axis(self, axis: Axis) -> Axis {
        if self.swap {
            match axis {
                Axis::U1 => Axis::U3,
                Axis::U2 => Axis::U2,
                Axis::U3 => Axis::U1,
            }
        } else {
            axis
        }
    }

    /// Leaf-coordinate map: the node `u` of a chart at p corresponds to the node
    /// `reparametrize(u)` of the chart at the image of p.
    pub fn reparametrize(self, u: [f64; 3]) -> [f64; 3] {
        let w = [
            f64::from(self.signs[0]) * u[0],
            f64::from(self.signs[1]) * u[1],
            f64::from(self.signs[2]) * u[2],
        ];
        if self.swap {
            reversed(w)
        } else {
            w
        }
    }

    /// Expected image of X_i under the differential: sign times the carried field at g(q).
    pub fn pushed_field(self, axis: Axis, q: &State) -> Result<State> {
        let image = self.apply(q)?;
        let sign = f64::from(self.signs[axis.index()]);
        Ok(eval_x(self.carried_axis(axis), &image)?.map(|v| sign * v))
    }
}

impl Default for GroupElement {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl std::fmt::Display for GroupElement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let [a, b, c] = self.signs;
        if self.swap {
            write!(f, "swap∘flip({a:+},{b:+},{c:+})")
        } else {
            write!(f, "flip({a:+},{b:+},{c:+})")
        }
    }
}

fn reversed<T: Copy>(v: [T; 3]) -> [T; 3] {
    [v[2], v[1], v[0]]
}

/// ‖DΘ(q)·X_i(q) − ε_i X_σ(i)(Θ(q))‖ with a central-difference Jacobian of Θ.
pub fn pushforward_residual(g: GroupElement, q: &State, axis: Axis) -> Result<f64> {
    let norm = q.iter().map(|v| v * v).sum::<f64>().sqrt();
    let step = 1e-6 * (1.0 + norm);
    let field = eval_x(axis, q)?;
    let mut pushed = [0.0; 6];
    for k in 0..6 {
        let (mut a, mut b) = (*q, *q);
        a[k] += step;
        b[k] -= step;
        let (ga, gb) = (g.apply(&a)?, g.apply(&b)?);
        for r in 0..6 {
            pushed[r] += (ga[r] - gb[r]) / (2.0 * step) * field[k];
        }
    }
    let want = g.pushed_field(axis, q)?;
    Ok(pushed.iter().zip(want).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
}
