//! Central finite-difference stencils on uniform grids.

use serde::{Deserialize, Serialize};

/// Accuracy order of the central stencils.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FdOrder {
    Second,
    #[default]
    Fourth,
}

impl FdOrder {
    /// Nodes needed on each side of the evaluation point.
    pub fn radius(self) -> usize {
        match self {
            FdOrder::Second => 1,
            FdOrder::Fourth => 2,
        }
    }

    /// (offset, weight) pairs for the first derivative, to be divided by h.
    pub fn first(self) -> &'static [(isize, f64)] {
        match self {
            FdOrder::Second => &[(-1, -0.5), (1, 0.5)],
            FdOrder::Fourth => &[(-2, 1.0 / 12.0), (-1, -8.0 / 12.0), (1, 8.0 / 12.0), (2, -1.0 / 12.0)],
        }
    }

    /// (offset, weight) pairs for the second derivative, to be divided by h².
    pub fn second(self) -> &'static [(isize, f64)] {
        match self {
            FdOrder::Second => &[(-1, 1.0), (0, -2.0), (1, 1.0)],
            FdOrder::Fourth => &[
                (-2, -1.0 / 12.0),
                (-1, 16.0 / 12.0),
                (0, -30.0 / 12.0),
                (1, 16.0 / 12.0),
                (2, -1.0 / 12.0),
            ],
        }
    }
}

/// Which axes of a grid with these counts admit a full stencil.
pub fn active_axes(counts: [usize; 3], order: FdOrder) -> [bool; 3] {
    counts.map(|n| n > 2 * order.radius())
}

/// Whether node `i` has a full stencil along every active axis.
pub fn is_interior(i: [usize; 3], counts: [usize; 3], active: [bool; 3], order: FdOrder) -> bool {
    let r = order.radius();
    (0..3).all(|k| !active[k] || (i[k] >= r && i[k] + r < counts[k]))
}

pub fn shifted(i: [usize; 3], axis: usize, offset: isize) -> [usize; 3] {
    let mut j = i;
    j[axis] = (i[axis] as isize + offset) as usize;
    j
}

/// ∂/∂u_axis of a vector-valued node function.
pub fn first_derivative<F>(i: [usize; 3], axis: usize, h: f64, order: FdOrder, value: &F) -> Vec<f64>
where
    F: Fn([usize; 3]) -> Vec<f64>,
{
    let mut out: Vec<f64> = Vec::new();
    for &(offset, w) in order.first() {
        accumulate(&mut out, &value(shifted(i, axis, offset)), w / h);
    }
    out
}

/// ∂²/∂u_a∂u_b of a vector-valued node function.
pub fn second_derivative<F>(i: [usize; 3], a: usize, b: usize, ha: f64, hb: f64, order: FdOrder, value: &F) -> Vec<f64>
where
    F: Fn([usize; 3]) -> Vec<f64>,
{
    let mut out: Vec<f64> = Vec::new();
    if a == b {
        for &(offset, w) in order.second() {
            accumulate(&mut out, &value(shifted(i, a, offset)), w / (ha * ha));
        }
    } else {
        for &(oa, wa) in order.first() {
            for &(ob, wb) in order.first() {
                accumulate(&mut out, &value(shifted(shifted(i, a, oa), b, ob)), wa * wb / (ha * hb));
            }
        }
    }
    out
}

fn accumulate(out: &mut Vec<f64>, v: &[f64], w: f64) {
    if out.is_empty() {
        out.resize(v.len(), 0.0);
    }
    for (o, x) in out.iter_mut().zip(v) {
        *o += w * x;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencils_differentiate_polynomials_exactly() {
        let h = 0.1;
        let f = |i: [usize; 3]| {
            let (x, y) = (i[0] as f64 * h, i[1] as f64 * h);
            vec![x.powi(4) + x * y * y]
        };
        let i = [3, 3, 0];
        let dx = first_derivative(i, 0, h, FdOrder::Fourth, &f)[0];
        assert!((dx - (4.0 * 0.3f64.powi(3) + 0.09)).abs() < 1e-12);
        let dxy = second_derivative(i, 0, 1, h, h, FdOrder::Fourth, &f)[0];
        assert!((dxy - 2.0 * 0.3).abs() < 1e-12);
        let dxx = second_derivative(i, 0, 0, h, h, FdOrder::Fourth, &f)[0];
        assert!((dxx - 12.0 * 0.09).abs() < 1e-10);
    }
}
