//! Rectangular grids in the leaf coordinates (u1, u2, u3).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::variety::GroupElement;

/// Uniform nodes `min, min + h, ..., max` along one coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisGrid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl AxisGrid {
    /// `count` nodes spaced `spacing` apart with the origin at position `origin`.
    pub fn around_origin(origin: usize, count: usize, spacing: f64) -> Self {
        let min = -(origin as f64) * spacing;
        let max = (count - 1 - origin) as f64 * spacing;
        Self { min, max, count }
    }

    /// Symmetric grid with `2 * half + 1` nodes.
    pub fn symmetric(half: usize, spacing: f64) -> Self {
        Self::around_origin(half, 2 * half + 1, spacing)
    }

    pub fn single() -> Self {
        Self { min: 0.0, max: 0.0, count: 1 }
    }

    pub fn spacing(&self) -> f64 {
        if self.count <= 1 {
            0.0
        } else {
            (self.max - self.min) / (self.count - 1) as f64
        }
    }

    /// Index of the node at u = 0.
    pub fn origin(&self) -> usize {
        if self.count <= 1 {
            0
        } else {
            (-self.min / self.spacing()).round() as usize
        }
    }

    /// Coordinate of node `k`, measured from the origin node so that it is exactly zero there.
    pub fn value(&self, k: usize) -> f64 {
        (k as f64 - self.origin() as f64) * self.spacing()
    }

    fn validate(&self, name: &str) -> Result<()> {
        if self.count == 0 {
            return Err(Error::InvalidConfig(format!("{name}: count must be at least 1")));
        }
        if !self.min.is_finite() || !self.max.is_finite() {
            return Err(Error::InvalidConfig(format!("{name}: bounds must be finite")));
        }
        if self.count == 1 {
            if self.min != 0.0 || self.max != 0.0 {
                return Err(Error::InvalidConfig(format!("{name}: a single node must sit at 0")));
            }
            return Ok(());
        }
        if !(self.min <= 0.0 && self.max >= 0.0 && self.max > self.min) {
            return Err(Error::InvalidConfig(format!("{name}: range [{}, {}] must contain 0", self.min, self.max)));
        }
        let pos = -self.min / self.spacing();
        if (pos - pos.round()).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!("{name}: u = 0 is not a grid node")));
        }
        Ok(())
    }

    fn reversed(&self) -> Self {
        Self { min: -self.max, max: -self.min, count: self.count }
    }
}

/// Per-axis grids for (u1, u2, u3). Nodes are stored row-major in (i1, i2, i3).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub u1: AxisGrid,
    pub u2: AxisGrid,
    pub u3: AxisGrid,
}

impl GridSpec {
    pub fn new(u1: AxisGrid, u2: AxisGrid, u3: AxisGrid) -> Self {
        Self { u1, u2, u3 }
    }

    pub fn single() -> Self {
        Self::new(AxisGrid::single(), AxisGrid::single(), AxisGrid::single())
    }

    pub fn validate(&self) -> Result<()> {
        self.u1.validate("u1")?;
        self.u2.validate("u2")?;
        self.u3.validate("u3")
    }

    pub fn axes(&self) -> [AxisGrid; 3] {
        [self.u1, self.u2, self.u3]
    }

    pub fn counts(&self) -> [usize; 3] {
        [self.u1.count, self.u2.count, self.u3.count]
    }

    pub fn len(&self) -> usize {
        self.u1.count * self.u2.count * self.u3.count
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: [usize; 3]) -> usize {
        (i[0] * self.u2.count + i[1]) * self.u3.count + i[2]
    }

    pub fn multi_index(&self, flat: usize) -> [usize; 3] {
        let i3 = flat % self.u3.count;
        let rest = flat / self.u3.count;
        [rest / self.u2.count, rest % self.u2.count, i3]
    }

    pub fn origin(&self) -> [usize; 3] {
        [self.u1.origin(), self.u2.origin(), self.u3.origin()]
    }

    pub fn coordinates(&self, i: [usize; 3]) -> [f64; 3] {
        [self.u1.value(i[0]), self.u2.value(i[1]), self.u3.value(i[2])]
    }

    /// The grid seen from the image chart under `g`: flipped axes are mirrored and the
    /// swap exchanges u1 with u3.
    pub fn transformed(&self, g: GroupElement) -> GridSpec {
        let mut axes = self.axes();
        for (k, axis) in axes.iter_mut().enumerate() {
            if g.signs[k] < 0 {
                *axis = axis.reversed();
            }
        }
        if g.swap {
            axes.swap(0, 2);
        }
        GridSpec::new(axes[0], axes[1], axes[2])
    }

    /// Index in `self.transformed(g)` of the node that corresponds to `i` under `g`.
    pub fn transformed_index(&self, g: GroupElement, i: [usize; 3]) -> [usize; 3] {
        let counts = self.counts();
        let mut j = i;
        for k in 0..3 {
            if g.signs[k] < 0 {
                j[k] = counts[k] - 1 - i[k];
            }
        }
        if g.swap {
            j.swap(0, 2);
        }
        j
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_is_exact_zero() {
        let g = AxisGrid { min: -0.2, max: 0.1, count: 31 };
        g.validate("u").unwrap();
        assert_eq!(g.origin(), 20);
        assert_eq!(g.value(20), 0.0);
        assert!((g.value(0) + 0.2).abs() < 1e-15);
    }

    #[test]
    fn rejects_grids_missing_zero() {
        assert!(AxisGrid { min: 0.1, max: 0.5, count: 5 }.validate("u").is_err());
        assert!(AxisGrid { min: -0.15, max: 0.1, count: 3 }.validate("u").is_err());
        assert!(AxisGrid { min: 0.0, max: 0.0, count: 0 }.validate("u").is_err());
    }

    #[test]
    fn index_roundtrip() {
        let spec = GridSpec::new(AxisGrid::symmetric(2, 0.1), AxisGrid::symmetric(1, 0.1), AxisGrid::symmetric(3, 0.1));
        for flat in 0..spec.len() {
            assert_eq!(spec.index(spec.multi_index(flat)), flat);
        }
    }

    #[test]
    fn transformed_index_matches_reparametrization() {
        let spec = GridSpec::new(
            AxisGrid::around_origin(1, 4, 0.1),
            AxisGrid::around_origin(0, 3, 0.2),
            AxisGrid::around_origin(2, 3, 0.05),
        );
        for g in GroupElement::all() {
            let image = spec.transformed(g);
            image.validate().unwrap();
            for flat in 0..spec.len() {
                let i = spec.multi_index(flat);
                let w = g.reparametrize(spec.coordinates(i));
                let got = image.coordinates(spec.transformed_index(g, i));
                for k in 0..3 {
                    assert!((w[k] - got[k]).abs() < 1e-12, "{g} {i:?}");
                }
            }
        }
    }
}
