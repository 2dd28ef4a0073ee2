//! Deciding whether two reconstructed leaves are congruent up to a group element.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::LeafChart;
use crate::geometry::{congruence_fit, CongruenceFit, ImmersionGrid};
use crate::grid::GridSpec;
use crate::variety::GroupElement;

/// Congruent when the best RMS is at most this fraction of the first grid's diameter.
pub const CONGRUENCE_THRESHOLD: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub element: GroupElement,
    /// `None` when the reparametrized grid does not match the second grid.
    pub rms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CongruenceVerdict {
    pub congruent: bool,
    pub element: GroupElement,
    pub fit: CongruenceFit,
    pub threshold: f64,
    pub diameter: f64,
    pub candidates: Vec<Candidate>,
}

fn same_grid(a: &GridSpec, b: &GridSpec) -> bool {
    a.axes().iter().zip(b.axes()).all(|(x, y)| {
        let scale = 1e-9 * (x.max - x.min).abs().max(1.0);
        x.count == y.count && (x.min - y.min).abs() <= scale && (x.max - y.max).abs() <= scale
    })
}

/// Tries the 16 reparametrizations u ↦ ψ(u) induced by the group and fits grid B to grid A
/// through each node correspondence; the best fit decides the verdict.
pub fn congruence_classifier(chart_a: &LeafChart, chart_b: &LeafChart, grid_a: &ImmersionGrid, grid_b: &ImmersionGrid) -> Result<CongruenceVerdict> {
    for (chart, grid) in [(chart_a, grid_a), (chart_b, grid_b)] {
        chart.validate()?;
        grid.validate()?;
        if !same_grid(&chart.grid, &grid.grid) {
            return Err(Error::GridMismatch("grid was not reconstructed from the given chart".into()));
        }
    }
    let diameter = grid_a.diameter();
    let threshold = CONGRUENCE_THRESHOLD * diameter;
    let mut candidates = Vec::with_capacity(16);
    let mut best: Option<(GroupElement, CongruenceFit)> = None;
    for g in GroupElement::all() {
        let image = chart_a.grid.transformed(g);
        if !same_grid(&image, &chart_b.grid) {
            candidates.push(Candidate { element: g, rms: None });
            continue;
        }
        let pairs: Vec<(usize, usize)> = (0..chart_a.grid.len())
            .map(|flat| (flat, image.index(chart_a.grid.transformed_index(g, chart_a.grid.multi_index(flat)))))
            .collect();
        let fit = congruence_fit(grid_a, grid_b, Some(&pairs))?;
        candidates.push(Candidate { element: g, rms: Some(fit.rms) });
        // earlier elements win ties so the identity is preferred for symmetric leaves
        let better = match &best {
            None => true,
            Some((_, b)) => fit.rms < b.rms - 1e-12 * diameter.max(1.0),
        };
        if better {
            best = Some((g, fit));
        }
    }
    let (element, fit) = best.ok_or_else(|| Error::GridMismatch("no group reparametrization maps grid A onto grid B".into()))?;
    Ok(CongruenceVerdict { congruent: fit.rms <= threshold, element, fit, threshold, diameter, candidates })
}
