//! First and second fundamental forms recovered from an immersion grid by finite differences.

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use super::fd::{active_axes, first_derivative, is_interior, second_derivative, shifted};
use super::{FdOrder, ImmersionGrid};
use crate::error::{Error, Result};

/// Forms at one interior node. Rows and columns of inactive axes are zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeForms {
    pub index: [usize; 3],
    pub metric: [[f64; 3]; 3],
    pub second: [[f64; 3]; 3],
    /// max_k |g_kk − v_k²| / v_k²
    pub metric_diag_rel: f64,
    /// max_{k≠l} |g_kl| / (v_k v_l)
    pub metric_off_diag: f64,
    /// max_k |b_kk − V_k v_k|
    pub second_diag: f64,
    /// max_{k≠l} |b_kl|
    pub second_off_diag: f64,
    /// tr(g⁻¹ b), only when all three axes are active.
    pub mean_curvature: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormsReport {
    pub order: FdOrder,
    pub active: [bool; 3],
    pub nodes: Vec<NodeForms>,
    pub max_metric_diag_rel: f64,
    pub max_metric_off_diag: f64,
    pub max_second_diag: f64,
    pub max_second_off_diag: f64,
    pub max_mean_curvature: Option<f64>,
}

/// Differentiates positions on every interior node whose whole stencil is ok and compares
/// against the grid's stored v and V.
pub fn fundamental_forms_fd(grid: &ImmersionGrid, order: FdOrder) -> Result<FormsReport> {
    grid.validate()?;
    let counts = grid.grid.counts();
    let active = active_axes(counts, order);
    if !active.iter().any(|&a| a) {
        return Err(Error::GridMismatch(format!(
            "no axis has the {} nodes a {order:?} stencil needs",
            2 * order.radius() + 1
        )));
    }
    let spacing = grid.grid.axes().map(|a| a.spacing());
    let amb = grid.ambient;
    let position = |i: [usize; 3]| grid.position(i).to_vec();
    let axes: Vec<usize> = (0..3).filter(|&k| active[k]).collect();
    let full = axes.len() == 3;

    let mut report = FormsReport {
        order,
        active,
        nodes: Vec::new(),
        max_metric_diag_rel: 0.0,
        max_metric_off_diag: 0.0,
        max_second_diag: 0.0,
        max_second_off_diag: 0.0,
        max_mean_curvature: full.then_some(0.0),
    };

    for flat in 0..grid.grid.len() {
        let i = grid.grid.multi_index(flat);
        if !is_interior(i, counts, active, order) || !stencil_ok(grid, i, &axes, order) {
            continue;
        }
        let normal = &grid.frames[flat][3];
        let (v, big_v) = (grid.metric[flat], grid.second_form[flat]);
        let tangents: Vec<Vec<f64>> =
            (0..3).map(|k| if active[k] { first_derivative(i, k, spacing[k], order, &position) } else { Vec::new() }).collect();
        let mut node = NodeForms {
            index: i,
            metric: [[0.0; 3]; 3],
            second: [[0.0; 3]; 3],
            metric_diag_rel: 0.0,
            metric_off_diag: 0.0,
            second_diag: 0.0,
            second_off_diag: 0.0,
            mean_curvature: None,
        };
        for &a in &axes {
            for &b in &axes {
                if b < a {
                    continue;
                }
                let g = amb.inner(&tangents[a], &tangents[b]);
                let mixed = second_derivative(i, a, b, spacing[a], spacing[b], order, &position);
                let s = amb.inner(&mixed, normal);
                node.metric[a][b] = g;
                node.metric[b][a] = g;
                node.second[a][b] = s;
                node.second[b][a] = s;
                if a == b {
                    node.metric_diag_rel = node.metric_diag_rel.max((g - v[a] * v[a]).abs() / (v[a] * v[a]));
                    node.second_diag = node.second_diag.max((s - big_v[a] * v[a]).abs());
                } else {
                    node.metric_off_diag = node.metric_off_diag.max(g.abs() / (v[a] * v[b]));
                    node.second_off_diag = node.second_off_diag.max(s.abs());
                }
            }
        }
        if full {
            let g = Matrix3::from_fn(|r, c| node.metric[r][c]);
            let b = Matrix3::from_fn(|r, c| node.second[r][c]);
            node.mean_curvature = g.try_inverse().map(|inv| (inv * b).trace());
        }
        report.max_metric_diag_rel = report.max_metric_diag_rel.max(node.metric_diag_rel);
        report.max_metric_off_diag = report.max_metric_off_diag.max(node.metric_off_diag);
        report.max_second_diag = report.max_second_diag.max(node.second_diag);
        report.max_second_off_diag = report.max_second_off_diag.max(node.second_off_diag);
        if let (Some(worst), Some(h)) = (report.max_mean_curvature.as_mut(), node.mean_curvature) {
            *worst = worst.max(h.abs());
        }
        report.nodes.push(node);
    }
    if report.nodes.is_empty() {
        return Err(Error::GridMismatch("no interior node has a complete ok stencil".into()));
    }
    Ok(report)
}

fn stencil_ok(grid: &ImmersionGrid, i: [usize; 3], axes: &[usize], order: FdOrder) -> bool {
    let r = order.radius() as isize;
    let ok = |j: [usize; 3]| grid.status[grid.grid.index(j)].is_ok();
    for &a in axes {
        for oa in -r..=r {
            if !ok(shifted(i, a, oa)) {
                return false;
            }
            for &b in axes.iter().filter(|&&b| b > a) {
                for ob in -r..=r {
                    if !ok(shifted(shifted(i, a, oa), b, ob)) {
                        return false;
                    }
                }
            }
        }
    }
    true
}
