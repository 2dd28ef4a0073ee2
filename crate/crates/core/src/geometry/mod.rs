//! Holonomic data (metric, second form, connection), frame transport and the
//! reconstructed immersion.

pub(crate) mod fd;
mod forms;
mod procrustes;
mod transport;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::NodeStatus;
use crate::grid::GridSpec;
use crate::variety::{check_positive, State};

pub use fd::FdOrder;
pub use forms::{fundamental_forms_fd, FormsReport, NodeForms};
pub use procrustes::{congruence_fit, fit_points, CongruenceFit};
pub use transport::{integrate_immersion, transport_to_node, ImmersionOptions};

/// Signs δ = (1, −1, 1) of the conformal-flatness relations.
pub const DELTA: [f64; 3] = [1.0, -1.0, 1.0];

/// Holonomic data at one point: I = Σ v_i² du_i², II = Σ V_i v_i du_i² and the
/// rotation coefficients h_ij = (1/v_i) ∂v_j/∂u_i.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolonomicState {
    /// v
    pub metric: [f64; 3],
    /// V
    pub second_form: [f64; 3],
    /// h, zero on the diagonal
    pub rotation: [[f64; 3]; 3],
}

impl HolonomicState {
    /// (Σ δ_i v_i², Σ δ_i v_i V_i, Σ δ_i V_i² − 1).
    pub fn conformal_flatness_residuals(&self) -> [f64; 3] {
        let (v, w) = (self.metric, self.second_form);
        let mut out = [0.0, 0.0, -1.0];
        for i in 0..3 {
            out[0] += DELTA[i] * v[i] * v[i];
            out[1] += DELTA[i] * v[i] * w[i];
            out[2] += DELTA[i] * w[i] * w[i];
        }
        out
    }

    /// Σ V_i / v_i.
    pub fn mean_curvature(&self) -> f64 {
        principal_curvatures(self).iter().sum()
    }
}

/// Holonomic state of the hypersurface attached to a variety point, for mean curvature `h`.
pub fn state_from_variety(q: &State, h: f64) -> Result<HolonomicState> {
    check_positive(q)?;
    let [v1, v2, v3, a1, a2, a3] = *q;
    let second_form = [
        -(v2 / v3 + v3 / v2) / 3.0 + v1 * h / 3.0,
        -(v1 / v3 - v3 / v1) / 3.0 + v2 * h / 3.0,
        (v1 / v2 + v2 / v1) / 3.0 + v3 * h / 3.0,
    ];
    let mut rotation = [[0.0; 3]; 3];
    rotation[0][1] = v2 * a1 / v1;
    rotation[0][2] = v3.powi(5) * a1 / (v2.powi(4) * v1);
    rotation[1][0] = v1.powi(5) * a2 / (v3.powi(4) * v2);
    rotation[1][2] = v3 * a2 / v2;
    rotation[2][0] = v1 * a3 / v3;
    rotation[2][1] = v2.powi(5) * a3 / (v1.powi(4) * v3);
    Ok(HolonomicState { metric: [v1, v2, v3], second_form, rotation })
}

/// λ_i = V_i / v_i.
pub fn principal_curvatures(s: &HolonomicState) -> [f64; 3] {
    [0, 1, 2].map(|i| s.second_form[i] / s.metric[i])
}

/// v_j = sqrt(δ_j / ((λ_j − λ_i)(λ_j − λ_k))), with δ_j the sign of the product.
pub fn v_from_lambdas(lambda: [f64; 3]) -> Result<[f64; 3]> {
    let mut out = [0.0; 3];
    for j in 0..3 {
        let (i, k) = ((j + 1) % 3, (j + 2) % 3);
        let product = (lambda[j] - lambda[i]) * (lambda[j] - lambda[k]);
        if product == 0.0 || !product.is_finite() {
            return Err(Error::RepeatedCurvatures(lambda));
        }
        out[j] = (1.0 / product.abs()).sqrt();
    }
    Ok(out)
}

/// Position in R^4 and an orthonormal frame (e1, e2, e3, N).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FramePose {
    pub position: [f64; 4],
    pub frame: [[f64; 4]; 4],
}

impl Default for FramePose {
    fn default() -> Self {
        let mut frame = [[0.0; 4]; 4];
        for (k, row) in frame.iter_mut().enumerate() {
            row[k] = 1.0;
        }
        Self { position: [0.0; 4], frame }
    }
}

impl FramePose {
    /// max |⟨e_a, e_b⟩ − δ_ab|.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                let dot: f64 = (0..4).map(|k| self.frame[a][k] * self.frame[b][k]).sum();
                let want = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((dot - want).abs());
            }
        }
        worst
    }

    pub fn validate(&self) -> Result<()> {
        if self.position.iter().chain(self.frame.iter().flatten()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("initial pose".into()));
        }
        if self.orthonormality_defect() > 1e-10 {
            return Err(Error::InvalidConfig("initial frame is not orthonormal".into()));
        }
        Ok(())
    }
}

/// The space form a grid lives in: R^4 for curvature 0, otherwise the sphere or
/// hyperboloid model inside R^5 (Lorentzian, last coordinate time-like, when c < 0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ambient {
    pub curvature: f64,
}

impl Ambient {
    pub const EUCLIDEAN: Ambient = Ambient { curvature: 0.0 };

    pub fn dimension(&self) -> usize {
        if self.curvature == 0.0 {
            4
        } else {
            5
        }
    }

    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        let mut sum: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        if self.curvature < 0.0 {
            let last = a.len() - 1;
            sum -= 2.0 * a[last] * b[last];
        }
        sum
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ImmersionDiagnostics {
    /// Largest frame orthonormality defect before re-projection.
    pub max_frame_drift: f64,
    /// Largest |λ1 + λ2 + λ3| over ok nodes.
    pub max_mean_curvature: f64,
    /// Smallest pairwise principal-curvature gap over ok nodes.
    pub min_curvature_gap: f64,
    pub steps: usize,
}

/// A hypersurface sampled on a leaf-coordinate grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImmersionGrid {
    /// True for closed-form reference grids.
    pub oracle: bool,
    pub ambient: Ambient,
    pub grid: GridSpec,
    /// Content hash of the chart the grid was built from.
    pub chart_id: Option<String>,
    pub positions: Vec<Vec<f64>>,
    /// Per node: e1, e2, e3, N.
    pub frames: Vec<[Vec<f64>; 4]>,
    /// v per node.
    pub metric: Vec<[f64; 3]>,
    /// V per node.
    pub second_form: Vec<[f64; 3]>,
    pub curvatures: Vec<[f64; 3]>,
    pub status: Vec<NodeStatus>,
    pub diagnostics: ImmersionDiagnostics,
    /// Free-form notes (parametrization conventions of oracle grids).
    #[serde(default)]
    pub notes: Vec<String>,
}

impl ImmersionGrid {
    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        let n = self.grid.len();
        let lens = [
            self.positions.len(),
            self.frames.len(),
            self.metric.len(),
            self.second_form.len(),
            self.curvatures.len(),
            self.status.len(),
        ];
        if lens.iter().any(|&l| l != n) {
            return Err(Error::GridMismatch(format!("grid has {n} nodes, arrays have lengths {lens:?}")));
        }
        let d = self.ambient.dimension();
        if self.positions.iter().any(|p| p.len() != d) || self.frames.iter().flatten().any(|e| e.len() != d) {
            return Err(Error::GridMismatch(format!("vectors must have ambient dimension {d}")));
        }
        Ok(())
    }

    pub fn position(&self, i: [usize; 3]) -> &[f64] {
        &self.positions[self.grid.index(i)]
    }

    /// Largest distance between two ok nodes.
    pub fn diameter(&self) -> f64 {
        let pts: Vec<&Vec<f64>> =
            self.positions.iter().zip(&self.status).filter(|(_, s)| s.is_ok()).map(|(p, _)| p).collect();
        let mut best: f64 = 0.0;
        for a in 0..pts.len() {
            for b in a + 1..pts.len() {
                let d2: f64 = pts[a].iter().zip(pts[b]).map(|(x, y)| (x - y).powi(2)).sum();
                best = best.max(d2);
            }
        }
        best.sqrt()
    }

    pub(crate) fn refresh_curvature_diagnostics(&mut self) {
        let mut max_h: f64 = 0.0;
        let mut gap = f64::INFINITY;
        for (lam, s) in self.curvatures.iter().zip(&self.status) {
            if !s.is_ok() {
                continue;
            }
            max_h = max_h.max((lam[0] + lam[1] + lam[2]).abs());
            gap = gap.min((lam[1] - lam[0]).abs()).min((lam[2] - lam[1]).abs()).min((lam[2] - lam[0]).abs());
        }
        self.diagnostics.max_mean_curvature = max_h;
        // no ok node: report 0 rather than an infinity JSON cannot carry
        self.diagnostics.min_curvature_gap = if gap.is_finite() { gap } else { 0.0 };
    }
}
