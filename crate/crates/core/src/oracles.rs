//! Closed-form generalized cones over the Clifford torus in R^4, S^4(c) and H^4(c).
//!
//! All cones share the leaf coordinates in which x = (u1, u3)/√2 on the torus and u2
//! runs along the generating geodesics, normalized so that the metric at u2 = 0 is
//! diag(1/2, 1, 1/2) times 1/|c| (times 1 when c = 0).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{ChartBranch, IntegratorConfig, LeafChart, NodeStatus};
use crate::geometry::{principal_curvatures, Ambient, HolonomicState, ImmersionDiagnostics, ImmersionGrid};
use crate::grid::GridSpec;
use crate::variety::{State, VarietyPoint};

const SQRT2: f64 = std::f64::consts::SQRT_2;
const FRAC_1_SQRT2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// A cone over the Clifford torus in the space form of curvature `curvature`, sampled on `grid`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeSpec {
    pub curvature: f64,
    pub grid: GridSpec,
}

/// Which geodesic-polar profile equation θ follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    /// dθ/du2 = sin θ
    Sine,
    /// dθ/du2 = sinh θ
    Sinh,
}

/// g(x1, x2) = (cos √2x1, sin √2x1, cos √2x2, sin √2x2)/√2.
pub fn clifford_torus(x1: f64, x2: f64) -> [f64; 4] {
    let (a, b) = (SQRT2 * x1, SQRT2 * x2);
    [a.cos(), a.sin(), b.cos(), b.sin()].map(|c| c * FRAC_1_SQRT2)
}

/// Closed-form θ(u2) with θ(0) = θ0: tan(θ/2) (or tanh(θ/2)) grows like e^{u2}.
pub fn theta_solve(kind: ProfileKind, u2: f64, theta0: f64) -> Result<f64> {
    match kind {
        ProfileKind::Sine => {
            if !(theta0 > 0.0 && theta0 < std::f64::consts::PI) {
                return Err(Error::OutOfRange { value: theta0, range: "(0, π)".into() });
            }
            Ok(2.0 * ((theta0 / 2.0).tan() * u2.exp()).atan())
        }
        ProfileKind::Sinh => {
            if !(theta0 > 0.0 && theta0.is_finite()) {
                return Err(Error::OutOfRange { value: theta0, range: "(0, ∞)".into() });
            }
            let k = (theta0 / 2.0).tanh() * u2.exp();
            if k >= 1.0 {
                let limit = -(theta0 / 2.0).tanh().ln();
                return Err(Error::OutOfRange { value: u2, range: format!("u2 < {limit}") });
            }
            Ok(2.0 * k.atanh())
        }
    }
}

/// Ambient point of the cone at geodesic distance `s` from the vertex over torus point `x`.
pub fn cone_immersion(c: f64, s: f64, x: [f64; 2]) -> Result<Vec<f64>> {
    let g = clifford_torus(x[0], x[1]);
    if c == 0.0 {
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::OutOfRange { value: s, range: "(0, ∞)".into() });
        }
        return Ok(g.iter().map(|gi| s * gi).collect());
    }
    let r = c.abs().sqrt();
    let (radial, axial) = if c > 0.0 {
        let limit = std::f64::consts::PI / r;
        if !(s > 0.0 && s < limit) {
            return Err(Error::OutOfRange { value: s, range: format!("(0, {limit})") });
        }
        ((r * s).sin(), (r * s).cos())
    } else {
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::OutOfRange { value: s, range: "(0, ∞)".into() });
        }
        ((r * s).sinh(), (r * s).cosh())
    };
    let mut p: Vec<f64> = g.iter().map(|gi| radial * gi / r).collect();
    p.push(axial / r);
    Ok(p)
}

/// Profile quantities at u2: (geodesic parameter s, scale ρ with v = ρ(1/√2, 1, 1/√2), dρ/du2 / ρ).
fn profile(c: f64, u2: f64) -> Result<(f64, f64, f64)> {
    if !u2.is_finite() {
        return Err(Error::NonFinite(format!("u2 = {u2}")));
    }
    if c == 0.0 {
        let rho = u2.exp();
        return Ok((rho, rho, 1.0));
    }
    let r = c.abs().sqrt();
    if c > 0.0 {
        let theta = theta_solve(ProfileKind::Sine, u2, std::f64::consts::FRAC_PI_2)?;
        Ok((theta / r, theta.sin() / r, theta.cos()))
    } else {
        let theta = theta_solve(ProfileKind::Sinh, u2, 1f64.asinh())?;
        Ok((theta / r, theta.sinh() / r, theta.cosh()))
    }
}

/// Holonomic data of the cone at u2. Only h21 and h23 are nonzero.
pub fn cone_state(c: f64, u2: f64) -> Result<HolonomicState> {
    let (_, rho, log_rate) = profile(c, u2)?;
    let mut rotation = [[0.0; 3]; 3];
    rotation[1][0] = FRAC_1_SQRT2 * log_rate;
    rotation[1][2] = FRAC_1_SQRT2 * log_rate;
    Ok(HolonomicState {
        metric: [FRAC_1_SQRT2 * rho, rho, FRAC_1_SQRT2 * rho],
        second_form: [-FRAC_1_SQRT2, 0.0, FRAC_1_SQRT2],
        rotation,
    })
}

/// The point of the positive singular line corresponding to the Euclidean cone at u2:
/// x = e^{u2}(1/√2, 1, 1/√2), y = (0, 1, 0).
pub fn cone_variety_point(u2: f64) -> Result<VarietyPoint> {
    let s = u2.exp() * FRAC_1_SQRT2;
    VarietyPoint::new([s, SQRT2 * s, s, 0.0, 1.0, 0.0])
}

/// Position and frame (e1, e2, e3, N) of the cone at leaf coordinates u.
pub fn cone_pose(c: f64, u: [f64; 3]) -> Result<(Vec<f64>, [Vec<f64>; 4])> {
    let (s, _, _) = profile(c, u[1])?;
    let position = cone_immersion(c, s, [u[0] * FRAC_1_SQRT2, u[2] * FRAC_1_SQRT2])?;
    let (c1, s1, c3, s3) = (u[0].cos(), u[0].sin(), u[2].cos(), u[2].sin());
    let radial = [c1, s1, c3, s3].map(|a| a * FRAC_1_SQRT2);
    let mut e1 = vec![-s1, c1, 0.0, 0.0];
    let mut e3 = vec![0.0, 0.0, -s3, c3];
    let mut normal: Vec<f64> = [c1, s1, -c3, -s3].iter().map(|a| a * FRAC_1_SQRT2).collect();
    let e2: Vec<f64> = if c == 0.0 {
        radial.to_vec()
    } else {
        let r = c.abs().sqrt();
        let (d_radial, d_axial) = if c > 0.0 { ((r * s).cos(), -(r * s).sin()) } else { ((r * s).cosh(), (r * s).sinh()) };
        e1.push(0.0);
        e3.push(0.0);
        normal.push(0.0);
        let mut e2: Vec<f64> = radial.iter().map(|g| d_radial * g).collect();
        e2.push(d_axial);
        e2
    };
    Ok((position, [e1, e2, e3, normal]))
}

/// Closed-form cone sampled on `spec.grid`, flagged as an oracle.
pub fn cone_grid(spec: &ConeSpec) -> Result<ImmersionGrid> {
    spec.grid.validate()?;
    if !spec.curvature.is_finite() {
        return Err(Error::NonFinite("cone curvature".into()));
    }
    let c = spec.curvature;
    let n = spec.grid.len();
    let mut out = ImmersionGrid {
        oracle: true,
        ambient: Ambient { curvature: c },
        grid: spec.grid,
        chart_id: None,
        positions: Vec::with_capacity(n),
        frames: Vec::with_capacity(n),
        metric: Vec::with_capacity(n),
        second_form: Vec::with_capacity(n),
        curvatures: Vec::with_capacity(n),
        status: vec![NodeStatus::Ok; n],
        diagnostics: ImmersionDiagnostics::default(),
        notes: vec![
            "torus point x = (u1, u3)/sqrt(2)".into(),
            match c.partial_cmp(&0.0) {
                Some(std::cmp::Ordering::Greater) => "theta = 2 atan(e^u2), s = theta/sqrt(c); u2 = 0 is theta = pi/2".into(),
                Some(std::cmp::Ordering::Less) => {
                    "theta = 2 atanh((sqrt(2) - 1) e^u2), s = theta/sqrt(-c); u2 = 0 is sinh(theta) = 1; last coordinate time-like".into()
                }
                _ => "s = e^u2; u2 = 0 is s = 1".into(),
            },
        ],
    };
    for flat in 0..n {
        let u = spec.grid.coordinates(spec.grid.multi_index(flat));
        let (position, frame) = cone_pose(c, u)?;
        let state = cone_state(c, u[1])?;
        out.positions.push(position);
        out.frames.push(frame);
        out.metric.push(state.metric);
        out.second_form.push(state.second_form);
        out.curvatures.push(principal_curvatures(&state));
    }
    out.refresh_curvature_diagnostics();
    Ok(out)
}

/// The leaf chart of the Euclidean cone: X1 and X3 vanish on the singular line, so every
/// node is cone_variety_point(u2).
pub fn cone_chart(grid: &GridSpec) -> Result<LeafChart> {
    grid.validate()?;
    let mut nodes: Vec<State> = Vec::with_capacity(grid.len());
    for flat in 0..grid.len() {
        let u = grid.coordinates(grid.multi_index(flat));
        nodes.push(*cone_variety_point(u[1])?.state());
    }
    let seed = *cone_variety_point(0.0)?.state();
    LeafChart::from_nodes(seed, *grid, nodes, vec![NodeStatus::Ok; grid.len()], ChartBranch::SingularLine, IntegratorConfig::default())
}
