//! Gauss–Weingarten transport of a frame over a leaf chart.

use nalgebra::Matrix4;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{principal_curvatures, state_from_variety, Ambient, FramePose, ImmersionDiagnostics, ImmersionGrid};
use crate::error::{Error, Result};
use crate::flow::{IntegratorConfig, LeafChart, NodeStatus};
use crate::integrator::{integrate, Control, Outcome};
use crate::parallel;
use crate::variety::{eval_x, Axis, State};

const DIM: usize = 26;
const POS: usize = 6;
const FRAME: usize = 10;
const MIN_GRAM_DET: f64 = 1e-3;

type Packed = [f64; DIM];

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImmersionOptions {
    /// Use −N as normal, which maps V to −V.
    pub flip_normal: bool,
}

fn pack(q: &State, pose: &FramePose) -> Packed {
    let mut y = [0.0; DIM];
    y[..6].copy_from_slice(q);
    y[POS..POS + 4].copy_from_slice(&pose.position);
    for (a, row) in pose.frame.iter().enumerate() {
        y[FRAME + 4 * a..FRAME + 4 * a + 4].copy_from_slice(row);
    }
    y
}

fn unpack(y: &Packed) -> FramePose {
    let mut pose = FramePose { position: [0.0; 4], frame: [[0.0; 4]; 4] };
    pose.position.copy_from_slice(&y[POS..POS + 4]);
    for a in 0..4 {
        pose.frame[a].copy_from_slice(&y[FRAME + 4 * a..FRAME + 4 * a + 4]);
    }
    pose
}

/// Joint derivative of (q, f, e1, e2, e3, N) along u_axis.
fn rhs(axis: Axis, y: &Packed, sign: f64) -> Option<Packed> {
    let q: State = y[..6].try_into().ok()?;
    let flow = eval_x(axis, &q).ok()?;
    let s = state_from_variety(&q, 0.0).ok()?;
    let k = axis.index();
    let frame = |a: usize| &y[FRAME + 4 * a..FRAME + 4 * a + 4];
    let v = s.metric;
    let big_v = s.second_form.map(|x| sign * x);
    let h = s.rotation;
    let mut out = [0.0; DIM];
    out[..6].copy_from_slice(&flow);
    for c in 0..4 {
        out[POS + c] = v[k] * frame(k)[c];
    }
    for i in 0..3 {
        for c in 0..4 {
            out[FRAME + 4 * i + c] = if i == k {
                let mut d = big_v[k] * frame(3)[c];
                for m in (0..3).filter(|&m| m != k) {
                    d -= h[m][k] * frame(m)[c];
                }
                d
            } else {
                h[i][k] * frame(k)[c]
            };
        }
    }
    for c in 0..4 {
        out[FRAME + 12 + c] = -big_v[k] * frame(k)[c];
    }
    Some(out)
}

/// Nearest orthonormal frame (polar factor U Vᵀ of the SVD).
fn orthonormalize(pose: &mut FramePose) -> f64 {
    let m = Matrix4::from_fn(|r, c| pose.frame[r][c]);
    let det = (m * m.transpose()).determinant();
    let svd = m.svd(true, true);
    if let (Some(u), Some(vt)) = (svd.u, svd.v_t) {
        let polar = u * vt;
        for r in 0..4 {
            for c in 0..4 {
                pose.frame[r][c] = polar[(r, c)];
            }
        }
    }
    det
}

struct Step {
    pose: FramePose,
    drift: f64,
    steps: usize,
}

/// Transports `pose` from the chart node holding `q_from` by `dt` along `axis`.
/// Every leg restarts from a chart node, so the variety part never drifts across legs.
fn transport_leg(
    q_from: &State,
    pose: &FramePose,
    axis: Axis,
    dt: f64,
    cfg: &IntegratorConfig,
    sign: f64,
    node: [usize; 3],
) -> Result<Step> {
    let result = integrate(|y: &Packed| rhs(axis, y, sign), pack(q_from, pose), dt, &cfg.step_control(), |_, _| {
        Control::Continue
    });
    if result.outcome != Outcome::Reached {
        return Err(Error::NonFinite(format!("frame transport failed before node {node:?}")));
    }
    let mut pose = unpack(&result.y);
    let drift = pose.orthonormality_defect();
    let det = orthonormalize(&mut pose);
    if !(det > MIN_GRAM_DET) {
        return Err(Error::FrameDegenerate { node, det });
    }
    Ok(Step { pose, drift, steps: result.accepted })
}

struct Line {
    poses: Vec<Option<FramePose>>,
    drift: f64,
    steps: usize,
}

/// Transports along one grid line through `base`, outward from the origin index.
fn march(chart: &LeafChart, base: [usize; 3], pose: Option<FramePose>, axis: Axis, cfg: &IntegratorConfig, sign: f64) -> Result<Line> {
    let k = axis.index();
    let grid = chart.grid.axes()[k];
    let origin = grid.origin();
    let mut line = Line { poses: vec![None; grid.count], drift: 0.0, steps: 0 };
    line.poses[origin] = pose;
    let directions: [Box<dyn Iterator<Item = usize>>; 2] = [Box::new(origin + 1..grid.count), Box::new((0..origin).rev())];
    for dir in directions {
        let mut current = pose;
        let mut previous = origin;
        for idx in dir {
            let mut from = base;
            from[k] = previous;
            let mut to = base;
            to[k] = idx;
            current = match current {
                Some(p) if chart.node_status(to).is_ok() => {
                    let step = transport_leg(
                        chart.node(from),
                        &p,
                        axis,
                        grid.value(idx) - grid.value(previous),
                        cfg,
                        sign,
                        to,
                    )?;
                    line.drift = line.drift.max(step.drift);
                    line.steps += step.steps;
                    Some(step.pose)
                }
                _ => None,
            };
            line.poses[idx] = current;
            previous = idx;
        }
    }
    Ok(line)
}

/// Rebuilds the minimal hypersurface over a chart by transporting `init` along the
/// u1-spine, then u2-fibers, then u3-fibers, re-orthonormalizing at every node.
pub fn integrate_immersion(chart: &LeafChart, init: &FramePose, cfg: &IntegratorConfig, options: ImmersionOptions) -> Result<ImmersionGrid> {
    cfg.validate()?;
    chart.validate()?;
    init.validate()?;
    let sign = if options.flip_normal { -1.0 } else { 1.0 };
    let grid = chart.grid;
    let [n1, n2, _] = grid.counts();
    let origin = grid.origin();
    let start = chart.node_status(origin).is_ok().then_some(*init);

    let spine = march(chart, origin, start, Axis::U1, cfg, sign)?;
    let (sheets, layers) = parallel::pool().install(|| -> Result<(Vec<Line>, Vec<Line>)> {
        let sheets: Vec<Line> = (0..n1)
            .into_par_iter()
            .map(|i1| march(chart, [i1, origin[1], origin[2]], spine.poses[i1], Axis::U2, cfg, sign))
            .collect::<Result<_>>()?;
        let layers: Vec<Line> = (0..n1 * n2)
            .into_par_iter()
            .map(|flat| {
                let (i1, i2) = (flat / n2, flat % n2);
                march(chart, [i1, i2, origin[2]], sheets[i1].poses[i2], Axis::U3, cfg, sign)
            })
            .collect::<Result<_>>()?;
        Ok((sheets, layers))
    })?;

    let n = grid.len();
    let mut out = ImmersionGrid {
        oracle: false,
        ambient: Ambient::EUCLIDEAN,
        grid,
        chart_id: None,
        positions: Vec::with_capacity(n),
        frames: Vec::with_capacity(n),
        metric: Vec::with_capacity(n),
        second_form: Vec::with_capacity(n),
        curvatures: Vec::with_capacity(n),
        status: Vec::with_capacity(n),
        diagnostics: ImmersionDiagnostics::default(),
        notes: Vec::new(),
    };
    let mut diagnostics = ImmersionDiagnostics::default();
    for line in std::iter::once(&spine).chain(&sheets).chain(&layers) {
        diagnostics.max_frame_drift = diagnostics.max_frame_drift.max(line.drift);
        diagnostics.steps += line.steps;
    }
    let fallback = FramePose { position: [0.0; 4], frame: [[0.0; 4]; 4] };
    for pose in layers.iter().flat_map(|l| l.poses.iter()) {
        let pose = pose.unwrap_or(fallback);
        out.positions.push(pose.position.to_vec());
        out.frames.push(pose.frame.map(|e| e.to_vec()));
    }
    for (q, s) in chart.nodes.iter().zip(&chart.status) {
        let ok = s.is_ok() && q[..3].iter().all(|x| *x > 0.0);
        let state = if ok { state_from_variety(q, 0.0).ok() } else { None };
        match state {
            Some(mut st) => {
                st.second_form = st.second_form.map(|x| sign * x);
                out.metric.push(st.metric);
                out.second_form.push(st.second_form);
                out.curvatures.push(principal_curvatures(&st));
            }
            None => {
                out.metric.push([0.0; 3]);
                out.second_form.push([0.0; 3]);
                out.curvatures.push([0.0; 3]);
            }
        }
    }
    for pose in layers.iter().flat_map(|l| l.poses.iter()) {
        out.status.push(if pose.is_some() { NodeStatus::Ok } else { NodeStatus::TruncatedDomain });
    }
    for (mine, theirs) in out.status.iter_mut().zip(&chart.status) {
        if !theirs.is_ok() {
            *mine = *theirs;
        }
    }
    out.diagnostics = diagnostics;
    out.refresh_curvature_diagnostics();
    Ok(out)
}

/// Transports `init` from the origin to `target` moving along whole grid lines in the
/// given axis order. Used to probe path independence.
pub fn transport_to_node(
    chart: &LeafChart,
    init: &FramePose,
    target: [usize; 3],
    order: [Axis; 3],
    cfg: &IntegratorConfig,
    options: ImmersionOptions,
) -> Result<FramePose> {
    chart.validate()?;
    init.validate()?;
    let sign = if options.flip_normal { -1.0 } else { 1.0 };
    let mut at = chart.grid.origin();
    let mut pose = *init;
    for axis in order {
        let k = axis.index();
        let grid = chart.grid.axes()[k];
        while at[k] != target[k] {
            let mut next = at;
            next[k] = if target[k] > at[k] { at[k] + 1 } else { at[k] - 1 };
            if !chart.node_status(next).is_ok() {
                return Err(Error::GridMismatch(format!("node {next:?} on the path is not ok")));
            }
            let dt = grid.value(next[k]) - grid.value(at[k]);
            pose = transport_leg(chart.node(at), &pose, axis, dt, cfg, sign, next)?.pose;
            at = next;
        }
    }
    Ok(pose)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polar_factor_restores_orthonormality() {
        let mut pose = FramePose::default();
        pose.frame[0][1] = 1e-4;
        pose.frame[2][2] = 1.0 + 3e-5;
        orthonormalize(&mut pose);
        assert!(pose.orthonormality_defect() < 1e-14);
    }

    #[test]
    fn pack_roundtrip() {
        let mut pose = FramePose::default();
        pose.position = [1.0, 2.0, 3.0, 4.0];
        pose.frame[3][1] = 0.5;
        let q = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let y = pack(&q, &pose);
        assert_eq!(unpack(&y), pose);
        assert_eq!(&y[..6], &q);
    }
}
