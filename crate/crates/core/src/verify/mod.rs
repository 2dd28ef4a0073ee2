//! Residual suites over charts and reconstructed grids, the constant-mean-curvature
//! probe and the congruence classifier.

mod classify;
mod probe;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::flow::LeafChart;
use crate::geometry::{fd, fundamental_forms_fd, principal_curvatures, state_from_variety, FdOrder, HolonomicState, ImmersionGrid};
use crate::grid::GridSpec;
use crate::variety::f_relative;

pub use classify::{congruence_classifier, Candidate, CongruenceVerdict};
pub use probe::{probe_residual, theorem1_probe, ProbeEntry, ProbeReport, PROBE_HEADER};

/// Per-channel pass thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub conformal_flatness: f64,
    /// On |F| / x1^12.
    pub algebraic: f64,
    pub compatibility: f64,
    pub minimality_analytic: f64,
    pub minimality_fd: f64,
    /// Relative, on the diagonal of the first fundamental form.
    pub forms_metric: f64,
    pub forms_metric_off_diag: f64,
    pub forms_second: f64,
    pub forms_second_off_diag: f64,
    pub fd_order: FdOrder,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            conformal_flatness: 1e-9,
            algebraic: 1e-8,
            compatibility: 1e-5,
            minimality_analytic: 1e-10,
            minimality_fd: 1e-4,
            forms_metric: 1e-5,
            forms_metric_off_diag: 1e-6,
            forms_second: 1e-4,
            forms_second_off_diag: 1e-4,
            fd_order: FdOrder::Fourth,
        }
    }
}

impl Tolerances {
    /// Same thresholds everywhere except the order of the stencils.
    pub fn uniform(tol: f64) -> Self {
        Self {
            conformal_flatness: tol,
            algebraic: tol,
            compatibility: tol,
            minimality_analytic: tol,
            minimality_fd: tol,
            forms_metric: tol,
            forms_metric_off_diag: tol,
            forms_second: tol,
            forms_second_off_diag: tol,
            fd_order: FdOrder::Fourth,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelStatus {
    Pass,
    Fail,
    /// Not enough nodes to evaluate the channel.
    Skipped,
}

/// Summary of one residual over the nodes where it could be evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    pub name: String,
    pub count: usize,
    pub max: f64,
    pub mean: f64,
    pub min: f64,
    pub argmax: Option<[usize; 3]>,
    pub argmin: Option<[usize; 3]>,
    /// Upper bound on `max`; `None` means the channel passes iff `min > 0`.
    pub tol: Option<f64>,
    pub status: ChannelStatus,
}

#[derive(Default)]
struct Accum {
    count: usize,
    sum: f64,
    max: Option<(f64, [usize; 3])>,
    min: Option<(f64, [usize; 3])>,
}

impl Accum {
    fn push(&mut self, value: f64, node: [usize; 3]) {
        self.count += 1;
        self.sum += value;
        // NaN compares false, so it is forced into max to fail the channel
        if self.max.map_or(true, |(m, _)| !(value <= m)) {
            self.max = Some((value, node));
        }
        if self.min.map_or(true, |(m, _)| value < m) {
            self.min = Some((value, node));
        }
    }

    fn finish(self, name: &str, tol: Option<f64>) -> Channel {
        let status = match (self.max, self.min, tol) {
            (None, _, _) => ChannelStatus::Skipped,
            (Some((max, _)), _, Some(t)) if max <= t => ChannelStatus::Pass,
            (_, Some((min, _)), None) if min > 0.0 => ChannelStatus::Pass,
            _ => ChannelStatus::Fail,
        };
        Channel {
            name: name.to_string(),
            count: self.count,
            max: self.max.map_or(0.0, |m| m.0),
            mean: if self.count == 0 { 0.0 } else { self.sum / self.count as f64 },
            min: self.min.map_or(0.0, |m| m.0),
            argmax: self.max.map(|m| m.1),
            argmin: self.min.map(|m| m.1),
            tol,
            status,
        }
    }
}

fn skipped(name: &str, tol: Option<f64>) -> Channel {
    Accum::default().finish(name, tol)
}

/// Where a report's inputs came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub chart_id: Option<String>,
    pub grid_id: Option<String>,
    pub config_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub channels: Vec<Channel>,
    pub passed: bool,
    pub provenance: Provenance,
}

impl ResidualReport {
    fn new(channels: Vec<Channel>, provenance: Provenance) -> Self {
        let passed = channels.iter().all(|c| c.status != ChannelStatus::Fail);
        Self { channels, passed, provenance }
    }

    pub fn channel(&self, name: &str) -> Option<&Channel> {
        self.channels.iter().find(|c| c.name == name)
    }

    pub fn failing(&self) -> Vec<&str> {
        self.channels.iter().filter(|c| c.status == ChannelStatus::Fail).map(|c| c.name.as_str()).collect()
    }

    /// One row per channel: name, max, mean, tol, pass.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("name,max,mean,tol,pass\n");
        for c in &self.channels {
            let tol = c.tol.map_or(String::new(), |t| format!("{t:e}"));
            let pass = match c.status {
                ChannelStatus::Pass => "true",
                ChannelStatus::Fail => "false",
                ChannelStatus::Skipped => "skipped",
            };
            out.push_str(&format!("{},{:e},{:e},{},{}\n", c.name, c.max, c.mean, tol, pass));
        }
        out
    }
}

/// SHA-256 of the canonical JSON form of `value`, as lowercase hex.
pub fn content_id<T: Serialize>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("serializable values");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

const FLATNESS: [&str; 3] = ["conformal_flatness_metric", "conformal_flatness_mixed", "conformal_flatness_second"];

/// Index of the per-node quantities fed to the finite differences: v, V, then h row-major.
const V: usize = 0;
const BIG_V: usize = 3;
const H: usize = 6;

fn packed(s: &HolonomicState) -> Vec<f64> {
    let mut out = Vec::with_capacity(15);
    out.extend_from_slice(&s.metric);
    out.extend_from_slice(&s.second_form);
    out.extend(s.rotation.iter().flatten());
    out
}

/// Derivative along `axis` at `i` if the full stencil lies in the grid and is ok.
fn stencil_derivative(
    grid: &GridSpec,
    ok: &[bool],
    values: &[Vec<f64>],
    i: [usize; 3],
    axis: usize,
    order: FdOrder,
) -> Option<Vec<f64>> {
    let r = order.radius();
    let count = grid.counts()[axis];
    if count <= 2 * r || i[axis] < r || i[axis] + r >= count {
        return None;
    }
    for o in -(r as isize)..=(r as isize) {
        if !ok[grid.index(fd::shifted(i, axis, o))] {
            return None;
        }
    }
    let h = grid.axes()[axis].spacing();
    Some(fd::first_derivative(i, axis, h, order, &|j| values[grid.index(j)].clone()))
}

fn compatibility_channels(chart: &LeafChart, states: &[Option<HolonomicState>], tol: &Tolerances) -> [Channel; 4] {
    let grid = &chart.grid;
    let ok: Vec<bool> = states.iter().map(|s| s.is_some()).collect();
    let values: Vec<Vec<f64>> = states.iter().map(|s| s.as_ref().map_or_else(|| vec![0.0; 15], packed)).collect();
    let mut acc: [Accum; 4] = Default::default();
    for flat in 0..grid.len() {
        let Some(s) = &states[flat] else { continue };
        let i = grid.multi_index(flat);
        let d: Vec<Option<Vec<f64>>> = (0..3).map(|a| stencil_derivative(grid, &ok, &values, i, a, tol.fd_order)).collect();
        let (v, big_v, h) = (s.metric, s.second_form, s.rotation);
        let dh = |axis: usize, a: usize, b: usize| d[axis].as_ref().map(|x| x[H + 3 * a + b]);
        let mut worst = [None::<f64>; 4];
        let mut note = |slot: usize, r: f64| worst[slot] = Some(worst[slot].map_or(r.abs(), |w: f64| w.max(r.abs())));
        for a in 0..3 {
            for b in (0..3).filter(|&b| b != a) {
                if let Some(da) = &d[a] {
                    note(0, da[V + b] - v[a] * h[a][b]);
                }
                if let Some(db) = &d[b] {
                    note(3, db[BIG_V + a] - h[b][a] * big_v[b]);
                }
                for k in (0..3).filter(|&k| k != a && k != b) {
                    if let Some(x) = dh(b, a, k) {
                        note(1, x - h[a][b] * h[b][k]);
                    }
                }
                if a < b {
                    if let (Some(x), Some(y)) = (dh(a, a, b), dh(b, b, a)) {
                        let k = 3 - a - b;
                        note(2, x + y + h[k][a] * h[k][b] + big_v[a] * big_v[b]);
                    }
                }
            }
        }
        for (slot, w) in worst.iter().enumerate() {
            if let Some(w) = w {
                acc[slot].push(*w, i);
            }
        }
    }
    let names = ["compatibility_metric", "compatibility_rotation", "compatibility_gauss", "compatibility_codazzi"];
    let [a, b, c, d] = acc;
    [
        a.finish(names[0], Some(tol.compatibility)),
        b.finish(names[1], Some(tol.compatibility)),
        c.finish(names[2], Some(tol.compatibility)),
        d.finish(names[3], Some(tol.compatibility)),
    ]
}

/// Pointwise channels shared by charts and grids: conformal flatness, analytic minimality
/// and the principal-curvature gap.
fn state_channels(grid: &GridSpec, states: &[Option<HolonomicState>], tol: &Tolerances) -> Vec<Channel> {
    let mut flat_acc: [Accum; 3] = Default::default();
    let mut minimal = Accum::default();
    let mut gap = Accum::default();
    for (flat, s) in states.iter().enumerate() {
        let Some(s) = s else { continue };
        let i = grid.multi_index(flat);
        for (acc, r) in flat_acc.iter_mut().zip(s.conformal_flatness_residuals()) {
            acc.push(r.abs(), i);
        }
        let lam = principal_curvatures(s);
        minimal.push((lam[0] + lam[1] + lam[2]).abs(), i);
        // signed: an out-of-order triple shows up as a non-positive gap
        gap.push((lam[1] - lam[0]).min(lam[2] - lam[1]), i);
    }
    let mut out: Vec<Channel> =
        flat_acc.into_iter().zip(FLATNESS).map(|(a, name)| a.finish(name, Some(tol.conformal_flatness))).collect();
    out.push(minimal.finish("minimality_analytic", Some(tol.minimality_analytic)));
    out.push(gap.finish("distinctness", None));
    out
}

fn forms_channels(grid: &ImmersionGrid, tol: &Tolerances) -> Vec<Channel> {
    let specs: [(&str, f64); 5] = [
        ("forms_metric", tol.forms_metric),
        ("forms_metric_off_diag", tol.forms_metric_off_diag),
        ("forms_second", tol.forms_second),
        ("forms_second_off_diag", tol.forms_second_off_diag),
        ("minimality_fd", tol.minimality_fd),
    ];
    let Ok(report) = fundamental_forms_fd(grid, tol.fd_order) else {
        return specs.iter().map(|(n, t)| skipped(n, Some(*t))).collect();
    };
    let mut acc: [Accum; 5] = Default::default();
    for node in &report.nodes {
        acc[0].push(node.metric_diag_rel, node.index);
        if report.active.iter().filter(|a| **a).count() > 1 {
            acc[1].push(node.metric_off_diag, node.index);
            acc[3].push(node.second_off_diag, node.index);
        }
        acc[2].push(node.second_diag, node.index);
        if let Some(h) = node.mean_curvature {
            acc[4].push(h.abs(), node.index);
        }
    }
    acc.into_iter().zip(specs).map(|(a, (n, t))| a.finish(n, Some(t))).collect()
}

/// Runs every residual channel on a chart and, when given, its reconstructed grid.
pub fn run_suite(chart: &LeafChart, grid: Option<&ImmersionGrid>, tol: &Tolerances) -> Result<ResidualReport> {
    chart.validate()?;
    if let Some(g) = grid {
        g.validate()?;
        if g.grid != chart.grid {
            return Err(Error::GridMismatch("grid and chart use different leaf-coordinate grids".into()));
        }
    }
    let states: Vec<Option<HolonomicState>> = chart
        .nodes
        .iter()
        .zip(&chart.status)
        .map(|(q, s)| if s.is_ok() { state_from_variety(q, 0.0).ok() } else { None })
        .collect();

    let mut channels = state_channels(&chart.grid, &states, tol);
    let mut algebraic = Accum::default();
    for (flat, (q, s)) in chart.nodes.iter().zip(&chart.status).enumerate() {
        if s.is_ok() {
            algebraic.push(f_relative(q), chart.grid.multi_index(flat));
        }
    }
    channels.insert(3, algebraic.finish("algebraic_constraint", Some(tol.algebraic)));
    channels.extend(compatibility_channels(chart, &states, tol));
    if let Some(g) = grid {
        channels.extend(forms_channels(g, tol));
    }
    let provenance = Provenance {
        chart_id: Some(content_id(chart)),
        grid_id: grid.map(content_id),
        config_hash: content_id(tol),
    };
    Ok(ResidualReport::new(channels, provenance))
}

/// Channels available from a grid alone (closed-form oracle grids of any curvature).
pub fn run_grid_suite(grid: &ImmersionGrid, tol: &Tolerances) -> Result<ResidualReport> {
    grid.validate()?;
    let states: Vec<Option<HolonomicState>> = (0..grid.grid.len())
        .map(|k| {
            grid.status[k].is_ok().then(|| HolonomicState {
                metric: grid.metric[k],
                second_form: grid.second_form[k],
                rotation: [[0.0; 3]; 3],
            })
        })
        .collect();
    let mut channels = state_channels(&grid.grid, &states, tol);
    channels.extend(forms_channels(grid, tol));
    let provenance = Provenance { chart_id: grid.chart_id.clone(), grid_id: Some(content_id(grid)), config_hash: content_id(tol) };
    Ok(ResidualReport::new(channels, provenance))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accumulator_flags_nan() {
        let mut a = Accum::default();
        a.push(0.0, [0, 0, 0]);
        a.push(f64::NAN, [1, 0, 0]);
        assert_eq!(a.finish("x", Some(1.0)).status, ChannelStatus::Fail);
    }

    #[test]
    fn empty_channel_is_skipped() {
        assert_eq!(skipped("x", Some(1.0)).status, ChannelStatus::Skipped);
    }

    #[test]
    fn content_id_is_stable_hex() {
        let a = content_id(&[1.0, 2.0]);
        assert_eq!(a.len(), 64);
        assert_eq!(a, content_id(&[1.0, 2.0]));
        assert_ne!(a, content_id(&[1.0, 2.5]));
    }
}
