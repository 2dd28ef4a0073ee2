//! Leaf charts: the composed flow map sampled on a rectangular grid.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{on_singular_line, run_leg, IntegratorConfig, PathStatus};
use crate::error::{Error, Result, TruncationReason};
use crate::grid::{AxisGrid, GridSpec};
use crate::parallel;
use crate::variety::{distance_to_singular, eval_g, f_relative, Axis, GroupElement, State, VarietyPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeStatus {
    Ok,
    TruncatedSingular,
    TruncatedDomain,
}

impl NodeStatus {
    pub fn is_ok(self) -> bool {
        self == NodeStatus::Ok
    }

    fn from_path(status: PathStatus) -> Self {
        match status {
            PathStatus::Completed => NodeStatus::Ok,
            PathStatus::Truncated(TruncationReason::Singular) => NodeStatus::TruncatedSingular,
            PathStatus::Truncated(TruncationReason::Domain) => NodeStatus::TruncatedDomain,
        }
    }
}

/// Whether the chart was built on a regular leaf or along a singular line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChartBranch {
    Regular,
    SingularLine,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChartDiagnostics {
    pub branch: ChartBranch,
    pub ok_nodes: usize,
    pub truncated_singular: usize,
    pub truncated_domain: usize,
    /// Largest |F| / x1^12 over ok nodes.
    pub max_f_relative: f64,
    /// Largest |G| over ok nodes.
    pub max_g: f64,
    /// Smallest distance to the singular lines over ok nodes.
    pub min_singular_distance: f64,
    pub steps: usize,
    pub rejected: usize,
}

/// Variety points on a rectangular grid of leaf coordinates, with the seed at u = 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeafChart {
    pub seed: State,
    pub grid: GridSpec,
    /// Row-major in (i1, i2, i3).
    pub nodes: Vec<State>,
    pub status: Vec<NodeStatus>,
    pub diagnostics: ChartDiagnostics,
    pub config: IntegratorConfig,
}

impl LeafChart {
    /// Assembles a chart from precomputed nodes and recomputes its diagnostics.
    pub fn from_nodes(
        seed: State,
        grid: GridSpec,
        nodes: Vec<State>,
        status: Vec<NodeStatus>,
        branch: ChartBranch,
        config: IntegratorConfig,
    ) -> Result<Self> {
        let mut chart = LeafChart {
            seed,
            grid,
            nodes,
            status,
            diagnostics: ChartDiagnostics {
                branch,
                ok_nodes: 0,
                truncated_singular: 0,
                truncated_domain: 0,
                max_f_relative: 0.0,
                max_g: 0.0,
                min_singular_distance: f64::INFINITY,
                steps: 0,
                rejected: 0,
            },
            config,
        };
        chart.refresh_diagnostics();
        chart.validate()?;
        Ok(chart)
    }

    /// Structural checks for charts read from disk.
    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        let n = self.grid.len();
        if self.nodes.len() != n || self.status.len() != n {
            return Err(Error::GridMismatch(format!(
                "grid has {n} nodes but chart stores {} nodes and {} statuses",
                self.nodes.len(),
                self.status.len()
            )));
        }
        if self.node(self.grid.origin()) != &self.seed {
            return Err(Error::GridMismatch("node at u = 0 differs from the seed".into()));
        }
        Ok(())
    }

    pub fn node(&self, i: [usize; 3]) -> &State {
        &self.nodes[self.grid.index(i)]
    }

    pub fn node_status(&self, i: [usize; 3]) -> NodeStatus {
        self.status[self.grid.index(i)]
    }

    pub fn all_ok(&self) -> bool {
        self.status.iter().all(|s| s.is_ok())
    }

    fn refresh_diagnostics(&mut self) {
        let d = &mut self.diagnostics;
        d.ok_nodes = 0;
        d.truncated_singular = 0;
        d.truncated_domain = 0;
        d.max_f_relative = 0.0;
        d.max_g = 0.0;
        d.min_singular_distance = f64::INFINITY;
        for (q, s) in self.nodes.iter().zip(&self.status) {
            match s {
                NodeStatus::Ok => {
                    d.ok_nodes += 1;
                    d.max_f_relative = d.max_f_relative.max(f_relative(q));
                    d.max_g = d.max_g.max(eval_g(q).abs());
                    d.min_singular_distance = d.min_singular_distance.min(distance_to_singular(q));
                }
                NodeStatus::TruncatedSingular => d.truncated_singular += 1,
                NodeStatus::TruncatedDomain => d.truncated_domain += 1,
            }
        }
    }
}

struct Fiber {
    nodes: Vec<(State, NodeStatus)>,
    steps: usize,
    rejected: usize,
}

/// Flows node to node along `axis`, outward from the origin in both directions.
/// Nodes past a truncation keep the last reached state and inherit its status.
fn march(start: State, start_status: NodeStatus, axis: Axis, grid: &AxisGrid, cfg: &IntegratorConfig, singular: bool) -> Fiber {
    let origin = grid.origin();
    let mut nodes = vec![(start, start_status); grid.count];
    let (mut steps, mut rejected) = (0, 0);
    let directions: [Box<dyn Iterator<Item = usize>>; 2] =
        [Box::new(origin + 1..grid.count), Box::new((0..origin).rev())];
    for dir in directions {
        let mut current = (start, start_status);
        let mut previous = origin;
        for k in dir {
            if current.1.is_ok() {
                let leg = run_leg(&current.0, axis, grid.value(k) - grid.value(previous), cfg, singular, |_, _| {});
                steps += leg.steps;
                rejected += leg.rejected;
                current = (leg.end, NodeStatus::from_path(leg.status));
            }
            nodes[k] = current;
            previous = k;
        }
    }
    Fiber { nodes, steps, rejected }
}

/// Fills every grid node with φ_σ(u): the u1-spine from the seed, u2-fibers from the
/// spine, then u3-fibers. Fibers run concurrently; results do not depend on scheduling.
pub fn build_chart(seed: &VarietyPoint, grid: &GridSpec, cfg: &IntegratorConfig) -> Result<LeafChart> {
    cfg.validate()?;
    grid.validate()?;
    let q0 = *seed.state();
    let singular = on_singular_line(&q0, cfg);
    let [n1, n2, n3] = grid.counts();

    let spine = march(q0, NodeStatus::Ok, Axis::U1, &grid.u1, cfg, singular);
    let (sheets, layers) = parallel::pool().install(|| {
        let sheets: Vec<Fiber> = spine
            .nodes
            .par_iter()
            .map(|&(q, s)| march(q, s, Axis::U2, &grid.u2, cfg, singular))
            .collect();
        let bases: Vec<(State, NodeStatus)> = sheets.iter().flat_map(|f| f.nodes.iter().copied()).collect();
        let layers: Vec<Fiber> = bases
            .par_iter()
            .map(|&(q, s)| march(q, s, Axis::U3, &grid.u3, cfg, singular))
            .collect();
        (sheets, layers)
    });

    let mut nodes = Vec::with_capacity(n1 * n2 * n3);
    let mut status = Vec::with_capacity(n1 * n2 * n3);
    for fiber in &layers {
        for &(q, s) in &fiber.nodes {
            nodes.push(q);
            status.push(s);
        }
    }
    let branch = if singular { ChartBranch::SingularLine } else { ChartBranch::Regular };
    let mut chart = LeafChart::from_nodes(q0, *grid, nodes, status, branch, *cfg)?;
    let all = std::iter::once(&spine).chain(&sheets).chain(&layers);
    for fiber in all {
        chart.diagnostics.steps += fiber.steps;
        chart.diagnostics.rejected += fiber.rejected;
    }
    Ok(chart)
}

/// The chart at g(p) obtained by mapping every node of the chart at p through g and
/// relabeling the grid by the induced reparametrization.
pub fn transform_chart(chart: &LeafChart, g: GroupElement) -> Result<LeafChart> {
    chart.validate()?;
    let image_grid = chart.grid.transformed(g);
    let n = chart.grid.len();
    let mut nodes = vec![[0.0; 6]; n];
    let mut status = vec![NodeStatus::Ok; n];
    for flat in 0..n {
        let i = chart.grid.multi_index(flat);
        let j = image_grid.index(chart.grid.transformed_index(g, i));
        nodes[j] = g.apply(&chart.nodes[flat])?;
        status[j] = chart.status[flat];
    }
    let mut out = LeafChart::from_nodes(g.apply(&chart.seed)?, image_grid, nodes, status, chart.diagnostics.branch, chart.config)?;
    out.diagnostics.steps = chart.diagnostics.steps;
    out.diagnostics.rejected = chart.diagnostics.rejected;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::variety::SingularLine;

    #[test]
    fn single_node_chart_is_the_seed() {
        let seed = VarietyPoint::new(SingularLine::Plus.point(0.2)).unwrap();
        let chart = build_chart(&seed, &GridSpec::single(), &IntegratorConfig::default()).unwrap();
        assert_eq!(chart.nodes, vec![*seed.state()]);
        assert!(chart.all_ok());
    }

    #[test]
    fn line_chart_only_moves_in_u2() {
        let seed = VarietyPoint::new(SingularLine::Plus.point(0.0)).unwrap();
        let grid = GridSpec::new(AxisGrid::symmetric(2, 0.1), AxisGrid::symmetric(2, 0.1), AxisGrid::symmetric(2, 0.1));
        let chart = build_chart(&seed, &grid, &IntegratorConfig::default()).unwrap();
        assert_eq!(chart.diagnostics.branch, ChartBranch::SingularLine);
        assert!(chart.all_ok());
        for flat in 0..grid.len() {
            let [i1, i2, i3] = grid.multi_index(flat);
            let base = chart.node([2, i2, 2]);
            let q = chart.node([i1, i2, i3]);
            for k in 0..6 {
                assert!((q[k] - base[k]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn rejects_inconsistent_chart() {
        let seed = VarietyPoint::new(SingularLine::Plus.point(0.0)).unwrap();
        let mut chart = build_chart(&seed, &GridSpec::single(), &IntegratorConfig::default()).unwrap();
        chart.nodes.push([1.0; 6]);
        assert!(chart.validate().is_err());
    }
}
