//! One function per subcommand, each wrapping a single core operation.

use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use cfh_core::flow::{build_chart, integrate_flow, transform_chart, LeafChart};
use cfh_core::geometry::{integrate_immersion, ImmersionGrid, ImmersionOptions};
use cfh_core::oracles::{cone_chart, cone_grid, ConeSpec};
use cfh_core::variety::{eval_g, f_relative, TOL_F, TOL_G};
use cfh_core::verify::{congruence_classifier, content_id, run_grid_suite, run_suite, theorem1_probe};

use crate::artifact::{kind, read_json, with_ext, write_atomic, write_json, write_points, PointRecord, Provenance};
use crate::config::*;
use crate::mesh::write_mesh;
use crate::{computation, Outcome};

fn stem(out: &Path, name: &Option<String>, default: &str) -> Result<PathBuf> {
    let name = name.as_deref().unwrap_or(default);
    ensure!(!name.is_empty() && !name.contains(['/', '\\']), "name {name:?} must be a plain file stem");
    Ok(out.join(name))
}

pub fn load_chart(base: &Path, path: &Path, prov: &mut Provenance) -> Result<LeafChart> {
    let file = resolve_path(base, path);
    let chart: LeafChart = read_json(&file, kind::CHART)?.data;
    chart.validate()?;
    prov.input(path, &chart);
    Ok(chart)
}

pub fn load_grid(base: &Path, path: &Path, prov: &mut Provenance) -> Result<ImmersionGrid> {
    let file = resolve_path(base, path);
    let grid: ImmersionGrid = read_json(&file, kind::SURFACE)?.data;
    grid.validate()?;
    prov.input(path, &grid);
    Ok(grid)
}

pub fn cmd_sample(cfg: &SampleConfig, out: &Path) -> Result<Outcome> {
    cfg.region.validate()?;
    ensure!(cfg.attempts_per_point > 0, "attempts_per_point must be positive");
    let prov = Provenance::new("sample", cfg, cfg.rng_seed);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut records = Vec::with_capacity(cfg.n);
    let mut outcome = Outcome::default();
    for index in 0..cfg.n {
        let mut last = None;
        for _ in 0..cfg.attempts_per_point {
            match cfg.region.draw(&mut rng) {
                Ok(p) => {
                    last = Some(Ok(p));
                    break;
                }
                Err(e) => last = Some(Err(e)),
            }
        }
        let record = match last.expect("at least one attempt") {
            Ok(p) => {
                let q = *p.state();
                PointRecord { index, point: Some(q), g: Some(eval_g(&q)), f_relative: Some(f_relative(&q)), error: None }
            }
            Err(e) => PointRecord { index, point: None, g: None, f_relative: None, error: Some(e.to_string()) },
        };
        if let Some(e) = &record.error {
            outcome.summary.push(format!("point {index}: infeasible after {} draws: {e}", cfg.attempts_per_point));
        }
        records.push(record);
    }
    let path = with_ext(&stem(out, &cfg.name, "points")?, "jsonl");
    outcome.written.push(write_points(&path, &prov, &records)?);
    let ok: Vec<_> = records.iter().filter(|r| r.point.is_some()).collect();
    if ok.iter().any(|r| r.g.unwrap().abs() > TOL_G || r.f_relative.unwrap() > TOL_F) {
        outcome.failures.push("membership".into());
    }
    outcome.summary.push(format!("{} of {} points sampled", ok.len(), cfg.n));
    Ok(outcome)
}

pub fn cmd_trace(cfg: &TraceConfig, base: &Path, out: &Path) -> Result<Outcome> {
    cfg.integrator.validate()?;
    ensure!(cfg.t.is_finite(), "t must be finite");
    let seed = cfg.seed.resolve(base)?;
    let path = integrate_flow(&seed, cfg.field, cfg.t, &cfg.integrator).map_err(computation)?;
    let prov = Provenance::new("trace", cfg, cfg.rng_seed);
    let file = with_ext(&stem(out, &cfg.name, "trace")?, "json");
    let end = path.end();
    let summary = vec![format!("X{} to t = {}: {:?}, end point {:?}", cfg.field.number(), end.t, path.status, end.point)];
    Ok(Outcome { written: vec![write_json(&file, kind::TRACE, &prov, &path)?], summary, failures: vec![] })
}

pub fn cmd_chart(cfg: &ChartConfig, base: &Path, out: &Path) -> Result<Outcome> {
    cfg.integrator.validate()?;
    cfg.grid.validate()?;
    let seed = cfg.seed.resolve(base)?;
    let chart = build_chart(&seed, &cfg.grid, &cfg.integrator).map_err(computation)?;
    let prov = Provenance::new("chart", cfg, cfg.rng_seed);
    let file = with_ext(&stem(out, &cfg.name, "chart")?, "json");
    let d = &chart.diagnostics;
    let summary = vec![format!(
        "{} nodes ({} ok, {} truncated near the singular lines, {} outside the domain), max |F|/x1^12 {:e}",
        chart.grid.len(),
        d.ok_nodes,
        d.truncated_singular,
        d.truncated_domain,
        d.max_f_relative
    )];
    Ok(Outcome { written: vec![write_json(&file, kind::CHART, &prov, &chart)?], summary, failures: vec![] })
}

pub fn cmd_group(cfg: &GroupConfig, base: &Path, out: &Path) -> Result<Outcome> {
    let mut prov = Provenance::new("group", cfg, cfg.rng_seed);
    let chart = load_chart(base, &cfg.chart, &mut prov)?;
    let image = transform_chart(&chart, cfg.element).map_err(computation)?;
    let file = with_ext(&stem(out, &cfg.name, "chart_image")?, "json");
    let summary = vec![format!("applied {} to {} nodes", cfg.element, image.grid.len())];
    Ok(Outcome { written: vec![write_json(&file, kind::CHART, &prov, &image)?], summary, failures: vec![] })
}

pub fn cmd_surface(cfg: &SurfaceConfig, base: &Path, out: &Path) -> Result<Outcome> {
    cfg.pose.validate()?;
    let mut prov = Provenance::new("surface", cfg, cfg.rng_seed);
    let chart = load_chart(base, &cfg.chart, &mut prov)?;
    let integrator = cfg.integrator.unwrap_or(chart.config);
    integrator.validate()?;
    let mut grid = integrate_immersion(&chart, &cfg.pose, &integrator, ImmersionOptions { flip_normal: cfg.flip_normal })
        .map_err(computation)?;
    grid.chart_id = Some(content_id(&chart));
    let stem = stem(out, &cfg.name, "surface")?;
    let mut written = vec![write_json(&with_ext(&stem, "json"), kind::SURFACE, &prov, &grid)?];
    written.extend(write_mesh(&stem, &grid, &cfg.mesh, &prov)?);
    let summary = vec![format!(
        "{} nodes, frame drift {:e}, max |H| {:e}",
        grid.grid.len(),
        grid.diagnostics.max_frame_drift,
        grid.diagnostics.max_mean_curvature
    )];
    Ok(Outcome { written, summary, failures: vec![] })
}

pub fn cmd_oracle(cfg: &OracleConfig, out: &Path) -> Result<Outcome> {
    cfg.grid.validate()?;
    let prov = Provenance::new("oracle", cfg, cfg.rng_seed);
    let grid = cone_grid(&ConeSpec { curvature: cfg.curvature, grid: cfg.grid })?;
    let stem = stem(out, &cfg.name, "oracle")?;
    let mut written = Vec::new();
    let mut summary = vec![format!("cone over the Clifford torus, curvature {}, {} nodes", cfg.curvature, grid.grid.len())];
    // the Euclidean cone also has a chart on the singular line
    let grid = if cfg.curvature == 0.0 {
        let chart = cone_chart(&cfg.grid)?;
        let mut grid = grid;
        grid.chart_id = Some(content_id(&chart));
        written.push(write_json(&with_ext(&stem, "chart.json"), kind::CHART, &prov, &chart)?);
        summary.push("wrote the matching leaf chart".into());
        grid
    } else {
        grid
    };
    written.insert(0, write_json(&with_ext(&stem, "json"), kind::SURFACE, &prov, &grid)?);
    written.extend(write_mesh(&stem, &grid, &cfg.mesh, &prov)?);
    Ok(Outcome { written, summary, failures: vec![] })
}

pub fn cmd_verify(cfg: &VerifyConfig, base: &Path, out: &Path) -> Result<Outcome> {
    if cfg.suite.is_none() && cfg.congruence.is_none() && cfg.probe.is_none() {
        bail!("verify needs at least one of \"suite\", \"congruence\" or \"probe\"");
    }
    let stem = stem(out, &cfg.name, "report")?;
    let mut outcome = Outcome::default();

    if let Some(spec) = &cfg.suite {
        let mut prov = Provenance::new("verify", cfg, cfg.rng_seed);
        let chart = spec.chart.as_ref().map(|p| load_chart(base, p, &mut prov)).transpose()?;
        let grid = spec.grid.as_ref().map(|p| load_grid(base, p, &mut prov)).transpose()?;
        if let (Some(c), Some(g)) = (&chart, &grid) {
            if let Some(id) = &g.chart_id {
                ensure!(*id == content_id(c), "the surface was reconstructed from a different chart");
            }
        }
        let report = match (&chart, &grid) {
            (Some(c), g) => run_suite(c, g.as_ref(), &spec.tolerances).map_err(computation)?,
            (None, Some(g)) => run_grid_suite(g, &spec.tolerances).map_err(computation)?,
            (None, None) => bail!("suite needs a chart, a grid or both"),
        };
        outcome.written.push(write_json(&with_ext(&stem, "json"), kind::REPORT, &prov, &report)?);
        let csv = with_ext(&stem, "csv");
        write_atomic(&csv, report.to_csv().as_bytes())?;
        outcome.written.push(csv);
        let failing = report.failing();
        outcome.summary.push(format!("suite: {} channels, {} failing", report.channels.len(), failing.len()));
        outcome.failures.extend(failing.into_iter().map(String::from));
    }

    if let Some(spec) = &cfg.congruence {
        let mut prov = Provenance::new("verify", cfg, cfg.rng_seed);
        let chart_a = load_chart(base, &spec.chart_a, &mut prov)?;
        let grid_a = load_grid(base, &spec.grid_a, &mut prov)?;
        let chart_b = load_chart(base, &spec.chart_b, &mut prov)?;
        let grid_b = load_grid(base, &spec.grid_b, &mut prov)?;
        let verdict = congruence_classifier(&chart_a, &chart_b, &grid_a, &grid_b)?;
        outcome.written.push(write_json(&with_ext(&stem, "congruence.json"), kind::CONGRUENCE, &prov, &verdict)?);
        outcome.summary.push(format!(
            "congruence: {} via {}, rms {:e} (threshold {:e})",
            if verdict.congruent { "congruent" } else { "not congruent" },
            verdict.element,
            verdict.fit.rms,
            verdict.threshold
        ));
        if verdict.congruent != spec.expect_congruent {
            outcome.failures.push("congruence".into());
        }
    }

    if let Some(spec) = &cfg.probe {
        let prov = Provenance::new("verify", cfg, cfg.rng_seed);
        let report = theorem1_probe(spec.samples, &spec.h_values, spec.curvature, cfg.rng_seed, &spec.region).map_err(computation)?;
        outcome.written.push(write_json(&with_ext(&stem, "probe.json"), kind::PROBE, &prov, &report)?);
        for e in &report.entries {
            outcome.summary.push(format!("probe: H = {}, c = {}: floor {:e} over {} samples", e.h, spec.curvature, e.floor, report.samples));
        }
        if let Some(bound) = spec.floor_at_least {
            if report.entries.iter().any(|e| e.h != 0.0 && !(e.floor >= bound)) {
                outcome.failures.push("probe_floor".into());
            }
        }
    }
    Ok(outcome)
}
