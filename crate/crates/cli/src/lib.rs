//! Command-line front end: each subcommand reads a JSON config, runs one core operation
//! and writes its result next to a provenance block.
//!
//! Exit codes: 0 success, 1 a hard assertion failed, 2 usage, config or input error.

pub mod artifact;
pub mod commands;
pub mod config;
pub mod mesh;

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::Result;

pub use commands::*;
use config::*;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ASSERTION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Sample,
    Trace,
    Chart,
    Surface,
    Verify,
    Oracle,
    Group,
}

/// Files written, human-readable lines and the names of failed assertion channels.
#[derive(Debug, Default)]
pub struct Outcome {
    pub written: Vec<PathBuf>,
    pub summary: Vec<String>,
    pub failures: Vec<String>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.failures.is_empty() {
            EXIT_OK
        } else {
            EXIT_ASSERTION
        }
    }
}

/// A numerical failure while running a valid config; reported as an assertion failure.
#[derive(Debug)]
pub struct ComputationFailed(pub cfh_core::Error);

impl fmt::Display for ComputationFailed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "computation failed: {}", self.0)
    }
}

impl std::error::Error for ComputationFailed {}

/// Sorts core errors raised mid-run: bad inputs stay usage errors, the rest are failures.
pub fn computation(e: cfh_core::Error) -> anyhow::Error {
    use cfh_core::Error::*;
    match e {
        NonFinite(_) | Truncated { .. } | FrameDegenerate { .. } | RepeatedCurvatures(_) | BadCorrespondence(..) => {
            ComputationFailed(e).into()
        }
        other => other.into(),
    }
}

pub fn exit_code(err: &anyhow::Error) -> i32 {
    if err.downcast_ref::<ComputationFailed>().is_some() {
        EXIT_ASSERTION
    } else {
        EXIT_USAGE
    }
}

/// Rejects a set but unusable `CFH_THREADS`.
pub fn check_threads_env() -> Result<()> {
    if let Ok(v) = std::env::var(cfh_core::parallel::THREADS_ENV) {
        match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => {}
            _ => anyhow::bail!("{} must be a positive integer, got {v:?}", cfh_core::parallel::THREADS_ENV),
        }
    }
    Ok(())
}

pub fn run(command: Command, config: &Path, out: &Path) -> Result<Outcome> {
    let base = config_dir(config);
    match command {
        Command::Sample => cmd_sample(&load_config(config)?, out),
        Command::Trace => cmd_trace(&load_config(config)?, &base, out),
        Command::Chart => cmd_chart(&load_config(config)?, &base, out),
        Command::Surface => cmd_surface(&load_config(config)?, &base, out),
        Command::Verify => cmd_verify(&load_config(config)?, &base, out),
        Command::Oracle => cmd_oracle(&load_config(config)?, out),
        Command::Group => cmd_group(&load_config(config)?, &base, out),
    }
}

/// Anything the tool writes, parsed back.
#[derive(Debug)]
pub enum Loaded {
    Points(artifact::Provenance, Vec<artifact::PointRecord>),
    Trace(artifact::Artifact<cfh_core::flow::FlowPath>),
    Chart(artifact::Artifact<cfh_core::flow::LeafChart>),
    Surface(artifact::Artifact<cfh_core::geometry::ImmersionGrid>),
    Report(artifact::Artifact<cfh_core::verify::ResidualReport>),
    Congruence(artifact::Artifact<cfh_core::verify::CongruenceVerdict>),
    Probe(artifact::Artifact<cfh_core::verify::ProbeReport>),
    MeshVertices(artifact::Artifact<mesh::MeshVertices>),
    Obj(mesh::ObjMesh),
    Csv(Vec<Vec<String>>),
}

/// Reads any output file, dispatching on its extension and kind tag.
pub fn read_output(path: &Path) -> Result<Loaded> {
    use artifact::{kind, read_json};
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
    if name.ends_with(".jsonl") {
        let (p, r) = artifact::read_points(path)?;
        return Ok(Loaded::Points(p, r));
    }
    if name.ends_with(".obj") {
        return Ok(Loaded::Obj(mesh::read_obj(path)?));
    }
    if name.ends_with(".csv") {
        let text = std::fs::read_to_string(path)?;
        let rows: Vec<Vec<String>> = text.lines().map(|l| l.split(',').map(String::from).collect()).collect();
        anyhow::ensure!(rows.first().is_some_and(|h| h.join(",") == "name,max,mean,tol,pass"), "{} is not a report table", path.display());
        return Ok(Loaded::Csv(rows));
    }
    #[derive(serde::Deserialize)]
    struct Tag {
        kind: String,
    }
    let text = std::fs::read_to_string(path)?;
    let tag: Tag = serde_json::from_str(&text)?;
    Ok(match tag.kind.as_str() {
        kind::TRACE => Loaded::Trace(read_json(path, kind::TRACE)?),
        kind::CHART => Loaded::Chart(read_json(path, kind::CHART)?),
        kind::SURFACE => Loaded::Surface(read_json(path, kind::SURFACE)?),
        kind::REPORT => Loaded::Report(read_json(path, kind::REPORT)?),
        kind::CONGRUENCE => Loaded::Congruence(read_json(path, kind::CONGRUENCE)?),
        kind::PROBE => Loaded::Probe(read_json(path, kind::PROBE)?),
        kind::MESH_VERTICES => Loaded::MeshVertices(mesh::read_vertices(path)?),
        other => anyhow::bail!("{}: unknown kind {other:?}", path.display()),
    })
}
