//! Output envelopes, provenance and atomic file writes.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use cfh_core::variety::State;
use cfh_core::verify::content_id;

pub const TOOL: &str = "cfh";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputRef {
    pub path: String,
    /// Content hash of the parsed payload.
    pub content_id: String,
}

/// Attached to every file the tool writes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub tool: String,
    pub tool_version: String,
    pub command: String,
    pub config_hash: String,
    pub rng_seed: u64,
    pub inputs: Vec<InputRef>,
}

impl Provenance {
    pub fn new<C: Serialize>(command: &str, config: &C, rng_seed: u64) -> Self {
        Self {
            tool: TOOL.into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config_hash: content_id(config),
            rng_seed,
            inputs: Vec::new(),
        }
    }

    pub fn input<T: Serialize>(&mut self, path: &Path, data: &T) {
        self.inputs.push(InputRef { path: path.display().to_string(), content_id: content_id(data) });
    }
}

/// A typed payload with its kind tag and provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Artifact<T> {
    pub kind: String,
    pub provenance: Provenance,
    pub data: T,
}

pub mod kind {
    pub const POINTS: &str = "points";
    pub const TRACE: &str = "trace";
    pub const CHART: &str = "chart";
    pub const SURFACE: &str = "surface";
    pub const REPORT: &str = "report";
    pub const CONGRUENCE: &str = "congruence";
    pub const PROBE: &str = "probe";
    pub const MESH_VERTICES: &str = "mesh_vertices";
}

/// `stem` with `.ext` appended, keeping any dots already in the stem.
pub fn with_ext(stem: &Path, ext: &str) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

/// Writes through a temporary file in the target directory, then renames over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("cannot create a temporary file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, kind: &str, provenance: &Provenance, data: &T) -> Result<PathBuf> {
    #[derive(Serialize)]
    struct Out<'a, T> {
        kind: &'a str,
        provenance: &'a Provenance,
        data: &'a T,
    }
    let mut bytes = serde_json::to_vec(&Out { kind, provenance, data })?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)?;
    Ok(path.to_path_buf())
}

pub fn read_json<T: DeserializeOwned>(path: &Path, expected: &str) -> Result<Artifact<T>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let art: Artifact<T> = serde_json::from_str(&text).with_context(|| format!("{} is not a valid {expected} file", path.display()))?;
    if art.kind != expected {
        bail!("{} holds a {} file, expected {expected}", path.display(), art.kind);
    }
    Ok(art)
}

/// One line of a points file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointRecord {
    pub index: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<State>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_relative: Option<f64>,
    /// Why no point was produced.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PointsHeader {
    kind: String,
    provenance: Provenance,
}

/// JSON lines: a header with the provenance, then one record per requested point.
pub fn write_points(path: &Path, provenance: &Provenance, records: &[PointRecord]) -> Result<PathBuf> {
    let header = PointsHeader { kind: kind::POINTS.into(), provenance: provenance.clone() };
    let mut bytes = serde_json::to_vec(&header)?;
    bytes.push(b'\n');
    for r in records {
        serde_json::to_writer(&mut bytes, r)?;
        bytes.push(b'\n');
    }
    write_atomic(path, &bytes)?;
    Ok(path.to_path_buf())
}

pub fn read_points(path: &Path) -> Result<(Provenance, Vec<PointRecord>)> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mut lines = text.lines().enumerate();
    let Some((_, first)) = lines.next() else { bail!("{} is empty", path.display()) };
    let header: PointsHeader = serde_json::from_str(first).with_context(|| format!("{}: bad header", path.display()))?;
    if header.kind != kind::POINTS {
        bail!("{} holds a {} file, expected points", path.display(), header.kind);
    }
    let mut records = Vec::new();
    for (k, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        records.push(serde_json::from_str(line).with_context(|| format!("{}:{}: bad record", path.display(), k + 1))?);
    }
    Ok((header.provenance, records))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces_the_target() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("nested/out.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }

    #[test]
    fn kind_is_checked_on_read() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.json");
        let prov = Provenance::new("test", &0, 7);
        write_json(&p, kind::CHART, &prov, &[1.0f64, 0.1]).unwrap();
        let back: Artifact<Vec<f64>> = read_json(&p, kind::CHART).unwrap();
        assert_eq!(back.data, vec![1.0, 0.1]);
        assert_eq!(back.provenance.rng_seed, 7);
        assert!(read_json::<Vec<f64>>(&p, kind::SURFACE).is_err());
    }

    #[test]
    fn points_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("p.jsonl");
        let prov = Provenance::new("sample", &1, 3);
        let recs = vec![
            PointRecord { index: 0, point: Some([0.1, 0.2, 0.3, 1.0 / 3.0, 0.0, -2.5]), g: Some(1e-17), f_relative: Some(0.0), error: None },
            PointRecord { index: 1, point: None, g: None, f_relative: None, error: Some("no real solution".into()) },
        ];
        write_points(&p, &prov, &recs).unwrap();
        let (back_prov, back) = read_points(&p).unwrap();
        assert_eq!(back_prov, prov);
        assert_eq!(back, recs);
    }
}
