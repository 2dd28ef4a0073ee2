//! Wavefront OBJ export of reconstructed grids, with the full coordinates in a sidecar.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use cfh_core::geometry::ImmersionGrid;

use crate::artifact::{kind, read_json, with_ext, write_atomic, write_json, Artifact, Provenance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeshConfig {
    /// Zero-based ambient coordinate left out of the projection.
    pub drop: usize,
    /// Also emit quads over (u2, u1) at fixed u3.
    pub u2_u1_slices: bool,
}

impl Default for MeshConfig {
    fn default() -> Self {
        Self { drop: 3, u2_u1_slices: false }
    }
}

impl MeshConfig {
    /// The three kept coordinates. In R^5 the last remaining one is dropped as well.
    pub fn columns(&self, dim: usize) -> Result<[usize; 3]> {
        if self.drop >= dim {
            bail!("mesh.drop = {} is out of range for {dim} ambient coordinates", self.drop);
        }
        let kept: Vec<usize> = (0..dim).filter(|&k| k != self.drop).take(3).collect();
        Ok([kept[0], kept[1], kept[2]])
    }
}

/// Full coordinates in OBJ vertex order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshVertices {
    pub drop: usize,
    pub columns: [usize; 3],
    pub counts: [usize; 3],
    pub vertices: Vec<Vec<f64>>,
    /// Grid multi-index of each vertex.
    pub nodes: Vec<[usize; 3]>,
    pub ok: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjMesh {
    pub vertices: Vec<[f64; 3]>,
    /// One-based vertex indices.
    pub faces: Vec<[usize; 4]>,
    pub provenance: Option<Provenance>,
}

fn quads(grid: &ImmersionGrid, u2_u1: bool) -> Vec<[usize; 4]> {
    let g = &grid.grid;
    let [n1, n2, n3] = g.counts();
    let ok = |i: [usize; 3]| grid.status[g.index(i)].is_ok();
    let mut out = Vec::new();
    let mut push = |corners: [[usize; 3]; 4]| {
        if corners.iter().all(|&c| ok(c)) {
            out.push(corners.map(|c| g.index(c) + 1));
        }
    };
    for i2 in 0..n2 {
        for i1 in 0..n1.saturating_sub(1) {
            for i3 in 0..n3.saturating_sub(1) {
                push([[i1, i2, i3], [i1 + 1, i2, i3], [i1 + 1, i2, i3 + 1], [i1, i2, i3 + 1]]);
            }
        }
    }
    if u2_u1 {
        for i3 in 0..n3 {
            for i2 in 0..n2.saturating_sub(1) {
                for i1 in 0..n1.saturating_sub(1) {
                    push([[i1, i2, i3], [i1, i2 + 1, i3], [i1 + 1, i2 + 1, i3], [i1 + 1, i2, i3]]);
                }
            }
        }
    }
    out
}

pub fn obj_text(grid: &ImmersionGrid, cfg: &MeshConfig, provenance: &Provenance) -> Result<String> {
    let cols = cfg.columns(grid.ambient.dimension())?;
    let mut s = String::new();
    writeln!(s, "# cfh mesh")?;
    writeln!(s, "# provenance {}", serde_json::to_string(provenance)?)?;
    writeln!(s, "# columns x{} x{} x{}", cols[0] + 1, cols[1] + 1, cols[2] + 1)?;
    for p in &grid.positions {
        writeln!(s, "v {:.16e} {:.16e} {:.16e}", p[cols[0]], p[cols[1]], p[cols[2]])?;
    }
    for q in quads(grid, cfg.u2_u1_slices) {
        writeln!(s, "f {} {} {} {}", q[0], q[1], q[2], q[3])?;
    }
    Ok(s)
}

/// Writes `<stem>.obj` and `<stem>.vertices.json`.
pub fn write_mesh(stem: &Path, grid: &ImmersionGrid, cfg: &MeshConfig, provenance: &Provenance) -> Result<Vec<PathBuf>> {
    let cols = cfg.columns(grid.ambient.dimension())?;
    let obj = with_ext(stem, "obj");
    write_atomic(&obj, obj_text(grid, cfg, provenance)?.as_bytes())?;
    let sidecar = MeshVertices {
        drop: cfg.drop,
        columns: cols,
        counts: grid.grid.counts(),
        vertices: grid.positions.clone(),
        nodes: (0..grid.grid.len()).map(|k| grid.grid.multi_index(k)).collect(),
        ok: grid.status.iter().map(|s| s.is_ok()).collect(),
    };
    let side = write_json(&with_ext(stem, "vertices.json"), kind::MESH_VERTICES, provenance, &sidecar)?;
    Ok(vec![obj, side])
}

pub fn read_obj(path: &Path) -> Result<ObjMesh> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mut mesh = ObjMesh { vertices: Vec::new(), faces: Vec::new(), provenance: None };
    for (k, line) in text.lines().enumerate() {
        let bad = || format!("{}:{}: malformed line", path.display(), k + 1);
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("v") => {
                let v: Vec<f64> = parts.map(str::parse).collect::<Result<_, _>>().with_context(bad)?;
                let [a, b, c] = v[..] else { bail!(bad()) };
                mesh.vertices.push([a, b, c]);
            }
            Some("f") => {
                let f: Vec<usize> = parts.map(str::parse).collect::<Result<_, _>>().with_context(bad)?;
                let [a, b, c, d] = f[..] else { bail!(bad()) };
                mesh.faces.push([a, b, c, d]);
            }
            Some("#") => {
                if let Some(json) = line.strip_prefix("# provenance ") {
                    mesh.provenance = Some(serde_json::from_str(json).with_context(bad)?);
                }
            }
            None => {}
            Some(_) => bail!(bad()),
        }
    }
    let n = mesh.vertices.len();
    if mesh.faces.iter().flatten().any(|&i| i == 0 || i > n) {
        bail!("{}: face index out of range", path.display());
    }
    Ok(mesh)
}

pub fn read_vertices(path: &Path) -> Result<Artifact<MeshVertices>> {
    read_json(path, kind::MESH_VERTICES)
}
