//! Numerical probe of the constant-mean-curvature obstruction.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::variety::{cmc_obstruction, cmc_quadratic, SampleRegion, State};

pub const PROBE_HEADER: &str = "evidence, not proof: residual floors of the constant mean curvature relations over sampled variety points";

/// An alpha counts as nonvanishing above this magnitude.
const ALPHA_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeEntry {
    pub h: f64,
    /// min over samples of the largest residual (quadratic and the three relations).
    pub floor: f64,
    /// The sample attaining the floor.
    pub argmin: State,
    /// max over samples of the largest residual.
    pub worst: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub header: String,
    pub curvature: f64,
    pub rng_seed: u64,
    pub region: SampleRegion,
    pub requested: usize,
    pub samples: usize,
    pub attempts: usize,
    pub entries: Vec<ProbeEntry>,
}

impl ProbeReport {
    pub fn entry(&self, h: f64) -> Option<&ProbeEntry> {
        self.entries.iter().find(|e| e.h == h)
    }
}

/// Largest of |quadratic| and the three relation residuals at (q, H, c).
pub fn probe_residual(q: &State, h: f64, c: f64) -> Result<f64> {
    let o = cmc_obstruction(q, h, c)?;
    let quad = cmc_quadratic(q, h, c)?;
    Ok(o.relations.iter().fold(quad.abs(), |m, r| m.max(r.abs())))
}

/// Samples `n_samples` variety points with at least two nonvanishing alphas and reports,
/// for each H, the smallest worst-case residual seen. A positive floor is consistent with
/// the absence of such states.
pub fn theorem1_probe(n_samples: usize, h_values: &[f64], c: f64, rng_seed: u64, region: &SampleRegion) -> Result<ProbeReport> {
    region.validate()?;
    if h_values.iter().chain([&c]).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("probe parameters".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut points = Vec::with_capacity(n_samples);
    let mut attempts = 0;
    let max_attempts = 100 * n_samples.max(1);
    while points.len() < n_samples && attempts < max_attempts {
        attempts += 1;
        let Ok(p) = region.draw(&mut rng) else { continue };
        if p.y().iter().filter(|a| a.abs() > ALPHA_FLOOR).count() >= 2 {
            points.push(*p.state());
        }
    }
    if points.is_empty() {
        return Err(Error::InvalidConfig("sample region produced no admissible points".into()));
    }
    let mut entries = Vec::with_capacity(h_values.len());
    for &h in h_values {
        let mut entry = ProbeEntry { h, floor: f64::INFINITY, argmin: points[0], worst: 0.0 };
        for q in &points {
            let r = probe_residual(q, h, c)?;
            if r < entry.floor {
                entry.floor = r;
                entry.argmin = *q;
            }
            entry.worst = entry.worst.max(r);
        }
        entries.push(entry);
    }
    Ok(ProbeReport {
        header: PROBE_HEADER.to_string(),
        curvature: c,
        rng_seed,
        region: *region,
        requested: n_samples,
        samples: points.len(),
        attempts,
        entries,
    })
}
