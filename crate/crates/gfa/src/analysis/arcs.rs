//! Arc structure of attachment basins.
//!
//! Launching from a fine grid of equispaced angles partitions the circle at
//! infinity into attachment basins. For 2D clusters each particle's basin
//! is a union of at most 6 arcs; this measures the arc count per particle
//! on a finite grid.
//!
//! Grid-level reading: a basin boundary point can land exactly on a grid
//! angle and masquerade as a one-angle run, so runs of length 1 are ignored
//! (they are boundary artifacts at any resolution this coarse). Stalled
//! angles sit on separatrices by construction; they are dropped before run
//! counting, which merges the two neighboring runs exactly when they belong
//! to the same particle.

use super::mc::with_pool;
use crate::error::{GfaError, Result};
use crate::flow::{FlowConfig, FlowEngine, FlowOutcome};
use crate::geometry::{Cluster, Tolerances};
use crate::potential::PotentialKind;
use crate::vec::dir2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArcReport {
    pub grid: usize,
    /// Arc count per particle, id order.
    pub arcs: Vec<u32>,
    pub stalled_angles: u64,
    pub failed_angles: u64,
}

impl ArcReport {
    pub fn max_arcs(&self) -> u32 {
        self.arcs.iter().copied().max().unwrap_or(0)
    }
}

pub fn arc_structure(
    cluster: &Cluster<2>,
    kind: PotentialKind,
    grid: usize,
    flow: &FlowConfig,
    workers: usize,
) -> Result<ArcReport> {
    if grid < 360 {
        return Err(GfaError::InvalidInput(format!(
            "arc grid must be at least 360 angles, got {grid}"
        )));
    }
    let tol = Tolerances { contact: flow.contact_tol };
    if let Some(v) = cluster.verify(&tol).first() {
        return Err(GfaError::InvalidInput(format!("cluster fails verification: {v}")));
    }
    let engine = FlowEngine::new(cluster, kind, flow.clone())?;

    // Outcome per grid angle, in angle order (None = stalled or failed).
    let outcomes: Vec<Option<u32>> = with_pool(workers, || {
        (0..grid)
            .into_par_iter()
            .map(|j| {
                let theta = j as f64 * std::f64::consts::TAU / grid as f64;
                match engine.launch(dir2(theta)) {
                    Ok(FlowOutcome::Attached { parent, .. }) => Some(parent),
                    _ => None,
                }
            })
            .collect()
    })?;

    let stalled_or_failed = outcomes.iter().filter(|o| o.is_none()).count() as u64;
    // Angle-ordered parents with stalled angles dropped; adjacent runs of
    // the same particle merge across the gap.
    let attached: Vec<u32> = outcomes.iter().flatten().copied().collect();

    let mut arcs = vec![0u32; cluster.len()];
    let m = attached.len();
    if m > 0 {
        // Circular run-length walk, starting at a run boundary so no run is
        // split across the wrap point. All-one-particle has no boundary:
        // that is a single full-circle arc.
        let mut start = None;
        for i in 0..m {
            if attached[i] != attached[(i + m - 1) % m] {
                start = Some(i);
                break;
            }
        }
        match start {
            None => arcs[attached[0] as usize] = 1,
            Some(s) => {
                let mut i = 0;
                while i < m {
                    let particle = attached[(s + i) % m];
                    let mut len = 1;
                    while i + len < m && attached[(s + i + len) % m] == particle {
                        len += 1;
                    }
                    if len >= 2 {
                        arcs[particle as usize] += 1;
                    }
                    i += len;
                }
            }
        }
    }

    Ok(ArcReport {
        grid,
        arcs,
        stalled_angles: stalled_or_failed,
        failed_angles: 0,
    })
}
