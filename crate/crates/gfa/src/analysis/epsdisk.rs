//! Probability that the flow passes through a small disk away from the cluster.
//!
//! Launches from a random direction at the standard start radius and counts
//! trajectories absorbed by a disk of radius `eps` centered at `y` before
//! they reach the cluster. This estimates the harmonic-style visit
//! probability of the point `y`.

use super::mc::{sample_launches, wilson95, StartMode};
use crate::error::{GfaError, Result};
use crate::flow::{FlowConfig, FlowEngine};
use crate::geometry::{Cluster, Tolerances};
use crate::potential::PotentialKind;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsDiskStat {
    /// Disk center, padded to three components for 2D runs.
    pub y: [f64; 3],
    pub eps: f64,
    pub samples: u64,
    pub absorbed: u64,
    pub attached: u64,
    pub stall_count: u64,
    pub failure_count: u64,
    /// Fraction of launches absorbed by the disk.
    pub p_hat: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
}

pub fn eps_disk_probability<const D: usize>(
    cluster: &Cluster<D>,
    kind: PotentialKind,
    y: [f64; D],
    eps: f64,
    samples: u64,
    seed: u64,
    flow: &FlowConfig,
    workers: usize,
) -> Result<EpsDiskStat> {
    if samples == 0 {
        return Err(GfaError::InvalidInput("samples must be positive".into()));
    }
    let tol = Tolerances { contact: flow.contact_tol };
    if let Some(v) = cluster.verify(&tol).first() {
        return Err(GfaError::InvalidInput(format!("cluster fails verification: {v}")));
    }
    let engine = FlowEngine::new(cluster, kind, flow.clone())?.with_absorber(y, eps)?;
    let counts = sample_launches(&engine, samples, seed, workers, StartMode::Standard)?;

    let p_hat = counts.absorbed as f64 / samples as f64;
    let (wilson_low, wilson_high) = wilson95(counts.absorbed, samples);
    let mut y3 = [0.0; 3];
    y3[..D].copy_from_slice(&y);
    Ok(EpsDiskStat {
        y: y3,
        eps,
        samples,
        absorbed: counts.absorbed,
        attached: counts.attached(),
        stall_count: counts.stalls,
        failure_count: counts.failures,
        p_hat,
        wilson_low,
        wilson_high,
    })
}
