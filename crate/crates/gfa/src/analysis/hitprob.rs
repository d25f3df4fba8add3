//! Per-particle attachment probabilities from directions at "infinity".
//!
//! Estimates p_i = P(next arriving particle attaches to particle i) by
//! launching flows from the standard start radius in uniformly sampled
//! directions. The p_i sum to one minus the (tiny) stall fraction; stalled
//! launches are reported separately rather than redistributed, since
//! redistribution would bias the per-particle estimates.

use super::mc::{sample_launches, wilson95, StartMode};
use crate::error::{GfaError, Result};
use crate::flow::{FlowConfig, FlowEngine};
use crate::geometry::{Cluster, Tolerances};
use crate::potential::PotentialKind;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticleStat {
    pub id: u32,
    pub hits: u64,
    pub p_hat: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HitStats {
    pub kind: PotentialKind,
    pub seed: u64,
    pub total_samples: u64,
    pub stall_count: u64,
    pub failure_count: u64,
    pub start_radius: f64,
    /// One entry per particle, id order (zero-hit particles included).
    pub per_particle: Vec<ParticleStat>,
}

impl HitStats {
    /// The particle with the largest p_hat (smallest id on ties).
    pub fn max_particle(&self) -> Option<&ParticleStat> {
        self.per_particle.iter().reduce(|best, s| if s.p_hat > best.p_hat { s } else { best })
    }

    /// Σ p_hat over particles: 1 − (stalls + failures)/samples.
    pub fn attached_fraction(&self) -> f64 {
        self.per_particle.iter().map(|s| s.p_hat).sum()
    }
}

pub fn hit_probabilities<const D: usize>(
    cluster: &Cluster<D>,
    kind: PotentialKind,
    samples: u64,
    seed: u64,
    flow: &FlowConfig,
    workers: usize,
) -> Result<HitStats> {
    if samples == 0 {
        return Err(GfaError::InvalidInput("samples must be positive".into()));
    }
    let tol = Tolerances { contact: flow.contact_tol };
    if let Some(v) = cluster.verify(&tol).first() {
        return Err(GfaError::InvalidInput(format!("cluster fails verification: {v}")));
    }
    let engine = FlowEngine::new(cluster, kind, flow.clone())?;
    let counts = sample_launches(&engine, samples, seed, workers, StartMode::Standard)?;
    let per_particle = counts
        .hits
        .iter()
        .enumerate()
        .map(|(i, &hits)| {
            let (wilson_low, wilson_high) = wilson95(hits, samples);
            ParticleStat {
                id: i as u32,
                hits,
                p_hat: hits as f64 / samples as f64,
                wilson_low,
                wilson_high,
            }
        })
        .collect();
    Ok(HitStats {
        kind,
        seed,
        total_samples: samples,
        stall_count: counts.stalls,
        // No absorber is configured, so absorbed outcomes cannot occur; fold
        // them into failures defensively rather than losing conservation.
        failure_count: counts.failures + counts.absorbed,
        start_radius: engine.start_radius(),
        per_particle,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair_cluster() -> Cluster<2> {
        Cluster::from_parts(vec![[0.0, 0.0], [1.0, 0.0]], vec![None, Some(0)]).unwrap()
    }

    #[test]
    fn single_particle_takes_all_mass() {
        let c: Cluster<2> = Cluster::singleton();
        let stats =
            hit_probabilities(&c, PotentialKind::Log, 2000, 7, &FlowConfig::default(), 0).unwrap();
        assert_eq!(stats.per_particle.len(), 1);
        assert_eq!(stats.per_particle[0].hits, 2000);
        assert_eq!(stats.per_particle[0].p_hat, 1.0);
        assert_eq!(stats.stall_count, 0);
        assert_eq!(stats.start_radius, 100.0);
        assert!(stats.per_particle[0].wilson_low > 0.99);
    }

    #[test]
    fn mirror_symmetric_pair_splits_evenly() {
        // {(0,0),(1,0)} is mirror symmetric about x = 1/2, so both particles
        // get mass 1/2; check within ~3σ plus conservation exactly.
        let samples = 6000u64;
        let stats = hit_probabilities(
            &pair_cluster(),
            PotentialKind::Power(1.0),
            samples,
            11,
            &FlowConfig::default(),
            0,
        )
        .unwrap();
        let hits: u64 = stats.per_particle.iter().map(|s| s.hits).sum();
        assert_eq!(hits + stats.stall_count + stats.failure_count, samples);
        let sigma = 3.5 * (0.25 / samples as f64).sqrt();
        for s in &stats.per_particle {
            assert!((s.p_hat - 0.5).abs() < sigma, "p_hat {} off 1/2", s.p_hat);
            assert!(s.wilson_low < 0.5 && 0.5 < s.wilson_high);
        }
    }

    #[test]
    fn identical_for_any_worker_count() {
        let c = pair_cluster();
        let run = |workers| {
            hit_probabilities(&c, PotentialKind::Log, 800, 3, &FlowConfig::default(), workers)
                .unwrap()
        };
        let (one, eight) = (run(1), run(8));
        assert_eq!(one, eight);
    }

    #[test]
    fn failure_budget_aborts_loudly() {
        let flow = FlowConfig { max_steps: 5, ..FlowConfig::default() };
        let c: Cluster<2> = Cluster::singleton();
        match hit_probabilities(&c, PotentialKind::Log, 100, 1, &flow, 0) {
            Err(GfaError::TooManyFailures { failures, samples }) => {
                assert_eq!(failures, 100);
                assert_eq!(samples, 100);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn invalid_clusters_are_rejected() {
        let c =
            Cluster::from_parts(vec![[0.0, 0.0], [0.3, 0.0]], vec![None, None]).unwrap();
        assert!(hit_probabilities(&c, PotentialKind::Log, 10, 1, &FlowConfig::default(), 0)
            .is_err());
    }

    #[test]
    fn max_particle_breaks_ties_to_smaller_id() {
        let stats = hit_probabilities(
            &pair_cluster(),
            PotentialKind::NearestMax,
            1000,
            5,
            &FlowConfig::default(),
            0,
        )
        .unwrap();
        let m = stats.max_particle().unwrap();
        assert!(m.id == 0 || m.id == 1);
        assert!((stats.attached_fraction() - 1.0).abs() < 1e-12);
    }
}
