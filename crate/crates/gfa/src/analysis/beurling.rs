//! Scaling of the largest attachment probability with cluster size.
//!
//! For a family of 1-separated n-point clusters, measures max_i p_i as n
//! grows. The canonical stress family is n collinear points at spacing 1
//! (centered at the origin so the start radius stays symmetric); grown
//! clusters are available as the self-consistent alternative.

use super::hitprob::{hit_probabilities, HitStats};
use crate::error::{GfaError, Result};
use crate::flow::FlowConfig;
use crate::geometry::Cluster;
use crate::growth::{grow, GrowthConfig};
use crate::potential::PotentialKind;
use crate::rng::mix64;
use serde::{Deserialize, Serialize};

/// How the cluster for each n is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusterFamily {
    /// n collinear points at unit spacing, centered at the origin.
    Line,
    /// Clusters grown with the scanned potential; the per-n growth seed is
    /// derived as mix64(seed ^ n) so runs are independent across n.
    Grown,
}

/// n collinear points at unit spacing on the x-axis, centered at the origin.
pub fn line_cluster(n: usize) -> Result<Cluster<2>> {
    if n == 0 {
        return Err(GfaError::InvalidInput("a line cluster needs n ≥ 1".into()));
    }
    let mid = 0.5 * (n as f64 - 1.0);
    let positions = (0..n).map(|i| [i as f64 - mid, 0.0]).collect();
    let parents = (0..n).map(|i| if i == 0 { None } else { Some(i as u32 - 1) }).collect();
    Cluster::from_parts(positions, parents)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeurlingRow {
    pub n: usize,
    pub max_particle: u32,
    pub max_p_hat: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
    pub stall_count: u64,
    pub failure_count: u64,
}

/// One row per n in `n_list`. All rows share the same direction substreams
/// (common random numbers), which reduces the variance of between-n ratios.
pub fn beurling_scan(
    kind: PotentialKind,
    n_list: &[usize],
    family: ClusterFamily,
    samples: u64,
    seed: u64,
    flow: &FlowConfig,
    workers: usize,
) -> Result<Vec<BeurlingRow>> {
    if n_list.is_empty() {
        return Err(GfaError::InvalidInput("n_list must be nonempty".into()));
    }
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let cluster = match family {
            ClusterFamily::Line => line_cluster(n)?,
            ClusterFamily::Grown => {
                let growth_seed = mix64(seed ^ n as u64);
                let mut cfg = GrowthConfig::new(kind, n, growth_seed);
                cfg.flow = flow.clone();
                grow::<2>(&cfg)?.0
            }
        };
        let stats: HitStats =
            hit_probabilities(&cluster, kind, samples, seed, flow, workers)?;
        let best = stats.max_particle().expect("nonempty cluster").clone();
        rows.push(BeurlingRow {
            n,
            max_particle: best.id,
            max_p_hat: best.p_hat,
            wilson_low: best.wilson_low,
            wilson_high: best.wilson_high,
            stall_count: stats.stall_count,
            failure_count: stats.failure_count,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Tolerances;

    #[test]
    fn line_cluster_geometry() {
        let c = line_cluster(5).unwrap();
        assert_eq!(c.len(), 5);
        assert_eq!(c.position(0), [-2.0, 0.0]);
        assert_eq!(c.position(4), [2.0, 0.0]);
        assert!(c.verify(&Tolerances::default()).is_empty());
        assert_eq!(c.diameter(), 4.0);
        // Even n: half-integer coordinates, still centered.
        let c = line_cluster(4).unwrap();
        assert_eq!(c.position(0), [-1.5, 0.0]);
        assert_eq!(c.position(3), [1.5, 0.0]);
        assert!(line_cluster(0).is_err());
    }

    #[test]
    fn n_equals_one_gives_certainty() {
        let rows = beurling_scan(
            PotentialKind::Log,
            &[1],
            ClusterFamily::Line,
            500,
            3,
            &FlowConfig::default(),
            0,
        )
        .unwrap();
        assert_eq!(rows[0].max_p_hat, 1.0);
        assert_eq!(rows[0].max_particle, 0);
    }

    #[test]
    fn line_mass_concentrates_at_the_endpoints() {
        let rows = beurling_scan(
            PotentialKind::Log,
            &[5, 9],
            ClusterFamily::Line,
            2000,
            91,
            &FlowConfig::default(),
            0,
        )
        .unwrap();
        assert_eq!(rows.len(), 2);
        for row in &rows {
            assert!(
                row.max_particle == 0 || row.max_particle as usize == row.n - 1,
                "max at {} for n = {}",
                row.max_particle,
                row.n
            );
        }
        // More points spread the mass: the peak cannot grow.
        assert!(rows[1].max_p_hat <= rows[0].max_p_hat + 0.05);
    }

    #[test]
    fn line_peak_decays_for_power_half() {
        // Doubling the line length must not raise the peak probability; at
        // these sizes the decay is strong enough that even the Wilson
        // intervals separate.
        let rows = beurling_scan(
            PotentialKind::Power(0.5),
            &[8, 16],
            ClusterFamily::Line,
            2000,
            29,
            &FlowConfig::default(),
            0,
        )
        .unwrap();
        assert!(
            rows[1].wilson_high < rows[0].wilson_low,
            "peak failed to decay: {:?} -> {:?}",
            rows[0].max_p_hat,
            rows[1].max_p_hat
        );
    }

    #[test]
    fn grown_family_runs_end_to_end() {
        let rows = beurling_scan(
            PotentialKind::NearestMax,
            &[10, 20],
            ClusterFamily::Grown,
            400,
            17,
            &FlowConfig::default(),
            0,
        )
        .unwrap();
        assert_eq!(rows.len(), 2);
        for row in &rows {
            assert!(row.max_p_hat > 0.0 && row.max_p_hat <= 1.0);
        }
    }
}
