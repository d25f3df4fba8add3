//! The aggregation outer loop.
//!
//! Starting from a seed particle at the origin (or a supplied initial
//! cluster), each round samples an arrival direction uniformly — on the
//! circle in 2D, on the sphere in 3D — launches the gradient flow, and
//! attaches the particle where it first touches a unit shell, recording the
//! parent link. Stalled launches (flows caught at interior critical points)
//! consume a resample: the same particle redraws its direction from the next
//! attempt substream, up to [`MAX_STALL_RESAMPLES`] times before the run
//! aborts — a persistent stall means the configuration is degenerate
//! (symmetric) in a way random growth never produces.
//!
//! Determinism: the direction for (particle k, attempt a) comes from the
//! counter-based substream `substream(seed, k, a)`, so resampling one
//! particle can never perturb any other particle's draws, and identical
//! configs reproduce clusters bit for bit.
//!
//! For `NearestMax` the launch is closed-form (no integration), which makes
//! million-particle runs cheap; in 2D it reads the incrementally maintained
//! convex hull, in 3D it scans for the extreme particle.
//!
//! In 3D only `Power(1)` (the harmonic case) and `NearestMax` are
//! supported; other exponents are rejected rather than given untested
//! semantics.

use crate::bh::BhTree;
use crate::error::{GfaError, Result};
use crate::flow::{FlowConfig, FlowEngine, FlowOutcome};
use crate::geometry::{Cluster, Tolerances};
use crate::potential::PotentialKind;
use crate::rng::{substream, SubRng};
use serde::{Deserialize, Serialize};

/// Stall-resample budget per particle before the run aborts.
pub const MAX_STALL_RESAMPLES: u32 = 100;

/// Attachments between rebuilds of the shared Barnes-Hut prefix tree; the
/// un-treed tail is summed exactly, so this trades rebuild time against a
/// slightly longer exact tail.
const REBUILD_TAIL: usize = 64;

/// Everything a growth run depends on. Identical configs give identical runs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrowthConfig {
    pub kind: PotentialKind,
    pub n_target: usize,
    pub seed: u64,
    #[serde(default)]
    pub flow: FlowConfig,
    /// Cluster sizes at which callers want snapshots persisted. The growth
    /// loop itself ignores this; it is plumbing for front-ends, carried here
    /// so the manifest captures it.
    #[serde(default)]
    pub snapshot_schedule: Vec<usize>,
}

impl GrowthConfig {
    pub fn new(kind: PotentialKind, n_target: usize, seed: u64) -> Self {
        GrowthConfig {
            kind,
            n_target,
            seed,
            flow: FlowConfig::default(),
            snapshot_schedule: Vec::new(),
        }
    }

    pub fn validate<const D: usize>(&self) -> Result<()> {
        self.kind.validate()?;
        self.flow.validate()?;
        if self.n_target == 0 {
            return Err(GfaError::InvalidInput("n_target must be at least 1".into()));
        }
        match D {
            2 => Ok(()),
            3 => match self.kind {
                PotentialKind::NearestMax => Ok(()),
                PotentialKind::Power(a) if a == 1.0 => Ok(()),
                _ => Err(GfaError::Unsupported(
                    "3D growth supports only Power(1) (the harmonic case) and NearestMax",
                )),
            },
            _ => Err(GfaError::Unsupported("growth is defined for 2 or 3 dimensions")),
        }
    }
}

/// One attachment, as recorded in the run trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    /// Particle id (= attachment order; the seed particle is 0).
    pub id: u32,
    pub parent: u32,
    /// Arrival azimuth: the sampled angle in 2D, `atan2(dir.y, dir.x)` in 3D.
    pub theta: f64,
    /// Arrival direction, zero-padded to three components in 2D.
    pub dir: [f64; 3],
    /// Stalled draws burned before this one attached (0 = first try).
    pub attempts: u32,
    pub steps: u64,
    pub path_length: f64,
    /// Cluster diameter right after this attachment.
    pub diameter: f64,
}

/// Full record of one growth run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthTrace {
    pub kind: PotentialKind,
    pub dim: u32,
    pub seed: u64,
    /// Size of the initial cluster (1 for a standard origin-seeded run).
    pub initial_len: u32,
    /// diam(k) for cluster sizes k = initial_len ..= n, one entry per size.
    pub diam: Vec<f64>,
    pub records: Vec<TraceRecord>,
    /// Total stalled launches across the whole run.
    pub stalls: u64,
}

impl GrowthTrace {
    /// diam(k) for cluster size k, if the run covered it.
    pub fn diam_at(&self, k: usize) -> Option<f64> {
        k.checked_sub(self.initial_len as usize).and_then(|i| self.diam.get(i)).copied()
    }

    /// Largest cluster size the trace reaches.
    pub fn final_len(&self) -> usize {
        self.initial_len as usize + self.records.len()
    }
}

/// Grow from a single seed particle at the origin.
pub fn grow<const D: usize>(config: &GrowthConfig) -> Result<(Cluster<D>, GrowthTrace)> {
    grow_impl(Cluster::singleton(), config, |_, _| {})
}

/// As [`grow`], invoking `on_attach` after every attachment (for snapshot
/// scheduling, progress reporting, online statistics).
pub fn grow_with<const D: usize>(
    config: &GrowthConfig,
    on_attach: impl FnMut(&Cluster<D>, &TraceRecord),
) -> Result<(Cluster<D>, GrowthTrace)> {
    grow_impl(Cluster::singleton(), config, on_attach)
}

/// Grow from a supplied initial cluster (multi-seed starts). The initial
/// cluster must pass verification; its particles keep their ids.
pub fn grow_from<const D: usize>(
    initial: Cluster<D>,
    config: &GrowthConfig,
) -> Result<(Cluster<D>, GrowthTrace)> {
    grow_impl(initial, config, |_, _| {})
}

pub fn grow_from_with<const D: usize>(
    initial: Cluster<D>,
    config: &GrowthConfig,
    on_attach: impl FnMut(&Cluster<D>, &TraceRecord),
) -> Result<(Cluster<D>, GrowthTrace)> {
    grow_impl(initial, config, on_attach)
}

/// Uniform direction draw; returns (direction, 3-padded direction, azimuth).
pub(crate) fn sample_direction<const D: usize>(
    rng: &mut SubRng,
) -> (crate::vec::Point<D>, [f64; 3], f64) {
    let mut dir = [0.0; D];
    if D == 2 {
        let theta = rng.angle();
        let (s, c) = theta.sin_cos();
        dir[0] = c;
        dir[1] = s;
        (dir, [c, s, 0.0], theta)
    } else {
        let u = rng.unit3();
        dir[0] = u[0];
        dir[1] = u[1];
        dir[2] = u[2];
        (dir, u, u[1].atan2(u[0]))
    }
}

fn grow_impl<const D: usize>(
    mut cluster: Cluster<D>,
    config: &GrowthConfig,
    mut on_attach: impl FnMut(&Cluster<D>, &TraceRecord),
) -> Result<(Cluster<D>, GrowthTrace)> {
    config.validate::<D>()?;
    let tol = Tolerances { contact: config.flow.contact_tol };
    let violations = cluster.verify(&tol);
    if let Some(v) = violations.first() {
        return Err(GfaError::InvalidInput(format!(
            "initial cluster fails verification ({} violations; first: {v})",
            violations.len()
        )));
    }

    let initial_len = cluster.len();
    let n = config.n_target;
    let mut trace = GrowthTrace {
        kind: config.kind,
        dim: D as u32,
        seed: config.seed,
        initial_len: initial_len as u32,
        diam: Vec::with_capacity(n.saturating_sub(initial_len) + 1),
        records: Vec::with_capacity(n.saturating_sub(initial_len)),
        stalls: 0,
    };
    trace.diam.push(cluster.diameter());

    let summed = config.kind != PotentialKind::NearestMax;
    let mut tree: Option<BhTree<D>> = None;
    let mut treed_len: usize = 0;

    while cluster.len() < n {
        let id = cluster.len() as u32;

        if summed
            && config.flow.bh_opening > 0.0
            && cluster.len() >= config.flow.bh_threshold
            && (tree.is_none() || cluster.len() - treed_len >= REBUILD_TAIL)
        {
            tree = Some(BhTree::build(cluster.positions()));
            treed_len = cluster.len();
        }

        let mut attempt: u32 = 0;
        let (mut record, position) = loop {
            if attempt >= MAX_STALL_RESAMPLES {
                return Err(GfaError::GrowthAborted {
                    particle: id as usize,
                    attempts: attempt,
                });
            }
            let mut rng = substream(config.seed, id as u64, attempt as u64);
            let (dir, dir3, theta) = sample_direction::<D>(&mut rng);
            let engine = match tree.as_ref() {
                Some(t) => {
                    FlowEngine::with_tree(&cluster, config.kind, config.flow.clone(), t, treed_len)?
                }
                None => FlowEngine::new(&cluster, config.kind, config.flow.clone())?,
            };
            match engine.launch(dir)? {
                FlowOutcome::Attached { parent, position, steps, path_length } => {
                    break (
                        TraceRecord {
                            id,
                            parent,
                            theta,
                            dir: dir3,
                            attempts: attempt,
                            steps,
                            path_length,
                            diameter: 0.0,
                        },
                        position,
                    );
                }
                FlowOutcome::Stalled { .. } => {
                    trace.stalls += 1;
                    attempt += 1;
                }
                FlowOutcome::Failed { reason, steps } => {
                    return Err(GfaError::FlowFailed {
                        particle: id as usize,
                        what: format!("{reason:?} after {steps} steps"),
                    });
                }
                FlowOutcome::Absorbed { .. } => {
                    return Err(GfaError::FlowFailed {
                        particle: id as usize,
                        what: "unexpected absorbing outcome in growth".into(),
                    });
                }
            }
        };

        let new_id = cluster.push(position, Some(record.parent));
        debug_assert_eq!(new_id, id);
        record.diameter = cluster.diameter();
        // Each particle sits within 1 + tol of its parent, so every
        // attachment can extend the diameter by at most ~2.
        debug_assert!(
            record.diameter
                <= trace.diam[0] + 2.0 * (cluster.len() - initial_len) as f64 + 1e-6
        );
        trace.diam.push(record.diameter);
        trace.records.push(record);
        on_attach(&cluster, trace.records.last().expect("just pushed"));
    }

    Ok((cluster, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vec::{dist, norm};

    #[test]
    fn n1_is_just_the_seed() {
        let (c, t) = grow::<2>(&GrowthConfig::new(PotentialKind::Log, 1, 9)).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.position(0), [0.0, 0.0]);
        assert!(t.records.is_empty());
        assert_eq!(t.diam, vec![0.0]);
    }

    #[test]
    fn second_particle_lands_on_the_sampled_ray() {
        // Single-particle flows are radial, so particle 1 attaches at the
        // sampled direction itself, at distance 1.
        for kind in [PotentialKind::Log, PotentialKind::Power(2.0), PotentialKind::NearestMax] {
            let (c, t) = grow::<2>(&GrowthConfig::new(kind, 2, 41)).unwrap();
            assert_eq!(c.len(), 2);
            let rec = &t.records[0];
            assert_eq!(rec.parent, 0);
            let p = c.position(1);
            assert!((dist(p, [0.0, 0.0]) - 1.0).abs() <= 2e-9, "{kind}: {p:?}");
            let sampled = [rec.dir[0], rec.dir[1]];
            assert!(dist(p, sampled) < 1e-6, "{kind}: {p:?} vs {sampled:?}");
        }
    }

    #[test]
    fn grown_clusters_verify_clean() {
        for kind in [PotentialKind::Log, PotentialKind::Power(1.0), PotentialKind::NearestMax] {
            let (c, t) = grow::<2>(&GrowthConfig::new(kind, 60, 17)).unwrap();
            assert_eq!(c.len(), 60);
            assert!(c.verify(&Tolerances::default()).is_empty(), "{kind}");
            assert_eq!(t.records.len(), 59);
            assert_eq!(t.diam.len(), 60);
            // diam is non-decreasing and dominated by the unit-step bound.
            for w in t.diam.windows(2) {
                assert!(w[1] >= w[0] - 1e-12);
            }
            for (i, d) in t.diam.iter().enumerate() {
                assert!(*d <= 2.0 * (i + 1) as f64);
            }
            // Radius never exceeds diameter once there are two particles.
            assert!(c.radius_max() <= c.diameter() + 1e-12);
        }
    }

    #[test]
    fn same_seed_reproduces_bitwise_different_seed_does_not() {
        let cfg = GrowthConfig::new(PotentialKind::Power(0.5), 40, 1234);
        let (a, ta) = grow::<2>(&cfg).unwrap();
        let (b, tb) = grow::<2>(&cfg).unwrap();
        assert_eq!(a.positions(), b.positions());
        assert_eq!(ta, tb);
        let (c, _) = grow::<2>(&GrowthConfig::new(PotentialKind::Power(0.5), 40, 1235)).unwrap();
        assert_ne!(a.positions(), c.positions());
    }

    #[test]
    fn potentials_shape_the_cluster_differently() {
        let (a, _) = grow::<2>(&GrowthConfig::new(PotentialKind::Log, 30, 7)).unwrap();
        let (b, _) = grow::<2>(&GrowthConfig::new(PotentialKind::Power(3.0), 30, 7)).unwrap();
        assert_ne!(a.positions(), b.positions());
    }

    #[test]
    fn callback_sees_every_attachment_in_order() {
        let mut seen = vec![];
        let (_, t) = grow_with::<2>(&GrowthConfig::new(PotentialKind::Log, 20, 3), |c, r| {
            seen.push((c.len(), r.id));
        })
        .unwrap();
        assert_eq!(seen.len(), 19);
        for (i, (len, id)) in seen.iter().enumerate() {
            assert_eq!(*len, i + 2);
            assert_eq!(*id as usize, i + 1);
        }
        assert_eq!(t.records.len(), 19);
    }

    #[test]
    fn grow_from_extends_a_multi_seed_start() {
        // Two seeds far apart: both ends keep growing.
        let initial =
            Cluster::from_parts(vec![[-8.0, 0.0], [8.0, 0.0]], vec![None, None]).unwrap();
        let cfg = GrowthConfig::new(PotentialKind::Log, 30, 99);
        let (c, t) = grow_from::<2>(initial, &cfg).unwrap();
        assert_eq!(c.len(), 30);
        assert_eq!(t.initial_len, 2);
        assert_eq!(t.final_len(), 30);
        assert!(c.verify(&Tolerances::default()).is_empty());
        assert!(t.diam[0] >= 16.0 - 1e-12);
        // Particles attached near both seeds.
        let near_left = c.positions().iter().filter(|p| p[0] < 0.0).count();
        assert!(near_left >= 3 && near_left <= 27, "{near_left}");
        // Invalid initial clusters are rejected.
        let overlapping =
            Cluster::from_parts(vec![[0.0, 0.0], [0.4, 0.0]], vec![None, None]).unwrap();
        assert!(grow_from::<2>(overlapping, &cfg).is_err());
    }

    #[test]
    fn three_dimensional_growth_harmonic_and_nearest_max() {
        for kind in [PotentialKind::Power(1.0), PotentialKind::NearestMax] {
            let (c, t) = grow::<3>(&GrowthConfig::new(kind, 40, 11)).unwrap();
            assert_eq!(c.len(), 40);
            assert!(c.verify(&Tolerances::default()).is_empty(), "{kind}");
            assert_eq!(t.dim, 3);
            // Directions live on the sphere.
            for r in &t.records {
                assert!((norm(r.dir) - 1.0).abs() < 1e-12);
            }
        }
        for bad in [PotentialKind::Log, PotentialKind::Power(2.0)] {
            assert!(matches!(
                grow::<3>(&GrowthConfig::new(bad, 10, 1)),
                Err(GfaError::Unsupported(_))
            ));
        }
    }

    #[test]
    fn nearest_max_scales_to_thousands_quickly() {
        let (c, t) = grow::<2>(&GrowthConfig::new(PotentialKind::NearestMax, 5000, 2)).unwrap();
        assert_eq!(c.len(), 5000);
        assert_eq!(t.stalls, 0, "closed-form launches cannot stall");
        assert!(c.verify(&Tolerances::default()).is_empty());
        // The hull the fast path reads stays small compared to n.
        let hull_size = c.hull().expect("2D cluster keeps a hull").vertex_count();
        assert!(hull_size < 200, "hull has {hull_size} vertices");
    }

    #[test]
    fn flow_failure_surfaces_as_an_error() {
        let mut cfg = GrowthConfig::new(PotentialKind::Log, 3, 5);
        cfg.flow.max_steps = 5;
        match grow::<2>(&cfg) {
            Err(GfaError::FlowFailed { particle, .. }) => assert_eq!(particle, 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn stall_rate_is_tiny_on_standard_runs() {
        let (_, t) = grow::<2>(&GrowthConfig::new(PotentialKind::Log, 150, 8)).unwrap();
        let launches = t.records.len() as u64 + t.stalls;
        assert!(
            (t.stalls as f64) < 1e-3 * launches as f64 + 1.0,
            "{} stalls in {launches} launches",
            t.stalls
        );
    }

    #[test]
    fn barnes_hut_kicks_in_mid_run_without_breaking_invariants() {
        // Push a run across the default threshold (128) so the prefix-tree
        // path is exercised, then check structure.
        let (c, t) = grow::<2>(&GrowthConfig::new(PotentialKind::Power(1.0), 200, 77)).unwrap();
        assert_eq!(c.len(), 200);
        assert!(c.verify(&Tolerances::default()).is_empty());
        assert_eq!(t.records.len(), 199);
    }
}
