//! Shared Monte Carlo plumbing: deterministic parallel launching, count
//! aggregation, Wilson intervals, worker pools.

use crate::error::{GfaError, Result};
use crate::flow::{FlowEngine, FlowOutcome};
use crate::growth::sample_direction;
use crate::rng::substream;
use crate::vec::scale;
use rayon::prelude::*;

/// 97.5% normal quantile: two-sided 95% coverage.
pub(crate) const WILSON_Z95: f64 = 1.959963984540054;

/// Launch failures tolerated per mille before a measurement aborts.
const FAILURE_BUDGET_PER_MILLE: u64 = 1;

/// Wilson score interval for `hits` successes in `total` trials at 95%.
pub fn wilson95(hits: u64, total: u64) -> (f64, f64) {
    if total == 0 {
        return (0.0, 1.0);
    }
    let n = total as f64;
    let p = hits as f64 / n;
    let z2 = WILSON_Z95 * WILSON_Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = WILSON_Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Run `f` on a dedicated pool of `workers` threads (0 = the global pool).
pub(crate) fn with_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if workers == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| GfaError::InvalidInput(format!("cannot build a {workers}-thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Where each sample starts.
#[derive(Debug, Clone, Copy)]
pub(crate) enum StartMode {
    /// The engine's standard start radius (closed form for NearestMax).
    Standard,
    /// Explicit radius, always integrated.
    Radius(f64),
}

/// Exact integer tallies of launch outcomes; merging is commutative, so the
/// totals cannot depend on how rayon schedules the samples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct SampleCounts {
    pub hits: Vec<u64>,
    pub stalls: u64,
    pub failures: u64,
    pub absorbed: u64,
}

impl SampleCounts {
    fn zero(n: usize) -> Self {
        SampleCounts { hits: vec![0; n], stalls: 0, failures: 0, absorbed: 0 }
    }

    fn merge(mut self, other: Self) -> Self {
        for (a, b) in self.hits.iter_mut().zip(other.hits) {
            *a += b;
        }
        self.stalls += other.stalls;
        self.failures += other.failures;
        self.absorbed += other.absorbed;
        self
    }

    pub fn attached(&self) -> u64 {
        self.hits.iter().sum()
    }
}

/// Launch `samples` flows with directions from `substream(seed, k, 0)` and
/// tally the outcomes. Errors from individual launches count as failures.
pub(crate) fn sample_launches<const D: usize>(
    engine: &FlowEngine<'_, D>,
    samples: u64,
    seed: u64,
    workers: usize,
    mode: StartMode,
) -> Result<SampleCounts> {
    let n = engine.cluster().len();
    let counts = with_pool(workers, || {
        (0..samples)
            .into_par_iter()
            .fold(
                || SampleCounts::zero(n),
                |mut acc, k| {
                    let mut rng = substream(seed, k, 0);
                    let (dir, _, _) = sample_direction::<D>(&mut rng);
                    let out = match mode {
                        StartMode::Standard => engine.launch(dir),
                        StartMode::Radius(r) => engine.launch_from(scale(dir, r)),
                    };
                    match out {
                        Ok(FlowOutcome::Attached { parent, .. }) => {
                            acc.hits[parent as usize] += 1
                        }
                        Ok(FlowOutcome::Stalled { .. }) => acc.stalls += 1,
                        Ok(FlowOutcome::Absorbed { .. }) => acc.absorbed += 1,
                        Ok(FlowOutcome::Failed { .. }) | Err(_) => acc.failures += 1,
                    }
                    acc
                },
            )
            .reduce(|| SampleCounts::zero(n), SampleCounts::merge)
    })?;
    debug_assert_eq!(
        counts.attached() + counts.stalls + counts.failures + counts.absorbed,
        samples
    );
    if counts.failures * 1000 > samples * FAILURE_BUDGET_PER_MILLE {
        return Err(GfaError::TooManyFailures { failures: counts.failures, samples });
    }
    Ok(counts)
}
