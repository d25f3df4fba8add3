//! Measurement harness: Monte Carlo and regression experiments over
//! clusters and growth traces.
//!
//! Everything here is deterministic for a fixed seed regardless of worker
//! count: per-sample randomness comes from counter-based substreams indexed
//! by sample number, and results are aggregated as exact integer counts, so
//! no floating-point reduction order can leak through.

mod arcs;
mod beurling;
mod epsdisk;
mod exponent;
mod hitprob;
mod mc;
mod radius;

pub use arcs::{arc_structure, ArcReport};
pub use beurling::{beurling_scan, line_cluster, BeurlingRow, ClusterFamily};
pub use epsdisk::{eps_disk_probability, EpsDiskStat};
pub use exponent::{growth_exponent, ExponentFit};
pub use hitprob::{hit_probabilities, HitStats, ParticleStat};
pub use mc::wilson95;
pub use radius::{radius_convergence, RadiusReport, RadiusRow};
