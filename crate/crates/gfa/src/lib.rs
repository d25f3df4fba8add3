//! Gradient flow aggregation (GFA).
//!
//! A cluster of unit-separated particles grows one particle at a time: each
//! new particle arrives from a uniformly random direction far away and follows
//! the normalized gradient of an interaction energy
//!
//! * `Log`        — E(x) = -Σ log ‖x − x_i‖        (the α → 0 endpoint),
//! * `Power(α)`   — E(x) = Σ ‖x − x_i‖^(−α), α > 0,
//! * `NearestMax` — E(x) = max_i ‖x − x_i‖^(−1)    (the α → ∞ endpoint),
//!
//! until it first comes within distance 1 of an existing particle, where it
//! sticks. The crate provides the field evaluation ([`potential`], with a
//! Barnes-Hut accelerator in [`bh`]), the gradient-ascent integrator
//! ([`flow`]), the growth loop ([`growth`]), supporting geometry (uniform
//! spatial hash, incremental convex hull, cluster store in [`geometry`]),
//! statistical experiments ([`analysis`]), file formats ([`io`]), and an SVG
//! renderer ([`render`]). The `gfa` binary exposes all of it on the command
//! line.
//!
//! Everything is deterministic given a seed: random directions come from
//! counter-based substreams ([`rng`]), and parallel measurement reduces
//! integer counts so results are independent of thread count.

pub mod analysis;
pub mod bh;
pub mod error;
pub mod flow;
pub mod geometry;
pub mod growth;
pub mod io;
pub mod potential;
pub mod render;
pub mod rng;
pub mod vec;

pub use error::{GfaError, Result};
pub use potential::PotentialKind;
