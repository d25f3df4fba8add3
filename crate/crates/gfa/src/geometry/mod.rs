//! Cluster geometry: uniform spatial hashing, incremental convex hulls,
//! diameters, and the growing particle store itself.

mod cluster;
mod grid;
mod hull;
mod hull3;

pub use cluster::{Cluster, Violation};
pub use grid::UniformGrid;
pub use hull::ConvexHull;
pub use hull3::hull_vertices_3d;

use serde::{Deserialize, Serialize};

/// Geometric tolerances, centralized so every module agrees on what
/// "touching" means.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Tolerances {
    /// Contact shell half-width: a point touches particle i when
    /// ‖x − x_i‖ ≤ 1 + contact, and separation requires ≥ 1 − contact.
    pub contact: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { contact: 1e-9 }
    }
}

/// Maximum possible contact degree of a 1-separated cluster (kissing number).
pub fn max_contact_degree(dim: usize) -> u32 {
    match dim {
        2 => 6,
        3 => 12,
        _ => unreachable!("dimension must be 2 or 3"),
    }
}
