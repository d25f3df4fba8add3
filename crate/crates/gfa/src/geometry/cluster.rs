//! The growing cluster: positions, parent links, and search structures.
//!
//! A cluster is an append-only set of particles with pairwise distance ≥ 1
//! (within tolerance). Each particle optionally records the particle it
//! attached to; grown particles always have parents, while seed particles
//! (one at the origin by default, or several when growth starts from a file)
//! are roots. The store maintains a spatial hash for contact and
//! nearest-neighbor queries, a convex hull in 2D, the maximum origin
//! distance, and the exact diameter, all updated incrementally per push.
//!
//! [`Cluster::verify`] re-checks the structural invariants from scratch and
//! returns every violation instead of failing fast, so damaged files can be
//! diagnosed.

use super::{hull3, max_contact_degree, ConvexHull, Tolerances, UniformGrid};
use crate::error::{GfaError, Result};
use crate::vec::{dist, norm, Point};
use serde::Serialize;

/// One structural invariant failure found by [`Cluster::verify`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Violation {
    /// Particles closer than 1 − tol.
    Separation { a: u32, b: u32, dist: f64 },
    /// Parent link length differs from 1 by more than tol.
    ParentDistance { child: u32, parent: u32, dist: f64 },
    /// Parent index out of range or self-referential.
    ParentIndex { child: u32, parent: u32 },
    /// Parent links loop.
    Cycle { at: u32 },
    /// More contacts than the kissing number allows.
    Degree { particle: u32, degree: u32, max: u32 },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::Separation { a, b, dist } => {
                write!(f, "particles {a} and {b} are {dist} apart (< 1)")
            }
            Violation::ParentDistance { child, parent, dist } => {
                write!(f, "particle {child} is {dist} from its parent {parent} (≠ 1)")
            }
            Violation::ParentIndex { child, parent } => {
                write!(f, "particle {child} has invalid parent index {parent}")
            }
            Violation::Cycle { at } => write!(f, "parent links loop through particle {at}"),
            Violation::Degree { particle, degree, max } => {
                write!(f, "particle {particle} has {degree} contacts (max {max})")
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Cluster<const D: usize> {
    positions: Vec<Point<D>>,
    parents: Vec<Option<u32>>,
    grid: UniformGrid<D>,
    hull: Option<ConvexHull>,
    diam: f64,
    rho: f64,
}

impl<const D: usize> Cluster<D> {
    /// The canonical starting cluster: one root particle at the origin.
    pub fn singleton() -> Self {
        let mut c = Self::empty();
        c.push([0.0; D], None);
        c
    }

    fn empty() -> Self {
        assert!(D == 2 || D == 3, "dimension must be 2 or 3");
        Cluster {
            positions: vec![],
            parents: vec![],
            grid: UniformGrid::new(),
            hull: if D == 2 { Some(ConvexHull::new()) } else { None },
            diam: 0.0,
            rho: 0.0,
        }
    }

    /// Rebuild a cluster from stored positions and parent links. Validates
    /// finiteness and parent indices; geometric invariants are checked
    /// separately by [`Self::verify`] so imperfect files can still be loaded
    /// and inspected.
    pub fn from_parts(positions: Vec<Point<D>>, parents: Vec<Option<u32>>) -> Result<Self> {
        if positions.is_empty() {
            return Err(GfaError::InvalidInput("cluster must have at least one particle".into()));
        }
        if positions.len() != parents.len() {
            return Err(GfaError::InvalidInput(format!(
                "{} positions but {} parent links",
                positions.len(),
                parents.len()
            )));
        }
        if positions.len() > u32::MAX as usize {
            return Err(GfaError::InvalidInput("cluster too large".into()));
        }
        let mut c = Self::empty();
        for (i, (&p, &parent)) in positions.iter().zip(parents.iter()).enumerate() {
            if p.iter().any(|v| !v.is_finite()) {
                return Err(GfaError::InvalidInput(format!(
                    "particle {i} has non-finite coordinates"
                )));
            }
            if let Some(q) = parent {
                if q as usize >= positions.len() || q as usize == i {
                    return Err(GfaError::InvalidInput(format!(
                        "particle {i} has invalid parent {q}"
                    )));
                }
            }
            c.push(p, parent);
        }
        Ok(c)
    }

    /// Append a particle, updating grid, hull, ρ, and diameter. Geometric
    /// validity is the caller's responsibility (growth guarantees it).
    pub fn push(&mut self, p: Point<D>, parent: Option<u32>) -> u32 {
        let id = self.positions.len() as u32;
        // Diameter can only grow through the new point, and the farthest
        // existing point from it is a hull vertex (2D) or found by scan (3D).
        let reach = match &self.hull {
            Some(h) => h.max_distance_from([p[0], p[1]]),
            None => self
                .positions
                .iter()
                .fold(0.0f64, |m, q| m.max(dist(*q, p))),
        };
        self.diam = self.diam.max(reach);
        self.rho = self.rho.max(norm(p));
        self.grid.insert(id, p);
        if let Some(h) = self.hull.as_mut() {
            h.insert([p[0], p[1]], id);
        }
        self.positions.push(p);
        self.parents.push(parent);
        id
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn dim(&self) -> usize {
        D
    }

    pub fn positions(&self) -> &[Point<D>] {
        &self.positions
    }

    pub fn position(&self, i: u32) -> Point<D> {
        self.positions[i as usize]
    }

    pub fn parents(&self) -> &[Option<u32>] {
        &self.parents
    }

    pub fn parent(&self, i: u32) -> Option<u32> {
        self.parents[i as usize]
    }

    /// Exact nearest particle (smallest index on ties).
    pub fn nearest(&self, x: Point<D>) -> Option<(u32, f64)> {
        self.grid.nearest(&self.positions, x)
    }

    /// Smallest-index particle within the contact shell `d ≤ 1 + tol`.
    pub fn contact(&self, x: Point<D>, tol: f64) -> Option<u32> {
        self.grid.contact(&self.positions, x, tol)
    }

    /// Lower bound on the nearest-particle distance (0 inside the bbox).
    pub fn bbox_distance(&self, x: Point<D>) -> f64 {
        self.grid.bbox_distance(x)
    }

    pub fn grid(&self) -> &UniformGrid<D> {
        &self.grid
    }

    /// Convex hull of the particles (2D clusters only).
    pub fn hull(&self) -> Option<&ConvexHull> {
        self.hull.as_ref()
    }

    /// Largest distance of any particle from the origin.
    pub fn radius_max(&self) -> f64 {
        self.rho
    }

    /// Cluster diameter, maintained exactly across pushes.
    pub fn diameter(&self) -> f64 {
        self.diam
    }

    /// Recompute the diameter from scratch: rotating calipers on the hull in
    /// 2D, pairwise scan over hull vertices in 3D. Used to cross-check the
    /// incremental value.
    pub fn diameter_recompute(&self) -> f64 {
        if let Some(h) = &self.hull {
            return h.diameter();
        }
        // D == 3
        let pts3: Vec<[f64; 3]> = self
            .positions
            .iter()
            .map(|p| [p[0], p[1], p[2]])
            .collect();
        hull3::diameter_3d(&pts3)
    }

    /// Check all structural invariants; returns every violation found.
    ///
    /// * pairwise separation ≥ 1 − tol,
    /// * every parent link has length 1 ± tol,
    /// * parent links are acyclic (forests with several roots are valid),
    /// * contact degree within the kissing number (6 in 2D, 12 in 3D).
    pub fn verify(&self, tol: &Tolerances) -> Vec<Violation> {
        let mut out = vec![];
        let n = self.positions.len();
        let shell = 1.0 + tol.contact;
        let min_sep = 1.0 - tol.contact;
        let max_deg = max_contact_degree(D);
        for i in 0..n as u32 {
            let x = self.positions[i as usize];
            let mut degree = 0u32;
            self.grid.for_each_within(&self.positions, x, shell, &mut |j, d2| {
                if j == i {
                    return;
                }
                degree += 1;
                let d = d2.sqrt();
                if d < min_sep && j > i {
                    out.push(Violation::Separation { a: i, b: j, dist: d });
                }
            });
            if degree > max_deg {
                out.push(Violation::Degree { particle: i, degree, max: max_deg });
            }
            if let Some(p) = self.parents[i as usize] {
                if p as usize >= n || p == i {
                    out.push(Violation::ParentIndex { child: i, parent: p });
                } else {
                    let d = dist(x, self.positions[p as usize]);
                    if (d - 1.0).abs() > tol.contact {
                        out.push(Violation::ParentDistance { child: i, parent: p, dist: d });
                    }
                }
            }
        }
        // Cycle detection over the parent forest.
        let mut state = vec![0u8; n]; // 0 unvisited, 1 on path, 2 done
        let mut path: Vec<u32> = vec![];
        for start in 0..n as u32 {
            if state[start as usize] != 0 {
                continue;
            }
            let mut cur = start;
            path.clear();
            loop {
                if state[cur as usize] == 1 {
                    out.push(Violation::Cycle { at: cur });
                    break;
                }
                if state[cur as usize] == 2 {
                    break;
                }
                state[cur as usize] = 1;
                path.push(cur);
                match self.parents[cur as usize] {
                    Some(p) if (p as usize) < n && p != cur => cur = p,
                    _ => break,
                }
            }
            for &v in &path {
                state[v as usize] = 2;
            }
        }
        out
    }
}
