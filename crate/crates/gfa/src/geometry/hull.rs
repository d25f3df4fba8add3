//! Insertion-only 2D convex hull.
//!
//! The hull is kept as two monotone chains (lower and upper) in ordered maps
//! keyed by lexicographic (x, y); the upper chain stores negated coordinates
//! so both share the lower-chain insertion logic. Inserting a point is
//! O(log m) plus one map removal per hull vertex it deletes, which amortizes:
//! a vertex can only be deleted once. Collinear points are *not* vertices —
//! chains keep strict turns only — so degenerate clusters yield hulls of one
//! or two vertices.

use crate::error::{GfaError, Result};
use crate::vec::cross2;
use std::collections::BTreeMap;

/// Lexicographic (x, y) key with a total order.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Key([f64; 2]);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0[0]
            .total_cmp(&other.0[0])
            .then(self.0[1].total_cmp(&other.0[1]))
    }
}

/// One monotone chain with lower-hull semantics (kept points turn strictly
/// left when walked in ascending key order).
#[derive(Debug, Clone, Default)]
struct Chain {
    map: BTreeMap<Key, u32>,
}

impl Chain {
    /// Insert a candidate vertex; returns the number of vertices removed.
    fn insert(&mut self, p: [f64; 2], id: u32) -> usize {
        let k = Key(p);
        if self.map.contains_key(&k) {
            // A coincident point can never be a new vertex.
            return 0;
        }
        let pred = self.map.range(..k).next_back().map(|(a, _)| a.0);
        let succ = self.map.range(k..).next().map(|(b, _)| b.0);
        if let (Some(a), Some(b)) = (pred, succ) {
            // Interior in key order: only below the segment a-b is it a
            // lower-hull vertex (collinear points are skipped).
            if cross2(a, b, p) >= 0.0 {
                return 0;
            }
        }
        self.map.insert(k, id);
        let mut removed = 0;
        // Repair convexity walking right from p.
        loop {
            let mut it = self.map.range((std::ops::Bound::Excluded(k), std::ops::Bound::Unbounded));
            match (it.next(), it.next()) {
                (Some((b1, _)), Some((b2, _))) if cross2(p, b1.0, b2.0) <= 0.0 => {
                    let b1 = *b1;
                    self.map.remove(&b1);
                    removed += 1;
                }
                _ => break,
            }
        }
        // And walking left.
        loop {
            let mut it = self.map.range(..k).rev();
            match (it.next(), it.next()) {
                (Some((a1, _)), Some((a2, _))) if cross2(a2.0, a1.0, p) <= 0.0 => {
                    let a1 = *a1;
                    self.map.remove(&a1);
                    removed += 1;
                }
                _ => break,
            }
        }
        removed
    }
}

/// Incremental convex hull of the inserted points.
#[derive(Debug, Clone, Default)]
pub struct ConvexHull {
    lower: Chain,
    upper: Chain,
    len: usize,
}

impl ConvexHull {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of points inserted so far.
    pub fn points_inserted(&self) -> usize {
        self.len
    }

    /// Add a point; O(log m) amortized.
    pub fn insert(&mut self, p: [f64; 2], id: u32) {
        self.lower.insert(p, id);
        self.upper.insert([-p[0], -p[1]], id);
        self.len += 1;
    }

    /// Number of hull vertices.
    pub fn vertex_count(&self) -> usize {
        let l = self.lower.map.len();
        let u = self.upper.map.len();
        if l + u <= 2 {
            // Single point: each chain holds it once.
            return l.min(u).max(if l + u > 0 { 1 } else { 0 });
        }
        l + u - 2
    }

    /// Hull vertices in counterclockwise order as `(position, particle id)`,
    /// starting from the lexicographically smallest vertex.
    pub fn vertices_ccw(&self) -> Vec<([f64; 2], u32)> {
        let mut out: Vec<([f64; 2], u32)> =
            self.lower.map.iter().map(|(k, &id)| (k.0, id)).collect();
        let upper: Vec<([f64; 2], u32)> = self
            .upper
            .map
            .iter()
            .map(|(k, &id)| ([-k.0[0], -k.0[1]], id))
            .collect();
        if out.len() + upper.len() > 2 {
            out.extend(upper[1..upper.len() - 1].iter().copied());
        }
        out
    }

    /// Hull vertex maximizing `⟨position, dir⟩`; smallest particle id on
    /// exact ties. Errors when the hull is empty.
    pub fn select(&self, dir: [f64; 2]) -> Result<u32> {
        let mut best: Option<(f64, u32, [f64; 2])> = None;
        let mut consider = |pos: [f64; 2], id: u32| {
            let s = pos[0] * dir[0] + pos[1] * dir[1];
            match best {
                Some((bs, bid, _)) if s < bs || (s == bs && id >= bid) => {}
                _ => best = Some((s, id, pos)),
            }
        };
        for (k, &id) in self.lower.map.iter() {
            consider(k.0, id);
        }
        for (k, &id) in self.upper.map.iter() {
            consider([-k.0[0], -k.0[1]], id);
        }
        best.map(|(_, id, _)| id)
            .ok_or_else(|| GfaError::InvalidInput("select on an empty hull".into()))
    }

    /// Position of the selected vertex along with its id (see [`select`]).
    pub fn select_with_position(&self, dir: [f64; 2]) -> Result<(u32, [f64; 2])> {
        let id = self.select(dir)?;
        for (k, &i) in self.lower.map.iter() {
            if i == id {
                return Ok((id, k.0));
            }
        }
        for (k, &i) in self.upper.map.iter() {
            if i == id {
                return Ok((id, [-k.0[0], -k.0[1]]));
            }
        }
        unreachable!("selected vertex must be on a chain");
    }

    /// Interior angle at every hull vertex, aligned with [`Self::vertices_ccw`].
    ///
    /// For a two-vertex (segment) hull both angles are 0, which makes the
    /// hull attachment law `(π − angle)/(2π)` come out to 1/2 per endpoint.
    /// A single-point hull has no angles (the point takes all the mass).
    pub fn interior_angles(&self) -> Vec<f64> {
        let v = self.vertices_ccw();
        let m = v.len();
        if m < 2 {
            return vec![];
        }
        (0..m)
            .map(|i| {
                let prev = v[(i + m - 1) % m].0;
                let here = v[i].0;
                let next = v[(i + 1) % m].0;
                let u1 = [prev[0] - here[0], prev[1] - here[1]];
                let u2 = [next[0] - here[0], next[1] - here[1]];
                let n1 = (u1[0] * u1[0] + u1[1] * u1[1]).sqrt();
                let n2 = (u2[0] * u2[0] + u2[1] * u2[1]).sqrt();
                if n1 == 0.0 || n2 == 0.0 {
                    return 0.0;
                }
                let c = ((u1[0] * u2[0] + u1[1] * u2[1]) / (n1 * n2)).clamp(-1.0, 1.0);
                c.acos()
            })
            .collect()
    }

    /// Largest pairwise distance among inserted points. The farthest point
    /// from any query always lies on the hull, so the maximum over hull
    /// vertex pairs (rotating calipers) is the diameter of the whole set.
    pub fn diameter(&self) -> f64 {
        let v = self.vertices_ccw();
        let m = v.len();
        match m {
            0 => 0.0,
            1 => 0.0,
            2 | 3 => {
                let mut best: f64 = 0.0;
                for i in 0..m {
                    for j in i + 1..m {
                        best = best.max(crate::vec::dist(v[i].0, v[j].0));
                    }
                }
                best
            }
            _ => {
                // Rotating calipers over antipodal pairs.
                let area2 = |a: [f64; 2], b: [f64; 2], c: [f64; 2]| cross2(a, b, c).abs();
                let mut best: f64 = 0.0;
                let mut j = 1usize;
                for i in 0..m {
                    let ni = (i + 1) % m;
                    loop {
                        let nj = (j + 1) % m;
                        if area2(v[i].0, v[ni].0, v[nj].0) > area2(v[i].0, v[ni].0, v[j].0) {
                            j = nj;
                        } else {
                            break;
                        }
                    }
                    best = best.max(crate::vec::dist(v[i].0, v[j].0));
                    best = best.max(crate::vec::dist(v[ni].0, v[j].0));
                }
                best
            }
        }
    }

    /// Max distance from `p` to any hull vertex (hence to any inserted
    /// point); used for incremental diameter maintenance.
    pub fn max_distance_from(&self, p: [f64; 2]) -> f64 {
        let mut best: f64 = 0.0;
        for (k, _) in self.lower.map.iter() {
            best = best.max(crate::vec::dist(p, k.0));
        }
        for (k, _) in self.upper.map.iter() {
            best = best.max(crate::vec::dist(p, [-k.0[0], -k.0[1]]));
        }
        best
    }
}
