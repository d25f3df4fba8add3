//! Uniform spatial hash with unit cell edge.
//!
//! Particles are bucketed by `floor` of their coordinates into cells of edge
//! exactly 1.0 — the natural scale for 1-separated clusters, where a cell
//! holds only a handful of particles. Nearest-neighbor queries expand
//! Chebyshev rings of cells outward (clamped to the occupied bounding box)
//! until no unscanned ring can beat the best distance found; a cell at ring
//! k only contains points at distance ≥ k − 1, so the scan stops as soon as
//! `(k − 1)² > best²`, scanning the boundary ring to keep smallest-index
//! tie-breaking exact.
//!
//! The grid stores particle indices only; callers pass the position slice,
//! which lives in [`super::Cluster`].

use crate::vec::{dist2, Point};
use std::collections::HashMap;
use std::hash::{BuildHasherDefault, Hasher};

/// Multiplicative hasher for the packed cell keys (the default SipHash is
/// needlessly slow for hot cell lookups).
#[derive(Default)]
pub struct CellKeyHasher {
    h: u64,
}

impl Hasher for CellKeyHasher {
    fn finish(&self) -> u64 {
        self.h
    }

    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.h = (self.h ^ b as u64).wrapping_mul(0x100_0000_01B3);
        }
    }

    fn write_u64(&mut self, k: u64) {
        self.h = crate::rng::mix64(k);
    }
}

type CellMap = HashMap<u64, Vec<u32>, BuildHasherDefault<CellKeyHasher>>;

/// Pack integer cell coordinates into one u64 key. 2D packing is exact;
/// 3D uses 21 bits per axis, which is exact for |cell| < 2^20 and otherwise
/// wraps — aliased cells merely add distance-checked candidates, never drop
/// real ones, so queries stay correct.
#[inline]
fn cell_key<const D: usize>(c: [i32; D]) -> u64 {
    if D == 2 {
        ((c[0] as u32 as u64) << 32) | c[1] as u32 as u64
    } else {
        const M: u64 = (1 << 21) - 1;
        ((c[0] as u32 as u64 & M) << 42) | ((c[1] as u32 as u64 & M) << 21) | (c[2] as u32 as u64 & M)
    }
}

#[inline]
fn cell_of<const D: usize>(x: Point<D>) -> [i32; D] {
    let mut c = [0i32; D];
    for k in 0..D {
        c[k] = x[k].floor() as i32;
    }
    c
}

#[derive(Debug, Clone)]
pub struct UniformGrid<const D: usize> {
    cells: CellMap,
    len: usize,
    cell_lo: [i32; D],
    cell_hi: [i32; D],
    pt_lo: Point<D>,
    pt_hi: Point<D>,
}

impl<const D: usize> Default for UniformGrid<D> {
    fn default() -> Self {
        Self::new()
    }
}

impl<const D: usize> UniformGrid<D> {
    pub fn new() -> Self {
        UniformGrid {
            cells: CellMap::default(),
            len: 0,
            cell_lo: [0; D],
            cell_hi: [0; D],
            pt_lo: [0.0; D],
            pt_hi: [0.0; D],
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn insert(&mut self, id: u32, p: Point<D>) {
        let c = cell_of(p);
        if self.len == 0 {
            self.cell_lo = c;
            self.cell_hi = c;
            self.pt_lo = p;
            self.pt_hi = p;
        } else {
            for k in 0..D {
                self.cell_lo[k] = self.cell_lo[k].min(c[k]);
                self.cell_hi[k] = self.cell_hi[k].max(c[k]);
                self.pt_lo[k] = self.pt_lo[k].min(p[k]);
                self.pt_hi[k] = self.pt_hi[k].max(p[k]);
            }
        }
        self.cells.entry(cell_key(c)).or_default().push(id);
        self.len += 1;
    }

    /// Euclidean distance from `x` to the occupied point bounding box
    /// (0 inside); a lower bound on the nearest-particle distance.
    pub fn bbox_distance(&self, x: Point<D>) -> f64 {
        if self.len == 0 {
            return f64::INFINITY;
        }
        let mut s = 0.0;
        for k in 0..D {
            let d = (self.pt_lo[k] - x[k]).max(x[k] - self.pt_hi[k]).max(0.0);
            s += d * d;
        }
        s.sqrt()
    }

    #[inline]
    fn scan_cell(&self, c: [i32; D], f: &mut impl FnMut(u32)) {
        if let Some(ids) = self.cells.get(&cell_key(c)) {
            for &id in ids {
                f(id);
            }
        }
    }

    /// Visit every cell of the Chebyshev ring at distance `k` around `c`,
    /// clamped to the occupied cell box.
    fn scan_ring(&self, c: [i32; D], k: i32, f: &mut impl FnMut(u32)) {
        let lo = self.cell_lo;
        let hi = self.cell_hi;
        let clamp = |axis: usize, a: i32, b: i32| -> (i32, i32) {
            ((c[axis] + a).max(lo[axis]), (c[axis] + b).min(hi[axis]))
        };
        if k == 0 {
            let mut ok = true;
            for a in 0..D {
                ok &= c[a] >= lo[a] && c[a] <= hi[a];
            }
            if ok {
                self.scan_cell(c, f);
            }
            return;
        }
        let mut cc = c;
        if D == 2 {
            let (x0, x1) = clamp(0, -k, k);
            for &dy in &[-k, k] {
                let y = c[1] + dy;
                if y >= lo[1] && y <= hi[1] {
                    cc[1] = y;
                    for x in x0..=x1 {
                        cc[0] = x;
                        self.scan_cell(cc, f);
                    }
                }
            }
            let (y0, y1) = clamp(1, -k + 1, k - 1);
            for &dx in &[-k, k] {
                let x = c[0] + dx;
                if x >= lo[0] && x <= hi[0] {
                    cc[0] = x;
                    for y in y0..=y1 {
                        cc[1] = y;
                        self.scan_cell(cc, f);
                    }
                }
            }
        } else {
            let (x0, x1) = clamp(0, -k, k);
            let (y0, y1) = clamp(1, -k, k);
            let (yi0, yi1) = clamp(1, -k + 1, k - 1);
            let (zi0, zi1) = clamp(2, -k + 1, k - 1);
            // Two full z-faces, two y-strips, two x-strips: disjoint cover.
            for &dz in &[-k, k] {
                let z = c[2] + dz;
                if z >= lo[2] && z <= hi[2] {
                    cc[2] = z;
                    for x in x0..=x1 {
                        cc[0] = x;
                        for y in y0..=y1 {
                            cc[1] = y;
                            self.scan_cell(cc, f);
                        }
                    }
                }
            }
            for &dy in &[-k, k] {
                let y = c[1] + dy;
                if y >= lo[1] && y <= hi[1] {
                    cc[1] = y;
                    for x in x0..=x1 {
                        cc[0] = x;
                        for z in zi0..=zi1 {
                            cc[2] = z;
                            self.scan_cell(cc, f);
                        }
                    }
                }
            }
            for &dx in &[-k, k] {
                let x = c[0] + dx;
                if x >= lo[0] && x <= hi[0] {
                    cc[0] = x;
                    for y in yi0..=yi1 {
                        cc[1] = y;
                        for z in zi0..=zi1 {
                            cc[2] = z;
                            self.scan_cell(cc, f);
                        }
                    }
                }
            }
        }
    }

    /// Exact nearest particle: `(index, distance)`, smallest index on exact
    /// ties. `None` when empty.
    pub fn nearest(&self, positions: &[Point<D>], x: Point<D>) -> Option<(u32, f64)> {
        if self.len == 0 {
            return None;
        }
        let c = cell_of(x);
        let mut k0 = 0i32;
        let mut k_max = 0i32;
        for a in 0..D {
            let below = self.cell_lo[a] - c[a];
            let above = c[a] - self.cell_hi[a];
            k0 = k0.max(below).max(above);
            k_max = k_max.max((c[a] - self.cell_lo[a]).abs().max((self.cell_hi[a] - c[a]).abs()));
        }
        let mut best: Option<(u32, f64)> = None;
        let mut k = k0;
        while k <= k_max {
            if let Some((_, bd2)) = best {
                let reach = (k - 1) as f64;
                if reach > 0.0 && reach * reach > bd2 {
                    break;
                }
            }
            self.scan_ring(c, k, &mut |id| {
                let d2 = dist2(positions[id as usize], x);
                match best {
                    Some((bid, bd2)) if d2 > bd2 || (d2 == bd2 && id >= bid) => {}
                    _ => best = Some((id, d2)),
                }
            });
            k += 1;
        }
        best.map(|(id, d2)| (id, d2.sqrt()))
    }

    /// Visit all particles within Euclidean distance `r` of `x` (box scan
    /// with exact distance check); yields `(index, distance²)`.
    pub fn for_each_within(
        &self,
        positions: &[Point<D>],
        x: Point<D>,
        r: f64,
        f: &mut impl FnMut(u32, f64),
    ) {
        if self.len == 0 {
            return;
        }
        let r2 = r * r;
        let mut lo = [0i32; D];
        let mut hi = [0i32; D];
        for k in 0..D {
            lo[k] = ((x[k] - r).floor() as i32).max(self.cell_lo[k]);
            hi[k] = ((x[k] + r).floor() as i32).min(self.cell_hi[k]);
            if lo[k] > hi[k] {
                return;
            }
        }
        let mut visit = |cell: [i32; D]| {
            self.scan_cell(cell, &mut |id| {
                let d2 = dist2(positions[id as usize], x);
                if d2 <= r2 {
                    f(id, d2);
                }
            });
        };
        let mut cc = lo;
        if D == 2 {
            for cx in lo[0]..=hi[0] {
                cc[0] = cx;
                for cy in lo[1]..=hi[1] {
                    cc[1] = cy;
                    visit(cc);
                }
            }
        } else {
            for cx in lo[0]..=hi[0] {
                cc[0] = cx;
                for cy in lo[1]..=hi[1] {
                    cc[1] = cy;
                    for cz in lo[2]..=hi[2] {
                        cc[2] = cz;
                        visit(cc);
                    }
                }
            }
        }
    }

    /// Smallest-index particle within the contact shell `‖x − x_i‖ ≤ 1 + tol`.
    pub fn contact(&self, positions: &[Point<D>], x: Point<D>, tol: f64) -> Option<u32> {
        let r = 1.0 + tol;
        let mut best: Option<u32> = None;
        self.for_each_within(positions, x, r, &mut |id, _| {
            best = Some(match best {
                Some(b) => b.min(id),
                None => id,
            });
        });
        best
    }
}
