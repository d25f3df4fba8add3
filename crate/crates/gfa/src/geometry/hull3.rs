//! 3D convex hull vertex extraction (quickhull), used for diameters.
//!
//! [`hull_vertices_3d`] returns the indices of the hull vertices of a point
//! set. The caller only needs a *superset* of the true vertex set that
//! preserves extremes (the diameter is a max over hull vertex pairs), so the
//! implementation is deliberately conservative: points are discarded only
//! when they lie clearly inside, and any degeneracy (collinear or coplanar
//! input, numerically open horizon) falls back to returning every index,
//! which is always correct and merely slower for the caller's O(h²) scan.

use crate::vec::{dist2, Point};

type P3 = Point<3>;

#[inline]
fn sub3(a: P3, b: P3) -> P3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
fn cross3(a: P3, b: P3) -> P3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
fn dot3(a: P3, b: P3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[derive(Debug, Clone)]
struct Face {
    v: [u32; 3],
    /// Outward unit normal and plane offset: above means dot(n, p) - d0 > 0.
    n: P3,
    d0: f64,
    outside: Vec<u32>,
    alive: bool,
}

fn make_face(points: &[P3], v: [u32; 3], interior: P3) -> Option<Face> {
    let (a, b, c) = (
        points[v[0] as usize],
        points[v[1] as usize],
        points[v[2] as usize],
    );
    let mut n = cross3(sub3(b, a), sub3(c, a));
    let len = dot3(n, n).sqrt();
    if len == 0.0 {
        return None;
    }
    n = [n[0] / len, n[1] / len, n[2] / len];
    let mut v = v;
    let mut d0 = dot3(n, a);
    if dot3(n, interior) - d0 > 0.0 {
        n = [-n[0], -n[1], -n[2]];
        d0 = -d0;
        v.swap(1, 2);
    }
    Some(Face {
        v,
        n,
        d0,
        outside: vec![],
        alive: true,
    })
}

/// Indices of the convex hull vertices (possibly a conservative superset;
/// all indices on degenerate input).
pub fn hull_vertices_3d(points: &[P3]) -> Vec<u32> {
    let n = points.len();
    let all = || (0..n as u32).collect::<Vec<u32>>();
    if n <= 4 {
        return all();
    }

    // Scale-aware epsilon from the bounding box.
    let mut lo = points[0];
    let mut hi = points[0];
    for p in points {
        for k in 0..3 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let extent = (0..3).map(|k| hi[k] - lo[k]).fold(0.0f64, f64::max);
    if extent == 0.0 {
        return all();
    }
    let eps = 1e-9 * extent;

    // Initial simplex: farthest pair among the 6 axis extremes, then the
    // point farthest from their line, then farthest from that plane.
    let mut extremes = vec![];
    for k in 0..3 {
        let mut imin = 0;
        let mut imax = 0;
        for (i, p) in points.iter().enumerate() {
            if p[k] < points[imin][k] {
                imin = i;
            }
            if p[k] > points[imax][k] {
                imax = i;
            }
        }
        extremes.push(imin as u32);
        extremes.push(imax as u32);
    }
    let (mut ia, mut ib, mut best) = (extremes[0], extremes[1], -1.0);
    for (i, &a) in extremes.iter().enumerate() {
        for &b in extremes.iter().skip(i + 1) {
            let d = dist2(points[a as usize], points[b as usize]);
            if d > best {
                best = d;
                ia = a;
                ib = b;
            }
        }
    }
    if best.sqrt() < eps {
        return all();
    }
    let (pa, pb) = (points[ia as usize], points[ib as usize]);
    let ab = sub3(pb, pa);
    let ab_len = dot3(ab, ab).sqrt();
    let mut ic = u32::MAX;
    let mut best = eps * ab_len;
    for (i, p) in points.iter().enumerate() {
        let c = cross3(ab, sub3(*p, pa));
        let area = dot3(c, c).sqrt();
        if area > best {
            best = area;
            ic = i as u32;
        }
    }
    if ic == u32::MAX {
        return all(); // collinear
    }
    let pc = points[ic as usize];
    let nrm = cross3(ab, sub3(pc, pa));
    let nrm_len = dot3(nrm, nrm).sqrt();
    let mut id = u32::MAX;
    let mut best = eps * nrm_len;
    for (i, p) in points.iter().enumerate() {
        let h = dot3(nrm, sub3(*p, pa)).abs();
        if h > best {
            best = h;
            id = i as u32;
        }
    }
    if id == u32::MAX {
        return all(); // coplanar
    }
    let pd = points[id as usize];
    let interior = [
        (pa[0] + pb[0] + pc[0] + pd[0]) / 4.0,
        (pa[1] + pb[1] + pc[1] + pd[1]) / 4.0,
        (pa[2] + pb[2] + pc[2] + pd[2]) / 4.0,
    ];

    let mut faces: Vec<Face> = vec![];
    for v in [[ia, ib, ic], [ia, ib, id], [ia, ic, id], [ib, ic, id]] {
        match make_face(points, v, interior) {
            Some(f) => faces.push(f),
            None => return all(),
        }
    }
    let simplex = [ia, ib, ic, id];
    for i in 0..n as u32 {
        if simplex.contains(&i) {
            continue;
        }
        for f in faces.iter_mut() {
            if dot3(f.n, points[i as usize]) - f.d0 > eps {
                f.outside.push(i);
                break;
            }
        }
    }

    let mut guard = 0usize;
    loop {
        guard += 1;
        if guard > 4 * n + 16 {
            return all();
        }
        let Some(fi) = faces.iter().position(|f| f.alive && !f.outside.is_empty()) else {
            break;
        };
        // Farthest outside point of that face becomes a new vertex.
        let apex = *faces[fi]
            .outside
            .iter()
            .max_by(|&&a, &&b| {
                let da = dot3(faces[fi].n, points[a as usize]);
                let db = dot3(faces[fi].n, points[b as usize]);
                da.total_cmp(&db).then(b.cmp(&a))
            })
            .unwrap();
        let papex = points[apex as usize];

        // Visible faces and the horizon between them and the rest.
        let mut orphans: Vec<u32> = vec![];
        // Ordered map: horizon iteration order must be deterministic so hull
        // construction (and eps-marginal vertex keeps) reproduces exactly.
        let mut edge_count: std::collections::BTreeMap<(u32, u32), (u32, u32)> =
            std::collections::BTreeMap::new();
        let mut any_visible = false;
        for f in faces.iter_mut() {
            if !f.alive {
                continue;
            }
            if dot3(f.n, papex) - f.d0 > eps {
                any_visible = true;
                f.alive = false;
                orphans.append(&mut f.outside);
                for e in [(f.v[0], f.v[1]), (f.v[1], f.v[2]), (f.v[2], f.v[0])] {
                    let key = (e.0.min(e.1), e.0.max(e.1));
                    let entry = edge_count.entry(key).or_insert((0, 0));
                    entry.0 += 1;
                    // Remember the directed orientation from the visible side.
                    entry.1 = e.0;
                }
            }
        }
        if !any_visible {
            // The apex was recorded above its own face but no face sees it
            // now: numerically marginal; treat it as on-hull and keep going.
            let f = &mut faces[fi];
            f.outside.retain(|&i| i != apex);
            continue;
        }
        let mut new_faces: Vec<Face> = vec![];
        let mut ok = true;
        for (&(a, b), &(count, first)) in edge_count.iter() {
            if count == 1 {
                // Horizon edge: span it to the apex, oriented so the old
                // interior stays inside.
                let (ea, eb) = if first == a { (a, b) } else { (b, a) };
                match make_face(points, [ea, eb, apex], interior) {
                    Some(f) => new_faces.push(f),
                    None => {
                        ok = false;
                        break;
                    }
                }
            } else if count > 2 {
                ok = false;
                break;
            }
        }
        if !ok || new_faces.is_empty() {
            return all();
        }
        orphans.retain(|&i| i != apex);
        'orphan: for i in orphans {
            let p = points[i as usize];
            for f in new_faces.iter_mut() {
                if dot3(f.n, p) - f.d0 > eps {
                    f.outside.push(i);
                    continue 'orphan;
                }
            }
        }
        faces.retain(|f| f.alive);
        faces.append(&mut new_faces);
    }

    let mut verts: Vec<u32> = faces
        .iter()
        .filter(|f| f.alive)
        .flat_map(|f| f.v)
        .collect();
    verts.sort_unstable();
    verts.dedup();
    verts
}

/// Diameter of a 3D point set: pairwise scan over its hull vertices.
pub fn diameter_3d(points: &[P3]) -> f64 {
    let verts = hull_vertices_3d(points);
    let mut best = 0.0f64;
    for (i, &a) in verts.iter().enumerate() {
        for &b in verts.iter().skip(i + 1) {
            best = best.max(dist2(points[a as usize], points[b as usize]));
        }
    }
    best.sqrt()
}
