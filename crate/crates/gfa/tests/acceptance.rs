//! Acceptance suite: one test per shipped guarantee, each ending in a single
//! `PASS <id> ...` line carrying the measured value and its pinned tolerance.
//! Run it serially to keep those lines ordered:
//!
//! ```text
//! cargo test -p gfa --test acceptance -- --test-threads=1 --nocapture
//! ```
//!
//! Every statistical check pins its seed, so each run sees identical draws
//! and the suite is stable; tolerance bands are sized from the binomial
//! noise at the pinned sample counts. The whole suite takes roughly
//! twenty minutes on one core — the slow tests say so in a comment.

use std::time::Instant;

use gfa::analysis::{
    arc_structure, beurling_scan, growth_exponent, hit_probabilities, radius_convergence,
    ClusterFamily,
};
use gfa::flow::{FlowConfig, FlowEngine, FlowOutcome};
use gfa::geometry::{Cluster, Tolerances};
use gfa::growth::{grow, GrowthConfig, GrowthTrace};
use gfa::potential::{energy, gradient, laplacian};
use gfa::vec::{add_scaled, dir2, dist, norm, scale, unit, Point};
use gfa::PotentialKind;

// ---------------------------------------------------------------------------
// helpers

/// Splitmix64: test-local randomness, independent of the library's RNG.
struct Sm(u64);

impl Sm {
    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    fn f(&mut self) -> f64 {
        (self.next() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.f()
    }
}

/// Random particle set plus an evaluation point at least `clear` away from
/// every particle and with a gradient norm above the stall scale.
fn sample_config<const D: usize>(
    rng: &mut Sm,
    kind: PotentialKind,
    clear: f64,
) -> (Vec<Point<D>>, Point<D>) {
    loop {
        let n = 1 + (rng.next() % 30) as usize;
        let pts: Vec<Point<D>> =
            (0..n).map(|_| std::array::from_fn(|_| rng.range(-8.0, 8.0))).collect();
        for _ in 0..64 {
            let x: Point<D> = std::array::from_fn(|_| rng.range(-12.0, 12.0));
            let dmin = pts.iter().map(|p| dist(*p, x)).fold(f64::INFINITY, f64::min);
            if dmin < clear {
                continue;
            }
            let g = gradient(&pts, x, kind).unwrap();
            if norm(g) >= 1e-7 {
                return (pts, x);
            }
        }
    }
}

/// Relative error of the analytic gradient against central differences.
fn grad_fd_rel<const D: usize>(pts: &[Point<D>], x: Point<D>, kind: PotentialKind) -> f64 {
    let h = 1e-5;
    let g = gradient(pts, x, kind).unwrap();
    let mut fd = [0.0; D];
    for i in 0..D {
        let mut xp = x;
        xp[i] += h;
        let mut xm = x;
        xm[i] -= h;
        fd[i] = (energy(pts, xp, kind).unwrap() - energy(pts, xm, kind).unwrap()) / (2.0 * h);
    }
    dist(fd, g) / norm(g)
}

/// Second-order central-difference Laplacian.
fn lap_fd<const D: usize>(pts: &[Point<D>], x: Point<D>, kind: PotentialKind) -> f64 {
    let h = 1e-3;
    let e0 = energy(pts, x, kind).unwrap();
    let mut acc = 0.0;
    for i in 0..D {
        let mut xp = x;
        xp[i] += h;
        let mut xm = x;
        xm[i] -= h;
        let ep = energy(pts, xp, kind).unwrap();
        let em = energy(pts, xm, kind).unwrap();
        acc += (ep - 2.0 * e0 + em) / (h * h);
    }
    acc
}

/// Fixed-step midpoint integrator used as the reference in c02: the same
/// normalized-gradient ODE, stepped at a constant h with the final partial
/// step bisected onto the contact shell. Returns the touched particle and
/// the contact position, or None on a stall.
fn reference_attach(
    pts: &[Point<2>],
    kind: PotentialKind,
    start: Point<2>,
    h: f64,
) -> Option<(u32, Point<2>)> {
    let step_of = |x: Point<2>, t: f64| -> Option<Point<2>> {
        let u1 = unit(gradient(pts, x, kind).ok()?)?;
        let mid = add_scaled(x, 0.5 * t, u1);
        let u2 = unit(gradient(pts, mid, kind).ok()?)?;
        Some(add_scaled(x, t, u2))
    };
    let nn = |x: Point<2>| -> (usize, f64) {
        let mut best = (0usize, f64::INFINITY);
        for (i, p) in pts.iter().enumerate() {
            let d = dist(*p, x);
            if d < best.1 {
                best = (i, d);
            }
        }
        best
    };
    let mut x = start;
    let mut budget: u64 = ((norm(start) / h) as u64) * 6 + 1_000_000;
    loop {
        if budget == 0 {
            return None;
        }
        let (i0, d0) = nn(x);
        if (1.0..=1.0 + 1e-9).contains(&d0) {
            return Some((i0 as u32, x));
        }
        let slack = d0 - 1.0 - 3.0 * h;
        if slack > h {
            // Each step moves exactly h, so the shell cannot be reached
            // inside this chunk; skip the per-step contact scans.
            let chunk = (slack / h) as u64;
            for _ in 0..chunk {
                x = step_of(x, h)?;
            }
            budget = budget.saturating_sub(chunk);
        } else {
            let prev = x;
            x = step_of(x, h)?;
            budget -= 1;
            if nn(x).1 < 1.0 {
                // Crossed the shell inside this step: bisect the step length
                // until the landing point sits on the contact shell.
                let (mut lo, mut hi) = (0.0f64, h);
                for _ in 0..60 {
                    let tm = 0.5 * (lo + hi);
                    if nn(step_of(prev, tm)?).1 < 1.0 {
                        hi = tm;
                    } else {
                        lo = tm;
                    }
                }
                let xf = step_of(prev, lo)?;
                return Some((nn(xf).0 as u32, xf));
            }
        }
    }
}

fn grown2(kind: PotentialKind, n: usize, seed: u64) -> (Cluster<2>, GrowthTrace) {
    grow::<2>(&GrowthConfig::new(kind, n, seed)).expect("growth failed")
}

fn pass(id: &str, msg: String) {
    println!("PASS {id}: {msg}");
}

// ---------------------------------------------------------------------------
// criteria

/// c01 — analytic fields: gradient matches central finite differences to
/// rel. 1e-6 at step 1e-5, the 2D Log field is harmonic to 1e-9, and the 2D
/// Power(a) Laplacian equals a^2 * sum r^(-a-2) to rel. 1e-9, over at least
/// 100 random configurations (mixed kinds and dimensions).
#[test]
fn c01_field_gradient_and_laplacian_identities() {
    const GRAD_TOL: f64 = 1e-6;
    const LAP_TOL: f64 = 1e-9;
    let mut rng = Sm(0x5eed_0001);
    let mut checked = 0usize;
    let mut worst_grad = 0.0f64;
    let mut worst_lap = 0.0f64;

    let alphas = [0.4, 0.7, 1.0, 1.6, 2.3, 3.1];
    let kinds2: Vec<(PotentialKind, usize)> = std::iter::once((PotentialKind::Log, 30))
        .chain(alphas.iter().map(|&a| (PotentialKind::Power(a), 10)))
        .collect();
    for (kind, reps) in kinds2 {
        for _ in 0..reps {
            let (pts, x) = sample_config::<2>(&mut rng, kind, 1.2);
            let rel = grad_fd_rel(&pts, x, kind);
            assert!(rel < GRAD_TOL, "2D {kind:?} gradient FD rel err {rel:.2e}");
            worst_grad = worst_grad.max(rel);
            let lap = laplacian(&pts, x, kind).unwrap();
            match kind {
                PotentialKind::Log => {
                    assert!(lap.abs() < LAP_TOL, "2D Log laplacian {lap:.2e} not harmonic");
                    worst_lap = worst_lap.max(lap.abs());
                }
                PotentialKind::Power(a) => {
                    let want: f64 =
                        a * a * pts.iter().map(|p| dist(*p, x).powf(-a - 2.0)).sum::<f64>();
                    let rel = (lap - want).abs() / want.abs();
                    assert!(rel < LAP_TOL, "2D Power({a}) laplacian rel err {rel:.2e}");
                    worst_lap = worst_lap.max(rel);
                }
                PotentialKind::NearestMax => unreachable!(),
            }
            checked += 1;
        }
    }

    // 3D: gradient FD plus the matching Laplacian identities
    // (Power(1) harmonic in 3D; Log has Laplacian -sum r^(-2) in 3D).
    for (kind, reps) in [(PotentialKind::Power(1.0), 15), (PotentialKind::Log, 15)] {
        for _ in 0..reps {
            let (pts, x) = sample_config::<3>(&mut rng, kind, 1.2);
            let rel = grad_fd_rel(&pts, x, kind);
            assert!(rel < GRAD_TOL, "3D {kind:?} gradient FD rel err {rel:.2e}");
            worst_grad = worst_grad.max(rel);
            let lap = laplacian(&pts, x, kind).unwrap();
            match kind {
                PotentialKind::Power(_) => {
                    assert!(lap.abs() < LAP_TOL, "3D Power(1) laplacian {lap:.2e}")
                }
                PotentialKind::Log => {
                    // Laplacian of -log r is -(d-2)/r^2, so -1/r^2 in 3D.
                    let want: f64 = -pts.iter().map(|p| 1.0 / dist2_of(*p, x)).sum::<f64>();
                    let rel = (lap - want).abs() / want.abs();
                    assert!(rel < LAP_TOL, "3D Log laplacian rel err {rel:.2e}");
                }
                PotentialKind::NearestMax => unreachable!(),
            }
            checked += 1;
        }
    }

    // Finite-difference cross-check of the Laplacian itself, away from the
    // particles where the higher derivatives are tame.
    let mut worst_fd_lap = 0.0f64;
    for i in 0..10 {
        let kind = PotentialKind::Power(alphas[i % alphas.len()]);
        let (pts, x) = sample_config::<2>(&mut rng, kind, 2.0);
        let lap = laplacian(&pts, x, kind).unwrap();
        let rel = (lap_fd(&pts, x, kind) - lap).abs() / lap.abs();
        assert!(rel < 1e-4, "{kind:?} FD laplacian rel err {rel:.2e}");
        worst_fd_lap = worst_fd_lap.max(rel);
    }

    assert!(checked >= 100, "only {checked} configurations checked");
    pass(
        "c01",
        format!(
            "{checked} configs: worst grad FD rel {worst_grad:.2e} (tol 1e-6), \
             worst laplacian identity err {worst_lap:.2e} (tol 1e-9), \
             worst FD laplacian rel {worst_fd_lap:.2e} (tol 1e-4)"
        ),
    );
}

fn dist2_of<const D: usize>(a: Point<D>, b: Point<D>) -> f64 {
    let d = dist(a, b);
    d * d
}

/// c02 — integrator oracle: the adaptive integrator agrees with a fixed-step
/// h=1e-5 midpoint reference on 10 small clusters x 256 angles — parents
/// match on >= 99% of launches and positions differ by < 1e-4 where they
/// match. Slow: ~20 minutes, dominated by the reference integrator.
#[test]
fn c02_adaptive_integrator_matches_fixed_step_reference() {
    const REF_H: f64 = 1e-5;
    const POS_TOL: f64 = 1e-4;
    // K = 1 keeps the reference affordable; both integrators start from the
    // same point, so the comparison is radius-independent. h_max and dir_tol
    // are the integrator's accuracy knobs: at this setting the worst position
    // error sits near 3e-5 (the growth defaults trade that for speed at
    // ~2e-4, far below the unit contact scale; the statistical criteria
    // validate the defaults at the distribution level).
    let flow = FlowConfig {
        start_radius_factor: 1.0,
        h_max: 0.05,
        dir_tol: 0.005,
        ..FlowConfig::default()
    };
    let clusters: [(PotentialKind, usize, u64); 10] = [
        (PotentialKind::Log, 4, 101),
        (PotentialKind::Log, 5, 102),
        (PotentialKind::Log, 6, 103),
        (PotentialKind::Log, 6, 104),
        (PotentialKind::Log, 7, 105),
        (PotentialKind::Log, 8, 106),
        (PotentialKind::Log, 8, 107),
        (PotentialKind::Power(1.0), 5, 108),
        (PotentialKind::Power(1.0), 6, 109),
        (PotentialKind::Power(1.5), 5, 110),
    ];
    let angles = 256usize;
    let (mut compared, mut agree, mut skipped) = (0u64, 0u64, 0u64);
    let mut max_err = 0.0f64;
    let t0 = Instant::now();
    for (kind, n, seed) in clusters {
        let (c, _) = grown2(kind, n, seed);
        let engine = FlowEngine::new(&c, kind, flow.clone()).unwrap();
        let r0 = flow.start_radius_factor * (c.len() as f64).max(c.radius_max() + 10.0);
        for j in 0..angles {
            // Offset dodges symmetry-axis ties on the smallest clusters.
            let theta = (j as f64 + 0.37) * std::f64::consts::TAU / angles as f64;
            let dir = dir2(theta);
            let FlowOutcome::Attached { parent, position, .. } = engine.launch(dir).unwrap()
            else {
                skipped += 1;
                continue;
            };
            let Some((ref_parent, ref_pos)) =
                reference_attach(c.positions(), kind, scale(dir, r0), REF_H)
            else {
                skipped += 1;
                continue;
            };
            compared += 1;
            if ref_parent == parent {
                agree += 1;
                max_err = max_err.max(dist(position, ref_pos));
            }
        }
    }
    let total = (clusters.len() * angles) as u64;
    let agreement = agree as f64 / compared as f64;
    assert!(skipped <= total / 100, "{skipped} launches stalled out of {total}");
    assert!(agreement >= 0.99, "parent agreement {agreement:.4} below 0.99");
    assert!(max_err < POS_TOL, "attachment position error {max_err:.2e} exceeds {POS_TOL:.0e}");
    pass(
        "c02",
        format!(
            "{agree}/{compared} parents agree ({agreement:.4}, floor 0.99), \
             max position err {max_err:.2e} (tol 1e-4), {skipped} skipped, {:.0?}",
            t0.elapsed()
        ),
    );
}

/// c03 — nearest-particle attachment law: for the max potential only convex
/// hull vertices can be hit, with probability (pi - interior angle)/(2pi).
/// Checked on a unit square (each corner 1/4) and on a grown cluster, within
/// 3 sigma at 1e6 samples; non-hull particles must receive exactly 0 hits.
#[test]
fn c03_nearest_max_hull_attachment_law() {
    const SAMPLES: u64 = 1_000_000;
    let flow = FlowConfig::default();
    let nf = SAMPLES as f64;

    // Square: all four corners are hull vertices with right angles.
    let square = Cluster::<2>::from_parts(
        vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
        vec![None, Some(0), Some(1), Some(2)],
    )
    .unwrap();
    let stats =
        hit_probabilities(&square, PotentialKind::NearestMax, SAMPLES, 33, &flow, 1).unwrap();
    assert_eq!(stats.stall_count, 0);
    assert_eq!(stats.failure_count, 0);
    let sigma = (0.25f64 * 0.75 / nf).sqrt();
    let mut worst_sq = 0.0f64;
    for p in &stats.per_particle {
        let dev = (p.p_hat - 0.25).abs();
        assert!(dev <= 3.0 * sigma, "corner {} p_hat {:.5} off 0.25 by {dev:.2e}", p.id, p.p_hat);
        worst_sq = worst_sq.max(dev / sigma);
    }

    // Grown cluster: prediction per hull vertex from its interior angle.
    let (c, _) = grown2(PotentialKind::NearestMax, 60, 42);
    let hull = c.hull().expect("2D cluster keeps a hull");
    let verts = hull.vertices_ccw();
    let angles = hull.interior_angles();
    assert!(verts.len() < c.len(), "no interior particles to check");
    let mut pred = vec![0.0f64; c.len()];
    for (v, a) in verts.iter().zip(&angles) {
        pred[v.1 as usize] = (std::f64::consts::PI - a) / std::f64::consts::TAU;
    }
    let total_pred: f64 = pred.iter().sum();
    assert!((total_pred - 1.0).abs() < 1e-9, "hull law masses sum to {total_pred}");

    let stats = hit_probabilities(&c, PotentialKind::NearestMax, SAMPLES, 34, &flow, 1).unwrap();
    assert_eq!(stats.stall_count, 0);
    assert_eq!(stats.failure_count, 0);
    let mut worst_hull = 0.0f64;
    let mut interior = 0usize;
    for p in &stats.per_particle {
        let want = pred[p.id as usize];
        if want == 0.0 {
            assert_eq!(p.hits, 0, "non-hull particle {} was hit {} times", p.id, p.hits);
            interior += 1;
        } else {
            // 3 sigma plus a 10-count allowance so near-flat hull vertices
            // (tiny expected counts, Poisson not normal) are judged fairly.
            let slack = 3.0 * (want * (1.0 - want) / nf).sqrt() + 10.0 / nf;
            let dev = (p.p_hat - want).abs();
            assert!(
                dev <= slack,
                "hull particle {} p_hat {:.5} vs law {:.5} (dev {dev:.2e})",
                p.id,
                p.p_hat,
                want
            );
            worst_hull = worst_hull.max(dev / slack);
        }
    }
    pass(
        "c03",
        format!(
            "square corners within {worst_sq:.2} sigma of 1/4; grown cluster: \
             {} hull vertices within 3 sigma of (pi-angle)/2pi (worst at {:.2} of band), \
             {interior} interior particles all at 0 hits; 1e6 samples each",
            verts.len(),
            worst_hull
        ),
    );
}

/// c04 — hit-distribution consistency on a fixed 20-particle cluster at 1e5
/// samples: counts conserve exactly, the stall fraction stays below 1e-3,
/// and the total-variation drift between start radii R and 2R decreases in R
/// and respects the 10n/R envelope. ~3 minutes.
#[test]
fn c04_hit_distribution_conservation_and_radius_convergence() {
    const SAMPLES: u64 = 100_000;
    let (c, _) = grown2(PotentialKind::Log, 20, 777);
    let n = c.len() as f64;
    // h_max 0.5 stays within the step-cap invariant and halves the scan cost.
    let flow = FlowConfig { h_max: 0.5, ..FlowConfig::default() };

    let stats = hit_probabilities(&c, PotentialKind::Log, SAMPLES, 4242, &flow, 1).unwrap();
    let hits: u64 = stats.per_particle.iter().map(|p| p.hits).sum();
    assert_eq!(hits + stats.stall_count + stats.failure_count, SAMPLES, "count conservation");
    assert_eq!(stats.failure_count, 0);
    let stall_frac = stats.stall_count as f64 / SAMPLES as f64;
    assert!(stall_frac < 1e-3, "stall fraction {stall_frac:.2e}");
    let total_p = stats.attached_fraction();
    assert!(total_p >= 1.0 - 1e-3, "probabilities sum to {total_p}");

    let radii = [200.0, 400.0, 800.0];
    let rep = radius_convergence(&c, PotentialKind::Log, SAMPLES, &radii, 4243, &flow, 1).unwrap();
    let (r01, r12) = (&rep.rows[0], &rep.rows[1]);
    for row in [r01, r12] {
        let envelope = 10.0 * n / row.r_lo;
        assert!(row.tv <= envelope, "TV({}->{}) = {:.4} > {envelope}", row.r_lo, row.r_hi, row.tv);
    }
    // Monotone decrease, with a 2-standard-error noise allowance per row.
    let allowance = 2.0 * (r01.tv_se + r12.tv_se);
    assert!(
        r12.tv <= r01.tv + allowance,
        "TV not decreasing: {:.4} then {:.4} (allowance {allowance:.4})",
        r01.tv,
        r12.tv
    );
    pass(
        "c04",
        format!(
            "sum p = {total_p:.6} (stall frac {stall_frac:.1e}, tol 1e-3); \
             TV(200->400) = {:.4}, TV(400->800) = {:.4} (envelopes 1.0/0.5, decreasing)",
            r01.tv, r12.tv
        ),
    );
}

/// c05 — attachment-arc bound: on an angular grid of 7200 launches no
/// particle owns more than 6 maximal arcs, across 21 grown clusters (n=50,
/// 7 seeds for each of alpha = 0, 0.5, 1). ~10 minutes.
#[test]
fn c05_attachment_arc_bound() {
    const GRID: usize = 7200;
    const ARC_LIMIT: u32 = 6;
    let scan_flow = FlowConfig { h_max: 0.5, ..FlowConfig::default() };
    let kinds =
        [PotentialKind::Log, PotentialKind::Power(0.5), PotentialKind::Power(1.0)];
    let mut clusters = 0usize;
    let mut global_max = 0u32;
    let mut dropped = 0u64;
    let t0 = Instant::now();
    for kind in kinds {
        for seed in 31..38 {
            let (c, _) = grown2(kind, 50, seed);
            let rep = arc_structure(&c, kind, GRID, &scan_flow, 1).unwrap();
            let worst = rep.max_arcs();
            assert!(
                worst <= ARC_LIMIT,
                "{kind:?} seed {seed}: particle with {worst} arcs (limit {ARC_LIMIT})"
            );
            let lost = rep.stalled_angles + rep.failed_angles;
            assert!(lost <= 36, "{kind:?} seed {seed}: {lost} angles lost of {GRID}");
            dropped += lost;
            global_max = global_max.max(worst);
            clusters += 1;
        }
    }
    pass(
        "c05",
        format!(
            "{clusters} clusters x {GRID} angles: max arcs per particle {global_max} \
             (limit {ARC_LIMIT}), {dropped} angles stalled in total, {:.0?}",
            t0.elapsed()
        ),
    );
}

/// c06 — max-hit-probability scaling at alpha = 0: on grown clusters the
/// largest single-particle attachment probability follows an inverse-root
/// law — sqrt(n) * p_max stays inside [0.3, 0.7] at n = 100 and n = 400
/// (three growth seeds averaged per size, 4e5 samples each) and the 400:100
/// ratio of those averages lands at 0.5 +- 0.15. Line clusters are scanned
/// alongside and reported, not asserted: their peak decays like ~1/n
/// (attachment spreads near-uniformly over the ~n exposed particles),
/// strictly faster than the inverse-root law of the compact family.
/// ~5 minutes.
#[test]
fn c06_grown_max_hit_probability_scaling() {
    const SAMPLES: u64 = 400_000;
    // K = 1 launches from max(n, rho+10); the grown family is insensitive to
    // the launch radius (K = 1 vs K = 10 moves p_max by about 1%), and c04
    // pins radius convergence directly.
    let flow =
        FlowConfig { start_radius_factor: 1.0, h_max: 0.5, ..FlowConfig::default() };
    let t0 = Instant::now();
    let sizes = [100usize, 400];
    let mut means = [0.0f64; 2];
    for (k, &n) in sizes.iter().enumerate() {
        let mut acc = 0.0;
        for seed in [201u64, 202, 203] {
            let (c, _) = grown2(PotentialKind::Log, n, seed);
            let stats =
                hit_probabilities(&c, PotentialKind::Log, SAMPLES, 77, &flow, 1).unwrap();
            assert_eq!(stats.stall_count, 0, "stalls at n={n} seed={seed}");
            assert_eq!(stats.failure_count, 0, "failures at n={n} seed={seed}");
            acc += stats.max_particle().unwrap().p_hat;
        }
        means[k] = acc / 3.0;
        let scaled = (n as f64).sqrt() * means[k];
        assert!(
            (0.3..=0.7).contains(&scaled),
            "sqrt(n) * p_max = {scaled:.3} at n = {n} outside [0.3, 0.7]"
        );
    }
    let ratio = means[1] / means[0];
    assert!(
        (0.35..=0.65).contains(&ratio),
        "p_max(400)/p_max(100) = {ratio:.3} outside 0.5 +- 0.15"
    );

    // Line family, for the report line only.
    let line = beurling_scan(
        PotentialKind::Log,
        &[100, 400],
        ClusterFamily::Line,
        200_000,
        2024,
        &flow,
        1,
    )
    .unwrap();
    let line_exp = (line[1].max_p_hat / line[0].max_p_hat).ln() / 4.0f64.ln();
    pass(
        "c06",
        format!(
            "grown sqrt(n)*p_max = {:.3} (n=100) / {:.3} (n=400), ratio {ratio:.3} \
             within 0.5 +- 0.15; line family reported: p_max {:.4} -> {:.4}, \
             exponent {line_exp:.2} (~1/n, faster than inverse-root), {:.0?}",
            10.0 * means[0],
            20.0 * means[1],
            line[0].max_p_hat,
            line[1].max_p_hat,
            t0.elapsed()
        ),
    );
}

/// c07 — diameter growth exponent at alpha = 0: the median log-log slope
/// over n in [200, 5000] across 5 seeds lands in [0.48, 0.62] (the square
/// -root regime, allowing finite-size drift). Also reports, without
/// asserting, the exponent for alpha = 0.5, where no sharp value is
/// established. Slow: ~10 minutes of growth.
#[test]
fn c07_log_growth_exponent() {
    const WINDOW: (usize, usize) = (200, 5000);
    const BAND: (f64, f64) = (0.48, 0.62);
    let t0 = Instant::now();
    let traces: Vec<GrowthTrace> = (11..16)
        .map(|seed| {
            let (_, mut tr) = grown2(PotentialKind::Log, WINDOW.1, seed);
            tr.records = Vec::new(); // only the diameter curve is needed
            tr
        })
        .collect();
    let fit = growth_exponent(&traces, WINDOW.0, WINDOW.1).unwrap();
    assert!(
        (BAND.0..=BAND.1).contains(&fit.slope),
        "alpha=0 exponent {:.4} outside [{}, {}]",
        fit.slope,
        BAND.0,
        BAND.1
    );

    // Reported only: the alpha = 0.5 exponent over a shorter window.
    let half: Vec<GrowthTrace> = (11..14)
        .map(|seed| {
            let (_, mut tr) = grown2(PotentialKind::Power(0.5), 1500, seed);
            tr.records = Vec::new();
            tr
        })
        .collect();
    let half_fit = growth_exponent(&half, 200, 1500).unwrap();
    println!(
        "report (not asserted): alpha=0.5 exponent {:.4} (r^2 {:.4}) over n in [200, 1500]",
        half_fit.slope, half_fit.r_squared
    );

    pass(
        "c07",
        format!(
            "alpha=0 exponent {:.4} in [0.48, 0.62] (r^2 {:.4}, per-seed {:?}), {:.0?}",
            fit.slope,
            fit.r_squared,
            fit.per_seed_slopes.iter().map(|s| (s * 1e3).round() / 1e3).collect::<Vec<_>>(),
            t0.elapsed()
        ),
    );
}

/// c08 — ballistic tendency of the nearest-particle potential: the fitted
/// diameter exponent over n in [1e4, 1e6] across 5 seeds is at least 0.8.
/// This reproduces a numerical observation, not a proved theorem.
#[test]
fn c08_nearest_max_ballistic_exponent() {
    const WINDOW: (usize, usize) = (10_000, 1_000_000);
    let t0 = Instant::now();
    let mut final_diams = Vec::new();
    let traces: Vec<GrowthTrace> = (21..26)
        .map(|seed| {
            let (c, mut tr) = grown2(PotentialKind::NearestMax, WINDOW.1, seed);
            final_diams.push((c.diameter() * 10.0).round() / 10.0);
            tr.records = Vec::new();
            tr
        })
        .collect();
    let fit = growth_exponent(&traces, WINDOW.0, WINDOW.1).unwrap();
    assert!(fit.slope >= 0.8, "nearest-max exponent {:.4} below 0.8", fit.slope);
    pass(
        "c08",
        format!(
            "exponent {:.4} >= 0.8 (r^2 {:.4}); diameters at n=1e6: {final_diams:?}, {:.0?}",
            fit.slope,
            fit.r_squared,
            t0.elapsed()
        ),
    );
}

/// c09 — 3D harmonic case (alpha = 1): the analytic Laplacian vanishes to
/// 1e-9 on 100 random configurations (finite-difference cross-checked), and
/// the fitted diameter exponent over n in [200, 3000] across 5 seeds stays
/// at most 0.85; the value itself is reported. ~5 minutes.
#[test]
fn c09_three_d_harmonicity_and_growth_bound() {
    let kind = PotentialKind::Power(1.0);
    let mut rng = Sm(0x5eed_0009);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let (pts, x) = sample_config::<3>(&mut rng, kind, 1.2);
        let lap = laplacian(&pts, x, kind).unwrap();
        assert!(lap.abs() <= 1e-9, "3D alpha=1 laplacian {lap:.2e}");
        worst = worst.max(lap.abs());
    }
    let mut worst_fd = 0.0f64;
    for _ in 0..10 {
        let (pts, x) = sample_config::<3>(&mut rng, kind, 2.0);
        let fd = lap_fd(&pts, x, kind).abs();
        assert!(fd <= 1e-5, "3D alpha=1 FD laplacian {fd:.2e}");
        worst_fd = worst_fd.max(fd);
    }

    const WINDOW: (usize, usize) = (200, 3000);
    let t0 = Instant::now();
    let traces: Vec<GrowthTrace> = (41..46)
        .map(|seed| {
            let (_, mut tr) =
                grow::<3>(&GrowthConfig::new(kind, WINDOW.1, seed)).expect("3D growth");
            tr.records = Vec::new();
            tr
        })
        .collect();
    let fit = growth_exponent(&traces, WINDOW.0, WINDOW.1).unwrap();
    assert!(fit.slope <= 0.85, "3D alpha=1 exponent {:.4} above 0.85", fit.slope);
    pass(
        "c09",
        format!(
            "laplacian zero to {worst:.1e} on 100 configs (FD cross-check {worst_fd:.1e}); \
             3D exponent {:.4} <= 0.85 (r^2 {:.4}), {:.0?}",
            fit.slope,
            fit.r_squared,
            t0.elapsed()
        ),
    );
}

/// c10 — structural invariants on grown clusters of every supported kind and
/// dimension: pairwise 1-separation, parent contact at distance 1 +- 1e-9,
/// acyclic parent links, and contact degree at most 6 (2D) / 12 (3D). The
/// checks here recompute everything directly; the library's own verifier
/// must agree that there is nothing to report.
#[test]
fn c10_structural_invariants() {
    const CONTACT: f64 = 1e-9;
    let runs: Vec<(u32, PotentialKind, usize, u64)> = vec![
        (2, PotentialKind::Log, 300, 1),
        (2, PotentialKind::Power(0.5), 300, 2),
        (2, PotentialKind::Power(1.0), 300, 3),
        (2, PotentialKind::Power(2.0), 200, 4),
        (2, PotentialKind::NearestMax, 400, 5),
        (3, PotentialKind::Power(1.0), 200, 6),
        (3, PotentialKind::NearestMax, 300, 7),
    ];
    let mut particles = 0usize;
    let mut worst_parent = 0.0f64;
    let mut min_sep = f64::INFINITY;
    let mut max_degree_seen = 0usize;
    for (dim, kind, n, seed) in runs {
        match dim {
            2 => {
                let (c, _) = grown2(kind, n, seed);
                check_invariants(&c, CONTACT, 6, &mut worst_parent, &mut min_sep, &mut max_degree_seen);
                particles += c.len();
            }
            3 => {
                let (c, _) = grow::<3>(&GrowthConfig::new(kind, n, seed)).unwrap();
                check_invariants(&c, CONTACT, 12, &mut worst_parent, &mut min_sep, &mut max_degree_seen);
                particles += c.len();
            }
            _ => unreachable!(),
        }
    }
    pass(
        "c10",
        format!(
            "7 clusters / {particles} particles: max |parent dist - 1| = {worst_parent:.1e} \
             (tol 1e-9), min separation {min_sep:.9}, max contact degree {max_degree_seen}, \
             verifier silent"
        ),
    );
}

fn check_invariants<const D: usize>(
    c: &Cluster<D>,
    contact: f64,
    degree_limit: usize,
    worst_parent: &mut f64,
    min_sep: &mut f64,
    max_degree: &mut usize,
) {
    let pts = c.positions();
    let n = pts.len();
    // Direct recomputation, independent of the library's verifier.
    for i in 0..n {
        let mut degree = 0usize;
        for j in 0..n {
            if i == j {
                continue;
            }
            let d = dist(pts[i], pts[j]);
            assert!(d >= 1.0 - contact, "particles {i},{j} at distance {d}");
            if i < j {
                *min_sep = min_sep.min(d);
            }
            if d <= 1.0 + 2.0 * contact {
                degree += 1;
            }
        }
        assert!(degree <= degree_limit, "particle {i} has contact degree {degree}");
        *max_degree = (*max_degree).max(degree);
        match c.parent(i as u32) {
            None => assert_eq!(i, 0, "only the root may lack a parent"),
            Some(p) => {
                assert!((p as usize) < i, "parent {p} not older than child {i}");
                let d = (dist(pts[i], pts[p as usize]) - 1.0).abs();
                assert!(d <= contact, "child {i} sits {d:.2e} off its parent's shell");
                *worst_parent = worst_parent.max(d);
            }
        }
    }
    // Acyclicity by explicit walk (parent < child already implies it).
    for i in 0..n as u32 {
        let (mut cur, mut hops) = (i, 0usize);
        while let Some(p) = c.parent(cur) {
            cur = p;
            hops += 1;
            assert!(hops <= n, "parent chain from {i} does not terminate");
        }
        assert_eq!(cur, 0, "chain from {i} ends at {cur}, not the root");
    }
    assert!(c.verify(&Tolerances { contact }).is_empty(), "library verifier found violations");
}

/// c11 — determinism end to end: rerunning the CLI with identical seeds
/// yields byte-identical cluster CSV and trace JSON, and measurement JSON is
/// byte-identical across worker counts (flag or GFA_THREADS).
#[test]
fn c11_byte_identical_determinism() {
    let bin = env!("CARGO_BIN_EXE_gfa");
    let dir = tempfile::tempdir().unwrap();
    let path = |name: &str| dir.path().join(name).to_str().unwrap().to_string();

    let grow_args = |prefix: &str| {
        vec![
            "grow".to_string(),
            "--alpha".into(),
            "1".into(),
            "--n".into(),
            "30".into(),
            "--seed".into(),
            "7".into(),
            "--out-prefix".into(),
            path(prefix),
        ]
    };
    for prefix in ["a", "b"] {
        let st = std::process::Command::new(bin)
            .args(grow_args(prefix))
            .env_remove("GFA_THREADS")
            .status()
            .unwrap();
        assert!(st.success());
    }
    let csv = std::fs::read(path("a.csv")).unwrap();
    assert_eq!(csv, std::fs::read(path("b.csv")).unwrap(), "cluster CSV differs across reruns");
    assert!(!csv.is_empty());
    let tr = std::fs::read(path("a.trace.json")).unwrap();
    assert_eq!(
        tr,
        std::fs::read(path("b.trace.json")).unwrap(),
        "trace JSON differs across reruns"
    );

    // Same measurement under three worker configurations.
    let mut outs = Vec::new();
    for (label, workers, env_threads) in
        [("w1", Some("1"), None), ("w3", Some("3"), None), ("env2", None, Some("2"))]
    {
        let out = path(&format!("stats_{label}.json"));
        let mut cmd = std::process::Command::new(bin);
        cmd.args([
            "measure",
            "hitprob",
            "--cluster",
            &path("a.csv"),
            "--alpha",
            "1",
            "--samples",
            "4000",
            "--seed",
            "5",
            "--out",
            &out,
        ]);
        match workers {
            Some(w) => {
                cmd.args(["--workers", w]);
                cmd.env_remove("GFA_THREADS");
            }
            None => {
                cmd.env("GFA_THREADS", env_threads.unwrap());
            }
        }
        assert!(cmd.status().unwrap().success());
        outs.push(std::fs::read(out).unwrap());
    }
    assert!(!outs[0].is_empty());
    assert_eq!(outs[0], outs[1], "stats differ between --workers 1 and --workers 3");
    assert_eq!(outs[0], outs[2], "stats differ between --workers 1 and GFA_THREADS=2");

    // 3D spot check.
    for prefix in ["d3a", "d3b"] {
        let st = std::process::Command::new(bin)
            .args([
                "grow", "--alpha", "1", "--dim", "3", "--n", "25", "--seed", "9",
                "--out-prefix", &path(prefix),
            ])
            .status()
            .unwrap();
        assert!(st.success());
    }
    assert_eq!(
        std::fs::read(path("d3a.csv")).unwrap(),
        std::fs::read(path("d3b.csv")).unwrap(),
        "3D cluster CSV differs across reruns"
    );
    pass(
        "c11",
        "grow reruns byte-identical (2D and 3D); hitprob JSON byte-identical for \
         --workers 1, --workers 3, and GFA_THREADS=2"
            .to_string(),
    );
}
