//! Gradient-ascent flow of an arriving particle.
//!
//! A particle starts at distance `R = K·max(n, ρ+10)` from the origin (n =
//! cluster size, ρ = max particle distance from the origin) in a chosen
//! direction and follows the normalized gradient of the cluster potential
//! until it first touches the unit shell of a particle. The integrator is a
//! two-stage midpoint scheme on the normalized field:
//!
//! ```text
//! v1 = ∇E(x)/‖∇E(x)‖;  v2 = normalized ∇E at x + (h/2)·v1;  x' = x + h·v2
//! ```
//!
//! with the step halved until the field direction turns by less than
//! `dir_tol` across the step. The base step is `min(h_max, (d_nn − 1)/2)`,
//! half the gap to the nearest unit shell, so a step can never cross a shell
//! (no tunneling): contact is reached by geometric shrinking of the gap and
//! declared once `d_nn ≤ 1 + contact_tol`.
//!
//! Near interior saddle points the gradient vanishes and the flow has no
//! descent direction to make progress; a launch is declared `Stalled` when
//! the gradient norm drops below a scale-aware threshold *and* a subsequent
//! 100-step probe stays within `contact_tol` of where it started.
//!
//! The `NearestMax` potential needs no integration: far away the flow runs
//! straight at the extreme particle in the arrival direction, so the launch
//! resolves in closed form to `argmax_i ⟨x_i, dir⟩` with attachment at
//! `x_parent + dir` (see [`FlowEngine::launch`]).
//!
//! Above `bh_threshold` particles, summed-potential gradients go through a
//! Barnes-Hut tree with the configured opening angle; smaller clusters are
//! summed exactly. Far from the cluster the integrator tracks a running
//! lower bound on the nearest-particle distance (decremented by the step
//! length, floored by the bounding-box distance) and only queries the
//! spatial hash when that bound drops below 2, so the far-field phase costs
//! no neighbor searches.

use crate::bh::BhTree;
use crate::error::{GfaError, Result};
use crate::geometry::Cluster;
use crate::potential::{self, GradKernel, PotentialKind};
use crate::vec::{add_scaled, dist, norm, norm2, scale, unit, Point};
use serde::{Deserialize, Serialize};

/// Integrator parameters. `Default` gives the canonical values.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct FlowConfig {
    /// K in the start radius R = K·max(n, ρ + 10).
    pub start_radius_factor: f64,
    /// Largest step; must be ≤ 0.5 so `(d − 1)/2`-capped steps cannot cross
    /// a unit shell.
    pub h_max: f64,
    /// Maximum field-direction change across one accepted step, radians.
    pub dir_tol: f64,
    /// Relative gradient-norm floor in the stall test.
    pub stall_grad_tol: f64,
    /// Contact shell half-width.
    pub contact_tol: f64,
    /// Step budget per launch.
    pub max_steps: u64,
    /// Cluster size at which gradient sums switch to Barnes-Hut.
    pub bh_threshold: usize,
    /// Barnes-Hut opening angle in [0, 1]; 0 means exact summation.
    pub bh_opening: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            start_radius_factor: 10.0,
            h_max: 0.25,
            dir_tol: 0.05,
            stall_grad_tol: 1e-14,
            contact_tol: 1e-9,
            max_steps: 10_000_000,
            bh_threshold: 128,
            bh_opening: 0.5,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(GfaError::InvalidInput(msg));
        if !(self.start_radius_factor.is_finite() && self.start_radius_factor >= 1.0) {
            return bad(format!("start_radius_factor must be ≥ 1, got {}", self.start_radius_factor));
        }
        if !(self.h_max > 0.0 && self.h_max <= 0.5) {
            return bad(format!("h_max must lie in (0, 0.5], got {}", self.h_max));
        }
        if !(self.dir_tol > 0.0 && self.dir_tol < std::f64::consts::PI) {
            return bad(format!("dir_tol must lie in (0, π), got {}", self.dir_tol));
        }
        if !(self.stall_grad_tol > 0.0 && self.stall_grad_tol.is_finite()) {
            return bad(format!("stall_grad_tol must be positive, got {}", self.stall_grad_tol));
        }
        if !(self.contact_tol > 0.0 && self.contact_tol <= 1e-3) {
            return bad(format!("contact_tol must lie in (0, 1e-3], got {}", self.contact_tol));
        }
        if self.max_steps == 0 {
            return bad("max_steps must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.bh_opening) {
            return bad(format!("bh_opening must lie in [0, 1], got {}", self.bh_opening));
        }
        Ok(())
    }
}

/// Why a launch failed outright (distinct from a legitimate stall).
#[derive(Debug, Clone, PartialEq)]
pub enum FailReason {
    /// Step budget exhausted.
    MaxSteps,
    /// Wandered past twice the start radius.
    Escaped { radius: f64 },
    /// Internal numeric invariant broke (should not happen).
    Numeric { what: String },
}

/// Result of one launch.
#[derive(Debug, Clone, PartialEq)]
pub enum FlowOutcome<const D: usize> {
    /// First contact: touched the unit shell of `parent`.
    Attached {
        parent: u32,
        position: Point<D>,
        steps: u64,
        path_length: f64,
    },
    /// Converged to a critical point of the field instead of the cluster.
    Stalled { position: Point<D>, steps: u64 },
    /// Entered the absorbing ball configured via `with_absorber`.
    Absorbed { position: Point<D>, steps: u64 },
    Failed { reason: FailReason, steps: u64 },
}

/// Start point for a launch: distance `K·max(n, ρ+10)` along `dir`.
pub fn start_point<const D: usize>(
    cluster: &Cluster<D>,
    dir: Point<D>,
    config: &FlowConfig,
) -> Point<D> {
    scale(dir, start_radius(cluster, config))
}

/// The launch radius R = K·max(n, ρ + 10).
pub fn start_radius<const D: usize>(cluster: &Cluster<D>, config: &FlowConfig) -> f64 {
    config.start_radius_factor * (cluster.len() as f64).max(cluster.radius_max() + 10.0)
}

enum TreeSlot<'a, const D: usize> {
    Owned(BhTree<D>),
    Borrowed(&'a BhTree<D>),
}

impl<'a, const D: usize> TreeSlot<'a, D> {
    fn get(&self) -> &BhTree<D> {
        match self {
            TreeSlot::Owned(t) => t,
            TreeSlot::Borrowed(t) => t,
        }
    }
}

/// Flow integrator bound to one cluster snapshot.
pub struct FlowEngine<'a, const D: usize> {
    cluster: &'a Cluster<D>,
    kind: PotentialKind,
    config: FlowConfig,
    kernel: Option<GradKernel>,
    tree: Option<TreeSlot<'a, D>>,
    /// Particles `[0, tree_len)` are covered by the tree; the tail is summed
    /// exactly. Lets growth reuse one tree across many attachments.
    tree_len: usize,
    cos_dir_tol: f64,
    absorber: Option<(Point<D>, f64)>,
}

impl<'a, const D: usize> FlowEngine<'a, D> {
    pub fn new(cluster: &'a Cluster<D>, kind: PotentialKind, config: FlowConfig) -> Result<Self> {
        kind.validate()?;
        config.validate()?;
        if cluster.is_empty() {
            return Err(GfaError::InvalidInput("flow needs a nonempty cluster".into()));
        }
        let kernel = GradKernel::of(kind);
        let tree = match kernel {
            Some(_) if cluster.len() >= config.bh_threshold && config.bh_opening > 0.0 => {
                Some(TreeSlot::Owned(BhTree::build(cluster.positions())))
            }
            _ => None,
        };
        let tree_len = if tree.is_some() { cluster.len() } else { 0 };
        Ok(FlowEngine {
            cluster,
            kind,
            cos_dir_tol: config.dir_tol.cos(),
            config,
            kernel,
            tree,
            tree_len,
            absorber: None,
        })
    }

    /// Engine over a shared prefix tree: `tree` must index positions
    /// `[0, tree_len)` of this cluster; the remainder is summed exactly.
    pub fn with_tree(
        cluster: &'a Cluster<D>,
        kind: PotentialKind,
        config: FlowConfig,
        tree: &'a BhTree<D>,
        tree_len: usize,
    ) -> Result<Self> {
        kind.validate()?;
        config.validate()?;
        let kernel = GradKernel::of(kind);
        if kernel.is_none() {
            return Err(GfaError::Unsupported("a field tree requires a summed potential"));
        }
        if tree.len() != tree_len || tree_len > cluster.len() || tree_len == 0 {
            return Err(GfaError::InvalidInput(format!(
                "tree covers {} points but tree_len = {} of cluster {}",
                tree.len(),
                tree_len,
                cluster.len()
            )));
        }
        Ok(FlowEngine {
            cluster,
            kind,
            cos_dir_tol: config.dir_tol.cos(),
            config,
            kernel,
            tree: Some(TreeSlot::Borrowed(tree)),
            tree_len,
            absorber: None,
        })
    }

    /// Add an absorbing ball B_eps(y): flows entering it end `Absorbed`.
    /// The center must be at least 1 from every particle; where the ball
    /// grazes a contact shell, contact wins (it is checked first each step).
    pub fn with_absorber(mut self, y: Point<D>, eps: f64) -> Result<Self> {
        if self.kind == PotentialKind::NearestMax {
            return Err(GfaError::Unsupported(
                "absorbing balls require an integrated flow (Log or Power)",
            ));
        }
        if !(eps > 0.0 && eps <= 0.1) {
            return Err(GfaError::InvalidInput(format!(
                "absorber radius must lie in (0, 0.1], got {eps}"
            )));
        }
        for (i, p) in self.cluster.positions().iter().enumerate() {
            if dist(*p, y) < 1.0 {
                return Err(GfaError::InvalidInput(format!(
                    "absorber center {y:?} is within distance 1 of particle {i}"
                )));
            }
        }
        self.absorber = Some((y, eps));
        Ok(self)
    }

    pub fn cluster(&self) -> &Cluster<D> {
        self.cluster
    }

    pub fn kind(&self) -> PotentialKind {
        self.kind
    }

    pub fn config(&self) -> &FlowConfig {
        &self.config
    }

    pub fn start_radius(&self) -> f64 {
        start_radius(self.cluster, &self.config)
    }

    /// Launch from the standard radius in direction `dir` (need not be
    /// normalized). `NearestMax` resolves in closed form; summed potentials
    /// integrate the flow.
    pub fn launch(&self, dir: Point<D>) -> Result<FlowOutcome<D>> {
        let dir = unit(dir)
            .ok_or_else(|| GfaError::InvalidInput("launch direction must be nonzero".into()))?;
        if self.kind == PotentialKind::NearestMax {
            return self.launch_nearest_max(dir);
        }
        self.integrate(scale(dir, self.start_radius()), None)
    }

    /// Launch from an explicit start point, always by integration (any
    /// potential). The point must lie outside every unit shell.
    pub fn launch_from(&self, x0: Point<D>) -> Result<FlowOutcome<D>> {
        self.integrate(x0, None)
    }

    /// As [`Self::launch`], also recording the accepted positions.
    pub fn launch_traced(&self, dir: Point<D>, path: &mut Vec<Point<D>>) -> Result<FlowOutcome<D>> {
        let dir = unit(dir)
            .ok_or_else(|| GfaError::InvalidInput("launch direction must be nonzero".into()))?;
        if self.kind == PotentialKind::NearestMax {
            let out = self.launch_nearest_max(dir)?;
            if let FlowOutcome::Attached { position, .. } = &out {
                // The closed-form path is the straight ray down to the shell.
                path.push(add_scaled(*position, 40.0, dir));
                path.push(*position);
            }
            return Ok(out);
        }
        self.integrate(scale(dir, self.start_radius()), Some(path))
    }

    /// Closed-form `NearestMax` attachment: the flow arrives on the extreme
    /// particle in the arrival direction and touches its shell head-on.
    /// The new position keeps 1-separation with margin: for any other
    /// particle q, ‖x_p + dir − x_q‖² = ‖x_p − x_q‖² + 2⟨x_p − x_q, dir⟩ + 1
    /// ≥ 1 + 1, since ⟨x_p, dir⟩ is maximal.
    fn launch_nearest_max(&self, dir: Point<D>) -> Result<FlowOutcome<D>> {
        let (parent, pos) = if let Some(hull) = self.cluster.hull() {
            let (id, p2) = hull.select_with_position([dir[0], dir[1]])?;
            let mut p = [0.0; D];
            p[0] = p2[0];
            p[1] = p2[1];
            (id, p)
        } else {
            // 3D: linear scan, smallest index on exact ties.
            let mut best: Option<(f64, u32)> = None;
            for (i, p) in self.cluster.positions().iter().enumerate() {
                let s = crate::vec::dot(*p, dir);
                match best {
                    Some((bs, _)) if s < bs => {}
                    Some((bs, bi)) if s == bs && i as u32 >= bi => {}
                    _ => best = Some((s, i as u32)),
                }
            }
            let (_, id) = best.expect("nonempty cluster");
            (id, self.cluster.position(id))
        };
        Ok(FlowOutcome::Attached {
            parent,
            position: crate::vec::add(pos, dir),
            steps: 0,
            path_length: 0.0,
        })
    }

    /// One gradient evaluation: tree over the covered prefix plus an exact
    /// sum over the tail, or a plain exact sum when no tree is active.
    #[inline]
    fn grad(&self, x: Point<D>, stack: &mut Vec<u32>) -> Result<Point<D>> {
        let Some(slot) = &self.tree else {
            return potential::gradient(self.cluster.positions(), x, self.kind);
        };
        let k = self.kernel.expect("a tree implies a summed kernel");
        let mut g = slot.get().gradient_with(x, k, self.config.bh_opening, stack)?;
        let tail = &self.cluster.positions()[self.tree_len..];
        if !tail.is_empty() {
            let gt = potential::gradient(tail, x, self.kind).map_err(|e| match e {
                GfaError::CoincidentPoint { index } => GfaError::CoincidentPoint {
                    index: index + self.tree_len,
                },
                other => other,
            })?;
            g = crate::vec::add(g, gt);
        }
        Ok(g)
    }

    fn integrate(
        &self,
        x0: Point<D>,
        mut trace: Option<&mut Vec<Point<D>>>,
    ) -> Result<FlowOutcome<D>> {
        let cfg = &self.config;
        let n = self.cluster.len() as f64;
        let alpha = self.kind.alpha_scale();
        let escape_r = 2.0 * norm(x0).max(self.start_radius());
        let escape_r2 = escape_r * escape_r;
        let tol = cfg.contact_tol;

        let mut x = x0;
        let mut steps: u64 = 0;
        let mut path_length = 0.0f64;
        // Running lower bound on the nearest-particle distance.
        let mut d_lb = self.cluster.bbox_distance(x);
        // Id behind the last exact `nearest` refresh; the contact branch can
        // only trigger on an iteration that refreshed (d_lb < 2), so this is
        // always current there.
        let mut nearest_id: u32 = 0;
        let mut probe: Option<(Point<D>, u64)> = None;
        let mut stack: Vec<u32> = Vec::with_capacity(128);
        let mut g_cached: Option<Point<D>> = None;
        if let Some(t) = trace.as_deref_mut() {
            t.push(x);
        }

        loop {
            // Refresh the exact nearest distance only when the bound says the
            // cluster is close enough to matter.
            let d_nn = if d_lb < 2.0 {
                let (id, d) = self.cluster.nearest(x).expect("nonempty cluster");
                d_lb = d;
                nearest_id = id;
                d
            } else {
                d_lb
            };

            if d_nn <= 1.0 + tol {
                if d_nn < 1.0 - tol {
                    return Ok(FlowOutcome::Failed {
                        reason: FailReason::Numeric {
                            what: format!("stepped inside a unit shell (d = {d_nn})"),
                        },
                        steps,
                    });
                }
                // Smallest id inside the shell wins; `contact` tests the
                // squared distance while `d_nn` passed through a sqrt, so in
                // the one-ulp window where the shell is empty under the
                // squared form, the nearest particle is the contact to within
                // representation error.
                let parent = self.cluster.contact(x, tol).unwrap_or(nearest_id);
                return Ok(FlowOutcome::Attached {
                    parent,
                    position: x,
                    steps,
                    path_length,
                });
            }

            let mut gap_absorb = f64::INFINITY;
            if let Some((y, eps)) = self.absorber {
                let d_y = dist(x, y);
                if d_y <= eps + tol {
                    return Ok(FlowOutcome::Absorbed { position: x, steps });
                }
                gap_absorb = d_y - eps;
            }

            if steps >= cfg.max_steps {
                return Ok(FlowOutcome::Failed {
                    reason: FailReason::MaxSteps,
                    steps,
                });
            }
            if norm2(x) > escape_r2 {
                return Ok(FlowOutcome::Failed {
                    reason: FailReason::Escaped { radius: escape_r },
                    steps,
                });
            }

            let g = match g_cached.take() {
                Some(g) => g,
                None => self.grad(x, &mut stack)?,
            };
            let gn = norm(g);
            if gn == 0.0 {
                // An exact critical point: no ascent direction exists.
                return Ok(FlowOutcome::Stalled { position: x, steps });
            }

            // Stall detection: weak field for this distance, then a probe
            // window of 100 steps that must move beyond contact_tol.
            let stall_scale = cfg.stall_grad_tol * n / (1.0 + d_nn).powf(alpha + 1.0);
            match probe {
                Some((px, psteps)) => {
                    if dist(x, px) > tol {
                        probe = None;
                    } else if steps - psteps >= 100 {
                        return Ok(FlowOutcome::Stalled { position: x, steps });
                    }
                }
                None if gn < stall_scale => probe = Some((x, steps)),
                None => {}
            }

            // Base step: half the shell gap, capped by h_max (and by the
            // absorber gap so it cannot be jumped either).
            let mut h = cfg
                .h_max
                .min(0.5 * (d_nn - 1.0))
                .min(0.5 * gap_absorb.max(tol));
            // Below this the step is accepted regardless of direction
            // agreement: the field is turning faster than the position
            // resolution, which only happens hugging a critical point, and
            // the probe (armed below) converts that into a stall.
            let h_floor = 1e-16 * (1.0 + norm(x));
            let v1 = scale(g, 1.0 / gn);
            let (x_new, h_used, g_new) = loop {
                let xm = add_scaled(x, 0.5 * h, v1);
                let v2 = match self.grad(xm, &mut stack).map(|g2| unit(g2)) {
                    Ok(Some(v2)) => v2,
                    _ => {
                        // Midpoint hit a singular/critical spot: shorten.
                        if h <= h_floor {
                            return Ok(FlowOutcome::Stalled { position: x, steps });
                        }
                        h *= 0.5;
                        continue;
                    }
                };
                // The move direction must agree with the field at the start
                // (else the midpoint crossed a separatrix) …
                if crate::vec::dot(v1, v2) < self.cos_dir_tol && h > h_floor {
                    h *= 0.5;
                    continue;
                }
                let x_cand = add_scaled(x, h, v2);
                match self.grad(x_cand, &mut stack) {
                    Ok(g3) => {
                        // … and with the field where the step lands.
                        if let Some(v3) = unit(g3) {
                            if crate::vec::dot(v1, v3) >= self.cos_dir_tol || h <= h_floor {
                                break (x_cand, h, g3);
                            }
                        } else if h <= h_floor {
                            return Ok(FlowOutcome::Stalled { position: x_cand, steps });
                        }
                    }
                    Err(_) => {
                        if h <= h_floor {
                            return Ok(FlowOutcome::Failed {
                                reason: FailReason::Numeric {
                                    what: "gradient evaluation failed near contact".into(),
                                },
                                steps,
                            });
                        }
                    }
                }
                h *= 0.5;
            };

            x = x_new;
            g_cached = Some(g_new);
            steps += 1;
            path_length += h_used;
            d_lb = (d_lb - h_used).max(self.cluster.bbox_distance(x));
            if h_used <= h_floor && probe.is_none() {
                // Steps have collapsed to the resolution floor: watch for a
                // stall even if the gradient norm never crosses the
                // threshold (it oscillates with the quantized position).
                probe = Some((x, steps));
            }
            if let Some(t) = trace.as_deref_mut() {
                t.push(x);
            }
        }
    }
}
