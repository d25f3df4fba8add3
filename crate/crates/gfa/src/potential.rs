//! Interaction energies and their derivatives.
//!
//! For a cluster `{x_i}` the supported fields are
//!
//! * `Log`:        E(x) = -Σ log ‖x − x_i‖
//! * `Power(α)`:   E(x) =  Σ ‖x − x_i‖^(−α),  α > 0
//! * `NearestMax`: E(x) =  max_i ‖x − x_i‖^(−1)
//!
//! with gradients
//!
//! * `Log`:        ∇E =   Σ (x_i − x) / ‖x_i − x‖²
//! * `Power(α)`:   ∇E = α Σ (x_i − x) / ‖x_i − x‖^(α+2)
//! * `NearestMax`: ∇E = (x_q − x) / ‖x_q − x‖³ for the unique nearest x_q
//!
//! and Laplacians (d = dimension)
//!
//! * `Power(α)`: ΔE = α (α + 2 − d) Σ ‖x − x_i‖^(−α−2), exactly 0 at α = d − 2
//! * `Log`:      ΔE = −(d − 2) Σ ‖x − x_i‖^(−2), exactly 0 in 2D.
//!
//! All sums run in particle-index order so results are bit-reproducible.
//! Inner loops dispatch on a small kernel enum with closed forms for the
//! common exponents (α = 0.5, 1, 2) to avoid `powf` in hot paths.

use crate::error::{GfaError, Result};
use crate::vec::{dist2, Point};
use serde::{Deserialize, Serialize};

/// Which interaction energy drives the flow.
///
/// `Power(α)` requires α > 0: the α = 0 endpoint must be expressed as `Log`
/// and the α = ∞ endpoint as `NearestMax`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PotentialKind {
    Log,
    Power(f64),
    NearestMax,
}

impl PotentialKind {
    /// Check the α > 0 constraint on `Power`.
    pub fn validate(&self) -> Result<()> {
        match self {
            PotentialKind::Power(a) if !(a.is_finite() && *a > 0.0) => {
                Err(GfaError::InvalidInput(format!(
                    "Power exponent must be finite and > 0, got {a}; use Log for 0 and NearestMax for infinity"
                )))
            }
            _ => Ok(()),
        }
    }

    /// Exponent used in distance scalings: 0 for `Log`, α for `Power`, and 1
    /// for `NearestMax` (whose gradient decays like an α = 1 field).
    pub fn alpha_scale(&self) -> f64 {
        match self {
            PotentialKind::Log => 0.0,
            PotentialKind::Power(a) => *a,
            PotentialKind::NearestMax => 1.0,
        }
    }
}

impl std::fmt::Display for PotentialKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PotentialKind::Log => write!(f, "log"),
            PotentialKind::Power(a) => write!(f, "{a}"),
            PotentialKind::NearestMax => write!(f, "inf"),
        }
    }
}

/// Energy, gradient, and Laplacian at one evaluation point.
#[derive(Debug, Clone, Copy)]
pub struct FieldSample<const D: usize> {
    pub energy: f64,
    pub gradient: Point<D>,
    pub laplacian: f64,
}

/// Gradient weight w(r²) with contribution w · (x_i − x).
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum GradKernel {
    /// Log: w = r^(−2)
    Log,
    /// α = 1: w = r^(−3)
    A1,
    /// α = 2: w = 2 r^(−4)
    A2,
    /// α = 1/2: w = r^(−5/2) / 2
    AHalf,
    /// General α: w = α (r²)^(−(α+2)/2)
    Gen { alpha: f64, neg_half_ap2: f64 },
}

impl GradKernel {
    /// Kernel for a summed potential; `None` for `NearestMax`.
    pub(crate) fn of(kind: PotentialKind) -> Option<GradKernel> {
        match kind {
            PotentialKind::Log => Some(GradKernel::Log),
            PotentialKind::Power(a) if a == 1.0 => Some(GradKernel::A1),
            PotentialKind::Power(a) if a == 2.0 => Some(GradKernel::A2),
            PotentialKind::Power(a) if a == 0.5 => Some(GradKernel::AHalf),
            PotentialKind::Power(a) => Some(GradKernel::Gen {
                alpha: a,
                neg_half_ap2: -(a + 2.0) / 2.0,
            }),
            PotentialKind::NearestMax => None,
        }
    }

    #[inline(always)]
    pub(crate) fn w(self, r2: f64) -> f64 {
        match self {
            GradKernel::Log => 1.0 / r2,
            GradKernel::A1 => {
                let r = r2.sqrt();
                1.0 / (r2 * r)
            }
            GradKernel::A2 => 2.0 / (r2 * r2),
            GradKernel::AHalf => 0.5 / (r2 * r2.sqrt().sqrt()),
            GradKernel::Gen { alpha, neg_half_ap2 } => alpha * r2.powf(neg_half_ap2),
        }
    }
}

#[inline(always)]
fn check_not_coincident(r2: f64, index: usize) -> Result<()> {
    if r2 == 0.0 {
        return Err(GfaError::CoincidentPoint { index });
    }
    Ok(())
}

/// E(x). Errors if `x` coincides with a particle or the kind is invalid.
pub fn energy<const D: usize>(points: &[Point<D>], x: Point<D>, kind: PotentialKind) -> Result<f64> {
    kind.validate()?;
    match kind {
        PotentialKind::Log => {
            let mut s = 0.0;
            for (i, p) in points.iter().enumerate() {
                let r2 = dist2(*p, x);
                check_not_coincident(r2, i)?;
                s -= 0.5 * r2.ln();
            }
            Ok(s)
        }
        PotentialKind::Power(a) => {
            let mut s = 0.0;
            if a == 1.0 {
                for (i, p) in points.iter().enumerate() {
                    let r2 = dist2(*p, x);
                    check_not_coincident(r2, i)?;
                    s += 1.0 / r2.sqrt();
                }
            } else if a == 2.0 {
                for (i, p) in points.iter().enumerate() {
                    let r2 = dist2(*p, x);
                    check_not_coincident(r2, i)?;
                    s += 1.0 / r2;
                }
            } else {
                let e = -a / 2.0;
                for (i, p) in points.iter().enumerate() {
                    let r2 = dist2(*p, x);
                    check_not_coincident(r2, i)?;
                    s += r2.powf(e);
                }
            }
            Ok(s)
        }
        PotentialKind::NearestMax => {
            let (i, r2) = nearest_r2(points, x)?;
            check_not_coincident(r2, i)?;
            Ok(1.0 / r2.sqrt())
        }
    }
}

/// ∇E(x). For `NearestMax` the nearest particle must be unique; an exact
/// distance tie is a [`GfaError::NearestMaxTie`].
pub fn gradient<const D: usize>(
    points: &[Point<D>],
    x: Point<D>,
    kind: PotentialKind,
) -> Result<Point<D>> {
    kind.validate()?;
    if let Some(kernel) = GradKernel::of(kind) {
        let mut g = [0.0; D];
        for (i, p) in points.iter().enumerate() {
            let r2 = dist2(*p, x);
            check_not_coincident(r2, i)?;
            let w = kernel.w(r2);
            for k in 0..D {
                g[k] += w * (p[k] - x[k]);
            }
        }
        return Ok(g);
    }
    // NearestMax: steepest ascent of 1/r toward the unique nearest particle.
    let (q, r2) = nearest_unique(points, x)?;
    check_not_coincident(r2, q)?;
    let r = r2.sqrt();
    let w = 1.0 / (r2 * r);
    let p = points[q];
    let mut g = [0.0; D];
    for k in 0..D {
        g[k] = w * (p[k] - x[k]);
    }
    Ok(g)
}

/// ΔE(x). Exactly 0 for `Log` in 2D and `Power(d − 2)` in dimension d;
/// unsupported for `NearestMax` (the max of fields is not smooth).
pub fn laplacian<const D: usize>(
    points: &[Point<D>],
    x: Point<D>,
    kind: PotentialKind,
) -> Result<f64> {
    kind.validate()?;
    let d = D as f64;
    match kind {
        PotentialKind::Log => {
            let mut s = 0.0;
            for (i, p) in points.iter().enumerate() {
                let r2 = dist2(*p, x);
                check_not_coincident(r2, i)?;
                s += 1.0 / r2;
            }
            if D == 2 {
                return Ok(0.0);
            }
            Ok(-(d - 2.0) * s)
        }
        PotentialKind::Power(a) => {
            let pf = a * (a + 2.0 - d);
            let e = -(a + 2.0) / 2.0;
            let mut s = 0.0;
            for (i, p) in points.iter().enumerate() {
                let r2 = dist2(*p, x);
                check_not_coincident(r2, i)?;
                s += r2.powf(e);
            }
            if pf == 0.0 {
                return Ok(0.0);
            }
            Ok(pf * s)
        }
        PotentialKind::NearestMax => Err(GfaError::Unsupported(
            "laplacian is not defined for the nearest-max potential",
        )),
    }
}

/// Energy, gradient, and Laplacian in one call (`Log` and `Power` only).
pub fn field_sample<const D: usize>(
    points: &[Point<D>],
    x: Point<D>,
    kind: PotentialKind,
) -> Result<FieldSample<D>> {
    if kind == PotentialKind::NearestMax {
        return Err(GfaError::Unsupported(
            "field_sample requires a smooth potential (Log or Power)",
        ));
    }
    Ok(FieldSample {
        energy: energy(points, x, kind)?,
        gradient: gradient(points, x, kind)?,
        laplacian: laplacian(points, x, kind)?,
    })
}

/// Index and squared distance of a nearest particle (smallest index on ties).
fn nearest_r2<const D: usize>(points: &[Point<D>], x: Point<D>) -> Result<(usize, f64)> {
    if points.is_empty() {
        return Err(GfaError::InvalidInput("empty particle set".into()));
    }
    let mut best = (0usize, f64::INFINITY);
    for (i, p) in points.iter().enumerate() {
        let r2 = dist2(*p, x);
        if r2 < best.1 {
            best = (i, r2);
        }
    }
    Ok(best)
}

/// Nearest particle, erroring on an exact distance tie.
fn nearest_unique<const D: usize>(points: &[Point<D>], x: Point<D>) -> Result<(usize, f64)> {
    let (q, r2) = nearest_r2(points, x)?;
    for (i, p) in points.iter().enumerate() {
        if i != q && dist2(*p, x) == r2 {
            return Err(GfaError::NearestMaxTie { a: q, b: i });
        }
    }
    Ok((q, r2))
}
