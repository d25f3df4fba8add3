//! Small fixed-dimension vector helpers over `[f64; D]`.
//!
//! Points and directions are plain arrays so they serialize naturally and
//! stay cheap to copy; the free functions here cover the handful of
//! operations the rest of the crate needs.

pub type Point<const D: usize> = [f64; D];

#[inline(always)]
pub fn add<const D: usize>(a: Point<D>, b: Point<D>) -> Point<D> {
    let mut out = [0.0; D];
    for k in 0..D {
        out[k] = a[k] + b[k];
    }
    out
}

#[inline(always)]
pub fn sub<const D: usize>(a: Point<D>, b: Point<D>) -> Point<D> {
    let mut out = [0.0; D];
    for k in 0..D {
        out[k] = a[k] - b[k];
    }
    out
}

#[inline(always)]
pub fn scale<const D: usize>(a: Point<D>, s: f64) -> Point<D> {
    let mut out = [0.0; D];
    for k in 0..D {
        out[k] = a[k] * s;
    }
    out
}

/// `a + s * b`.
#[inline(always)]
pub fn add_scaled<const D: usize>(a: Point<D>, s: f64, b: Point<D>) -> Point<D> {
    let mut out = [0.0; D];
    for k in 0..D {
        out[k] = a[k] + s * b[k];
    }
    out
}

#[inline(always)]
pub fn dot<const D: usize>(a: Point<D>, b: Point<D>) -> f64 {
    let mut s = 0.0;
    for k in 0..D {
        s += a[k] * b[k];
    }
    s
}

#[inline(always)]
pub fn norm2<const D: usize>(a: Point<D>) -> f64 {
    dot(a, a)
}

#[inline(always)]
pub fn norm<const D: usize>(a: Point<D>) -> f64 {
    norm2(a).sqrt()
}

#[inline(always)]
pub fn dist2<const D: usize>(a: Point<D>, b: Point<D>) -> f64 {
    let mut s = 0.0;
    for k in 0..D {
        let d = a[k] - b[k];
        s += d * d;
    }
    s
}

#[inline(always)]
pub fn dist<const D: usize>(a: Point<D>, b: Point<D>) -> f64 {
    dist2(a, b).sqrt()
}

/// Unit vector along `a`, or `None` when `‖a‖ == 0`.
#[inline(always)]
pub fn unit<const D: usize>(a: Point<D>) -> Option<Point<D>> {
    let n = norm(a);
    if n == 0.0 {
        return None;
    }
    Some(scale(a, 1.0 / n))
}

/// 2D direction vector for an angle in radians.
#[inline]
pub fn dir2(theta: f64) -> [f64; 2] {
    [theta.cos(), theta.sin()]
}

/// z-component of the 2D cross product `(b - a) × (c - a)`.
#[inline(always)]
pub fn cross2(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}
