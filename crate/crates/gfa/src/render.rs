//! Deterministic SVG rendering: unit-diameter circles per particle, with
//! optional incoming-trajectory overlays.
//!
//! The output is a pure function of the cluster and options — fixed-precision
//! coordinates, no timestamps, no hashing-order dependence — so a text hash
//! of the SVG works as a visual regression check. 3D clusters render as an
//! orthographic projection onto the xy-plane.

use crate::error::{GfaError, Result};
use crate::flow::{FlowConfig, FlowEngine, FlowOutcome};
use crate::geometry::Cluster;
use crate::potential::PotentialKind;
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColorBy {
    /// Single fill color.
    Flat,
    /// Hue keyed to the parent id (roots are gray).
    Parent,
    /// Hue sweeps with attachment order, oldest blue to newest red.
    Order,
    /// Hue keyed to the angle of the attachment direction (child − parent).
    AttachAngle,
}

#[derive(Debug, Clone)]
pub struct RenderOptions {
    pub color_by: ColorBy,
    /// Number of equispaced-angle trajectories to overlay (0 = none, 2D only).
    pub flow_lines: usize,
    /// Flow settings for the trajectory overlay.
    pub flow: FlowConfig,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions { color_by: ColorBy::Order, flow_lines: 0, flow: FlowConfig::default() }
    }
}

/// Cap on polyline vertices per trajectory; long approaches are decimated.
const MAX_PATH_POINTS: usize = 600;

pub fn render_svg<const D: usize>(
    cluster: &Cluster<D>,
    kind: PotentialKind,
    opts: &RenderOptions,
) -> Result<String> {
    if opts.flow_lines > 0 && D != 2 {
        return Err(GfaError::Unsupported("trajectory overlays are 2D only"));
    }

    // Scene bounds from the particles (unit disks plus a little margin);
    // trajectories may extend past them and get clipped by the viewport.
    let (mut min_x, mut max_x) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut min_y, mut max_y) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in cluster.positions() {
        min_x = min_x.min(p[0]);
        max_x = max_x.max(p[0]);
        min_y = min_y.min(p[1]);
        max_y = max_y.max(p[1]);
    }
    let pad = 1.0;
    let (x0, y0) = (min_x - pad, min_y - pad);
    let (w, h) = (max_x - min_x + 2.0 * pad, max_y - min_y + 2.0 * pad);
    // SVG y grows downward; emit py = -y so the picture keeps math orientation.
    let view_y = -(y0 + h);
    let scale = 800.0 / w.max(h);
    let (px_w, px_h) = ((w * scale).round() as u64, (h * scale).round() as u64);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{x0:.4} {view_y:.4} {w:.4} {h:.4}\" \
         width=\"{px_w}\" height=\"{px_h}\">"
    );

    let n = cluster.len();
    let _ = writeln!(svg, "<g stroke=\"none\">");
    for i in 0..n {
        let p = cluster.position(i as u32);
        let fill = fill_color(cluster, i as u32, n, opts.color_by);
        let _ = writeln!(
            svg,
            "<circle cx=\"{:.4}\" cy=\"{:.4}\" r=\"0.5\" fill=\"{fill}\"/>",
            p[0], -p[1]
        );
    }
    let _ = writeln!(svg, "</g>");

    if opts.flow_lines > 0 {
        let engine = FlowEngine::new(cluster, kind, opts.flow.clone())?;
        let _ = writeln!(
            svg,
            "<g fill=\"none\" stroke=\"#555555\" stroke-width=\"0.08\" stroke-opacity=\"0.65\">"
        );
        let k = opts.flow_lines;
        let mut path = Vec::new();
        for j in 0..k {
            let theta = j as f64 * std::f64::consts::TAU / k as f64;
            let mut dir = [0.0; D];
            dir[0] = theta.cos();
            dir[1] = theta.sin();
            path.clear();
            let out = engine.launch_traced(dir, &mut path)?;
            if let FlowOutcome::Attached { position, .. } = out {
                if path.last() != Some(&position) {
                    path.push(position);
                }
            }
            if path.len() < 2 {
                continue;
            }
            let stride = path.len().div_ceil(MAX_PATH_POINTS);
            svg.push_str("<polyline points=\"");
            let mut first = true;
            for (idx, p) in path.iter().enumerate() {
                if idx % stride != 0 && idx != path.len() - 1 {
                    continue;
                }
                if !first {
                    svg.push(' ');
                }
                first = false;
                let _ = write!(svg, "{:.4},{:.4}", p[0], -p[1]);
            }
            svg.push_str("\"/>\n");
        }
        let _ = writeln!(svg, "</g>");
    }

    svg.push_str("</svg>\n");
    Ok(svg)
}

fn fill_color<const D: usize>(
    cluster: &Cluster<D>,
    id: u32,
    n: usize,
    mode: ColorBy,
) -> String {
    match mode {
        ColorBy::Flat => "#1f77b4".into(),
        ColorBy::Parent => match cluster.parent(id) {
            // Golden-angle hue: nearby ids get well-separated hues.
            Some(q) => hsl((q as f64 * 137.508).rem_euclid(360.0), 0.65, 0.5),
            None => "#808080".into(),
        },
        ColorBy::Order => {
            let t = if n > 1 { id as f64 / (n - 1) as f64 } else { 0.0 };
            hsl(240.0 * (1.0 - t), 0.75, 0.5)
        }
        ColorBy::AttachAngle => match cluster.parent(id) {
            Some(q) => {
                let p = cluster.position(id);
                let pp = cluster.position(q);
                let angle = (p[1] - pp[1]).atan2(p[0] - pp[0]).to_degrees().rem_euclid(360.0);
                hsl(angle, 0.7, 0.5)
            }
            None => "#808080".into(),
        },
    }
}

/// HSL to `#rrggbb` (h in degrees, s and l in [0,1]).
fn hsl(h: f64, s: f64, l: f64) -> String {
    let c = (1.0 - (2.0 * l - 1.0).abs()) * s;
    let hp = h / 60.0;
    let x = c * (1.0 - (hp.rem_euclid(2.0) - 1.0).abs());
    let (r1, g1, b1) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = l - c / 2.0;
    let to8 = |v: f64| ((v + m) * 255.0).round().clamp(0.0, 255.0) as u8;
    format!("#{:02x}{:02x}{:02x}", to8(r1), to8(g1), to8(b1))
}
