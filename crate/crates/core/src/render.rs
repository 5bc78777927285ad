//! Standalone SVG rendering of configurations: a number line with colored
//! region intervals, breakpoint ticks, and an optional density cone y = |x|.
//! Each interval carries a `data-region` attribute so the drawn region order
//! can be checked structurally.

use crate::config::Configuration;
use crate::error::{Error, Result};

/// Default color per region index, cycled when regions outnumber it.
const PALETTE: [&str; 10] = [
    "#d62728", "#1f77b4", "#2ca02c", "#bcbd22", "#9467bd", "#ff7f0e", "#17becf", "#e377c2",
    "#8c564b", "#7f7f7f",
];

/// Drawing parameters.
#[derive(Debug, Clone)]
pub struct RenderSpec {
    pub config: Configuration,
    pub width: u32,
    pub height: u32,
    /// One CSS color per region; defaults to a cycled palette.
    pub palette: Vec<String>,
    pub show_density_cone: bool,
}

impl RenderSpec {
    pub fn new(config: Configuration) -> RenderSpec {
        let n = config.n();
        RenderSpec {
            config,
            width: 800,
            height: 240,
            palette: (0..n)
                .map(|i| PALETTE[i % PALETTE.len()].to_string())
                .collect(),
            show_density_cone: true,
        }
    }
}

/// Renders the configuration to a standalone SVG document.
pub fn render_svg(spec: &RenderSpec) -> Result<String> {
    let c = &spec.config;
    if spec.palette.len() < c.n() {
        return Err(Error::InvalidConfiguration(format!(
            "palette has {} colors for {} regions",
            spec.palette.len(),
            c.n()
        )));
    }
    let (w, h) = (spec.width as f64, spec.height as f64);
    let bps = c.breakpoints();
    let x_lo = bps[0].min(0.0);
    let x_hi = bps[bps.len() - 1].max(0.0);
    let span = (x_hi - x_lo).max(1e-9);
    let pad = 0.08 * span;
    let to_px = |x: f64| -> f64 { (x - (x_lo - pad)) / (span + 2.0 * pad) * w };
    let baseline = 0.62 * h;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n",
        spec.width, spec.height, spec.width, spec.height
    ));
    svg.push_str("  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    if spec.show_density_cone {
        // y = |x| scaled to fit above the baseline
        let peak = x_lo.abs().max(x_hi.abs()).max(1e-9);
        let y_of = |x: f64| baseline - (x.abs() / peak) * (baseline - 0.08 * h);
        let origin_px = to_px(0.0);
        svg.push_str(&format!(
            "  <path d=\"M {:.2} {:.2} L {origin_px:.2} {baseline:.2} L {:.2} {:.2}\" fill=\"none\" stroke=\"#bbbbbb\" stroke-width=\"1.5\"/>\n",
            to_px(-peak),
            y_of(-peak),
            to_px(peak),
            y_of(peak),
        ));
    }

    // number line
    svg.push_str(&format!(
        "  <line x1=\"0\" y1=\"{baseline:.2}\" x2=\"{w:.2}\" y2=\"{baseline:.2}\" stroke=\"#333333\" stroke-width=\"1\"/>\n"
    ));

    // region intervals
    for k in 0..c.cell_count() {
        let Some(r) = c.cells()[k] else { continue };
        let iv = c.cell_interval(k);
        let x1 = to_px(iv.a);
        let x2 = to_px(iv.b);
        svg.push_str(&format!(
            "  <rect data-region=\"{}\" x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"10\" fill=\"{}\"/>\n",
            r.0,
            x1,
            baseline - 5.0,
            (x2 - x1).max(0.5),
            spec.palette[r.0]
        ));
        svg.push_str(&format!(
            "  <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"12\" fill=\"#222222\">M{}</text>\n",
            0.5 * (x1 + x2),
            baseline - 12.0,
            r.0 + 1
        ));
    }

    // breakpoint ticks with coordinates
    for &x in bps {
        let px = to_px(x);
        svg.push_str(&format!(
            "  <line x1=\"{px:.2}\" y1=\"{:.2}\" x2=\"{px:.2}\" y2=\"{:.2}\" stroke=\"#333333\" stroke-width=\"1\"/>\n",
            baseline - 8.0,
            baseline + 8.0
        ));
        svg.push_str(&format!(
            "  <text x=\"{px:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"10\" fill=\"#555555\">{:.4}</text>\n",
            baseline + 22.0,
            x
        ));
    }

    // origin marker
    let opx = to_px(0.0);
    svg.push_str(&format!(
        "  <circle cx=\"{opx:.2}\" cy=\"{baseline:.2}\" r=\"2.5\" fill=\"#000000\"/>\n"
    ));
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Region indices in left-to-right drawing order, parsed from the
/// `data-region` attributes of a rendered SVG. The structural counterpart of
/// comparing figures by eye.
pub fn region_order_from_svg(svg: &str) -> Vec<usize> {
    let mut out = Vec::new();
    for part in svg.split("data-region=\"").skip(1) {
        if let Some(end) = part.find('"') {
            if let Ok(idx) = part[..end].parse::<usize>() {
                out.push(idx);
            }
        }
    }
    out
}
