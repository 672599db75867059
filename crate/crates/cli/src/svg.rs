//! Standalone SVG figures: polyline, scatter and heat layers in a common
//! equal-aspect frame, with axes and a legend.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use wpa_core::approx::GridSpec;

use crate::CliError;

#[derive(Debug, Clone)]
pub enum Layer {
    Polyline {
        label: String,
        /// Each inner list is drawn as one path.
        paths: Vec<Vec<Complex64>>,
        closed: bool,
    },
    Scatter {
        label: String,
        points: Vec<Complex64>,
    },
    /// Vertex values on a grid, row-major `values[j * nx + i]`.
    Heat {
        label: String,
        grid: GridSpec,
        values: Vec<f64>,
    },
}

impl Layer {
    fn label(&self) -> &str {
        match self {
            Layer::Polyline { label, .. } | Layer::Scatter { label, .. } | Layer::Heat { label, .. } => label,
        }
    }

    fn extent(&self) -> Option<(f64, f64, f64, f64)> {
        let pts: Box<dyn Iterator<Item = Complex64> + '_> = match self {
            Layer::Polyline { paths, .. } => Box::new(paths.iter().flatten().copied()),
            Layer::Scatter { points, .. } => Box::new(points.iter().copied()),
            Layer::Heat { grid, .. } => {
                return Some((grid.x_min, grid.x_max, grid.y_min, grid.y_max));
            }
        };
        pts.filter(|z| z.re.is_finite() && z.im.is_finite()).fold(None, |acc, z| {
            let (x0, x1, y0, y1) = acc.unwrap_or((z.re, z.re, z.im, z.im));
            Some((x0.min(z.re), x1.max(z.re), y0.min(z.im), y1.max(z.im)))
        })
    }
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];
/// Width of the plotting area in pixels; the height follows the aspect ratio.
const PLOT_WIDTH: f64 = 600.0;
const MARGIN: f64 = 60.0;
const LEGEND_WIDTH: f64 = 170.0;
/// Heat layers are resampled to at most this many cells per axis.
const HEAT_CELLS: usize = 120;

fn heat_color(t: f64) -> String {
    // dark blue → teal → yellow
    let stops = [(0.0, [68.0, 1.0, 84.0]), (0.5, [33.0, 145.0, 140.0]), (1.0, [253.0, 231.0, 37.0])];
    let t = t.clamp(0.0, 1.0);
    let (a, b) = if t <= 0.5 { (stops[0], stops[1]) } else { (stops[1], stops[2]) };
    let s = (t - a.0) / (b.0 - a.0);
    let c: Vec<u8> = (0..3).map(|k| (a.1[k] + s * (b.1[k] - a.1[k])).round() as u8).collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    (first..)
        .map(|k| k as f64 * step)
        .take_while(|t| *t <= hi + 1e-9 * step)
        .collect()
}

/// Renders the layers into an SVG document.
pub fn render_svg(layers: &[Layer], title: &str) -> Result<String, CliError> {
    if layers.is_empty() {
        return Err(CliError::Usage("emit_svg needs at least one layer".into()));
    }
    let (mut x0, mut x1, mut y0, mut y1) = layers
        .iter()
        .filter_map(Layer::extent)
        .reduce(|a, b| (a.0.min(b.0), a.1.max(b.1), a.2.min(b.2), a.3.max(b.3)))
        .unwrap_or((-1.0, 1.0, -1.0, 1.0));
    let pad = 0.05 * (x1 - x0).max(y1 - y0).max(1e-9);
    x0 -= pad;
    x1 += pad;
    y0 -= pad;
    y1 += pad;
    let scale = PLOT_WIDTH / (x1 - x0);
    let plot_h = ((y1 - y0) * scale).clamp(120.0, 1600.0);
    let scale = scale.min(plot_h / (y1 - y0));
    let (plot_w, plot_h) = ((x1 - x0) * scale, (y1 - y0) * scale);
    let width = plot_w + 2.0 * MARGIN + LEGEND_WIDTH;
    let height = plot_h + 2.0 * MARGIN;
    let map = |z: Complex64| (MARGIN + (z.re - x0) * scale, MARGIN + (y1 - z.im) * scale);

    let mut s = String::new();
    writeln!(
        s,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}">
<rect width="100%" height="100%" fill="white"/>
<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
        MARGIN + plot_w / 2.0,
        MARGIN / 2.0,
        escape(title)
    )
    .unwrap();
    writeln!(s, r#"<clipPath id="plot"><rect x="{MARGIN}" y="{MARGIN}" width="{plot_w:.2}" height="{plot_h:.2}"/></clipPath>"#).unwrap();

    for (idx, layer) in layers.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        match layer {
            Layer::Heat { grid, values, .. } => {
                let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
                let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let (cx, cy) = (grid.nx.min(HEAT_CELLS), grid.ny.min(HEAT_CELLS));
                let (w, h) = ((grid.x_max - grid.x_min) / cx as f64, (grid.y_max - grid.y_min) / cy as f64);
                writeln!(s, r#"<g clip-path="url(#plot)" shape-rendering="crispEdges">"#).unwrap();
                for j in 0..cy {
                    for i in 0..cx {
                        let gi = ((i as f64 + 0.5) / cx as f64 * (grid.nx - 1) as f64).round() as usize;
                        let gj = ((j as f64 + 0.5) / cy as f64 * (grid.ny - 1) as f64).round() as usize;
                        let v = values[gj * grid.nx + gi];
                        let t = if v.is_finite() && hi > lo { (v - lo) / (hi - lo) } else if v == f64::INFINITY { 1.0 } else { 0.0 };
                        let (px, py) = map(Complex64::new(grid.x_min + i as f64 * w, grid.y_min + (j + 1) as f64 * h));
                        writeln!(
                            s,
                            r#"<rect x="{px:.2}" y="{py:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                            w * scale + 0.3,
                            h * scale + 0.3,
                            heat_color(t)
                        )
                        .unwrap();
                    }
                }
                writeln!(s, "</g>").unwrap();
            }
            Layer::Polyline { paths, closed, .. } => {
                writeln!(s, r#"<g clip-path="url(#plot)" fill="none" stroke="{color}" stroke-width="1.5">"#).unwrap();
                for path in paths.iter().filter(|p| !p.is_empty()) {
                    let mut d = String::new();
                    for (k, z) in path.iter().enumerate() {
                        let (x, y) = map(*z);
                        write!(d, "{}{x:.2},{y:.2} ", if k == 0 { 'M' } else { 'L' }).unwrap();
                    }
                    if *closed {
                        d.push('Z');
                    }
                    writeln!(s, r#"<path d="{}"/>"#, d.trim_end()).unwrap();
                }
                writeln!(s, "</g>").unwrap();
            }
            Layer::Scatter { points, .. } => {
                writeln!(s, r#"<g clip-path="url(#plot)" fill="{color}">"#).unwrap();
                for z in points {
                    let (x, y) = map(*z);
                    writeln!(s, r#"<circle class="marker" cx="{x:.2}" cy="{y:.2}" r="2.5"/>"#).unwrap();
                }
                writeln!(s, "</g>").unwrap();
            }
        }
    }

    // axes
    writeln!(
        s,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{plot_w:.2}" height="{plot_h:.2}" fill="none" stroke="black"/>"#
    )
    .unwrap();
    writeln!(s, r#"<g font-family="sans-serif" font-size="11" fill="black">"#).unwrap();
    for t in ticks(x0, x1) {
        let (x, _) = map(Complex64::new(t, y0));
        let y = MARGIN + plot_h;
        writeln!(s, r#"<line x1="{x:.2}" y1="{y:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#, y + 5.0).unwrap();
        writeln!(s, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, y + 18.0, fmt_tick(t)).unwrap();
    }
    for t in ticks(y0, y1) {
        let (_, y) = map(Complex64::new(x0, t));
        writeln!(s, r#"<line x1="{:.2}" y1="{y:.2}" x2="{MARGIN}" y2="{y:.2}" stroke="black"/>"#, MARGIN - 5.0).unwrap();
        writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, MARGIN - 8.0, y + 4.0, fmt_tick(t)).unwrap();
    }
    writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">Re</text>"#, MARGIN + plot_w / 2.0, height - 12.0).unwrap();
    writeln!(s, r#"<text x="14" y="{:.2}" text-anchor="middle" transform="rotate(-90 14 {:.2})">Im</text>"#, MARGIN + plot_h / 2.0, MARGIN + plot_h / 2.0).unwrap();
    writeln!(s, "</g>").unwrap();

    // legend
    let lx = MARGIN + plot_w + 20.0;
    writeln!(s, r#"<g class="legend" font-family="sans-serif" font-size="12">"#).unwrap();
    for (idx, layer) in layers.iter().enumerate() {
        let y = MARGIN + 10.0 + 20.0 * idx as f64;
        let color = PALETTE[idx % PALETTE.len()];
        match layer {
            Layer::Polyline { .. } => writeln!(s, r#"<line x1="{lx:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{color}" stroke-width="2"/>"#, lx + 18.0),
            Layer::Scatter { .. } => writeln!(s, r#"<circle cx="{:.2}" cy="{y:.2}" r="4" fill="{color}"/>"#, lx + 9.0),
            Layer::Heat { .. } => writeln!(s, r#"<rect x="{lx:.2}" y="{:.2}" width="18" height="10" fill="{}"/>"#, y - 5.0, heat_color(0.7)),
        }
        .unwrap();
        writeln!(s, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, lx + 24.0, y + 4.0, escape(layer.label())).unwrap();
    }
    writeln!(s, "</g>\n</svg>").unwrap();
    Ok(s)
}

fn fmt_tick(t: f64) -> String {
    let s = format!("{t:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn emit_svg(layers: &[Layer], title: &str, out_path: &Path) -> Result<(), CliError> {
    let doc = render_svg(layers, title)?;
    std::fs::write(out_path, doc).map_err(|e| CliError::Io(format!("{}: {e}", out_path.display())))
}
