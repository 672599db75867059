//! Level regions on a rectangular grid: marching-squares polylines for
//! `{v = R}` and flood-fill component counts for `{v > R}`.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ApproxError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    /// Vertices per axis.
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub const MIN_RESOLUTION: usize = 32;

    pub fn new(x: (f64, f64), y: (f64, f64), nx: usize, ny: usize) -> Result<Self, ApproxError> {
        let g = Self {
            x_min: x.0,
            x_max: x.1,
            y_min: y.0,
            y_max: y.1,
            nx,
            ny,
        };
        g.validate()?;
        Ok(g)
    }

    /// Square-cell-ish grid centred at `center` with half-widths `hx`, `hy`.
    pub fn centered(center: Complex64, hx: f64, hy: f64, n: usize) -> Result<Self, ApproxError> {
        Self::new((center.re - hx, center.re + hx), (center.im - hy, center.im + hy), n, n)
    }

    pub fn validate(&self) -> Result<(), ApproxError> {
        if self.nx < Self::MIN_RESOLUTION || self.ny < Self::MIN_RESOLUTION {
            return Err(ApproxError::GridTooCoarse(self.nx.min(self.ny)));
        }
        let ok = |a: f64, b: f64| a.is_finite() && b.is_finite() && b > a;
        if !ok(self.x_min, self.x_max) || !ok(self.y_min, self.y_max) {
            return Err(ApproxError::BadParameter("grid bounds must be finite and increasing".into()));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx - 1) as f64
    }

    pub fn dy(&self) -> f64 {
        (self.y_max - self.y_min) / (self.ny - 1) as f64
    }

    pub fn point(&self, i: usize, j: usize) -> Complex64 {
        Complex64::new(self.x_min + i as f64 * self.dx(), self.y_min + j as f64 * self.dy())
    }

    /// Same window, resolution doubled (`2n - 1` vertices keeps the old ones).
    pub fn refined(&self) -> Self {
        Self {
            nx: 2 * self.nx - 1,
            ny: 2 * self.ny - 1,
            ..*self
        }
    }
}

/// Values of a level function at every grid vertex, reusable across levels.
#[derive(Debug, Clone)]
pub struct SampledGrid {
    pub grid: GridSpec,
    /// Row-major, `values[j * nx + i]`; NaN is stored as `-inf`.
    pub values: Vec<f64>,
}

impl SampledGrid {
    pub fn sample<F>(value_fn: F, grid: GridSpec) -> Result<Self, ApproxError>
    where
        F: Fn(Complex64) -> f64 + Sync,
    {
        grid.validate()?;
        let mut values = vec![0.0; grid.nx * grid.ny];
        values.par_chunks_mut(grid.nx).enumerate().for_each(|(j, row)| {
            for (i, v) in row.iter_mut().enumerate() {
                let x = value_fn(grid.point(i, j));
                *v = if x.is_nan() { f64::NEG_INFINITY } else { x };
            }
        });
        Ok(Self { grid, values })
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.grid.nx + i]
    }

    /// Connected components (4-neighbour) of the vertex set `{v > level}`.
    pub fn component_count(&self, level: f64) -> usize {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        let inside: Vec<bool> = self.values.iter().map(|&v| v > level).collect();
        let mut seen = vec![false; nx * ny];
        let mut stack = Vec::new();
        let mut count = 0;
        for start in 0..nx * ny {
            if !inside[start] || seen[start] {
                continue;
            }
            count += 1;
            seen[start] = true;
            stack.push(start);
            while let Some(p) = stack.pop() {
                let (i, j) = (p % nx, p / nx);
                let mut visit = |q: usize| {
                    if inside[q] && !seen[q] {
                        seen[q] = true;
                        stack.push(q);
                    }
                };
                if i > 0 {
                    visit(p - 1);
                }
                if i + 1 < nx {
                    visit(p + 1);
                }
                if j > 0 {
                    visit(p - nx);
                }
                if j + 1 < ny {
                    visit(p + nx);
                }
            }
        }
        count
    }

    /// Number of vertices in `{v > level}`.
    pub fn super_level_size(&self, level: f64) -> usize {
        self.values.iter().filter(|&&v| v > level).count()
    }

    /// Membership mask of `{v > level}` in row-major order.
    pub fn super_level_mask(&self, level: f64) -> Vec<bool> {
        self.values.iter().map(|&v| v > level).collect()
    }
}

/// Polylines of `E_R = {v = R}` together with the component count of `K_R = {v > R}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourSet {
    pub level: f64,
    pub polylines: Vec<Vec<Complex64>>,
    pub closed: Vec<bool>,
    pub component_count: usize,
    pub grid: GridSpec,
    /// No grid edge crosses the level.
    pub empty: bool,
}

impl ContourSet {
    /// CSV with columns `polyline,re,im`; closed polylines repeat their first vertex.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), ApproxError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["polyline", "re", "im"])?;
        for (k, (line, closed)) in self.polylines.iter().zip(&self.closed).enumerate() {
            let extra = if *closed { line.first() } else { None };
            for z in line.iter().chain(extra) {
                w.write_record(&[k.to_string(), z.re.to_string(), z.im.to_string()])?;
            }
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    /// SVG path data, one string per polyline, through the given coordinate map.
    pub fn svg_paths<M>(&self, map: M) -> Vec<String>
    where
        M: Fn(Complex64) -> (f64, f64),
    {
        self.polylines
            .iter()
            .zip(&self.closed)
            .map(|(line, closed)| {
                let mut d = String::new();
                for (k, z) in line.iter().enumerate() {
                    let (x, y) = map(*z);
                    d.push_str(&format!("{}{x:.3},{y:.3} ", if k == 0 { 'M' } else { 'L' }));
                }
                if *closed {
                    d.push('Z');
                }
                d.trim_end().to_string()
            })
            .collect()
    }

    /// The longest closed polyline, oriented counter-clockwise.
    pub fn outer_loop(&self) -> Option<Vec<Complex64>> {
        let mut best: Option<&Vec<Complex64>> = None;
        for (line, closed) in self.polylines.iter().zip(&self.closed) {
            if *closed && best.map_or(true, |b| line.len() > b.len()) {
                best = Some(line);
            }
        }
        best.map(|line| {
            let mut line = line.clone();
            if signed_area(&line) < 0.0 {
                line.reverse();
            }
            line
        })
    }
}

fn signed_area(poly: &[Complex64]) -> f64 {
    let n = poly.len();
    0.5 * (0..n)
        .map(|k| {
            let (a, b) = (poly[k], poly[(k + 1) % n]);
            a.re * b.im - b.re * a.im
        })
        .sum::<f64>()
}

/// Samples `value_fn` and extracts the level `r`.
pub fn level_region<F>(value_fn: F, r: f64, grid: GridSpec) -> Result<ContourSet, ApproxError>
where
    F: Fn(Complex64) -> f64 + Sync,
{
    let samples = SampledGrid::sample(value_fn, grid)?;
    Ok(level_region_from_samples(&samples, r))
}

pub fn level_region_from_samples(samples: &SampledGrid, r: f64) -> ContourSet {
    let g = samples.grid;
    let (nx, ny) = (g.nx, g.ny);
    let h_edges = (nx - 1) * ny;
    let edge_h = |i: usize, j: usize| j * (nx - 1) + i;
    let edge_v = |i: usize, j: usize| h_edges + j * nx + i;
    let inside = |i: usize, j: usize| samples.at(i, j) > r;

    let crossing = |e: usize| -> Complex64 {
        let (i0, j0, i1, j1) = if e < h_edges {
            let (i, j) = (e % (nx - 1), e / (nx - 1));
            (i, j, i + 1, j)
        } else {
            let e = e - h_edges;
            let (i, j) = (e % nx, e / nx);
            (i, j, i, j + 1)
        };
        let (v0, v1) = (samples.at(i0, j0), samples.at(i1, j1));
        let t = if v0.is_finite() && v1.is_finite() {
            ((r - v0) / (v1 - v0)).clamp(0.0, 1.0)
        } else if v0.is_finite() {
            0.0
        } else if v1.is_finite() {
            1.0
        } else {
            0.5
        };
        let (p0, p1) = (g.point(i0, j0), g.point(i1, j1));
        p0 + (p1 - p0) * t
    };

    // segments as pairs of edge ids
    let mut segments: Vec<(usize, usize)> = Vec::new();
    for j in 0..ny - 1 {
        for i in 0..nx - 1 {
            let corners = [inside(i, j), inside(i + 1, j), inside(i + 1, j + 1), inside(i, j + 1)];
            let edges = [edge_h(i, j), edge_v(i + 1, j), edge_h(i, j + 1), edge_v(i, j)];
            // edge k joins corners k and k+1
            let crossed: Vec<usize> = (0..4).filter(|&k| corners[k] != corners[(k + 1) % 4]).collect();
            match crossed.len() {
                2 => segments.push((edges[crossed[0]], edges[crossed[1]])),
                4 => {
                    let vals = [
                        samples.at(i, j),
                        samples.at(i + 1, j),
                        samples.at(i + 1, j + 1),
                        samples.at(i, j + 1),
                    ];
                    let center = if vals.iter().all(|v| v.is_finite()) {
                        vals.iter().sum::<f64>() / 4.0 > r
                    } else {
                        vals.iter().any(|v| *v == f64::INFINITY)
                    };
                    // cut off the corners that disagree with the centre;
                    // corner k touches edges k-1 and k
                    for k in 0..4 {
                        if corners[k] != center {
                            segments.push((edges[(k + 3) % 4], edges[k]));
                        }
                    }
                }
                _ => {}
            }
        }
    }

    let component_count = samples.component_count(r);
    if segments.is_empty() {
        return ContourSet {
            level: r,
            polylines: Vec::new(),
            closed: Vec::new(),
            component_count,
            grid: g,
            empty: true,
        };
    }

    // each crossed edge borders at most two cells
    let n_edges = h_edges + nx * (ny - 1);
    let mut incident: Vec<[usize; 2]> = vec![[usize::MAX; 2]; n_edges];
    for (s, &(a, b)) in segments.iter().enumerate() {
        for e in [a, b] {
            let slot = &mut incident[e];
            if slot[0] == usize::MAX {
                slot[0] = s;
            } else {
                slot[1] = s;
            }
        }
    }
    let other = |e: usize, s: usize| -> Option<usize> {
        let [x, y] = incident[e];
        let o = if x == s { y } else { x };
        (o != usize::MAX && o != s).then_some(o)
    };
    let far_end = |s: usize, e: usize| -> usize {
        let (a, b) = segments[s];
        if a == e {
            b
        } else {
            a
        }
    };

    let mut used = vec![false; segments.len()];
    let mut polylines = Vec::new();
    let mut closed = Vec::new();
    for start in 0..segments.len() {
        if used[start] {
            continue;
        }
        used[start] = true;
        let (e0, e1) = segments[start];
        let mut forward = vec![e0, e1];
        let mut is_closed = false;
        let (mut s, mut e) = (start, e1);
        while let Some(next) = other(e, s) {
            if next == start {
                is_closed = true;
                break;
            }
            if used[next] {
                break;
            }
            used[next] = true;
            e = far_end(next, e);
            s = next;
            forward.push(e);
        }
        if is_closed {
            forward.pop(); // last edge repeats e0
        } else {
            let mut backward = Vec::new();
            let (mut s, mut e) = (start, e0);
            while let Some(next) = other(e, s) {
                if used[next] {
                    break;
                }
                used[next] = true;
                e = far_end(next, e);
                s = next;
                backward.push(e);
            }
            backward.reverse();
            backward.extend(forward);
            forward = backward;
        }
        polylines.push(forward.into_iter().map(crossing).collect());
        closed.push(is_closed);
    }

    ContourSet {
        level: r,
        polylines,
        closed,
        component_count,
        grid: g,
        empty: false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MergeLevel {
    /// Midpoint of the final bracket.
    pub level: f64,
    pub bracket: (f64, f64),
    /// Component counts at the lower and upper end of the bracket.
    pub counts: (usize, usize),
}

/// Bisection on `R` for the level where the component count of `{v > R}`
/// changes, down to a bracket of width `1e-4`.
pub fn find_merge_level(samples: &SampledGrid, r_lo: f64, r_hi: f64) -> Result<MergeLevel, ApproxError> {
    const WIDTH: f64 = 1e-4;
    if !(r_lo < r_hi) {
        return Err(ApproxError::BadParameter(format!("empty bracket [{r_lo}, {r_hi}]")));
    }
    let (c_lo, c_hi) = (samples.component_count(r_lo), samples.component_count(r_hi));
    if c_lo == c_hi {
        return Err(ApproxError::NoMerge { count: c_lo, r_lo, r_hi });
    }
    let (mut lo, mut hi) = (r_lo, r_hi);
    while hi - lo > WIDTH {
        let mid = 0.5 * (lo + hi);
        if samples.component_count(mid) == c_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(MergeLevel {
        level: 0.5 * (lo + hi),
        bracket: (lo, hi),
        counts: (samples.component_count(lo), samples.component_count(hi)),
    })
}

/// Golden-section minimum of `v` on the real segment `[a, b]`: the saddle
/// where two super-level lobes symmetric about the real axis join.
pub fn real_axis_saddle<F>(value_fn: F, a: f64, b: f64, tol: f64) -> (f64, f64)
where
    F: Fn(Complex64) -> f64,
{
    let f = |x: f64| value_fn(Complex64::new(x, 0.0));
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (a, b);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}
