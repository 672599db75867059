//! One function per experiment. Parameters are parsed and checked against the
//! module preconditions first; failures there are usage errors.

use std::f64::consts::{PI, TAU};
use std::fmt::Display;
use std::fs::File;
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use wpa_core::approx::{
    approximation_report, disk_level_value, level_region_from_samples, real_axis_saddle, GridSpec, RateEstimate,
    SampledGrid,
};
use wpa_core::equilibrium::{
    frostman_residuals, solve_equilibrium, weighted_leja, weighted_leja_cached, CellKind, EquilibriumOptions,
    WeightedCompact,
};
use wpa_core::hull2::{ball_image_residual, certify_outside, hessian_det_residual, BidiskSpec};
use wpa_core::lemniscate::{
    self, boundary_points, classify_with_tol, deficit, deficit_by_quadrature, extremal_norm, monomial_approximant,
    monomial_error, steepest_descent_plot, weighted_section_sup, zero_measure, zero_potential_deviation, Region,
};
use wpa_core::measures::{incomplete_level_value, SegmentGeometry};
use wpa_core::polycore::PrecisionContext;

use crate::svg::{emit_svg, Layer};
use crate::{CliError, Experiment, ExperimentConfig, RunContext};

type Outcome = Result<(Vec<String>, Value), CliError>;

fn num<E: Display>(e: E) -> CliError {
    CliError::Numerical(e.to_string())
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub(crate) fn dispatch(cfg: &ExperimentConfig, ctx: &RunContext) -> Outcome {
    match cfg.experiment {
        Experiment::Equilibrium => equilibrium(cfg, ctx),
        Experiment::Leja => leja(cfg, ctx),
        Experiment::Levelset => levelset(cfg, ctx),
        Experiment::Rate => rate(cfg, ctx),
        Experiment::SzegoDeficit => szego_deficit(cfg, ctx),
        Experiment::SzegoNorms => szego_norms(cfg, ctx),
        Experiment::SzegoZeros => szego_zeros(cfg, ctx),
        Experiment::Monomial => monomial(cfg, ctx),
        Experiment::HullCertify => hull_certify(cfg, ctx),
        Experiment::HullBall => hull_ball(cfg, ctx),
    }
}

/// Collects artifact names while writing them.
struct Artifacts<'a> {
    ctx: &'a RunContext,
    stem: &'static str,
    names: Vec<String>,
}

impl<'a> Artifacts<'a> {
    fn new(ctx: &'a RunContext, e: Experiment) -> Self {
        Self {
            ctx,
            stem: e.name(),
            names: Vec::new(),
        }
    }

    fn path(&mut self, suffix: &str) -> std::path::PathBuf {
        let name = format!("{}{suffix}", self.stem);
        let p = self.ctx.out_dir.join(&name);
        self.names.push(name);
        p
    }

    /// CSV with a header row; every value written with `Display`.
    fn csv(&mut self, suffix: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), CliError> {
        let path = self.path(suffix);
        let mut w = csv::Writer::from_writer(File::create(&path).map_err(|e| io_err(&path, e))?);
        w.write_record(header)?;
        for r in rows {
            w.write_record(&r)?;
        }
        w.flush()?;
        Ok(())
    }

    fn svg(&mut self, layers: &[Layer], title: &str) -> Result<(), CliError> {
        if !self.ctx.svg {
            return Ok(());
        }
        let path = self.path(".svg");
        emit_svg(layers, title, &path)
    }

    fn finish(self, summary: Value) -> Outcome {
        Ok((self.names, summary))
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn s<T: ToString>(x: T) -> String {
    x.to_string()
}

fn circle_points(center: Complex64, r: f64, m: usize) -> Vec<Complex64> {
    (0..m).map(|k| center + Complex64::from_polar(r, TAU * k as f64 / m as f64)).collect()
}

/// The right loop for plotting, closed through the crossing point.
fn loop_outline(m: usize) -> Result<Vec<Complex64>, CliError> {
    let mut pts = boundary_points(m).map_err(|e| usage(e.to_string()))?;
    pts.push(Complex64::new(-0.5, 0.0));
    Ok(pts)
}

fn segment_geometry(cfg: &ExperimentConfig) -> Result<SegmentGeometry, CliError> {
    SegmentGeometry::new(cfg.f64("c")?).map_err(|e| usage(format!("c: {e}")))
}

fn lemniscate_compact(m: usize) -> Result<WeightedCompact, CliError> {
    let pts = boundary_points(m).map_err(|e| usage(e.to_string()))?;
    WeightedCompact::closed_curve(pts, "lemniscate right loop")
        .and_then(|k| k.with_field(lemniscate::field))
        .map_err(num)
}

fn equilibrium(cfg: &ExperimentConfig, ctx: &RunContext) -> Outcome {
    let case = cfg.choice("case", &["circle", "segment", "lemniscate", "disk"])?;
    let m = cfg.usize_at_least("m", if case == "disk" { 48 } else { 8 })?;
    let opts = EquilibriumOptions {
        max_iters: cfg.usize_at_least("max_iters", 1)?,
        gap_tol: cfg.positive("gap_tol")?,
        record_history: false,
    };
    let (k, outline, closed) = match case {
        "circle" => {
            let r = cfg.positive("r")?;
            (WeightedCompact::circle(Complex64::new(0.0, 0.0), r, m).map_err(num)?, None, true)
        }
        "segment" => {
            let geom = segment_geometry(cfg)?;
            let k = WeightedCompact::segment(geom.c(), 1.0, m)
                .and_then(|k| k.with_weight(|z| z.norm()))
                .map_err(num)?;
            (k, None, false)
        }
        "lemniscate" => (lemniscate_compact(m)?, None, true),
        _ => {
            let (a, r) = (cfg.positive("a")?, cfg.positive("r")?);
            if r >= a {
                return Err(usage(format!("disk case needs r < a, got a = {a}, r = {r}")));
            }
            let h = r * (1.5 * PI / m as f64).sqrt();
            let center = Complex64::new(a, 0.0);
            let k = WeightedCompact::disk(center, r, m / 3, h)
                .and_then(|k| k.with_weight(|z| z.norm()))
                .map_err(num)?;
            (k, Some(circle_points(center, r, 256)), true)
        }
    };
    let sol = solve_equilibrium(&k, &opts).map_err(num)?;
    let fr = frostman_residuals(&sol, &k);
    let floor = sol.mass_floor();
    let interior_mass: f64 = sol
        .measure
        .masses()
        .iter()
        .zip(k.cells())
        .filter(|(_, c)| **c == CellKind::Area)
        .map(|(m, _)| m)
        .sum::<f64>()
        + 0.0; // an empty sum is -0.0

    let mut art = Artifacts::new(ctx, cfg.experiment);
    art.csv(
        ".csv",
        &["re", "im", "mass", "u_plus_q"],
        sol.measure
            .points()
            .iter()
            .zip(sol.measure.masses())
            .zip(sol.node_potentials.iter().zip(k.q_values()))
            .map(|((z, m), (u, q))| vec![s(z.re), s(z.im), s(m), s(u + q)]),
    )?;
    let outline = outline.unwrap_or_else(|| k.nodes().to_vec());
    art.svg(
        &[
            Layer::Polyline {
                label: "K".into(),
                paths: vec![outline],
                closed,
            },
            Layer::Scatter {
                label: format!("support (mass > {floor:.1e})"),
                points: sol.support(floor),
            },
        ],
        &format!("weighted equilibrium: {case}"),
    )?;
    art.finish(json!({
        "case": case,
        "nodes": k.len(),
        "f_const": sol.f_const,
        "v_w": sol.v_w,
        "duality_gap": sol.duality_gap,
        "iterations": sol.iterations,
        "converged": sol.converged,
        "frostman_lower_violation": fr.lower_violation,
        "frostman_upper_violation": fr.upper_violation,
        "support_size": sol.support(floor).len(),
        "interior_mass": interior_mass,
    }))
}

fn leja(cfg: &ExperimentConfig, ctx: &RunContext) -> Outcome {
    let case = cfg.choice("case", &["circle", "lemniscate", "segment"])?;
    let m = cfg.usize_at_least("m", 8)?;
    let n = cfg.usize_at_least("n", 1)?;
    if n > m {
        return Err(usage(format!("n = {n} exceeds the {m} candidate nodes")));
    }
    let (k, reference, closed) = match case {
        "circle" => (WeightedCompact::circle(Complex64::new(0.0, 0.0), 1.0, m).map_err(num)?, Some(1.0), true),
        "lemniscate" => (lemniscate_compact(m)?, Some(0.25), true),
        _ => {
            let geom = segment_geometry(cfg)?;
            let k = WeightedCompact::segment(geom.c(), 1.0, m)
                .and_then(|k| k.with_weight(|z| z.norm()))
                .map_err(num)?;
            (k, None, false)
        }
    };
    let seq = match &ctx.cache_dir {
        Some(dir) => weighted_leja_cached(&k, n, dir),
        None => weighted_leja(&k, n),
    }
    .map_err(num)?;

    let mut art = Artifacts::new(ctx, cfg.experiment);
    art.csv(
        ".csv",
        &["index", "re", "im", "norm_root"],
        seq.points
            .iter()
            .enumerate()
            .map(|(i, z)| vec![s(i + 1), s(z.re), s(z.im), s(seq.norm_root(i + 1))]),
    )?;
    art.svg(
        &[
            Layer::Polyline {
                label: "K".into(),
                paths: vec![k.nodes().to_vec()],
                closed,
            },
            Layer::Scatter {
                label: format!("weighted Leja points (n = {n})"),
                points: seq.points.clone(),
            },
        ],
        &format!("weighted Leja sequence: {case}"),
    )?;
    art.finish(json!({
        "case": case,
        "n": n,
        "norm_root": seq.norm_root(n),
        "reference": reference,
        "cached": ctx.cache_dir.is_some(),
    }))
}

fn levelset(cfg: &ExperimentConfig, ctx: &RunContext) -> Outcome {
    let geom = segment_geometry(cfg)?;
    if geom.c() <= 0.25 {
        return Err(usage(format!("the level function needs 1/4 < c < 1, got c = {}", geom.c())));
    }
    let level = cfg.f64("R")?;
    let n = cfg.usize_at_least("grid", GridSpec::MIN_RESOLUTION)?;
    let grid = GridSpec::new((cfg.f64("x_min")?, cfg.f64("x_max")?), (cfg.f64("y_min")?, cfg.f64("y_max")?), n, n)
        .map_err(|e| usage(e.to_string()))?;
    let v = |z: Complex64| incomplete_level_value(z, &geom);
    let samples = SampledGrid::sample(v, grid).map_err(num)?;
    let contour = level_region_from_samples(&samples, level);
    let (saddle_x, saddle_level) = real_axis_saddle(v, 1e-3 * geom.c(), geom.c(), 1e-12);

    let mut art = Artifacts::new(ctx, cfg.experiment);
    let path = art.path(".csv");
    contour
        .write_csv(File::create(&path).map_err(|e| io_err(&path, e))?)
        .map_err(num)?;
    // keep the pole at 0 from flattening the colour scale
    let shown: Vec<f64> = samples.values.iter().map(|x| x.clamp(level - 1.0, 1.0)).collect();
    art.svg(
        &[
            Layer::Heat {
                label: "g(z,0) - 2g(z,∞)".into(),
                grid,
                values: shown,
            },
            Layer::Polyline {
                label: format!("level R = {level}"),
                paths: contour
                    .polylines
                    .iter()
                    .zip(&contour.closed)
                    .map(|(l, c)| {
                        let mut l = l.clone();
                        if *c {
                            l.push(l[0]);
                        }
                        l
                    })
                    .collect(),
                closed: false,
            },
            Layer::Polyline {
                label: format!("K = [{}, 1]", geom.c()),
                paths: vec![vec![Complex64::new(geom.c(), 0.0), Complex64::new(1.0, 0.0)]],
                closed: false,
            },
        ],
        &format!("level set of the segment example, R = {level}"),
    )?;
    art.finish(json!({
        "level": level,
        "component_count": contour.component_count,
        "polylines": contour.polylines.len(),
        "empty": contour.empty,
        "saddle_x": saddle_x,
        "saddle_level": saddle_level,
    }))
}

fn rate(cfg: &ExperimentConfig, ctx: &RunContext) -> Outcome {
    let case = cfg.choice("case", &["disk", "weighted"])?;
    let m = cfg.usize_at_least("m", 16)?;
    let (lo, hi, step) = (cfg.usize("deg_min")?, cfg.usize("deg_max")?, cfg.usize_at_least("deg_step", 1)?);
    let degrees: Vec<usize> = (lo..=hi).step_by(step).collect();
    if degrees.len() < 5 {
        return Err(usage(format!("need at least 5 degrees, got {}", degrees.len())));
    }
    if hi >= m {
        return Err(usage(format!("deg_max = {hi} needs more than m = {m} nodes")));
    }
    let (center, radius) = match case {
        "disk" => (Complex64::new(0.0, 0.0), 1.0),
        _ => (Complex64::new(-0.1, 0.0), 0.15),
    };
    // evaluation points sit between the candidate nodes
    let eval: Vec<Complex64> = (0..2 * m)
        .map(|k| center + Complex64::from_polar(radius, TAU * (k as f64 + 0.5) / (2 * m) as f64))
        .collect();
    let (report, reference) = if case == "disk" {
        let k = WeightedCompact::circle(center, radius, m).map_err(num)?;
        let seq = leja_for(&k, hi + 1, ctx)?;
        let f = |z: Complex64| 1.0 / (2.0 - z);
        let w = |_: Complex64| Complex64::new(1.0, 0.0);
        (approximation_report(f, w, &seq, &degrees, &eval).map_err(num)?, 0.5)
    } else {
        let k = WeightedCompact::circle(center, radius, m)
            .and_then(|k| k.with_weight(|z| (1.0 + z).norm()))
            .map_err(num)?;
        let seq = leja_for(&k, hi + 1, ctx)?;
        let f = |_: Complex64| Complex64::new(1.0, 0.0);
        let w = |z: Complex64| 1.0 + z;
        let (_, r0) = real_axis_saddle(
            |z| disk_level_value(z, center, radius, Complex64::new(-1.0, 0.0)),
            -1.0 + 1e-6,
            center.re - radius,
            1e-12,
        );
        (approximation_report(f, w, &seq, &degrees, &eval).map_err(num)?, r0.exp())
    };

    let mut art = Artifacts::new(ctx, cfg.experiment);
    art.csv(
        ".csv",
        &["degree", "error"],
        report.degrees.iter().zip(&report.errors).map(|(d, e)| vec![s(d), s(e)]),
    )?;
    let rate = match report.rate_estimate {
        RateEstimate::Geometric(r) => json!(r),
        RateEstimate::ExactRepresentation => json!("exact_representation"),
    };
    art.finish(json!({ "case": case, "rate": rate, "reference_rate": reference }))
}

fn leja_for(k: &WeightedCompact, n: usize, ctx: &RunContext) -> Result<wpa_core::equilibrium::FeketeSequence, CliError> {
    match &ctx.cache_dir {
        Some(dir) => weighted_leja_cached(k, n, dir),
        None => weighted_leja(k, n),
    }
    .map_err(num)
}

fn not_crossing(z: Complex64) -> Result<Complex64, CliError> {
    if z == Complex64::new(-0.5, 0.0) {
        Err(usage("z = -1/2 is the crossing point of the lemniscate"))
    } else {
        Ok(z)
    }
}

fn szego_deficit(cfg: &ExperimentConfig, ctx: &RunContext) -> Outcome {
    let ns = cfg.usize_list("ns", 1)?;
    let z = not_crossing(cfg.complex("z")?)?;
    let quad = cfg.usize("quad_nodes")?;
    if quad == 1 {
        return Err(usage("quad_nodes must be 0 (off) or at least 2"));
    }
    let n_grid = cfg.usize_at_least("grid", GridSpec::MIN_RESOLUTION)?;

    let mut rows = Vec::with_capacity(ns.len());
    let mut table = Vec::with_capacity(ns.len());
    for &n in &ns {
        let d = deficit(n, z, &PrecisionContext::for_section_order(n)).map_err(num)?;
        let ratio = d.ratio.map(|r| (r - 1.0).norm());
        let quad_diff = if quad > 0 {
            let q = deficit_by_quadrature(n, z, quad).map_err(num)?;
            Some((q - d.deficit).norm() / d.deficit.norm())
        } else {
            None
        };
        let mut row = vec![
            s(n),
            s(z.re),
            s(z.im),
            s(d.deficit.re),
            s(d.deficit.im),
            s(d.rhs.re),
            s(d.rhs.im),
            ratio.map_or_else(String::new, s),
        ];
        if quad > 0 {
            row.push(quad_diff.map_or_else(String::new, s));
        }
        rows.push(row);
        table.push(json!({ "n": n, "abs_ratio_minus_1": ratio, "quadrature_rel_diff": quad_diff }));
    }
    let mut header = vec!["n", "z_re", "z_im", "deficit_re", "deficit_im", "rhs_re", "rhs_im", "abs_ratio_minus_1"];
    if quad > 0 {
        header.push("quadrature_rel_diff");
    }

    let mut art = Artifacts::new(ctx, cfg.experiment);
    art.csv(".csv", &header, rows)?;
    let grid = GridSpec::new((-2.5, 1.5), (-2.0, 2.0), n_grid, n_grid).map_err(|e| usage(e.to_string()))?;
    let plot = steepest_descent_plot(z, grid).map_err(num)?;
    let mut layers: Vec<Layer> = plot
        .contours
        .iter()
        .zip(["0.8", "1", "1.25"])
        .map(|(c, f)| Layer::Polyline {
            label: format!("|g(t)| = {f} × {:.4}", plot.critical_level),
            paths: c
                .polylines
                .iter()
                .zip(&c.closed)
                .map(|(l, closed)| {
                    let mut l = l.clone();
                    if *closed {
                        l.push(l[0]);
                    }
                    l
                })
                .collect(),
            closed: false,
        })
        .collect();
    layers.push(Layer::Scatter {
        label: format!("t0 = 2z + 1 = {:.4}", plot.critical_point),
        points: vec![plot.critical_point],
    });
    art.svg(&layers, &format!("level lines of |(z - t)/(1 + t)^2| for z = {z}"))?;
    art.finish(json!({
        "z": [z.re, z.im],
        "rows": table,
        "critical_point": [plot.critical_point.re, plot.critical_point.im],
        "critical_level": plot.critical_level,
    }))
}

fn szego_norms(cfg: &ExperimentConfig, ctx: &RunContext) -> Outcome {
    let ns = cfg.usize_list("ns", 1)?;
    let m = cfg.usize_at_least("m", 8)?;
    let excl = cfg.positive("exclusion")?;
    let mut rows = Vec::new();
    let mut argmax = Vec::new();
    let mut norms = Vec::new();
    for &n in &ns {
        let ctx_mp = PrecisionContext::for_section_order(n);
        let norm = extremal_norm(n, m, excl, &ctx_mp).map_err(num)?;
        let (sup, at) = weighted_section_sup(n, m, excl, &ctx_mp).map_err(num)?;
        rows.push(vec![s(n), s(norm), s(sup), s(at.re), s(at.im)]);
        argmax.push(at);
        norms.push(json!({ "n": n, "norm": norm }));
    }
    let mut art = Artifacts::new(ctx, cfg.experiment);
    art.csv(".csv", &["n", "extremal_norm", "weighted_sup", "argmax_re", "argmax_im"], rows)?;
    art.svg(
        &[
            Layer::Polyline {
                label: "right loop".into(),
                paths: vec![loop_outline(m)?],
                closed: true,
            },
            Layer::Polyline {
                label: format!("excluded disk, radius {excl}"),
                paths: vec![circle_points(Complex64::new(-0.5, 0.0), excl, 128)],
                closed: true,
            },
            Layer::Scatter {
                label: "argmax |(1+z)^n s_n|".into(),
                points: argmax,
            },
        ],
        "extremal norms of the weighted sections",
    )?;
    art.finish(json!({ "norms": norms, "limit": 0.25, "exclusion": excl }))
}

fn szego_zeros(cfg: &ExperimentConfig, ctx: &RunContext) -> Outcome {
    let n = cfg.usize_at_least("n", 1)?;
    let m = cfg.usize_at_least("m", 8)?;
    let tol = cfg.positive("tol")?;
    let nu = zero_measure(n, tol).map_err(num)?;
    let boundary = boundary_points(m).map_err(num)?;
    let inside = nu
        .points()
        .iter()
        .filter(|z| classify_with_tol(**z, 1e-6) == Region::InsideRight)
        .count();
    let probes = [Complex64::new(2.0, 0.0), Complex64::new(1.0, 1.0), Complex64::new(-3.0, 0.0)];
    let deviation = probes
        .iter()
        .map(|&z| zero_potential_deviation(&nu, z))
        .fold(0.0, f64::max);

    let mut art = Artifacts::new(ctx, cfg.experiment);
    art.csv(".csv", &["re", "im"], nu.points().iter().map(|z| vec![s(z.re), s(z.im)]))?;
    art.csv("-boundary.csv", &["re", "im"], boundary.iter().map(|z| vec![s(z.re), s(z.im)]))?;
    art.svg(
        &[
            Layer::Polyline {
                label: "right loop of |z(z+1)| = 1/4".into(),
                paths: vec![loop_outline(m)?],
                closed: true,
            },
            Layer::Scatter {
                label: format!("zeros of s_{n}"),
                points: nu.points().to_vec(),
            },
        ],
        &format!("the {n} zeros of s_{n}"),
    )?;
    let mean = nu.mean();
    art.finish(json!({
        "n": n,
        "zeros": nu.len(),
        "mean": [mean.re, mean.im],
        "inside_right": inside,
        "max_potential_deviation": deviation,
    }))
}

fn monomial(cfg: &ExperimentConfig, ctx: &RunContext) -> Outcome {
    let k = cfg.usize("k")?;
    let n = cfg.usize_at_least("n", 1)?;
    if k > n {
        return Err(usage(format!("z^{k} needs n ≥ {k}, got n = {n}")));
    }
    let center = cfg.complex("center")?;
    let radius = cfg.positive("radius")?;
    let m = cfg.usize_at_least("m", 8)?;
    let p = monomial_approximant(k, n).map_err(num)?;
    let circle = circle_points(center, radius, m);
    let err = monomial_error(k, n, &p, &circle, &PrecisionContext::for_section_order(n)).map_err(num)?;

    let mut art = Artifacts::new(ctx, cfg.experiment);
    art.csv(
        ".csv",
        &["power", "re", "im"],
        p.coeffs().iter().enumerate().map(|(j, c)| vec![s(j), s(c.re), s(c.im)]),
    )?;
    art.svg(
        &[
            Layer::Polyline {
                label: "right loop".into(),
                paths: vec![loop_outline(256)?],
                closed: true,
            },
            Layer::Polyline {
                label: format!("K: |z - {center}| = {radius}"),
                paths: vec![circle],
                closed: true,
            },
        ],
        &format!("approximating z^{k} by (1+z)^{n} P"),
    )?;
    art.finish(json!({ "k": k, "n": n, "degree": p.degree(), "sup_error": err }))
}

fn hull_certify(cfg: &ExperimentConfig, ctx: &RunContext) -> Outcome {
    let spec = BidiskSpec::new(cfg.complex("a1")?, cfg.positive("r1")?, cfg.complex("a2")?, cfg.positive("r2")?)
        .map_err(|e| usage(e.to_string()))?;
    let (w1o, w2o) = (cfg.complex("w1o")?, cfg.complex("w2o")?);
    let grid = cfg.usize_at_least("grid", 4)?;
    let cert = certify_outside(spec, w1o, w2o, grid).map_err(num)?;
    let refined = cert.reverify(2 * grid);

    let mut art = Artifacts::new(ctx, cfg.experiment);
    let path = art.path(".json");
    std::fs::write(&path, cert.to_json()).map_err(|e| io_err(&path, e))?;
    art.csv(
        ".csv",
        &["case", "q_at_target", "grid_sup", "margin", "grid_m", "refined_margin"],
        [vec![
            s(serde_json::to_value(cert.case_tag).unwrap().as_str().unwrap()),
            s(cert.q_at_target),
            s(cert.grid_sup),
            s(cert.margin),
            s(cert.grid_m),
            s(refined),
        ]],
    )?;
    art.finish(json!({
        "case": cert.case_tag,
        "margin": cert.margin,
        "refined_margin": refined,
        "grid_m": grid,
    }))
}

fn hull_ball(cfg: &ExperimentConfig, ctx: &RunContext) -> Outcome {
    let (a1, a2) = (cfg.complex("a1")?, cfg.complex("a2")?);
    let r2 = cfg.f64("r2")?;
    if !(r2 >= 0.0 && r2 < a2.norm()) {
        return Err(usage(format!("need 0 ≤ r2 < |a2|, got r2 = {r2}")));
    }
    let samples = cfg.usize_at_least("samples", 1)?;
    let points = cfg.usize_at_least("points", 1)?;
    let ball = ball_image_residual(a1, a2, r2, samples, cfg.seed).map_err(num)?;
    // Hessian test points uniform in the unit bidisk, on a separate stream
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut disk = || Complex64::from_polar(rng.gen::<f64>().sqrt(), TAU * rng.gen::<f64>());
    let pts: Vec<(Complex64, Complex64)> = (0..points).map(|_| (disk(), disk())).collect();
    let hess = hessian_det_residual(a1, a2, r2, &pts);

    let mut art = Artifacts::new(ctx, cfg.experiment);
    art.csv(
        ".csv",
        &["check", "count", "residual"],
        [
            vec![s("ball_image"), s(samples), s(ball)],
            vec![s("hessian_det"), s(points), s(hess)],
        ],
    )?;
    art.finish(json!({ "ball_image_residual": ball, "hessian_det_residual": hess }))
}
