//! The lemniscate `|z(z+1)| = 1/4` and the weight `W(z) = 1 + z`: closed-form
//! equilibrium potential of the right loop, Taylor-section deficits, extremal
//! norms, zero distributions and the monomial construction.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::approx::{level_region, ApproxError, ContourSet, GridSpec};
use crate::measures::{log_potential, DiscreteMeasure};
use crate::polycore::{
    ln_abs_int, remainder_integral, roots, taylor_section, ComplexPolynomial, MpComplex, PolyError,
    PrecisionContext,
};

#[derive(Debug, Error)]
pub enum LemniscateError {
    #[error("z = -1/2 is the crossing point, where the deficit formula is singular")]
    CrossingPoint,
    #[error("precision of {bits} bits is below the floor of {needed} for order {n}")]
    PrecisionTooLow { bits: usize, needed: usize, n: usize },
    #[error("every boundary point lies inside the exclusion disk")]
    AllExcluded,
    #[error("{0}")]
    BadParameter(String),
    #[error("z^{k} needs at least {k} units of weight exponent, got n = {n}")]
    DegreeBudget { k: usize, n: usize },
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Approx(#[from] ApproxError),
}

/// `𝓛 = {|z(z+1)| = 1/4}`, a figure eight crossing itself at `-1/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LemniscateGeometry {
    pub level: f64,
    pub crossing_point: Complex64,
}

impl Default for LemniscateGeometry {
    fn default() -> Self {
        Self {
            level: 0.25,
            crossing_point: Complex64::new(-0.5, 0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    /// Inside the right loop `𝓛₊`, around 0.
    InsideRight,
    /// Inside the left loop `𝓛₋`, around -1.
    InsideLeft,
    OnCurve,
    Outside,
}

pub const ON_CURVE_TOL: f64 = 1e-12;

pub fn classify(z: Complex64) -> Region {
    classify_with_tol(z, ON_CURVE_TOL)
}

/// As [`classify`], with `| |z(z+1)| - 1/4 | ≤ tol` counted as on the curve.
pub fn classify_with_tol(z: Complex64, tol: f64) -> Region {
    let level = (z * (z + 1.0)).norm();
    if (level - 0.25).abs() <= tol {
        Region::OnCurve
    } else if level > 0.25 {
        Region::Outside
    } else if z.re > -0.5 {
        Region::InsideRight
    } else {
        Region::InsideLeft
    }
}

/// `Q(z) = -log|1 + z|`.
pub fn field(z: Complex64) -> f64 {
    -(1.0 + z).norm().ln()
}

/// Point of `𝓛₊` with `4z(z+1) = e^{iθ}`, `θ ∈ [-π, π]`:
/// `z = (-1 + sqrt(1 + e^{iθ}))/2`, principal root.
pub fn boundary_point(theta: f64) -> Complex64 {
    // sqrt(1 + e^{iθ}) = sqrt(2 cos(θ/2)) e^{iθ/4}, free of cancellation near θ = ±π
    let r = (2.0 * (0.5 * theta).cos()).max(0.0).sqrt();
    (Complex64::from_polar(r, 0.25 * theta) - 1.0) * 0.5
}

/// `m` points of `𝓛₊` at `θ_k = -π + 2π(k + 1/2)/m`; the closing gap passes
/// through `-1/2`.
pub fn boundary_points(m: usize) -> Result<Vec<Complex64>, LemniscateError> {
    if m < 8 {
        return Err(LemniscateError::BadParameter(format!("need m ≥ 8 boundary points, got {m}")));
    }
    Ok((0..m)
        .map(|k| boundary_point(-PI + 2.0 * PI * (k as f64 + 0.5) / m as f64))
        .collect())
}

/// `U^{δ̂₀}(z)`: `log 4 + log|1+z|` on the closed right loop, `-log|z|` elsewhere.
pub fn equilibrium_potential(z: Complex64) -> f64 {
    match classify(z) {
        Region::InsideRight => 2.0 * LN_2 + (1.0 + z).norm().ln(),
        Region::OnCurve if z.re >= -0.5 => 2.0 * LN_2 + (1.0 + z).norm().ln(),
        _ => -z.norm().ln(),
    }
}

/// `1 - (1+z)^n s_n(z)` against the main term of its asymptotics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeficitSample {
    pub n: usize,
    pub z: Complex64,
    pub deficit: Complex64,
    /// `(-1)^{n+1} z (4z(1+z))^n / (sqrt(nπ)(2z+1))`.
    pub rhs: Complex64,
    /// `deficit / rhs`, formed before rounding either side to `f64`.
    pub ratio: Option<Complex64>,
}

fn check_precision(n: usize, ctx: &PrecisionContext) -> Result<(), LemniscateError> {
    let needed = PrecisionContext::for_section_order(n).significand_bits();
    if ctx.significand_bits() < needed {
        return Err(LemniscateError::PrecisionTooLow {
            bits: ctx.significand_bits(),
            needed,
            n,
        });
    }
    Ok(())
}

/// `(1+z)^n s_n(z)` at the working precision.
fn weighted_section_mp(s: &ComplexPolynomial, n: usize, z: Complex64, ctx: &PrecisionContext) -> MpComplex {
    let zm = ctx.complex(z);
    let w = ctx.one().add(&zm).powu(n, ctx);
    w.mul(&s.eval_mp(&zm, ctx))
}

pub fn deficit(n: usize, z: Complex64, ctx: &PrecisionContext) -> Result<DeficitSample, LemniscateError> {
    check_precision(n, ctx)?;
    if z == Complex64::new(-0.5, 0.0) {
        return Err(LemniscateError::CrossingPoint);
    }
    if n == 0 {
        return Err(LemniscateError::BadParameter("order n must be at least 1".into()));
    }
    let s = taylor_section(n);
    let def = ctx.one().sub(&weighted_section_mp(&s, n, z, ctx));
    let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
    let prefactor = sign * z / ((n as f64 * PI).sqrt() * (2.0 * z + 1.0));
    let rhs = ctx.complex(4.0 * z * (1.0 + z)).powu(n, ctx).mul(&ctx.complex(prefactor));
    let ratio = def.div(&rhs).map(|r| r.to_c64());
    Ok(DeficitSample {
        n,
        z,
        deficit: def.to_c64(),
        rhs: rhs.to_c64(),
        ratio,
    })
}

/// Independent route to the deficit: `(1+z)^n` times the integral remainder.
pub fn deficit_by_quadrature(n: usize, z: Complex64, quad_nodes: usize) -> Result<Complex64, LemniscateError> {
    Ok((1.0 + z).powu(n as u32) * remainder_integral(n, z, quad_nodes)?)
}

/// `|(1+z)^n s_n(z)|`.
pub fn weighted_section_modulus(n: usize, z: Complex64, ctx: &PrecisionContext) -> Result<f64, LemniscateError> {
    check_precision(n, ctx)?;
    Ok(weighted_section_mp(&taylor_section(n), n, z, ctx).to_c64().norm())
}

/// `max |(1+z)^n s_n(z)|` over `m` points of `𝓛₊` outside the disk of radius
/// `exclusion_radius` about `-1/2`, with the maximizing point.
pub fn weighted_section_sup(
    n: usize,
    m_boundary: usize,
    exclusion_radius: f64,
    ctx: &PrecisionContext,
) -> Result<(f64, Complex64), LemniscateError> {
    check_precision(n, ctx)?;
    if !(exclusion_radius > 0.0) {
        return Err(LemniscateError::BadParameter(format!(
            "exclusion radius must be positive, got {exclusion_radius}"
        )));
    }
    let pts: Vec<Complex64> = boundary_points(m_boundary)?
        .into_iter()
        .filter(|z| (z + 0.5).norm() >= exclusion_radius)
        .collect();
    if pts.is_empty() {
        return Err(LemniscateError::AllExcluded);
    }
    let s = taylor_section(n);
    let best = pts
        .par_iter()
        .map(|&z| (weighted_section_mp(&s, n, z, ctx).to_c64().norm(), z))
        .reduce(
            || (f64::NEG_INFINITY, Complex64::new(0.0, 0.0)),
            |a, b| if b.0 > a.0 { b } else { a },
        );
    Ok(best)
}

/// `(‖(1+z)^n s̃_n‖*_{𝓛₊})^{1/n}` with `s̃_n` the monic section; the essential
/// sup excises a disk about `-1/2`.
pub fn extremal_norm(
    n: usize,
    m_boundary: usize,
    exclusion_radius: f64,
    ctx: &PrecisionContext,
) -> Result<f64, LemniscateError> {
    if n == 0 {
        return Err(LemniscateError::BadParameter("order n must be at least 1".into()));
    }
    let (sup, _) = weighted_section_sup(n, m_boundary, exclusion_radius, ctx)?;
    let s = taylor_section(n);
    let lead = s.exact().expect("exact section").numerators.last().unwrap();
    Ok(((sup.ln() - ln_abs_int(lead)) / n as f64).exp())
}

/// Normalized counting measure of the zeros of `s_n`.
pub fn zero_measure(n: usize, tol: f64) -> Result<DiscreteMeasure, LemniscateError> {
    if n == 0 {
        return Err(LemniscateError::BadParameter("order n must be at least 1".into()));
    }
    let zs = roots(&taylor_section(n), tol)?;
    DiscreteMeasure::uniform(zs).map_err(|e| LemniscateError::BadParameter(e.to_string()))
}

/// `(1/n) log|s̃_n(z)| = -U^{ν_n}(z)` for the zero measure `ν_n`.
pub fn normalized_log_modulus(nu: &DiscreteMeasure, z: Complex64) -> f64 {
    -log_potential(nu, z)
}

/// `|U^{ν_n}(z) - U^{δ̂₀}(z)|`; outside the closed right loop this is
/// `|(1/n) log|s̃_n(z)| - log|z||`.
pub fn zero_potential_deviation(nu: &DiscreteMeasure, z: Complex64) -> f64 {
    (log_potential(nu, z) - equilibrium_potential(z)).abs()
}

/// `P` with `(1+z)^n P ≈ z^k` on compacts of `Ḡ \ {-1/2}`.
///
/// `1 ≈ W^m s_m` and `W ≈ W^m s_{m-1}`, so `z = W - 1 ≈ W^m (s_{m-1} - s_m)`;
/// `z^k` multiplies `k` such factors whose exponents `m_i` add up to `n`.
pub fn monomial_approximant(k: usize, n: usize) -> Result<ComplexPolynomial, LemniscateError> {
    if k == 0 {
        return Ok(taylor_section(n));
    }
    if k > n {
        return Err(LemniscateError::DegreeBudget { k, n });
    }
    let factor = |m: usize| taylor_section(m - 1).sub(&taylor_section(m));
    let (base, extra) = (n / k, n % k);
    let mut p = factor(base + usize::from(extra > 0));
    for i in 1..k {
        p = p.mul(&factor(base + usize::from(i < extra)));
    }
    Ok(p)
}

/// `max |z^k - (1+z)^n P(z)|` over the given points.
pub fn monomial_error(
    k: usize,
    n: usize,
    p: &ComplexPolynomial,
    points: &[Complex64],
    ctx: &PrecisionContext,
) -> Result<f64, LemniscateError> {
    check_precision(n, ctx)?;
    Ok(points
        .par_iter()
        .map(|&z| {
            let zm = ctx.complex(z);
            let approx = ctx.one().add(&zm).powu(n, ctx).mul(&p.eval_mp(&zm, ctx));
            zm.powu(k, ctx).sub(&approx).to_c64().norm()
        })
        .reduce(|| 0.0, f64::max))
}

/// Level lines of `|g(t)|`, `g(t) = (z - t)/(1 + t)^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteepestDescentPlot {
    pub z: Complex64,
    /// `t₀ = 2z + 1`.
    pub critical_point: Complex64,
    /// `|g(t₀)| = 1/(4|z+1|)`.
    pub critical_level: f64,
    /// Contours at `0.8`, `1` and `1.25` times the critical level.
    pub contours: Vec<ContourSet>,
}

pub fn steepest_descent_plot(z: Complex64, grid: GridSpec) -> Result<SteepestDescentPlot, LemniscateError> {
    if z == Complex64::new(-0.5, 0.0) {
        return Err(LemniscateError::CrossingPoint);
    }
    let critical_point = 2.0 * z + 1.0;
    let critical_level = 1.0 / (4.0 * (z + 1.0).norm());
    let g = move |t: Complex64| ((z - t) / ((1.0 + t) * (1.0 + t))).norm();
    let contours = [0.8, 1.0, 1.25]
        .iter()
        .map(|f| level_region(g, f * critical_level, grid))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SteepestDescentPlot {
        z,
        critical_point,
        critical_level,
        contours,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn classification() {
        assert_eq!(classify(c(0.0, 0.0)), Region::InsideRight);
        assert_eq!(classify(c(-0.5, 0.0)), Region::OnCurve);
        assert_eq!(classify(c(-1.0, 0.0)), Region::InsideLeft);
        assert_eq!(classify(c(2.0, 0.0)), Region::Outside);
    }

    #[test]
    fn boundary_parametrization() {
        let right = boundary_point(0.0);
        assert!((right.re - (2f64.sqrt() - 1.0) / 2.0).abs() < 1e-7 && right.im == 0.0);
        // cos(π/2) rounds to 6e-17, whose square root is 1e-8
        assert!((boundary_point(PI) - c(-0.5, 0.0)).norm() < 1e-7);
        let pts = boundary_points(256).unwrap();
        assert!(pts.iter().all(|&z| classify(z) == Region::OnCurve && z.re >= -0.5));
        assert!(boundary_points(7).is_err());
    }

    #[test]
    fn potential_branches() {
        assert!((equilibrium_potential(c(0.0, 0.0)) - 4f64.ln()).abs() < 1e-15);
        assert!((equilibrium_potential(c(2.0, 0.0)) + 2f64.ln()).abs() < 1e-15);
        for z in boundary_points(256).unwrap() {
            let inner = 2.0 * LN_2 + (1.0 + z).norm().ln();
            assert!((inner + z.norm().ln()).abs() < 1e-10);
        }
    }

    #[test]
    fn deficit_examples() {
        let ctx = PrecisionContext::for_section_order(100);
        for n in [1, 7, 100] {
            let d = deficit(n, c(0.0, 0.0), &ctx).unwrap();
            assert_eq!(d.deficit, c(0.0, 0.0));
        }
        let d = deficit(100, c(-0.4, 0.0), &ctx).unwrap();
        let expected = 2.0 / (100.0 * PI).sqrt() * 0.96f64.powi(100);
        assert!((d.rhs.norm() - expected).abs() < 1e-15);
        assert!((d.rhs.norm() - 1.90e-3).abs() < 1e-5);
        assert!(matches!(
            deficit(100, c(-0.5, 0.0), &ctx),
            Err(LemniscateError::CrossingPoint)
        ));
        assert!(matches!(
            deficit(101, c(-0.4, 0.0), &ctx),
            Err(LemniscateError::PrecisionTooLow { .. })
        ));
    }

    #[test]
    fn deficit_matches_quadrature_at_minus_point_four() {
        let ctx = PrecisionContext::for_section_order(40);
        let z = c(-0.4, 0.0);
        let direct = deficit(40, z, &ctx).unwrap().deficit;
        let quad = deficit_by_quadrature(40, z, 128).unwrap();
        assert!((direct - quad).norm() <= 1e-10 * direct.norm());
    }

    #[test]
    fn smoke_extremal_norm_n1() {
        let ctx = PrecisionContext::for_section_order(1);
        let v = extremal_norm(1, 64, 0.05, &ctx).unwrap();
        assert!(v.is_finite() && v > 0.0);
        assert!(matches!(extremal_norm(1, 64, 10.0, &ctx), Err(LemniscateError::AllExcluded)));
    }

    #[test]
    fn monomial_construction() {
        assert_eq!(monomial_approximant(0, 12).unwrap(), taylor_section(12));
        let p = monomial_approximant(3, 12).unwrap();
        assert_eq!(p.degree(), 12);
        assert!(matches!(monomial_approximant(5, 4), Err(LemniscateError::DegreeBudget { .. })));
        // exact identity at z = 0: (s_{m-1} - s_m)(0) = 0
        assert_eq!(p.eval_f64(c(0.0, 0.0)), c(0.0, 0.0));
    }

    #[test]
    fn steepest_descent_critical_point() {
        let grid = GridSpec::centered(c(0.0, 0.0), 1.5, 1.5, 101).unwrap();
        let plot = steepest_descent_plot(c(-0.4, 0.0), grid).unwrap();
        assert!((plot.critical_point - c(0.2, 0.0)).norm() < 1e-15);
        assert!((plot.critical_level - 1.0 / 2.4).abs() < 1e-15);
        assert_eq!(plot.contours.len(), 3);
        assert!(steepest_descent_plot(c(-0.5, 0.0), grid).is_err());
    }
}
