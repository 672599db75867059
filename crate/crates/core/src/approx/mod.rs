//! Weighted polynomial approximation: interpolants of `f/W^n` at weighted
//! Leja points, geometric rate fits, level regions `K_R`/`E_R`, and the
//! disk diagnostic for `W(z) = z`.

mod contour;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::equilibrium::{solve_equilibrium, CellKind, EquilibriumError, EquilibriumOptions, FeketeSequence, WeightedCompact};
use crate::polycore::ComplexPolynomial;

pub use contour::{
    find_merge_level, level_region, level_region_from_samples, real_axis_saddle, ContourSet, GridSpec,
    MergeLevel, SampledGrid,
};

#[derive(Debug, Error)]
pub enum ApproxError {
    #[error("grid resolution {0} is below the minimum of 32 per axis")]
    GridTooCoarse(usize),
    #[error("{0}")]
    BadParameter(String),
    #[error("component count is {count} at both R = {r_lo} and R = {r_hi}; no merge in range")]
    NoMerge { count: usize, r_lo: f64, r_hi: f64 },
    #[error("the weight vanishes at interpolation node {0}")]
    WeightVanishes(Complex64),
    #[error("divided differences overflowed at degree {degree}; increase precision or lower the degree")]
    DividedDifferenceOverflow { degree: usize },
    #[error("need {needed} sequence points, have {available}")]
    SequenceTooShort { needed: usize, available: usize },
    #[error("rate fit needs at least 5 errors, got {0}")]
    TooFewErrors(usize),
    #[error("error values must be finite and nonnegative, got {0}")]
    BadErrorValue(f64),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Equilibrium(#[from] EquilibriumError),
}

/// Newton form `Σ c_k ∏_{j<k} (z - x_j)` over nodes in Leja order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewtonInterpolant {
    pub nodes: Vec<Complex64>,
    pub coeffs: Vec<Complex64>,
}

impl NewtonInterpolant {
    pub fn interpolate(nodes: &[Complex64], values: &[Complex64]) -> Result<Self, ApproxError> {
        assert_eq!(nodes.len(), values.len());
        let mut d = values.to_vec();
        for j in 1..nodes.len() {
            for i in (j..nodes.len()).rev() {
                d[i] = (d[i] - d[i - 1]) / (nodes[i] - nodes[i - j]);
            }
            if d[j..].iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
                return Err(ApproxError::DividedDifferenceOverflow { degree: j });
            }
        }
        Ok(Self {
            nodes: nodes.to_vec(),
            coeffs: d,
        })
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let n = self.coeffs.len();
        let mut p = self.coeffs[n - 1];
        for k in (0..n - 1).rev() {
            p = p * (z - self.nodes[k]) + self.coeffs[k];
        }
        p
    }

    /// Monomial coefficients; prefer [`NewtonInterpolant::eval`] for evaluation.
    pub fn to_polynomial(&self) -> ComplexPolynomial {
        let n = self.coeffs.len();
        let mut p = vec![self.coeffs[n - 1]];
        for k in (0..n - 1).rev() {
            // p <- p (z - x_k) + c_k
            let mut next = vec![Complex64::new(0.0, 0.0); p.len() + 1];
            for (i, c) in p.iter().enumerate() {
                next[i + 1] += c;
                next[i] -= c * self.nodes[k];
            }
            next[0] += self.coeffs[k];
            p = next;
        }
        ComplexPolynomial::new(p)
    }
}

/// `P_n` interpolating `f/W^n` at the first `n + 1` points of `seq`.
pub fn weighted_interpolant<F, W>(f: F, w: W, seq: &FeketeSequence, n: usize) -> Result<NewtonInterpolant, ApproxError>
where
    F: Fn(Complex64) -> Complex64,
    W: Fn(Complex64) -> Complex64,
{
    if seq.len() < n + 1 {
        return Err(ApproxError::SequenceTooShort {
            needed: n + 1,
            available: seq.len(),
        });
    }
    let nodes = &seq.points[..=n];
    let mut values = Vec::with_capacity(n + 1);
    for &t in nodes {
        let wt = w(t);
        if wt == Complex64::new(0.0, 0.0) {
            return Err(ApproxError::WeightVanishes(t));
        }
        values.push(f(t) / wt.powu(n as u32));
    }
    NewtonInterpolant::interpolate(nodes, &values)
}

/// `sup_K |f - W^n P_n|` over the given points.
pub fn weighted_error<F, W>(f: F, w: W, p: &NewtonInterpolant, points: &[Complex64]) -> f64
where
    F: Fn(Complex64) -> Complex64,
    W: Fn(Complex64) -> Complex64,
{
    let n = p.degree() as u32;
    points
        .iter()
        .map(|&z| (f(z) - w(z).powu(n) * p.eval(z)).norm())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateEstimate {
    /// `exp(slope)` of the tail least-squares fit of `log error_n` against `n`.
    Geometric(f64),
    /// Some error vanished: `f` is represented exactly.
    ExactRepresentation,
}

impl RateEstimate {
    pub fn rate(&self) -> Option<f64> {
        match self {
            RateEstimate::Geometric(r) => Some(*r),
            RateEstimate::ExactRepresentation => None,
        }
    }
}

/// Least-squares geometric rate over the tail half of the sequence.
pub fn rate_estimate(degrees: &[usize], errors: &[f64]) -> Result<RateEstimate, ApproxError> {
    if degrees.len() != errors.len() {
        return Err(ApproxError::BadParameter("degrees and errors differ in length".into()));
    }
    if errors.len() < 5 {
        return Err(ApproxError::TooFewErrors(errors.len()));
    }
    if let Some(&e) = errors.iter().find(|e| !(**e >= 0.0) || !e.is_finite()) {
        return Err(ApproxError::BadErrorValue(e));
    }
    if errors.iter().any(|&e| e == 0.0) {
        return Ok(RateEstimate::ExactRepresentation);
    }
    let start = errors.len() / 2;
    let xs: Vec<f64> = degrees[start..].iter().map(|&n| n as f64).collect();
    let ys: Vec<f64> = errors[start..].iter().map(|e| e.ln()).collect();
    let k = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(ApproxError::BadParameter("degrees must not all be equal".into()));
    }
    Ok(RateEstimate::Geometric((sxy / sxx).exp()))
}

/// Upper bounds for `d_n^W(f, K)` from the interpolants at the given degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxReport {
    pub degrees: Vec<usize>,
    pub errors: Vec<f64>,
    pub rate_estimate: RateEstimate,
}

pub fn approximation_report<F, W>(
    f: F,
    w: W,
    seq: &FeketeSequence,
    degrees: &[usize],
    eval_points: &[Complex64],
) -> Result<ApproxReport, ApproxError>
where
    F: Fn(Complex64) -> Complex64 + Copy,
    W: Fn(Complex64) -> Complex64 + Copy,
{
    let mut errors = Vec::with_capacity(degrees.len());
    for &n in degrees {
        let p = weighted_interpolant(f, w, seq, n)?;
        errors.push(weighted_error(f, w, &p, eval_points));
    }
    let rate_estimate = rate_estimate(degrees, &errors)?;
    Ok(ApproxReport {
        degrees: degrees.to_vec(),
        errors,
        rate_estimate,
    })
}

/// Interpolation remainder from the Hermite contour formula,
///
/// ```text
/// f(z) - W(z)^n P_n(z) = W(z)^n / (2πi) ∮ ω(z)/ω(ξ) · f(ξ) / (W(ξ)^n (ξ - z)) dξ,
/// ```
///
/// `ω` the node polynomial of the `n + 1` nodes, integrated by the trapezoid
/// rule over the vertices of a closed counter-clockwise polyline.
pub fn hermite_remainder<F, W>(f: F, w: W, nodes: &[Complex64], contour: &[Complex64], z: Complex64) -> Complex64
where
    F: Fn(Complex64) -> Complex64,
    W: Fn(Complex64) -> Complex64,
{
    let n = nodes.len().saturating_sub(1) as u32;
    let integrand = |xi: Complex64| {
        let ratio: Complex64 = nodes.iter().map(|t| (z - t) / (xi - t)).product();
        ratio * f(xi) / (w(xi).powu(n) * (xi - z))
    };
    let values: Vec<Complex64> = contour.iter().map(|&xi| integrand(xi)).collect();
    let m = contour.len();
    let integral: Complex64 = (0..m)
        .map(|k| {
            let k1 = (k + 1) % m;
            0.5 * (values[k] + values[k1]) * (contour[k1] - contour[k])
        })
        .sum();
    w(z).powu(n) * integral / Complex64::new(0.0, 2.0 * PI)
}

/// `g(z, p) - 2 g(z, ∞)` for the exterior of the disk `|z - center| ≤ radius`;
/// for `W(z) = z - p` with `p` outside the disk this is `U^μ + Q - F`.
pub fn disk_level_value(z: Complex64, center: Complex64, radius: f64, pole: Complex64) -> f64 {
    let (u, a) = (z - center, pole - center);
    let d = u.norm();
    if d <= radius {
        return 0.0;
    }
    if z == pole {
        return f64::INFINITY;
    }
    let g_inf = (d / radius).ln();
    let g_pole = ((radius * radius - a.conj() * u).norm() / (radius * (u - a).norm())).ln();
    g_pole - 2.0 * g_inf
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PritskerDiagnostic {
    /// Equilibrium mass on the interior grid nodes.
    pub interior_mass: f64,
    /// `max_K |U^μ + Q - F|` over all nodes.
    pub constancy_residual: f64,
    pub f_const: f64,
    pub nodes: usize,
    pub converged: bool,
}

/// Equilibrium of the closed disk `D̄(a, r)` for `W(z) = z` on about `m`
/// nodes: a third on the circle, the rest on an interior square grid.
pub fn pritsker_disk_diagnostic(a: f64, r: f64, m: usize) -> Result<PritskerDiagnostic, ApproxError> {
    if !(a > 0.0) || !(r > 0.0) || r >= a {
        return Err(ApproxError::BadParameter(format!("need 0 < r < a, got a = {a}, r = {r}")));
    }
    if m < 48 {
        return Err(ApproxError::BadParameter(format!("need at least 48 nodes, got {m}")));
    }
    let m_boundary = m / 3;
    let h = r * (1.5 * PI / m as f64).sqrt();
    let k = WeightedCompact::disk(Complex64::new(a, 0.0), r, m_boundary, h)?.with_weight(|z| z.norm())?;
    let opts = EquilibriumOptions {
        max_iters: 1_000_000,
        gap_tol: 1e-7,
        record_history: false,
    };
    let sol = solve_equilibrium(&k, &opts)?;
    let interior_mass = sol
        .measure
        .masses()
        .iter()
        .zip(k.cells())
        .filter(|(_, c)| **c == CellKind::Area)
        .map(|(m, _)| m)
        .sum();
    let constancy_residual = sol
        .node_potentials
        .iter()
        .zip(k.q_values())
        .map(|(u, q)| (u + q - sol.f_const).abs())
        .fold(0.0, f64::max);
    Ok(PritskerDiagnostic {
        interior_mass,
        constancy_residual,
        f_const: sol.f_const,
        nodes: k.len(),
        converged: sol.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::weighted_leja;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn unit_circle(m: usize) -> WeightedCompact {
        WeightedCompact::circle(c(0.0, 0.0), 1.0, m).unwrap()
    }

    #[test]
    fn rate_of_pure_geometric_sequences() {
        let degrees: Vec<usize> = (1..=12).collect();
        let e: Vec<f64> = degrees.iter().map(|&n| 2f64.powi(-(n as i32))).collect();
        assert!((rate_estimate(&degrees, &e).unwrap().rate().unwrap() - 0.5).abs() < 1e-14);
        let e: Vec<f64> = degrees.iter().map(|&n| 3.0 * 4f64.powi(-(n as i32))).collect();
        assert!((rate_estimate(&degrees, &e).unwrap().rate().unwrap() - 0.25).abs() < 1e-14);
    }

    #[test]
    fn rate_contract() {
        let d = [1, 2, 3, 4, 5];
        assert_eq!(
            rate_estimate(&d, &[1.0, 0.5, 0.0, 0.1, 0.1]).unwrap(),
            RateEstimate::ExactRepresentation
        );
        assert!(matches!(rate_estimate(&d[..4], &[1.0; 4]), Err(ApproxError::TooFewErrors(4))));
        assert!(matches!(rate_estimate(&d, &[1.0, -1.0, 1.0, 1.0, 1.0]), Err(ApproxError::BadErrorValue(_))));
    }

    #[test]
    fn interpolant_of_f_equal_w_is_one() {
        let seq = weighted_leja(&unit_circle(64), 4).unwrap();
        let w = |z: Complex64| z + 3.0;
        let p = weighted_interpolant(w, w, &seq, 1).unwrap();
        let poly = p.to_polynomial();
        assert_eq!(poly.degree(), 0);
        assert!((poly.coeffs()[0] - 1.0).norm() < 1e-14);
    }

    #[test]
    fn cauchy_kernel_on_the_circle() {
        let k = unit_circle(1024);
        let seq = weighted_leja(&k, 41).unwrap();
        let f = |z: Complex64| 1.0 / (2.0 - z);
        let one = |_| c(1.0, 0.0);
        let p = weighted_interpolant(f, one, &seq, 10).unwrap();
        let err = weighted_error(f, one, &p, k.nodes());
        assert!(err <= 10.0 * 2f64.powi(-10), "{err}");
    }

    #[test]
    fn exactness_for_weighted_polynomials() {
        let k = unit_circle(256);
        let seq = weighted_leja(&k, 8).unwrap();
        let q = ComplexPolynomial::new(vec![c(1.0, 0.5), c(-2.0, 0.0), c(0.0, 0.25), c(0.5, -1.0)]);
        let w = |z: Complex64| 2.0 + z;
        let n = 5;
        let f = |z: Complex64| w(z).powu(n) * q.eval_f64(z);
        let p = weighted_interpolant(f, w, &seq, n as usize).unwrap().to_polynomial();
        for k in 0..=5 {
            let expected = q.coeffs().get(k).copied().unwrap_or_default();
            let got = p.coeffs().get(k).copied().unwrap_or_default();
            assert!((got - expected).norm() <= 1e-8 * q.max_coeff_norm());
        }
    }

    #[test]
    fn vanishing_weight_is_rejected() {
        let seq = weighted_leja(&unit_circle(8), 3).unwrap();
        let t0 = seq.points[0];
        let r = weighted_interpolant(|_| c(1.0, 0.0), |z| z - t0, &seq, 2);
        assert!(matches!(r, Err(ApproxError::WeightVanishes(_))));
        assert!(matches!(
            weighted_interpolant(|_| c(1.0, 0.0), |_| c(1.0, 0.0), &seq, 3),
            Err(ApproxError::SequenceTooShort { .. })
        ));
    }

    #[test]
    fn disk_level_value_vanishes_on_the_disk() {
        let (center, r, p) = (c(-0.1, 0.0), 0.15, c(-1.0, 0.0));
        assert_eq!(disk_level_value(center, center, r, p), 0.0);
        assert!(disk_level_value(c(0.05 + 1e-9, 0.0), center, r, p).abs() < 1e-6);
        assert!(disk_level_value(c(-0.99, 0.0), center, r, p) > 1.0);
        assert!(disk_level_value(c(5.0, 0.0), center, r, p) < -3.0);
    }

    #[test]
    fn pritsker_contract() {
        assert!(pritsker_disk_diagnostic(1.0, 1.5, 300).is_err());
        assert!(pritsker_disk_diagnostic(1.0, 0.25, 10).is_err());
    }
}
