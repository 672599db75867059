//! Polynomial-hull separation in ℂ² for images of a bidisk under
//! `F(z₁, z₂) = (z₂, z₁z₂)`, and the perturbed-ball checks.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::polycore::ComplexPolynomial;

/// Degree cap for [`inverse_series`].
pub const MAX_SERIES_DEGREE: usize = 10_000;
/// Boundary samples used to confirm the tail bound of [`inverse_series`].
pub const SERIES_CHECK_POINTS: usize = 256;

#[derive(Debug, Error)]
pub enum HullError {
    #[error("invalid bidisk: {0}")]
    BadSpec(String),
    #[error("{0}")]
    BadParameter(String),
    #[error("target ({w1o}, {w2o}) lies in K = F(closed bidisk)")]
    InsideK { w1o: Complex64, w2o: Complex64 },
    #[error("certificate failed: margin {margin} ≤ 0")]
    CertificateFailed { margin: f64 },
    #[error("eps = {eps} needs more than {MAX_SERIES_DEGREE} series terms")]
    DegreeBudget { eps: f64 },
    #[error("series error {observed} on the boundary exceeds the tail bound {bound}")]
    BoundViolated { observed: f64, bound: f64 },
}

/// `G = {|z₁ - a₁| < r₁, |z₂ - a₂| < r₂}` with `r₂ < |a₂|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BidiskSpec {
    pub a1: Complex64,
    pub r1: f64,
    pub a2: Complex64,
    pub r2: f64,
}

impl BidiskSpec {
    pub fn new(a1: Complex64, r1: f64, a2: Complex64, r2: f64) -> Result<Self, HullError> {
        let spec = Self { a1, r1, a2, r2 };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), HullError> {
        if !(self.r1 > 0.0 && self.r1.is_finite()) || !(self.r2 > 0.0 && self.r2.is_finite()) {
            return Err(HullError::BadSpec(format!("radii must be positive, got {} and {}", self.r1, self.r2)));
        }
        if !(self.r2 < self.a2.norm()) {
            return Err(HullError::BadSpec(format!(
                "need r2 < |a2| so that K avoids z2 = 0 (r2 = {}, |a2| = {})",
                self.r2,
                self.a2.norm()
            )));
        }
        Ok(())
    }

    /// `F` on the distinguished boundary: `grid_m × grid_m` points of the torus.
    pub fn torus_image(&self, grid_m: usize) -> Vec<(Complex64, Complex64)> {
        let m = grid_m as f64;
        (0..grid_m * grid_m)
            .map(|idx| {
                let (j, k) = (idx / grid_m, idx % grid_m);
                let z1 = self.a1 + Complex64::from_polar(self.r1, TAU * j as f64 / m);
                let z2 = self.a2 + Complex64::from_polar(self.r2, TAU * k as f64 / m);
                (z2, z1 * z2)
            })
            .collect()
    }

    /// Whether `(w₁, w₂) ∈ K`: `|w₁ - a₂| ≤ r₂` and `|w₂/w₁ - a₁| ≤ r₁`.
    pub fn contains(&self, w1: Complex64, w2: Complex64) -> bool {
        (w1 - self.a2).norm() <= self.r2 && (w2 / w1 - self.a1).norm() <= self.r1
    }
}

/// `p(w) = (1/a₂) Σ_{k≤m} (-(w - a₂)/a₂)^k ≈ 1/w` on `|w - a₂| ≤ r₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct InverseSeries {
    pub a2: Complex64,
    pub r2: f64,
    /// Coefficients in the local variable `u = w - a₂`.
    pub centered: ComplexPolynomial,
    /// `(r₂/|a₂|)^{m+1} / (|a₂| - r₂)`.
    pub tail_bound: f64,
}

impl InverseSeries {
    pub fn degree(&self) -> usize {
        self.centered.degree()
    }

    pub fn eval(&self, w: Complex64) -> Complex64 {
        self.centered.eval_f64(w - self.a2)
    }

    /// Monomial form in `w`. Badly conditioned for large degrees; evaluation
    /// goes through the centered form.
    pub fn polynomial(&self) -> ComplexPolynomial {
        let shift = ComplexPolynomial::new(vec![-self.a2, Complex64::new(1.0, 0.0)]);
        let mut p = ComplexPolynomial::new(vec![Complex64::new(0.0, 0.0)]);
        for &c in self.centered.coeffs().iter().rev() {
            let mut coeffs = p.mul(&shift).coeffs().to_vec();
            coeffs[0] += c;
            p = ComplexPolynomial::new(coeffs);
        }
        p
    }
}

fn tail_bound(a2: Complex64, r2: f64, m: usize) -> f64 {
    let q = r2 / a2.norm();
    q.powi(m as i32 + 1) / (a2.norm() - r2)
}

pub fn inverse_series(a2: Complex64, r2: f64, eps: f64) -> Result<InverseSeries, HullError> {
    if !(r2 > 0.0 && r2 < a2.norm()) {
        return Err(HullError::BadSpec(format!("need 0 < r2 < |a2|, got r2 = {r2}, |a2| = {}", a2.norm())));
    }
    if !(eps > 0.0) {
        return Err(HullError::BadParameter(format!("eps must be positive, got {eps}")));
    }
    let m = (0..=MAX_SERIES_DEGREE)
        .find(|&m| tail_bound(a2, r2, m) <= eps)
        .ok_or(HullError::DegreeBudget { eps })?;
    let ratio = -1.0 / a2;
    let mut coeffs = Vec::with_capacity(m + 1);
    let mut c = 1.0 / a2;
    for _ in 0..=m {
        coeffs.push(c);
        c *= ratio;
    }
    let series = InverseSeries {
        a2,
        r2,
        centered: ComplexPolynomial::new(coeffs),
        tail_bound: tail_bound(a2, r2, m),
    };
    let observed = (0..SERIES_CHECK_POINTS)
        .map(|k| {
            let w = a2 + Complex64::from_polar(r2, TAU * k as f64 / SERIES_CHECK_POINTS as f64);
            (series.eval(w) - 1.0 / w).norm()
        })
        .fold(0.0, f64::max);
    // slack for the rounding in the f64 evaluation
    if observed > series.tail_bound * (1.0 + 1e-9) + 1e-14 {
        return Err(HullError::BoundViolated {
            observed,
            bound: series.tail_bound,
        });
    }
    Ok(series)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseTag {
    OuterDisk,
    Slope,
}

/// The separating polynomial `Q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PolyDescriptor {
    /// `Q = w₁ - a₂`.
    OuterDisk { a2: Complex64 },
    /// `Q = w₂ p(w₁) - a₁`, `p` in powers of `w₁ - a₂`.
    Slope {
        a1: Complex64,
        a2: Complex64,
        centered_coeffs: Vec<Complex64>,
        eps: f64,
        delta: f64,
    },
}

impl PolyDescriptor {
    pub fn eval(&self, w1: Complex64, w2: Complex64) -> Complex64 {
        match self {
            PolyDescriptor::OuterDisk { a2 } => w1 - a2,
            PolyDescriptor::Slope {
                a1,
                a2,
                centered_coeffs,
                ..
            } => {
                let u = w1 - a2;
                let p = centered_coeffs
                    .iter()
                    .rev()
                    .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * u + c);
                w2 * p - a1
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HullCertificate {
    pub spec: BidiskSpec,
    pub target: (Complex64, Complex64),
    pub case_tag: CaseTag,
    pub poly_descriptor: PolyDescriptor,
    pub q_at_target: f64,
    pub grid_sup: f64,
    /// `|Q(target)| - max_grid |Q|`.
    pub margin: f64,
    pub grid_m: usize,
}

impl HullCertificate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }

    /// Recomputes the margin on a `grid_m × grid_m` torus.
    pub fn reverify(&self, grid_m: usize) -> f64 {
        let (w1o, w2o) = self.target;
        self.poly_descriptor.eval(w1o, w2o).norm() - grid_sup(&self.spec, &self.poly_descriptor, grid_m)
    }
}

fn grid_sup(spec: &BidiskSpec, q: &PolyDescriptor, grid_m: usize) -> f64 {
    spec.torus_image(grid_m)
        .par_iter()
        .map(|&(w1, w2)| q.eval(w1, w2).norm())
        .reduce(|| 0.0, f64::max)
}

/// Separates `(w1o, w2o)` from `K = F(Ḡ)` by a polynomial `Q` with
/// `|Q(target)| > ‖Q‖_K`, the sup taken over the image of the torus.
pub fn certify_outside(
    spec: BidiskSpec,
    w1o: Complex64,
    w2o: Complex64,
    grid_m: usize,
) -> Result<HullCertificate, HullError> {
    spec.validate()?;
    if grid_m < 4 {
        return Err(HullError::BadParameter(format!("grid_m must be at least 4, got {grid_m}")));
    }
    let (case_tag, poly_descriptor) = if (w1o - spec.a2).norm() > spec.r2 {
        (CaseTag::OuterDisk, PolyDescriptor::OuterDisk { a2: spec.a2 })
    } else {
        let slope_dist = (w2o / w1o - spec.a1).norm();
        if !(slope_dist > spec.r1) {
            return Err(HullError::InsideK { w1o, w2o });
        }
        let delta = slope_dist / spec.r1 - 1.0;
        let bound = delta * spec.r1 / (w2o.norm() + (spec.a2.norm() + spec.r2) * (spec.a1.norm() + spec.r1));
        let eps = 0.5 * bound;
        let p = inverse_series(spec.a2, spec.r2, eps)?;
        (
            CaseTag::Slope,
            PolyDescriptor::Slope {
                a1: spec.a1,
                a2: spec.a2,
                centered_coeffs: p.centered.coeffs().to_vec(),
                eps,
                delta,
            },
        )
    };
    let q_at_target = poly_descriptor.eval(w1o, w2o).norm();
    let sup = grid_sup(&spec, &poly_descriptor, grid_m);
    let margin = q_at_target - sup;
    if !(margin > 0.0) {
        return Err(HullError::CertificateFailed { margin });
    }
    Ok(HullCertificate {
        spec,
        target: (w1o, w2o),
        case_tag,
        poly_descriptor,
        q_at_target,
        grid_sup: sup,
        margin,
        grid_m,
    })
}

/// `ρ(z₁, z₂) = |z₁z₂ - a₁|² + |z₂ - a₂|² - r₂²`.
pub fn rho(a1: Complex64, a2: Complex64, r2: f64, z1: Complex64, z2: Complex64) -> f64 {
    (z1 * z2 - a1).norm_sqr() + (z2 - a2).norm_sqr() - r2 * r2
}

/// Samples `{ρ = 0}`, maps by `F`, and returns the largest deviation of
/// `|w₂ - a₁|² + |w₁ - a₂|²` from `r₂²`.
pub fn ball_image_residual(
    a1: Complex64,
    a2: Complex64,
    r2: f64,
    samples: usize,
    seed: u64,
) -> Result<f64, HullError> {
    if !(r2 >= 0.0 && r2 < a2.norm()) {
        return Err(HullError::BadSpec(format!("need 0 ≤ r2 < |a2|, got r2 = {r2}, |a2| = {}", a2.norm())));
    }
    if samples == 0 {
        return Err(HullError::BadParameter("no boundary samples requested".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        // split r₂² between the two squares, then solve for z₁
        let s: f64 = rng.gen();
        let z2 = a2 + Complex64::from_polar(r2 * s.sqrt(), TAU * rng.gen::<f64>());
        let z1 = (a1 + Complex64::from_polar(r2 * (1.0 - s).sqrt(), TAU * rng.gen::<f64>())) / z2;
        let (w1, w2) = (z2, z1 * z2);
        let dev = ((w2 - a1).norm_sqr() + (w1 - a2).norm_sqr() - r2 * r2).abs();
        worst = worst.max(dev);
    }
    Ok(worst)
}

/// Step of the finite-difference complex Hessian.
pub const HESSIAN_STEP: f64 = 1e-4;

/// `[∂²ρ/∂zᵢ∂z̄ⱼ]` by central differences in the four real coordinates.
pub fn complex_hessian_fd(
    a1: Complex64,
    a2: Complex64,
    r2: f64,
    z1: Complex64,
    z2: Complex64,
) -> [[Complex64; 2]; 2] {
    let h = HESSIAN_STEP;
    let f = |x: [f64; 4]| rho(a1, a2, r2, Complex64::new(x[0], x[1]), Complex64::new(x[2], x[3]));
    let base = [z1.re, z1.im, z2.re, z2.im];
    let d2 = |p: usize, q: usize| {
        let at = |sp: f64, sq: f64| {
            let mut x = base;
            x[p] += sp * h;
            x[q] += sq * h;
            f(x)
        };
        (at(1.0, 1.0) - at(1.0, -1.0) - at(-1.0, 1.0) + at(-1.0, -1.0)) / (4.0 * h * h)
    };
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            let (xi, yi, xj, yj) = (2 * i, 2 * i + 1, 2 * j, 2 * j + 1);
            // ∂_{zᵢ}∂_{z̄ⱼ} = ¼ (∂_{xᵢ} - i∂_{yᵢ})(∂_{xⱼ} + i∂_{yⱼ})
            out[i][j] = 0.25 * Complex64::new(d2(xi, xj) + d2(yi, yj), d2(xi, yj) - d2(yi, xj));
        }
    }
    out
}

/// Closed form `[[|z₂|², z₂z̄₁], [z₁z̄₂, |z₁|² + 1]]`.
pub fn complex_hessian_exact(z1: Complex64, z2: Complex64) -> [[Complex64; 2]; 2] {
    [
        [Complex64::new(z2.norm_sqr(), 0.0), z2 * z1.conj()],
        [z1 * z2.conj(), Complex64::new(z1.norm_sqr() + 1.0, 0.0)],
    ]
}

fn det2(m: &[[Complex64; 2]; 2]) -> Complex64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

/// `max |det H(ρ) - |z₂|²|` with `H` from finite differences.
pub fn hessian_det_residual(
    a1: Complex64,
    a2: Complex64,
    r2: f64,
    test_points: &[(Complex64, Complex64)],
) -> f64 {
    test_points
        .iter()
        .map(|&(z1, z2)| (det2(&complex_hessian_fd(a1, a2, r2, z1, z2)) - z2.norm_sqr()).norm())
        .fold(0.0, f64::max)
}
