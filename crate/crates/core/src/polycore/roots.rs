//! Aberth–Ehrlich simultaneous root iteration.
//!
//! Polynomials with exact coefficients are first iterated in `f64` and then
//! polished with multiprecision Newton ratios, since the Taylor sections lose
//! all significant digits to cancellation in plain `f64`.

use num_complex::Complex64;

use super::{ComplexPolynomial, MpComplex, PolyError, PrecisionContext};

#[derive(Debug, Clone, Copy)]
pub struct RootOptions {
    /// Normalized residual `|p(r)| / (max|c_k| max(1,|r|)^deg)` accepted per root.
    pub tol: f64,
    pub max_iterations: usize,
    /// Iterations spent in the `f64` phase before switching to multiprecision.
    pub f64_iterations: usize,
}

impl RootOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

impl Default for RootOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iterations: 400,
            f64_iterations: 300,
        }
    }
}

/// All `deg(p)` roots of `p`, with multiplicity.
pub fn roots(p: &ComplexPolynomial, tol: f64) -> Result<Vec<Complex64>, PolyError> {
    roots_with(p, &RootOptions::with_tol(tol))
}

pub fn roots_with(p: &ComplexPolynomial, opts: &RootOptions) -> Result<Vec<Complex64>, PolyError> {
    if !(opts.tol > 0.0) {
        return Err(PolyError::BadTolerance(opts.tol));
    }
    let deg = p.degree();
    if deg == 0 {
        return Err(PolyError::ConstantPolynomial);
    }
    let coeffs = p.coeffs();
    if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(PolyError::NonFinite("root finding"));
    }
    if deg == 1 {
        let r = -coeffs[0] / coeffs[1];
        return Ok(vec![r]);
    }

    let mut z = initial_guesses(coeffs);
    let evaluator = Evaluator::new(p);

    // f64 phase
    let f64_budget = if p.exact().is_some() {
        opts.f64_iterations.min(opts.max_iterations)
    } else {
        opts.max_iterations
    };
    let mut used = 0;
    let mut converged = vec![false; deg];
    while used < f64_budget {
        used += 1;
        let moved = aberth_sweep(&mut z, &mut converged, |x| {
            let (v, dv) = p.eval_with_derivative_f64(x);
            (dv != Complex64::new(0.0, 0.0)).then(|| v / dv)
        });
        if !moved {
            break;
        }
    }

    if let Some(ev) = &evaluator {
        converged.iter_mut().for_each(|c| *c = false);
        while used < opts.max_iterations {
            used += 1;
            let moved = aberth_sweep(&mut z, &mut converged, |x| ev.newton_ratio(x));
            if !moved {
                break;
            }
        }
    }

    if z.iter().any(|r| !r.re.is_finite() || !r.im.is_finite()) {
        return Err(PolyError::NonFinite("root iteration"));
    }
    let residual = z
        .iter()
        .map(|&r| normalized_residual(p, evaluator.as_ref(), r))
        .fold(0.0, f64::max);
    if residual <= opts.tol {
        Ok(z)
    } else {
        Err(PolyError::NoConvergence {
            iterations: used,
            residual,
            best: z,
        })
    }
}

/// Points on a circle of Cauchy-bound radius, rotated off the real axis.
fn initial_guesses(coeffs: &[Complex64]) -> Vec<Complex64> {
    let deg = coeffs.len() - 1;
    let lead = coeffs[deg].norm();
    let bound = 1.0
        + coeffs[..deg]
            .iter()
            .map(|c| c.norm() / lead)
            .fold(0.0, f64::max);
    (0..deg)
        .map(|k| {
            let theta = std::f64::consts::TAU * k as f64 / deg as f64 + 0.4;
            Complex64::from_polar(bound, theta)
        })
        .collect()
}

/// One Gauss–Seidel Aberth sweep; returns whether any root still moved.
fn aberth_sweep<F>(z: &mut [Complex64], converged: &mut [bool], mut ratio: F) -> bool
where
    F: FnMut(Complex64) -> Option<Complex64>,
{
    let n = z.len();
    let mut moved = false;
    for k in 0..n {
        if converged[k] {
            continue;
        }
        let Some(newton) = ratio(z[k]) else {
            // exact zero of the derivative: nudge
            z[k] += Complex64::new(1e-8, 1e-8) * z[k].norm().max(1.0);
            moved = true;
            continue;
        };
        let mut repulsion = Complex64::new(0.0, 0.0);
        for j in 0..n {
            if j != k {
                let d = z[k] - z[j];
                if d != Complex64::new(0.0, 0.0) {
                    repulsion += d.inv();
                }
            }
        }
        let denom = Complex64::new(1.0, 0.0) - newton * repulsion;
        let step = if denom.norm() > 0.0 { newton / denom } else { newton };
        if !step.re.is_finite() || !step.im.is_finite() {
            continue;
        }
        z[k] -= step;
        if step.norm() <= 4.0 * f64::EPSILON * z[k].norm().max(f64::MIN_POSITIVE) {
            converged[k] = true;
        } else {
            moved = true;
        }
    }
    moved
}

fn normalized_residual(p: &ComplexPolynomial, ev: Option<&Evaluator>, r: Complex64) -> f64 {
    let deg = p.degree() as i32;
    let scale = r.norm().max(1.0).powi(deg);
    match ev {
        Some(ev) => ev.normalized_value(r, scale),
        None => p.eval_f64(r).norm() / (p.max_coeff_norm() * scale),
    }
}

/// Multiprecision evaluation of `p` and `p'` from exact numerators.
struct Evaluator {
    ctx: PrecisionContext,
    numerators: Vec<MpComplex>,
    max_numerator: f64,
}

impl Evaluator {
    fn new(p: &ComplexPolynomial) -> Option<Self> {
        let exact = p.exact()?;
        let ctx = PrecisionContext::new(2 * p.degree() + 64).unwrap();
        let numerators = exact
            .numerators
            .iter()
            .map(|c| ctx.complex_from_int(c))
            .collect::<Vec<_>>();
        let max_numerator = exact
            .numerators
            .iter()
            .map(super::ln_abs_int)
            .fold(f64::NEG_INFINITY, f64::max)
            .exp();
        Some(Self {
            ctx,
            numerators,
            max_numerator,
        })
    }

    fn horner(&self, x: Complex64) -> (MpComplex, MpComplex) {
        let z = self.ctx.complex(x);
        let mut p = self.ctx.zero();
        let mut dp = self.ctx.zero();
        for c in self.numerators.iter().rev() {
            dp = dp.mul(&z).add(&p);
            p = p.mul(&z).add(c);
        }
        (p, dp)
    }

    fn newton_ratio(&self, x: Complex64) -> Option<Complex64> {
        let (p, dp) = self.horner(x);
        p.div(&dp).map(|r| r.to_c64())
    }

    fn normalized_value(&self, x: Complex64, scale: f64) -> f64 {
        let (p, _) = self.horner(x);
        p.to_c64().norm() / (self.max_numerator * scale)
    }
}
