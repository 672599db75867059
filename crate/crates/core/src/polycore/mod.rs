//! Complex polynomials with optional exact coefficients, multiprecision
//! evaluation, Taylor sections of `(1+z)^{-n}` and root finding.

mod mp;
mod remainder;
mod roots;

use dashu_int::IBig;
use num_complex::Complex64;
use thiserror::Error;

pub use mp::{ln_abs_int, MpComplex, MpFloat, PrecisionContext};
pub use remainder::remainder_integral;
pub use roots::{roots, roots_with, RootOptions};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("the zero polynomial has no leading coefficient")]
    ZeroPolynomial,
    #[error("root finding needs degree >= 1")]
    ConstantPolynomial,
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error("root iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        best: Vec<Complex64>,
    },
    #[error("non-finite value encountered during {0}")]
    NonFinite(&'static str),
    #[error("z = {0} lies on the cut (-inf, -1]")]
    OnCut(Complex64),
    #[error("at least 16 quadrature nodes are required, got {0}")]
    TooFewNodes(usize),
}

/// Exact rational coefficients sharing one denominator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactCoeffs {
    pub numerators: Vec<IBig>,
    pub denominator: IBig,
}

/// Dense polynomial in ascending-degree order.
///
/// When exact coefficients are present, the float view holds each exact value
/// rounded to the nearest `f64`, and multiprecision evaluation reads the exact
/// values directly.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexPolynomial {
    coeffs: Vec<Complex64>,
    exact: Option<ExactCoeffs>,
}

impl ComplexPolynomial {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.len() > 1 && *coeffs.last().unwrap() == Complex64::new(0.0, 0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(Complex64::new(0.0, 0.0));
        }
        Self { coeffs, exact: None }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn from_integers(numerators: Vec<IBig>) -> Self {
        Self::from_rationals(numerators, IBig::ONE)
    }

    /// Polynomial with coefficients `numerators[k] / denominator`.
    pub fn from_rationals(mut numerators: Vec<IBig>, denominator: IBig) -> Self {
        assert!(denominator != IBig::ZERO, "zero denominator");
        while numerators.len() > 1 && *numerators.last().unwrap() == IBig::ZERO {
            numerators.pop();
        }
        if numerators.is_empty() {
            numerators.push(IBig::ZERO);
        }
        let coeffs = numerators
            .iter()
            .map(|c| Complex64::new(rational_to_f64(c, &denominator), 0.0))
            .collect();
        Self {
            coeffs,
            exact: Some(ExactCoeffs {
                numerators,
                denominator,
            }),
        }
    }

    /// Monic polynomial with the given roots (float coefficients).
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut c = vec![Complex64::new(1.0, 0.0)];
        for &r in roots {
            let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
            for (k, &ck) in c.iter().enumerate() {
                next[k + 1] += ck;
                next[k] -= ck * r;
            }
            c = next;
        }
        Self::new(c)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn exact(&self) -> Option<&ExactCoeffs> {
        self.exact.as_ref()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == Complex64::new(0.0, 0.0)
            && self
                .exact
                .as_ref()
                .map_or(true, |e| e.numerators[0] == IBig::ZERO)
    }

    pub fn leading(&self) -> Complex64 {
        *self.coeffs.last().unwrap()
    }

    /// Plain `f64` Horner evaluation.
    pub fn eval_f64(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Value and first derivative by `f64` Horner.
    pub fn eval_with_derivative_f64(&self, z: Complex64) -> (Complex64, Complex64) {
        let zero = Complex64::new(0.0, 0.0);
        let mut p = zero;
        let mut dp = zero;
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    /// Horner evaluation at the working precision of `ctx`.
    pub fn eval(&self, z: Complex64, ctx: &PrecisionContext) -> Complex64 {
        self.eval_mp(&ctx.complex(z), ctx).to_c64()
    }

    pub fn eval_mp(&self, z: &MpComplex, ctx: &PrecisionContext) -> MpComplex {
        match &self.exact {
            Some(exact) => {
                let mut acc = ctx.zero();
                for c in exact.numerators.iter().rev() {
                    acc = acc.mul(z).add(&ctx.complex_from_int(c));
                }
                if exact.denominator == IBig::ONE {
                    acc
                } else {
                    let d = ctx.float_from_int(&exact.denominator);
                    MpComplex {
                        re: acc.re / &d,
                        im: acc.im / &d,
                    }
                }
            }
            None => {
                let mut acc = ctx.zero();
                for &c in self.coeffs.iter().rev() {
                    acc = acc.mul(z).add(&ctx.complex(c));
                }
                acc
            }
        }
    }

    pub fn derivative(&self) -> ComplexPolynomial {
        if self.degree() == 0 {
            return match &self.exact {
                Some(e) => Self::from_rationals(vec![IBig::ZERO], e.denominator.clone()),
                None => Self::new(vec![]),
            };
        }
        match &self.exact {
            Some(e) => Self::from_rationals(
                e.numerators
                    .iter()
                    .enumerate()
                    .skip(1)
                    .map(|(k, c)| c * IBig::from(k))
                    .collect(),
                e.denominator.clone(),
            ),
            None => Self::new(
                self.coeffs
                    .iter()
                    .enumerate()
                    .skip(1)
                    .map(|(k, &c)| c * k as f64)
                    .collect(),
            ),
        }
    }

    /// Product; exact when both factors are exact.
    pub fn mul(&self, other: &ComplexPolynomial) -> ComplexPolynomial {
        match (&self.exact, &other.exact) {
            (Some(a), Some(b)) => {
                let mut out = vec![IBig::ZERO; a.numerators.len() + b.numerators.len() - 1];
                for (i, x) in a.numerators.iter().enumerate() {
                    for (j, y) in b.numerators.iter().enumerate() {
                        out[i + j] += x * y;
                    }
                }
                Self::from_rationals(out, &a.denominator * &b.denominator)
            }
            _ => {
                let mut out =
                    vec![Complex64::new(0.0, 0.0); self.coeffs.len() + other.coeffs.len() - 1];
                for (i, &x) in self.coeffs.iter().enumerate() {
                    for (j, &y) in other.coeffs.iter().enumerate() {
                        out[i + j] += x * y;
                    }
                }
                Self::new(out)
            }
        }
    }

    /// Difference; exact when both operands are exact.
    pub fn sub(&self, other: &ComplexPolynomial) -> ComplexPolynomial {
        match (&self.exact, &other.exact) {
            (Some(a), Some(b)) => {
                let len = a.numerators.len().max(b.numerators.len());
                let out = (0..len)
                    .map(|k| {
                        let x = a.numerators.get(k).cloned().unwrap_or(IBig::ZERO);
                        let y = b.numerators.get(k).cloned().unwrap_or(IBig::ZERO);
                        x * &b.denominator - y * &a.denominator
                    })
                    .collect();
                Self::from_rationals(out, &a.denominator * &b.denominator)
            }
            _ => {
                let len = self.coeffs.len().max(other.coeffs.len());
                let zero = Complex64::new(0.0, 0.0);
                Self::new(
                    (0..len)
                        .map(|k| {
                            self.coeffs.get(k).copied().unwrap_or(zero)
                                - other.coeffs.get(k).copied().unwrap_or(zero)
                        })
                        .collect(),
                )
            }
        }
    }

    pub fn max_coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

fn rational_to_f64(num: &IBig, den: &IBig) -> f64 {
    if *den == IBig::ONE {
        return MpFloat::from(num.clone()).to_f64().value();
    }
    let ctx = PrecisionContext::new(128).unwrap();
    (ctx.float_from_int(num) / ctx.float_from_int(den))
        .to_f64()
        .value()
}

/// Exact binomial coefficient.
pub fn binomial(n: usize, k: usize) -> IBig {
    if k > n {
        return IBig::ZERO;
    }
    let k = k.min(n - k);
    let mut acc = IBig::ONE;
    for i in 0..k {
        acc = acc * IBig::from(n - i) / IBig::from(i + 1);
    }
    acc
}

/// Degree-`n` Taylor polynomial of `(1+z)^{-n}` at 0, with exact coefficients
/// `(-1)^k binom(n+k-1, k)`.
pub fn taylor_section(n: usize) -> ComplexPolynomial {
    let mut coeffs = Vec::with_capacity(n + 1);
    let mut c = IBig::ONE;
    coeffs.push(c.clone());
    for k in 1..=n {
        c = -c * IBig::from(n + k - 1) / IBig::from(k);
        coeffs.push(c.clone());
    }
    ComplexPolynomial::from_integers(coeffs)
}

/// Splits `p` into its monic multiple and the leading coefficient.
pub fn monic_normalize(
    p: &ComplexPolynomial,
) -> Result<(ComplexPolynomial, Complex64), PolyError> {
    if p.is_zero() {
        return Err(PolyError::ZeroPolynomial);
    }
    let lead = p.leading();
    let monic = match &p.exact {
        Some(e) => {
            let lead_num = e.numerators.last().unwrap().clone();
            let mut q = ComplexPolynomial::from_rationals(e.numerators.clone(), lead_num);
            // the float view of the leading entry is exactly 1 after rounding
            *q.coeffs.last_mut().unwrap() = Complex64::new(1.0, 0.0);
            q
        }
        None => {
            let mut coeffs: Vec<Complex64> = p.coeffs.iter().map(|&c| c / lead).collect();
            *coeffs.last_mut().unwrap() = Complex64::new(1.0, 0.0);
            ComplexPolynomial::new(coeffs)
        }
    };
    Ok((monic, lead))
}
