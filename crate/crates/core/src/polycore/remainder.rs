use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use num_complex::Complex64;

use super::PolyError;

/// `(1+z)^{-n} - s_n(z)` from Taylor's formula with integral remainder,
///
/// ```text
/// (-1)^{n+1} n (2n)!/(n!)^2  ∫_0^z (z-t)^n / (1+t)^{2n+1} dt,
/// ```
///
/// integrated along the segment `[0, z]` by Gauss–Legendre quadrature. The
/// integrand and the factorial prefactor are combined in log form, so the
/// result stays finite as long as it is representable.
pub fn remainder_integral(n: usize, z: Complex64, quad_nodes: usize) -> Result<Complex64, PolyError> {
    if quad_nodes < 16 {
        return Err(PolyError::TooFewNodes(quad_nodes));
    }
    if z.im == 0.0 && z.re <= -1.0 {
        return Err(PolyError::OnCut(z));
    }
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(PolyError::NonFinite("remainder integral"));
    }
    if n == 0 || z == Complex64::new(0.0, 0.0) {
        return Ok(Complex64::new(0.0, 0.0));
    }

    let nf = n as f64;
    // ln(n (2n)!/(n!)^2) = ln n + sum_k ln((n+k)/k)
    let ln_prefactor = nf.ln() + (1..=n).map(|k| ((n + k) as f64 / k as f64).ln()).sum::<f64>();
    let ln_z = z.ln();
    let one = Complex64::new(1.0, 0.0);

    // t = z s, dt = z ds:  z^{n+1} (1-s)^n / (1+zs)^{2n+1}
    let rule = GaussLegendre::new(NonZeroUsize::new(quad_nodes).unwrap());
    let mut sum = Complex64::new(0.0, 0.0);
    for (x, w) in rule.iter() {
        let s = 0.5 * (x + 1.0);
        let log_term = (nf + 1.0) * ln_z + nf * (1.0 - s).ln()
            - (2.0 * nf + 1.0) * (one + z * s).ln()
            + ln_prefactor;
        sum += 0.5 * w * log_term.exp();
    }
    if !sum.re.is_finite() || !sum.im.is_finite() {
        return Err(PolyError::NonFinite("remainder integral"));
    }
    Ok(if n % 2 == 1 { sum } else { -sum })
}
