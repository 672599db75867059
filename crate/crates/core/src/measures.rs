//! Discrete measures, logarithmic potentials and energies, and the closed-form
//! exterior map and Green functions of a real segment `[c, 1]`.

use std::f64::consts::PI;
use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeasureError {
    #[error("points and masses differ in length ({points} vs {masses})")]
    LengthMismatch { points: usize, masses: usize },
    #[error("mass {0} is negative or not finite")]
    BadMass(f64),
    #[error("point {0} is not finite")]
    BadPoint(Complex64),
    #[error("duplicate support point {0}")]
    DuplicatePoint(Complex64),
    #[error("the measure has no atoms")]
    Empty,
    #[error("segment endpoint c = {0} must lie in (0, 1)")]
    BadSegment(f64),
    #[error("Green functions are only available with pole at 0 or infinity, got {0}")]
    UnsupportedPole(Complex64),
    #[error("z = {0} lies on the segment")]
    OnSegment(Complex64),
    #[error("at least {needed} test points are required, got {got}")]
    TooFewTestPoints { needed: usize, got: usize },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Finitely supported positive measure. Duplicate points are merged on
/// construction, so the support points are pairwise distinct.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    points: Vec<Complex64>,
    masses: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct AtomRecord {
    re: f64,
    im: f64,
    mass: f64,
}

impl DiscreteMeasure {
    pub fn new(points: Vec<Complex64>, masses: Vec<f64>) -> Result<Self, MeasureError> {
        if points.len() != masses.len() {
            return Err(MeasureError::LengthMismatch {
                points: points.len(),
                masses: masses.len(),
            });
        }
        if let Some(&m) = masses.iter().find(|m| !(**m >= 0.0) || !m.is_finite()) {
            return Err(MeasureError::BadMass(m));
        }
        if let Some(&p) = points.iter().find(|p| !p.re.is_finite() || !p.im.is_finite()) {
            return Err(MeasureError::BadPoint(p));
        }
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_by(|&a, &b| {
            (points[a].re, points[a].im)
                .partial_cmp(&(points[b].re, points[b].im))
                .unwrap()
        });
        let has_dup = order.windows(2).any(|w| points[w[0]] == points[w[1]]);
        if !has_dup {
            return Ok(Self { points, masses });
        }
        // merge, keeping first-occurrence order
        let mut merged_points: Vec<Complex64> = Vec::with_capacity(points.len());
        let mut merged_masses: Vec<f64> = Vec::with_capacity(points.len());
        let mut index = std::collections::HashMap::new();
        for (p, m) in points.into_iter().zip(masses) {
            let key = (p.re.to_bits(), p.im.to_bits());
            match index.get(&key) {
                Some(&i) => merged_masses[i] += m,
                None => {
                    index.insert(key, merged_points.len());
                    merged_points.push(p);
                    merged_masses.push(m);
                }
            }
        }
        Ok(Self {
            points: merged_points,
            masses: merged_masses,
        })
    }

    /// Unit atom at `p`.
    pub fn dirac(p: Complex64) -> Self {
        Self {
            points: vec![p],
            masses: vec![1.0],
        }
    }

    /// Equal masses `1/n` at the given points (duplicates merged).
    pub fn uniform(points: Vec<Complex64>) -> Result<Self, MeasureError> {
        if points.is_empty() {
            return Err(MeasureError::Empty);
        }
        let m = 1.0 / points.len() as f64;
        let masses = vec![m; points.len()];
        Self::new(points, masses)
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn is_probability(&self) -> bool {
        (self.total_mass() - 1.0).abs() <= 1e-12
    }

    pub fn mean(&self) -> Complex64 {
        self.points
            .iter()
            .zip(&self.masses)
            .map(|(p, m)| p * m)
            .sum::<Complex64>()
            / self.total_mass()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), MeasureError> {
        let mut w = csv::Writer::from_writer(out);
        for (p, &mass) in self.points.iter().zip(&self.masses) {
            w.serialize(AtomRecord {
                re: p.re,
                im: p.im,
                mass,
            })?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self, MeasureError> {
        let mut r = csv::Reader::from_reader(input);
        let mut points = Vec::new();
        let mut masses = Vec::new();
        for rec in r.deserialize() {
            let rec: AtomRecord = rec?;
            points.push(Complex64::new(rec.re, rec.im));
            masses.push(rec.mass);
        }
        Self::new(points, masses)
    }

    pub fn to_json(&self) -> Result<String, MeasureError> {
        let atoms: Vec<AtomRecord> = self
            .points
            .iter()
            .zip(&self.masses)
            .map(|(p, &mass)| AtomRecord {
                re: p.re,
                im: p.im,
                mass,
            })
            .collect();
        Ok(serde_json::to_string_pretty(&atoms)?)
    }

    pub fn from_json(s: &str) -> Result<Self, MeasureError> {
        let atoms: Vec<AtomRecord> = serde_json::from_str(s)?;
        Self::new(
            atoms.iter().map(|a| Complex64::new(a.re, a.im)).collect(),
            atoms.iter().map(|a| a.mass).collect(),
        )
    }
}

/// `U^ν(z) = Σ m_i log(1/|z - p_i|)`; `+∞` when `z` is an atom of positive mass.
pub fn log_potential(nu: &DiscreteMeasure, z: Complex64) -> f64 {
    let mut acc = 0.0;
    for (p, &m) in nu.points.iter().zip(&nu.masses) {
        if m == 0.0 {
            continue;
        }
        let d = (z - p).norm();
        if d == 0.0 {
            return f64::INFINITY;
        }
        acc -= m * d.ln();
    }
    acc
}

/// Nearest-neighbour distance of every atom; `None` for a single atom.
pub fn nearest_neighbor_spacing(points: &[Complex64]) -> Option<Vec<f64>> {
    if points.len() < 2 {
        return None;
    }
    Some(
        points
            .iter()
            .enumerate()
            .map(|(i, p)| {
                points
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, q)| (p - q).norm())
                    .fold(f64::INFINITY, f64::min)
            })
            .collect(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyReport {
    /// `I(τ) + 2∫Q dτ` with the diagonal regularized.
    pub weighted_energy: f64,
    /// Single-atom input: the energy is the self term alone.
    pub degenerate: bool,
}

/// Discrete weighted energy with self term `-log h_i`, `h_i` the
/// nearest-neighbour distance (zero for a single atom).
pub fn weighted_energy<Q>(tau: &DiscreteMeasure, q_at: Q) -> Result<EnergyReport, MeasureError>
where
    Q: Fn(Complex64) -> f64,
{
    if tau.is_empty() {
        return Err(MeasureError::Empty);
    }
    let self_terms = match nearest_neighbor_spacing(&tau.points) {
        Some(h) => h.iter().map(|h| -h.ln()).collect(),
        None => vec![0.0],
    };
    let value = weighted_energy_with_self_terms(tau, q_at, &self_terms)?;
    Ok(EnergyReport {
        weighted_energy: value,
        degenerate: tau.len() == 1,
    })
}

/// Discrete weighted energy with caller-supplied diagonal entries.
pub fn weighted_energy_with_self_terms<Q>(
    tau: &DiscreteMeasure,
    q_at: Q,
    self_terms: &[f64],
) -> Result<f64, MeasureError>
where
    Q: Fn(Complex64) -> f64,
{
    let (p, m) = (&tau.points, &tau.masses);
    assert_eq!(self_terms.len(), p.len());
    let mut cross = 0.0;
    for i in 0..p.len() {
        let mut row = 0.0;
        for j in (i + 1)..p.len() {
            let d = (p[i] - p[j]).norm();
            if d == 0.0 {
                return Err(MeasureError::DuplicatePoint(p[i]));
            }
            row -= m[j] * d.ln();
        }
        cross += m[i] * row;
    }
    let diag: f64 = m.iter().zip(self_terms).map(|(mi, s)| mi * mi * s).sum();
    let field: f64 = p.iter().zip(m).map(|(&pi, mi)| mi * q_at(pi)).sum();
    Ok(2.0 * cross + diag + 2.0 * field)
}

/// Segment `K = [c, 1]` of the real axis, `0 < c < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentGeometry {
    c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Pole {
    Infinity,
    Finite(Complex64),
}

impl SegmentGeometry {
    pub fn new(c: f64) -> Result<Self, MeasureError> {
        if c > 0.0 && c < 1.0 {
            Ok(Self { c })
        } else {
            Err(MeasureError::BadSegment(c))
        }
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn capacity(&self) -> f64 {
        (1.0 - self.c) / 4.0
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.im == 0.0 && z.re >= self.c && z.re <= 1.0
    }

    fn half_width(&self) -> f64 {
        0.5 * (1.0 - self.c)
    }

    fn midpoint(&self) -> f64 {
        0.5 * (1.0 + self.c)
    }
}

/// Exterior conformal map of `C \ [c,1]` onto `C \ closed unit disk`,
/// `φ(z) = (2/(1-c)) [z - (1+c)/2 + sqrt((z-c)(z-1))]`, with the square root
/// branch that behaves like `z` at infinity. Points on the segment take the
/// limit from the upper half plane.
pub fn phi_segment(z: Complex64, geom: &SegmentGeometry) -> Complex64 {
    // signed zero decides the side of the cut
    let z = if z.im == 0.0 {
        Complex64::new(z.re, 0.0)
    } else {
        z
    };
    let u = z - geom.midpoint();
    let d = geom.half_width();
    let root = (u - d).sqrt() * (u + d).sqrt();
    (u + root) / d
}

/// Green function of `C \ [c,1]` with pole at infinity or at 0.
pub fn green_segment(z: Complex64, pole: Pole, geom: &SegmentGeometry) -> Result<f64, MeasureError> {
    match pole {
        Pole::Infinity => {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Ok(f64::INFINITY);
            }
            Ok(phi_segment(z, geom).norm().ln().max(0.0))
        }
        Pole::Finite(a) if a == Complex64::new(0.0, 0.0) => {
            if z == a {
                return Ok(f64::INFINITY);
            }
            let f0 = phi_segment(a, geom);
            let f = phi_segment(z, geom);
            let num = Complex64::new(1.0, 0.0) - f0.conj() * f;
            Ok((num.norm() / (f - f0).norm()).ln().max(0.0))
        }
        Pole::Finite(a) => Err(MeasureError::UnsupportedPole(a)),
    }
}

/// `g(z, 0) - 2 g(z, ∞)` for `C \ [c,1]`, which equals
/// `U^{μ} + Q - F` for the weight `W(z) = z` on `[c, 1]` (`1/4 < c < 1`).
pub fn incomplete_level_value(z: Complex64, geom: &SegmentGeometry) -> f64 {
    let g0 = green_segment(z, Pole::Finite(Complex64::new(0.0, 0.0)), geom).unwrap();
    if g0.is_infinite() {
        return f64::INFINITY;
    }
    let ginf = green_segment(z, Pole::Infinity, geom).unwrap();
    g0 - 2.0 * ginf
}

/// Potential of the unweighted equilibrium measure of `[c,1]`:
/// `-log|φ(z)| + log(4/(1-c))`.
pub fn segment_equilibrium_potential(z: Complex64, geom: &SegmentGeometry) -> f64 {
    -phi_segment(z, geom).norm().ln() + (1.0 / geom.capacity()).ln()
}

/// Gauss–Chebyshev sample of the weighted equilibrium measure of `[c,1]`
/// for `W(z) = z`, whose density is `(2 - sqrt(c)/x) / (π sqrt((x-c)(1-x)))`.
pub fn segment_weighted_equilibrium(geom: &SegmentGeometry, m: usize) -> DiscreteMeasure {
    let (mid, half) = (geom.midpoint(), geom.half_width());
    let sc = geom.c.sqrt();
    let mut points = Vec::with_capacity(m);
    let mut masses = Vec::with_capacity(m);
    for k in 0..m {
        let theta = PI * (k as f64 + 0.5) / m as f64;
        let x = mid - half * theta.cos();
        points.push(Complex64::new(x, 0.0));
        masses.push(((2.0 - sc / x) / m as f64).max(0.0));
    }
    DiscreteMeasure { points, masses }
}

/// Largest deviation between `U^μ` and the balayage expression
/// `2U^{μ_K} - U^{δ_0} + g(·,0) + C` over the test points, with the additive
/// constant `C` fitted at the first point.
pub fn balayage_identity_residual(
    geom: &SegmentGeometry,
    mu: &DiscreteMeasure,
    test_points: &[Complex64],
) -> Result<f64, MeasureError> {
    balayage_identity_deviations(geom, mu, test_points)
        .map(|d| d.into_iter().fold(0.0, f64::max))
}

/// Per-point deviations behind [`balayage_identity_residual`].
pub fn balayage_identity_deviations(
    geom: &SegmentGeometry,
    mu: &DiscreteMeasure,
    test_points: &[Complex64],
) -> Result<Vec<f64>, MeasureError> {
    if test_points.len() < 2 {
        return Err(MeasureError::TooFewTestPoints {
            needed: 2,
            got: test_points.len(),
        });
    }
    let origin = Complex64::new(0.0, 0.0);
    let mut diffs = Vec::with_capacity(test_points.len());
    for &z in test_points {
        if geom.contains(z) || z == origin {
            return Err(MeasureError::OnSegment(z));
        }
        let closed_form = 2.0 * segment_equilibrium_potential(z, geom) + z.norm().ln()
            + green_segment(z, Pole::Finite(origin), geom)?;
        diffs.push(log_potential(mu, z) - closed_form);
    }
    let offset = diffs[0];
    Ok(diffs.into_iter().map(|d| (d - offset).abs()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{E, TAU};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn circle(m: usize) -> Vec<Complex64> {
        (0..m)
            .map(|k| Complex64::from_polar(1.0, TAU * k as f64 / m as f64))
            .collect()
    }

    #[test]
    fn potential_of_point_mass() {
        let d = DiscreteMeasure::dirac(c(0.0, 0.0));
        assert_abs_diff_eq!(log_potential(&d, c(E, 0.0)), -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(log_potential(&d, c(1.0, 0.0)), 0.0);
        assert_eq!(log_potential(&d, c(0.0, 0.0)), f64::INFINITY);
    }

    #[test]
    fn circle_potential_at_center() {
        let nu = DiscreteMeasure::uniform(circle(1000)).unwrap();
        assert!(log_potential(&nu, c(0.0, 0.0)).abs() < 1e-9);
    }

    #[test]
    fn duplicates_are_merged() {
        let nu = DiscreteMeasure::new(vec![c(1.0, 0.0), c(2.0, 0.0), c(1.0, 0.0)], vec![0.25, 0.5, 0.25])
            .unwrap();
        assert_eq!(nu.len(), 2);
        assert_eq!(nu.masses(), &[0.5, 0.5]);
        assert!(nu.is_probability());
        assert!(DiscreteMeasure::new(vec![c(0.0, 0.0)], vec![-1.0]).is_err());
        assert!(DiscreteMeasure::new(vec![c(0.0, 0.0)], vec![]).is_err());
    }

    #[test]
    fn energy_two_atoms() {
        let tau = DiscreteMeasure::new(vec![c(0.0, 0.0), c(1.0, 0.0)], vec![0.5, 0.5]).unwrap();
        let e = weighted_energy(&tau, |_| 0.0).unwrap();
        assert_abs_diff_eq!(e.weighted_energy, 0.0, epsilon = 1e-15);
        assert!(!e.degenerate);
    }

    #[test]
    fn energy_single_atom_is_flagged() {
        let e = weighted_energy(&DiscreteMeasure::dirac(c(0.3, 0.1)), |_| 0.0).unwrap();
        assert!(e.degenerate);
        assert_eq!(e.weighted_energy, 0.0);
        let e = weighted_energy(&DiscreteMeasure::dirac(c(0.3, 0.1)), |_| 1.5).unwrap();
        assert_abs_diff_eq!(e.weighted_energy, 3.0);
    }

    #[test]
    fn energy_of_circle_is_near_zero() {
        let tau = DiscreteMeasure::uniform(circle(2000)).unwrap();
        let e = weighted_energy(&tau, |_| 0.0).unwrap();
        assert!(e.weighted_energy.abs() < 5e-3, "{}", e.weighted_energy);
    }

    #[test]
    fn energy_rejects_duplicates() {
        // bypass the merging constructor
        let tau = DiscreteMeasure {
            points: vec![c(0.0, 0.0), c(0.0, 0.0)],
            masses: vec![0.5, 0.5],
        };
        assert!(matches!(
            weighted_energy_with_self_terms(&tau, |_| 0.0, &[0.0, 0.0]),
            Err(MeasureError::DuplicatePoint(_))
        ));
    }

    #[test]
    fn phi_endpoints_and_midpoint() {
        let g = SegmentGeometry::new(0.5).unwrap();
        assert!((phi_segment(c(1.0, 0.0), &g) - c(1.0, 0.0)).norm() < 1e-15);
        assert!((phi_segment(c(0.5, 0.0), &g) - c(-1.0, 0.0)).norm() < 1e-15);
        assert!((phi_segment(c(0.75, 0.0), &g) - c(0.0, 1.0)).norm() < 1e-15);
        assert!((phi_segment(c(0.75, -0.0), &g) - c(0.0, 1.0)).norm() < 1e-15);
        for z in [c(2.0, 0.0), c(-3.0, 0.0), c(0.75, 0.1), c(0.0, -4.0), c(0.2, 0.0)] {
            assert!(phi_segment(z, &g).norm() > 1.0);
        }
        assert!(SegmentGeometry::new(1.0).is_err());
        assert!(SegmentGeometry::new(0.0).is_err());
    }

    #[test]
    fn green_values() {
        let g = SegmentGeometry::new(0.5).unwrap();
        let zero = Pole::Finite(c(0.0, 0.0));
        let above = c(0.75, 1e-12);
        assert!(green_segment(above, Pole::Infinity, &g).unwrap() < 1e-6);
        assert!(green_segment(above, zero, &g).unwrap() < 1e-6);

        let far = green_segment(c(1e4, 0.0), Pole::Infinity, &g).unwrap()
            - green_segment(c(1e3, 0.0), Pole::Infinity, &g).unwrap();
        assert_abs_diff_eq!(far, 10f64.ln(), epsilon = 1e-3);

        assert_eq!(green_segment(c(0.0, 0.0), zero, &g).unwrap(), f64::INFINITY);
        assert!(green_segment(c(0.01, 0.0), zero, &g).unwrap() > 2.0);
        assert!(matches!(
            green_segment(c(0.1, 0.0), Pole::Finite(c(0.2, 0.0)), &g),
            Err(MeasureError::UnsupportedPole(_))
        ));
    }

    #[test]
    fn capacity_from_phi_expansion() {
        let g = SegmentGeometry::new(0.3).unwrap();
        let z = c(1e7, 3e6);
        let robin = green_segment(z, Pole::Infinity, &g).unwrap() - z.norm().ln();
        assert_abs_diff_eq!((-robin).exp(), g.capacity(), epsilon = 1e-6);
    }

    #[test]
    fn level_value_limits() {
        let g = SegmentGeometry::new(0.5).unwrap();
        assert!(incomplete_level_value(c(0.8, 0.0), &g).abs() < 1e-12);
        assert!(incomplete_level_value(c(1e8, 0.0), &g) < -30.0);
        assert_eq!(incomplete_level_value(c(0.0, 0.0), &g), f64::INFINITY);
    }

    #[test]
    fn level_value_has_real_saddle_between_lobes() {
        let g = SegmentGeometry::new(0.5).unwrap();
        let f = |x: f64| incomplete_level_value(c(x, 0.0), &g);
        // brute-force scan of (0, 1/2): positive near 0, negative just left of c
        let xs: Vec<f64> = (1..500).map(|k| 0.5 * k as f64 / 500.0).collect();
        let (imin, _) = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| (i, f(x)))
            .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
        assert!(imin > 0 && imin < xs.len() - 1);
        assert!(f(xs[imin]) < 0.0);
        assert!(f(0.01) > 0.0);
        // maximum in the vertical direction at the same point
        let x0 = xs[imin];
        assert!(incomplete_level_value(c(x0, 0.02), &g) < f(x0));
    }

    #[test]
    fn analytic_weighted_measure_has_unit_mass() {
        let g = SegmentGeometry::new(0.5).unwrap();
        let mu = segment_weighted_equilibrium(&g, 4000);
        assert!((mu.total_mass() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn balayage_identity_with_exact_sample() {
        let g = SegmentGeometry::new(0.5).unwrap();
        let mu = segment_weighted_equilibrium(&g, 4000);
        let pts = [c(0.25, 0.3), c(10.0, 0.0), c(-0.5, 0.0), c(0.75, 0.5), c(0.0, 1.5), c(1.5, -0.2)];
        let devs = balayage_identity_deviations(&g, &mu, &pts).unwrap();
        assert!(devs.iter().all(|&d| d <= 1e-3), "{devs:?}");
        assert!(devs[1] <= 1e-3);
        assert!(matches!(
            balayage_identity_residual(&g, &mu, &pts[..1]),
            Err(MeasureError::TooFewTestPoints { .. })
        ));
    }

    #[test]
    fn csv_and_json_round_trip() {
        let nu = DiscreteMeasure::new(vec![c(0.5, -0.25), c(1.0, 2.0)], vec![0.75, 0.25]).unwrap();
        let mut buf = Vec::new();
        nu.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("re,im,mass\n"));
        assert_eq!(DiscreteMeasure::read_csv(&buf[..]).unwrap(), nu);
        assert_eq!(DiscreteMeasure::from_json(&nu.to_json().unwrap()).unwrap(), nu);
    }
}
