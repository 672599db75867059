use std::f64::consts::{LN_2, PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::EquilibriumError;

/// Geometry of the cell a node stands for; fixes the diagonal of the discrete
/// logarithmic kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellKind {
    /// Arc element of length `h`: mean of `-log|x-y|` over the cell.
    Arc,
    /// Square area element of side `h`: mean of `-log|x-y|` over the cell.
    Area,
    /// Bare nearest-neighbour rule `-log h`.
    Atom,
}

/// `E[-log|X-Y|]` for `X, Y` uniform on the unit square.
const UNIT_SQUARE_LOG_ENERGY: f64 = 25.0 / 12.0 - PI / 3.0 - LN_2 / 3.0;

impl CellKind {
    pub fn self_energy(self, h: f64) -> f64 {
        match self {
            CellKind::Arc => -h.ln() + 1.5,
            CellKind::Area => -h.ln() + UNIT_SQUARE_LOG_ENERGY,
            CellKind::Atom => -h.ln(),
        }
    }
}

/// Discretization of a compact `K` with weight `w = |W|` and `Q = -log w`
/// sampled at the nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CompactRepr", into = "CompactRepr")]
pub struct WeightedCompact {
    nodes: Vec<Complex64>,
    w_values: Vec<f64>,
    q_values: Vec<f64>,
    local_spacing: Vec<f64>,
    cells: Vec<CellKind>,
    label: String,
}

// Q is rebuilt from w on load, since -log 0 has no JSON encoding.
#[derive(Serialize, Deserialize)]
struct CompactRepr {
    label: String,
    nodes: Vec<Complex64>,
    w_values: Vec<f64>,
    local_spacing: Vec<f64>,
    cells: Vec<CellKind>,
}

impl TryFrom<CompactRepr> for WeightedCompact {
    type Error = EquilibriumError;

    fn try_from(r: CompactRepr) -> Result<Self, Self::Error> {
        WeightedCompact::new(r.nodes, r.w_values, r.local_spacing, r.cells, r.label)
    }
}

impl From<WeightedCompact> for CompactRepr {
    fn from(k: WeightedCompact) -> Self {
        CompactRepr {
            label: k.label,
            nodes: k.nodes,
            w_values: k.w_values,
            local_spacing: k.local_spacing,
            cells: k.cells,
        }
    }
}

impl WeightedCompact {
    pub fn new(
        nodes: Vec<Complex64>,
        w_values: Vec<f64>,
        local_spacing: Vec<f64>,
        cells: Vec<CellKind>,
        label: impl Into<String>,
    ) -> Result<Self, EquilibriumError> {
        let n = nodes.len();
        if n == 0 {
            return Err(EquilibriumError::Empty);
        }
        if w_values.len() != n || local_spacing.len() != n || cells.len() != n {
            return Err(EquilibriumError::LengthMismatch);
        }
        if let Some(&z) = nodes.iter().find(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(EquilibriumError::BadNode(z));
        }
        for (index, &value) in w_values.iter().enumerate() {
            if !(value >= 0.0) || !value.is_finite() {
                return Err(EquilibriumError::BadWeight { index, value });
            }
        }
        for (index, &value) in local_spacing.iter().enumerate() {
            if !(value > 0.0) || !value.is_finite() {
                return Err(EquilibriumError::BadSpacing { index, value });
            }
        }
        if w_values.iter().all(|&w| w == 0.0) {
            return Err(EquilibriumError::NoPositiveWeight);
        }
        let q_values = w_values.iter().map(|w| -w.ln()).collect();
        Ok(Self {
            nodes,
            w_values,
            q_values,
            local_spacing,
            cells,
            label: label.into(),
        })
    }

    /// Unweighted (`w ≡ 1`) compact.
    pub fn unweighted(
        nodes: Vec<Complex64>,
        local_spacing: Vec<f64>,
        cells: Vec<CellKind>,
        label: impl Into<String>,
    ) -> Result<Self, EquilibriumError> {
        let w = vec![1.0; nodes.len()];
        Self::new(nodes, w, local_spacing, cells, label)
    }

    /// Replaces the weight by `w(z)` evaluated at the nodes.
    pub fn with_weight<F>(self, w: F) -> Result<Self, EquilibriumError>
    where
        F: Fn(Complex64) -> f64,
    {
        let w_values = self.nodes.iter().map(|&z| w(z)).collect();
        Self::new(self.nodes, w_values, self.local_spacing, self.cells, self.label)
    }

    /// Replaces the weight by `exp(-Q(z))`.
    pub fn with_field<F>(self, q: F) -> Result<Self, EquilibriumError>
    where
        F: Fn(Complex64) -> f64,
    {
        self.with_weight(|z| (-q(z)).exp())
    }

    /// Multiplies every weight by `t > 0`.
    pub fn scale_weights(&self, t: f64) -> Result<Self, EquilibriumError> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(EquilibriumError::BadParameter(format!("weight scale {t} must be positive")));
        }
        Self::new(
            self.nodes.clone(),
            self.w_values.iter().map(|w| w * t).collect(),
            self.local_spacing.clone(),
            self.cells.clone(),
            self.label.clone(),
        )
    }

    /// `m` equally spaced nodes on the circle `|z - center| = radius`.
    pub fn circle(center: Complex64, radius: f64, m: usize) -> Result<Self, EquilibriumError> {
        check_positive("radius", radius)?;
        let nodes = (0..m)
            .map(|k| center + Complex64::from_polar(radius, TAU * k as f64 / m as f64))
            .collect();
        let h = TAU * radius / m as f64;
        Self::unweighted(nodes, vec![h; m], vec![CellKind::Arc; m], format!("circle(m={m})"))
    }

    /// Chebyshev nodes `x_k = (a+b)/2 - (b-a)/2 cos(π(k+1/2)/m)` on the real
    /// segment `[a, b]`; cell lengths follow the arcsine density.
    pub fn segment(a: f64, b: f64, m: usize) -> Result<Self, EquilibriumError> {
        if !(b > a) || !a.is_finite() || !b.is_finite() {
            return Err(EquilibriumError::BadParameter(format!("segment [{a}, {b}]")));
        }
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        let mut nodes = Vec::with_capacity(m);
        let mut spacing = Vec::with_capacity(m);
        for k in 0..m {
            let theta = PI * (k as f64 + 0.5) / m as f64;
            nodes.push(Complex64::new(mid - half * theta.cos(), 0.0));
            spacing.push(half * theta.sin() * PI / m as f64);
        }
        Self::unweighted(nodes, spacing, vec![CellKind::Arc; m], format!("segment([{a}, {b}], m={m})"))
    }

    /// Closed disk: `m_boundary` arc nodes on the circle plus a square grid of
    /// side `interior_spacing` strictly inside it.
    pub fn disk(
        center: Complex64,
        radius: f64,
        m_boundary: usize,
        interior_spacing: f64,
    ) -> Result<Self, EquilibriumError> {
        check_positive("radius", radius)?;
        check_positive("interior spacing", interior_spacing)?;
        let boundary = Self::circle(center, radius, m_boundary)?;
        let mut nodes = boundary.nodes;
        let mut spacing = boundary.local_spacing;
        let mut cells = boundary.cells;
        let h = interior_spacing;
        let steps = (radius / h).floor() as i64;
        for i in -steps..=steps {
            for j in -steps..=steps {
                let offset = Complex64::new(i as f64 * h, j as f64 * h);
                if offset.norm() <= radius - 0.5 * h {
                    nodes.push(center + offset);
                    spacing.push(h);
                    cells.push(CellKind::Area);
                }
            }
        }
        Self::unweighted(nodes, spacing, cells, format!("disk(m_boundary={m_boundary}, h={h})"))
    }

    /// Nodes along a closed curve, in order; each cell spans half the chord to
    /// either neighbour.
    pub fn closed_curve(points: Vec<Complex64>, label: impl Into<String>) -> Result<Self, EquilibriumError> {
        let m = points.len();
        if m < 3 {
            return Err(EquilibriumError::BadParameter(format!(
                "a closed curve needs at least 3 nodes, got {m}"
            )));
        }
        let spacing = (0..m)
            .map(|k| {
                let prev = points[(k + m - 1) % m];
                let next = points[(k + 1) % m];
                0.5 * ((points[k] - prev).norm() + (next - points[k]).norm())
            })
            .collect();
        Self::unweighted(points, spacing, vec![CellKind::Arc; m], label)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Complex64] {
        &self.nodes
    }

    pub fn w_values(&self) -> &[f64] {
        &self.w_values
    }

    pub fn q_values(&self) -> &[f64] {
        &self.q_values
    }

    pub fn local_spacing(&self) -> &[f64] {
        &self.local_spacing
    }

    pub fn cells(&self) -> &[CellKind] {
        &self.cells
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Diagonal entry of the discrete kernel at node `i`.
    pub fn self_energy(&self, i: usize) -> f64 {
        self.cells[i].self_energy(self.local_spacing[i])
    }

    /// Nodes with positive weight, the only ones that can carry mass.
    pub fn admissible(&self) -> impl Iterator<Item = usize> + '_ {
        self.q_values.iter().enumerate().filter(|(_, q)| q.is_finite()).map(|(i, _)| i)
    }

    pub fn to_json(&self) -> Result<String, EquilibriumError> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self, EquilibriumError> {
        Ok(serde_json::from_str(s)?)
    }
}

fn check_positive(what: &str, x: f64) -> Result<(), EquilibriumError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(EquilibriumError::BadParameter(format!("{what} must be positive, got {x}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_is_minus_log_w() {
        let k = WeightedCompact::circle(Complex64::new(0.0, 0.0), 1.0, 16)
            .unwrap()
            .with_weight(|z| if z.re < -0.9 { 0.0 } else { (1.0 + z).norm() })
            .unwrap();
        for (w, q) in k.w_values().iter().zip(k.q_values()) {
            if *w > 0.0 {
                assert!((q + w.ln()).abs() < 1e-12);
            }
        }
        assert_eq!(k.q_values()[8], f64::INFINITY);
        assert_eq!(k.admissible().count(), 13);
    }

    #[test]
    fn rejects_invalid_input() {
        let z = vec![Complex64::new(0.0, 0.0)];
        assert!(matches!(
            WeightedCompact::new(z.clone(), vec![0.0], vec![1.0], vec![CellKind::Atom], "x"),
            Err(EquilibriumError::NoPositiveWeight)
        ));
        assert!(matches!(
            WeightedCompact::new(z.clone(), vec![1.0], vec![0.0], vec![CellKind::Atom], "x"),
            Err(EquilibriumError::BadSpacing { .. })
        ));
        assert!(matches!(
            WeightedCompact::new(z, vec![1.0, 1.0], vec![1.0], vec![CellKind::Atom], "x"),
            Err(EquilibriumError::LengthMismatch)
        ));
        assert!(WeightedCompact::new(vec![], vec![], vec![], vec![], "x").is_err());
    }

    #[test]
    fn square_cell_constant() {
        assert!((UNIT_SQUARE_LOG_ENERGY - 0.805_086_721_950_087).abs() < 1e-14);
    }

    #[test]
    fn segment_cells_cover_the_segment() {
        let k = WeightedCompact::segment(0.5, 1.0, 400).unwrap();
        let total: f64 = k.local_spacing().iter().sum();
        assert!((total - 0.5).abs() < 1e-5);
        assert!(k.nodes().iter().all(|z| z.re > 0.5 && z.re < 1.0));
    }

    #[test]
    fn disk_has_boundary_and_interior() {
        let k = WeightedCompact::disk(Complex64::new(1.0, 0.0), 0.25, 64, 0.05).unwrap();
        let interior = k.cells().iter().filter(|c| **c == CellKind::Area).count();
        assert!(interior > 50);
        assert!(k.nodes()[64..].iter().all(|z| (z - 1.0).norm() < 0.25));
    }

    #[test]
    fn json_round_trip_with_zero_weight() {
        let k = WeightedCompact::circle(Complex64::new(0.0, 0.0), 1.0, 8)
            .unwrap()
            .with_weight(|z| if z.re < -0.9 { 0.0 } else { 1.0 })
            .unwrap();
        let back = WeightedCompact::from_json(&k.to_json().unwrap()).unwrap();
        assert_eq!(back.label(), k.label());
        assert_eq!(back.q_values()[4], f64::INFINITY);
        assert_eq!(back.nodes(), k.nodes());
    }
}
