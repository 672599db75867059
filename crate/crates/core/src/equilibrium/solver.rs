//! Frank–Wolfe with away steps for the discrete weighted energy
//! `I^w(m) = mᵀ K m + 2 qᵀ m` over the probability simplex on the nodes.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{EquilibriumError, WeightedCompact};
use crate::measures::{log_potential, DiscreteMeasure};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumOptions {
    pub max_iters: usize,
    /// Stop once the Frank–Wolfe and away gaps of `I^w` are both below this.
    pub gap_tol: f64,
    /// Keep the energy of every iterate in [`EquilibriumSolution::energy_history`].
    pub record_history: bool,
}

impl Default for EquilibriumOptions {
    fn default() -> Self {
        Self {
            max_iters: 200_000,
            gap_tol: 1e-6,
            record_history: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumSolution {
    /// Masses on every node of the compact, zeros included, in node order.
    pub measure: DiscreteMeasure,
    /// `F = V_w - ∫Q dμ`.
    pub f_const: f64,
    /// Minimal discrete weighted energy.
    pub v_w: f64,
    /// Frank–Wolfe duality gap of the final iterate.
    pub duality_gap: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Discrete potential `(K m)_i` at the nodes, diagonal regularized.
    pub node_potentials: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub energy_history: Vec<f64>,
}

impl EquilibriumSolution {
    /// Diagnostics of an arbitrary probability vector on the nodes of `k`.
    pub fn from_masses(k: &WeightedCompact, masses: Vec<f64>) -> Result<Self, EquilibriumError> {
        let kernel = Kernel::assemble(k)?;
        Self::from_parts(k, &kernel, masses, 0, false, Vec::new())
    }

    fn from_parts(
        k: &WeightedCompact,
        kernel: &Kernel,
        masses: Vec<f64>,
        iterations: usize,
        converged: bool,
        energy_history: Vec<f64>,
    ) -> Result<Self, EquilibriumError> {
        if masses.len() != k.len()
            || masses.iter().any(|m| !(*m >= 0.0))
            || (masses.iter().sum::<f64>() - 1.0).abs() > 1e-9
        {
            return Err(EquilibriumError::BadMasses);
        }
        if masses
            .iter()
            .zip(k.q_values())
            .any(|(m, q)| *m > 0.0 && !q.is_finite())
        {
            return Err(EquilibriumError::BadMasses);
        }
        let u = kernel.potentials(&masses);
        let (energy, field) = energy_parts(&masses, &u, k.q_values());
        let gaps = gaps(&masses, &u, k.q_values());
        Ok(Self {
            measure: DiscreteMeasure::new(k.nodes().to_vec(), masses)?,
            f_const: energy + field,
            v_w: energy + 2.0 * field,
            duality_gap: 2.0 * gaps.forward,
            iterations,
            converged,
            node_potentials: u,
            energy_history,
        })
    }

    /// Nodes whose mass exceeds `floor`.
    pub fn support(&self, floor: f64) -> Vec<Complex64> {
        self.measure
            .points()
            .iter()
            .zip(self.measure.masses())
            .filter(|(_, m)| **m > floor)
            .map(|(p, _)| *p)
            .collect()
    }

    /// Support threshold `1/(10 M)`.
    pub fn mass_floor(&self) -> f64 {
        self.measure.total_mass() / (10.0 * self.measure.len() as f64)
    }

    /// `U^μ(z)`, using the regularized node value when `z` is a node.
    pub fn potential(&self, z: Complex64) -> f64 {
        match self.measure.points().iter().position(|p| *p == z) {
            Some(i) => self.node_potentials[i],
            None => log_potential(&self.measure, z),
        }
    }
}

/// Dense symmetric kernel `K_ij = -log|z_i - z_j|`, diagonal from the cells.
struct Kernel {
    m: usize,
    data: Vec<f64>,
}

impl Kernel {
    fn assemble(k: &WeightedCompact) -> Result<Self, EquilibriumError> {
        let m = k.len();
        let nodes = k.nodes();
        let mut data = vec![0.0; m * m];
        data.par_chunks_mut(m).enumerate().for_each(|(i, row)| {
            for (j, entry) in row.iter_mut().enumerate() {
                *entry = if i == j {
                    k.self_energy(i)
                } else {
                    -(nodes[i] - nodes[j]).norm().ln()
                };
            }
        });
        if let Some(i) = data.iter().position(|v| v.is_infinite()) {
            return Err(EquilibriumError::DuplicateNodes(i / m, i % m));
        }
        Ok(Self { m, data })
    }

    fn column(&self, j: usize) -> &[f64] {
        // symmetric: column j is row j
        &self.data[j * self.m..(j + 1) * self.m]
    }

    fn potentials(&self, masses: &[f64]) -> Vec<f64> {
        let support: Vec<(usize, f64)> = masses
            .iter()
            .enumerate()
            .filter(|(_, m)| **m > 0.0)
            .map(|(j, m)| (j, *m))
            .collect();
        (0..self.m)
            .into_par_iter()
            .map(|i| {
                let row = self.column(i);
                support.iter().map(|&(j, m)| row[j] * m).sum()
            })
            .collect()
    }
}

/// `(mᵀKm, qᵀm)`.
fn energy_parts(masses: &[f64], u: &[f64], q: &[f64]) -> (f64, f64) {
    let mut energy = 0.0;
    let mut field = 0.0;
    for ((m, u), q) in masses.iter().zip(u).zip(q) {
        if *m > 0.0 {
            energy += m * u;
            field += m * q;
        }
    }
    (energy, field)
}

struct Gaps {
    /// `F - min_i (U_i + Q_i)` over admissible nodes.
    forward: f64,
    /// `max_{supp} (U_i + Q_i) - F`.
    away: f64,
    toward: usize,
    from: usize,
}

fn gaps(masses: &[f64], u: &[f64], q: &[f64]) -> Gaps {
    let mut f = 0.0;
    let (mut lo, mut toward) = (f64::INFINITY, 0);
    let (mut hi, mut from) = (f64::NEG_INFINITY, 0);
    for i in 0..masses.len() {
        if !q[i].is_finite() {
            continue;
        }
        let g = u[i] + q[i];
        if masses[i] > 0.0 {
            f += masses[i] * g;
            if g > hi {
                hi = g;
                from = i;
            }
        }
        if g < lo {
            lo = g;
            toward = i;
        }
    }
    Gaps {
        forward: (f - lo).max(0.0),
        away: (hi - f).max(0.0),
        toward,
        from,
    }
}

/// Minimizes the discrete weighted energy; starts from equal masses on the
/// nodes with positive weight.
pub fn solve_equilibrium(
    k: &WeightedCompact,
    opts: &EquilibriumOptions,
) -> Result<EquilibriumSolution, EquilibriumError> {
    if !(opts.gap_tol > 0.0) {
        return Err(EquilibriumError::BadTolerance(opts.gap_tol));
    }
    let kernel = Kernel::assemble(k)?;
    let q = k.q_values();
    let admissible: Vec<usize> = k.admissible().collect();
    let mut masses = vec![0.0; k.len()];
    for &i in &admissible {
        masses[i] = 1.0 / admissible.len() as f64;
    }
    let mut u = kernel.potentials(&masses);
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    // refresh U = Km from scratch now and then to stop drift
    const REFRESH: usize = 2_000;

    loop {
        let g = gaps(&masses, &u, q);
        if opts.record_history {
            let (e, f) = energy_parts(&masses, &u, q);
            history.push(e + 2.0 * f);
        }
        if 2.0 * g.forward.max(g.away) <= opts.gap_tol {
            converged = true;
            break;
        }
        if iterations >= opts.max_iters {
            break;
        }
        iterations += 1;

        let (energy, _) = energy_parts(&masses, &u, q);
        let forward_step = g.forward >= g.away;
        let (idx, slope, gamma_max) = if forward_step {
            (g.toward, -g.forward, 1.0)
        } else {
            let ma = masses[g.from];
            (g.from, -g.away, if ma < 1.0 { ma / (1.0 - ma) } else { f64::INFINITY })
        };
        let col = kernel.column(idx);
        // dᵀKd for d = e_s - m, or d = m - e_a
        let curvature = col[idx] - 2.0 * u[idx] + energy;
        let gamma = if curvature > 0.0 {
            (-slope / curvature).min(gamma_max)
        } else {
            gamma_max
        };
        if !(gamma > 0.0) || !gamma.is_finite() {
            break;
        }

        if forward_step {
            for (m, ui) in masses.iter_mut().zip(u.iter_mut()) {
                *m *= 1.0 - gamma;
                *ui *= 1.0 - gamma;
            }
            masses[idx] += gamma;
            for (ui, c) in u.iter_mut().zip(col) {
                *ui += gamma * c;
            }
        } else {
            let drop = gamma >= gamma_max;
            for (m, ui) in masses.iter_mut().zip(u.iter_mut()) {
                *m *= 1.0 + gamma;
                *ui *= 1.0 + gamma;
            }
            masses[idx] -= gamma;
            if drop {
                masses[idx] = 0.0;
            }
            for (ui, c) in u.iter_mut().zip(col) {
                *ui -= gamma * c;
            }
        }
        if iterations % REFRESH == 0 {
            let total: f64 = masses.iter().sum();
            masses.iter_mut().for_each(|m| *m /= total);
            u = kernel.potentials(&masses);
        }
    }

    let total: f64 = masses.iter().sum();
    masses.iter_mut().for_each(|m| *m /= total);
    EquilibriumSolution::from_parts(k, &kernel, masses, iterations, converged, history)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrostmanResiduals {
    /// `max_K (F - U - Q)_+`.
    pub lower_violation: f64,
    /// `max_{supp μ} (U + Q - F)_+`, support = mass above `1/(10M)`.
    pub upper_violation: f64,
}

pub fn frostman_residuals(sol: &EquilibriumSolution, k: &WeightedCompact) -> FrostmanResiduals {
    let floor = sol.mass_floor();
    let mut lower = 0.0f64;
    let mut upper = 0.0f64;
    for ((u, q), m) in sol
        .node_potentials
        .iter()
        .zip(k.q_values())
        .zip(sol.measure.masses())
    {
        if !q.is_finite() {
            continue;
        }
        let g = u + q - sol.f_const;
        lower = lower.max(-g);
        if *m > floor {
            upper = upper.max(g);
        }
    }
    FrostmanResiduals {
        lower_violation: lower,
        upper_violation: upper,
    }
}

/// `V*(z) = -U^μ(z) + F`.
pub fn extremal_function(sol: &EquilibriumSolution, z: Complex64) -> f64 {
    -sol.potential(z) + sol.f_const
}

/// Right side of the weighted Bernstein–Walsh inequality,
/// `sup_norm · exp(n V*(z))`.
pub fn bernstein_walsh_bound(sol: &EquilibriumSolution, sup_norm_on_sw: f64, n: usize, z: Complex64) -> f64 {
    if n == 0 {
        return sup_norm_on_sw;
    }
    sup_norm_on_sw * (n as f64 * extremal_function(sol, z)).exp()
}
