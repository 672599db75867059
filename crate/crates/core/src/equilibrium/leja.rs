use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{EquilibriumError, WeightedCompact};

/// Greedy weighted Leja sequence with the norms `‖w^m F_m‖` on the nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeketeSequence {
    pub points: Vec<Complex64>,
    /// Node indices of `points` in the compact.
    pub indices: Vec<usize>,
    /// `log ‖w^m F_m‖_K` for `m = 1..=n`, `F_m = ∏_{j≤m} (z - t_j)`.
    pub log_weighted_norms: Vec<f64>,
}

impl FeketeSequence {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `‖w^m F_m‖_K`.
    pub fn weighted_norm(&self, m: usize) -> f64 {
        self.log_weighted_norms[m - 1].exp()
    }

    /// `‖w^m F_m‖_K^{1/m}`, which tends to `exp(-F)`.
    pub fn norm_root(&self, m: usize) -> f64 {
        (self.log_weighted_norms[m - 1] / m as f64).exp()
    }
}

/// `t_m = argmax_z w(z)^m ∏_{j<m} |z - t_j|` over the nodes, `m = 1..=n`.
pub fn weighted_leja(k: &WeightedCompact, n: usize) -> Result<FeketeSequence, EquilibriumError> {
    let available = k.admissible().count();
    if n > available {
        return Err(EquilibriumError::TooManyPoints { requested: n, available });
    }
    let nodes = k.nodes();
    let q = k.q_values();
    // Σ_j log|z_i - t_j|, -inf once z_i is chosen
    let mut log_prod = vec![0.0f64; nodes.len()];
    let mut seq = FeketeSequence {
        points: Vec::with_capacity(n),
        indices: Vec::with_capacity(n),
        log_weighted_norms: Vec::with_capacity(n),
    };
    for m in 1..=n {
        let mf = m as f64;
        let score = |lp: &[f64], i: usize| {
            if q[i].is_finite() {
                lp[i] - mf * q[i]
            } else {
                f64::NEG_INFINITY
            }
        };
        let best = (0..nodes.len())
            .filter(|&i| log_prod[i] > f64::NEG_INFINITY)
            .max_by(|&a, &b| score(&log_prod, a).total_cmp(&score(&log_prod, b)))
            .expect("admissible node left");
        let t = nodes[best];
        seq.points.push(t);
        seq.indices.push(best);
        for (lp, z) in log_prod.iter_mut().zip(nodes) {
            *lp += (z - t).norm().ln();
        }
        log_prod[best] = f64::NEG_INFINITY;
        let norm = (0..nodes.len()).map(|i| score(&log_prod, i)).fold(f64::NEG_INFINITY, f64::max);
        seq.log_weighted_norms.push(norm);
    }
    Ok(seq)
}

/// Content key over the node coordinates, `Q` values and `n`.
fn cache_key(k: &WeightedCompact, n: usize) -> String {
    let mut h = Sha256::new();
    h.update(b"weighted-leja-v1");
    for z in k.nodes() {
        h.update(z.re.to_le_bytes());
        h.update(z.im.to_le_bytes());
    }
    for q in k.q_values() {
        h.update(q.to_le_bytes());
    }
    h.update((n as u64).to_le_bytes());
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// [`weighted_leja`] memoized as JSON files under `cache_dir`.
pub fn weighted_leja_cached(
    k: &WeightedCompact,
    n: usize,
    cache_dir: &Path,
) -> Result<FeketeSequence, EquilibriumError> {
    let path: PathBuf = cache_dir.join(format!("leja-{}.json", cache_key(k, n)));
    if let Ok(text) = fs::read_to_string(&path) {
        if let Ok(seq) = serde_json::from_str::<FeketeSequence>(&text) {
            if seq.len() == n {
                return Ok(seq);
            }
        }
    }
    let seq = weighted_leja(k, n)?;
    fs::create_dir_all(cache_dir)?;
    let tmp = path.with_extension("json.tmp");
    fs::write(&tmp, serde_json::to_string(&seq)?)?;
    fs::rename(&tmp, &path)?;
    Ok(seq)
}
