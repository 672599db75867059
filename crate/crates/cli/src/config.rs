//! Experiment configuration: flat `key=value` parameters, an optional JSON
//! file that wins on conflict, per-experiment defaults and typed getters.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Equilibrium,
    Leja,
    Levelset,
    Rate,
    SzegoDeficit,
    SzegoNorms,
    SzegoZeros,
    Monomial,
    HullCertify,
    HullBall,
}

impl Experiment {
    pub const ALL: [Experiment; 10] = [
        Experiment::Equilibrium,
        Experiment::Leja,
        Experiment::Levelset,
        Experiment::Rate,
        Experiment::SzegoDeficit,
        Experiment::SzegoNorms,
        Experiment::SzegoZeros,
        Experiment::Monomial,
        Experiment::HullCertify,
        Experiment::HullBall,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Equilibrium => "equilibrium",
            Experiment::Leja => "leja",
            Experiment::Levelset => "levelset",
            Experiment::Rate => "rate",
            Experiment::SzegoDeficit => "szego-deficit",
            Experiment::SzegoNorms => "szego-norms",
            Experiment::SzegoZeros => "szego-zeros",
            Experiment::Monomial => "monomial",
            Experiment::HullCertify => "hull-certify",
            Experiment::HullBall => "hull-ball",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.name() == name)
    }

    /// Accepted keys with their defaults. `seed` is accepted everywhere.
    pub fn defaults(self) -> &'static [(&'static str, &'static str)] {
        match self {
            Experiment::Equilibrium => &[
                ("case", "circle"),
                ("m", "512"),
                ("r", "1"),
                ("c", "0.5"),
                ("a", "1"),
                ("gap_tol", "1e-6"),
                ("max_iters", "200000"),
            ],
            Experiment::Leja => &[("case", "lemniscate"), ("m", "1024"), ("n", "80"), ("c", "0.5")],
            Experiment::Levelset => &[
                ("c", "0.5"),
                ("R", "-0.05"),
                ("grid", "401"),
                ("x_min", "-0.5"),
                ("x_max", "1.5"),
                ("y_min", "-1"),
                ("y_max", "1"),
            ],
            Experiment::Rate => &[
                ("case", "disk"),
                ("m", "1024"),
                ("deg_min", "20"),
                ("deg_max", "40"),
                ("deg_step", "2"),
            ],
            Experiment::SzegoDeficit => &[("ns", "25,50,100,200"), ("z", "-0.4"), ("quad_nodes", "0"), ("grid", "301")],
            Experiment::SzegoNorms => &[("ns", "25,50,100,200"), ("m", "2048"), ("exclusion", "0.05")],
            Experiment::SzegoZeros => &[("n", "50"), ("m", "512"), ("tol", "1e-12")],
            Experiment::Monomial => &[("k", "1"), ("n", "60"), ("center", "-0.1"), ("radius", "0.15"), ("m", "256")],
            Experiment::HullCertify => &[
                ("a1", "0"),
                ("r1", "1"),
                ("a2", "2"),
                ("r2", "1"),
                ("w1o", "2"),
                ("w2o", "3"),
                ("grid", "256"),
            ],
            Experiment::HullBall => &[("a1", "0"), ("a2", "2"), ("r2", "1"), ("samples", "1000"), ("points", "50")],
        }
    }

    fn accepts(self, key: &str) -> bool {
        key == "seed" || self.defaults().iter().any(|(k, _)| *k == key)
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A fully resolved run: every accepted key carries a value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub parameters: BTreeMap<String, String>,
    pub seed: u64,
}

impl ExperimentConfig {
    /// Defaults, then `key=value` arguments, then the config file.
    pub fn resolve(
        experiment: Experiment,
        assignments: &[String],
        config_file: Option<&Path>,
    ) -> Result<Self, CliError> {
        let mut params: BTreeMap<String, String> = experiment
            .defaults()
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        params.insert("seed".into(), "0".into());
        for a in assignments {
            let (k, v) = a
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("expected key=value, got `{a}`")))?;
            set(experiment, &mut params, k.trim(), v.trim().to_string())?;
        }
        if let Some(path) = config_file {
            for (k, v) in read_config_file(experiment, path)? {
                set(experiment, &mut params, &k, v)?;
            }
        }
        let seed = params["seed"]
            .parse()
            .map_err(|_| CliError::Usage(format!("seed must be a non-negative integer, got `{}`", params["seed"])))?;
        params.remove("seed");
        Ok(Self {
            experiment,
            parameters: params,
            seed,
        })
    }

    /// sha256 of the canonical JSON of the resolved configuration.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(canonical.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    fn raw(&self, key: &str) -> &str {
        self.parameters
            .get(key)
            .unwrap_or_else(|| panic!("`{key}` is not a parameter of {}", self.experiment))
    }

    fn bad(&self, key: &str, what: &str) -> CliError {
        CliError::Usage(format!("{key}: expected {what}, got `{}`", self.raw(key)))
    }

    pub fn str(&self, key: &str) -> &str {
        self.raw(key)
    }

    pub fn choice(&self, key: &str, options: &[&str]) -> Result<&str, CliError> {
        let v = self.raw(key);
        if options.contains(&v) {
            Ok(v)
        } else {
            Err(self.bad(key, &format!("one of {}", options.join("|"))))
        }
    }

    pub fn f64(&self, key: &str) -> Result<f64, CliError> {
        self.raw(key)
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| self.bad(key, "a finite number"))
    }

    pub fn positive(&self, key: &str) -> Result<f64, CliError> {
        Some(self.f64(key)?)
            .filter(|&x| x > 0.0)
            .ok_or_else(|| self.bad(key, "a positive number"))
    }

    pub fn usize(&self, key: &str) -> Result<usize, CliError> {
        self.raw(key).parse().map_err(|_| self.bad(key, "a non-negative integer"))
    }

    pub fn usize_at_least(&self, key: &str, min: usize) -> Result<usize, CliError> {
        Some(self.usize(key)?)
            .filter(|&n| n >= min)
            .ok_or_else(|| self.bad(key, &format!("an integer ≥ {min}")))
    }

    pub fn usize_list(&self, key: &str, min: usize) -> Result<Vec<usize>, CliError> {
        let out: Option<Vec<usize>> = self.raw(key).split(',').map(|s| s.trim().parse().ok()).collect();
        out.filter(|v| !v.is_empty() && v.iter().all(|&n| n >= min))
            .ok_or_else(|| self.bad(key, &format!("a comma-separated list of integers ≥ {min}")))
    }

    pub fn complex(&self, key: &str) -> Result<Complex64, CliError> {
        parse_complex(self.raw(key)).ok_or_else(|| self.bad(key, "a complex number like 2, -0.4, 1+2i or -0.5i"))
    }
}

fn set(experiment: Experiment, params: &mut BTreeMap<String, String>, key: &str, value: String) -> Result<(), CliError> {
    if !experiment.accepts(key) {
        let known: Vec<&str> = experiment.defaults().iter().map(|(k, _)| *k).collect();
        return Err(CliError::Usage(format!(
            "unknown parameter `{key}` for {experiment} (accepted: {}, seed)",
            known.join(", ")
        )));
    }
    params.insert(key.to_string(), value);
    Ok(())
}

/// A flat JSON object of parameters, or a run manifest / resolved config with
/// `experiment`, `parameters` and `seed` fields.
fn read_config_file(experiment: Experiment, path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let json: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("config {} is not valid JSON: {e}", path.display())))?;
    let obj = json
        .as_object()
        .ok_or_else(|| CliError::Usage("config must be a JSON object".into()))?;
    let (map, seed) = if let Some(p) = obj.get("parameters") {
        if let Some(name) = obj.get("experiment").and_then(|e| e.as_str()) {
            if name != experiment.name() {
                return Err(CliError::Usage(format!("config is for `{name}`, not `{experiment}`")));
            }
        }
        let p = p
            .as_object()
            .ok_or_else(|| CliError::Usage("`parameters` must be an object".into()))?;
        (p.clone(), obj.get("seed").cloned())
    } else {
        (obj.clone(), None)
    };
    let mut entries: Vec<(String, serde_json::Value)> = map.into_iter().collect();
    entries.extend(seed.map(|s| ("seed".to_string(), s)));
    let mut out = Vec::new();
    for (k, v) in entries {
        let v = match v {
            serde_json::Value::String(s) => s,
            serde_json::Value::Number(n) => n.to_string(),
            serde_json::Value::Bool(b) => b.to_string(),
            other => return Err(CliError::Usage(format!("`{k}`: unsupported value {other}"))),
        };
        out.push((k, v));
    }
    Ok(out)
}

/// `a`, `bi`, `a+bi`, `a-bi` (also with `j`); whitespace ignored.
pub fn parse_complex(s: &str) -> Option<Complex64> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return None;
    }
    let Some(body) = s.strip_suffix('i').or_else(|| s.strip_suffix('j')) else {
        return s.parse().ok().filter(|x: &f64| x.is_finite()).map(|x| Complex64::new(x, 0.0));
    };
    // split at the last sign that is not part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let imag = |t: &str| match t {
        "" | "+" => Some(1.0),
        "-" => Some(-1.0),
        t => t.parse::<f64>().ok(),
    };
    let z = match split {
        Some(k) => Complex64::new(body[..k].parse().ok()?, imag(&body[k..])?),
        None => Complex64::new(0.0, imag(body)?),
    };
    (z.re.is_finite() && z.im.is_finite()).then_some(z)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_literals() {
        assert_eq!(parse_complex("2"), Some(Complex64::new(2.0, 0.0)));
        assert_eq!(parse_complex("-0.4"), Some(Complex64::new(-0.4, 0.0)));
        assert_eq!(parse_complex("1+2i"), Some(Complex64::new(1.0, 2.0)));
        assert_eq!(parse_complex("-0.5i"), Some(Complex64::new(0.0, -0.5)));
        assert_eq!(parse_complex("1e-3-1e-2i"), Some(Complex64::new(1e-3, -1e-2)));
        assert_eq!(parse_complex("i"), Some(Complex64::new(0.0, 1.0)));
        assert_eq!(parse_complex("1+i"), Some(Complex64::new(1.0, 1.0)));
        assert_eq!(parse_complex("abc"), None);
        assert_eq!(parse_complex(""), None);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = ExperimentConfig::resolve(Experiment::Leja, &["bogus=1".into()], None).unwrap_err();
        assert!(matches!(err, CliError::Usage(_)));
        assert!(ExperimentConfig::resolve(Experiment::Leja, &["n".into()], None).is_err());
    }

    #[test]
    fn config_file_wins() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"n": 40, "seed": 9}"#).unwrap();
        let cfg = ExperimentConfig::resolve(Experiment::Leja, &["n=20".into(), "m=300".into()], Some(&path)).unwrap();
        assert_eq!(cfg.str("n"), "40");
        assert_eq!(cfg.str("m"), "300");
        assert_eq!(cfg.seed, 9);
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = ExperimentConfig::resolve(Experiment::Rate, &[], None).unwrap();
        let b = ExperimentConfig::resolve(Experiment::Rate, &[], None).unwrap();
        let c = ExperimentConfig::resolve(Experiment::Rate, &["m=512".into()], None).unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
    }
}
