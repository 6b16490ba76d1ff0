//! Flat key = value run configuration.
//!
//! One key per line, `#` comments, later assignments win. Every key mirrors a
//! field of the experiment, model, noise or covariance specification, so a
//! metadata echo of the effective configuration reproduces the run exactly.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use spde_core::covariance::CovarianceSpec;
use spde_core::experiment::{
    CoefficientField, ExperimentConfig, ExperimentKind, InitialData,
};
use spde_core::grf::padding_search;
use spde_core::noise::NoiseSpec;
use spde_core::stepper::{DriftKind, ModelSpec, NoiseCoupling};

/// String-typed configuration with defaults already merged.
#[derive(Debug, Clone)]
pub struct RunConfig {
    values: BTreeMap<&'static str, String>,
}

const KEYS: &[(&str, &str)] = &[
    ("samples", "100"),
    ("seed", "42"),
    ("drift", "allen_cahn"),
    ("g", "half_one_minus_sq"),
    ("eps_a", "1e-3"),
    ("t_final", "0.1"),
    ("u0", "sin2pi"),
    ("field", "random"),
    ("q", "2.0"),
    ("quad_tol", "1e-10"),
    ("gamma", "1.0"),
    ("eps_q", "0.1"),
    ("modes", "128"),
    ("orthonormal", "false"),
    ("mesh_ref", "64"),
    ("mesh_levels", "16,32,64,128"),
    ("dt_levels", "4e-3,2e-3,1e-3,5e-4"),
    ("dt_ref", "1e-5"),
    ("padding", "auto"),
    ("rho_limit", "1e-6"),
    ("workers", "auto"),
    ("snapshots", "101"),
];

impl Default for RunConfig {
    fn default() -> Self {
        Self { values: KEYS.iter().map(|&(k, v)| (k, v.to_string())).collect() }
    }
}

impl RunConfig {
    /// Defaults appropriate for one experiment kind (they differ only in the
    /// reference mesh and the level lists).
    pub fn base_for(kind: ExperimentKind) -> Self {
        let mut cfg = Self::default();
        if matches!(kind, ExperimentKind::ConvergeSpace) {
            cfg.set_known("mesh_ref", "256");
        }
        cfg
    }

    fn set_known(&mut self, key: &'static str, value: &str) {
        self.values.insert(key, value.to_string());
    }

    fn lookup_key(key: &str) -> Option<&'static str> {
        KEYS.iter().map(|&(k, _)| k).find(|&k| k == key)
    }

    /// Assign one `key = value` pair; unknown keys are rejected.
    pub fn assign(&mut self, key: &str, value: &str) -> Result<()> {
        let canonical = Self::lookup_key(key).ok_or_else(|| anyhow!("unknown key '{key}'"))?;
        self.values.insert(canonical, value.trim().to_string());
        Ok(())
    }

    /// Merge a configuration file on top of the current values.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config file {}", path.display()))?;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("{}:{}: expected key = value", path.display(), lineno + 1))?;
            self.assign(key.trim(), value)
                .with_context(|| format!("{}:{}", path.display(), lineno + 1))?;
        }
        Ok(())
    }

    /// Merge command-line `key=value` overrides (they win over the file).
    pub fn apply_overrides(&mut self, overrides: &[String]) -> Result<()> {
        for item in overrides {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| anyhow!("override '{item}' is not of the form key=value"))?;
            self.assign(key.trim(), value).with_context(|| format!("override '{item}'"))?;
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> &str {
        self.values.get(key).map(|s| s.as_str()).unwrap_or_default()
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        let raw = self.get(key);
        raw.parse::<T>().map_err(|e| anyhow!("key '{key}' = '{raw}': {e}"))
    }

    fn parse_list(&self, key: &str) -> Result<Vec<f64>> {
        self.get(key)
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(|s| s.trim().parse::<f64>().map_err(|e| anyhow!("key '{key}' entry '{s}': {e}")))
            .collect()
    }

    pub fn seed(&self) -> Result<u64> {
        self.parse("seed")
    }

    pub fn snapshots(&self) -> Result<usize> {
        self.parse("snapshots")
    }

    pub fn workers(&self) -> Result<Option<usize>> {
        match self.get("workers") {
            "auto" => Ok(None),
            other => Ok(Some(
                other.parse::<usize>().map_err(|e| anyhow!("key 'workers' = '{other}': {e}"))?,
            )),
        }
    }

    pub fn drift(&self) -> Result<DriftKind> {
        match self.get("drift") {
            "allen_cahn" => Ok(DriftKind::AllenCahn),
            "zero" => Ok(DriftKind::Zero),
            other => bail!("key 'drift' = '{other}': expected allen_cahn or zero"),
        }
    }

    pub fn coupling(&self) -> Result<NoiseCoupling> {
        match self.get("g") {
            "zero" => Ok(NoiseCoupling::Zero),
            "half_linear" => Ok(NoiseCoupling::HalfLinear),
            "half_one_minus_sq" => Ok(NoiseCoupling::HalfOneMinusSquare),
            other => bail!("key 'g' = '{other}': expected zero, half_linear or half_one_minus_sq"),
        }
    }

    pub fn initial_data(&self) -> Result<InitialData> {
        match self.get("u0") {
            "zero" => Ok(InitialData::Zero),
            "sin2pi" => Ok(InitialData::SinTwoPi),
            "sin4pi" => Ok(InitialData::SinFourPi),
            other => bail!("key 'u0' = '{other}': expected zero, sin2pi or sin4pi"),
        }
    }

    pub fn covariance(&self) -> Result<CovarianceSpec> {
        let q: f64 = self.parse("q")?;
        let quad_tol: f64 = self.parse("quad_tol")?;
        if q < 2.0 {
            bail!("key 'q' = {q}: q must be at least 2 in this regime");
        }
        Ok(CovarianceSpec::with_tolerance(q, quad_tol)?)
    }

    pub fn noise(&self) -> Result<NoiseSpec> {
        let gamma: f64 = self.parse("gamma")?;
        let eps_q: f64 = self.parse("eps_q")?;
        let mesh_ref: usize = self.parse("mesh_ref")?;
        let spec = match self.get("modes") {
            "auto" => NoiseSpec::coupled_to_mesh(gamma, eps_q, 1.0 / mesh_ref as f64)?,
            other => {
                let modes = other
                    .parse::<usize>()
                    .map_err(|e| anyhow!("key 'modes' = '{other}': {e}"))?;
                NoiseSpec::new(gamma, eps_q, modes)?
            }
        };
        Ok(if self.parse::<bool>("orthonormal")? { spec.with_orthonormal_basis() } else { spec })
    }

    pub fn model(&self) -> Result<ModelSpec> {
        Ok(ModelSpec {
            drift: self.drift()?,
            coupling: self.coupling()?,
            eps_a: self.parse("eps_a")?,
            t_final: self.parse("t_final")?,
        })
    }

    /// Resolve the padding length, running the diagnostic ladder when `auto`.
    pub fn resolve_padding(&self, cov: &CovarianceSpec, target_p: usize) -> Result<usize> {
        match self.get("padding") {
            "auto" => {
                let ladder: Vec<usize> =
                    [8, 16, 24, 32].iter().map(|m| m * target_p).collect();
                let rows = padding_search(cov, target_p, &ladder)?;
                let chosen = rows
                    .iter()
                    .find(|(_, rho)| *rho <= 1e-10)
                    .or_else(|| rows.last())
                    .expect("ladder is nonempty");
                Ok(chosen.0)
            }
            other => {
                other.parse::<usize>().map_err(|e| anyhow!("key 'padding' = '{other}': {e}"))
            }
        }
    }

    /// Assemble the experiment for one subcommand kind.
    pub fn to_experiment(&self, kind: ExperimentKind) -> Result<ExperimentConfig> {
        let mesh_ref: usize = self.parse("mesh_ref")?;
        let field = match self.get("field") {
            "deterministic" => CoefficientField::Deterministic,
            "random" => {
                let cov = self.covariance()?;
                let padding = self.resolve_padding(&cov, mesh_ref + 1)?;
                CoefficientField::LogGaussian { cov, padding }
            }
            other => bail!("key 'field' = '{other}': expected random or deterministic"),
        };
        let mesh_levels = match kind {
            ExperimentKind::ConvergeSpace => {
                self.parse_list("mesh_levels")?.iter().map(|&v| v as usize).collect()
            }
            _ => Vec::new(),
        };
        let dt_levels = match kind {
            ExperimentKind::ConvergeTime => self.parse_list("dt_levels")?,
            _ => Vec::new(),
        };
        Ok(ExperimentConfig {
            kind,
            samples: self.parse("samples")?,
            master_seed: self.seed()?,
            model: self.model()?,
            u0: self.initial_data()?,
            field,
            noise: self.noise()?,
            mesh_ref,
            mesh_levels,
            dt_levels,
            dt_ref: self.parse("dt_ref")?,
            rho_limit: self.parse("rho_limit")?,
            workers: self.workers()?,
        })
    }

    /// Effective configuration echo for the run metadata.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (key, value) in &self.values {
            let _ = writeln!(out, "{key} = {value}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = RunConfig::default();
        let exp = cfg.to_experiment(ExperimentKind::ConvergeTime).unwrap();
        assert_eq!(exp.samples, 100);
        assert_eq!(exp.mesh_ref, 64);
        assert_eq!(exp.dt_levels.len(), 4);
    }

    #[test]
    fn unknown_keys_rejected() {
        let mut cfg = RunConfig::default();
        assert!(cfg.assign("no_such_key", "1").is_err());
    }

    #[test]
    fn overrides_win() {
        let mut cfg = RunConfig::default();
        cfg.apply_overrides(&["samples=10".into()]).unwrap();
        assert_eq!(cfg.get("samples"), "10");
    }

    #[test]
    fn small_q_rejected() {
        let mut cfg = RunConfig::default();
        cfg.apply_overrides(&["q=1.5".into()]).unwrap();
        let err = cfg.covariance().unwrap_err().to_string();
        assert!(err.contains("at least 2"), "message: {err}");
    }
}
