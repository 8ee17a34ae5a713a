//! Versioned JSON experiment configuration.

use serde::{Deserialize, Serialize};

use crate::dynamics::SystemConfig;
use crate::error::{Error, Result};
use crate::kepler::MassParameters;
use crate::nf::SbarExpansion;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChartConfig {
    pub symplectic_samples: usize,
    pub roundtrip_samples: usize,
    pub dipole_samples: usize,
    pub fd_step: f64,
    pub alpha: f64,
    pub tol_symplectic: f64,
    pub tol_roundtrip: f64,
    pub tol_dipole: f64,
}

impl Default for ChartConfig {
    fn default() -> Self {
        Self {
            symplectic_samples: 100,
            roundtrip_samples: 1000,
            dipole_samples: 100,
            fd_step: 1e-5,
            alpha: 0.3,
            tol_symplectic: 1e-6,
            tol_roundtrip: 1e-9,
            tol_dipole: 1e-10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SecularConfig {
    pub nodes: usize,
    pub samples: usize,
    pub e_max: f64,
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub iota_max: f64,
    /// Phase lattice size and per-orbit nodes for the Fourier sampling.
    pub fourier_grid: usize,
    pub fourier_nodes: usize,
    pub fourier_points: usize,
    pub rotation_points: usize,
    pub tol_identity: f64,
    pub tol_split: f64,
    pub tol_ring: f64,
    pub tol_dalembert: f64,
    pub tol_rotation: f64,
}

impl Default for SecularConfig {
    fn default() -> Self {
        Self {
            nodes: 256,
            samples: 50,
            e_max: 0.5,
            alpha_min: 0.05,
            alpha_max: 0.3,
            iota_max: 1.2,
            fourier_grid: 8,
            fourier_nodes: 128,
            fourier_points: 4,
            rotation_points: 20,
            tol_identity: 1e-8,
            tol_split: 1e-8,
            tol_ring: 1e-10,
            tol_dalembert: 1e-10,
            tol_rotation: 1e-10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BirkhoffConfig {
    pub order: u32,
    pub sbar: SbarExpansion,
    /// Point `(λ₁, λ₂)` used for the divisor test and numeric checks.
    pub reference_lambda: [f64; 2],
}

impl Default for BirkhoffConfig {
    fn default() -> Self {
        Self { order: 6, sbar: SbarExpansion::Exact, reference_lambda: [1.0, 0.25] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SteepnessConfig {
    pub draws: usize,
    pub spatial: bool,
    pub grid_points: Option<usize>,
    pub refine_tol: f64,
    pub min_only_trivial: usize,
}

impl Default for SteepnessConfig {
    fn default() -> Self {
        Self { draws: 50, spatial: false, grid_points: None, refine_tol: 1e-6, min_only_trivial: 50 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegrateConfig {
    pub system: SystemConfig,
    pub mu_values: Vec<f64>,
    /// Inner periods at `μ = 10⁻³`; other runs scale as `1/μ`.
    pub linearity_periods: f64,
    pub linearity_alpha: f64,
    pub tol_energy: f64,
    pub tol_angular_momentum: f64,
    pub tol_linearity: f64,
}

impl Default for IntegrateConfig {
    fn default() -> Self {
        Self {
            system: SystemConfig::planar(1e-3, 1.0, 2.0, 0.05, 0.03, 1e4),
            mu_values: vec![1e-3, 3e-4, 1e-4],
            linearity_periods: 500.0,
            linearity_alpha: 0.2,
            tol_energy: 1e-8,
            tol_angular_momentum: 1e-9,
            tol_linearity: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub seed: u64,
    pub threads: Option<usize>,
    pub masses: MassParameters,
    pub chart: ChartConfig,
    pub secular: SecularConfig,
    pub birkhoff: BirkhoffConfig,
    pub steepness: SteepnessConfig,
    pub integrate: IntegrateConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            seed: 20260401,
            threads: None,
            masses: MassParameters { mbar0: 1.0, mu: 1e-3, mbar: vec![1.0, 0.7] },
            chart: ChartConfig::default(),
            secular: SecularConfig::default(),
            birkhoff: BirkhoffConfig::default(),
            steepness: SteepnessConfig::default(),
            integrate: IntegrateConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "schema_version {} unsupported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.masses.validate().map_err(|e| Error::Config(format!("masses: {e}")))?;
        if self.masses.n_planets() != 2 {
            return Err(Error::Config("masses: two planets expected".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be positive".into()));
        }
        let s = &self.secular;
        if s.nodes < 32 || s.fourier_nodes < 32 || s.fourier_grid < 3 {
            return Err(Error::Config("secular: nodes >= 32 and fourier_grid >= 3 required".into()));
        }
        if !(0.0..1.0).contains(&s.e_max) || !(0.0 < s.alpha_min && s.alpha_min <= s.alpha_max && s.alpha_max < 1.0) {
            return Err(Error::Config("secular: need 0 <= e_max < 1 and 0 < alpha_min <= alpha_max < 1".into()));
        }
        if self.birkhoff.order == 0 || self.birkhoff.order % 2 == 1 || self.birkhoff.order > crate::nf::MAX_INPUT_ORDER {
            return Err(Error::Config(format!("birkhoff: order {} must be even and in 2..=6", self.birkhoff.order)));
        }
        if self.chart.fd_step <= 0.0 {
            return Err(Error::Config("chart: fd_step must be positive".into()));
        }
        self.integrate.system.validate().map_err(|e| Error::Config(format!("integrate: {e}")))?;
        if self.integrate.mu_values.len() < 2 {
            return Err(Error::Config("integrate: at least two mu values".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_roundtrip_and_validate() {
        let cfg = ExperimentConfig::default();
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        assert_eq!(ExperimentConfig::from_json(&text).unwrap(), cfg);
        // partial files take defaults
        let partial = ExperimentConfig::from_json(r#"{"schema_version": 1, "seed": 7}"#).unwrap();
        assert_eq!(partial.seed, 7);
        assert_eq!(partial.chart, ChartConfig::default());
    }

    #[test]
    fn schema_errors() {
        assert!(ExperimentConfig::from_json(r#"{"schema_version": 2}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"schema_version": 1, "bogus": 1}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"birkhoff": {"order": 5}}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"threads": 0}"#).is_err());
        assert!(ExperimentConfig::from_json("not json").is_err());
    }
}
