//! TOML experiment configuration. Every key has a default, so an empty file
//! is a valid configuration.
//!
//! ```toml
//! seed = 7
//! truncation = 8          # Fourier modes |n| ≤ N in DtN matrices
//! apriori_bound = 50.0    # K, checked against ‖q‖_{W^{1,p}} and ‖X‖_{W^{2,p}}
//! output = "out"
//!
//! [domain]
//! kind = "disk"           # or "annulus"
//! r_inner = 0.0
//! r_outer = 1.0
//!
//! [grid]
//! n_r = 40
//! n_theta = 64
//!
//! [sweep]
//! h = [0.2, 0.1, 0.05, 0.025, 0.0125]      # descending
//! delta = [0.2, 0.1, 0.05]
//! t = [0.01, 0.02, 0.04, 0.08, 0.16, 0.32]
//!
//! [base]                  # PotentialSpec: x_bumps, rot, uniform, q0, q_bumps, gauge
//! [perturbation]          # direction (δX, δq) of the stability sweep
//! [cgo]                   # anchor, p_hat, enlarge, points_per_wavelength, max_nodes
//! [holonomy]              # annulus and grid of the holonomy study
//! ```

use serde::{Deserialize, Serialize};

use crate::forward::{Bump, PotentialSpec};
use crate::geometry::{Domain, PolarGrid};
use crate::{Complex64, Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DomainConfig {
    pub kind: String,
    pub r_inner: f64,
    pub r_outer: f64,
}

impl Default for DomainConfig {
    fn default() -> Self {
        Self { kind: "disk".into(), r_inner: 0.0, r_outer: 1.0 }
    }
}

impl DomainConfig {
    pub fn domain(&self) -> Result<Domain> {
        match self.kind.as_str() {
            "disk" => Ok(Domain::disk(self.r_outer)),
            "annulus" => Ok(Domain::annulus(self.r_inner, self.r_outer)),
            k => Err(Error::Config(format!("unknown domain kind `{k}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub n_r: usize,
    pub n_theta: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { n_r: 40, n_theta: 64 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub h: Vec<f64>,
    pub delta: Vec<f64>,
    pub t: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            h: vec![0.2, 0.1, 0.05, 0.025, 0.0125],
            delta: vec![0.2, 0.1, 0.05],
            t: vec![0.01, 0.02, 0.04, 0.08, 0.16, 0.32],
        }
    }
}

/// CGO decay study. M is the configured disk; the solves run on the
/// enlarged disk of radius `enlarge`·R_M.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CgoConfig {
    pub anchor: [f64; 2],
    /// Squared phase ((z-a)² - (p̂-a)²)² with δ = sweep.delta[0] when set;
    /// otherwise the base phase (z-a)².
    pub p_hat: Option<[f64; 2]>,
    pub enlarge: f64,
    /// Radial and angular nodes per local wavelength of e^{2iψ/h}.
    pub points_per_wavelength: f64,
    pub min_rings: usize,
    /// Largest grid (in nodes) a single solve may use.
    pub max_nodes: usize,
}

impl Default for CgoConfig {
    fn default() -> Self {
        Self {
            anchor: [0.1, 0.0],
            p_hat: None,
            enlarge: 1.2,
            points_per_wavelength: 8.0,
            min_rings: 24,
            max_nodes: 3_000_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HolonomyConfig {
    pub r_inner: f64,
    pub r_outer: f64,
    pub grid: GridConfig,
    /// Amplitude of the boundary-vanishing gauge term added to X₂.
    pub gauge_amp: f64,
    pub loops: usize,
}

impl Default for HolonomyConfig {
    fn default() -> Self {
        Self { r_inner: 0.5, r_outer: 1.5, grid: GridConfig { n_r: 40, n_theta: 64 }, gauge_amp: 0.3, loops: 5 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub truncation: usize,
    pub apriori_bound: f64,
    pub output: String,
    pub domain: DomainConfig,
    pub grid: GridConfig,
    pub sweep: SweepConfig,
    pub base: PotentialSpec,
    pub perturbation: PotentialSpec,
    pub cgo: CgoConfig,
    pub holonomy: HolonomyConfig,
}

pub fn default_base() -> PotentialSpec {
    PotentialSpec {
        x_bumps: vec![Bump { center: [0.2, -0.1], width: 0.5, amp: [0.6, -0.4] }],
        rot: 0.3,
        q0: [0.5, 0.0],
        q_bumps: vec![Bump { center: [-0.2, 0.3], width: 0.6, amp: [1.0, 0.0] }],
        ..Default::default()
    }
}

/// Interior bumps: small on the boundary circle, so the perturbation is
/// mostly invisible to the tangential trace of X.
pub fn default_perturbation() -> PotentialSpec {
    PotentialSpec {
        x_bumps: vec![Bump { center: [-0.15, 0.1], width: 0.35, amp: [0.8, 0.5] }],
        q_bumps: vec![Bump { center: [0.1, 0.2], width: 0.35, amp: [3.0, 0.0] }],
        ..Default::default()
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            truncation: 8,
            apriori_bound: 50.0,
            output: "out".into(),
            domain: DomainConfig::default(),
            grid: GridConfig::default(),
            sweep: SweepConfig::default(),
            base: default_base(),
            perturbation: default_perturbation(),
            cgo: CgoConfig::default(),
            holonomy: HolonomyConfig::default(),
        }
    }
}

fn positive(name: &str, v: &[f64]) -> Result<()> {
    if v.is_empty() {
        return Err(Error::Config(format!("sweep list `{name}` is empty")));
    }
    if let Some(x) = v.iter().find(|x| !(**x > 0.0) || !x.is_finite()) {
        return Err(Error::Config(format!("sweep list `{name}` has a non-positive entry {x}")));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        positive("h", &self.sweep.h)?;
        positive("delta", &self.sweep.delta)?;
        positive("t", &self.sweep.t)?;
        if self.sweep.h.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Config("sweep list `h` must be strictly descending".into()));
        }
        if !(self.apriori_bound > 0.0) {
            return Err(Error::Config("apriori_bound must be positive".into()));
        }
        if self.truncation == 0 || 2 * self.truncation + 1 > self.grid.n_theta {
            return Err(Error::Config(format!(
                "truncation {} does not fit n_theta = {}",
                self.truncation, self.grid.n_theta
            )));
        }
        if !(self.cgo.enlarge > 1.0) || !(self.cgo.points_per_wavelength > 0.0) {
            return Err(Error::Config("cgo.enlarge must exceed 1 and points_per_wavelength be positive".into()));
        }
        let h = &self.holonomy;
        if !(0.0 < h.r_inner && h.r_inner < h.r_outer) {
            return Err(Error::Config("holonomy annulus needs 0 < r_inner < r_outer".into()));
        }
        let d = self.domain.domain()?;
        if d.r_inner() < 0.0 || d.r_outer() <= d.r_inner() || (d.is_annulus() && d.r_inner() == 0.0) {
            return Err(Error::Config("domain needs 0 ≤ r_inner < r_outer, with r_inner > 0 on an annulus".into()));
        }
        PolarGrid::new(d, self.grid.n_r, self.grid.n_theta)?;
        Ok(())
    }

    pub fn grid(&self) -> Result<std::sync::Arc<PolarGrid>> {
        PolarGrid::new(self.domain.domain()?, self.grid.n_r, self.grid.n_theta)
    }

    pub fn anchor(&self) -> Complex64 {
        Complex64::new(self.cgo.anchor[0], self.cgo.anchor[1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults_and_round_trips() {
        let cfg = ExperimentConfig::from_toml("").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        assert_eq!(ExperimentConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn rejects_bad_sweeps() {
        assert!(ExperimentConfig::from_toml("[sweep]\nh = [0.1, 0.2]").is_err());
        assert!(ExperimentConfig::from_toml("[sweep]\nt = [0.1, -0.2]").is_err());
        assert!(ExperimentConfig::from_toml("[sweep]\ndelta = []").is_err());
        assert!(ExperimentConfig::from_toml("bogus = 1").is_err());
        let cfg = ExperimentConfig::from_toml("seed = 3\n[grid]\nn_r = 24\nn_theta = 32\n[domain]\nkind = \"annulus\"\nr_inner = 0.4\nr_outer = 1.0").unwrap();
        assert!(cfg.domain.domain().unwrap().is_annulus());
        assert_eq!(cfg.seed, 3);
    }
}
