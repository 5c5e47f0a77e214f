use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cloud::ResamplingScheme;
use crate::error::{Result, SmcError};
use crate::filters::{FilterKind, OffspringMode};
use crate::gaussian::UtParams;
use crate::models::ScenarioSpec;
use crate::ssm::RegimeSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    /// Scalar growth model.
    M1,
    /// Bearings-only tracking.
    M2,
}

impl ModelKind {
    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::M1 => "m1",
            ModelKind::M2 => "m2",
        }
    }

    pub fn default_horizon(&self) -> usize {
        match self {
            ModelKind::M1 => 50,
            ModelKind::M2 => 40,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FilterName {
    #[serde(rename = "BPF")]
    Bpf,
    #[serde(rename = "APF")]
    Apf,
    #[serde(rename = "PBPS")]
    Pbps,
    #[serde(rename = "RS-BPF")]
    RsBpf,
    #[serde(rename = "RS-APF")]
    RsApf,
    #[serde(rename = "RS-PBPS")]
    RsPbps,
    #[serde(rename = "DMA-BPF")]
    DmaBpf,
    #[serde(rename = "EKF")]
    Ekf,
    #[serde(rename = "UKF")]
    Ukf,
}

impl FilterName {
    pub fn label(&self) -> &'static str {
        match self {
            FilterName::Bpf => "BPF",
            FilterName::Apf => "APF",
            FilterName::Pbps => "PBPS",
            FilterName::RsBpf => "RS-BPF",
            FilterName::RsApf => "RS-APF",
            FilterName::RsPbps => "RS-PBPS",
            FilterName::DmaBpf => "DMA-BPF",
            FilterName::Ekf => "EKF",
            FilterName::Ukf => "UKF",
        }
    }

    pub fn is_gaussian(&self) -> bool {
        matches!(self, FilterName::Ekf | FilterName::Ukf)
    }

    pub fn uses_regimes(&self) -> bool {
        matches!(
            self,
            FilterName::RsBpf | FilterName::RsApf | FilterName::RsPbps | FilterName::DmaBpf
        )
    }

    fn is_pbps(&self) -> bool {
        matches!(self, FilterName::Pbps | FilterName::RsPbps)
    }
}

/// One filter entry of the sweep with its options. Options that do not apply
/// to the filter are rejected by [`ExperimentConfig::validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterSpec {
    pub name: FilterName,
    /// Filter-side process noise scale (bearings model only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_w: Option<f64>,
    /// Candidate noise scales for regime filters.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regimes: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offspring: Option<OffspringMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ut: Option<UtParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resampling: Option<ResamplingScheme>,
    /// Allow EKF/UKF on the bearings model through a Gaussian approximation
    /// of the angular noise.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub gaussian_approx: bool,
}

impl FilterSpec {
    pub fn new(name: FilterName) -> Self {
        Self {
            name,
            sigma_w: None,
            regimes: None,
            offspring: None,
            ut: None,
            resampling: None,
            gaussian_approx: false,
        }
    }

    pub fn with_sigma_w(mut self, sigma_w: f64) -> Self {
        self.sigma_w = Some(sigma_w);
        self
    }

    pub fn kind(&self) -> Option<FilterKind> {
        let pbps = FilterKind::Pbps(self.offspring.unwrap_or_default());
        match self.name {
            FilterName::Bpf | FilterName::RsBpf | FilterName::DmaBpf => Some(FilterKind::Bpf),
            FilterName::Apf | FilterName::RsApf => Some(FilterKind::Apf),
            FilterName::Pbps | FilterName::RsPbps => Some(pbps),
            FilterName::Ekf | FilterName::Ukf => None,
        }
    }

    /// The regime set, defaulting to the bearings set on model 2.
    pub fn regime_set(&self, model: ModelKind) -> Result<Option<RegimeSet<f64>>> {
        if !self.name.uses_regimes() {
            return Ok(None);
        }
        match (&self.regimes, model) {
            (Some(values), _) => RegimeSet::new(values.clone()).map(Some),
            (None, ModelKind::M2) => Ok(Some(RegimeSet::bearings_default())),
            (None, ModelKind::M1) => Err(SmcError::Config(format!(
                "{} on m1 needs an explicit regimes list",
                self.name.label()
            ))),
        }
    }
}

/// Sweep definition, read from JSON with field names as written here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioSpec>,
    pub filters: Vec<FilterSpec>,
    #[serde(rename = "N_values")]
    pub n_values: Vec<usize>,
    #[serde(rename = "S")]
    pub s: usize,
    #[serde(rename = "R")]
    pub r: usize,
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    pub master_seed: u64,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self =
            serde_json::from_str(text).map_err(|e| SmcError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| SmcError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn horizon(&self) -> usize {
        self.k.unwrap_or_else(|| self.model.default_horizon())
    }

    pub fn scenario_spec(&self) -> ScenarioSpec {
        self.scenario.unwrap_or_default()
    }

    /// `"none"` on model 1, `"straight"` or `"turn"` on model 2.
    pub fn scenario_label(&self) -> &'static str {
        match self.model {
            ModelKind::M1 => "none",
            ModelKind::M2 => self.scenario_spec().label(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(SmcError::Config(msg));
        if self.s == 0 || self.r == 0 {
            return bad("S and R must be at least 1".into());
        }
        if self.horizon() == 0 {
            return bad("K must be at least 1".into());
        }
        if self.filters.is_empty() {
            return bad("no filters given".into());
        }
        let needs_particles = self.filters.iter().any(|f| !f.name.is_gaussian());
        if needs_particles && self.n_values.is_empty() {
            return bad("N_values is empty".into());
        }
        if self.n_values.contains(&0) {
            return bad("every N must be at least 1".into());
        }
        match (self.model, &self.scenario) {
            (ModelKind::M1, Some(_)) => return bad("scenario applies to m2 only".into()),
            (ModelKind::M2, Some(s)) => s
                .validate(self.horizon())
                .map_err(|e| SmcError::Config(e.to_string()))?,
            _ => {}
        }
        for f in &self.filters {
            let name = f.name.label();
            if f.sigma_w.is_some() && self.model == ModelKind::M1 {
                return bad(format!("{name}: sigma_w applies to m2 only"));
            }
            if let Some(s) = f.sigma_w {
                if !(s.is_finite() && s >= 0.0) {
                    return bad(format!("{name}: sigma_w must be a nonnegative number"));
                }
            }
            if f.regimes.is_some() && !f.name.uses_regimes() {
                return bad(format!("{name}: regimes apply to RS-* and DMA-BPF only"));
            }
            if f.offspring.is_some() && !f.name.is_pbps() {
                return bad(format!(
                    "{name}: offspring applies to PBPS and RS-PBPS only"
                ));
            }
            if f.ut.is_some() && f.name != FilterName::Ukf {
                return bad(format!("{name}: ut applies to UKF only"));
            }
            if let Some(ut) = &f.ut {
                if !(ut.alpha > 0.0) || ut.lambda(1).is_nan() {
                    return bad(format!("{name}: invalid UT parameters"));
                }
            }
            if f.resampling.is_some() && f.name.is_gaussian() {
                return bad(format!(
                    "{name}: resampling applies to particle filters only"
                ));
            }
            if f.gaussian_approx && !(f.name.is_gaussian() && self.model == ModelKind::M2) {
                return bad(format!(
                    "{name}: gaussian_approx applies to EKF/UKF on m2 only"
                ));
            }
            if f.name.is_gaussian() && self.model == ModelKind::M2 && !f.gaussian_approx {
                return bad(format!("{name} on m2 requires \"gaussian_approx\": true"));
            }
            f.regime_set(self.model)
                .map_err(|e| SmcError::Config(format!("{name}: {e}")))?;
        }
        Ok(())
    }
}
