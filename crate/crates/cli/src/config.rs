//! Experiment configuration (TOML).

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use taxrisk_core::engine::{Measure, SimOptions};
use taxrisk_core::estimators::Penalty;
use taxrisk_core::{ModelSpec, TaxPolicy};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Parse(#[from] toml::de::Error),
    #[error("{field}: {message}")]
    Field { field: String, message: String },
}

fn field_err(field: &str, message: impl ToString) -> ConfigError {
    ConfigError::Field { field: field.to_string(), message: message.to_string() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    Crude,
    Tilted,
    Switched,
    /// `switched` for policies whose rate is not bounded away from one,
    /// `tilted` otherwise.
    Auto,
}

impl Estimator {
    pub fn measure(self, policy: &TaxPolicy) -> Measure {
        match self {
            Estimator::Crude => Measure::Physical,
            Estimator::Tilted => Measure::Tilted,
            Estimator::Switched => Measure::Switched,
            Estimator::Auto if policy.bounded_away_from_one() || policy.is_full() => Measure::Tilted,
            Estimator::Auto => Measure::Switched,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Output {
    Ruin,
    Ratio,
    Edpf,
    Tax,
    Joint,
    Diagnostic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    #[serde(alias = "cl")]
    CramerLundberg { premium: f64, claim_intensity: f64, claim_rate: f64 },
    TwoSided { premium: f64, claim_intensity: f64, claim_rate: f64, gain_intensity: f64, gain_rate: f64 },
    #[serde(alias = "bm")]
    BrownianDrift { drift: f64, volatility: f64 },
}

impl ModelConfig {
    pub fn build(&self) -> taxrisk_core::Result<ModelSpec> {
        match *self {
            ModelConfig::CramerLundberg { premium, claim_intensity, claim_rate } => {
                ModelSpec::cramer_lundberg(premium, claim_intensity, claim_rate)
            }
            ModelConfig::TwoSided { premium, claim_intensity, claim_rate, gain_intensity, gain_rate } => {
                ModelSpec::two_sided(premium, claim_intensity, claim_rate, gain_intensity, gain_rate)
            }
            ModelConfig::BrownianDrift { drift, volatility } => ModelSpec::brownian_drift(drift, volatility),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PolicyConfig {
    Constant { gamma: f64 },
    #[serde(alias = "example41")]
    Hyperbolic { beta: f64 },
    Table { breakpoints: Vec<f64>, rates: Vec<f64> },
}

impl Default for PolicyConfig {
    fn default() -> Self {
        PolicyConfig::Constant { gamma: 0.0 }
    }
}

impl PolicyConfig {
    pub fn build(&self) -> taxrisk_core::Result<TaxPolicy> {
        match self {
            PolicyConfig::Constant { gamma } => TaxPolicy::constant(*gamma),
            PolicyConfig::Hyperbolic { beta } => TaxPolicy::hyperbolic(*beta),
            PolicyConfig::Table { breakpoints, rates } => TaxPolicy::table(breakpoints.clone(), rates.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PenaltyConfig {
    #[serde(default)]
    pub lambda: f64,
    #[serde(default)]
    pub eta: f64,
    #[serde(default)]
    pub delta: f64,
}

impl From<PenaltyConfig> for Penalty {
    fn from(p: PenaltyConfig) -> Self {
        Penalty { lambda: p.lambda, eta: p.eta, delta: p.delta }
    }
}

/// Pass rule: `|estimate − predicted| ≤ max(abs, rel·|predicted|, k·stderr)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckConfig {
    #[serde(default = "default_k")]
    pub k: f64,
    #[serde(default)]
    pub abs: f64,
    /// Relative slack per quantity name.
    #[serde(default)]
    pub rel: BTreeMap<String, f64>,
}

fn default_k() -> f64 {
    3.0
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig { k: default_k(), abs: 0.0, rel: BTreeMap::new() }
    }
}

/// Seeds are written as integers or as `"0x…"` strings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SeedRepr", into = "u64")]
pub struct Seed(pub u64);

#[derive(Deserialize)]
#[serde(untagged)]
enum SeedRepr {
    Int(i64),
    Text(String),
}

impl TryFrom<SeedRepr> for Seed {
    type Error = String;
    fn try_from(r: SeedRepr) -> Result<Self, String> {
        match r {
            SeedRepr::Int(v) => u64::try_from(v).map(Seed).map_err(|_| format!("seed {v} is negative")),
            SeedRepr::Text(s) => parse_seed(&s).map(Seed),
        }
    }
}

impl From<Seed> for u64 {
    fn from(s: Seed) -> u64 {
        s.0
    }
}

pub fn parse_seed(s: &str) -> Result<u64, String> {
    let t = s.trim();
    let parsed = match t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(&hex.replace('_', ""), 16),
        None => t.replace('_', "").parse(),
    };
    parsed.map_err(|e| format!("bad seed {s:?}: {e}"))
}

/// Scripted jumps for `trace`: `(absolute time, signed size)`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceConfig {
    #[serde(default)]
    pub jumps: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    #[serde(default)]
    pub policy: PolicyConfig,
    pub u: Vec<f64>,
    #[serde(default = "default_estimator")]
    pub estimator: Estimator,
    pub n: u64,
    pub seed: Seed,
    #[serde(default)]
    pub penalty: PenaltyConfig,
    #[serde(default)]
    pub discount: f64,
    /// Depth below the start at which crude paths are abandoned.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<f64>,
    #[serde(default = "default_outputs")]
    pub outputs: Vec<Output>,
    #[serde(default)]
    pub check: CheckConfig,
    /// Grid step for the Brownian model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bm_step: Option<f64>,
    /// Histogram CSVs for the joint law.
    #[serde(default)]
    pub histograms: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<TraceConfig>,
}

fn default_estimator() -> Estimator {
    Estimator::Auto
}

fn default_outputs() -> Vec<Output> {
    vec![Output::Ruin]
}

impl std::str::FromStr for ExperimentConfig {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        let c: ExperimentConfig = toml::from_str(s)?;
        c.validate()?;
        Ok(c)
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        text.parse()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let model = self.model.build().map_err(|e| field_err("model", e))?;
        model.check_net_profit().map_err(|e| field_err("model", e))?;
        let policy = self.policy.build().map_err(|e| field_err("policy", e))?;
        if self.u.is_empty() {
            return Err(field_err("u", "needs at least one level"));
        }
        if self.u.iter().any(|&u| !(u > 0.0 && u.is_finite())) {
            return Err(field_err("u", "levels must be positive and finite"));
        }
        if self.u.windows(2).any(|w| w[0] >= w[1]) {
            return Err(field_err("u", "levels must be strictly ascending"));
        }
        if self.n < 100 {
            return Err(field_err("n", "must be at least 100"));
        }
        if !(self.discount >= 0.0 && self.discount.is_finite()) {
            return Err(field_err("discount", "must be finite and >= 0"));
        }
        if let Some(t) = self.truncation {
            if !(t > 0.0) {
                return Err(field_err("truncation", "must be positive"));
            }
        }
        if let Some(h) = self.bm_step {
            if !(h > 0.0 && h.is_finite()) {
                return Err(field_err("bm_step", "must be positive"));
            }
        }
        let p = self.penalty;
        if !(p.lambda >= 0.0 && p.delta >= 0.0 && p.eta.is_finite()) {
            return Err(field_err("penalty", "lambda and delta must be >= 0, eta finite"));
        }
        if !(self.check.k > 0.0 && self.check.abs >= 0.0) || self.check.rel.values().any(|&r| !(r >= 0.0)) {
            return Err(field_err("check", "k must be positive, slacks nonnegative"));
        }
        if self.estimator.measure(&policy) == Measure::Switched && !model.has_jumps() {
            return Err(field_err("estimator", "switched sampling needs a jump model"));
        }
        Ok(())
    }

    pub fn model_spec(&self) -> ModelSpec {
        self.model.build().expect("validated")
    }

    pub fn tax_policy(&self) -> TaxPolicy {
        self.policy.build().expect("validated")
    }

    pub fn measure(&self) -> Measure {
        self.estimator.measure(&self.tax_policy())
    }

    pub fn sim_options(&self) -> SimOptions {
        let mut o = SimOptions { discount: self.discount, truncation: self.truncation, ..SimOptions::default() };
        if let Some(h) = self.bm_step {
            o.bm_step = h;
        }
        o
    }

    pub fn wants(&self, o: Output) -> bool {
        self.outputs.contains(&o)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        u = [2.0]
        n = 10000
        seed = 1
        estimator = "crude"
        [model]
        type = "cl"
        premium = 1.5
        claim_intensity = 1.0
        claim_rate = 1.0
    "#;

    #[test]
    fn minimal_config() {
        let c: ExperimentConfig = MINIMAL.parse().unwrap();
        assert_eq!(c.policy, PolicyConfig::Constant { gamma: 0.0 });
        assert_eq!(c.outputs, vec![Output::Ruin]);
        assert_eq!(c.measure(), Measure::Physical);
        assert_eq!(c.check.k, 3.0);
    }

    #[test]
    fn hex_seed_and_policy_alias() {
        let text = MINIMAL.replace("seed = 1", "seed = \"0xff\"")
            + "[policy]\ntype = \"example41\"\nbeta = 6.0\n";
        let c: ExperimentConfig = text.replace("estimator = \"crude\"", "").parse().unwrap();
        assert_eq!(c.seed, Seed(255));
        assert_eq!(c.tax_policy(), TaxPolicy::hyperbolic(6.0).unwrap());
        assert_eq!(c.measure(), Measure::Switched);
    }

    #[test]
    fn field_errors_name_the_field() {
        let bad = MINIMAL.replace("u = [2.0]", "u = [3.0, 2.0]");
        let e = bad.parse::<ExperimentConfig>().unwrap_err();
        assert!(e.to_string().starts_with("u:"), "{e}");
        let bad = MINIMAL.replace("n = 10000", "n = 5");
        assert!(bad.parse::<ExperimentConfig>().unwrap_err().to_string().starts_with("n:"));
        let bad = MINIMAL.replace("premium = 1.5", "premium = 0.5");
        assert!(bad.parse::<ExperimentConfig>().unwrap_err().to_string().starts_with("model:"));
        let bad = MINIMAL.replace("seed = 1", "seed = -4");
        assert!(bad.parse::<ExperimentConfig>().is_err());
    }

    #[test]
    fn round_trips_through_toml() {
        let c: ExperimentConfig = MINIMAL.parse().unwrap();
        let again: ExperimentConfig = c.to_toml().parse().unwrap();
        assert_eq!(c, again);
    }
}
