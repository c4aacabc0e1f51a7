//! Experiment configuration: TOML text, strict keys, diagnostics with line
//! numbers.

use std::fmt;

use serde::{Deserialize, Serialize};
use xxz_core::config_space::SpinParams;
use xxz_core::operators::DEFAULT_TENSOR_CAP;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Equivalence,
    CtDecay,
    EntropyBounds,
    Combinatorics,
    All,
}

impl Kind {
    pub const CONCRETE: [Kind; 4] = [Kind::Equivalence, Kind::CtDecay, Kind::EntropyBounds, Kind::Combinatorics];

    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Equivalence => "equivalence",
            Kind::CtDecay => "ct_decay",
            Kind::EntropyBounds => "entropy_bounds",
            Kind::Combinatorics => "combinatorics",
            Kind::All => "all",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Model {
    pub two_j: u32,
    pub sites: usize,
    pub anisotropy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bounds {
    pub budgets: Vec<u32>,
    pub deltas: Vec<f64>,
    pub alphas: Vec<f64>,
    #[serde(default)]
    pub cuts: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Distribution {
    Uniform,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Disorder {
    #[serde(default = "default_distribution")]
    pub distribution: Distribution,
    pub nu_max: f64,
    pub seeds: u32,
    #[serde(default)]
    pub base_seed: u64,
    /// Random states drawn from the low-energy subspace per entropy cell.
    #[serde(default = "default_random_states")]
    pub random_states: usize,
}

fn default_distribution() -> Distribution {
    Distribution::Uniform
}

fn default_random_states() -> usize {
    10
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Limits {
    #[serde(default = "default_dim_cap")]
    pub dense_dim_cap: usize,
    #[serde(default = "default_time_budget")]
    pub time_budget_secs: f64,
}

impl Default for Limits {
    fn default() -> Self {
        Self {
            dense_dim_cap: default_dim_cap(),
            time_budget_secs: default_time_budget(),
        }
    }
}

fn default_dim_cap() -> usize {
    DEFAULT_TENSOR_CAP
}

fn default_time_budget() -> f64 {
    3600.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kinds: Vec<Kind>,
    pub model: Model,
    pub bounds: Bounds,
    pub disorder: Disorder,
    #[serde(default)]
    pub limits: Limits,
}

/// Rejected configuration, with the 1-based line the problem was found on
/// when it can be pinned down.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}: {}", self.message),
            None => write!(f, "{}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn unknown_field(message: &str) -> Option<&str> {
    let rest = message.strip_prefix("unknown field `")?;
    rest.split_once('`').map(|(f, _)| f)
}

/// Line of `key = ...` inside `[section]` (or at top level for `""`).
fn line_of_key(text: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = name.trim().to_string();
            continue;
        }
        if current == section {
            if let Some((k, _)) = line.split_once('=') {
                if k.trim() == key {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| {
            let mut line = e.span().map(|s| line_of_offset(text, s.start));
            // unknown fields are reported at their table; point at the key instead
            if let (Some(start), Some(field)) = (line, unknown_field(e.message())) {
                line = text
                    .lines()
                    .enumerate()
                    .skip(start - 1)
                    .find(|(_, l)| l.split_once('=').is_some_and(|(k, _)| k.trim() == field))
                    .map(|(i, _)| i + 1)
                    .or(line);
            }
            ConfigError {
                line,
                message: e.message().to_string(),
            }
        })?;
        cfg.validate().map_err(|(section, key, message)| ConfigError {
            line: line_of_key(text, section, key),
            message: format!("{section}.{key}: {message}").trim_start_matches('.').to_string(),
        })?;
        Ok(cfg)
    }

    pub fn kinds(&self) -> Vec<Kind> {
        if self.kinds.contains(&Kind::All) {
            return Kind::CONCRETE.to_vec();
        }
        let mut k = self.kinds.clone();
        k.sort();
        k.dedup();
        k
    }

    pub fn spin_params(&self) -> SpinParams {
        SpinParams::new(self.model.two_j, self.model.sites, self.model.anisotropy)
            .expect("validated on load")
    }

    /// Checks every module precondition; errors name the offending key.
    fn validate(&self) -> Result<(), (&'static str, &'static str, String)> {
        let m = &self.model;
        if self.kinds.is_empty() {
            return Err(("", "kinds", "at least one experiment kind is required".into()));
        }
        if let Err(e) = SpinParams::new(m.two_j, m.sites, m.anisotropy) {
            let key = if m.two_j == 0 || m.two_j > xxz_core::config_space::MAX_TWO_J {
                "two_j"
            } else if m.sites < 2 {
                "sites"
            } else {
                "anisotropy"
            };
            return Err(("model", key, e.to_string()));
        }
        let b = &self.bounds;
        for (key, empty) in [("budgets", b.budgets.is_empty()), ("deltas", b.deltas.is_empty()), ("alphas", b.alphas.is_empty())] {
            if empty {
                return Err(("bounds", key, "must not be empty".into()));
            }
        }
        let min_k = m.two_j * m.two_j;
        if let Some(k) = b.budgets.iter().find(|&&k| k < min_k) {
            return Err(("bounds", "budgets", format!("K = {k} is below 4J^2 = {min_k}")));
        }
        if let Some(d) = b.deltas.iter().find(|d| !(**d > 0.0 && **d < 1.0)) {
            return Err(("bounds", "deltas", format!("delta must lie in (0,1), got {d}")));
        }
        if let Some(a) = b.alphas.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
            return Err(("bounds", "alphas", format!("alpha must lie in (0,1), got {a}")));
        }
        let needs_cuts = self.kinds().contains(&Kind::EntropyBounds) || self.kinds().contains(&Kind::Combinatorics);
        if needs_cuts && b.cuts.is_empty() {
            return Err(("bounds", "cuts", "entropy and combinatorics experiments need at least one cut".into()));
        }
        let four_j = 2 * m.two_j as usize;
        if let Some(ell) = b.cuts.iter().find(|&&l| l < four_j || l >= m.sites) {
            return Err((
                "bounds",
                "cuts",
                format!("cut {ell} must satisfy 4J = {four_j} <= ell < L = {}", m.sites),
            ));
        }
        let dis = &self.disorder;
        if !(dis.nu_max >= 0.0 && dis.nu_max.is_finite()) {
            return Err(("disorder", "nu_max", format!("must be finite and >= 0, got {}", dis.nu_max)));
        }
        let needs_seeds = self.kinds().contains(&Kind::CtDecay) || self.kinds().contains(&Kind::EntropyBounds);
        if needs_seeds && dis.seeds == 0 {
            return Err(("disorder", "seeds", "disorder experiments need at least one seed".into()));
        }
        if self.limits.dense_dim_cap == 0 {
            return Err(("limits", "dense_dim_cap", "must be positive".into()));
        }
        if !(self.limits.time_budget_secs > 0.0) {
            return Err(("limits", "time_budget_secs", "must be positive".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = r#"
kinds = ["all"]

[model]
two_j = 1
sites = 5
anisotropy = 2.5

[bounds]
budgets = [1]
deltas = [0.5]
alphas = [0.5]
cuts = [2, 3]

[disorder]
nu_max = 1.0
seeds = 2
"#;

    #[test]
    fn parses_minimal() {
        let c = ExperimentConfig::parse(GOOD).unwrap();
        assert_eq!(c.kinds().len(), 4);
        assert_eq!(c.disorder.random_states, 10);
        assert_eq!(c.limits, Limits::default());
    }

    #[test]
    fn unknown_key_has_line() {
        let bad = GOOD.replace("seeds = 2", "seeds = 2\ncolour = 3");
        let e = ExperimentConfig::parse(&bad).unwrap_err();
        assert_eq!(e.line, Some(18), "{e:?}");
        assert!(e.message.contains("colour"));
    }

    #[test]
    fn domain_error_has_line() {
        let bad = GOOD.replace("anisotropy = 2.5", "anisotropy = 0.5");
        let e = ExperimentConfig::parse(&bad).unwrap_err();
        assert_eq!(e.line, Some(7));
        assert!(e.message.starts_with("model.anisotropy"));

        let bad = GOOD.replace("cuts = [2, 3]", "cuts = [1, 3]");
        assert_eq!(ExperimentConfig::parse(&bad).unwrap_err().line, Some(13));
    }
}
