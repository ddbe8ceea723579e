//! Experiment configuration: schema, defaults, overrides, provenance hash.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::distill::{
    ansatz_schedule, optimize_gamma, optimize_local_objective_with_factor, OptimizationReport,
    TauSchedule, Variant, REGIME_FACTOR,
};
use crate::error::Result;
use crate::pairs::pair_count;
use crate::povm::{MeasurementSettings, PhaseSpec, Scheme};
use crate::state::{coherence_from_source, CoherenceSet, SourceModel, TelescopeArray};

/// Schema version this build reads.
pub const CONFIG_VERSION: u64 = 1;

/// Configuration-stage failure with a field-level diagnostic.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn default_version() -> u64 {
    CONFIG_VERSION
}
fn default_m() -> usize {
    3
}
fn default_epsilon() -> f64 {
    0.01
}
fn default_samples() -> u64 {
    1_000_000
}
fn default_budget() -> u64 {
    20_000_000
}
fn default_fd_step() -> f64 {
    1e-6
}
fn default_regime_factor() -> f64 {
    REGIME_FACTOR
}
fn default_variant() -> Variant {
    Variant::PureWeak
}

/// How the schedule is obtained. The three arms are mutually exclusive by
/// construction.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScheduleSpec {
    /// Verbatim strengths.
    Explicit {
        taus: Vec<f64>,
        #[serde(default = "default_variant")]
        variant: Variant,
    },
    /// The fixed profile `τ_r = 1/(2 + D - r)`.
    Ansatz { d: usize },
    /// Numerically optimized for the configured objective.
    Optimize {
        d: usize,
        #[serde(default = "default_variant")]
        variant: Variant,
        #[serde(default)]
        objective: Objective,
    },
}

/// Objective for schedule optimization.
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// Maximize the pair-collapse yield `γ_D`.
    #[default]
    Gamma,
    /// Maximize `γ_D²/β_D` under the vacuum-dominance constraint.
    Local,
}

/// How the pairwise coherences are obtained.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum CoherenceSpec {
    /// One complex value for every pair.
    Uniform {
        re: f64,
        #[serde(default)]
        im: f64,
    },
    /// Per-pair complex values `[re, im]` in lexicographic pair order.
    Explicit { entries: Vec<[f64; 2]> },
    /// Coherences derived from a source profile sampled at the baselines.
    Source {
        model: SourceModel,
        baselines: Vec<f64>,
    },
}

/// How the measurement phases are specified.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum PhaseSpecConfig {
    Shared { delta: f64 },
    PerPair { deltas: Vec<f64> },
    PerTelescope { deltas: Vec<f64> },
}

impl PhaseSpecConfig {
    pub fn to_phase_spec(&self) -> PhaseSpec {
        match self {
            PhaseSpecConfig::Shared { delta } => PhaseSpec::Shared(*delta),
            PhaseSpecConfig::PerPair { deltas } => PhaseSpec::PerPair(deltas.clone()),
            PhaseSpecConfig::PerTelescope { deltas } => PhaseSpec::PerTelescope(deltas.clone()),
        }
    }
}

/// Full experiment description. Unknown fields are rejected.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_version")]
    pub version: u64,
    #[serde(default)]
    pub scheme: Option<Scheme>,
    #[serde(default = "default_m")]
    pub m: usize,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub schedule: Option<ScheduleSpec>,
    #[serde(default)]
    pub coherence: Option<CoherenceSpec>,
    #[serde(default)]
    pub phases: Option<PhaseSpecConfig>,
    #[serde(default = "default_samples")]
    pub samples: u64,
    #[serde(default)]
    pub seed: u64,
    /// Evaluation budget for schedule optimization.
    #[serde(default = "default_budget")]
    pub budget: u64,
    /// Finite-difference step for the numeric Fisher pipeline.
    #[serde(default = "default_fd_step")]
    pub fd_step: f64,
    /// Dominance factor operationalizing the vacuum-regime constraint.
    #[serde(default = "default_regime_factor")]
    pub regime_factor: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        serde_json::from_value(serde_json::json!({})).expect("empty config is valid")
    }
}

impl ExperimentConfig {
    /// Schema checks beyond what serde's type layer enforces, with
    /// field-level diagnostics.
    pub fn validate(&self) -> std::result::Result<(), ConfigError> {
        if self.version != CONFIG_VERSION {
            return Err(ConfigError(format!(
                "version: expected {CONFIG_VERSION}, got {}",
                self.version
            )));
        }
        if self.m < 2 {
            return Err(ConfigError(format!("m: need at least 2 telescopes, got {}", self.m)));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(ConfigError(format!(
                "epsilon: must lie strictly inside (0, 1), got {}",
                self.epsilon
            )));
        }
        if self.samples == 0 {
            return Err(ConfigError("samples: must be positive".into()));
        }
        if !(self.fd_step > 0.0) {
            return Err(ConfigError(format!("fd_step: must be positive, got {}", self.fd_step)));
        }
        if !(self.regime_factor > 0.0) {
            return Err(ConfigError(format!(
                "regime_factor: must be positive, got {}",
                self.regime_factor
            )));
        }
        match &self.schedule {
            Some(ScheduleSpec::Explicit { taus, variant }) => {
                if taus.is_empty() && *variant == Variant::PureWeak {
                    return Err(ConfigError("schedule.taus: must be non-empty".into()));
                }
                for &tau in taus {
                    if !(tau > 0.0 && tau < 1.0) {
                        return Err(ConfigError(format!(
                            "schedule.taus: every strength must lie strictly inside (0, 1), got {tau}"
                        )));
                    }
                }
            }
            Some(ScheduleSpec::Ansatz { d }) | Some(ScheduleSpec::Optimize { d, .. }) => {
                if *d == 0 {
                    return Err(ConfigError("schedule.d: must be at least 1".into()));
                }
            }
            None => {}
        }
        match &self.coherence {
            Some(CoherenceSpec::Uniform { re, im }) => {
                if re * re + im * im > 1.0 + 1e-12 {
                    return Err(ConfigError(format!(
                        "coherence: |g| must not exceed 1, got |{re} + {im}i| = {}",
                        (re * re + im * im).sqrt()
                    )));
                }
            }
            Some(CoherenceSpec::Explicit { entries }) => {
                let want = pair_count(self.m);
                if entries.len() != want {
                    return Err(ConfigError(format!(
                        "coherence.entries: expected {want} pair entries for m = {}, got {}",
                        self.m,
                        entries.len()
                    )));
                }
                for e in entries {
                    if e[0] * e[0] + e[1] * e[1] > 1.0 + 1e-12 {
                        return Err(ConfigError(format!(
                            "coherence.entries: |g| must not exceed 1, got [{}, {}]",
                            e[0], e[1]
                        )));
                    }
                }
            }
            Some(CoherenceSpec::Source { model, baselines }) => {
                if baselines.len() != self.m {
                    return Err(ConfigError(format!(
                        "coherence.baselines: expected {} positions, got {}",
                        self.m,
                        baselines.len()
                    )));
                }
                model
                    .validate()
                    .map_err(|e| ConfigError(format!("coherence.model: {e}")))?;
            }
            None => {}
        }
        match &self.phases {
            Some(PhaseSpecConfig::PerPair { deltas }) if deltas.len() != pair_count(self.m) => {
                return Err(ConfigError(format!(
                    "phases.deltas: expected {} per-pair phases for m = {}, got {}",
                    pair_count(self.m),
                    self.m,
                    deltas.len()
                )));
            }
            Some(PhaseSpecConfig::PerTelescope { deltas }) if deltas.len() != self.m => {
                return Err(ConfigError(format!(
                    "phases.deltas: expected {} per-telescope phases, got {}",
                    self.m,
                    deltas.len()
                )));
            }
            _ => {}
        }
        Ok(())
    }

    /// SHA-256 of the canonical serialized form; the provenance key.
    pub fn sha256(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        let digest = Sha256::digest(&bytes);
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// The coherence set, defaulting to uniform `g = 0.5`.
    pub fn coherence_set(&self) -> Result<CoherenceSet> {
        match &self.coherence {
            None => CoherenceSet::uniform(self.m, Complex64::new(0.5, 0.0)),
            Some(CoherenceSpec::Uniform { re, im }) => {
                CoherenceSet::uniform(self.m, Complex64::new(*re, *im))
            }
            Some(CoherenceSpec::Explicit { entries }) => CoherenceSet::new(
                self.m,
                entries.iter().map(|e| Complex64::new(e[0], e[1])).collect(),
            ),
            Some(CoherenceSpec::Source { model, baselines }) => {
                let array = TelescopeArray::from_positions(baselines)?;
                coherence_from_source(model, &array)
            }
        }
    }

    /// The phase specification, defaulting to a shared `δ = 0`.
    pub fn phase_spec(&self) -> PhaseSpec {
        self.phases
            .as_ref()
            .map(|p| p.to_phase_spec())
            .unwrap_or(PhaseSpec::Shared(0.0))
    }

    /// Measurement settings; requires `scheme` to be set.
    pub fn measurement_settings(&self) -> std::result::Result<MeasurementSettings, ConfigError> {
        let scheme = self
            .scheme
            .ok_or_else(|| ConfigError("scheme: required for this command".into()))?;
        Ok(MeasurementSettings::new(scheme, self.phase_spec()))
    }

    /// Resolve the schedule spec to a concrete schedule, running the
    /// optimizer when asked. Returns the optimization report when one was
    /// produced.
    pub fn resolve_schedule(&self) -> Result<Option<(TauSchedule, Option<OptimizationReport>)>> {
        match &self.schedule {
            None => Ok(None),
            Some(ScheduleSpec::Explicit { taus, variant }) => {
                Ok(Some((TauSchedule::new(taus.clone(), *variant)?, None)))
            }
            Some(ScheduleSpec::Ansatz { d }) => Ok(Some((ansatz_schedule(*d)?, None))),
            Some(ScheduleSpec::Optimize { d, variant, objective }) => {
                let report = match objective {
                    Objective::Gamma => {
                        optimize_gamma(self.m, *d, *variant, self.budget, self.seed)?
                    }
                    Objective::Local => optimize_local_objective_with_factor(
                        self.m,
                        *d,
                        self.epsilon,
                        self.regime_factor,
                        self.budget,
                        self.seed,
                    )?,
                };
                Ok(Some((report.schedule.clone(), Some(report))))
            }
        }
    }
}

/// Load a config file (or start from the empty document), apply dotted-path
/// `key=value` overrides and the optional seed flag, then validate.
pub fn load_config(
    path: Option<&Path>,
    overrides: &[String],
    seed_flag: Option<u64>,
) -> std::result::Result<ExperimentConfig, ConfigError> {
    load_config_with_base(serde_json::json!({}), path, overrides, seed_flag)
}

/// Like [`load_config`], but seeds missing top-level fields from `base`
/// first (command-specific defaults that an explicit config still wins
/// over).
pub fn load_config_with_base(
    base: serde_json::Value,
    path: Option<&Path>,
    overrides: &[String],
    seed_flag: Option<u64>,
) -> std::result::Result<ExperimentConfig, ConfigError> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p)
            .map_err(|e| ConfigError(format!("{}: {e}", p.display())))?,
        None => "{}".to_string(),
    };
    let mut value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| ConfigError(format!("not valid JSON: {e}")))?;
    if !value.is_object() {
        return Err(ConfigError("top level must be a JSON object".into()));
    }
    if let serde_json::Value::Object(defaults) = base {
        let map = value.as_object_mut().expect("checked above");
        for (key, default) in defaults {
            map.entry(key).or_insert(default);
        }
    }
    for entry in overrides {
        let (key, raw) = entry
            .split_once('=')
            .ok_or_else(|| ConfigError(format!("override '{entry}' is not key=value")))?;
        let parsed: serde_json::Value =
            serde_json::from_str(raw).unwrap_or(serde_json::Value::String(raw.to_string()));
        set_path(&mut value, key, parsed)?;
    }
    if let Some(seed) = seed_flag {
        set_path(&mut value, "seed", serde_json::json!(seed))?;
    }
    let config: ExperimentConfig = serde_json::from_value(value)
        .map_err(|e| ConfigError(format!("schema violation: {e}")))?;
    config.validate()?;
    Ok(config)
}

fn set_path(
    root: &mut serde_json::Value,
    dotted: &str,
    new: serde_json::Value,
) -> std::result::Result<(), ConfigError> {
    let mut cursor = root;
    let segments: Vec<&str> = dotted.split('.').collect();
    for (idx, segment) in segments.iter().enumerate() {
        if segment.is_empty() {
            return Err(ConfigError(format!("override path '{dotted}' has an empty segment")));
        }
        let last = idx == segments.len() - 1;
        let map = cursor
            .as_object_mut()
            .ok_or_else(|| ConfigError(format!("override path '{dotted}' crosses a non-object")))?;
        if last {
            map.insert(segment.to_string(), new);
            return Ok(());
        }
        cursor = map
            .entry(segment.to_string())
            .or_insert_with(|| serde_json::Value::Object(Default::default()));
    }
    unreachable!("loop returns on the last segment");
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn from_json(doc: serde_json::Value) -> std::result::Result<ExperimentConfig, ConfigError> {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        write!(file, "{doc}").unwrap();
        load_config(Some(file.path()), &[], None)
    }

    #[test]
    fn defaults_fill_in() {
        let cfg = load_config(None, &[], None).unwrap();
        assert_eq!(cfg.m, 3);
        assert_eq!(cfg.epsilon, 0.01);
        assert_eq!(cfg.seed, 0);
        let g = cfg.coherence_set().unwrap();
        assert_eq!(g.get(0, 1), Complex64::new(0.5, 0.0));
    }

    #[test]
    fn overrides_apply_with_dotted_paths() {
        let overrides = vec![
            "m=5".to_string(),
            "schedule.mode=\"ansatz\"".to_string(),
            "schedule.d=4".to_string(),
            "epsilon=0.002".to_string(),
        ];
        let cfg = load_config(None, &overrides, Some(9)).unwrap();
        assert_eq!(cfg.m, 5);
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.schedule, Some(ScheduleSpec::Ansatz { d: 4 }));
        assert_eq!(cfg.epsilon, 0.002);
    }

    #[test]
    fn malformed_configs_name_the_field() {
        let cases: Vec<(serde_json::Value, &str)> = vec![
            (serde_json::json!({"m": 1}), "m"),
            (serde_json::json!({"epsilon": 1.5}), "epsilon"),
            (serde_json::json!({"version": 99}), "version"),
            (serde_json::json!({"samples": 0}), "samples"),
            (serde_json::json!({"fd_step": 0.0}), "fd_step"),
            (
                serde_json::json!({"schedule": {"mode": "explicit", "taus": [1.3]}}),
                "schedule.taus",
            ),
            (serde_json::json!({"schedule": {"mode": "ansatz", "d": 0}}), "schedule.d"),
            (
                serde_json::json!({"m": 3, "coherence": {"mode": "explicit", "entries": [[0.1, 0.0]]}}),
                "coherence.entries",
            ),
            (
                serde_json::json!({"coherence": {"mode": "uniform", "re": 1.2}}),
                "coherence",
            ),
            (
                serde_json::json!({"phases": {"mode": "per_telescope", "deltas": [0.0]}}),
                "phases.deltas",
            ),
            (serde_json::json!({"no_such_field": 1}), "no_such_field"),
            (
                serde_json::json!({"schedule": {"mode": "bogus"}}),
                "bogus",
            ),
        ];
        for (doc, field) in cases {
            let err = from_json(doc.clone()).expect_err(&format!("{doc} should fail"));
            assert!(
                err.0.contains(field),
                "diagnostic for {doc} should mention '{field}': {}",
                err.0
            );
        }
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = load_config(None, &[], None).unwrap();
        let b = load_config(None, &[], None).unwrap();
        assert_eq!(a.sha256(), b.sha256());
        let c = load_config(None, &["m=4".to_string()], None).unwrap();
        assert_ne!(a.sha256(), c.sha256());
        assert_eq!(a.sha256().len(), 64);
    }

    #[test]
    fn source_coherence_resolves() {
        let cfg = from_json(serde_json::json!({
            "m": 3,
            "coherence": {
                "mode": "source",
                "model": {"gaussian": {"mean": 0.0, "sigma": 0.4}},
                "baselines": [0.0, 1.0, 2.5]
            }
        }))
        .unwrap();
        let g = cfg.coherence_set().unwrap();
        assert!(g.get(0, 1).norm() < 1.0);
        assert!(g.get(0, 1).norm() > g.get(0, 2).norm());
    }

    #[test]
    fn optimize_schedule_resolution_reports() {
        let cfg = load_config(
            None,
            &[
                "schedule.mode=\"optimize\"".to_string(),
                "schedule.d=1".to_string(),
                "budget=100000".to_string(),
            ],
            None,
        )
        .unwrap();
        let (schedule, report) = cfg.resolve_schedule().unwrap().unwrap();
        let report = report.unwrap();
        assert!((schedule.taus()[0] - 0.5).abs() < 1e-6);
        assert!((report.objective - 0.25).abs() < 1e-10);
    }
}
