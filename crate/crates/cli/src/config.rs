//! Config documents: a flat JSON object with an optional `preset` key whose
//! defaults are overridden key by key. Unknown keys are errors.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use ns_manifold::geometry::ChartKind;
use ns_manifold::killing::AlphaKind;
use ns_manifold::operators::DiffusionKind;
use ns_manifold::solver::{Background, Dynamics, InitialCondition, LinearVariant, SimConfig};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    Verify,
    Decay,
    HodgeDecay,
    Coriolis,
    Linearized,
    Bracket,
    OperatorCompare,
    Alpha,
}

impl Preset {
    pub const ALL: [Preset; 8] = [
        Preset::Verify,
        Preset::Decay,
        Preset::HodgeDecay,
        Preset::Coriolis,
        Preset::Linearized,
        Preset::Bracket,
        Preset::OperatorCompare,
        Preset::Alpha,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Verify => "verify",
            Preset::Decay => "decay",
            Preset::HodgeDecay => "hodge-decay",
            Preset::Coriolis => "coriolis",
            Preset::Linearized => "linearized",
            Preset::Bracket => "bracket",
            Preset::OperatorCompare => "operator-compare",
            Preset::Alpha => "alpha",
        }
    }

    /// Simulation defaults; None for the suite presets.
    pub fn sim_config(self) -> Option<SimConfig> {
        let mixed = InitialCondition::KillingPlusPerturbation { c: 1.0, l: 3, m: 1, amplitude: 1e-2 };
        let cfg = match self {
            Preset::Verify | Preset::Alpha => return None,
            Preset::Decay => SimConfig::default(),
            Preset::HodgeDecay => SimConfig { diffusion: DiffusionKind::Hodge, initial: mixed, ..SimConfig::default() },
            Preset::Coriolis => SimConfig {
                viscosity: 0.02,
                rotation_rate: 2.0 * std::f64::consts::PI,
                t_end: 20.0,
                cadence: 50,
                initial: InitialCondition::RandomBand { l_min: 2, l_max: 6, amplitude: 0.1, seed: None, zonal: 0.5 },
                ..SimConfig::default()
            },
            Preset::Linearized => SimConfig {
                truncation: 21,
                t_end: 0.5,
                cadence: 5,
                initial: InitialCondition::KillingPlusPerturbation { c: 1.0, l: 3, m: 1, amplitude: 0.1 },
                dynamics: Dynamics::Linearized { variant: LinearVariant::Full, background: Background::Initial },
                ..SimConfig::default()
            },
            Preset::Bracket => SimConfig {
                t_end: 0.2,
                dt: Some(0.005),
                cadence: 4,
                initial: InitialCondition::RandomBand { l_min: 1, l_max: 6, amplitude: 1.0, seed: None, zonal: 0.0 },
                dynamics: Dynamics::Linearized { variant: LinearVariant::Full, background: Background::RotationX },
                ..SimConfig::default()
            },
            Preset::OperatorCompare => SimConfig { t_end: 1.0, initial: mixed, ..SimConfig::default() },
        };
        Some(cfg)
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| CliError::config("preset", format!("unknown preset `{s}`")))
    }
}

/// Options of the identity suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyOptions {
    /// All three charts when absent.
    #[serde(default)]
    pub chart: Option<ChartKind>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<String>,
}

/// Options of the α estimator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlphaOptions {
    /// All three constants when absent.
    #[serde(default)]
    pub kind: Option<AlphaKind>,
    #[serde(default = "default_chart")]
    pub chart: ChartKind,
    #[serde(default = "default_lmax")]
    pub lmax: usize,
    #[serde(default)]
    pub output_dir: Option<String>,
}

fn default_seed() -> u64 {
    42
}

fn default_chart() -> ChartKind {
    ChartKind::Sphere
}

fn default_lmax() -> usize {
    15
}

/// What a config document asks for.
#[derive(Debug, Clone, PartialEq)]
pub enum Job {
    Simulate { preset: Option<Preset>, config: Box<SimConfig> },
    Verify(VerifyOptions),
    Alpha(AlphaOptions),
}

impl Job {
    #[cfg(test)]
    pub fn preset(&self) -> Option<Preset> {
        match self {
            Job::Simulate { preset, .. } => *preset,
            Job::Verify(_) => Some(Preset::Verify),
            Job::Alpha(_) => Some(Preset::Alpha),
        }
    }
}

fn decode<T: serde::de::DeserializeOwned>(value: Value) -> Result<T, CliError> {
    serde_json::from_value(value).map_err(|e| CliError::config("config", e.to_string()))
}

/// Parses a config document and applies preset defaults.
pub fn parse_config(text: &str) -> Result<Job, CliError> {
    let value: Value = serde_json::from_str(text).map_err(|e| CliError::config("config", format!("invalid JSON: {e}")))?;
    let Value::Object(mut obj) = value else {
        return Err(CliError::config("config", "top level must be a JSON object"));
    };
    let preset = match obj.remove("preset") {
        None => None,
        Some(Value::String(s)) => Some(s.parse::<Preset>()?),
        Some(_) => return Err(CliError::config("preset", "must be a string")),
    };
    match preset {
        Some(Preset::Verify) => Ok(Job::Verify(decode(Value::Object(obj))?)),
        Some(Preset::Alpha) => Ok(Job::Alpha(decode(Value::Object(obj))?)),
        _ => {
            let base = preset.and_then(Preset::sim_config).unwrap_or_default();
            let Value::Object(mut merged) = serde_json::to_value(&base).expect("config serializes") else {
                unreachable!("SimConfig serializes to an object")
            };
            overlay(&mut merged, obj);
            let config: SimConfig = decode(Value::Object(merged))?;
            config.validate()?;
            Ok(Job::Simulate { preset, config: Box::new(config) })
        }
    }
}

/// Top-level keys of `over` replace those of `base`.
fn overlay(base: &mut Map<String, Value>, over: Map<String, Value>) {
    for (k, v) in over {
        base.insert(k, v);
    }
}

pub fn load_config(path: &Path) -> Result<Job, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sim(job: Job) -> SimConfig {
        match job {
            Job::Simulate { config, .. } => *config,
            other => panic!("not a simulation: {other:?}"),
        }
    }

    #[test]
    fn minimal_decay_resolves_defaults() {
        let c = sim(parse_config(r#"{"preset": "decay"}"#).unwrap());
        assert_eq!(c.chart, ChartKind::Sphere);
        assert_eq!(c.truncation, 31);
        assert_eq!(c.viscosity, 0.01);
        assert_eq!(c.diffusion, DiffusionKind::Deformation);
    }

    #[test]
    fn overrides_are_respected() {
        let c = sim(parse_config(r#"{"preset": "decay", "diffusion": "hodge", "t_end": 1.5}"#).unwrap());
        assert_eq!(c.diffusion, DiffusionKind::Hodge);
        assert_eq!(c.t_end, 1.5);
    }

    #[test]
    fn unknown_keys_are_errors() {
        let e = parse_config(r#"{"preset": "decay", "viscosty": 0.1}"#).unwrap_err();
        assert!(e.to_string().contains("viscosty"), "{e}");
        assert_eq!(e.exit_code(), 2);
        assert!(parse_config(r#"{"preset": "verify", "lmax": 3}"#).is_err());
        assert!(parse_config(r#"{"initial": {"type": "single_mode", "l": 2, "m": 0, "amplitude": 1, "x": 1}}"#).is_err());
    }

    #[test]
    fn bad_dt_names_the_field() {
        let e = parse_config(r#"{"preset": "decay", "dt": -0.1}"#).unwrap_err();
        assert!(e.to_string().contains("dt"), "{e}");
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn every_preset_resolves() {
        for p in Preset::ALL {
            let job = parse_config(&format!(r#"{{"preset": "{p}"}}"#)).unwrap();
            assert_eq!(job.preset(), Some(p));
            if let Job::Simulate { config, .. } = job {
                config.validate().unwrap();
            }
        }
        assert!(parse_config(r#"{"preset": "nope"}"#).is_err());
    }

    #[test]
    fn suite_options() {
        match parse_config(r#"{"preset": "alpha", "kind": "K", "lmax": 9}"#).unwrap() {
            Job::Alpha(a) => {
                assert_eq!(a.kind, Some(AlphaKind::K));
                assert_eq!(a.lmax, 9);
            }
            other => panic!("{other:?}"),
        }
        match parse_config(r#"{"preset": "verify", "chart": "torus"}"#).unwrap() {
            Job::Verify(v) => assert_eq!(v.chart, Some(ChartKind::Torus)),
            other => panic!("{other:?}"),
        }
    }
}
