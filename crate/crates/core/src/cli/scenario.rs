//! Scenario files: flat `key = value` lines with `#` comments.
//!
//! ```text
//! # rare outcome, broad rollout
//! label = quitline expansion
//! effect_scale = smd
//! effect_value = 0.5
//! p0 = 0.01
//! pe = 0.5
//! ```
//!
//! Values given on the command line override the file. Every problem found is
//! reported, each naming its key and the line it came from.

use std::collections::BTreeMap;
use std::fmt;

use crate::impact::ExposurePrevalence;
use crate::measures::{EffectQuantity, OutcomeContext, Scale};
use crate::plausibility::{IntensityClass, Mechanism, OutcomeProximity, StudyProfile, Targeting};
use crate::power::PowerSpec;
use crate::Error;

pub const KEYS: [&str; 14] = [
    "label",
    "effect_scale",
    "effect_value",
    "p0",
    "pe",
    "alpha",
    "target_power",
    "n_per_group",
    "intensity",
    "targeting",
    "proximity",
    "mechanism",
    "mechanism_effect_per_unit",
    "mechanism_change",
];

/// Where a value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Line(usize),
    CommandLine,
    Unspecified,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Line(n) => write!(f, "line {n}"),
            Origin::CommandLine => f.write_str("command line"),
            Origin::Unspecified => f.write_str("scenario"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioError {
    pub key: String,
    pub origin: Origin,
    pub message: String,
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} ({})", self.key, self.message, self.origin)
    }
}

impl std::error::Error for ScenarioError {}

/// All problems found in one scenario.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioErrors(pub Vec<ScenarioError>);

impl fmt::Display for ScenarioErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ScenarioErrors {}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub label: Option<String>,
    pub effect: EffectQuantity,
    pub p0: Option<OutcomeContext>,
    pub pe: Option<ExposurePrevalence>,
    pub power: PowerSpec,
    pub n_per_group: Option<u64>,
    pub profile: StudyProfile,
    /// Per-unit effect of the mechanism and the change induced in it.
    pub mechanism: Option<(f64, f64)>,
}

impl Scenario {
    pub fn alpha(&self) -> f64 {
        self.power.alpha()
    }

    pub fn target_power(&self) -> f64 {
        self.power.target_power()
    }
}

/// Unvalidated key/value pairs with their origins.
#[derive(Debug, Clone, Default)]
pub struct RawScenario {
    values: BTreeMap<String, (String, Origin)>,
    errors: Vec<ScenarioError>,
}

impl RawScenario {
    pub fn parse(text: &str) -> Self {
        let mut raw = RawScenario::default();
        for (idx, line) in text.lines().enumerate() {
            let origin = Origin::Line(idx + 1);
            let content = match line.find('#') {
                Some(pos) => &line[..pos],
                None => line,
            }
            .trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                raw.errors.push(ScenarioError {
                    key: content.to_string(),
                    origin,
                    message: "expected `key = value`".into(),
                });
                continue;
            };
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                raw.errors.push(ScenarioError {
                    key: key.to_string(),
                    origin,
                    message: "unknown key".into(),
                });
                continue;
            }
            if let Some((_, first)) = raw.values.get(key) {
                raw.errors.push(ScenarioError {
                    key: key.to_string(),
                    origin,
                    message: format!("duplicate key (first given on {first})"),
                });
                continue;
            }
            raw.values
                .insert(key.to_string(), (value.to_string(), origin));
        }
        raw
    }

    /// Sets or replaces a value from the command line.
    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        debug_assert!(KEYS.contains(&key), "unknown scenario key {key}");
        self.values
            .insert(key.to_string(), (value.into(), Origin::CommandLine));
    }

    pub fn validate(self) -> Result<Scenario, ScenarioErrors> {
        Validator {
            raw: &self.values,
            errors: self.errors.clone(),
        }
        .run()
    }
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioErrors> {
    RawScenario::parse(text).validate()
}

struct Validator<'a> {
    raw: &'a BTreeMap<String, (String, Origin)>,
    errors: Vec<ScenarioError>,
}

fn detail(e: &Error) -> String {
    match e {
        Error::Domain(m) | Error::Usage(m) | Error::Config(m) => m.clone(),
        other => other.to_string(),
    }
}

impl Validator<'_> {
    fn origin(&self, key: &str) -> Origin {
        self.raw
            .get(key)
            .map(|(_, o)| *o)
            .unwrap_or(Origin::Unspecified)
    }

    fn fail(&mut self, key: &str, message: impl Into<String>) {
        let origin = self.origin(key);
        self.errors.push(ScenarioError {
            key: key.to_string(),
            origin,
            message: message.into(),
        });
    }

    /// Parses `key` with `parse`, recording an error on failure.
    fn field<T>(&mut self, key: &str, parse: impl FnOnce(&str) -> Result<T, String>) -> Option<T> {
        let (value, _) = self.raw.get(key)?;
        match parse(value) {
            Ok(v) => Some(v),
            Err(msg) => {
                self.fail(key, msg);
                None
            }
        }
    }

    fn real(&mut self, key: &str) -> Option<f64> {
        self.field(key, |v| {
            v.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| format!("'{v}' is not a finite number"))
        })
    }

    fn keyword<T: std::str::FromStr<Err = Error>>(&mut self, key: &str) -> Option<T> {
        self.field(key, |v| v.parse::<T>().map_err(|e| detail(&e)))
    }

    fn run(mut self) -> Result<Scenario, ScenarioErrors> {
        let label = self.raw.get("label").map(|(v, _)| v.clone());
        let scale: Option<Scale> = self.keyword("effect_scale");
        let value = self.real("effect_value");
        let p0 = self.real("p0").and_then(|p| {
            OutcomeContext::new(p)
                .map_err(|e| self.fail("p0", detail(&e)))
                .ok()
        });
        let pe = self.real("pe").and_then(|p| {
            ExposurePrevalence::new(p)
                .map_err(|e| self.fail("pe", detail(&e)))
                .ok()
        });
        let alpha = self.real("alpha").unwrap_or(0.05);
        let target_power = self.real("target_power").unwrap_or(0.80);
        let n_per_group = self.field("n_per_group", |v| match v.parse::<u64>() {
            Ok(n) if n >= 2 => Ok(n),
            _ => Err(format!("'{v}' is not a group size of at least 2")),
        });

        let profile = StudyProfile {
            intensity: self.keyword::<IntensityClass>("intensity"),
            targeting: self.keyword::<Targeting>("targeting"),
            proximity: self.keyword::<OutcomeProximity>("proximity"),
            mechanism: self.keyword::<Mechanism>("mechanism"),
        };

        let per_unit = self.real("mechanism_effect_per_unit");
        let change = self.real("mechanism_change");
        let mechanism = match (
            self.raw.contains_key("mechanism_effect_per_unit"),
            self.raw.contains_key("mechanism_change"),
        ) {
            (true, false) => {
                self.fail(
                    "mechanism_change",
                    "required when mechanism_effect_per_unit is given",
                );
                None
            }
            (false, true) => {
                self.fail(
                    "mechanism_effect_per_unit",
                    "required when mechanism_change is given",
                );
                None
            }
            _ => per_unit.zip(change),
        };

        let power = match PowerSpec::new(alpha, target_power, 1.0) {
            Ok(p) => Some(p),
            Err(e) => {
                let key = if (0.0..1.0).contains(&alpha) && alpha > 0.0 {
                    "target_power"
                } else {
                    "alpha"
                };
                self.fail(key, detail(&e));
                None
            }
        };

        if !self.raw.contains_key("effect_scale") {
            self.fail("effect_scale", "missing required key");
        }
        if !self.raw.contains_key("effect_value") {
            self.fail("effect_value", "missing required key");
        }
        let mut effect = None;
        if let (Some(scale), Some(value)) = (scale, value) {
            if scale.needs_context() && !self.raw.contains_key("p0") {
                self.fail(
                    "p0",
                    format!("missing; required for effect_scale = {}", scale.key()),
                );
            } else if !scale.needs_context() || p0.is_some() {
                match EffectQuantity::from_value(scale, value, p0) {
                    Ok(q) => effect = Some(q),
                    Err(e) => self.fail("effect_value", detail(&e)),
                }
            }
        }

        if !self.errors.is_empty() {
            self.errors.sort_by_key(|e| match e.origin {
                Origin::Line(n) => (0, n),
                Origin::CommandLine => (1, 0),
                Origin::Unspecified => (2, 0),
            });
            return Err(ScenarioErrors(self.errors));
        }
        Ok(Scenario {
            label,
            effect: effect.expect("no errors implies an effect"),
            p0,
            pe,
            power: power.expect("no errors implies a power spec"),
            n_per_group,
            profile,
            mechanism,
        })
    }
}
