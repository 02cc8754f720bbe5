//! Plausibility screening of assumed effect sizes.
//!
//! The benchmark catalog holds the largest effect reported for five
//! population health interventions. [`assess_plausibility`] applies a fixed,
//! heuristic rule table to an assumed SMD magnitude together with what is
//! known about the intervention and outcome. The rule table is a documented
//! design choice built around the conventional 0.2 / 0.5 / 0.8 cut-points and
//! the catalog maximum; it is advisory and never blocks a computation.

use std::fmt;
use std::str::FromStr;

use crate::measures::Smd;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IntensityClass {
    HighTouch,
    MediumTouch,
    LowTouch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Targeting {
    Universal,
    Targeted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OutcomeProximity {
    Proximal,
    Distal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mechanism {
    Direct,
    Indirect,
}

macro_rules! keyword_enum {
    ($ty:ty, $what:literal, $( $variant:path => [$($kw:literal),+] ),+ $(,)?) => {
        impl $ty {
            pub fn key(self) -> &'static str {
                match self {
                    $( $variant => [$($kw),+][0], )+
                }
            }
        }

        impl FromStr for $ty {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                let norm = s.trim().to_ascii_lowercase().replace(['-', '_', ' '], "");
                $( if [$($kw),+].iter().any(|k| k.replace('-', "") == norm) { return Ok($variant); } )+
                Err(Error::usage(format!(concat!("unknown ", $what, " '{}'"), s.trim())))
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.key())
            }
        }
    };
}

keyword_enum!(IntensityClass, "intensity",
    IntensityClass::HighTouch => ["high-touch", "high"],
    IntensityClass::MediumTouch => ["medium-touch", "medium"],
    IntensityClass::LowTouch => ["low-touch", "low"],
);
keyword_enum!(Targeting, "targeting",
    Targeting::Universal => ["universal"],
    Targeting::Targeted => ["targeted"],
);
keyword_enum!(OutcomeProximity, "outcome proximity",
    OutcomeProximity::Proximal => ["proximal"],
    OutcomeProximity::Distal => ["distal"],
);
keyword_enum!(Mechanism, "mechanism",
    Mechanism::Direct => ["direct"],
    Mechanism::Indirect => ["indirect"],
);

#[derive(Debug, Clone, PartialEq)]
pub struct InterventionBenchmark {
    pub name: &'static str,
    pub intensity: IntensityClass,
    pub targeting: Targeting,
    pub largest_smd: f64,
    pub outcome: &'static str,
    /// Citation for the reported effect, when one accompanies it.
    pub source: Option<&'static str>,
}

static CATALOG: [InterventionBenchmark; 5] = [
    InterventionBenchmark {
        name: "Home visiting programs in pregnancy and early childhood",
        intensity: IntensityClass::HighTouch,
        targeting: Targeting::Targeted,
        largest_smd: 0.369,
        outcome: "Child maltreatment episodes",
        source: Some("Bilukha et al., 2005"),
    },
    InterventionBenchmark {
        name: "Compulsory schooling laws",
        intensity: IntensityClass::LowTouch,
        targeting: Targeting::Universal,
        largest_smd: 0.016,
        outcome: "Obesity",
        source: Some("Hamad et al., 2018"),
    },
    InterventionBenchmark {
        name: "Smoke-free air policies",
        intensity: IntensityClass::LowTouch,
        targeting: Targeting::Universal,
        largest_smd: 0.541,
        outcome: "Second-hand smoke exposure",
        source: Some("Community Preventive Services Task Force, 2014b"),
    },
    // Low- to medium-touch depending on exposure; recorded at the lower class.
    InterventionBenchmark {
        name: "Mass media campaigns to reduce tobacco use",
        intensity: IntensityClass::LowTouch,
        targeting: Targeting::Universal,
        largest_smd: 0.208,
        outcome: "Tobacco use initiation",
        source: None,
    },
    InterventionBenchmark {
        name: "Quitlines to promote tobacco cessation",
        intensity: IntensityClass::MediumTouch,
        targeting: Targeting::Targeted,
        largest_smd: 0.227,
        outcome: "Tobacco cessation",
        source: Some("Stead et al., 2013"),
    },
];

pub fn benchmark_catalog() -> &'static [InterventionBenchmark] {
    &CATALOG
}

/// Largest effect in the catalog.
pub fn catalog_max_smd() -> f64 {
    CATALOG.iter().map(|b| b.largest_smd).fold(0.0, f64::max)
}

/// Expected effect of an intervention acting through an intermediate
/// determinant: the per-unit effect of the mechanism on the outcome times the
/// change the intervention induces in the mechanism.
pub fn attenuate_indirect(effect_per_unit: Smd, induced_change: f64) -> Result<Smd> {
    if !induced_change.is_finite() {
        return Err(Error::domain(format!(
            "induced change in the mechanism must be finite, got {induced_change}"
        )));
    }
    Smd::new(effect_per_unit.value() * induced_change)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VerdictLevel {
    Plausible,
    Questionable,
    Implausible,
}

impl fmt::Display for VerdictLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VerdictLevel::Plausible => "Plausible",
            VerdictLevel::Questionable => "Questionable",
            VerdictLevel::Implausible => "Implausible",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RuleId {
    /// |d| >= 0.8.
    LargeEffect,
    /// 0.5 <= |d| < 0.8 without high-touch targeting or a proximal outcome.
    MediumWithoutSupport,
    /// 0.5 <= |d| < 0.8 and above the largest catalogued effect.
    AboveCatalogMax,
    /// Indirect mechanism with |d| >= 0.2.
    IndirectMechanism,
    /// Low-touch universal intervention on a distal outcome with |d| >= 0.2.
    LowTouchUniversalDistal,
}

impl RuleId {
    pub fn code(self) -> &'static str {
        match self {
            RuleId::LargeEffect => "R1",
            RuleId::MediumWithoutSupport => "R2",
            RuleId::AboveCatalogMax => "R2b",
            RuleId::IndirectMechanism => "R3",
            RuleId::LowTouchUniversalDistal => "R4",
        }
    }

    /// Which planning consideration the rule encodes.
    pub fn consideration(self) -> &'static str {
        match self {
            RuleId::LargeEffect => "benchmark magnitudes for population health interventions",
            RuleId::MediumWithoutSupport => "intervention intensity, target population and outcome",
            RuleId::AboveCatalogMax => "benchmark magnitudes for population health interventions",
            RuleId::IndirectMechanism => "mechanism of effect",
            RuleId::LowTouchUniversalDistal => {
                "intervention intensity, target population and outcome"
            }
        }
    }

    pub fn level(self) -> VerdictLevel {
        match self {
            RuleId::LargeEffect => VerdictLevel::Implausible,
            _ => VerdictLevel::Questionable,
        }
    }

    pub fn rationale(self) -> &'static str {
        match self {
            RuleId::LargeEffect => {
                "an SMD of 0.8 or more was not reached by any catalogued intervention, even high-touch programs on proximal outcomes"
            }
            RuleId::MediumWithoutSupport => {
                "a medium SMD needs a high-touch targeted intervention or a proximal outcome"
            }
            RuleId::AboveCatalogMax => "the SMD exceeds the largest catalogued effect (0.541)",
            RuleId::IndirectMechanism => {
                "effects transmitted through an intermediate determinant are expected to be very small"
            }
            RuleId::LowTouchUniversalDistal => {
                "low-touch universal interventions on distal outcomes rarely reach a small SMD"
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TriggeredRule {
    pub rule: RuleId,
    pub level: VerdictLevel,
    pub rationale: &'static str,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlausibilityVerdict {
    pub level: VerdictLevel,
    pub triggered_rules: Vec<TriggeredRule>,
}

/// Qualitative description of the planned study; unknown attributes are
/// `None` and never satisfy a rule's exemption.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StudyProfile {
    pub intensity: Option<IntensityClass>,
    pub targeting: Option<Targeting>,
    pub proximity: Option<OutcomeProximity>,
    pub mechanism: Option<Mechanism>,
}

pub fn assess_plausibility(
    d: Smd,
    intensity: IntensityClass,
    targeting: Targeting,
    proximity: OutcomeProximity,
    mechanism: Mechanism,
) -> PlausibilityVerdict {
    assess_profile(
        d,
        &StudyProfile {
            intensity: Some(intensity),
            targeting: Some(targeting),
            proximity: Some(proximity),
            mechanism: Some(mechanism),
        },
    )
}

pub fn assess_profile(d: Smd, profile: &StudyProfile) -> PlausibilityVerdict {
    let m = d.value().abs();
    let mut rules = Vec::new();

    if m >= 0.8 {
        rules.push(RuleId::LargeEffect);
    }
    if (0.5..0.8).contains(&m) {
        let high_touch_targeted = profile.intensity == Some(IntensityClass::HighTouch)
            && profile.targeting == Some(Targeting::Targeted);
        let proximal = profile.proximity == Some(OutcomeProximity::Proximal);
        if !(high_touch_targeted || proximal) {
            rules.push(RuleId::MediumWithoutSupport);
        }
        if m > catalog_max_smd() {
            rules.push(RuleId::AboveCatalogMax);
        }
    }
    if m >= 0.2 && profile.mechanism == Some(Mechanism::Indirect) {
        rules.push(RuleId::IndirectMechanism);
    }
    if m >= 0.2
        && profile.intensity == Some(IntensityClass::LowTouch)
        && profile.targeting == Some(Targeting::Universal)
        && profile.proximity == Some(OutcomeProximity::Distal)
    {
        rules.push(RuleId::LowTouchUniversalDistal);
    }

    let triggered_rules: Vec<TriggeredRule> = rules
        .into_iter()
        .map(|rule| TriggeredRule {
            rule,
            level: rule.level(),
            rationale: rule.rationale(),
        })
        .collect();
    let level = triggered_rules
        .iter()
        .map(|t| t.level)
        .max()
        .unwrap_or(VerdictLevel::Plausible);
    PlausibilityVerdict {
        level,
        triggered_rules,
    }
}
