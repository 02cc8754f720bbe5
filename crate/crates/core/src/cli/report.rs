//! Planner report: one scenario run through every module.

use std::fmt;

use super::format::{Align, OutputFormat, Table};
use super::scenario::Scenario;
use crate::display::{fixed, full};
use crate::impact::{paf_from_smd, ExposurePrevalence, PafResult, DEFAULT_PES};
use crate::measures::{classify_magnitude, convert, MagnitudeLabel, Scale, Smd};
use crate::plausibility::{assess_profile, attenuate_indirect, PlausibilityVerdict};
use crate::power::{
    mde_smd, required_n_smd, required_n_two_proportions, MdeResult, RiskContrast, SampleSizeResult,
};
use crate::Error;

/// |d| beyond which an effect is outside any empirical range seen in practice.
pub const EXTREME_SMD: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ReportError {
    pub stage: &'static str,
    pub error: Error,
}

impl fmt::Display for ReportError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} stage: {}", self.stage, self.error)
    }
}

impl std::error::Error for ReportError {}

/// A computed value, or why it could not be computed.
pub type Outcome<T> = std::result::Result<T, String>;

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub scenario: Scenario,
    pub smd: Smd,
    /// The effect on each of the five scales, in [`Scale::ALL`] order.
    pub scales: Vec<(Scale, Outcome<f64>)>,
    pub label: MagnitudeLabel,
    pub paf: Outcome<Vec<PafResult>>,
    pub sample_size: Outcome<SampleSizeResult>,
    pub two_proportion_size: Option<Outcome<SampleSizeResult>>,
    pub mde: Outcome<MdeResult>,
    pub verdict: PlausibilityVerdict,
    pub attenuated: Option<Smd>,
    pub warnings: Vec<String>,
}

fn stage(stage: &'static str) -> impl Fn(Error) -> ReportError {
    move |error| ReportError { stage, error }
}

pub fn run_report(s: &Scenario) -> Result<Report, ReportError> {
    let smd = match convert(s.effect, Scale::Smd, s.p0).map_err(stage("measures"))? {
        crate::measures::EffectQuantity::Smd(d) => d,
        _ => unreachable!("conversion to SMD yields an SMD"),
    };
    let mut warnings = Vec::new();
    if smd.value().abs() > EXTREME_SMD {
        warnings.push(format!(
            "|SMD| = {} exceeds {EXTREME_SMD}, outside any empirical range",
            fixed(smd.value().abs(), 2)
        ));
    }

    let scales = Scale::ALL
        .iter()
        .map(|&scale| {
            let value = if scale.needs_context() && s.p0.is_none() {
                Err("requires p0".to_string())
            } else {
                convert(s.effect, scale, s.p0)
                    .map(|q| q.value())
                    .map_err(|e| e.to_string())
            };
            (scale, value)
        })
        .collect();

    let paf = match s.p0 {
        None => Err("requires p0".to_string()),
        Some(p0) => {
            let mut pes: Vec<f64> = DEFAULT_PES.to_vec();
            if let Some(pe) = s.pe {
                pes.push(pe.value());
            }
            pes.sort_by(f64::total_cmp);
            pes.dedup();
            Ok(pes
                .into_iter()
                .map(|pe| {
                    paf_from_smd(
                        smd,
                        p0,
                        ExposurePrevalence::new(pe).expect("validated prevalence"),
                    )
                })
                .collect())
        }
    };

    let sample_size = if smd.value() == 0.0 {
        Err("not computable for null effect".to_string())
    } else {
        let r = required_n_smd(smd, &s.power).map_err(stage("power"))?;
        if r.floored {
            warnings.push(format!(
                "required n per group raised to the floor of {} (normal approximation degrades below it)",
                r.n_per_group
            ));
        }
        Ok(r)
    };

    let two_proportion_size = s.p0.map(|p0| {
        if smd.value() == 0.0 {
            return Err("not computable for null effect".to_string());
        }
        let rr = convert(smd.into(), Scale::RelativeRisk, Some(p0)).map_err(|e| e.to_string())?;
        let contrast = match rr {
            crate::measures::EffectQuantity::RelativeRisk(rr) => RiskContrast::Relative(rr),
            _ => unreachable!("conversion to RR yields an RR"),
        };
        required_n_two_proportions(contrast, &s.power).map_err(|e| e.to_string())
    });

    let mde = match (s.n_per_group, &sample_size) {
        (Some(n), _) => Ok(mde_smd(n, &s.power).map_err(stage("power"))?),
        (None, Ok(r)) => Ok(mde_smd(r.n_per_group, &s.power).map_err(stage("power"))?),
        (None, Err(_)) => Err("requires n_per_group or a non-null effect".to_string()),
    };

    let attenuated = match s.mechanism {
        Some((per_unit, change)) => {
            let per_unit = Smd::new(per_unit).map_err(stage("plausibility"))?;
            Some(attenuate_indirect(per_unit, change).map_err(stage("plausibility"))?)
        }
        None => None,
    };

    Ok(Report {
        scenario: s.clone(),
        smd,
        scales,
        label: classify_magnitude(smd),
        paf,
        sample_size,
        two_proportion_size,
        mde,
        verdict: assess_profile(smd, &s.profile),
        attenuated,
        warnings,
    })
}

/// Display precision for each scale.
fn scale_decimals(scale: Scale) -> usize {
    match scale {
        Scale::RiskDifference => 3,
        Scale::Smd => 3,
        _ => 2,
    }
}

impl Report {
    /// The report as `section, quantity, value, full-precision value` rows.
    pub fn table(&self) -> Table {
        let mut t = Table::new(["section", "quantity", "value", "full"]).with_align(vec![
            Align::Left,
            Align::Left,
            Align::Right,
            Align::Left,
        ]);
        let mut row = |section: &str, quantity: String, value: String, exact: String| {
            t.push([section.to_string(), quantity, value, exact]);
        };
        let na = |why: &str| (format!("n/a ({why})"), String::new());
        let s = &self.scenario;

        row(
            "scenario",
            "label".into(),
            s.label.clone().unwrap_or_default(),
            String::new(),
        );
        row(
            "scenario",
            "effect".into(),
            format!("{} {}", s.effect.scale().key(), full(s.effect.value())),
            full(s.effect.value()),
        );
        if let Some(p0) = s.p0 {
            row("scenario", "p0".into(), full(p0.p0()), full(p0.p0()));
        }
        if let Some(pe) = s.pe {
            row("scenario", "pe".into(), full(pe.value()), full(pe.value()));
        }
        row("scenario", "alpha".into(), full(s.alpha()), full(s.alpha()));
        row(
            "scenario",
            "target power".into(),
            full(s.target_power()),
            full(s.target_power()),
        );
        if let Some(n) = s.n_per_group {
            row(
                "scenario",
                "n per group".into(),
                n.to_string(),
                n.to_string(),
            );
        }

        for (scale, value) in &self.scales {
            let (shown, exact) = match value {
                Ok(v) => (fixed(*v, scale_decimals(*scale)), full(*v)),
                Err(why) => na(why),
            };
            row("effect", scale.key().into(), shown, exact);
        }
        row(
            "effect",
            "magnitude".into(),
            self.label.as_str().into(),
            String::new(),
        );

        match &self.paf {
            Ok(cells) => {
                for c in cells {
                    row(
                        "impact",
                        format!("PAF (Pe={})", full(c.pe)),
                        fixed(c.paf, 2),
                        full(c.paf),
                    );
                }
            }
            Err(why) => {
                let (v, e) = na(why);
                row("impact", "PAF".into(), v, e);
            }
        }

        match &self.sample_size {
            Ok(r) => {
                row(
                    "power",
                    "n per group (SMD)".into(),
                    r.n_per_group.to_string(),
                    full(r.formula_n),
                );
                row(
                    "power",
                    "n total (SMD)".into(),
                    r.n_total.to_string(),
                    r.n_total.to_string(),
                );
                row(
                    "power",
                    "achieved power (SMD)".into(),
                    fixed(r.achieved_power, 4),
                    full(r.achieved_power),
                );
            }
            Err(why) => {
                let (v, e) = na(why);
                row("power", "n per group (SMD)".into(), v, e);
            }
        }
        if let Some(two) = &self.two_proportion_size {
            match two {
                Ok(r) => {
                    row(
                        "power",
                        "n per group (two proportions)".into(),
                        r.n_per_group.to_string(),
                        full(r.formula_n),
                    );
                    row(
                        "power",
                        "achieved power (two proportions)".into(),
                        fixed(r.achieved_power, 4),
                        full(r.achieved_power),
                    );
                }
                Err(why) => {
                    let (v, e) = na(why);
                    row("power", "n per group (two proportions)".into(), v, e);
                }
            }
        }
        match &self.mde {
            Ok(m) => row(
                "power",
                format!("MDE SMD (n={})", m.n_per_group),
                fixed(m.d_min, 4),
                full(m.d_min),
            ),
            Err(why) => {
                let (v, e) = na(why);
                row("power", "MDE SMD".into(), v, e);
            }
        }

        if let Some(a) = self.attenuated {
            row(
                "plausibility",
                "attenuated SMD".into(),
                fixed(a.value(), 3),
                full(a.value()),
            );
            row(
                "plausibility",
                "attenuated magnitude".into(),
                classify_magnitude(a).as_str().into(),
                String::new(),
            );
        }
        row(
            "plausibility",
            "verdict (heuristic rule set)".into(),
            self.verdict.level.to_string(),
            String::new(),
        );
        for t in &self.verdict.triggered_rules {
            row(
                "plausibility",
                format!("rule {}", t.rule.code()),
                t.level.to_string(),
                format!("{} [{}]", t.rationale, t.rule.consideration()),
            );
        }
        for w in &self.warnings {
            row("warning", String::new(), w.clone(), String::new());
        }
        t
    }

    pub fn render(&self, format: OutputFormat) -> String {
        self.table().render(format)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::scenario::parse_scenario;
    use crate::plausibility::VerdictLevel;

    fn report(text: &str) -> Report {
        run_report(&parse_scenario(text).unwrap()).unwrap()
    }

    fn value(r: &Report, quantity: &str) -> String {
        r.table()
            .rows
            .into_iter()
            .find(|row| row[1] == quantity)
            .unwrap_or_else(|| panic!("no row {quantity}"))[2]
            .clone()
    }

    #[test]
    fn medium_effect_rare_outcome() {
        let r = report("effect_scale = smd\neffect_value = 0.5\np0 = 0.01\npe = 0.5");
        assert_eq!(value(&r, "PAF (Pe=0.5)"), "0.42");
        assert_eq!(value(&r, "or"), "2.48");
        assert_eq!(r.label, MagnitudeLabel::Medium);
        assert_eq!(r.paf.as_ref().unwrap().len(), 3);
    }

    #[test]
    fn null_effect() {
        let r = report("effect_scale = smd\neffect_value = 0");
        assert_eq!(value(&r, "or"), "1.00");
        assert_eq!(r.verdict.level, VerdictLevel::Plausible);
        assert_eq!(
            value(&r, "n per group (SMD)"),
            "n/a (not computable for null effect)"
        );
        assert!(r.mde.is_err());
        assert_eq!(value(&r, "rr"), "n/a (requires p0)");

        let r = report("effect_scale = smd\neffect_value = 0\np0 = 0.2\npe = 0.3");
        for c in r.paf.as_ref().unwrap() {
            assert_eq!(c.paf, 0.0);
        }
    }

    #[test]
    fn compulsory_schooling_scale_effect() {
        let r = report("effect_scale = smd\neffect_value = 0.016\np0 = 0.2\npe = 0.5");
        assert_eq!(r.sample_size.as_ref().unwrap().n_per_group, 61_320);
        assert_eq!(value(&r, "PAF (Pe=0.5)"), "0.01");
        assert_eq!(r.label, MagnitudeLabel::VerySmall);
    }

    #[test]
    fn extreme_effect_warns() {
        let r = report("effect_scale = smd\neffect_value = 12");
        assert_eq!(r.warnings.len(), 2);
        assert!(r.warnings[0].contains("outside any empirical range"));
    }

    #[test]
    fn ratio_input_reports_all_scales() {
        let r = report("effect_scale = or\neffect_value = 0.7\np0 = 0.1\npe = 0.2");
        assert!(r.smd.value() < 0.0);
        assert!(r.scales.iter().all(|(_, v)| v.is_ok()));
        // PAF uses the magnitude of the effect.
        assert!(r.paf.as_ref().unwrap().iter().all(|c| c.paf > 0.0));
    }

    #[test]
    fn attenuation_and_rules() {
        let r = report(
            "effect_scale = smd\neffect_value = 0.5\nmechanism_effect_per_unit = 0.16\nmechanism_change = 0.1\nintensity = low\ntargeting = universal\nproximity = distal\nmechanism = indirect",
        );
        assert_eq!(value(&r, "attenuated SMD"), "0.016");
        assert_eq!(r.verdict.level, VerdictLevel::Questionable);
        assert_eq!(r.verdict.triggered_rules.len(), 3);
    }

    #[test]
    fn explicit_group_size_drives_mde() {
        let r = report("effect_scale = smd\neffect_value = 0.3\nn_per_group = 500");
        assert_eq!(value(&r, "MDE SMD (n=500)"), "0.1772");
    }

    #[test]
    fn chain_failure_is_tagged() {
        // RR at p0 = 0.2 with exposed risk exactly 1 has no odds ratio.
        let s = parse_scenario("effect_scale = rr\neffect_value = 5\np0 = 0.2").unwrap();
        let err = run_report(&s).unwrap_err();
        assert_eq!(err.stage, "measures");
        assert!(err.to_string().starts_with("measures stage"));
    }
}
