//! Effect-size scales and the conversions between them.
//!
//! Five scales are supported: the standardized mean difference (Cohen's d),
//! the correlation coefficient, the odds ratio, the relative risk and the risk
//! difference. The last two depend on the risk of the outcome in the
//! unexposed group, carried alongside the value as an [`OutcomeContext`].
//!
//! Conversions follow a single pivot chain `r <-> SMD <-> OR <-> RR <-> RD`:
//!
//! * `r = d / sqrt(d^2 + 4)` (dichotomized bivariate normal)
//! * `OR = exp(d * pi / sqrt(3))` (logistic outcome in each group)
//! * `RR = OR / (1 - P0 + P0 * OR)`
//! * `RD = P0 * RR - P0`
//!
//! Protective effects are negative on the additive scales and below one on the
//! ratio scales. Nothing is inverted implicitly; see
//! [`invert_for_comparability`] for the reporting convention.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

const SQRT_3: f64 = 1.732_050_807_568_877_2;

/// `pi / sqrt(3)`, the logistic-to-standard-deviation scale factor.
const LOGISTIC_SCALE: f64 = PI / SQRT_3;

/// Standardized mean difference.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Smd(f64);

impl Smd {
    pub fn new(d: f64) -> Result<Self> {
        if !d.is_finite() {
            return Err(Error::domain(format!(
                "standardized mean difference must be finite, got {d}"
            )));
        }
        Ok(Smd(d))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn magnitude(self) -> Smd {
        Smd(self.0.abs())
    }
}

/// Correlation coefficient, strictly inside (-1, 1).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Correlation(f64);

impl Correlation {
    pub fn new(r: f64) -> Result<Self> {
        if !(r > -1.0 && r < 1.0) {
            return Err(Error::domain(format!(
                "correlation must lie strictly between -1 and 1, got {r}"
            )));
        }
        Ok(Correlation(r))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct OddsRatio(f64);

impl OddsRatio {
    pub fn new(or: f64) -> Result<Self> {
        if !(or.is_finite() && or > 0.0) {
            return Err(Error::domain(format!(
                "odds ratio must be positive and finite, got {or}"
            )));
        }
        Ok(OddsRatio(or))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Risk of the outcome in the unexposed (or untreated) group.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct OutcomeContext(f64);

impl OutcomeContext {
    pub fn new(p0: f64) -> Result<Self> {
        if !(p0 > 0.0 && p0 < 1.0) {
            return Err(Error::domain(format!(
                "baseline risk p0 must lie strictly between 0 and 1, got {p0}"
            )));
        }
        Ok(OutcomeContext(p0))
    }

    pub fn p0(self) -> f64 {
        self.0
    }
}

/// Relative risk together with the baseline risk it is defined against.
///
/// Invariant: `rr * p0 <= 1`, i.e. the risk in the exposed group is a probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativeRisk {
    rr: f64,
    context: OutcomeContext,
}

impl RelativeRisk {
    pub fn new(rr: f64, context: OutcomeContext) -> Result<Self> {
        if !(rr.is_finite() && rr > 0.0) {
            return Err(Error::domain(format!(
                "relative risk must be positive and finite, got {rr}"
            )));
        }
        let exposed = rr * context.p0();
        if exposed > 1.0 {
            return Err(Error::domain(format!(
                "relative risk {rr} at p0 = {} implies exposed risk RR*p0 = {exposed} > 1",
                context.p0()
            )));
        }
        Ok(RelativeRisk { rr, context })
    }

    pub fn value(self) -> f64 {
        self.rr
    }

    pub fn context(self) -> OutcomeContext {
        self.context
    }

    /// Risk of the outcome in the exposed group, `RR * P0`.
    pub fn exposed_risk(self) -> f64 {
        self.rr * self.context.p0()
    }
}

/// Risk difference (exposed minus unexposed) with its baseline risk.
///
/// Invariant: `-p0 <= rd <= 1 - p0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskDifference {
    rd: f64,
    context: OutcomeContext,
}

impl RiskDifference {
    pub fn new(rd: f64, context: OutcomeContext) -> Result<Self> {
        let p0 = context.p0();
        if !rd.is_finite() || rd < -p0 || rd > 1.0 - p0 {
            return Err(Error::domain(format!(
                "risk difference {rd} at p0 = {p0} must lie in [{}, {}]",
                -p0,
                1.0 - p0
            )));
        }
        Ok(RiskDifference { rd, context })
    }

    pub fn value(self) -> f64 {
        self.rd
    }

    pub fn context(self) -> OutcomeContext {
        self.context
    }

    pub fn exposed_risk(self) -> f64 {
        self.context.p0() + self.rd
    }
}

/// The scale an [`EffectQuantity`] is expressed on.
///
/// Variants are ordered along the conversion chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scale {
    Correlation,
    Smd,
    OddsRatio,
    RelativeRisk,
    RiskDifference,
}

impl Scale {
    pub const ALL: [Scale; 5] = [
        Scale::Smd,
        Scale::Correlation,
        Scale::OddsRatio,
        Scale::RelativeRisk,
        Scale::RiskDifference,
    ];

    pub fn needs_context(self) -> bool {
        matches!(self, Scale::RelativeRisk | Scale::RiskDifference)
    }

    /// Short identifier used on the command line and in scenario files.
    pub fn key(self) -> &'static str {
        match self {
            Scale::Smd => "smd",
            Scale::Correlation => "r",
            Scale::OddsRatio => "or",
            Scale::RelativeRisk => "rr",
            Scale::RiskDifference => "rd",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scale::Smd => "standardized mean difference",
            Scale::Correlation => "correlation",
            Scale::OddsRatio => "odds ratio",
            Scale::RelativeRisk => "relative risk",
            Scale::RiskDifference => "risk difference",
        }
    }

    fn position(self) -> usize {
        match self {
            Scale::Correlation => 0,
            Scale::Smd => 1,
            Scale::OddsRatio => 2,
            Scale::RelativeRisk => 3,
            Scale::RiskDifference => 4,
        }
    }
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for Scale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "smd" | "d" => Ok(Scale::Smd),
            "r" | "correlation" => Ok(Scale::Correlation),
            "or" | "odds_ratio" => Ok(Scale::OddsRatio),
            "rr" | "relative_risk" => Ok(Scale::RelativeRisk),
            "rd" | "risk_difference" => Ok(Scale::RiskDifference),
            other => Err(Error::usage(format!(
                "unknown effect scale '{other}' (expected one of smd, r, or, rr, rd)"
            ))),
        }
    }
}

/// An effect on any one of the five scales.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EffectQuantity {
    Smd(Smd),
    Correlation(Correlation),
    OddsRatio(OddsRatio),
    RelativeRisk(RelativeRisk),
    RiskDifference(RiskDifference),
}

impl EffectQuantity {
    /// Builds a validated quantity from a raw value on `scale`.
    pub fn from_value(scale: Scale, value: f64, context: Option<OutcomeContext>) -> Result<Self> {
        let need = || {
            context.ok_or_else(|| {
                Error::Config(format!(
                    "a baseline risk p0 is required for the {} scale",
                    scale.name()
                ))
            })
        };
        Ok(match scale {
            Scale::Smd => EffectQuantity::Smd(Smd::new(value)?),
            Scale::Correlation => EffectQuantity::Correlation(Correlation::new(value)?),
            Scale::OddsRatio => EffectQuantity::OddsRatio(OddsRatio::new(value)?),
            Scale::RelativeRisk => EffectQuantity::RelativeRisk(RelativeRisk::new(value, need()?)?),
            Scale::RiskDifference => {
                EffectQuantity::RiskDifference(RiskDifference::new(value, need()?)?)
            }
        })
    }

    pub fn scale(&self) -> Scale {
        match self {
            EffectQuantity::Smd(_) => Scale::Smd,
            EffectQuantity::Correlation(_) => Scale::Correlation,
            EffectQuantity::OddsRatio(_) => Scale::OddsRatio,
            EffectQuantity::RelativeRisk(_) => Scale::RelativeRisk,
            EffectQuantity::RiskDifference(_) => Scale::RiskDifference,
        }
    }

    pub fn value(&self) -> f64 {
        match *self {
            EffectQuantity::Smd(v) => v.value(),
            EffectQuantity::Correlation(v) => v.value(),
            EffectQuantity::OddsRatio(v) => v.value(),
            EffectQuantity::RelativeRisk(v) => v.value(),
            EffectQuantity::RiskDifference(v) => v.value(),
        }
    }

    /// The baseline risk carried by RR and RD quantities.
    pub fn context(&self) -> Option<OutcomeContext> {
        match *self {
            EffectQuantity::RelativeRisk(v) => Some(v.context()),
            EffectQuantity::RiskDifference(v) => Some(v.context()),
            _ => None,
        }
    }
}

impl From<Smd> for EffectQuantity {
    fn from(v: Smd) -> Self {
        EffectQuantity::Smd(v)
    }
}

impl From<Correlation> for EffectQuantity {
    fn from(v: Correlation) -> Self {
        EffectQuantity::Correlation(v)
    }
}

impl From<OddsRatio> for EffectQuantity {
    fn from(v: OddsRatio) -> Self {
        EffectQuantity::OddsRatio(v)
    }
}

impl From<RelativeRisk> for EffectQuantity {
    fn from(v: RelativeRisk) -> Self {
        EffectQuantity::RelativeRisk(v)
    }
}

impl From<RiskDifference> for EffectQuantity {
    fn from(v: RiskDifference) -> Self {
        EffectQuantity::RiskDifference(v)
    }
}

/// Conventional verbal label for the size of a standardized mean difference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MagnitudeLabel {
    BelowVerySmall,
    VerySmall,
    Small,
    Medium,
    Large,
    VeryLarge,
    Huge,
}

impl MagnitudeLabel {
    /// Lower edge of each band on |d|; bands are closed on the left.
    pub const LOWER_BOUNDS: [(f64, MagnitudeLabel); 7] = [
        (0.0, MagnitudeLabel::BelowVerySmall),
        (0.01, MagnitudeLabel::VerySmall),
        (0.2, MagnitudeLabel::Small),
        (0.5, MagnitudeLabel::Medium),
        (0.8, MagnitudeLabel::Large),
        (1.2, MagnitudeLabel::VeryLarge),
        (2.0, MagnitudeLabel::Huge),
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MagnitudeLabel::BelowVerySmall => "Below very small",
            MagnitudeLabel::VerySmall => "Very small",
            MagnitudeLabel::Small => "Small",
            MagnitudeLabel::Medium => "Medium",
            MagnitudeLabel::Large => "Large",
            MagnitudeLabel::VeryLarge => "Very large",
            MagnitudeLabel::Huge => "Huge",
        }
    }

    /// The smallest |d| carrying this label.
    pub fn lower_bound(self) -> f64 {
        Self::LOWER_BOUNDS
            .iter()
            .find(|(_, l)| *l == self)
            .map(|(b, _)| *b)
            .expect("every label has a band")
    }
}

impl fmt::Display for MagnitudeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MagnitudeLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::LOWER_BOUNDS
            .iter()
            .map(|(_, l)| *l)
            .find(|l| l.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::usage(format!("unknown magnitude label '{s}'")))
    }
}

/// `(mean1 - mean2) / pooled_sd`.
pub fn compute_smd(mean1: f64, mean2: f64, pooled_sd: f64) -> Result<Smd> {
    if !mean1.is_finite() || !mean2.is_finite() {
        return Err(Error::domain("group means must be finite"));
    }
    if !(pooled_sd.is_finite() && pooled_sd > 0.0) {
        return Err(Error::domain(format!(
            "pooled standard deviation must be positive and finite, got {pooled_sd}"
        )));
    }
    Smd::new((mean1 - mean2) / pooled_sd)
}

/// Two-group pooled standard deviation with `(n - 1)` weights.
pub fn compute_pooled_sd(n1: u64, sd1: f64, n2: u64, sd2: f64) -> Result<f64> {
    if n1 < 2 || n2 < 2 {
        return Err(Error::domain(format!(
            "each group needs at least 2 observations, got {n1} and {n2}"
        )));
    }
    if !(sd1 >= 0.0 && sd2 >= 0.0) || !sd1.is_finite() || !sd2.is_finite() {
        return Err(Error::domain(
            "group standard deviations must be finite and non-negative",
        ));
    }
    if sd1 + sd2 <= 0.0 {
        return Err(Error::domain(
            "at least one group standard deviation must be positive",
        ));
    }
    let (w1, w2) = ((n1 - 1) as f64, (n2 - 1) as f64);
    Ok(((w1 * sd1 * sd1 + w2 * sd2 * sd2) / (w1 + w2)).sqrt())
}

pub fn smd_to_r(d: Smd) -> Correlation {
    let d = d.value();
    Correlation(d / (d * d + 4.0).sqrt())
}

pub fn r_to_smd(r: Correlation) -> Smd {
    let r = r.value();
    Smd(2.0 * r / (1.0 - r * r).sqrt())
}

pub fn smd_to_or(d: Smd) -> OddsRatio {
    OddsRatio((d.value() * LOGISTIC_SCALE).exp())
}

pub fn or_to_smd(or: OddsRatio) -> Smd {
    Smd(or.value().ln() / LOGISTIC_SCALE)
}

/// Zhang-Yu correction from odds ratio to relative risk at baseline risk `P0`.
pub fn or_to_rr(or: OddsRatio, context: OutcomeContext) -> RelativeRisk {
    let (or, p0) = (or.value(), context.p0());
    let rr = or / (1.0 - p0 + p0 * or);
    // rr * p0 = p0*or / (1 - p0 + p0*or) < 1 for any finite or
    RelativeRisk { rr, context }
}

pub fn rr_to_or(rr: RelativeRisk) -> Result<OddsRatio> {
    let p0 = rr.context.p0();
    let exposed = rr.exposed_risk();
    if exposed >= 1.0 {
        return Err(Error::domain(format!(
            "relative risk {} at p0 = {p0} puts the exposed risk at {exposed}; the odds ratio is undefined",
            rr.rr
        )));
    }
    OddsRatio::new(rr.rr * (1.0 - p0) / (1.0 - exposed))
}

pub fn rr_to_rd(rr: RelativeRisk) -> RiskDifference {
    let p0 = rr.context.p0();
    RiskDifference {
        rd: p0 * (rr.rr - 1.0),
        context: rr.context,
    }
}

pub fn rd_to_rr(rd: RiskDifference) -> RelativeRisk {
    RelativeRisk {
        rr: 1.0 + rd.rd / rd.context.p0(),
        context: rd.context,
    }
}

/// Replaces an OR or RR below one by its reciprocal so that protective and
/// harmful effects are reported on a common `>= 1` footing.
///
/// Values already at or above one are returned unchanged. The additive scales
/// are flipped by negation instead and are rejected here.
pub fn invert_for_comparability(q: EffectQuantity) -> Result<EffectQuantity> {
    match q {
        EffectQuantity::OddsRatio(or) if or.value() < 1.0 => {
            Ok(EffectQuantity::OddsRatio(OddsRatio::new(1.0 / or.value())?))
        }
        EffectQuantity::RelativeRisk(rr) if rr.value() < 1.0 => {
            // The inverted ratio may not be a valid RR at the same p0 (1/RR * p0 > 1).
            Ok(EffectQuantity::RelativeRisk(RelativeRisk::new(
                1.0 / rr.value(),
                rr.context(),
            )?))
        }
        EffectQuantity::OddsRatio(_) | EffectQuantity::RelativeRisk(_) => Ok(q),
        other => Err(Error::usage(format!(
            "only ratio measures are inverted; a {} flips direction by negation",
            other.scale().name()
        ))),
    }
}

/// One step along the chain, towards `target`.
fn step(
    q: EffectQuantity,
    target: Scale,
    context: Option<OutcomeContext>,
) -> Result<EffectQuantity> {
    let missing = |link| Error::Config("a baseline risk p0 is required".into()).in_link(link);
    let up = target.position() > q.scale().position();
    Ok(match (q, up) {
        (EffectQuantity::Correlation(r), true) => r_to_smd(r).into(),
        (EffectQuantity::Smd(d), true) => smd_to_or(d).into(),
        (EffectQuantity::Smd(d), false) => smd_to_r(d).into(),
        (EffectQuantity::OddsRatio(or), true) => {
            or_to_rr(or, context.ok_or_else(|| missing("or->rr"))?).into()
        }
        (EffectQuantity::OddsRatio(or), false) => or_to_smd(or).into(),
        (EffectQuantity::RelativeRisk(rr), true) => rr_to_rd(rr).into(),
        (EffectQuantity::RelativeRisk(rr), false) => {
            rr_to_or(rr).map_err(|e| e.in_link("rr->or"))?.into()
        }
        (EffectQuantity::RiskDifference(rd), false) => rd_to_rr(rd).into(),
        (EffectQuantity::Correlation(_), false) | (EffectQuantity::RiskDifference(_), true) => {
            unreachable!("chain ends are never stepped outward")
        }
    })
}

/// Converts `q` to `target` by composing the pairwise conversions along
/// `r <-> SMD <-> OR <-> RR <-> RD`.
///
/// A baseline risk carried by `q` takes precedence over `context`.
pub fn convert(
    q: EffectQuantity,
    target: Scale,
    context: Option<OutcomeContext>,
) -> Result<EffectQuantity> {
    let context = q.context().or(context);
    if (q.scale().needs_context() || target.needs_context()) && context.is_none() {
        return Err(Error::Config(format!(
            "converting {} to {} requires a baseline risk p0",
            q.scale().name(),
            target.name()
        )));
    }
    let mut current = q;
    while current.scale() != target {
        current = step(current, target, context)?;
    }
    Ok(current)
}

/// Label for `|d|` using the bands in [`MagnitudeLabel::LOWER_BOUNDS`].
pub fn classify_magnitude(d: Smd) -> MagnitudeLabel {
    let m = d.value().abs();
    MagnitudeLabel::LOWER_BOUNDS
        .iter()
        .rev()
        .find(|(lo, _)| m >= *lo)
        .map(|(_, l)| *l)
        .unwrap_or(MagnitudeLabel::BelowVerySmall)
}

/// Baseline risks tabulated in the correspondence grid.
pub const GRID_RARE_P0: f64 = 0.01;
pub const GRID_COMMON_P0: f64 = 0.20;

/// Standardized mean differences tabulated in the correspondence grid.
pub const GRID_SMDS: [f64; 23] = [
    0.01, 0.02, 0.05, 0.10, 0.15, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.1, 1.2, 1.3, 1.4,
    1.5, 1.75, 2.0, 2.25, 2.5,
];

/// One row of the effect-size correspondence grid, at full precision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrespondenceRow {
    pub d: f64,
    pub r: f64,
    pub or: f64,
    pub rr_rare: f64,
    pub rr_common: f64,
    pub rd_rare: f64,
    pub rd_common: f64,
    pub label: MagnitudeLabel,
}

impl CorrespondenceRow {
    pub fn compute(d: Smd) -> Self {
        let rare = OutcomeContext(GRID_RARE_P0);
        let common = OutcomeContext(GRID_COMMON_P0);
        let or = smd_to_or(d);
        let rr_rare = or_to_rr(or, rare);
        let rr_common = or_to_rr(or, common);
        CorrespondenceRow {
            d: d.value(),
            r: smd_to_r(d).value(),
            or: or.value(),
            rr_rare: rr_rare.value(),
            rr_common: rr_common.value(),
            rd_rare: rr_to_rd(rr_rare).value(),
            rd_common: rr_to_rd(rr_common).value(),
            label: classify_magnitude(d),
        }
    }

    /// The seven derived cells at display precision: r, OR and RR to two
    /// decimals, RD to three.
    pub fn displayed(&self) -> [String; 7] {
        use crate::display::fixed;
        [
            fixed(self.d, 2),
            fixed(self.r, 2),
            fixed(self.or, 2),
            fixed(self.rr_rare, 2),
            fixed(self.rr_common, 2),
            fixed(self.rd_rare, 3),
            fixed(self.rd_common, 3),
        ]
    }

    /// Whether this row opens a magnitude band (the only rows that show a label).
    pub fn starts_band(&self) -> bool {
        self.d == self.label.lower_bound()
    }
}

pub fn correspondence_grid() -> Vec<CorrespondenceRow> {
    GRID_SMDS
        .iter()
        .map(|&d| CorrespondenceRow::compute(Smd(d)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn ctx(p0: f64) -> OutcomeContext {
        OutcomeContext::new(p0).unwrap()
    }

    fn smd(d: f64) -> Smd {
        Smd::new(d).unwrap()
    }

    /// Exposed risk implied by an odds ratio, from the 2x2 odds directly.
    fn exposed_from_odds(or: f64, p0: f64) -> f64 {
        let odds = or * p0 / (1.0 - p0);
        odds / (1.0 + odds)
    }

    #[test]
    fn compute_smd_examples() {
        assert_eq!(compute_smd(1.0, 0.0, 2.0).unwrap().value(), 0.5);
        assert_eq!(compute_smd(3.0, 3.0, 1.7).unwrap().value(), 0.0);
        assert!(close(
            compute_smd(12.4, 10.1, 4.6).unwrap().value(),
            0.5,
            1e-12
        ));
    }

    #[test]
    fn compute_smd_rejects_bad_sd() {
        for sd in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(matches!(compute_smd(1.0, 0.0, sd), Err(Error::Domain(_))));
        }
        assert!(compute_smd(f64::NAN, 0.0, 1.0).is_err());
    }

    #[test]
    fn pooled_sd_examples() {
        assert!(close(
            compute_pooled_sd(10, 2.0, 10, 2.0).unwrap(),
            2.0,
            1e-12
        ));
        assert!(close(
            compute_pooled_sd(2, 0.0, 2, 2.0).unwrap(),
            2f64.sqrt(),
            1e-12
        ));
        assert!(close(
            compute_pooled_sd(5, 1.0, 15, 3.0).unwrap(),
            (130.0f64 / 18.0).sqrt(),
            1e-12
        ));
    }

    #[test]
    fn pooled_sd_matches_pooling_of_synthetic_samples() {
        // Samples with known SDs: symmetric points around zero.
        fn sample(n: usize, sd: f64) -> Vec<f64> {
            let raw: Vec<f64> = (0..n).map(|i| i as f64 - (n as f64 - 1.0) / 2.0).collect();
            let ss: f64 = raw.iter().map(|x| x * x).sum();
            let scale = sd / (ss / (n as f64 - 1.0)).sqrt();
            raw.into_iter().map(|x| x * scale).collect()
        }
        let a = sample(5, 1.0);
        let b: Vec<f64> = sample(15, 3.0).into_iter().map(|x| x + 7.0).collect();
        let ma = a.iter().sum::<f64>() / 5.0;
        let mb = b.iter().sum::<f64>() / 15.0;
        let ss: f64 = a.iter().map(|x| (x - ma).powi(2)).sum::<f64>()
            + b.iter().map(|x| (x - mb).powi(2)).sum::<f64>();
        let brute = (ss / 18.0).sqrt();
        assert!(close(
            compute_pooled_sd(5, 1.0, 15, 3.0).unwrap(),
            brute,
            1e-12
        ));
        assert!(close(brute, 2.6874, 1e-4));
    }

    #[test]
    fn pooled_sd_errors() {
        assert!(compute_pooled_sd(1, 1.0, 5, 1.0).is_err());
        assert!(compute_pooled_sd(5, 0.0, 5, 0.0).is_err());
        assert!(compute_pooled_sd(5, -1.0, 5, 2.0).is_err());
    }

    #[test]
    fn smd_and_correlation() {
        assert!(close(
            smd_to_r(smd(0.5)).value(),
            0.242_535_625_036_333,
            1e-12
        ));
        assert_eq!(smd_to_r(smd(0.0)).value(), 0.0);
        assert!(close(
            smd_to_r(smd(1.0)).value(),
            0.447_213_595_499_958,
            1e-12
        ));
        assert_eq!(crate::display::fixed(smd_to_r(smd(0.5)).value(), 2), "0.24");
        assert_eq!(crate::display::fixed(smd_to_r(smd(1.0)).value(), 2), "0.45");

        assert_eq!(r_to_smd(Correlation::new(0.0).unwrap()).value(), 0.0);
        assert!(close(
            r_to_smd(Correlation::new(0.242_535_625_036_333).unwrap()).value(),
            0.5,
            1e-12
        ));
        assert!(close(
            r_to_smd(Correlation::new(0.447_213_595_499_958).unwrap()).value(),
            1.0,
            1e-12
        ));
        assert!(Correlation::new(1.0).is_err());
        assert!(Correlation::new(-1.0).is_err());
    }

    #[test]
    fn smd_and_odds_ratio() {
        assert!(close(
            smd_to_or(smd(0.2)).value(),
            1.437_290_685_279_533,
            1e-12
        ));
        assert_eq!(
            crate::display::fixed(smd_to_or(smd(0.2)).value(), 2),
            "1.44"
        );
        assert_eq!(smd_to_or(smd(0.0)).value(), 1.0);
        assert_eq!(
            crate::display::fixed(smd_to_or(smd(2.5)).value(), 2),
            "93.18"
        );

        let or = |x| OddsRatio::new(x).unwrap();
        assert_eq!(or_to_smd(or(1.0)).value(), 0.0);
        assert!(close(or_to_smd(smd_to_or(smd(0.5))).value(), 0.5, 1e-12));
        // -sqrt(3) * ln(1/0.7) / pi
        let expected = -SQRT_3 * (1.0f64 / 0.7).ln() / PI;
        assert!(close(or_to_smd(or(0.70)).value(), expected, 1e-15));
        assert!(close(expected, -0.1966, 1e-4));
        assert!(OddsRatio::new(0.0).is_err());
        assert!(OddsRatio::new(-2.0).is_err());
    }

    #[test]
    fn odds_ratio_and_relative_risk() {
        let rr = or_to_rr(smd_to_or(smd(0.5)), ctx(0.20));
        assert_eq!(crate::display::fixed(rr.value(), 2), "1.91");
        assert_eq!(
            or_to_rr(OddsRatio::new(1.0).unwrap(), ctx(0.37)).value(),
            1.0
        );

        // 2x2 construction: odds(p1) / odds(0.5) = 4 gives p1 = 0.8.
        let p1 = exposed_from_odds(4.0, 0.5);
        assert!(close(p1, 0.8, 1e-15));
        let rr = or_to_rr(OddsRatio::new(4.0).unwrap(), ctx(0.5));
        assert!(close(rr.value(), p1 / 0.5, 1e-12));

        let back = rr_to_or(RelativeRisk::new(1.6, ctx(0.5)).unwrap()).unwrap();
        assert!(close(back.value(), 4.0, 1e-12));
        assert_eq!(
            rr_to_or(RelativeRisk::new(1.0, ctx(0.2)).unwrap())
                .unwrap()
                .value(),
            1.0
        );
        let table = or_to_rr(smd_to_or(smd(0.5)), ctx(0.2));
        assert!(close(
            rr_to_or(table).unwrap().value(),
            smd_to_or(smd(0.5)).value(),
            1e-12
        ));
    }

    #[test]
    fn rr_to_or_rejects_certain_exposure() {
        let rr = RelativeRisk::new(5.0, ctx(0.2)).unwrap();
        assert!(matches!(rr_to_or(rr), Err(Error::Domain(_))));
        assert!(RelativeRisk::new(6.0, ctx(0.2)).is_err());
    }

    #[test]
    fn relative_risk_and_risk_difference() {
        let rd = rr_to_rd(or_to_rr(smd_to_or(smd(0.5)), ctx(0.2)));
        assert_eq!(crate::display::fixed(rd.value(), 3), "0.182");
        assert_eq!(
            rr_to_rd(RelativeRisk::new(1.0, ctx(0.3)).unwrap()).value(),
            0.0
        );
        let rd1 = rr_to_rd(or_to_rr(smd_to_or(smd(1.0)), ctx(0.2)));
        assert_eq!(crate::display::fixed(rd1.value(), 3), "0.405");

        assert_eq!(
            rd_to_rr(RiskDifference::new(0.0, ctx(0.2)).unwrap()).value(),
            1.0
        );
        assert!(close(
            rd_to_rr(RiskDifference::new(-0.05, ctx(0.1)).unwrap()).value(),
            0.5,
            1e-15
        ));
        let rr = or_to_rr(smd_to_or(smd(0.5)), ctx(0.2));
        assert!(close(rd_to_rr(rr_to_rd(rr)).value(), rr.value(), 1e-12));
        assert!(RiskDifference::new(0.9, ctx(0.2)).is_err());
        assert!(RiskDifference::new(-0.3, ctx(0.2)).is_err());
    }

    #[test]
    fn inversion() {
        let q = invert_for_comparability(OddsRatio::new(0.70).unwrap().into()).unwrap();
        assert!(close(q.value(), 1.0 / 0.70, 1e-15));
        assert_eq!(crate::display::fixed(q.value(), 2), "1.43");
        let one = invert_for_comparability(OddsRatio::new(1.0).unwrap().into()).unwrap();
        assert_eq!(one.value(), 1.0);
        let rr =
            invert_for_comparability(RelativeRisk::new(0.25, ctx(0.1)).unwrap().into()).unwrap();
        assert_eq!(rr.value(), 4.0);
        let big = OddsRatio::new(3.0).unwrap().into();
        assert_eq!(invert_for_comparability(big).unwrap(), big);
        assert!(matches!(
            invert_for_comparability(smd(0.3).into()),
            Err(Error::Usage(_))
        ));
        // 1/0.25 = 4 at p0 = 0.5 is not a valid relative risk.
        assert!(
            invert_for_comparability(RelativeRisk::new(0.25, ctx(0.5)).unwrap().into()).is_err()
        );
    }

    #[test]
    fn convert_examples() {
        let q = convert(smd(0.5).into(), Scale::RiskDifference, Some(ctx(0.01))).unwrap();
        assert_eq!(crate::display::fixed(q.value(), 3), "0.014");

        for target in Scale::ALL {
            let q = convert(smd(0.0).into(), target, Some(ctx(0.3))).unwrap();
            let null = if matches!(target, Scale::OddsRatio | Scale::RelativeRisk) {
                1.0
            } else {
                0.0
            };
            assert_eq!(q.value(), null, "{target}");
            assert_eq!(q.scale(), target);
        }

        let rd_full = CorrespondenceRow::compute(smd(0.2)).rd_common;
        let rd = RiskDifference::new(rd_full, ctx(0.2)).unwrap();
        let back = convert(rd.into(), Scale::Smd, None).unwrap();
        assert!(close(back.value(), 0.2, 1e-12));
        let rounded = RiskDifference::new(0.064, ctx(0.2)).unwrap();
        let back = convert(rounded.into(), Scale::Smd, None).unwrap();
        assert_eq!(crate::display::fixed(back.value(), 1), "0.2");
    }

    #[test]
    fn convert_requires_context() {
        assert!(matches!(
            convert(smd(0.5).into(), Scale::RelativeRisk, None),
            Err(Error::Config(_))
        ));
        assert!(convert(smd(0.5).into(), Scale::OddsRatio, None).is_ok());
    }

    #[test]
    fn convert_names_failing_link() {
        let rr = RelativeRisk::new(5.0, ctx(0.2)).unwrap();
        match convert(rr.into(), Scale::Smd, None) {
            Err(Error::Chain { link, .. }) => assert_eq!(link, "rr->or"),
            other => panic!("expected chain error, got {other:?}"),
        }
    }

    #[test]
    fn magnitude_bands() {
        assert_eq!(classify_magnitude(smd(0.5)), MagnitudeLabel::Medium);
        assert_eq!(classify_magnitude(smd(2.0)), MagnitudeLabel::Huge);
        assert_eq!(
            classify_magnitude(smd(0.005)),
            MagnitudeLabel::BelowVerySmall
        );
        assert_eq!(classify_magnitude(smd(0.01)), MagnitudeLabel::VerySmall);
        assert_eq!(
            classify_magnitude(smd(0.199_999)),
            MagnitudeLabel::VerySmall
        );
        assert_eq!(classify_magnitude(smd(-0.8)), MagnitudeLabel::Large);
        assert_eq!(classify_magnitude(smd(1.2)), MagnitudeLabel::VeryLarge);
        assert_eq!(classify_magnitude(smd(40.0)), MagnitudeLabel::Huge);
    }

    #[test]
    fn grid_rows() {
        let grid = correspondence_grid();
        assert_eq!(grid.len(), 23);
        let row = grid.iter().find(|r| r.d == 0.15).unwrap();
        assert_eq!(
            row.displayed()[1..],
            ["0.07", "1.31", "1.31", "1.24", "0.003", "0.047"]
        );
        let row = grid.iter().find(|r| r.d == 1.5).unwrap();
        assert_eq!(row.displayed()[2..5], ["15.19", "13.30", "3.96"]);
        assert_eq!(row.displayed()[6], "0.592");
        assert_eq!(grid[0].displayed()[5], "0.000");
        let starts: Vec<f64> = grid
            .iter()
            .filter(|r| r.starts_band())
            .map(|r| r.d)
            .collect();
        assert_eq!(starts, [0.01, 0.2, 0.5, 0.8, 1.2, 2.0]);
    }

    #[test]
    fn scale_parsing() {
        for s in Scale::ALL {
            assert_eq!(s.key().parse::<Scale>().unwrap(), s);
        }
        assert!("hazard".parse::<Scale>().is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2000))]

        #[test]
        // Relative gap is about p0 * (OR - 1), so stay within the tabulated range.
        fn limit_as_baseline_risk_vanishes(d in -2.5f64..2.5) {
            let or = smd_to_or(smd(d));
            let rr = or_to_rr(or, ctx(1e-8));
            prop_assert!(((rr.value() - or.value()) / or.value()).abs() < 1e-6);
        }

        #[test]
        fn two_by_two_oracle(i in 1u32..99, j in 1u32..99) {
            let (p0, p1) = (i as f64 / 100.0, j as f64 / 100.0);
            let or_cells = (p1 / (1.0 - p1)) / (p0 / (1.0 - p0));
            let rr_cells = p1 / p0;
            let rr = or_to_rr(OddsRatio::new(or_cells).unwrap(), ctx(p0));
            prop_assert!(((rr.value() - rr_cells) / rr_cells).abs() < 1e-12);
            let or = rr_to_or(RelativeRisk::new(rr_cells, ctx(p0)).unwrap()).unwrap();
            prop_assert!(((or.value() - or_cells) / or_cells).abs() < 1e-12);
        }
    }
}
