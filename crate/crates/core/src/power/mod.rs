//! Power, sample size and minimum detectable effect for two-group designs.
//!
//! Everything here uses the two-sided normal (z) approximation, so analytic
//! answers and the Monte Carlo engine in [`simulate`] test the same statistic.
//! Sample sizes are floored at [`MIN_GROUP_SIZE`] per group; results that hit
//! the floor carry `floored = true`.

mod normal;
pub mod simulate;

pub use normal::{normal_cdf, normal_quantile};
pub use simulate::{simulate_power_smd, simulate_power_two_proportions, SimConfig};

use crate::measures::{RelativeRisk, RiskDifference, Smd};
use crate::{Error, Result};

/// Smallest per-group size reported by the sample-size calculators.
pub const MIN_GROUP_SIZE: u64 = 4;

/// Significance level, target power and allocation ratio (second group size
/// over first group size).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSpec {
    alpha: f64,
    target_power: f64,
    allocation: f64,
}

impl Default for PowerSpec {
    fn default() -> Self {
        PowerSpec {
            alpha: 0.05,
            target_power: 0.80,
            allocation: 1.0,
        }
    }
}

impl PowerSpec {
    pub fn new(alpha: f64, target_power: f64, allocation: f64) -> Result<Self> {
        validate_alpha(alpha)?;
        if !(target_power > 0.0 && target_power < 1.0) {
            return Err(Error::domain(format!(
                "target power must lie strictly between 0 and 1, got {target_power}"
            )));
        }
        if target_power <= alpha {
            return Err(Error::domain(format!(
                "target power {target_power} must exceed the significance level {alpha}"
            )));
        }
        if !(allocation.is_finite() && allocation > 0.0) {
            return Err(Error::domain(format!(
                "allocation ratio must be positive, got {allocation}"
            )));
        }
        Ok(PowerSpec {
            alpha,
            target_power,
            allocation,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn target_power(&self) -> f64 {
        self.target_power
    }

    pub fn allocation(&self) -> f64 {
        self.allocation
    }

    fn z_alpha(&self) -> f64 {
        critical_value(self.alpha)
    }

    fn z_power(&self) -> f64 {
        normal::quantile_unchecked(self.target_power)
    }
}

fn validate_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!(
            "alpha must lie strictly between 0 and 1, got {alpha}"
        )));
    }
    Ok(())
}

/// Two-sided critical value `z_{1 - alpha/2}`.
pub(crate) fn critical_value(alpha: f64) -> f64 {
    normal::quantile_unchecked(1.0 - alpha / 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleSizeResult {
    pub n_per_group: u64,
    /// Size of the second group, `ceil(allocation * n_per_group)`.
    pub n_second_group: u64,
    pub n_total: u64,
    pub achieved_power: f64,
    /// Unrounded closed-form requirement for the first group.
    pub formula_n: f64,
    /// True when the closed-form answer fell below [`MIN_GROUP_SIZE`].
    pub floored: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MdeResult {
    pub d_min: f64,
    pub n_per_group: u64,
}

/// Smallest `n >= 2` with `power(n) >= target`, starting near `guess`.
fn smallest_n(guess: f64, target: f64, power: impl Fn(u64) -> f64) -> u64 {
    let mut n = if guess.is_finite() && guess > 2.0 {
        guess.ceil().min(u64::MAX as f64 / 4.0) as u64
    } else {
        2
    };
    while power(n) < target {
        n += 1;
    }
    while n > 2 && power(n - 1) >= target {
        n -= 1;
    }
    n
}

fn finish(n: u64, formula_n: f64, allocation: f64, power: impl Fn(u64) -> f64) -> SampleSizeResult {
    let floored = n < MIN_GROUP_SIZE;
    let n = n.max(MIN_GROUP_SIZE);
    let second = (allocation * n as f64).ceil() as u64;
    SampleSizeResult {
        n_per_group: n,
        n_second_group: second,
        n_total: n + second,
        achieved_power: power(n),
        formula_n,
        floored,
    }
}

/// Power of the two-sided z-test for a standardized difference `d` with group
/// sizes `n1` and `allocation * n1`.
fn power_smd_allocated(d: f64, n1: f64, allocation: f64, alpha: f64) -> f64 {
    let z = critical_value(alpha);
    let shift = d.abs() / (1.0 / n1 + 1.0 / (allocation * n1)).sqrt();
    normal_cdf(shift - z) + normal_cdf(-shift - z)
}

/// `Phi(|d| sqrt(n/2) - z) + Phi(-|d| sqrt(n/2) - z)` for equal groups of `n`.
pub fn achieved_power_smd(d: Smd, n_per_group: u64, alpha: f64) -> Result<f64> {
    validate_alpha(alpha)?;
    if n_per_group < 2 {
        return Err(Error::domain(format!(
            "each group needs at least 2 subjects, got {n_per_group}"
        )));
    }
    Ok(power_smd_allocated(
        d.value(),
        n_per_group as f64,
        1.0,
        alpha,
    ))
}

pub fn required_n_smd(d: Smd, spec: &PowerSpec) -> Result<SampleSizeResult> {
    if d.value() == 0.0 {
        return Err(Error::domain("no finite sample size detects a null effect"));
    }
    let k = spec.allocation;
    let zsum = spec.z_alpha() + spec.z_power();
    let formula_n = (1.0 + 1.0 / k) * (zsum / d.value()).powi(2);
    let power = |n: u64| power_smd_allocated(d.value(), n as f64, k, spec.alpha);
    let n = smallest_n(formula_n, spec.target_power, power);
    Ok(finish(n, formula_n, k, power))
}

/// Smallest |d| detected with the target power at `n_per_group` (and
/// `allocation * n_per_group` in the second group).
///
/// Starts from `(z_{1-a/2} + z_power) sqrt(1/n1 + 1/n2)` and solves the
/// two-sided power equation exactly by bisection.
pub fn mde_smd(n_per_group: u64, spec: &PowerSpec) -> Result<MdeResult> {
    if n_per_group < 2 {
        return Err(Error::domain(format!(
            "each group needs at least 2 subjects, got {n_per_group}"
        )));
    }
    let n = n_per_group as f64;
    let k = spec.allocation;
    let scale = (1.0 / n + 1.0 / (k * n)).sqrt();
    let guess = (spec.z_alpha() + spec.z_power()) * scale;
    let power = |d: f64| power_smd_allocated(d, n, k, spec.alpha);

    // The lower tail only adds power, so the root lies at or below the guess.
    let (mut lo, mut hi) = (0.0, guess);
    while power(hi) < spec.target_power {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if power(mid) < spec.target_power {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    Ok(MdeResult {
        d_min: hi,
        n_per_group,
    })
}

/// A binary-outcome effect, relative or absolute, with its baseline risk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RiskContrast {
    Relative(RelativeRisk),
    Difference(RiskDifference),
}

impl RiskContrast {
    pub fn baseline_risk(&self) -> f64 {
        match self {
            RiskContrast::Relative(rr) => rr.context().p0(),
            RiskContrast::Difference(rd) => rd.context().p0(),
        }
    }

    pub fn exposed_risk(&self) -> f64 {
        match self {
            RiskContrast::Relative(rr) => rr.exposed_risk(),
            RiskContrast::Difference(rd) => rd.exposed_risk(),
        }
    }

    /// `(p0, p1)`, checked to be a usable pair of distinct open-interval risks.
    pub(crate) fn risks(&self) -> Result<(f64, f64)> {
        let (p0, p1) = (self.baseline_risk(), self.exposed_risk());
        if !(p1 > 0.0 && p1 < 1.0) {
            return Err(Error::domain(format!(
                "exposed risk {p1} lies on the boundary; the two-proportion test is degenerate"
            )));
        }
        if p1 == p0 {
            return Err(Error::domain("exposed and unexposed risks are equal; no finite sample size detects a null effect"));
        }
        Ok((p0, p1))
    }
}

impl From<RelativeRisk> for RiskContrast {
    fn from(v: RelativeRisk) -> Self {
        RiskContrast::Relative(v)
    }
}

impl From<RiskDifference> for RiskContrast {
    fn from(v: RiskDifference) -> Self {
        RiskContrast::Difference(v)
    }
}

/// Standard deviations under the null and alternative for an exposed group of
/// `n1` against an unexposed group of `k * n1` (both scaled by `sqrt(n1)`),
/// and the absolute risk difference.
fn two_proportion_terms(p0: f64, p1: f64, k: f64) -> (f64, f64, f64) {
    let pbar = (p1 + k * p0) / (1.0 + k);
    let null_sd = (pbar * (1.0 - pbar) * (1.0 + 1.0 / k)).sqrt();
    let alt_sd = (p1 * (1.0 - p1) + p0 * (1.0 - p0) / k).sqrt();
    (null_sd, alt_sd, (p1 - p0).abs())
}

/// `Phi((|p1 - p0| sqrt(n) - z sqrt(2 pbar (1 - pbar))) / sqrt(p1 q1 + p0 q0))`,
/// the power function the sample-size formula inverts.
pub fn achieved_power_two_proportions(
    effect: RiskContrast,
    n_per_group: u64,
    alpha: f64,
) -> Result<f64> {
    validate_alpha(alpha)?;
    if n_per_group < 2 {
        return Err(Error::domain(format!(
            "each group needs at least 2 subjects, got {n_per_group}"
        )));
    }
    let (p0, p1) = effect.risks()?;
    Ok(power_two_proportions(
        p0,
        p1,
        n_per_group as f64,
        1.0,
        alpha,
    ))
}

fn power_two_proportions(p0: f64, p1: f64, n1: f64, k: f64, alpha: f64) -> f64 {
    let z = critical_value(alpha);
    let (null_sd, alt_sd, delta) = two_proportion_terms(p0, p1, k);
    normal_cdf((delta * n1.sqrt() - z * null_sd) / alt_sd)
}

pub fn required_n_two_proportions(
    effect: RiskContrast,
    spec: &PowerSpec,
) -> Result<SampleSizeResult> {
    let (p0, p1) = effect.risks()?;
    let k = spec.allocation;
    let (za, zb) = (spec.z_alpha(), spec.z_power());
    let (null_sd, alt_sd, delta) = two_proportion_terms(p0, p1, k);
    let formula_n = ((za * null_sd + zb * alt_sd) / delta).powi(2);
    let power = |n: u64| power_two_proportions(p0, p1, n as f64, k, spec.alpha);
    let n = smallest_n(formula_n, spec.target_power, power);
    Ok(finish(n, formula_n, k, power))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{or_to_rr, rr_to_rd, smd_to_or, OutcomeContext};

    fn smd(d: f64) -> Smd {
        Smd::new(d).unwrap()
    }

    fn ctx(p0: f64) -> OutcomeContext {
        OutcomeContext::new(p0).unwrap()
    }

    #[test]
    fn spec_validation() {
        assert!(PowerSpec::new(0.0, 0.8, 1.0).is_err());
        assert!(PowerSpec::new(0.05, 1.0, 1.0).is_err());
        assert!(PowerSpec::new(0.05, 0.8, 0.0).is_err());
        assert!(PowerSpec::new(0.5, 0.4, 1.0).is_err());
        assert_eq!(
            PowerSpec::new(0.05, 0.8, 1.0).unwrap(),
            PowerSpec::default()
        );
    }

    #[test]
    fn required_n_examples() {
        let spec = PowerSpec::default();
        let r = required_n_smd(smd(0.2), &spec).unwrap();
        assert_eq!(r.n_per_group, 393);
        assert_eq!(r.n_total, 786);
        assert!(r.achieved_power >= 0.80);
        assert!(achieved_power_smd(smd(0.2), 394, 0.05).unwrap() >= 0.80);

        let r = required_n_smd(smd(2.0), &spec).unwrap();
        assert_eq!(r.n_per_group, MIN_GROUP_SIZE);
        assert!((r.formula_n - 3.924_439_867).abs() < 1e-8);
        assert!(!r.floored);

        let r = required_n_smd(smd(0.016), &spec).unwrap();
        assert_eq!(r.n_per_group, 61_320);

        let r = required_n_smd(smd(-0.5), &spec).unwrap();
        assert_eq!(r.n_per_group, 63);
    }

    #[test]
    fn tiny_requirements_are_floored() {
        let r = required_n_smd(smd(3.0), &PowerSpec::default()).unwrap();
        assert!(r.floored);
        assert_eq!(r.n_per_group, MIN_GROUP_SIZE);
        assert!(r.achieved_power > 0.8);
    }

    #[test]
    fn null_effect_has_no_sample_size() {
        assert!(matches!(
            required_n_smd(smd(0.0), &PowerSpec::default()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn ceiling_consistency() {
        let spec = PowerSpec::default();
        for d in [0.05, 0.1, 0.2, 0.35, 0.5, 0.8, 1.0] {
            let r = required_n_smd(smd(d), &spec).unwrap();
            let n = r.n_per_group;
            assert!(achieved_power_smd(smd(d), n, 0.05).unwrap() >= 0.8);
            assert!(achieved_power_smd(smd(d), n - 1, 0.05).unwrap() < 0.8);
        }
    }

    #[test]
    fn achieved_power_examples() {
        assert!((achieved_power_smd(smd(0.0), 57, 0.05).unwrap() - 0.05).abs() < 1e-12);
        assert!((achieved_power_smd(smd(0.5), 64, 0.05).unwrap() - 0.80).abs() < 0.01);
        assert!(achieved_power_smd(smd(0.5), 1, 0.05).is_err());
    }

    #[test]
    fn power_is_increasing() {
        let mut last = 0.0;
        for n in 2..400 {
            let p = achieved_power_smd(smd(0.3), n, 0.05).unwrap();
            assert!(p > last);
            last = p;
        }
        let mut last = 0.0;
        for i in 1..200 {
            let p = achieved_power_smd(smd(i as f64 * 0.01), 50, 0.05).unwrap();
            assert!(p > last);
            last = p;
        }
    }

    #[test]
    fn required_n_nonincreasing_in_effect() {
        let spec = PowerSpec::default();
        let mut last = u64::MAX;
        for i in 1..300 {
            let n = required_n_smd(smd(i as f64 * 0.01), &spec)
                .unwrap()
                .n_per_group;
            assert!(n <= last);
            last = n;
        }
    }

    #[test]
    fn mde_examples() {
        let spec = PowerSpec::default();
        let m = mde_smd(500, &spec).unwrap();
        assert!((m.d_min - 0.1772).abs() < 5e-5);
        let m = mde_smd(2, &spec).unwrap();
        assert!((m.d_min - 2.8016).abs() < 5e-5);
        let n = required_n_smd(smd(0.3), &spec).unwrap().n_per_group;
        assert!(mde_smd(n, &spec).unwrap().d_min <= 0.3);
        assert!(mde_smd(1, &spec).is_err());
    }

    #[test]
    fn mde_hits_target_power() {
        for (alpha, power) in [(0.05, 0.8), (0.05, 0.5), (0.01, 0.9), (0.2, 0.3)] {
            let spec = PowerSpec::new(alpha, power, 1.0).unwrap();
            for n in [2, 5, 40, 500, 10_000] {
                let d = mde_smd(n, &spec).unwrap().d_min;
                let got = achieved_power_smd(smd(d), n, alpha).unwrap();
                assert!(
                    (got - power).abs() < 1e-6,
                    "alpha {alpha} power {power} n {n}"
                );
            }
        }
    }

    #[test]
    fn unequal_allocation() {
        let spec = PowerSpec::new(0.05, 0.8, 2.0).unwrap();
        let r = required_n_smd(smd(0.5), &spec).unwrap();
        // (1 + 1/2) (1.96 + 0.8416)^2 / 0.25 = 47.09
        assert_eq!(r.n_per_group, 48);
        assert_eq!(r.n_second_group, 96);
        assert_eq!(r.n_total, 144);
    }

    #[test]
    fn two_proportion_examples() {
        let spec = PowerSpec::default();
        let row = crate::measures::CorrespondenceRow::compute(smd(0.2));
        let rd = RiskDifference::new(row.rd_common, ctx(0.2)).unwrap();
        let r = required_n_two_proportions(rd.into(), &spec).unwrap();
        assert!((100..1000).contains(&r.n_per_group));
        assert_eq!(r.n_per_group, r.formula_n.ceil() as u64);
        assert!(r.achieved_power >= 0.8);
        assert!(achieved_power_two_proportions(rd.into(), r.n_per_group - 1, 0.05).unwrap() < 0.8);

        let rr = or_to_rr(smd_to_or(smd(0.5)), ctx(0.01));
        let r = required_n_two_proportions(rr.into(), &spec).unwrap();
        assert!((1000..3000).contains(&r.n_per_group));

        let sure = RiskDifference::new(0.5, ctx(0.5)).unwrap();
        assert!(matches!(
            required_n_two_proportions(sure.into(), &spec),
            Err(Error::Domain(_))
        ));
        let null = RelativeRisk::new(1.0, ctx(0.2)).unwrap();
        assert!(required_n_two_proportions(null.into(), &spec).is_err());
    }

    #[test]
    fn two_proportion_formula_by_hand() {
        // p0 = 0.2, p1 = 0.3: (1.96 sqrt(2 * .25 * .75) + 0.8416 sqrt(.21 + .16))^2 / .01
        let rd = RiskDifference::new(0.1, ctx(0.2)).unwrap();
        let r = required_n_two_proportions(rd.into(), &PowerSpec::default()).unwrap();
        let za = 1.959_963_984_540_054;
        let zb = 0.841_621_233_572_914_2;
        let by_hand =
            ((za * (2.0f64 * 0.25 * 0.75).sqrt() + zb * (0.21f64 + 0.16).sqrt()) / 0.1).powi(2);
        assert!((r.formula_n - by_hand).abs() < 1e-9);
        assert_eq!(r.n_per_group, 294);
    }

    #[test]
    fn relative_and_absolute_contrasts_agree() {
        let rr = or_to_rr(smd_to_or(smd(0.5)), ctx(0.2));
        let rd = rr_to_rd(rr);
        let a = required_n_two_proportions(rr.into(), &PowerSpec::default()).unwrap();
        let b = required_n_two_proportions(rd.into(), &PowerSpec::default()).unwrap();
        assert_eq!(a.n_per_group, b.n_per_group);
    }
}
