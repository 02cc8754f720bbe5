//! Monte Carlo power estimates.
//!
//! Replications are split into fixed-size batches. Batch `b` draws from a
//! ChaCha8 stream keyed by `(seed, b)`, and batches only contribute integer
//! rejection counts, so the estimate depends on the inputs, seed and
//! replication count alone, never on how many threads ran the batches.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use super::normal::quantile_unchecked;
use super::{critical_value, validate_alpha, RiskContrast};
use crate::measures::Smd;
use crate::{Error, Result};

const BATCH: u64 = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    replications: u64,
    seed: u64,
}

impl SimConfig {
    pub fn new(replications: u64, seed: u64) -> Result<Self> {
        if replications == 0 {
            return Err(Error::domain("at least one replication is required"));
        }
        Ok(SimConfig { replications, seed })
    }

    pub fn replications(&self) -> u64 {
        self.replications
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

fn batch_rng(seed: u64, batch: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch);
    rng
}

/// Uniform draw on the open interval (0, 1) from the top 53 bits.
fn open_unit(rng: &mut ChaCha8Rng) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    quantile_unchecked(open_unit(rng))
}

/// Runs `one` for every replication and returns the fraction that rejected.
fn rejection_rate<F>(sim: &SimConfig, one: F) -> f64
where
    F: Fn(&mut ChaCha8Rng) -> bool + Sync,
{
    let batches = sim.replications.div_ceil(BATCH);
    let rejections: u64 = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = batch_rng(sim.seed, b);
            let size = BATCH.min(sim.replications - b * BATCH);
            (0..size).filter(|_| one(&mut rng)).count() as u64
        })
        .sum();
    rejections as f64 / sim.replications as f64
}

/// Mean and sum of squared deviations of `n` unit-variance normals shifted by `mean`.
fn normal_sample(rng: &mut ChaCha8Rng, n: u64, mean: f64) -> (f64, f64) {
    let (mut m, mut ss) = (0.0, 0.0);
    for i in 1..=n {
        let x = mean + standard_normal(rng);
        let delta = x - m;
        m += delta / i as f64;
        ss += delta * (x - m);
    }
    (m, ss)
}

/// Empirical power of the pooled-variance two-sample z-test when the groups
/// are drawn from N(d, 1) and N(0, 1) with `n_per_group` each.
pub fn simulate_power_smd(d: Smd, n_per_group: u64, alpha: f64, sim: &SimConfig) -> Result<f64> {
    validate_alpha(alpha)?;
    if n_per_group < 2 {
        return Err(Error::domain(format!(
            "each group needs at least 2 subjects, got {n_per_group}"
        )));
    }
    let z = critical_value(alpha);
    let n = n_per_group as f64;
    let d = d.value();
    Ok(rejection_rate(sim, |rng| {
        let (m1, ss1) = normal_sample(rng, n_per_group, d);
        let (m2, ss2) = normal_sample(rng, n_per_group, 0.0);
        let pooled_var = (ss1 + ss2) / (2.0 * n - 2.0);
        let stat = (m1 - m2) / (pooled_var * 2.0 / n).sqrt();
        stat.abs() > z
    }))
}

/// Empirical power of the pooled two-proportion z-test with binomial counts
/// at the exposed and baseline risks, `n_per_group` in each group.
pub fn simulate_power_two_proportions(
    effect: RiskContrast,
    n_per_group: u64,
    alpha: f64,
    sim: &SimConfig,
) -> Result<f64> {
    validate_alpha(alpha)?;
    if n_per_group < 2 {
        return Err(Error::domain(format!(
            "each group needs at least 2 subjects, got {n_per_group}"
        )));
    }
    let (p0, p1) = (effect.baseline_risk(), effect.exposed_risk());
    let exposed = Binomial::new(n_per_group, p1.clamp(0.0, 1.0))
        .map_err(|e| Error::domain(format!("exposed risk {p1}: {e}")))?;
    let baseline = Binomial::new(n_per_group, p0)
        .map_err(|e| Error::domain(format!("baseline risk {p0}: {e}")))?;
    let z = critical_value(alpha);
    let n = n_per_group as f64;
    Ok(rejection_rate(sim, |rng| {
        let x1 = exposed.sample(rng) as f64;
        let x0 = baseline.sample(rng) as f64;
        let pooled = (x1 + x0) / (2.0 * n);
        let se = (pooled * (1.0 - pooled) * 2.0 / n).sqrt();
        se > 0.0 && ((x1 - x0) / n / se).abs() > z
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{OutcomeContext, RelativeRisk};

    #[test]
    fn config_needs_replications() {
        assert!(SimConfig::new(0, 1).is_err());
        assert_eq!(SimConfig::new(5, 9).unwrap().replications(), 5);
    }

    #[test]
    fn open_unit_stays_inside() {
        let mut rng = batch_rng(3, 0);
        for _ in 0..10_000 {
            let u = open_unit(&mut rng);
            assert!(u > 0.0 && u < 1.0);
        }
    }

    #[test]
    fn streams_differ_between_batches() {
        let a = batch_rng(42, 0).next_u64();
        let b = batch_rng(42, 1).next_u64();
        assert_ne!(a, b);
    }

    #[test]
    fn normal_draws_have_unit_moments() {
        let mut rng = batch_rng(7, 0);
        let (m, ss) = normal_sample(&mut rng, 200_000, 0.0);
        assert!(m.abs() < 0.01);
        assert!((ss / 199_999.0 - 1.0).abs() < 0.01);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let sim = SimConfig::new(3_000, 42).unwrap();
        let d = Smd::new(0.4).unwrap();
        let a = simulate_power_smd(d, 30, 0.05, &sim).unwrap();
        let b = simulate_power_smd(d, 30, 0.05, &sim).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn independent_of_thread_count() {
        let sim = SimConfig::new(2_500, 11).unwrap();
        let d = Smd::new(0.3).unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| simulate_power_smd(d, 40, 0.05, &sim).unwrap())
        };
        assert_eq!(run(1).to_bits(), run(4).to_bits());
    }

    #[test]
    fn partial_final_batch_counts_exactly() {
        let sim = SimConfig::new(BATCH + 3, 5).unwrap();
        let p = simulate_power_smd(Smd::new(0.0).unwrap(), 10, 0.05, &sim).unwrap();
        let count = p * (BATCH + 3) as f64;
        assert!((count - count.round()).abs() < 1e-9);
    }

    #[test]
    fn null_calibration_smd() {
        let sim = SimConfig::new(20_000, 42).unwrap();
        let p = simulate_power_smd(Smd::new(0.0).unwrap(), 100, 0.05, &sim).unwrap();
        assert!((p - 0.05).abs() < 0.006, "{p}");
    }

    #[test]
    fn agrees_with_analytic_smd() {
        let sim = SimConfig::new(20_000, 1).unwrap();
        let d = Smd::new(0.5).unwrap();
        let p = simulate_power_smd(d, 64, 0.05, &sim).unwrap();
        let analytic = super::super::achieved_power_smd(d, 64, 0.05).unwrap();
        assert!((p - analytic).abs() < 0.015, "{p} vs {analytic}");
    }

    #[test]
    fn null_calibration_two_proportions() {
        let sim = SimConfig::new(20_000, 42).unwrap();
        let rr = RelativeRisk::new(1.0, OutcomeContext::new(0.2).unwrap()).unwrap();
        let p = simulate_power_two_proportions(rr.into(), 200, 0.05, &sim).unwrap();
        assert!((p - 0.05).abs() < 0.006, "{p}");
    }

    #[test]
    fn certain_outcome_never_rejects_without_variation() {
        let sim = SimConfig::new(100, 1).unwrap();
        let rr = RelativeRisk::new(1.0, OutcomeContext::new(0.5).unwrap()).unwrap();
        let p = simulate_power_two_proportions(rr.into(), 2, 0.05, &sim).unwrap();
        assert!((0.0..=1.0).contains(&p));
    }
}
