//! Study-planning toolkit for population health research.
//!
//! Converts effect sizes between the standardized mean difference, correlation,
//! odds ratio, relative risk and risk difference scales; maps individual-level
//! effects to population attributable fractions; computes power, sample size and
//! minimum detectable effects (with a Monte Carlo cross-check); and screens
//! proposed effect sizes against empirical benchmarks from population health
//! interventions.

pub mod cli;
pub mod display;
mod error;
pub mod impact;
pub mod measures;
pub mod plausibility;
pub mod power;

pub use error::{Error, Result};
