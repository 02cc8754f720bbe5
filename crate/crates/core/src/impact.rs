//! Population attributable fractions.
//!
//! `PAF = Pe (RR - 1) / (1 + Pe (RR - 1))`, the share of the adverse outcome in
//! the population that would be averted if the exposure (here, the beneficial
//! intervention) were extended to everyone. Effects are taken by magnitude:
//! an SMD of either sign maps to `RR >= 1`.

use crate::measures::{or_to_rr, smd_to_or, OutcomeContext, RelativeRisk, Smd};
use crate::{Error, Result};

/// Proportion of the population exposed or treated.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ExposurePrevalence(f64);

impl ExposurePrevalence {
    pub fn new(pe: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&pe) {
            return Err(Error::domain(format!(
                "exposure prevalence pe must lie in [0, 1], got {pe}"
            )));
        }
        Ok(ExposurePrevalence(pe))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PafResult {
    pub paf: f64,
    pub rr: f64,
    pub p0: f64,
    pub pe: f64,
    /// The SMD magnitude the relative risk was derived from, if any.
    pub smd: Option<f64>,
}

pub fn paf_from_rr(rr: RelativeRisk, pe: ExposurePrevalence) -> Result<PafResult> {
    if rr.value() < 1.0 {
        return Err(Error::usage(format!(
            "relative risk {} is below 1; invert it for comparability before computing an attributable fraction",
            rr.value()
        )));
    }
    let excess = pe.value() * (rr.value() - 1.0);
    Ok(PafResult {
        paf: excess / (1.0 + excess),
        rr: rr.value(),
        p0: rr.context().p0(),
        pe: pe.value(),
        smd: None,
    })
}

/// PAF for an SMD via `|d| -> OR -> RR`, with the baseline risk entering only
/// at the OR to RR step.
pub fn paf_from_smd(d: Smd, context: OutcomeContext, pe: ExposurePrevalence) -> PafResult {
    let magnitude = d.magnitude();
    let rr = or_to_rr(smd_to_or(magnitude), context);
    let mut result = paf_from_rr(rr, pe).expect("a non-negative SMD always yields RR >= 1");
    result.smd = Some(magnitude.value());
    result
}

/// Attributable fractions over every combination of SMD, baseline risk and
/// exposure prevalence.
#[derive(Debug, Clone, PartialEq)]
pub struct PafGrid {
    pub smds: Vec<f64>,
    pub p0s: Vec<f64>,
    pub pes: Vec<f64>,
    cells: Vec<PafResult>,
}

impl PafGrid {
    pub fn cell(&self, smd_idx: usize, p0_idx: usize, pe_idx: usize) -> &PafResult {
        let (np0, npe) = (self.p0s.len(), self.pes.len());
        &self.cells[(smd_idx * np0 + p0_idx) * npe + pe_idx]
    }

    /// Rows ordered by SMD, then baseline risk; each row spans the prevalences.
    pub fn rows(&self) -> impl Iterator<Item = &[PafResult]> {
        self.cells.chunks(self.pes.len())
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

pub fn paf_grid(
    smds: &[Smd],
    p0s: &[OutcomeContext],
    pes: &[ExposurePrevalence],
) -> Result<PafGrid> {
    if smds.is_empty() || p0s.is_empty() || pes.is_empty() {
        return Err(Error::usage("every grid axis needs at least one value"));
    }
    let mut cells = Vec::with_capacity(smds.len() * p0s.len() * pes.len());
    for &d in smds {
        for &p0 in p0s {
            cells.extend(pes.iter().map(|&pe| paf_from_smd(d, p0, pe)));
        }
    }
    Ok(PafGrid {
        smds: smds.iter().map(|d| d.value()).collect(),
        p0s: p0s.iter().map(|c| c.p0()).collect(),
        pes: pes.iter().map(|p| p.value()).collect(),
        cells,
    })
}

pub const DEFAULT_SMDS: [f64; 6] = [0.01, 0.2, 0.5, 0.8, 1.2, 2.0];
pub const DEFAULT_P0S: [f64; 2] = [0.01, 0.2];
pub const DEFAULT_PES: [f64; 3] = [0.01, 0.2, 0.5];

/// The 6 x 2 x 3 grid of SMD bands, rare/common outcomes and low/moderate/broad
/// coverage.
pub fn default_paf_grid() -> PafGrid {
    let smds: Vec<Smd> = DEFAULT_SMDS.iter().map(|&d| Smd::new(d).unwrap()).collect();
    let p0s: Vec<OutcomeContext> = DEFAULT_P0S
        .iter()
        .map(|&p| OutcomeContext::new(p).unwrap())
        .collect();
    let pes: Vec<ExposurePrevalence> = DEFAULT_PES
        .iter()
        .map(|&p| ExposurePrevalence::new(p).unwrap())
        .collect();
    paf_grid(&smds, &p0s, &pes).expect("default axes are non-empty")
}
