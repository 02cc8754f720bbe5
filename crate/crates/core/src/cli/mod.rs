//! Command-line front end.
//!
//! Exit status: 0 on success, 1 when input fails validation, 2 when a
//! computation on valid input fails. Data goes to the output stream, errors and
//! warnings to the diagnostic stream.

pub mod format;
pub mod report;
pub mod scenario;
pub mod tables;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::display::{fixed, full};
use crate::impact::{paf_from_rr, paf_from_smd, ExposurePrevalence, PafResult};
use crate::measures::{classify_magnitude, convert, EffectQuantity, OutcomeContext, Scale, Smd};
use crate::plausibility::{assess_profile, attenuate_indirect, StudyProfile};
use crate::power::{
    achieved_power_smd, achieved_power_two_proportions, mde_smd, required_n_smd,
    required_n_two_proportions, simulate_power_smd, simulate_power_two_proportions, PowerSpec,
    RiskContrast, SimConfig,
};
use crate::Error;
use format::{Align, OutputFormat, Table};
use report::{run_report, EXTREME_SMD};
use scenario::RawScenario;
use tables::{emit_table, TableKind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_COMPUTE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "effplan",
    version,
    about = "Effect sizes, population impact and power for study planning"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Convert an effect between SMD, r, OR, RR and RD.
    Convert {
        #[command(flatten)]
        effect: EffectArgs,
        /// Target scale; all scales when omitted.
        #[arg(long)]
        to: Option<String>,
        #[command(flatten)]
        out: FormatArg,
    },
    /// Population attributable fraction for an effect.
    Paf {
        #[command(flatten)]
        effect: EffectArgs,
        /// Proportion exposed; repeat for a sweep (default 0.01, 0.2, 0.5).
        #[arg(long)]
        pe: Vec<f64>,
        #[command(flatten)]
        out: FormatArg,
    },
    /// Required sample size, or achieved power with --n.
    Power {
        #[command(flatten)]
        effect: EffectArgs,
        #[command(flatten)]
        design: DesignArgs,
        #[arg(long)]
        n: Option<u64>,
        #[command(flatten)]
        out: FormatArg,
    },
    /// Minimum detectable SMD for a group size.
    Mde {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        p0: Option<f64>,
        #[command(flatten)]
        design: DesignArgs,
        #[command(flatten)]
        out: FormatArg,
    },
    /// Monte Carlo power check against the analytic value.
    Simulate {
        #[command(flatten)]
        effect: EffectArgs,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, default_value_t = 10_000)]
        reps: u64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[command(flatten)]
        out: FormatArg,
    },
    /// Screen an assumed effect size against intervention benchmarks.
    Assess {
        #[command(flatten)]
        effect: EffectArgs,
        #[command(flatten)]
        profile: ProfileArgs,
        #[command(flatten)]
        out: FormatArg,
    },
    /// Effect through an intermediate determinant: per-unit effect times induced change.
    Attenuate {
        #[arg(long = "per-unit", allow_negative_numbers = true)]
        per_unit: f64,
        #[arg(long, allow_negative_numbers = true)]
        change: f64,
        #[command(flatten)]
        out: FormatArg,
    },
    /// Print a reference table: table2, figure1 or catalog.
    Table {
        which: String,
        #[command(flatten)]
        out: FormatArg,
    },
    /// Full planning report for a scenario file and/or flags.
    Report {
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long)]
        label: Option<String>,
        #[arg(long)]
        from: Option<String>,
        #[arg(long, allow_negative_numbers = true)]
        value: Option<String>,
        #[arg(long)]
        p0: Option<String>,
        #[arg(long)]
        pe: Option<String>,
        #[arg(long)]
        alpha: Option<String>,
        #[arg(long)]
        power: Option<String>,
        #[arg(long)]
        n: Option<String>,
        #[arg(long)]
        intensity: Option<String>,
        #[arg(long)]
        targeting: Option<String>,
        #[arg(long)]
        proximity: Option<String>,
        #[arg(long)]
        mechanism: Option<String>,
        #[command(flatten)]
        out: FormatArg,
    },
}

#[derive(Debug, Args)]
struct EffectArgs {
    /// Scale of --value: smd, r, or, rr or rd.
    #[arg(long, default_value = "smd")]
    from: String,
    #[arg(long, allow_negative_numbers = true)]
    value: f64,
    /// Risk of the outcome in the unexposed group.
    #[arg(long)]
    p0: Option<f64>,
}

#[derive(Debug, Args)]
struct DesignArgs {
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 0.80)]
    power: f64,
}

#[derive(Debug, Args)]
struct ProfileArgs {
    #[arg(long)]
    intensity: Option<String>,
    #[arg(long)]
    targeting: Option<String>,
    #[arg(long)]
    proximity: Option<String>,
    #[arg(long)]
    mechanism: Option<String>,
}

#[derive(Debug, Args)]
struct FormatArg {
    /// Output format: text, csv or markdown.
    #[arg(long, default_value = "text")]
    format: String,
}

/// Failure classified by exit status.
#[derive(Debug)]
enum Failure {
    Invalid(String),
    Compute(String),
}

impl Failure {
    fn invalid(e: impl std::fmt::Display) -> Self {
        Failure::Invalid(e.to_string())
    }

    fn compute(e: impl std::fmt::Display) -> Self {
        Failure::Compute(e.to_string())
    }
}

/// Errors raised while building inputs are validation failures.
fn input<T>(r: crate::Result<T>) -> Result<T, Failure> {
    r.map_err(Failure::invalid)
}

fn compute<T>(r: crate::Result<T>) -> Result<T, Failure> {
    r.map_err(Failure::compute)
}

struct Output {
    data: String,
    warnings: Vec<String>,
}

impl Output {
    fn data(data: String) -> Self {
        Output {
            data,
            warnings: Vec::new(),
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    return EXIT_OK;
                }
                _ => EXIT_INVALID,
            };
            let _ = write!(err, "{e}");
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(output) => {
            for w in &output.warnings {
                let _ = writeln!(err, "warning: {w}");
            }
            if out.write_all(output.data.as_bytes()).is_err() {
                return EXIT_COMPUTE;
            }
            EXIT_OK
        }
        Err(Failure::Invalid(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_INVALID
        }
        Err(Failure::Compute(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_COMPUTE
        }
    }
}

fn output_format(f: &FormatArg) -> Result<OutputFormat, Failure> {
    input(f.format.parse())
}

impl EffectArgs {
    fn build(&self) -> Result<(EffectQuantity, Option<OutcomeContext>), Failure> {
        let scale: Scale = input(self.from.parse())?;
        let p0 = self
            .p0
            .map(OutcomeContext::new)
            .transpose()
            .map_err(Failure::invalid)?;
        let q = input(EffectQuantity::from_value(scale, self.value, p0))?;
        Ok((q, p0))
    }
}

fn to_smd(q: EffectQuantity, p0: Option<OutcomeContext>) -> Result<Smd, Failure> {
    match compute(convert(q, Scale::Smd, p0))? {
        EffectQuantity::Smd(d) => Ok(d),
        _ => unreachable!("conversion to SMD yields an SMD"),
    }
}

fn extreme_warning(d: Smd, warnings: &mut Vec<String>) {
    if d.value().abs() > EXTREME_SMD {
        warnings.push(format!(
            "|SMD| = {} exceeds {EXTREME_SMD}, outside any empirical range",
            fixed(d.value().abs(), 2)
        ));
    }
}

fn decimals(scale: Scale) -> usize {
    match scale {
        Scale::RiskDifference | Scale::Smd => 3,
        _ => 2,
    }
}

fn dispatch(command: Command) -> Result<Output, Failure> {
    match command {
        Command::Convert { effect, to, out } => {
            let format = output_format(&out)?;
            let (q, p0) = effect.build()?;
            let targets: Vec<Scale> = match to {
                Some(t) => vec![input(t.parse())?],
                None => Scale::ALL
                    .into_iter()
                    .filter(|s| !s.needs_context() || p0.is_some())
                    .collect(),
            };
            let mut warnings = Vec::new();
            extreme_warning(to_smd(q, p0)?, &mut warnings);
            let mut table = Table::new(["scale", "value", "full"]).with_align(vec![
                Align::Left,
                Align::Right,
                Align::Left,
            ]);
            for target in targets {
                let v = match convert(q, target, p0) {
                    Ok(v) => v.value(),
                    Err(e @ Error::Config(_)) => return Err(Failure::invalid(e)),
                    Err(e) => return Err(Failure::compute(e)),
                };
                table.push([
                    target.key().to_string(),
                    fixed(v, decimals(target)),
                    full(v),
                ]);
            }
            Ok(Output {
                data: table.render(format),
                warnings,
            })
        }

        Command::Paf { effect, pe, out } => {
            let format = output_format(&out)?;
            let (q, p0) = effect.build()?;
            let p0 =
                p0.ok_or_else(|| Failure::invalid("--p0 is required for attributable fractions"))?;
            let pes: Vec<f64> = if pe.is_empty() {
                crate::impact::DEFAULT_PES.to_vec()
            } else {
                pe
            };
            let pes = pes
                .into_iter()
                .map(ExposurePrevalence::new)
                .collect::<crate::Result<Vec<_>>>()
                .map_err(Failure::invalid)?;
            let results: Vec<PafResult> = match q {
                EffectQuantity::RelativeRisk(rr) => pes
                    .iter()
                    .map(|&x| paf_from_rr(rr, x))
                    .collect::<crate::Result<_>>()
                    .map_err(Failure::invalid)?,
                other => {
                    let d = to_smd(other, Some(p0))?;
                    pes.iter().map(|&x| paf_from_smd(d, p0, x)).collect()
                }
            };
            let mut table = Table::new(["pe", "rr", "paf", "paf_full"]);
            for r in results {
                table.push([full(r.pe), fixed(r.rr, 2), fixed(r.paf, 2), full(r.paf)]);
            }
            Ok(Output::data(table.render(format)))
        }

        Command::Power {
            effect,
            design,
            n,
            out,
        } => {
            let format = output_format(&out)?;
            let (q, p0) = effect.build()?;
            let spec = input(PowerSpec::new(design.alpha, design.power, 1.0))?;
            let d = to_smd(q, p0)?;
            let mut warnings = Vec::new();
            extreme_warning(d, &mut warnings);
            let contrast = match (q, p0) {
                (EffectQuantity::RelativeRisk(rr), _) => Some(RiskContrast::Relative(rr)),
                (EffectQuantity::RiskDifference(rd), _) => Some(RiskContrast::Difference(rd)),
                (_, Some(p0)) => match compute(convert(q, Scale::RelativeRisk, Some(p0)))? {
                    EffectQuantity::RelativeRisk(rr) => Some(RiskContrast::Relative(rr)),
                    _ => None,
                },
                _ => None,
            };
            let mut table = Table::new(["quantity", "value"]);
            match n {
                Some(n) => {
                    let p = compute(achieved_power_smd(d, n, spec.alpha()))?;
                    table.push(["achieved power (SMD)".to_string(), fixed(p, 4)]);
                    if let Some(c) = contrast {
                        let p = compute(achieved_power_two_proportions(c, n, spec.alpha()))?;
                        table.push(["achieved power (two proportions)".to_string(), fixed(p, 4)]);
                    }
                }
                None => {
                    let r = compute(required_n_smd(d, &spec))?;
                    if r.floored {
                        warnings.push(format!(
                            "n per group raised to the floor of {}",
                            r.n_per_group
                        ));
                    }
                    table.push(["n per group (SMD)".to_string(), r.n_per_group.to_string()]);
                    table.push(["n total (SMD)".to_string(), r.n_total.to_string()]);
                    table.push([
                        "achieved power (SMD)".to_string(),
                        fixed(r.achieved_power, 4),
                    ]);
                    if let Some(c) = contrast {
                        let r = compute(required_n_two_proportions(c, &spec))?;
                        table.push([
                            "n per group (two proportions)".to_string(),
                            r.n_per_group.to_string(),
                        ]);
                        table.push([
                            "n total (two proportions)".to_string(),
                            r.n_total.to_string(),
                        ]);
                        table.push([
                            "achieved power (two proportions)".to_string(),
                            fixed(r.achieved_power, 4),
                        ]);
                    }
                }
            }
            Ok(Output {
                data: table.render(format),
                warnings,
            })
        }

        Command::Mde { n, p0, design, out } => {
            let format = output_format(&out)?;
            let spec = input(PowerSpec::new(design.alpha, design.power, 1.0))?;
            let p0 = p0
                .map(OutcomeContext::new)
                .transpose()
                .map_err(Failure::invalid)?;
            if n < 2 {
                return Err(Failure::invalid("--n must be at least 2"));
            }
            let m = compute(mde_smd(n, &spec))?;
            let d = compute(Smd::new(m.d_min))?;
            let mut table = Table::new(["scale", "value", "full"]).with_align(vec![
                Align::Left,
                Align::Right,
                Align::Left,
            ]);
            for scale in Scale::ALL
                .into_iter()
                .filter(|s| !s.needs_context() || p0.is_some())
            {
                let v = compute(convert(d.into(), scale, p0))?.value();
                table.push([
                    scale.key().to_string(),
                    fixed(v, decimals(scale).max(4)),
                    full(v),
                ]);
            }
            table.push([
                "magnitude".to_string(),
                classify_magnitude(d).as_str().to_string(),
                String::new(),
            ]);
            Ok(Output::data(table.render(format)))
        }

        Command::Simulate {
            effect,
            n,
            alpha,
            reps,
            seed,
            out,
        } => {
            let format = output_format(&out)?;
            let (q, p0) = effect.build()?;
            let sim = input(SimConfig::new(reps, seed))?;
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(Failure::invalid(format!(
                    "alpha must lie strictly between 0 and 1, got {alpha}"
                )));
            }
            if n < 2 {
                return Err(Failure::invalid("--n must be at least 2"));
            }
            let (test, simulated, analytic) = match q {
                EffectQuantity::RelativeRisk(_) | EffectQuantity::RiskDifference(_) => {
                    let c = match q {
                        EffectQuantity::RelativeRisk(rr) => RiskContrast::Relative(rr),
                        EffectQuantity::RiskDifference(rd) => RiskContrast::Difference(rd),
                        _ => unreachable!(),
                    };
                    let analytic = achieved_power_two_proportions(c, n, alpha).ok();
                    (
                        "two proportions",
                        compute(simulate_power_two_proportions(c, n, alpha, &sim))?,
                        analytic,
                    )
                }
                _ => {
                    let d = to_smd(q, p0)?;
                    let analytic = compute(achieved_power_smd(d, n, alpha))?;
                    (
                        "two-sample z",
                        compute(simulate_power_smd(d, n, alpha, &sim))?,
                        Some(analytic),
                    )
                }
            };
            let se = (simulated * (1.0 - simulated) / reps as f64).sqrt();
            let mut table = Table::new(["quantity", "value"]);
            table.push(["test".to_string(), test.to_string()]);
            table.push(["n per group".to_string(), n.to_string()]);
            table.push(["replications".to_string(), reps.to_string()]);
            table.push(["seed".to_string(), seed.to_string()]);
            table.push(["simulated power".to_string(), full(simulated)]);
            table.push(["monte carlo se".to_string(), fixed(se, 6)]);
            table.push([
                "analytic power".to_string(),
                analytic
                    .map(|a| fixed(a, 6))
                    .unwrap_or_else(|| "n/a".to_string()),
            ]);
            Ok(Output::data(table.render(format)))
        }

        Command::Assess {
            effect,
            profile,
            out,
        } => {
            let format = output_format(&out)?;
            let (q, p0) = effect.build()?;
            let profile = StudyProfile {
                intensity: profile
                    .intensity
                    .as_deref()
                    .map(str::parse)
                    .transpose()
                    .map_err(Failure::invalid)?,
                targeting: profile
                    .targeting
                    .as_deref()
                    .map(str::parse)
                    .transpose()
                    .map_err(Failure::invalid)?,
                proximity: profile
                    .proximity
                    .as_deref()
                    .map(str::parse)
                    .transpose()
                    .map_err(Failure::invalid)?,
                mechanism: profile
                    .mechanism
                    .as_deref()
                    .map(str::parse)
                    .transpose()
                    .map_err(Failure::invalid)?,
            };
            let d = to_smd(q, p0)?;
            let verdict = assess_profile(d, &profile);
            let mut table =
                Table::new(["rule", "level", "rationale"]).with_align(vec![Align::Left; 3]);
            table.push([
                "verdict (heuristic rule set)".to_string(),
                verdict.level.to_string(),
                format!("|SMD| = {}", fixed(d.value().abs(), 3)),
            ]);
            for t in &verdict.triggered_rules {
                table.push([
                    t.rule.code().to_string(),
                    t.level.to_string(),
                    format!("{} [{}]", t.rationale, t.rule.consideration()),
                ]);
            }
            Ok(Output::data(table.render(format)))
        }

        Command::Attenuate {
            per_unit,
            change,
            out,
        } => {
            let format = output_format(&out)?;
            let per_unit = input(Smd::new(per_unit))?;
            let d = input(attenuate_indirect(per_unit, change))?;
            let mut table = Table::new(["quantity", "value", "full"]).with_align(vec![
                Align::Left,
                Align::Right,
                Align::Left,
            ]);
            table.push([
                "expected SMD".to_string(),
                fixed(d.value(), 3),
                full(d.value()),
            ]);
            table.push([
                "magnitude".to_string(),
                classify_magnitude(d).as_str().to_string(),
                String::new(),
            ]);
            Ok(Output::data(table.render(format)))
        }

        Command::Table { which, out } => {
            let format = output_format(&out)?;
            let which: TableKind = input(which.parse())?;
            Ok(Output::data(emit_table(which, format)))
        }

        Command::Report {
            scenario,
            label,
            from,
            value,
            p0,
            pe,
            alpha,
            power,
            n,
            intensity,
            targeting,
            proximity,
            mechanism,
            out,
        } => {
            let format = output_format(&out)?;
            let mut raw = match scenario {
                Some(path) => {
                    let text = std::fs::read_to_string(&path).map_err(|e| {
                        Failure::invalid(format!("cannot read {}: {e}", path.display()))
                    })?;
                    RawScenario::parse(&text)
                }
                None => RawScenario::default(),
            };
            let overrides = [
                ("label", label),
                ("effect_scale", from),
                ("effect_value", value),
                ("p0", p0),
                ("pe", pe),
                ("alpha", alpha),
                ("target_power", power),
                ("n_per_group", n),
                ("intensity", intensity),
                ("targeting", targeting),
                ("proximity", proximity),
                ("mechanism", mechanism),
            ];
            for (key, v) in overrides {
                if let Some(v) = v {
                    raw.set(key, v);
                }
            }
            let s = raw.validate().map_err(Failure::invalid)?;
            let report = run_report(&s).map_err(Failure::compute)?;
            Ok(Output {
                data: report.render(format),
                warnings: report.warnings.clone(),
            })
        }
    }
}
