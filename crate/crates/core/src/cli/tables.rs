//! The three reference tables: effect-size correspondence, attributable
//! fractions, and the intervention benchmark catalog.

use std::str::FromStr;

use super::format::{Align, OutputFormat, Table};
use crate::display::{fixed, full};
use crate::impact::{default_paf_grid, PafGrid};
use crate::measures::{
    classify_magnitude, correspondence_grid, CorrespondenceRow, MagnitudeLabel, Smd,
    GRID_COMMON_P0, GRID_RARE_P0,
};
use crate::plausibility::benchmark_catalog;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableKind {
    Correspondence,
    Attributable,
    Catalog,
}

impl FromStr for TableKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "table2" | "correspondence" => Ok(TableKind::Correspondence),
            "figure1" | "paf" => Ok(TableKind::Attributable),
            "catalog" | "benchmarks" => Ok(TableKind::Catalog),
            other => Err(Error::usage(format!(
                "unknown table '{other}' (expected table2, figure1 or catalog)"
            ))),
        }
    }
}

pub fn emit_table(which: TableKind, format: OutputFormat) -> String {
    match which {
        TableKind::Correspondence => render_correspondence(&correspondence_grid(), format),
        TableKind::Attributable => {
            let grid = default_paf_grid();
            render_paf(&grid.pes, &paf_rows(&grid), format)
        }
        TableKind::Catalog => catalog_table().render(format),
    }
}

fn p0_tag(p0: f64) -> String {
    fixed(p0, 2)
}

fn correspondence_header(format: OutputFormat) -> Vec<String> {
    let (rare, common) = (p0_tag(GRID_RARE_P0), p0_tag(GRID_COMMON_P0));
    if format == OutputFormat::Csv {
        let shown = [
            "interpretation".to_string(),
            "smd".into(),
            "r".into(),
            "or".into(),
            format!("rr_p0_{rare}"),
            format!("rr_p0_{common}"),
            format!("rd_p0_{rare}"),
            format!("rd_p0_{common}"),
        ];
        let fulls = shown[2..]
            .iter()
            .map(|h| format!("{h}_full"))
            .collect::<Vec<_>>();
        shown.into_iter().chain(fulls).collect()
    } else {
        vec![
            "Interpretation".into(),
            "SMD".into(),
            "r".into(),
            "OR".into(),
            format!("RR (P0={rare})"),
            format!("RR (P0={common})"),
            format!("RD (P0={rare})"),
            format!("RD (P0={common})"),
        ]
    }
}

pub fn render_correspondence(rows: &[CorrespondenceRow], format: OutputFormat) -> String {
    let header = correspondence_header(format);
    let mut align = vec![Align::Right; header.len()];
    align[0] = Align::Left;
    let mut table = Table::new(header).with_align(align);
    for row in rows {
        let label = if row.starts_band() {
            row.label.as_str().to_string()
        } else {
            "-".to_string()
        };
        let shown = row.displayed();
        let mut cells = vec![label, full(row.d)];
        cells.extend(shown[1..].iter().cloned());
        if format == OutputFormat::Csv {
            cells.extend(
                [
                    row.r,
                    row.or,
                    row.rr_rare,
                    row.rr_common,
                    row.rd_rare,
                    row.rd_common,
                ]
                .iter()
                .map(|&x| full(x)),
            );
        }
        table.push(cells);
    }
    table.render(format)
}

fn csv_records(text: &str) -> Result<(Vec<String>, Vec<csv::StringRecord>)> {
    let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| Error::usage(format!("unreadable CSV header: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    let records = reader
        .records()
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| Error::usage(format!("malformed CSV: {e}")))?;
    Ok((header, records))
}

fn number(record: &csv::StringRecord, idx: usize, column: &str) -> Result<f64> {
    let raw = record
        .get(idx)
        .ok_or_else(|| Error::usage(format!("missing column {column}")))?;
    raw.parse()
        .map_err(|_| Error::usage(format!("column {column}: '{raw}' is not a number")))
}

/// Reads the CSV produced by [`render_correspondence`] back from its
/// full-precision columns.
pub fn parse_correspondence_csv(text: &str) -> Result<Vec<CorrespondenceRow>> {
    let (header, records) = csv_records(text)?;
    if header != correspondence_header(OutputFormat::Csv) {
        return Err(Error::usage(
            "CSV header does not match the correspondence table",
        ));
    }
    records
        .iter()
        .map(|rec| {
            let d = number(rec, 1, "smd")?;
            let label = classify_magnitude(Smd::new(d)?);
            let shown = rec.get(0).unwrap_or("-");
            if shown != "-" && shown.parse::<MagnitudeLabel>()? != label {
                return Err(Error::usage(format!(
                    "label '{shown}' does not match SMD {d}"
                )));
            }
            let f = |i: usize| number(rec, 8 + i, &header[8 + i]);
            Ok(CorrespondenceRow {
                d,
                r: f(0)?,
                or: f(1)?,
                rr_rare: f(2)?,
                rr_common: f(3)?,
                rd_rare: f(4)?,
                rd_common: f(5)?,
                label,
            })
        })
        .collect()
}

/// One (SMD, P0) row of attributable fractions across the prevalences.
#[derive(Debug, Clone, PartialEq)]
pub struct PafTableRow {
    pub smd: f64,
    pub p0: f64,
    pub pafs: Vec<f64>,
}

pub fn paf_rows(grid: &PafGrid) -> Vec<PafTableRow> {
    grid.rows()
        .map(|cells| PafTableRow {
            smd: cells[0].smd.unwrap_or(f64::NAN),
            p0: cells[0].p0,
            pafs: cells.iter().map(|c| c.paf).collect(),
        })
        .collect()
}

fn paf_header(pes: &[f64], format: OutputFormat) -> Vec<String> {
    if format == OutputFormat::Csv {
        let shown: Vec<String> = pes
            .iter()
            .map(|&pe| format!("paf_pe_{}", fixed(pe, 2)))
            .collect();
        ["interpretation".to_string(), "smd".into(), "p0".into()]
            .into_iter()
            .chain(shown.iter().cloned())
            .chain(shown.iter().map(|h| format!("{h}_full")))
            .collect()
    } else {
        ["Interpretation".to_string(), "SMD".into(), "P0".into()]
            .into_iter()
            .chain(pes.iter().map(|&pe| format!("PAF (Pe={})", fixed(pe, 2))))
            .collect()
    }
}

pub fn render_paf(pes: &[f64], rows: &[PafTableRow], format: OutputFormat) -> String {
    let header = paf_header(pes, format);
    let mut align = vec![Align::Right; header.len()];
    align[0] = Align::Left;
    let mut table = Table::new(header).with_align(align);
    let mut previous: Option<f64> = None;
    for row in rows {
        let first_of_block = previous != Some(row.smd);
        previous = Some(row.smd);
        // Text layouts show the label and SMD once per block; CSV repeats them.
        let (label, smd) = if first_of_block || format == OutputFormat::Csv {
            let label = Smd::new(row.smd)
                .map(|d| classify_magnitude(d).as_str().to_string())
                .unwrap_or_default();
            (label, full(row.smd))
        } else {
            (String::new(), String::new())
        };
        let mut cells = vec![label, smd, full(row.p0)];
        cells.extend(row.pafs.iter().map(|&p| fixed(p, 2)));
        if format == OutputFormat::Csv {
            cells.extend(row.pafs.iter().map(|&p| full(p)));
        }
        table.push(cells);
    }
    table.render(format)
}

/// Reads the CSV produced by [`render_paf`], returning the prevalences and rows.
pub fn parse_paf_csv(text: &str) -> Result<(Vec<f64>, Vec<PafTableRow>)> {
    let (header, records) = csv_records(text)?;
    if header.len() < 5 || (header.len() - 3) % 2 != 0 {
        return Err(Error::usage(
            "CSV header does not match the attributable-fraction table",
        ));
    }
    let k = (header.len() - 3) / 2;
    let pes = header[3..3 + k]
        .iter()
        .map(|h| {
            h.strip_prefix("paf_pe_")
                .and_then(|v| v.parse::<f64>().ok())
                .ok_or_else(|| Error::usage(format!("unexpected column '{h}'")))
        })
        .collect::<Result<Vec<f64>>>()?;
    if header != paf_header(&pes, OutputFormat::Csv) {
        return Err(Error::usage(
            "CSV header does not match the attributable-fraction table",
        ));
    }
    let rows = records
        .iter()
        .map(|rec| {
            Ok(PafTableRow {
                smd: number(rec, 1, "smd")?,
                p0: number(rec, 2, "p0")?,
                pafs: (0..k)
                    .map(|i| number(rec, 3 + k + i, &header[3 + k + i]))
                    .collect::<Result<_>>()?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((pes, rows))
}

fn catalog_table() -> Table {
    let mut table = Table::new([
        "Intervention",
        "Intensity",
        "Targeting",
        "Largest SMD",
        "Outcome",
        "Source",
    ])
    .with_align(vec![
        Align::Left,
        Align::Left,
        Align::Left,
        Align::Right,
        Align::Left,
        Align::Left,
    ]);
    for b in benchmark_catalog() {
        table.push([
            b.name.to_string(),
            b.intensity.key().to_string(),
            b.targeting.key().to_string(),
            fixed(b.largest_smd, 3),
            b.outcome.to_string(),
            b.source.unwrap_or("(no inline citation)").to_string(),
        ]);
    }
    table
}
