//! CSV and JSON output files.
//!
//! Every CSV has a header row. Reals are written with 17 significant digits
//! (`{:.16e}`), which round-trips every `f64` exactly.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::constraints::SectorDecomposition;
use crate::error::{Error, Result};
use crate::evolution::TimeSeries;
use crate::experiments::{PeriodMeasurement, ScanResult, ScanRow, SecondaryRun, SweepRow};
use crate::model::{BasisConfig, SectorLabel};

pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_real(s: &str, column: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::input(format!("column `{column}`: {s:?} is not a number")))
}

fn parse_int<T: std::str::FromStr>(s: &str, column: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::input(format!("column `{column}`: {s:?} is not an integer")))
}

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

pub fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(path, e))
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

/// Reads all records after checking the header matches `expected` exactly.
fn read_records<R: Read>(r: R, expected: &[String]) -> Result<Vec<csv::StringRecord>> {
    let mut reader = csv::Reader::from_reader(r);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if header != expected {
        let bad = header
            .iter()
            .zip(expected)
            .find(|(h, e)| h != e)
            .map(|(h, e)| format!("found column `{h}` where `{e}` was expected"))
            .unwrap_or_else(|| format!("expected {} columns, found {}", expected.len(), header.len()));
        return Err(Error::input(format!("unexpected CSV header: {bad}")));
    }
    Ok(reader.records().collect::<std::result::Result<_, _>>()?)
}

fn header(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|s| s.to_string()).collect()
}

// sectors

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SectorRow {
    pub config: BasisConfig,
    pub label: SectorLabel,
}

const SECTOR_COLUMNS: [&str; 4] = ["config_bits", "config_int", "label", "k"];

pub fn write_sectors<W: Write>(w: W, decomposition: &SectorDecomposition) -> Result<()> {
    let mut out = writer(w);
    out.write_record(SECTOR_COLUMNS)?;
    for c in BasisConfig::all(decomposition.n_sites()) {
        let label = decomposition.label_of(&c);
        out.write_record([
            c.to_string(),
            c.bits().to_string(),
            label.name().to_string(),
            label.run_length().to_string(),
        ])?;
    }
    out.flush().map_err(|e| Error::io("<sectors>", e))?;
    Ok(())
}

pub fn read_sectors<R: Read>(r: R) -> Result<Vec<SectorRow>> {
    read_records(r, &header(&SECTOR_COLUMNS))?
        .iter()
        .map(|rec| {
            let config: BasisConfig = rec[0].parse()?;
            let int: u64 = parse_int(&rec[1], "config_int")?;
            if int != config.bits() {
                return Err(Error::input(format!("config_int {int} does not match {config}")));
            }
            let label = SectorLabel::from_parts(&rec[2], parse_int(&rec[3], "k")?)?;
            Ok(SectorRow { config, label })
        })
        .collect()
}

// scan and sweep

const SCAN_COLUMNS: [&str; 3] = ["delta", "v", "peak_nr"];
const SWEEP_COLUMNS: [&str; 2] = ["delta", "peak_nr"];

pub fn write_scan<W: Write>(w: W, scan: &ScanResult) -> Result<()> {
    let mut out = writer(w);
    out.write_record(SCAN_COLUMNS)?;
    for r in &scan.rows {
        out.write_record([fmt_real(r.delta), fmt_real(r.v), fmt_real(r.peak_n_r)])?;
    }
    out.flush().map_err(|e| Error::io("<scan>", e))?;
    Ok(())
}

pub fn read_scan<R: Read>(r: R) -> Result<ScanResult> {
    let rows = read_records(r, &header(&SCAN_COLUMNS))?
        .iter()
        .map(|rec| {
            Ok(ScanRow {
                delta: parse_real(&rec[0], "delta")?,
                v: parse_real(&rec[1], "v")?,
                peak_n_r: parse_real(&rec[2], "peak_nr")?,
            })
        })
        .collect::<Result<_>>()?;
    Ok(ScanResult { rows })
}

pub fn write_sweep<W: Write>(w: W, rows: &[SweepRow]) -> Result<()> {
    let mut out = writer(w);
    out.write_record(SWEEP_COLUMNS)?;
    for r in rows {
        out.write_record([fmt_real(r.delta), fmt_real(r.peak_n_r)])?;
    }
    out.flush().map_err(|e| Error::io("<sweep>", e))?;
    Ok(())
}

pub fn read_sweep<R: Read>(r: R) -> Result<Vec<SweepRow>> {
    read_records(r, &header(&SWEEP_COLUMNS))?
        .iter()
        .map(|rec| {
            Ok(SweepRow {
                delta: parse_real(&rec[0], "delta")?,
                peak_n_r: parse_real(&rec[1], "peak_nr")?,
            })
        })
        .collect()
}

// periods

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodRow {
    pub k: usize,
    pub v: f64,
    pub delta: f64,
    pub period_cycles: f64,
}

impl From<&PeriodMeasurement> for PeriodRow {
    fn from(m: &PeriodMeasurement) -> Self {
        PeriodRow {
            k: m.k,
            v: m.v,
            delta: m.delta,
            period_cycles: m.period_cycles,
        }
    }
}

const PERIOD_COLUMNS: [&str; 4] = ["k", "v", "delta", "period_cycles"];

pub fn write_periods<W: Write>(w: W, rows: &[PeriodRow]) -> Result<()> {
    let mut out = writer(w);
    out.write_record(PERIOD_COLUMNS)?;
    for r in rows {
        out.write_record([
            r.k.to_string(),
            fmt_real(r.v),
            fmt_real(r.delta),
            fmt_real(r.period_cycles),
        ])?;
    }
    out.flush().map_err(|e| Error::io("<periods>", e))?;
    Ok(())
}

pub fn read_periods<R: Read>(r: R) -> Result<Vec<PeriodRow>> {
    read_records(r, &header(&PERIOD_COLUMNS))?
        .iter()
        .map(|rec| {
            Ok(PeriodRow {
                k: parse_int(&rec[0], "k")?,
                v: parse_real(&rec[1], "v")?,
                delta: parse_real(&rec[2], "delta")?,
                period_cycles: parse_real(&rec[3], "period_cycles")?,
            })
        })
        .collect()
}

// evolve

/// The columns of an `evolve` CSV: a [`TimeSeries`] without the energy.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolveTable {
    pub n_sites: usize,
    pub times: Vec<f64>,
    pub n_r: Vec<f64>,
    pub site_populations: Vec<Vec<f64>>,
    /// Columns: vacuum, uniform 1..=N, hybrid.
    pub sector_populations: Vec<Vec<f64>>,
    pub config_populations: Vec<(BasisConfig, Vec<f64>)>,
}

impl From<&TimeSeries> for EvolveTable {
    fn from(s: &TimeSeries) -> Self {
        EvolveTable {
            n_sites: s.n_sites,
            times: s.times.clone(),
            n_r: s.n_r.clone(),
            site_populations: s.site_populations.clone(),
            sector_populations: s.sector_populations.clone(),
            config_populations: s.config_populations.clone(),
        }
    }
}

fn evolve_header(n_sites: usize, tracked: &[BasisConfig]) -> Vec<String> {
    let mut h = vec!["t_cycles".to_string(), "n_r".to_string()];
    h.extend((1..=n_sites).map(|i| format!("site_{i}")));
    h.push("pop_vacuum".into());
    h.extend((1..=n_sites).map(|k| format!("pop_uniform_{k}")));
    h.push("pop_hybrid".into());
    h.extend(tracked.iter().map(|c| format!("pop_{c}")));
    h
}

pub fn write_evolve<W: Write>(w: W, series: &TimeSeries) -> Result<()> {
    let tracked: Vec<BasisConfig> = series.config_populations.iter().map(|(c, _)| *c).collect();
    let mut out = writer(w);
    out.write_record(evolve_header(series.n_sites, &tracked))?;
    for i in 0..series.len() {
        let mut row = vec![fmt_real(series.times[i]), fmt_real(series.n_r[i])];
        row.extend(series.site_populations[i].iter().map(|&x| fmt_real(x)));
        row.extend(series.sector_populations[i].iter().map(|&x| fmt_real(x)));
        row.extend(series.config_populations.iter().map(|(_, p)| fmt_real(p[i])));
        out.write_record(&row)?;
    }
    out.flush().map_err(|e| Error::io("<evolve>", e))?;
    Ok(())
}

pub fn read_evolve<R: Read>(r: R) -> Result<EvolveTable> {
    let mut reader = csv::Reader::from_reader(r);
    let found: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let n_sites = found.iter().filter(|h| h.starts_with("site_")).count();
    if n_sites == 0 {
        return Err(Error::input("evolve CSV has no site columns"));
    }
    let fixed = 2 * n_sites + 4;
    let tracked: Vec<BasisConfig> = found
        .iter()
        .skip(fixed)
        .map(|h| {
            h.strip_prefix("pop_")
                .ok_or_else(|| Error::input(format!("unexpected column `{h}`")))?
                .parse()
        })
        .collect::<Result<_>>()?;
    let expected = evolve_header(n_sites, &tracked);
    if found != expected {
        return Err(Error::input(format!("unexpected evolve CSV header {found:?}")));
    }
    let records: Vec<csv::StringRecord> = reader.records().collect::<std::result::Result<_, _>>()?;

    let mut table = EvolveTable {
        n_sites,
        times: Vec::new(),
        n_r: Vec::new(),
        site_populations: Vec::new(),
        sector_populations: Vec::new(),
        config_populations: tracked.iter().map(|c| (*c, Vec::new())).collect(),
    };
    for rec in &records {
        let vals: Vec<f64> = rec
            .iter()
            .zip(&expected)
            .map(|(s, col)| parse_real(s, col))
            .collect::<Result<_>>()?;
        table.times.push(vals[0]);
        table.n_r.push(vals[1]);
        table.site_populations.push(vals[2..2 + n_sites].to_vec());
        table.sector_populations.push(vals[2 + n_sites..fixed].to_vec());
        for (j, (_, p)) in table.config_populations.iter_mut().enumerate() {
            p.push(vals[fixed + j]);
        }
    }
    Ok(table)
}

// secondary

#[derive(Debug, Clone, PartialEq)]
pub struct SecondaryTable {
    pub times: Vec<f64>,
    pub forbidden_total: Vec<f64>,
    pub accessible_total: Vec<f64>,
    pub config_populations: Vec<(BasisConfig, Vec<f64>)>,
}

impl From<&SecondaryRun> for SecondaryTable {
    fn from(run: &SecondaryRun) -> Self {
        SecondaryTable {
            times: run.series.times.clone(),
            forbidden_total: run.forbidden_total.clone(),
            accessible_total: run.accessible_total.clone(),
            config_populations: run.series.config_populations.clone(),
        }
    }
}

fn secondary_header(tracked: &[BasisConfig]) -> Vec<String> {
    let mut h = header(&["t_cycles", "pop_forbidden_total", "pop_accessible_total"]);
    h.extend(tracked.iter().map(|c| format!("pop_{c}")));
    h
}

pub fn write_secondary<W: Write>(w: W, table: &SecondaryTable) -> Result<()> {
    let tracked: Vec<BasisConfig> = table.config_populations.iter().map(|(c, _)| *c).collect();
    let mut out = writer(w);
    out.write_record(secondary_header(&tracked))?;
    for i in 0..table.times.len() {
        let mut row = vec![
            fmt_real(table.times[i]),
            fmt_real(table.forbidden_total[i]),
            fmt_real(table.accessible_total[i]),
        ];
        row.extend(table.config_populations.iter().map(|(_, p)| fmt_real(p[i])));
        out.write_record(&row)?;
    }
    out.flush().map_err(|e| Error::io("<secondary>", e))?;
    Ok(())
}

pub fn read_secondary<R: Read>(r: R) -> Result<SecondaryTable> {
    let mut reader = csv::Reader::from_reader(r);
    let found: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let tracked: Vec<BasisConfig> = found
        .iter()
        .skip(3)
        .map(|h| {
            h.strip_prefix("pop_")
                .ok_or_else(|| Error::input(format!("unexpected column `{h}`")))?
                .parse()
        })
        .collect::<Result<_>>()?;
    let expected = secondary_header(&tracked);
    if found != expected {
        return Err(Error::input(format!("unexpected CSV header {found:?}")));
    }
    let mut table = SecondaryTable {
        times: Vec::new(),
        forbidden_total: Vec::new(),
        accessible_total: Vec::new(),
        config_populations: tracked.iter().map(|c| (*c, Vec::new())).collect(),
    };
    for rec in reader.records() {
        let rec = rec?;
        let vals: Vec<f64> = rec
            .iter()
            .zip(&expected)
            .map(|(s, col)| parse_real(s, col))
            .collect::<Result<_>>()?;
        table.times.push(vals[0]);
        table.forbidden_total.push(vals[1]);
        table.accessible_total.push(vals[2]);
        for (j, (_, p)) in table.config_populations.iter_mut().enumerate() {
            p.push(vals[3 + j]);
        }
    }
    Ok(table)
}

// json

pub fn write_json<W: Write, T: Serialize>(mut w: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n").map_err(|e| Error::io("<json>", e))?;
    Ok(())
}

pub fn read_json<R: Read, T: DeserializeOwned>(r: R) -> Result<T> {
    Ok(serde_json::from_reader(r)?)
}
