use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use super::config::ExperimentKind;
use crate::error::{Error, Result};
use crate::metrics::{EvalGrid, MetricSummary};

/// Header of every results CSV.
pub const RESULTS_HEADER: &str = "experiment,method,target,n,seed,sigma,mise,kl,wall_ms";

/// Header of every 2D density raster.
pub const RASTER_HEADER: &str = "x0,x1,p_true,p_silverman,p_sdkde";

/// One (experiment, method, target, n, seed) cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRecord {
    pub experiment: ExperimentKind,
    pub method: String,
    pub target: String,
    pub n: usize,
    pub seed: u64,
    pub sigma: f64,
    pub mise: f64,
    pub kl: Option<f64>,
    pub wall_ms: Option<f64>,
}

/// Win count of a candidate method over a baseline at one (target, n).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WinSummary {
    pub target: String,
    pub n: usize,
    pub method: String,
    pub baseline: String,
    pub seeds: usize,
    pub wins: usize,
    pub win_rate: f64,
    pub mean_mise: f64,
    pub baseline_mean_mise: f64,
}

impl WinSummary {
    pub fn new(target: &str, n: usize, method: &str, values: Vec<f64>, baseline: &str, baseline_values: Vec<f64>) -> Result<Self> {
        let summary = MetricSummary::new(values)?.against(baseline, &baseline_values)?;
        let base = MetricSummary::new(baseline_values)?;
        Ok(WinSummary {
            target: target.to_string(),
            n,
            method: method.to_string(),
            baseline: baseline.to_string(),
            seeds: summary.values.len(),
            wins: summary.wins.unwrap_or(0),
            win_rate: summary.win_rate().unwrap_or(0.0),
            mean_mise: summary.mean,
            baseline_mean_mise: base.mean,
        })
    }
}

/// True density and both estimates on one 2D grid.
#[derive(Debug, Clone)]
pub struct Raster {
    pub target: String,
    pub n: usize,
    pub seed: u64,
    pub grid: EvalGrid,
    pub p_true: Vec<f64>,
    pub p_silverman: Vec<f64>,
    pub p_sdkde: Vec<f64>,
}

impl Raster {
    pub fn file_name(&self) -> String {
        format!("raster_{}_n{}_seed{}.csv", self.target, self.n, self.seed)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(RASTER_HEADER.split(','))?;
        let mut node = vec![0.0; 2];
        for i in 0..self.grid.len() {
            self.grid.node_into(i, &mut node);
            w.write_record([
                node[0].to_string(),
                node[1].to_string(),
                self.p_true[i].to_string(),
                self.p_silverman[i].to_string(),
                self.p_sdkde[i].to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<raster>", e))?;
        Ok(())
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

/// Writes `records` under [`RESULTS_HEADER`].
pub fn write_records<W: Write>(writer: W, records: &[ResultRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in records {
        w.serialize(r)?;
    }
    if records.is_empty() {
        w.write_record(RESULTS_HEADER.split(','))?;
    }
    w.flush().map_err(|e| Error::io("<results>", e))?;
    Ok(())
}

pub fn write_records_file(path: &Path, records: &[ResultRecord]) -> Result<()> {
    write_records(create(path)?, records)
}

pub fn write_summaries_file(path: &Path, summaries: &[WinSummary]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    for s in summaries {
        w.serialize(s)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn write_raster_file(path: &Path, raster: &Raster) -> Result<()> {
    raster.write_csv(create(path)?)
}
