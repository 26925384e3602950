//! Config-driven experiments and their CSV outputs.

mod config;
mod experiments;
mod output;

use std::path::{Path, PathBuf};

pub use config::{parse_seed_range, ComponentSpec, ExperimentConfig, ExperimentKind, Method, TargetSpec, DEFAULT_SCALING_NS};
pub use experiments::{iteration_label, run_grid2d, run_iterated, run_scaling, run_winrate};
pub use output::{
    write_records, write_records_file, Raster, ResultRecord, WinSummary, RASTER_HEADER, RESULTS_HEADER,
};

use crate::error::{Error, Result};

/// File name of the win-rate summary written next to the results.
pub const WINRATE_SUMMARY_FILE: &str = "winrate_summary.csv";

/// What a call to [`run`] produced.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub records: Vec<ResultRecord>,
    pub summaries: Vec<WinSummary>,
    pub files: Vec<PathBuf>,
}

/// Runs the experiment without writing anything.
pub fn execute(cfg: &ExperimentConfig) -> Result<(Vec<ResultRecord>, Vec<WinSummary>, Vec<Raster>)> {
    let body = || -> Result<_> {
        Ok(match cfg.kind {
            ExperimentKind::Scaling => (run_scaling(cfg)?, Vec::new(), Vec::new()),
            ExperimentKind::Winrate => {
                let (r, s) = run_winrate(cfg)?;
                (r, s, Vec::new())
            }
            ExperimentKind::Grid2d => {
                let (r, rasters) = run_grid2d(cfg)?;
                (r, Vec::new(), rasters)
            }
            ExperimentKind::Iterated => (run_iterated(cfg)?, Vec::new(), Vec::new()),
        })
    };
    match cfg.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::config(format!("thread pool: {e}")))?
            .install(body),
        None => body(),
    }
}

/// Runs the experiment and writes its CSV files into `out_dir`.
pub fn run(cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunReport> {
    let (records, summaries, rasters) = execute(cfg)?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut files = Vec::new();
    let results = out_dir.join(&cfg.output);
    write_records_file(&results, &records)?;
    files.push(results);
    if !summaries.is_empty() {
        let path = out_dir.join(WINRATE_SUMMARY_FILE);
        output::write_summaries_file(&path, &summaries)?;
        files.push(path);
    }
    if cfg.rasters {
        for raster in &rasters {
            let path = out_dir.join(raster.file_name());
            output::write_raster_file(&path, raster)?;
            files.push(path);
        }
    }
    Ok(RunReport {
        records,
        summaries,
        files,
    })
}
