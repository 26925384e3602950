use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;

use super::config::{ExperimentConfig, ExperimentKind, Method};
use super::output::{Raster, ResultRecord, WinSummary};
use crate::distributions::Distribution;
use crate::error::{Error, Result};
use crate::estimators::{emp_sd_kde, kde, silverman_kde, sd_kde, DensityEstimate, IteratedSdKde};
use crate::kernels::GaussianKernel;
use crate::metrics::{self, EvalGrid, GRID_1D_NODES, GRID_2D_NODES};
use crate::points::PointSet;
use crate::rng;
use crate::scores::{exact_score, noisy_score, ScoreField, TabulatedScore};

/// One (target, n, seed) cell; every method sees the same sample.
#[derive(Debug, Clone)]
struct Cell {
    target: usize,
    n: usize,
    seed: u64,
}

struct Prepared {
    names: Vec<String>,
    models: Vec<Arc<dyn Distribution>>,
    table: Option<TabulatedScore>,
}

fn prepare(cfg: &ExperimentConfig, kind: ExperimentKind) -> Result<Prepared> {
    if cfg.kind != kind {
        return Err(Error::config(format!("config is a {} experiment, not {kind}", cfg.kind)));
    }
    cfg.validate()?;
    let models = cfg.targets.iter().map(|t| cfg.target(t)).collect::<Result<Vec<_>>>()?;
    let table = match &cfg.score_table {
        Some(path) if cfg.methods.contains(&Method::SdKdeTable) => Some(
            TabulatedScore::from_path(path).map_err(|e| Error::config(format!("score table: {e}")))?,
        ),
        _ => None,
    };
    for (name, model) in cfg.targets.iter().zip(&models) {
        if let Some(t) = &table {
            if t.dim() != model.dim() {
                return Err(Error::config(format!("score table dimension does not match target `{name}`")));
            }
        }
    }
    Ok(Prepared {
        names: cfg.targets.clone(),
        models,
        table,
    })
}

fn cells(cfg: &ExperimentConfig) -> Vec<Cell> {
    let mut out = Vec::new();
    for target in 0..cfg.targets.len() {
        for &n in &cfg.ns {
            for &seed in &cfg.seeds {
                out.push(Cell { target, n, seed });
            }
        }
    }
    out
}

fn sample(p: &Prepared, c: &Cell) -> Result<PointSet> {
    let label = format!("data/{}/{}", p.names[c.target], c.n);
    p.models[c.target].sample(c.n, rng::derive_seed(c.seed, &label))
}

fn noise_seed(p: &Prepared, c: &Cell) -> u64 {
    rng::derive_seed(c.seed, &format!("noise/{}/{}", p.names[c.target], c.n))
}

fn grid_for(cfg: &ExperimentConfig, model: &dyn Distribution) -> Result<EvalGrid> {
    let count = cfg
        .grid_count
        .unwrap_or(if model.dim() == 1 { GRID_1D_NODES } else { GRID_2D_NODES });
    EvalGrid::uniform(&model.window(), count)
}

/// Fits `method` to `data`.
fn fit(
    cfg: &ExperimentConfig,
    p: &Prepared,
    c: &Cell,
    method: Method,
    data: &PointSet,
) -> Result<DensityEstimate> {
    let model = &p.models[c.target];
    let kernel = GaussianKernel::new(data.dim())?;
    let rule = &cfg.bandwidth;
    let params = || rule.sdkde_params(data.len(), data.dim(), data);
    match method {
        Method::Silverman => silverman_kde(data, rule),
        Method::SdKdeExact => sd_kde(data, &exact_score(model.clone()), &params()?, kernel),
        Method::SdKdeNoisy(sigma) => {
            let score = noisy_score(exact_score(model.clone()), sigma, noise_seed(p, c), cfg.noise_mode)?;
            sd_kde(data, &score, &params()?, kernel)
        }
        Method::EmpSdKde => emp_sd_kde(data, kernel, rule),
        Method::SdKdeTable => {
            let table: &dyn ScoreField = p.table.as_ref().ok_or_else(|| Error::config("no score table loaded"))?;
            sd_kde(data, table, &params()?, kernel)
        }
    }
}

fn elapsed_ms(cfg: &ExperimentConfig, start: Instant) -> Option<f64> {
    cfg.timing.then(|| start.elapsed().as_secs_f64() * 1e3)
}

fn record(cfg: &ExperimentConfig, p: &Prepared, c: &Cell, method: String, sigma: f64) -> ResultRecord {
    ResultRecord {
        experiment: cfg.kind,
        method,
        target: p.names[c.target].clone(),
        n: c.n,
        seed: c.seed,
        sigma,
        mise: 0.0,
        kl: None,
        wall_ms: None,
    }
}

fn per_cell_mise(cfg: &ExperimentConfig, kind: ExperimentKind) -> Result<Vec<ResultRecord>> {
    let p = prepare(cfg, kind)?;
    let grids = p.models.iter().map(|m| grid_for(cfg, m.as_ref())).collect::<Result<Vec<_>>>()?;
    let truths = p
        .models
        .iter()
        .zip(&grids)
        .map(|(m, g)| metrics::density_on_grid(m.as_ref(), g))
        .collect::<Result<Vec<_>>>()?;
    let per_cell: Vec<Vec<ResultRecord>> = cells(cfg)
        .par_iter()
        .map(|c| {
            let data = sample(&p, c)?;
            let grid = &grids[c.target];
            cfg.methods
                .iter()
                .map(|&m| {
                    let start = Instant::now();
                    let est = fit(cfg, &p, c, m, &data)?;
                    let values = est.evaluate_grid(grid)?;
                    let mise = metrics::integrated_squared_error(&values, &truths[c.target], grid)?;
                    let mut r = record(cfg, &p, c, m.to_string(), m.sigma());
                    r.mise = mise;
                    r.wall_ms = elapsed_ms(cfg, start);
                    Ok(r)
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(per_cell.into_iter().flatten().collect())
}

/// MISE of every configured method for every (target, n, seed).
pub fn run_scaling(cfg: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    per_cell_mise(cfg, ExperimentKind::Scaling)
}

/// Per-seed MISE of a candidate (first method) and a baseline (second
/// method), plus the candidate's win count at each (target, n).
pub fn run_winrate(cfg: &ExperimentConfig) -> Result<(Vec<ResultRecord>, Vec<WinSummary>)> {
    let records = per_cell_mise(cfg, ExperimentKind::Winrate)?;
    let (cand, base) = (cfg.methods[0].to_string(), cfg.methods[1].to_string());
    let mut summaries = Vec::new();
    for target in &cfg.targets {
        for &n in &cfg.ns {
            let pick = |m: &str| -> Vec<f64> {
                records
                    .iter()
                    .filter(|r| &r.target == target && r.n == n && r.method == m)
                    .map(|r| r.mise)
                    .collect()
            };
            summaries.push(WinSummary::new(target, n, &cand, pick(&cand), &base, pick(&base))?);
        }
    }
    Ok((records, summaries))
}

/// Silverman and SD-KDE on a 2D grid fitted to the sample, with MISE records
/// and density rasters.
pub fn run_grid2d(cfg: &ExperimentConfig) -> Result<(Vec<ResultRecord>, Vec<Raster>)> {
    let p = prepare(cfg, ExperimentKind::Grid2d)?;
    let sd_method = *cfg
        .methods
        .iter()
        .find(|m| **m != Method::Silverman)
        .expect("validated: one non-silverman method");
    let out: Vec<(Vec<ResultRecord>, Raster)> = cells(cfg)
        .par_iter()
        .map(|c| {
            let model = p.models[c.target].as_ref();
            let data = sample(&p, c)?;
            let t0 = Instant::now();
            let silverman = fit(cfg, &p, c, Method::Silverman, &data)?;
            let t_silverman = t0.elapsed();
            let t1 = Instant::now();
            let sdkde = fit(cfg, &p, c, sd_method, &data)?;
            let t_sdkde = t1.elapsed();
            let grid = EvalGrid::covering(model, &[&silverman, &sdkde], cfg.grid_count.unwrap_or(GRID_2D_NODES))?;
            let p_true = metrics::density_on_grid(model, &grid)?;
            let mut records = Vec::with_capacity(2);
            let mut fields = Vec::with_capacity(2);
            for (method, est, fit_time) in [
                (Method::Silverman, &silverman, t_silverman),
                (sd_method, &sdkde, t_sdkde),
            ] {
                let start = Instant::now();
                let values = est.evaluate_grid(&grid)?;
                let mut r = record(cfg, &p, c, method.to_string(), method.sigma());
                r.mise = metrics::integrated_squared_error(&values, &p_true, &grid)?;
                r.wall_ms = cfg
                    .timing
                    .then(|| (fit_time + start.elapsed()).as_secs_f64() * 1e3);
                records.push(r);
                fields.push(values);
            }
            let p_sdkde = fields.pop().expect("two fields");
            let p_silverman = fields.pop().expect("two fields");
            let raster = Raster {
                target: p.names[c.target].clone(),
                n: c.n,
                seed: c.seed,
                grid,
                p_true,
                p_silverman,
                p_sdkde,
            };
            Ok((records, raster))
        })
        .collect::<Result<_>>()?;
    let mut records = Vec::new();
    let mut rasters = Vec::new();
    for (r, raster) in out {
        records.extend(r);
        rasters.push(raster);
    }
    Ok((records, rasters))
}

/// Method label of iteration `k` of an iterated run; `k = 0` is the plain KDE.
pub fn iteration_label(k: usize) -> String {
    format!("iterated:{k}")
}

/// KL and MISE after each iteration of iterated SD-KDE, starting with the
/// plain KDE at the same bandwidth as iteration 0.
pub fn run_iterated(cfg: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    let p = prepare(cfg, ExperimentKind::Iterated)?;
    let grids = p.models.iter().map(|m| grid_for(cfg, m.as_ref())).collect::<Result<Vec<_>>>()?;
    let truths = p
        .models
        .iter()
        .zip(&grids)
        .map(|(m, g)| metrics::density_on_grid(m.as_ref(), g))
        .collect::<Result<Vec<_>>>()?;
    let per_cell: Vec<Vec<ResultRecord>> = cells(cfg)
        .par_iter()
        .map(|c| {
            let data = sample(&p, c)?;
            let grid = &grids[c.target];
            let truth = &truths[c.target];
            let kernel = GaussianKernel::new(data.dim())?;
            let score = |k: usize, est: DensityEstimate, start: Instant| -> Result<ResultRecord> {
                let values = est.evaluate_grid(grid)?;
                let mut r = record(cfg, &p, c, iteration_label(k), 0.0);
                r.mise = metrics::integrated_squared_error(&values, truth, grid)?;
                r.kl = Some(metrics::kl_from_values(truth, &values, grid)?);
                r.wall_ms = elapsed_ms(cfg, start);
                Ok(r)
            };
            let mut records = Vec::with_capacity(cfg.iterated.iters + 1);
            let start = Instant::now();
            records.push(score(0, kde(&data, cfg.iterated.bandwidth, kernel)?, start)?);
            let mut steps = IteratedSdKde::new(&data, &cfg.iterated, kernel)?;
            for k in 1..=cfg.iterated.iters {
                let start = Instant::now();
                let est = steps.next().expect("one estimate per iteration")?;
                records.push(score(k, est, start)?);
            }
            Ok(records)
        })
        .collect::<Result<_>>()?;
    Ok(per_cell.into_iter().flatten().collect())
}
