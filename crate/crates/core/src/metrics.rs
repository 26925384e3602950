//! Error metrics on a regular grid, convergence slopes and seed aggregates.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::Distribution;
use crate::error::{Error, Result};
use crate::estimators::DensityEstimate;
use crate::kernels::Kernel;
use crate::stats;

/// Truth values below this contribute nothing to the KL integral.
pub const KL_TRUTH_FLOOR: f64 = 1e-12;

/// Default node count of a 1D evaluation grid.
pub const GRID_1D_NODES: usize = 2048;

/// Default node count per axis of a 2D evaluation grid.
pub const GRID_2D_NODES: usize = 256;

/// Padding, in units of the target's largest scale, added around the data
/// when a 2D grid is fitted to samples.
pub const DATA_PADDING_SCALES: f64 = 3.0;

/// Extra padding in kernel widths so no kernel bump is cut by the grid edge.
pub const KERNEL_PADDING_WIDTHS: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridAxis {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl GridAxis {
    pub fn new(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::input(format!("grid axis needs at least 2 nodes, got {count}")));
        }
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(Error::input(format!("invalid grid axis range [{lo}, {hi}]")));
        }
        Ok(GridAxis { lo, hi, count })
    }

    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / (self.count - 1) as f64
    }

    pub fn node(&self, k: usize) -> f64 {
        if k + 1 == self.count {
            self.hi
        } else {
            self.lo + k as f64 * self.spacing()
        }
    }

    fn weight(&self, k: usize) -> f64 {
        let h = self.spacing();
        if k == 0 || k + 1 == self.count {
            0.5 * h
        } else {
            h
        }
    }
}

/// Tensor-product grid with trapezoid weights. Nodes are numbered row-major,
/// axis 0 varying slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalGrid {
    axes: Vec<GridAxis>,
}

impl EvalGrid {
    pub fn new(axes: Vec<GridAxis>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::input("grid needs at least one axis"));
        }
        Ok(EvalGrid { axes })
    }

    /// Grid over the box `bounds` with `count` nodes per axis.
    pub fn uniform(bounds: &[(f64, f64)], count: usize) -> Result<Self> {
        let axes = bounds
            .iter()
            .map(|&(lo, hi)| GridAxis::new(lo, hi, count))
            .collect::<Result<Vec<_>>>()?;
        EvalGrid::new(axes)
    }

    /// Grid over the target's own window: 2048 nodes in 1D, 256 per axis
    /// otherwise.
    pub fn standard(model: &dyn Distribution) -> Result<Self> {
        let count = if model.dim() == 1 { GRID_1D_NODES } else { GRID_2D_NODES };
        EvalGrid::uniform(&model.window(), count)
    }

    /// Grid over the target window, widened to hold every estimate's points
    /// padded by three target scales plus the kernel reach.
    pub fn covering<K: Kernel>(
        model: &dyn Distribution,
        estimates: &[&DensityEstimate<K>],
        count: usize,
    ) -> Result<Self> {
        let mut bounds = model.window();
        for est in estimates {
            if est.dim() != model.dim() {
                return Err(Error::input("estimate and target dimensions differ"));
            }
            let pad = DATA_PADDING_SCALES * model.max_scale() + KERNEL_PADDING_WIDTHS * est.kernel_reach();
            for (b, (lo, hi)) in bounds.iter_mut().zip(est.points().bounds()) {
                b.0 = b.0.min(lo - pad);
                b.1 = b.1.max(hi + pad);
            }
        }
        EvalGrid::uniform(&bounds, count)
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[GridAxis] {
        &self.axes
    }

    pub fn spacing(&self) -> Vec<f64> {
        self.axes.iter().map(GridAxis::spacing).collect()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Writes the coordinates of node `i` into `out`.
    pub fn node_into(&self, mut i: usize, out: &mut [f64]) {
        for (j, axis) in self.axes.iter().enumerate().rev() {
            out[j] = axis.node(i % axis.count);
            i /= axis.count;
        }
    }

    pub fn node(&self, i: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.node_into(i, &mut out);
        out
    }

    /// Quadrature weight of node `i`.
    pub fn weight(&self, mut i: usize) -> f64 {
        let mut w = 1.0;
        for axis in self.axes.iter().rev() {
            w *= axis.weight(i % axis.count);
            i /= axis.count;
        }
        w
    }

    /// Trapezoid rule applied to `values` given in node order.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        assert_eq!(values.len(), self.len(), "one value per grid node expected");
        values.iter().enumerate().map(|(i, v)| self.weight(i) * v).sum()
    }

    /// The same box with twice the nodes per axis, less one.
    pub fn refined(&self) -> Self {
        EvalGrid {
            axes: self
                .axes
                .iter()
                .map(|a| GridAxis {
                    count: 2 * a.count - 1,
                    ..*a
                })
                .collect(),
        }
    }
}

/// True density at every grid node.
pub fn density_on_grid(model: &dyn Distribution, grid: &EvalGrid) -> Result<Vec<f64>> {
    check_dims(model.dim(), grid.dim())?;
    (0..grid.len())
        .into_par_iter()
        .map_init(|| vec![0.0; grid.dim()], |buf, i| {
            grid.node_into(i, buf);
            model.pdf(buf)
        })
        .collect()
}

fn check_dims(a: usize, b: usize) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::input(format!("dimension mismatch: {a} vs grid {b}")))
    }
}

fn check_lengths(grid: &EvalGrid, a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != grid.len() || b.len() != grid.len() {
        return Err(Error::input(format!(
            "expected {} values per field, got {} and {}",
            grid.len(),
            a.len(),
            b.len()
        )));
    }
    Ok(())
}

/// `integral (estimate - truth)^2` from node values.
pub fn integrated_squared_error(estimate: &[f64], truth: &[f64], grid: &EvalGrid) -> Result<f64> {
    check_lengths(grid, estimate, truth)?;
    let sq: Vec<f64> = estimate.iter().zip(truth).map(|(e, t)| (e - t) * (e - t)).collect();
    Ok(grid.integrate(&sq))
}

/// Integrated squared error of one fitted estimate against the truth.
pub fn mise<K: Kernel>(estimate: &DensityEstimate<K>, truth: &dyn Distribution, grid: &EvalGrid) -> Result<f64> {
    check_dims(estimate.dim(), grid.dim())?;
    let p = density_on_grid(truth, grid)?;
    integrated_squared_error(&estimate.evaluate_grid(grid)?, &p, grid)
}

/// `integral truth * ln(truth / estimate)` from node values. Round-off can
/// leave the sum a hair below zero; it is clamped to 0.
pub fn kl_from_values(truth: &[f64], estimate: &[f64], grid: &EvalGrid) -> Result<f64> {
    check_lengths(grid, truth, estimate)?;
    let mut terms = Vec::with_capacity(truth.len());
    for (i, (&p, &q)) in truth.iter().zip(estimate).enumerate() {
        if p < KL_TRUTH_FLOOR {
            terms.push(0.0);
        } else if q > 0.0 {
            terms.push(p * (p / q).ln());
        } else {
            return Err(Error::Divergence(format!("at node {:?}", grid.node(i))));
        }
    }
    Ok(grid.integrate(&terms).max(0.0))
}

/// KL divergence from the truth to a fitted estimate.
pub fn kl_divergence<K: Kernel>(truth: &dyn Distribution, estimate: &DensityEstimate<K>, grid: &EvalGrid) -> Result<f64> {
    check_dims(estimate.dim(), grid.dim())?;
    let p = density_on_grid(truth, grid)?;
    kl_from_values(&p, &estimate.evaluate_grid(grid)?, grid)
}

/// Least-squares line through `(log10 n, log10 error)`; returns
/// `(slope, intercept)`.
pub fn loglog_slope(ns: &[usize], errors: &[f64]) -> Result<(f64, f64)> {
    if ns.len() != errors.len() || ns.len() < 2 {
        return Err(Error::input("loglog_slope needs two equal-length lists of length >= 2"));
    }
    if ns.contains(&0) || errors.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
        return Err(Error::input("loglog_slope needs positive counts and errors"));
    }
    let x: Vec<f64> = ns.iter().map(|&n| (n as f64).log10()).collect();
    let y: Vec<f64> = errors.iter().map(|e| e.log10()).collect();
    let mx = stats::mean(&x);
    let my = stats::mean(&y);
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::input("loglog_slope needs at least two distinct counts"));
    }
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Fraction of matched entries where `a` is strictly below `b`.
pub fn win_rate(a: &[f64], b: &[f64]) -> Result<f64> {
    Ok(win_count(a, b)? as f64 / a.len() as f64)
}

fn win_count(a: &[f64], b: &[f64]) -> Result<usize> {
    if a.len() != b.len() {
        return Err(Error::input(format!("win_rate: {} values vs {}", a.len(), b.len())));
    }
    if a.is_empty() {
        return Err(Error::input("win_rate needs at least one pair"));
    }
    Ok(a.iter().zip(b).filter(|(x, y)| x < y).count())
}

/// Seed aggregate of one metric, optionally compared against a baseline.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricSummary {
    pub mean: f64,
    pub std: f64,
    pub values: Vec<f64>,
    pub baseline: Option<String>,
    pub wins: Option<usize>,
}

impl MetricSummary {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::input("summary of an empty value list"));
        }
        let std = if values.len() > 1 { stats::sample_std(&values) } else { 0.0 };
        Ok(MetricSummary {
            mean: stats::mean(&values),
            std,
            values,
            baseline: None,
            wins: None,
        })
    }

    /// Records how many entries beat the matched `baseline` values.
    pub fn against(mut self, name: impl Into<String>, baseline: &[f64]) -> Result<Self> {
        self.wins = Some(win_count(&self.values, baseline)?);
        self.baseline = Some(name.into());
        Ok(self)
    }

    pub fn win_rate(&self) -> Option<f64> {
        self.wins.map(|w| w as f64 / self.values.len() as f64)
    }
}
