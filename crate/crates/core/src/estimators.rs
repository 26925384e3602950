//! Kernel density estimators: Silverman KDE, score-debiased KDE (SD-KDE),
//! SD-KDE driven by an empirical score, and the iterated variant.
//!
//! SD-KDE moves every sample one step along a score field,
//! `x_i <- x_i + delta * s(x_i)`, and then smooths the moved samples with a
//! kernel of bandwidth `h`. With `delta = h^2 / 2` the `O(h^2)` smoothing bias
//! of the kernel is cancelled by the contraction of the moved samples, leaving
//! an `O(h^4)` bias and an AMISE-optimal bandwidth of order `n^{-1/(d+8)}`.
//!
//! For `d >= 2` every estimator standardizes each axis to unit sample variance
//! before smoothing with a scalar bandwidth, and maps the estimate back with
//! the Jacobian of the scaling.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{GaussianKernel, Kernel};
use crate::metrics::EvalGrid;
use crate::points::PointSet;
use crate::scores::{EmpiricalScore, ScoreField};
use crate::stats;

/// Constant of the classic rule of thumb `0.9 min(sd, IQR/1.34) n^{-1/5}`.
pub const SILVERMAN_CONSTANT: f64 = 0.9;

/// Default constant in front of `min(sd, IQR/1.34) n^{-1/(d+8)}` for SD-KDE.
///
/// Only the exponent of the optimal SD-KDE bandwidth is known in closed form.
/// Reusing 0.9 over-smooths badly at the `n^{-1/(d+8)}` rate (a mixture
/// component narrower than the overall spread is flattened by the step),
/// so the default is half of it.
pub const SDKDE_CONSTANT: f64 = 0.45;

/// Denominator turning an interquartile range into a normal-equivalent scale.
const IQR_TO_SD: f64 = 1.34;

/// Data-driven bandwidth constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BandwidthRule {
    pub silverman_constant: f64,
    pub sdkde_constant: f64,
}

impl Default for BandwidthRule {
    fn default() -> Self {
        BandwidthRule {
            silverman_constant: SILVERMAN_CONSTANT,
            sdkde_constant: SDKDE_CONSTANT,
        }
    }
}

impl BandwidthRule {
    /// Silverman bandwidth, `c * min(sd, IQR/1.34) * n^{-1/(d+4)}`.
    pub fn silverman(&self, data: &PointSet) -> Result<f64> {
        check_constant(self.silverman_constant)?;
        if data.len() < 2 {
            return Err(Error::input("Silverman bandwidth needs at least 2 points"));
        }
        let d = data.dim() as f64;
        Ok(self.silverman_constant * spread(data)? * (data.len() as f64).powf(-1.0 / (d + 4.0)))
    }

    /// SD-KDE bandwidth `c * min(sd, IQR/1.34) * n^{-1/(d+8)}` and step `h^2/2`.
    ///
    /// `n` is passed separately from `data` so the rate can be probed with
    /// the data-driven prefactor held fixed.
    pub fn sdkde_params(&self, n: usize, dim: usize, data: &PointSet) -> Result<SdkdeParams> {
        check_constant(self.sdkde_constant)?;
        if n < 2 || data.len() < 2 {
            return Err(Error::input("SD-KDE parameters need at least 2 points"));
        }
        if dim != data.dim() {
            return Err(Error::input(format!(
                "dimension {dim} does not match data dimension {}",
                data.dim()
            )));
        }
        let prefactor = self.sdkde_constant * spread(data)?;
        let h = prefactor * (n as f64).powf(-1.0 / (dim as f64 + 8.0));
        Ok(SdkdeParams {
            h,
            delta: 0.5 * h * h,
            prefactor,
        })
    }
}

fn check_constant(c: f64) -> Result<()> {
    if c > 0.0 && c.is_finite() {
        Ok(())
    } else {
        Err(Error::input(format!("bandwidth constant must be positive, got {c}")))
    }
}

/// `min(sd, IQR/1.34)`; for `d >= 2` the per-axis ratio to `sd` (the scale
/// after standardization), combined by geometric mean.
fn spread(data: &PointSet) -> Result<f64> {
    let axis = |values: &[f64]| -> Result<(f64, f64)> {
        let sd = stats::sample_std(values);
        let iqr = stats::interquartile_range(values) / IQR_TO_SD;
        if sd == 0.0 {
            return Err(Error::DegenerateData(
                "all points coincide along an axis (zero spread)".into(),
            ));
        }
        // A zero IQR with positive spread (heavy ties) falls back to sd.
        Ok((sd, if iqr > 0.0 { iqr } else { sd }))
    };
    if data.dim() == 1 {
        let (sd, iqr) = axis(data.coords())?;
        return Ok(sd.min(iqr));
    }
    let mut log_sum = 0.0;
    for j in 0..data.dim() {
        let (sd, iqr) = axis(&data.column(j))?;
        log_sum += (iqr / sd).min(1.0).ln();
    }
    Ok((log_sum / data.dim() as f64).exp())
}

/// Silverman's rule-of-thumb bandwidth with the default constant 0.9.
pub fn silverman_bandwidth(data: &PointSet) -> Result<f64> {
    BandwidthRule::default().silverman(data)
}

/// Bandwidth and step size for SD-KDE with the default constant.
pub fn optimal_params(n: usize, dim: usize, data: &PointSet) -> Result<SdkdeParams> {
    BandwidthRule::default().sdkde_params(n, dim, data)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdkdeParams {
    pub h: f64,
    pub delta: f64,
    /// Data-driven factor in front of `n^{-1/(d+8)}`.
    pub prefactor: f64,
}

impl SdkdeParams {
    /// Explicit bandwidth and step; `prefactor` is left as `h`.
    pub fn new(h: f64, delta: f64) -> Result<Self> {
        check_bandwidth(h)?;
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(Error::input(format!("step size must be >= 0, got {delta}")));
        }
        Ok(SdkdeParams {
            h,
            delta,
            prefactor: h,
        })
    }

    /// Bandwidth `h` with the bias-cancelling step `h^2 / 2`.
    pub fn debiased(h: f64) -> Result<Self> {
        SdkdeParams::new(h, 0.5 * h * h)
    }
}

fn check_bandwidth(h: f64) -> Result<()> {
    if h > 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(Error::input(format!("bandwidth must be positive, got {h}")))
    }
}

/// A fitted kernel density estimate.
///
/// Sums run over the points in ascending order of their (standardized) first
/// coordinate, so evaluation is bit-reproducible.
#[derive(Debug, Clone)]
pub struct DensityEstimate<K: Kernel = GaussianKernel> {
    points: PointSet,
    bandwidth: f64,
    kernel: K,
    scale: Option<Vec<f64>>,
    sorted: Vec<f64>,
    keys: Vec<f64>,
    norm: f64,
}

impl<K: Kernel> DensityEstimate<K> {
    fn build(points: PointSet, bandwidth: f64, kernel: K, scale: Option<Vec<f64>>) -> Result<Self> {
        check_bandwidth(bandwidth)?;
        if points.is_empty() {
            return Err(Error::input("density estimate needs at least one point"));
        }
        if kernel.dim() != points.dim() {
            return Err(Error::input(format!(
                "kernel dimension {} does not match data dimension {}",
                kernel.dim(),
                points.dim()
            )));
        }
        let d = points.dim();
        let mut standardized: Vec<&[f64]> = points.iter().collect();
        standardized.sort_by(|a, b| {
            let (a0, b0) = match &scale {
                Some(s) => (a[0] / s[0], b[0] / s[0]),
                None => (a[0], b[0]),
            };
            a0.total_cmp(&b0)
        });
        let mut sorted = Vec::with_capacity(points.coords().len());
        for p in standardized {
            match &scale {
                Some(s) => sorted.extend(p.iter().zip(s).map(|(v, s)| v / s)),
                None => sorted.extend_from_slice(p),
            }
        }
        let keys = sorted.iter().step_by(d).copied().collect();
        let jacobian: f64 = scale.as_ref().map_or(1.0, |s| s.iter().product());
        let norm = 1.0 / (points.len() as f64 * bandwidth.powi(d as i32) * jacobian);
        Ok(DensityEstimate {
            points,
            bandwidth,
            kernel,
            scale,
            sorted,
            keys,
            norm,
        })
    }

    /// The (possibly shifted) points the kernels are centred on, in input order.
    pub fn points(&self) -> &PointSet {
        &self.points
    }

    /// Bandwidth in standardized units (raw units when `d = 1`).
    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn kernel(&self) -> &K {
        &self.kernel
    }

    /// Per-axis standardization scale, present when `d >= 2`.
    pub fn scale(&self) -> Option<&[f64]> {
        self.scale.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.points.dim()
    }

    /// Largest kernel width along any axis, in raw units.
    pub fn kernel_reach(&self) -> f64 {
        let s = self
            .scale
            .as_ref()
            .map_or(1.0, |s| s.iter().copied().fold(0.0, f64::max));
        self.bandwidth * s
    }

    fn standardize(&self, x: &[f64], z: &mut [f64]) {
        match &self.scale {
            Some(s) => z.iter_mut().zip(x).zip(s).for_each(|((z, x), s)| *z = x / s),
            None => z.copy_from_slice(x),
        }
    }

    /// Range of sorted points within the kernel cutoff of `z` along axis 0.
    fn window(&self, z0: f64) -> std::ops::Range<usize> {
        let reach = self.kernel.cutoff() * self.bandwidth;
        let lo = self.keys.partition_point(|&k| k < z0 - reach);
        let hi = self.keys.partition_point(|&k| k <= z0 + reach);
        lo..hi.max(lo)
    }

    /// Visits `(point index in sorted order, u = (z - z_i)/h, |u|^2)` for
    /// every point inside the cutoff.
    fn for_each_neighbour(&self, x: &[f64], mut f: impl FnMut(usize, &[f64], f64)) {
        let d = self.dim();
        let mut z = vec![0.0; d];
        self.standardize(x, &mut z);
        let inv_h = 1.0 / self.bandwidth;
        let cutoff2 = self.kernel.cutoff() * self.kernel.cutoff();
        let mut u = vec![0.0; d];
        for i in self.window(z[0]) {
            let p = &self.sorted[i * d..(i + 1) * d];
            let mut r2 = 0.0;
            for j in 0..d {
                u[j] = (z[j] - p[j]) * inv_h;
                r2 += u[j] * u[j];
            }
            if r2 <= cutoff2 {
                f(i, &u, r2);
            }
        }
    }

    /// `p(x) = 1/(n h^d) sum_i K((x - x_i)/h)`.
    ///
    /// Terms beyond the kernel cutoff are skipped unless all of them are.
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.dim(), "evaluation point has wrong dimension");
        if self.dim() == 1 {
            return self.evaluate_1d(x[0]);
        }
        let mut acc = 0.0;
        self.for_each_neighbour(x, |_, _, r2| acc += self.kernel.eval_radial(r2));
        if acc == 0.0 {
            acc = self.untruncated_sum(x);
        }
        acc * self.norm
    }

    /// Kernel sum over every point, ignoring the cutoff. Used where all
    /// truncated terms vanish, so the estimate stays positive off the data.
    fn untruncated_sum(&self, x: &[f64]) -> f64 {
        let d = self.dim();
        let mut z = vec![0.0; d];
        self.standardize(x, &mut z);
        let inv_h = 1.0 / self.bandwidth;
        self.sorted
            .chunks_exact(d)
            .map(|p| {
                let r2: f64 = p.iter().zip(&z).map(|(p, z)| ((z - p) * inv_h).powi(2)).sum();
                self.kernel.eval_radial(r2)
            })
            .sum()
    }

    fn evaluate_1d(&self, x: f64) -> f64 {
        let inv_h = 1.0 / self.bandwidth;
        let cutoff2 = self.kernel.cutoff() * self.kernel.cutoff();
        let mut acc = 0.0;
        for &p in &self.sorted[self.window(x)] {
            let u = (x - p) * inv_h;
            let r2 = u * u;
            if r2 <= cutoff2 {
                acc += self.kernel.eval_radial(r2);
            }
        }
        if acc == 0.0 {
            acc = self.untruncated_sum(&[x]);
        }
        acc * self.norm
    }

    /// Evaluates at every grid node, in the grid's node order.
    pub fn evaluate_grid(&self, grid: &EvalGrid) -> Result<Vec<f64>> {
        if grid.dim() != self.dim() {
            return Err(Error::input(format!(
                "grid dimension {} does not match estimate dimension {}",
                grid.dim(),
                self.dim()
            )));
        }
        Ok((0..grid.len())
            .into_par_iter()
            .map_init(
                || vec![0.0; grid.dim()],
                |buf, i| {
                    grid.node_into(i, buf);
                    self.evaluate(buf)
                },
            )
            .collect())
    }

    /// Gradient of the estimate with respect to `x`.
    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let d = self.dim();
        let mut g = vec![0.0; d];
        self.for_each_neighbour(x, |_, u, r2| {
            let w = 2.0 * self.kernel.radial_derivative(r2);
            for j in 0..d {
                g[j] += w * u[j];
            }
        });
        let inv_h = 1.0 / self.bandwidth;
        for j in 0..d {
            let s = self.scale.as_ref().map_or(1.0, |s| s[j]);
            g[j] *= self.norm * inv_h / s;
        }
        g
    }

    /// Gradient of the log-estimate, `grad p / p`.
    ///
    /// Where every kernel term underflows, returns the score of the nearest
    /// point's kernel alone.
    pub fn score(&self, x: &[f64]) -> Vec<f64> {
        let d = self.dim();
        let mut num = vec![0.0; d];
        let mut den = 0.0;
        self.for_each_neighbour(x, |_, u, r2| {
            let w = 2.0 * self.kernel.radial_derivative(r2);
            den += self.kernel.eval_radial(r2);
            for j in 0..d {
                num[j] += w * u[j];
            }
        });
        let inv_h = 1.0 / self.bandwidth;
        if den > 0.0 {
            for j in 0..d {
                let s = self.scale.as_ref().map_or(1.0, |s| s[j]);
                num[j] = num[j] / den * inv_h / s;
            }
            return num;
        }
        self.nearest_kernel_score(x)
    }

    fn nearest_kernel_score(&self, x: &[f64]) -> Vec<f64> {
        let d = self.dim();
        let mut z = vec![0.0; d];
        self.standardize(x, &mut z);
        let nearest = self
            .sorted
            .chunks_exact(d)
            .min_by(|a, b| {
                let da: f64 = a.iter().zip(&z).map(|(p, z)| (p - z) * (p - z)).sum();
                let db: f64 = b.iter().zip(&z).map(|(p, z)| (p - z) * (p - z)).sum();
                da.total_cmp(&db)
            })
            .expect("estimate has at least one point");
        let h2 = self.bandwidth * self.bandwidth;
        (0..d)
            .map(|j| {
                let s = self.scale.as_ref().map_or(1.0, |s| s[j]);
                (nearest[j] - z[j]) / h2 / s
            })
            .collect()
    }
}

/// Per-axis sample standard deviation used to standardize `d >= 2` data.
fn standardization(data: &PointSet) -> Result<Option<Vec<f64>>> {
    if data.dim() == 1 {
        return Ok(None);
    }
    let scale: Vec<f64> = (0..data.dim())
        .map(|j| stats::sample_std(&data.column(j)))
        .collect();
    if scale.iter().any(|s| !(*s > 0.0)) {
        return Err(Error::DegenerateData(
            "cannot standardize an axis with zero spread".into(),
        ));
    }
    Ok(Some(scale))
}

/// Plain KDE with bandwidth `h`.
pub fn kde<K: Kernel>(data: &PointSet, h: f64, kernel: K) -> Result<DensityEstimate<K>> {
    check_bandwidth(h)?;
    let scale = standardization(data)?;
    DensityEstimate::build(data.clone(), h, kernel, scale)
}

/// KDE with the Gaussian kernel of matching dimension.
pub fn gaussian_kde(data: &PointSet, h: f64) -> Result<DensityEstimate> {
    kde(data, h, GaussianKernel::new(data.dim())?)
}

/// Silverman KDE: Gaussian KDE at [`silverman_bandwidth`].
pub fn silverman_kde(data: &PointSet, rule: &BandwidthRule) -> Result<DensityEstimate> {
    gaussian_kde(data, rule.silverman(data)?)
}

/// Moves each point one step along `score`. With standardization the step is
/// taken in standardized coordinates, i.e. `x + delta * scale^2 * s(x)`.
fn shift_points(
    data: &PointSet,
    score: &dyn ScoreField,
    delta: f64,
    scale: Option<&[f64]>,
) -> Result<PointSet> {
    if score.dim() != data.dim() {
        return Err(Error::input(format!(
            "score dimension {} does not match data dimension {}",
            score.dim(),
            data.dim()
        )));
    }
    let d = data.dim();
    let mut coords = Vec::with_capacity(data.coords().len());
    for (i, x) in data.iter().enumerate() {
        let s = score.eval_at_point(i, x)?;
        if s.len() != d || s.iter().any(|v| !v.is_finite()) {
            return Err(Error::Shift { index: i });
        }
        for j in 0..d {
            let factor = scale.map_or(1.0, |sc| sc[j] * sc[j]);
            coords.push(x[j] + delta * factor * s[j]);
        }
    }
    PointSet::new(d, coords)
}

/// Score-debiased KDE: shift every point by `delta * score(x_i)`, then
/// smooth the shifted points with bandwidth `h`.
pub fn sd_kde<K: Kernel>(
    data: &PointSet,
    score: &dyn ScoreField,
    params: &SdkdeParams,
    kernel: K,
) -> Result<DensityEstimate<K>> {
    check_bandwidth(params.h)?;
    let scale = standardization(data)?;
    let shifted = shift_points(data, score, params.delta, scale.as_deref())?;
    DensityEstimate::build(shifted, params.h, kernel, scale)
}

/// SD-KDE whose score is the log-gradient of a Silverman pilot KDE.
pub fn emp_sd_kde<K: Kernel>(
    data: &PointSet,
    kernel: K,
    rule: &BandwidthRule,
) -> Result<DensityEstimate<K>> {
    if data.len() < 2 {
        return Err(Error::input("empirical SD-KDE needs at least 2 points"));
    }
    let pilot = silverman_kde(data, rule)?;
    let score = EmpiricalScore::new(pilot);
    let params = rule.sdkde_params(data.len(), data.dim(), data)?;
    sd_kde(data, &score, &params, kernel)
}

/// How the step size shrinks across iterations of [`iterated_sd_kde`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepDecay {
    /// `delta_k = delta0 * decay^(k-1)`.
    Multiplicative,
    /// Each iteration removes the fraction `decay` of the previous step:
    /// `delta_k = delta0 * (1 - decay)^(k-1)`.
    #[default]
    Subtractive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IteratedConfig {
    pub bandwidth: f64,
    pub delta0: f64,
    pub decay: f64,
    pub iters: usize,
    pub decay_mode: StepDecay,
}

impl Default for IteratedConfig {
    fn default() -> Self {
        IteratedConfig {
            bandwidth: 0.15,
            delta0: 0.015,
            decay: 0.15,
            iters: 4,
            decay_mode: StepDecay::Subtractive,
        }
    }
}

impl IteratedConfig {
    pub fn validate(&self) -> Result<()> {
        check_bandwidth(self.bandwidth)?;
        if self.iters == 0 {
            return Err(Error::input("iterated SD-KDE needs at least one iteration"));
        }
        if !(self.delta0 >= 0.0 && self.delta0.is_finite()) {
            return Err(Error::input("initial step must be >= 0"));
        }
        if !(self.decay > 0.0 && self.decay.is_finite()) {
            return Err(Error::input("decay must be positive"));
        }
        if self.decay_mode == StepDecay::Subtractive && self.decay >= 1.0 {
            return Err(Error::input("subtractive decay must be below 1"));
        }
        Ok(())
    }

    /// Step size of iteration `k` (1-based).
    pub fn step(&self, k: usize) -> f64 {
        let e = (k - 1) as i32;
        match self.decay_mode {
            StepDecay::Multiplicative => self.delta0 * self.decay.powi(e),
            StepDecay::Subtractive => self.delta0 * (1.0 - self.decay).powi(e),
        }
    }
}

/// Repeated SD-KDE at a fixed bandwidth. Each iteration takes the empirical
/// score of the KDE of the current surrogate points, moves the surrogates one
/// step along it and yields the KDE of the moved surrogates.
#[derive(Debug, Clone)]
pub struct IteratedSdKde<K: Kernel> {
    surrogate: PointSet,
    config: IteratedConfig,
    kernel: K,
    done: usize,
}

impl<K: Kernel> IteratedSdKde<K> {
    pub fn new(data: &PointSet, config: &IteratedConfig, kernel: K) -> Result<Self> {
        config.validate()?;
        Ok(IteratedSdKde {
            surrogate: data.clone(),
            config: *config,
            kernel,
            done: 0,
        })
    }

    fn advance(&mut self) -> Result<DensityEstimate<K>> {
        let k = self.done + 1;
        let current = kde(&self.surrogate, self.config.bandwidth, self.kernel.clone())?;
        let scale = current.scale.clone();
        let score = EmpiricalScore::new(current);
        self.surrogate = shift_points(&self.surrogate, &score, self.config.step(k), scale.as_deref())?;
        self.done = k;
        kde(&self.surrogate, self.config.bandwidth, self.kernel.clone())
    }
}

impl<K: Kernel> Iterator for IteratedSdKde<K> {
    type Item = Result<DensityEstimate<K>>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done >= self.config.iters {
            return None;
        }
        let out = self.advance();
        if out.is_err() {
            self.done = self.config.iters;
        }
        Some(out)
    }
}

/// Runs every iteration of [`IteratedSdKde`] and collects the estimates.
pub fn iterated_sd_kde<K: Kernel>(
    data: &PointSet,
    config: &IteratedConfig,
    kernel: K,
) -> Result<Vec<DensityEstimate<K>>> {
    IteratedSdKde::new(data, config, kernel)?.collect()
}
