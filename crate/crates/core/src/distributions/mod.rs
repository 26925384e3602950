//! Ground-truth target densities with exact pdf, exact score and seeded sampling.

mod gaussian;
mod laplace;
mod mog2d;
mod presets;
mod spiral;

pub use gaussian::GaussianMixture1D;
pub use laplace::LaplaceMixture1D;
pub use mog2d::{GaussianComponent2D, GaussianMixture2D};
pub use presets::{preset, preset_names, PresetInfo};
pub use spiral::Spiral2D;

use std::fmt::Debug;

use crate::error::Result;
use crate::points::PointSet;

/// A target distribution with a closed-form (or quadrature) density.
///
/// Implementations are immutable; sampling takes the seed as an argument.
pub trait Distribution: Debug + Send + Sync {
    fn dim(&self) -> usize;

    /// Density at `x`. Fails on non-finite input.
    fn pdf(&self, x: &[f64]) -> Result<f64>;

    /// Gradient of the log-density at `x`.
    fn score(&self, x: &[f64]) -> Result<Vec<f64>>;

    /// Draws `n` points from the sub-stream `"sample"` of `seed`.
    fn sample(&self, n: usize, seed: u64) -> Result<PointSet>;

    /// Largest per-component standard deviation; sets the window padding.
    fn max_scale(&self) -> f64;

    /// Per-axis bounds of the standard evaluation window.
    fn window(&self) -> Vec<(f64, f64)>;

    /// Cumulative distribution function, for one-dimensional targets.
    fn cdf(&self, _x: f64) -> Option<f64> {
        None
    }
}

/// Width of the 1D standard window beyond the outermost component centre,
/// in units of [`Distribution::max_scale`].
pub const WINDOW_SCALES: f64 = 5.0;

pub(crate) fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

pub(crate) fn check_sample_size(n: usize) -> Result<()> {
    if n == 0 {
        Err(crate::error::Error::input("sample size must be at least 1"))
    } else {
        Ok(())
    }
}

fn check_dim(x: &[f64], dim: usize) -> Result<()> {
    if x.len() != dim {
        return Err(crate::error::Error::input(format!(
            "expected a {dim}-vector, got length {}",
            x.len()
        )));
    }
    crate::error::ensure_finite(x)
}

fn check_weight(weight: f64) -> Result<()> {
    if weight > 0.0 && weight < 1.0 {
        Ok(())
    } else {
        Err(crate::error::Error::input(format!(
            "mixture weight must lie in (0, 1), got {weight}"
        )))
    }
}

fn check_scale(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(crate::error::Error::input(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

fn check_location(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(crate::error::Error::input(format!("{name} must be finite")))
    }
}
