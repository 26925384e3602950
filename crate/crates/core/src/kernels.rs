//! Smoothing kernels: symmetric, zero mean, identity covariance.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// A radially symmetric smoothing kernel on R^d.
///
/// Kernels are written in terms of the squared radius `r2 = |u|^2`, which is
/// what the density estimators compute anyway.
pub trait Kernel: Clone + Send + Sync + std::fmt::Debug {
    fn dim(&self) -> usize;

    /// `K(u)` for `|u|^2 = r2`.
    fn eval_radial(&self, r2: f64) -> f64;

    /// `dK/d(r2)`, so that `grad K(u) = 2 u dK/d(r2)`.
    fn radial_derivative(&self, r2: f64) -> f64;

    /// Radius beyond which `K` is treated as exactly zero.
    fn cutoff(&self) -> f64;

    fn eval(&self, u: &[f64]) -> f64 {
        self.eval_radial(u.iter().map(|v| v * v).sum())
    }
}

/// Gaussian kernel `(2 pi)^{-d/2} exp(-|u|^2 / 2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianKernel {
    dim: usize,
    norm: f64,
}

/// Truncation radius of the Gaussian kernel. `exp(-9^2 / 2) < 3e-18`, far
/// below the rounding error of any sum the estimators form.
pub const GAUSSIAN_CUTOFF: f64 = 9.0;

impl GaussianKernel {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::input("kernel dimension must be at least 1"));
        }
        Ok(GaussianKernel {
            dim,
            norm: (2.0 * PI).powf(-(dim as f64) / 2.0),
        })
    }

    /// Normalizing constant `(2 pi)^{-d/2}`.
    pub fn norm(&self) -> f64 {
        self.norm
    }
}

pub fn gaussian_kernel(dim: usize) -> Result<GaussianKernel> {
    GaussianKernel::new(dim)
}

impl Kernel for GaussianKernel {
    fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    fn eval_radial(&self, r2: f64) -> f64 {
        self.norm * (-0.5 * r2).exp()
    }

    #[inline]
    fn radial_derivative(&self, r2: f64) -> f64 {
        -0.5 * self.eval_radial(r2)
    }

    fn cutoff(&self) -> f64 {
        GAUSSIAN_CUTOFF
    }
}
