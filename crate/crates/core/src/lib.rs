//! Score-debiased kernel density estimation.
//!
//! Each sample is moved a small step along the score `grad log p` before the
//! usual kernel smoothing. With step `h^2/2` the leading `O(h^2)` smoothing
//! bias cancels and the estimate converges at `n^{-8/(d+8)}` instead of
//! `n^{-4/(d+4)}`.
//!
//! ```
//! use std::sync::Arc;
//! use sdkde::{distributions::{Distribution, GaussianMixture1D}, estimators, scores};
//!
//! let target = Arc::new(GaussianMixture1D::mixture1());
//! let data = target.sample(1000, 7).unwrap();
//! let params = estimators::optimal_params(data.len(), 1, &data).unwrap();
//! let score = scores::exact_score(target.clone());
//! let kernel = sdkde::kernels::GaussianKernel::new(1).unwrap();
//! let est = estimators::sd_kde(&data, &score, &params, kernel).unwrap();
//! assert!(est.evaluate(&[-2.0]) > 0.0);
//! ```

pub mod distributions;
pub mod error;
pub mod estimators;
pub mod kernels;
pub mod metrics;
pub mod points;
pub mod rng;
pub mod runner;
pub mod scores;
pub mod stats;

pub use error::{Error, Result};
pub use estimators::{DensityEstimate, SdkdeParams};
pub use metrics::EvalGrid;
pub use points::PointSet;
