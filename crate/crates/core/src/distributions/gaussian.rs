use rand::Rng;
use rand_distr::StandardNormal;
use statrs::function::erf::erfc;

use super::{check_dim, check_location, check_sample_size, check_scale, check_weight, log_sum_exp};
use super::{Distribution, WINDOW_SCALES};
use crate::error::{Error, Result};
use crate::points::PointSet;
use crate::rng;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_7;

/// Two-component univariate Gaussian mixture
/// `weight * N(mu1, sigma1^2) + (1 - weight) * N(mu2, sigma2^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianMixture1D {
    pub weight: f64,
    pub mu1: f64,
    pub sigma1: f64,
    pub mu2: f64,
    pub sigma2: f64,
}

impl GaussianMixture1D {
    pub fn new(weight: f64, mu1: f64, sigma1: f64, mu2: f64, sigma2: f64) -> Result<Self> {
        check_weight(weight)?;
        check_location("mu1", mu1)?;
        check_location("mu2", mu2)?;
        check_scale("sigma1", sigma1)?;
        check_scale("sigma2", sigma2)?;
        Ok(GaussianMixture1D {
            weight,
            mu1,
            sigma1,
            mu2,
            sigma2,
        })
    }

    /// Standard normal written as a degenerate mixture.
    pub fn standard_normal() -> Self {
        GaussianMixture1D::new(0.5, 0.0, 1.0, 0.0, 1.0).unwrap()
    }

    pub fn mixture1() -> Self {
        GaussianMixture1D::new(0.4, -2.0, 0.5, 2.0, 1.0).unwrap()
    }

    pub fn mixture2() -> Self {
        GaussianMixture1D::new(0.3, -2.0, 0.4, 4.0, 1.5).unwrap()
    }

    pub fn mixture3() -> Self {
        GaussianMixture1D::new(0.5, 0.0, 0.4, 1.5, 1.5).unwrap()
    }

    /// Bimodal target of the iterated-correction experiment.
    pub fn iterated_target() -> Self {
        GaussianMixture1D::new(0.7, -0.5, 0.2, 0.5, 0.3).unwrap()
    }

    pub fn mean(&self) -> f64 {
        self.weight * self.mu1 + (1.0 - self.weight) * self.mu2
    }

    fn components(&self) -> [(f64, f64, f64); 2] {
        [
            (self.weight, self.mu1, self.sigma1),
            (1.0 - self.weight, self.mu2, self.sigma2),
        ]
    }

    fn log_terms(&self, x: f64) -> [f64; 2] {
        self.components().map(|(w, mu, s)| {
            let z = (x - mu) / s;
            w.ln() - s.ln() - LN_SQRT_2PI - 0.5 * z * z
        })
    }
}

pub(crate) fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

impl Distribution for GaussianMixture1D {
    fn dim(&self) -> usize {
        1
    }

    fn pdf(&self, x: &[f64]) -> Result<f64> {
        check_dim(x, 1)?;
        Ok(self.log_terms(x[0]).iter().map(|t| t.exp()).sum())
    }

    fn score(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(x, 1)?;
        let terms = self.log_terms(x[0]);
        let log_p = log_sum_exp(&terms);
        if !log_p.is_finite() {
            return Err(Error::Domain(format!("density underflows at {}", x[0])));
        }
        let s = self
            .components()
            .iter()
            .zip(terms)
            .map(|(&(_, mu, s), t)| (t - log_p).exp() * (mu - x[0]) / (s * s))
            .sum();
        Ok(vec![s])
    }

    fn sample(&self, n: usize, seed: u64) -> Result<PointSet> {
        check_sample_size(n)?;
        let mut rng = rng::stream(seed, "sample");
        let values = (0..n)
            .map(|_| {
                let u: f64 = rng.gen();
                let z: f64 = rng.sample(StandardNormal);
                if u < self.weight {
                    self.mu1 + self.sigma1 * z
                } else {
                    self.mu2 + self.sigma2 * z
                }
            })
            .collect();
        Ok(PointSet::from_1d(values))
    }

    fn max_scale(&self) -> f64 {
        self.sigma1.max(self.sigma2)
    }

    fn window(&self) -> Vec<(f64, f64)> {
        let pad = WINDOW_SCALES * self.max_scale();
        vec![(self.mu1.min(self.mu2) - pad, self.mu1.max(self.mu2) + pad)]
    }

    fn cdf(&self, x: f64) -> Option<f64> {
        Some(
            self.components()
                .iter()
                .map(|&(w, mu, s)| w * normal_cdf((x - mu) / s))
                .sum(),
        )
    }
}
