use rand::Rng;

use super::{check_dim, check_location, check_sample_size, check_scale, check_weight, log_sum_exp};
use super::{Distribution, WINDOW_SCALES};
use crate::error::{Error, Result};
use crate::points::PointSet;
use crate::rng;

const TAIL_SCALES: f64 = 2.0;

/// Two-component univariate Laplace mixture with densities
/// `exp(-|x - loc| / scale) / (2 scale)`.
///
/// The score is undefined at each component location; there the mean of the
/// left and right derivatives is returned.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplaceMixture1D {
    pub weight: f64,
    pub loc1: f64,
    pub scale1: f64,
    pub loc2: f64,
    pub scale2: f64,
}

impl LaplaceMixture1D {
    pub fn new(weight: f64, loc1: f64, scale1: f64, loc2: f64, scale2: f64) -> Result<Self> {
        check_weight(weight)?;
        check_location("loc1", loc1)?;
        check_location("loc2", loc2)?;
        check_scale("scale1", scale1)?;
        check_scale("scale2", scale2)?;
        Ok(LaplaceMixture1D {
            weight,
            loc1,
            scale1,
            loc2,
            scale2,
        })
    }

    /// Laplace counterpart of [`super::GaussianMixture1D::mixture1`], same numbers.
    pub fn mixture1() -> Self {
        LaplaceMixture1D::new(0.4, -2.0, 0.5, 2.0, 1.0).unwrap()
    }

    pub fn mixture2() -> Self {
        LaplaceMixture1D::new(0.3, -2.0, 0.4, 4.0, 1.5).unwrap()
    }

    pub fn mixture3() -> Self {
        LaplaceMixture1D::new(0.5, 0.0, 0.4, 1.5, 1.5).unwrap()
    }

    fn components(&self) -> [(f64, f64, f64); 2] {
        [
            (self.weight, self.loc1, self.scale1),
            (1.0 - self.weight, self.loc2, self.scale2),
        ]
    }

    fn log_terms(&self, x: f64) -> [f64; 2] {
        self.components()
            .map(|(w, loc, b)| w.ln() - (2.0 * b).ln() - (x - loc).abs() / b)
    }

    /// True if `x` sits exactly on a component location.
    pub fn is_kink(&self, x: f64) -> bool {
        x == self.loc1 || x == self.loc2
    }
}

fn sign_or_zero(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

impl Distribution for LaplaceMixture1D {
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
            .map(|(&(_, loc, b), t)| -(t - log_p).exp() * sign_or_zero(x[0] - loc) / b)
            .sum();
        Ok(vec![s])
    }

    fn sample(&self, n: usize, seed: u64) -> Result<PointSet> {
        check_sample_size(n)?;
        let mut rng = rng::stream(seed, "sample");
        let values = (0..n)
            .map(|_| {
                let u: f64 = rng.gen();
                // Inverse CDF on (-1/2, 1/2).
                let v: f64 = rng.gen::<f64>() - 0.5;
                let (loc, b) = if u < self.weight {
                    (self.loc1, self.scale1)
                } else {
                    (self.loc2, self.scale2)
                };
                loc - b * sign_or_zero(v) * (1.0 - 2.0 * v.abs()).ln()
            })
            .collect();
        Ok(PointSet::from_1d(values))
    }

    /// `2 * scale` of the wider component. Five of these leave less than
    /// `5e-5` of the mass outside the window.
    fn max_scale(&self) -> f64 {
        TAIL_SCALES * self.scale1.max(self.scale2)
    }

    fn window(&self) -> Vec<(f64, f64)> {
        let pad = WINDOW_SCALES * self.max_scale();
        vec![(self.loc1.min(self.loc2) - pad, self.loc1.max(self.loc2) + pad)]
    }

    fn cdf(&self, x: f64) -> Option<f64> {
        Some(
            self.components()
                .iter()
                .map(|&(w, loc, b)| {
                    let t = (x - loc) / b;
                    let c = if t < 0.0 {
                        0.5 * t.exp()
                    } else {
                        1.0 - 0.5 * (-t).exp()
                    };
                    w * c
                })
                .sum(),
        )
    }
}
