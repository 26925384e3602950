use rand::Rng;
use rand_distr::StandardNormal;

use super::{check_dim, check_sample_size, log_sum_exp, Distribution, WINDOW_SCALES};
use crate::error::{Error, Result};
use crate::points::PointSet;
use crate::rng;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// One bivariate normal component with a symmetric positive-definite covariance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianComponent2D {
    pub weight: f64,
    pub mean: [f64; 2],
    pub covariance: [[f64; 2]; 2],
}

#[derive(Debug, Clone, Copy)]
struct Factored {
    precision: [[f64; 2]; 2],
    cholesky: [[f64; 2]; 2],
    log_norm: f64,
}

impl Factored {
    fn new(c: &GaussianComponent2D) -> Result<Self> {
        let [[a, b], [b2, d]] = c.covariance;
        if b != b2 {
            return Err(Error::input("covariance must be symmetric"));
        }
        let det = a * d - b * b;
        if !(a > 0.0 && det > 0.0) {
            return Err(Error::input("covariance must be positive definite"));
        }
        let l00 = a.sqrt();
        let l10 = b / l00;
        let l11 = (d - l10 * l10).sqrt();
        Ok(Factored {
            precision: [[d / det, -b / det], [-b / det, a / det]],
            cholesky: [[l00, 0.0], [l10, l11]],
            log_norm: c.weight.ln() - LN_2PI - 0.5 * det.ln(),
        })
    }
}

/// Finite mixture of bivariate normals.
#[derive(Debug, Clone)]
pub struct GaussianMixture2D {
    components: Vec<GaussianComponent2D>,
    factored: Vec<Factored>,
}

impl GaussianMixture2D {
    pub fn new(components: Vec<GaussianComponent2D>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::input("mixture needs at least one component"));
        }
        let total: f64 = components.iter().map(|c| c.weight).sum();
        if components.iter().any(|c| !(c.weight > 0.0)) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::input(format!(
                "component weights must be positive and sum to 1 (sum = {total})"
            )));
        }
        if components
            .iter()
            .any(|c| !(c.mean[0].is_finite() && c.mean[1].is_finite()))
        {
            return Err(Error::input("component means must be finite"));
        }
        let factored = components
            .iter()
            .map(Factored::new)
            .collect::<Result<Vec<_>>>()?;
        Ok(GaussianMixture2D {
            components,
            factored,
        })
    }

    /// Standard bivariate normal.
    pub fn standard() -> Self {
        GaussianMixture2D::new(vec![GaussianComponent2D {
            weight: 1.0,
            mean: [0.0, 0.0],
            covariance: [[1.0, 0.0], [0.0, 1.0]],
        }])
        .unwrap()
    }

    /// Three anisotropic, partly correlated clusters.
    pub fn preset() -> Self {
        GaussianMixture2D::new(vec![
            GaussianComponent2D {
                weight: 0.4,
                mean: [-1.5, 0.0],
                covariance: [[0.3, 0.1], [0.1, 0.2]],
            },
            GaussianComponent2D {
                weight: 0.35,
                mean: [1.5, 0.5],
                covariance: [[0.2, -0.05], [-0.05, 0.4]],
            },
            GaussianComponent2D {
                weight: 0.25,
                mean: [0.0, -2.0],
                covariance: [[0.5, 0.0], [0.0, 0.1]],
            },
        ])
        .unwrap()
    }

    pub fn components(&self) -> &[GaussianComponent2D] {
        &self.components
    }

    fn log_terms(&self, x: &[f64]) -> Vec<f64> {
        self.components
            .iter()
            .zip(&self.factored)
            .map(|(c, f)| {
                let d0 = x[0] - c.mean[0];
                let d1 = x[1] - c.mean[1];
                let p = f.precision;
                let q = d0 * (p[0][0] * d0 + p[0][1] * d1) + d1 * (p[1][0] * d0 + p[1][1] * d1);
                f.log_norm - 0.5 * q
            })
            .collect()
    }
}

impl Distribution for GaussianMixture2D {
    fn dim(&self) -> usize {
        2
    }

    fn pdf(&self, x: &[f64]) -> Result<f64> {
        check_dim(x, 2)?;
        Ok(self.log_terms(x).iter().map(|t| t.exp()).sum())
    }

    fn score(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(x, 2)?;
        let terms = self.log_terms(x);
        let log_p = log_sum_exp(&terms);
        if !log_p.is_finite() {
            return Err(Error::Domain(format!("density underflows at {x:?}")));
        }
        let mut s = vec![0.0; 2];
        for ((c, f), t) in self.components.iter().zip(&self.factored).zip(terms) {
            let r = (t - log_p).exp();
            let d0 = c.mean[0] - x[0];
            let d1 = c.mean[1] - x[1];
            let p = f.precision;
            s[0] += r * (p[0][0] * d0 + p[0][1] * d1);
            s[1] += r * (p[1][0] * d0 + p[1][1] * d1);
        }
        Ok(s)
    }

    fn sample(&self, n: usize, seed: u64) -> Result<PointSet> {
        check_sample_size(n)?;
        let mut rng = rng::stream(seed, "sample");
        let mut coords = Vec::with_capacity(2 * n);
        for _ in 0..n {
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            let mut k = self.components.len() - 1;
            for (i, c) in self.components.iter().enumerate() {
                acc += c.weight;
                if u < acc {
                    k = i;
                    break;
                }
            }
            let z0: f64 = rng.sample(StandardNormal);
            let z1: f64 = rng.sample(StandardNormal);
            let l = self.factored[k].cholesky;
            let m = self.components[k].mean;
            coords.push(m[0] + l[0][0] * z0);
            coords.push(m[1] + l[1][0] * z0 + l[1][1] * z1);
        }
        PointSet::new(2, coords)
    }

    /// Square root of the largest covariance eigenvalue over components.
    fn max_scale(&self) -> f64 {
        self.components
            .iter()
            .map(|c| {
                let [[a, b], [_, d]] = c.covariance;
                let mid = 0.5 * (a + d);
                let rad = (0.25 * (a - d) * (a - d) + b * b).sqrt();
                (mid + rad).sqrt()
            })
            .fold(0.0, f64::max)
    }

    fn window(&self) -> Vec<(f64, f64)> {
        let pad = WINDOW_SCALES * self.max_scale();
        (0..2)
            .map(|j| {
                let lo = self.components.iter().map(|c| c.mean[j]).fold(f64::INFINITY, f64::min);
                let hi = self
                    .components
                    .iter()
                    .map(|c| c.mean[j])
                    .fold(f64::NEG_INFINITY, f64::max);
                (lo - pad, hi + pad)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn standard_bivariate_mode() {
        let m = GaussianMixture2D::standard();
        assert!((m.pdf(&[0.0, 0.0]).unwrap() - 1.0 / (2.0 * PI)).abs() < 1e-15);
        let s = m.score(&[0.3, -1.2]).unwrap();
        assert!((s[0] + 0.3).abs() < 1e-15 && (s[1] - 1.2).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_covariance_and_weights() {
        let bad = GaussianComponent2D {
            weight: 1.0,
            mean: [0.0, 0.0],
            covariance: [[1.0, 2.0], [2.0, 1.0]],
        };
        assert!(GaussianMixture2D::new(vec![bad]).is_err());
        let unnormalized = GaussianComponent2D {
            weight: 0.5,
            mean: [0.0, 0.0],
            covariance: [[1.0, 0.0], [0.0, 1.0]],
        };
        assert!(GaussianMixture2D::new(vec![unnormalized]).is_err());
    }

    #[test]
    fn sample_covariance_matches_component() {
        let m = GaussianMixture2D::new(vec![GaussianComponent2D {
            weight: 1.0,
            mean: [1.0, -1.0],
            covariance: [[0.5, 0.2], [0.2, 0.3]],
        }])
        .unwrap();
        let pts = m.sample(100_000, 3).unwrap();
        let n = pts.len() as f64;
        let mx = pts.column(0).iter().sum::<f64>() / n;
        let my = pts.column(1).iter().sum::<f64>() / n;
        let cxy = pts.iter().map(|p| (p[0] - mx) * (p[1] - my)).sum::<f64>() / (n - 1.0);
        assert!((mx - 1.0).abs() < 0.01 && (my + 1.0).abs() < 0.01);
        assert!((cxy - 0.2).abs() < 0.01, "{cxy}");
    }
}
