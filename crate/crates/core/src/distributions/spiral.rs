use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;

use super::{check_dim, check_sample_size, log_sum_exp, Distribution, WINDOW_SCALES};
use crate::error::{Error, Result};
use crate::points::PointSet;
use crate::rng;

/// Nodes further than this many noise standard deviations from `x` are
/// skipped when summing the density; their terms are below `exp(-40)`.
const NODE_CUTOFF: f64 = 9.0;

/// Noisy planar spiral.
///
/// A latent angle `theta` is uniform on `[theta_start, theta_end]`, the curve
/// point is `growth * theta * (cos theta, sin theta)`, and isotropic Gaussian
/// noise of standard deviation `noise` is added. The density is the
/// pushforward, integrated over `theta` with the midpoint rule.
#[derive(Debug, Clone)]
pub struct Spiral2D {
    pub growth: f64,
    pub noise: f64,
    pub theta_start: f64,
    pub theta_end: f64,
    nodes: Vec<[f64; 2]>,
}

impl Spiral2D {
    pub const DEFAULT_QUADRATURE_NODES: usize = 2000;

    pub fn new(
        growth: f64,
        noise: f64,
        theta_start: f64,
        theta_end: f64,
        quadrature_nodes: usize,
    ) -> Result<Self> {
        if !(growth > 0.0 && growth.is_finite()) {
            return Err(Error::input("spiral growth must be positive"));
        }
        if !(noise > 0.0 && noise.is_finite()) {
            return Err(Error::input("spiral noise must be positive"));
        }
        if !(theta_end > theta_start && theta_start.is_finite() && theta_end.is_finite()) {
            return Err(Error::input("spiral angle range must be a non-empty interval"));
        }
        if quadrature_nodes == 0 {
            return Err(Error::input("spiral quadrature needs at least one node"));
        }
        let step = (theta_end - theta_start) / quadrature_nodes as f64;
        let nodes = (0..quadrature_nodes)
            .map(|k| {
                let t = theta_start + (k as f64 + 0.5) * step;
                [growth * t * t.cos(), growth * t * t.sin()]
            })
            .collect();
        Ok(Spiral2D {
            growth,
            noise,
            theta_start,
            theta_end,
            nodes,
        })
    }

    pub fn preset() -> Self {
        Spiral2D::new(0.2, 0.1, 0.5 * PI, 2.5 * PI, Self::DEFAULT_QUADRATURE_NODES).unwrap()
    }

    pub fn turns(&self) -> f64 {
        (self.theta_end - self.theta_start) / (2.0 * PI)
    }

    fn curve_bounds(&self) -> [(f64, f64); 2] {
        let mut b = [(f64::INFINITY, f64::NEG_INFINITY); 2];
        for node in &self.nodes {
            for j in 0..2 {
                b[j].0 = b[j].0.min(node[j]);
                b[j].1 = b[j].1.max(node[j]);
            }
        }
        b
    }
}

impl Distribution for Spiral2D {
    fn dim(&self) -> usize {
        2
    }

    fn pdf(&self, x: &[f64]) -> Result<f64> {
        check_dim(x, 2)?;
        let inv_var = 1.0 / (self.noise * self.noise);
        let cutoff2 = NODE_CUTOFF * NODE_CUTOFF * self.noise * self.noise;
        let mut acc = 0.0;
        for node in &self.nodes {
            let d0 = x[0] - node[0];
            let d1 = x[1] - node[1];
            let r2 = d0 * d0 + d1 * d1;
            if r2 <= cutoff2 {
                acc += (-0.5 * r2 * inv_var).exp();
            }
        }
        Ok(acc * inv_var / (2.0 * PI * self.nodes.len() as f64))
    }

    fn score(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(x, 2)?;
        let inv_var = 1.0 / (self.noise * self.noise);
        let terms: Vec<f64> = self
            .nodes
            .iter()
            .map(|n| {
                let d0 = x[0] - n[0];
                let d1 = x[1] - n[1];
                -0.5 * (d0 * d0 + d1 * d1) * inv_var
            })
            .collect();
        let log_z = log_sum_exp(&terms);
        if !log_z.is_finite() {
            return Err(Error::Domain(format!("density underflows at {x:?}")));
        }
        let mut s = vec![0.0; 2];
        for (node, t) in self.nodes.iter().zip(terms) {
            let r = (t - log_z).exp();
            s[0] += r * (node[0] - x[0]);
            s[1] += r * (node[1] - x[1]);
        }
        s[0] *= inv_var;
        s[1] *= inv_var;
        Ok(s)
    }

    fn sample(&self, n: usize, seed: u64) -> Result<PointSet> {
        check_sample_size(n)?;
        let mut rng = rng::stream(seed, "sample");
        let mut coords = Vec::with_capacity(2 * n);
        for _ in 0..n {
            let t = rng.gen_range(self.theta_start..self.theta_end);
            let r = self.growth * t;
            let z0: f64 = rng.sample(StandardNormal);
            let z1: f64 = rng.sample(StandardNormal);
            coords.push(r * t.cos() + self.noise * z0);
            coords.push(r * t.sin() + self.noise * z1);
        }
        PointSet::new(2, coords)
    }

    fn max_scale(&self) -> f64 {
        self.noise
    }

    fn window(&self) -> Vec<(f64, f64)> {
        let pad = WINDOW_SCALES * self.noise;
        self.curve_bounds()
            .iter()
            .map(|&(lo, hi)| (lo - pad, hi + pad))
            .collect()
    }
}
