use std::sync::Arc;

use super::{Distribution, GaussianMixture1D, GaussianMixture2D, LaplaceMixture1D, Spiral2D};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct PresetInfo {
    pub name: &'static str,
    pub description: &'static str,
}

const PRESETS: &[PresetInfo] = &[
    PresetInfo { name: "gauss-mix-1", description: "0.4 N(-2, 0.5^2) + 0.6 N(2, 1^2)" },
    PresetInfo { name: "gauss-mix-2", description: "0.3 N(-2, 0.4^2) + 0.7 N(4, 1.5^2)" },
    PresetInfo { name: "gauss-mix-3", description: "0.5 N(0, 0.4^2) + 0.5 N(1.5, 1.5^2)" },
    PresetInfo { name: "laplace-mix-1", description: "0.4 Laplace(-2, 0.5) + 0.6 Laplace(2, 1)" },
    PresetInfo { name: "laplace-mix-2", description: "0.3 Laplace(-2, 0.4) + 0.7 Laplace(4, 1.5)" },
    PresetInfo { name: "laplace-mix-3", description: "0.5 Laplace(0, 0.4) + 0.5 Laplace(1.5, 1.5)" },
    PresetInfo { name: "gauss-iter", description: "0.7 N(-0.5, 0.2^2) + 0.3 N(0.5, 0.3^2)" },
    PresetInfo { name: "std-normal", description: "N(0, 1)" },
    PresetInfo { name: "spiral", description: "one-turn spiral r = 0.2 theta, noise 0.1" },
    PresetInfo { name: "mog-2d", description: "three-component bivariate Gaussian mixture" },
];

pub fn preset_names() -> &'static [PresetInfo] {
    PRESETS
}

/// Looks up a named target distribution.
pub fn preset(name: &str) -> Result<Arc<dyn Distribution>> {
    let d: Arc<dyn Distribution> = match name {
        "gauss-mix-1" => Arc::new(GaussianMixture1D::mixture1()),
        "gauss-mix-2" => Arc::new(GaussianMixture1D::mixture2()),
        "gauss-mix-3" => Arc::new(GaussianMixture1D::mixture3()),
        "laplace-mix-1" => Arc::new(LaplaceMixture1D::mixture1()),
        "laplace-mix-2" => Arc::new(LaplaceMixture1D::mixture2()),
        "laplace-mix-3" => Arc::new(LaplaceMixture1D::mixture3()),
        "gauss-iter" => Arc::new(GaussianMixture1D::iterated_target()),
        "std-normal" => Arc::new(GaussianMixture1D::standard_normal()),
        "spiral" => Arc::new(Spiral2D::preset()),
        "mog-2d" => Arc::new(GaussianMixture2D::preset()),
        other => return Err(Error::config(format!("unknown target preset `{other}`"))),
    };
    Ok(d)
}
