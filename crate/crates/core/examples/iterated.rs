//! Repeated SD-KDE steps at a fixed bandwidth, tracking KL and MISE.

use std::error::Error;

use sdkde::distributions::{Distribution, GaussianMixture1D};
use sdkde::estimators::{kde, IteratedConfig, IteratedSdKde};
use sdkde::kernels::GaussianKernel;
use sdkde::metrics::{density_on_grid, integrated_squared_error, kl_from_values, EvalGrid};

fn main() -> Result<(), Box<dyn Error>> {
    let target = GaussianMixture1D::iterated_target();
    let data = target.sample(1000, 0)?;
    let cfg = IteratedConfig::default();
    let kernel = GaussianKernel::new(1)?;
    let grid = EvalGrid::standard(&target)?;
    let truth = density_on_grid(&target, &grid)?;

    let report = |k: usize, values: Vec<f64>| -> Result<(), Box<dyn Error>> {
        let kl = kl_from_values(&truth, &values, &grid)?;
        let ise = integrated_squared_error(&values, &truth, &grid)?;
        println!("iteration {k}: step {:.5}  KL {kl:.5}  MISE {ise:.5}", if k == 0 { 0.0 } else { cfg.step(k) });
        Ok(())
    };
    report(0, kde(&data, cfg.bandwidth, kernel)?.evaluate_grid(&grid)?)?;
    for (k, est) in IteratedSdKde::new(&data, &cfg, kernel)?.enumerate() {
        report(k + 1, est?.evaluate_grid(&grid)?)?;
    }
    Ok(())
}
