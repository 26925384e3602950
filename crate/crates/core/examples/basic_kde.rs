//! Silverman KDE vs SD-KDE with the exact score on a bimodal mixture.

use std::error::Error;
use std::sync::Arc;

use sdkde::distributions::{Distribution, GaussianMixture1D};
use sdkde::estimators::{sd_kde, silverman_kde, BandwidthRule};
use sdkde::kernels::GaussianKernel;
use sdkde::metrics::{mise, EvalGrid};
use sdkde::scores::exact_score;

fn main() -> Result<(), Box<dyn Error>> {
    let target = Arc::new(GaussianMixture1D::mixture1());
    let data = target.sample(5000, 1)?;
    let rule = BandwidthRule::default();

    let baseline = silverman_kde(&data, &rule)?;
    let params = rule.sdkde_params(data.len(), 1, &data)?;
    let debiased = sd_kde(&data, &exact_score(target.clone()), &params, GaussianKernel::new(1)?)?;

    let grid = EvalGrid::standard(target.as_ref())?;
    println!("silverman  h = {:.4}  MISE = {:.3e}", baseline.bandwidth(), mise(&baseline, target.as_ref(), &grid)?);
    println!(
        "sd-kde     h = {:.4}  MISE = {:.3e}  (step {:.2e})",
        params.h,
        mise(&debiased, target.as_ref(), &grid)?,
        params.delta
    );

    println!("\n     x    truth  silverman     sd-kde");
    for x in [-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0] {
        println!(
            "{x:6.1} {:8.4} {:10.4} {:10.4}",
            target.pdf(&[x])?,
            baseline.evaluate(&[x]),
            debiased.evaluate(&[x])
        );
    }
    Ok(())
}
