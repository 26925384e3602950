//! Pointwise bias at the mode of N(0, 1) for plain KDE and SD-KDE as the
//! bandwidth shrinks.

use std::error::Error;
use std::sync::Arc;

use sdkde::distributions::{Distribution, GaussianMixture1D};
use sdkde::estimators::{kde, sd_kde, SdkdeParams};
use sdkde::kernels::GaussianKernel;
use sdkde::scores::exact_score;

fn main() -> Result<(), Box<dyn Error>> {
    let target = Arc::new(GaussianMixture1D::standard_normal());
    let score = exact_score(target.clone());
    let kernel = GaussianKernel::new(1)?;
    let p0 = target.pdf(&[0.0])?;
    let reps = 400;
    println!("{:>5} {:>12} {:>12}", "h", "kde bias", "sd-kde bias");
    for h in [0.2, 0.3, 0.4, 0.6] {
        let (mut a, mut b) = (0.0, 0.0);
        for seed in 0..reps {
            let data = target.sample(2000, seed)?;
            a += kde(&data, h, kernel)?.evaluate(&[0.0]);
            b += sd_kde(&data, &score, &SdkdeParams::debiased(h)?, kernel)?.evaluate(&[0.0]);
        }
        println!("{h:>5} {:>12.2e} {:>12.2e}", a / reps as f64 - p0, b / reps as f64 - p0);
    }
    Ok(())
}
