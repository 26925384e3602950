//! SD-KDE without an oracle: the score comes from a Silverman pilot KDE.

use std::error::Error;

use sdkde::distributions::{Distribution, GaussianMixture1D};
use sdkde::estimators::{emp_sd_kde, silverman_kde, BandwidthRule};
use sdkde::kernels::GaussianKernel;
use sdkde::metrics::{mise, EvalGrid};

fn main() -> Result<(), Box<dyn Error>> {
    let target = GaussianMixture1D::mixture2();
    let grid = EvalGrid::standard(&target)?;
    let rule = BandwidthRule::default();
    println!("{:>7} {:>12} {:>12}", "n", "silverman", "emp-sd-kde");
    for n in [500, 2000, 8000] {
        let data = target.sample(n, 3)?;
        let a = mise(&silverman_kde(&data, &rule)?, &target, &grid)?;
        let b = mise(&emp_sd_kde(&data, GaussianKernel::new(1)?, &rule)?, &target, &grid)?;
        println!("{n:>7} {a:>12.3e} {b:>12.3e}");
    }
    Ok(())
}
