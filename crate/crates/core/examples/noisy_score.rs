//! SD-KDE driven by a corrupted score `s(x) + eps`, `eps ~ N(0, sigma^2)`.

use std::error::Error;
use std::sync::Arc;

use sdkde::distributions::{Distribution, GaussianMixture1D};
use sdkde::estimators::{sd_kde, silverman_kde, BandwidthRule};
use sdkde::kernels::GaussianKernel;
use sdkde::metrics::{mise, EvalGrid};
use sdkde::scores::{exact_score, noisy_score, NoiseMode};

fn main() -> Result<(), Box<dyn Error>> {
    let target = Arc::new(GaussianMixture1D::mixture1());
    let grid = EvalGrid::standard(target.as_ref())?;
    let rule = BandwidthRule::default();
    let seeds = 10;

    let mut silverman = 0.0;
    let sigmas = [0.0, 1.0, 2.0, 4.0, 8.0];
    let mut noisy = [0.0; 5];
    for seed in 0..seeds {
        let data = target.sample(10_000, seed)?;
        silverman += mise(&silverman_kde(&data, &rule)?, target.as_ref(), &grid)? / seeds as f64;
        let params = rule.sdkde_params(data.len(), 1, &data)?;
        for (i, &sigma) in sigmas.iter().enumerate() {
            let score = noisy_score(exact_score(target.clone()), sigma, seed, NoiseMode::PerPoint)?;
            let est = sd_kde(&data, &score, &params, GaussianKernel::new(1)?)?;
            noisy[i] += mise(&est, target.as_ref(), &grid)? / seeds as f64;
        }
    }
    println!("n = 10000, {seeds} seeds");
    println!("silverman        mean MISE {silverman:.3e}");
    for (sigma, m) in sigmas.iter().zip(noisy) {
        println!("sd-kde sigma={sigma:<3} mean MISE {m:.3e}");
    }
    Ok(())
}
