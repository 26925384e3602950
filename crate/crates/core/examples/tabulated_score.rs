//! Injects an externally computed score through a CSV table.
//!
//! The table here is the exact spiral score sampled on a grid. Any score
//! model that can be evaluated on a grid can be plugged in the same way.

use std::error::Error;
use std::sync::Arc;

use sdkde::distributions::{Distribution, Spiral2D};
use sdkde::estimators::{sd_kde, BandwidthRule};
use sdkde::kernels::GaussianKernel;
use sdkde::metrics::{mise, EvalGrid};
use sdkde::scores::{exact_score, TabulatedScore};

fn main() -> Result<(), Box<dyn Error>> {
    let target = Arc::new(Spiral2D::preset());
    let axes: Vec<Vec<f64>> = target
        .window()
        .iter()
        .map(|&(lo, hi)| (0..401).map(|i| lo + (hi - lo) * i as f64 / 400.0).collect())
        .collect();
    let path = std::env::temp_dir().join("spiral_score.csv");
    TabulatedScore::tabulate(&exact_score(target.clone()), axes)?.write_csv(std::fs::File::create(&path)?)?;
    let table = TabulatedScore::from_path(&path)?;

    let data = target.sample(2000, 5)?;
    let params = BandwidthRule::default().sdkde_params(data.len(), 2, &data)?;
    let kernel = GaussianKernel::new(2)?;
    let from_table = sd_kde(&data, &table, &params, kernel)?;
    let analytic = sd_kde(&data, &exact_score(target.clone()), &params, kernel)?;

    let grid = EvalGrid::covering(target.as_ref(), &[&from_table, &analytic], 256)?;
    println!("table      {}", path.display());
    println!("analytic   MISE {:.4e}", mise(&analytic, target.as_ref(), &grid)?);
    println!("tabulated  MISE {:.4e}", mise(&from_table, target.as_ref(), &grid)?);
    Ok(())
}
