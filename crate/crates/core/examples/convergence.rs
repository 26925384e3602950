//! MISE against sample size, with fitted log-log slopes.

use std::error::Error;

use sdkde::metrics::loglog_slope;
use sdkde::runner::{run_scaling, ExperimentConfig, ExperimentKind, Method};

fn main() -> Result<(), Box<dyn Error>> {
    let mut cfg = ExperimentConfig::new(ExperimentKind::Scaling);
    cfg.targets = vec!["gauss-mix-1".into()];
    cfg.methods = vec![Method::Silverman, Method::SdKdeExact];
    cfg.ns = vec![500, 1000, 2000, 5000, 10_000, 20_000];
    cfg.seeds = (0..8).collect();
    let records = run_scaling(&cfg)?;

    for method in &cfg.methods {
        let name = method.to_string();
        let means: Vec<f64> = cfg
            .ns
            .iter()
            .map(|&n| {
                let v: Vec<f64> = records.iter().filter(|r| r.method == name && r.n == n).map(|r| r.mise).collect();
                v.iter().sum::<f64>() / v.len() as f64
            })
            .collect();
        let (slope, _) = loglog_slope(&cfg.ns, &means)?;
        println!("{name:<13} slope {slope:+.3}");
        for (n, m) in cfg.ns.iter().zip(&means) {
            println!("  n={n:<6} mean MISE {m:.3e}");
        }
    }
    Ok(())
}
