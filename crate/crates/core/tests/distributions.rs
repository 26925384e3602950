use sdkde::distributions::{
    preset, preset_names, Distribution, GaussianMixture1D, GaussianMixture2D, LaplaceMixture1D, Spiral2D,
};
use sdkde::metrics::EvalGrid;
use statrs::distribution::{ContinuousCDF, Normal};

fn gaussian_mixture_cdf(m: &GaussianMixture1D, x: f64) -> f64 {
    let a = Normal::new(m.mu1, m.sigma1).unwrap();
    let b = Normal::new(m.mu2, m.sigma2).unwrap();
    m.weight * a.cdf(x) + (1.0 - m.weight) * b.cdf(x)
}

fn laplace_cdf(loc: f64, scale: f64, x: f64) -> f64 {
    if x < loc {
        0.5 * ((x - loc) / scale).exp()
    } else {
        1.0 - 0.5 * (-(x - loc) / scale).exp()
    }
}

fn laplace_mixture_cdf(m: &LaplaceMixture1D, x: f64) -> f64 {
    m.weight * laplace_cdf(m.loc1, m.scale1, x) + (1.0 - m.weight) * laplace_cdf(m.loc2, m.scale2, x)
}

fn ks_statistic(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn gaussian_samples_pass_ks() {
    for (i, m) in [
        GaussianMixture1D::mixture1(),
        GaussianMixture1D::mixture2(),
        GaussianMixture1D::mixture3(),
        GaussianMixture1D::iterated_target(),
    ]
    .iter()
    .enumerate()
    {
        let xs = m.sample(100_000, i as u64).unwrap().coords().to_vec();
        let d = ks_statistic(xs, |x| gaussian_mixture_cdf(m, x));
        assert!(d < 0.01, "mixture {i}: KS {d}");
    }
}

#[test]
fn laplace_samples_pass_ks() {
    for (i, m) in [LaplaceMixture1D::mixture1(), LaplaceMixture1D::mixture2(), LaplaceMixture1D::mixture3()]
        .iter()
        .enumerate()
    {
        let xs = m.sample(100_000, 40 + i as u64).unwrap().coords().to_vec();
        let d = ks_statistic(xs, |x| laplace_mixture_cdf(m, x));
        assert!(d < 0.01, "laplace {i}: KS {d}");
    }
}

#[test]
fn model_cdf_matches_independent_cdf() {
    let g = GaussianMixture1D::mixture2();
    let l = LaplaceMixture1D::mixture3();
    for i in 0..200 {
        let x = -8.0 + 0.08 * i as f64;
        assert!((g.cdf(x).unwrap() - gaussian_mixture_cdf(&g, x)).abs() < 1e-12);
        assert!((l.cdf(x).unwrap() - laplace_mixture_cdf(&l, x)).abs() < 1e-12);
    }
}

#[test]
fn mixture1_sample_mean() {
    let n = 100_000;
    let xs = GaussianMixture1D::mixture1().sample(n, 3).unwrap().coords().to_vec();
    let mean = xs.iter().sum::<f64>() / n as f64;
    // E[X] = 0.4 * -2 + 0.6 * 2; E[X^2] = 0.4 * (0.25 + 4) + 0.6 * (1 + 4).
    let var = 0.4 * 4.25 + 0.6 * 5.0 - 0.4f64.powi(2);
    let se = (var / n as f64).sqrt();
    assert!((mean - 0.4).abs() < 3.0 * se, "{mean}");
}

#[test]
fn mog_sample_moments() {
    let m = GaussianMixture2D::preset();
    let n = 100_000;
    let pts = m.sample(n, 8).unwrap();
    let mut mean = [0.0; 2];
    for p in pts.iter() {
        mean[0] += p[0] / n as f64;
        mean[1] += p[1] / n as f64;
    }
    let mut expected = [0.0; 2];
    let mut second = [0.0; 2];
    for c in m.components() {
        for j in 0..2 {
            expected[j] += c.weight * c.mean[j];
            second[j] += c.weight * (c.covariance[j][j] + c.mean[j] * c.mean[j]);
        }
    }
    for j in 0..2 {
        let se = ((second[j] - expected[j] * expected[j]) / n as f64).sqrt();
        assert!((mean[j] - expected[j]).abs() < 3.0 * se, "axis {j}: {} vs {}", mean[j], expected[j]);
    }
}

#[test]
fn two_dimensional_box_frequencies_match_pdf() {
    let targets: Vec<Box<dyn Distribution>> = vec![Box::new(GaussianMixture2D::preset()), Box::new(Spiral2D::preset())];
    for (t, m) in targets.iter().enumerate() {
        let n = 50_000;
        let pts = m.sample(n, 100 + t as u64).unwrap();
        let boxes = [[(-1.0, 0.5), (-1.0, 0.5)], [(0.0, 1.5), (-0.5, 1.0)], [(-2.0, 0.0), (-2.5, -0.5)]];
        for b in boxes {
            let inside = pts
                .iter()
                .filter(|p| p[0] >= b[0].0 && p[0] < b[0].1 && p[1] >= b[1].0 && p[1] < b[1].1)
                .count() as f64
                / n as f64;
            let grid = EvalGrid::uniform(&b, 301).unwrap();
            let vals: Vec<f64> = (0..grid.len()).map(|i| m.pdf(&grid.node(i)).unwrap()).collect();
            let mass = grid.integrate(&vals);
            let se = (mass * (1.0 - mass) / n as f64).sqrt().max(1e-4);
            assert!((inside - mass).abs() < 4.0 * se, "target {t} box {b:?}: {inside} vs {mass}");
        }
    }
}

#[test]
fn every_preset_pdf_integrates_to_one_on_its_window() {
    for info in preset_names() {
        let m = preset(info.name).unwrap();
        let count = if m.dim() == 1 { 20_001 } else { 601 };
        let grid = EvalGrid::uniform(&m.window(), count).unwrap();
        let vals: Vec<f64> = (0..grid.len()).map(|i| m.pdf(&grid.node(i)).unwrap()).collect();
        let mass = grid.integrate(&vals);
        assert!((mass - 1.0).abs() < 1e-3, "{}: {mass}", info.name);
    }
}

#[test]
fn sampling_is_deterministic_per_seed() {
    for info in preset_names() {
        let m = preset(info.name).unwrap();
        assert_eq!(m.sample(100, 7).unwrap(), m.sample(100, 7).unwrap());
        assert_ne!(m.sample(100, 7).unwrap(), m.sample(100, 8).unwrap());
    }
}

#[test]
fn invalid_inputs_are_rejected() {
    let m = GaussianMixture1D::mixture1();
    assert!(m.sample(0, 1).is_err());
    assert!(m.pdf(&[f64::NAN]).is_err());
    assert!(m.pdf(&[0.0, 1.0]).is_err());
    assert!(GaussianMixture2D::preset().score(&[1.0]).is_err());
}
