//! Score providers: the exact oracle, a noise-corrupted oracle, the score of a
//! fitted KDE, and a tabulated score loaded from CSV.

use std::io::{Read, Write};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::distributions::Distribution;
use crate::error::{ensure_finite, Error, Result};
use crate::estimators::DensityEstimate;
use crate::kernels::Kernel;
use crate::rng;

/// A map from points to score vectors (gradients of a log-density).
pub trait ScoreField: Send + Sync {
    fn dim(&self) -> usize;

    fn eval(&self, x: &[f64]) -> Result<Vec<f64>>;

    /// Score consumed when shifting data point `index` located at `x`.
    fn eval_at_point(&self, _index: usize, x: &[f64]) -> Result<Vec<f64>> {
        self.eval(x)
    }
}

impl<S: ScoreField + ?Sized> ScoreField for Arc<S> {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        (**self).eval(x)
    }

    fn eval_at_point(&self, index: usize, x: &[f64]) -> Result<Vec<f64>> {
        (**self).eval_at_point(index, x)
    }
}

/// The analytic score of a target distribution.
#[derive(Debug, Clone)]
pub struct ExactScore {
    model: Arc<dyn Distribution>,
}

pub fn exact_score(model: Arc<dyn Distribution>) -> ExactScore {
    ExactScore { model }
}

impl ScoreField for ExactScore {
    fn dim(&self) -> usize {
        self.model.dim()
    }

    fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.model.score(x)
    }
}

/// Score given by a closure.
pub struct FnScore<F> {
    dim: usize,
    f: F,
}

pub fn score_fn<F>(dim: usize, f: F) -> FnScore<F>
where
    F: Fn(&[f64]) -> Vec<f64> + Send + Sync,
{
    FnScore { dim, f }
}

impl<F> ScoreField for FnScore<F>
where
    F: Fn(&[f64]) -> Vec<f64> + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok((self.f)(x))
    }
}

/// When the Gaussian perturbation of a noisy score is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseMode {
    /// One draw per data point, keyed by the point's index. Queries made
    /// without an index are keyed by the bit pattern of `x`.
    #[default]
    PerPoint,
    /// A fresh draw on every call, from a sequential call counter.
    PerCall,
}

impl std::str::FromStr for NoiseMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per-point" => Ok(NoiseMode::PerPoint),
            "per-call" => Ok(NoiseMode::PerCall),
            other => Err(Error::config(format!(
                "unknown noise mode `{other}` (expected per-point or per-call)"
            ))),
        }
    }
}

/// `base(x) + eps`, with `eps ~ N(0, sigma^2 I)`.
pub struct NoisyScore<S> {
    base: S,
    sigma: f64,
    seed: u64,
    mode: NoiseMode,
    calls: AtomicU64,
}

const NOISE_LABEL: &str = "score-noise";

pub fn noisy_score<S: ScoreField>(base: S, sigma: f64, seed: u64, mode: NoiseMode) -> Result<NoisyScore<S>> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::input(format!("noise sigma must be >= 0, got {sigma}")));
    }
    Ok(NoisyScore {
        base,
        sigma,
        seed,
        mode,
        calls: AtomicU64::new(0),
    })
}

impl<S: ScoreField> NoisyScore<S> {
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    fn perturb(&self, mut s: Vec<f64>, label: &str, key: u64) -> Vec<f64> {
        if self.sigma > 0.0 {
            let mut r = rng::indexed_stream(self.seed, label, key);
            for v in &mut s {
                *v += self.sigma * r.sample::<f64, _>(StandardNormal);
            }
        }
        s
    }

    fn next_call(&self) -> u64 {
        self.calls.fetch_add(1, Ordering::Relaxed)
    }
}

fn location_key(x: &[f64]) -> u64 {
    x.iter()
        .fold(0x9e37_79b9_7f4a_7c15u64, |h, v| (h ^ v.to_bits()).rotate_left(27).wrapping_mul(0x0000_0100_0000_01b3))
}

impl<S: ScoreField> ScoreField for NoisyScore<S> {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        let s = self.base.eval(x)?;
        Ok(match self.mode {
            NoiseMode::PerPoint => self.perturb(s, "score-noise-at", location_key(x)),
            NoiseMode::PerCall => self.perturb(s, "score-noise-call", self.next_call()),
        })
    }

    fn eval_at_point(&self, index: usize, x: &[f64]) -> Result<Vec<f64>> {
        let s = self.base.eval_at_point(index, x)?;
        Ok(match self.mode {
            NoiseMode::PerPoint => self.perturb(s, NOISE_LABEL, index as u64),
            NoiseMode::PerCall => self.perturb(s, "score-noise-call", self.next_call()),
        })
    }
}

/// Score of a fitted kernel density estimate, `grad log p_hat`.
#[derive(Debug, Clone)]
pub struct EmpiricalScore<K: Kernel> {
    estimate: Arc<DensityEstimate<K>>,
}

impl<K: Kernel> EmpiricalScore<K> {
    pub fn new(estimate: DensityEstimate<K>) -> Self {
        EmpiricalScore {
            estimate: Arc::new(estimate),
        }
    }

    pub fn estimate(&self) -> &DensityEstimate<K> {
        &self.estimate
    }
}

/// Score of the Gaussian KDE of `data` at bandwidth `h`.
pub fn empirical_score(
    data: &crate::points::PointSet,
    h: f64,
) -> Result<EmpiricalScore<crate::kernels::GaussianKernel>> {
    if data.len() < 2 {
        return Err(Error::input("empirical score needs at least 2 points"));
    }
    Ok(EmpiricalScore::new(crate::estimators::gaussian_kde(data, h)?))
}

impl<K: Kernel> ScoreField for EmpiricalScore<K> {
    fn dim(&self) -> usize {
        self.estimate.dim()
    }

    fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        ensure_finite(x)?;
        Ok(self.estimate.score(x))
    }
}

/// Score sampled on a rectilinear grid, interpolated (bi)linearly and clamped
/// to the edge value outside the grid.
///
/// CSV layout: header `x0,s0` or `x0,x1,s0,s1`, one row per node, `x0`
/// varying slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedScore {
    axes: Vec<Vec<f64>>,
    values: Vec<f64>,
}

impl TabulatedScore {
    pub fn new(axes: Vec<Vec<f64>>, values: Vec<f64>) -> Result<Self> {
        let d = axes.len();
        if !(1..=2).contains(&d) {
            return Err(Error::input("tabulated scores support 1 or 2 dimensions"));
        }
        for axis in &axes {
            if axis.len() < 2 || axis.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::input(
                    "each table axis needs at least 2 strictly increasing nodes",
                ));
            }
        }
        let nodes: usize = axes.iter().map(Vec::len).product();
        if values.len() != nodes * d {
            return Err(Error::input(format!(
                "expected {} score values for {nodes} nodes, got {}",
                nodes * d,
                values.len()
            )));
        }
        Ok(TabulatedScore { axes, values })
    }

    /// Samples `field` at every node of the product grid `axes`.
    pub fn tabulate(field: &dyn ScoreField, axes: Vec<Vec<f64>>) -> Result<Self> {
        let d = axes.len();
        if field.dim() != d {
            return Err(Error::input("table axes do not match the score dimension"));
        }
        let mut values = Vec::new();
        match d {
            1 => {
                for &x in &axes[0] {
                    values.extend(field.eval(&[x])?);
                }
            }
            2 => {
                for &x0 in &axes[0] {
                    for &x1 in &axes[1] {
                        values.extend(field.eval(&[x0, x1])?);
                    }
                }
            }
            _ => return Err(Error::input("tabulated scores support 1 or 2 dimensions")),
        }
        TabulatedScore::new(axes, values)
    }

    pub fn axes(&self) -> &[Vec<f64>] {
        &self.axes
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(file)
    }

    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let header: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
        let d = match header.as_slice() {
            [a, b] if a == "x0" && b == "s0" => 1,
            [a, b, c, e] if a == "x0" && b == "x1" && c == "s0" && e == "s1" => 2,
            _ => {
                return Err(Error::input(format!(
                    "score table header must be `x0,s0` or `x0,x1,s0,s1`, got `{}`",
                    header.join(",")
                )))
            }
        };
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::input(format!("score table row {}: {e}", line + 2)))?;
            if row.len() != 2 * d {
                return Err(Error::input(format!("score table row {} has {} fields", line + 2, row.len())));
            }
            rows.push(row);
        }
        let mut axes: Vec<Vec<f64>> = Vec::with_capacity(d);
        if d == 1 {
            axes.push(rows.iter().map(|r| r[0]).collect());
        } else {
            let n1 = rows.iter().take_while(|r| r[0] == rows[0][0]).count();
            if n1 == 0 || !rows.len().is_multiple_of(n1) {
                return Err(Error::input("score table is not a complete row-major grid"));
            }
            axes.push(rows.iter().step_by(n1).map(|r| r[0]).collect());
            axes.push(rows[..n1].iter().map(|r| r[1]).collect());
            for (i, r) in rows.iter().enumerate() {
                if r[0] != axes[0][i / n1] || r[1] != axes[1][i % n1] {
                    return Err(Error::input(format!(
                        "score table row {} breaks the row-major grid order",
                        i + 2
                    )));
                }
            }
        }
        let values = rows.iter().flat_map(|r| r[d..].to_vec()).collect();
        TabulatedScore::new(axes, values)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let d = self.axes.len();
        if d == 1 {
            w.write_record(["x0", "s0"])?;
            for (i, x) in self.axes[0].iter().enumerate() {
                w.write_record([x.to_string(), self.values[i].to_string()])?;
            }
        } else {
            w.write_record(["x0", "x1", "s0", "s1"])?;
            let n1 = self.axes[1].len();
            for (i, x0) in self.axes[0].iter().enumerate() {
                for (j, x1) in self.axes[1].iter().enumerate() {
                    let k = 2 * (i * n1 + j);
                    w.write_record([
                        x0.to_string(),
                        x1.to_string(),
                        self.values[k].to_string(),
                        self.values[k + 1].to_string(),
                    ])?;
                }
            }
        }
        w.flush().map_err(|e| Error::io("<score table>", e))?;
        Ok(())
    }
}

/// Index of the cell containing `x` and the fractional position within it.
fn locate(axis: &[f64], x: f64) -> (usize, f64) {
    if x <= axis[0] {
        return (0, 0.0);
    }
    let last = axis.len() - 1;
    if x >= axis[last] {
        return (last - 1, 1.0);
    }
    let i = axis.partition_point(|&a| a <= x) - 1;
    (i, (x - axis[i]) / (axis[i + 1] - axis[i]))
}

impl ScoreField for TabulatedScore {
    fn dim(&self) -> usize {
        self.axes.len()
    }

    fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::input("query dimension does not match score table"));
        }
        ensure_finite(x)?;
        if self.dim() == 1 {
            let (i, t) = locate(&self.axes[0], x[0]);
            return Ok(vec![(1.0 - t) * self.values[i] + t * self.values[i + 1]]);
        }
        let n1 = self.axes[1].len();
        let (i, t) = locate(&self.axes[0], x[0]);
        let (j, u) = locate(&self.axes[1], x[1]);
        let at = |a: usize, b: usize, c: usize| self.values[2 * (a * n1 + b) + c];
        Ok((0..2)
            .map(|c| {
                (1.0 - t) * (1.0 - u) * at(i, j, c)
                    + t * (1.0 - u) * at(i + 1, j, c)
                    + (1.0 - t) * u * at(i, j + 1, c)
                    + t * u * at(i + 1, j + 1, c)
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::GaussianMixture1D;
    use crate::points::PointSet;

    #[test]
    fn exact_score_delegates() {
        let m = Arc::new(GaussianMixture1D::mixture1());
        let f = exact_score(m.clone());
        assert_eq!(f.eval(&[1.0]).unwrap(), m.score(&[1.0]).unwrap());
        let g = exact_score(Arc::new(GaussianMixture1D::standard_normal()));
        assert!((g.eval(&[0.7]).unwrap()[0] + 0.7).abs() < 1e-15);
    }

    #[test]
    fn exact_score_finite_over_window() {
        let f = exact_score(Arc::new(GaussianMixture1D::mixture3()));
        for i in 0..1000 {
            let x = -10.0 + 20.0 * i as f64 / 999.0;
            assert!(f.eval(&[x]).unwrap()[0].is_finite());
        }
    }

    #[test]
    fn zero_noise_is_identity() {
        let m = Arc::new(GaussianMixture1D::mixture2());
        let base = exact_score(m);
        let noisy = noisy_score(base.clone(), 0.0, 3, NoiseMode::PerPoint).unwrap();
        for (i, x) in [-3.0, 0.1, 2.5].iter().enumerate() {
            assert_eq!(noisy.eval_at_point(i, &[*x]).unwrap(), base.eval(&[*x]).unwrap());
            assert_eq!(noisy.eval(&[*x]).unwrap(), base.eval(&[*x]).unwrap());
        }
        assert!(noisy_score(base, -1.0, 3, NoiseMode::PerPoint).is_err());
    }

    #[test]
    fn per_point_noise_is_fixed_per_index() {
        let base = score_fn(1, |_| vec![0.0]);
        let noisy = noisy_score(base, 4.0, 17, NoiseMode::PerPoint).unwrap();
        let a = noisy.eval_at_point(5, &[0.3]).unwrap();
        let b = noisy.eval_at_point(5, &[0.3]).unwrap();
        let c = noisy.eval_at_point(6, &[0.3]).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn per_call_noise_changes_between_calls() {
        let noisy = noisy_score(score_fn(1, |_| vec![0.0]), 1.0, 17, NoiseMode::PerCall).unwrap();
        let a = noisy.eval_at_point(0, &[0.0]).unwrap();
        let b = noisy.eval_at_point(0, &[0.0]).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn noise_mode_parses() {
        assert_eq!("per-call".parse::<NoiseMode>().unwrap(), NoiseMode::PerCall);
        assert!("sometimes".parse::<NoiseMode>().is_err());
    }

    #[test]
    fn symmetric_two_point_score_vanishes_at_centre() {
        let f = empirical_score(&PointSet::from_1d(vec![-1.5, 1.5]), 0.7).unwrap();
        assert!(f.eval(&[0.0]).unwrap()[0].abs() < 1e-15);
    }

    #[test]
    fn single_bump_score() {
        let est = crate::estimators::gaussian_kde(&PointSet::from_1d(vec![0.8]), 0.5).unwrap();
        let f = EmpiricalScore::new(est);
        for x in [-1.0, 0.0, 0.8, 2.0] {
            let expected = (0.8 - x) / 0.25;
            assert!((f.eval(&[x]).unwrap()[0] - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn tabulated_linear_interpolation_and_clamping() {
        let t = TabulatedScore::new(vec![vec![0.0, 1.0, 3.0]], vec![0.0, 2.0, -2.0]).unwrap();
        assert_eq!(t.eval(&[0.5]).unwrap(), vec![1.0]);
        assert_eq!(t.eval(&[2.0]).unwrap(), vec![0.0]);
        assert_eq!(t.eval(&[-4.0]).unwrap(), vec![0.0]);
        assert_eq!(t.eval(&[9.0]).unwrap(), vec![-2.0]);
    }

    #[test]
    fn tabulated_bilinear_reproduces_linear_field() {
        let field = score_fn(2, |x| vec![2.0 * x[0] - x[1], 0.5 * x[1] + 1.0]);
        let axes = vec![vec![-1.0, 0.0, 1.5, 2.0], vec![-2.0, 0.0, 2.0]];
        let t = TabulatedScore::tabulate(&field, axes).unwrap();
        for x in [[0.3, 0.7], [-0.9, -1.9], [1.9, 1.1]] {
            let a = t.eval(&x).unwrap();
            let b = field.eval(&x).unwrap();
            assert!((a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn table_csv_round_trip() {
        let field = score_fn(2, |x| vec![x[0] * x[1], x[0] - 0.25]);
        let t = TabulatedScore::tabulate(&field, vec![vec![0.0, 0.5, 1.0], vec![-1.0, 1.0]]).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x0,x1,s0,s1\n"));
        assert_eq!(text.lines().count(), 7);
        assert_eq!(TabulatedScore::from_reader(buf.as_slice()).unwrap(), t);
    }

    #[test]
    fn table_rejects_bad_layout() {
        assert!(TabulatedScore::from_reader("x,s\n0,1\n1,2\n".as_bytes()).is_err());
        let shuffled = "x0,x1,s0,s1\n0,0,1,1\n0,1,1,1\n1,1,1,1\n1,0,1,1\n";
        assert!(TabulatedScore::from_reader(shuffled.as_bytes()).is_err());
    }
}
