//! Monte-Carlo power of the F test for constant against quadratic
//! regression on realized designs, with an exact noncentral-F reference.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Cauchy, Distribution, Normal};
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, FisherSnedecor};
use statrs::function::beta::beta_reg;
use statrs::function::factorial::ln_factorial;

use crate::design::Design;
use crate::error::{Error, Result};

/// Replications below this count are flagged as unreliable.
pub const MIN_REPORTED_REPLICATIONS: usize = 1000;

/// Integer allocation of `n` observations to design points.
#[derive(Debug, Clone, PartialEq)]
pub struct RealizedDesign {
    support: Vec<f64>,
    counts: Vec<usize>,
}

impl RealizedDesign {
    pub fn new(support: Vec<f64>, counts: Vec<usize>) -> Result<Self> {
        if support.len() != counts.len() || support.is_empty() {
            return Err(Error::InvalidDesign("support and counts differ in length".into()));
        }
        if counts.contains(&0) {
            return Err(Error::InvalidDesign("every support point needs an observation".into()));
        }
        Ok(Self { support, counts })
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn n(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Every observation's location, point by point.
    pub fn points(&self) -> Vec<f64> {
        self.support
            .iter()
            .zip(&self.counts)
            .flat_map(|(&x, &c)| std::iter::repeat_n(x, c))
            .collect()
    }
}

/// Efficient rounding: `⌈(n - l/2) ω_i⌉`, then counts are moved one at a
/// time by the smallest/largest quotient rule until they sum to `n`.
pub fn efficient_round(design: &Design, n: usize) -> Result<RealizedDesign> {
    let l = design.len();
    if n < l {
        return Err(Error::TooFewObservations { n, support: l });
    }
    let w = design.weights();
    let base = n as f64 - 0.5 * l as f64;
    let mut counts: Vec<usize> = w.iter().map(|&wi| ((base * wi).ceil() as usize).max(1)).collect();
    loop {
        let total: usize = counts.iter().sum();
        if total == n {
            break;
        }
        if total < n {
            let j = (0..l)
                .min_by(|&i, &k| (counts[i] as f64 / w[i]).total_cmp(&(counts[k] as f64 / w[k])))
                .unwrap();
            counts[j] += 1;
        } else {
            let j = (0..l)
                .filter(|&i| counts[i] > 1)
                .max_by(|&i, &k| {
                    ((counts[i] - 1) as f64 / w[i]).total_cmp(&((counts[k] - 1) as f64 / w[k]))
                })
                .ok_or(Error::TooFewObservations { n, support: l })?;
            counts[j] -= 1;
        }
    }
    RealizedDesign::new(design.support().to_vec(), counts)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FTestResult {
    pub statistic: f64,
    pub reject: bool,
}

/// F test of the constant model inside the quadratic model for fixed
/// observation points; the thin Q factor of the regressors is reused for
/// every response vector.
#[derive(Debug, Clone)]
pub struct FTest {
    q: DMatrix<f64>,
    critical: f64,
}

impl FTest {
    pub fn new(points: &[f64], level: f64) -> Result<Self> {
        if !(level > 0.0 && level < 1.0) {
            return Err(Error::InvalidArgument(format!("level {level} must lie in (0, 1)")));
        }
        let n = points.len();
        let mut distinct = points.to_vec();
        distinct.sort_by(f64::total_cmp);
        distinct.dedup();
        if distinct.len() < 3 {
            return Err(Error::SingularFit(format!(
                "{} distinct points cannot identify a quadratic",
                distinct.len()
            )));
        }
        if n <= 3 {
            return Err(Error::TooFewObservations { n, support: 4 });
        }
        let x = DMatrix::from_fn(n, 3, |i, j| points[i].powi(j as i32));
        let q = x.qr().q();
        let f = FisherSnedecor::new(2.0, (n - 3) as f64)
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        Ok(Self {
            q,
            critical: f.inverse_cdf(1.0 - level),
        })
    }

    pub fn critical_value(&self) -> f64 {
        self.critical
    }

    pub fn apply(&self, y: &DVector<f64>) -> FTestResult {
        let n = y.len();
        let mean = y.mean();
        let rss0: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
        let fitted = &self.q * (self.q.transpose() * y);
        let rss1: f64 = (y - fitted).norm_squared();
        let scale = rss0.max(y.norm_squared()).max(f64::MIN_POSITIVE);
        let statistic = if rss1 <= 1e-28 * scale {
            if rss0 - rss1 > 1e-28 * scale {
                f64::INFINITY
            } else {
                0.0
            }
        } else {
            ((rss0 - rss1).max(0.0) / 2.0) / (rss1 / (n - 3) as f64)
        };
        FTestResult {
            statistic,
            reject: statistic > self.critical,
        }
    }
}

/// One-shot F test on `(x, y)` pairs.
pub fn f_test(data: &[(f64, f64)], level: f64) -> Result<FTestResult> {
    let xs: Vec<f64> = data.iter().map(|p| p.0).collect();
    let test = FTest::new(&xs, level)?;
    Ok(test.apply(&DVector::from_iterator(data.len(), data.iter().map(|p| p.1))))
}

/// Data-generating mean functions of the power study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TruthModel {
    /// `3 + ϑ x / 2 + ϑ x²`: the ratio of the coefficients is fixed at 1/2.
    Proportional,
    /// `3 + x / 8 + ϑ x²`.
    FixedLinear,
}

impl TruthModel {
    pub fn mean(&self, vartheta: f64, x: f64) -> f64 {
        match self {
            TruthModel::Proportional => 3.0 + 0.5 * vartheta * x + vartheta * x * x,
            TruthModel::FixedLinear => 3.0 + 0.125 * x + vartheta * x * x,
        }
    }
}

/// Each error is independently replaced by a Cauchy variate with
/// probability `fraction`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contamination {
    pub fraction: f64,
    pub cauchy_scale: f64,
}

impl Default for Contamination {
    fn default() -> Self {
        Self {
            fraction: 0.1,
            cauchy_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationSpec {
    pub truth: TruthModel,
    pub vartheta: Vec<f64>,
    pub sigma2: f64,
    pub contamination: Option<Contamination>,
    pub level: f64,
    pub replications: usize,
    pub seed: u64,
}

impl SimulationSpec {
    pub fn new(truth: TruthModel, vartheta: Vec<f64>) -> Self {
        Self {
            truth,
            vartheta,
            sigma2: 0.5,
            contamination: None,
            level: 0.05,
            replications: 50_000,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::InvalidArgument(format!("level {} must lie in (0, 1)", self.level)));
        }
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return Err(Error::InvalidArgument("σ² must be positive".into()));
        }
        if self.replications == 0 {
            return Err(Error::InvalidArgument("at least one replication is needed".into()));
        }
        if let Some(c) = self.contamination {
            if !(0.0..=1.0).contains(&c.fraction) || !(c.cauchy_scale > 0.0) {
                return Err(Error::InvalidArgument("invalid contamination".into()));
            }
        }
        if self.vartheta.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("ϑ₂ grid must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerPoint {
    pub vartheta2: f64,
    pub rejections: u64,
    pub replications: u64,
    pub power: f64,
    /// Binomial standard error `sqrt(p(1 - p)/N)`.
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerCurve {
    pub points: Vec<PowerPoint>,
    pub contaminated: bool,
    /// Fewer than [`MIN_REPORTED_REPLICATIONS`] replications were run.
    pub low_replication_warning: bool,
}

/// Counter-based generator for replication `rep` at grid index `index`:
/// the key is the seed, the stream encodes the pair.
fn substream(seed: u64, index: usize, rep: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((index as u64) << 40) | rep as u64);
    rng
}

/// Rejection frequencies of the F test over the `ϑ₂` grid.
pub fn simulate_power(spec: &SimulationSpec, realized: &RealizedDesign) -> Result<PowerCurve> {
    spec.validate()?;
    if spec.replications >= 1 << 40 {
        return Err(Error::InvalidArgument("too many replications".into()));
    }
    let xs = realized.points();
    let test = FTest::new(&xs, spec.level)?;
    let normal = Normal::new(0.0, spec.sigma2.sqrt()).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let cauchy = spec
        .contamination
        .map(|c| Cauchy::new(0.0, c.cauchy_scale).map(|d| (c.fraction, d)))
        .transpose()
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut points = Vec::with_capacity(spec.vartheta.len());
    for (index, &vartheta) in spec.vartheta.iter().enumerate() {
        let mean: Vec<f64> = xs.iter().map(|&x| spec.truth.mean(vartheta, x)).collect();
        let rejections: u64 = (0..spec.replications)
            .into_par_iter()
            .map(|rep| {
                let mut rng = substream(spec.seed, index, rep);
                let y = DVector::from_iterator(
                    mean.len(),
                    mean.iter().map(|&m| {
                        let e = match &cauchy {
                            Some((p, c)) if rng.random::<f64>() < *p => c.sample(&mut rng),
                            _ => normal.sample(&mut rng),
                        };
                        m + e
                    }),
                );
                test.apply(&y).reject as u64
            })
            .sum();
        let total = spec.replications as u64;
        let power = rejections as f64 / total as f64;
        points.push(PowerPoint {
            vartheta2: vartheta,
            rejections,
            replications: total,
            power,
            stderr: (power * (1.0 - power) / total as f64).sqrt(),
        });
    }
    Ok(PowerCurve {
        points,
        contaminated: spec.contamination.is_some(),
        low_replication_warning: spec.replications < MIN_REPORTED_REPLICATIONS,
    })
}

/// Noncentrality `Σ n_i (η(x_i) - η̄)² / σ²` of the F test.
pub fn noncentrality(realized: &RealizedDesign, truth: TruthModel, vartheta: f64, sigma2: f64) -> f64 {
    let n = realized.n() as f64;
    let pts: Vec<(f64, f64)> = realized
        .support()
        .iter()
        .zip(realized.counts())
        .map(|(&x, &c)| (truth.mean(vartheta, x), c as f64))
        .collect();
    let mean = pts.iter().map(|(m, c)| m * c).sum::<f64>() / n;
    pts.iter().map(|(m, c)| c * (m - mean).powi(2)).sum::<f64>() / sigma2
}

/// Exact power of the level-`level` F(2, n-3) test under normal errors,
/// from the Poisson mixture of regularized incomplete beta functions.
pub fn noncentral_power_oracle(
    realized: &RealizedDesign,
    truth: TruthModel,
    vartheta: f64,
    sigma2: f64,
    level: f64,
) -> Result<f64> {
    let test = FTest::new(&realized.points(), level)?;
    let lambda = noncentrality(realized, truth, vartheta, sigma2);
    let (d1, d2) = (2.0, (realized.n() - 3) as f64);
    Ok(noncentral_f_sf(test.critical_value(), d1, d2, lambda))
}

/// `P(F > c)` for the noncentral F distribution with noncentrality `lambda`.
pub fn noncentral_f_sf(c: f64, d1: f64, d2: f64, lambda: f64) -> f64 {
    let x = d1 * c / (d1 * c + d2);
    let half = 0.5 * lambda;
    // the Poisson weights are summed outward from their mode
    let mode = half.floor() as u64;
    let log_weight = |j: u64| -half + j as f64 * half.max(f64::MIN_POSITIVE).ln() - ln_factorial(j);
    let term = |j: u64| {
        let w = if half == 0.0 {
            if j == 0 { 1.0 } else { 0.0 }
        } else {
            log_weight(j).exp()
        };
        (w, w * beta_reg(0.5 * d1 + j as f64, 0.5 * d2, x))
    };
    let (_, mut cdf) = term(mode);
    for j in (0..mode).rev() {
        let (w, t) = term(j);
        cdf += t;
        if w < 1e-18 {
            break;
        }
    }
    let mut j = mode + 1;
    loop {
        let (w, t) = term(j);
        cdf += t;
        if w < 1e-18 || j > mode + 100_000 {
            break;
        }
        j += 1;
    }
    (1.0 - cdf).clamp(0.0, 1.0)
}

#[derive(Serialize)]
struct CsvRow<'a> {
    vartheta2: f64,
    power: f64,
    stderr: f64,
    design_id: &'a str,
    contamination: bool,
}

/// Writes curves as CSV with columns `vartheta2,power,stderr,design_id,contamination`.
pub fn write_csv<W: Write>(out: W, curves: &[(&str, &PowerCurve)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for (id, curve) in curves {
        for p in &curve.points {
            w.serialize(CsvRow {
                vartheta2: p.vartheta2,
                power: p.power,
                stderr: p.stderr,
                design_id: id,
                contamination: curve.contaminated,
            })
            .map_err(|e| Error::Io(e.to_string()))?;
        }
    }
    w.flush()?;
    Ok(())
}
