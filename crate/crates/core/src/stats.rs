//! Paired comparison statistics for repeated benchmark runs.

use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("samples differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need at least two paired observations, got {0}")]
    TooFew(usize),
    #[error("zero variance: the statistic is undefined")]
    ZeroVariance,
    #[error("significance level must be in (0, 1), got {0}")]
    BadAlpha(f64),
}

/// Two index-matched samples; entry `i` of both comes from the same seed.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedSample {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl PairedSample {
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Result<Self, StatsError> {
        if a.len() != b.len() {
            return Err(StatsError::LengthMismatch(a.len(), b.len()));
        }
        if a.len() < 2 {
            return Err(StatsError::TooFew(a.len()));
        }
        Ok(Self { a, b })
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub n: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    /// Sample standard deviation (n − 1 denominator).
    pub sd: f64,
}

pub fn summary(xs: &[f64]) -> Summary {
    let n = xs.len();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var = if n > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };
    Summary {
        n,
        min: xs.iter().copied().fold(f64::INFINITY, f64::min),
        max: xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        mean,
        sd: var.sqrt(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TTestResult {
    pub t: f64,
    pub df: usize,
    /// Two-tailed.
    pub p: f64,
    pub alpha: f64,
    pub critical: f64,
    pub significant: bool,
    /// `None` when either sample is constant.
    pub pearson_r: Option<f64>,
    pub a: Summary,
    pub b: Summary,
}

fn students_t(df: usize) -> StudentsT {
    StudentsT::new(0.0, 1.0, df as f64).expect("df >= 1")
}

/// Two-tailed p-value of `t` under Student's t with `df` degrees of freedom.
pub fn two_tailed_p(t: f64, df: usize) -> f64 {
    (2.0 * students_t(df).cdf(-t.abs())).clamp(0.0, 1.0)
}

/// Critical value `t` with P(|T| > t) = alpha.
pub fn t_critical(alpha: f64, df: usize) -> f64 {
    students_t(df).inverse_cdf(1.0 - alpha / 2.0)
}

/// Paired t-test on `d = b − a`; positive `t` means `a` is smaller.
pub fn paired_t_test(sample: &PairedSample, alpha: f64) -> Result<TTestResult, StatsError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(StatsError::BadAlpha(alpha));
    }
    let n = sample.len();
    if n < 2 {
        return Err(StatsError::TooFew(n));
    }
    let d: Vec<f64> = sample.b.iter().zip(&sample.a).map(|(b, a)| b - a).collect();
    let s = summary(&d);
    let scale = d.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1.0);
    if s.sd <= scale * 1e-12 {
        return Err(StatsError::ZeroVariance);
    }
    let t = s.mean / (s.sd / (n as f64).sqrt());
    let df = n - 1;
    let critical = t_critical(alpha, df);
    Ok(TTestResult {
        t,
        df,
        p: two_tailed_p(t, df),
        alpha,
        critical,
        significant: t.abs() > critical,
        pearson_r: pearson_r(sample).ok(),
        a: summary(&sample.a),
        b: summary(&sample.b),
    })
}

pub fn pearson_r(sample: &PairedSample) -> Result<f64, StatsError> {
    let n = sample.len();
    if n < 2 {
        return Err(StatsError::TooFew(n));
    }
    let ma = sample.a.iter().sum::<f64>() / n as f64;
    let mb = sample.b.iter().sum::<f64>() / n as f64;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (a, b) in sample.a.iter().zip(&sample.b) {
        let (x, y) = (a - ma, b - mb);
        sab += x * y;
        saa += x * x;
        sbb += y * y;
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    Ok((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

/// Percent reduction of `candidate` relative to `baseline`.
pub fn improvement_pct(baseline_mean: f64, candidate_mean: f64) -> f64 {
    100.0 * (baseline_mean - candidate_mean) / baseline_mean
}
