//! Correlation, one-sample t-test, logistic regression and simple linear
//! regression.

use crate::error::{CtmError, Result};

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample variance (denominator `n-1`).
pub fn variance(values: &[f64]) -> f64 {
    let m = mean(values);
    values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (values.len() as f64 - 1.0)
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(CtmError::InvalidArgument(format!(
            "correlating series of lengths {} and {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(CtmError::Degenerate(
            "correlation needs at least two points".into(),
        ));
    }
    let mx = mean(x);
    let my = mean(y);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(CtmError::Degenerate(
            "correlation with a constant series".into(),
        ));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Pairwise Pearson correlations between `columns` (one column per measure).
pub fn correlation_matrix(columns: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let k = columns.len();
    if let Some(c) = columns.first() {
        if c.len() < 3 {
            return Err(CtmError::Degenerate(
                "correlation matrix needs at least three observations".into(),
            ));
        }
    }
    let mut out = vec![vec![1.0; k]; k];
    for i in 0..k {
        for j in 0..i {
            let r = pearson(&columns[i], &columns[j])?;
            out[i][j] = r;
            out[j][i] = r;
        }
    }
    Ok(out)
}

/// `ln Γ(x)` for `x > 0` (Lanczos, g = 7, n = 9).
pub fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let t = x + 7.5;
    let mut a = COEF[0];
    for (i, c) in COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Continued fraction for the incomplete beta (modified Lentz).
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=10_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta function `I_x(a, b)`.
pub fn inc_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - x) / b
    }
}

/// Two-sided p-value of Student's t with `df` degrees of freedom.
pub fn student_t_two_sided(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    inc_beta(df / 2.0, 0.5, df / (df + t * t))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TTest {
    pub t: f64,
    pub df: f64,
    pub p: f64,
    pub mean: f64,
    pub sd: f64,
}

/// One-sample t-test of `values` against `mu0`.
pub fn one_sample_t(values: &[f64], mu0: f64) -> Result<TTest> {
    if values.len() < 2 {
        return Err(CtmError::Degenerate(
            "t-test needs at least two values".into(),
        ));
    }
    let n = values.len() as f64;
    let m = mean(values);
    let sd = variance(values).sqrt();
    let df = n - 1.0;
    let (t, p) = if sd == 0.0 {
        if m == mu0 {
            (0.0, 1.0)
        } else {
            (f64::INFINITY.copysign(m - mu0), 0.0)
        }
    } else {
        let t = (m - mu0) / (sd / n.sqrt());
        (t, student_t_two_sided(t, df))
    };
    Ok(TTest {
        t,
        df,
        p,
        mean: m,
        sd,
    })
}

/// Logistic regression of a binary response on one predictor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegressionFit {
    pub slope: f64,
    pub intercept: f64,
    /// `e^slope`
    pub odds_ratio: f64,
    /// Predictor value with fitted probability 0.5, `-intercept/slope`.
    pub threshold: f64,
    pub se_slope: f64,
    /// Two-sided Wald test of the slope.
    pub p_value_slope: f64,
    pub log_likelihood: f64,
    pub iterations: usize,
}

impl RegressionFit {
    pub fn probability(&self, x: f64) -> f64 {
        logistic(self.intercept + self.slope * x)
    }
}

pub fn logistic(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

fn log_likelihood(x: &[f64], y: &[bool], b0: f64, b1: f64) -> f64 {
    x.iter()
        .zip(y)
        .map(|(&xi, &yi)| {
            let eta = b0 + b1 * xi;
            // log(1 + e^eta), stable in both tails
            let softplus = if eta > 0.0 {
                eta + (-eta).exp().ln_1p()
            } else {
                eta.exp().ln_1p()
            };
            if yi {
                eta - softplus
            } else {
                -softplus
            }
        })
        .sum()
}

pub const IRLS_TOLERANCE: f64 = 1e-10;
pub const IRLS_MAX_ITER: usize = 100;

/// Maximum-likelihood logistic fit by iteratively reweighted least squares.
/// Stops when the log-likelihood changes by less than `1e-10` or after 100
/// iterations.
pub fn logistic_fit(x: &[f64], y: &[bool]) -> Result<RegressionFit> {
    if x.len() != y.len() {
        return Err(CtmError::InvalidArgument(
            "predictor and response lengths differ".into(),
        ));
    }
    let pos: Vec<f64> = x
        .iter()
        .zip(y)
        .filter(|(_, &b)| b)
        .map(|(&v, _)| v)
        .collect();
    let neg: Vec<f64> = x
        .iter()
        .zip(y)
        .filter(|(_, &b)| !b)
        .map(|(&v, _)| v)
        .collect();
    if pos.is_empty() || neg.is_empty() {
        return Err(CtmError::Degenerate(
            "both response classes must be present".into(),
        ));
    }
    let max = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    if max(&pos) == min(&pos) && max(&neg) == min(&neg) && max(&pos) == max(&neg) {
        return Err(CtmError::Degenerate("predictor is constant".into()));
    }
    if max(&neg) <= min(&pos) || max(&pos) <= min(&neg) {
        return Err(CtmError::PerfectSeparation);
    }

    let (mut b0, mut b1) = (0.0, 0.0);
    let mut ll = log_likelihood(x, y, b0, b1);
    let mut iterations = 0;
    let mut info = [[0.0; 2]; 2];
    loop {
        iterations += 1;
        // Weighted normal equations X'WX b = X'Wz.
        let (mut s00, mut s01, mut s11, mut r0, mut r1) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (&xi, &yi) in x.iter().zip(y) {
            let p = logistic(b0 + b1 * xi);
            let w = (p * (1.0 - p)).max(1e-300);
            let z = b0 + b1 * xi + (f64::from(u8::from(yi)) - p) / w;
            s00 += w;
            s01 += w * xi;
            s11 += w * xi * xi;
            r0 += w * z;
            r1 += w * xi * z;
        }
        let det = s00 * s11 - s01 * s01;
        if det <= 0.0 || !det.is_finite() {
            return Err(CtmError::Degenerate("singular information matrix".into()));
        }
        b0 = (s11 * r0 - s01 * r1) / det;
        b1 = (s00 * r1 - s01 * r0) / det;
        let next = log_likelihood(x, y, b0, b1);
        let delta = (next - ll).abs();
        ll = next;
        if delta < IRLS_TOLERANCE || iterations >= IRLS_MAX_ITER {
            break;
        }
    }
    // Information matrix at the estimate.
    for (&xi, _) in x.iter().zip(y) {
        let p = logistic(b0 + b1 * xi);
        let w = p * (1.0 - p);
        info[0][0] += w;
        info[0][1] += w * xi;
        info[1][1] += w * xi * xi;
    }
    let det = info[0][0] * info[1][1] - info[0][1] * info[0][1];
    let se_slope = (info[0][0] / det).sqrt();
    let z = b1 / se_slope;
    Ok(RegressionFit {
        slope: b1,
        intercept: b0,
        odds_ratio: b1.exp(),
        threshold: -b0 / b1,
        se_slope,
        p_value_slope: statrs::function::erf::erfc(z.abs() / std::f64::consts::SQRT_2),
        log_likelihood: ll,
        iterations,
    })
}

/// Ordinary least squares `y = intercept + slope·x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    let r = pearson(x, y)?;
    let mx = mean(x);
    let my = mean(y);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    Ok(LinearFit {
        slope,
        intercept: my - slope * mx,
        r_squared: r * r,
    })
}
