//! Benchmark functions, error norms and convergence rates.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TestFunction {
    F1,
    F2,
    F3,
    F4,
}

impl TestFunction {
    pub const ALL: [TestFunction; 4] = [Self::F1, Self::F2, Self::F3, Self::F4];

    pub fn dim(self) -> usize {
        match self {
            Self::F1 | Self::F2 => 2,
            Self::F3 | Self::F4 => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::F1 => "f1",
            Self::F2 => "f2",
            Self::F3 => "f3",
            Self::F4 => "f4",
        }
    }

    pub fn eval(self, p: &[f64]) -> Result<f64> {
        if p.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: p.len(),
            });
        }
        Ok(self.eval_unchecked(p))
    }

    /// Evaluates without checking the point's dimension.
    pub fn eval_unchecked(self, p: &[f64]) -> f64 {
        match self {
            Self::F1 => franke2(p[0], p[1]),
            Self::F2 => (1.25 + (5.4 * p[1]).cos()) / (6.0 + 6.0 * (3.0 * p[0] - 1.0).powi(2)),
            Self::F3 => franke3(p[0], p[1], p[2]),
            Self::F4 => {
                64.0 * p[0] * (1.0 - p[0]) * p[1] * (1.0 - p[1]) * p[2] * (1.0 - p[2])
            }
        }
    }
}

impl std::str::FromStr for TestFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "f1" => Ok(Self::F1),
            "f2" => Ok(Self::F2),
            "f3" => Ok(Self::F3),
            "f4" => Ok(Self::F4),
            other => Err(Error::InvalidParameter(format!("unknown test function '{other}'"))),
        }
    }
}

fn franke2(x: f64, y: f64) -> f64 {
    let (a, b) = (9.0 * x, 9.0 * y);
    0.75 * (-((a - 2.0).powi(2) + (b - 2.0).powi(2)) / 4.0).exp()
        + 0.75 * (-(a + 1.0).powi(2) / 49.0 - (b + 1.0) / 10.0).exp()
        + 0.5 * (-((a - 7.0).powi(2) + (b - 3.0).powi(2)) / 4.0).exp()
        - 0.2 * (-(a - 4.0).powi(2) - (b - 7.0).powi(2)).exp()
}

fn franke3(x: f64, y: f64, z: f64) -> f64 {
    let (a, b, c) = (9.0 * x, 9.0 * y, 9.0 * z);
    0.75 * (-((a - 2.0).powi(2) + (b - 2.0).powi(2) + (c - 2.0).powi(2)) / 4.0).exp()
        + 0.75 * (-(a + 1.0).powi(2) / 49.0 - (b + 1.0) / 10.0 - (c + 1.0) / 10.0).exp()
        + 0.5 * (-((a - 7.0).powi(2) + (b - 3.0).powi(2) + (c - 5.0).powi(2)) / 4.0).exp()
        - 0.2 * (-(a - 4.0).powi(2) - (b - 7.0).powi(2) - (c - 5.0).powi(2)).exp()
}

fn check_lengths(truth: &[f64], approx: &[f64]) -> Result<()> {
    if truth.len() != approx.len() || truth.is_empty() {
        return Err(Error::LengthMismatch(truth.len(), approx.len()));
    }
    Ok(())
}

/// Maximum absolute error.
pub fn mae(truth: &[f64], approx: &[f64]) -> Result<f64> {
    check_lengths(truth, approx)?;
    Ok(truth
        .iter()
        .zip(approx)
        .map(|(t, a)| (t - a).abs())
        .fold(0.0, f64::max))
}

/// Root mean square error.
pub fn rmse(truth: &[f64], approx: &[f64]) -> Result<f64> {
    check_lengths(truth, approx)?;
    let sum: f64 = truth.iter().zip(approx).map(|(t, a)| (t - a).powi(2)).sum();
    Ok((sum / truth.len() as f64).sqrt())
}

/// Empirical rate `log(rmse_prev/rmse_k) / log(h_prev/h_k)`.
pub fn convergence_rate(rmse_prev: f64, rmse_k: f64, h_prev: f64, h_k: f64) -> Result<f64> {
    let positive = [rmse_prev, rmse_k, h_prev, h_k]
        .iter()
        .all(|v| *v > 0.0 && v.is_finite());
    if !positive || h_prev == h_k {
        return Err(Error::DegenerateRatio);
    }
    Ok((rmse_prev / rmse_k).ln() / (h_prev / h_k).ln())
}
