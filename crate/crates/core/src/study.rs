//! Refinement studies: log-log convergence slopes and stability ratios.

use std::fmt;

use crate::error::{Error, Result};

/// Fitted convergence order of a metric against the grid spacing.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Slope {
    /// The metric is at round-off level on every level.
    Exact,
    Value(f64),
}

impl Slope {
    /// True if the slope is at least `min`; exact metrics always qualify.
    pub fn at_least(self, min: f64) -> bool {
        match self {
            Slope::Exact => true,
            Slope::Value(s) => s >= min,
        }
    }
}

impl fmt::Display for Slope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slope::Exact => write!(f, "exact"),
            Slope::Value(s) => write!(f, "{s:.3}"),
        }
    }
}

/// Least-squares slope of `ln(value)` against `ln(h)`.
///
/// Needs at least three levels with strictly decreasing `h`. When every
/// value is at most `exact_floor` the metric is reported as [`Slope::Exact`].
pub fn loglog_slope(hs: &[f64], values: &[f64], exact_floor: f64) -> Result<Slope> {
    if hs.len() != values.len() {
        return Err(Error::InvalidArgument("levels and values differ in length".into()));
    }
    if hs.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "a refinement study needs at least 3 levels, got {}",
            hs.len()
        )));
    }
    if hs.windows(2).any(|w| w[1] >= w[0]) || hs.iter().any(|h| *h <= 0.0) {
        return Err(Error::InvalidArgument("grid spacings must be positive and strictly decreasing".into()));
    }
    if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::Numerical("metric values must be finite and non-negative".into()));
    }
    if values.iter().all(|v| *v <= exact_floor) {
        return Ok(Slope::Exact);
    }
    let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.max(1e-300).ln()).collect();
    Ok(Slope::Value(fit_slope(&xs, &ys)))
}

/// Ordinary least-squares slope of `ys` against `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}

/// Ratio `fine / coarse` lies in `[0.5, 2]`.
pub fn ratio_stable(coarse: f64, fine: f64) -> bool {
    if coarse == 0.0 && fine == 0.0 {
        return true;
    }
    let r = fine / coarse;
    (0.5..=2.0).contains(&r)
}

/// The default refinement ladder `h = 1/64, 1/128, 1/256`.
pub fn default_ladder() -> Vec<f64> {
    vec![1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0]
}
