//! Least-squares scaling fits `E(L)` against constant, `a + b ln L` and
//! `a + b L`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitModel {
    Constant,
    Logarithmic,
    Linear,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: FitModel,
    pub a: f64,
    pub b: f64,
    /// Residual sum of squares.
    pub rss: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub sizes: Vec<usize>,
    pub values: Vec<f64>,
    pub fits: Vec<FitResult>,
    pub best: FitModel,
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let rss = xs.iter().zip(ys).map(|(x, y)| (y - a - b * x).powi(2)).sum();
    (a, b, rss)
}

/// Fits all three laws and picks one. The series is constant when neither
/// the log slope nor the linear growth over the size range beats a log law
/// of slope `area_law_slope`; otherwise the smaller residual of the log and
/// linear fits wins (ties go to log).
pub fn fit_scaling(sizes: &[usize], values: &[f64], area_law_slope: f64) -> Result<ScalingFit> {
    let mut distinct = sizes.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if sizes.len() != values.len() || distinct.len() < 4 {
        return Err(Error::InvalidParameter("scaling fits need values at 4 or more distinct sizes".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("scaling fit over non-finite values".into()));
    }
    let lin_x: Vec<f64> = sizes.iter().map(|&l| l as f64).collect();
    let log_x: Vec<f64> = lin_x.iter().map(|x| x.ln()).collect();
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let constant =
        FitResult { model: FitModel::Constant, a: mean, b: 0.0, rss: values.iter().map(|v| (v - mean).powi(2)).sum() };
    let (a, b, rss) = least_squares(&log_x, values);
    let log = FitResult { model: FitModel::Logarithmic, a, b, rss };
    let (a, b, rss) = least_squares(&lin_x, values);
    let linear = FitResult { model: FitModel::Linear, a, b, rss };

    let (lmin, lmax) = (distinct[0] as f64, distinct[distinct.len() - 1] as f64);
    let allowed = area_law_slope * (lmax / lmin).ln();
    let flat = log.b.abs() * (lmax / lmin).ln() <= allowed && linear.b.abs() * (lmax - lmin) <= allowed;
    let best = if flat {
        FitModel::Constant
    } else if linear.rss < log.rss {
        FitModel::Linear
    } else {
        FitModel::Logarithmic
    };
    Ok(ScalingFit { sizes: sizes.to_vec(), values: values.to_vec(), fits: vec![constant, log, linear], best })
}
