use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordinary least-squares line `y = intercept + slope x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.len() != ys.len() {
        return Err(Error::Degenerate("x and y lengths differ"));
    }
    if xs.len() < 2 {
        return Err(Error::Degenerate("need at least two points"));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::Degenerate("non-finite data"));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::Degenerate("all x values are equal"));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let slope_stderr = if xs.len() > 2 {
        let ssr: f64 = xs
            .iter()
            .zip(ys)
            .map(|(x, y)| (y - intercept - slope * x).powi(2))
            .sum();
        (ssr / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok(LineFit {
        slope,
        intercept,
        slope_stderr,
    })
}

/// Slope of `log y` against `log x`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.iter().chain(ys).any(|&v| !(v > 0.0)) {
        return Err(Error::Degenerate("log-log fit needs positive data"));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    fit_line(&lx, &ly)
}

/// Sample mean and its standard error.
pub fn mean_stderr(xs: &[f64]) -> Result<(f64, f64)> {
    if xs.is_empty() {
        return Err(Error::EmptySample);
    }
    // Shifted by the first sample so that constant data come out exact.
    let n = xs.len() as f64;
    let x0 = xs[0];
    let dm = xs.iter().map(|x| x - x0).sum::<f64>() / n;
    if xs.len() == 1 {
        return Ok((x0, 0.0));
    }
    let var = xs.iter().map(|x| (x - x0 - dm).powi(2)).sum::<f64>() / (n - 1.0);
    Ok((x0 + dm, (var / n).sqrt()))
}

/// `(E X)^{1/q}` with a delta-method standard error, for non-negative `X`.
pub fn root_mean(xs: &[f64], q: f64) -> Result<(f64, f64)> {
    let (m, se) = mean_stderr(xs)?;
    if m <= 0.0 {
        return Ok((0.0, 0.0));
    }
    let r = m.powf(1.0 / q);
    Ok((r, se * r / (q * m)))
}
