//! Least-squares power laws `y ≈ A·x^p` and `y ≈ A·x^p + B`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLaw {
    pub exponent: f64,
    pub prefactor: f64,
    pub offset: f64,
    /// Root-mean-square residual of the fit in the fitted variable.
    pub rms: f64,
}

/// Returns `(slope, intercept, rms)` of the least-squares line through
/// `(x, y)`.
fn line(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    let n = x.len() as f64;
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InvalidParams("a fit needs at least two paired samples".into()));
    }
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParams("fit abscissae are all equal".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    Ok((slope, intercept, (rss / n).sqrt()))
}

/// Straight-line fit in log-log coordinates; needs `x, y > 0`.
pub fn power_law_fit(x: &[f64], y: &[f64]) -> Result<PowerLaw> {
    if x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidParams("log-log fit needs positive data".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let (exponent, intercept, rms) = line(&lx, &ly)?;
    Ok(PowerLaw { exponent, prefactor: intercept.exp(), offset: 0.0, rms })
}

/// Fit of `A·x^p + B`: linear least squares in `(A, B)` for each `p`, and a
/// scan plus golden-section search over `p ∈ [p_lo, p_hi]`.
pub fn power_law_offset_fit(x: &[f64], y: &[f64], p_lo: f64, p_hi: f64) -> Result<PowerLaw> {
    if x.len() < 3 || x.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidParams("offset power-law fit needs at least three positive abscissae".into()));
    }
    let at = |p: f64| -> Result<PowerLaw> {
        if p.abs() < 1e-9 {
            return Ok(PowerLaw { exponent: p, prefactor: f64::NAN, offset: f64::NAN, rms: f64::INFINITY });
        }
        let xp: Vec<f64> = x.iter().map(|v| v.powf(p)).collect();
        let (a, b, rms) = line(&xp, y)?;
        Ok(PowerLaw { exponent: p, prefactor: a, offset: b, rms })
    };
    let n = 400;
    let mut best = at(p_lo)?;
    let mut best_i: usize = 0;
    for i in 1..=n {
        let f = at(p_lo + (p_hi - p_lo) * i as f64 / n as f64)?;
        if f.rms < best.rms {
            best = f;
            best_i = i;
        }
    }
    let h = (p_hi - p_lo) / n as f64;
    let (mut a, mut b) = (p_lo + h * best_i.saturating_sub(1) as f64, (p_lo + h * (best_i + 1) as f64).min(p_hi));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if at(c)?.rms < at(d)?.rms {
            b = d;
        } else {
            a = c;
        }
    }
    let refined = at(0.5 * (a + b))?;
    Ok(if refined.rms <= best.rms { refined } else { best })
}
