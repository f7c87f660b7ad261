use serde::Serialize;

use crate::error::{Error, Result};

/// Least-squares fit of log(value) = a + λ t.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    /// λ, in 1/time.
    pub exponent: f64,
    pub window: (f64, f64),
    pub r_squared: f64,
    pub points: usize,
}

/// Fits an exponential to the samples with t inside `window` (inclusive).
pub fn fit_decay(series: &[(f64, f64)], window: (f64, f64)) -> Result<DecayFit> {
    let pts: Vec<(f64, f64)> = series
        .iter()
        .copied()
        .filter(|(t, _)| *t >= window.0 - 1e-12 && *t <= window.1 + 1e-12)
        .collect();
    if pts.len() < 3 {
        return Err(Error::TooFewPoints(pts.len()));
    }
    if let Some(&(_, v)) = pts.iter().find(|(_, v)| !(*v > 0.0)) {
        return Err(Error::NonPositive(v));
    }
    let n = pts.len() as f64;
    let (st, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (t, v)| (a + t, b + v.ln()));
    let (tm, ym) = (st / n, sy / n);
    let (mut stt, mut sty, mut syy) = (0.0, 0.0, 0.0);
    for (t, v) in &pts {
        let (dt, dy) = (t - tm, v.ln() - ym);
        stt += dt * dt;
        sty += dt * dy;
        syy += dy * dy;
    }
    if stt == 0.0 {
        return Err(Error::TooFewPoints(1));
    }
    let exponent = sty / stt;
    // a perfectly flat series is fitted exactly
    let r_squared = if syy <= f64::EPSILON * f64::EPSILON * n { 1.0 } else { (sty * sty / (stt * syy)).clamp(0.0, 1.0) };
    Ok(DecayFit { exponent, window, r_squared, points: pts.len() })
}
