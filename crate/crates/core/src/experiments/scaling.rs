//! Power-law fits `time ≈ prefactor * size^exponent` in log-log space.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalingFit<S: Scalar> {
    pub exponent: S,
    pub prefactor: S,
    pub r_squared: S,
}

/// Least-squares fit of `ln(time)` against `ln(size)`.
pub fn scaling_fit<S: Scalar>(points: &[(S, S)]) -> Result<ScalingFit<S>> {
    if points.len() < 3 {
        return Err(Error::DegenerateInput(format!(
            "need at least 3 points, got {}",
            points.len()
        )));
    }
    for w in points.windows(2) {
        if !(w[1].0 > w[0].0) {
            return Err(Error::DegenerateInput("sizes must be strictly increasing".into()));
        }
    }
    if points.iter().any(|&(s, t)| !(s > S::zero() && t > S::zero())) {
        return Err(Error::DegenerateInput("sizes and times must be positive".into()));
    }
    let n = S::from_usize_lossy(points.len());
    let xs: Vec<S> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<S> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().copied().sum::<S>() / n;
    let my = ys.iter().copied().sum::<S>() / n;
    let sxx: S = xs.iter().map(|&x| (x - mx) * (x - mx)).sum();
    let sxy: S = xs.iter().zip(&ys).map(|(&x, &y)| (x - mx) * (y - my)).sum();
    let syy: S = ys.iter().map(|&y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: S = xs
        .iter()
        .zip(&ys)
        .map(|(&x, &y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let r_squared = if syy > S::zero() {
        (S::one() - ss_res / syy).max(S::zero()).min(S::one())
    } else {
        S::one()
    };
    Ok(ScalingFit {
        exponent: slope,
        prefactor: intercept.exp(),
        r_squared,
    })
}
