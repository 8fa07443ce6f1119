//! Noise-rate sweeps on the line and negativity decay runs.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::observables::{
    negativity, position_distribution, std_dev, top_hat_reference, tvd, Observable,
};
use crate::scalar::Scalar;
use crate::walk::{evolve, evolve_with, NoiseModel, NoiseTarget, WalkConfig};

/// Final observables of one line walk in a sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRow<S: Scalar> {
    pub p: S,
    /// Unhalved TVD to the top-hat for `steps`.
    pub tvd_final: S,
    pub negativity_final: S,
    pub sigma_final: S,
}

/// Evaluates one line walk of `steps` steps per noise rate. Grid points run
/// in parallel; rows come back in grid order.
pub fn sweep_noise<S: Scalar>(steps: usize, target: NoiseTarget, p_grid: &[S]) -> Result<Vec<SweepRow<S>>> {
    if steps < 1 {
        return Err(Error::InvalidConfig("sweep needs at least one step".into()));
    }
    for pair in p_grid.windows(2) {
        if !(pair[0] <= pair[1]) {
            return Err(Error::InvalidConfig("noise grid must be sorted".into()));
        }
    }
    let lattice = Lattice::line(steps)?;
    let reference = top_hat_reference::<S>(lattice, steps)?;
    p_grid
        .par_iter()
        .map(|&p| {
            let cfg = WalkConfig::new(lattice, steps, NoiseModel::new(target, p)?)?;
            let rho = evolve_with(&cfg, |_| Ok(()))?;
            let dist = position_distribution(&rho);
            Ok(SweepRow {
                p,
                tvd_final: tvd(&dist, &reference)?,
                negativity_final: negativity(&rho)?,
                sigma_final: std_dev(&dist)?,
            })
        })
        .collect()
}

/// Evenly spaced grid `min, min + h, ..., max` with `count` points.
pub fn linear_grid<S: Scalar>(min: S, max: S, count: usize) -> Vec<S> {
    match count {
        0 => Vec::new(),
        1 => vec![min],
        _ => {
            let h = (max - min) / S::from_usize_lossy(count - 1);
            (0..count)
                .map(|i| {
                    if i == count - 1 {
                        max
                    } else {
                        min + h * S::from_usize_lossy(i)
                    }
                })
                .collect()
        }
    }
}

/// Negativity `E(t)` for `t = 0..=steps`, one series per noise rate.
#[derive(Clone, Debug, PartialEq)]
pub struct DecaySeries<S: Scalar> {
    pub p: S,
    pub negativity: Vec<S>,
}

/// Line walks of `steps` steps recording negativity every step.
pub fn negativity_decay_run<S: Scalar>(
    steps: usize,
    p_values: &[S],
    target: NoiseTarget,
) -> Result<Vec<DecaySeries<S>>> {
    if steps < 1 {
        return Err(Error::InvalidConfig("decay run needs at least one step".into()));
    }
    let lattice = Lattice::line(steps)?;
    p_values
        .par_iter()
        .map(|&p| {
            let cfg = WalkConfig::new(lattice, steps, NoiseModel::new(target, p)?)?;
            let ev = evolve(&cfg, &[Observable::Negativity])?;
            Ok(DecaySeries {
                p,
                negativity: ev.series.negativities().expect("negativity requested"),
            })
        })
        .collect()
}
