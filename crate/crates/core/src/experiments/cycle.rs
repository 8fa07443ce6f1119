//! Mixing on cycles: noisy runs against the uniform distribution, the
//! time-averaged pure walk, and exact warm starts.

use crate::error::{Error, Result};
use crate::experiments::pure::pure_walk_distributions;
use crate::lattice::Lattice;
use crate::observables::{
    mixing_time_from_tvd, negativity, position_distribution, time_averaged,
    time_averaged_tvd_series, tvd, Distribution, MixingResult, Observable, ObservableSeries,
    TvdReference,
};
use crate::scalar::Scalar;
use crate::walk::{evolve, evolve_with, NoiseModel, NoiseTarget, WalkConfig};

/// Everything recorded by [`cycle_mixing_run`].
#[derive(Clone, Debug)]
pub struct CycleRun<S: Scalar> {
    pub size: usize,
    pub noise: NoiseModel<S>,
    pub series: ObservableSeries<S>,
    /// Instantaneous TVD to uniform at `t = 0..=horizon`.
    pub tvd: Vec<S>,
    /// TVD of the running time-average to uniform.
    pub tvd_averaged: Vec<S>,
    pub negativity: Vec<S>,
    pub mixing: MixingResult<S>,
    pub averaged_mixing: MixingResult<S>,
}

impl<S: Scalar> CycleRun<S> {
    /// First `t >= 1` at which the instantaneous TVD is below `threshold`.
    pub fn first_tvd_below(&self, threshold: S) -> Option<usize> {
        first_below(&self.tvd, threshold, 1)
    }

    /// First `t >= 1` at which the negativity is below `threshold`.
    pub fn first_negativity_below(&self, threshold: S) -> Option<usize> {
        first_below(&self.negativity, threshold, 1)
    }
}

/// First index `>= start` with `values[t] < threshold`.
pub fn first_below<S: Scalar>(values: &[S], threshold: S, start: usize) -> Option<usize> {
    values
        .iter()
        .enumerate()
        .skip(start)
        .find(|(_, &v)| v < threshold)
        .map(|(t, _)| t)
}

/// Walk on a cycle of `size` for `horizon` steps, recording TVD to uniform,
/// its time-averaged counterpart, and negativity. `epsilon` defaults to
/// `1/size`.
pub fn cycle_mixing_run<S: Scalar>(
    size: usize,
    target: NoiseTarget,
    p: S,
    horizon: usize,
    epsilon: Option<S>,
) -> Result<CycleRun<S>> {
    let lattice = Lattice::cycle(size)?;
    if horizon < size {
        return Err(Error::InvalidConfig(format!(
            "mixing horizon ({horizon}) must be at least the cycle size ({size})"
        )));
    }
    let noise = NoiseModel::new(target, p)?;
    let epsilon = epsilon.unwrap_or_else(|| S::one() / S::from_usize_lossy(size));
    let cfg = WalkConfig::new(lattice, horizon, noise)?;
    let ev = evolve(
        &cfg,
        &[
            Observable::Distribution,
            Observable::Tvd(TvdReference::Auto),
            Observable::Negativity,
        ],
    )?;
    let uniform = Distribution::uniform(lattice);
    let dists = ev.series.distributions().expect("distribution requested");
    let tvd_series = ev.series.tvds().expect("tvd requested");
    let tvd_averaged = time_averaged_tvd_series(&dists, &uniform)?;
    let negativity = ev.series.negativities().expect("negativity requested");
    Ok(CycleRun {
        size,
        noise,
        mixing: mixing_time_from_tvd(&tvd_series, epsilon, false)?,
        averaged_mixing: mixing_time_from_tvd(&tvd_averaged, epsilon, true)?,
        series: ev.series,
        tvd: tvd_series,
        tvd_averaged,
        negativity,
    })
}

/// TVD to uniform at `t = 0..=horizon`, instantaneous or time-averaged,
/// without negativity. Noiseless walks use the state-vector path.
pub fn cycle_tvd_series<S: Scalar>(
    size: usize,
    noise: NoiseModel<S>,
    horizon: usize,
    averaged: bool,
) -> Result<Vec<S>> {
    let lattice = Lattice::cycle(size)?;
    let cfg = WalkConfig::new(lattice, horizon, noise)?;
    let uniform = Distribution::uniform(lattice);
    let dists = if noise.rate == S::zero() {
        pure_walk_distributions(&cfg)?
    } else {
        let mut out = Vec::with_capacity(horizon + 1);
        evolve_with(&cfg, |rho| {
            out.push(position_distribution(rho));
            Ok(())
        })?;
        out
    };
    if averaged {
        time_averaged_tvd_series(&dists, &uniform)
    } else {
        dists.iter().map(|d| tvd(d, &uniform)).collect()
    }
}

pub fn cycle_mixing_time<S: Scalar>(
    size: usize,
    noise: NoiseModel<S>,
    epsilon: S,
    horizon: usize,
    averaged: bool,
) -> Result<MixingResult<S>> {
    let tvds = cycle_tvd_series(size, noise, horizon, averaged)?;
    mixing_time_from_tvd(&tvds, epsilon, averaged)
}

/// Negativity at `t = 0..=horizon` on a cycle.
pub fn cycle_negativity_series<S: Scalar>(size: usize, noise: NoiseModel<S>, horizon: usize) -> Result<Vec<S>> {
    let cfg = WalkConfig::new(Lattice::cycle(size)?, horizon, noise)?;
    let mut out = Vec::with_capacity(horizon + 1);
    evolve_with(&cfg, |rho| {
        out.push(negativity(rho)?);
        Ok(())
    })?;
    Ok(out)
}

fn circular_convolution<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    let n = a.len();
    let mut out = vec![S::zero(); n];
    for (i, &ai) in a.iter().enumerate() {
        if ai == S::zero() {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            out[(i + j) % n] += ai * bj;
        }
    }
    out
}

/// Distribution after `restarts` warm restarts of the time-averaged pure walk.
///
/// With `Q` the average of the first `steps` distributions from a delta at
/// 0, translation invariance on the cycle makes each restart a circular
/// convolution with `Q`; `restarts = 0` returns `Q`.
pub fn warm_start_distribution<S: Scalar>(size: usize, steps: usize, restarts: usize) -> Result<Distribution<S>> {
    if size.is_multiple_of(2) {
        return Err(Error::InvalidConfig(format!(
            "warm start needs an odd cycle, got {size}"
        )));
    }
    if steps < 1 {
        return Err(Error::InvalidConfig("warm start needs at least one step".into()));
    }
    let lattice = Lattice::cycle(size)?;
    let cfg = WalkConfig::new(lattice, steps, NoiseModel::noiseless())?;
    let dists = pure_walk_distributions(&cfg)?;
    let q = time_averaged(&dists, steps)?;
    let mut current = q.probs().to_vec();
    for _ in 0..restarts {
        current = circular_convolution(&current, q.probs());
    }
    Distribution::new(lattice, current)
}
