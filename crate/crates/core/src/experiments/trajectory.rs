//! Monte-Carlo unravelling of the noisy step into pure-state trajectories.
//!
//! Each step applies `S C`; then, with probability `p`, the target is
//! measured projectively and the state collapses. Averaging the final
//! position distributions over trajectories estimates the density-matrix
//! result.
//!
//! Random-number contract: trajectory `k` draws from
//! `ChaCha8Rng::seed_from_u64(seed)` with stream `k`. Per step it consumes
//! one `f64` deciding whether to measure and, only when measuring, a second
//! `f64` selecting the outcome. Trajectories are summed in fixed chunks of
//! [`CHUNK`] in index order and chunk sums are added in index order, so the
//! result does not depend on the worker count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::experiments::pure::PureState;
use crate::observables::Distribution;
use crate::scalar::Scalar;
use crate::walk::WalkConfig;

pub const CHUNK: usize = 1024;

fn run_trajectory<S: Scalar>(config: &WalkConfig<S>, seed: u64, index: u64) -> Result<PureState<S>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let mut psi = PureState::initial(config)?;
    let p = config.noise.rate.to_f64_lossy();
    for _ in 0..config.steps {
        psi.step()?;
        let u: f64 = rng.random();
        if u < p {
            let v: f64 = rng.random();
            psi.measure(config.noise.target, S::lit(v));
        }
    }
    Ok(psi)
}

/// Sampled estimate of the position distribution at `config.steps`.
pub fn trajectory_oracle<S: Scalar>(config: &WalkConfig<S>, samples: usize, seed: u64) -> Result<Distribution<S>> {
    if samples < 1 {
        return Err(Error::InvalidConfig("trajectory oracle needs at least one sample".into()));
    }
    config.validate()?;
    let n = config.lattice.num_positions();
    let chunks = samples.div_ceil(CHUNK);
    let partials: Vec<Vec<S>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![S::zero(); n];
            let end = ((c + 1) * CHUNK).min(samples);
            for k in c * CHUNK..end {
                let psi = run_trajectory(config, seed, k as u64)?;
                for (a, pair) in acc.iter_mut().zip(psi.amplitudes().chunks_exact(2)) {
                    *a += pair[0].norm_sqr() + pair[1].norm_sqr();
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let mut total = vec![S::zero(); n];
    for part in &partials {
        for (t, &v) in total.iter_mut().zip(part) {
            *t += v;
        }
    }
    let inv = S::one() / S::from_usize_lossy(samples);
    total.iter_mut().for_each(|v| *v *= inv);
    Distribution::new(config.lattice, total)
}
