//! Exact classical random walk, the oracle for every fully dephased claim.

use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::observables::{mixing_time_from_tvd, tvd, Distribution, MixingResult};
use crate::scalar::Scalar;

/// Distribution after `steps` iterations of `P'(x) = (P(x-1) + P(x+1)) / 2`
/// from a delta at 0 (mod N on a cycle).
pub fn classical_baseline<S: Scalar>(lattice: Lattice, steps: usize) -> Result<Distribution<S>> {
    Ok(classical_series(lattice, steps)?.pop().expect("non-empty"))
}

/// Classical distributions at `t = 0..=steps`.
pub fn classical_series<S: Scalar>(lattice: Lattice, steps: usize) -> Result<Vec<Distribution<S>>> {
    if let Lattice::Line { horizon } = lattice {
        if steps > horizon {
            return Err(Error::InvalidConfig(format!(
                "classical walk of {steps} steps leaves the horizon {horizon}"
            )));
        }
    }
    let n = lattice.num_positions();
    let half = S::lit(0.5);
    let mut current = Distribution::delta(lattice, 0)?.probs().to_vec();
    let mut out = Vec::with_capacity(steps + 1);
    out.push(Distribution::new(lattice, current.clone())?);
    for _ in 0..steps {
        let mut next = vec![S::zero(); n];
        for (o, &p) in current.iter().enumerate() {
            if p == S::zero() {
                continue;
            }
            let (left, right) = match lattice {
                Lattice::Line { .. } => (o - 1, o + 1),
                Lattice::Cycle { size } => ((o + size - 1) % size, (o + 1) % size),
            };
            next[left] += p * half;
            next[right] += p * half;
        }
        current = next;
        out.push(Distribution::new(lattice, current.clone())?);
    }
    Ok(out)
}

/// Instantaneous mixing time of the classical walk on a cycle against the
/// uniform distribution.
pub fn classical_mixing_time<S: Scalar>(size: usize, epsilon: S, horizon: usize) -> Result<MixingResult<S>> {
    let lattice = Lattice::cycle(size)?;
    let uniform = Distribution::uniform(lattice);
    let tvds = classical_series::<S>(lattice, horizon)?
        .iter()
        .map(|d| tvd(d, &uniform))
        .collect::<Result<Vec<_>>>()?;
    mixing_time_from_tvd(&tvds, epsilon, false)
}
