//! State-vector walks: the noiseless fast path and the carrier for
//! Monte-Carlo trajectories.

use crate::error::{Error, Result};
use crate::lattice::{Coin, Lattice};
use crate::observables::Distribution;
use crate::scalar::{czero, Scalar, C};
use crate::walk::{DensityOperator, NoiseTarget, WalkConfig};

/// Normalisation tolerance on amplitudes.
pub const PURE_NORM_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct PureState<S: Scalar> {
    lattice: Lattice,
    amplitudes: Vec<C<S>>,
}

impl<S: Scalar> PureState<S> {
    pub fn new(lattice: Lattice, amplitudes: Vec<C<S>>) -> Result<Self> {
        if amplitudes.len() != lattice.dim() {
            return Err(Error::DimensionMismatch {
                left: amplitudes.len(),
                right: lattice.dim(),
            });
        }
        let state = Self {
            lattice,
            amplitudes,
        };
        let norm = state.norm_sqr();
        if (norm - S::one()).abs() > S::tol(PURE_NORM_TOL) {
            return Err(Error::InvalidConfig(format!(
                "state is not normalised: sum |psi|^2 = {norm}"
            )));
        }
        Ok(state)
    }

    /// The initial state of a walk configuration.
    pub fn initial(config: &WalkConfig<S>) -> Result<Self> {
        config.validate()?;
        let lattice = config.lattice;
        let offset = lattice
            .offset_of(config.initial_position)
            .ok_or_else(|| Error::InvalidConfig("initial position off the lattice".into()))?;
        let mut amplitudes = vec![czero(); lattice.dim()];
        amplitudes[2 * offset] = config.initial_coin[0];
        amplitudes[2 * offset + 1] = config.initial_coin[1];
        Ok(Self {
            lattice,
            amplitudes,
        })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn amplitudes(&self) -> &[C<S>] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> S {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn apply_coin(&mut self) {
        let h = S::FRAC_1_SQRT_2();
        for pair in self.amplitudes.chunks_exact_mut(2) {
            let (a, b) = (pair[0], pair[1]);
            pair[0] = (b - a) * h;
            pair[1] = (a + b) * h;
        }
    }

    pub fn apply_shift(&mut self) -> Result<()> {
        let n = self.lattice.num_positions();
        let mut out = vec![czero(); self.amplitudes.len()];
        for offset in 0..n {
            for coin in Coin::BOTH {
                let amp = self.amplitudes[2 * offset + coin.index()];
                match self.lattice.neighbour(offset, coin) {
                    Some(to) => out[2 * to + coin.index()] = amp,
                    None if amp == czero() => {}
                    None => {
                        let horizon = match self.lattice {
                            Lattice::Line { horizon } => horizon,
                            Lattice::Cycle { size } => size,
                        };
                        return Err(Error::BoundaryOverflow {
                            position: self.lattice.position_at(offset) + coin.sign(),
                            horizon,
                        });
                    }
                }
            }
        }
        self.amplitudes = out;
        Ok(())
    }

    /// One unitary step `S C`.
    pub fn step(&mut self) -> Result<()> {
        self.apply_coin();
        self.apply_shift()
    }

    pub fn position_distribution(&self) -> Distribution<S> {
        let probs = self
            .amplitudes
            .chunks_exact(2)
            .map(|p| p[0].norm_sqr() + p[1].norm_sqr())
            .collect();
        Distribution::new(self.lattice, probs).expect("normalised state")
    }

    /// Projectively measures `target` with the uniform variate `u` in `[0, 1)`
    /// and collapses onto the outcome.
    pub fn measure(&mut self, target: NoiseTarget, u: S) {
        let weights: Vec<S> = match target {
            NoiseTarget::Both => self.amplitudes.iter().map(|z| z.norm_sqr()).collect(),
            NoiseTarget::Position => self
                .amplitudes
                .chunks_exact(2)
                .map(|p| p[0].norm_sqr() + p[1].norm_sqr())
                .collect(),
            NoiseTarget::Coin => {
                let (mut w0, mut w1) = (S::zero(), S::zero());
                for p in self.amplitudes.chunks_exact(2) {
                    w0 += p[0].norm_sqr();
                    w1 += p[1].norm_sqr();
                }
                vec![w0, w1]
            }
        };
        let total: S = weights.iter().copied().sum();
        let threshold = u * total;
        let mut acc = S::zero();
        // Fallback to the last outcome with weight, for u * total at the top edge.
        let mut outcome = weights.iter().rposition(|&w| w > S::zero()).unwrap_or(0);
        for (k, &w) in weights.iter().enumerate() {
            if w == S::zero() {
                continue;
            }
            acc += w;
            if threshold < acc {
                outcome = k;
                break;
            }
        }
        let keep = |i: usize| match target {
            NoiseTarget::Both => i == outcome,
            NoiseTarget::Position => i / 2 == outcome,
            NoiseTarget::Coin => i % 2 == outcome,
        };
        let scale = S::one() / weights[outcome].sqrt();
        for (i, z) in self.amplitudes.iter_mut().enumerate() {
            *z = if keep(i) { *z * scale } else { czero() };
        }
    }

    pub fn to_density(&self) -> Result<DensityOperator<S>> {
        DensityOperator::from_pure(self.lattice, &self.amplitudes)
    }
}

/// Position distributions of the noiseless walk at `t = 0..=steps`.
pub fn pure_walk_distributions<S: Scalar>(config: &WalkConfig<S>) -> Result<Vec<Distribution<S>>> {
    let mut psi = PureState::initial(config)?;
    let mut out = Vec::with_capacity(config.steps + 1);
    out.push(psi.position_distribution());
    for _ in 0..config.steps {
        psi.step()?;
        out.push(psi.position_distribution());
    }
    Ok(out)
}
