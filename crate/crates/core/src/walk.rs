//! Density-matrix evolution of the coined walk under projective noise.
//!
//! One step maps `rho -> (1 - p) U rho U^dagger + p sum_j P_j U rho U^dagger P_j^dagger`
//! with `U = S C`. The coin, shift and projector families are applied as
//! sparse actions on the dense matrix (2x2 blocks, an index permutation, and
//! an entry mask), so a step costs O(d^2) instead of O(d^3).

use log::trace;

use crate::error::{Error, Result};
use crate::lattice::{BasisIndex, Coin, Lattice};
use crate::numerics::{hermitian_eigenvalues, ComplexMatrix, HERMITIAN_TOL};
use crate::observables::{ObservableSeries, Observable, StepRecord};
use crate::scalar::{cabs, czero, Scalar, C};

/// Largest pre-correction drift tolerated before a step aborts.
pub const DRIFT_LIMIT: f64 = 1e-8;
/// Tolerance on `trace(rho) = 1`.
pub const TRACE_TOL: f64 = 1e-10;
/// Normalisation tolerance on the initial coin.
pub const COIN_NORM_TOL: f64 = 1e-12;

/// Which projector family the noise applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NoiseTarget {
    Coin,
    Position,
    /// Joint projection onto `|x, c>`: removes every off-diagonal entry.
    Both,
}

impl NoiseTarget {
    pub const ALL: [NoiseTarget; 3] = [NoiseTarget::Coin, NoiseTarget::Position, NoiseTarget::Both];

    pub fn name(self) -> &'static str {
        match self {
            NoiseTarget::Coin => "coin",
            NoiseTarget::Position => "position",
            NoiseTarget::Both => "both",
        }
    }

    /// Whether the projectors keep the matrix entry at flat indices `(i, j)`.
    #[inline]
    pub fn keeps(self, i: usize, j: usize) -> bool {
        match self {
            NoiseTarget::Coin => (i & 1) == (j & 1),
            NoiseTarget::Position => (i >> 1) == (j >> 1),
            NoiseTarget::Both => i == j,
        }
    }
}

impl std::str::FromStr for NoiseTarget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "coin" => Ok(NoiseTarget::Coin),
            "position" => Ok(NoiseTarget::Position),
            "both" => Ok(NoiseTarget::Both),
            other => Err(Error::InvalidConfig(format!(
                "unknown noise target '{other}' (expected coin, position or both)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseModel<S: Scalar> {
    pub target: NoiseTarget,
    /// Probability per step of applying the projectors.
    pub rate: S,
}

impl<S: Scalar> NoiseModel<S> {
    pub fn new(target: NoiseTarget, rate: S) -> Result<Self> {
        if !(rate >= S::zero() && rate <= S::one()) {
            return Err(Error::InvalidConfig(format!(
                "noise rate p must lie in [0, 1], got {rate}"
            )));
        }
        Ok(Self { target, rate })
    }

    pub fn noiseless() -> Self {
        Self {
            target: NoiseTarget::Both,
            rate: S::zero(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WalkConfig<S: Scalar> {
    pub lattice: Lattice,
    pub steps: usize,
    pub noise: NoiseModel<S>,
    pub initial_position: i64,
    /// Amplitudes of `|-1>` and `|+1>`.
    pub initial_coin: [C<S>; 2],
}

impl<S: Scalar> WalkConfig<S> {
    /// Walk from position 0 with coin `(|-1> + i|+1>) / sqrt(2)`.
    pub fn new(lattice: Lattice, steps: usize, noise: NoiseModel<S>) -> Result<Self> {
        let h = S::FRAC_1_SQRT_2();
        let cfg = Self {
            lattice,
            steps,
            noise,
            initial_position: 0,
            initial_coin: [C::new(h, S::zero()), C::new(S::zero(), h)],
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_initial_position(mut self, x: i64) -> Result<Self> {
        self.initial_position = x;
        self.validate()?;
        Ok(self)
    }

    pub fn with_initial_coin(mut self, minus: C<S>, plus: C<S>) -> Result<Self> {
        self.initial_coin = [minus, plus];
        self.validate()?;
        Ok(self)
    }

    pub fn with_steps(mut self, steps: usize) -> Result<Self> {
        self.steps = steps;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        NoiseModel::new(self.noise.target, self.noise.rate)?;
        match self.lattice {
            Lattice::Line { horizon } => {
                if horizon < 1 {
                    return Err(Error::InvalidConfig("line horizon must be at least 1".into()));
                }
                if self.steps > horizon {
                    return Err(Error::InvalidConfig(format!(
                        "steps ({}) exceed the line horizon ({horizon})",
                        self.steps
                    )));
                }
                // Support must stay inside the horizon for all steps.
                let reach = self.initial_position.unsigned_abs() as usize + self.steps;
                if reach > horizon {
                    return Err(Error::InvalidConfig(format!(
                        "walk from {} for {} steps leaves the horizon {horizon}",
                        self.initial_position, self.steps
                    )));
                }
            }
            Lattice::Cycle { size } => {
                if size < 3 {
                    return Err(Error::InvalidConfig("cycle size must be at least 3".into()));
                }
                if !(0..size as i64).contains(&self.initial_position) {
                    return Err(Error::InvalidConfig(format!(
                        "initial position {} is not on the cycle of size {size}",
                        self.initial_position
                    )));
                }
            }
        }
        let norm = self.initial_coin[0].norm_sqr() + self.initial_coin[1].norm_sqr();
        if (norm - S::one()).abs() > S::tol(COIN_NORM_TOL) {
            return Err(Error::InvalidConfig(format!(
                "initial coin is not normalised: |alpha|^2 + |beta|^2 = {norm}"
            )));
        }
        Ok(())
    }
}

/// Density operator over the position ⊗ coin basis.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOperator<S: Scalar> {
    lattice: Lattice,
    matrix: ComplexMatrix<S>,
    time: usize,
}

/// Measured values of the density-operator invariants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InvariantReport<S: Scalar> {
    pub trace_error: S,
    pub hermitian_deviation: S,
    pub min_eigenvalue: S,
    pub purity: S,
}

impl<S: Scalar> DensityOperator<S> {
    /// Wraps a matrix after checking dimension, trace and Hermiticity.
    /// Positivity is not checked here; see [`DensityOperator::invariants`].
    pub fn from_matrix(lattice: Lattice, matrix: ComplexMatrix<S>) -> Result<Self> {
        if matrix.dim() != lattice.dim() {
            return Err(Error::DimensionMismatch {
                left: matrix.dim(),
                right: lattice.dim(),
            });
        }
        if let Some((row, col)) = matrix.first_non_finite() {
            return Err(Error::NonFinite { row, col });
        }
        let dev = matrix.hermitian_deviation();
        if dev > S::tol(HERMITIAN_TOL) {
            return Err(Error::NotHermitian {
                deviation: dev.to_f64_lossy(),
            });
        }
        let tr = matrix.trace();
        if (tr.re - S::one()).abs() > S::tol(TRACE_TOL) || tr.im.abs() > S::tol(TRACE_TOL) {
            return Err(Error::InvalidConfig(format!(
                "density operator trace must be 1, got {}",
                tr
            )));
        }
        Ok(Self {
            lattice,
            matrix,
            time: 0,
        })
    }

    /// `|psi><psi|` for a normalised amplitude vector.
    pub fn from_pure(lattice: Lattice, amplitudes: &[C<S>]) -> Result<Self> {
        if amplitudes.len() != lattice.dim() {
            return Err(Error::DimensionMismatch {
                left: amplitudes.len(),
                right: lattice.dim(),
            });
        }
        let matrix =
            ComplexMatrix::from_fn(lattice.dim(), |i, j| amplitudes[i] * amplitudes[j].conj());
        Self::from_matrix(lattice, matrix)
    }

    pub(crate) fn from_parts_unchecked(lattice: Lattice, matrix: ComplexMatrix<S>, time: usize) -> Self {
        Self {
            lattice,
            matrix,
            time,
        }
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn matrix(&self) -> &ComplexMatrix<S> {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix<S> {
        self.matrix
    }

    /// Number of steps applied since the initial state.
    pub fn time(&self) -> usize {
        self.time
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn entry(&self, row: BasisIndex, col: BasisIndex) -> C<S> {
        match (row.flat(&self.lattice), col.flat(&self.lattice)) {
            (Some(i), Some(j)) => self.matrix[(i, j)],
            _ => czero(),
        }
    }

    /// `trace(rho^2) = sum |rho_ij|^2` for Hermitian `rho`.
    pub fn purity(&self) -> S {
        self.matrix.as_slice().iter().map(|z| z.norm_sqr()).sum()
    }

    /// Convex combination `a * self + (1 - a) * other`.
    pub fn mix(&self, other: &Self, a: S) -> Result<Self> {
        if self.lattice != other.lattice {
            return Err(Error::LatticeMismatch);
        }
        let m = self
            .matrix
            .scaled(a)
            .add(&other.matrix.scaled(S::one() - a))?;
        Ok(Self::from_parts_unchecked(self.lattice, m, self.time))
    }

    /// Full invariant measurement, including an eigensolve for positivity.
    pub fn invariants(&self) -> Result<InvariantReport<S>> {
        let spectrum = hermitian_eigenvalues(&self.matrix)?;
        Ok(InvariantReport {
            trace_error: (self.matrix.trace() - C::new(S::one(), S::zero())).norm(),
            hermitian_deviation: self.matrix.hermitian_deviation(),
            min_eigenvalue: spectrum.min(),
            purity: self.purity(),
        })
    }
}

/// `|x0> ⊗ (alpha|-1> + beta|+1>)` as a rank-one density operator.
pub fn initial_state<S: Scalar>(config: &WalkConfig<S>) -> Result<DensityOperator<S>> {
    config.validate()?;
    let lattice = config.lattice;
    let offset = lattice
        .offset_of(config.initial_position)
        .ok_or_else(|| Error::InvalidConfig("initial position off the lattice".into()))?;
    let mut m = ComplexMatrix::zeros(lattice.dim());
    let base = 2 * offset;
    for a in 0..2 {
        for b in 0..2 {
            m[(base + a, base + b)] = config.initial_coin[a] * config.initial_coin[b].conj();
        }
    }
    Ok(DensityOperator::from_parts_unchecked(lattice, m, 0))
}

/// `rho -> C rho C^dagger` with `C|x,c> = (|x,-c> + c|x,c>) / sqrt(2)`.
pub fn apply_coin<S: Scalar>(rho: &DensityOperator<S>) -> DensityOperator<S> {
    let mut m = rho.matrix.clone();
    coin_in_place(&mut m);
    DensityOperator::from_parts_unchecked(rho.lattice, m, rho.time)
}

/// `rho -> S rho S^dagger` with `S|x,c> = |x+c,c>`.
pub fn apply_shift<S: Scalar>(rho: &DensityOperator<S>) -> Result<DensityOperator<S>> {
    let m = shifted(&rho.lattice, &rho.matrix)?;
    Ok(DensityOperator::from_parts_unchecked(rho.lattice, m, rho.time))
}

/// `sum_j P_j rho P_j^dagger` for the projector family of `target`.
pub fn dephase<S: Scalar>(rho: &DensityOperator<S>, target: NoiseTarget) -> DensityOperator<S> {
    let mut m = rho.matrix.clone();
    mask_coherences(&mut m, target, S::zero());
    DensityOperator::from_parts_unchecked(rho.lattice, m, rho.time)
}

/// One noisy step, followed by re-symmetrisation and trace renormalisation.
///
/// Aborts with [`Error::NumericalCorruption`] when the drift removed by the
/// correction exceeds [`DRIFT_LIMIT`].
pub fn step<S: Scalar>(rho: &DensityOperator<S>, noise: &NoiseModel<S>) -> Result<DensityOperator<S>> {
    let mut m = step_uncorrected(&rho.lattice, &rho.matrix, noise)?;
    correct_drift(&mut m, rho.time + 1)?;
    Ok(DensityOperator::from_parts_unchecked(rho.lattice, m, rho.time + 1))
}

/// The step before any drift correction.
pub(crate) fn step_uncorrected<S: Scalar>(
    lattice: &Lattice,
    m: &ComplexMatrix<S>,
    noise: &NoiseModel<S>,
) -> Result<ComplexMatrix<S>> {
    let mut work = m.clone();
    coin_in_place(&mut work);
    let mut out = shifted(lattice, &work)?;
    if noise.rate > S::zero() {
        // Entries kept by the projectors get (1-p) u + p u = u; the rest (1-p) u.
        mask_coherences(&mut out, noise.target, S::one() - noise.rate);
    }
    Ok(out)
}

fn coin_in_place<S: Scalar>(m: &mut ComplexMatrix<S>) {
    let n = m.dim();
    let h = S::FRAC_1_SQRT_2();
    let data = m.as_mut_slice();
    // Rows: C acting from the left on each pair of coin rows.
    for pair in data.chunks_exact_mut(2 * n) {
        let (r0, r1) = pair.split_at_mut(n);
        for (a, b) in r0.iter_mut().zip(r1.iter_mut()) {
            let (x, y) = (*a, *b);
            *a = (y - x) * h;
            *b = (x + y) * h;
        }
    }
    // Columns: C^dagger = C from the right.
    for row in data.chunks_exact_mut(n) {
        for pair in row.chunks_exact_mut(2) {
            let (x, y) = (pair[0], pair[1]);
            pair[0] = (y - x) * h;
            pair[1] = (x + y) * h;
        }
    }
}

fn shift_map(lattice: &Lattice) -> Vec<Option<usize>> {
    (0..lattice.dim())
        .map(|i| {
            let coin = Coin::from_index(i);
            lattice.neighbour(i / 2, coin).map(|o| 2 * o + coin.index())
        })
        .collect()
}

fn shifted<S: Scalar>(lattice: &Lattice, m: &ComplexMatrix<S>) -> Result<ComplexMatrix<S>> {
    let n = m.dim();
    let map = shift_map(lattice);
    let zero = czero::<S>();
    for (i, target) in map.iter().enumerate() {
        if target.is_none() && m.row(i).iter().any(|&z| z != zero) {
            let b = BasisIndex::from_flat(lattice, i);
            let horizon = match *lattice {
                Lattice::Line { horizon } => horizon,
                Lattice::Cycle { size } => size,
            };
            return Err(Error::BoundaryOverflow {
                position: b.position + b.coin.sign(),
                horizon,
            });
        }
    }
    let mut out = ComplexMatrix::zeros(n);
    let src = m.as_slice();
    let dst = out.as_mut_slice();
    for (i, ti) in map.iter().enumerate() {
        let Some(ti) = *ti else { continue };
        let src_row = &src[i * n..(i + 1) * n];
        let dst_row = &mut dst[ti * n..(ti + 1) * n];
        for (j, tj) in map.iter().enumerate() {
            if let Some(tj) = *tj {
                dst_row[tj] = src_row[j];
            }
        }
    }
    Ok(out)
}

/// Multiplies every entry the projectors of `target` would remove by `keep`.
fn mask_coherences<S: Scalar>(m: &mut ComplexMatrix<S>, target: NoiseTarget, keep: S) {
    let n = m.dim();
    for (i, row) in m.as_mut_slice().chunks_exact_mut(n).enumerate() {
        for (j, z) in row.iter_mut().enumerate() {
            if !target.keeps(i, j) {
                *z *= keep;
            }
        }
    }
}

/// Symmetrises `(m + m^dagger) / 2` and rescales to unit trace.
fn correct_drift<S: Scalar>(m: &mut ComplexMatrix<S>, step: usize) -> Result<()> {
    let n = m.dim();
    let half = S::lit(0.5);
    let mut herm_dev = S::zero();
    for i in 0..n {
        for j in i..n {
            let a = m[(i, j)];
            let b = m[(j, i)].conj();
            herm_dev = herm_dev.max(cabs(a - b));
            let avg = (a + b) * half;
            m[(i, j)] = avg;
            m[(j, i)] = avg.conj();
        }
    }
    let tr = m.trace().re;
    let drift = herm_dev.max((tr - S::one()).abs());
    if !(drift <= S::tol(DRIFT_LIMIT)) {
        return Err(Error::NumericalCorruption {
            step,
            drift: drift.to_f64_lossy(),
            limit: S::tol(DRIFT_LIMIT).to_f64_lossy(),
        });
    }
    trace!("step {step}: drift {drift:e} corrected");
    if tr != S::one() {
        let inv = S::one() / tr;
        m.as_mut_slice().iter_mut().for_each(|z| *z *= inv);
    }
    Ok(())
}

/// Result of [`evolve`].
#[derive(Clone, Debug)]
pub struct Evolution<S: Scalar> {
    pub series: ObservableSeries<S>,
    pub final_state: DensityOperator<S>,
}

/// Runs `config.steps` steps from the initial state, calling `observer` on
/// the state at every `t = 0..=steps`.
pub fn evolve_with<S: Scalar>(
    config: &WalkConfig<S>,
    mut observer: impl FnMut(&DensityOperator<S>) -> Result<()>,
) -> Result<DensityOperator<S>> {
    let mut rho = initial_state(config)?;
    observer(&rho)?;
    for _ in 0..config.steps {
        rho = step(&rho, &config.noise)?;
        observer(&rho)?;
    }
    Ok(rho)
}

/// Evolves and records the requested observables at every step.
pub fn evolve<S: Scalar>(config: &WalkConfig<S>, observers: &[Observable<S>]) -> Result<Evolution<S>> {
    let mut records = Vec::with_capacity(config.steps + 1);
    let final_state = evolve_with(config, |rho| {
        records.push(StepRecord::measure(rho, observers)?);
        Ok(())
    })?;
    Ok(Evolution {
        series: ObservableSeries::new(records),
        final_state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::testing::random_unitary;
    use crate::observables::{negativity, position_distribution};
    use crate::experiments::classical::classical_baseline;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C<f64> {
        C::new(re, im)
    }

    fn basis_state(lattice: Lattice, x: i64, coin: Coin) -> DensityOperator<f64> {
        let mut amps = vec![c(0.0, 0.0); lattice.dim()];
        amps[BasisIndex::new(x, coin).flat(&lattice).unwrap()] = c(1.0, 0.0);
        DensityOperator::from_pure(lattice, &amps).unwrap()
    }

    /// Random valid state on the lattice: a unitary-rotated random diagonal,
    /// restricted to the first `support` basis states.
    pub(crate) fn random_state<R: Rng>(rng: &mut R, lattice: Lattice, support: usize) -> DensityOperator<f64> {
        let d = lattice.dim();
        let k = support.min(d);
        let u = random_unitary(rng, k);
        let weights: Vec<f64> = (0..k).map(|_| rng.random::<f64>()).collect();
        let total: f64 = weights.iter().sum();
        let mut m = ComplexMatrix::zeros(d);
        for i in 0..k {
            for j in 0..k {
                let mut z = c(0.0, 0.0);
                for (l, w) in weights.iter().enumerate() {
                    z += u[(i, l)] * u[(j, l)].conj() * (w / total);
                }
                m[(i, j)] = z;
            }
        }
        // Centre the support on the lattice so a shift never overflows.
        let off = (d - k) / 2 & !1;
        let mut centred = ComplexMatrix::zeros(d);
        for i in 0..k {
            for j in 0..k {
                centred[(i + off, j + off)] = m[(i, j)];
            }
        }
        let mut rho = DensityOperator::from_matrix(lattice, centred.clone());
        if rho.is_err() {
            // Symmetrise tiny Gram-Schmidt asymmetry.
            correct_drift(&mut centred, 0).unwrap();
            rho = DensityOperator::from_matrix(lattice, centred);
        }
        rho.unwrap()
    }

    fn default_config(lattice: Lattice, steps: usize, noise: NoiseModel<f64>) -> WalkConfig<f64> {
        WalkConfig::new(lattice, steps, noise).unwrap()
    }

    #[test]
    fn initial_state_default_coin() {
        let lattice = Lattice::line(2).unwrap();
        let cfg = default_config(lattice, 2, NoiseModel::noiseless());
        let rho = initial_state(&cfg).unwrap();
        let i0 = BasisIndex::new(0, Coin::Minus).flat(&lattice).unwrap();
        let i1 = i0 + 1;
        for i in 0..rho.dim() {
            for j in 0..rho.dim() {
                let inside = (i == i0 || i == i1) && (j == i0 || j == i1);
                if !inside {
                    assert_eq!(rho.matrix()[(i, j)], c(0.0, 0.0));
                }
            }
        }
        assert!((rho.matrix()[(i0, i0)].re - 0.5).abs() < 1e-15);
        assert!((rho.matrix()[(i1, i1)].re - 0.5).abs() < 1e-15);
        assert!((rho.purity() - 1.0).abs() < 1e-12);
        assert!(negativity(&rho).unwrap().abs() < 1e-12);
    }

    #[test]
    fn initial_state_basis_coin() {
        let lattice = Lattice::line(3).unwrap();
        let cfg = default_config(lattice, 2, NoiseModel::noiseless())
            .with_initial_position(1)
            .unwrap()
            .with_initial_coin(c(1.0, 0.0), c(0.0, 0.0))
            .unwrap();
        let rho = initial_state(&cfg).unwrap();
        let idx = BasisIndex::new(1, Coin::Minus).flat(&lattice).unwrap();
        let nonzero: Vec<_> = rho
            .matrix()
            .as_slice()
            .iter()
            .enumerate()
            .filter(|(_, z)| **z != c(0.0, 0.0))
            .collect();
        assert_eq!(nonzero.len(), 1);
        assert_eq!(nonzero[0].0, idx * rho.dim() + idx);
        assert_eq!(*nonzero[0].1, c(1.0, 0.0));
    }

    #[test]
    fn config_validation() {
        let line = Lattice::line(5).unwrap();
        assert!(WalkConfig::new(line, 6, NoiseModel::<f64>::noiseless()).is_err());
        assert!(NoiseModel::new(NoiseTarget::Coin, 1.5).is_err());
        assert!(NoiseModel::new(NoiseTarget::Coin, f64::NAN).is_err());
        let cfg = default_config(line, 3, NoiseModel::noiseless());
        assert!(cfg.clone().with_initial_coin(c(1.0, 0.0), c(1.0, 0.0)).is_err());
        assert!(cfg.clone().with_initial_position(3).is_err());
        let cyc = Lattice::cycle(5).unwrap();
        let cfg = default_config(cyc, 100, NoiseModel::noiseless());
        assert!(cfg.with_initial_position(5).is_err());
    }

    #[test]
    fn coin_on_plus_basis_state() {
        let lattice = Lattice::line(1).unwrap();
        let rho = apply_coin(&basis_state(lattice, 0, Coin::Plus));
        let m = basis_idx(&lattice, 0, Coin::Minus);
        let p = basis_idx(&lattice, 0, Coin::Plus);
        assert!((rho.matrix()[(m, m)].re - 0.5).abs() < 1e-15);
        assert!((rho.matrix()[(p, p)].re - 0.5).abs() < 1e-15);
        assert!((rho.matrix()[(m, p)].re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn coin_on_minus_basis_state() {
        let lattice = Lattice::line(1).unwrap();
        let rho = apply_coin(&basis_state(lattice, 0, Coin::Minus));
        let m = basis_idx(&lattice, 0, Coin::Minus);
        let p = basis_idx(&lattice, 0, Coin::Plus);
        assert!((rho.matrix()[(m, m)].re - 0.5).abs() < 1e-15);
        assert!((rho.matrix()[(p, p)].re - 0.5).abs() < 1e-15);
        assert!((rho.matrix()[(m, p)].re + 0.5).abs() < 1e-15);
        assert!((rho.matrix()[(p, m)].re + 0.5).abs() < 1e-15);
    }

    fn basis_idx(lattice: &Lattice, x: i64, coin: Coin) -> usize {
        BasisIndex::new(x, coin).flat(lattice).unwrap()
    }

    fn spectrum(rho: &DensityOperator<f64>) -> Vec<f64> {
        hermitian_eigenvalues(rho.matrix()).unwrap().into_vec()
    }

    #[test]
    fn coin_twice_is_identity_and_keeps_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rho = random_state(&mut rng, Lattice::cycle(4).unwrap(), 8);
        let twice = apply_coin(&apply_coin(&rho));
        assert!(twice.matrix().max_abs_diff(rho.matrix()).unwrap() < 1e-15);
        for (a, b) in spectrum(&rho).iter().zip(spectrum(&apply_coin(&rho)).iter()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn shift_moves_basis_states() {
        let line = Lattice::line(5).unwrap();
        let out = apply_shift(&basis_state(line, 3, Coin::Plus)).unwrap();
        assert_eq!(out, basis_state(line, 4, Coin::Plus));
        let cyc = Lattice::cycle(7).unwrap();
        let out = apply_shift(&basis_state(cyc, 6, Coin::Plus)).unwrap();
        assert_eq!(out, basis_state(cyc, 0, Coin::Plus));
        let out = apply_shift(&basis_state(cyc, 0, Coin::Minus)).unwrap();
        assert_eq!(out, basis_state(cyc, 6, Coin::Minus));
    }

    #[test]
    fn shift_overflow_is_reported() {
        let line = Lattice::line(2).unwrap();
        let err = apply_shift(&basis_state(line, 2, Coin::Plus)).unwrap_err();
        assert!(matches!(err, Error::BoundaryOverflow { position: 3, horizon: 2 }));
        // Moving inward from the edge is fine.
        assert!(apply_shift(&basis_state(line, 2, Coin::Minus)).is_ok());
    }

    #[test]
    fn shift_preserves_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rho = random_state(&mut rng, Lattice::cycle(5).unwrap(), 10);
        let shifted = apply_shift(&rho).unwrap();
        for (a, b) in spectrum(&rho).iter().zip(spectrum(&shifted).iter()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn dephase_both_is_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rho = random_state(&mut rng, Lattice::cycle(3).unwrap(), 6);
        let d = dephase(&rho, NoiseTarget::Both);
        for i in 0..rho.dim() {
            for j in 0..rho.dim() {
                let expected = if i == j { rho.matrix()[(i, i)] } else { c(0.0, 0.0) };
                assert_eq!(d.matrix()[(i, j)], expected);
            }
        }
    }

    #[test]
    fn dephase_fixes_diagonal_states() {
        let lattice = Lattice::cycle(3).unwrap();
        let diag = DensityOperator::from_matrix(
            lattice,
            ComplexMatrix::diagonal(&[0.1, 0.2, 0.3, 0.1, 0.2, 0.1]),
        )
        .unwrap();
        for t in NoiseTarget::ALL {
            assert_eq!(dephase(&diag, t), diag);
        }
    }

    fn step_one_state() -> DensityOperator<f64> {
        let lattice = Lattice::line(1).unwrap();
        let cfg = default_config(lattice, 1, NoiseModel::noiseless());
        step(&initial_state(&cfg).unwrap(), &cfg.noise).unwrap()
    }

    #[test]
    fn first_noiseless_step_is_entangled_pure_state() {
        let rho = step_one_state();
        let lattice = *rho.lattice();
        let a = c(-0.5, 0.5); // (i - 1) / 2 on |-1,-1>
        let b = c(0.5, 0.5); // (1 + i) / 2 on |+1,+1>
        let mut amps = vec![c(0.0, 0.0); lattice.dim()];
        amps[basis_idx(&lattice, -1, Coin::Minus)] = a;
        amps[basis_idx(&lattice, 1, Coin::Plus)] = b;
        let expected = DensityOperator::from_pure(lattice, &amps).unwrap();
        assert!(rho.matrix().max_abs_diff(expected.matrix()).unwrap() < 1e-15);
        assert!((rho.purity() - 1.0).abs() < 1e-12);
        let dist = position_distribution(&rho);
        assert!((dist.prob(-1) - 0.5).abs() < 1e-15);
        assert!((dist.prob(1) - 0.5).abs() < 1e-15);
        assert!((negativity(&rho).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn position_dephasing_kills_step_one_entanglement() {
        let rho = step_one_state();
        assert!((negativity(&rho).unwrap() - 0.5).abs() < 1e-12);
        let d = dephase(&rho, NoiseTarget::Position);
        assert!(negativity(&d).unwrap().abs() < 1e-12);
    }

    #[test]
    fn fully_dephased_walk_is_classical() {
        let steps = 30;
        let lattice = Lattice::line(steps).unwrap();
        let cfg = default_config(lattice, steps, NoiseModel::new(NoiseTarget::Both, 1.0).unwrap());
        let rho = evolve_with(&cfg, |_| Ok(())).unwrap();
        let dist = position_distribution(&rho);
        let classical = classical_baseline::<f64>(lattice, steps).unwrap();
        for (a, b) in dist.probs().iter().zip(classical.probs()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn noiseless_purity_is_preserved() {
        let steps = 200;
        let lattice = Lattice::cycle(31).unwrap();
        let cfg = default_config(lattice, steps, NoiseModel::noiseless());
        evolve_with(&cfg, |rho| {
            assert!((rho.purity() - 1.0).abs() < 1e-9, "t={}", rho.time());
            Ok(())
        })
        .unwrap();
        let lattice = Lattice::line(steps).unwrap();
        let cfg = default_config(lattice, steps, NoiseModel::noiseless());
        let rho = evolve_with(&cfg, |_| Ok(())).unwrap();
        assert!((rho.purity() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn evolve_zero_steps() {
        let cfg = default_config(Lattice::line(3).unwrap(), 0, NoiseModel::noiseless());
        let ev = evolve(&cfg, &[Observable::Negativity, Observable::Sigma]).unwrap();
        assert_eq!(ev.series.len(), 1);
        assert_eq!(ev.series.records()[0].t, 0);
        assert_eq!(ev.final_state, initial_state(&cfg).unwrap());
    }

    #[test]
    fn corrupted_state_aborts() {
        let lattice = Lattice::cycle(3).unwrap();
        let mut m = ComplexMatrix::diagonal(&[0.5, 0.5, 0.0, 0.0, 0.0, 0.0]);
        m[(0, 0)] = c(0.5 + 1e-6, 0.0);
        let rho = DensityOperator::from_parts_unchecked(lattice, m, 4);
        let err = step(&rho, &NoiseModel::noiseless()).unwrap_err();
        assert!(matches!(err, Error::NumericalCorruption { step: 5, .. }));
    }

    #[test]
    fn parity_support_on_line() {
        let steps = 20;
        let lattice = Lattice::line(steps + 2).unwrap();
        for target in NoiseTarget::ALL {
            for p in [0.0, 0.3, 1.0] {
                let cfg = default_config(lattice, steps, NoiseModel::new(target, p).unwrap())
                    .with_initial_position(1)
                    .unwrap();
                evolve_with(&cfg, |rho| {
                    let t = rho.time() as i64;
                    let dist = position_distribution(rho);
                    let off: f64 = lattice
                        .positions()
                        .filter(|x| (x - 1 - t).rem_euclid(2) == 1)
                        .map(|x| dist.prob(x))
                        .sum();
                    assert!(off <= 1e-14);
                    Ok(())
                })
                .unwrap();
            }
        }
    }

    #[test]
    fn step_preserves_trace_and_positivity_on_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(200);
        let lattices = [Lattice::cycle(3).unwrap(), Lattice::cycle(6).unwrap(), Lattice::line(4).unwrap()];
        for k in 0..200 {
            let lattice = lattices[k % lattices.len()];
            let support = if lattice.is_line() { 6 } else { lattice.dim() };
            let rho = random_state(&mut rng, lattice, support);
            let target = NoiseTarget::ALL[k % 3];
            let p = rng.random::<f64>();
            let noise = NoiseModel::new(target, p).unwrap();
            let raw = step_uncorrected(&lattice, rho.matrix(), &noise).unwrap();
            assert!((raw.trace().re - 1.0).abs() <= 1e-12);
            let next = step(&rho, &noise).unwrap();
            let inv = next.invariants().unwrap();
            assert!(inv.min_eigenvalue >= -1e-10);
            assert!(inv.hermitian_deviation <= 1e-10);
            assert!(inv.trace_error <= 1e-10);
            let d = lattice.dim() as f64;
            assert!(inv.purity >= 1.0 / d - 1e-10 && inv.purity <= 1.0 + 1e-10);
        }
    }

    #[test]
    fn step_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let lattice = Lattice::cycle(5).unwrap();
        let r1 = random_state(&mut rng, lattice, 10);
        let r2 = random_state(&mut rng, lattice, 10);
        for target in NoiseTarget::ALL {
            let noise = NoiseModel::new(target, 0.37).unwrap();
            for a in [0.0, 0.3, 1.0] {
                let lhs = step(&r1.mix(&r2, a).unwrap(), &noise).unwrap();
                let rhs = step(&r1, &noise)
                    .unwrap()
                    .mix(&step(&r2, &noise).unwrap(), a)
                    .unwrap();
                assert!(lhs.matrix().max_abs_diff(rhs.matrix()).unwrap() <= 1e-12);
            }
        }
    }

    #[test]
    fn step_matches_dense_convex_combination() {
        // Independent route: dense S*C matrices and explicit masking.
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let lattice = Lattice::cycle(4).unwrap();
        let d = lattice.dim();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let coin = ComplexMatrix::from_fn(d, |i, j| {
            if i / 2 != j / 2 {
                return c(0.0, 0.0);
            }
            // C|c> = (|-c> + c|c>)/sqrt2, column j is the image of basis j.
            let (ci, cj) = (Coin::from_index(i), Coin::from_index(j));
            if ci == cj {
                c(cj.sign() as f64 * h, 0.0)
            } else {
                c(h, 0.0)
            }
        });
        let shift = ComplexMatrix::from_fn(d, |i, j| {
            let b = BasisIndex::from_flat(&lattice, j);
            let to = BasisIndex::new(b.position + b.coin.sign(), b.coin).flat(&lattice).unwrap();
            if to == i { c(1.0, 0.0) } else { c(0.0, 0.0) }
        });
        let u = shift.matmul(&coin).unwrap();
        let rho = random_state(&mut rng, lattice, d);
        for target in NoiseTarget::ALL {
            let p = 0.4;
            let unitary = u.matmul(rho.matrix()).unwrap().matmul(&u.adjoint()).unwrap();
            let mut projected = unitary.clone();
            for i in 0..d {
                for j in 0..d {
                    if !target.keeps(i, j) {
                        projected[(i, j)] = c(0.0, 0.0);
                    }
                }
            }
            let expected = unitary.scaled(1.0 - p).add(&projected.scaled(p)).unwrap();
            let got = step(&rho, &NoiseModel::new(target, p).unwrap()).unwrap();
            assert!(got.matrix().max_abs_diff(&expected).unwrap() < 1e-14);
        }
    }

    /// Partial trace over an ancilla of CNOT (rho_c ⊗ |e0><e0|) CNOT^dagger,
    /// coin as control in index order (coin, ancilla).
    fn cnot_ancilla_channel(rho_c: &ComplexMatrix<f64>) -> ComplexMatrix<f64> {
        let e0 = ComplexMatrix::diagonal(&[1.0, 0.0]);
        let joint = rho_c.kron(&e0);
        // Control on coin index 1 (|+1>) flips the ancilla.
        let cnot = ComplexMatrix::from_fn(4, |i, j| {
            let (ci, ai) = (i / 2, i % 2);
            let (cj, aj) = (j / 2, j % 2);
            let target = if cj == 1 { 1 - aj } else { aj };
            if ci == cj && ai == target { c(1.0, 0.0) } else { c(0.0, 0.0) }
        });
        let out = cnot.matmul(&joint).unwrap().matmul(&cnot.adjoint()).unwrap();
        ComplexMatrix::from_fn(2, |i, j| out[(2 * i, 2 * j)] + out[(2 * i + 1, 2 * j + 1)])
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]

        #[test]
        fn cnot_ancilla_equals_coin_dephasing(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let lattice = Lattice::cycle(3).unwrap();
            // A single-coin state embedded at one site.
            let u = random_unitary(&mut rng, 2);
            let w: f64 = rng.random();
            let rho_c = ComplexMatrix::from_fn(2, |i, j| {
                u[(i, 0)] * u[(j, 0)].conj() * w + u[(i, 1)] * u[(j, 1)].conj() * (1.0 - w)
            });
            let mut full = ComplexMatrix::zeros(lattice.dim());
            for i in 0..2 { for j in 0..2 { full[(i, j)] = rho_c[(i, j)]; } }
            let mut full_fixed = full.clone();
            correct_drift(&mut full_fixed, 0).unwrap();
            let rho = DensityOperator::from_matrix(lattice, full_fixed).unwrap();
            let dephased = dephase(&rho, NoiseTarget::Coin);
            let channel = cnot_ancilla_channel(&ComplexMatrix::from_fn(2, |i, j| rho.matrix()[(i, j)]));
            for i in 0..2 { for j in 0..2 {
                prop_assert!((dephased.matrix()[(i, j)] - channel[(i, j)]).norm() <= 1e-12);
            } }
        }

        #[test]
        fn dephasing_is_idempotent(seed in any::<u64>(), t in 0usize..3) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rho = random_state(&mut rng, Lattice::cycle(4).unwrap(), 8);
            let target = NoiseTarget::ALL[t];
            let once = dephase(&rho, target);
            prop_assert_eq!(dephase(&once, target), once);
        }
    }

    #[test]
    fn f32_walk_runs() {
        let lattice = Lattice::cycle(5).unwrap();
        let cfg = WalkConfig::<f32>::new(lattice, 40, NoiseModel::new(NoiseTarget::Position, 0.3).unwrap()).unwrap();
        let rho = evolve_with(&cfg, |_| Ok(())).unwrap();
        assert!((rho.matrix().trace().re - 1.0).abs() < 1e-5);
    }
}
