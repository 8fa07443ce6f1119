//! Measurement-derived quantities: distributions, spreading, total
//! variational distance, mixing times, partial transpose and negativity.
//!
//! TVD here is the unhalved sum `sum_x |P(x) - Q(x)|`, ranging over `[0, 2]`.
//! Thresholds such as the `1/N` line on the cycle are read in that convention.

use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::numerics::{hermitian_eigenvalues, ComplexMatrix};
use crate::scalar::{czero, Scalar};
use crate::walk::DensityOperator;

/// Entries above `-NEGATIVE_CLAMP` but below zero are rounded to zero.
pub const NEGATIVE_CLAMP: f64 = 1e-14;
/// Tolerance on `sum(probs) = 1`.
pub const NORMALISATION_TOL: f64 = 1e-10;

/// Probability vector over the positions of a lattice, in offset order.
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution<S: Scalar> {
    lattice: Lattice,
    probs: Vec<S>,
}

impl<S: Scalar> Distribution<S> {
    pub fn new(lattice: Lattice, mut probs: Vec<S>) -> Result<Self> {
        if probs.len() != lattice.num_positions() {
            return Err(Error::DimensionMismatch {
                left: probs.len(),
                right: lattice.num_positions(),
            });
        }
        let clamp = S::tol(NEGATIVE_CLAMP);
        for (i, p) in probs.iter_mut().enumerate() {
            if !p.is_finite() || *p < -clamp {
                return Err(Error::InvalidConfig(format!(
                    "probability at offset {i} is {p}"
                )));
            }
            if *p < S::zero() {
                *p = S::zero();
            }
        }
        let total: S = probs.iter().copied().sum();
        if (total - S::one()).abs() > S::tol(NORMALISATION_TOL) {
            return Err(Error::InvalidConfig(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        Ok(Self { lattice, probs })
    }

    pub fn delta(lattice: Lattice, x: i64) -> Result<Self> {
        let offset = lattice
            .offset_of(x)
            .ok_or_else(|| Error::InvalidConfig(format!("position {x} is off the lattice")))?;
        let mut probs = vec![S::zero(); lattice.num_positions()];
        probs[offset] = S::one();
        Ok(Self { lattice, probs })
    }

    pub fn uniform(lattice: Lattice) -> Self {
        let n = lattice.num_positions();
        Self {
            lattice,
            probs: vec![S::one() / S::from_usize_lossy(n); n],
        }
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn probs(&self) -> &[S] {
        &self.probs
    }

    /// Probability at position `x` (zero off the lattice).
    pub fn prob(&self, x: i64) -> S {
        self.lattice
            .offset_of(x)
            .map_or(S::zero(), |o| self.probs[o])
    }

    /// `(position, probability)` pairs in offset order.
    pub fn iter(&self) -> impl Iterator<Item = (i64, S)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .map(move |(o, &p)| (self.lattice.position_at(o), p))
    }
}

/// `P(x) = rho[(x,-1),(x,-1)] + rho[(x,+1),(x,+1)]`.
pub fn position_distribution<S: Scalar>(rho: &DensityOperator<S>) -> Distribution<S> {
    let m = rho.matrix();
    let probs = (0..rho.lattice().num_positions())
        .map(|o| {
            let p = m[(2 * o, 2 * o)].re + m[(2 * o + 1, 2 * o + 1)].re;
            if p < S::zero() && p >= -S::tol(NEGATIVE_CLAMP) {
                S::zero()
            } else {
                p
            }
        })
        .collect();
    Distribution {
        lattice: *rho.lattice(),
        probs,
    }
}

/// Standard deviation of a line distribution, in lattice units.
pub fn std_dev<S: Scalar>(d: &Distribution<S>) -> Result<S> {
    if d.lattice.is_cycle() {
        return Err(Error::CycleUnsupported);
    }
    let (mut m1, mut m2) = (S::zero(), S::zero());
    for (x, p) in d.iter() {
        let x = S::from_i64_lossy(x);
        m1 += x * p;
        m2 += x * x * p;
    }
    Ok((m2 - m1 * m1).max(S::zero()).sqrt())
}

/// Unhalved total variational distance, in `[0, 2]`.
pub fn tvd<S: Scalar>(a: &Distribution<S>, b: &Distribution<S>) -> Result<S> {
    if a.lattice != b.lattice {
        return Err(Error::LatticeMismatch);
    }
    Ok(a.probs
        .iter()
        .zip(&b.probs)
        .map(|(&p, &q)| (p - q).abs())
        .sum())
}

/// Largest `w` with `w <= t / sqrt(2)`, in exact integer arithmetic.
pub fn top_hat_half_width(t: usize) -> usize {
    let t2 = (t as u128) * (t as u128);
    let mut w = (t as f64 * std::f64::consts::FRAC_1_SQRT_2) as u128;
    while 2 * w * w > t2 {
        w -= 1;
    }
    while 2 * (w + 1) * (w + 1) <= t2 {
        w += 1;
    }
    w as usize
}

/// Uniform reference over `{x : |x| <= floor(t/sqrt 2), x = t (mod 2)}`.
///
/// For `t = 1` that set is empty; the width is then widened by one so the
/// support is `{-1, +1}`.
pub fn top_hat_reference<S: Scalar>(lattice: Lattice, t: usize) -> Result<Distribution<S>> {
    let Lattice::Line { horizon } = lattice else {
        return Err(Error::CycleUnsupported);
    };
    if horizon < t {
        return Err(Error::InvalidConfig(format!(
            "top-hat of width for t={t} needs horizon >= {t}, got {horizon}"
        )));
    }
    let mut w = top_hat_half_width(t) as i64;
    let parity = (t % 2) as i64;
    let support = |w: i64| (-w..=w).filter(move |x| x.rem_euclid(2) == parity);
    if support(w).next().is_none() {
        w += 1;
    }
    let count = support(w).count();
    let value = S::one() / S::from_usize_lossy(count);
    let mut probs = vec![S::zero(); lattice.num_positions()];
    for x in support(w) {
        probs[lattice.offset_of(x).expect("top-hat inside horizon")] = value;
    }
    Ok(Distribution { lattice, probs })
}

/// Mean of the first `t` distributions.
pub fn time_averaged<S: Scalar>(series: &[Distribution<S>], t: usize) -> Result<Distribution<S>> {
    if t == 0 || series.is_empty() {
        return Err(Error::EmptySeries);
    }
    if t > series.len() {
        return Err(Error::InvalidConfig(format!(
            "time average through {t} needs {t} distributions, have {}",
            series.len()
        )));
    }
    let lattice = series[0].lattice;
    let mut acc = vec![S::zero(); lattice.num_positions()];
    for d in &series[..t] {
        if d.lattice != lattice {
            return Err(Error::LatticeMismatch);
        }
        for (a, &p) in acc.iter_mut().zip(&d.probs) {
            *a += p;
        }
    }
    let inv = S::one() / S::from_usize_lossy(t);
    acc.iter_mut().for_each(|a| *a *= inv);
    Ok(Distribution { lattice, probs: acc })
}

/// TVD of the running time-average against `reference` at each recorded `t`.
///
/// Entry `t >= 1` uses the mean of distributions `0..t`; entry 0 has no
/// average and uses the initial distribution itself.
pub fn time_averaged_tvd_series<S: Scalar>(
    series: &[Distribution<S>],
    reference: &Distribution<S>,
) -> Result<Vec<S>> {
    let Some(first) = series.first() else {
        return Err(Error::EmptySeries);
    };
    let mut out = Vec::with_capacity(series.len());
    out.push(tvd(first, reference)?);
    let mut acc = vec![S::zero(); reference.probs.len()];
    for t in 1..series.len() {
        let prev = &series[t - 1];
        if prev.lattice != reference.lattice {
            return Err(Error::LatticeMismatch);
        }
        for (a, &p) in acc.iter_mut().zip(&prev.probs) {
            *a += p;
        }
        let inv = S::one() / S::from_usize_lossy(t);
        let dist: S = acc
            .iter()
            .zip(&reference.probs)
            .map(|(&a, &q)| (a * inv - q).abs())
            .sum();
        out.push(dist);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MixingTime {
    Reached(usize),
    NotReached,
}

impl MixingTime {
    pub fn value(self) -> Option<usize> {
        match self {
            MixingTime::Reached(t) => Some(t),
            MixingTime::NotReached => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MixingResult<S: Scalar> {
    pub epsilon: S,
    pub mixing_time: MixingTime,
    /// Last recorded step; the "for all later t" check stops here.
    pub horizon: usize,
    pub averaged: bool,
}

/// Smallest `T` with `tvd[t] < epsilon` for every recorded `T < t <= horizon`.
pub fn mixing_time_from_tvd<S: Scalar>(tvds: &[S], epsilon: S, averaged: bool) -> Result<MixingResult<S>> {
    if !(epsilon > S::zero() && epsilon < S::lit(2.0)) {
        return Err(Error::InvalidEpsilon(epsilon.to_f64_lossy()));
    }
    if tvds.is_empty() {
        return Err(Error::EmptySeries);
    }
    let horizon = tvds.len() - 1;
    let last_violation = tvds.iter().rposition(|&d| !(d < epsilon));
    let mixing_time = match last_violation {
        None => MixingTime::Reached(0),
        Some(t) if t == horizon => MixingTime::NotReached,
        Some(t) => MixingTime::Reached(t),
    };
    Ok(MixingResult {
        epsilon,
        mixing_time,
        horizon,
        averaged,
    })
}

/// Mixing time of a recorded distribution series against `reference`.
pub fn mixing_time<S: Scalar>(
    series: &[Distribution<S>],
    reference: &Distribution<S>,
    epsilon: S,
    averaged: bool,
) -> Result<MixingResult<S>> {
    let tvds = if averaged {
        time_averaged_tvd_series(series, reference)?
    } else {
        series
            .iter()
            .map(|d| tvd(d, reference))
            .collect::<Result<Vec<_>>>()?
    };
    mixing_time_from_tvd(&tvds, epsilon, averaged)
}

/// Partial transpose on the coin: `rho'[(x,c),(y,b)] = rho[(x,b),(y,c)]`.
pub fn partial_transpose<S: Scalar>(rho: &DensityOperator<S>) -> ComplexMatrix<S> {
    coin_transpose(rho.matrix())
}

/// Partial transpose on the position: `rho'[(x,c),(y,b)] = rho[(y,c),(x,b)]`.
pub fn partial_transpose_position<S: Scalar>(rho: &DensityOperator<S>) -> ComplexMatrix<S> {
    let m = rho.matrix();
    ComplexMatrix::from_fn(m.dim(), |i, j| {
        let (x, c) = (i / 2, i % 2);
        let (y, b) = (j / 2, j % 2);
        m[(2 * y + c, 2 * x + b)]
    })
}

fn coin_transpose<S: Scalar>(m: &ComplexMatrix<S>) -> ComplexMatrix<S> {
    ComplexMatrix::from_fn(m.dim(), |i, j| {
        let (x, c) = (i / 2, i % 2);
        let (y, b) = (j / 2, j % 2);
        m[(2 * x + b, 2 * y + c)]
    })
}

/// Principal submatrix on the sites that carry any weight. Sites whose rows
/// are identically zero only contribute zero eigenvalues to the partial
/// transpose, so dropping them leaves the negativity unchanged.
fn occupied_block<S: Scalar>(m: &ComplexMatrix<S>) -> ComplexMatrix<S> {
    let n = m.dim();
    let zero = czero::<S>();
    let sites: Vec<usize> = (0..n / 2)
        .filter(|&s| {
            m.row(2 * s).iter().any(|&z| z != zero) || m.row(2 * s + 1).iter().any(|&z| z != zero)
        })
        .collect();
    if sites.len() * 2 == n || sites.is_empty() {
        return m.clone();
    }
    let idx: Vec<usize> = sites.iter().flat_map(|&s| [2 * s, 2 * s + 1]).collect();
    ComplexMatrix::from_fn(idx.len(), |i, j| m[(idx[i], idx[j])])
}

/// Negativity `E = (sum_i |lambda'_i| - 1) / 2` of the coin-position split,
/// clamped at zero. For a qubit coin the maximum is 1/2.
pub fn negativity<S: Scalar>(rho: &DensityOperator<S>) -> Result<S> {
    let block = occupied_block(rho.matrix());
    let pt = coin_transpose(&block);
    negativity_of_transposed(&pt)
}

/// Negativity from the position-side partial transpose.
pub fn negativity_position_side<S: Scalar>(rho: &DensityOperator<S>) -> Result<S> {
    negativity_of_transposed(&partial_transpose_position(rho))
}

fn negativity_of_transposed<S: Scalar>(pt: &ComplexMatrix<S>) -> Result<S> {
    let spectrum = hermitian_eigenvalues(pt)?;
    let e = (spectrum.abs_sum() - S::one()) * S::lit(0.5);
    Ok(e.max(S::zero()))
}

/// What [`crate::walk::evolve`] records at each step.
#[derive(Clone, Debug, PartialEq)]
pub enum Observable<S: Scalar> {
    Distribution,
    Sigma,
    Tvd(TvdReference<S>),
    Negativity,
}

#[derive(Clone, Debug, PartialEq)]
pub enum TvdReference<S: Scalar> {
    /// Top-hat for the current step on a line, uniform on a cycle.
    Auto,
    Fixed(Distribution<S>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord<S: Scalar> {
    pub t: usize,
    pub sigma: Option<S>,
    pub tvd: Option<S>,
    pub negativity: Option<S>,
    pub distribution: Option<Distribution<S>>,
}

impl<S: Scalar> StepRecord<S> {
    pub fn measure(rho: &DensityOperator<S>, observers: &[Observable<S>]) -> Result<Self> {
        let dist = position_distribution(rho);
        let mut rec = StepRecord {
            t: rho.time(),
            sigma: None,
            tvd: None,
            negativity: None,
            distribution: None,
        };
        for obs in observers {
            match obs {
                Observable::Distribution => rec.distribution = Some(dist.clone()),
                Observable::Sigma => rec.sigma = Some(std_dev(&dist)?),
                Observable::Negativity => rec.negativity = Some(negativity(rho)?),
                Observable::Tvd(TvdReference::Fixed(r)) => rec.tvd = Some(tvd(&dist, r)?),
                Observable::Tvd(TvdReference::Auto) => {
                    let reference = match *rho.lattice() {
                        Lattice::Line { .. } => top_hat_reference(*rho.lattice(), rho.time())?,
                        Lattice::Cycle { .. } => Distribution::uniform(*rho.lattice()),
                    };
                    rec.tvd = Some(tvd(&dist, &reference)?);
                }
            }
        }
        Ok(rec)
    }
}

/// Per-step records for `t = 0..=steps`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct ObservableSeries<S: Scalar> {
    records: Vec<StepRecord<S>>,
}

impl<S: Scalar> ObservableSeries<S> {
    pub fn new(records: Vec<StepRecord<S>>) -> Self {
        Self { records }
    }

    pub fn records(&self) -> &[StepRecord<S>] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&StepRecord<S>> {
        self.records.last()
    }

    pub fn sigmas(&self) -> Option<Vec<S>> {
        self.records.iter().map(|r| r.sigma).collect()
    }

    pub fn tvds(&self) -> Option<Vec<S>> {
        self.records.iter().map(|r| r.tvd).collect()
    }

    pub fn negativities(&self) -> Option<Vec<S>> {
        self.records.iter().map(|r| r.negativity).collect()
    }

    pub fn distributions(&self) -> Option<Vec<Distribution<S>>> {
        self.records.iter().map(|r| r.distribution.clone()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::classical::classical_baseline;
    use crate::walk::{dephase, apply_coin, evolve, evolve_with, initial_state, step, NoiseModel, NoiseTarget, WalkConfig};
    use crate::scalar::C;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn line(h: usize) -> Lattice {
        Lattice::line(h).unwrap()
    }

    fn cycle(n: usize) -> Lattice {
        Lattice::cycle(n).unwrap()
    }

    fn random_dist<R: Rng>(rng: &mut R, lattice: Lattice) -> Distribution<f64> {
        let w: Vec<f64> = (0..lattice.num_positions()).map(|_| rng.random::<f64>()).collect();
        let s: f64 = w.iter().sum();
        Distribution::new(lattice, w.into_iter().map(|v| v / s).collect()).unwrap()
    }

    fn noisy_states(count: usize) -> Vec<DensityOperator<f64>> {
        let mut out = Vec::new();
        let mut k = 0;
        while out.len() < count {
            let target = NoiseTarget::ALL[k % 3];
            let p = [0.0, 0.1, 0.4][(k / 3) % 3];
            let lattice = if k % 2 == 0 { cycle(5) } else { line(8) };
            let cfg = WalkConfig::new(lattice, 8, NoiseModel::new(target, p).unwrap()).unwrap();
            evolve_with(&cfg, |rho| {
                out.push(rho.clone());
                Ok(())
            })
            .unwrap();
            k += 1;
        }
        out.truncate(count);
        out
    }

    #[test]
    fn distribution_validation() {
        assert!(Distribution::new(line(1), vec![0.5, 0.5]).is_err());
        assert!(Distribution::new(line(1), vec![0.5, 0.6, -0.1]).is_err());
        let d = Distribution::new(line(1), vec![0.5, 0.5 + 1e-15, -1e-15]).unwrap();
        assert_eq!(d.probs()[2], 0.0);
        assert!(Distribution::<f64>::delta(line(1), 2).is_err());
    }

    #[test]
    fn initial_distribution_is_delta() {
        let cfg = WalkConfig::new(line(3), 3, NoiseModel::<f64>::noiseless()).unwrap();
        let d = position_distribution(&initial_state(&cfg).unwrap());
        let delta = Distribution::delta(line(3), 0).unwrap();
        assert!(tvd(&d, &delta).unwrap() < 1e-15);
    }

    #[test]
    fn std_dev_cases() {
        assert_eq!(std_dev(&Distribution::<f64>::delta(line(4), 0).unwrap()).unwrap(), 0.0);
        assert_eq!(
            std_dev(&Distribution::<f64>::uniform(cycle(5))),
            Err(Error::CycleUnsupported)
        );
        let classical = classical_baseline::<f64>(line(100), 100).unwrap();
        assert!((std_dev(&classical).unwrap() - 10.0).abs() < 1e-9);
    }

    #[test]
    fn tvd_cases() {
        let a = Distribution::<f64>::uniform(cycle(29));
        assert_eq!(tvd(&a, &a).unwrap(), 0.0);
        let d0 = Distribution::delta(cycle(29), 0).unwrap();
        let d1 = Distribution::delta(cycle(29), 1).unwrap();
        assert_eq!(tvd(&d0, &d1).unwrap(), 2.0);
        assert!((tvd(&a, &d0).unwrap() - 56.0 / 29.0).abs() < 1e-14);
        assert_eq!(tvd(&a, &Distribution::uniform(cycle(28))), Err(Error::LatticeMismatch));
    }

    #[test]
    fn top_hat_widths() {
        // floor(t / sqrt 2) by enumeration over the reals.
        for t in 0..2000usize {
            let w = top_hat_half_width(t);
            assert!((w as f64) <= t as f64 / 2f64.sqrt() + 1e-12);
            assert!(((w + 1) as f64) > t as f64 / 2f64.sqrt());
        }
        let d = top_hat_reference::<f64>(line(2), 2).unwrap();
        assert_eq!(d, Distribution::delta(line(2), 0).unwrap());
        let d = top_hat_reference::<f64>(line(3), 3).unwrap();
        assert_eq!(d.prob(-1), 0.5);
        assert_eq!(d.prob(1), 0.5);
        assert_eq!(d.probs().iter().filter(|&&p| p > 0.0).count(), 2);
        let d = top_hat_reference::<f64>(line(100), 100).unwrap();
        let support: Vec<i64> = d.iter().filter(|(_, p)| *p > 0.0).map(|(x, _)| x).collect();
        assert_eq!(support.len(), 71);
        assert_eq!(support[0], -70);
        assert_eq!(*support.last().unwrap(), 70);
        assert!(support.iter().all(|x| x % 2 == 0));
        assert!(d.iter().all(|(_, p)| p == 0.0 || p == 1.0 / 71.0));
        let d = top_hat_reference::<f64>(line(1), 1).unwrap();
        assert_eq!((d.prob(-1), d.prob(1)), (0.5, 0.5));
        assert!(top_hat_reference::<f64>(line(3), 4).is_err());
        assert!(top_hat_reference::<f64>(cycle(3), 1).is_err());
    }

    #[test]
    fn time_average_cases() {
        let l = line(1);
        let d0 = Distribution::delta(l, 0).unwrap();
        let split = Distribution::new(l, vec![0.5, 0.0, 0.5]).unwrap();
        let avg = time_averaged(&[d0.clone(), split.clone()], 2).unwrap();
        assert_eq!(avg.probs(), &[0.25, 0.5, 0.25]);
        let same = time_averaged(&[split.clone(), split.clone(), split.clone()], 3).unwrap();
        assert_eq!(same, split);
        assert_eq!(time_averaged::<f64>(&[], 1), Err(Error::EmptySeries));
        assert_eq!(time_averaged(&[d0], 0), Err(Error::EmptySeries));
    }

    #[test]
    fn averaged_tvd_series_matches_direct_average() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let series: Vec<_> = (0..12).map(|_| random_dist(&mut rng, cycle(7))).collect();
        let reference = Distribution::uniform(cycle(7));
        let fast = time_averaged_tvd_series(&series, &reference).unwrap();
        for t in 1..series.len() {
            let direct = tvd(&time_averaged(&series, t).unwrap(), &reference).unwrap();
            assert!((fast[t] - direct).abs() < 1e-14);
        }
    }

    #[test]
    fn mixing_time_cases() {
        let r = mixing_time_from_tvd(&[0.01, 0.02, 0.0], 0.1, false).unwrap();
        assert_eq!(r.mixing_time, MixingTime::Reached(0));
        assert_eq!(r.horizon, 2);
        let r = mixing_time_from_tvd(&[0.5, 0.4, 0.3], 0.1, false).unwrap();
        assert_eq!(r.mixing_time, MixingTime::NotReached);
        let r = mixing_time_from_tvd(&[1.0, 0.05, 0.2, 0.05, 0.01], 0.1, true).unwrap();
        assert_eq!(r.mixing_time, MixingTime::Reached(2));
        assert!(r.averaged);
        assert!(matches!(mixing_time_from_tvd(&[0.1], 0.0, false), Err(Error::InvalidEpsilon(_))));
        assert!(matches!(mixing_time_from_tvd(&[0.1], 2.0, false), Err(Error::InvalidEpsilon(_))));
    }

    #[test]
    fn mixing_time_on_distributions() {
        let l = cycle(5);
        let u = Distribution::<f64>::uniform(l);
        let series = vec![Distribution::delta(l, 0).unwrap(), u.clone(), u.clone()];
        let r = mixing_time(&series, &u, 0.5, false).unwrap();
        assert_eq!(r.mixing_time, MixingTime::Reached(0));
    }

    proptest! {
        #[test]
        fn mixing_time_monotone_in_epsilon(tvds in proptest::collection::vec(0.0f64..2.0, 1..60),
                                           e1 in 0.01f64..1.99, e2 in 0.01f64..1.99) {
            let (lo, hi) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
            let a = mixing_time_from_tvd(&tvds, lo, false).unwrap().mixing_time;
            let b = mixing_time_from_tvd(&tvds, hi, false).unwrap().mixing_time;
            if let (Some(a), Some(b)) = (a.value(), b.value()) {
                prop_assert!(a >= b);
            }
            // Reaching the tighter threshold implies reaching the looser one.
            if a.value().is_some() { prop_assert!(b.value().is_some()); }
        }

        #[test]
        fn mixing_result_invariant(tvds in proptest::collection::vec(0.0f64..2.0, 1..60), eps in 0.01f64..1.99) {
            let r = mixing_time_from_tvd(&tvds, eps, false).unwrap();
            if let Some(m) = r.mixing_time.value() {
                prop_assert!(m <= r.horizon);
                prop_assert!(tvds[m + 1..].iter().all(|&d| d < eps));
            }
        }

        #[test]
        fn tvd_is_a_metric(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let l = cycle(9);
            let (a, b, c) = (random_dist(&mut rng, l), random_dist(&mut rng, l), random_dist(&mut rng, l));
            prop_assert_eq!(tvd(&a, &b).unwrap(), tvd(&b, &a).unwrap());
            prop_assert!(tvd(&a, &c).unwrap() <= tvd(&a, &b).unwrap() + tvd(&b, &c).unwrap() + 1e-12);
            let d = tvd(&a, &b).unwrap();
            prop_assert!((0.0..=2.0).contains(&d));
        }
    }

    #[test]
    fn partial_transpose_properties() {
        for rho in noisy_states(100) {
            let pt = partial_transpose(&rho);
            // Involution: transpose twice is exactly the input.
            let twice = coin_transpose(&pt);
            assert_eq!(&twice, rho.matrix());
            assert!(pt.is_hermitian(1e-12));
            assert!((pt.trace().re - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn partial_transpose_of_diagonal_is_identity_map() {
        let l = cycle(3);
        let rho = DensityOperator::from_matrix(l, ComplexMatrix::diagonal(&[0.1, 0.2, 0.3, 0.1, 0.2, 0.1])).unwrap();
        assert_eq!(&partial_transpose(&rho), rho.matrix());
        assert_eq!(negativity(&rho).unwrap(), 0.0);
    }

    #[test]
    fn product_state_transpose() {
        // rho_pos ⊗ rho_coin -> rho_pos ⊗ rho_coin^T.
        let l = cycle(3);
        let coin = ComplexMatrix::from_rows(vec![
            vec![C::new(0.6, 0.0), C::new(0.2, 0.3)],
            vec![C::new(0.2, -0.3), C::new(0.4, 0.0)],
        ])
        .unwrap();
        let pos = ComplexMatrix::from_rows(vec![
            vec![C::new(0.5, 0.0), C::new(0.1, 0.1), C::new(0.0, 0.0)],
            vec![C::new(0.1, -0.1), C::new(0.3, 0.0), C::new(0.05, 0.0)],
            vec![C::new(0.0, 0.0), C::new(0.05, 0.0), C::new(0.2, 0.0)],
        ])
        .unwrap();
        let rho = DensityOperator::from_matrix(l, pos.kron(&coin)).unwrap();
        let pt = partial_transpose(&rho);
        assert!(pt.max_abs_diff(&pos.kron(&coin.transpose())).unwrap() < 1e-15);
        assert!(negativity(&rho).unwrap() < 1e-10);
    }

    #[test]
    fn step_one_partial_transpose_spectrum() {
        let cfg = WalkConfig::new(line(1), 1, NoiseModel::<f64>::noiseless()).unwrap();
        let rho = step(&initial_state(&cfg).unwrap(), &cfg.noise).unwrap();
        let block = occupied_block(rho.matrix());
        assert_eq!(block.dim(), 4);
        let spec = hermitian_eigenvalues(&coin_transpose(&block)).unwrap();
        let expected = [-0.5, 0.5, 0.5, 0.5];
        for (a, b) in spec.values().iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
        // Full-size spectrum adds only zeros.
        let full = hermitian_eigenvalues(&partial_transpose(&rho)).unwrap();
        assert!((full.abs_sum() - 2.0).abs() < 1e-12);
        assert!((negativity(&rho).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn negativity_invariants_on_evolved_states() {
        for rho in noisy_states(100) {
            let e = negativity(&rho).unwrap();
            assert!((0.0..=0.5 + 1e-9).contains(&e));
            assert!(negativity(&dephase(&rho, NoiseTarget::Both)).unwrap().abs() < 1e-10);
            let e_pos = negativity_position_side(&rho).unwrap();
            assert!((e - e_pos).abs() < 1e-10);
        }
    }

    #[test]
    fn negativity_invariant_under_local_coin() {
        for rho in noisy_states(60) {
            let rotated = apply_coin(&rho);
            assert!((negativity(&rho).unwrap() - negativity(&rotated).unwrap()).abs() <= 1e-10);
        }
    }

    #[test]
    fn noiseless_spreading_is_nondecreasing() {
        let cfg = WalkConfig::new(line(200), 200, NoiseModel::<f64>::noiseless()).unwrap();
        let ev = evolve(&cfg, &[Observable::Sigma]).unwrap();
        let sig = ev.series.sigmas().unwrap();
        for t in 2..sig.len() {
            assert!(sig[t] + 1e-9 >= sig[t - 1], "t={t}: {} < {}", sig[t], sig[t - 1]);
        }
    }

    #[test]
    fn noiseless_negativity_settles() {
        let cfg = WalkConfig::new(line(120), 120, NoiseModel::<f64>::noiseless()).unwrap();
        let ev = evolve(&cfg, &[Observable::Negativity]).unwrap();
        let e = ev.series.negativities().unwrap();
        let late = &e[80..];
        let (lo, hi) = late.iter().fold((f64::MAX, f64::MIN), |(a, b), &v| (a.min(v), b.max(v)));
        // Oscillation late in the walk is bounded and well inside (0, 1/2).
        assert!(lo > 0.0 && hi < 0.5);
        assert!(hi - lo < 0.1, "spread {}", hi - lo);
    }

    #[test]
    fn series_observers() {
        let cfg = WalkConfig::new(cycle(7), 5, NoiseModel::new(NoiseTarget::Position, 0.2).unwrap()).unwrap();
        let ev = evolve(&cfg, &[Observable::Distribution, Observable::Tvd(TvdReference::Auto), Observable::Negativity]).unwrap();
        assert_eq!(ev.series.len(), 6);
        assert!(ev.series.sigmas().is_none());
        let tv = ev.series.tvds().unwrap();
        assert!(tv.iter().all(|&d| (0.0..=2.0).contains(&d)));
        assert_eq!(ev.series.distributions().unwrap().len(), 6);
        assert!(evolve(&cfg, &[Observable::Sigma]).is_err());
    }
}
