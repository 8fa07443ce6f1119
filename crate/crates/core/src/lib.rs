//! Discrete-time coined quantum walks on the line and on cycles with
//! projective-measurement noise.
//!
//! The walk state is a density operator over the position ⊗ coin basis and is
//! evolved exactly as a convex mixture of the unitary step and its
//! projectively measured counterpart. On top of that sit the observables
//! (spreading, total variational distance, mixing times, negativity) and the
//! experiment drivers that sweep noise rates, run cycle mixing studies and
//! count quantum resources.
//!
//! All numerical types are generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix the common double-precision instantiations.

pub mod error;
pub mod experiments;
pub mod lattice;
pub mod numerics;
pub mod observables;
pub mod scalar;
pub mod walk;

pub use error::{Error, Result};
pub use lattice::{BasisIndex, Coin, Lattice};
pub use numerics::{conjugate_by, hermitian_eigenvalues, ComplexMatrix, RealSpectrum};
pub use observables::{
    mixing_time, negativity, partial_transpose, position_distribution, std_dev, time_averaged,
    top_hat_reference, tvd, Distribution, MixingResult, MixingTime, Observable, ObservableSeries,
    StepRecord, TvdReference,
};
pub use scalar::Scalar;
pub use walk::{
    apply_coin, apply_shift, dephase, evolve, evolve_with, initial_state, step, DensityOperator,
    Evolution, NoiseModel, NoiseTarget, WalkConfig,
};

pub type ComplexMatrix64 = ComplexMatrix<f64>;
pub type ComplexMatrix32 = ComplexMatrix<f32>;
pub type DensityOperator64 = DensityOperator<f64>;
pub type DensityOperator32 = DensityOperator<f32>;
pub type Distribution64 = Distribution<f64>;
pub type Distribution32 = Distribution<f32>;
pub type NoiseModel64 = NoiseModel<f64>;
pub type NoiseModel32 = NoiseModel<f32>;
pub type WalkConfig64 = WalkConfig<f64>;
pub type WalkConfig32 = WalkConfig<f32>;
pub type ObservableSeries64 = ObservableSeries<f64>;
pub type SweepRow64 = experiments::SweepRow<f64>;
pub type CycleRun64 = experiments::CycleRun<f64>;
pub type PureState64 = experiments::PureState<f64>;
