//! Reproduction drivers built on the walk and observable layers.
//!
//! Independent grid points (noise rates, trajectories) run on the ambient
//! rayon pool; results are always returned in input order.

pub mod classical;
pub mod cycle;
pub mod pure;
pub mod resources;
pub mod scaling;
pub mod sweep;
pub mod trajectory;

pub use classical::{classical_baseline, classical_mixing_time, classical_series};
pub use cycle::{
    cycle_mixing_run, cycle_mixing_time, cycle_negativity_series, cycle_tvd_series, first_below,
    warm_start_distribution, CycleRun,
};
pub use pure::{pure_walk_distributions, PureState};
pub use resources::{
    asymptotic_classes, classical_match_steps, resource_estimate, ResourceEstimate, ResourceMode,
};
pub use scaling::{scaling_fit, ScalingFit};
pub use sweep::{linear_grid, negativity_decay_run, sweep_noise, DecaySeries, SweepRow};
pub use trajectory::trajectory_oracle;
