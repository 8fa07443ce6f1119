//! Gate, qubit and ancilla counts for noisy walks.
//!
//! Counting model:
//! - position register width `s = ceil(log2(2T + 1))` on the line and
//!   `ceil(log2 N)` on the cycle;
//! - each step costs 1 gate for the coin and `s` gates for the shift;
//! - a coin measurement costs 1 gate and 1 fresh ancilla, a position
//!   measurement `s` gates and `s` ancillae, a joint measurement both;
//! - the number of measurements is the expectation `p * steps`, rounded up;
//! - qubits = 1 (coin) + `s` + ancillae. Ancillae are never recycled.

use crate::error::{Error, Result};
use crate::walk::NoiseTarget;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ResourceMode {
    Line { steps: u64 },
    /// `steps` is the mixing time the walk is run for.
    Cycle { size: u64, steps: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResourceEstimate {
    pub steps: u64,
    pub register_width: u64,
    pub measurements: u64,
    pub quantum_gates: u64,
    pub qubits: u64,
    pub ancillae: u64,
    pub counting_model: String,
    /// Asymptotic gate count for this mode and target.
    pub gate_class: &'static str,
    /// Asymptotic qubit count for this mode and target.
    pub qubit_class: &'static str,
}

/// `ceil(log2(n))` for `n >= 1`.
pub fn ceil_log2(n: u64) -> u64 {
    assert!(n >= 1);
    (64 - (n - 1).leading_zeros()) as u64
}

pub fn asymptotic_classes(mode: &ResourceMode, target: NoiseTarget) -> (&'static str, &'static str) {
    match (mode, target) {
        (ResourceMode::Line { .. }, NoiseTarget::Coin) => ("O(T log T + pT)", "O(log T + pT)"),
        (ResourceMode::Line { .. }, _) => ("O(T log T + pT log T)", "O(log T + pT log T)"),
        (ResourceMode::Cycle { .. }, NoiseTarget::Coin) => {
            ("O(M(ε) log N + pM(ε))", "O(log N + pM(ε))")
        }
        (ResourceMode::Cycle { .. }, _) => {
            ("O(M(ε) log N + pM(ε) log N)", "O(log N + pM(ε) log N)")
        }
    }
}

pub fn resource_estimate(mode: ResourceMode, target: NoiseTarget, p: f64) -> Result<ResourceEstimate> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidConfig(format!(
            "noise rate p must lie in [0, 1], got {p}"
        )));
    }
    let (steps, width) = match mode {
        ResourceMode::Line { steps } => {
            if steps < 1 {
                return Err(Error::InvalidMode("line walk needs at least one step".into()));
            }
            (steps, ceil_log2(2 * steps + 1))
        }
        ResourceMode::Cycle { size, steps } => {
            if size < 3 {
                return Err(Error::InvalidMode(format!("cycle size must be at least 3, got {size}")));
            }
            if steps < 1 {
                return Err(Error::InvalidMode("cycle run needs at least one step".into()));
            }
            (steps, ceil_log2(size))
        }
    };
    // Slack absorbs representation error such as 0.3 * 10 = 3.0000000000000004.
    let measurements = (p * steps as f64 - 1e-9).ceil().max(0.0) as u64;
    let (gates_per, ancillae_per) = match target {
        NoiseTarget::Coin => (1, 1),
        NoiseTarget::Position => (width, width),
        NoiseTarget::Both => (width + 1, width + 1),
    };
    let ancillae = measurements * ancillae_per;
    let (gate_class, qubit_class) = asymptotic_classes(&mode, target);
    Ok(ResourceEstimate {
        steps,
        register_width: width,
        measurements,
        quantum_gates: steps * (1 + width) + measurements * gates_per,
        qubits: 1 + width + ancillae,
        ancillae,
        counting_model: format!(
            "coin=1 gate/step; shift={width} gates/step; {} measurement={gates_per} gates + {ancillae_per} ancillae; \
             measurements=ceil(p*steps); ancillae not recycled; position-measurement ancillae are an upper bound \
             since measured positions are not uniform random bits",
            target.name()
        ),
        gate_class,
        qubit_class,
    })
}

/// Classical walk steps giving the spread of a `steps`-step quantum walk:
/// `ceil(T^2 / 2)`.
pub fn classical_match_steps(steps: u64) -> u64 {
    (steps * steps).div_ceil(2)
}
