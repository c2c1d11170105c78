//! Security analysis of the m-state sifting-less QKD protocol family.
//!
//! Alice sends one of `m` linear polarizations spread uniformly on a great
//! circle of the Poincaré sphere, encoded in phase-randomized weak coherent
//! pulses. Bob measures with an `m`-outcome POVM and, instead of sifting,
//! sends `S(Y|X)` bits of reverse-reconciliation data to Alice.
//!
//! The crate is organized bottom-up:
//!
//! - [`protocol_math`]: lumped binomials, the channel `P(y|x)`, entropies.
//! - [`quantum_states`]: the weight-class density matrices Eve holds and
//!   their von Neumann entropies.
//! - [`attacks`]: IRUD success probability, blocking/resend fractions, PNS
//!   Holevo information and per-photon-number key rates `K_n`.
//! - [`keyrate`]: net key rate under Eve's optimal blocking, critical
//!   transmission, mean-photon-number optimization, QBER thresholds and a
//!   BB84 baseline.
//! - [`montecarlo`]: a pulse-level simulator of the honest protocol.
//!
//! All information quantities are in bits.

pub mod attacks;
mod error;
pub mod keyrate;
pub mod montecarlo;
pub mod poisson;
pub mod protocol_math;
pub mod quantum_states;
pub mod search;

pub use attacks::{
    blocking_fractions, holevo_pns, irud_probability, key_rate_per_n, AttackProfile, ClassTable,
    PhotonClass,
};
pub use error::{Error, Result};
pub use keyrate::{
    bb84_baseline, bb84_critical_transmission, critical_transmission,
    critical_transmission_asymptotic, net_key_rate, optimize_mu, qber_threshold, KeyRateCurve,
    KeyRateEvaluation, KeyRateModel, KeyRatePoint, MuOptimum, QberTarget, Regime, SweepSpec,
};
pub use montecarlo::{
    reconciliation_accounting, simulate, simulate_with_trace, PulseRecord, ReconciliationReport,
    SimulationConfig, SimulationSummary,
};
pub use protocol_math::{
    binary_entropy, conditional_entropy_y_given_x, conditional_probability,
    continuous_limit_mutual_information, continuous_limit_mutual_information_with_qber,
    lumped_binomial, mutual_information, mutual_information_with_qber, LumpedBinomialTable,
    ProtocolParams,
};
pub use quantum_states::{
    rho_average, rho_conditioned, shifted_matrix, von_neumann_entropy, DensityMatrix,
    ShiftedDiagonal,
};

/// Version string stamped into every serialized output.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
