//! The four protocols built on the timelike engine.
//!
//! * [`measure`]: estimating an expectation value from a single copy by
//!   fanning it out over decorrelated ancillas.
//! * [`sgate`]: the qubit map `n_z ↦ n_z²`.
//! * [`sat`]: deciding satisfiability by repeated squaring of a biased qubit.
//! * [`clone`]: tomography on decorrelated imperfect clones.

pub mod budget;
pub mod clone;
pub mod measure;
pub mod sat;
pub mod sgate;

pub use budget::{hoeffding_bound, required_ancillas, required_ancillas_for_range};
pub use clone::{
    informationally_complete_set, otc_clone, otc_clone_with, reconstruct, unbias_estimate,
    CloneReport, ObservableEstimate,
};
pub use measure::{
    decorrelated_joint_state, ghz_joint_state, otc_measure, rho_diag, MeasurementPlan,
    MeasurementResult,
};
pub use sat::{
    default_rounds, predicted_failure, predicted_failure_exact, sat_decide, sat_target,
    SatDecision, SatMode, Verdict, DEFAULT_REPETITIONS,
};
pub use sgate::{s_gate, s_gate_closed_form, s_gate_iterated};
