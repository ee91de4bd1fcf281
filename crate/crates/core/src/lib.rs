//! Density-matrix simulation of Deutschian closed timelike curves and of
//! open timelike curves (OTCs), the interaction-free special case that acts
//! as a universal decorrelator `ρ_AB ↦ ρ_A ⊗ ρ_B`.
//!
//! On top of the engine sit four protocols: OTC-enhanced measurement of an
//! expectation value from one copy, the non-linear S-gate, a one-sided SAT
//! decision procedure, and tomography of a single unknown qudit through
//! decorrelated imperfect clones.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix the scalar for the common case.
//!
//! ```
//! use otc_core::{timelike::otc_apply, DensityMatrixF64, PureStateF64};
//! use otc_core::qmath::SubsystemLayout;
//! use num_complex::Complex64;
//!
//! let h = 0.5f64.sqrt();
//! let bell = PureStateF64::new(
//!     vec![Complex64::new(h, 0.0), 0.0.into(), 0.0.into(), Complex64::new(h, 0.0)],
//!     SubsystemLayout::qubits(2).unwrap(),
//! )
//! .unwrap();
//! let rho = otc_core::qstate::density_from_pure(&bell);
//! let out = otc_apply(&rho, &[1]).unwrap();
//! let quarter = DensityMatrixF64::maximally_mixed(SubsystemLayout::qubits(2).unwrap());
//! assert!(out.max_abs_diff(&quarter) < 1e-12);
//! ```

pub mod cloner;
pub mod cnf;
pub mod error;
pub mod gates;
pub mod protocols;
pub mod qmath;
pub mod qstate;
pub mod random;
pub mod scalar;
pub mod timelike;

pub use error::{Error, Result};
pub use scalar::Real;

pub type ComplexMatrixF64 = qmath::ComplexMatrix<f64>;
pub type ComplexMatrixF32 = qmath::ComplexMatrix<f32>;
pub type DensityMatrixF64 = qstate::DensityMatrix<f64>;
pub type DensityMatrixF32 = qstate::DensityMatrix<f32>;
pub type PureStateF64 = qstate::PureState<f64>;
pub type PureStateF32 = qstate::PureState<f32>;
pub type ObservableF64 = qstate::Observable<f64>;
pub type ObservableF32 = qstate::Observable<f32>;
pub type EnsembleF64 = qstate::Ensemble<f64>;
pub type EnsembleF32 = qstate::Ensemble<f32>;
pub type CtcSpecF64 = timelike::CtcSpec<f64>;
pub type CtcSpecF32 = timelike::CtcSpec<f32>;
