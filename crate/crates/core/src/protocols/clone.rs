//! Tomography on decorrelated clones.
//!
//! One copy of an unknown qudit is cloned into `d² - 1` noisy copies, each
//! clone goes through an OTC, and each is then measured with the OTC
//! measurement protocol for a different Gell-Mann observable. Inverting
//! the shrinking factor and the linear tomography map recovers the state.

use crate::cloner::{per_clone_states, shrinking_factor, CloneBackend, CloneJob};
use crate::error::{Error, Result};
use crate::gates::gell_mann;
use crate::qmath::ComplexMatrix;
use crate::qstate::{fidelity, DensityMatrix, Observable};
use crate::scalar::Real;

use super::budget::{hoeffding_bound, required_ancillas};
use super::measure::{derive_seeds, otc_measure, MeasurementPlan};

/// `(raw - (1 - s) Tr(O)/d) / s`: undoes `ρ ↦ sρ + (1 - s) I/d` on an
/// expectation value.
pub fn unbias_estimate<T: Real>(raw: T, obs: &Observable<T>, s: T, d: usize) -> Result<T> {
    if !(s > T::zero() && s <= T::one()) {
        return Err(Error::param("s", "shrinking factor must lie in (0, 1]"));
    }
    if obs.dim() != d {
        return Err(Error::ShapeMismatch {
            expected: format!("observable of dimension {d}"),
            found: format!("dimension {}", obs.dim()),
        });
    }
    let tr = obs.matrix().trace().re;
    Ok((raw - (T::one() - s) * tr / T::from_count(d)) / s)
}

/// The `d² - 1` Gell-Mann observables; Paulis for a qubit.
pub fn informationally_complete_set<T: Real>(d: usize) -> Result<Vec<Observable<T>>> {
    gell_mann::<T>(d)?.into_iter().map(Observable::new).collect()
}

/// `I/d + ½ Σ_a u_a λ_a`, projected onto the density matrices.
pub fn reconstruct<T: Real>(
    d: usize,
    observables: &[Observable<T>],
    expectations: &[T],
) -> Result<DensityMatrix<T>> {
    if observables.len() != d * d - 1 || expectations.len() != observables.len() {
        return Err(Error::param(
            "observables",
            format!("need {} Gell-Mann expectations", d * d - 1),
        ));
    }
    let half = T::lit(0.5);
    let mut m = ComplexMatrix::identity(d).scale_real(T::one() / T::from_count(d));
    for (obs, &u) in observables.iter().zip(expectations) {
        m = &m + &obs.matrix().scale_real(half * u);
    }
    DensityMatrix::from_psd_projection(m, crate::qmath::SubsystemLayout::new(vec![d])?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObservableEstimate<T> {
    /// Index into the Gell-Mann list.
    pub id: usize,
    pub raw: T,
    pub unbiased: T,
    pub ancillas: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CloneReport<T: Real> {
    pub reconstructed: DensityMatrix<T>,
    pub fidelity_to_input: T,
    pub per_observable: Vec<ObservableEstimate<T>>,
    /// Measurement OTCs plus one per clone.
    pub total_otc_uses: usize,
    pub shrinking_factor: T,
    pub clones: usize,
    /// `d⁴ / (2δ²) · ln(2/ε)`, the reference the count scales with.
    pub scaling_reference: f64,
}

pub fn otc_clone<T: Real>(
    rho: &DensityMatrix<T>,
    delta: f64,
    eps: f64,
    seed: u64,
) -> Result<CloneReport<T>> {
    otc_clone_with(rho, delta, eps, seed, CloneBackend::MarginalModel)
}

pub fn otc_clone_with<T: Real>(
    rho: &DensityMatrix<T>,
    delta: f64,
    eps: f64,
    seed: u64,
    backend: CloneBackend,
) -> Result<CloneReport<T>> {
    let d = rho.dim();
    let observables = informationally_complete_set::<T>(d)?;
    let clones = observables.len();
    let job = CloneJob::new(rho.clone(), clones, backend)?;
    let s = shrinking_factor::<T>(d, clones)?;
    let states = per_clone_states(&job)?;
    let narrowed = s.as_f64() * delta;
    let seeds = derive_seeds(seed, clones);

    let mut per_observable = Vec::with_capacity(clones);
    let mut total = clones;
    for (id, ((obs, state), sub_seed)) in observables.iter().zip(&states).zip(seeds).enumerate() {
        let ancillas = required_ancillas(obs, narrowed, eps)?;
        let plan = MeasurementPlan {
            observable: obs.clone(),
            delta: narrowed,
            eps,
            ancillas,
            seed: sub_seed,
        };
        let raw = otc_measure(state, &plan)?.estimate;
        per_observable.push(ObservableEstimate {
            id,
            raw,
            unbiased: unbias_estimate(raw, obs, s, d)?,
            ancillas,
        });
        total += ancillas;
    }
    let expectations: Vec<T> = per_observable.iter().map(|e| e.unbiased).collect();
    let reconstructed = reconstruct(d, &observables, &expectations)?;
    let d4 = (d * d * d * d) as f64;
    Ok(CloneReport {
        fidelity_to_input: fidelity(rho, &reconstructed)?,
        reconstructed,
        per_observable,
        total_otc_uses: total,
        shrinking_factor: s,
        clones,
        scaling_reference: d4 * hoeffding_bound(1.0, delta, eps)?,
    })
}
