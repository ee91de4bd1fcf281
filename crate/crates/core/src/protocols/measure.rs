//! OTC-enhanced measurement.
//!
//! A chain of C₊ gates copies the input's eigenbasis populations onto `N`
//! ancillas, giving `Σ ρ_ij |i…i⟩⟨j…j|`. Sending every ancilla through an
//! OTC leaves `N + 1` independent qudits in `ρ_diag`, so `N + 1` samples of
//! the observable come from a single copy of the input.

use rand::RngCore;

use crate::error::{Error, Result};
use crate::gates::{c_plus_in_basis, embed};
use crate::protocols::budget::required_ancillas;
use crate::qmath::{self, ComplexMatrix, SubsystemLayout};
use crate::qstate::{rng_from_seed, BornSampler, DensityMatrix, Observable, PureState};
use crate::scalar::Real;
use crate::timelike::otc_apply_each;

/// Largest ancilla count for which the joint state is built explicitly.
pub const EXPLICIT_MAX_ANCILLAS: usize = 6;
/// Largest joint side length for the explicit path.
pub const EXPLICIT_MAX_SIDE: usize = 256;

#[derive(Debug, Clone)]
pub struct MeasurementPlan<T: Real> {
    pub observable: Observable<T>,
    pub delta: f64,
    pub eps: f64,
    pub ancillas: usize,
    pub seed: u64,
}

impl<T: Real> MeasurementPlan<T> {
    /// Plan with the Hoeffding budget for `(δ, ε)`.
    pub fn auto(observable: Observable<T>, delta: f64, eps: f64, seed: u64) -> Result<Self> {
        let ancillas = required_ancillas(&observable, delta, eps)?;
        Ok(Self {
            observable,
            delta,
            eps,
            ancillas,
            seed,
        })
    }

    /// Plan with an explicit ancilla count; `(δ, ε)` are only recorded.
    pub fn with_ancillas(observable: Observable<T>, ancillas: usize, seed: u64) -> Self {
        Self {
            observable,
            delta: f64::NAN,
            eps: f64::NAN,
            ancillas,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementResult<T> {
    pub estimate: T,
    /// `N + 1`
    pub samples: usize,
    /// One per ancilla.
    pub otc_uses: usize,
    pub outcomes: Vec<T>,
}

fn check_qudit<T: Real>(rho: &DensityMatrix<T>, obs: &Observable<T>) -> Result<()> {
    if rho.layout().len() != 1 {
        return Err(Error::LayoutMismatch(format!(
            "measurement input must be a single qudit, got layout {:?}",
            rho.layout().dims()
        )));
    }
    if rho.dim() != obs.dim() {
        return Err(Error::ShapeMismatch {
            expected: format!("observable of dimension {}", rho.dim()),
            found: format!("dimension {}", obs.dim()),
        });
    }
    Ok(())
}

/// The input dephased in the observable's eigenbasis.
pub fn rho_diag<T: Real>(rho: &DensityMatrix<T>, obs: &Observable<T>) -> Result<DensityMatrix<T>> {
    check_qudit(rho, obs)?;
    let probs = crate::qstate::born_probabilities(rho, obs)?;
    let d = rho.dim();
    let mut out = ComplexMatrix::zeros(d, d);
    for (k, p) in probs.into_iter().enumerate() {
        let v = obs.eigen().vector(k);
        out = &out + &ComplexMatrix::outer(&v, &v).scale_real(p);
    }
    DensityMatrix::new(out.hermitian_part(), rho.layout().clone())
}

/// Input on factor 0 and `n` ancillas prepared in the observable's first
/// eigenvector, after C₊ gates from the input to each ancilla.
pub fn ghz_joint_state<T: Real>(
    rho: &DensityMatrix<T>,
    obs: &Observable<T>,
    ancillas: usize,
) -> Result<DensityMatrix<T>> {
    check_qudit(rho, obs)?;
    let d = rho.dim();
    let layout = SubsystemLayout::uniform(d, ancillas + 1)?;
    qmath::check_dimension(layout.total())?;
    let v = obs.eigenbasis();
    let first: Vec<_> = (0..d).map(|r| v[(r, 0)]).collect();
    let blank = PureState::new(first, SubsystemLayout::new(vec![d])?)?;
    let blank = crate::qstate::density_from_pure(&blank);
    let mut joint = rho.clone();
    for _ in 0..ancillas {
        joint = joint.tensor(&blank)?;
    }
    let gate = c_plus_in_basis(v)?;
    let mut m = joint.into_matrix();
    for k in 1..=ancillas {
        let u = embed(&gate, &layout, &[0, k])?;
        m = qmath::conjugate_unchecked(&u, &m);
    }
    DensityMatrix::new(m.hermitian_part(), layout)
}

/// The GHZ-like state with every ancilla sent through its own OTC.
pub fn decorrelated_joint_state<T: Real>(
    rho: &DensityMatrix<T>,
    obs: &Observable<T>,
    ancillas: usize,
) -> Result<DensityMatrix<T>> {
    let ghz = ghz_joint_state(rho, obs, ancillas)?;
    let sent: Vec<usize> = (1..=ancillas).collect();
    otc_apply_each(&ghz, &sent)
}

fn explicit_path_fits(d: usize, ancillas: usize) -> bool {
    ancillas <= EXPLICIT_MAX_ANCILLAS
        && d.checked_pow(ancillas as u32 + 1)
            .is_some_and(|side| side <= EXPLICIT_MAX_SIDE)
}

/// Runs the protocol: one sample of the observable from each of the
/// `N + 1` decorrelated qudits, averaged. Small instances build the joint
/// state and sample its marginals; larger ones draw from `ρ_diag` directly,
/// which is what the product structure guarantees.
pub fn otc_measure<T: Real>(
    rho: &DensityMatrix<T>,
    plan: &MeasurementPlan<T>,
) -> Result<MeasurementResult<T>> {
    let obs = &plan.observable;
    check_qudit(rho, obs)?;
    let n = plan.ancillas;
    let mut rng = rng_from_seed(plan.seed);
    let outcomes: Vec<T> = if explicit_path_fits(rho.dim(), n) {
        let joint = decorrelated_joint_state(rho, obs, n)?;
        let samplers = (0..=n)
            .map(|k| BornSampler::new(&joint.marginal(&[k])?, obs))
            .collect::<Result<Vec<_>>>()?;
        samplers.iter().map(|s| s.draw(&mut rng)).collect()
    } else {
        let sampler = BornSampler::new(&rho_diag(rho, obs)?, obs)?;
        (0..=n).map(|_| sampler.draw(&mut rng)).collect()
    };
    let estimate = outcomes.iter().copied().sum::<T>() / T::from_count(n + 1);
    Ok(MeasurementResult {
        estimate,
        samples: n + 1,
        otc_uses: n,
        outcomes,
    })
}

/// Independent per-task seed derived from a master seed.
pub(crate) fn derive_seeds(seed: u64, count: usize) -> Vec<u64> {
    let mut rng = rng_from_seed(seed);
    (0..count).map(|_| rng.next_u64()).collect()
}
