//! Validated states and observables.
//!
//! A [`DensityMatrix`] is always Hermitian, unit-trace and positive
//! semidefinite within the scalar's tolerances; every constructor checks.
//! Non-linear channels cannot act on a density matrix without knowing how
//! its mixedness arose, so classically prepared mixtures are carried as an
//! [`Ensemble`] of pure branches instead.

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates;
use crate::qmath::{
    self, cholesky_certifies_psd, eig_hermitian, ComplexMatrix, HermitianEigen, SubsystemLayout,
};
use crate::scalar::{c, cr, Real, C};

/// Above this side length PSD validation uses a Cholesky certificate
/// instead of a full eigen-decomposition, and no clipping takes place.
pub const EIGEN_VALIDATION_MAX: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct PureState<T: Real> {
    amplitudes: Vec<C<T>>,
    layout: SubsystemLayout,
}

impl<T: Real> PureState<T> {
    pub fn new(amplitudes: Vec<C<T>>, layout: SubsystemLayout) -> Result<Self> {
        if amplitudes.len() != layout.total() {
            return Err(Error::LayoutMismatch(format!(
                "{} amplitudes for layout {:?}",
                amplitudes.len(),
                layout.dims()
            )));
        }
        let norm: T = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if !((norm - T::one()).abs() <= T::norm_tol()) {
            return Err(Error::InvalidState(format!(
                "squared norm {} is not 1",
                norm
            )));
        }
        Ok(Self { amplitudes, layout })
    }

    /// Rescales `amplitudes` to unit norm first.
    pub fn normalized(amplitudes: Vec<C<T>>, layout: SubsystemLayout) -> Result<Self> {
        let norm: T = amplitudes.iter().map(|a| a.norm_sqr()).sum::<T>().sqrt();
        if norm == T::zero() {
            return Err(Error::InvalidState("zero vector".into()));
        }
        Self::new(amplitudes.into_iter().map(|a| a / norm).collect(), layout)
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(layout: SubsystemLayout, index: usize) -> Result<Self> {
        let mut amps = vec![C::zero(); layout.total()];
        if index >= amps.len() {
            return Err(Error::IndexOutOfRange {
                index,
                factors: amps.len(),
            });
        }
        amps[index] = C::one();
        Self::new(amps, layout)
    }

    pub fn amplitudes(&self) -> &[C<T>] {
        &self.amplitudes
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    /// `|self⟩ ⊗ |other⟩`.
    pub fn tensor(&self, other: &PureState<T>) -> Result<Self> {
        qmath::check_dimension(self.amplitudes.len().saturating_mul(other.amplitudes.len()))?;
        let amps = self
            .amplitudes
            .iter()
            .flat_map(|a| other.amplitudes.iter().map(move |b| *a * *b))
            .collect();
        Ok(Self {
            amplitudes: amps,
            layout: self.layout.join(&other.layout),
        })
    }

    /// `U|ψ⟩` for unitary `U`.
    pub fn evolve(&self, u: &ComplexMatrix<T>) -> Result<Self> {
        if u.rows() != self.amplitudes.len() || !u.is_square() {
            return Err(Error::ShapeMismatch {
                expected: format!("{0}x{0}", self.amplitudes.len()),
                found: format!("{}x{}", u.rows(), u.cols()),
            });
        }
        Self::new(u.apply(&self.amplitudes), self.layout.clone())
    }

    /// Reduced state of the listed factors.
    pub fn reduced(&self, keep: &[usize]) -> Result<DensityMatrix<T>> {
        let m = qmath::partial_trace_pure(&self.amplitudes, &self.layout, keep)?;
        let mut kept = keep.to_vec();
        kept.sort_unstable();
        DensityMatrix::new(m, self.layout.select(&kept)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T: Real> {
    matrix: ComplexMatrix<T>,
    layout: SubsystemLayout,
}

impl<T: Real> DensityMatrix<T> {
    /// Validates trace, Hermiticity and positivity. Eigenvalues in
    /// `[-psd_tol, 0)` are clipped and the result renormalised.
    pub fn new(matrix: ComplexMatrix<T>, layout: SubsystemLayout) -> Result<Self> {
        if !matrix.is_square() || matrix.rows() != layout.total() {
            return Err(Error::LayoutMismatch(format!(
                "{}x{} matrix for layout {:?}",
                matrix.rows(),
                matrix.cols(),
                layout.dims()
            )));
        }
        let dev = matrix.hermitian_deviation();
        if !(dev <= T::hermitian_tol()) {
            return Err(Error::NotHermitian {
                deviation: dev.as_f64(),
            });
        }
        let tr = matrix.trace();
        if !((tr.re - T::one()).abs() <= T::trace_tol() && tr.im.abs() <= T::trace_tol()) {
            return Err(Error::InvalidState(format!("trace {} is not 1", tr)));
        }
        let matrix = matrix.hermitian_part();
        let n = matrix.rows();
        if n <= EIGEN_VALIDATION_MAX {
            let eig = jacobi_of(&matrix);
            let min = eig.min();
            if min < -T::psd_tol() {
                return Err(Error::InvalidState(format!(
                    "negative eigenvalue {min:e}"
                )));
            }
            if min < T::zero() {
                let clipped = eig.reconstruct_with(|x| x.max(T::zero()));
                let t = clipped.trace().re;
                return Ok(Self {
                    matrix: clipped.scale_real(T::one() / t),
                    layout,
                });
            }
        } else if !cholesky_certifies_psd(&matrix, T::psd_tol()) {
            return Err(Error::InvalidState(format!(
                "matrix has an eigenvalue below -{:e}",
                T::psd_tol()
            )));
        }
        Ok(Self { matrix, layout })
    }

    /// Projects a Hermitian matrix onto the density matrices by clipping
    /// negative eigenvalues and renormalising.
    pub fn from_psd_projection(matrix: ComplexMatrix<T>, layout: SubsystemLayout) -> Result<Self> {
        let eig = eig_hermitian(&matrix.hermitian_part())?;
        let clipped = eig.reconstruct_with(|x| x.max(T::zero()));
        let t = clipped.trace().re;
        if !(t > T::zero()) {
            return Err(Error::InvalidState(
                "no positive spectrum to project onto".into(),
            ));
        }
        Self::new(clipped.scale_real(T::one() / t), layout)
    }

    pub fn maximally_mixed(layout: SubsystemLayout) -> Self {
        let n = layout.total();
        Self {
            matrix: ComplexMatrix::identity(n).scale_real(T::one() / T::from_count(n)),
            layout,
        }
    }

    pub fn basis(layout: SubsystemLayout, index: usize) -> Result<Self> {
        Ok(density_from_pure(&PureState::basis(layout, index)?))
    }

    /// Single-qubit `|0⟩⟨0|`-style basis projector of dimension `d`.
    pub fn qudit_basis(d: usize, index: usize) -> Result<Self> {
        Self::basis(SubsystemLayout::new(vec![d])?, index)
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix<T> {
        self.matrix
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn purity(&self) -> T {
        self.matrix.hs_inner(&self.matrix).re
    }

    pub fn eigen(&self) -> HermitianEigen<T> {
        jacobi_of(&self.matrix)
    }

    /// `self ⊗ other`.
    pub fn tensor(&self, other: &DensityMatrix<T>) -> Result<Self> {
        Ok(Self {
            matrix: qmath::tensor_product(&self.matrix, &other.matrix)?,
            layout: self.layout.join(&other.layout),
        })
    }

    /// Marginal on `keep` (kept factors in ascending order).
    pub fn marginal(&self, keep: &[usize]) -> Result<Self> {
        let m = qmath::partial_trace(&self.matrix, &self.layout, keep)?;
        let mut kept = keep.to_vec();
        kept.sort_unstable();
        Self::new(m, self.layout.select(&kept)?)
    }

    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let (m, layout) = qmath::permute_subsystems(&self.matrix, &self.layout, perm)?;
        Ok(Self { matrix: m, layout })
    }

    /// `U ρ U^†`.
    pub fn evolve(&self, u: &ComplexMatrix<T>) -> Result<Self> {
        let m = qmath::conjugate_by(u, &self.matrix)?;
        Self::new(m, self.layout.clone())
    }

    pub(crate) fn evolve_unchecked(&self, u: &ComplexMatrix<T>) -> Result<Self> {
        Self::new(qmath::conjugate_unchecked(u, &self.matrix), self.layout.clone())
    }

    /// Largest elementwise deviation from `other`.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.matrix.max_abs_diff(&other.matrix)
    }

    pub fn to_fixture(&self) -> StateFixture {
        StateFixture {
            dims: self.layout.dims().to_vec(),
            re: self.matrix.entries().iter().map(|z| z.re.as_f64()).collect(),
            im: self.matrix.entries().iter().map(|z| z.im.as_f64()).collect(),
        }
    }

    pub fn from_fixture(fixture: &StateFixture) -> Result<Self> {
        let layout = SubsystemLayout::new(fixture.dims.clone())?;
        let n = layout.total();
        if fixture.re.len() != n * n || fixture.im.len() != n * n {
            return Err(Error::ShapeMismatch {
                expected: format!("{} real and imaginary entries", n * n),
                found: format!("{} and {}", fixture.re.len(), fixture.im.len()),
            });
        }
        let entries = fixture
            .re
            .iter()
            .zip(&fixture.im)
            .map(|(&r, &i)| c(T::lit(r), T::lit(i)))
            .collect();
        Self::new(ComplexMatrix::from_vec(n, n, entries)?, layout)
    }
}

fn jacobi_of<T: Real>(m: &ComplexMatrix<T>) -> HermitianEigen<T> {
    eig_hermitian(m).expect("density matrices are Hermitian")
}

/// JSON state fixture: `{dims, re, im}` with row-major flattening.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateFixture {
    pub dims: Vec<usize>,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl StateFixture {
    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("fixture serialises")
    }
}

/// Probability-weighted pure branches of a classically prepared mixture.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble<T: Real> {
    branches: Vec<(T, PureState<T>)>,
}

impl<T: Real> Ensemble<T> {
    pub fn new(branches: Vec<(T, PureState<T>)>) -> Result<Self> {
        let Some((_, first)) = branches.first() else {
            return Err(Error::InvalidState("empty ensemble".into()));
        };
        let layout = first.layout().clone();
        let mut total = T::zero();
        for (p, s) in &branches {
            if !(*p >= T::zero() && *p <= T::one()) {
                return Err(Error::InvalidState(format!("branch probability {p}")));
            }
            if s.layout() != &layout {
                return Err(Error::LayoutMismatch("ensemble branches differ in layout".into()));
            }
            total += *p;
        }
        if !((total - T::one()).abs() <= T::trace_tol()) {
            return Err(Error::InvalidState(format!(
                "branch probabilities sum to {total}"
            )));
        }
        Ok(Self { branches })
    }

    pub fn pure(state: PureState<T>) -> Self {
        Self {
            branches: vec![(T::one(), state)],
        }
    }

    pub fn branches(&self) -> &[(T, PureState<T>)] {
        &self.branches
    }

    pub fn layout(&self) -> &SubsystemLayout {
        self.branches[0].1.layout()
    }
}

/// Hermitian observable with its spectrum precomputed.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable<T: Real> {
    matrix: ComplexMatrix<T>,
    eigen: HermitianEigen<T>,
}

impl<T: Real> Observable<T> {
    pub fn new(matrix: ComplexMatrix<T>) -> Result<Self> {
        let eigen = eig_hermitian(&matrix)?;
        Ok(Self {
            matrix: matrix.hermitian_part(),
            eigen,
        })
    }

    pub fn pauli_x() -> Self {
        Self::new(gates::pauli_x()).expect("Hermitian")
    }

    pub fn pauli_y() -> Self {
        Self::new(gates::pauli_y()).expect("Hermitian")
    }

    pub fn pauli_z() -> Self {
        Self::new(gates::pauli_z()).expect("Hermitian")
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// Ascending.
    pub fn eigenvalues(&self) -> &[T] {
        &self.eigen.values
    }

    /// Columns are eigenvectors, in the order of [`Self::eigenvalues`].
    pub fn eigenbasis(&self) -> &ComplexMatrix<T> {
        &self.eigen.vectors
    }

    pub fn eigen(&self) -> &HermitianEigen<T> {
        &self.eigen
    }

    pub fn min_eigenvalue(&self) -> T {
        self.eigen.min()
    }

    pub fn max_eigenvalue(&self) -> T {
        self.eigen.max()
    }

    /// `λ_max - λ_min`.
    pub fn range(&self) -> T {
        self.eigen.max() - self.eigen.min()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochVector<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> BlochVector<T> {
    pub fn new(x: T, y: T, z: T) -> Result<Self> {
        let v = Self { x, y, z };
        if !(v.norm_sqr() <= T::one() + T::trace_tol()) {
            return Err(Error::InvalidState(format!(
                "Bloch vector ({x}, {y}, {z}) lies outside the ball"
            )));
        }
        Ok(v)
    }

    pub fn norm_sqr(&self) -> T {
        self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn components(&self) -> [T; 3] {
        [self.x, self.y, self.z]
    }

    /// `(I + n·σ)/2`.
    pub fn to_density(&self) -> DensityMatrix<T> {
        state_of_bloch(self)
    }
}

/// `|ψ⟩⟨ψ|`.
pub fn density_from_pure<T: Real>(psi: &PureState<T>) -> DensityMatrix<T> {
    let m = ComplexMatrix::outer(psi.amplitudes(), psi.amplitudes());
    DensityMatrix {
        matrix: m.hermitian_part(),
        layout: psi.layout().clone(),
    }
}

/// `Tr(O ρ)`.
pub fn expectation<T: Real>(rho: &DensityMatrix<T>, obs: &Observable<T>) -> Result<T> {
    if rho.dim() != obs.dim() {
        return Err(Error::ShapeMismatch {
            expected: format!("observable of dimension {}", rho.dim()),
            found: format!("dimension {}", obs.dim()),
        });
    }
    Ok(obs.matrix().hs_inner(rho.matrix()).re)
}

/// `n_k = Tr(σ_k ρ)` of a single qubit.
pub fn bloch_of<T: Real>(rho: &DensityMatrix<T>) -> Result<BlochVector<T>> {
    if rho.layout().dims() != [2] {
        return Err(Error::LayoutMismatch(format!(
            "Bloch vector needs a single qubit, got layout {:?}",
            rho.layout().dims()
        )));
    }
    let m = rho.matrix();
    let two = T::lit(2.0);
    Ok(BlochVector {
        x: two * m[(0, 1)].re,
        y: -two * m[(0, 1)].im,
        z: m[(0, 0)].re - m[(1, 1)].re,
    })
}

pub fn state_of_bloch<T: Real>(n: &BlochVector<T>) -> DensityMatrix<T> {
    let half = T::lit(0.5);
    let m = ComplexMatrix::from_vec(
        2,
        2,
        vec![
            cr(half * (T::one() + n.z)),
            c(half * n.x, -half * n.y),
            c(half * n.x, half * n.y),
            cr(half * (T::one() - n.z)),
        ],
    )
    .expect("2x2");
    DensityMatrix {
        matrix: m,
        layout: SubsystemLayout::qubits(1).expect("qubit"),
    }
}

/// `Σ p_k |φ_k⟩⟨φ_k|`.
pub fn mix<T: Real>(ensemble: &Ensemble<T>) -> Result<DensityMatrix<T>> {
    let layout = ensemble.layout().clone();
    let n = layout.total();
    let mut acc = ComplexMatrix::zeros(n, n);
    for (p, psi) in ensemble.branches() {
        let proj = ComplexMatrix::outer(psi.amplitudes(), psi.amplitudes());
        acc = &acc + &proj.scale_real(*p);
    }
    DensityMatrix::new(acc, layout)
}

/// Born probabilities of `rho` over the eigenvectors of `obs`.
pub fn born_probabilities<T: Real>(rho: &DensityMatrix<T>, obs: &Observable<T>) -> Result<Vec<T>> {
    if rho.dim() != obs.dim() {
        return Err(Error::ShapeMismatch {
            expected: format!("observable of dimension {}", rho.dim()),
            found: format!("dimension {}", obs.dim()),
        });
    }
    let m = rho.matrix();
    let n = rho.dim();
    let mut probs = Vec::with_capacity(n);
    for k in 0..n {
        let v = obs.eigen().vector(k);
        let mv = m.apply(&v);
        let p: T = v.iter().zip(&mv).map(|(a, b)| (a.conj() * *b).re).sum();
        if p < -T::psd_tol() {
            return Err(Error::InvalidState(format!(
                "negative Born probability {p:e}"
            )));
        }
        probs.push(p.max(T::zero()));
    }
    let total: T = probs.iter().copied().sum();
    Ok(probs.into_iter().map(|p| p / total).collect())
}

/// Draws eigenvalue outcomes of an observable from a fixed Born
/// distribution, one uniform variate per draw.
#[derive(Debug, Clone)]
pub struct BornSampler<T: Real> {
    values: Vec<T>,
    cumulative: Vec<f64>,
}

impl<T: Real> BornSampler<T> {
    pub fn new(rho: &DensityMatrix<T>, obs: &Observable<T>) -> Result<Self> {
        let probs = born_probabilities(rho, obs)?;
        let mut acc = 0.0;
        let cumulative = probs
            .iter()
            .map(|p| {
                acc += p.as_f64();
                acc
            })
            .collect();
        Ok(Self {
            values: obs.eigenvalues().to_vec(),
            cumulative,
        })
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        let u: f64 = rng.gen::<f64>() * self.cumulative[self.cumulative.len() - 1];
        let k = self
            .cumulative
            .iter()
            .position(|&c| u < c)
            .unwrap_or(self.values.len() - 1);
        self.values[k]
    }
}

/// Seeded PRNG used by every sampling routine.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `shots` i.i.d. measurement outcomes of `obs` on `rho`.
pub fn measure_sample<T: Real>(
    rho: &DensityMatrix<T>,
    obs: &Observable<T>,
    shots: usize,
    seed: u64,
) -> Result<Vec<T>> {
    if shots == 0 {
        return Err(Error::param("shots", "must be at least 1"));
    }
    let sampler = BornSampler::new(rho, obs)?;
    let mut rng = rng_from_seed(seed);
    Ok((0..shots).map(|_| sampler.draw(&mut rng)).collect())
}

/// Uhlmann fidelity `(Tr √(√ρ σ √ρ))²`.
pub fn fidelity<T: Real>(rho: &DensityMatrix<T>, sigma: &DensityMatrix<T>) -> Result<T> {
    if rho.dim() != sigma.dim() {
        return Err(Error::ShapeMismatch {
            expected: format!("dimension {}", rho.dim()),
            found: format!("dimension {}", sigma.dim()),
        });
    }
    let sqrt_rho = rho.eigen().reconstruct_with(|x| x.max(T::zero()).sqrt());
    let inner = sqrt_rho.matmul(sigma.matrix()).matmul(&sqrt_rho).hermitian_part();
    let f: T = eig_hermitian(&inner)?
        .values
        .iter()
        .map(|x| x.max(T::zero()).sqrt())
        .sum();
    Ok((f * f).min(T::one()))
}

/// Trace distance `½‖ρ - σ‖₁`.
pub fn trace_distance<T: Real>(rho: &DensityMatrix<T>, sigma: &DensityMatrix<T>) -> Result<T> {
    Ok(qmath::trace_norm(&(rho.matrix() - sigma.matrix()))? * T::lit(0.5))
}
