//! Timelike-curve channels.
//!
//! A Deutschian closed timelike curve is a self-consistency condition: the
//! state carried around the curve must equal the marginal of the joint
//! evolution it takes part in,
//!
//! ```text
//! σ = Tr_{≠CTC}[ U (ρ_in ⊗ σ) U^† ],    ρ_out = Tr_{CTC}[ U (ρ_in ⊗ σ) U^† ].
//! ```
//!
//! An open timelike curve is the interaction-free case. The traveller meets
//! nothing but its own future self, which replaces it, so the channel
//! reduces to `ρ_AB ↦ ρ_A ⊗ ρ_B`: every correlation between the traveller
//! and the rest of the world is erased while all local statistics survive.
//!
//! Both maps are non-linear in the input. A density matrix handed directly
//! to these functions is read as one part of a larger pure state; a
//! classical mixture has to come in as an [`Ensemble`] so each branch can be
//! sent through separately.

use crate::error::{Error, Result};
use crate::gates;
use crate::qmath::{
    self, eig_hermitian, null_space_real, partial_trace, permute_subsystems, ComplexMatrix,
    SubsystemLayout,
};
use crate::qstate::{density_from_pure, DensityMatrix, Ensemble};
use crate::scalar::{c, cr, Real};

pub const DEFAULT_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 100_000;
/// Largest CTC-side dimension for which the superoperator is built.
pub const SPECTRAL_MAX_CTC_DIM: usize = 32;
/// Iterations over which the power-iteration residual must shrink.
pub const STALL_WINDOW: usize = 100;

/// A unitary interaction between chronology-respecting factors and the
/// factors travelling around the curve.
#[derive(Debug, Clone, PartialEq)]
pub struct CtcSpec<T: Real> {
    interaction: ComplexMatrix<T>,
    joint_layout: SubsystemLayout,
    ctc_indices: Vec<usize>,
    chronology_indices: Vec<usize>,
    /// `perm[i]` = position of joint factor `i` within `input ⊗ σ`.
    assemble: Vec<usize>,
}

impl<T: Real> CtcSpec<T> {
    pub fn new(
        interaction: ComplexMatrix<T>,
        joint_layout: SubsystemLayout,
        ctc_indices: Vec<usize>,
    ) -> Result<Self> {
        joint_layout.check_selection(&ctc_indices, false)?;
        if ctc_indices.len() == joint_layout.len() {
            return Err(Error::InvalidSelection(
                "at least one chronology-respecting factor is required".into(),
            ));
        }
        if !interaction.is_square() || interaction.rows() != joint_layout.total() {
            return Err(Error::ShapeMismatch {
                expected: format!("{0}x{0} interaction", joint_layout.total()),
                found: format!("{}x{}", interaction.rows(), interaction.cols()),
            });
        }
        let dev = interaction.unitary_deviation();
        if dev > T::unitary_tol() {
            return Err(Error::NotUnitary {
                deviation: dev.as_f64(),
            });
        }
        let mut ctc_indices = ctc_indices;
        ctc_indices.sort_unstable();
        let chronology_indices = joint_layout.complement(&ctc_indices);
        let n_chron = chronology_indices.len();
        let mut assemble = vec![0; joint_layout.len()];
        for (k, &pos) in chronology_indices.iter().enumerate() {
            assemble[pos] = k;
        }
        for (j, &pos) in ctc_indices.iter().enumerate() {
            assemble[pos] = n_chron + j;
        }
        Ok(Self {
            interaction,
            joint_layout,
            ctc_indices,
            chronology_indices,
            assemble,
        })
    }

    /// Chronology factors first, then one CTC factor per entry of `ctc_dims`.
    pub fn appended(
        interaction: ComplexMatrix<T>,
        chronology: &SubsystemLayout,
        ctc_dims: &[usize],
    ) -> Result<Self> {
        let ctc = SubsystemLayout::new(ctc_dims.to_vec())?;
        let joint = chronology.join(&ctc);
        let idx = (chronology.len()..joint.len()).collect();
        Self::new(interaction, joint, idx)
    }

    /// The open-curve wiring: the `traveler` factors of the chronology
    /// layout enter the curve and their past selves emerge in their place,
    /// with no further interaction. The CTC copies are appended after the
    /// chronology factors.
    pub fn interaction_free(chronology: &SubsystemLayout, traveler: &[usize]) -> Result<Self> {
        chronology.check_selection(traveler, false)?;
        let mut traveler = traveler.to_vec();
        traveler.sort_unstable();
        let ctc_dims: Vec<usize> = traveler.iter().map(|&k| chronology.dim(k)).collect();
        let ctc = SubsystemLayout::new(ctc_dims)?;
        let joint = chronology.join(&ctc);
        let n = chronology.len();
        let mut perm: Vec<usize> = (0..joint.len()).collect();
        for (j, &k) in traveler.iter().enumerate() {
            perm.swap(k, n + j);
        }
        let u = gates::permutation_unitary(&joint, &perm)?;
        Self::new(u, joint, (n..n + traveler.len()).collect())
    }

    pub fn interaction(&self) -> &ComplexMatrix<T> {
        &self.interaction
    }

    pub fn joint_layout(&self) -> &SubsystemLayout {
        &self.joint_layout
    }

    /// Sorted.
    pub fn ctc_indices(&self) -> &[usize] {
        &self.ctc_indices
    }

    pub fn chronology_layout(&self) -> SubsystemLayout {
        self.joint_layout
            .select(&self.chronology_indices)
            .expect("valid selection")
    }

    pub fn ctc_layout(&self) -> SubsystemLayout {
        self.joint_layout
            .select(&self.ctc_indices)
            .expect("valid selection")
    }

    pub fn ctc_dim(&self) -> usize {
        self.ctc_indices
            .iter()
            .map(|&k| self.joint_layout.dim(k))
            .product()
    }

    fn check_input(&self, input: &DensityMatrix<T>) -> Result<()> {
        if input.layout().dims() != self.chronology_layout().dims() {
            return Err(Error::LayoutMismatch(format!(
                "input layout {:?} does not match chronology layout {:?}",
                input.layout().dims(),
                self.chronology_layout().dims()
            )));
        }
        Ok(())
    }

    /// `U (ρ ⊗ σ) U^†` in joint factor order, for arbitrary matrices.
    fn evolve_joint(&self, input: &ComplexMatrix<T>, sigma: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
        let product = qmath::tensor_product(input, sigma)?;
        let concat = self.chronology_layout().join(&self.ctc_layout());
        let (joint, _) = permute_subsystems(&product, &concat, &self.assemble)?;
        Ok(qmath::conjugate_unchecked(&self.interaction, &joint))
    }

    /// One application of the self-consistency map to an arbitrary matrix.
    fn map_raw(&self, input: &ComplexMatrix<T>, sigma: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
        let evolved = self.evolve_joint(input, sigma)?;
        partial_trace(&evolved, &self.joint_layout, &self.ctc_indices)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FixedPointMethod {
    PowerIteration,
    CesaroAverage,
    SpectralExact,
}

/// How [`deutsch_fixed_point_with`] searches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Power iteration from the maximally mixed state, Cesàro averaging once
    /// the residual stalls, then the spectral solve when it is eligible.
    Auto,
    /// Power iteration and Cesàro averaging only.
    Iterative,
    /// Superoperator eigenspace with maximum-entropy selection.
    SpectralExact,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointOptions<T> {
    pub tolerance: T,
    pub max_iter: usize,
    pub strategy: Strategy,
}

impl<T: Real> Default for FixedPointOptions<T> {
    fn default() -> Self {
        Self {
            tolerance: T::lit(DEFAULT_TOLERANCE),
            max_iter: DEFAULT_MAX_ITER,
            strategy: Strategy::Auto,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointReport<T: Real> {
    /// The self-consistent CTC state.
    pub solution: DensityMatrix<T>,
    /// `‖M(σ) - σ‖₁` of the returned solution.
    pub residual: T,
    /// Index of the returned iterate (zero for the starting point); for the
    /// spectral solve, the number of entropy-ascent steps.
    pub iterations: usize,
    pub method: FixedPointMethod,
    pub tolerance: T,
    /// Dimension of the eigenvalue-1 space when it was computed.
    pub fixed_space_dim: Option<usize>,
}

/// `M(σ) = Tr_{≠CTC}[U(ρ ⊗ σ)U^†]`.
pub fn deutsch_map<T: Real>(
    input: &DensityMatrix<T>,
    spec: &CtcSpec<T>,
    sigma: &DensityMatrix<T>,
) -> Result<DensityMatrix<T>> {
    spec.check_input(input)?;
    if sigma.layout().dims() != spec.ctc_layout().dims() {
        return Err(Error::LayoutMismatch("CTC state layout".into()));
    }
    let m = spec.map_raw(input.matrix(), sigma.matrix())?;
    DensityMatrix::new(m, spec.ctc_layout())
}

/// `‖M(σ) - σ‖₁`, evaluated from scratch.
pub fn self_consistency_residual<T: Real>(
    input: &DensityMatrix<T>,
    spec: &CtcSpec<T>,
    sigma: &DensityMatrix<T>,
) -> Result<T> {
    let next = deutsch_map(input, spec, sigma)?;
    qmath::trace_norm(&(next.matrix() - sigma.matrix()))
}

/// Solves the Deutsch self-consistency condition with the default strategy.
pub fn deutsch_fixed_point<T: Real>(
    input: &DensityMatrix<T>,
    spec: &CtcSpec<T>,
    tol: T,
    max_iter: usize,
) -> Result<FixedPointReport<T>> {
    deutsch_fixed_point_with(
        input,
        spec,
        &FixedPointOptions {
            tolerance: tol,
            max_iter,
            strategy: Strategy::Auto,
        },
    )
}

pub fn deutsch_fixed_point_with<T: Real>(
    input: &DensityMatrix<T>,
    spec: &CtcSpec<T>,
    opts: &FixedPointOptions<T>,
) -> Result<FixedPointReport<T>> {
    spec.check_input(input)?;
    if !(opts.tolerance > T::zero()) {
        return Err(Error::param("tol", "must be positive"));
    }
    let spectral_ok = spec.ctc_dim() <= SPECTRAL_MAX_CTC_DIM;
    match opts.strategy {
        Strategy::SpectralExact => {
            if !spectral_ok {
                return Err(Error::param(
                    "strategy",
                    format!(
                        "spectral solve needs CTC dimension at most {SPECTRAL_MAX_CTC_DIM}, got {}",
                        spec.ctc_dim()
                    ),
                ));
            }
            spectral_exact(input, spec, opts.tolerance)
        }
        Strategy::Iterative => iterate(input, spec, opts),
        Strategy::Auto => match iterate(input, spec, opts) {
            Err(Error::Convergence { .. }) if spectral_ok => {
                spectral_exact(input, spec, opts.tolerance)
            }
            other => other,
        },
    }
}

fn iterate<T: Real>(
    input: &DensityMatrix<T>,
    spec: &CtcSpec<T>,
    opts: &FixedPointOptions<T>,
) -> Result<FixedPointReport<T>> {
    let rho = input.matrix();
    let ctc_layout = spec.ctc_layout();
    let mut sigma = DensityMatrix::maximally_mixed(ctc_layout.clone()).into_matrix();
    let mut history: Vec<T> = Vec::new();
    let mut best = T::infinity();
    let mut cesaro = false;
    let mut running_sum = ComplexMatrix::zeros(sigma.rows(), sigma.cols());
    let mut averaged = 0usize;
    let stall_factor = T::lit(0.999);

    for k in 0..=opts.max_iter {
        let next = spec.map_raw(rho, &sigma)?;
        if !cesaro {
            let residual = qmath::trace_norm(&(&next - &sigma))?;
            best = best.min(residual);
            if residual <= opts.tolerance {
                return finish(sigma, &ctc_layout, residual, k, FixedPointMethod::PowerIteration, opts);
            }
            history.push(residual);
            if k >= STALL_WINDOW && residual > stall_factor * history[k - STALL_WINDOW] {
                cesaro = true;
            }
            sigma = next;
        } else {
            running_sum = &running_sum + &sigma;
            averaged += 1;
            let avg = running_sum.scale_real(T::one() / T::from_count(averaged));
            let avg_next = spec.map_raw(rho, &avg)?;
            let residual = qmath::trace_norm(&(&avg_next - &avg))?;
            best = best.min(residual);
            if residual <= opts.tolerance {
                return finish(avg, &ctc_layout, residual, k, FixedPointMethod::CesaroAverage, opts);
            }
            sigma = next;
        }
    }
    Err(Error::Convergence {
        iterations: opts.max_iter,
        best_residual: best.as_f64(),
    })
}

fn finish<T: Real>(
    sigma: ComplexMatrix<T>,
    layout: &SubsystemLayout,
    residual: T,
    iterations: usize,
    method: FixedPointMethod,
    opts: &FixedPointOptions<T>,
) -> Result<FixedPointReport<T>> {
    Ok(FixedPointReport {
        solution: DensityMatrix::new(sigma, layout.clone())?,
        residual,
        iterations,
        method,
        tolerance: opts.tolerance,
        fixed_space_dim: None,
    })
}

/// Orthonormal Hermitian basis of `d x d` matrices under the
/// Hilbert-Schmidt inner product.
fn hermitian_basis<T: Real>(d: usize) -> Vec<ComplexMatrix<T>> {
    let h = T::lit(0.5).sqrt();
    let mut out = Vec::with_capacity(d * d);
    for j in 0..d {
        let mut m = ComplexMatrix::zeros(d, d);
        m[(j, j)] = cr(T::one());
        out.push(m);
    }
    for j in 0..d {
        for k in j + 1..d {
            let mut sym = ComplexMatrix::zeros(d, d);
            sym[(j, k)] = cr(h);
            sym[(k, j)] = cr(h);
            out.push(sym);
            let mut anti = ComplexMatrix::zeros(d, d);
            anti[(j, k)] = c(T::zero(), h);
            anti[(k, j)] = c(T::zero(), -h);
            out.push(anti);
        }
    }
    out
}

fn von_neumann_entropy<T: Real>(values: &[T], floor: T) -> T {
    values
        .iter()
        .filter(|&&x| x > floor)
        .map(|&x| -x * x.ln())
        .sum()
}

/// Fixed-point space of the self-consistency map from its real
/// superoperator, then the maximum-entropy density matrix within it.
fn spectral_exact<T: Real>(
    input: &DensityMatrix<T>,
    spec: &CtcSpec<T>,
    tol: T,
) -> Result<FixedPointReport<T>> {
    let d = spec.ctc_dim();
    let layout = spec.ctc_layout();
    let basis = hermitian_basis::<T>(d);
    let n = basis.len();
    let images: Vec<ComplexMatrix<T>> = basis
        .iter()
        .map(|b| spec.map_raw(input.matrix(), b))
        .collect::<Result<_>>()?;
    // R - I in the Hermitian basis
    let mut a = vec![T::zero(); n * n];
    for (col, img) in images.iter().enumerate() {
        for (row, b) in basis.iter().enumerate() {
            a[row * n + col] = b.hs_inner(img).re - if row == col { T::one() } else { T::zero() };
        }
    }
    let null = null_space_real(&a, n, T::rank_tol());
    if null.is_empty() {
        return Err(Error::Convergence {
            iterations: 0,
            best_residual: f64::NAN,
        });
    }
    let fixed: Vec<ComplexMatrix<T>> = null
        .iter()
        .map(|v| {
            v.iter()
                .zip(&basis)
                .fold(ComplexMatrix::zeros(d, d), |acc, (&x, b)| &acc + &b.scale_real(x))
        })
        .collect();

    let (sigma, steps) = if fixed.len() == 1 {
        let f = &fixed[0];
        let t = f.trace().re;
        (f.scale_real(T::one() / t), 0)
    } else {
        max_entropy_in_span(&fixed)?
    };
    let solution = DensityMatrix::from_psd_projection(sigma, layout)?;
    let residual = self_consistency_residual(input, spec, &solution)?;
    if residual > tol {
        return Err(Error::Convergence {
            iterations: steps,
            best_residual: residual.as_f64(),
        });
    }
    Ok(FixedPointReport {
        solution,
        residual,
        iterations: steps,
        method: FixedPointMethod::SpectralExact,
        tolerance: tol,
        fixed_space_dim: Some(fixed.len()),
    })
}

/// Maximises von Neumann entropy over the density matrices in the span of
/// `fixed` by projected gradient ascent. The span of fixed points of a
/// positive trace-preserving map is closed under taking positive and
/// negative parts, which supplies a full-support starting state.
fn max_entropy_in_span<T: Real>(fixed: &[ComplexMatrix<T>]) -> Result<(ComplexMatrix<T>, usize)> {
    let d = fixed[0].rows();
    let mut start = ComplexMatrix::zeros(d, d);
    for f in fixed {
        let e = eig_hermitian(&f.hermitian_part())?;
        start = &start + &e.reconstruct_with(|x| x.abs());
    }
    let t = start.trace().re;
    let mut sigma = start.scale_real(T::one() / t);

    // traceless directions, orthonormalised
    let mut dirs: Vec<ComplexMatrix<T>> = Vec::new();
    for f in fixed {
        let mut g = f - &sigma.scale_real(f.trace().re);
        for q in &dirs {
            let p = q.hs_inner(&g).re;
            g = &g - &q.scale_real(p);
        }
        let norm = g.frobenius_norm();
        if norm > T::lit(1e-9) {
            dirs.push(g.scale_real(T::one() / norm));
        }
    }

    let floor = T::lit(1e-13);
    let eig = eig_hermitian(&sigma.hermitian_part())?;
    let rank = eig.values.iter().filter(|&&x| x > floor).count();
    let mut entropy = von_neumann_entropy(&eig.values, floor);
    let mut log_sigma = eig.reconstruct_with(|x| if x > floor { x.ln() } else { T::zero() });
    let mut step = T::one();
    let mut steps = 0;
    for _ in 0..2000 {
        let grad: Vec<T> = dirs.iter().map(|q| -log_sigma.hs_inner(q).re).collect();
        let gnorm2: T = grad.iter().map(|g| *g * *g).sum();
        if gnorm2.sqrt() < T::lit(1e-12) {
            break;
        }
        let direction = dirs
            .iter()
            .zip(&grad)
            .fold(ComplexMatrix::zeros(d, d), |acc, (q, &g)| &acc + &q.scale_real(g));
        step = step * T::lit(2.0);
        let mut accepted = false;
        while step > T::lit(1e-18) {
            let trial = (&sigma + &direction.scale_real(step)).hermitian_part();
            let e = eig_hermitian(&trial)?;
            let keeps_support = e.values.iter().filter(|&&x| x > floor).count() == rank
                && e.min() > -floor;
            if keeps_support {
                let s = von_neumann_entropy(&e.values, floor);
                if s >= entropy + T::lit(1e-4) * step * gnorm2 {
                    sigma = trial;
                    entropy = s;
                    log_sigma = e.reconstruct_with(|x| if x > floor { x.ln() } else { T::zero() });
                    accepted = true;
                    break;
                }
            }
            step = step * T::lit(0.5);
        }
        steps += 1;
        if !accepted {
            break;
        }
    }
    Ok((sigma, steps))
}

/// `ρ_out = Tr_{CTC}[U(ρ_in ⊗ σ)U^†]` for a previously solved `σ`.
pub fn ctc_evolve<T: Real>(
    input: &DensityMatrix<T>,
    spec: &CtcSpec<T>,
    fp: &FixedPointReport<T>,
) -> Result<DensityMatrix<T>> {
    spec.check_input(input)?;
    let residual = self_consistency_residual(input, spec, &fp.solution)?;
    let allowed = fp.tolerance.max(fp.residual) * T::lit(2.0);
    if residual > allowed {
        return Err(Error::StaleFixedPoint {
            residual: residual.as_f64(),
            tolerance: allowed.as_f64(),
        });
    }
    let evolved = spec.evolve_joint(input.matrix(), fp.solution.matrix())?;
    let out = partial_trace(&evolved, spec.joint_layout(), &spec.chronology_indices)?;
    DensityMatrix::new(out, input.layout().clone())
}

/// The open-curve decorrelator: `ρ ↦ ρ_traveler ⊗ ρ_rest`, reassembled in
/// the original factor order. Sending every factor is the identity.
pub fn otc_apply<T: Real>(rho: &DensityMatrix<T>, traveler: &[usize]) -> Result<DensityMatrix<T>> {
    let layout = rho.layout();
    layout.check_selection(traveler, false)?;
    if traveler.len() == layout.len() {
        return Ok(rho.clone());
    }
    let mut sent = traveler.to_vec();
    sent.sort_unstable();
    let rest = layout.complement(&sent);
    let product = qmath::tensor_product(
        &partial_trace(rho.matrix(), layout, &sent)?,
        &partial_trace(rho.matrix(), layout, &rest)?,
    )?;
    let concat: Vec<usize> = sent.iter().chain(&rest).copied().collect();
    let mut restore = vec![0; layout.len()];
    for (pos, &factor) in concat.iter().enumerate() {
        restore[factor] = pos;
    }
    let concat_layout = layout.select(&concat)?;
    let (m, out_layout) = permute_subsystems(&product, &concat_layout, &restore)?;
    debug_assert_eq!(&out_layout, layout);
    DensityMatrix::new(m, out_layout)
}

/// Sends each listed factor through its own open curve, one after another.
pub fn otc_apply_each<T: Real>(rho: &DensityMatrix<T>, factors: &[usize]) -> Result<DensityMatrix<T>> {
    factors
        .iter()
        .try_fold(rho.clone(), |acc, &k| otc_apply(&acc, &[k]))
}

/// Branchwise decorrelation of a classical mixture.
pub fn otc_apply_ensemble<T: Real>(input: &Ensemble<T>, traveler: &[usize]) -> Result<DensityMatrix<T>> {
    let layout = input.layout().clone();
    let n = layout.total();
    let mut acc: ComplexMatrix<T> = ComplexMatrix::zeros(n, n);
    for (p, psi) in input.branches() {
        let out = otc_apply(&density_from_pure(psi), traveler)?;
        acc = &acc + &out.matrix().scale_real(*p);
    }
    DensityMatrix::new(acc, layout)
}
