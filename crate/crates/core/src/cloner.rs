//! Universal cloning of a single qudit.
//!
//! The exact backend is the optimal symmetric cloner: the input is padded
//! with maximally mixed blanks and projected onto the symmetric subspace,
//! `P_sym (ρ ⊗ I^{⊗(M-1)}) P_sym`, then renormalised. Every clone then sees
//! `sρ + (1 - s) I/d` with `s = (M + d) / (M (1 + d))`. The marginal model
//! skips the joint state and hands back those reduced states directly,
//! which is what the clones look like once OTCs have decorrelated them.

use std::collections::HashMap;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates;
use crate::qmath::{check_dimension, ComplexMatrix, SubsystemLayout};
use crate::qstate::DensityMatrix;
use crate::scalar::{cr, Real, C};
use crate::timelike::otc_apply_each;

/// Largest `M` for which [`symmetric_projector`] sums permutation operators.
pub const PERMUTATION_SUM_MAX: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CloneBackend {
    ExactSymmetric,
    MarginalModel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CloneJob<T: Real> {
    pub input: DensityMatrix<T>,
    pub copies: usize,
    pub backend: CloneBackend,
}

impl<T: Real> CloneJob<T> {
    pub fn new(input: DensityMatrix<T>, copies: usize, backend: CloneBackend) -> Result<Self> {
        if input.layout().len() != 1 {
            return Err(Error::LayoutMismatch(format!(
                "cloner takes a single qudit, got layout {:?}",
                input.layout().dims()
            )));
        }
        if copies == 0 {
            return Err(Error::param("copies", "must be at least 1"));
        }
        if backend == CloneBackend::ExactSymmetric {
            joint_dimension(input.dim(), copies)?;
        }
        Ok(Self {
            input,
            copies,
            backend,
        })
    }

    pub fn dimension(&self) -> usize {
        self.input.dim()
    }
}

fn joint_dimension(d: usize, m: usize) -> Result<usize> {
    let n = u32::try_from(m)
        .ok()
        .and_then(|m| d.checked_pow(m))
        .ok_or(Error::DimensionLimit {
            requested: usize::MAX,
            limit: crate::qmath::max_dimension(),
        })?;
    check_dimension(n)?;
    Ok(n)
}

fn check_args(d: usize, m: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::param("d", "dimension must be at least 2"));
    }
    if m == 0 {
        return Err(Error::param("copies", "must be at least 1"));
    }
    Ok(())
}

/// `(M + d) / (M (1 + d))` as an exact fraction.
pub fn shrinking_factor_exact(d: usize, m: usize) -> Result<Ratio<u64>> {
    check_args(d, m)?;
    let (d, m) = (d as u64, m as u64);
    let den = m
        .checked_mul(1 + d)
        .ok_or_else(|| Error::param("copies", "too large"))?;
    Ok(Ratio::new(m + d, den))
}

pub fn shrinking_factor<T: Real>(d: usize, m: usize) -> Result<T> {
    check_args(d, m)?;
    let (d, m) = (T::from_count(d), T::from_count(m));
    Ok((m + d) / (m * (T::one() + d)))
}

/// Occupation-number description of the symmetric subspace: each basis
/// string of `M` qudits belongs to exactly one orbit under permutations,
/// and the symmetric basis vector of an orbit is the uniform superposition
/// of its strings.
struct Orbits<T> {
    d: usize,
    m: usize,
    orbit_of: Vec<usize>,
    /// `1/√|orbit|`
    weight: Vec<T>,
}

impl<T: Real> Orbits<T> {
    fn new(d: usize, m: usize) -> Result<Self> {
        let n = joint_dimension(d, m)?;
        let mut ids: HashMap<Vec<u16>, usize> = HashMap::new();
        let mut orbit_of = Vec::with_capacity(n);
        let mut sizes: Vec<usize> = Vec::new();
        let mut occupation = vec![0u16; d];
        for x in 0..n {
            occupation.iter_mut().for_each(|o| *o = 0);
            let mut rest = x;
            for _ in 0..m {
                occupation[rest % d] += 1;
                rest /= d;
            }
            let next = ids.len();
            let id = *ids.entry(occupation.clone()).or_insert(next);
            if id == sizes.len() {
                sizes.push(0);
            }
            sizes[id] += 1;
            orbit_of.push(id);
        }
        let weight = sizes
            .iter()
            .map(|&s| T::one() / T::from_count(s).sqrt())
            .collect();
        Ok(Self {
            d,
            m,
            orbit_of,
            weight,
        })
    }

    fn count(&self) -> usize {
        self.weight.len()
    }

    fn total(&self) -> usize {
        self.orbit_of.len()
    }

    /// Isometry onto the symmetric subspace, one column per orbit.
    fn isometry(&self) -> ComplexMatrix<T> {
        let mut b = ComplexMatrix::zeros(self.total(), self.count());
        for (x, &a) in self.orbit_of.iter().enumerate() {
            b[(x, a)] = cr(self.weight[a]);
        }
        b
    }

    /// `B^† (ρ ⊗ I) B` with `ρ` on the first (most significant) qudit.
    fn compress(&self, rho: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        let k = self.count();
        let stride = self.total() / self.d;
        let mut x_mat = ComplexMatrix::zeros(k, k);
        for x in 0..self.total() {
            let x0 = x / stride;
            let a = self.orbit_of[x];
            for y0 in 0..self.d {
                let r = rho[(x0, y0)];
                if r == C::new(T::zero(), T::zero()) {
                    continue;
                }
                let y = x - x0 * stride + y0 * stride;
                let b = self.orbit_of[y];
                x_mat[(a, b)] += r.scale(self.weight[a] * self.weight[b]);
            }
        }
        x_mat
    }

    /// Joint entry `⟨x| B X B^† |y⟩`.
    fn expand_entry(&self, x_mat: &ComplexMatrix<T>, x: usize, y: usize) -> C<T> {
        let (a, b) = (self.orbit_of[x], self.orbit_of[y]);
        x_mat[(a, b)].scale(self.weight[a] * self.weight[b])
    }
}

fn all_permutations(m: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                go(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; m], &mut out);
    out
}

/// Projector onto the symmetric subspace of `M` qudits of dimension `d`.
/// Averages the `M!` permutation operators for `M ≤ 6`, and uses the
/// occupation-number basis beyond that.
pub fn symmetric_projector<T: Real>(d: usize, m: usize) -> Result<ComplexMatrix<T>> {
    check_args(d, m)?;
    let n = joint_dimension(d, m)?;
    if m <= PERMUTATION_SUM_MAX {
        let layout = SubsystemLayout::uniform(d, m)?;
        let perms = all_permutations(m);
        let mut p = ComplexMatrix::zeros(n, n);
        for perm in &perms {
            p = &p + &gates::permutation_unitary::<T>(&layout, perm)?;
        }
        Ok(p.scale_real(T::one() / T::from_count(perms.len())))
    } else {
        let b = Orbits::<T>::new(d, m)?.isometry();
        Ok(b.matmul(&b.adjoint()))
    }
}

fn exact_parts<T: Real>(job: &CloneJob<T>) -> Result<(Orbits<T>, ComplexMatrix<T>)> {
    let orbits = Orbits::new(job.dimension(), job.copies)?;
    let x_mat = orbits.compress(job.input.matrix());
    let t = x_mat.trace().re;
    Ok((orbits, x_mat.scale_real(T::one() / t)))
}

/// The full `M`-qudit output of the optimal symmetric cloner.
pub fn clone_exact<T: Real>(job: &CloneJob<T>) -> Result<DensityMatrix<T>> {
    if job.backend != CloneBackend::ExactSymmetric {
        return Err(Error::param("backend", "clone_exact needs exact_symmetric"));
    }
    let (orbits, x_mat) = exact_parts(job)?;
    let b = orbits.isometry();
    let out = b.matmul(&x_mat).matmul(&b.adjoint());
    DensityMatrix::new(
        out.hermitian_part(),
        SubsystemLayout::uniform(job.dimension(), job.copies)?,
    )
}

/// Single-clone marginal of the exact cloner, without forming the joint
/// density matrix. All clones share it by symmetry.
pub fn exact_clone_marginal<T: Real>(job: &CloneJob<T>) -> Result<DensityMatrix<T>> {
    let (orbits, x_mat) = exact_parts(job)?;
    let d = orbits.d;
    let stride = orbits.total() / d;
    let mut out = ComplexMatrix::zeros(d, d);
    for x in 0..orbits.total() {
        let i = x / stride;
        let rest = x - i * stride;
        for j in 0..d {
            out[(i, j)] += orbits.expand_entry(&x_mat, x, rest + j * stride);
        }
    }
    debug_assert_eq!(orbits.m, job.copies);
    DensityMatrix::new(out.hermitian_part(), job.input.layout().clone())
}

/// `sρ + (1 - s) I/d`.
pub fn shrink<T: Real>(rho: &DensityMatrix<T>, s: T) -> Result<DensityMatrix<T>> {
    let d = rho.dim();
    let noise = ComplexMatrix::identity(d).scale_real((T::one() - s) / T::from_count(d));
    DensityMatrix::new(&rho.matrix().scale_real(s) + &noise, rho.layout().clone())
}

/// `M` identical noisy copies `sρ + (1 - s) I/d`.
pub fn clone_marginals<T: Real>(job: &CloneJob<T>) -> Result<Vec<DensityMatrix<T>>> {
    let s = shrinking_factor::<T>(job.dimension(), job.copies)?;
    let one = shrink(&job.input, s)?;
    Ok(vec![one; job.copies])
}

/// The clones as seen after each has been sent through its own OTC.
/// The exact backend really builds the joint state and decorrelates it;
/// the marginal model returns the closed form.
pub fn per_clone_states<T: Real>(job: &CloneJob<T>) -> Result<Vec<DensityMatrix<T>>> {
    match job.backend {
        CloneBackend::MarginalModel => clone_marginals(job),
        CloneBackend::ExactSymmetric => {
            let joint = clone_exact(job)?;
            let factors: Vec<usize> = (0..job.copies).collect();
            let product = otc_apply_each(&joint, &factors)?;
            factors.iter().map(|&k| product.marginal(&[k])).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::rng_from_seed;
    use crate::random::{random_mixed, random_pure_density};

    fn job(rho: DensityMatrix<f64>, m: usize, backend: CloneBackend) -> CloneJob<f64> {
        CloneJob::new(rho, m, backend).unwrap()
    }

    #[test]
    fn closed_form_anchors() {
        assert_eq!(shrinking_factor_exact(2, 3).unwrap(), Ratio::new(5, 9));
        assert_eq!(shrinking_factor_exact(2, 2).unwrap(), Ratio::new(2, 3));
        assert_eq!(shrinking_factor_exact(2, 1).unwrap(), Ratio::new(1, 1));
        assert_eq!(shrinking_factor_exact(3, 9).unwrap(), Ratio::new(1, 3));
        assert!(shrinking_factor::<f64>(1, 3).is_err());
        assert!(shrinking_factor::<f64>(2, 0).is_err());
    }

    #[test]
    fn three_copies_of_zero() {
        let zero = DensityMatrix::qudit_basis(2, 0).unwrap();
        let expect = ComplexMatrix::diagonal(&[7.0 / 9.0, 2.0 / 9.0]);
        let exact = exact_clone_marginal(&job(zero.clone(), 3, CloneBackend::ExactSymmetric)).unwrap();
        assert!(exact.matrix().max_abs_diff(&expect) < 1e-12);
        for c in clone_marginals(&job(zero, 3, CloneBackend::MarginalModel)).unwrap() {
            assert!(c.matrix().max_abs_diff(&expect) < 1e-12);
        }
    }

    #[test]
    fn single_copy_is_identity() {
        let mut rng = rng_from_seed(9);
        let rho = random_mixed::<f64, _>(&SubsystemLayout::new(vec![3]).unwrap(), &mut rng);
        let out = clone_exact(&job(rho.clone(), 1, CloneBackend::ExactSymmetric)).unwrap();
        assert!(out.max_abs_diff(&rho) < 1e-12);
    }

    #[test]
    fn exact_marginal_matches_closed_form() {
        let mut rng = rng_from_seed(21);
        for (d, m) in [(2, 2), (2, 3), (2, 5), (3, 2), (3, 3), (4, 2)] {
            let layout = SubsystemLayout::new(vec![d]).unwrap();
            let rho = random_pure_density::<f64, _>(&layout, &mut rng);
            let exact = exact_clone_marginal(&job(rho.clone(), m, CloneBackend::ExactSymmetric)).unwrap();
            let model = &clone_marginals(&job(rho, m, CloneBackend::MarginalModel)).unwrap()[0];
            assert!(exact.max_abs_diff(model) < 1e-9, "d={d} M={m}");
        }
    }

    #[test]
    fn joint_output_is_symmetric() {
        let mut rng = rng_from_seed(4);
        let rho = random_pure_density::<f64, _>(&SubsystemLayout::qubits(1).unwrap(), &mut rng);
        let out = clone_exact(&job(rho, 3, CloneBackend::ExactSymmetric)).unwrap();
        let p = symmetric_projector::<f64>(2, 3).unwrap();
        let pp = p.matmul(out.matrix()).matmul(&p);
        assert!(pp.max_abs_diff(out.matrix()) < 1e-10);
    }

    #[test]
    fn projector_constructions_agree() {
        let by_perms = symmetric_projector::<f64>(2, 4).unwrap();
        let b = Orbits::<f64>::new(2, 4).unwrap().isometry();
        assert!(by_perms.max_abs_diff(&b.matmul(&b.adjoint())) < 1e-12);
        let big = symmetric_projector::<f64>(2, 7).unwrap();
        assert!((big.trace().re - 8.0).abs() < 1e-12);
    }

    #[test]
    fn decorrelated_exact_clones_match_model() {
        let mut rng = rng_from_seed(17);
        let rho = random_pure_density::<f64, _>(&SubsystemLayout::qubits(1).unwrap(), &mut rng);
        let exact = per_clone_states(&job(rho.clone(), 3, CloneBackend::ExactSymmetric)).unwrap();
        let model = per_clone_states(&job(rho, 3, CloneBackend::MarginalModel)).unwrap();
        for (a, b) in exact.iter().zip(&model) {
            assert!(a.max_abs_diff(b) < 1e-9);
        }
    }

    #[test]
    fn exact_backend_respects_bound() {
        let rho = DensityMatrix::<f64>::qudit_basis(3, 0).unwrap();
        assert!(matches!(
            CloneJob::new(rho.clone(), 9, CloneBackend::ExactSymmetric),
            Err(Error::DimensionLimit { .. })
        ));
        assert!(CloneJob::new(rho, 9, CloneBackend::MarginalModel).is_ok());
    }
}
