//! Dense complex tensor algebra over mixed-radix composite systems.

mod layout;
mod linalg;
mod matrix;

use std::cell::Cell;
use std::sync::atomic::{AtomicUsize, Ordering};

use num_traits::Zero;

pub use layout::SubsystemLayout;
pub use linalg::{
    cholesky_certifies_psd, eig_hermitian, map_hermitian, null_space_real, trace_norm,
    HermitianEigen,
};
pub use matrix::ComplexMatrix;

use crate::error::{Error, Result};
use crate::scalar::{Real, C};

/// Default bound on the side length of any composite matrix.
pub const DEFAULT_MAX_DIMENSION: usize = 4096;

static MAX_DIMENSION: AtomicUsize = AtomicUsize::new(DEFAULT_MAX_DIMENSION);

thread_local! {
    static SCOPED_MAX_DIMENSION: Cell<Option<usize>> = const { Cell::new(None) };
}

/// Current composite-dimension bound.
pub fn max_dimension() -> usize {
    SCOPED_MAX_DIMENSION
        .with(Cell::get)
        .unwrap_or_else(|| MAX_DIMENSION.load(Ordering::Relaxed))
}

/// Runs `f` with a different bound on the current thread only.
pub fn with_max_dimension<R>(limit: usize, f: impl FnOnce() -> R) -> R {
    let prev = SCOPED_MAX_DIMENSION.with(|c| c.replace(Some(limit.max(1))));
    let out = f();
    SCOPED_MAX_DIMENSION.with(|c| c.set(prev));
    out
}

/// Sets the composite-dimension bound for the whole process; returns the
/// previous value.
pub fn set_max_dimension(limit: usize) -> usize {
    MAX_DIMENSION.swap(limit.max(1), Ordering::Relaxed)
}

pub(crate) fn check_dimension(requested: usize) -> Result<()> {
    let limit = max_dimension();
    if requested > limit {
        Err(Error::DimensionLimit { requested, limit })
    } else {
        Ok(())
    }
}

fn check_layout<T: Real>(m: &ComplexMatrix<T>, layout: &SubsystemLayout) -> Result<()> {
    if !m.is_square() || m.rows() != layout.total() {
        return Err(Error::LayoutMismatch(format!(
            "{}x{} matrix does not match layout {:?} (side {})",
            m.rows(),
            m.cols(),
            layout.dims(),
            layout.total()
        )));
    }
    Ok(())
}

/// Kronecker product `a ⊗ b`.
pub fn tensor_product<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    a.kron(b)
}

/// Traces out every factor not in `keep`; the kept factors stay in their
/// original relative order. An empty `keep` yields the 1x1 scalar trace.
pub fn partial_trace<T: Real>(
    m: &ComplexMatrix<T>,
    layout: &SubsystemLayout,
    keep: &[usize],
) -> Result<ComplexMatrix<T>> {
    check_layout(m, layout)?;
    layout.check_selection(keep, true)?;
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    let traced = layout.complement(&kept);
    let kept_off = layout.offsets(&kept);
    let traced_off = layout.offsets(&traced);
    let n = kept_off.len();
    let mut out = ComplexMatrix::zeros(n, n);
    for (r, &kr) in kept_off.iter().enumerate() {
        for (c, &kc) in kept_off.iter().enumerate() {
            let mut acc = C::zero();
            for &t in &traced_off {
                acc += m[(kr + t, kc + t)];
            }
            out[(r, c)] = acc;
        }
    }
    Ok(out)
}

/// Reduced density matrix `Tr_{rest} |ψ⟩⟨ψ|` of a state vector, without
/// forming the full projector.
pub fn partial_trace_pure<T: Real>(
    amplitudes: &[C<T>],
    layout: &SubsystemLayout,
    keep: &[usize],
) -> Result<ComplexMatrix<T>> {
    if amplitudes.len() != layout.total() {
        return Err(Error::LayoutMismatch(format!(
            "{} amplitudes for layout of side {}",
            amplitudes.len(),
            layout.total()
        )));
    }
    layout.check_selection(keep, true)?;
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    let traced = layout.complement(&kept);
    let kept_off = layout.offsets(&kept);
    let traced_off = layout.offsets(&traced);
    let n = kept_off.len();
    let mut out = ComplexMatrix::zeros(n, n);
    for &t in &traced_off {
        for (r, &kr) in kept_off.iter().enumerate() {
            let a = amplitudes[kr + t];
            if a.is_zero() {
                continue;
            }
            for (c, &kc) in kept_off.iter().enumerate() {
                out[(r, c)] += a * amplitudes[kc + t].conj();
            }
        }
    }
    Ok(out)
}

fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if perm.len() != n {
        return Err(Error::NotPermutation(perm.to_vec()));
    }
    for &p in perm {
        if p >= n || seen[p] {
            return Err(Error::NotPermutation(perm.to_vec()));
        }
        seen[p] = true;
    }
    Ok(())
}

/// Inverse of a factor permutation.
pub fn inverse_permutation(perm: &[usize]) -> Result<Vec<usize>> {
    check_permutation(perm, perm.len())?;
    let mut inv = vec![0; perm.len()];
    for (i, &p) in perm.iter().enumerate() {
        inv[p] = i;
    }
    Ok(inv)
}

/// Relabels factors so that factor `i` of the result is factor `perm[i]`
/// of the input. Returns the permuted matrix and its layout.
pub fn permute_subsystems<T: Real>(
    m: &ComplexMatrix<T>,
    layout: &SubsystemLayout,
    perm: &[usize],
) -> Result<(ComplexMatrix<T>, SubsystemLayout)> {
    check_layout(m, layout)?;
    check_permutation(perm, layout.len())?;
    let new_layout = layout.select(perm)?;
    // offsets of the input layout enumerated in the new factor order
    let old_index = layout.offsets(perm);
    let n = old_index.len();
    let out = ComplexMatrix::from_fn(n, n, |i, j| m[(old_index[i], old_index[j])]);
    Ok((out, new_layout))
}

/// Permutes the amplitudes of a state vector like [`permute_subsystems`].
pub fn permute_vector<T: Real>(
    v: &[C<T>],
    layout: &SubsystemLayout,
    perm: &[usize],
) -> Result<(Vec<C<T>>, SubsystemLayout)> {
    if v.len() != layout.total() {
        return Err(Error::LayoutMismatch("vector length".into()));
    }
    check_permutation(perm, layout.len())?;
    let new_layout = layout.select(perm)?;
    let old_index = layout.offsets(perm);
    Ok((old_index.iter().map(|&k| v[k]).collect(), new_layout))
}

/// `U ρ U^†` for unitary `U`.
pub fn conjugate_by<T: Real>(u: &ComplexMatrix<T>, rho: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    if !u.is_square() || !rho.is_square() || u.rows() != rho.rows() {
        return Err(Error::ShapeMismatch {
            expected: format!("{0}x{0}", rho.rows()),
            found: format!("{}x{}", u.rows(), u.cols()),
        });
    }
    let dev = u.unitary_deviation();
    if dev > T::unitary_tol() {
        return Err(Error::NotUnitary {
            deviation: dev.as_f64(),
        });
    }
    Ok(conjugate_unchecked(u, rho))
}

pub(crate) fn conjugate_unchecked<T: Real>(u: &ComplexMatrix<T>, rho: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    u.matmul(rho).matmul(&u.adjoint())
}
