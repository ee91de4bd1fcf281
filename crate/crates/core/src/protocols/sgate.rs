//! The S-gate `ρ(n_z) ↦ ρ(n_z²)`.
//!
//! CNOT onto a blank ancilla, OTC on the ancilla, CNOT back with the
//! ancilla as control. The OTC turns the copied populations into two
//! independent coins with the same bias, and the second CNOT leaves their
//! parity on the input.

use crate::error::{Error, Result};
use crate::gates::{c_plus, embed};
use crate::qmath::{ComplexMatrix, SubsystemLayout};
use crate::qstate::{bloch_of, DensityMatrix};
use crate::scalar::{cr, Real};
use crate::timelike::otc_apply;

fn check_qubit<T: Real>(rho: &DensityMatrix<T>) -> Result<()> {
    if rho.layout().dims() != [2] {
        return Err(Error::LayoutMismatch(format!(
            "S-gate takes a single qubit, got layout {:?}",
            rho.layout().dims()
        )));
    }
    Ok(())
}

/// Circuit implementation.
pub fn s_gate<T: Real>(rho: &DensityMatrix<T>) -> Result<DensityMatrix<T>> {
    check_qubit(rho)?;
    let layout = SubsystemLayout::qubits(2)?;
    let cnot = c_plus::<T>(2)?;
    let forward = embed(&cnot, &layout, &[0, 1])?;
    let back = embed(&cnot, &layout, &[1, 0])?;
    let joint = rho.tensor(&DensityMatrix::qudit_basis(2, 0)?)?;
    let copied = joint.evolve(&forward)?;
    let split = otc_apply(&copied, &[1])?;
    split.evolve_unchecked(&back)?.marginal(&[0])
}

/// `½(I + n_z² σ_z)`.
pub fn s_gate_closed_form<T: Real>(rho: &DensityMatrix<T>) -> Result<DensityMatrix<T>> {
    check_qubit(rho)?;
    let nz = bloch_of(rho)?.z;
    let z2 = nz * nz;
    let half = T::lit(0.5);
    let mut m = ComplexMatrix::zeros(2, 2);
    m[(0, 0)] = cr(half * (T::one() + z2));
    m[(1, 1)] = cr(half * (T::one() - z2));
    DensityMatrix::new(m, rho.layout().clone())
}

/// `p` applications of the circuit.
pub fn s_gate_iterated<T: Real>(rho: &DensityMatrix<T>, p: usize) -> Result<DensityMatrix<T>> {
    (0..p).try_fold(rho.clone(), |acc, _| s_gate(&acc))
}
