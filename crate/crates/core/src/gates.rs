//! Qudit gate library.

use num_traits::{One, Zero};

use crate::cnf::CnfFormula;
use crate::error::{Error, Result};
use crate::qmath::{check_dimension, ComplexMatrix, SubsystemLayout};
use crate::qstate::PureState;
use crate::scalar::{c, cr, Real, C};

/// Largest variable count for which the SAT oracle is built densely.
pub const ORACLE_MAX_VARS: usize = 12;

pub fn pauli_x<T: Real>() -> ComplexMatrix<T> {
    ComplexMatrix::from_real(2, &[0.0, 1.0, 1.0, 0.0]).expect("2x2")
}

pub fn pauli_y<T: Real>() -> ComplexMatrix<T> {
    let i = c(T::zero(), T::one());
    ComplexMatrix::from_vec(2, 2, vec![C::zero(), -i, i, C::zero()]).expect("2x2")
}

pub fn pauli_z<T: Real>() -> ComplexMatrix<T> {
    ComplexMatrix::diagonal(&[T::one(), -T::one()])
}

/// Controlled addition `|i⟩|j⟩ ↦ |i⟩|j+i mod d⟩`, control first.
pub fn c_plus<T: Real>(d: usize) -> Result<ComplexMatrix<T>> {
    if d < 2 {
        return Err(Error::param("d", format!("dimension {d} is below 2")));
    }
    check_dimension(d * d)?;
    let n = d * d;
    let mut m = ComplexMatrix::zeros(n, n);
    for i in 0..d {
        for j in 0..d {
            m[(i * d + (j + i) % d, i * d + j)] = C::one();
        }
    }
    Ok(m)
}

/// `C₊` expressed in the basis whose `k`-th element is column `k` of
/// `basis`: `(V⊗V) C₊ (V⊗V)^†`.
pub fn c_plus_in_basis<T: Real>(basis: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    let d = basis.rows();
    let vv = basis.kron(basis)?;
    Ok(vv.matmul(&c_plus(d)?).matmul(&vv.adjoint()))
}

/// Lifts `gate` to the whole `layout`, acting on `factors` (in the listed
/// order, so the first listed factor is the gate's most significant input)
/// and as the identity elsewhere.
pub fn embed<T: Real>(
    gate: &ComplexMatrix<T>,
    layout: &SubsystemLayout,
    factors: &[usize],
) -> Result<ComplexMatrix<T>> {
    layout.check_selection(factors, false)?;
    let gate_dim: usize = factors.iter().map(|&k| layout.dim(k)).product();
    if !gate.is_square() || gate.rows() != gate_dim {
        return Err(Error::ShapeMismatch {
            expected: format!("{gate_dim}x{gate_dim} gate"),
            found: format!("{}x{}", gate.rows(), gate.cols()),
        });
    }
    let n = layout.total();
    check_dimension(n)?;
    let sel = layout.offsets(factors);
    let rest = layout.offsets(&layout.complement(factors));
    let mut out = ComplexMatrix::zeros(n, n);
    for &r in &rest {
        for (a, &sa) in sel.iter().enumerate() {
            for (b, &sb) in sel.iter().enumerate() {
                let g = gate[(a, b)];
                if !g.is_zero() {
                    out[(sa + r, sb + r)] = g;
                }
            }
        }
    }
    Ok(out)
}

/// Unitary relabelling the factors of `layout` so that factor `i` of the
/// output carries what factor `perm[i]` carried. Permuted factors must
/// share their local dimension.
pub fn permutation_unitary<T: Real>(layout: &SubsystemLayout, perm: &[usize]) -> Result<ComplexMatrix<T>> {
    let permuted = layout.select(perm)?;
    if permuted.len() != layout.len() || permuted.dims() != layout.dims() {
        return Err(Error::NotPermutation(perm.to_vec()));
    }
    crate::qmath::inverse_permutation(perm)?;
    let n = layout.total();
    check_dimension(n)?;
    let old = layout.offsets(perm);
    let mut m = ComplexMatrix::zeros(n, n);
    for (new, &o) in old.iter().enumerate() {
        m[(new, o)] = C::one();
    }
    Ok(m)
}

/// `2^{-n/2} Σ_i |i⟩` on `n` qubits.
pub fn uniform_prep<T: Real>(n: usize) -> Result<PureState<T>> {
    if n == 0 {
        return Err(Error::param("n", "at least one qubit is required"));
    }
    let total = 1usize
        .checked_shl(n as u32)
        .filter(|&t| t != 0)
        .ok_or(Error::DimensionLimit {
            requested: usize::MAX,
            limit: crate::qmath::max_dimension(),
        })?;
    check_dimension(total)?;
    let amp = cr(T::one() / T::from_count(total).sqrt());
    PureState::new(vec![amp; total], SubsystemLayout::qubits(n)?)
}

/// `U_f = Σ_i |i⟩⟨i| ⊗ σ_x^{f(i)}` with the target as the last qubit.
/// Variable `x_k` is bit `k` of `i` counted from the most significant.
pub fn oracle_uf<T: Real>(f: &CnfFormula, n: usize) -> Result<ComplexMatrix<T>> {
    if f.num_vars() != n {
        return Err(Error::param(
            "n",
            format!("formula has {} variables, oracle asked for {n}", f.num_vars()),
        ));
    }
    if n > ORACLE_MAX_VARS {
        return Err(Error::param(
            "n",
            format!("dense oracle supports at most {ORACLE_MAX_VARS} variables"),
        ));
    }
    let side = 1usize << (n + 1);
    check_dimension(side)?;
    let mut m = ComplexMatrix::zeros(side, side);
    for i in 0..(1usize << n) {
        let flip = usize::from(f.eval_index(i as u64));
        for t in 0..2 {
            m[(2 * i + (t ^ flip), 2 * i + t)] = C::one();
        }
    }
    Ok(m)
}

/// `U_f|ψ⟩` applied as the permutation it is, with the same conventions
/// and limits as [`oracle_uf`] but without the dense matrix.
pub fn oracle_apply<T: Real>(f: &CnfFormula, state: &PureState<T>) -> Result<PureState<T>> {
    let n = f.num_vars();
    if n > ORACLE_MAX_VARS {
        return Err(Error::param(
            "n",
            format!("oracle supports at most {ORACLE_MAX_VARS} variables"),
        ));
    }
    if state.layout().dims() != SubsystemLayout::qubits(n + 1)?.dims() {
        return Err(Error::LayoutMismatch(format!(
            "oracle on {n} variables needs {} qubits, got layout {:?}",
            n + 1,
            state.layout().dims()
        )));
    }
    let mut amps = state.amplitudes().to_vec();
    for i in 0..(1usize << n) {
        if f.eval_index(i as u64) {
            amps.swap(2 * i, 2 * i + 1);
        }
    }
    PureState::new(amps, state.layout().clone())
}

/// The `d² - 1` generalised Gell-Mann matrices, normalised to
/// `Tr(λ_a λ_b) = 2δ_ab`. For `d = 2` these are `σ_x, σ_y, σ_z` in order.
pub fn gell_mann<T: Real>(d: usize) -> Result<Vec<ComplexMatrix<T>>> {
    if d < 2 {
        return Err(Error::param("d", format!("dimension {d} is below 2")));
    }
    let mut out = Vec::with_capacity(d * d - 1);
    let i = c(T::zero(), T::one());
    for j in 0..d {
        for k in j + 1..d {
            let mut sym = ComplexMatrix::zeros(d, d);
            sym[(j, k)] = C::one();
            sym[(k, j)] = C::one();
            out.push(sym);
            let mut anti = ComplexMatrix::zeros(d, d);
            anti[(j, k)] = -i;
            anti[(k, j)] = i;
            out.push(anti);
        }
    }
    for l in 1..d {
        let norm = (T::lit(2.0) / T::from_count(l * (l + 1))).sqrt();
        let mut diag = vec![T::zero(); d];
        for x in diag.iter_mut().take(l) {
            *x = norm;
        }
        diag[l] = -norm * T::from_count(l);
        out.push(ComplexMatrix::diagonal(&diag));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub enum GateKind {
    CPlus,
    PauliX,
    PauliY,
    PauliZ,
    OracleUf(CnfFormula),
    Embed(ComplexMatrix<f64>),
}

/// Declarative description of a gate placed on a composite system.
#[derive(Debug, Clone, PartialEq)]
pub struct GateSpec {
    pub kind: GateKind,
    /// Local dimension of each acted-on factor.
    pub dimension: usize,
    /// Acted-on factors; for `CPlus` the control comes first.
    pub factors: Vec<usize>,
}

impl GateSpec {
    /// Full-layout unitary for this gate.
    pub fn build<T: Real>(&self, layout: &SubsystemLayout) -> Result<ComplexMatrix<T>> {
        let local: ComplexMatrix<T> = match &self.kind {
            GateKind::CPlus => c_plus(self.dimension)?,
            GateKind::PauliX => pauli_x(),
            GateKind::PauliY => pauli_y(),
            GateKind::PauliZ => pauli_z(),
            GateKind::OracleUf(f) => oracle_uf(f, f.num_vars())?,
            GateKind::Embed(g) => ComplexMatrix::from_vec(
                g.rows(),
                g.cols(),
                g.entries()
                    .iter()
                    .map(|z| c(T::lit(z.re), T::lit(z.im)))
                    .collect(),
            )?,
        };
        let u = embed(&local, layout, &self.factors)?;
        let dev = u.unitary_deviation();
        if dev > T::unitary_tol() {
            return Err(Error::NotUnitary {
                deviation: dev.as_f64(),
            });
        }
        Ok(u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type M = ComplexMatrix<f64>;

    fn basis(n: usize, k: usize) -> Vec<C<f64>> {
        let mut v = vec![C::zero(); n];
        v[k] = C::one();
        v
    }

    fn maps_basis(u: &M, from: usize, to: usize) -> bool {
        let out = u.apply(&basis(u.rows(), from));
        out.iter()
            .enumerate()
            .all(|(k, z)| (z - if k == to { C::one() } else { C::zero() }).norm() < 1e-15)
    }

    #[test]
    fn c_plus_qubit_is_cnot() {
        let u = c_plus::<f64>(2).unwrap();
        assert!(maps_basis(&u, 0b10, 0b11));
        assert!(maps_basis(&u, 0b11, 0b10));
        assert!(maps_basis(&u, 0b01, 0b01));
    }

    #[test]
    fn c_plus_qutrit_table() {
        let d = 3;
        let u = c_plus::<f64>(d).unwrap();
        for i in 0..d {
            for j in 0..d {
                assert!(maps_basis(&u, i * d + j, i * d + (i + j) % d));
            }
        }
        assert!(maps_basis(&u, 2 * 3 + 2, 2 * 3 + 1));
        assert!(c_plus::<f64>(1).is_err());
    }

    #[test]
    fn c_plus_has_order_d() {
        for d in 2..6 {
            let u = c_plus::<f64>(d).unwrap();
            let mut acc = M::identity(d * d);
            for _ in 0..d {
                acc = u.matmul(&acc);
            }
            assert!(acc.max_abs_diff(&M::identity(d * d)) < 1e-15);
            assert!(u.unitary_deviation() <= 1e-12);
        }
    }

    #[test]
    fn embed_cnot_on_outer_qubits() {
        let lay = SubsystemLayout::qubits(3).unwrap();
        let u = embed(&c_plus::<f64>(2).unwrap(), &lay, &[0, 2]).unwrap();
        assert!(maps_basis(&u, 0b100, 0b101));
        assert!(maps_basis(&u, 0b110, 0b111));
        assert!(maps_basis(&u, 0b011, 0b011));
        let id = embed(&M::identity(2), &lay, &[1]).unwrap();
        assert_eq!(id, M::identity(8));
        // reversed roles: factor 2 controls factor 0
        let r = embed(&c_plus::<f64>(2).unwrap(), &lay, &[2, 0]).unwrap();
        assert!(maps_basis(&r, 0b001, 0b101));
        assert!(embed(&M::identity(4), &lay, &[0, 0]).is_err());
        assert!(embed(&M::identity(2), &lay, &[0, 1]).is_err());
    }

    #[test]
    fn permutation_unitary_swaps_factors() {
        let lay = SubsystemLayout::new(vec![2, 3, 2]).unwrap();
        let p = permutation_unitary::<f64>(&lay, &[2, 1, 0]).unwrap();
        // |1,2,0⟩ -> |0,2,1⟩
        assert!(maps_basis(&p, 6 + 2 * 2, 2 * 2 + 1));
        assert!(permutation_unitary::<f64>(&lay, &[1, 0, 2]).is_err());
    }

    #[test]
    fn uniform_prep_amplitudes() {
        let s = uniform_prep::<f64>(2).unwrap();
        assert!(s.amplitudes().iter().all(|a| (a.re - 0.5).abs() < 1e-15));
        let s = uniform_prep::<f64>(10).unwrap();
        let norm: f64 = s.amplitudes().iter().map(|a| a.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-12);
        assert!(uniform_prep::<f64>(0).is_err());
        assert!(matches!(
            uniform_prep::<f64>(13),
            Err(Error::DimensionLimit { .. })
        ));
    }

    #[test]
    fn oracle_blocks_follow_truth_table() {
        let f = CnfFormula::new(2, vec![vec![1, 2]]).unwrap();
        let u = oracle_uf::<f64>(&f, 2).unwrap();
        // block 00 identity
        assert!(maps_basis(&u, 0, 0) && maps_basis(&u, 1, 1));
        for i in 1..4 {
            assert!(maps_basis(&u, 2 * i, 2 * i + 1));
            assert!(maps_basis(&u, 2 * i + 1, 2 * i));
        }
        let always = CnfFormula::new(2, vec![]).unwrap();
        let u = oracle_uf::<f64>(&always, 2).unwrap();
        let ix = M::identity(4).kron(&pauli_x()).unwrap();
        assert_eq!(u, ix);
        let never = CnfFormula::new(1, vec![vec![1], vec![-1]]).unwrap();
        assert_eq!(oracle_uf::<f64>(&never, 1).unwrap(), M::identity(4));
        assert!(oracle_uf::<f64>(&never, 2).is_err());
    }

    #[test]
    fn gell_mann_orthonormality() {
        for d in 2..5 {
            let g = gell_mann::<f64>(d).unwrap();
            assert_eq!(g.len(), d * d - 1);
            for (a, ga) in g.iter().enumerate() {
                assert!(ga.is_hermitian());
                assert!(ga.trace().norm() < 1e-14);
                for (b, gb) in g.iter().enumerate() {
                    let ip = ga.hs_inner(gb);
                    let want = if a == b { 2.0 } else { 0.0 };
                    assert!((ip - cr(want)).norm() < 1e-13);
                }
            }
        }
        let q = gell_mann::<f64>(2).unwrap();
        assert_eq!(q[0], pauli_x());
        assert_eq!(q[1], pauli_y());
        assert_eq!(q[2], pauli_z());
    }

    #[test]
    fn gate_spec_builds_unitaries() {
        let lay = SubsystemLayout::qubits(3).unwrap();
        let spec = GateSpec {
            kind: GateKind::CPlus,
            dimension: 2,
            factors: vec![1, 2],
        };
        let u: M = spec.build(&lay).unwrap();
        assert!(maps_basis(&u, 0b010, 0b011));
        let bad = GateSpec {
            kind: GateKind::Embed(M::diagonal(&[1.0, 2.0])),
            dimension: 2,
            factors: vec![0],
        };
        assert!(matches!(bad.build::<f64>(&lay), Err(Error::NotUnitary { .. })));
    }

    #[test]
    fn sparse_oracle_matches_dense() {
        let f = crate::cnf::parse_dimacs("p cnf 3 2\n1 -2 0\n2 3 0\n").unwrap();
        let layout = SubsystemLayout::qubits(4).unwrap();
        let mut rng = crate::qstate::rng_from_seed(8);
        let psi = crate::random::random_pure_state::<f64, _>(&layout, &mut rng);
        let dense = psi.evolve(&oracle_uf(&f, 3).unwrap()).unwrap();
        let sparse = oracle_apply(&f, &psi).unwrap();
        for (a, b) in dense.amplitudes().iter().zip(sparse.amplitudes()) {
            assert!((a - b).norm() < 1e-15);
        }
    }

}
