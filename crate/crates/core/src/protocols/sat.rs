//! Satisfiability by repeated squaring.
//!
//! Querying the oracle on a uniform superposition leaves the target qubit
//! with `n_z = 1 - s/2^{n-1}`, where `s` counts satisfying assignments.
//! `p` S-gates send this to `n_z^{2^p}`, which is 1 only when `s = 0`, and
//! `q` measurements then look for a `|1⟩`. Unsatisfiable formulas can never
//! produce one, so the error is one-sided.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::cnf::{CnfFormula, COUNT_MAX_VARS};
use crate::error::{Error, Result};
use crate::gates::{oracle_apply, uniform_prep, ORACLE_MAX_VARS};
use crate::qmath::{ComplexMatrix, SubsystemLayout};
use crate::qstate::{bloch_of, measure_sample, DensityMatrix, Observable, PureState};
use crate::scalar::{cr, Real};

use super::sgate::s_gate_iterated;

pub const DEFAULT_REPETITIONS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Satisfiable,
    Unsatisfiable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SatMode {
    /// Oracle circuit on a state vector.
    Circuit,
    /// Target state from the exhaustive count.
    Analytic,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SatDecision {
    pub answer: Verdict,
    pub p: usize,
    pub q: usize,
    pub predicted_p_fail: f64,
    pub mode: SatMode,
    /// Satisfying-assignment count implied by the target state.
    pub satisfying: u64,
    /// Target `n_z` before squaring.
    pub target_nz: f64,
    /// Number of `|1⟩` outcomes among the `q` shots.
    pub ones: usize,
    /// Decided by the direct check for a formula true everywhere.
    pub tautology: bool,
}

/// `ceil(log2(n + 1)) + 2`.
pub fn default_rounds(n: usize) -> usize {
    let mut bits = 0;
    while (1usize << bits) < n + 1 {
        bits += 1;
    }
    bits + 2
}

/// `(1/2^q) [1 + (1 - s/2^{n-1})^{2^p}]^q` for `0 < s < 2^n`, else 0.
pub fn predicted_failure_exact(n: usize, s: u64, p: usize, q: usize) -> Result<BigRational> {
    check_count(n, s)?;
    if s == 0 || s == 1u64 << n {
        return Ok(BigRational::zero());
    }
    if p > 20 {
        return Err(Error::param("p", "exact value limited to p <= 20"));
    }
    let half_space = BigInt::one() << (n - 1);
    let base = BigRational::new(half_space.clone() - BigInt::from(s), half_space);
    let squared = (0..p).fold(base, |b, _| &b * &b);
    let inner = (BigRational::one() + squared) / BigRational::from_integer(BigInt::from(2));
    Ok(num_traits::pow(inner, q))
}

pub fn predicted_failure(n: usize, s: u64, p: usize, q: usize) -> Result<f64> {
    check_count(n, s)?;
    if s == 0 || s == 1u64 << n {
        return Ok(0.0);
    }
    let nz = 1.0 - s as f64 / (1u64 << (n - 1)) as f64;
    let squared = (0..p).fold(nz, |b, _| b * b);
    Ok((0.5 * (1.0 + squared)).powi(q as i32))
}

fn check_count(n: usize, s: u64) -> Result<()> {
    if n == 0 || n > COUNT_MAX_VARS {
        return Err(Error::param("n", format!("must lie in 1..={COUNT_MAX_VARS}")));
    }
    if s > 1u64 << n {
        return Err(Error::param("s", "exceeds 2^n"));
    }
    Ok(())
}

fn target_from_count<T: Real>(n: usize, s: u64) -> Result<DensityMatrix<T>> {
    let p1 = T::lit(s as f64) / T::lit((1u64 << n) as f64);
    let mut m = ComplexMatrix::zeros(2, 2);
    m[(0, 0)] = cr(T::one() - p1);
    m[(1, 1)] = cr(p1);
    DensityMatrix::new(m, SubsystemLayout::qubits(1)?)
}

/// Target qubit after one oracle query on the uniform superposition.
pub fn sat_target<T: Real>(f: &CnfFormula, mode: SatMode) -> Result<DensityMatrix<T>> {
    let n = f.num_vars();
    if n == 0 {
        return Err(Error::param("n", "formula has no variables"));
    }
    match mode {
        SatMode::Analytic => {
            if n > COUNT_MAX_VARS {
                return Err(Error::param(
                    "mode",
                    format!("analytic mode supports at most {COUNT_MAX_VARS} variables"),
                ));
            }
            target_from_count(n, f.count_satisfying()?)
        }
        SatMode::Circuit => {
            if n > ORACLE_MAX_VARS {
                return Err(Error::param(
                    "mode",
                    format!("circuit mode supports at most {ORACLE_MAX_VARS} variables"),
                ));
            }
            let register = uniform_prep::<T>(n)?.tensor(&PureState::basis(SubsystemLayout::qubits(1)?, 0)?)?;
            oracle_apply(f, &register)?.reduced(&[n])
        }
    }
}

pub fn sat_decide<T: Real>(
    f: &CnfFormula,
    p: usize,
    q: usize,
    mode: SatMode,
    seed: u64,
) -> Result<SatDecision> {
    if q == 0 {
        return Err(Error::param("q", "at least one repetition is required"));
    }
    let n = f.num_vars();
    if f.is_tautology() {
        if n > COUNT_MAX_VARS {
            return Err(Error::param("n", format!("must lie in 1..={COUNT_MAX_VARS}")));
        }
        return Ok(SatDecision {
            answer: Verdict::Satisfiable,
            p,
            q,
            predicted_p_fail: 0.0,
            mode,
            satisfying: 1u64 << n,
            target_nz: -1.0,
            ones: 0,
            tautology: true,
        });
    }
    let target = sat_target::<T>(f, mode)?;
    let nz = bloch_of(&target)?.z.as_f64();
    let satisfying = ((1.0 - nz) * (1u64 << (n - 1)) as f64).round() as u64;
    let squared = s_gate_iterated(&target, p)?;
    let shots = measure_sample(&squared, &Observable::pauli_z(), q, seed)?;
    let ones = shots.iter().filter(|&&x| x < T::zero()).count();
    Ok(SatDecision {
        answer: if ones > 0 {
            Verdict::Satisfiable
        } else {
            Verdict::Unsatisfiable
        },
        p,
        q,
        predicted_p_fail: predicted_failure(n, satisfying, p, q)?,
        mode,
        satisfying,
        target_nz: nz,
        ones,
        tautology: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::parse_dimacs;
    use num_rational::Ratio;

    #[test]
    fn failure_anchor() {
        let exact = predicted_failure_exact(2, 1, 2, 2).unwrap();
        assert_eq!(exact, Ratio::new(BigInt::from(289), BigInt::from(1024)));
        assert!((predicted_failure(2, 1, 2, 2).unwrap() - 289.0 / 1024.0).abs() < 1e-15);
        assert!(predicted_failure_exact(3, 0, 4, 20).unwrap().is_zero());
        assert_eq!(predicted_failure(2, 4, 2, 2).unwrap(), 0.0);
    }

    #[test]
    fn default_rounds_formula() {
        assert_eq!(default_rounds(1), 3);
        assert_eq!(default_rounds(2), 4);
        assert_eq!(default_rounds(3), 4);
        assert_eq!(default_rounds(7), 5);
        assert_eq!(default_rounds(10), 6);
    }

    #[test]
    fn unsatisfiable_is_never_flagged() {
        let f = parse_dimacs("p cnf 2 4\n1 2 0\n-1 2 0\n1 -2 0\n-1 -2 0\n").unwrap();
        for seed in 0..50 {
            for mode in [SatMode::Circuit, SatMode::Analytic] {
                let d = sat_decide::<f64>(&f, 3, 20, mode, seed).unwrap();
                assert_eq!(d.answer, Verdict::Unsatisfiable);
                assert_eq!(d.satisfying, 0);
                assert_eq!(d.predicted_p_fail, 0.0);
            }
        }
    }

    #[test]
    fn modes_agree() {
        let f = parse_dimacs("p cnf 4 3\n1 -2 3 0\n-1 4 0\n2 3 -4 0\n").unwrap();
        let a: DensityMatrix<f64> = sat_target(&f, SatMode::Circuit).unwrap();
        let b: DensityMatrix<f64> = sat_target(&f, SatMode::Analytic).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-12);
        for seed in 0..20 {
            let x = sat_decide::<f64>(&f, 4, 5, SatMode::Circuit, seed).unwrap();
            let y = sat_decide::<f64>(&f, 4, 5, SatMode::Analytic, seed).unwrap();
            assert_eq!(x.answer, y.answer);
            assert_eq!(x.satisfying, f.count_satisfying().unwrap());
        }
    }

    #[test]
    fn tautology_short_circuits() {
        let f = parse_dimacs("p cnf 2 1\n1 -1 2 0\n").unwrap();
        let d = sat_decide::<f64>(&f, 2, 3, SatMode::Circuit, 0).unwrap();
        assert!(d.tautology);
        assert_eq!(d.answer, Verdict::Satisfiable);
    }

    #[test]
    fn circuit_mode_size_limit() {
        let f = CnfFormula::new(13, vec![vec![1]]).unwrap();
        assert!(sat_target::<f64>(&f, SatMode::Circuit).is_err());
        let f = CnfFormula::new(12, vec![vec![1]]).unwrap();
        assert!(matches!(
            sat_target::<f64>(&f, SatMode::Circuit),
            Err(Error::DimensionLimit { .. })
        ));
        let ok: DensityMatrix<f64> = crate::qmath::with_max_dimension(1 << 13, || {
            sat_target(&f, SatMode::Circuit).unwrap()
        });
        assert!((ok.matrix()[(1, 1)].re - 0.5).abs() < 1e-12);
    }
}
