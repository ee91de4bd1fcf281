//! Random states and unitaries for tests, benchmarks and the CLI.
//!
//! Pure states are Haar-distributed (normalised complex Gaussians). Mixed
//! states are partial traces of Haar states on a larger space, which gives
//! the induced measure with the requested rank.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::qmath::{ComplexMatrix, SubsystemLayout};
use crate::qstate::{density_from_pure, BlochVector, DensityMatrix, PureState};
use crate::scalar::{c, Real, C};

fn gaussian<T: Real, R: Rng + ?Sized>(rng: &mut R) -> C<T> {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(T::lit(re), T::lit(im))
}

pub fn random_pure_state<T: Real, R: Rng + ?Sized>(
    layout: &SubsystemLayout,
    rng: &mut R,
) -> PureState<T> {
    let amps = (0..layout.total()).map(|_| gaussian(rng)).collect();
    PureState::normalized(amps, layout.clone()).expect("gaussian vector is nonzero")
}

/// Random density matrix of rank at most `rank`.
pub fn random_density<T: Real, R: Rng + ?Sized>(
    layout: &SubsystemLayout,
    rank: usize,
    rng: &mut R,
) -> Result<DensityMatrix<T>> {
    if rank == 0 {
        return Err(Error::param("rank", "must be at least 1"));
    }
    let n = layout.total();
    let mut g = ComplexMatrix::<T>::zeros(n, rank);
    for z in g.entries_mut() {
        *z = gaussian(rng);
    }
    let m = g.matmul(&g.adjoint());
    let t = m.trace().re;
    DensityMatrix::new(m.scale_real(T::one() / t).hermitian_part(), layout.clone())
}

/// Full-rank random density matrix.
pub fn random_mixed<T: Real, R: Rng + ?Sized>(
    layout: &SubsystemLayout,
    rng: &mut R,
) -> DensityMatrix<T> {
    random_density(layout, layout.total(), rng).expect("valid rank")
}

pub fn random_pure_density<T: Real, R: Rng + ?Sized>(
    layout: &SubsystemLayout,
    rng: &mut R,
) -> DensityMatrix<T> {
    density_from_pure(&random_pure_state(layout, rng))
}

/// Haar-random unitary via Gram-Schmidt on a complex Gaussian matrix.
pub fn random_unitary<T: Real, R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix<T> {
    let mut cols: Vec<Vec<C<T>>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v: Vec<C<T>> = (0..n).map(|_| gaussian(rng)).collect();
        for q in &cols {
            let p: C<T> = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (x, y) in v.iter_mut().zip(q) {
                *x -= p * y;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        if norm > T::lit(1e-6) {
            cols.push(v.into_iter().map(|z| z / norm).collect());
        }
    }
    ComplexMatrix::from_fn(n, n, |i, j| cols[j][i])
}

/// Uniform point in the Bloch ball.
pub fn random_bloch<T: Real, R: Rng + ?Sized>(rng: &mut R) -> BlochVector<T> {
    loop {
        let v: [f64; 3] = [
            rng.gen_range(-1.0..=1.0),
            rng.gen_range(-1.0..=1.0),
            rng.gen_range(-1.0..=1.0),
        ];
        if v.iter().map(|x| x * x).sum::<f64>() <= 1.0 {
            return BlochVector::new(T::lit(v[0]), T::lit(v[1]), T::lit(v[2]))
                .expect("inside the ball");
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::rng_from_seed;

    #[test]
    fn unitary_is_unitary() {
        let mut rng = rng_from_seed(3);
        let u: ComplexMatrix<f64> = random_unitary(6, &mut rng);
        assert!(u.unitary_deviation() < 1e-12);
    }

    #[test]
    fn density_rank() {
        let mut rng = rng_from_seed(4);
        let layout = SubsystemLayout::new(vec![2, 3]).unwrap();
        let rho: DensityMatrix<f64> = random_density(&layout, 2, &mut rng).unwrap();
        let e = rho.eigen();
        assert_eq!(e.values.iter().filter(|&&x| x > 1e-10).count(), 2);
    }
}
