use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::{cr, Real, C};

use super::ComplexMatrix;

const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianEigen<T: Real> {
    /// Ascending.
    pub values: Vec<T>,
    /// Column `k` is the eigenvector of `values[k]`.
    pub vectors: ComplexMatrix<T>,
}

impl<T: Real> HermitianEigen<T> {
    pub fn vector(&self, k: usize) -> Vec<C<T>> {
        (0..self.vectors.rows()).map(|i| self.vectors[(i, k)]).collect()
    }

    /// `V f(Λ) V^†`.
    pub fn reconstruct_with(&self, f: impl Fn(T) -> T) -> ComplexMatrix<T> {
        let n = self.values.len();
        let fv: Vec<T> = self.values.iter().map(|&x| f(x)).collect();
        let v = &self.vectors;
        ComplexMatrix::from_fn(n, n, |i, j| {
            let mut acc = C::zero();
            for k in 0..n {
                if fv[k] != T::zero() {
                    acc += v[(i, k)] * v[(j, k)].conj() * fv[k];
                }
            }
            acc
        })
    }

    pub fn reconstruct(&self) -> ComplexMatrix<T> {
        self.reconstruct_with(|x| x)
    }

    pub fn min(&self) -> T {
        self.values[0]
    }

    pub fn max(&self) -> T {
        self.values[self.values.len() - 1]
    }
}

/// Hermitian eigen-decomposition by cyclic complex Jacobi rotations.
pub fn eig_hermitian<T: Real>(m: &ComplexMatrix<T>) -> Result<HermitianEigen<T>> {
    let dev = m.hermitian_deviation();
    if !(dev <= T::hermitian_tol()) {
        return Err(Error::NotHermitian {
            deviation: dev.as_f64(),
        });
    }
    Ok(jacobi(m.hermitian_part()))
}

fn jacobi<T: Real>(mut a: ComplexMatrix<T>) -> HermitianEigen<T> {
    let n = a.rows();
    let mut v = ComplexMatrix::identity(n);
    let eps = T::epsilon();
    let scale = a.frobenius_norm();
    for _ in 0..MAX_SWEEPS {
        let mut off = T::zero();
        for p in 0..n {
            for q in p + 1..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= eps * scale || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r <= T::min_positive_value() {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                // phase that makes the (p,q) entry real and positive
                let phase = apq / r; // e^{iφ}
                let theta = (aqq - app) / (T::lit(2.0) * r);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let cs = T::one() / (t * t + T::one()).sqrt();
                let sn = t * cs;
                let e_minus = phase.conj();
                // columns: A <- A G, with G_pp = c, G_qp = -s e^{-iφ}, G_pq = s, G_qq = c e^{-iφ}
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * cs - akq * e_minus * sn;
                    a[(k, q)] = akp * sn + akq * e_minus * cs;
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * cs - vkq * e_minus * sn;
                    v[(k, q)] = vkp * sn + vkq * e_minus * cs;
                }
                // rows: A <- G^† A
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * cs - aqk * phase * sn;
                    a[(q, k)] = apk * sn + aqk * phase * cs;
                }
                a[(p, q)] = C::zero();
                a[(q, p)] = C::zero();
                a[(p, p)] = cr(a[(p, p)].re);
                a[(q, q)] = cr(a[(q, q)].re);
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&k| a[(k, k)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    HermitianEigen { values, vectors }
}

/// `f(M)` for Hermitian `M`, through its spectrum.
pub fn map_hermitian<T: Real>(m: &ComplexMatrix<T>, f: impl Fn(T) -> T) -> Result<ComplexMatrix<T>> {
    Ok(eig_hermitian(m)?.reconstruct_with(f))
}

/// Sum of absolute eigenvalues of a Hermitian matrix.
pub fn trace_norm<T: Real>(m: &ComplexMatrix<T>) -> Result<T> {
    Ok(eig_hermitian(m)?.values.iter().map(|x| x.abs()).sum())
}

/// True when `M + shift·I` admits a Cholesky factorisation, which certifies
/// that every eigenvalue of `M` exceeds `-shift`.
pub fn cholesky_certifies_psd<T: Real>(m: &ComplexMatrix<T>, shift: T) -> bool {
    let n = m.rows();
    let mut l = vec![C::<T>::zero(); n * n];
    for j in 0..n {
        let mut d = m[(j, j)].re + shift;
        for k in 0..j {
            d -= l[j * n + k].norm_sqr();
        }
        if !(d > T::zero()) {
            return false;
        }
        let d = d.sqrt();
        l[j * n + j] = cr(d);
        for i in j + 1..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k].conj();
            }
            l[i * n + j] = s / d;
        }
    }
    true
}

/// Orthonormal basis of the (numerical) null space of a real square matrix
/// given in row-major order, via one-sided Jacobi SVD. Singular values at or
/// below `rel_tol` times the largest count as zero.
pub fn null_space_real<T: Real>(a: &[T], n: usize, rel_tol: T) -> Vec<Vec<T>> {
    assert_eq!(a.len(), n * n);
    // work on columns
    let mut cols: Vec<Vec<T>> = (0..n).map(|j| (0..n).map(|i| a[i * n + j]).collect()).collect();
    let mut v: Vec<Vec<T>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { T::one() } else { T::zero() }).collect())
        .collect();
    let eps = T::epsilon();
    for _ in 0..(4 * MAX_SWEEPS) {
        let mut rotated = false;
        for i in 0..n {
            for j in i + 1..n {
                let alpha: T = cols[i].iter().map(|x| *x * *x).sum();
                let beta: T = cols[j].iter().map(|x| *x * *x).sum();
                let gamma: T = cols[i].iter().zip(&cols[j]).map(|(x, y)| *x * *y).sum();
                if gamma == T::zero() || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (T::lit(2.0) * gamma);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let cs = T::one() / (T::one() + t * t).sqrt();
                let sn = cs * t;
                for k in 0..n {
                    let (x, y) = (cols[i][k], cols[j][k]);
                    cols[i][k] = cs * x - sn * y;
                    cols[j][k] = sn * x + cs * y;
                    let (x, y) = (v[i][k], v[j][k]);
                    v[i][k] = cs * x - sn * y;
                    v[j][k] = sn * x + cs * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let sigma: Vec<T> = cols
        .iter()
        .map(|col| col.iter().map(|x| *x * *x).sum::<T>().sqrt())
        .collect();
    let smax = sigma.iter().copied().fold(T::zero(), T::max);
    let cut = if smax > T::zero() { rel_tol * smax } else { T::one() };
    (0..n)
        .filter(|&k| sigma[k] <= cut)
        .map(|k| v[k].clone())
        .collect()
}
