//! Cyclic Jacobi eigensolver for small Hermitian matrices.

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::Matrix;

const MAX_SWEEPS: usize = 100;

#[derive(Clone, Debug)]
pub struct HermitianEigen<T> {
    /// Ascending.
    pub values: Vec<T>,
    /// Columns are orthonormal eigenvectors.
    pub vectors: Matrix<Complex<T>>,
}

impl<T: Scalar> HermitianEigen<T> {
    pub fn top(&self) -> T {
        *self.values.last().expect("nonempty spectrum")
    }

    pub fn vector(&self, k: usize) -> Vec<Complex<T>> {
        self.vectors.column(k)
    }
}

pub fn hermitian_eigen<T: Scalar>(m: &Matrix<Complex<T>>) -> Result<HermitianEigen<T>> {
    assert!(m.is_square());
    let n = m.rows();
    if n == 1 {
        return Ok(HermitianEigen {
            values: vec![m[(0, 0)].re],
            vectors: Matrix::identity(1),
        });
    }
    let mut a = m.clone();
    let mut v = Matrix::<Complex<T>>::identity(n);
    let scale = a.frobenius_norm().max(T::min_positive_value());
    let tol = T::epsilon() * scale;
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let off = off_norm(&a);
        if off <= tol {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    if !converged {
        let off = off_norm(&a);
        if off > T::of(64.0) * tol {
            return Err(Error::NoConvergence {
                iterations: MAX_SWEEPS,
                residual: off.as_f64(),
            });
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<T> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&x, &y| diag[x].partial_cmp(&diag[y]).unwrap_or(std::cmp::Ordering::Equal));
    Ok(HermitianEigen {
        values: order.iter().map(|&k| diag[k]).collect(),
        vectors: Matrix::from_fn(n, n, |i, k| v[(i, order[k])]),
    })
}

fn off_norm<T: Scalar>(a: &Matrix<Complex<T>>) -> T {
    let n = a.rows();
    let mut s = T::zero();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s = s + a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Zero the (p, q) entry with the unitary J = diag-phase times a real
/// Givens rotation, then update A <- J* A J and V <- V J.
fn rotate<T: Scalar>(a: &mut Matrix<Complex<T>>, v: &mut Matrix<Complex<T>>, p: usize, q: usize) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag <= T::min_positive_value() {
        return;
    }
    let n = a.rows();
    let one = T::one();
    let phase = apq / mag;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let tau = (aqq - app) / (T::of(2.0) * mag);
    let t = if tau >= T::zero() {
        one / (tau + (one + tau * tau).sqrt())
    } else {
        -one / (-tau + (one + tau * tau).sqrt())
    };
    let c = one / (one + t * t).sqrt();
    let s = t * c;
    let cz = Complex::new(c, T::zero());
    let sz = Complex::new(s, T::zero());
    // J = diag(1, conj(phase)) * [[c, s], [-s, c]]
    let jpp = cz;
    let jpq = sz;
    let jqp = -sz * phase.conj();
    let jqq = cz * phase.conj();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * jpp + akq * jqp;
        a[(k, q)] = akp * jpq + akq * jqq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
        a[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
    }
    a[(p, q)] = Complex::zero();
    a[(q, p)] = Complex::zero();
    a[(p, p)] = Complex::new(a[(p, p)].re, T::zero());
    a[(q, q)] = Complex::new(a[(q, q)].re, T::zero());
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * jpp + vkq * jqp;
        v[(k, q)] = vkp * jpq + vkq * jqq;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn pauli_y() {
        let m = Matrix::from_rows(2, 2, vec![c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]);
        let eig = hermitian_eigen(&m).unwrap();
        assert!((eig.values[0] + 1.0).abs() < 1e-14);
        assert!((eig.values[1] - 1.0).abs() < 1e-14);
        for k in 0..2 {
            let u = eig.vector(k);
            let mu = m.matvec(&u);
            for i in 0..2 {
                assert!((mu[i] - u[i] * eig.values[k]).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn random_hermitian_reconstructs() {
        let n = 7;
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let x = ((i * 7 + j * 3) as f64).sin();
                let y = if i == j { 0.0 } else { ((i * 5 + j * 11) as f64).cos() };
                m[(i, j)] = c(x, y);
                m[(j, i)] = c(x, -y);
            }
        }
        let eig = hermitian_eigen(&m).unwrap();
        let d = Matrix::diagonal(&eig.values.iter().map(|&x| c(x, 0.0)).collect::<Vec<_>>());
        let recon = &(&eig.vectors * &d) * &eig.vectors.adjoint();
        assert!((&recon - &m).frobenius_norm() < 1e-12);
        let uu = &eig.vectors.adjoint() * &eig.vectors;
        assert!((&uu - &Matrix::identity(n)).frobenius_norm() < 1e-12);
    }
}
