use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigen, Matrix};
use crate::scalar::Scalar;

use super::{OneParticleOperator, OperatorKind, SpectralCarrier};

pub const DEFAULT_DENSE_LIMIT: usize = 4096;

/// Absolute threshold separating the ground mode from the rest.
pub const ZERO_MODE_TOL: f64 = 1e-9;

/// Eigenvalues within this distance of zero are treated as exact zero
/// modes by the matrix-function routines.
pub fn zero_mode_tol<T: Scalar>() -> T {
    T::of(ZERO_MODE_TOL).max(T::epsilon() * T::of(64.0))
}

#[inline]
fn snap<T: Scalar>(x: T) -> T {
    if x.abs() <= zero_mode_tol::<T>() {
        T::zero()
    } else {
        x
    }
}

/// Eigen-decomposition of a symmetric operator.
#[derive(Clone, Debug)]
pub struct SpectralData<T> {
    /// Ascending.
    pub eigenvalues: Vec<T>,
    /// Orthonormal eigenvectors as columns.
    pub eigenvectors: Matrix<T>,
    pub kind: Option<OperatorKind>,
}

impl<T: Scalar> SpectralData<T> {
    /// Decomposes an arbitrary symmetric matrix.
    pub fn of_matrix(m: &Matrix<T>) -> Result<Self> {
        let (eigenvalues, eigenvectors) = symmetric_eigen(m)?;
        Ok(Self {
            eigenvalues,
            eigenvectors,
            kind: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// ‖M − QΛQᵀ‖_F / ‖M‖_F.
    pub fn reconstruction_residual(&self, m: &Matrix<T>) -> T {
        let recon = self.reconstruct_with(|x| x, false);
        let norm = m.frobenius_norm().max(T::min_positive_value());
        (&recon - m).frobenius_norm() / norm
    }

    /// max |QᵀQ − I|.
    pub fn orthonormality_defect(&self) -> T {
        let q = &self.eigenvectors;
        let qtq = &q.transpose() * q;
        (&qtq - &Matrix::identity(self.dim())).max_abs()
    }

    fn reconstruct(&self, f: impl Fn(T) -> T) -> Matrix<T> {
        self.reconstruct_with(f, true)
    }

    fn reconstruct_with(&self, f: impl Fn(T) -> T, snapped: bool) -> Matrix<T> {
        let n = self.dim();
        let fl: Vec<T> = self
            .eigenvalues
            .iter()
            .map(|&x| f(if snapped { snap(x) } else { x }))
            .collect();
        let q = &self.eigenvectors;
        let mut out = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let mut s = T::zero();
                for k in 0..n {
                    s = s + q[(i, k)] * fl[k] * q[(j, k)];
                }
                out[(i, j)] = s;
                out[(j, i)] = s;
            }
        }
        out
    }

    /// `F(H)` applied through the spectral calculus; the identity function
    /// reproduces the matrix itself.
    pub fn apply(&self, f: impl Fn(T) -> T) -> Matrix<T> {
        self.reconstruct(f)
    }

    /// Eigenvector `k` as a vector.
    pub fn vector(&self, k: usize) -> Vec<T> {
        self.eigenvectors.column(k)
    }

    /// The lowest eigenvector with the sign chosen so its sum is positive.
    pub fn ground_state(&self) -> Vec<T> {
        let mut v = self.vector(0);
        if v.iter().copied().sum::<T>() < T::zero() {
            for x in &mut v {
                *x = -*x;
            }
        }
        v
    }

    /// Number of eigenvalues in [-tol, tol].
    pub fn zero_mode_count(&self, tol: T) -> usize {
        self.eigenvalues.iter().filter(|x| x.abs() <= tol).count()
    }

    /// `Σ_k F(λ_k)` over modes, optionally without the lowest one.
    pub fn trace_of(&self, f: impl Fn(T) -> T, skip_ground: bool) -> T {
        let start = usize::from(skip_ground);
        self.eigenvalues[start..].iter().map(|&x| f(x)).sum()
    }

    /// Diagonal entries of F(H).
    pub fn diagonal_of(&self, f: impl Fn(T) -> T) -> Vec<T> {
        let n = self.dim();
        let fl: Vec<T> = self.eigenvalues.iter().map(|&x| f(x)).collect();
        (0..n)
            .map(|i| {
                let row = self.eigenvectors.row(i);
                row.iter().zip(&fl).map(|(&q, &fk)| q * q * fk).sum()
            })
            .collect()
    }

    fn coefficients(&self, f: &[(usize, Complex<T>)]) -> Vec<Complex<T>> {
        let n = self.dim();
        let mut c = vec![Complex::new(T::zero(), T::zero()); n];
        for &(i, fi) in f {
            let row = self.eigenvectors.row(i);
            for (ck, &q) in c.iter_mut().zip(row) {
                *ck = *ck + fi * q;
            }
        }
        c
    }
}

pub fn eigendecompose<T: Scalar>(op: &OneParticleOperator<T>) -> Result<SpectralData<T>> {
    eigendecompose_with_limit(op, DEFAULT_DENSE_LIMIT)
}

pub fn eigendecompose_with_limit<T: Scalar>(
    op: &OneParticleOperator<T>,
    limit: usize,
) -> Result<SpectralData<T>> {
    let size = op.dim();
    if size > limit {
        return Err(Error::SizeExceeded { size, limit });
    }
    let mut sd = SpectralData::of_matrix(&op.matrix)?;
    sd.kind = Some(op.kind);
    Ok(sd)
}

/// `Q F(Λ) Qᵀ`, failing if `F` is not finite at some eigenvalue.
pub fn matfunc<T: Scalar>(sd: &SpectralData<T>, f: impl Fn(T) -> T) -> Result<Matrix<T>> {
    for &x in &sd.eigenvalues {
        if !f(snap(x)).is_finite() {
            return Err(Error::SingularMode {
                eigenvalue: x.as_f64(),
            });
        }
    }
    Ok(sd.reconstruct(f))
}

impl<T: Scalar> SpectralCarrier<T> for SpectralData<T> {
    fn volume(&self) -> usize {
        self.dim()
    }

    fn eigenvalues(&self) -> Vec<T> {
        self.eigenvalues.clone()
    }

    fn ground_energy(&self) -> T {
        self.eigenvalues[0]
    }

    fn quadratic_form(
        &self,
        f: &[(usize, Complex<T>)],
        g: &[(usize, Complex<T>)],
        func: &dyn Fn(T) -> T,
        skip_ground: bool,
    ) -> Result<Complex<T>> {
        let cf = self.coefficients(f);
        let cg = self.coefficients(g);
        let mut acc = Complex::new(T::zero(), T::zero());
        for k in usize::from(skip_ground)..self.dim() {
            if cf[k].norm_sqr() == T::zero() || cg[k].norm_sqr() == T::zero() {
                continue;
            }
            let fk = func(snap(self.eigenvalues[k]));
            if !fk.is_finite() {
                return Err(Error::SingularMode {
                    eigenvalue: self.eigenvalues[k].as_f64(),
                });
            }
            acc = acc + cg[k].conj() * cf[k] * fk;
        }
        Ok(acc)
    }

    fn ground_overlap(&self, f: &[(usize, Complex<T>)]) -> Complex<T> {
        let omega = self.ground_state();
        f.iter()
            .fold(Complex::new(T::zero(), T::zero()), |acc, &(i, fi)| acc + fi * omega[i])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::spectral::build_operator;

    #[test]
    fn two_path_laplacian() {
        let op = build_operator::<f64>(&Graph::path(2), OperatorKind::Laplacian, None).unwrap();
        let sd = eigendecompose(&op).unwrap();
        assert!(sd.eigenvalues[0].abs() < 1e-15);
        assert!((sd.eigenvalues[1] - 2.0).abs() < 1e-15);
        let heat = matfunc(&sd, |x| (-x).exp()).unwrap();
        assert!((heat.trace() - (1.0 + (-2.0f64).exp())).abs() < 1e-14);
    }

    #[test]
    fn singular_function_names_eigenvalue() {
        let op = build_operator::<f64>(&Graph::cycle(4), OperatorKind::Laplacian, None).unwrap();
        let sd = eigendecompose(&op).unwrap();
        let z = 1.0;
        let err = matfunc(&sd, |x| z * (-x).exp() / (1.0 - z * (-x).exp())).unwrap_err();
        match err {
            Error::SingularMode { eigenvalue } => assert!(eigenvalue.abs() < 1e-12),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn size_limit() {
        let op = build_operator::<f64>(&Graph::cycle(10), OperatorKind::Laplacian, None).unwrap();
        assert!(matches!(
            eigendecompose_with_limit(&op, 5),
            Err(Error::SizeExceeded { size: 10, limit: 5 })
        ));
    }

    #[test]
    fn quadratic_form_matches_matrix() {
        let g = Graph::new(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 2)]).unwrap();
        let op = build_operator::<f64>(&g, OperatorKind::Laplacian, None).unwrap();
        let sd = eigendecompose(&op).unwrap();
        let f = vec![(0, Complex::new(1.0, 0.5)), (3, Complex::new(-0.2, 0.0))];
        let g2 = vec![(1, Complex::new(0.3, -1.0)), (3, Complex::new(2.0, 0.0))];
        let func = |x: f64| (-0.7 * x).exp();
        let q = sd.quadratic_form(&f, &g2, &func, false).unwrap();
        let m = matfunc(&sd, func).unwrap();
        let mut direct = Complex::new(0.0, 0.0);
        for &(i, fi) in &f {
            for &(j, gj) in &g2 {
                direct += gj.conj() * m[(j, i)] * fi;
            }
        }
        assert!((q - direct).norm() < 1e-14);
    }
}
