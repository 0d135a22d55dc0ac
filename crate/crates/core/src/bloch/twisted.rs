use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::PeriodicLattice;
use crate::linalg::{hermitian_eigen, HermitianEigen, Matrix};
use crate::scalar::Scalar;

/// θ_{ab}(p) = p·k for a bridge from `(a, 0)` to `(b, k)`.
pub fn bridge_phase<T: Scalar>(p: &[T], offset: &[i64]) -> T {
    p.iter()
        .zip(offset)
        .fold(T::zero(), |acc, (&pi, &k)| acc + pi * T::of(k as f64))
}

/// Twisted adjacency matrix Ã(p) of the fundamental domain.
pub fn twisted_adjacency<T: Scalar>(lat: &PeriodicLattice, p: &[T]) -> Matrix<Complex<T>> {
    assert_eq!(p.len(), lat.nu(), "momentum dimension");
    let n0 = lat.fundamental_vertices();
    let one = Complex::new(T::one(), T::zero());
    let mut m = Matrix::zeros(n0, n0);
    for &(a, b) in lat.internal_edges() {
        m[(a, b)] = m[(a, b)] + one;
        m[(b, a)] = m[(b, a)] + one;
    }
    for br in lat.bridge_edges() {
        let phase = Complex::from_polar(T::one(), bridge_phase(p, &br.offset));
        m[(br.a, br.b)] = m[(br.a, br.b)] + phase;
        m[(br.b, br.a)] = m[(br.b, br.a)] + phase.conj();
    }
    m
}

/// Ã(p) − v at one quasi-momentum.
#[derive(Clone, Debug)]
pub struct TwistedOperator<T> {
    pub p: Vec<T>,
    pub matrix: Matrix<Complex<T>>,
}

impl<T: Scalar> TwistedOperator<T> {
    pub fn eigen(&self) -> Result<HermitianEigen<T>> {
        hermitian_eigen(&self.matrix)
    }

    /// Largest eigenvalue E(p).
    pub fn top(&self) -> Result<T> {
        Ok(self.eigen()?.top())
    }
}

pub fn twisted_matrix<T: Scalar>(lat: &PeriodicLattice, v: &[T], p: &[T]) -> TwistedOperator<T> {
    assert_eq!(v.len(), lat.fundamental_vertices(), "potential length");
    let mut matrix = twisted_adjacency(lat, p);
    for (a, &va) in v.iter().enumerate() {
        matrix[(a, a)] = matrix[(a, a)] - Complex::new(va, T::zero());
    }
    TwistedOperator {
        p: p.to_vec(),
        matrix,
    }
}

/// Periodic Schrödinger operator h = E − A + v viewed fibrewise:
/// h(p) = E − Ã(p) + v, so that h(p) ≥ 0 with 0 attained at p = 0.
#[derive(Clone, Debug, Serialize)]
pub struct BlochHamiltonian {
    #[serde(skip)]
    lattice: PeriodicLattice,
    pub potential: Vec<f64>,
    /// E, the top of the spectrum of A − v.
    pub top: f64,
}

impl BlochHamiltonian {
    pub fn new(lattice: &PeriodicLattice, potential: &[f64]) -> Result<Self> {
        if potential.len() != lattice.fundamental_vertices() {
            return Err(Error::InvalidInput(format!(
                "potential has {} values for {} fundamental vertices",
                potential.len(),
                lattice.fundamental_vertices()
            )));
        }
        if let Some(i) = potential.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinitePotential(i));
        }
        let zero = vec![0.0; lattice.nu()];
        let top = twisted_matrix(lattice, potential, &zero).top()?;
        Ok(Self {
            lattice: lattice.clone(),
            potential: potential.to_vec(),
            top,
        })
    }

    /// The discrete Laplacian d − A (potential equal to the degree, E = 0).
    pub fn laplacian(lattice: &PeriodicLattice) -> Self {
        let v: Vec<f64> = lattice.degrees().into_iter().map(|d| d as f64).collect();
        Self {
            lattice: lattice.clone(),
            potential: v,
            top: 0.0,
        }
    }

    pub fn lattice(&self) -> &PeriodicLattice {
        &self.lattice
    }

    pub fn nu(&self) -> usize {
        self.lattice.nu()
    }

    pub fn orbits(&self) -> usize {
        self.lattice.fundamental_vertices()
    }

    /// h(p) as a Hermitian matrix.
    pub fn fibre(&self, p: &[f64]) -> Matrix<Complex<f64>> {
        let t = twisted_matrix(&self.lattice, &self.potential, p);
        let n0 = self.orbits();
        Matrix::from_fn(n0, n0, |i, j| {
            let x = -t.matrix[(i, j)];
            if i == j {
                x + self.top
            } else {
                x
            }
        })
    }

    pub fn eigen(&self, p: &[f64]) -> Result<HermitianEigen<f64>> {
        hermitian_eigen(&self.fibre(p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hypercubic_band_is_cosine_sum() {
        let lat = PeriodicLattice::hypercubic(3);
        let p = [0.3f64, -1.1, 2.0];
        let m = twisted_adjacency(&lat, &p);
        let expect: f64 = p.iter().map(|x| 2.0 * x.cos()).sum();
        assert!((m[(0, 0)].re - expect).abs() < 1e-15);
        assert!(m[(0, 0)].im.abs() < 1e-15);
    }

    #[test]
    fn zero_momentum_is_real_quotient() {
        let lat = PeriodicLattice::cubic_two_cell();
        let m = twisted_adjacency(&lat, &[0.0, 0.0, 0.0]);
        assert_eq!(m[(0, 1)], Complex::new(2.0, 0.0));
        assert_eq!(m[(0, 0)], Complex::new(4.0, 0.0));
        for z in m.as_slice() {
            assert_eq!(z.im, 0.0);
        }
    }

    #[test]
    fn reflection_conjugates() {
        let lat = PeriodicLattice::ladder();
        let p = [0.7];
        let a = twisted_adjacency(&lat, &p);
        let b = twisted_adjacency(&lat, &[-0.7]);
        assert!((&a.conj() - &b).frobenius_norm() < 1e-15);
        assert!(a.hermiticity_defect() < 1e-15);
    }

    #[test]
    fn laplacian_fibre_vanishes_at_zero() {
        let h = BlochHamiltonian::laplacian(&PeriodicLattice::cubic_two_cell());
        let e = h.eigen(&[0.0; 3]).unwrap();
        assert!(e.values[0].abs() < 1e-14);
        let h2 = BlochHamiltonian::new(&PeriodicLattice::cubic_two_cell(), &[6.0, 6.0]).unwrap();
        assert!(h2.top.abs() < 1e-14);
    }
}
