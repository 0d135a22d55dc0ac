use num_complex::Complex;

use crate::error::Result;
use crate::scalar::Scalar;

/// Finitely supported test function: `(vertex, value)` pairs.
pub type TestFunction<T> = Vec<(usize, Complex<T>)>;

/// Spectral data of a positive semidefinite one-particle Hamiltonian whose
/// lowest mode is the (simple) ground state.
///
/// Implemented by dense decompositions and by momentum-resolved data of
/// periodic truncations.
pub trait SpectralCarrier<T: Scalar>: Sync {
    /// Number of vertices |Γ_n|.
    fn volume(&self) -> usize;

    /// All eigenvalues, in no particular order.
    fn eigenvalues(&self) -> Vec<T>;

    /// The ground-state eigenvalue.
    fn ground_energy(&self) -> T;

    /// `(g, F(H) f)`. With `skip_ground` the ground mode is left out,
    /// i.e. the form is taken on its orthogonal complement.
    fn quadratic_form(
        &self,
        f: &[(usize, Complex<T>)],
        g: &[(usize, Complex<T>)],
        func: &dyn Fn(T) -> T,
        skip_ground: bool,
    ) -> Result<Complex<T>>;

    /// `(Ω, f)` with Ω the positive ground state normalized to unit norm.
    fn ground_overlap(&self, f: &[(usize, Complex<T>)]) -> Complex<T>;
}
