//! Dense linear algebra used by the spectral and Bloch layers.

mod dense;
mod eigen;
mod expm;
mod hermitian;
mod quadrature;

pub use dense::Matrix;
pub use eigen::{symmetric_eigen, tridiagonal_eigen};
pub use expm::expm;
pub use hermitian::{hermitian_eigen, HermitianEigen};
pub use quadrature::{gauss_laguerre, gauss_legendre};
