//! Free bosons on graphs.
//!
//! Finite-volume equilibrium states of the free Bose gas on exhaustions of
//! an infinite graph, with the two questions that decide condensation:
//! whether the simple random walk is transient, and whether the critical
//! density stays finite. Periodic lattices get a separate quasi-momentum
//! treatment in [`bloch`].
//!
//! Floating-point code is generic over [`scalar::Scalar`]; the aliases below
//! fix the usual choices.

pub mod bloch;
pub mod error;
pub mod graph;
pub mod linalg;
pub mod scalar;
pub mod spectral;
pub mod thermo;
pub mod walk;

pub use error::{Error, Result};

/// Exact walk weights.
pub type Rational = num_rational::Ratio<i64>;
/// Exact walk weights without overflow.
pub type BigRational = num_rational::Ratio<num_bigint::BigInt>;

pub type SpectralData64 = spectral::SpectralData<f64>;
pub type SpectralData32 = spectral::SpectralData<f32>;
pub type Operator64 = spectral::OneParticleOperator<f64>;
pub type Operator32 = spectral::OneParticleOperator<f32>;
pub type ThermoSolution64 = thermo::ThermoSolution<f64>;
pub type ThermoSolution32 = thermo::ThermoSolution<f32>;
pub type QuasiFreeState64 = thermo::QuasiFreeState<f64>;
pub type QuasiFreeState32 = thermo::QuasiFreeState<f32>;
pub type TestFunction64 = spectral::TestFunction<f64>;
