//! Quasi-momentum analysis of periodic lattices with a periodic potential.

mod band;
mod criterion;
mod ground;
mod spectrum;
mod torus;
mod twisted;

pub use band::{band_top, grid_point, BlochBand, CurvatureFit, BAND_TOP_SLACK, CURVATURE_H, MAXIMIZER_TOL};
pub use criterion::{
    bec_criterion, bose_density, critical_density_periodic, periodic_fugacity, BecCriterion, BecVerdict,
    PeriodicCriticalDensity, PeriodicFugacity, DELTAS,
};
pub use ground::{
    chi_tilde, chi_tilde_volume, degenerate_gauge, diamagnetic_check, dirichlet_identity, ground_state_compare,
    twisted_dirichlet, twisted_dirichlet_matrix, DiamagneticCheck, DirichletPair, GaugeCheck, PeriodicGroundState,
    SandwichReport, GAUGE_TOL,
};
pub use spectrum::{
    direct_integral_check, lattice_green, zero_modes, BlochInfinite, BlochQuadrature, BlochSpectrum,
    DirectIntegralCheck,
};
pub use torus::{wrap_angle, Cell, TorusRule};
pub use twisted::{bridge_phase, twisted_adjacency, twisted_matrix, BlochHamiltonian, TwistedOperator};
