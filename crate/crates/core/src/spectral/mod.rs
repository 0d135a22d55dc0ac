//! One-particle operators on finite graphs and their spectral calculus.

mod bounds;
mod carrier;
mod decomp;
mod operator;

pub use bounds::{
    dirichlet_form, heat_trace_bounds, DenseInfinite, nesting_traces, DirichletCheck, DirichletInfinite,
    HeatTraceBounds, InfiniteVolume, NestingTraces,
};
pub use carrier::{SpectralCarrier, TestFunction};
pub use decomp::{
    eigendecompose, eigendecompose_with_limit, matfunc, zero_mode_tol, SpectralData, DEFAULT_DENSE_LIMIT,
    ZERO_MODE_TOL,
};
pub use operator::{build_operator, OneParticleOperator, OperatorKind};
