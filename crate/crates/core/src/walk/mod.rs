//! Simple random walk: return probabilities, Green functions and the
//! transience/recurrence classification.

mod bloch_route;
mod classify;
mod domain;
mod green;
mod hypercubic;
mod monte_carlo;
mod returns;
mod stats;

pub use bloch_route::{bloch_returns, walk_peaks, BlochWalkRule};
pub use classify::{
    classify, classify_base, default_sample, Classification, ClassifyOptions, Uniformity, Verdict,
    VertexEvidence,
};
pub use domain::{WalkDomain, DEFAULT_VERTEX_BUDGET};
pub use green::{
    finite_resolvent_check, first_passage_bound, green_diagonal, green_from_stats, passage_series,
    FirstPassage, GreenEstimate, PassageSeries, ResolventCheck,
};
pub use hypercubic::hypercubic_returns;
pub use monte_carlo::{monte_carlo_hitting, monte_carlo_walk, McEstimate};
pub use returns::{is_hypercubic, return_probs, return_probs_on_stage, return_probs_with, WalkRoute};
pub use stats::{
    decade_fit, first_returns_from, generating, generating_identity, pair_average,
    renewal_residual, truncated_product, GeneratingCheck, PowerFit, WalkMethod, WalkStats,
};
