use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Exhaustion, Graph, LocalGraph, Site, Stage};
use crate::spectral::{build_operator, eigendecompose, OperatorKind};

use super::domain::{WalkDomain, DEFAULT_VERTEX_BUDGET};
use super::returns::return_probs;
use super::stats::{decade_fit, generating, generating_identity, renewal_residual, GeneratingCheck, WalkStats};

/// Diagonal Green function (δ_j, (d − zA)^{-1} δ_j) = Σ_N z^N q_N(j) / d(j).
#[derive(Clone, Debug, Serialize)]
pub struct GreenEstimate {
    pub z: f64,
    pub terms: usize,
    pub partial: f64,
    /// Estimated contribution of the omitted terms.
    pub tail: f64,
    /// partial + tail, absent when the series diverges.
    pub value: Option<f64>,
    pub divergent: bool,
    /// Fitted exponent of the partial sums' growth N^g (0 means logarithmic)
    /// when divergent.
    pub growth_exponent: Option<f64>,
}

pub fn green_from_stats(stats: &WalkStats, z: f64) -> Result<GreenEstimate> {
    if !(z > 0.0 && z <= 1.0) {
        return Err(Error::InvalidInput(format!("z = {z} outside (0, 1]")));
    }
    let d = stats.degree as f64;
    let n = stats.n_max;
    let partial = generating(&stats.q, z) / d;
    if z < 1.0 {
        // Return probabilities are at most max(q_n, q_{n-1}) beyond n.
        let last = stats.q[n].max(if n > 0 { stats.q[n - 1] } else { 0.0 });
        let tail = last * z.powi(n as i32 + 1) / (1.0 - z) / d;
        return Ok(GreenEstimate {
            z,
            terms: n + 1,
            partial,
            tail,
            value: Some(partial + tail),
            divergent: false,
            growth_exponent: None,
        });
    }
    let fit = decade_fit(&stats.q);
    match fit {
        Some(f) if f.exponent < -1.0 => {
            let tail = f.tail() / d;
            Ok(GreenEstimate {
                z,
                terms: n + 1,
                partial,
                tail,
                value: Some(partial + tail),
                divergent: false,
                growth_exponent: None,
            })
        }
        Some(f) => Ok(GreenEstimate {
            z,
            terms: n + 1,
            partial,
            tail: f64::INFINITY,
            value: None,
            divergent: true,
            growth_exponent: Some(f.exponent + 1.0),
        }),
        None => Err(Error::InvalidInput("too few terms to estimate the tail".into())),
    }
}

/// (δ_j, (d − zA)^{-1} δ_j) on the infinite base graph.
pub fn green_diagonal(exh: &Exhaustion, j: &Site, z: f64, n_max: usize) -> Result<GreenEstimate> {
    let stats = return_probs(exh, j, n_max)?;
    green_from_stats(&stats, z)
}

/// Both evaluations of (δ_j, (s − Δ_n)^{-1} δ_j) on a finite stage, where
/// Δ_n uses the stage degrees d_n: the Neumann series
/// Σ_N ((d_n+s)^{-1}A)^N (d_n+s)^{-1} and the spectral resolvent.
#[derive(Clone, Debug, Serialize)]
pub struct ResolventCheck {
    pub shift: f64,
    pub series: f64,
    pub series_terms: usize,
    pub spectral: f64,
}

impl ResolventCheck {
    pub fn relative_gap(&self) -> f64 {
        (self.series - self.spectral).abs() / self.spectral.abs()
    }
}

pub fn finite_resolvent_check(stage: &Stage, j: usize, shift: f64, tol: f64) -> Result<ResolventCheck> {
    if shift <= 0.0 {
        return Err(Error::InvalidInput("the shift must be positive".into()));
    }
    let dom = WalkDomain::from_graph(&stage.graph, j);
    let w = dom.shifted_weights(shift);
    // The series contracts at rate d̄/(d̄ + s).
    let dmax = stage.graph.max_degree() as f64;
    let rate = dmax / (dmax + shift);
    let steps = ((tol * (1.0 - rate)).ln() / rate.ln()).ceil().max(1.0) as usize;
    let rec = dom.evolve(&w, steps, &[0], None).remove(0);
    let series: f64 = rec.iter().sum::<f64>() * w[0];
    let op = build_operator::<f64>(&stage.graph, OperatorKind::Laplacian, None)?;
    let sd = eigendecompose(&op)?;
    let spectral = sd.diagonal_of(|x| 1.0 / (shift + x))[j];
    Ok(ResolventCheck {
        shift,
        series,
        series_terms: steps + 1,
        spectral,
    })
}

/// Evidence for r̄_ij(1) = r⁰_ij/(1 − p̄_j(1)) and
/// (δ_i, (−Δ)^{-1} δ_j) ≤ r̄_ij(1)/d(j) < r⁰_ij/ε.
#[derive(Clone, Debug, Serialize)]
pub struct FirstPassage {
    pub i: Site,
    pub j: Site,
    pub distance: usize,
    pub n_max: usize,
    /// r̄_ij(1): partial sum plus fitted tail.
    pub r_bar: f64,
    /// r⁰_ij = r̄⁰_ij(1): partial sum plus fitted tail.
    pub r0: f64,
    /// p̄_j(1).
    pub p_bar: f64,
    pub epsilon: f64,
    /// r̄_ij(1)/d(j).
    pub green_series: f64,
    /// Independent value of (δ_i, (−Δ)^{-1} δ_j) when supplied.
    pub green_reference: Option<f64>,
    /// |r̄ − r⁰/(1 − p̄)| / r̄.
    pub renewal_gap: f64,
    /// Generating-function identity at a few z < 1.
    pub generating: Vec<GeneratingCheck>,
    pub renewal_residual: f64,
    pub bound_holds: bool,
}

fn series_total(a: &[f64]) -> f64 {
    let partial: f64 = a.iter().sum();
    let tail = decade_fit(a)
        .filter(|f| f.exponent < -1.0)
        .map(|f| f.tail())
        .unwrap_or(0.0);
    partial + tail
}

/// `stats_j` holds the return statistics at j (any route, possibly with a
/// longer horizon than `n_max`).
pub fn first_passage_bound(
    base: &dyn LocalGraph,
    i: &Site,
    j: &Site,
    n_max: usize,
    stats_j: &WalkStats,
    green_reference: Option<f64>,
) -> Result<FirstPassage> {
    if i == j {
        return Err(Error::InvalidInput("first passage needs i != j".into()));
    }
    let g = green_from_stats(stats_j, 1.0)?;
    if g.divergent {
        return Err(Error::NotApplicable(
            "the walk at j is recurrent, so r̄_ij(1) is infinite".into(),
        ));
    }
    // Find dist(i, j) first, then a ball large enough for every path of
    // length n_max from i that ends at j.
    let mut radius = 1;
    let distance = loop {
        let dom = WalkDomain::ball(base, i, radius, DEFAULT_VERTEX_BUDGET)?;
        if let Some(k) = dom.index_of(j) {
            break dom.distance(k);
        }
        radius *= 2;
        if radius > n_max {
            return Err(Error::InvalidInput("j is out of reach within n_max steps".into()));
        }
    };
    let dom = WalkDomain::ball(base, i, (n_max + distance).div_ceil(2), DEFAULT_VERTEX_BUDGET)?;
    let jk = dom.index_of(j).expect("target inside the ball");
    let w = dom.walk_weights::<f64>();
    let r = dom.evolve(&w, n_max, &[jk], None).remove(0);
    let r0 = dom.evolve(&w, n_max, &[jk], Some(jk)).remove(0);
    let p_use: Vec<f64> = stats_j.p.iter().take(n_max + 1).cloned().collect();
    let renewal_residual = super::stats::renewal_residual(&r, &r0, &p_use);
    let generating = [0.3, 0.6, 0.9]
        .iter()
        .map(|&z| super::stats::generating_identity(&r, &r0, &p_use, z))
        .collect();
    let r_bar = series_total(&r);
    let r0_tot = series_total(&r0);
    let p_bar = series_total(&stats_j.p);
    let epsilon = 1.0 - p_bar;
    let d = stats_j.degree as f64;
    let green_series = r_bar / d;
    let slack = 1e-3;
    let lhs = green_reference.unwrap_or(green_series);
    let bound_holds = lhs <= green_series * (1.0 + slack) && r_bar <= r0_tot / epsilon * (1.0 + slack);
    Ok(FirstPassage {
        i: i.clone(),
        j: j.clone(),
        distance,
        n_max,
        r_bar,
        r0: r0_tot,
        p_bar,
        epsilon,
        green_series,
        green_reference,
        renewal_gap: (r_bar - r0_tot / epsilon).abs() / r_bar,
        generating,
        renewal_residual,
        bound_holds,
    })
}

/// Arrival, first-arrival and first-return series of a walk on a finite
/// graph: r_ij(N), r⁰_ij(N) and p_j(N) for N ≤ n_max.
#[derive(Clone, Debug, Serialize)]
pub struct PassageSeries {
    pub r: Vec<f64>,
    pub r0: Vec<f64>,
    pub p: Vec<f64>,
}

impl PassageSeries {
    /// Largest |r_ij(N) − r⁰_ij(N) − Σ_k r_ij(k) p_j(N − k)|.
    pub fn renewal_residual(&self) -> f64 {
        renewal_residual(&self.r, &self.r0, &self.p)
    }

    pub fn generating(&self, z: f64) -> GeneratingCheck {
        generating_identity(&self.r, &self.r0, &self.p, z)
    }
}

pub fn passage_series(g: &Graph, i: usize, j: usize, n_max: usize) -> Result<PassageSeries> {
    let n = g.vertex_count();
    if i >= n || j >= n {
        return Err(Error::InvalidInput(format!("vertex out of range for {n} vertices")));
    }
    if i == j {
        return Err(Error::InvalidInput("first passage needs i != j".into()));
    }
    let from_i = WalkDomain::from_graph(g, i);
    let Some(jk) = from_i.position_of(j) else {
        return Err(Error::Disconnected {
            components: g.component_count(),
        });
    };
    let w = from_i.walk_weights::<f64>();
    let r = from_i.evolve(&w, n_max, &[jk], None).remove(0);
    let r0 = from_i.evolve(&w, n_max, &[jk], Some(jk)).remove(0);
    let (_, p) = WalkDomain::from_graph(g, j).return_series::<f64>(n_max)?;
    Ok(PassageSeries { r, r0, p })
}
