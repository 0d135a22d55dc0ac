use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{ball, Exhaustion, LocalGraph, Site};

use super::domain::DEFAULT_VERTEX_BUDGET;
use super::returns::{return_probs_with, WalkRoute};
use super::stats::{decade_fit, PowerFit, WalkMethod, WalkStats};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Recurrent,
    Transient,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Uniformity {
    UniformlyTransient,
    UniformlyRecurrent,
    NotEstablished,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassifyOptions {
    pub n_max: usize,
    /// Threshold K in K ≤ Σ_{N=2}^{M} q_N(j).
    pub k: f64,
    /// Horizon M; defaults to n_max.
    pub m: Option<usize>,
    /// Vertices sampled when the graph is not periodic.
    pub samples: usize,
    /// Recurrence when the fitted decay exponent of q_N is at least this.
    pub recurrent_exponent: f64,
    /// Transience needs the estimated unseen tail of Σ p_N below this.
    pub tail_threshold: f64,
    pub route: WalkRoute,
    pub budget: usize,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            n_max: 2000,
            k: 2.0,
            m: None,
            samples: 8,
            recurrent_exponent: -1.02,
            tail_threshold: 0.01,
            route: WalkRoute::Auto,
            budget: DEFAULT_VERTEX_BUDGET,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VertexEvidence {
    pub vertex: Site,
    pub degree: usize,
    pub method: WalkMethod,
    pub q_sum: f64,
    pub p_sum: f64,
    /// Σ_{N≥0} q_N / d(j) over the computed terms.
    pub green_partial: f64,
    pub q_fit: Option<PowerFit>,
    pub p_fit: Option<PowerFit>,
    /// Estimated Σ_{N>n_max} p_N.
    pub p_tail: f64,
    /// Σ_{N=2}^{M} q_N.
    pub partial_to_m: f64,
    pub renewal_residual: f64,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, Serialize)]
pub struct Classification {
    pub verdict: Verdict,
    pub uniform: Uniformity,
    pub n_max: usize,
    pub k: f64,
    pub m: usize,
    /// All translation classes of vertices were sampled.
    pub covers_all_classes: bool,
    /// Estimated margin ε with p̄_j(1) ≤ 1 − ε over the sampled vertices.
    pub epsilon: Option<f64>,
    /// (N, Σ_{2}^{N} q_N) at logarithmically spaced N, for the first vertex.
    pub growth: Vec<(usize, f64)>,
    pub evidence: Vec<VertexEvidence>,
    /// Full return series per sampled vertex.
    #[serde(skip)]
    pub series: Vec<WalkStats>,
}

fn vertex_verdict(stats: &WalkStats, opts: &ClassifyOptions) -> VertexEvidence {
    let q_fit = decade_fit(&stats.q);
    let p_fit = decade_fit(&stats.p);
    let p_tail = p_fit.map(|f| f.tail()).unwrap_or(f64::INFINITY);
    let m = opts.m.unwrap_or(opts.n_max);
    let verdict = match q_fit {
        Some(f) if f.exponent >= opts.recurrent_exponent => Verdict::Recurrent,
        Some(_) if p_tail < opts.tail_threshold && stats.p_sum + p_tail < 1.0 => Verdict::Transient,
        _ => Verdict::Inconclusive,
    };
    VertexEvidence {
        vertex: stats.vertex.clone(),
        degree: stats.degree,
        method: stats.method,
        q_sum: stats.q_sum,
        p_sum: stats.p_sum,
        green_partial: (1.0 + stats.q_sum) / stats.degree as f64,
        q_fit,
        p_fit,
        p_tail,
        partial_to_m: stats.partial_q_sum(m),
        renewal_residual: stats.renewal_residual,
        verdict,
    }
}

/// Deterministic vertex sample: the origin and sites spread over a small
/// ball around it, or one site per orbit for periodic lattices.
pub fn default_sample(base: &dyn LocalGraph, count: usize) -> (Vec<Site>, bool) {
    if let Some(lat) = base.as_periodic() {
        let sites = (0..lat.fundamental_vertices())
            .map(|a| Site::at_origin(lat.nu(), a))
            .collect();
        return (sites, true);
    }
    if let Some(n) = base.finite_size() {
        if n <= count {
            let st = ball(base, &base.origin(), n);
            return (st.sites, true);
        }
    }
    let st = ball(base, &base.origin(), 4);
    let len = st.sites.len();
    let count = count.max(1).min(len);
    let sites = (0..count).map(|k| st.sites[k * len / count].clone()).collect();
    (sites, false)
}

/// Transience or recurrence of the simple walk from the sampled vertices.
pub fn classify(exh: &Exhaustion, sample: Option<&[Site]>, opts: &ClassifyOptions) -> Result<Classification> {
    classify_base(exh.base(), sample, opts)
}

pub fn classify_base(
    base: &dyn LocalGraph,
    sample: Option<&[Site]>,
    opts: &ClassifyOptions,
) -> Result<Classification> {
    let (sites, all_classes) = match sample {
        Some(s) if s.is_empty() => {
            return Err(Error::InvalidInput("empty vertex sample".into()));
        }
        Some(s) => {
            let covers = base
                .as_periodic()
                .map(|lat| (0..lat.fundamental_vertices()).all(|a| s.iter().any(|x| x.orbit == a)))
                .unwrap_or(false);
            (s.to_vec(), covers)
        }
        None => default_sample(base, opts.samples),
    };
    let stats: Vec<WalkStats> = if opts.route == WalkRoute::Bloch
        || (opts.route == WalkRoute::Auto && base.as_periodic().is_some())
    {
        // The quadrature route is already parallel inside.
        sites
            .iter()
            .map(|s| return_probs_with(base, s, opts.n_max, opts.route, opts.budget))
            .collect::<Result<_>>()?
    } else {
        sites
            .par_iter()
            .map(|s| return_probs_with(base, s, opts.n_max, opts.route, opts.budget))
            .collect::<Result<_>>()?
    };
    let evidence: Vec<VertexEvidence> = stats.iter().map(|s| vertex_verdict(s, opts)).collect();
    let first = evidence[0].verdict;
    let verdict = if evidence.iter().all(|e| e.verdict == first) {
        first
    } else {
        Verdict::Inconclusive
    };
    let m = opts.m.unwrap_or(opts.n_max);
    let uniform = match verdict {
        Verdict::Transient if all_classes => Uniformity::UniformlyTransient,
        Verdict::Recurrent if all_classes && evidence.iter().all(|e| e.partial_to_m >= opts.k) => {
            Uniformity::UniformlyRecurrent
        }
        _ => Uniformity::NotEstablished,
    };
    let epsilon = (verdict == Verdict::Transient).then(|| {
        evidence
            .iter()
            .map(|e| 1.0 - e.p_sum - e.p_tail)
            .fold(f64::INFINITY, f64::min)
    });
    let (cum, _) = stats[0].cumulative();
    let mut growth = Vec::new();
    let mut n = 2usize;
    while n <= opts.n_max {
        growth.push((n, cum[n]));
        n = (n * 2).max(n + 1);
    }
    if growth.last().map(|g| g.0) != Some(opts.n_max) && opts.n_max >= 2 {
        growth.push((opts.n_max, cum[opts.n_max]));
    }
    Ok(Classification {
        verdict,
        uniform,
        n_max: opts.n_max,
        k: opts.k,
        m,
        covers_all_classes: all_classes,
        epsilon,
        growth,
        evidence,
        series: stats,
    })
}
