use anyhow::Result;
use netbec::graph::DefectReport;
use netbec::walk::{classify, monte_carlo_walk, Classification, ClassifyOptions};
use serde::Serialize;

use crate::args::RunArgs;
use crate::output::{num, Output};
use crate::source;

const MC_STEPS: usize = 64;
const MC_WALKS: usize = 20_000;

/// Seeded Monte Carlo estimate of the first sampled vertex's return series,
/// compared with the exact one.
#[derive(Serialize)]
struct MonteCarloCheck {
    steps: usize,
    walks: usize,
    seed: u64,
    /// max_N |q_mc − q| / σ over N with σ > 0.
    max_z_score: f64,
}

#[derive(Serialize)]
struct WalkReport<'a> {
    source: String,
    classification: &'a Classification,
    monte_carlo: MonteCarloCheck,
    defects: Option<&'a DefectReport>,
}

pub fn run(a: &RunArgs) -> Result<String> {
    a.check()?;
    let src = source::load(a)?;
    let exh = src.walk_exhaustion(a.stage_list()?)?;
    let opts = ClassifyOptions {
        n_max: a.nmax,
        ..Default::default()
    };
    let c = classify(&exh, None, &opts)?;
    let first = &c.series[0];
    let steps = MC_STEPS.min(a.nmax);
    let mc = monte_carlo_walk(exh.base(), &first.vertex, steps, MC_WALKS, a.seed)?;
    let max_z_score = (1..=steps)
        .filter(|&n| mc.q_sigma[n] > 0.0)
        .map(|n| (mc.q[n] - first.q[n]).abs() / mc.q_sigma[n])
        .fold(0.0, f64::max);

    let mut out = Output::new("classify-walk", a)?;
    let header: Vec<String> = ["n", "q", "p", "cumulative_q", "mc_q", "mc_q_sigma"]
        .map(String::from)
        .to_vec();
    let mut cum = 0.0;
    let rows: Vec<Vec<String>> = (0..=first.n_max)
        .map(|n| {
            if n >= 2 {
                cum += first.q[n];
            }
            let (m, s) = if n <= steps {
                (num(mc.q[n]), num(mc.q_sigma[n]))
            } else {
                (String::new(), String::new())
            };
            vec![n.to_string(), num(first.q[n]), num(first.p[n]), num(cum), m, s]
        })
        .collect();
    out.csv("walk.csv", &header, &rows)?;
    let report = WalkReport {
        source: src.name(),
        classification: &c,
        monte_carlo: MonteCarloCheck {
            steps,
            walks: MC_WALKS,
            seed: a.seed,
            max_z_score,
        },
        defects: exh.defects(),
    };
    out.json("walk.json", &report)?;
    out.finish()?;
    let verdict = serde_json::to_value(c.verdict)?;
    let uniform = serde_json::to_value(c.uniform)?;
    Ok(format!(
        "{}: {} ({})",
        src.name(),
        verdict.as_str().unwrap_or("?"),
        uniform.as_str().unwrap_or("?")
    ))
}
