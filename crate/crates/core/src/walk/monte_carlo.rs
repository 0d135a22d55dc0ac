//! Independent stochastic estimates of return and hitting probabilities.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{LocalGraph, Site};

use super::domain::{WalkDomain, DEFAULT_VERTEX_BUDGET};

/// Walkers per random stream. Stream `c` of the seeded generator drives
/// chunk `c`, so results do not depend on the thread count.
const CHUNK: usize = 4096;

#[derive(Clone, Debug, Serialize)]
pub struct McEstimate {
    pub vertex: Site,
    pub n_walks: usize,
    pub seed: u64,
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    /// Binomial standard errors.
    pub q_sigma: Vec<f64>,
    pub p_sigma: Vec<f64>,
}

fn sigma(x: f64, n: usize) -> f64 {
    (x * (1.0 - x) / n as f64).sqrt()
}

fn stream(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

/// One step from `pos`; `None` when the walker leaves the domain.
fn step(dom: &WalkDomain, pos: usize, rng: &mut ChaCha8Rng) -> Option<usize> {
    let k = rng.random_range(0..dom.degree(pos));
    dom.neighbors(pos).get(k).map(|&y| y as usize)
}

pub fn monte_carlo_walk(
    base: &dyn LocalGraph,
    j: &Site,
    n_max: usize,
    n_walks: usize,
    seed: u64,
) -> Result<McEstimate> {
    if n_walks == 0 {
        return Err(Error::InvalidInput("n_walks must be at least 1".into()));
    }
    // A walker farther than n_max/2 cannot come back in time.
    let dom = WalkDomain::ball(base, j, n_max.div_ceil(2), DEFAULT_VERTEX_BUDGET)?;
    let chunks = n_walks.div_ceil(CHUNK);
    let counts: Vec<(Vec<u64>, Vec<u64>)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream(seed, c);
            let mut qc = vec![0u64; n_max + 1];
            let mut pc = vec![0u64; n_max + 1];
            let walkers = CHUNK.min(n_walks - c * CHUNK);
            for _ in 0..walkers {
                let mut pos = 0usize;
                let mut returned = false;
                for t in 1..=n_max {
                    match step(&dom, pos, &mut rng) {
                        Some(y) => pos = y,
                        None => break,
                    }
                    if pos == 0 {
                        qc[t] += 1;
                        if !returned {
                            pc[t] += 1;
                            returned = true;
                        }
                    }
                }
            }
            (qc, pc)
        })
        .collect();
    let mut qn = vec![0u64; n_max + 1];
    let mut pn = vec![0u64; n_max + 1];
    for (qc, pc) in counts {
        for t in 0..=n_max {
            qn[t] += qc[t];
            pn[t] += pc[t];
        }
    }
    qn[0] = n_walks as u64;
    let frac = |c: &[u64]| c.iter().map(|&x| x as f64 / n_walks as f64).collect::<Vec<_>>();
    let q = frac(&qn);
    let p = frac(&pn);
    Ok(McEstimate {
        vertex: j.clone(),
        n_walks,
        seed,
        q_sigma: q.iter().map(|&x| sigma(x, n_walks)).collect(),
        p_sigma: p.iter().map(|&x| sigma(x, n_walks)).collect(),
        q,
        p,
    })
}

/// Probability that the walk from `i` visits `j` within `n_max` steps,
/// with its binomial standard error.
pub fn monte_carlo_hitting(
    base: &dyn LocalGraph,
    i: &Site,
    j: &Site,
    n_max: usize,
    n_walks: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if n_walks == 0 {
        return Err(Error::InvalidInput("n_walks must be at least 1".into()));
    }
    let mut radius = 1;
    let distance = loop {
        let dom = WalkDomain::ball(base, i, radius, DEFAULT_VERTEX_BUDGET)?;
        if let Some(k) = dom.index_of(j) {
            break dom.distance(k);
        }
        radius *= 2;
        if radius > n_max {
            return Ok((0.0, 0.0));
        }
    };
    let dom = WalkDomain::ball(base, i, (n_max + distance).div_ceil(2), DEFAULT_VERTEX_BUDGET)?;
    let target = dom.index_of(j).expect("target inside the ball");
    let chunks = n_walks.div_ceil(CHUNK);
    let hits: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream(seed, c);
            let mut h = 0u64;
            for _ in 0..CHUNK.min(n_walks - c * CHUNK) {
                let mut pos = 0usize;
                for _ in 0..n_max {
                    match step(&dom, pos, &mut rng) {
                        Some(y) => pos = y,
                        None => break,
                    }
                    if pos == target {
                        h += 1;
                        break;
                    }
                }
            }
            h
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    let est = hits as f64 / n_walks as f64;
    Ok((est, sigma(est, n_walks)))
}
