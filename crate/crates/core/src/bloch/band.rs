use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::PeriodicLattice;

use super::torus::wrap_angle;
use super::twisted::twisted_matrix;

/// E − E(p) < MAXIMIZER_TOL · max(1, |E|) marks a maximizer.
pub const MAXIMIZER_TOL: f64 = 1e-8;
/// Allowed excess of E(p) over E(0) before the band scan is rejected.
pub const BAND_TOP_SLACK: f64 = 1e-10;

/// Least-squares quadratic coefficients of E − E(p₀ + t u) ≈ c_u t² along
/// axis and diagonal directions u, fitted on t ∈ [h, 4h].
#[derive(Clone, Debug, Serialize)]
pub struct CurvatureFit {
    pub at: Vec<f64>,
    pub h: f64,
    pub c_min: f64,
    pub c_max: f64,
    /// The same fit at h/2.
    pub c_min_refined: f64,
    pub c_max_refined: f64,
}

impl CurvatureFit {
    /// Both constants move by less than `rel` under halving h.
    pub fn stable(&self, rel: f64) -> bool {
        let close = |a: f64, b: f64| (a - b).abs() <= rel * a.abs().max(b.abs());
        close(self.c_min, self.c_min_refined) && close(self.c_max, self.c_max_refined)
    }
}

/// Bands of Ã(p) − v on the grid p ∈ (2π/G)ℤ^ν wrapped into [−π, π)^ν.
#[derive(Clone, Debug, Serialize)]
pub struct BlochBand {
    pub nu: usize,
    pub grid: usize,
    /// E = E(0).
    pub e: f64,
    pub maximizers: Vec<Vec<f64>>,
    pub curvature: Vec<CurvatureFit>,
    /// Largest E(p) − E(0) seen on the grid.
    pub worst_excess: f64,
    #[serde(skip)]
    pub points: Vec<Vec<f64>>,
    /// All eigenvalues per point, ascending; the last one is E(p).
    #[serde(skip)]
    pub eigenvalues: Vec<Vec<f64>>,
}

impl BlochBand {
    pub fn top_at(&self, k: usize) -> f64 {
        *self.eigenvalues[k].last().expect("nonempty band")
    }
}

pub fn grid_point(k: usize, nu: usize, grid: usize) -> Vec<f64> {
    let mut r = k;
    let mut p = vec![0.0; nu];
    for x in p.iter_mut().rev() {
        *x = wrap_angle(2.0 * PI * (r % grid) as f64 / grid as f64);
        r /= grid;
    }
    p
}

fn top(lat: &PeriodicLattice, v: &[f64], p: &[f64]) -> f64 {
    twisted_matrix(lat, v, p)
        .top()
        .expect("small hermitian eigenproblem")
}

fn directions(nu: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for k in 0..nu {
        for s in [1.0, -1.0] {
            let mut u = vec![0.0; nu];
            u[k] = s;
            out.push(u);
        }
    }
    if nu > 1 {
        let norm = (nu as f64).sqrt();
        for signs in 0..(1usize << nu) {
            out.push(
                (0..nu)
                    .map(|k| if signs >> k & 1 == 1 { -1.0 } else { 1.0 } / norm)
                    .collect(),
            );
        }
    }
    out
}

fn fit_curvature(lat: &PeriodicLattice, v: &[f64], e: f64, p0: &[f64], h: f64) -> (f64, f64) {
    let mut c_min = f64::INFINITY;
    let mut c_max = f64::NEG_INFINITY;
    for u in directions(lat.nu()) {
        let (mut num, mut den) = (0.0, 0.0);
        for t in [h, 1.5 * h, 2.0 * h, 3.0 * h, 4.0 * h] {
            let p: Vec<f64> = p0.iter().zip(&u).map(|(a, b)| a + t * b).collect();
            let g = e - top(lat, v, &p);
            num += t * t * g;
            den += t.powi(4);
        }
        let c = num / den;
        c_min = c_min.min(c);
        c_max = c_max.max(c);
    }
    (c_min, c_max)
}

pub const CURVATURE_H: f64 = 0.02;

/// Scans the band top and checks E(p) ≤ E(0) on every grid point.
pub fn band_top(lat: &PeriodicLattice, v: &[f64], grid: usize) -> Result<BlochBand> {
    if grid < 8 {
        return Err(Error::InvalidInput(format!("band grid must be at least 8, got {grid}")));
    }
    if v.len() != lat.fundamental_vertices() {
        return Err(Error::InvalidInput("potential length differs from the cell size".into()));
    }
    if let Some(i) = v.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinitePotential(i));
    }
    let nu = lat.nu();
    let count = grid
        .checked_pow(nu as u32)
        .filter(|&c| c <= 1 << 24)
        .ok_or(Error::SizeExceeded {
            size: usize::MAX,
            limit: 1 << 24,
        })?;
    let zero = vec![0.0; nu];
    let e = top(lat, v, &zero);
    let (points, eigenvalues): (Vec<Vec<f64>>, Vec<Vec<f64>>) = (0..count)
        .into_par_iter()
        .map(|k| {
            let p = grid_point(k, nu, grid);
            let vals = twisted_matrix(lat, v, &p).eigen().map(|e| e.values);
            vals.map(|vals| (p, vals))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .unzip();
    let scale = e.abs().max(1.0);
    let mut worst_excess = f64::NEG_INFINITY;
    let mut maximizers = Vec::new();
    for (p, vals) in points.iter().zip(&eigenvalues) {
        let ep = *vals.last().expect("nonempty band");
        if ep - e > BAND_TOP_SLACK * scale {
            return Err(Error::BandTopViolation {
                e0: e,
                ep,
                p: p.clone(),
            });
        }
        worst_excess = worst_excess.max(ep - e);
        if e - ep < MAXIMIZER_TOL * scale {
            maximizers.push(p.clone());
        }
    }
    let curvature = maximizers
        .iter()
        .map(|p0| {
            let (c_min, c_max) = fit_curvature(lat, v, e, p0, CURVATURE_H);
            let (c_min_refined, c_max_refined) = fit_curvature(lat, v, e, p0, CURVATURE_H / 2.0);
            CurvatureFit {
                at: p0.clone(),
                h: CURVATURE_H,
                c_min,
                c_max,
                c_min_refined,
                c_max_refined,
            }
        })
        .collect();
    Ok(BlochBand {
        nu,
        grid,
        e,
        maximizers,
        curvature,
        worst_excess,
        points,
        eigenvalues,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_top_and_curvature() {
        let lat = PeriodicLattice::hypercubic(3);
        let b = band_top(&lat, &[0.0], 8).unwrap();
        assert!((b.e - 6.0).abs() < 1e-14);
        assert_eq!(b.maximizers, vec![vec![0.0; 3]]);
        let c = &b.curvature[0];
        assert!((c.c_min - 1.0).abs() < 1e-3 && (c.c_max - 1.0).abs() < 1e-3, "{c:?}");
        assert!(c.stable(0.1));
    }

    #[test]
    fn line_curvature_is_one() {
        let b = band_top(&PeriodicLattice::hypercubic(1), &[0.0], 16).unwrap();
        assert!((b.e - 2.0).abs() < 1e-14);
        assert!((b.curvature[0].c_max - 1.0).abs() < 1e-3);
    }

    #[test]
    fn constant_shift_moves_top() {
        let lat = PeriodicLattice::ladder();
        let a = band_top(&lat, &[0.3, -0.1], 8).unwrap();
        let b = band_top(&lat, &[1.3, 0.9], 8).unwrap();
        assert!((a.e - b.e - 1.0).abs() < 1e-12);
        for k in 0..a.points.len() {
            assert!(((a.e - a.top_at(k)) - (b.e - b.top_at(k))).abs() < 1e-12);
        }
    }

    #[test]
    fn split_square_has_two_maximizers() {
        let b = band_top(&PeriodicLattice::split_square(), &[0.0, 0.0], 8).unwrap();
        assert_eq!(b.maximizers.len(), 2);
        assert!(b.maximizers.contains(&vec![-PI, 0.0]));
    }

    #[test]
    fn small_grid_rejected() {
        assert!(band_top(&PeriodicLattice::hypercubic(2), &[0.0], 4).is_err());
    }
}
