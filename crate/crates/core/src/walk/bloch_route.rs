//! Return probabilities on periodic lattices by quasi-momentum integration.
//!
//! With S(p) = D^{-1/2} Ã(p) D^{-1/2}, the return probability at orbit a is
//! q_N(a) = (2π)^{-ν} ∫ (S(p)^N)_{aa} dp. The integrand concentrates where S
//! has an eigenvalue of modulus one: p = 0, plus one more point when the
//! lattice is bipartite.

use std::f64::consts::PI;

use num_complex::Complex;

use crate::bloch::{twisted_adjacency, TorusRule};
use crate::error::{Error, Result};
use crate::graph::PeriodicLattice;
use crate::linalg::{hermitian_eigen, Matrix};

const PEAK_SCAN: usize = 8;
const UNIT_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct BlochWalkRule {
    pub levels: usize,
    pub order: usize,
    pub plain_split: usize,
}

impl BlochWalkRule {
    /// Shells fine enough to resolve the width ~ N^{-1/2} of the peaks.
    pub fn for_steps(nu: usize, n_max: usize) -> Self {
        let scale = (PI / 2.0) * (n_max.max(1) as f64).sqrt() * 64.0;
        Self {
            levels: scale.log2().ceil().max(4.0) as usize,
            order: match nu { 1 | 2 => 12, 3 => 8, _ => 5 },
            plain_split: if nu <= 3 { 2 } else { 1 },
        }
    }
}

fn normalized_fibre(lat: &PeriodicLattice, inv_sqrt_d: &[f64], p: &[f64]) -> Matrix<Complex<f64>> {
    let a = twisted_adjacency(lat, p);
    let n0 = a.rows();
    Matrix::from_fn(n0, n0, |i, j| a[(i, j)] * (inv_sqrt_d[i] * inv_sqrt_d[j]))
}

/// Points of the torus where S(p) has an eigenvalue ±1, found on the
/// grid 2πm/8.
pub fn walk_peaks(lat: &PeriodicLattice) -> Result<Vec<Vec<f64>>> {
    let nu = lat.nu();
    let inv: Vec<f64> = lat.degrees().iter().map(|&d| 1.0 / (d as f64).sqrt()).collect();
    let mut peaks = Vec::new();
    for flat in 0..PEAK_SCAN.pow(nu as u32) {
        let mut r = flat;
        let mut p = vec![0.0; nu];
        for x in p.iter_mut().rev() {
            *x = -PI + 2.0 * PI * (r % PEAK_SCAN) as f64 / PEAK_SCAN as f64;
            r /= PEAK_SCAN;
        }
        let e = hermitian_eigen(&normalized_fibre(lat, &inv, &p))?;
        if e.top() > 1.0 - UNIT_TOL || e.values[0] < -1.0 + UNIT_TOL {
            peaks.push(p);
        }
    }
    if peaks.is_empty() {
        return Err(Error::InvalidLattice("no unit eigenvalue at p = 0".into()));
    }
    Ok(peaks)
}

/// q_N(a) for every orbit a and N = 0..=n_max, indexed [a][N].
pub fn bloch_returns(lat: &PeriodicLattice, n_max: usize, rule: &BlochWalkRule) -> Result<Vec<Vec<f64>>> {
    lat.require_connected()?;
    let nu = lat.nu();
    let n0 = lat.fundamental_vertices();
    let inv: Vec<f64> = lat.degrees().iter().map(|&d| 1.0 / (d as f64).sqrt()).collect();
    let peaks = walk_peaks(lat)?;
    let torus = TorusRule::new(nu, &peaks, rule.levels, rule.order, rule.plain_split)?;
    let len = n0 * (n_max + 1);
    let flat = torus.average(len, |p, w, acc| {
        let s = normalized_fibre(lat, &inv, p);
        let (vals, weights) = if n0 == 1 {
            (vec![s[(0, 0)].re], vec![1.0])
        } else {
            let e = hermitian_eigen(&s).expect("small hermitian eigenproblem");
            let mut wts = Vec::with_capacity(n0 * n0);
            for k in 0..n0 {
                for a in 0..n0 {
                    wts.push(e.vectors[(a, k)].norm_sqr());
                }
            }
            (e.values, wts)
        };
        for (k, &mu) in vals.iter().enumerate() {
            let mut pw = w;
            for n in 0..=n_max {
                if pw.abs() < 1e-300 {
                    break;
                }
                for a in 0..n0 {
                    acc[a * (n_max + 1) + n] += pw * weights[k * n0 + a];
                }
                pw *= mu;
            }
        }
    });
    Ok(flat.chunks(n_max + 1).map(|c| c.to_vec()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walk::hypercubic_returns;

    #[test]
    fn peaks_of_bipartite_lattices() {
        let z2 = PeriodicLattice::hypercubic(2);
        let pk = walk_peaks(&z2).unwrap();
        assert_eq!(pk.len(), 2);
        assert!(pk.contains(&vec![0.0, 0.0]));
        assert!(pk.contains(&vec![-PI, -PI]));
    }

    #[test]
    fn z2_matches_exact() {
        let lat = PeriodicLattice::hypercubic(2);
        let n = 400;
        let q = bloch_returns(&lat, n, &BlochWalkRule::for_steps(2, n)).unwrap();
        let exact = hypercubic_returns(2, n);
        for k in 0..=n {
            assert!((q[0][k] - exact[k]).abs() < 1e-14 + 1e-8 * exact[k], "N = {k}: {} {}", q[0][k], exact[k]);
        }
    }

    #[test]
    fn two_cell_cubic_is_z3() {
        let lat = PeriodicLattice::cubic_two_cell();
        let n = 300;
        let q = bloch_returns(&lat, n, &BlochWalkRule::for_steps(3, n)).unwrap();
        let exact = hypercubic_returns(3, n);
        for a in 0..2 {
            for k in (0..=n).step_by(2) {
                assert!((q[a][k] / exact[k] - 1.0).abs() < 1e-7, "a = {a}, N = {k}: {} {}", q[a][k], exact[k]);
            }
        }
    }
}
