//! Quadrature on the torus [-π, π)^ν with dyadic grading toward a finite
//! set of singular points.
//!
//! The torus is split into a grid of equal boxes. Every peak must sit on a
//! grid vertex and no box may have two peaks among its corners. Boxes with a
//! peak corner are refined toward it in dyadic shells; each shell is a box of
//! half the previous width minus its corner child, i.e. 2^ν − 1 sub-boxes.
//! Remaining boxes get a uniform split. Every leaf cell uses a tensor
//! Gauss–Legendre rule, so no node ever lands on a peak.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::gauss_legendre;

const TWO_PI: f64 = 2.0 * PI;
const GRID_CHOICES: [usize; 8] = [4, 8, 12, 16, 24, 32, 64, 128];
const CELLS_PER_TASK: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub struct Cell {
    pub lo: Vec<f64>,
    pub width: f64,
}

#[derive(Clone, Debug)]
pub struct TorusRule {
    nu: usize,
    divisions: usize,
    peaks: Vec<Vec<f64>>,
    levels: usize,
    order: usize,
    plain_split: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// Wrap an angle into [-π, π).
pub fn wrap_angle(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(TWO_PI) - PI;
    if y >= PI {
        y - TWO_PI
    } else {
        y
    }
}

fn same_angle(a: f64, b: f64) -> bool {
    wrap_angle(a - b).abs() < 1e-9
}

impl TorusRule {
    /// `levels` dyadic shells around each peak, `order`-point Gauss rules per
    /// axis, and a `plain_split`^ν subdivision of peak-free boxes.
    pub fn new(
        nu: usize,
        peaks: &[Vec<f64>],
        levels: usize,
        order: usize,
        plain_split: usize,
    ) -> Result<Self> {
        if nu == 0 || order == 0 || plain_split == 0 {
            return Err(Error::InvalidInput("empty torus rule".into()));
        }
        if peaks.iter().any(|p| p.len() != nu) {
            return Err(Error::InvalidInput("peak dimension mismatch".into()));
        }
        let peaks: Vec<Vec<f64>> = peaks
            .iter()
            .map(|p| p.iter().map(|&x| wrap_angle(x)).collect())
            .collect();
        let divisions = GRID_CHOICES
            .iter()
            .copied()
            .find(|&b| grid_fits(nu, b, &peaks))
            .ok_or_else(|| {
                Error::InvalidInput("peaks do not fit any supported box grid".into())
            })?;
        let (nodes, weights) = gauss_legendre(order);
        Ok(Self {
            nu,
            divisions,
            peaks,
            levels,
            order,
            plain_split,
            nodes,
            weights,
        })
    }

    pub fn nu(&self) -> usize {
        self.nu
    }

    pub fn divisions(&self) -> usize {
        self.divisions
    }

    pub fn peaks(&self) -> &[Vec<f64>] {
        &self.peaks
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    /// Leaf cells in a fixed order.
    pub fn cells(&self) -> Vec<Cell> {
        let b = self.divisions;
        let w = TWO_PI / b as f64;
        let nu = self.nu;
        let mut out = Vec::new();
        for flat in 0..b.pow(nu as u32) {
            let mut rest = flat;
            let mut lo = vec![0.0; nu];
            for k in (0..nu).rev() {
                lo[k] = -PI + (rest % b) as f64 * w;
                rest /= b;
            }
            match self.peak_corner(&lo, w) {
                Some(corner) => self.graded(&lo, w, &corner, &mut out),
                None => {
                    let s = self.plain_split;
                    let sw = w / s as f64;
                    for sub in 0..s.pow(nu as u32) {
                        let mut r = sub;
                        let mut slo = lo.clone();
                        for k in (0..nu).rev() {
                            slo[k] += (r % s) as f64 * sw;
                            r /= s;
                        }
                        out.push(Cell { lo: slo, width: sw });
                    }
                }
            }
        }
        out
    }

    fn peak_corner(&self, lo: &[f64], w: f64) -> Option<Vec<bool>> {
        for peak in &self.peaks {
            let mut corner = Vec::with_capacity(self.nu);
            for (k, &x) in peak.iter().enumerate() {
                if same_angle(x, lo[k]) {
                    corner.push(false);
                } else if same_angle(x, lo[k] + w) {
                    corner.push(true);
                } else {
                    break;
                }
            }
            if corner.len() == self.nu {
                return Some(corner);
            }
        }
        None
    }

    /// Dyadic shells of the box [lo, lo + w] toward the corner selected by
    /// `corner` (true = upper end on that axis).
    fn graded(&self, lo: &[f64], w: f64, corner: &[bool], out: &mut Vec<Cell>) {
        let nu = self.nu;
        let mut cur_lo = lo.to_vec();
        let mut cur_w = w;
        for level in 0..=self.levels {
            let half = cur_w / 2.0;
            if level == self.levels {
                out.push(Cell {
                    lo: cur_lo,
                    width: cur_w,
                });
                break;
            }
            let mut next_lo = cur_lo.clone();
            for k in 0..nu {
                if corner[k] {
                    next_lo[k] += half;
                }
            }
            for child in 0..(1usize << nu) {
                let mut clo = cur_lo.clone();
                let mut is_corner = true;
                for k in 0..nu {
                    let upper = child >> k & 1 == 1;
                    if upper {
                        clo[k] += half;
                    }
                    if upper != corner[k] {
                        is_corner = false;
                    }
                }
                if !is_corner {
                    out.push(Cell {
                        lo: clo,
                        width: half,
                    });
                }
            }
            cur_lo = next_lo;
            cur_w = half;
        }
    }

    pub fn node_count(&self) -> usize {
        self.cells().len() * self.order.pow(self.nu as u32)
    }

    /// Torus average (2π)^{-ν} ∫ F(p) dp of a vector-valued integrand of
    /// length `len`. The closure receives a node, its normalized weight, and
    /// an accumulator to add `weight * F(p)` into.
    pub fn average<F>(&self, len: usize, f: F) -> Vec<f64>
    where
        F: Fn(&[f64], f64, &mut [f64]) + Sync,
    {
        let cells = self.cells();
        let norm = TWO_PI.powi(self.nu as i32);
        let partials: Vec<Vec<f64>> = cells
            .par_chunks(CELLS_PER_TASK)
            .map(|chunk| {
                let mut acc = vec![0.0; len];
                let mut p = vec![0.0; self.nu];
                for cell in chunk {
                    self.visit(cell, norm, &mut p, &mut |p, w| f(p, w, &mut acc));
                }
                acc
            })
            .collect();
        let mut total = vec![0.0; len];
        for part in partials {
            for (t, x) in total.iter_mut().zip(part) {
                *t += x;
            }
        }
        total
    }

    /// Sequential variant for closures that are not `Sync`.
    pub fn average_with(&self, f: &mut dyn FnMut(&[f64], f64)) {
        let norm = TWO_PI.powi(self.nu as i32);
        let mut p = vec![0.0; self.nu];
        for cell in self.cells() {
            self.visit(&cell, norm, &mut p, &mut *f);
        }
    }

    /// Visits the nodes of one cell with weights normalized as in
    /// [`TorusRule::average`].
    pub fn visit_cell(&self, cell: &Cell, f: &mut dyn FnMut(&[f64], f64)) {
        let norm = TWO_PI.powi(self.nu as i32);
        let mut p = vec![0.0; self.nu];
        self.visit(cell, norm, &mut p, f);
    }

    pub fn average_scalar<F>(&self, f: F) -> f64
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        self.average(1, |p, w, acc| acc[0] += w * f(p))[0]
    }

    fn visit(&self, cell: &Cell, norm: f64, p: &mut [f64], g: &mut dyn FnMut(&[f64], f64)) {
        let q = self.order;
        let nu = self.nu;
        let scale = (cell.width / 2.0).powi(nu as i32) / norm;
        for flat in 0..q.pow(nu as u32) {
            let mut r = flat;
            let mut w = scale;
            for k in (0..nu).rev() {
                let i = r % q;
                r /= q;
                p[k] = cell.lo[k] + (self.nodes[i] + 1.0) * cell.width / 2.0;
                w *= self.weights[i];
            }
            g(p, w);
        }
    }
}

fn grid_fits(nu: usize, b: usize, peaks: &[Vec<f64>]) -> bool {
    let w = TWO_PI / b as f64;
    let mut idx = Vec::with_capacity(peaks.len());
    for p in peaks {
        let mut v = Vec::with_capacity(nu);
        for &x in p {
            let t = (x + PI) / w;
            let r = t.round();
            if (t - r).abs() > 1e-9 {
                return false;
            }
            v.push((r as i64).rem_euclid(b as i64));
        }
        idx.push(v);
    }
    // Two peaks closer than two boxes on every axis could share a box.
    for i in 0..idx.len() {
        for j in i + 1..idx.len() {
            let close = (0..nu).all(|k| {
                let d = (idx[i][k] - idx[j][k]).rem_euclid(b as i64);
                d.min(b as i64 - d) < 2
            });
            if close {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cells_tile_the_torus() {
        for nu in 1..=3 {
            let rule = TorusRule::new(nu, &[vec![0.0; nu]], 5, 3, 2).unwrap();
            let vol: f64 = rule.cells().iter().map(|c| c.width.powi(nu as i32)).sum();
            assert!((vol / TWO_PI.powi(nu as i32) - 1.0).abs() < 1e-12);
            assert!((rule.average_scalar(|_| 1.0) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn integrates_trig_polynomials() {
        let rule = TorusRule::new(2, &[vec![0.0, 0.0], vec![PI, PI]], 4, 6, 2).unwrap();
        let v = rule.average_scalar(|p| (p[0].cos() * p[1].cos()).powi(2));
        assert!((v - 0.25).abs() < 1e-12, "{v}");
    }

    #[test]
    fn resolves_inverse_square_singularity() {
        // (2π)^{-1} ∫ dp/(1 − cos p + δ) = 1/√(δ(2+δ)).
        let rule = TorusRule::new(1, &[vec![0.0]], 30, 8, 2).unwrap();
        let d = 1e-6;
        let v = rule.average_scalar(|p| 1.0 / (1.0 - p[0].cos() + d));
        let exact = 1.0 / (d * (2.0 + d)).sqrt();
        assert!((v / exact - 1.0).abs() < 1e-9, "{v} {exact}");
    }

    #[test]
    fn rejects_off_grid_peaks() {
        assert!(TorusRule::new(1, &[vec![0.1]], 3, 3, 1).is_err());
        let r = TorusRule::new(1, &[vec![0.0], vec![PI / 2.0]], 3, 3, 1).unwrap();
        assert!(r.divisions() >= 8);
    }

    #[test]
    fn deterministic_reduction() {
        let rule = TorusRule::new(3, &[vec![0.0; 3]], 6, 4, 2).unwrap();
        let f = |p: &[f64], w: f64, acc: &mut [f64]| {
            acc[0] += w * (p[0] + 2.0 * p[1]).sin().exp();
            acc[1] += w * p[2].cos().abs();
        };
        assert_eq!(rule.average(2, f), rule.average(2, f));
    }
}
