use std::f64::consts::PI;

use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Boundary, PeriodicLattice, Site};
use crate::linalg::symmetric_eigen;
use crate::spectral::{zero_mode_tol, InfiniteVolume, SpectralCarrier};

use super::torus::TorusRule;
use super::twisted::{twisted_matrix, BlochHamiltonian};

/// Momentum-resolved spectrum of the periodic truncation Γ_n^(p).
///
/// Eigenvectors are ψ_{p,k}(a, j) = u_k(p)_a e^{ip·j} / L^{ν/2} with
/// p ∈ (2π/L)ℤ^ν and L = 2n + 1, so the vertex order is the one of
/// [`PeriodicLattice::truncate`].
#[derive(Clone, Debug)]
pub struct BlochSpectrum {
    nu: usize,
    n: usize,
    side: usize,
    orbits: usize,
    /// [momentum][band], ascending within a momentum.
    values: Vec<f64>,
    /// [momentum][band][orbit].
    vectors: Vec<Complex<f64>>,
}

impl BlochSpectrum {
    pub fn new(h: &BlochHamiltonian, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("truncation half-width must be >= 1".into()));
        }
        let nu = h.nu();
        let n0 = h.orbits();
        let side = 2 * n + 1;
        let count = side.pow(nu as u32);
        let per: Vec<(Vec<f64>, Vec<Complex<f64>>)> = (0..count)
            .into_par_iter()
            .map(|m| {
                let p = momentum(m, nu, side);
                let e = h.eigen(&p)?;
                let mut vecs = Vec::with_capacity(n0 * n0);
                for k in 0..n0 {
                    vecs.extend(e.vector(k));
                }
                Ok((e.values, vecs))
            })
            .collect::<Result<_>>()?;
        let mut values = Vec::with_capacity(count * n0);
        let mut vectors = Vec::with_capacity(count * n0 * n0);
        for (v, u) in per {
            values.extend(v);
            vectors.extend(u);
        }
        // The ground state at p = 0 is the Perron vector; fix its phase so
        // that it is positive.
        let u0 = &mut vectors[..n0];
        let big = u0
            .iter()
            .copied()
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .unwrap_or(Complex::new(1.0, 0.0));
        let phase = big.conj() / big.norm();
        for x in u0.iter_mut() {
            *x *= phase;
        }
        Ok(Self {
            nu,
            n,
            side,
            orbits: n0,
            values,
            vectors,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn momenta(&self) -> usize {
        self.side.pow(self.nu as u32)
    }

    pub fn momentum(&self, m: usize) -> Vec<f64> {
        momentum(m, self.nu, self.side)
    }

    /// Bands at momentum index `m`.
    pub fn bands(&self, m: usize) -> &[f64] {
        &self.values[m * self.orbits..(m + 1) * self.orbits]
    }

    /// The unit-cell coordinates s = j + n and orbit of a vertex index.
    fn locate(&self, i: usize) -> (Vec<usize>, usize) {
        let orbit = i % self.orbits;
        let mut c = i / self.orbits;
        let mut s = vec![0; self.nu];
        for x in s.iter_mut().rev() {
            *x = c % self.side;
            c /= self.side;
        }
        (s, orbit)
    }

    /// (ψ_{m,k}, f) for every momentum and band.
    fn coefficients(&self, f: &[(usize, Complex<f64>)]) -> Result<Vec<Complex<f64>>> {
        let n0 = self.orbits;
        let norm = (self.momenta() as f64).sqrt();
        let located: Vec<(Vec<usize>, usize, Complex<f64>)> = f
            .iter()
            .map(|&(i, fi)| {
                if i >= self.volume() {
                    return Err(Error::InvalidInput(format!(
                        "vertex {i} outside a truncation of {} vertices",
                        self.volume()
                    )));
                }
                let (s, a) = self.locate(i);
                Ok((s, a, fi))
            })
            .collect::<Result<_>>()?;
        let unit = 2.0 * PI / self.side as f64;
        Ok((0..self.momenta())
            .into_par_iter()
            .flat_map_iter(|m| {
                let k_idx = digits(m, self.nu, self.side);
                let mut out = vec![Complex::new(0.0, 0.0); n0];
                for (s, a, fi) in &located {
                    // Integer phase keeps p·s exact modulo 2π.
                    let turns: usize = k_idx.iter().zip(s).map(|(k, x)| k * x).sum::<usize>() % self.side;
                    let ph = Complex::from_polar(1.0, -unit * turns as f64);
                    for (k, o) in out.iter_mut().enumerate() {
                        let u = self.vectors[(m * n0 + k) * n0 + *a];
                        *o += u.conj() * ph * *fi;
                    }
                }
                out.into_iter().map(move |c| c / norm)
            })
            .collect())
    }
}

fn digits(m: usize, nu: usize, side: usize) -> Vec<usize> {
    let mut r = m;
    let mut k = vec![0; nu];
    for x in k.iter_mut().rev() {
        *x = r % side;
        r /= side;
    }
    k
}

fn momentum(m: usize, nu: usize, side: usize) -> Vec<f64> {
    digits(m, nu, side)
        .into_iter()
        .map(|k| 2.0 * PI * k as f64 / side as f64)
        .collect()
}

fn snap(x: f64) -> f64 {
    if x.abs() <= zero_mode_tol::<f64>() {
        0.0
    } else {
        x
    }
}

impl SpectralCarrier<f64> for BlochSpectrum {
    fn volume(&self) -> usize {
        self.momenta() * self.orbits
    }

    fn eigenvalues(&self) -> Vec<f64> {
        self.values.iter().map(|&x| snap(x)).collect()
    }

    fn ground_energy(&self) -> f64 {
        snap(self.values[0])
    }

    fn quadratic_form(
        &self,
        f: &[(usize, Complex<f64>)],
        g: &[(usize, Complex<f64>)],
        func: &dyn Fn(f64) -> f64,
        skip_ground: bool,
    ) -> Result<Complex<f64>> {
        let cf = self.coefficients(f)?;
        let cg = self.coefficients(g)?;
        let mut acc = Complex::new(0.0, 0.0);
        for idx in usize::from(skip_ground)..self.values.len() {
            if cf[idx].norm_sqr() == 0.0 || cg[idx].norm_sqr() == 0.0 {
                continue;
            }
            let fk = func(snap(self.values[idx]));
            if !fk.is_finite() {
                return Err(Error::SingularMode {
                    eigenvalue: self.values[idx],
                });
            }
            acc += cg[idx].conj() * cf[idx] * fk;
        }
        Ok(acc)
    }

    fn ground_overlap(&self, f: &[(usize, Complex<f64>)]) -> Complex<f64> {
        let norm = (self.momenta() as f64).sqrt();
        f.iter().fold(Complex::new(0.0, 0.0), |acc, &(i, fi)| {
            acc + fi * self.vectors[i % self.orbits].re / norm
        })
    }
}

/// Quadrature settings for Brillouin-zone averages with integrable
/// singularities at the band-top momenta.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BlochQuadrature {
    pub levels: usize,
    pub order: usize,
    pub plain_split: usize,
}

impl Default for BlochQuadrature {
    fn default() -> Self {
        Self {
            levels: 20,
            order: 6,
            plain_split: 2,
        }
    }
}

const SCAN: usize = 8;

/// Momenta on the scan grid where the bottom of h(p) vanishes.
pub fn zero_modes(h: &BlochHamiltonian) -> Result<Vec<Vec<f64>>> {
    let nu = h.nu();
    let tol = 1e-9 * h.top.abs().max(1.0);
    let mut out = Vec::new();
    for flat in 0..SCAN.pow(nu as u32) {
        let p: Vec<f64> = digits(flat, nu, SCAN)
            .into_iter()
            .map(|k| -PI + 2.0 * PI * k as f64 / SCAN as f64)
            .collect();
        if h.eigen(&p)?.values[0] <= tol {
            out.push(p);
        }
    }
    Ok(out)
}

/// Infinite-volume matrix elements of F(h) by Brillouin-zone quadrature.
pub struct BlochInfinite {
    h: BlochHamiltonian,
    rule: TorusRule,
}

impl BlochInfinite {
    pub fn new(h: BlochHamiltonian, q: BlochQuadrature) -> Result<Self> {
        let peaks = zero_modes(&h)?;
        let rule = TorusRule::new(h.nu(), &peaks, q.levels, q.order, q.plain_split)?;
        Ok(Self { h, rule })
    }

    pub fn laplacian(lat: &PeriodicLattice) -> Result<Self> {
        Self::new(BlochHamiltonian::laplacian(lat), BlochQuadrature::default())
    }

    pub fn hamiltonian(&self) -> &BlochHamiltonian {
        &self.h
    }

    pub fn rule(&self) -> &TorusRule {
        &self.rule
    }

    /// avg_p Σ_k F(λ_k(p)) |u_k(p)_a|² for every orbit a.
    pub fn diagonal_all(&self, f: &(dyn Fn(f64) -> f64 + Sync)) -> Vec<f64> {
        let n0 = self.h.orbits();
        self.rule.average(n0, |p, w, acc| {
            let e = self.h.eigen(p).expect("small hermitian eigenproblem");
            for k in 0..n0 {
                let fk = f(e.values[k]) * w;
                for (a, x) in acc.iter_mut().enumerate() {
                    *x += fk * e.vectors[(a, k)].norm_sqr();
                }
            }
        })
    }

    /// avg_p (Ã(p) F(h(p)))_{aa} for every orbit a.
    pub fn neighbor_all(&self, f: &(dyn Fn(f64) -> f64 + Sync)) -> Vec<f64> {
        let n0 = self.h.orbits();
        let lat = self.h.lattice();
        let zero_v = vec![0.0; n0];
        self.rule.average(n0, |p, w, acc| {
            let e = self.h.eigen(p).expect("small hermitian eigenproblem");
            let a_p = twisted_matrix(lat, &zero_v, p).matrix;
            for k in 0..n0 {
                let fk = f(e.values[k]) * w;
                let u = e.vector(k);
                let au = a_p.matvec(&u);
                for (a, x) in acc.iter_mut().enumerate() {
                    *x += fk * (au[a] * u[a].conj()).re;
                }
            }
        })
    }

    /// The per-site average |V₀|^{-1} Σ_a (δ_a, F(h) δ_a).
    pub fn density(&self, f: &(dyn Fn(f64) -> f64 + Sync)) -> f64 {
        let d = self.diagonal_all(f);
        d.iter().sum::<f64>() / d.len() as f64
    }
}

impl InfiniteVolume for BlochInfinite {
    fn diagonal(&self, s: &Site, f: &dyn Fn(f64) -> f64) -> Result<f64> {
        let n0 = self.h.orbits();
        let a = s.orbit;
        if a >= n0 {
            return Err(Error::InvalidInput(format!("orbit {a} out of range")));
        }
        // The closure is not Sync, so this runs sequentially.
        let mut acc = 0.0;
        self.rule.average_with(&mut |p, w| {
            let e = self.h.eigen(p).expect("small hermitian eigenproblem");
            acc += w * (0..n0).map(|k| f(e.values[k]) * e.vectors[(a, k)].norm_sqr()).sum::<f64>();
        });
        Ok(acc)
    }

    fn neighbor_sum(&self, s: &Site, f: &dyn Fn(f64) -> f64) -> Result<f64> {
        let n0 = self.h.orbits();
        let a = s.orbit;
        if a >= n0 {
            return Err(Error::InvalidInput(format!("orbit {a} out of range")));
        }
        let lat = self.h.lattice();
        let zero_v = vec![0.0; n0];
        let mut acc = 0.0;
        self.rule.average_with(&mut |p, w| {
            let e = self.h.eigen(p).expect("small hermitian eigenproblem");
            let a_p = twisted_matrix(lat, &zero_v, p).matrix;
            for k in 0..n0 {
                let u = e.vector(k);
                let au = a_p.matvec(&u);
                acc += w * f(e.values[k]) * (au[a] * u[a].conj()).re;
            }
        });
        Ok(acc)
    }

    fn translation_class(&self, s: &Site) -> Option<usize> {
        Some(s.orbit)
    }

    fn exact(&self) -> bool {
        true
    }
}

/// G(a) = (δ_a, h^{-1} δ_a) on the infinite lattice; infinite when the
/// zero mode is not integrable.
pub fn lattice_green(h: &BlochHamiltonian, q: BlochQuadrature) -> Result<Vec<f64>> {
    let inf = BlochInfinite::new(h.clone(), q)?;
    if h.nu() <= 2 {
        return Ok(vec![f64::INFINITY; h.orbits()]);
    }
    Ok(inf.diagonal_all(&|l| 1.0 / l))
}

/// Spectrum of A − v on Γ_n^(p) against the union over p ∈ (2π/L)ℤ^ν of
/// the spectra of Ã(p) − v.
#[derive(Clone, Debug, Serialize)]
pub struct DirectIntegralCheck {
    pub n: usize,
    pub dimension: usize,
    pub max_gap: f64,
}

pub fn direct_integral_check(lat: &PeriodicLattice, v: &[f64], n: usize) -> Result<DirectIntegralCheck> {
    let tr = lat.truncate(n, Boundary::Periodic)?;
    let dim = tr.graph.vertex_count();
    let mut m = tr.graph.adjacency_matrix::<f64>();
    for (i, s) in tr.sites.iter().enumerate() {
        m[(i, i)] -= v[s.orbit];
    }
    let (mut dense, _) = symmetric_eigen(&m)?;
    dense.sort_by(f64::total_cmp);
    let side = 2 * n + 1;
    let mut fibred = Vec::with_capacity(dim);
    for idx in 0..side.pow(lat.nu() as u32) {
        let p = momentum(idx, lat.nu(), side);
        fibred.extend(twisted_matrix(lat, v, &p).eigen()?.values);
    }
    fibred.sort_by(f64::total_cmp);
    let max_gap = dense
        .iter()
        .zip(&fibred)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(DirectIntegralCheck {
        n,
        dimension: dim,
        max_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::spectral::{build_operator, eigendecompose, OperatorKind};

    #[test]
    fn matches_dense_truncation() {
        let lat = PeriodicLattice::ladder();
        let h = BlochHamiltonian::laplacian(&lat);
        let sp = BlochSpectrum::new(&h, 3).unwrap();
        let tr = lat.truncate(3, Boundary::Periodic).unwrap();
        let op = build_operator::<f64>(&tr.graph, OperatorKind::Laplacian, None).unwrap();
        let sd = eigendecompose(&op).unwrap();
        assert_eq!(sp.volume(), sd.volume());
        let f = vec![(0, Complex::new(0.5, 0.1)), (5, Complex::new(-0.3, 0.0))];
        let g = vec![(3, Complex::new(0.2, -0.7)), (0, Complex::new(1.0, 0.0))];
        let func = |l: f64| (-0.7 * l).exp();
        let a = sp.quadratic_form(&f, &g, &func, false).unwrap();
        let b = sd.quadratic_form(&f, &g, &func, false).unwrap();
        assert!((a - b).norm() < 1e-12, "{a} vs {b}");
        let a = sp.quadratic_form(&f, &g, &func, true).unwrap();
        let b = sd.quadratic_form(&f, &g, &func, true).unwrap();
        assert!((a - b).norm() < 1e-12, "{a} vs {b}");
        assert!((sp.ground_overlap(&f) - sd.ground_overlap(&f)).norm() < 1e-12);
    }

    #[test]
    fn direct_integral_on_cubic_two_cell() {
        let lat = PeriodicLattice::cubic_two_cell();
        let c = direct_integral_check(&lat, &[0.3, -0.2], 2).unwrap();
        assert!(c.max_gap < 1e-10, "{c:?}");
    }

    #[test]
    fn cycle_spectrum() {
        let lat = PeriodicLattice::hypercubic(1);
        let sp = BlochSpectrum::new(&BlochHamiltonian::laplacian(&lat), 4).unwrap();
        let mut a = sp.eigenvalues();
        a.sort_by(f64::total_cmp);
        let op = build_operator::<f64>(&Graph::cycle(9), OperatorKind::Laplacian, None).unwrap();
        let b = eigendecompose(&op).unwrap().eigenvalues;
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn cubic_green_function() {
        // Watson's integral: (1/(2π)³)∫ 1/(6 − 2Σcos) = 0.252731009858963...
        let g = lattice_green(&BlochHamiltonian::laplacian(&PeriodicLattice::hypercubic(3)), BlochQuadrature::default())
            .unwrap();
        assert!((g[0] - 0.252_731_009_858_963).abs() < 1e-8, "{}", g[0]);
    }

    #[test]
    fn diagonal_sums_to_density() {
        let lat = PeriodicLattice::cubic_two_cell();
        let inf = BlochInfinite::laplacian(&lat).unwrap();
        let f = |l: f64| 1.0 / l.exp_m1();
        let all = inf.diagonal_all(&f);
        let one = inf.diagonal(&Site::at_origin(3, 1), &f).unwrap();
        assert!((all[1] - one).abs() < 1e-10);
        let zd = BlochInfinite::laplacian(&PeriodicLattice::hypercubic(3)).unwrap();
        assert!((zd.density(&f) - inf.density(&f)).abs() < 1e-7);
    }
}
