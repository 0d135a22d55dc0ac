use std::collections::HashMap;

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{PeriodicLattice, Site};
use crate::linalg::{hermitian_eigen, Matrix};

use super::band::grid_point;
use super::twisted::{bridge_phase, twisted_matrix, BlochHamiltonian};

/// Positive periodic ground state Ω of h = E − A + v, stored with
/// Σ_{V₀} Ω(a)² = 1.
#[derive(Clone, Debug, Serialize)]
pub struct PeriodicGroundState {
    pub omega: Vec<f64>,
    pub e: f64,
    /// sup Ω / inf Ω.
    pub m: f64,
    /// ‖(Ã(0) − v)Ω − EΩ‖.
    pub residual: f64,
}

impl PeriodicGroundState {
    pub fn new(lat: &PeriodicLattice, v: &[f64]) -> Result<Self> {
        let t = twisted_matrix(lat, v, &vec![0.0; lat.nu()]);
        let eig = t.eigen()?;
        let e = eig.top();
        let top = eig.vector(eig.values.len() - 1);
        let big = top
            .iter()
            .copied()
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .expect("nonempty cell");
        let phase = big.conj() / big.norm();
        let omega: Vec<f64> = top.iter().map(|x| (x * phase).re).collect();
        let scale = 1e-12;
        if let Some((a, &w)) = omega.iter().enumerate().find(|(_, &w)| w <= scale) {
            return Err(Error::NonPositiveGroundState { vertex: a, value: w });
        }
        let norm = omega.iter().map(|w| w * w).sum::<f64>().sqrt();
        let omega: Vec<f64> = omega.iter().map(|w| w / norm).collect();
        let oc: Vec<Complex<f64>> = omega.iter().map(|&w| Complex::new(w, 0.0)).collect();
        let r = t.matrix.matvec(&oc);
        let residual = r
            .iter()
            .zip(&omega)
            .map(|(x, w)| (x - e * w).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let max = omega.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = omega.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(Self {
            omega,
            e,
            m: max / min,
            residual,
        })
    }

    /// Ω scaled to Σ_{V₀} Ω² = |V₀|, the convention of the Dirichlet
    /// identities.
    pub fn cell_count_normalized(&self) -> Vec<f64> {
        let s = (self.omega.len() as f64).sqrt();
        self.omega.iter().map(|w| w * s).collect()
    }
}

/// χ̃(f) = Σ_i Ω(i) f_i with Ω normalized over one cell.
pub fn chi_tilde(gs: &PeriodicGroundState, f: &[(Site, Complex<f64>)]) -> Complex<f64> {
    f.iter()
        .fold(Complex::new(0.0, 0.0), |acc, (s, fi)| acc + fi * gs.omega[s.orbit])
}

/// The limit of |Γ_n|^{1/2}(Ω_n, f) along periodic truncations, which is
/// |V₀|^{1/2} χ̃(f).
pub fn chi_tilde_volume(gs: &PeriodicGroundState, f: &[(Site, Complex<f64>)]) -> Complex<f64> {
    chi_tilde(gs, f) * (gs.omega.len() as f64).sqrt()
}

/// Both sides of (f, e^{−βh(p)} f) ≤ (|f|, e^{−βh(0)} |f|).
#[derive(Clone, Debug, Serialize)]
pub struct DiamagneticCheck {
    pub lhs: f64,
    pub rhs: f64,
}

impl DiamagneticCheck {
    pub fn holds(&self, slack: f64) -> bool {
        self.lhs <= self.rhs + slack
    }
}

fn heat_form(m: &Matrix<Complex<f64>>, beta: f64, f: &[Complex<f64>]) -> Result<f64> {
    let eig = hermitian_eigen(m)?;
    let mut acc = 0.0;
    for k in 0..eig.values.len() {
        let u = eig.vector(k);
        let c: Complex<f64> = u.iter().zip(f).map(|(a, b)| a.conj() * b).sum();
        acc += (-beta * eig.values[k]).exp() * c.norm_sqr();
    }
    Ok(acc)
}

pub fn diamagnetic_check(h: &BlochHamiltonian, beta: f64, p: &[f64], f: &[Complex<f64>]) -> Result<DiamagneticCheck> {
    if f.len() != h.orbits() {
        return Err(Error::InvalidInput("test vector length differs from the cell size".into()));
    }
    let abs: Vec<Complex<f64>> = f.iter().map(|x| Complex::new(x.norm(), 0.0)).collect();
    Ok(DiamagneticCheck {
        lhs: heat_form(&h.fibre(p), beta, f)?,
        rhs: heat_form(&h.fibre(&vec![0.0; h.nu()]), beta, &abs)?,
    })
}

/// Diagonal unitary W = diag(e^{−iδ_a}) with W Ã(p) W* = Ã(p − p₀).
#[derive(Clone, Debug, Serialize)]
pub struct GaugeCheck {
    pub p0: Vec<f64>,
    /// Phases δ_a of the top eigenvector at p₀.
    pub phases: Vec<f64>,
    /// max over the check grid of ‖W Ã(p) W* − Ã(p − p₀)‖_max.
    pub residual: f64,
    pub grid: usize,
}

pub const GAUGE_TOL: f64 = 1e-10;

pub fn degenerate_gauge(lat: &PeriodicLattice, v: &[f64], p0: &[f64], grid: usize) -> Result<GaugeCheck> {
    let nu = lat.nu();
    let zero = vec![0.0; nu];
    let e = twisted_matrix(lat, v, &zero).top()?;
    let at = twisted_matrix(lat, v, p0).eigen()?;
    let scale = e.abs().max(1.0);
    if e - at.top() > 1e-8 * scale {
        return Err(Error::GaugeRefused(format!(
            "E(p0) = {} is below the band top {e}",
            at.top()
        )));
    }
    let f = at.vector(at.values.len() - 1);
    if let Some(a) = f.iter().position(|x| x.norm() < 1e-8) {
        return Err(Error::GaugeRefused(format!(
            "top eigenvector vanishes at orbit {a}: inconsistent degeneracy"
        )));
    }
    let phases: Vec<f64> = f.iter().map(|x| x.arg()).collect();
    let w: Vec<Complex<f64>> = phases.iter().map(|&d| Complex::from_polar(1.0, -d)).collect();
    let mut residual: f64 = 0.0;
    for k in 0..grid.pow(nu as u32) {
        let p = grid_point(k, nu, grid);
        let shifted: Vec<f64> = p.iter().zip(p0).map(|(a, b)| a - b).collect();
        let a = twisted_matrix(lat, v, &p).matrix;
        let b = twisted_matrix(lat, v, &shifted).matrix;
        for i in 0..w.len() {
            for j in 0..w.len() {
                let conj = w[i] * a[(i, j)] * w[j].conj();
                residual = residual.max((conj - b[(i, j)]).norm());
            }
        }
    }
    if residual > GAUGE_TOL {
        return Err(Error::GaugeRefused(format!("conjugation residual {residual:.3e}")));
    }
    Ok(GaugeCheck {
        p0: p0.to_vec(),
        phases,
        residual,
        grid,
    })
}

/// Hermitian form of Σ_{edges} |f(a) − e^{iθ_ab(p)} f(b)|² Ω(a)Ω(b) on the
/// fundamental domain.
pub fn twisted_dirichlet_matrix(lat: &PeriodicLattice, omega: &[f64], p: &[f64]) -> Matrix<Complex<f64>> {
    let n0 = lat.fundamental_vertices();
    let mut d = Matrix::zeros(n0, n0);
    let mut add = |a: usize, b: usize, phase: Complex<f64>| {
        let w = omega[a] * omega[b];
        d[(a, a)] += w;
        d[(b, b)] += w;
        d[(a, b)] -= phase * w;
        d[(b, a)] -= phase.conj() * w;
    };
    for &(a, b) in lat.internal_edges() {
        add(a, b, Complex::new(1.0, 0.0));
    }
    for br in lat.bridge_edges() {
        add(br.a, br.b, Complex::from_polar(1.0, bridge_phase(p, &br.offset)));
    }
    d
}

/// Both sides of (fΩ, h(p) fΩ) = Σ |f(a) − e^{iθ_ab(p)} f(b)|² Ω(a)Ω(b).
#[derive(Clone, Debug, Serialize)]
pub struct DirichletPair {
    pub form: f64,
    pub edge_sum: f64,
}

impl DirichletPair {
    pub fn agrees(&self, tol: f64) -> bool {
        (self.form - self.edge_sum).abs() <= tol * self.form.abs().max(1.0)
    }
}

pub fn twisted_dirichlet(
    h: &BlochHamiltonian,
    gs: &PeriodicGroundState,
    p: &[f64],
    f: &[Complex<f64>],
) -> Result<DirichletPair> {
    if f.len() != h.orbits() {
        return Err(Error::InvalidInput("test vector length differs from the cell size".into()));
    }
    let omega = gs.cell_count_normalized();
    let g: Vec<Complex<f64>> = f.iter().zip(&omega).map(|(x, w)| x * w).collect();
    let hg = h.fibre(p).matvec(&g);
    let form: Complex<f64> = g.iter().zip(&hg).map(|(a, b)| a.conj() * b).sum();
    let d = twisted_dirichlet_matrix(h.lattice(), &omega, p).matvec(f);
    let edge: Complex<f64> = f.iter().zip(&d).map(|(a, b)| a.conj() * b).sum();
    Ok(DirichletPair {
        form: form.re,
        edge_sum: edge.re,
    })
}

/// (fΩ, h fΩ) on the infinite lattice against the weighted edge sum, for a
/// finitely supported f.
pub fn dirichlet_identity(
    h: &BlochHamiltonian,
    gs: &PeriodicGroundState,
    f: &[(Site, Complex<f64>)],
) -> Result<DirichletPair> {
    let lat = h.lattice();
    let omega = gs.cell_count_normalized();
    let mut vals: HashMap<Site, Complex<f64>> = HashMap::new();
    for (s, x) in f {
        if s.cell.len() != lat.nu() || s.orbit >= lat.fundamental_vertices() {
            return Err(Error::InvalidInput(format!("site {s:?} is not on the lattice")));
        }
        *vals.entry(s.clone()).or_default() += x;
    }
    let g = |s: &Site| vals.get(s).copied().unwrap_or_default();
    let mut nb = Vec::new();
    let mut form = Complex::new(0.0, 0.0);
    let mut edge_sum = 0.0;
    let mut sites: Vec<&Site> = vals.keys().collect();
    sites.sort();
    for s in sites {
        let fs = g(s);
        let ws = omega[s.orbit];
        lat.neighbors(s, &mut nb);
        let mut hop = Complex::new(0.0, 0.0);
        for t in &nb {
            let ft = g(t);
            let wt = omega[t.orbit];
            hop += ft * wt;
            // Edges inside the support are visited from both ends.
            let weight = if vals.contains_key(t) { 0.5 } else { 1.0 };
            edge_sum += weight * (fs - ft).norm_sqr() * ws * wt;
        }
        let diag = (h.top + h.potential[s.orbit]) * fs * ws;
        form += (fs * ws).conj() * (diag - hop);
    }
    Ok(DirichletPair {
        form: form.re,
        edge_sum,
    })
}

/// Comparison of E^v(0) − E^v(p) with the Laplacian gap −E^d(p) on a grid.
#[derive(Clone, Debug, Serialize)]
pub struct SandwichReport {
    pub m: f64,
    pub grid: usize,
    pub points: usize,
    /// Largest violation of M^{-1} g_d ≤ g_v ≤ M g_d (≤ 0 when it holds).
    pub worst_m: f64,
    /// Largest violation of M^{-2} g_d ≤ g_v ≤ M² g_d.
    pub worst_m2: f64,
    /// Largest gap between g_v and the weighted Rayleigh minimum.
    pub rayleigh_gap: f64,
}

impl SandwichReport {
    pub fn m_line_holds(&self, slack: f64) -> bool {
        self.worst_m <= slack
    }

    pub fn m2_line_holds(&self, slack: f64) -> bool {
        self.worst_m2 <= slack
    }
}

fn bottom(m: &Matrix<Complex<f64>>) -> Result<f64> {
    Ok(hermitian_eigen(m)?.values[0])
}

pub fn ground_state_compare(lat: &PeriodicLattice, v: &[f64], grid: usize) -> Result<(PeriodicGroundState, SandwichReport)> {
    lat.require_connected()?;
    let gs = PeriodicGroundState::new(lat, v)?;
    let hv = BlochHamiltonian::new(lat, v)?;
    let hd = BlochHamiltonian::laplacian(lat);
    let nu = lat.nu();
    let n0 = lat.fundamental_vertices();
    let omega = gs.cell_count_normalized();
    let (m, m2) = (gs.m, gs.m * gs.m);
    let mut worst_m = f64::NEG_INFINITY;
    let mut worst_m2 = f64::NEG_INFINITY;
    let mut rayleigh_gap: f64 = 0.0;
    let count = grid.pow(nu as u32);
    for k in 0..count {
        let p = grid_point(k, nu, grid);
        let gv = bottom(&hv.fibre(&p))?;
        let gd = bottom(&hd.fibre(&p))?;
        worst_m = worst_m.max(gd / m - gv).max(gv - m * gd);
        worst_m2 = worst_m2.max(gd / m2 - gv).max(gv - m2 * gd);
        let d = twisted_dirichlet_matrix(lat, &omega, &p);
        let scaled = Matrix::from_fn(n0, n0, |i, j| d[(i, j)] / (omega[i] * omega[j]));
        rayleigh_gap = rayleigh_gap.max((bottom(&scaled)? - gv).abs());
    }
    Ok((
        gs.clone(),
        SandwichReport {
            m: gs.m,
            grid,
            points: count,
            worst_m,
            worst_m2,
            rayleigh_gap,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn laplacian_ground_state_is_flat() {
        let lat = PeriodicLattice::cubic_two_cell();
        let (gs, rep) = ground_state_compare(&lat, &[6.0, 6.0], 6).unwrap();
        assert!((gs.m - 1.0).abs() < 1e-12);
        assert!(rep.worst_m.abs() < 1e-12 && rep.worst_m2.abs() < 1e-12);
        assert!(rep.rayleigh_gap < 1e-10);
        let c = chi_tilde(&gs, &[(Site::at_origin(3, 0), Complex::new(1.0, 0.0))]);
        assert!((c.re - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn random_potential_sandwich() {
        let lat = PeriodicLattice::cubic_two_cell();
        let (gs, rep) = ground_state_compare(&lat, &[0.7, -1.1], 6).unwrap();
        assert!(gs.m > 1.0);
        assert!(gs.residual < 1e-10);
        assert!(rep.m2_line_holds(1e-10), "{rep:?}");
        assert!(rep.rayleigh_gap < 1e-8, "{rep:?}");
    }

    #[test]
    fn diamagnetic_equality_cases() {
        let h = BlochHamiltonian::new(&PeriodicLattice::ladder(), &[0.2, 0.5]).unwrap();
        let f = [Complex::new(0.3, 0.0), Complex::new(0.8, 0.0)];
        let c = diamagnetic_check(&h, 1.3, &[0.0], &f).unwrap();
        assert!((c.lhs - c.rhs).abs() < 1e-12);
        let c = diamagnetic_check(&h, 0.0, &[1.1], &[Complex::new(0.3, 0.4), Complex::new(0.0, -1.0)]).unwrap();
        assert!((c.lhs - 1.25).abs() < 1e-12 && (c.rhs - 1.25).abs() < 1e-12);
        let c = diamagnetic_check(&h, 2.0, &[1.1], &[Complex::new(0.3, 0.4), Complex::new(0.0, -1.0)]).unwrap();
        assert!(c.holds(1e-12));
    }

    #[test]
    fn gauge_for_split_square() {
        let lat = PeriodicLattice::split_square();
        let g = degenerate_gauge(&lat, &[0.0, 0.0], &[PI, 0.0], 9).unwrap();
        assert!(g.residual < 1e-12);
        let d = (g.phases[0] - g.phases[1]).abs();
        assert!((d - PI).abs() < 1e-9);
        let id = degenerate_gauge(&lat, &[0.0, 0.0], &[0.0, 0.0], 9).unwrap();
        assert!((id.phases[0] - id.phases[1]).abs() < 1e-12);
    }

    #[test]
    fn gauge_refused_off_top() {
        let lat = PeriodicLattice::hypercubic(2);
        assert!(matches!(
            degenerate_gauge(&lat, &[0.0], &[PI, 0.0], 9),
            Err(Error::GaugeRefused(_))
        ));
    }

    #[test]
    fn dirichlet_identities() {
        let lat = PeriodicLattice::ladder();
        let h = BlochHamiltonian::new(&lat, &[0.4, -0.3]).unwrap();
        let gs = PeriodicGroundState::new(&lat, &[0.4, -0.3]).unwrap();
        let f = [Complex::new(0.5, -0.2), Complex::new(-0.1, 0.9)];
        assert!(twisted_dirichlet(&h, &gs, &[0.7], &f).unwrap().agrees(1e-12));
        let sites = vec![
            (Site::new(vec![0], 0), Complex::new(1.0, 0.5)),
            (Site::new(vec![1], 1), Complex::new(-0.3, 0.0)),
            (Site::new(vec![3], 0), Complex::new(0.0, 2.0)),
        ];
        let d = dirichlet_identity(&h, &gs, &sites).unwrap();
        assert!(d.agrees(1e-12), "{d:?}");
    }
}
