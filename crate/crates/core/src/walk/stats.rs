use serde::Serialize;

use crate::graph::Site;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WalkMethod {
    /// Sparse evolution of d^{-1}A on a ball.
    Evolution,
    /// Closed-form convolution for ℤ^ν.
    Combinatorial,
    /// Quasi-momentum quadrature.
    Bloch,
}

/// Return statistics of the simple walk started at one vertex.
#[derive(Clone, Debug, Serialize)]
pub struct WalkStats {
    pub vertex: Site,
    pub degree: usize,
    pub n_max: usize,
    pub method: WalkMethod,
    /// q_N, N = 0..=n_max.
    pub q: Vec<f64>,
    /// p_N, N = 0..=n_max (p_0 = p_1 = 0).
    pub p: Vec<f64>,
    /// Σ_{N=2}^{n_max} q_N.
    pub q_sum: f64,
    /// Σ_{N=2}^{n_max} p_N.
    pub p_sum: f64,
    /// max_N |q_N − Σ_{k=0}^{N−2} q_k p_{N−k}|.
    pub renewal_residual: f64,
}

impl WalkStats {
    /// From independently computed q and p.
    pub fn new(vertex: Site, degree: usize, method: WalkMethod, q: Vec<f64>, p: Vec<f64>) -> Self {
        assert_eq!(q.len(), p.len());
        let n_max = q.len() - 1;
        let mut r0 = vec![0.0; q.len()];
        r0[0] = 1.0;
        let renewal_residual = renewal_residual(&q, &r0, &p);
        Self {
            vertex,
            degree,
            n_max,
            method,
            q_sum: q.iter().skip(2).sum(),
            p_sum: p.iter().skip(2).sum(),
            q,
            p,
            renewal_residual,
        }
    }

    /// From q alone; p is obtained by inverting the renewal equation.
    pub fn from_returns(vertex: Site, degree: usize, method: WalkMethod, q: Vec<f64>) -> Self {
        let p = first_returns_from(&q);
        Self::new(vertex, degree, method, q, p)
    }

    /// Σ_{N=2}^{m} q_N.
    pub fn partial_q_sum(&self, m: usize) -> f64 {
        self.q.iter().take(m.min(self.n_max) + 1).skip(2).sum()
    }

    /// Running Σ_{N=2}^{k} q_N and p_N for every k.
    pub fn cumulative(&self) -> (Vec<f64>, Vec<f64>) {
        let run = |s: &[f64]| {
            let mut acc = 0.0;
            s.iter()
                .enumerate()
                .map(|(n, &x)| {
                    if n >= 2 {
                        acc += x;
                    }
                    acc
                })
                .collect::<Vec<_>>()
        };
        (run(&self.q), run(&self.p))
    }
}

/// Inverts q_N = Σ_{k=0}^{N−2} q_k p_{N−k} (q_0 = 1).
pub fn first_returns_from(q: &[f64]) -> Vec<f64> {
    let mut p = vec![0.0; q.len()];
    for n in 2..q.len() {
        let mut s = q[n];
        for k in 1..=n - 2 {
            s -= q[k] * p[n - k];
        }
        p[n] = s;
    }
    p
}

/// max_N |r(N) − r⁰(N) − Σ_{k=0}^{N−2} r(k) p(N−k)|.
pub fn renewal_residual(r: &[f64], r0: &[f64], p: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for n in 0..r.len() {
        let mut s = r0[n];
        for k in 0..n.saturating_sub(1) {
            s += r[k] * p[n - k];
        }
        worst = worst.max((r[n] - s).abs());
    }
    worst
}

/// Σ_N a_N z^N over the stored terms.
pub fn generating(a: &[f64], z: f64) -> f64 {
    a.iter().rev().fold(0.0, |acc, &x| acc * z + x)
}

/// Cauchy product truncated at the common length.
pub fn truncated_product(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len().min(b.len());
    (0..n)
        .map(|m| (0..=m).map(|k| a[k] * b[m - k]).sum())
        .collect()
}

/// r̄(z) = r̄⁰(z) + r̄(z) p̄(z) for series truncated at a common length.
#[derive(Clone, Debug, Serialize)]
pub struct GeneratingCheck {
    pub z: f64,
    pub r_bar: f64,
    pub r0_bar: f64,
    pub p_bar: f64,
    /// |r̄ − r̄⁰ − (r p)‾| with the product truncated at the same order.
    pub residual: f64,
    /// |r̄ − r̄⁰ − r̄ p̄| from the truncated sums; nonzero by the tails only.
    pub product_gap: f64,
}

pub fn generating_identity(r: &[f64], r0: &[f64], p: &[f64], z: f64) -> GeneratingCheck {
    let r_bar = generating(r, z);
    let r0_bar = generating(r0, z);
    let p_bar = generating(p, z);
    let rp = generating(&truncated_product(r, p), z);
    GeneratingCheck {
        z,
        r_bar,
        r0_bar,
        p_bar,
        residual: (r_bar - r0_bar - rp).abs(),
        product_gap: (r_bar - r0_bar - r_bar * p_bar).abs(),
    }
}

/// Least-squares fit a_N ≈ c N^exponent on log scales.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PowerFit {
    pub c: f64,
    pub exponent: f64,
    pub from: usize,
    pub to: usize,
}

impl PowerFit {
    pub fn at(&self, n: f64) -> f64 {
        self.c * n.powf(self.exponent)
    }

    /// ∫_{to}^∞ c N^a dN, or ∞ when a ≥ −1.
    pub fn tail(&self) -> f64 {
        if self.exponent >= -1.0 {
            f64::INFINITY
        } else {
            self.c * (self.to as f64).powf(self.exponent + 1.0) / (-self.exponent - 1.0)
        }
    }
}

/// Neighbouring-pair average (a_N + a_{N−1})/2, which removes the parity
/// oscillation of bipartite graphs.
pub fn pair_average(a: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len()];
    for n in 1..a.len() {
        out[n] = 0.5 * (a[n] + a[n - 1]);
    }
    out
}

/// Fit over the last decade [n/10, n] of the pair-averaged series.
pub fn decade_fit(a: &[f64]) -> Option<PowerFit> {
    let to = a.len().checked_sub(1)?;
    let from = (to / 10).max(2);
    if to < from + 4 {
        return None;
    }
    let avg = pair_average(a);
    let pts: Vec<(f64, f64)> = (from..=to)
        .filter(|&n| avg[n] > 0.0)
        .map(|n| ((n as f64).ln(), avg[n].ln()))
        .collect();
    if pts.len() < 4 {
        return None;
    }
    let m = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    let icpt = (sy - slope * sx) / m;
    Some(PowerFit {
        c: icpt.exp(),
        exponent: slope,
        from,
        to,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walk::hypercubic_returns;

    #[test]
    fn inversion_recovers_z1_first_returns() {
        let q = hypercubic_returns(1, 10);
        let p = first_returns_from(&q);
        // Catalan: p_{2n} = C_{n-1} / 2^{2n-1}.
        assert!((p[2] - 0.5).abs() < 1e-15);
        assert!((p[4] - 0.125).abs() < 1e-15);
        assert!((p[6] - 2.0 / 32.0).abs() < 1e-15);
        assert!(renewal_residual(&q, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0], &p) < 1e-15);
    }

    #[test]
    fn product_truncation_is_exact() {
        let q = hypercubic_returns(3, 60);
        let p = first_returns_from(&q);
        let mut r0 = vec![0.0; q.len()];
        r0[0] = 1.0;
        for z in [0.3, 0.6, 0.9] {
            assert!(generating_identity(&q, &r0, &p, z).residual < 1e-12);
        }
    }

    #[test]
    fn fit_recovers_power() {
        let a: Vec<f64> = (0..=1000).map(|n| 3.0 * (n.max(1) as f64).powf(-1.5)).collect();
        let f = decade_fit(&a).unwrap();
        assert!((f.exponent + 1.5).abs() < 1e-2);
    }
}
