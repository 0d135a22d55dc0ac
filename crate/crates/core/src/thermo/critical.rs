use serde::Serialize;

use crate::bloch::{BlochHamiltonian, BlochSpectrum};
use crate::error::{Error, Result};
use crate::graph::{Boundary, Exhaustion};
use crate::scalar::Scalar;
use crate::spectral::{build_operator, eigendecompose, zero_mode_tol, OperatorKind, SpectralCarrier};

/// |Γ_n|^{-1} tr₀(e^{−βh}/(1 − e^{−βh})): the ground mode is left out.
pub fn stage_critical_density<T: Scalar>(sd: &dyn SpectralCarrier<T>, beta: T) -> T {
    let tol = zero_mode_tol::<T>();
    let evs = sd.eigenvalues();
    let s: T = evs
        .iter()
        .filter(|&&l| l > tol)
        .map(|&l| T::one() / (beta * l).exp_m1())
        .sum();
    s / T::of_usize(evs.len())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalMethod {
    GroundModeExcluded,
}

#[derive(Clone, Debug, Serialize)]
pub struct CriticalDensityEstimate {
    pub beta: f64,
    pub method: CriticalMethod,
    pub boundary: Boundary,
    pub sizes: Vec<usize>,
    pub volumes: Vec<usize>,
    pub per_stage: Vec<f64>,
    /// Fit a + b/s over the last stages, s = 2n + 1 the box side.
    pub fit: Option<(f64, f64)>,
    /// The fitted limit a, absent when divergent or with too few stages.
    pub extrapolated: Option<f64>,
    pub infinite: bool,
    /// Exponent γ of the stage increments ~ s^γ, when all are positive.
    pub increment_exponent: Option<f64>,
    /// Stages attaining the running maximum (the limsup subsequence).
    pub running_max: Vec<usize>,
}

/// Increments decaying no faster than s^{-3/2} are treated as growth
/// without bound.
const DIVERGENCE_EXPONENT: f64 = -1.5;
const FIT_STAGES: usize = 4;

/// Builds the estimate from per-stage values at box half-widths `sizes`.
pub fn critical_density_from(
    beta: f64,
    boundary: Boundary,
    sizes: &[usize],
    volumes: &[usize],
    per_stage: &[f64],
) -> CriticalDensityEstimate {
    let s: Vec<f64> = sizes.iter().map(|&n| (2 * n + 1) as f64).collect();
    let k = per_stage.len();
    let mut running_max = Vec::new();
    let mut best = f64::NEG_INFINITY;
    for (i, &v) in per_stage.iter().enumerate() {
        if v >= best {
            best = v;
            running_max.push(sizes[i]);
        }
    }
    let mut fit = None;
    let mut increment_exponent = None;
    let mut infinite = false;
    if k >= 3 {
        let from = k.saturating_sub(FIT_STAGES);
        let xs: Vec<f64> = s[from..].iter().map(|x| 1.0 / x).collect();
        let ys = &per_stage[from..];
        fit = Some(linear_fit(&xs, ys));
        let inc: Vec<(f64, f64)> = (1..k)
            .map(|i| ((s[i] * s[i - 1]).sqrt(), per_stage[i] - per_stage[i - 1]))
            .collect();
        if inc.iter().all(|&(_, d)| d > 0.0) {
            let lx: Vec<f64> = inc.iter().map(|p| p.0.ln()).collect();
            let ly: Vec<f64> = inc.iter().map(|p| p.1.ln()).collect();
            let from = lx.len().saturating_sub(FIT_STAGES - 1);
            let (_, g) = linear_fit(&lx[from..], &ly[from..]);
            increment_exponent = Some(g);
            infinite = g > DIVERGENCE_EXPONENT;
        }
    }
    CriticalDensityEstimate {
        beta,
        method: CriticalMethod::GroundModeExcluded,
        boundary,
        sizes: sizes.to_vec(),
        volumes: volumes.to_vec(),
        per_stage: per_stage.to_vec(),
        extrapolated: if infinite { None } else { fit.map(|f| f.0) },
        fit,
        infinite,
        increment_exponent,
        running_max,
    }
}

/// (intercept, slope) of the least-squares line.
fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let m = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let den = m * sxx - sx * sx;
    if den.abs() < 1e-300 {
        return (sy / m, 0.0);
    }
    let slope = (m * sxy - sx * sy) / den;
    ((sy - slope * sx) / m, slope)
}

/// Critical density along the stages of `exh`. Free boundaries use the
/// induced stage graphs; periodic boundaries use the torus truncations of
/// the base lattice and are evaluated momentum by momentum.
pub fn critical_density(exh: &Exhaustion, beta: f64, boundary: Boundary) -> Result<CriticalDensityEstimate> {
    if beta <= 0.0 {
        return Err(Error::InvalidInput("beta must be positive".into()));
    }
    let mut volumes = Vec::new();
    let mut values = Vec::new();
    match boundary {
        Boundary::Free => {
            for &n in exh.sizes() {
                let st = exh.stage(n)?;
                let op = build_operator::<f64>(&st.graph, OperatorKind::Laplacian, None)?;
                let sd = eigendecompose(&op)?;
                volumes.push(sd.dim());
                values.push(stage_critical_density(&sd, beta));
            }
        }
        Boundary::Periodic => {
            let lat = exh.base().as_periodic().ok_or_else(|| {
                Error::NotApplicable("periodic stages need a periodic lattice".into())
            })?;
            let h = BlochHamiltonian::laplacian(lat);
            for &n in exh.sizes() {
                let sp = BlochSpectrum::new(&h, n)?;
                volumes.push(sp.volume());
                values.push(stage_critical_density(&sp, beta));
            }
        }
    }
    Ok(critical_density_from(beta, boundary, exh.sizes(), &volumes, &values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::PeriodicLattice;

    #[test]
    fn z1_diverges() {
        let ex = Exhaustion::boxes(PeriodicLattice::hypercubic(1), vec![8, 16, 32, 64, 128]).unwrap();
        let est = critical_density(&ex, 1.0, Boundary::Periodic).unwrap();
        assert!(est.infinite, "{est:?}");
        assert!(est.extrapolated.is_none());
    }

    #[test]
    fn z3_converges() {
        let ex = Exhaustion::boxes(PeriodicLattice::hypercubic(3), vec![4, 6, 8, 10, 12]).unwrap();
        let est = critical_density(&ex, 1.0, Boundary::Periodic).unwrap();
        assert!(!est.infinite, "{est:?}");
        let v = est.extrapolated.unwrap();
        assert!((v / 0.0672513 - 1.0).abs() < 0.02, "{v}");
    }

    #[test]
    fn decreasing_in_beta() {
        let ex = Exhaustion::boxes(PeriodicLattice::hypercubic(3), vec![3, 4, 5]).unwrap();
        let mut prev = f64::INFINITY;
        for beta in [0.5, 1.0, 2.0, 4.0] {
            let v = *critical_density(&ex, beta, Boundary::Periodic).unwrap().per_stage.last().unwrap();
            assert!(v < prev);
            prev = v;
        }
    }
}
