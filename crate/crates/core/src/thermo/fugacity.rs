use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::spectral::{zero_mode_tol, SpectralCarrier};

const T_LIMIT: f64 = 745.0;
const MAX_BISECTIONS: usize = 200;

/// z e^{−βλ}/(1 − z e^{−βλ}) with z = 1/(1 + e^{−t}), written so that it
/// stays accurate when z is within rounding of 1.
pub fn occupation<T: Scalar>(lambda: T, beta: T, t: T) -> T {
    let bl = beta * lambda;
    T::one() / (bl.exp_m1() + bl.exp() * (-t).exp())
}

fn logit<T: Scalar>(z: T) -> T {
    (z / (T::one() - z)).ln()
}

fn check_beta<T: Scalar>(beta: T) -> Result<()> {
    if !(beta > T::zero()) || !beta.is_finite() {
        return Err(Error::InvalidInput(format!("beta must be positive, got {beta}")));
    }
    Ok(())
}

/// Mean density |Γ_n|^{-1} tr(z e^{−βh}/(1 − z e^{−βh})).
pub fn density_of_z<T: Scalar>(sd: &dyn SpectralCarrier<T>, beta: T, z: T) -> Result<T> {
    check_beta(beta)?;
    if !(z > T::zero()) {
        return Err(Error::InvalidInput(format!("z must be positive, got {z}")));
    }
    let evs = sd.eigenvalues();
    if z >= T::one() {
        let tol = zero_mode_tol::<T>();
        if let Some(&ev) = evs.iter().find(|x| x.abs() <= tol) {
            return Err(Error::SingularMode {
                eigenvalue: ev.as_f64(),
            });
        }
        return Err(Error::InvalidInput(format!("z must be below 1, got {z}")));
    }
    Ok(density_at_logit(&evs, beta, logit(z)))
}

fn density_at_logit<T: Scalar>(evs: &[T], beta: T, t: T) -> T {
    let tol = zero_mode_tol::<T>();
    let s: T = evs
        .iter()
        .map(|&l| occupation(if l.abs() <= tol { T::zero() } else { l }, beta, t))
        .sum();
    s / T::of_usize(evs.len())
}

/// Solution of the fugacity equation on one finite volume.
#[derive(Clone, Debug, Serialize)]
pub struct ThermoSolution<T> {
    pub beta: T,
    pub rho: T,
    pub z: T,
    /// 1 − z, kept separately because z may round to 1.
    pub one_minus_z: T,
    /// μ with z = e^{−βμ}.
    pub mu: T,
    pub volume: usize,
    /// Mode occupations in the carrier's eigenvalue order.
    pub occupations: Vec<T>,
    pub residual: T,
    pub iterations: usize,
}

impl<T: Scalar> ThermoSolution<T> {
    /// z/(|Γ_n|(1 − z)), the density held by the ground mode.
    pub fn ground_density(&self) -> T {
        self.z / (T::of_usize(self.volume) * self.one_minus_z)
    }

    pub fn condensate_fraction(&self) -> T {
        self.ground_density() / self.rho
    }
}

/// Solves ρ = |Γ_n|^{-1} tr(z e^{−βh}/(1 − z e^{−βh})) for z ∈ (0, 1) by
/// bisection on t = log(z/(1 − z)).
pub fn solve_fugacity<T: Scalar>(sd: &dyn SpectralCarrier<T>, beta: T, rho: T) -> Result<ThermoSolution<T>> {
    check_beta(beta)?;
    if !(rho > T::zero()) || !rho.is_finite() {
        return Err(Error::InvalidInput(format!("rho must be positive, got {rho}")));
    }
    let evs = sd.eigenvalues();
    let tol = zero_mode_tol::<T>();
    let snapped: Vec<T> = evs
        .iter()
        .map(|&l| if l.abs() <= tol { T::zero() } else { l })
        .collect();
    let target = T::default_tol() * T::of(1e-2) * (T::one() + rho);
    let mut lo = T::of(-T_LIMIT);
    let mut hi = T::of(T_LIMIT);
    let mut iterations = 0;
    let mut t = T::zero();
    let mut residual = T::infinity();
    while iterations < MAX_BISECTIONS {
        iterations += 1;
        t = (lo + hi) / T::of(2.0);
        let r = density_at_logit(&snapped, beta, t) - rho;
        residual = r.abs();
        if residual <= target || hi - lo <= T::epsilon() * (T::one() + t.abs()) {
            break;
        }
        if r > T::zero() {
            hi = t;
        } else {
            lo = t;
        }
    }
    if residual > T::default_tol() * (T::one() + rho) {
        return Err(Error::NoConvergence {
            iterations,
            residual: residual.as_f64(),
        });
    }
    let e = (-t).exp();
    let z = T::one() / (T::one() + e);
    let one_minus_z = e / (T::one() + e);
    Ok(ThermoSolution {
        beta,
        rho,
        z,
        one_minus_z,
        mu: e.ln_1p() / beta,
        volume: evs.len(),
        occupations: snapped.iter().map(|&l| occupation(l, beta, t)).collect(),
        residual,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::spectral::{build_operator, eigendecompose, OperatorKind};

    fn path2() -> crate::spectral::SpectralData<f64> {
        let op = build_operator::<f64>(&Graph::path(2), OperatorKind::Laplacian, None).unwrap();
        eigendecompose(&op).unwrap()
    }

    #[test]
    fn two_path_closed_form() {
        let sd = path2();
        let e2 = (-2.0f64).exp();
        let expect = 0.5 * (1.0 + e2 / (2.0 - e2));
        let got = density_of_z(&sd, 1.0, 0.5).unwrap();
        assert!((got - expect).abs() < 1e-15);
    }

    #[test]
    fn round_trip() {
        let sd = path2();
        let rho = density_of_z(&sd, 1.0, 0.5).unwrap();
        let sol = solve_fugacity(&sd, 1.0, rho).unwrap();
        assert!((sol.z - 0.5).abs() < 1e-10);
        assert!(sol.residual <= 1e-10);
        assert!((sol.mu - 2f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn singular_at_one() {
        let sd = path2();
        assert!(matches!(
            density_of_z(&sd, 1.0, 1.0),
            Err(Error::SingularMode { .. })
        ));
    }

    #[test]
    fn near_one_keeps_precision() {
        let sd = path2();
        let sol = solve_fugacity(&sd, 1.0, 1e8).unwrap();
        assert!(sol.one_minus_z > 0.0 && sol.one_minus_z < 1e-7);
        assert!(sol.residual <= 1e-10 * (1.0 + 1e8));
        let f32sol = solve_fugacity(&path2_f32(), 1.0f32, 0.7).unwrap();
        assert!(f32sol.residual < 1e-4);
    }

    fn path2_f32() -> crate::spectral::SpectralData<f32> {
        let op = build_operator::<f32>(&Graph::path(2), OperatorKind::Laplacian, None).unwrap();
        eigendecompose(&op).unwrap()
    }
}
