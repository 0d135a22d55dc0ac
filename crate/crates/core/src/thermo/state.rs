use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::gauss_laguerre;
use crate::scalar::Scalar;
use crate::spectral::SpectralCarrier;

use super::fugacity::{occupation, ThermoSolution};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Normal,
    Condensed,
}

/// Gauge-invariant quasi-free state given by its two-point operator.
///
/// Normal: K = z e^{−βh}/(1 − z e^{−βh}). Condensed: the rank-one term
/// (ρ − ρ̄) χ(f) χ̄(g) plus e^{−βh}/(1 − e^{−βh}) on the complement of the
/// ground mode.
#[derive(Clone, Debug, Serialize)]
pub struct QuasiFreeState<T> {
    pub regime: Regime,
    pub beta: T,
    /// log(z/(1 − z)); unused when condensed.
    pub logit_z: T,
    /// ρ − ρ̄(β); zero when normal.
    pub condensate: T,
}

impl<T: Scalar> QuasiFreeState<T> {
    pub fn normal(beta: T, z: T) -> Result<Self> {
        if !(z > T::zero() && z < T::one()) {
            return Err(Error::InvalidInput(format!("z must lie in (0, 1), got {z}")));
        }
        Ok(Self {
            regime: Regime::Normal,
            beta,
            logit_z: (z / (T::one() - z)).ln(),
            condensate: T::zero(),
        })
    }

    /// The finite-volume equilibrium state of a fugacity solution.
    pub fn from_solution(sol: &ThermoSolution<T>) -> Self {
        Self {
            regime: Regime::Normal,
            beta: sol.beta,
            logit_z: (sol.z / sol.one_minus_z).ln(),
            condensate: T::zero(),
        }
    }

    pub fn condensed(beta: T, rho: T, rho_bar: T) -> Result<Self> {
        if !(rho > rho_bar) {
            return Err(Error::InvalidInput(format!(
                "condensation needs rho > critical density ({rho} <= {rho_bar})"
            )));
        }
        Ok(Self {
            regime: Regime::Condensed,
            beta,
            logit_z: T::infinity(),
            condensate: rho - rho_bar,
        })
    }

    pub fn z(&self) -> T {
        match self.regime {
            Regime::Normal => T::one() / (T::one() + (-self.logit_z).exp()),
            Regime::Condensed => T::one(),
        }
    }

    /// `(g, K f)` without the condensate term.
    fn kernel_form(&self, sd: &dyn SpectralCarrier<T>, f: &[(usize, Complex<T>)], g: &[(usize, Complex<T>)]) -> Result<Complex<T>> {
        let beta = self.beta;
        match self.regime {
            Regime::Normal => {
                let t = self.logit_z;
                sd.quadratic_form(f, g, &move |l| occupation(l, beta, t), false)
            }
            Regime::Condensed => {
                sd.quadratic_form(f, g, &move |l| T::one() / (beta * l).exp_m1(), true)
            }
        }
    }
}

/// χ(f) = |Γ_n|^{1/2} (Ω_n, f), which is Σ f_j when Ω_n is constant.
pub fn chi<T: Scalar>(sd: &dyn SpectralCarrier<T>, f: &[(usize, Complex<T>)]) -> Complex<T> {
    sd.ground_overlap(f) * T::of_usize(sd.volume()).sqrt()
}

fn norm_sqr<T: Scalar>(f: &[(usize, Complex<T>)]) -> T {
    f.iter().map(|(_, c)| c.norm_sqr()).sum()
}

/// φ(a*(f) a(g)).
pub fn two_point<T: Scalar>(
    state: &QuasiFreeState<T>,
    f: &[(usize, Complex<T>)],
    g: &[(usize, Complex<T>)],
    sd: &dyn SpectralCarrier<T>,
) -> Result<Complex<T>> {
    let k = state.kernel_form(sd, f, g)?;
    Ok(match state.regime {
        Regime::Normal => k,
        Regime::Condensed => k + chi(sd, f) * chi(sd, g).conj() * state.condensate,
    })
}

/// φ(W(f)) = exp(−¼(‖f‖² + 2(f, K f))) times exp(−½(ρ − ρ̄)|χ(f)|²) when
/// condensed.
pub fn weyl_value<T: Scalar>(
    state: &QuasiFreeState<T>,
    f: &[(usize, Complex<T>)],
    sd: &dyn SpectralCarrier<T>,
) -> Result<T> {
    let k = state.kernel_form(sd, f, f)?.re;
    let quarter = T::of(0.25);
    let mut log_w = -quarter * (norm_sqr(f) + T::of(2.0) * k);
    if state.regime == Regime::Condensed {
        log_w = log_w - T::of(0.5) * state.condensate * chi(sd, f).norm_sqr();
    }
    Ok(log_w.exp())
}

/// ψ^{(β,η,θ)}(W(f)): a phase 2(η − ρ̄)^{1/2} Re(e^{iθ} χ(f)) on top of the
/// normal part of the condensed state.
pub fn factor_state_value<T: Scalar>(
    beta: T,
    rho_bar: T,
    eta: T,
    theta: T,
    f: &[(usize, Complex<T>)],
    sd: &dyn SpectralCarrier<T>,
) -> Result<Complex<T>> {
    if eta < rho_bar {
        return Err(Error::InvalidInput(format!(
            "eta must be at least the critical density ({eta} < {rho_bar})"
        )));
    }
    let normal = normal_part(beta, f, sd)?;
    let c = chi(sd, f);
    let rot = Complex::from_polar(T::one(), theta) * c;
    let phase = T::of(2.0) * (eta - rho_bar).sqrt() * rot.re;
    Ok(Complex::from_polar(normal, phase))
}

/// exp(−¼(f, (1 + e^{−βh})/(1 − e^{−βh}) f)) with the ground mode removed.
fn normal_part<T: Scalar>(beta: T, f: &[(usize, Complex<T>)], sd: &dyn SpectralCarrier<T>) -> Result<T> {
    let k = sd
        .quadratic_form(f, f, &move |l| T::one() / (beta * l).exp_m1(), true)?
        .re;
    Ok((-T::of(0.25) * (norm_sqr(f) + T::of(2.0) * k)).exp())
}

/// Uniform average of ψ over `nodes` angles θ.
pub fn theta_average<T: Scalar>(
    beta: T,
    rho_bar: T,
    eta: T,
    f: &[(usize, Complex<T>)],
    sd: &dyn SpectralCarrier<T>,
    nodes: usize,
) -> Result<Complex<T>> {
    let mut acc = Complex::new(T::zero(), T::zero());
    for k in 0..nodes {
        let theta = T::TAU() * T::of_usize(k) / T::of_usize(nodes);
        acc = acc + factor_state_value(beta, rho_bar, eta, theta, f, sd)?;
    }
    Ok(acc / T::of_usize(nodes))
}

/// The condensed Weyl value rebuilt as a mixture of factor states: θ
/// uniform, and η − ρ̄ exponentially distributed with mean (ρ − ρ̄)/2.
#[derive(Clone, Debug, Serialize)]
pub struct MixtureCheck<T> {
    pub mixture: T,
    pub direct: T,
}

pub fn factor_mixture<T: Scalar>(
    state: &QuasiFreeState<T>,
    f: &[(usize, Complex<T>)],
    sd: &dyn SpectralCarrier<T>,
    theta_nodes: usize,
    eta_nodes: usize,
) -> Result<MixtureCheck<T>> {
    if state.regime != Regime::Condensed {
        return Err(Error::NotApplicable("mixture of factor states needs a condensed state".into()));
    }
    let mean = state.condensate / T::of(2.0);
    let (x, w) = gauss_laguerre::<T>(eta_nodes);
    let mut mixture = T::zero();
    for (xk, wk) in x.iter().zip(&w) {
        let eta = mean * *xk;
        mixture = mixture + *wk * theta_average(state.beta, T::zero(), eta, f, sd, theta_nodes)?.re;
    }
    Ok(MixtureCheck {
        mixture,
        direct: weyl_value(state, f, sd)?,
    })
}

/// Bessel function J₀ by its power series; adequate for |x| ≲ 20.
pub fn bessel_j0(x: f64) -> f64 {
    let q = -(x * x) / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        term *= q / (k as f64 * k as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::spectral::{build_operator, eigendecompose, OperatorKind, SpectralData};

    fn cycle(n: usize) -> SpectralData<f64> {
        let op = build_operator::<f64>(&Graph::cycle(n), OperatorKind::Laplacian, None).unwrap();
        eigendecompose(&op).unwrap()
    }

    fn c(x: f64) -> Complex<f64> {
        Complex::new(x, 0.0)
    }

    #[test]
    fn weyl_of_zero_is_one() {
        let sd = cycle(8);
        let st = QuasiFreeState::normal(1.0, 0.6).unwrap();
        assert_eq!(weyl_value(&st, &[], &sd).unwrap(), 1.0);
    }

    #[test]
    fn weyl_log_is_quadratic() {
        let sd = cycle(8);
        let st = QuasiFreeState::condensed(1.0, 0.9, 0.4).unwrap();
        let f = vec![(0, c(0.3)), (3, Complex::new(-0.2, 0.5))];
        let f2: Vec<_> = f.iter().map(|&(i, v)| (i, v * 1.7)).collect();
        let w1 = weyl_value(&st, &f, &sd).unwrap().ln();
        let w2 = weyl_value(&st, &f2, &sd).unwrap().ln();
        assert!((w2 - 1.7f64.powi(2) * w1).abs() < 1e-12);
    }

    #[test]
    fn zero_sum_has_no_condensate_factor() {
        let sd = cycle(8);
        let f = vec![(1, c(0.5)), (2, c(-0.5))];
        let cond = QuasiFreeState::condensed(1.0, 2.0, 0.5).unwrap();
        let w = weyl_value(&cond, &f, &sd).unwrap();
        assert!((w - normal_part(1.0, &f, &sd).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn theta_average_is_bessel() {
        let sd = cycle(10);
        let f = vec![(0, c(0.4)), (4, c(0.3))];
        let eta = 0.9;
        let avg = theta_average(1.0, 0.2, eta, &f, &sd, 64).unwrap();
        let x = 2.0 * (eta - 0.2f64).sqrt() * chi(&sd, &f).norm();
        let expect = bessel_j0(x) * normal_part(1.0, &f, &sd).unwrap();
        assert!((avg.re - expect).abs() < 1e-12);
        assert!(avg.im.abs() < 1e-12);
    }

    #[test]
    fn mixture_recovers_condensed_weyl() {
        let sd = cycle(10);
        let f = vec![(0, c(0.6)), (5, Complex::new(0.2, -0.4))];
        let st = QuasiFreeState::condensed(1.0, 1.3, 0.3).unwrap();
        let m = factor_mixture(&st, &f, &sd, 64, 48).unwrap();
        assert!((m.mixture - m.direct).abs() < 1e-6, "{m:?}");
    }

    #[test]
    fn j0_values() {
        assert!((bessel_j0(0.0) - 1.0).abs() < 1e-16);
        assert!((bessel_j0(2.404825557695773)).abs() < 1e-14);
    }
}
