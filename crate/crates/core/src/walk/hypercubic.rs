//! Exact return probabilities of the simple walk on ℤ^ν.
//!
//! A step picks one of ν axes uniformly and then a direction, so
//! q_N = Σ multinomial(N; n_1..n_ν) ν^{-N} Π c(n_k) with c(n) = C(n, n/2) 2^{-n}
//! the one-dimensional return probability. Peeling off one axis at a time
//! gives a convolution recursion, evaluated in the log domain.

use rayon::prelude::*;

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut lf = vec![0.0; n + 1];
    for k in 1..=n {
        lf[k] = lf[k - 1] + (k as f64).ln();
    }
    lf
}

/// q_N(0) on ℤ^ν for N = 0..=n_max.
pub fn hypercubic_returns(nu: usize, n_max: usize) -> Vec<f64> {
    assert!(nu >= 1);
    let lf = ln_factorials(n_max);
    let ln2 = std::f64::consts::LN_2;
    // ln c(n) for even n.
    let ln_c: Vec<f64> = (0..=n_max)
        .map(|n| {
            if n % 2 == 1 {
                f64::NEG_INFINITY
            } else {
                lf[n] - 2.0 * lf[n / 2] - n as f64 * ln2
            }
        })
        .collect();
    let mut ln_f = ln_c.clone();
    for m in 1..nu {
        let a = (1.0 / (m as f64 + 1.0)).ln();
        let b = (m as f64 / (m as f64 + 1.0)).ln();
        ln_f = (0..=n_max)
            .into_par_iter()
            .map(|n| {
                if n % 2 == 1 {
                    return f64::NEG_INFINITY;
                }
                let terms = (0..=n).step_by(2).map(|k| {
                    lf[n] - lf[k] - lf[n - k] + k as f64 * a + (n - k) as f64 * b + ln_c[k]
                        + ln_f[n - k]
                });
                let terms: Vec<f64> = terms.collect();
                let top = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                top + terms.iter().map(|t| (t - top).exp()).sum::<f64>().ln()
            })
            .collect();
    }
    ln_f.into_iter().map(f64::exp).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_values() {
        let q1 = hypercubic_returns(1, 6);
        assert!((q1[2] - 0.5).abs() < 1e-15);
        assert!((q1[4] - 0.375).abs() < 1e-15);
        assert_eq!(q1[3], 0.0);
        let q2 = hypercubic_returns(2, 4);
        assert!((q2[2] - 0.25).abs() < 1e-15);
        // ℤ²: q_{2n} = C(2n,n)^2 / 16^n.
        assert!((q2[4] - 36.0 / 256.0).abs() < 1e-15);
        let q3 = hypercubic_returns(3, 2);
        assert!((q3[2] - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn z2_closed_form() {
        let q = hypercubic_returns(2, 400);
        let c = hypercubic_returns(1, 400);
        for n in (0..=400).step_by(2) {
            assert!((q[n] / (c[n] * c[n]) - 1.0).abs() < 1e-11, "n = {n}");
        }
    }
}
