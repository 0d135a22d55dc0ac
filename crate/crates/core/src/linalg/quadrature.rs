//! Gauss rules on [-1, 1] and [0, inf).

use crate::scalar::Scalar;

use super::tridiagonal_eigen;

/// Gauss-Legendre nodes and weights on [-1, 1], ascending.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1);
    let n = order;
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, z);
        if d != 0.0 {
            dp = d;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Gauss-Laguerre rule for the weight e^{-x} on [0, inf), built with the
/// Golub-Welsch construction.
pub fn gauss_laguerre<T: Scalar>(order: usize) -> (Vec<T>, Vec<T>) {
    let diag: Vec<T> = (0..order).map(|k| T::of_usize(2 * k + 1)).collect();
    let off: Vec<T> = (1..order).map(|k| T::of_usize(k)).collect();
    let (nodes, first) = tridiagonal_eigen(&diag, &off).expect("Laguerre Jacobi matrix");
    let weights = first.iter().map(|&v| v * v).collect();
    (nodes, weights)
}
