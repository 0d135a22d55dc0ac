//! Symmetric eigensolver: Householder tridiagonalization followed by the
//! implicit QL iteration (the EISPACK tred2/tql2 pair).

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::Matrix;

const MAX_QL_ITERATIONS: usize = 60;

/// Eigen-decomposition of a real symmetric matrix.
///
/// Returns eigenvalues in ascending order and a matrix whose columns are
/// the matching orthonormal eigenvectors.
pub fn symmetric_eigen<T: Scalar>(m: &Matrix<T>) -> Result<(Vec<T>, Matrix<T>)> {
    assert!(m.is_square(), "eigen-decomposition needs a square matrix");
    let n = m.rows();
    if n == 0 {
        return Ok((Vec::new(), Matrix::zeros(0, 0)));
    }
    let mut v: Vec<Vec<T>> = (0..n).map(|i| m.row(i).to_vec()).collect();
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    tred2(&mut v, &mut d, &mut e);
    // tql2 rotates pairs of columns; work on the transpose so that the
    // inner loop is contiguous.
    let mut w: Vec<Vec<T>> = (0..n).map(|j| (0..n).map(|i| v[i][j]).collect()).collect();
    drop(v);
    tql2(&mut w, &mut d, &mut e)?;
    Ok(sorted(d, w))
}

/// Eigenvalues and first eigenvector components of the symmetric
/// tridiagonal matrix with diagonal `diag` and off-diagonal `off`
/// (`off[i]` couples `i` and `i + 1`).
pub fn tridiagonal_eigen<T: Scalar>(diag: &[T], off: &[T]) -> Result<(Vec<T>, Vec<T>)> {
    let n = diag.len();
    assert_eq!(off.len() + 1, n.max(1));
    let mut d = diag.to_vec();
    // tql2 expects e[i] to hold the coupling between i-1 and i.
    let mut e = vec![T::zero(); n];
    for i in 1..n {
        e[i] = off[i - 1];
    }
    let mut w: Vec<Vec<T>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { T::one() } else { T::zero() }).collect())
        .collect();
    tql2(&mut w, &mut d, &mut e)?;
    let (vals, vecs) = sorted(d, w);
    let first = (0..n).map(|k| vecs[(0, k)]).collect();
    Ok((vals, first))
}


fn sorted<T: Scalar>(d: Vec<T>, w: Vec<Vec<T>>) -> (Vec<T>, Matrix<T>) {
    let n = d.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).unwrap_or(std::cmp::Ordering::Equal));
    let vals = order.iter().map(|&k| d[k]).collect();
    let vecs = Matrix::from_fn(n, n, |i, k| w[order[k]][i]);
    (vals, vecs)
}

fn tred2<T: Scalar>(v: &mut [Vec<T>], d: &mut [T], e: &mut [T]) {
    let n = d.len();
    let zero = T::zero();
    for j in 0..n {
        d[j] = v[n - 1][j];
    }
    for i in (1..n).rev() {
        let mut scale = zero;
        let mut h = zero;
        for k in 0..i {
            scale = scale + d[k].abs();
        }
        if scale == zero {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[i - 1][j];
                v[i][j] = zero;
                v[j][i] = zero;
            }
        } else {
            for k in 0..i {
                d[k] = d[k] / scale;
                h = h + d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > zero {
                g = -g;
            }
            e[i] = scale * g;
            h = h - f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = zero;
            }
            for j in 0..i {
                f = d[j];
                v[j][i] = f;
                g = e[j] + v[j][j] * f;
                for k in (j + 1)..i {
                    g = g + v[k][j] * d[k];
                    e[k] = e[k] + v[k][j] * f;
                }
                e[j] = g;
            }
            f = zero;
            for j in 0..i {
                e[j] = e[j] / h;
                f = f + e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] = e[j] - hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[k][j] = v[k][j] - (f * e[k] + g * d[k]);
                }
                d[j] = v[i - 1][j];
                v[i][j] = zero;
            }
        }
        d[i] = h;
    }
    for i in 0..n.saturating_sub(1) {
        v[n - 1][i] = v[i][i];
        v[i][i] = T::one();
        let h = d[i + 1];
        if h != zero {
            for k in 0..=i {
                d[k] = v[k][i + 1] / h;
            }
            for j in 0..=i {
                let mut g = zero;
                for k in 0..=i {
                    g = g + v[k][i + 1] * v[k][j];
                }
                for k in 0..=i {
                    v[k][j] = v[k][j] - g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[k][i + 1] = zero;
        }
    }
    for j in 0..n {
        d[j] = v[n - 1][j];
        v[n - 1][j] = zero;
    }
    v[n - 1][n - 1] = T::one();
    e[0] = zero;
}

/// Implicit QL on the tridiagonal (d, e). `w` holds eigenvectors as rows.
fn tql2<T: Scalar>(w: &mut [Vec<T>], d: &mut [T], e: &mut [T]) -> Result<()> {
    let n = d.len();
    let zero = T::zero();
    let one = T::one();
    let two = T::of(2.0);
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = zero;
    let mut f = zero;
    let mut tst1 = zero;
    let eps = T::epsilon();
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_QL_ITERATIONS {
                    return Err(Error::NoConvergence {
                        iterations: iter,
                        residual: e[l].abs().as_f64(),
                    });
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (two * e[l]);
                let mut r = p.hypot(one);
                if p < zero {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di = *di - h;
                }
                f = f + h;
                p = d[m];
                let mut c = one;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = zero;
                let mut s2 = zero;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    let (lo, hi) = w.split_at_mut(i + 1);
                    let wi = &mut lo[i];
                    let wi1 = &mut hi[0];
                    for k in 0..n {
                        let h = wi1[k];
                        wi1[k] = s * wi[k] + c * h;
                        wi[k] = c * wi[k] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] = d[l] + f;
        e[l] = zero;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual(m: &Matrix<f64>, vals: &[f64], vecs: &Matrix<f64>) -> f64 {
        let recon = &(vecs * &Matrix::diagonal(vals)) * &vecs.transpose();
        (&recon - m).frobenius_norm()
    }

    #[test]
    fn two_by_two() {
        let m = Matrix::<f64>::from_rows(2, 2, vec![1.0, -1.0, -1.0, 1.0]);
        let (vals, vecs) = symmetric_eigen(&m).unwrap();
        assert!((vals[0]).abs() < 1e-14);
        assert!((vals[1] - 2.0).abs() < 1e-14);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((vecs[(0, 0)].abs() - s).abs() < 1e-14);
        assert!((vecs[(0, 0)] - vecs[(1, 0)]).abs() < 1e-14);
        assert!((vecs[(0, 1)] + vecs[(1, 1)]).abs() < 1e-14);
    }

    #[test]
    fn one_by_one() {
        let m = Matrix::from_rows(1, 1, vec![3.5]);
        let (vals, vecs) = symmetric_eigen(&m).unwrap();
        assert_eq!(vals, vec![3.5]);
        assert_eq!(vecs[(0, 0)], 1.0);
    }

    #[test]
    fn reconstructs_dense_matrix() {
        let n = 40;
        let m = Matrix::from_fn(n, n, |i, j| {
            let (a, b) = (i.min(j) as f64, i.max(j) as f64);
            (a * 0.37 + b * 1.13).sin() + if i == j { 2.0 } else { 0.0 }
        });
        let (vals, vecs) = symmetric_eigen(&m).unwrap();
        assert!(residual(&m, &vals, &vecs) < 1e-11 * m.frobenius_norm());
        let qtq = &vecs.transpose() * &vecs;
        assert!((&qtq - &Matrix::identity(n)).max_abs() < 1e-12);
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn degenerate_spectrum() {
        let m = Matrix::<f64>::identity(6).scale(4.0);
        let (vals, vecs) = symmetric_eigen(&m).unwrap();
        assert!(vals.iter().all(|&v| (v - 4.0).abs() < 1e-14));
        assert!(residual(&m, &vals, &vecs) < 1e-13);
    }

    #[test]
    fn works_in_single_precision() {
        let m = Matrix::from_rows(3, 3, vec![2.0f32, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 2.0]);
        let (vals, _) = symmetric_eigen(&m).unwrap();
        let expect = [2.0 - 2f32.sqrt(), 2.0, 2.0 + 2f32.sqrt()];
        for (a, b) in vals.iter().zip(expect) {
            assert!((a - b).abs() < 1e-5);
        }
    }

    #[test]
    fn tridiagonal_matches_dense() {
        let diag = [1.0, 3.0, 5.0, 7.0];
        let off = [1.0, 2.0, 3.0];
        let (vals, first) = tridiagonal_eigen::<f64>(&diag, &off).unwrap();
        let m = Matrix::from_fn(4, 4, |i, j| {
            if i == j {
                diag[i]
            } else if i + 1 == j {
                off[i]
            } else if j + 1 == i {
                off[j]
            } else {
                0.0
            }
        });
        let (dv, dvec) = symmetric_eigen(&m).unwrap();
        for k in 0..4 {
            assert!((vals[k] - dv[k]).abs() < 1e-12);
            assert!((first[k].abs() - dvec[(0, k)].abs()).abs() < 1e-12);
        }
    }
}
