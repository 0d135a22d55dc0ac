use crate::scalar::Scalar;

use super::Matrix;

/// Matrix exponential by scaling and squaring of a truncated Taylor series.
///
/// Independent of the eigensolver; used to cross-check spectral matrix
/// functions.
pub fn expm<T: Scalar>(m: &Matrix<T>) -> Matrix<T> {
    assert!(m.is_square());
    let n = m.rows();
    let norm = m.frobenius_norm();
    let mut squarings = 0u32;
    let mut scaled = norm;
    while scaled > T::of(0.25) {
        scaled = scaled / T::of(2.0);
        squarings += 1;
    }
    let a = m.scale(T::of(0.5).powi(squarings as i32));
    let mut result = Matrix::identity(n);
    let mut term = Matrix::identity(n);
    for k in 1..=24 {
        term = (&term * &a).scale(T::one() / T::of_usize(k));
        result = &result + &term;
        if term.max_abs() <= T::epsilon() * result.max_abs() {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_of_diagonal() {
        let m = Matrix::<f64>::diagonal(&[0.0, -2.0, 1.5]);
        let e = expm(&m);
        assert!((e[(0, 0)] - 1.0).abs() < 1e-14);
        assert!((e[(1, 1)] - (-2.0f64).exp()).abs() < 1e-14);
        assert!((e[(2, 2)] - 1.5f64.exp()).abs() < 1e-13);
    }

    #[test]
    fn exp_of_rotation_generator() {
        let t = 0.7f64;
        let m = Matrix::<f64>::from_rows(2, 2, vec![0.0, -t, t, 0.0]);
        let e = expm(&m);
        assert!((e[(0, 0)] - t.cos()).abs() < 1e-14);
        assert!((e[(1, 0)] - t.sin()).abs() < 1e-14);
    }
}
