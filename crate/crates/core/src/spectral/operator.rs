use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::{symmetric_eigen, Matrix};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorKind {
    /// d - A, the positive discrete Laplacian.
    Laplacian,
    Adjacency,
    /// E - A + v with E the top of the spectrum of A - v.
    Schrodinger,
}

/// Symmetric one-particle operator on a finite graph.
#[derive(Clone, Debug)]
pub struct OneParticleOperator<T> {
    pub kind: OperatorKind,
    pub matrix: Matrix<T>,
    pub potential: Option<Vec<T>>,
    /// The constant E for Schrödinger operators, zero otherwise.
    pub shift: T,
    /// Edges of the underlying graph, `i < j`.
    pub edges: Vec<(usize, usize)>,
}

impl<T: Scalar> OneParticleOperator<T> {
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }
}

pub fn build_operator<T: Scalar>(
    g: &Graph,
    kind: OperatorKind,
    v: Option<&[T]>,
) -> Result<OneParticleOperator<T>> {
    g.require_connected()?;
    if let Some(v) = v {
        if v.len() != g.vertex_count() {
            return Err(Error::InvalidInput(format!(
                "potential has {} entries for {} vertices",
                v.len(),
                g.vertex_count()
            )));
        }
        if let Some(i) = v.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinitePotential(i));
        }
    }
    let edges = g.edges();
    let a = g.adjacency_matrix::<T>();
    let matrix = match kind {
        OperatorKind::Adjacency => a,
        OperatorKind::Laplacian => g.laplacian_matrix::<T>(),
        OperatorKind::Schrodinger => {
            let v: Vec<T> = match v {
                Some(v) => v.to_vec(),
                None => g.degrees().into_iter().map(T::of_usize).collect(),
            };
            let mut a_minus_v = a;
            for (i, &vi) in v.iter().enumerate() {
                a_minus_v[(i, i)] = a_minus_v[(i, i)] - vi;
            }
            let (vals, _) = symmetric_eigen(&a_minus_v)?;
            let e = *vals.last().unwrap_or(&T::zero());
            let mut h = a_minus_v.scale(-T::one());
            for i in 0..g.vertex_count() {
                h[(i, i)] = h[(i, i)] + e;
            }
            return Ok(OneParticleOperator {
                kind,
                matrix: h,
                potential: Some(v),
                shift: e,
                edges,
            });
        }
    };
    Ok(OneParticleOperator {
        kind,
        matrix,
        potential: v.map(<[T]>::to_vec),
        shift: T::zero(),
        edges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laplacian_row_sums_vanish() {
        let g = Graph::cycle(6);
        let op = build_operator::<f64>(&g, OperatorKind::Laplacian, None).unwrap();
        for i in 0..6 {
            let s: f64 = op.matrix.row(i).iter().sum();
            assert_eq!(s, 0.0);
            assert_eq!(op.matrix[(i, i)], 2.0);
        }
    }

    #[test]
    fn degree_potential_gives_laplacian() {
        let g = Graph::new(4, [(0, 1), (1, 2), (2, 3), (3, 1)]).unwrap();
        let h = build_operator::<f64>(&g, OperatorKind::Schrodinger, None).unwrap();
        let l = build_operator::<f64>(&g, OperatorKind::Laplacian, None).unwrap();
        assert!(h.shift.abs() < 1e-12);
        assert!((&h.matrix - &l.matrix).max_abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        let g = Graph::new(3, [(0, 1)]).unwrap();
        assert!(build_operator::<f64>(&g, OperatorKind::Laplacian, None).is_err());
        let g = Graph::path(3);
        let v = [0.0, f64::INFINITY, 1.0];
        assert!(matches!(
            build_operator(&g, OperatorKind::Schrodinger, Some(&v[..])),
            Err(Error::NonFinitePotential(1))
        ));
    }
}
