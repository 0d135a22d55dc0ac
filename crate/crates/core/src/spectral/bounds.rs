//! Trace inequalities for heat kernels and the ground-state Dirichlet form.

use std::collections::HashMap;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{ball, Exhaustion, Graph, LocalGraph, Site};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

use super::{matfunc, OneParticleOperator, SpectralData};

/// Matrix elements of functions of the infinite-volume Laplacian −Δ_Γ.
pub trait InfiniteVolume: Sync {
    /// `(δ_s, F(−Δ_Γ) δ_s)`.
    fn diagonal(&self, s: &Site, f: &dyn Fn(f64) -> f64) -> Result<f64>;

    /// `Σ_{t ~ s} (δ_t, F(−Δ_Γ) δ_s)`, i.e. `(A F(−Δ_Γ))_{ss}`.
    fn neighbor_sum(&self, s: &Site, f: &dyn Fn(f64) -> f64) -> Result<f64>;

    /// Sites with equal class have equal matrix elements.
    fn translation_class(&self, _s: &Site) -> Option<usize> {
        None
    }

    /// False when the values are only lower bounds.
    fn exact(&self) -> bool;
}

/// Infinite-volume elements approximated on a ball around each site with
/// the full degrees kept on the diagonal (Dirichlet truncation). For
/// positive F these are lower bounds of the infinite-volume values.
pub struct DirichletInfinite {
    base: Arc<dyn LocalGraph>,
    buffer: usize,
}

impl DirichletInfinite {
    pub fn new(base: Arc<dyn LocalGraph>, buffer: usize) -> Self {
        Self { base, buffer }
    }

    fn local(&self, s: &Site, f: &dyn Fn(f64) -> f64) -> Result<(Vec<usize>, Matrix<f64>)> {
        let st = ball(self.base.as_ref(), s, self.buffer.max(1));
        let n = st.vertex_count();
        let mut h = st.graph.adjacency_matrix::<f64>().scale(-1.0);
        for i in 0..n {
            h[(i, i)] = st.full_degree[i] as f64;
        }
        let sd = SpectralData::of_matrix(&h)?;
        let neighbors = st.graph.neighbors(0).to_vec();
        Ok((neighbors, matfunc(&sd, f)?))
    }
}

impl InfiniteVolume for DirichletInfinite {
    fn diagonal(&self, s: &Site, f: &dyn Fn(f64) -> f64) -> Result<f64> {
        Ok(self.local(s, f)?.1[(0, 0)])
    }

    fn neighbor_sum(&self, s: &Site, f: &dyn Fn(f64) -> f64) -> Result<f64> {
        let (nb, m) = self.local(s, f)?;
        Ok(nb.iter().map(|&t| m[(t, 0)]).sum())
    }

    fn exact(&self) -> bool {
        false
    }
}

/// Exact matrix elements on a finite base graph, whose sites carry the
/// vertex index in `orbit`.
pub struct DenseInfinite {
    graph: Graph,
    sd: SpectralData<f64>,
}

impl DenseInfinite {
    pub fn new(graph: &Graph) -> Result<Self> {
        let sd = SpectralData::of_matrix(&graph.laplacian_matrix::<f64>())?;
        Ok(Self {
            graph: graph.clone(),
            sd,
        })
    }

    fn element(&self, i: usize, j: usize, f: &dyn Fn(f64) -> f64) -> f64 {
        let v = &self.sd.eigenvectors;
        (0..self.sd.eigenvalues.len())
            .map(|k| f(self.sd.eigenvalues[k]) * v[(i, k)] * v[(j, k)])
            .sum()
    }

    fn index(&self, s: &Site) -> Result<usize> {
        if !s.cell.is_empty() || s.orbit >= self.graph.vertex_count() {
            return Err(Error::InvalidInput(format!("site {s:?} is not a vertex of the base graph")));
        }
        Ok(s.orbit)
    }
}

impl InfiniteVolume for DenseInfinite {
    fn diagonal(&self, s: &Site, f: &dyn Fn(f64) -> f64) -> Result<f64> {
        let i = self.index(s)?;
        Ok(self.element(i, i, f))
    }

    fn neighbor_sum(&self, s: &Site, f: &dyn Fn(f64) -> f64) -> Result<f64> {
        let i = self.index(s)?;
        Ok(self.graph.neighbors(i).iter().map(|&t| self.element(t, i, f)).sum())
    }

    fn exact(&self) -> bool {
        true
    }
}

/// Members of the heat-trace inequality for one stage.
#[derive(Clone, Debug, Serialize)]
pub struct HeatTraceBounds {
    pub stage: usize,
    pub beta: f64,
    pub volume: usize,
    pub boundary_size: usize,
    /// tr e^{βΔ_n}.
    pub lhs: f64,
    /// tr(e^{βΔ_n} P_∂).
    pub boundary_trace: f64,
    /// tr exp(β P_int Δ P_int).
    pub interior_trace: f64,
    /// tr(P_∂ β A_n e^{βΔ_n} P_∂).
    pub hopping_trace_stage: f64,
    /// tr(P_∂ β A e^{βΔ_Γ} P_∂).
    pub hopping_trace_infinite: f64,
    /// tr(P_n e^{βΔ_Γ} P_n).
    pub projected_infinite_trace: f64,
    /// boundary + interior + stage hopping.
    pub intermediate_bound: f64,
    /// stage hopping + interior, the first bound as printed.
    pub first_bound: f64,
    /// infinite hopping + boundary + projected infinite trace.
    pub final_bound: f64,
    pub infinite_exact: bool,
}

impl HeatTraceBounds {
    pub fn intermediate_holds(&self, slack: f64) -> bool {
        self.lhs <= self.intermediate_bound + slack
    }

    pub fn first_holds(&self, slack: f64) -> bool {
        self.lhs <= self.first_bound + slack
    }

    pub fn final_holds(&self, slack: f64) -> bool {
        self.lhs <= self.final_bound + slack
    }
}

/// Heat-trace comparison between a stage and the infinite graph.
pub fn heat_trace_bounds(
    exh: &Exhaustion,
    n: usize,
    beta: f64,
    infinite: &dyn InfiniteVolume,
) -> Result<HeatTraceBounds> {
    if beta <= 0.0 {
        return Err(Error::InvalidInput("beta must be positive".into()));
    }
    let stage = exh.stage(n)?;
    let lap = stage.graph.laplacian_matrix::<f64>();
    let sd = SpectralData::of_matrix(&lap)?;
    let heat = matfunc(&sd, |x| (-beta * x).exp())?;
    let lhs = heat.trace();
    let boundary = &stage.boundary;
    let boundary_trace: f64 = boundary.iter().map(|&b| heat[(b, b)]).sum();
    let interior = stage.interior();
    let interior_trace = if interior.is_empty() {
        0.0
    } else {
        SpectralData::of_matrix(&lap.submatrix(&interior))?.trace_of(|x| (-beta * x).exp(), false)
    };
    let hopping_trace_stage: f64 = beta
        * boundary
            .iter()
            .map(|&b| stage.graph.neighbors(b).iter().map(|&k| heat[(k, b)]).sum::<f64>())
            .sum::<f64>();

    let kernel = |x: f64| (-beta * x).exp();
    let mut diag_cache: HashMap<usize, f64> = HashMap::new();
    let mut hop_cache: HashMap<usize, f64> = HashMap::new();
    let mut projected_infinite_trace = 0.0;
    let mut is_boundary = vec![false; stage.vertex_count()];
    for &b in boundary {
        is_boundary[b] = true;
    }
    let mut hopping_trace_infinite = 0.0;
    for (i, s) in stage.sites.iter().enumerate() {
        let class = infinite.translation_class(s);
        let d = match class.and_then(|c| diag_cache.get(&c).copied()) {
            Some(v) => v,
            None => {
                let v = infinite.diagonal(s, &kernel)?;
                if let Some(c) = class {
                    diag_cache.insert(c, v);
                }
                v
            }
        };
        projected_infinite_trace += d;
        if is_boundary[i] {
            let h = match class.and_then(|c| hop_cache.get(&c).copied()) {
                Some(v) => v,
                None => {
                    let v = infinite.neighbor_sum(s, &kernel)?;
                    if let Some(c) = class {
                        hop_cache.insert(c, v);
                    }
                    v
                }
            };
            hopping_trace_infinite += beta * h;
        }
    }
    Ok(HeatTraceBounds {
        stage: n,
        beta,
        volume: stage.vertex_count(),
        boundary_size: boundary.len(),
        lhs,
        boundary_trace,
        interior_trace,
        hopping_trace_stage,
        hopping_trace_infinite,
        projected_infinite_trace,
        intermediate_bound: boundary_trace + interior_trace + hopping_trace_stage,
        first_bound: hopping_trace_stage + interior_trace,
        final_bound: hopping_trace_infinite + boundary_trace + projected_infinite_trace,
        infinite_exact: infinite.exact(),
    })
}

/// The three members of the nested-compression trace chain.
#[derive(Clone, Debug, Serialize)]
pub struct NestingTraces {
    /// tr exp(β P_{W₁} Δ P_{W₁}) on l²(W₁).
    pub inner: f64,
    /// tr exp(β P_{W₂} Δ P_{W₂}) on l²(W₂).
    pub outer: f64,
    /// tr(P_{W₂} e^{βΔ} P_{W₂}).
    pub full: f64,
}

impl NestingTraces {
    pub fn holds(&self, slack: f64) -> bool {
        self.inner <= self.outer + slack && self.outer <= self.full + slack
    }
}

pub fn nesting_traces(g: &Graph, w1: &[usize], w2: &[usize], beta: f64) -> Result<NestingTraces> {
    let in_w2: std::collections::HashSet<usize> = w2.iter().copied().collect();
    if let Some(&i) = w1.iter().find(|i| !in_w2.contains(i)) {
        return Err(Error::InvalidInput(format!("vertex {i} of W1 is not in W2")));
    }
    let lap = g.laplacian_matrix::<f64>();
    let heat = |m: &Matrix<f64>| -> Result<f64> {
        if m.rows() == 0 {
            return Ok(0.0);
        }
        Ok(SpectralData::of_matrix(m)?.trace_of(|x| (-beta * x).exp(), false))
    };
    let inner = heat(&lap.submatrix(w1))?;
    let outer = heat(&lap.submatrix(w2))?;
    let diag = SpectralData::of_matrix(&lap)?.diagonal_of(|x| (-beta * x).exp());
    let full = w2.iter().map(|&i| diag[i]).sum();
    Ok(NestingTraces { inner, outer, full })
}

#[derive(Clone, Debug, Serialize)]
pub struct DirichletCheck<T> {
    /// (fΩ, h fΩ).
    pub form: T,
    /// Σ_{(i,j)∈E} |f(i) − f(j)|² Ω(i) Ω(j).
    pub edge_sum: T,
}

impl<T: Scalar> DirichletCheck<T> {
    pub fn agrees(&self, tol: T) -> bool {
        (self.form - self.edge_sum).abs() <= tol * (T::one() + self.form.abs())
    }
}

/// Ground-state representation of the quadratic form of `op`.
pub fn dirichlet_form<T: Scalar>(
    op: &OneParticleOperator<T>,
    sd: &SpectralData<T>,
    f: &[T],
) -> Result<DirichletCheck<T>> {
    let n = op.dim();
    if f.len() != n {
        return Err(Error::InvalidInput(format!("test function has {} entries, need {n}", f.len())));
    }
    let omega = sd.ground_state();
    if let Some((vertex, &value)) = omega
        .iter()
        .enumerate()
        .find(|(_, &w)| w <= T::zero())
    {
        return Err(Error::NonPositiveGroundState {
            vertex,
            value: value.as_f64(),
        });
    }
    let u: Vec<T> = f.iter().zip(&omega).map(|(&a, &b)| a * b).collect();
    let hu = op.matrix.matvec(&u);
    let form = u.iter().zip(&hu).map(|(&a, &b)| a * b).sum();
    let edge_sum = op
        .edges
        .iter()
        .map(|&(i, j)| {
            let d = f[i] - f[j];
            d * d * omega[i] * omega[j]
        })
        .sum();
    Ok(DirichletCheck { form, edge_sum })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::PeriodicLattice;
    use crate::spectral::{build_operator, eigendecompose, OperatorKind};

    #[test]
    fn nesting_equal_sets() {
        let g = Graph::cycle(6);
        let w = [0, 1, 2];
        let t = nesting_traces(&g, &w, &w, 0.8).unwrap();
        assert!((t.inner - t.outer).abs() < 1e-14);
        assert!(t.holds(1e-12));
    }

    #[test]
    fn dirichlet_form_laplacian() {
        let g = Graph::cycle(5);
        let op = build_operator::<f64>(&g, OperatorKind::Schrodinger, None).unwrap();
        let sd = eigendecompose(&op).unwrap();
        let f = [1.0, -0.5, 0.25, 2.0, 0.0];
        let c = dirichlet_form(&op, &sd, &f).unwrap();
        // Ω ≡ 1/√5 here, so the edge sum carries a factor 1/5.
        let plain: f64 = g.edges().iter().map(|&(i, j)| (f[i] - f[j]).powi(2)).sum();
        assert!((c.edge_sum - plain / 5.0).abs() < 1e-12);
        assert!(c.agrees(1e-10));
        let constant = dirichlet_form(&op, &sd, &[3.0; 5]).unwrap();
        assert!(constant.form.abs() < 1e-12 && constant.edge_sum.abs() < 1e-12);
    }

    #[test]
    fn dirichlet_lower_bound_on_square_lattice() {
        let base: Arc<dyn LocalGraph> = Arc::new(PeriodicLattice::hypercubic(2));
        let near = DirichletInfinite::new(base.clone(), 3);
        let far = DirichletInfinite::new(base, 6);
        let f = |x: f64| (-0.5 * x).exp();
        let s = Site::at_origin(2, 0);
        let a = near.diagonal(&s, &f).unwrap();
        let b = far.diagonal(&s, &f).unwrap();
        assert!(a <= b + 1e-15);
    }
}
