use crate::error::{Error, Result};
use crate::graph::{ball_within, Graph, LocalGraph, Site, Stage};
use crate::scalar::Weight;

/// Default cap on the number of vertices materialized for one walk.
pub const DEFAULT_VERTEX_BUDGET: usize = 8_000_000;

/// A finite piece of a graph in breadth-first order from a start vertex,
/// carrying the degrees of the ambient graph. Mass that would step outside
/// the piece is lost, so the evolution is exact as long as every path that
/// matters stays inside.
#[derive(Clone, Debug)]
pub struct WalkDomain {
    sites: Vec<Site>,
    offsets: Vec<usize>,
    targets: Vec<u32>,
    degree: Vec<usize>,
    dist: Vec<usize>,
    /// layer_end[r] = number of vertices at distance <= r.
    layer_end: Vec<usize>,
    /// Position of each vertex of the source graph (usize::MAX if dropped).
    position: Vec<usize>,
}

impl WalkDomain {
    /// Ball of radius `radius` around `start` in an infinite (or finite) base.
    pub fn ball(base: &dyn LocalGraph, start: &Site, radius: usize, budget: usize) -> Result<Self> {
        let stage = ball_within(base, start, radius, budget)?;
        Ok(Self::from_stage(&stage, 0))
    }

    /// A stage with its ambient degrees, re-ordered from `start`.
    pub fn from_stage(stage: &Stage, start: usize) -> Self {
        Self::build(&stage.graph, &stage.full_degree, Some(&stage.sites), start)
    }

    /// A finite graph on its own: degrees are the graph's own.
    pub fn from_graph(graph: &Graph, start: usize) -> Self {
        Self::build(graph, &graph.degrees(), None, start)
    }

    fn build(graph: &Graph, degree: &[usize], sites: Option<&[Site]>, start: usize) -> Self {
        let n = graph.vertex_count();
        let d = graph.distances_from(&[start]);
        let mut order: Vec<usize> = (0..n).filter(|&v| d[v] != usize::MAX).collect();
        order.sort_by_key(|&v| (d[v], v));
        let mut position = vec![usize::MAX; n];
        for (k, &v) in order.iter().enumerate() {
            position[v] = k;
        }
        let mut offsets = Vec::with_capacity(order.len() + 1);
        let mut targets = Vec::new();
        offsets.push(0);
        for &v in &order {
            targets.extend(graph.neighbors(v).iter().map(|&w| position[w] as u32));
            offsets.push(targets.len());
        }
        let dist: Vec<usize> = order.iter().map(|&v| d[v]).collect();
        let radius = dist.last().copied().unwrap_or(0);
        let mut layer_end = vec![0; radius + 1];
        for &r in &dist {
            layer_end[r] += 1;
        }
        for r in 1..=radius {
            layer_end[r] += layer_end[r - 1];
        }
        Self {
            sites: match sites {
                Some(s) => order.iter().map(|&v| s[v].clone()).collect(),
                None => order.iter().map(|&v| Site::new(Vec::new(), v)).collect(),
            },
            offsets,
            targets,
            degree: order.iter().map(|&v| degree[v]).collect(),
            dist,
            layer_end,
            position,
        }
    }

    pub fn len(&self) -> usize {
        self.degree.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degree.is_empty()
    }

    pub fn radius(&self) -> usize {
        self.layer_end.len() - 1
    }

    pub fn site(&self, k: usize) -> &Site {
        &self.sites[k]
    }

    pub fn index_of(&self, s: &Site) -> Option<usize> {
        self.sites.iter().position(|t| t == s)
    }

    /// Position of a vertex of the source graph or stage.
    pub fn position_of(&self, v: usize) -> Option<usize> {
        self.position.get(v).copied().filter(|&k| k != usize::MAX)
    }

    pub fn degree(&self, k: usize) -> usize {
        self.degree[k]
    }

    pub fn distance(&self, k: usize) -> usize {
        self.dist[k]
    }

    pub fn neighbors(&self, k: usize) -> &[u32] {
        &self.targets[self.offsets[k]..self.offsets[k + 1]]
    }

    /// True when no vertex of the domain has a neighbour outside it.
    pub fn is_closed(&self) -> bool {
        (0..self.len()).all(|k| self.neighbors(k).len() == self.degree[k])
    }

    fn layer_end(&self, r: usize) -> usize {
        self.layer_end[r.min(self.radius())]
    }

    /// Largest number of steps for which returns to the start are exact.
    pub fn exact_return_steps(&self) -> usize {
        if self.is_closed() {
            usize::MAX
        } else {
            2 * self.radius() + 1
        }
    }

    /// Simple-walk weights 1/d(x).
    pub fn walk_weights<W: Weight>(&self) -> Vec<W> {
        self.degree
            .iter()
            .map(|&d| W::one() / W::from_count(d))
            .collect()
    }

    /// Weights 1/(d(x) + shift), for the Neumann series of (shift − Δ)^{-1}.
    pub fn shifted_weights(&self, shift: f64) -> Vec<f64> {
        self.degree.iter().map(|&d| 1.0 / (d as f64 + shift)).collect()
    }

    /// Evolves the unit mass at the start vertex by u ↦ uWA, where W is the
    /// diagonal `weights`, for `steps` steps. Records the mass at each of
    /// `targets` after every step (index 0 is the initial mass). With
    /// `absorb = Some(a)`, mass arriving at `a` is recorded and removed.
    pub fn evolve<W: Weight>(
        &self,
        weights: &[W],
        steps: usize,
        targets: &[usize],
        absorb: Option<usize>,
    ) -> Vec<Vec<W>> {
        assert_eq!(weights.len(), self.len());
        let n = self.len();
        let mut u = vec![W::zero(); n];
        let mut v = vec![W::zero(); n];
        u[0] = W::one();
        let mut rec: Vec<Vec<W>> = targets
            .iter()
            .map(|&t| {
                let mut r = Vec::with_capacity(steps + 1);
                r.push(u[t].clone());
                r
            })
            .collect();
        // Mass farther than (steps − t) + reach from the start can no longer
        // reach a target, so the active region shrinks after the midpoint.
        // Entries written beyond dst_end are never read again.
        let reach = targets.iter().map(|&t| self.distance(t)).max().unwrap_or(0);
        let live = |t: usize| t.min((steps - t) + reach);
        for t in 1..=steps {
            let src_end = self.layer_end(live(t - 1));
            let dst_end = self.layer_end(live(t));
            for x in v[..dst_end].iter_mut() {
                *x = W::zero();
            }
            for x in 0..src_end {
                if u[x].is_zero() {
                    continue;
                }
                let m = u[x].clone() * weights[x].clone();
                for &y in self.neighbors(x) {
                    let y = y as usize;
                    v[y] = v[y].clone() + m.clone();
                }
            }
            std::mem::swap(&mut u, &mut v);
            for (r, &tg) in rec.iter_mut().zip(targets) {
                r.push(u[tg].clone());
            }
            if let Some(a) = absorb {
                u[a] = W::zero();
            }
        }
        rec
    }

    /// Return probabilities q_N and first-return probabilities p_N at the
    /// start vertex for N = 0..=n_max, both by direct evolution.
    pub fn return_series<W: Weight>(&self, n_max: usize) -> Result<(Vec<W>, Vec<W>)> {
        if n_max > self.exact_return_steps() {
            return Err(Error::StageTooSmall {
                steps: n_max,
                needed: n_max.div_ceil(2),
                available: self.radius(),
            });
        }
        let w = self.walk_weights::<W>();
        let q = self.evolve(&w, n_max, &[0], None).remove(0);
        let mut p = self.evolve(&w, n_max, &[0], Some(0)).remove(0);
        p[0] = W::zero();
        Ok((q, p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::PeriodicLattice;
    use num_rational::Ratio;

    #[test]
    fn z1_exact_rationals() {
        let lat = PeriodicLattice::hypercubic(1);
        let dom = WalkDomain::ball(&lat, &Site::at_origin(lat.nu(), 0), 3, 100).unwrap();
        let (q, p) = dom.return_series::<Ratio<i64>>(6).unwrap();
        assert_eq!(q[1], Ratio::from_integer(0));
        assert_eq!(q[2], Ratio::new(1, 2));
        assert_eq!(q[4], Ratio::new(3, 8));
        assert_eq!(q[6], Ratio::new(5, 16));
        assert_eq!(p[2], Ratio::new(1, 2));
        assert_eq!(p[4], Ratio::new(1, 8));
    }

    #[test]
    fn radius_limits_steps() {
        let lat = PeriodicLattice::hypercubic(2);
        let dom = WalkDomain::ball(&lat, &Site::at_origin(lat.nu(), 0), 2, 100).unwrap();
        assert!(dom.return_series::<f64>(5).is_ok());
        assert!(matches!(
            dom.return_series::<f64>(6),
            Err(Error::StageTooSmall { .. })
        ));
    }

    #[test]
    fn closed_graph_conserves_mass() {
        let g = Graph::cycle(7);
        let dom = WalkDomain::from_graph(&g, 3);
        assert!(dom.is_closed());
        let w = dom.walk_weights::<f64>();
        let all: Vec<usize> = (0..7).collect();
        let rec = dom.evolve(&w, 20, &all, None);
        for t in 0..=20 {
            let s: f64 = rec.iter().map(|r| r[t]).sum();
            assert!((s - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn budget_is_enforced() {
        let lat = PeriodicLattice::hypercubic(3);
        assert!(matches!(
            WalkDomain::ball(&lat, &Site::at_origin(lat.nu(), 0), 10, 50),
            Err(Error::VertexBudget { .. })
        ));
    }
}
