use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::Graph;

/// A vertex of a lattice-like infinite graph: a cell translate and an
/// orbit (fundamental-domain vertex). Finite graphs use an empty cell.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Site {
    pub cell: Vec<i64>,
    pub orbit: usize,
}

impl Site {
    pub fn new(cell: Vec<i64>, orbit: usize) -> Self {
        Self { cell, orbit }
    }

    pub fn at_origin(nu: usize, orbit: usize) -> Self {
        Self {
            cell: vec![0; nu],
            orbit,
        }
    }

    /// Sup norm of the cell coordinate.
    pub fn cell_radius(&self) -> u64 {
        self.cell.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0)
    }
}

/// Bridge edge `(a, b, k)`: vertex `(a, j)` is joined to `(b, j + k)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "(usize, usize, Vec<i64>)", into = "(usize, usize, Vec<i64>)")]
pub struct Bridge {
    pub a: usize,
    pub b: usize,
    pub offset: Vec<i64>,
}

impl Bridge {
    pub fn new(a: usize, b: usize, offset: Vec<i64>) -> Self {
        Self { a, b, offset }
    }

    fn reversed(&self) -> Self {
        Self {
            a: self.b,
            b: self.a,
            offset: self.offset.iter().map(|k| -k).collect(),
        }
    }
}

impl From<(usize, usize, Vec<i64>)> for Bridge {
    fn from((a, b, offset): (usize, usize, Vec<i64>)) -> Self {
        Self { a, b, offset }
    }
}

impl From<Bridge> for (usize, usize, Vec<i64>) {
    fn from(b: Bridge) -> Self {
        (b.a, b.b, b.offset)
    }
}

/// Periodic lattice generated by a fundamental domain and ℤ^ν translations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLattice", into = "RawLattice")]
pub struct PeriodicLattice {
    nu: usize,
    fundamental_vertices: usize,
    internal_edges: Vec<(usize, usize)>,
    bridge_edges: Vec<Bridge>,
    /// Neighbour list per orbit: (orbit, offset).
    star: Vec<Vec<(usize, Vec<i64>)>>,
}

#[derive(Serialize, Deserialize)]
struct RawLattice {
    nu: usize,
    fundamental_vertices: usize,
    #[serde(default)]
    internal_edges: Vec<(usize, usize)>,
    #[serde(default)]
    bridge_edges: Vec<Bridge>,
}

impl TryFrom<RawLattice> for PeriodicLattice {
    type Error = Error;
    fn try_from(r: RawLattice) -> Result<Self> {
        PeriodicLattice::new(r.nu, r.fundamental_vertices, r.internal_edges, r.bridge_edges)
    }
}

impl From<PeriodicLattice> for RawLattice {
    fn from(l: PeriodicLattice) -> Self {
        RawLattice {
            nu: l.nu,
            fundamental_vertices: l.fundamental_vertices,
            internal_edges: l.internal_edges,
            bridge_edges: l.bridge_edges,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Free,
    Periodic,
}

/// Finite truncation of a periodic lattice to the cells `|j_i| <= n`.
///
/// Vertex index is `cell_index * |V₀| + orbit`, with cells enumerated in
/// row-major order over the shifted coordinates `j_i + n`.
#[derive(Clone, Debug)]
pub struct Truncation {
    pub graph: Graph,
    pub sites: Vec<Site>,
    pub n: usize,
    pub boundary: Boundary,
}

impl Truncation {
    pub fn side(&self) -> usize {
        2 * self.n + 1
    }
}

impl PeriodicLattice {
    pub fn new(
        nu: usize,
        fundamental_vertices: usize,
        internal_edges: Vec<(usize, usize)>,
        bridge_edges: Vec<Bridge>,
    ) -> Result<Self> {
        if nu == 0 {
            return Err(Error::InvalidLattice("nu must be at least 1".into()));
        }
        if fundamental_vertices == 0 {
            return Err(Error::InvalidLattice("empty fundamental domain".into()));
        }
        let n0 = fundamental_vertices;
        let mut seen: HashSet<(usize, usize, Vec<i64>)> = HashSet::new();
        for &(a, b) in &internal_edges {
            if a >= n0 || b >= n0 {
                return Err(Error::InvalidLattice(format!("internal edge ({a}, {b}) out of range")));
            }
            if a == b {
                return Err(Error::InvalidLattice(format!("internal self-loop at {a}")));
            }
            if !seen.insert((a.min(b), a.max(b), vec![0; nu])) {
                return Err(Error::InvalidLattice(format!("repeated internal edge ({a}, {b})")));
            }
        }
        for br in &bridge_edges {
            if br.a >= n0 || br.b >= n0 {
                return Err(Error::InvalidLattice(format!(
                    "bridge ({}, {}) out of range",
                    br.a, br.b
                )));
            }
            if br.offset.len() != nu {
                return Err(Error::InvalidLattice(format!(
                    "bridge offset {:?} has dimension {}, expected {nu}",
                    br.offset,
                    br.offset.len()
                )));
            }
            if br.offset.iter().all(|&k| k == 0) {
                return Err(Error::InvalidLattice(
                    "bridge with zero offset; list it as an internal edge".into(),
                ));
            }
            let r = br.reversed();
            let key = if (br.a, br.b, &br.offset) <= (r.a, r.b, &r.offset) {
                (br.a, br.b, br.offset.clone())
            } else {
                (r.a, r.b, r.offset)
            };
            if !seen.insert(key) {
                return Err(Error::InvalidLattice(format!(
                    "repeated bridge ({}, {}, {:?})",
                    br.a, br.b, br.offset
                )));
            }
        }
        let mut star = vec![Vec::new(); n0];
        for &(a, b) in &internal_edges {
            star[a].push((b, vec![0; nu]));
            star[b].push((a, vec![0; nu]));
        }
        for br in &bridge_edges {
            star[br.a].push((br.b, br.offset.clone()));
            star[br.b].push((br.a, br.offset.iter().map(|k| -k).collect()));
        }
        Ok(Self {
            nu,
            fundamental_vertices,
            internal_edges,
            bridge_edges,
            star,
        })
    }

    /// ℤ^ν nearest-neighbour lattice with a one-vertex cell.
    pub fn hypercubic(nu: usize) -> Self {
        let bridges = (0..nu)
            .map(|axis| {
                let mut k = vec![0; nu];
                k[axis] = 1;
                Bridge::new(0, 0, k)
            })
            .collect();
        Self::new(nu, 1, Vec::new(), bridges).expect("hypercubic lattice is valid")
    }

    /// Two-leg ladder: rungs inside the cell, legs along the single axis.
    pub fn ladder() -> Self {
        Self::new(
            1,
            2,
            vec![(0, 1)],
            vec![Bridge::new(0, 0, vec![1]), Bridge::new(1, 1, vec![1])],
        )
        .expect("ladder is valid")
    }

    /// ℤ³ described with a two-vertex cell doubled along the first axis.
    pub fn cubic_two_cell() -> Self {
        Self::new(
            3,
            2,
            vec![(0, 1)],
            vec![
                Bridge::new(1, 0, vec![1, 0, 0]),
                Bridge::new(0, 0, vec![0, 1, 0]),
                Bridge::new(0, 0, vec![0, 0, 1]),
                Bridge::new(1, 1, vec![0, 1, 0]),
                Bridge::new(1, 1, vec![0, 0, 1]),
            ],
        )
        .expect("two-cell cubic lattice is valid")
    }

    /// Disconnected two-orbit lattice in ν = 2 whose band top is attained
    /// both at p = 0 and at p = (π, 0).
    pub fn split_square() -> Self {
        Self::new(
            2,
            2,
            Vec::new(),
            vec![
                Bridge::new(0, 1, vec![1, 0]),
                Bridge::new(1, 0, vec![1, 0]),
                Bridge::new(0, 0, vec![0, 1]),
                Bridge::new(1, 1, vec![0, 1]),
            ],
        )
        .expect("split lattice is valid")
    }

    #[inline]
    pub fn nu(&self) -> usize {
        self.nu
    }

    #[inline]
    pub fn fundamental_vertices(&self) -> usize {
        self.fundamental_vertices
    }

    pub fn internal_edges(&self) -> &[(usize, usize)] {
        &self.internal_edges
    }

    pub fn bridge_edges(&self) -> &[Bridge] {
        &self.bridge_edges
    }

    /// Neighbours of orbit `a` in cell 0 as `(orbit, cell offset)`.
    pub fn star(&self, a: usize) -> &[(usize, Vec<i64>)] {
        &self.star[a]
    }

    /// Degree of orbit `a` in the infinite graph.
    pub fn degree(&self, a: usize) -> usize {
        self.star[a].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.fundamental_vertices).map(|a| self.degree(a)).collect()
    }

    pub fn max_degree(&self) -> usize {
        self.degrees().into_iter().max().unwrap_or(0)
    }

    pub fn neighbors(&self, s: &Site, out: &mut Vec<Site>) {
        out.clear();
        for (b, k) in &self.star[s.orbit] {
            let cell = s.cell.iter().zip(k).map(|(c, k)| c + k).collect();
            out.push(Site { cell, orbit: *b });
        }
    }

    fn reach(&self) -> usize {
        self.bridge_edges
            .iter()
            .flat_map(|b| b.offset.iter().map(|k| k.unsigned_abs()))
            .max()
            .unwrap_or(0) as usize
    }

    /// Whether the infinite graph is connected, judged on a free box wide
    /// enough to contain several bridge lengths.
    pub fn is_connected(&self) -> bool {
        let n = (2 * self.reach()).max(2);
        self.truncate(n, Boundary::Free)
            .map(|t| t.graph.is_connected())
            .unwrap_or(false)
    }

    pub fn require_connected(&self) -> Result<()> {
        if self.is_connected() {
            Ok(())
        } else {
            Err(Error::InvalidLattice("lattice graph is disconnected".into()))
        }
    }

    fn cells(&self, n: usize) -> impl Iterator<Item = Vec<i64>> + '_ {
        let side = 2 * n + 1;
        let total = side.pow(self.nu as u32);
        let nu = self.nu;
        (0..total).map(move |mut idx| {
            let mut cell = vec![0i64; nu];
            for axis in (0..nu).rev() {
                cell[axis] = (idx % side) as i64 - n as i64;
                idx /= side;
            }
            cell
        })
    }

    /// Index of a cell in the truncation of half-width `n`, or `None` when
    /// outside. With `wrap` the coordinates are reduced mod 2n+1 first.
    pub fn cell_index(&self, n: usize, cell: &[i64], wrap: bool) -> Option<usize> {
        let side = (2 * n + 1) as i64;
        let mut idx = 0usize;
        for &c in cell {
            let s = if wrap {
                (c + n as i64).rem_euclid(side)
            } else {
                let s = c + n as i64;
                if s < 0 || s >= side {
                    return None;
                }
                s
            };
            idx = idx * side as usize + s as usize;
        }
        Some(idx)
    }

    pub fn site_index(&self, n: usize, site: &Site, wrap: bool) -> Option<usize> {
        self.cell_index(n, &site.cell, wrap)
            .map(|c| c * self.fundamental_vertices + site.orbit)
    }

    /// The box Γ_n, either as an induced subgraph (free) or with
    /// wrap-around bridges (periodic).
    pub fn truncate(&self, n: usize, boundary: Boundary) -> Result<Truncation> {
        if n == 0 {
            return Err(Error::InvalidInput("truncation half-width must be >= 1".into()));
        }
        let n0 = self.fundamental_vertices;
        let sites: Vec<Site> = self
            .cells(n)
            .flat_map(|cell| (0..n0).map(move |a| Site::new(cell.clone(), a)))
            .collect();
        let wrap = boundary == Boundary::Periodic;
        let mut edges = Vec::new();
        let mut seen = HashSet::new();
        let mut collision = false;
        for (i, s) in sites.iter().enumerate() {
            for (b, k) in &self.star[s.orbit] {
                let cell: Vec<i64> = s.cell.iter().zip(k).map(|(c, k)| c + k).collect();
                let Some(j) = self.site_index(n, &Site::new(cell, *b), wrap) else {
                    continue;
                };
                // Each undirected edge is visited from both ends; keep the
                // visit from the lower index, and count the loop i == j once.
                if i == j {
                    collision = true;
                    continue;
                }
                if i < j && !seen.insert((i, j)) {
                    collision = true;
                }
                if i < j {
                    edges.push((i, j));
                }
            }
        }
        if wrap {
            // A wrapped edge that coincides with another shows up as a
            // degree deficit relative to the infinite graph.
            let g = Graph::new(sites.len(), edges.clone());
            let deficit = match &g {
                Ok(g) => (0..sites.len()).any(|i| g.degree(i) != self.degree(sites[i].orbit)),
                Err(_) => true,
            };
            if collision || deficit {
                let minimum = self.min_periodic_n().unwrap_or(n + 1);
                return Err(Error::WrapAround { n, minimum });
            }
        }
        let graph = Graph::new(sites.len(), edges).map_err(|e| match e {
            Error::InvalidGraph(msg) => Error::InvalidLattice(msg),
            other => other,
        })?;
        Ok(Truncation {
            graph,
            sites,
            n,
            boundary,
        })
    }

    /// Smallest half-width whose periodic truncation is a simple graph with
    /// the infinite-graph degrees.
    pub fn min_periodic_n(&self) -> Option<usize> {
        (1..=self.reach().max(1) + 1).find(|&n| self.periodic_is_simple(n))
    }

    fn periodic_is_simple(&self, n: usize) -> bool {
        let side = 2 * n as i64 + 1;
        // Only the star of cell 0 needs checking: translations act
        // transitively on cells.
        for a in 0..self.fundamental_vertices {
            let mut seen = HashSet::new();
            for (b, k) in &self.star[a] {
                let wrapped: Vec<i64> = k.iter().map(|&x| x.rem_euclid(side)).collect();
                if *b == a && wrapped.iter().all(|&x| x == 0) {
                    return false;
                }
                if !seen.insert((*b, wrapped)) {
                    return false;
                }
            }
        }
        true
    }

    /// Periodic truncation with the half-width raised until it is simple.
    pub fn truncate_periodic_auto(&self, n: usize) -> Result<Truncation> {
        let min = self.min_periodic_n().ok_or_else(|| {
            Error::InvalidLattice("no periodic truncation avoids multiple edges".into())
        })?;
        self.truncate(n.max(min), Boundary::Periodic)
    }
}

/// ℤ^ν nearest-neighbour lattice.
pub fn make_zd_lattice(nu: usize) -> PeriodicLattice {
    PeriodicLattice::hypercubic(nu)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hypercubic_degrees() {
        assert_eq!(PeriodicLattice::hypercubic(1).degree(0), 2);
        assert_eq!(PeriodicLattice::hypercubic(3).degree(0), 6);
        assert_eq!(PeriodicLattice::cubic_two_cell().degrees(), vec![6, 6]);
        assert_eq!(PeriodicLattice::ladder().degrees(), vec![3, 3]);
    }

    #[test]
    fn torus_3x3() {
        let t = PeriodicLattice::hypercubic(2).truncate(1, Boundary::Periodic).unwrap();
        assert_eq!(t.graph.vertex_count(), 9);
        assert_eq!(t.graph.edge_count(), 18);
    }

    #[test]
    fn path_and_cycle() {
        let z1 = PeriodicLattice::hypercubic(1);
        assert_eq!(z1.truncate(2, Boundary::Free).unwrap().graph.degrees(), vec![1, 2, 2, 2, 1]);
        assert_eq!(z1.truncate(2, Boundary::Periodic).unwrap().graph.degrees(), vec![2; 5]);
    }

    #[test]
    fn long_bridges_need_larger_truncation() {
        let lat = PeriodicLattice::new(1, 1, vec![], vec![Bridge::new(0, 0, vec![3])]).unwrap();
        assert!(matches!(
            lat.truncate(1, Boundary::Periodic),
            Err(Error::WrapAround { n: 1, minimum: 2 })
        ));
        assert_eq!(lat.truncate_periodic_auto(1).unwrap().n, 2);
    }

    #[test]
    fn duplicate_bridges_rejected() {
        let r = PeriodicLattice::new(
            1,
            2,
            vec![],
            vec![Bridge::new(0, 1, vec![1]), Bridge::new(1, 0, vec![-1])],
        );
        assert!(r.is_err());
    }

    #[test]
    fn connectivity() {
        assert!(PeriodicLattice::hypercubic(2).is_connected());
        assert!(PeriodicLattice::ladder().is_connected());
        assert!(!PeriodicLattice::split_square().is_connected());
    }

    #[test]
    fn json_round_trip() {
        let lat = PeriodicLattice::cubic_two_cell();
        let s = serde_json::to_string(&lat).unwrap();
        assert!(s.contains("\"bridge_edges\":[[1,0,[1,0,0]]"));
        let back: PeriodicLattice = serde_json::from_str(&s).unwrap();
        assert_eq!(back, lat);
    }
}
