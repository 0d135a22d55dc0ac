use std::collections::{HashMap, HashSet, VecDeque};
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};

use super::{Graph, PeriodicLattice, Site};

/// Locally finite infinite (or finite) graph explored from an origin.
pub trait LocalGraph: Send + Sync {
    fn origin(&self) -> Site;

    /// Writes the neighbours of `s` into `out` (cleared first).
    fn neighbors(&self, s: &Site, out: &mut Vec<Site>);

    fn degree(&self, s: &Site) -> usize {
        let mut out = Vec::new();
        self.neighbors(s, &mut out);
        out.len()
    }

    /// Certified degree bound d̄.
    fn max_degree(&self) -> usize;

    /// Sites of the box of half-width `n`, for bases with cell coordinates.
    fn box_sites(&self, _n: usize) -> Option<Vec<Site>> {
        None
    }

    /// The underlying periodic lattice when the graph is exactly one.
    fn as_periodic(&self) -> Option<&PeriodicLattice> {
        None
    }

    /// Number of vertices when the graph is finite.
    fn finite_size(&self) -> Option<usize> {
        None
    }

    fn describe(&self) -> String;
}

impl LocalGraph for PeriodicLattice {
    fn origin(&self) -> Site {
        Site::at_origin(self.nu(), 0)
    }

    fn neighbors(&self, s: &Site, out: &mut Vec<Site>) {
        PeriodicLattice::neighbors(self, s, out)
    }

    fn degree(&self, s: &Site) -> usize {
        PeriodicLattice::degree(self, s.orbit)
    }

    fn max_degree(&self) -> usize {
        PeriodicLattice::max_degree(self)
    }

    fn box_sites(&self, n: usize) -> Option<Vec<Site>> {
        let side = 2 * n + 1;
        let nu = self.nu();
        let n0 = self.fundamental_vertices();
        let total = side.pow(nu as u32);
        let mut out = Vec::with_capacity(total * n0);
        for mut idx in 0..total {
            let mut cell = vec![0i64; nu];
            for axis in (0..nu).rev() {
                cell[axis] = (idx % side) as i64 - n as i64;
                idx /= side;
            }
            for a in 0..n0 {
                out.push(Site::new(cell.clone(), a));
            }
        }
        Some(out)
    }

    fn as_periodic(&self) -> Option<&PeriodicLattice> {
        Some(self)
    }

    fn describe(&self) -> String {
        format!(
            "periodic lattice (nu = {}, |V0| = {})",
            self.nu(),
            self.fundamental_vertices()
        )
    }
}

/// A finite graph seen as the base of an exhaustion by balls.
#[derive(Clone, Debug)]
pub struct FiniteBase {
    pub graph: Graph,
    pub origin: usize,
}

impl FiniteBase {
    pub fn new(graph: Graph, origin: usize) -> Result<Self> {
        if origin >= graph.vertex_count() {
            return Err(Error::InvalidInput(format!("origin {origin} out of range")));
        }
        Ok(Self { graph, origin })
    }
}

impl LocalGraph for FiniteBase {
    fn origin(&self) -> Site {
        Site::new(Vec::new(), self.origin)
    }

    fn neighbors(&self, s: &Site, out: &mut Vec<Site>) {
        out.clear();
        out.extend(
            self.graph
                .neighbors(s.orbit)
                .iter()
                .map(|&j| Site::new(Vec::new(), j)),
        );
    }

    fn degree(&self, s: &Site) -> usize {
        self.graph.degree(s.orbit)
    }

    fn max_degree(&self) -> usize {
        self.graph.max_degree()
    }

    fn finite_size(&self) -> Option<usize> {
        Some(self.graph.vertex_count())
    }

    fn describe(&self) -> String {
        format!(
            "finite graph ({} vertices, {} edges)",
            self.graph.vertex_count(),
            self.graph.edge_count()
        )
    }
}

/// Rule selecting removed edges of a periodic lattice.
#[derive(Clone, Debug)]
pub enum DefectRule {
    /// A finite list of removed edges.
    Explicit(Vec<(Site, Site)>),
    /// Remove every edge along axis 0 that is off the axis-0 line.
    Comb,
    /// Remove every edge with both ends in the hyperplane `cell[axis] == 0`.
    Plane { axis: usize },
}

#[derive(Clone, Debug)]
pub struct DefectedLattice {
    base: PeriodicLattice,
    rule: DefectRule,
    explicit: HashSet<(Site, Site)>,
}

impl DefectedLattice {
    pub fn new(base: PeriodicLattice, rule: DefectRule) -> Result<Self> {
        let mut explicit = HashSet::new();
        match &rule {
            DefectRule::Explicit(list) => {
                let mut nb = Vec::new();
                for (u, v) in list {
                    base.neighbors(u, &mut nb);
                    if u.cell.len() != base.nu() || !nb.contains(v) {
                        return Err(Error::InvalidInput(format!(
                            "defect {u:?} - {v:?} is not an edge of the lattice"
                        )));
                    }
                    explicit.insert(ordered(u, v));
                }
            }
            DefectRule::Comb => {
                if base.nu() < 2 {
                    return Err(Error::InvalidInput("comb defects need nu >= 2".into()));
                }
            }
            DefectRule::Plane { axis } => {
                if *axis >= base.nu() {
                    return Err(Error::InvalidInput(format!("plane axis {axis} out of range")));
                }
            }
        }
        Ok(Self {
            base,
            rule,
            explicit,
        })
    }

    pub fn base(&self) -> &PeriodicLattice {
        &self.base
    }

    pub fn rule(&self) -> &DefectRule {
        &self.rule
    }

    pub fn is_removed(&self, u: &Site, v: &Site) -> bool {
        match &self.rule {
            DefectRule::Explicit(_) => self.explicit.contains(&ordered(u, v)),
            DefectRule::Comb => {
                let along_first = u.cell[0] != v.cell[0]
                    && u.cell[1..].iter().zip(&v.cell[1..]).all(|(a, b)| a == b);
                along_first && u.cell[1..].iter().any(|&c| c != 0)
            }
            DefectRule::Plane { axis } => u.cell[*axis] == 0 && v.cell[*axis] == 0,
        }
    }
}

fn ordered(u: &Site, v: &Site) -> (Site, Site) {
    if u <= v {
        (u.clone(), v.clone())
    } else {
        (v.clone(), u.clone())
    }
}

impl LocalGraph for DefectedLattice {
    fn origin(&self) -> Site {
        Site::at_origin(self.base.nu(), 0)
    }

    fn neighbors(&self, s: &Site, out: &mut Vec<Site>) {
        self.base.neighbors(s, out);
        out.retain(|t| !self.is_removed(s, t));
    }

    fn max_degree(&self) -> usize {
        self.base.max_degree()
    }

    fn box_sites(&self, n: usize) -> Option<Vec<Site>> {
        self.base.box_sites(n)
    }

    fn describe(&self) -> String {
        let rule = match &self.rule {
            DefectRule::Explicit(l) => format!("{} removed edges", l.len()),
            DefectRule::Comb => "comb defects".into(),
            DefectRule::Plane { axis } => format!("plane defects normal to axis {axis}"),
        };
        format!("{} with {rule}", self.base.describe())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StageRule {
    /// Cells with sup-norm at most n (lattice bases only).
    Boxes,
    /// Graph-distance balls of radius n around the origin.
    Balls,
}

/// A materialized finite stage Γ_n.
#[derive(Clone, Debug)]
pub struct Stage {
    pub size: usize,
    /// Induced subgraph; its degrees are d_n.
    pub graph: Graph,
    pub sites: Vec<Site>,
    /// Degrees d in the infinite graph.
    pub full_degree: Vec<usize>,
    /// ∂Γ_n: vertices with an edge leaving the stage, ascending.
    pub boundary: Vec<usize>,
    index: HashMap<Site, usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundarySets {
    pub m: usize,
    pub boundary: Vec<usize>,
    pub augmented: Vec<usize>,
}

impl Stage {
    pub fn from_sites(base: &dyn LocalGraph, size: usize, sites: Vec<Site>) -> Self {
        let index: HashMap<Site, usize> =
            sites.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        let mut edges = Vec::new();
        let mut full_degree = Vec::with_capacity(sites.len());
        let mut boundary = Vec::new();
        let mut nb = Vec::new();
        for (i, s) in sites.iter().enumerate() {
            base.neighbors(s, &mut nb);
            full_degree.push(nb.len());
            let mut leaves = false;
            for t in &nb {
                match index.get(t) {
                    Some(&j) if i < j => edges.push((i, j)),
                    Some(_) => {}
                    None => leaves = true,
                }
            }
            if leaves {
                boundary.push(i);
            }
        }
        let graph = Graph::new(sites.len(), edges).expect("stage of a simple graph");
        Self {
            size,
            graph,
            sites,
            full_degree,
            boundary,
            index,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.sites.len()
    }

    pub fn index_of(&self, s: &Site) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn folner_ratio(&self) -> f64 {
        self.boundary.len() as f64 / self.sites.len() as f64
    }

    /// Interior Γ_n^int = V_n \ ∂Γ_n.
    pub fn interior(&self) -> Vec<usize> {
        let mut is_b = vec![false; self.sites.len()];
        for &b in &self.boundary {
            is_b[b] = true;
        }
        (0..self.sites.len()).filter(|&i| !is_b[i]).collect()
    }

    /// ∂Γ_n and the augmented boundary ∂_m Γ_n, the vertices within
    /// distance m of ∂Γ_n inside the stage.
    pub fn boundary_sets(&self, m: usize) -> BoundarySets {
        let dist = self.graph.distances_from(&self.boundary);
        BoundarySets {
            m,
            boundary: self.boundary.clone(),
            augmented: (0..self.sites.len()).filter(|&i| dist[i] <= m).collect(),
        }
    }

    /// Graph distance inside the stage from vertex `i` to every vertex.
    pub fn distances_from(&self, i: usize) -> Vec<usize> {
        self.graph.distances_from(&[i])
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FolnerReport {
    pub sizes: Vec<usize>,
    pub ratios: Vec<f64>,
    pub decreasing: bool,
    pub threshold: f64,
    pub accepted: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct DefectReport {
    pub sizes: Vec<usize>,
    /// |D ∩ V_n| / |V_n| with D the vertices touching a removed edge.
    pub densities: Vec<f64>,
    pub decreasing: bool,
    /// False when the defect density does not visibly vanish.
    pub bec_supported: bool,
}

/// Increasing sequence of finite connected subgraphs of a base graph.
#[derive(Clone)]
pub struct Exhaustion {
    base: Arc<dyn LocalGraph>,
    rule: StageRule,
    sizes: Vec<usize>,
    defects: Option<DefectReport>,
}

impl std::fmt::Debug for Exhaustion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Exhaustion")
            .field("base", &self.base.describe())
            .field("rule", &self.rule)
            .field("sizes", &self.sizes)
            .finish()
    }
}

impl Exhaustion {
    pub fn new(base: Arc<dyn LocalGraph>, rule: StageRule, sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::InvalidInput("an exhaustion needs at least one stage".into()));
        }
        if sizes.windows(2).any(|w| w[0] >= w[1]) || sizes[0] == 0 {
            return Err(Error::InvalidInput(format!(
                "stage sizes must be positive and strictly increasing, got {sizes:?}"
            )));
        }
        if rule == StageRule::Boxes && base.box_sites(1).is_none() {
            return Err(Error::InvalidInput(
                "box stages need a base with cell coordinates".into(),
            ));
        }
        Ok(Self {
            base,
            rule,
            sizes,
            defects: None,
        })
    }

    /// Boxes Γ_n of a periodic lattice.
    pub fn boxes(lattice: PeriodicLattice, sizes: Vec<usize>) -> Result<Self> {
        Self::new(Arc::new(lattice), StageRule::Boxes, sizes)
    }

    /// Balls around a finite graph's origin.
    pub fn finite(graph: Graph, origin: usize, sizes: Vec<usize>) -> Result<Self> {
        graph.require_connected()?;
        Self::new(Arc::new(FiniteBase::new(graph, origin)?), StageRule::Balls, sizes)
    }

    pub fn base(&self) -> &dyn LocalGraph {
        self.base.as_ref()
    }

    pub fn base_arc(&self) -> Arc<dyn LocalGraph> {
        Arc::clone(&self.base)
    }

    pub fn rule(&self) -> StageRule {
        self.rule
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn defects(&self) -> Option<&DefectReport> {
        self.defects.as_ref()
    }

    pub fn max_degree(&self) -> usize {
        self.base.max_degree()
    }

    /// Stage of size `n` (box half-width or ball radius).
    pub fn stage(&self, n: usize) -> Result<Stage> {
        if n == 0 {
            return Err(Error::NoSuchStage(n));
        }
        let stage = match self.rule {
            StageRule::Boxes => {
                let sites = self.base.box_sites(n).ok_or(Error::NoSuchStage(n))?;
                Stage::from_sites(self.base.as_ref(), n, sites)
            }
            StageRule::Balls => ball(self.base.as_ref(), &self.base.origin(), n),
        };
        stage.graph.require_connected()?;
        Ok(stage)
    }

    pub fn boundary_sets(&self, n: usize, m: usize) -> Result<BoundarySets> {
        Ok(self.stage(n)?.boundary_sets(m))
    }

    pub fn folner(&self, threshold: f64) -> Result<FolnerReport> {
        let mut ratios = Vec::with_capacity(self.sizes.len());
        for &n in &self.sizes {
            ratios.push(self.stage(n)?.folner_ratio());
        }
        let decreasing = ratios.windows(2).all(|w| w[1] < w[0]);
        let last = *ratios.last().expect("nonempty");
        Ok(FolnerReport {
            sizes: self.sizes.clone(),
            decreasing,
            threshold,
            accepted: decreasing && last <= threshold,
            ratios,
        })
    }
}

/// Ball of radius `r` around `center`, sites in breadth-first order.
pub fn ball(base: &dyn LocalGraph, center: &Site, r: usize) -> Stage {
    ball_within(base, center, r, usize::MAX).expect("unbounded budget")
}

/// As [`ball`], failing once more than `budget` sites would be needed.
pub fn ball_within(base: &dyn LocalGraph, center: &Site, r: usize, budget: usize) -> Result<Stage> {
    let mut order = vec![center.clone()];
    let mut dist = HashMap::new();
    dist.insert(center.clone(), 0usize);
    let mut queue = VecDeque::from([0usize]);
    let mut nb = Vec::new();
    while let Some(k) = queue.pop_front() {
        let s = order[k].clone();
        let d = dist[&s];
        if d == r {
            continue;
        }
        base.neighbors(&s, &mut nb);
        for t in nb.drain(..) {
            if !dist.contains_key(&t) {
                dist.insert(t.clone(), d + 1);
                order.push(t);
                queue.push_back(order.len() - 1);
                if order.len() > budget {
                    return Err(Error::VertexBudget {
                        needed: order.len(),
                        budget,
                    });
                }
            }
        }
    }
    Ok(Stage::from_sites(base, r, order))
}

/// Exhaustion of a lattice with edges removed.
pub fn make_defected(
    base: PeriodicLattice,
    rule: DefectRule,
    stage_rule: StageRule,
    sizes: Vec<usize>,
) -> Result<Exhaustion> {
    let defected = Arc::new(DefectedLattice::new(base, rule)?);
    let mut exh = Exhaustion::new(defected.clone(), stage_rule, sizes.clone())?;
    let mut densities = Vec::with_capacity(sizes.len());
    for &n in &sizes {
        let stage = exh.stage(n)?;
        let touched = stage
            .sites
            .iter()
            .filter(|s| defected.degree(s) < defected.base().degree(s.orbit))
            .count();
        densities.push(touched as f64 / stage.vertex_count() as f64);
    }
    let decreasing = densities.windows(2).all(|w| w[1] < w[0]);
    exh.defects = Some(DefectReport {
        sizes,
        bec_supported: decreasing,
        decreasing,
        densities,
    });
    Ok(exh)
}
