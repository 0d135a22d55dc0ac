use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Exhaustion, LocalGraph, PeriodicLattice, Site};

use super::bloch_route::{bloch_returns, BlochWalkRule};
use super::domain::{WalkDomain, DEFAULT_VERTEX_BUDGET};
use super::hypercubic::hypercubic_returns;
use super::stats::{WalkMethod, WalkStats};

/// How return probabilities are computed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WalkRoute {
    /// Closed form for ℤ^ν, quadrature for other periodic lattices,
    /// evolution otherwise.
    #[default]
    Auto,
    Evolution,
    Combinatorial,
    Bloch,
}

/// True when the lattice is ℤ^ν with its standard cell.
pub fn is_hypercubic(lat: &PeriodicLattice) -> bool {
    if lat.fundamental_vertices() != 1 || !lat.internal_edges().is_empty() {
        return false;
    }
    let nu = lat.nu();
    let mut seen = vec![false; nu];
    for b in lat.bridge_edges() {
        let nz: Vec<usize> = (0..nu).filter(|&k| b.offset[k] != 0).collect();
        if nz.len() != 1 || b.offset[nz[0]].abs() != 1 || seen[nz[0]] {
            return false;
        }
        seen[nz[0]] = true;
    }
    seen.iter().all(|&s| s)
}

/// Return statistics at `j` of the walk on the base graph of `exh`.
pub fn return_probs(exh: &Exhaustion, j: &Site, n_max: usize) -> Result<WalkStats> {
    return_probs_with(exh.base(), j, n_max, WalkRoute::Auto, DEFAULT_VERTEX_BUDGET)
}

pub fn return_probs_with(
    base: &dyn LocalGraph,
    j: &Site,
    n_max: usize,
    route: WalkRoute,
    budget: usize,
) -> Result<WalkStats> {
    let degree = base.degree(j);
    if degree == 0 {
        return Err(Error::InvalidGraph(format!("vertex {j:?} is isolated")));
    }
    let lattice = base.as_periodic();
    let route = match (route, lattice) {
        (WalkRoute::Auto, Some(lat)) if is_hypercubic(lat) => WalkRoute::Combinatorial,
        (WalkRoute::Auto, Some(_)) => WalkRoute::Bloch,
        (WalkRoute::Auto, None) => WalkRoute::Evolution,
        (r, _) => r,
    };
    match route {
        WalkRoute::Combinatorial => {
            let lat = lattice
                .filter(|l| is_hypercubic(l))
                .ok_or_else(|| Error::NotApplicable("closed form needs ℤ^ν".into()))?;
            let q = hypercubic_returns(lat.nu(), n_max);
            Ok(WalkStats::from_returns(j.clone(), degree, WalkMethod::Combinatorial, q))
        }
        WalkRoute::Bloch => {
            let lat = lattice
                .ok_or_else(|| Error::NotApplicable("quadrature needs a periodic lattice".into()))?;
            let mut q = bloch_returns(lat, n_max, &BlochWalkRule::for_steps(lat.nu(), n_max))?;
            let q = q.swap_remove(j.orbit);
            Ok(WalkStats::from_returns(j.clone(), degree, WalkMethod::Bloch, q))
        }
        _ => {
            let dom = WalkDomain::ball(base, j, n_max.div_ceil(2), budget)?;
            let (q, p) = dom.return_series::<f64>(n_max)?;
            Ok(WalkStats::new(j.clone(), degree, WalkMethod::Evolution, q, p))
        }
    }
}

/// Return statistics computed on a given finite stage, whose boundary must
/// be out of reach of the walk.
pub fn return_probs_on_stage(
    stage: &crate::graph::Stage,
    j: usize,
    n_max: usize,
) -> Result<WalkStats> {
    let dom = WalkDomain::from_stage(stage, j);
    let reach = stage
        .graph
        .distances_from(&stage.boundary)
        .get(j)
        .copied()
        .unwrap_or(usize::MAX);
    // A walk returning after N steps gets at most N/2 away; it only sees
    // missing edges after stepping beyond a boundary vertex.
    if !stage.boundary.is_empty() && n_max > 2 * reach + 1 {
        return Err(Error::StageTooSmall {
            steps: n_max,
            needed: n_max.div_ceil(2),
            available: reach,
        });
    }
    let (q, p) = dom.return_series::<f64>(n_max.min(dom.exact_return_steps()))?;
    Ok(WalkStats::new(
        stage.sites[j].clone(),
        stage.full_degree[j],
        WalkMethod::Evolution,
        q,
        p,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn routes_agree_on_z2() {
        let lat = PeriodicLattice::hypercubic(2);
        let o = Site::at_origin(2, 0);
        let a = return_probs_with(&lat, &o, 60, WalkRoute::Evolution, 1 << 20).unwrap();
        let b = return_probs_with(&lat, &o, 60, WalkRoute::Combinatorial, 0).unwrap();
        let c = return_probs_with(&lat, &o, 60, WalkRoute::Bloch, 0).unwrap();
        for n in 0..=60 {
            assert!((a.q[n] - b.q[n]).abs() < 1e-14);
            assert!((a.q[n] - c.q[n]).abs() < 1e-9);
            assert!((a.p[n] - b.p[n]).abs() < 1e-14);
        }
        assert!(a.renewal_residual < 1e-14);
        assert!((a.q[2] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn hypercubic_detection() {
        assert!(is_hypercubic(&PeriodicLattice::hypercubic(4)));
        assert!(!is_hypercubic(&PeriodicLattice::ladder()));
        assert!(!is_hypercubic(&PeriodicLattice::cubic_two_cell()));
    }

    #[test]
    fn stage_too_small() {
        let ex = Exhaustion::boxes(PeriodicLattice::hypercubic(1), vec![3]).unwrap();
        let st = ex.stage(3).unwrap();
        let mid = st.index_of(&Site::at_origin(1, 0)).unwrap();
        assert!(return_probs_on_stage(&st, mid, 6).is_ok());
        assert!(matches!(
            return_probs_on_stage(&st, mid, 12),
            Err(Error::StageTooSmall { .. })
        ));
    }
}
