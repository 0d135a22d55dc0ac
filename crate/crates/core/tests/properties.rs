//! Randomized invariants: trace inequalities, walk identities and the
//! Bloch-side comparisons.

use std::f64::consts::PI;

use netbec::bloch::{
    band_top, degenerate_gauge, diamagnetic_check, direct_integral_check, dirichlet_identity, ground_state_compare,
    twisted_dirichlet, BlochHamiltonian, PeriodicGroundState, BAND_TOP_SLACK,
};
use netbec::graph::{Bridge, Exhaustion, Graph, PeriodicLattice, Site};
use netbec::spectral::{build_operator, eigendecompose, nesting_traces, DenseInfinite, OperatorKind};
use netbec::thermo::{bound_critical_by_green, density_of_z, weyl_value, QuasiFreeState};
use netbec::walk::passage_series;
use num_complex::Complex;
use proptest::prelude::*;

const SLACK: f64 = 1e-10;

fn connected_graph() -> impl Strategy<Value = Graph> {
    (3usize..10)
        .prop_flat_map(|n| {
            let parents: Vec<_> = (1..n).map(|i| 0..i).collect();
            (Just(n), parents, prop::collection::vec((0..n, 0..n), 0..n))
        })
        .prop_map(|(n, parents, extra)| {
            let mut edges: Vec<(usize, usize)> = parents.into_iter().enumerate().map(|(i, p)| (i + 1, p)).collect();
            for (a, b) in extra {
                let e = (a.max(b), a.min(b));
                if a != b && !edges.contains(&e) {
                    edges.push(e);
                }
            }
            Graph::new(n, edges).unwrap()
        })
}

/// Two-orbit lattice in ν dimensions: orbit 0 and 1 joined inside the cell,
/// orbit 0 bridged along every axis, plus a random subset of unit bridges.
fn two_cell_lattice(nu: usize, mask: u64) -> PeriodicLattice {
    let mut bridges = Vec::new();
    for k in 0..nu {
        let mut off = vec![0; nu];
        off[k] = 1;
        bridges.push(Bridge::new(0, 0, off));
    }
    let mut keys = Vec::new();
    let mut bit = 0;
    for a in 0..2 {
        for b in a..2 {
            for code in 0..3usize.pow(nu as u32) {
                let off: Vec<i64> = (0..nu).map(|k| (code / 3usize.pow(k as u32) % 3) as i64 - 1).collect();
                if off.iter().all(|&x| x == 0) {
                    continue;
                }
                let rev: Vec<i64> = off.iter().map(|x| -x).collect();
                let key = if a == b { (a, b, off.clone().max(rev)) } else { (a, b, off.clone()) };
                if keys.contains(&key) {
                    continue;
                }
                keys.push(key.clone());
                let axis = key.2.iter().filter(|&&x| x != 0).count() == 1 && key.2.iter().all(|&x| x >= 0);
                if a == 0 && b == 0 && axis {
                    continue;
                }
                if mask >> (bit % 64) & 1 == 1 {
                    bridges.push(Bridge::new(key.0, key.1, key.2));
                }
                bit += 1;
            }
        }
    }
    PeriodicLattice::new(nu, 2, vec![(0, 1)], bridges).unwrap()
}

fn complex_vec(len: usize) -> impl Strategy<Value = Vec<Complex<f64>>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), len).prop_map(|v| v.into_iter().map(|(a, b)| Complex::new(a, b)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn nested_compressions(g in connected_graph(), beta in 0.05f64..4.0, cut in 1usize..9, keep in any::<u64>()) {
        let n = g.vertex_count();
        let w2: Vec<usize> = (0..n.min(cut + 1)).collect();
        let w1: Vec<usize> = w2.iter().copied().filter(|i| keep >> i & 1 == 1).collect();
        let t = nesting_traces(&g, &w1, &w2, beta).unwrap();
        prop_assert!(t.holds(SLACK), "{t:?}");
    }

    #[test]
    fn cut_down_chain(g in connected_graph(), beta in 0.1f64..4.0, z in 0.0f64..0.98) {
        let inf = DenseInfinite::new(&g).unwrap();
        let exh = Exhaustion::finite(g, 0, vec![1, 2]).unwrap();
        let r = bound_critical_by_green(&exh, &[1, 2], beta, z, &inf).unwrap();
        prop_assert!(r.holds(SLACK), "{r:?}");
    }

    #[test]
    fn renewal_and_generating(g in connected_graph(), z in 0.0f64..0.95) {
        let n = g.vertex_count();
        let s = passage_series(&g, 0, n - 1, 60).unwrap();
        prop_assert!(s.renewal_residual() <= SLACK);
        let c = s.generating(z);
        prop_assert!(c.residual <= SLACK, "{c:?}");
    }

    #[test]
    fn density_increases_with_fugacity(g in connected_graph(), beta in 0.1f64..3.0, z in 0.01f64..0.98) {
        let sd = eigendecompose(&build_operator::<f64>(&g, OperatorKind::Laplacian, None).unwrap()).unwrap();
        let lo = density_of_z(&sd, beta, z).unwrap();
        let hi = density_of_z(&sd, beta, z + 0.5 * (1.0 - z)).unwrap();
        prop_assert!(lo < hi);
    }

    #[test]
    fn weyl_phase_invariance(g in connected_graph(), z in 0.0f64..0.9, theta in 0.0f64..6.3, f in complex_vec(3)) {
        let sd = eigendecompose(&build_operator::<f64>(&g, OperatorKind::Laplacian, None).unwrap()).unwrap();
        let st = QuasiFreeState::normal(1.0, z).unwrap();
        let f: Vec<(usize, Complex<f64>)> = f.into_iter().enumerate().collect();
        let rot: Vec<_> = f.iter().map(|&(i, c)| (i, c * Complex::from_polar(1.0, theta))).collect();
        let (a, b) = (weyl_value(&st, &f, &sd).unwrap(), weyl_value(&st, &rot, &sd).unwrap());
        prop_assert!((a - b).abs() <= 1e-12);
    }

    #[test]
    fn diamagnetic(mask in any::<u64>(), v in prop::collection::vec(-2.0f64..2.0, 2), p in prop::collection::vec(-PI..PI, 2), beta in 0.0f64..3.0, f in complex_vec(2)) {
        let lat = two_cell_lattice(2, mask);
        let h = BlochHamiltonian::new(&lat, &v).unwrap();
        let c = diamagnetic_check(&h, beta, &p, &f).unwrap();
        prop_assert!(c.holds(SLACK), "{c:?}");
    }

    #[test]
    fn band_top_at_zero(mask in any::<u64>(), v in prop::collection::vec(-2.0f64..2.0, 2)) {
        let lat = two_cell_lattice(2, mask);
        let band = band_top(&lat, &v, 12).unwrap();
        prop_assert!(band.worst_excess <= BAND_TOP_SLACK);
    }

    #[test]
    fn dirichlet_identities(mask in any::<u64>(), v in prop::collection::vec(-2.0f64..2.0, 2), p in prop::collection::vec(-PI..PI, 2), f in complex_vec(2), g in complex_vec(4)) {
        let lat = two_cell_lattice(2, mask);
        let h = BlochHamiltonian::new(&lat, &v).unwrap();
        let gs = PeriodicGroundState::new(&lat, &v).unwrap();
        prop_assert!(twisted_dirichlet(&h, &gs, &p, &f).unwrap().agrees(SLACK));
        let sites = [Site::new(vec![0, 0], 0), Site::new(vec![1, 0], 1), Site::new(vec![0, 1], 0), Site::new(vec![-2, 3], 1)];
        let support: Vec<_> = sites.into_iter().zip(g).collect();
        let d = dirichlet_identity(&h, &gs, &support).unwrap();
        prop_assert!(d.agrees(SLACK), "{d:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn sandwich(v in prop::collection::vec(-3.0f64..3.0, 2)) {
        let (_, rep) = ground_state_compare(&PeriodicLattice::cubic_two_cell(), &v, 6).unwrap();
        prop_assert!(rep.m2_line_holds(SLACK), "{rep:?}");
    }

    #[test]
    fn direct_integral(mask in any::<u64>(), v in prop::collection::vec(-2.0f64..2.0, 2), l in 2usize..5) {
        let c = direct_integral_check(&two_cell_lattice(2, mask), &v, l).unwrap();
        prop_assert!(c.max_gap <= 1e-8, "{c:?}");
    }
}

#[test]
fn gauge_on_split_square() {
    let g = degenerate_gauge(&PeriodicLattice::split_square(), &[0.0, 0.0], &[PI, 0.0], 9).unwrap();
    assert!(g.residual <= 1e-10);
}
