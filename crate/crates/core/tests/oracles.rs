//! Closed-form and literature values the library must reproduce.

use netbec::bloch::{
    band_top, bec_criterion, critical_density_periodic, lattice_green, BecVerdict, BlochHamiltonian, BlochQuadrature,
};
use netbec::graph::{Boundary, Exhaustion, Graph, PeriodicLattice, Site};
use netbec::spectral::{build_operator, eigendecompose, OperatorKind};
use netbec::thermo::{critical_density, solve_fugacity};
use netbec::walk::{classify, green_diagonal, hypercubic_returns, ClassifyOptions, Verdict, WalkDomain};
use netbec::Rational;

const WATSON_HALF: f64 = 0.252731009858963;

#[test]
fn line_returns_are_central_binomials() {
    let q = hypercubic_returns(1, 40);
    let mut c = 1.0f64;
    for k in 0..=20 {
        assert!((q[2 * k] - c).abs() < 1e-14, "k = {k}");
        c *= (2 * k + 1) as f64 / (2 * k + 2) as f64;
    }
    assert!(q.iter().skip(1).step_by(2).all(|&x| x == 0.0));
}

#[test]
fn exact_rationals_on_a_cycle() {
    // The walk on C_4 returns at step 2 with probability 1/2 and first
    // returns at step 4 with probability 1/4.
    let g = Graph::cycle(4);
    let (q, p) = WalkDomain::from_graph(&g, 0).return_series::<Rational>(4).unwrap();
    assert_eq!(q[2], Rational::new(1, 2));
    assert_eq!(q[4], Rational::new(1, 2));
    assert_eq!(p[2], Rational::new(1, 2));
    assert_eq!(p[4], Rational::new(1, 4));
}

#[test]
fn two_vertex_fugacity_closed_form() {
    let g = Graph::path(2);
    let op = build_operator::<f64>(&g, OperatorKind::Laplacian, None).unwrap();
    let sd = eigendecompose(&op).unwrap();
    let (beta, rho) = (0.7, 1.3);
    let sol = solve_fugacity(&sd, beta, rho).unwrap();
    let z = sol.z;
    let e = (-2.0 * beta).exp();
    let density = 0.5 * (z / (1.0 - z) + z * e / (1.0 - z * e));
    assert!((density - rho).abs() < 1e-9, "{density}");
}

#[test]
fn watson_integral() {
    let h = BlochHamiltonian::laplacian(&PeriodicLattice::hypercubic(3));
    let g = lattice_green(&h, BlochQuadrature::default()).unwrap();
    assert!((g[0] - WATSON_HALF).abs() < 1e-8, "{}", g[0]);
}

#[test]
fn green_diagonal_matches_quadrature() {
    let lat = PeriodicLattice::hypercubic(3);
    let exh = Exhaustion::boxes(lat, vec![4]).unwrap();
    let est = green_diagonal(&exh, &Site::at_origin(3, 0), 1.0, 2000).unwrap();
    let v = est.value.unwrap();
    assert!((v / WATSON_HALF - 1.0).abs() < 1e-3, "{v}");
}

#[test]
fn dimension_dichotomy() {
    let opts = ClassifyOptions::default();
    for (nu, want) in [(1, Verdict::Recurrent), (2, Verdict::Recurrent), (3, Verdict::Transient)] {
        let exh = Exhaustion::boxes(PeriodicLattice::hypercubic(nu), vec![2]).unwrap();
        assert_eq!(classify(&exh, None, &opts).unwrap().verdict, want, "nu = {nu}");
    }
    for (nu, want) in [(1, BecVerdict::NoBec), (3, BecVerdict::BecPossible)] {
        let lat = PeriodicLattice::hypercubic(nu);
        let v = vec![2.0 * nu as f64];
        let band = band_top(&lat, &v, 16).unwrap();
        assert_eq!(bec_criterion(&lat, &v, &band).unwrap().verdict, want, "nu = {nu}");
    }
}

#[test]
fn critical_density_two_ways() {
    let lat = PeriodicLattice::hypercubic(3);
    let bloch = critical_density_periodic(&lat, &[6.0], 1.0, 16).unwrap().value;
    assert!((bloch - 0.0672513).abs() < 1e-6, "{bloch}");
    let exh = Exhaustion::boxes(lat, vec![4, 6, 8, 10, 12]).unwrap();
    let finite = critical_density(&exh, 1.0, Boundary::Periodic).unwrap().extrapolated.unwrap();
    assert!((finite / bloch - 1.0).abs() < 0.02, "{finite} vs {bloch}");
}
