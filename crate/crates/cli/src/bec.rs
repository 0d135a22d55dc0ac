use anyhow::{anyhow, bail, Result};
use netbec::bloch::{
    band_top, bec_criterion, bose_density, periodic_fugacity, BecCriterion, BecVerdict, BlochHamiltonian,
    BlochQuadrature, BlochSpectrum, PeriodicFugacity,
};
use netbec::graph::{Boundary, Exhaustion, Graph, PeriodicLattice, Site};
use netbec::spectral::{build_operator, eigendecompose, OperatorKind, SpectralCarrier};
use netbec::thermo::{
    critical_density_from, solve_fugacity, stage_critical_density, two_point, CriticalDensityEstimate,
    QuasiFreeState, Regime, ThermoSolution,
};
use num_complex::Complex;
use serde::Serialize;

use crate::args::RunArgs;
use crate::output::{num, Output};
use crate::source::{self, Source};

#[derive(Serialize)]
struct StageRow {
    n: usize,
    volume: usize,
    z: f64,
    one_minus_z: f64,
    mu: f64,
    /// z/(|Γ_n|(1 − z)).
    ground_density: f64,
    /// Ground-mode-excluded density at z = 1 on this stage.
    critical_stage: f64,
    residual: f64,
}

#[derive(Serialize)]
struct OdlroRow {
    distance: usize,
    vertex: Site,
    two_point: f64,
}

#[derive(Clone, Copy, Serialize)]
#[serde(rename_all = "snake_case")]
enum RhoBarSource {
    BlochQuadrature,
    StageExtrapolation,
    Infinite,
}

#[derive(Serialize)]
struct Condensate {
    /// ρ − ρ̄(β).
    expected: f64,
    /// z_n/(|Γ_n|(1 − z_n)) on the largest stage.
    last_stage: f64,
    relative_gap: f64,
}

#[derive(Serialize)]
struct BecReport {
    source: String,
    beta: f64,
    rho: f64,
    regime: Regime,
    rho_bar: Option<f64>,
    rho_bar_source: RhoBarSource,
    criterion: Option<BecCriterion>,
    critical_stages: CriticalDensityEstimate,
    infinite_volume: Option<PeriodicFugacity>,
    condensate: Option<Condensate>,
    stages: Vec<StageRow>,
    odlro: Vec<OdlroRow>,
    /// two_point at the smallest over the largest tabulated distance.
    odlro_decay: Option<f64>,
}

pub fn run(a: &RunArgs) -> Result<String> {
    a.check()?;
    let rho = a.rho.ok_or_else(|| anyhow!("bec-report needs --rho"))?;
    if a.potential.is_some() {
        bail!("--potential is read by bloch-bands only");
    }
    let src = source::load(a)?;
    let report = match &src {
        Source::Lattice { lattice, .. } => periodic(a, src.name(), lattice, rho)?,
        Source::Finite { graph, .. } => finite(a, src.name(), graph, rho)?,
        Source::Comb => bail!("comb2d has a positive density of defects; it is offered for walk classification only"),
    };
    let mut out = Output::new("bec-report", a)?;
    let header: Vec<String> = ["n", "volume", "z", "one_minus_z", "mu", "ground_density", "critical_stage", "residual"]
        .map(String::from)
        .to_vec();
    let rows: Vec<Vec<String>> = report
        .stages
        .iter()
        .map(|s| {
            vec![
                s.n.to_string(),
                s.volume.to_string(),
                num(s.z),
                num(s.one_minus_z),
                num(s.mu),
                num(s.ground_density),
                num(s.critical_stage),
                num(s.residual),
            ]
        })
        .collect();
    out.csv("stages.csv", &header, &rows)?;
    let header: Vec<String> = ["distance", "vertex", "two_point"].map(String::from).to_vec();
    let rows: Vec<Vec<String>> = report
        .odlro
        .iter()
        .map(|r| vec![r.distance.to_string(), format!("{:?}/{}", r.vertex.cell, r.vertex.orbit), num(r.two_point)])
        .collect();
    out.csv("odlro.csv", &header, &rows)?;
    out.json("bec.json", &report)?;
    out.finish()?;
    let rb = report.rho_bar.map(num).unwrap_or_else(|| "infinite".into());
    let regime = serde_json::to_value(report.regime)?;
    Ok(format!(
        "{}: {} (rho = {rho}, rho_bar = {rb})",
        report.source,
        regime.as_str().unwrap_or("?")
    ))
}

fn default_stages(nu: usize) -> Vec<usize> {
    match nu {
        1 => vec![16, 32, 64, 128, 256],
        2 => vec![4, 8, 16, 24, 32],
        3 => vec![4, 6, 8, 10, 12],
        _ => vec![2, 3, 4, 5],
    }
}

fn stage_row(n: usize, sd: &dyn SpectralCarrier<f64>, sol: &ThermoSolution<f64>, beta: f64) -> StageRow {
    StageRow {
        n,
        volume: sol.volume,
        z: sol.z,
        one_minus_z: sol.one_minus_z,
        mu: sol.mu,
        ground_density: sol.ground_density(),
        critical_stage: stage_critical_density(sd, beta),
        residual: sol.residual,
    }
}

fn periodic(a: &RunArgs, name: String, lat: &PeriodicLattice, rho: f64) -> Result<BecReport> {
    let beta = a.beta;
    let nu = lat.nu();
    let sizes = a.stage_list()?.unwrap_or_else(|| default_stages(nu));
    let v: Vec<f64> = lat.degrees().iter().map(|&d| d as f64).collect();
    let h = BlochHamiltonian::laplacian(lat);
    let band = band_top(lat, &v, a.grid)?;
    let criterion = bec_criterion(lat, &v, &band)?;

    let mut stages = Vec::new();
    let mut last = None;
    for &n in &sizes {
        let sp = BlochSpectrum::new(&h, n)?;
        let sol = solve_fugacity(&sp, beta, rho)?;
        stages.push(stage_row(n, &sp, &sol, beta));
        last = Some((n, sp, sol));
    }
    let volumes: Vec<usize> = stages.iter().map(|s| s.volume).collect();
    let per_stage: Vec<f64> = stages.iter().map(|s| s.critical_stage).collect();
    let critical_stages = critical_density_from(beta, Boundary::Periodic, &sizes, &volumes, &per_stage);

    let (rho_bar, rho_bar_source) = match criterion.verdict {
        BecVerdict::BecPossible => (
            Some(bose_density(&h, beta, BlochQuadrature::default())?),
            RhoBarSource::BlochQuadrature,
        ),
        BecVerdict::NoBec => (None, RhoBarSource::Infinite),
        BecVerdict::DegenerateReview => match critical_stages.extrapolated {
            Some(x) => (Some(x), RhoBarSource::StageExtrapolation),
            None => (None, RhoBarSource::Infinite),
        },
    };
    let infinite_volume = periodic_fugacity(&h, beta, rho, rho_bar, BlochQuadrature::default())?;
    let regime = if infinite_volume.condensed {
        Regime::Condensed
    } else {
        Regime::Normal
    };

    let (n, sp, sol) = last.expect("at least one stage");
    let condensate = rho_bar.filter(|_| infinite_volume.condensed).map(|rb| {
        let expected = rho - rb;
        let last_stage = sol.ground_density();
        Condensate {
            expected,
            last_stage,
            relative_gap: (last_stage - expected).abs() / expected,
        }
    });
    let state = QuasiFreeState::from_solution(&sol);
    let origin = Site::at_origin(nu, 0);
    let i0 = lat.site_index(n, &origin, true).expect("origin in the box");
    let delta = |i: usize| vec![(i, Complex::new(1.0, 0.0))];
    let mut odlro = Vec::new();
    for r in 0..=n {
        let mut cell = vec![0i64; nu];
        cell[0] = r as i64;
        let site = Site::new(cell, 0);
        let j = lat.site_index(n, &site, true).expect("site in the box");
        let tp = two_point(&state, &delta(i0), &delta(j), &sp)?;
        odlro.push(OdlroRow {
            distance: r,
            vertex: site,
            two_point: tp.re,
        });
    }
    let odlro_decay = decay(&odlro);
    Ok(BecReport {
        source: name,
        beta,
        rho,
        regime,
        rho_bar,
        rho_bar_source,
        criterion: Some(criterion),
        critical_stages,
        infinite_volume: Some(infinite_volume),
        condensate,
        stages,
        odlro,
        odlro_decay,
    })
}

fn decay(rows: &[OdlroRow]) -> Option<f64> {
    let first = rows.get(1)?.two_point;
    let last = rows.last()?.two_point;
    (rows.len() > 2 && last != 0.0).then(|| first / last)
}

fn finite(a: &RunArgs, name: String, graph: &Graph, rho: f64) -> Result<BecReport> {
    let beta = a.beta;
    let ecc = graph.distances_from(&[0]).into_iter().max().unwrap_or(0).max(1);
    let sizes = a.stage_list()?.unwrap_or_else(|| (1..=ecc).collect());
    let exh = Exhaustion::finite(graph.clone(), 0, sizes.clone())?;
    let mut stages = Vec::new();
    let mut last = None;
    for &n in &sizes {
        let st = exh.stage(n)?;
        let sd = eigendecompose(&build_operator::<f64>(&st.graph, OperatorKind::Laplacian, None)?)?;
        let sol = solve_fugacity(&sd, beta, rho)?;
        stages.push(stage_row(n, &sd, &sol, beta));
        last = Some((st, sd, sol));
    }
    let volumes: Vec<usize> = stages.iter().map(|s| s.volume).collect();
    let per_stage: Vec<f64> = stages.iter().map(|s| s.critical_stage).collect();
    let critical_stages = critical_density_from(beta, Boundary::Free, &sizes, &volumes, &per_stage);
    let (st, sd, sol) = last.expect("at least one stage");
    // On a finite graph the last stage is the whole graph and ρ̄ is its
    // ground-mode-excluded density.
    let rho_bar = per_stage.last().copied();
    let regime = if rho_bar.is_some_and(|rb| rho > rb) {
        Regime::Condensed
    } else {
        Regime::Normal
    };
    let state = QuasiFreeState::from_solution(&sol);
    let dist = st.distances_from(0);
    let max_d = dist.iter().copied().filter(|&d| d != usize::MAX).max().unwrap_or(0);
    let delta = |i: usize| vec![(i, Complex::new(1.0, 0.0))];
    let mut odlro = Vec::new();
    for d in 0..=max_d {
        if let Some(j) = dist.iter().position(|&x| x == d) {
            let tp = two_point(&state, &delta(0), &delta(j), &sd)?;
            odlro.push(OdlroRow {
                distance: d,
                vertex: st.sites[j].clone(),
                two_point: tp.re,
            });
        }
    }
    let odlro_decay = decay(&odlro);
    let condensate = rho_bar.filter(|_| regime == Regime::Condensed).map(|rb| {
        let expected = rho - rb;
        let last_stage = sol.ground_density();
        Condensate {
            expected,
            last_stage,
            relative_gap: (last_stage - expected).abs() / expected,
        }
    });
    Ok(BecReport {
        source: name,
        beta,
        rho,
        regime,
        rho_bar,
        rho_bar_source: RhoBarSource::StageExtrapolation,
        criterion: None,
        critical_stages,
        infinite_volume: None,
        condensate,
        stages,
        odlro,
        odlro_decay,
    })
}
