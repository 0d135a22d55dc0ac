use anyhow::Result;
use netbec::bloch::{
    band_top, bec_criterion, bose_density, ground_state_compare, BecCriterion, BecVerdict, BlochBand, BlochHamiltonian,
    BlochQuadrature, SandwichReport,
};
use serde::Serialize;

use crate::args::RunArgs;
use crate::output::{num, Output};
use crate::source;

#[derive(Serialize)]
struct Sandwich {
    /// M = max Ω / min Ω over the cell.
    m: f64,
    report: SandwichReport,
    m_line_holds: bool,
    m2_line_holds: bool,
}

#[derive(Serialize)]
struct BandsReport<'a> {
    source: String,
    nu: usize,
    orbits: usize,
    potential: &'a [f64],
    band: &'a BlochBand,
    criterion: &'a BecCriterion,
    beta: f64,
    /// ρ_β, present when the criterion allows condensation.
    rho_beta: Option<f64>,
    sandwich: Option<Sandwich>,
}

pub fn run(a: &RunArgs) -> Result<String> {
    a.check()?;
    let src = source::load(a)?;
    let lat = src.periodic("bloch-bands")?;
    let (v, custom) = source::potential(a, lat)?;
    let band = band_top(lat, &v, a.grid)?;
    let criterion = bec_criterion(lat, &v, &band)?;
    let rho_beta = if criterion.verdict == BecVerdict::BecPossible {
        let h = BlochHamiltonian::new(lat, &v)?;
        Some(bose_density(&h, a.beta, BlochQuadrature::default())?)
    } else {
        None
    };
    let sandwich = if custom {
        let (gs, report) = ground_state_compare(lat, &v, a.grid)?;
        Some(Sandwich {
            m: gs.m,
            m_line_holds: report.m_line_holds(a.tol),
            m2_line_holds: report.m2_line_holds(a.tol),
            report,
        })
    } else {
        None
    };

    let mut out = Output::new("bloch-bands", a)?;
    let nu = lat.nu();
    let orbits = lat.fundamental_vertices();
    let header: Vec<String> = (1..=nu)
        .map(|k| format!("p{k}"))
        .chain((1..=orbits).map(|k| format!("e{k}")))
        .collect();
    let rows: Vec<Vec<String>> = band
        .points
        .iter()
        .zip(&band.eigenvalues)
        .map(|(p, e)| p.iter().chain(e).map(|&x| num(x)).collect())
        .collect();
    out.csv("bands.csv", &header, &rows)?;
    let report = BandsReport {
        source: src.name(),
        nu,
        orbits,
        potential: &v,
        band: &band,
        criterion: &criterion,
        beta: a.beta,
        rho_beta,
        sandwich,
    };
    out.json("bloch.json", &report)?;
    out.finish()?;
    let verdict = serde_json::to_value(criterion.verdict)?;
    let rb = rho_beta.map(|r| format!(", rho_beta = {r}")).unwrap_or_default();
    Ok(format!("{}: {}{rb}", src.name(), verdict.as_str().unwrap_or("?")))
}
