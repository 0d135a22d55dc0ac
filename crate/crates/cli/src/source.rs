use std::fs;

use anyhow::{bail, Context, Result};
use netbec::graph::{
    make_defected, parse_graph, parse_potential, DefectRule, Exhaustion, Graph, PeriodicLattice, StageRule,
};

use crate::args::RunArgs;

pub enum Source {
    Lattice { name: String, lattice: PeriodicLattice },
    /// ℤ² with comb defects; walk classification only.
    Comb,
    Finite { name: String, graph: Graph },
}

pub const BUILTINS: [&str; 7] = ["z1", "z2", "z3", "z4", "ladder", "cubic2", "comb2d"];

pub fn load(a: &RunArgs) -> Result<Source> {
    if let Some(b) = &a.builtin {
        return builtin(b);
    }
    if let Some(path) = &a.graph {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let graph = parse_graph(&text)?;
        graph.require_connected()?;
        return Ok(Source::Finite {
            name: path.display().to_string(),
            graph,
        });
    }
    if let Some(path) = &a.lattice {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let lattice: PeriodicLattice = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        lattice.require_connected()?;
        return Ok(Source::Lattice {
            name: path.display().to_string(),
            lattice,
        });
    }
    bail!("one of --builtin, --graph or --lattice is required")
}

fn builtin(name: &str) -> Result<Source> {
    let lattice = match name {
        "z1" => PeriodicLattice::hypercubic(1),
        "z2" => PeriodicLattice::hypercubic(2),
        "z3" => PeriodicLattice::hypercubic(3),
        "z4" => PeriodicLattice::hypercubic(4),
        "ladder" => PeriodicLattice::ladder(),
        "cubic2" => PeriodicLattice::cubic_two_cell(),
        "comb2d" => return Ok(Source::Comb),
        other => bail!("unknown builtin `{other}`; expected one of {}", BUILTINS.join(", ")),
    };
    Ok(Source::Lattice {
        name: name.to_string(),
        lattice,
    })
}

impl Source {
    pub fn name(&self) -> String {
        match self {
            Source::Lattice { name, .. } | Source::Finite { name, .. } => name.clone(),
            Source::Comb => "comb2d".into(),
        }
    }

    pub fn periodic(&self, command: &str) -> Result<&PeriodicLattice> {
        match self {
            Source::Lattice { lattice, .. } => Ok(lattice),
            _ => bail!("{command} needs a periodic lattice; {} is not one", self.name()),
        }
    }

    /// Exhaustion used for walk classification.
    pub fn walk_exhaustion(&self, stages: Option<Vec<usize>>) -> Result<Exhaustion> {
        Ok(match self {
            Source::Lattice { lattice, .. } => Exhaustion::boxes(lattice.clone(), stages.unwrap_or(vec![1]))?,
            Source::Comb => make_defected(
                PeriodicLattice::hypercubic(2),
                DefectRule::Comb,
                StageRule::Boxes,
                stages.unwrap_or(vec![2, 4, 8, 16]),
            )?,
            Source::Finite { graph, .. } => Exhaustion::finite(graph.clone(), 0, stages.unwrap_or(vec![1]))?,
        })
    }
}

/// The potential from `--potential`, or the degrees (the Laplacian).
pub fn potential(a: &RunArgs, lattice: &PeriodicLattice) -> Result<(Vec<f64>, bool)> {
    match &a.potential {
        None => Ok((lattice.degrees().iter().map(|&d| d as f64).collect(), false)),
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let v = parse_potential(&text)?;
            if v.len() != lattice.fundamental_vertices() {
                bail!(
                    "potential has {} values for {} fundamental vertices",
                    v.len(),
                    lattice.fundamental_vertices()
                );
            }
            Ok((v, true))
        }
    }
}
