use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "netbec", version, about = "Bose-Einstein condensation of free bosons on graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Decide transience or recurrence of the simple random walk.
    ClassifyWalk(RunArgs),
    /// Fugacities, critical density, regime and long-range order along an
    /// exhaustion.
    BecReport(RunArgs),
    /// Band structure near the top and the condensation criterion of a
    /// periodic lattice.
    BlochBands(RunArgs),
}

/// Flags shared by all commands. Not every command reads every flag.
#[derive(Args, Debug, Clone, Serialize)]
pub struct RunArgs {
    /// Builtin graph: z1, z2, z3, z4, ladder, cubic2, comb2d.
    #[arg(long, group = "source")]
    pub builtin: Option<String>,
    /// Finite graph in the line format (`graph n`, `edge i j`).
    #[arg(long, group = "source")]
    pub graph: Option<PathBuf>,
    /// Periodic lattice as JSON.
    #[arg(long, group = "source")]
    pub lattice: Option<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    #[arg(long)]
    pub rho: Option<f64>,
    /// Stage half-widths (boxes) or radii (balls): `4,6,8` or `4..12`.
    #[arg(long)]
    pub stages: Option<String>,
    /// Momentum grid per axis.
    #[arg(long, default_value_t = 16)]
    pub grid: usize,
    #[arg(long, default_value_t = 2000)]
    pub nmax: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "netbec-out")]
    pub out: PathBuf,
    /// One value per fundamental-domain vertex.
    #[arg(long)]
    pub potential: Option<PathBuf>,
    /// Slack for the inequality checks.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

impl RunArgs {
    pub fn check(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            bail!("--beta must be positive");
        }
        if let Some(r) = self.rho {
            if !(r > 0.0 && r.is_finite()) {
                bail!("--rho must be positive");
            }
        }
        if self.nmax < 2 {
            bail!("--nmax must be at least 2");
        }
        if self.grid < 8 {
            bail!("--grid must be at least 8");
        }
        if !(self.tol > 0.0) {
            bail!("--tol must be positive");
        }
        Ok(())
    }

    pub fn stage_list(&self) -> Result<Option<Vec<usize>>> {
        self.stages.as_deref().map(parse_stages).transpose()
    }
}

pub fn parse_stages(s: &str) -> Result<Vec<usize>> {
    let s = s.trim();
    let out: Vec<usize> = if let Some((a, b)) = s.split_once("..") {
        let (a, b): (usize, usize) = (a.trim().parse()?, b.trim().parse()?);
        if a > b {
            bail!("empty stage range {s}");
        }
        (a..=b).collect()
    } else {
        s.split(',').map(|x| x.trim().parse()).collect::<Result<_, _>>()?
    };
    if out.is_empty() || out.contains(&0) {
        bail!("stages must be positive");
    }
    if out.windows(2).any(|w| w[1] <= w[0]) {
        bail!("stages must increase");
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stage_syntax() {
        assert_eq!(parse_stages("4..7").unwrap(), vec![4, 5, 6, 7]);
        assert_eq!(parse_stages("2, 4,8").unwrap(), vec![2, 4, 8]);
        assert!(parse_stages("4,2").is_err());
        assert!(parse_stages("0..3").is_err());
        assert!(parse_stages("x").is_err());
    }
}
