//! Report files. JSON reports hold only deterministic content; the
//! wall-clock goes to a `timing.json` sidecar.

use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;

use crate::args::RunArgs;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema_version: u32,
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    config: ConfigEcho<'a>,
    result: &'a T,
}

/// The run configuration minus the output directory, so that two runs
/// writing to different places still produce identical reports.
#[derive(Serialize)]
struct ConfigEcho<'a> {
    builtin: &'a Option<String>,
    graph: &'a Option<PathBuf>,
    lattice: &'a Option<PathBuf>,
    beta: f64,
    rho: Option<f64>,
    stages: &'a Option<String>,
    grid: usize,
    nmax: usize,
    seed: u64,
    potential: &'a Option<PathBuf>,
    tol: f64,
}

impl<'a> ConfigEcho<'a> {
    fn new(a: &'a RunArgs) -> Self {
        Self {
            builtin: &a.builtin,
            graph: &a.graph,
            lattice: &a.lattice,
            beta: a.beta,
            rho: a.rho,
            stages: &a.stages,
            grid: a.grid,
            nmax: a.nmax,
            seed: a.seed,
            potential: &a.potential,
            tol: a.tol,
        }
    }
}

pub struct Output<'a> {
    dir: PathBuf,
    command: &'static str,
    args: &'a RunArgs,
    start: Instant,
    files: Vec<String>,
}

impl<'a> Output<'a> {
    pub fn new(command: &'static str, args: &'a RunArgs) -> Result<Self> {
        fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
        Ok(Self {
            dir: args.out.clone(),
            command,
            args,
            start: Instant::now(),
            files: Vec::new(),
        })
    }

    pub fn json<T: Serialize>(&mut self, name: &str, result: &T) -> Result<()> {
        let env = Envelope {
            schema_version: SCHEMA_VERSION,
            tool: "netbec",
            version: env!("CARGO_PKG_VERSION"),
            command: self.command,
            config: ConfigEcho::new(self.args),
            result,
        };
        let mut text = serde_json::to_string_pretty(&env)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    pub fn csv(&mut self, name: &str, header: &[String], rows: &[Vec<String>]) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        let bytes = w.into_inner().context("flushing csv")?;
        self.write(name, &bytes)
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.files.push(name.to_string());
        Ok(())
    }

    /// Writes the timing sidecar and returns the list of report files.
    pub fn finish(mut self) -> Result<Vec<String>> {
        #[derive(Serialize)]
        struct Timing<'b> {
            command: &'b str,
            wall_clock_seconds: f64,
            files: &'b [String],
        }
        let t = Timing {
            command: self.command,
            wall_clock_seconds: self.start.elapsed().as_secs_f64(),
            files: &self.files,
        };
        let text = serde_json::to_string_pretty(&t)? + "\n";
        let files = self.files.clone();
        self.write("timing.json", text.as_bytes())?;
        Ok(files)
    }
}

pub fn num(x: f64) -> String {
    format!("{x}")
}
