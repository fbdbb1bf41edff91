//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use randflight_core::counts::{CountDistribution, CountFamily};
use randflight_core::density::{LawKind, Model, RadialLaw};
use randflight_core::flight::FlightParams;
use randflight_core::SeriesControl;
use serde::Serialize;

use crate::batch::{simulate_batch_par, simulate_conditional_par};
use crate::io::{write_conditional_positions, write_file, write_positions, write_sidecar, write_table, Sidecar};
use crate::verify::{run_suite, Suite, VerifyOptions};
use crate::{exit, Error, Result};

/// Environment variable overriding the series term cap.
pub const MAX_TERMS_ENV: &str = "RANDFLIGHT_MAX_TERMS";

#[derive(Debug, Parser, Serialize)]
#[command(name = "randflight", version, about = "Random flights: simulation, exact laws and verification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Simulate final positions; writes `k,x1..xd` CSV.
    Simulate(SimulateArgs),
    /// Tabulate a radial law; writes `r,density,radial_marginal` CSV.
    Density(DensityArgs),
    /// Tabulate the count law; writes `k,pmf,cdf` CSV.
    Pmf(PmfArgs),
    /// Run a verification suite; writes a JSON report.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelArg {
    X,
    Y,
    U3,
}

impl From<ModelArg> for Model {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::X => Model::X,
            ModelArg::Y => Model::Y,
            ModelArg::U3 => Model::U3,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FlightArgs {
    #[arg(long, value_enum)]
    pub model: ModelArg,
    #[arg(long)]
    pub dim: u32,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
}

impl FlightArgs {
    fn params(&self) -> Result<FlightParams> {
        Ok(FlightParams::new(self.model.into(), self.dim, self.c, self.lambda, self.t)?)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub flight: FlightArgs,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Condition on exactly this many direction changes.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LawArg {
    Unconditional,
    Conditional,
    Plane,
    Line,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DensityArgs {
    #[command(flatten)]
    pub flight: FlightArgs,
    /// Law to tabulate; `--k` alone selects the conditional law.
    #[arg(long, value_enum)]
    pub law: Option<LawArg>,
    #[arg(long)]
    pub k: Option<usize>,
    /// Radii `a:b:step`.
    #[arg(long)]
    pub grid: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PmfArgs {
    #[arg(long, value_enum)]
    pub model: ModelArg,
    #[arg(long)]
    pub dim: u32,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    /// Last `k` to print (default: until the cdf reaches 1 - 1e-12).
    #[arg(long)]
    pub kmax: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SuiteArg {
    Counts,
    Mixture,
    Mc,
    Hyperbessel,
    Pde,
    All,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Counts => Suite::Counts,
            SuiteArg::Mixture => Suite::Mixture,
            SuiteArg::Mc => Suite::Mc,
            SuiteArg::Hyperbessel => Suite::Hyperbessel,
            SuiteArg::Pde => Suite::Pde,
            SuiteArg::All => Suite::All,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub suite: SuiteArg,
    /// Single PDE check: cadd, cdim, ddim, klein-gordon, varte, xte, obe, pro1, 324, sepr, simil, x3, bessel.
    #[arg(long)]
    pub which: Option<String>,
    #[arg(long, value_enum)]
    pub model: Option<ModelArg>,
    #[arg(long)]
    pub dim: Option<u32>,
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    #[arg(long, default_value_t = 100_000)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Tolerance for the deterministic checks.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// The parsed command plus the environment it ran in, echoed into sidecars.
#[derive(Debug, Serialize)]
struct RunConfig<'a> {
    #[serde(flatten)]
    cli: &'a Cli,
    series_max_terms: usize,
}

/// Series control from the defaults and `RANDFLIGHT_MAX_TERMS`.
pub fn series_control() -> Result<SeriesControl> {
    let ctl = SeriesControl::default();
    match std::env::var(MAX_TERMS_ENV) {
        Ok(v) => {
            let n: usize = v
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("{MAX_TERMS_ENV}={v:?} is not a positive integer")))?;
            Ok(ctl.with_max_terms(n)?)
        }
        Err(std::env::VarError::NotPresent) => Ok(ctl),
        Err(e) => Err(Error::Config(format!("{MAX_TERMS_ENV}: {e}"))),
    }
}

/// Parses `a:b:step` into the radii `a, a + step, ...` not exceeding `b`.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = || Error::Config(format!("--grid {spec:?}: expected a:b:step with 0 <= a <= b and step > 0"));
    let parts: Vec<f64> = spec
        .split(':')
        .map(|s| s.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    let [a, b, step] = parts[..] else { return Err(bad()) };
    if !(a >= 0.0 && b >= a && step > 0.0 && b.is_finite()) {
        return Err(bad());
    }
    let count = ((b - a) / step * (1.0 + 1e-12)).floor() as usize + 1;
    if count > 10_000_000 {
        return Err(Error::Config(format!("--grid {spec:?} has too many points")));
    }
    Ok((0..count).map(|i| a + i as f64 * step).collect())
}

fn emit(
    out: Option<&Path>,
    command: &str,
    config: &RunConfig<'_>,
    seed: Option<u64>,
    rows: usize,
    columns: &[&str],
    body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>,
) -> Result<()> {
    match out {
        Some(path) => {
            write_file(path, body)?;
            write_sidecar(
                path,
                &Sidecar {
                    tool: crate::io::TOOL,
                    version: crate::io::VERSION,
                    command,
                    config,
                    seed,
                    output: path.display().to_string(),
                    rows,
                    columns: columns.iter().map(|s| s.to_string()).collect(),
                },
            )?;
            Ok(())
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            body(&mut lock).map_err(|source| Error::Io {
                path: PathBuf::from("<stdout>"),
                source,
            })
        }
    }
}

fn simulate(a: &SimulateArgs, cfg: &RunConfig<'_>, ctl: &SeriesControl) -> Result<i32> {
    let params = a.flight.params()?;
    if a.n == 0 {
        return Err(Error::Config("--n must be at least 1".into()));
    }
    let d = params.dim() as usize;
    let mut cols = vec!["k".to_string()];
    cols.extend((1..=d).map(|j| format!("x{j}")));
    match a.k {
        Some(k) => {
            let rows = simulate_conditional_par(&params, k, a.n, a.seed);
            let c: Vec<&str> = cols.iter().map(String::as_str).collect();
            emit(a.out.as_deref(), "simulate", cfg, Some(a.seed), a.n, &c, |w| {
                write_conditional_positions(w, k, &rows, d)
            })?;
        }
        None => {
            let batch = simulate_batch_par(&params, a.n, a.seed, ctl)?;
            if batch.events.is_some() {
                cols.push("events".into());
            }
            let c: Vec<&str> = cols.iter().map(String::as_str).collect();
            emit(a.out.as_deref(), "simulate", cfg, Some(a.seed), a.n, &c, |w| write_positions(w, &batch))?;
        }
    }
    Ok(exit::OK)
}

fn density(a: &DensityArgs, cfg: &RunConfig<'_>, ctl: &SeriesControl) -> Result<i32> {
    let f = &a.flight;
    let kind = match (a.law, a.k) {
        (None | Some(LawArg::Conditional), Some(k)) => LawKind::Conditional(k),
        (Some(LawArg::Conditional), None) => return Err(Error::Config("--law conditional needs --k".into())),
        (None | Some(LawArg::Unconditional), None) => LawKind::Unconditional,
        (Some(LawArg::Plane), None) => LawKind::ProjPlane,
        (Some(LawArg::Line), None) => LawKind::ProjLine,
        (Some(_), Some(_)) => return Err(Error::Config("--k only applies to the conditional law".into())),
    };
    let law = RadialLaw::new(f.model.into(), f.dim, f.c, f.lambda, f.t, kind, *ctl)?;
    let radii = parse_grid(&a.grid)?;
    let ct = law.radius();
    if let Some(r) = radii.iter().find(|r| **r >= ct) {
        return Err(Error::Config(format!("grid point r = {r} is not inside the ball r < ct = {ct}")));
    }
    let rows = radii
        .iter()
        .map(|&r| Ok(vec![r, law.density(r)?, law.radial_marginal(r)?]))
        .collect::<Result<Vec<_>>>()?;
    let cols = ["r", "density", "radial_marginal"];
    emit(a.out.as_deref(), "density", cfg, None, rows.len(), &cols, |w| write_table(w, &cols, &rows))?;
    Ok(exit::OK)
}

fn pmf(a: &PmfArgs, cfg: &RunConfig<'_>, ctl: &SeriesControl) -> Result<i32> {
    let family = match a.model {
        ModelArg::X => CountFamily::First,
        ModelArg::Y => CountFamily::Second,
        ModelArg::U3 => CountFamily::HomogeneousPoisson,
    };
    if a.model == ModelArg::U3 && a.dim != 3 {
        return Err(Error::Config("the U3 motion is three-dimensional; use --dim 3".into()));
    }
    let dist = CountDistribution::new(family, a.dim, a.lambda, a.t, ctl)?;
    let last = a.kmax.unwrap_or(dist.support_len() - 1);
    let mut acc = 0.0;
    let rows: Vec<Vec<f64>> = (0..=last)
        .map(|k| {
            let p = dist.pmf(k);
            acc += p;
            vec![k as f64, p, acc.min(1.0)]
        })
        .collect();
    let cols = ["k", "pmf", "cdf"];
    emit(a.out.as_deref(), "pmf", cfg, None, rows.len(), &cols, |w| {
        writeln!(w, "{}", cols.join(","))?;
        for r in &rows {
            writeln!(w, "{},{},{}", r[0] as usize, crate::io::fmt17(r[1]), crate::io::fmt17(r[2]))?;
        }
        Ok(())
    })?;
    Ok(exit::OK)
}

fn verify(a: &VerifyArgs, cfg: &RunConfig<'_>, ctl: &SeriesControl) -> Result<i32> {
    if a.which.is_some() && a.suite != SuiteArg::Pde {
        return Err(Error::Config("--which selects a check of the pde suite".into()));
    }
    let opts = VerifyOptions {
        model: a.model.map(Into::into),
        dim: a.dim,
        lambda: a.lambda,
        c: a.c,
        t: a.t,
        n: a.n,
        seed: a.seed,
        which: a.which.clone(),
        tol: a.tol,
        ctl: *ctl,
    };
    let report = run_suite(a.suite.into(), &opts)?;
    let text = serde_json::to_string_pretty(&report)?;
    if let Some(path) = &a.out {
        write_file(path, |w| writeln!(w, "{text}"))?;
        write_sidecar(
            path,
            &Sidecar {
                tool: crate::io::TOOL,
                version: crate::io::VERSION,
                command: "verify",
                config: cfg,
                seed: Some(a.seed),
                output: path.display().to_string(),
                rows: report.checks.len(),
                columns: vec![],
            },
        )?;
    }
    println!("{text}");
    for c in report.checks.iter().filter(|c| !c.pass && !c.informational) {
        eprintln!("FAILED {}", c.name);
    }
    Ok(if report.pass { exit::OK } else { exit::VERIFY_FAILED })
}

/// Runs a parsed command and returns the exit code.
pub fn run(cli: &Cli) -> Result<i32> {
    let ctl = series_control()?;
    let cfg = RunConfig {
        cli,
        series_max_terms: ctl.max_terms,
    };
    match &cli.command {
        Command::Simulate(a) => simulate(a, &cfg, &ctl),
        Command::Density(a) => density(a, &cfg, &ctl),
        Command::Pmf(a) => pmf(a, &cfg, &ctl),
        Command::Verify(a) => verify(a, &cfg, &ctl),
    }
}

/// Parses `args` (including the program name), runs, and returns the exit
/// code; errors are printed to stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::CONFIG } else { exit::OK };
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("0:1:0.25").unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(parse_grid("0:0.3:0.1").unwrap().len(), 4);
        for bad in ["0:1", "1:0:0.1", "0:1:0", "a:b:c", "0:1:-1"] {
            assert!(parse_grid(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
