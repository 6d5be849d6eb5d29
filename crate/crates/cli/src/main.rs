//! `mcflab`: runs the experiments, writes per-run output directories and
//! exits with status 0 iff every check passes.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use mcflab_core::estimates::{reports_to_csv, reports_to_json};
use mcflab_core::experiments::{
    AreaParams, ConvergenceParams, GradientParams, IdentityParams, InitialData, Problem, SimulateParams, SuiteParams,
};
use mcflab_core::{EstimateReport, ExperimentSpec, RunBundle, Scheme};
use rayon::prelude::*;

#[derive(Parser)]
#[command(
    name = "mcflab",
    version,
    about = "Mean curvature flow of graphs: solvers and estimate checks"
)]
struct Cli {
    /// Output directory; defaults to `runs/<experiment>`.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Only print failing checks.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Explicit,
    SemiImplicit,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Explicit => Scheme::ExplicitEuler,
            SchemeArg::SemiImplicit => Scheme::SemiImplicit,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum InitialArg {
    Zero,
    Bump,
    GrimReaper,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProblemArg {
    GrimReaper,
    TranslatingPair,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve one initial datum and export the trajectory.
    Simulate {
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long, value_enum, default_value = "bump")]
        initial: InitialArg,
        #[arg(long, default_value_t = 1.0)]
        amplitude: f64,
        #[arg(long, default_value_t = 0.8)]
        radius: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        half_width: f64,
        #[arg(long, default_value_t = 0.02)]
        h: f64,
        #[arg(long, value_enum, default_value = "semi-implicit")]
        scheme: SchemeArg,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long, default_value_t = 0.9)]
        cfl: f64,
        #[arg(long, default_value_t = 0.5)]
        t_end: f64,
        #[arg(long, default_value_t = 0.1)]
        cadence: f64,
    },
    /// Gradient sharpness construction at scale λ.
    SharpnessGradient {
        #[arg(long, default_value_t = 2.0)]
        lambda: f64,
        #[arg(long)]
        h_min: Option<f64>,
        #[arg(long, default_value_t = 0.05)]
        tol: f64,
    },
    /// Area sharpness construction at order k.
    SharpnessArea {
        #[arg(long, default_value_t = 2)]
        k: u32,
        #[arg(long)]
        h_min: Option<f64>,
        #[arg(long, default_value_t = 0.05)]
        tol: f64,
    },
    /// Random flows checked against the interior estimates.
    EstimateSuite {
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 20)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Grim-reaper convergence study.
    Convergence {
        #[arg(long, value_enum, default_value = "grim-reaper")]
        problem: ProblemArg,
        /// Cell counts, each twice the previous.
        #[arg(long, value_delimiter = ',', default_values_t = [200usize, 400, 800])]
        levels: Vec<usize>,
        #[arg(long, value_enum, default_value = "semi-implicit")]
        scheme: SchemeArg,
    },
    /// Energy and heat-operator identities under refinement.
    IdentitySuite,
    /// Re-print the report of an earlier run.
    Report {
        /// Run directory containing `report.json`.
        dir: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Run experiments described by TOML config files, in parallel.
    Run {
        #[arg(long = "config", short, required = true)]
        configs: Vec<PathBuf>,
    },
}

fn spec_for(command: Command) -> Result<ExperimentSpec> {
    Ok(match command {
        Command::Simulate {
            dim,
            initial,
            amplitude,
            radius,
            seed,
            half_width,
            h,
            scheme,
            dt,
            cfl,
            t_end,
            cadence,
        } => ExperimentSpec::Simulate(SimulateParams {
            dim,
            half_width,
            h,
            scheme: scheme.into(),
            dt,
            cfl,
            t_end,
            cadence,
            initial: match initial {
                InitialArg::Zero => InitialData::Zero,
                InitialArg::Bump => InitialData::Bump { amplitude, radius },
                InitialArg::GrimReaper => InitialData::GrimReaper,
                InitialArg::Random => InitialData::Random { amplitude, seed },
            },
            output: None,
        }),
        Command::SharpnessGradient { lambda, h_min, tol } => ExperimentSpec::SharpnessGradient(GradientParams {
            lambda,
            h_min,
            tol,
            ..Default::default()
        }),
        Command::SharpnessArea { k, h_min, tol } => ExperimentSpec::SharpnessArea(AreaParams {
            k,
            h_min,
            tol,
            ..Default::default()
        }),
        Command::EstimateSuite { n, count, seed } => ExperimentSpec::EstimateSuite(SuiteParams {
            n,
            count,
            seed,
            ..Default::default()
        }),
        Command::Convergence {
            problem,
            levels,
            scheme,
        } => ExperimentSpec::Convergence(ConvergenceParams {
            problem: match problem {
                ProblemArg::GrimReaper => Problem::GrimReaper,
                ProblemArg::TranslatingPair => Problem::TranslatingPair,
            },
            levels,
            scheme: scheme.into(),
            ..Default::default()
        }),
        Command::IdentitySuite => ExperimentSpec::IdentitySuite(IdentityParams::default()),
        Command::Report { .. } | Command::Run { .. } => bail!("not an experiment"),
    })
}

fn print_reports(label: &str, reports: &[EstimateReport], quiet: bool) {
    for r in reports.iter().filter(|r| !quiet || !r.pass) {
        println!(
            "{label} {} {:<28} measured {:>12.5e}  bound {:>12.5e}  margin {:>12.5e}",
            if r.pass { "PASS" } else { "FAIL" },
            r.name,
            r.measured,
            r.bound,
            r.margin
        );
    }
}

fn finish(spec: &ExperimentSpec, bundle: &RunBundle, dir: &Path, quiet: bool) -> Result<bool> {
    bundle
        .write(dir)
        .with_context(|| format!("writing {}", dir.display()))?;
    print_reports(spec.name(), &bundle.reports, quiet);
    let failed = bundle.failures().count();
    println!(
        "{}: {} checks, {failed} failed, output in {}",
        spec.name(),
        bundle.reports.len(),
        dir.display()
    );
    Ok(failed == 0)
}

fn default_dir(spec: &ExperimentSpec) -> PathBuf {
    Path::new("runs").join(spec.name())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Report { dir, format } => {
            let path = dir.join("report.json");
            let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            let reports: Vec<EstimateReport> =
                serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
            match format {
                Format::Csv => print!("{}", reports_to_csv(&reports)),
                Format::Json => println!("{}", reports_to_json(&reports)),
            }
            Ok(reports.iter().all(|r| r.pass))
        }
        Command::Run { configs } => {
            let specs = configs
                .iter()
                .map(|p| {
                    let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                    ExperimentSpec::from_toml(&text).with_context(|| format!("parsing {}", p.display()))
                })
                .collect::<Result<Vec<_>>>()?;
            let multiple = specs.len() > 1;
            let bundles: Vec<_> = specs.par_iter().map(|s| s.run()).collect();
            let mut ok = true;
            for ((spec, bundle), path) in specs.iter().zip(bundles).zip(&configs) {
                let bundle = bundle.with_context(|| format!("running {}", path.display()))?;
                let dir = match (spec.output(), &cli.output) {
                    (Some(d), _) => d.clone(),
                    (None, Some(base)) if multiple => base.join(path.file_stem().unwrap_or_default()),
                    (None, Some(base)) => base.clone(),
                    (None, None) => default_dir(spec),
                };
                ok &= finish(spec, &bundle, &dir, cli.quiet)?;
            }
            Ok(ok)
        }
        command => {
            let spec = spec_for(command)?;
            let bundle = spec.run()?;
            let dir = cli.output.clone().unwrap_or_else(|| default_dir(&spec));
            finish(&spec, &bundle, &dir, cli.quiet)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
