//! End-to-end runs: the two sharpness constructions, the random estimate
//! suite, convergence studies and the identity checks. Each run is a pure
//! function of its parameters and produces a [`RunBundle`].

mod sharpness;
mod studies;
mod suite;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimates::{reports_to_csv, reports_to_json, EstimateReport};
use crate::solver::{export, FlowTrajectory, Scheme};

pub use sharpness::{run_sharpness_area, run_sharpness_gradient, AreaParams, GradientParams};
pub use studies::{
    convergence_errors, energy_patch_trajectory, fitted_orders, run_convergence, run_identity_suite, ConvergenceParams,
    IdentityParams, Problem,
};
pub use suite::{random_initial_data, run_estimate_suite, run_simulate, InitialData, SimulateParams, SuiteParams};

/// Everything one run produces.
#[derive(Debug, Clone)]
pub struct RunBundle {
    pub experiment: String,
    pub reports: Vec<EstimateReport>,
    /// Named trajectories; the first one also feeds `series.csv`.
    pub trajectories: Vec<(String, FlowTrajectory)>,
    /// Extra CSV tables, by file stem.
    pub tables: Vec<(String, String)>,
}

impl RunBundle {
    pub fn new(experiment: impl Into<String>) -> Self {
        Self {
            experiment: experiment.into(),
            reports: vec![],
            trajectories: vec![],
            tables: vec![],
        }
    }

    pub fn pass(&self) -> bool {
        self.reports.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &EstimateReport> {
        self.reports.iter().filter(|r| !r.pass)
    }

    pub fn report(&self, name: &str) -> Option<&EstimateReport> {
        self.reports.iter().find(|r| r.name == name)
    }

    pub fn report_csv(&self) -> String {
        reports_to_csv(&self.reports)
    }

    pub fn report_json(&self) -> String {
        reports_to_json(&self.reports)
    }

    /// Writes `report.json`, `report.csv`, one `.csv` and one `.mcfg` file per
    /// trajectory, `series.csv` and the extra tables into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("report.json"), self.report_json())?;
        std::fs::write(dir.join("report.csv"), self.report_csv())?;
        for (name, traj) in &self.trajectories {
            export::write_csv_file(traj, &dir.join(format!("{name}.csv")))?;
            export::write_binary_file(traj, &dir.join(format!("{name}.mcfg")))?;
        }
        if let Some((_, traj)) = self.trajectories.first() {
            std::fs::write(dir.join("series.csv"), series_csv(traj))?;
        }
        for (stem, body) in &self.tables {
            std::fs::write(dir.join(format!("{stem}.csv")), body)?;
        }
        Ok(())
    }
}

/// Plot-ready table: node coordinates, then one column of `u` per snapshot.
pub fn series_csv(traj: &FlowTrajectory) -> String {
    let g = traj.grid();
    let dim = g.dim();
    let mut out = String::from(if dim == 1 { "x" } else { "x,y" });
    for t in traj.times() {
        let _ = write!(out, ",u(t={t})");
    }
    out.push('\n');
    for p in 0..g.len() {
        let x = g.point(p);
        let _ = write!(out, "{}", x[0]);
        if dim == 2 {
            let _ = write!(out, ",{}", x[1]);
        }
        for s in traj.snapshots() {
            let _ = write!(out, ",{}", s.values()[p]);
        }
        out.push('\n');
    }
    out
}

/// A run description, as read from a TOML or JSON config file.
///
/// ```toml
/// kind = "sharpness-gradient"
/// output = "runs/gradient"
/// lambda = 2.0
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ExperimentSpec {
    SharpnessGradient(GradientParams),
    SharpnessArea(AreaParams),
    EstimateSuite(SuiteParams),
    Convergence(ConvergenceParams),
    IdentitySuite(IdentityParams),
    Simulate(SimulateParams),
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn name(&self) -> &'static str {
        match self {
            ExperimentSpec::SharpnessGradient(_) => "sharpness-gradient",
            ExperimentSpec::SharpnessArea(_) => "sharpness-area",
            ExperimentSpec::EstimateSuite(_) => "estimate-suite",
            ExperimentSpec::Convergence(_) => "convergence",
            ExperimentSpec::IdentitySuite(_) => "identity-suite",
            ExperimentSpec::Simulate(_) => "simulate",
        }
    }

    pub fn output(&self) -> Option<&PathBuf> {
        match self {
            ExperimentSpec::SharpnessGradient(p) => p.output.as_ref(),
            ExperimentSpec::SharpnessArea(p) => p.output.as_ref(),
            ExperimentSpec::EstimateSuite(p) => p.output.as_ref(),
            ExperimentSpec::Convergence(p) => p.output.as_ref(),
            ExperimentSpec::IdentitySuite(p) => p.output.as_ref(),
            ExperimentSpec::Simulate(p) => p.output.as_ref(),
        }
    }

    pub fn run(&self) -> Result<RunBundle> {
        match self {
            ExperimentSpec::SharpnessGradient(p) => run_sharpness_gradient(p),
            ExperimentSpec::SharpnessArea(p) => run_sharpness_area(p),
            ExperimentSpec::EstimateSuite(p) => run_estimate_suite(p),
            ExperimentSpec::Convergence(p) => run_convergence(p),
            ExperimentSpec::IdentitySuite(p) => run_identity_suite(p),
            ExperimentSpec::Simulate(p) => run_simulate(p),
        }
    }
}

fn default_scheme() -> Scheme {
    Scheme::SemiImplicit
}
