//! The two constructions showing that the gradient and area estimates are
//! sharp: data squeezed between translating reapers, evolved to t = 1 and
//! measured against the conclusions the barriers force.

use std::f64::consts::PI;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::RunBundle;
use crate::error::{Error, Result};
use crate::estimates::EstimateReport;
use crate::explicit::{
    area_sharpness_data, area_sharpness_profile, gradient_barriers, gradient_sharpness_data,
    gradient_sharpness_profile, AlternatingFamily, Constraint, Relation,
};
use crate::geometry::compute_geometry;
use crate::grid::{quadrature, Axis, Cuboid, Grid};
use crate::solver::{comparison_check, evolve, FlowTrajectory, SolverConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GradientParams {
    pub lambda: f64,
    /// Smallest grid spacing, used at every step edge and probe point.
    /// Defaults to a sixteenth of the fitted step width.
    pub h_min: Option<f64>,
    pub ratio: f64,
    pub h_max: f64,
    pub dt: f64,
    pub ramp_initial: f64,
    pub ramp_growth: f64,
    pub cadence: f64,
    /// Relative allowance on the sharpness conclusions.
    pub tol: f64,
    pub output: Option<PathBuf>,
}

impl Default for GradientParams {
    fn default() -> Self {
        Self {
            lambda: 2.0,
            h_min: None,
            ratio: 1.1,
            h_max: 0.02,
            dt: 1e-3,
            ramp_initial: 1e-12,
            ramp_growth: 1.2,
            cadence: 0.1,
            tol: 0.05,
            output: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AreaParams {
    pub k: u32,
    pub h_min: Option<f64>,
    pub ratio: f64,
    pub h_max: f64,
    pub dt: f64,
    pub ramp_initial: f64,
    pub ramp_growth: f64,
    pub cadence: f64,
    pub tol: f64,
    pub output: Option<PathBuf>,
}

impl Default for AreaParams {
    fn default() -> Self {
        Self {
            k: 2,
            h_min: None,
            ratio: 1.1,
            h_max: 0.02,
            dt: 1e-3,
            ramp_initial: 1e-12,
            ramp_growth: 1.2,
            cadence: 0.1,
            tol: 0.05,
            output: None,
        }
    }
}

fn resolution(h_min: Option<f64>, width: f64, extra: f64) -> Result<f64> {
    let required = (width / 8.0).min(extra);
    let h = h_min.unwrap_or(width / 16.0);
    if !(h > 0.0 && h <= required) {
        return Err(Error::Parameter(format!(
            "resolution insufficient: h_min = {h:e}, the construction needs h ≤ {required:e}"
        )));
    }
    Ok(h)
}

fn config(dt: f64, ramp: (f64, f64), cadence: f64) -> SolverConfig {
    SolverConfig::semi_implicit(dt, 1.0)
        .with_ramp(ramp.0, ramp.1)
        .with_cadence(cadence)
}

/// Barrier ordering over every snapshot, restricted to each barrier's strip.
fn ordering_report(name: &str, traj: &FlowTrajectory, constraints: &[Constraint]) -> EstimateReport {
    let mut worst = f64::INFINITY;
    let mut at = (f64::NAN, f64::NAN);
    let mut checked = 0;
    for c in constraints {
        let b = c.barrier;
        let barrier = move |x: &[f64], t: f64| b.value(x[0], t).ok();
        let rep = comparison_check(traj, &barrier, c.relation, &|_, _| true, 0.0);
        checked += rep.checked;
        if rep.min_gap < worst {
            worst = rep.min_gap;
            if let Some((t, x)) = rep.min_at {
                at = (t, x[0]);
            }
        }
    }
    EstimateReport::at_least(name, worst, 0.0, 0.0)
        .with("t", at.0)
        .with("x", at.1)
        .with("points", checked as f64)
}

/// Gradient sharpness at scale `λ`: the evolved data must stay between the
/// shifted reapers `u⁺` and `u⁻`, which forces a difference quotient of at
/// least `λ e^{λ²}` across `±e^{−λ²}` at t = 1.
pub fn run_sharpness_gradient(p: &GradientParams) -> Result<RunBundle> {
    let lam = p.lambda;
    if !(lam > 1.0 && lam <= 2.5) {
        return Err(Error::Parameter(format!("λ must lie in (1, 2.5], got {lam}")));
    }
    let (profile, _) = gradient_sharpness_profile(lam)?;
    let probe = (-lam * lam).exp();
    let d = profile.width;
    let h_min = resolution(p.h_min, d, probe / 8.0)?;
    let half = PI / lam;
    let foci = [-half, -half + d, -probe, -d, 0.0, d, probe, half - d, half];
    let axis = Axis::graded(-4.0 * half, 4.0 * half, &foci, h_min, p.ratio, p.h_max)?;
    let grid = Grid::new(vec![axis])?;
    let data = gradient_sharpness_data(lam, &grid)?;
    let traj = evolve(&data.field, &config(p.dt, (p.ramp_initial, p.ramp_growth), p.cadence))?;

    let (upper, lower) = gradient_barriers(lam)?;
    let w1 = traj.last();
    let ax = grid.axis(0);
    let w_minus = w1.values()[ax.nearest(-probe)];
    let w_plus = w1.values()[ax.nearest(probe)];
    let quotient = (w_plus - w_minus) / (2.0 * probe);
    let threshold = lam * (lam * lam).exp();
    let sup0 = data.field.sup_norm();

    let mut b = RunBundle::new("sharpness-gradient");
    let ctx = |r: EstimateReport| r.with("lambda", lam).with("h_min", h_min).with("dt", p.dt);
    b.reports.push(ctx(ordering_report(
        "barrier_ordering",
        &traj,
        &[
            Constraint {
                barrier: upper,
                relation: Relation::Below,
            },
            Constraint {
                barrier: lower,
                relation: Relation::Above,
            },
        ],
    )));
    b.reports.push(ctx(EstimateReport::new(
        "upper_barrier_at_probe",
        upper.value(-probe, 1.0)?,
        -lam,
        0.0,
    )));
    b.reports.push(ctx(EstimateReport::at_least(
        "lower_barrier_at_probe",
        lower.value(probe, 1.0)?,
        lam,
        0.0,
    )));
    b.reports.push(ctx(
        EstimateReport::new("w_left_probe", w_minus, -lam, p.tol * lam).with("x", -probe)
    ));
    b.reports.push(ctx(
        EstimateReport::at_least("w_right_probe", w_plus, lam, p.tol * lam).with("x", probe)
    ));
    b.reports.push(ctx(EstimateReport::at_least(
        "difference_quotient",
        quotient,
        threshold,
        p.tol * threshold,
    )));
    b.reports
        .push(ctx(EstimateReport::at_least("initial_sup_lower", sup0, 3.0 * lam, 0.0)));
    b.reports
        .push(ctx(EstimateReport::new("initial_sup_upper", sup0, 4.0 * lam, 0.0)));
    b.reports.push(ctx(EstimateReport::at_least(
        "initial_ordering_gap",
        data.min_gap,
        0.0,
        0.0,
    )
    .with("width", d)));
    b.trajectories.push(("w".into(), traj));
    Ok(b)
}

/// Area sharpness at order `k`: data alternating between the members of the
/// alternating reaper family must, at t = 1, cross ±k at every strip
/// midpoint, so the length over `[−π, π]` is at least `4k² − 2k`.
pub fn run_sharpness_area(p: &AreaParams) -> Result<RunBundle> {
    let k = p.k;
    if k < 2 {
        return Err(Error::Parameter(format!("k must be at least 2, got {k}")));
    }
    let kf = k as f64;
    let ki = k as i64;
    let (profile, constraints) = area_sharpness_profile(k)?;
    let d = profile.width;
    let h_min = resolution(p.h_min, d, f64::INFINITY)?;
    let fam = AlternatingFamily::new(k)?;
    let mut foci = vec![];
    for j in -ki..=ki {
        let x = j as f64 * PI / kf;
        foci.extend([x - d, x, x + d]);
        if j < ki {
            foci.push(fam.midpoint(j));
        }
    }
    let reach = 2.0 * PI + 2.0;
    let grid = Grid::new(vec![Axis::graded(-reach, reach, &foci, h_min, p.ratio, p.h_max)?])?;
    let data = area_sharpness_data(k, &grid)?;
    let traj = evolve(&data.field, &config(p.dt, (p.ramp_initial, p.ramp_growth), p.cadence))?;

    let w1 = traj.last();
    let length = quadrature(
        &compute_geometry(w1).v,
        &Cuboid {
            lower: [-PI, 0.0],
            upper: [PI, 0.0],
        },
    )?;
    let threshold = 4.0 * kf * kf - 2.0 * kf;
    let sup0 = data.field.sup_norm();
    let ax = grid.axis(0);

    let mut b = RunBundle::new("sharpness-area");
    let ctx = |r: EstimateReport| r.with("k", kf).with("h_min", h_min).with("dt", p.dt);
    b.reports
        .push(ctx(ordering_report("barrier_ordering", &traj, &constraints)));
    for j in -ki..ki {
        let x = fam.midpoint(j);
        let w = w1.values()[ax.nearest(x)];
        let name = format!("midpoint_{}", j + ki);
        let r = match AlternatingFamily::relation(j) {
            Relation::Below => EstimateReport::new(name, w, -kf, p.tol * kf),
            Relation::Above => EstimateReport::at_least(name, w, kf, p.tol * kf),
        };
        b.reports.push(ctx(r.with("j", j as f64).with("x", x)));
    }
    b.reports.push(ctx(EstimateReport::at_least(
        "length",
        length,
        threshold,
        p.tol * threshold,
    )));
    b.reports
        .push(ctx(EstimateReport::at_least("initial_sup_lower", sup0, 2.0 * kf, 0.0)));
    b.reports
        .push(ctx(EstimateReport::new("initial_sup_upper", sup0, 3.0 * kf, 0.0)));
    b.reports.push(ctx(EstimateReport::at_least(
        "initial_ordering_gap",
        data.min_gap,
        0.0,
        0.0,
    )
    .with("width", d)));
    b.trajectories.push(("w".into(), traj));
    Ok(b)
}
