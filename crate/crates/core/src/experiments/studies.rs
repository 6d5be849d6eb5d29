//! Refinement studies: grim-reaper reproduction, the energy identity on a
//! patch flow, and the heat-operator identities on exact snapshots.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::{default_scheme, RunBundle};
use crate::error::{Error, Result};
use crate::estimates::{energy_identity_series, EstimateReport};
use crate::explicit::{bump, GrimReaper, Sign};
use crate::geometry::{compute_geometry, deep_interior, heat_residual_eta, heat_residual_exp, heat_residual_v};
use crate::grid::{Axis, Grid, ScalarField};
use crate::solver::{evolve, Boundary, FlowTrajectory, Scheme, SolverConfig};

/// Left end of the truncated reaper interval; the right end is `π − CUT`.
pub const CUT: f64 = PI / 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Problem {
    /// `t − ln sin x`.
    GrimReaper,
    /// The upward reaper and its downward mirror `−(t − ln sin x)`, each
    /// solved separately; the error is the larger of the two.
    TranslatingPair,
}

impl Problem {
    fn members(self) -> Vec<GrimReaper> {
        let up = GrimReaper::unit();
        match self {
            Problem::GrimReaper => vec![up],
            Problem::TranslatingPair => {
                vec![up, GrimReaper::new(1.0, 0.0, 0.0, Sign::Minus).expect("valid reaper")]
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergenceParams {
    pub problem: Problem,
    /// Cell counts N, with h = π/N.
    pub levels: Vec<usize>,
    #[serde(default = "default_scheme")]
    pub scheme: Scheme,
    /// Semi-implicit dt = dt_factor·h.
    pub dt_factor: f64,
    pub cfl: f64,
    pub t_end: f64,
    pub order_min: f64,
    pub order_max: f64,
    pub finest_max: f64,
    pub output: Option<PathBuf>,
}

impl Default for ConvergenceParams {
    fn default() -> Self {
        Self {
            problem: Problem::GrimReaper,
            levels: vec![200, 400, 800],
            scheme: Scheme::SemiImplicit,
            dt_factor: 1.0,
            cfl: 0.9,
            t_end: 0.5,
            order_min: 1.7,
            order_max: 2.3,
            finest_max: 1e-4,
            output: None,
        }
    }
}

fn reaper_error(r: &GrimReaper, cells: usize, p: &ConvergenceParams) -> Result<(f64, FlowTrajectory)> {
    let h = PI / cells as f64;
    let grid = Grid::new(vec![Axis::with_spacing(CUT, PI - CUT, h)?])?;
    let u0 = ScalarField::from_fn(grid.clone(), 0.0, |x| r.value(x[0], 0.0).unwrap_or(f64::NAN))?;
    let cfg = match p.scheme {
        Scheme::SemiImplicit => SolverConfig::semi_implicit(p.dt_factor * h, p.t_end),
        Scheme::ExplicitEuler => SolverConfig::explicit(p.cfl, p.t_end),
    }
    .with_boundary(Boundary::prescribed(r.trace()));
    let traj = evolve(&u0, &cfg)?;
    let last = traj.last();
    let err = (0..grid.len())
        .map(|i| (last.values()[i] - r.value(grid.point(i)[0], last.time()).unwrap_or(f64::NAN)).abs())
        .fold(0.0, f64::max);
    Ok((err, traj))
}

/// `(h, L∞ error at t_end)` per level, on `[π/20, 19π/20]` with the exact
/// trace as boundary data.
pub fn convergence_errors(p: &ConvergenceParams) -> Result<Vec<(f64, f64)>> {
    Ok(convergence_runs(p)?.into_iter().map(|(h, e, _)| (h, e)).collect())
}

fn convergence_runs(p: &ConvergenceParams) -> Result<Vec<(f64, f64, FlowTrajectory)>> {
    if p.levels.len() < 3 {
        return Err(Error::Parameter("need at least three levels".into()));
    }
    if p.levels.windows(2).any(|w| w[1] != 2 * w[0]) {
        return Err(Error::Parameter(format!("levels must double: {:?}", p.levels)));
    }
    if p.levels.iter().any(|&n| n < 40) {
        return Err(Error::Parameter("levels must have at least 40 cells".into()));
    }
    p.levels
        .iter()
        .map(|&n| {
            let mut worst = 0.0f64;
            let mut traj = None;
            for r in p.problem.members() {
                let (e, t) = reaper_error(&r, n, p)?;
                worst = worst.max(e);
                traj.get_or_insert(t);
            }
            Ok((PI / n as f64, worst, traj.expect("at least one member")))
        })
        .collect()
}

/// `log(e₁/e₂)/log(h₁/h₂)` for consecutive levels.
pub fn fitted_orders(errors: &[(f64, f64)]) -> Vec<f64> {
    errors
        .windows(2)
        .map(|w| (w[0].1 / w[1].1).ln() / (w[0].0 / w[1].0).ln())
        .collect()
}

fn order_table(errors: &[(f64, f64)]) -> String {
    let orders = fitted_orders(errors);
    let mut out = String::from("h,error,order\n");
    for (i, (h, e)) in errors.iter().enumerate() {
        let o = if i == 0 {
            String::new()
        } else {
            format!("{:e}", orders[i - 1])
        };
        let _ = writeln!(out, "{h:e},{e:e},{o}");
    }
    out
}

fn order_reports(b: &mut RunBundle, prefix: &str, errors: &[(f64, f64)], min: f64, max: Option<f64>) {
    for (i, o) in fitted_orders(errors).into_iter().enumerate() {
        let ctx = |r: EstimateReport| r.with("h_coarse", errors[i].0).with("h_fine", errors[i + 1].0);
        b.reports
            .push(ctx(EstimateReport::at_least(format!("{prefix}_min_{i}"), o, min, 0.0)));
        if let Some(m) = max {
            b.reports
                .push(ctx(EstimateReport::new(format!("{prefix}_max_{i}"), o, m, 0.0)));
        }
    }
}

/// Grim-reaper reproduction under refinement.
pub fn run_convergence(p: &ConvergenceParams) -> Result<RunBundle> {
    let runs = convergence_runs(p)?;
    let errors: Vec<(f64, f64)> = runs.iter().map(|(h, e, _)| (*h, *e)).collect();
    let mut b = RunBundle::new("convergence");
    order_reports(&mut b, "order", &errors, p.order_min, Some(p.order_max));
    let (h, e) = *errors.last().expect("levels");
    b.reports
        .push(EstimateReport::new("finest_error", e, p.finest_max, 0.0).with("h", h));
    b.tables.push(("orders".into(), order_table(&errors)));
    if let Some((_, _, traj)) = runs.into_iter().last() {
        b.trajectories.push(("finest".into(), traj));
    }
    Ok(b)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IdentityParams {
    /// Cell counts on `[−1.2, 1.2]` for the energy-identity patch flow.
    pub energy_levels: Vec<usize>,
    /// Times at which the identity is checked.
    pub energy_times: Vec<f64>,
    pub energy_finest_max: f64,
    /// Node counts on `[0.5, π − 0.5]` for the heat identities.
    pub heat_levels: Vec<usize>,
    pub heat_time: f64,
    /// Exponent in `e^{a u²/t}`.
    pub a: f64,
    pub order_min: f64,
    /// Allowance on the sign of `(∂_t − Δ)η`.
    pub eta_sign_tol: f64,
    pub output: Option<PathBuf>,
}

impl Default for IdentityParams {
    fn default() -> Self {
        Self {
            energy_levels: vec![96, 192, 384],
            energy_times: vec![0.05, 0.1, 0.15],
            energy_finest_max: 1e-3,
            heat_levels: vec![201, 401, 801],
            heat_time: 0.5,
            a: -2.0,
            order_min: 1.7,
            eta_sign_tol: 1e-6,
            output: None,
        }
    }
}

/// Half-width of the patch domain.
const PATCH: f64 = 1.2;

/// A perturbed grim reaper on `[−1.2, 1.2]` with the exact reaper trace as
/// boundary data, solved explicitly. Snapshots at every centre `t` and at
/// `t ± h`, so the time difference refines with the grid.
pub fn energy_patch_trajectory(cells: usize, centres: &[f64]) -> Result<FlowTrajectory> {
    if cells < 24 || !cells.is_multiple_of(12) {
        return Err(Error::Parameter(format!(
            "cells must be a positive multiple of 12, got {cells}"
        )));
    }
    let h = 2.0 * PATCH / cells as f64;
    if centres.is_empty() || centres.windows(2).any(|w| w[1] - w[0] < 2.0 * h * (1.0 - 1e-9)) || centres[0] <= h {
        return Err(Error::Parameter(format!(
            "centres must increase with gaps of at least 2h = {}",
            2.0 * h
        )));
    }
    let grid = Grid::line(-PATCH, PATCH, cells + 1)?;
    let r = GrimReaper::new(1.0, -PI / 2.0, 0.0, Sign::Plus)?;
    let u0 = ScalarField::from_fn(grid.clone(), 0.0, |x| {
        r.value(x[0], 0.0).unwrap_or(f64::NAN) + 0.3 * bump(x[0] / 1.1)
    })?;
    let mut times: Vec<f64> = centres.iter().flat_map(|&t| [t - h, t, t + h]).collect();
    times.dedup_by(|a, b| (*a - *b).abs() < 1e-9 * h);
    let t_end = *times.last().expect("centres");
    let cfg = SolverConfig::explicit(0.9, t_end)
        .with_snapshots(times)
        .with_boundary(Boundary::prescribed(r.trace()));
    evolve(&u0, &cfg)
}

/// Largest `|f′ − rhs|` over the centres, with `f′` by central differences
/// over the neighbouring snapshots.
fn energy_residual(traj: &FlowTrajectory, centres: &[f64]) -> Result<f64> {
    let series = energy_identity_series(traj)?;
    let mut worst = 0.0f64;
    for &t in centres {
        let i = traj.interior_index(t)?;
        let (t0, f0, _) = series[i - 1];
        let (t1, f1, r1) = series[i];
        let (t2, f2, _) = series[i + 1];
        let (h1, h2) = (t1 - t0, t2 - t1);
        let df = -h2 / (h1 * (h1 + h2)) * f0 + (h2 - h1) / (h1 * h2) * f1 + h1 / (h2 * (h1 + h2)) * f2;
        worst = worst.max((df - r1).abs());
    }
    Ok(worst)
}

fn reaper_snapshots(nodes: usize, times: [f64; 3]) -> Result<FlowTrajectory> {
    let g = Grid::line(0.5, PI - 0.5, nodes)?;
    let r = GrimReaper::unit();
    let snaps = times
        .iter()
        .map(|&t| ScalarField::from_fn(g.clone(), t, |x| r.value(x[0], t).unwrap_or(f64::NAN)))
        .collect::<Result<Vec<_>>>()?;
    FlowTrajectory::from_snapshots(snaps)
}

fn deep_max(f: &ScalarField, value: impl Fn(usize, f64) -> f64) -> f64 {
    let g = f.grid();
    (0..g.len())
        .filter(|&p| deep_interior(g, p))
        .map(|p| value(p, f.values()[p]))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Energy identity on the patch flow and the three heat identities on exact
/// grim-reaper snapshots, each under refinement.
pub fn run_identity_suite(p: &IdentityParams) -> Result<RunBundle> {
    if p.energy_levels.len() < 2 || p.heat_levels.len() < 2 {
        return Err(Error::Parameter("need at least two levels per study".into()));
    }
    let mut b = RunBundle::new("identity-suite");

    let mut energy = vec![];
    let mut finest = None;
    for &cells in &p.energy_levels {
        let traj = energy_patch_trajectory(cells, &p.energy_times)?;
        energy.push((2.0 * PATCH / cells as f64, energy_residual(&traj, &p.energy_times)?));
        finest = Some(traj);
    }
    order_reports(&mut b, "energy_order", &energy, p.order_min, None);
    let (h, e) = *energy.last().expect("levels");
    b.reports
        .push(EstimateReport::new("energy_residual", e, 0.0, p.energy_finest_max).with("h", h));
    b.tables.push(("energy_orders".into(), order_table(&energy)));

    let t = p.heat_time;
    let mut rv = vec![];
    let mut reta = vec![];
    let mut rexp = vec![];
    let mut eta_max = f64::NEG_INFINITY;
    for &nodes in &p.heat_levels {
        if nodes < 21 {
            return Err(Error::Parameter("heat levels need at least 21 nodes".into()));
        }
        let h = (PI - 1.0) / (nodes - 1) as f64;
        let dt = 2.0 / (nodes - 1) as f64;
        let traj = reaper_snapshots(nodes, [t - dt, t, t + dt])?;
        let geo = compute_geometry(traj.at(t));
        let v = heat_residual_v(&traj, t)?;
        rv.push((h, deep_max(&v, |_, r| r.abs())));
        // (∂_t − Δ)η = −2|du|²/v², with the right side from the snapshot.
        let eta = heat_residual_eta(&traj, t)?;
        let target = |q: usize| {
            let du2 = geo.du.norm_sq(q);
            -2.0 * du2 / (1.0 + du2)
        };
        reta.push((h, deep_max(&eta, |q, r| (r - target(q)).abs())));
        eta_max = eta_max.max(deep_max(&eta, |_, r| r));
        let x = heat_residual_exp(&traj, t, p.a)?;
        rexp.push((h, deep_max(&x, |_, r| r.abs())));
    }
    order_reports(&mut b, "heat_v_order", &rv, p.order_min, None);
    order_reports(&mut b, "heat_eta_order", &reta, p.order_min, None);
    order_reports(&mut b, "heat_exp_order", &rexp, p.order_min, None);
    b.reports
        .push(EstimateReport::new("eta_sign", eta_max, 0.0, p.eta_sign_tol).with("t", t));
    let mut heat = String::from("h,v,eta,exp\n");
    for i in 0..rv.len() {
        let _ = writeln!(heat, "{:e},{:e},{:e},{:e}", rv[i].0, rv[i].1, reta[i].1, rexp[i].1);
    }
    b.tables.push(("heat_residuals".into(), heat));
    if let Some(traj) = finest {
        b.trajectories.push(("patch".into(), traj));
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orders_of_exact_power_law() {
        let e: Vec<(f64, f64)> = [0.1, 0.05, 0.025].iter().map(|h| (*h, 3.0 * h * h)).collect();
        for o in fitted_orders(&e) {
            assert!((o - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn coarse_convergence_runs() {
        let p = ConvergenceParams {
            levels: vec![50, 100, 200],
            t_end: 0.1,
            ..Default::default()
        };
        let errs = convergence_errors(&p).unwrap();
        assert!(errs[2].1 < errs[1].1 && errs[1].1 < errs[0].1);
        for levels in [vec![100, 200], vec![100, 200, 300]] {
            assert!(convergence_errors(&ConvergenceParams {
                levels,
                ..Default::default()
            })
            .is_err());
        }
    }

    #[test]
    fn explicit_scheme_converges_too() {
        let b = run_convergence(&ConvergenceParams {
            scheme: Scheme::ExplicitEuler,
            levels: vec![100, 200, 400],
            t_end: 0.1,
            finest_max: 1e-3,
            ..Default::default()
        })
        .unwrap();
        assert!(b.pass(), "{:?}", b.failures().collect::<Vec<_>>());
        assert!(b.tables[0].1.starts_with("h,error,order\n"));
    }

    #[test]
    fn pair_error_covers_both_reapers() {
        let p = ConvergenceParams {
            levels: vec![50, 100, 200],
            t_end: 0.1,
            ..Default::default()
        };
        let single = convergence_errors(&p).unwrap();
        let pair = convergence_errors(&ConvergenceParams {
            problem: Problem::TranslatingPair,
            ..p
        })
        .unwrap();
        // the downward reaper is the mirror image, so the errors agree
        for (a, b) in single.iter().zip(&pair) {
            assert!((a.1 - b.1).abs() <= 1e-12 * a.1.max(1e-300));
        }
    }
}
