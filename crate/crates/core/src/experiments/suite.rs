//! Random smooth flows checked against the interior estimates, and the
//! generic `simulate` run.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{default_scheme, RunBundle};
use crate::error::{Error, Result};
use crate::estimates::{
    area_constant_fit, area_measurement, gradient_bound_chained, gradient_bound_explicit, height_bound, AreaSample,
    EstimateReport,
};
use crate::explicit::{bump, GrimReaper};
use crate::geometry::phi_v_max;
use crate::grid::{Grid, ScalarField};
use crate::solver::{evolve, Boundary, FlowTrajectory, Scheme, SolverConfig};

/// Exponent in the weight `e^{a u²/t}` of the cutoff argument.
pub const PHI_EXPONENT: f64 = -2.0;
/// The cutoff argument bounds `η e^{a u²/t} v` by this constant.
pub const PHI_BOUND: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteParams {
    pub n: usize,
    pub count: usize,
    pub seed: u64,
    /// Grid spacing; defaults to 0.01 in 1D and 0.05 in 2D.
    pub h: Option<f64>,
    /// Semi-implicit step; defaults to 1e-3 in 1D and 5e-3 in 2D.
    pub dt: Option<f64>,
    /// Snapshot spacing; defaults to 0.01 in 1D and 0.0125 in 2D.
    pub cadence: Option<f64>,
    pub max_amplitude: f64,
    /// Relative allowance on the cutoff bound.
    pub phi_tol: f64,
    /// Additive allowance on the height bound.
    pub height_tol: f64,
    pub output: Option<PathBuf>,
}

impl Default for SuiteParams {
    fn default() -> Self {
        Self {
            n: 1,
            count: 20,
            seed: 0,
            h: None,
            dt: None,
            cadence: None,
            max_amplitude: 3.0,
            phi_tol: 0.01,
            height_tol: 1e-3,
            output: None,
        }
    }
}

/// Random C^∞ data on the box `[−L, L]^n`: a few Fourier modes windowed by a
/// bump supported in the ball of radius `0.95 L`, scaled so that the
/// sampled sup norm equals `amplitude`.
pub fn random_initial_data(grid: &Arc<Grid>, rng: &mut impl Rng, amplitude: f64) -> Result<ScalarField> {
    let dim = grid.dim();
    let half = grid.axis(0).upper();
    let support = 0.95 * half;
    let modes: Vec<([f64; 2], f64, f64)> = (0..4)
        .map(|_| {
            let mut k = [0.0; 2];
            for c in k.iter_mut().take(dim) {
                *c = rng.gen_range(0..4) as f64 * PI / support;
            }
            (k, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
        .collect();
    let raw = ScalarField::from_fn(grid.clone(), 0.0, |x| {
        let r = x.iter().map(|c| c * c).sum::<f64>().sqrt();
        let window = bump(r / support);
        if window == 0.0 {
            return 0.0;
        }
        let phase = |k: &[f64; 2]| x.iter().zip(k).map(|(a, b)| a * b).sum::<f64>();
        window
            * (1.0
                + modes
                    .iter()
                    .map(|(k, a, b)| a * phase(k).cos() + b * phase(k).sin())
                    .sum::<f64>())
    })?;
    let sup = raw.sup_norm();
    if amplitude == 0.0 || sup == 0.0 {
        return Ok(raw.map(|_| 0.0));
    }
    Ok(raw.map(|v| v * amplitude / sup))
}

struct Member {
    index: usize,
    amplitude: f64,
    seed: u64,
}

struct Outcome {
    reports: Vec<EstimateReport>,
    area: AreaSample,
    traj: FlowTrajectory,
}

fn run_member(p: &SuiteParams, grid: &Arc<Grid>, m: &Member) -> Result<Outcome> {
    let n = p.n;
    let nf = n as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(m.seed);
    let u0 = random_initial_data(grid, &mut rng, m.amplitude)?;
    let t_grad = 1.0 / (4.0 * nf);
    let cadence = p.cadence.unwrap_or(if n == 1 { 0.01 } else { 0.0125 });
    let mut times: Vec<f64> = (1..=(1.0 / cadence).round() as usize)
        .map(|i| (i as f64 * cadence).min(1.0))
        .collect();
    times.push(t_grad);
    times.sort_by(f64::total_cmp);
    times.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let dt = p.dt.unwrap_or(if n == 1 { 1e-3 } else { 5e-3 });
    let cfg = SolverConfig::semi_implicit(dt, 1.0).with_snapshots(times);
    let traj =
        evolve(&u0, &cfg).map_err(|e| Error::Construction(format!("member {} (seed {}): {e}", m.index, m.seed)))?;

    let in_unit_ball = |x: &[f64], _t: f64| x.iter().map(|c| c * c).sum::<f64>() <= 1.0 + 1e-12;
    let sup_u = traj.sup_where(in_unit_ball);
    let sup0 = u0.sup_norm();
    let g = traj.at(t_grad);
    let origin = grid.nearest(&[0.0, 0.0][..n]);
    let du = crate::grid::gradient(g);
    let measured_grad = du.norm_sq(origin).ln_1p();
    let rho = (2.0 * nf + 1.0).sqrt();
    let (height, _) = height_bound(n, 1.0, rho, sup0)?;
    let lifted = traj.translated(traj.sup_where(|_, _| true) + 1.0);
    let phi = phi_v_max(&lifted, PHI_EXPONENT)?;
    let area = area_measurement(traj.last(), 1.0)?;

    let ctx = |r: EstimateReport| {
        r.with("member", m.index as f64)
            .with("seed", m.seed as f64)
            .with("amplitude", m.amplitude)
            .with("n", nf)
            .with("sup_u", sup_u)
            .with("sup_u0", sup0)
            .with("h", grid.min_spacing())
            .with("dt", dt)
    };
    let reports = vec![
        ctx(EstimateReport::new(
            "gradient_explicit",
            measured_grad,
            gradient_bound_explicit(n, 1.0, sup_u),
            0.0,
        )),
        ctx(EstimateReport::new(
            "gradient_chained",
            measured_grad,
            gradient_bound_chained(n, 1.0, sup0),
            0.0,
        )),
        ctx(EstimateReport::new("height", sup_u, height, p.height_tol)),
        ctx(EstimateReport::new("phi_v", phi, PHI_BOUND, PHI_BOUND * p.phi_tol)),
    ];
    Ok(Outcome {
        reports,
        area: AreaSample {
            n,
            r: 1.0,
            sup_u0: sup0,
            area,
        },
        traj,
    })
}

/// `count` random flows on the box around `B_{√(2n+1)}`, evolved with zero
/// Dirichlet data to t = 1, each checked against the gradient, height and
/// cutoff bounds. Member 0 is flat. Members run in parallel; the output
/// depends only on the parameters.
pub fn run_estimate_suite(p: &SuiteParams) -> Result<RunBundle> {
    if !(1..=2).contains(&p.n) {
        return Err(Error::Parameter(format!("n must be 1 or 2, got {}", p.n)));
    }
    if p.count == 0 {
        return Err(Error::Parameter("count must be positive".into()));
    }
    let n = p.n;
    let half = (2.0 * n as f64 + 1.0).sqrt();
    let h = p.h.unwrap_or(if n == 1 { 0.01 } else { 0.05 });
    let grid = Grid::centered_box(n, half, h)?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let members: Vec<Member> = (0..p.count)
        .map(|index| {
            let amplitude = if index == 0 {
                0.0
            } else {
                rng.gen_range(0.0..p.max_amplitude)
            };
            Member {
                index,
                amplitude,
                // 53 bits, so the seed is recorded exactly in the f64 context
                seed: rng.gen::<u64>() >> 11,
            }
        })
        .collect();
    let outcomes: Vec<Outcome> = members
        .par_iter()
        .map(|m| run_member(p, &grid, m))
        .collect::<Result<_>>()?;

    let samples: Vec<AreaSample> = outcomes.iter().map(|o| o.area).collect();
    let c = area_constant_fit(&samples)?;
    let mut b = RunBundle::new("estimate-suite");
    for (o, m) in outcomes.into_iter().zip(&members) {
        b.reports.extend(o.reports);
        let bound = c * (1.0 + o.area.sup_u0).powi(2);
        b.reports.push(
            EstimateReport::new("area", o.area.area, bound, 0.0)
                .with("member", m.index as f64)
                .with("area_constant", c)
                .with("sup_u0", o.area.sup_u0),
        );
        b.trajectories.push((format!("member_{:03}", m.index), o.traj));
    }
    Ok(b)
}

/// Initial data for a plain simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialData {
    Zero,
    /// `amplitude · bump(|x| / radius)`.
    Bump {
        amplitude: f64,
        radius: f64,
    },
    /// The unit grim reaper restricted to `[π/20, 19π/20]`, with its exact
    /// moving trace as boundary data.
    GrimReaper,
    Random {
        amplitude: f64,
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateParams {
    pub dim: usize,
    pub half_width: f64,
    pub h: f64,
    #[serde(default = "default_scheme")]
    pub scheme: Scheme,
    pub dt: f64,
    pub cfl: f64,
    pub t_end: f64,
    pub cadence: f64,
    pub initial: InitialData,
    pub output: Option<PathBuf>,
}

impl Default for SimulateParams {
    fn default() -> Self {
        Self {
            dim: 1,
            half_width: 1.0,
            h: 0.02,
            scheme: Scheme::SemiImplicit,
            dt: 1e-3,
            cfl: 0.9,
            t_end: 0.5,
            cadence: 0.1,
            initial: InitialData::Bump {
                amplitude: 1.0,
                radius: 0.8,
            },
            output: None,
        }
    }
}

/// Evolves the requested data and reports the sup-norm decay (a maximum
/// principle consequence for data with zero boundary values).
pub fn run_simulate(p: &SimulateParams) -> Result<RunBundle> {
    if !(1..=2).contains(&p.dim) {
        return Err(Error::Parameter(format!("dim must be 1 or 2, got {}", p.dim)));
    }
    let (grid, boundary) = match p.initial {
        InitialData::GrimReaper => {
            if p.dim != 1 {
                return Err(Error::Parameter("the grim reaper run is one-dimensional".into()));
            }
            let a = PI / 20.0;
            let count = ((PI - 2.0 * a) / p.h).round() as usize + 1;
            let r = GrimReaper::unit();
            (Grid::line(a, PI - a, count)?, Boundary::prescribed(r.trace()))
        }
        _ => (Grid::centered_box(p.dim, p.half_width, p.h)?, Boundary::Frozen),
    };
    let u0 = match &p.initial {
        InitialData::Zero => ScalarField::constant(grid.clone(), 0.0, 0.0),
        InitialData::Bump { amplitude, radius } => ScalarField::from_fn(grid.clone(), 0.0, |x| {
            amplitude * bump(x.iter().map(|c| c * c).sum::<f64>().sqrt() / radius)
        })?,
        InitialData::GrimReaper => {
            let r = GrimReaper::unit();
            ScalarField::from_fn(grid.clone(), 0.0, |x| r.value(x[0], 0.0).unwrap_or(f64::NAN))?
        }
        InitialData::Random { amplitude, seed } => {
            random_initial_data(&grid, &mut ChaCha8Rng::seed_from_u64(*seed), *amplitude)?
        }
    };
    let cfg = match p.scheme {
        Scheme::ExplicitEuler => SolverConfig::explicit(p.cfl, p.t_end),
        Scheme::SemiImplicit => SolverConfig::semi_implicit(p.dt, p.t_end),
    }
    .with_cadence(p.cadence)
    .with_boundary(boundary);
    let traj = evolve(&u0, &cfg)?;
    let mut b = RunBundle::new("simulate");
    if !matches!(p.initial, InitialData::GrimReaper) {
        let sup0 = u0.sup_norm();
        b.reports.push(
            EstimateReport::new("sup_norm_decay", traj.last().sup_norm(), sup0, 1e-12)
                .with("t_end", p.t_end)
                .with("h", p.h),
        );
    } else {
        let r = GrimReaper::unit();
        let last = traj.last();
        let err = (0..grid.len())
            .map(|i| (last.values()[i] - r.value(grid.point(i)[0], last.time()).unwrap_or(f64::NAN)).abs())
            .fold(0.0, f64::max);
        b.reports
            .push(EstimateReport::new("reaper_error", err, 10.0 * p.h * p.h, 0.0).with("h", p.h));
    }
    b.trajectories.push(("u".into(), traj));
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_data_is_compactly_supported_and_scaled() {
        let g = Grid::centered_box(1, 3f64.sqrt(), 0.01).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random_initial_data(&g, &mut rng, 2.5).unwrap();
        assert!((u.sup_norm() - 2.5).abs() < 1e-12);
        assert_eq!(u.values()[0], 0.0);
        assert_eq!(*u.values().last().unwrap(), 0.0);
    }

    #[test]
    fn small_suite_passes_and_is_deterministic() {
        let p = SuiteParams {
            count: 3,
            seed: 11,
            h: Some(0.02),
            cadence: Some(0.05),
            ..Default::default()
        };
        let a = run_estimate_suite(&p).unwrap();
        let b = run_estimate_suite(&p).unwrap();
        assert!(a.pass(), "{:?}", a.failures().collect::<Vec<_>>());
        assert_eq!(a.report_csv(), b.report_csv());
        // the flat member has zero gradient and height
        let flat = a.reports.iter().find(|r| r.name == "gradient_explicit").unwrap();
        assert_eq!(flat.measured, 0.0);
    }

    #[test]
    fn simulate_bump_decays() {
        let b = run_simulate(&SimulateParams::default()).unwrap();
        assert!(b.pass());
        assert_eq!(b.trajectories[0].1.times().len(), 6);
    }
}
