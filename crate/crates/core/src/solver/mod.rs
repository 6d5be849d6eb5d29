//! Time integration of graphical mean curvature flow,
//! `u_t = v · div(du / v)` with `v = √(1 + |du|²)`, on 1D intervals and 2D
//! boxes with Dirichlet data.
//!
//! Spatially the operator is written in flux form. The flux `du/v` lives on
//! cell faces and is bounded by one in magnitude, so steep graphs never
//! overflow. The nodal factor `v` is the weighted harmonic mean of the
//! adjacent face values, which makes the neighbour weights of the explicit
//! update sum to the linear-heat value `2n/h²`: under `dt ≤ h²/(2n)` the
//! update is a convex combination and obeys a discrete maximum principle.

pub mod export;
pub mod linear;

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::explicit::Relation;
use crate::grid::{Grid, ScalarField};

use linear::{conjugate_gradient, tridiagonal, SpdStencil};

/// Residual target of the 2D implicit linear solve.
pub const LINEAR_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    ExplicitEuler,
    SemiImplicit,
}

pub type BoundaryFn = Arc<dyn Fn(&[f64], f64) -> f64 + Send + Sync>;

/// Dirichlet data on the grid boundary.
#[derive(Clone)]
pub enum Boundary {
    /// Keep the initial boundary values.
    Frozen,
    /// Evaluate `f(x, t)` at the new time level.
    Prescribed(BoundaryFn),
}

impl Boundary {
    pub fn prescribed(f: impl Fn(&[f64], f64) -> f64 + Send + Sync + 'static) -> Self {
        Boundary::Prescribed(Arc::new(f))
    }
}

impl fmt::Debug for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Boundary::Frozen => f.write_str("Frozen"),
            Boundary::Prescribed(_) => f.write_str("Prescribed(..)"),
        }
    }
}

/// Geometric growth of the implicit step from `initial` up to `dt_fixed`,
/// for data that start out nearly vertical.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DtRamp {
    pub initial: f64,
    pub growth: f64,
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub scheme: Scheme,
    /// Explicit step as a fraction of the stability limit `h²/(2n)`.
    pub cfl_fraction: f64,
    /// Implicit step size.
    pub dt_fixed: Option<f64>,
    pub ramp: Option<DtRamp>,
    pub t_end: f64,
    pub snapshot_times: Vec<f64>,
    pub boundary: Boundary,
}

impl SolverConfig {
    pub fn explicit(cfl_fraction: f64, t_end: f64) -> Self {
        Self {
            scheme: Scheme::ExplicitEuler,
            cfl_fraction,
            dt_fixed: None,
            ramp: None,
            t_end,
            snapshot_times: vec![],
            boundary: Boundary::Frozen,
        }
    }

    pub fn semi_implicit(dt: f64, t_end: f64) -> Self {
        Self {
            scheme: Scheme::SemiImplicit,
            cfl_fraction: 1.0,
            dt_fixed: Some(dt),
            ramp: None,
            t_end,
            snapshot_times: vec![],
            boundary: Boundary::Frozen,
        }
    }

    pub fn with_snapshots(mut self, times: impl IntoIterator<Item = f64>) -> Self {
        self.snapshot_times = times.into_iter().collect();
        self
    }

    /// Snapshots every `every` up to `t_end`.
    pub fn with_cadence(mut self, every: f64) -> Self {
        let n = (self.t_end / every).round() as usize;
        self.snapshot_times = (0..=n).map(|k| (k as f64 * every).min(self.t_end)).collect();
        self
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn with_ramp(mut self, initial: f64, growth: f64) -> Self {
        self.ramp = Some(DtRamp { initial, growth });
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::Parameter(format!("t_end must be positive, got {}", self.t_end)));
        }
        if self.snapshot_times.iter().any(|t| !(*t >= 0.0 && *t <= self.t_end)) {
            return Err(Error::Parameter("snapshot times must lie in [0, t_end]".into()));
        }
        if self.snapshot_times.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Parameter("snapshot times must be ascending".into()));
        }
        match self.scheme {
            Scheme::ExplicitEuler => {
                if !(self.cfl_fraction > 0.0 && self.cfl_fraction <= 1.0) {
                    return Err(Error::Parameter("cfl_fraction must lie in (0, 1]".into()));
                }
            }
            Scheme::SemiImplicit => match self.dt_fixed {
                Some(dt) if dt > 0.0 => {}
                _ => return Err(Error::Parameter("semi-implicit scheme needs a positive dt".into())),
            },
        }
        if let Some(r) = self.ramp {
            if !(r.initial > 0.0 && r.growth >= 1.0) {
                return Err(Error::Parameter("ramp needs initial > 0 and growth ≥ 1".into()));
            }
        }
        Ok(())
    }

    /// Sorted snapshot schedule including 0 and `t_end`.
    pub fn schedule(&self) -> Vec<f64> {
        let mut s = Vec::with_capacity(self.snapshot_times.len() + 2);
        s.push(0.0);
        s.extend(self.snapshot_times.iter().copied());
        s.push(self.t_end);
        s.sort_by(f64::total_cmp);
        s.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
        s
    }
}

/// Snapshots of one flow, strictly increasing in time, all on one grid.
#[derive(Debug, Clone)]
pub struct FlowTrajectory {
    snapshots: Vec<ScalarField>,
    config: Option<SolverConfig>,
}

impl FlowTrajectory {
    /// Trajectory from externally produced snapshots, e.g. exact solutions.
    pub fn from_snapshots(snapshots: Vec<ScalarField>) -> Result<Self> {
        if snapshots.is_empty() {
            return Err(Error::Parameter("empty trajectory".into()));
        }
        let g = snapshots[0].grid().clone();
        for s in &snapshots[1..] {
            crate::grid::ensure_same_grid(&g, s.grid())?;
        }
        if snapshots.windows(2).any(|w| w[1].time() <= w[0].time()) {
            return Err(Error::Parameter("snapshot times must increase".into()));
        }
        Ok(Self {
            snapshots,
            config: None,
        })
    }

    pub fn snapshots(&self) -> &[ScalarField] {
        &self.snapshots
    }

    pub fn config(&self) -> Option<&SolverConfig> {
        self.config.as_ref()
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.snapshots[0].grid()
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(ScalarField::time).collect()
    }

    pub fn first(&self) -> &ScalarField {
        &self.snapshots[0]
    }

    pub fn last(&self) -> &ScalarField {
        &self.snapshots[self.snapshots.len() - 1]
    }

    /// Index of the snapshot closest to `t`.
    pub fn nearest_index(&self, t: f64) -> usize {
        self.snapshots
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1.time() - t).abs().total_cmp(&(b.1.time() - t).abs()))
            .map(|(i, _)| i)
            .unwrap_or(0)
    }

    pub fn at(&self, t: f64) -> &ScalarField {
        &self.snapshots[self.nearest_index(t)]
    }

    /// Index of the snapshot at `t` that has a neighbour on each side.
    pub fn interior_index(&self, t: f64) -> Result<usize> {
        let i = self.nearest_index(t);
        let tol = 1e-9 * t.abs().max(1.0);
        if (self.snapshots[i].time() - t).abs() > tol || i == 0 || i + 1 == self.snapshots.len() {
            return Err(Error::Snapshot(t));
        }
        Ok(i)
    }

    /// Same snapshots shifted by a constant height.
    pub fn translated(&self, c: f64) -> Self {
        Self {
            snapshots: self.snapshots.iter().map(|s| s.map(|v| v + c)).collect(),
            config: self.config.clone(),
        }
    }

    /// Largest `|u|` over snapshots and nodes accepted by `keep`.
    pub fn sup_where(&self, keep: impl Fn(&[f64], f64) -> bool) -> f64 {
        let g = self.grid();
        let dim = g.dim();
        let mut m = 0.0f64;
        for s in &self.snapshots {
            for (i, v) in s.values().iter().enumerate() {
                if keep(&g.point(i)[..dim], s.time()) {
                    m = m.max(v.abs());
                }
            }
        }
        m
    }
}

/// Neighbour weights of the discrete operator at every interior node.
struct Stencil {
    /// `(neighbour, weight)` pairs; the operator is `Σ w (u_nb − u_p)`.
    weights: Vec<[(usize, f64); 4]>,
    /// Nodal volume element.
    volume: Vec<f64>,
}

fn stencil(u: &ScalarField) -> Stencil {
    let g = u.grid();
    let dim = g.dim();
    let n = g.len();
    let faces = g.face_gradients(u.values());
    let face_v: Vec<Vec<f64>> = faces
        .iter()
        .map(|fa| fa.iter().map(|gr| gr[0].hypot(gr[1]).hypot(1.0)).collect())
        .collect();
    let mut weights = vec![[(0usize, 0.0); 4]; n];
    let mut volume = vec![1.0; n];
    for p in 0..n {
        if g.is_boundary(p) {
            continue;
        }
        let m = g.multi_index(p);
        let mut lin = [(0usize, 0.0, 1.0); 4];
        for a in 0..dim {
            let ax = g.axis(a);
            let st = g.stride(a);
            let i = m[a];
            let dual = ax.dual(i);
            lin[2 * a] = (p + st, 1.0 / (ax.cell(i) * dual), face_v[a][p]);
            lin[2 * a + 1] = (p - st, 1.0 / (ax.cell(i - 1) * dual), face_v[a][p - st]);
        }
        let lin = &lin[..2 * dim];
        let w_sum: f64 = lin.iter().map(|l| l.1).sum();
        let w_over_v: f64 = lin.iter().map(|l| l.1 / l.2).sum();
        let vol = w_sum / w_over_v;
        volume[p] = vol;
        for (k, (nb, w, fv)) in lin.iter().enumerate() {
            weights[p][k] = (*nb, vol * w / fv);
        }
    }
    Stencil { weights, volume }
}

/// Largest stable explicit step on this grid: `1 / max(linear diagonal)`,
/// which is `h²/(2n)` on uniform grids.
pub fn explicit_limit(grid: &Grid) -> f64 {
    let mut worst = 0.0f64;
    for a in 0..grid.dim() {
        let ax = grid.axis(a);
        let mut axis_worst = 0.0f64;
        for i in 1..ax.len() - 1 {
            let d = ax.dual(i);
            axis_worst = axis_worst.max(1.0 / (ax.cell(i) * d) + 1.0 / (ax.cell(i - 1) * d));
        }
        worst += axis_worst;
    }
    1.0 / worst
}

fn boundary_values(u: &ScalarField, boundary: &Boundary, t_new: f64, out: &mut [f64]) {
    let g = u.grid();
    let dim = g.dim();
    for p in (0..g.len()).filter(|p| g.is_boundary(*p)) {
        out[p] = match boundary {
            Boundary::Frozen => u.values()[p],
            Boundary::Prescribed(f) => f(&g.point(p)[..dim], t_new),
        };
    }
}

/// One time step of length `dt` from `u`.
pub fn step(u: &ScalarField, dt: f64, scheme: Scheme, boundary: &Boundary) -> Result<ScalarField> {
    if !(dt > 0.0) {
        return Err(Error::Parameter(format!("dt must be positive, got {dt}")));
    }
    let g = u.grid().clone();
    let dim = g.dim();
    let n = g.len();
    let t_new = u.time() + dt;
    let st = stencil(u);
    let old = u.values();
    let mut next = vec![0.0; n];
    boundary_values(u, boundary, t_new, &mut next);

    match scheme {
        Scheme::ExplicitEuler => {
            let limit = explicit_limit(&g);
            if dt > limit * (1.0 + 1e-12) {
                return Err(Error::CflViolation { dt, limit });
            }
            for p in (0..n).filter(|p| !g.is_boundary(*p)) {
                let mut acc = 0.0;
                let mut wsum = 0.0;
                for (nb, w) in &st.weights[p][..2 * dim] {
                    acc += w * old[*nb];
                    wsum += w;
                }
                next[p] = old[p] * (1.0 - dt * wsum) + dt * acc;
            }
        }
        Scheme::SemiImplicit if dim == 1 => {
            let m = n - 2;
            let mut sub = vec![0.0; m];
            let mut diag = vec![0.0; m];
            let mut sup = vec![0.0; m];
            let mut rhs = vec![0.0; m];
            for k in 0..m {
                let p = k + 1;
                let [(_, wf), (_, wb), ..] = st.weights[p];
                diag[k] = 1.0 + dt * (wf + wb);
                rhs[k] = old[p];
                if k == 0 {
                    rhs[k] += dt * wb * next[0];
                } else {
                    sub[k] = -dt * wb;
                }
                if k + 1 == m {
                    rhs[k] += dt * wf * next[n - 1];
                } else {
                    sup[k] = -dt * wf;
                }
            }
            let x = tridiagonal(&sub, &diag, &sup, &rhs);
            next[1..n - 1].copy_from_slice(&x);
        }
        Scheme::SemiImplicit => {
            // Row p scaled by vol_p / V_p, which makes the system symmetric.
            let interior: Vec<usize> = (0..n).filter(|p| !g.is_boundary(*p)).collect();
            let mut slot = vec![usize::MAX; n];
            for (k, p) in interior.iter().enumerate() {
                slot[*p] = k;
            }
            let mut diag = Vec::with_capacity(interior.len());
            let mut off = Vec::with_capacity(interior.len());
            let mut rhs = Vec::with_capacity(interior.len());
            for &p in &interior {
                let mi = g.multi_index(p);
                let vol: f64 = (0..dim).map(|a| g.axis(a).dual(mi[a])).product();
                let scale = vol / st.volume[p];
                let mut d = scale;
                let mut b = scale * old[p];
                let mut row = Vec::with_capacity(4);
                for (nb, w) in &st.weights[p][..2 * dim] {
                    let c = dt * w * scale;
                    d += c;
                    if slot[*nb] == usize::MAX {
                        b += c * next[*nb];
                    } else {
                        row.push((slot[*nb], c));
                    }
                }
                diag.push(d);
                off.push(row);
                rhs.push(b);
            }
            let a = SpdStencil { diag, offdiag: off };
            let mut x: Vec<f64> = interior.iter().map(|p| old[*p]).collect();
            conjugate_gradient(&a, &rhs, &mut x, LINEAR_TOLERANCE, 20 * interior.len() + 100)?;
            for (k, p) in interior.iter().enumerate() {
                next[*p] = x[k];
            }
        }
    }
    if next.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { time: t_new });
    }
    Ok(ScalarField::from_parts(g, next, t_new))
}

/// The right-hand side `v · div(du/v)` of the flow at every interior node
/// (zero on the boundary), as used by the solver.
pub fn flow_speed(u: &ScalarField) -> Vec<f64> {
    let st = stencil(u);
    let g = u.grid();
    let dim = g.dim();
    let vals = u.values();
    (0..g.len())
        .map(|p| {
            if g.is_boundary(p) {
                0.0
            } else {
                st.weights[p][..2 * dim]
                    .iter()
                    .map(|(nb, w)| w * (vals[*nb] - vals[p]))
                    .sum()
            }
        })
        .collect()
}

/// Evolve `u0` up to `config.t_end`, landing exactly on every snapshot time.
pub fn evolve(u0: &ScalarField, config: &SolverConfig) -> Result<FlowTrajectory> {
    config.validate()?;
    if u0.values().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { time: u0.time() });
    }
    let schedule = config.schedule();
    let grid = u0.grid().clone();
    let nominal = match config.scheme {
        Scheme::ExplicitEuler => config.cfl_fraction * explicit_limit(&grid),
        Scheme::SemiImplicit => config.dt_fixed.expect("validated"),
    };
    let mut ramp_dt = config.ramp.map(|r| r.initial.min(nominal));
    let mut u = u0.clone().with_time(0.0);
    let mut snapshots = vec![u.clone()];
    for &target in &schedule[1..] {
        while u.time() < target {
            let mut dt = ramp_dt.unwrap_or(nominal);
            let remaining = target - u.time();
            let land = dt >= remaining - 1e-12 * target.max(1.0);
            if land {
                dt = remaining;
            }
            let mut next = step(&u, dt, config.scheme, &config.boundary)?;
            if land {
                next = next.with_time(target);
            }
            u = next;
            if let (Some(r), Some(d)) = (config.ramp, ramp_dt.as_mut()) {
                *d = (*d * r.growth).min(nominal);
            }
        }
        snapshots.push(u.clone());
    }
    Ok(FlowTrajectory {
        snapshots,
        config: Some(config.clone()),
    })
}

/// Result of checking a trajectory against a barrier.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ComparisonReport {
    /// Smallest signed gap (positive when the ordering holds).
    pub min_gap: f64,
    /// `(t, x)` where the smallest gap occurs.
    pub min_at: Option<(f64, Vec<f64>)>,
    /// First `(t, x, gap)` with gap ≤ −slack, in snapshot order.
    pub first_violation: Option<(f64, Vec<f64>, f64)>,
    pub checked: usize,
    /// Points in the region where the barrier is undefined.
    pub skipped: usize,
    pub slack: f64,
    pub pass: bool,
}

/// Evaluate `barrier` at every snapshot node inside `region` and report the
/// ordering `relation` (solution below/above the barrier).
pub fn comparison_check(
    traj: &FlowTrajectory,
    barrier: &dyn Fn(&[f64], f64) -> Option<f64>,
    relation: Relation,
    region: &dyn Fn(&[f64], f64) -> bool,
    slack: f64,
) -> ComparisonReport {
    let g = traj.grid();
    let dim = g.dim();
    let mut rep = ComparisonReport {
        min_gap: f64::INFINITY,
        min_at: None,
        first_violation: None,
        checked: 0,
        skipped: 0,
        slack,
        pass: true,
    };
    for s in traj.snapshots() {
        let t = s.time();
        for (i, u) in s.values().iter().enumerate() {
            let x = &g.point(i)[..dim];
            if !region(x, t) {
                continue;
            }
            let Some(b) = barrier(x, t).filter(|b| b.is_finite()) else {
                rep.skipped += 1;
                continue;
            };
            rep.checked += 1;
            let gap = match relation {
                Relation::Below => b - u,
                Relation::Above => u - b,
            };
            if gap < rep.min_gap {
                rep.min_gap = gap;
                rep.min_at = Some((t, x.to_vec()));
            }
            if gap <= -slack && rep.first_violation.is_none() {
                rep.first_violation = Some((t, x.to_vec(), gap));
            }
        }
    }
    rep.pass = rep.first_violation.is_none();
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::explicit::GrimReaper;
    use std::f64::consts::PI;

    fn reaper_grid(n: usize) -> Arc<Grid> {
        let h = PI / n as f64;
        Grid::line(h, PI - h, n - 1).unwrap()
    }

    #[test]
    fn constant_data_is_stationary() {
        let g = Grid::square(-1.0, 1.0, 9).unwrap();
        let u = ScalarField::constant(g.clone(), 2.5, 0.0);
        for scheme in [Scheme::ExplicitEuler, Scheme::SemiImplicit] {
            let dt = if scheme == Scheme::ExplicitEuler {
                explicit_limit(&g)
            } else {
                0.3
            };
            let next = step(&u, dt, scheme, &Boundary::Frozen).unwrap();
            assert!(next.values().iter().all(|v| (v - 2.5).abs() < 1e-13));
        }
    }

    #[test]
    fn affine_data_is_stationary() {
        let g = Grid::line(-1.0, 1.0, 41).unwrap();
        let u = ScalarField::from_fn(g, 0.0, |p| 3.0 * p[0] - 1.0).unwrap();
        let next = step(&u, 0.01, Scheme::SemiImplicit, &Boundary::Frozen).unwrap();
        for (a, b) in next.values().iter().zip(u.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn explicit_limit_is_h2_over_2n() {
        let g1 = Grid::line(0.0, 1.0, 11).unwrap();
        assert!((explicit_limit(&g1) - 0.01 / 2.0).abs() < 1e-15);
        let g2 = Grid::square(0.0, 1.0, 11).unwrap();
        assert!((explicit_limit(&g2) - 0.01 / 4.0).abs() < 1e-15);
    }

    #[test]
    fn cfl_violation_is_reported() {
        let g = Grid::line(0.0, 1.0, 11).unwrap();
        let u = ScalarField::constant(g.clone(), 0.0, 0.0);
        let err = step(&u, 0.1, Scheme::ExplicitEuler, &Boundary::Frozen).unwrap_err();
        assert!(matches!(err, Error::CflViolation { .. }));
    }

    #[test]
    fn one_explicit_step_tracks_the_reaper() {
        let g = reaper_grid(200);
        let r = GrimReaper::unit();
        let u = ScalarField::from_fn(g.clone(), 0.0, |p| r.value(p[0], 0.0).unwrap()).unwrap();
        let dt = explicit_limit(&g);
        let b = Boundary::prescribed(r.trace());
        let next = step(&u, dt, Scheme::ExplicitEuler, &b).unwrap();
        // the truncation error blows up like x⁻⁴ at the ends, so look inside
        let err = (0..g.len())
            .filter(|i| (g.point(*i)[0] - PI / 2.0).abs() < PI / 4.0)
            .map(|i| (next.values()[i] - r.value(g.point(i)[0], dt).unwrap()).abs())
            .fold(0.0, f64::max);
        assert!(err < 10.0 * dt * (PI / 200.0).powi(2), "{err}");
    }

    #[test]
    fn evolve_lands_on_snapshots() {
        let g = Grid::line(-1.0, 1.0, 21).unwrap();
        let u = ScalarField::from_fn(g, 0.0, |p| (1.0 - p[0] * p[0]).powi(2)).unwrap();
        let cfg = SolverConfig::semi_implicit(0.03, 0.25).with_snapshots([0.1, 0.2]);
        let traj = evolve(&u, &cfg).unwrap();
        assert_eq!(traj.times(), vec![0.0, 0.1, 0.2, 0.25]);
    }

    #[test]
    fn zero_data_stays_zero() {
        let g = Grid::line(-1.0, 1.0, 21).unwrap();
        let u = ScalarField::constant(g, 0.0, 0.0);
        let traj = evolve(&u, &SolverConfig::explicit(0.9, 0.1).with_cadence(0.05)).unwrap();
        assert!(traj.snapshots().iter().all(|s| s.sup_norm() == 0.0));
    }

    #[test]
    fn ramp_reaches_nominal_step() {
        let g = Grid::line(-1.0, 1.0, 21).unwrap();
        let u = ScalarField::from_fn(g, 0.0, |p| (3.0 * p[0]).sin() * (1.0 - p[0] * p[0])).unwrap();
        let cfg = SolverConfig::semi_implicit(0.01, 0.2).with_ramp(1e-8, 1.5);
        let traj = evolve(&u, &cfg).unwrap();
        assert_eq!(traj.last().time(), 0.2);
    }

    #[test]
    fn non_finite_boundary_aborts() {
        let g = Grid::line(-1.0, 1.0, 11).unwrap();
        let u = ScalarField::constant(g, 0.0, 0.0);
        let cfg = SolverConfig::semi_implicit(0.01, 0.1).with_boundary(Boundary::prescribed(|_, t| {
            if t > 0.05 {
                f64::NAN
            } else {
                0.0
            }
        }));
        assert!(matches!(evolve(&u, &cfg), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn comparison_against_constant_barrier() {
        let g = Grid::line(-1.0, 1.0, 11).unwrap();
        let u = ScalarField::constant(g, 0.0, 0.0);
        let traj = evolve(&u, &SolverConfig::semi_implicit(0.1, 0.3)).unwrap();
        let rep = comparison_check(&traj, &|_, _| Some(1.0), Relation::Below, &|_, _| true, 0.0);
        assert_eq!(rep.min_gap, 1.0);
        assert!(rep.pass);
        let rep = comparison_check(&traj, &|_, _| Some(1.0), Relation::Above, &|_, _| true, 0.0);
        assert!(!rep.pass);
        assert_eq!(rep.first_violation.as_ref().unwrap().0, 0.0);
    }
}
