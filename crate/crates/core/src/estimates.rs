//! Evaluators for the quantitative estimates on graphs flowing by mean
//! curvature, and checkers that compare measurements against them.

use std::collections::BTreeMap;
use std::f64::consts::LN_10;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::compute_geometry;
use crate::grid::{gradient, quadrature, Ball, Grid, ScalarField, Whole};
use crate::solver::FlowTrajectory;

/// Which side of the bound the measurement must fall on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    AtMost,
    AtLeast,
}

/// A measured quantity against its bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub name: String,
    pub measured: f64,
    pub bound: f64,
    pub direction: Direction,
    /// Distance to the bound, positive when it holds: `bound − measured`
    /// for upper bounds, `measured − bound` for lower bounds.
    pub margin: f64,
    /// Allowance for numerical error; the check passes iff `margin ≥ −slack`.
    pub slack: f64,
    pub pass: bool,
    pub context: BTreeMap<String, f64>,
}

impl EstimateReport {
    /// `measured ≤ bound`.
    pub fn new(name: impl Into<String>, measured: f64, bound: f64, slack: f64) -> Self {
        Self::build(name.into(), measured, bound, Direction::AtMost, slack)
    }

    /// `measured ≥ bound`.
    pub fn at_least(name: impl Into<String>, measured: f64, bound: f64, slack: f64) -> Self {
        Self::build(name.into(), measured, bound, Direction::AtLeast, slack)
    }

    fn build(name: String, measured: f64, bound: f64, direction: Direction, slack: f64) -> Self {
        let margin = match direction {
            Direction::AtMost => bound - measured,
            Direction::AtLeast => measured - bound,
        };
        Self {
            name,
            measured,
            bound,
            direction,
            margin,
            slack,
            // NaN measurements fail
            pass: margin >= -slack,
            context: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.context.insert(key.to_string(), value);
        self
    }
}

pub fn reports_to_json(reports: &[EstimateReport]) -> String {
    serde_json::to_string_pretty(reports).expect("reports serialize")
}

/// Flat CSV, one report per row; the context is packed as `key=value` pairs
/// separated by `;`.
pub fn reports_to_csv(reports: &[EstimateReport]) -> String {
    let mut out = String::from("name,measured,bound,direction,margin,slack,pass,context\n");
    for r in reports {
        let ctx: Vec<String> = r.context.iter().map(|(k, v)| format!("{k}={v}")).collect();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.name,
            r.measured,
            r.bound,
            match r.direction {
                Direction::AtMost => "at-most",
                Direction::AtLeast => "at-least",
            },
            r.margin,
            r.slack,
            r.pass,
            ctx.join(";")
        ));
    }
    out
}

/// Bound on `log(1 + |du|²)` at `(0, r²/(4n))` for a flow on `B_r × [0, r²]`
/// with `|u| ≤ sup_u`.
pub fn gradient_bound_explicit(n: usize, r: f64, sup_u: f64) -> f64 {
    2.0 * LN_10 + 16.0 * n as f64 * (1.0 + 2.0 * sup_u / r).powi(2)
}

/// The same bound in terms of the initial height on `B_{√(2n+1) r}`, using
/// the sphere barrier at `ρ = √(2n+1)` for the height at later times.
pub fn gradient_bound_chained(n: usize, r: f64, sup_u0: f64) -> f64 {
    let rho = (2.0 * n as f64 + 1.0).sqrt();
    2.0 * LN_10 + 16.0 * n as f64 * (1.0 + 2.0 * (rho + sup_u0 / r)).powi(2)
}

/// The classical form `½ log(1 + ‖du₀‖²) + C (1 + ‖u₀‖/r)²`, which also
/// depends on the initial gradient.
pub fn eh_bound_comparison(r: f64, sup_u0: f64, sup_du0: f64, c: f64) -> f64 {
    0.5 * sup_du0.mul_add(sup_du0, 1.0).ln() + c * (1.0 + sup_u0 / r).powi(2)
}

/// Height bound on `B_r × [0, r²]` from shrinking spheres:
/// `(r[ρ − √(ρ² − (2n+1))] + sup, (2n+1) r/ρ + sup)`.
pub fn height_bound(n: usize, r: f64, rho: f64, sup_initial: f64) -> Result<(f64, f64)> {
    let m = 2.0 * n as f64 + 1.0;
    if !(rho * rho >= m * (1.0 - 1e-12)) {
        return Err(Error::Parameter(format!("need ρ ≥ √{m}, got {rho}")));
    }
    let exact = r * (rho - (rho * rho - m).max(0.0).sqrt()) + sup_initial;
    let simplified = m * r / rho + sup_initial;
    Ok((exact, simplified))
}

fn ensure_covers(g: &Grid, radius: f64) -> Result<()> {
    for ax in g.axes() {
        if ax.lower() > -radius || ax.upper() < radius {
            return Err(Error::Precondition(format!(
                "grid [{}, {}] does not cover the ball of radius {radius}",
                ax.lower(),
                ax.upper()
            )));
        }
    }
    Ok(())
}

/// Area of the graph over `B_{r/2}`.
pub fn area_measurement(u: &ScalarField, r: f64) -> Result<f64> {
    ensure_covers(u.grid(), r / 2.0)?;
    quadrature(&compute_geometry(u).v, &Ball::centered(r / 2.0))
}

/// The four integrals of the Stokes area bound
/// `∫φ²v ≤ ∫φ² + ‖w‖ ∫|dφ²| + ‖w‖ ∫φ²|H|`, returned as `(lhs, rhs)`.
fn stokes_terms(w: &ScalarField, phi: &ScalarField) -> Result<(f64, f64)> {
    let g = w.grid();
    let dim = g.dim();
    let geo = compute_geometry(w);
    let phi2 = phi.map(|p| p * p);
    let dphi2 = gradient(&phi2);
    let abs_d = ScalarField::from_parts(
        g.clone(),
        (0..g.len())
            .map(|p| dphi2.at(p)[..dim].iter().map(|c| c * c).sum::<f64>().sqrt())
            .collect(),
        0.0,
    );
    let lhs = quadrature(&phi2.zip_with(&geo.v, |a, b| a * b)?, &Whole)?;
    let sup = w.sup_norm();
    let rhs = quadrature(&phi2, &Whole)?
        + sup * quadrature(&abs_d, &Whole)?
        + sup * quadrature(&phi2.zip_with(&geo.h, |a, b| a * b.abs())?, &Whole)?;
    Ok((lhs, rhs))
}

/// Checks the Stokes area bound for `w` with compactly supported `φ`. The
/// slack is ten times the change of the margin under one coarsening.
pub fn stokes_area_check(w: &ScalarField, phi: &ScalarField) -> Result<EstimateReport> {
    crate::grid::ensure_same_grid(w.grid(), phi.grid())?;
    let g = w.grid();
    let scale = phi.sup_norm();
    if (0..g.len()).any(|p| g.is_boundary(p) && phi.values()[p].abs() > 1e-12 * scale.max(1.0)) {
        return Err(Error::Precondition("φ must vanish on the grid boundary".into()));
    }
    let (lhs, rhs) = stokes_terms(w, phi)?;
    let slack = match (w.coarsen(), phi.coarsen()) {
        (Some(wc), Some(pc)) => {
            let (l2, r2) = stokes_terms(&wc, &pc)?;
            10.0 * ((rhs - lhs) - (r2 - l2)).abs()
        }
        _ => 0.0,
    };
    Ok(EstimateReport::new("stokes_area", lhs, rhs, slack)
        .with("h", g.min_spacing())
        .with("sup_w", w.sup_norm()))
}

/// `√(2b) + 2a/T`.
pub fn ode_bound(a: f64, b: f64, t_end: f64) -> f64 {
    (2.0 * b).sqrt() + 2.0 * a / t_end
}

/// A nonnegative function sampled uniformly on `[0, T]`, to be tested
/// against `f² ≤ −a f′ + b ⇒ f(T) ≤ √(2b) + 2a/T`.
#[derive(Debug, Clone, PartialEq)]
pub struct OdeInstance {
    pub a: f64,
    pub b: f64,
    pub t_end: f64,
    pub samples: Vec<f64>,
    /// Additive allowance on the conclusion.
    pub tolerance: f64,
}

pub const ODE_TOLERANCE: f64 = 1e-6;

impl OdeInstance {
    pub fn new(a: f64, b: f64, t_end: f64, samples: Vec<f64>) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && t_end > 0.0) {
            return Err(Error::Parameter(format!("need a, b, T > 0, got {a}, {b}, {t_end}")));
        }
        if samples.len() < 100 {
            return Err(Error::Parameter(format!("need ≥ 100 samples, got {}", samples.len())));
        }
        if samples.iter().any(|f| !(f.is_finite() && *f >= 0.0)) {
            return Err(Error::Parameter("samples must be finite and nonnegative".into()));
        }
        Ok(Self {
            a,
            b,
            t_end,
            samples,
            tolerance: ODE_TOLERANCE,
        })
    }

    pub fn from_fn(a: f64, b: f64, t_end: f64, count: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let dt = t_end / (count - 1) as f64;
        Self::new(a, b, t_end, (0..count).map(|i| f(i as f64 * dt)).collect())
    }

    /// Solution of the saturating equation `f′ = (b − f²)/a` from `f0`, by
    /// classical RK4 with `steps` steps and compensated accumulation, sampled
    /// at `count` points.
    pub fn saturating(a: f64, b: f64, t_end: f64, f0: f64, steps: usize, count: usize) -> Result<Self> {
        let rhs = |f: f64| (b - f * f) / a;
        let dt = t_end / steps as f64;
        let every = steps / (count - 1);
        if every * (count - 1) != steps {
            return Err(Error::Parameter("steps must be a multiple of count − 1".into()));
        }
        let mut f = f0;
        // compensation term; near saturation the increments fall below
        // half an ulp of f and plain accumulation stalls in steps
        let mut lost = 0.0;
        let mut samples = Vec::with_capacity(count);
        samples.push(f);
        for k in 1..=steps {
            let k1 = rhs(f);
            let k2 = rhs(f + 0.5 * dt * k1);
            let k3 = rhs(f + 0.5 * dt * k2);
            let k4 = rhs(f + dt * k3);
            let inc = dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4) - lost;
            let next = f + inc;
            lost = (next - f) - inc;
            f = next;
            if k % every == 0 {
                samples.push(f);
            }
        }
        Self::new(a, b, t_end, samples)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum OdeOutcome {
    Checked(EstimateReport),
    /// The samples violate the hypothesis; nothing is concluded.
    Rejected {
        at: f64,
        excess: f64,
    },
}

/// Verifies the hypothesis at interior samples (with slack ten times the
/// difference between the `h` and `2h` central derivatives), then checks
/// the conclusion at `T`.
pub fn ode_check(inst: &OdeInstance) -> OdeOutcome {
    let f = &inst.samples;
    let n = f.len();
    let h = inst.t_end / (n - 1) as f64;
    let mut worst: Option<(f64, f64)> = None;
    for i in 2..n - 2 {
        let d1 = (f[i + 1] - f[i - 1]) / (2.0 * h);
        let d2 = (f[i + 2] - f[i - 2]) / (4.0 * h);
        let slack = 10.0 * inst.a * (d1 - d2).abs() + 1e-12 * (f[i] * f[i]).max(inst.b);
        let excess = f[i] * f[i] - (-inst.a * d1 + inst.b) - slack;
        if excess > 0.0 && worst.is_none_or(|w| excess > w.1) {
            worst = Some((i as f64 * h, excess));
        }
    }
    if let Some((at, excess)) = worst {
        return OdeOutcome::Rejected { at, excess };
    }
    OdeOutcome::Checked(
        EstimateReport::new(
            "ode_bound",
            f[n - 1],
            ode_bound(inst.a, inst.b, inst.t_end),
            inst.tolerance,
        )
        .with("a", inst.a)
        .with("b", inst.b)
        .with("T", inst.t_end),
    )
}

/// Tent cutoff `max(1 − |x|, 0)` and its gradient (taken as zero at the
/// origin, the average of the one-sided values in 1D).
fn tent(g: &Grid, p: usize) -> (f64, [f64; 2]) {
    let x = g.point(p);
    let r = g.radius_sq(p).sqrt();
    if r >= 1.0 {
        (0.0, [0.0; 2])
    } else if r == 0.0 {
        (1.0, [0.0; 2])
    } else {
        (1.0 - r, [-x[0] / r, -x[1] / r])
    }
}

/// `(t, f(t), right-hand side)` at every snapshot, where `f = ∫η⁴v` and the
/// right-hand side is `−∫η⁴H²v + 4∫Hη³⟨dη, du⟩` with the tent cutoff η.
pub fn energy_identity_series(traj: &FlowTrajectory) -> Result<Vec<(f64, f64, f64)>> {
    let g = traj.grid().clone();
    ensure_covers(&g, 1.0)?;
    let dim = g.dim();
    let cut: Vec<(f64, [f64; 2])> = (0..g.len()).map(|p| tent(&g, p)).collect();
    traj.snapshots()
        .iter()
        .map(|s| {
            let geo = compute_geometry(s);
            let field = |vals: Vec<f64>| ScalarField::from_parts(g.clone(), vals, s.time());
            let mut fv = Vec::with_capacity(g.len());
            let mut rhs = Vec::with_capacity(g.len());
            for (p, (eta, deta)) in cut.iter().enumerate() {
                let v = geo.v.values()[p];
                let h = geo.h.values()[p];
                let du = geo.du.at(p);
                let dot: f64 = (0..dim).map(|a| deta[a] * du[a]).sum();
                fv.push(eta.powi(4) * v);
                rhs.push(-eta.powi(4) * h * h * v + 4.0 * h * eta.powi(3) * dot);
            }
            Ok((
                s.time(),
                quadrature(&field(fv), &Whole)?,
                quadrature(&field(rhs), &Whole)?,
            ))
        })
        .collect()
}

/// Largest `|f′(t) − rhs(t)|` over interior snapshots, with `f′` by
/// three-point differences, against the allowance `tolerance`.
pub fn energy_identity_check(traj: &FlowTrajectory, tolerance: f64) -> Result<EstimateReport> {
    let series = energy_identity_series(traj)?;
    if series.len() < 3 {
        return Err(Error::Parameter("need at least three snapshots".into()));
    }
    let mut worst = 0.0f64;
    let mut increasing = 0usize;
    for w in series.windows(3) {
        let (t0, f0, _) = w[0];
        let (t1, f1, r1) = w[1];
        let (t2, f2, _) = w[2];
        let h1 = t1 - t0;
        let h2 = t2 - t1;
        let df = -h2 / (h1 * (h1 + h2)) * f0 + (h2 - h1) / (h1 * h2) * f1 + h1 / (h2 * (h1 + h2)) * f2;
        worst = worst.max((df - r1).abs());
        if df > 0.0 {
            increasing += 1;
        }
    }
    Ok(EstimateReport::new("energy_identity", worst, 0.0, tolerance)
        .with("h", traj.grid().min_spacing())
        .with("snapshots", series.len() as f64)
        .with("increasing_steps", increasing as f64))
}

/// One area measurement for fitting the constant of the area estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AreaSample {
    pub n: usize,
    pub r: f64,
    pub sup_u0: f64,
    pub area: f64,
}

/// Smallest `C` with `area ≤ C rⁿ (1 + sup_u0/r)²` for every sample.
pub fn area_constant_fit(samples: &[AreaSample]) -> Result<f64> {
    let first = samples
        .first()
        .ok_or_else(|| Error::Parameter("no area samples".into()))?;
    if samples.iter().any(|s| s.n != first.n) {
        return Err(Error::Parameter("area samples mix dimensions".into()));
    }
    Ok(samples
        .iter()
        .map(|s| s.area / (s.r.powi(s.n as i32) * (1.0 + s.sup_u0 / s.r).powi(2)))
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn bound_values() {
        assert_relative_eq!(
            gradient_bound_explicit(1, 1.0, 0.0),
            20.605170185988094,
            epsilon = 1e-12
        );
        assert_relative_eq!(gradient_bound_explicit(1, 1.0, 1.0), 148.6051701859881, epsilon = 1e-12);
        assert_relative_eq!(gradient_bound_chained(1, 1.0, 0.0), 323.4564218703962, epsilon = 1e-9);
        assert_relative_eq!(eh_bound_comparison(1.0, 0.0, 0.0, 1.0), 1.0);
        let big = eh_bound_comparison(1.0, 0.0, 10f64.exp(), 1.0);
        assert!((big - 11.0).abs() < 1e-6);
    }

    #[test]
    fn height_bound_values() {
        let (e, s) = height_bound(1, 1.0, 3f64.sqrt(), 0.0).unwrap();
        assert_relative_eq!(e, 3f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(s, 3f64.sqrt(), epsilon = 1e-12);
        let (e, s) = height_bound(1, 1.0, 10.0, 5.0).unwrap();
        assert_relative_eq!(e, 15.0 - 97f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(s, 5.3, epsilon = 1e-12);
        assert!(matches!(height_bound(2, 1.0, 2.0, 0.0), Err(Error::Parameter(_))));
    }

    #[test]
    fn area_of_lines() {
        let g = Grid::centered_box(1, 2.0, 0.01).unwrap();
        let flat = ScalarField::constant(g.clone(), 0.0, 0.0);
        assert!((area_measurement(&flat, 2.0).unwrap() - 2.0).abs() < 1e-9);
        let m = 0.7;
        let tilt = ScalarField::from_fn(g, 0.0, |p| m * p[0]).unwrap();
        assert!((area_measurement(&tilt, 2.0).unwrap() - 2.0 * (1.0 + m * m).sqrt()).abs() < 1e-9);
        let small = Grid::centered_box(1, 0.5, 0.01).unwrap();
        let u = ScalarField::constant(small, 0.0, 0.0);
        assert!(matches!(area_measurement(&u, 2.0), Err(Error::Precondition(_))));
    }

    #[test]
    fn stokes_on_constants() {
        let g = Grid::centered_box(1, 1.0, 1.0 / 200.0).unwrap();
        let phi = ScalarField::from_fn(g.clone(), 0.0, |p| crate::explicit::bump(p[0] / 0.9)).unwrap();
        let zero = ScalarField::constant(g.clone(), 0.0, 0.0);
        let r = stokes_area_check(&zero, &phi).unwrap();
        assert!(r.margin.abs() < 1e-12 && r.pass);
        let c = ScalarField::constant(g, 2.0, 0.0);
        let r = stokes_area_check(&c, &phi).unwrap();
        assert!(r.margin > 0.1 && r.pass);
    }

    #[test]
    fn stokes_requires_compact_support() {
        let g = Grid::centered_box(1, 1.0, 0.05).unwrap();
        let phi = ScalarField::constant(g.clone(), 1.0, 0.0);
        let w = ScalarField::constant(g, 0.0, 0.0);
        assert!(matches!(stokes_area_check(&w, &phi), Err(Error::Precondition(_))));
    }

    #[test]
    fn ode_constant_and_decay() {
        let (a, b, t) = (1.5, 0.04, 2.0);
        let c = OdeInstance::from_fn(a, b, t, 201, |_| b.sqrt()).unwrap();
        match ode_check(&c) {
            OdeOutcome::Checked(r) => assert!(r.pass && r.margin > 0.0),
            other => panic!("{other:?}"),
        }
        let eps = 0.1;
        let exact = OdeInstance::from_fn(a, 1e-6, t, 2001, |s| a / (s + eps)).unwrap();
        assert!(matches!(ode_check(&exact), OdeOutcome::Checked(ref r) if r.pass));
        let double = OdeInstance::from_fn(a, 1e-6, t, 2001, |s| 2.0 * a / (s + eps)).unwrap();
        assert!(matches!(ode_check(&double), OdeOutcome::Rejected { .. }));
    }

    #[test]
    fn rk4_matches_closed_form() {
        // f = √b coth(√b (t + c)/a) solves f′ = (b − f²)/a
        let (a, b, t): (f64, f64, f64) = (2.0, 0.5, 3.0);
        let sb = b.sqrt();
        let f0 = 10.0 * sb;
        let q = f0 / sb;
        let c = a / sb * 0.5 * ((q + 1.0) / (q - 1.0)).ln();
        let inst = OdeInstance::saturating(a, b, t, f0, 100_000, 101).unwrap();
        let exact = sb / (sb * (t + c) / a).tanh();
        assert!((inst.samples[100] - exact).abs() < 1e-10);
    }

    #[test]
    fn energy_identity_on_flat_flow() {
        let g = Grid::centered_box(2, 1.2, 0.1).unwrap();
        let snaps = (0..4)
            .map(|k| ScalarField::constant(g.clone(), 1.0, 0.1 * k as f64))
            .collect();
        let traj = FlowTrajectory::from_snapshots(snaps).unwrap();
        let r = energy_identity_check(&traj, 1e-12).unwrap();
        assert!(r.measured < 1e-12 && r.pass);
    }

    #[test]
    fn area_constant_single_report() {
        let s = AreaSample {
            n: 1,
            r: 2.0,
            sup_u0: 1.0,
            area: 3.0,
        };
        assert_relative_eq!(area_constant_fit(&[s]).unwrap(), 3.0 / (2.0 * 2.25));
        assert!(area_constant_fit(&[]).is_err());
    }

    #[test]
    fn lower_bounds_and_nan() {
        let r = EstimateReport::at_least("q", 3.0, 2.0, 0.0);
        assert_eq!(r.margin, 1.0);
        assert!(r.pass);
        assert!(!EstimateReport::new("n", f64::NAN, 1.0, 1.0).pass);
    }

    #[test]
    fn csv_is_flat() {
        let r = EstimateReport::new("x", 1.0, 2.0, 0.0).with("n", 1.0).with("h", 0.5);
        let csv = reports_to_csv(&[r]);
        assert_eq!(csv.lines().nth(1).unwrap(), "x,1,2,at-most,1,0,true,h=0.5;n=1");
    }
}
