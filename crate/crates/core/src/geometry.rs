//! Geometry of a graph `y = u(x)`: volume element, mean curvature, |A|² for
//! curves, the Laplace–Beltrami operator, and pointwise residuals of the
//! heat-operator identities satisfied along mean curvature flow.
//!
//! Time derivatives in the identities follow points of the evolving surface
//! along the normal. For a function `f(x, t)` written in graph coordinates
//! this is `∂_t f − (u_t / v²) ⟨du, df⟩`, which removes the tangential part
//! of the vertical graph velocity.
//!
//! Residual fields are second differences of derived quantities such as
//! `v`, whose boundary values come from one-sided formulas; they are only
//! meaningful at least two cells from the boundary and are zero elsewhere.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{gradient, Grid, ScalarField, VectorField};
use crate::solver::FlowTrajectory;

/// Derived quantities of one graph snapshot.
#[derive(Debug, Clone)]
pub struct GeometryFields {
    /// `√(1 + |du|²)`.
    pub v: ScalarField,
    /// `H = −div(du / v)`.
    pub h: ScalarField,
    pub du: VectorField,
    /// `|A|² = (u″)² / v⁶`, curves only.
    pub a2: Option<ScalarField>,
}

fn hypot1(g: &[f64]) -> f64 {
    g.iter().fold(1.0f64, |acc, c| acc.hypot(*c))
}

pub fn compute_geometry(u: &ScalarField) -> GeometryFields {
    let g = u.grid().clone();
    let dim = g.dim();
    let du = gradient(u);
    let v: Vec<f64> = (0..g.len()).map(|p| hypot1(&du.at(p)[..dim])).collect();
    let faces = g.face_gradients(u.values());
    let face_flux: Vec<Vec<f64>> = (0..dim)
        .map(|a| faces[a].iter().map(|gr| gr[a] / hypot1(&gr[..dim])).collect())
        .collect();
    let nodal_flux: Vec<Vec<f64>> = (0..dim)
        .map(|a| du.component(a).iter().zip(&v).map(|(d, v)| d / v).collect())
        .collect();
    let h: Vec<f64> = g
        .flux_divergence(&face_flux, &nodal_flux)
        .into_iter()
        .map(|d| -d)
        .collect();
    let a2 = (dim == 1).then(|| {
        let upp = g.axis_second_derivative(u.values(), 0);
        let vals = upp.iter().zip(&v).map(|(s, v)| (s / v.powi(3)).powi(2)).collect();
        ScalarField::from_parts(g.clone(), vals, u.time())
    });
    GeometryFields {
        v: ScalarField::from_parts(g.clone(), v, u.time()),
        h: ScalarField::from_parts(g, h, u.time()),
        du,
        a2,
    }
}

/// `Δ_M f = (1/v) div(v G df)` with `G = I − du⊗du / v²`, in flux form.
pub fn laplace_beltrami(u: &ScalarField, f: &ScalarField) -> Result<ScalarField> {
    crate::grid::ensure_same_grid(u.grid(), f.grid())?;
    let g = u.grid();
    let dim = g.dim();
    let fu = g.face_gradients(u.values());
    let ff = g.face_gradients(f.values());
    let flux = |du: &[f64], df: &[f64], a: usize| {
        let v = hypot1(du);
        let dot: f64 = du.iter().zip(df).map(|(x, y)| x * y).sum();
        v * df[a] - du[a] * dot / v
    };
    let face_flux: Vec<Vec<f64>> = (0..dim)
        .map(|a| {
            fu[a]
                .iter()
                .zip(&ff[a])
                .map(|(du, df)| flux(&du[..dim], &df[..dim], a))
                .collect()
        })
        .collect();
    let du = gradient(u);
    let df = gradient(f);
    let nodal_flux: Vec<Vec<f64>> = (0..dim)
        .map(|a| {
            (0..g.len())
                .map(|p| flux(&du.at(p)[..dim], &df.at(p)[..dim], a))
                .collect()
        })
        .collect();
    let div = g.flux_divergence(&face_flux, &nodal_flux);
    let vals = (0..g.len()).map(|p| div[p] / hypot1(&du.at(p)[..dim])).collect();
    Ok(ScalarField::from_parts(g.clone(), vals, u.time()))
}

/// `|∇_M f|² = |df|² − ⟨du, df⟩² / v²` at every node.
pub fn tangential_gradient_sq(du: &VectorField, df: &VectorField) -> Vec<f64> {
    let dim = du.grid().dim();
    (0..du.grid().len())
        .map(|p| {
            let a = &du.at(p)[..dim];
            let b = &df.at(p)[..dim];
            let v2 = 1.0 + a.iter().map(|x| x * x).sum::<f64>();
            let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
            b.iter().map(|x| x * x).sum::<f64>() - dot * dot / v2
        })
        .collect()
}

/// Whether node `p` is at least two cells away from the boundary.
pub fn deep_interior(g: &Grid, p: usize) -> bool {
    let m = g.multi_index(p);
    (0..g.dim()).all(|a| m[a] >= 2 && m[a] + 2 < g.axis(a).len())
}

/// Three-point derivative at the middle of `(t0, f0), (t1, f1), (t2, f2)`.
fn central(t: [f64; 3], f: [f64; 3]) -> f64 {
    let h1 = t[1] - t[0];
    let h2 = t[2] - t[1];
    -h2 / (h1 * (h1 + h2)) * f[0] + (h2 - h1) / (h1 * h2) * f[1] + h1 / (h2 * (h1 + h2)) * f[2]
}

/// Everything the heat residuals need at one interior snapshot.
struct Frame<'a> {
    traj: &'a FlowTrajectory,
    i: usize,
    times: [f64; 3],
    u: &'a ScalarField,
    geo: GeometryFields,
    /// `u_t` by central difference in time.
    ut: Vec<f64>,
}

impl<'a> Frame<'a> {
    fn new(traj: &'a FlowTrajectory, t: f64) -> Result<Self> {
        let i = traj.interior_index(t)?;
        let s = traj.snapshots();
        let times = [s[i - 1].time(), s[i].time(), s[i + 1].time()];
        let ut = (0..s[i].values().len())
            .map(|p| central(times, [s[i - 1].values()[p], s[i].values()[p], s[i + 1].values()[p]]))
            .collect();
        Ok(Self {
            traj,
            i,
            times,
            u: &s[i],
            geo: compute_geometry(&s[i]),
            ut,
        })
    }

    fn grid(&self) -> &Arc<Grid> {
        self.u.grid()
    }

    /// `(∂_t − Δ_M) f` following the normal, for `f` given per snapshot.
    fn heat(&self, f: impl Fn(&ScalarField) -> ScalarField) -> Result<(ScalarField, VectorField, Vec<f64>)> {
        let s = self.traj.snapshots();
        let fs = [f(&s[self.i - 1]), f(&s[self.i]), f(&s[self.i + 1])];
        let df = gradient(&fs[1]);
        let lap = laplace_beltrami(self.u, &fs[1])?;
        let dim = self.grid().dim();
        let out = (0..self.grid().len())
            .map(|p| {
                let ft = central(self.times, [fs[0].values()[p], fs[1].values()[p], fs[2].values()[p]]);
                let du = &self.geo.du.at(p)[..dim];
                let dfp = &df.at(p)[..dim];
                let v2 = self.geo.v.values()[p].powi(2);
                let dot: f64 = du.iter().zip(dfp).map(|(a, b)| a * b).sum();
                ft - self.ut[p] * dot / v2 - lap.values()[p]
            })
            .collect();
        Ok((fs[1].clone(), df, out))
    }

    fn field(&self, mut vals: Vec<f64>) -> ScalarField {
        let g = self.grid();
        for (p, v) in vals.iter_mut().enumerate() {
            if !deep_interior(g, p) {
                *v = 0.0;
            }
        }
        ScalarField::from_parts(g.clone(), vals, self.times[1])
    }
}

fn volume_element(u: &ScalarField) -> ScalarField {
    compute_geometry(u).v
}

/// `(∂_t − Δ)v + |A|² v + 2|∇v|²/v` at snapshot time `t`; zero for an exact
/// flow. Curves only.
pub fn heat_residual_v(traj: &FlowTrajectory, t: f64) -> Result<ScalarField> {
    if traj.grid().dim() != 1 {
        return Err(Error::Parameter(
            "the |A|² identity is implemented for curves only".into(),
        ));
    }
    let fr = Frame::new(traj, t)?;
    let (v, dv, heat) = fr.heat(volume_element)?;
    let grad2 = tangential_gradient_sq(&fr.geo.du, &dv);
    let a2 = fr.geo.a2.as_ref().expect("curve");
    let vals = (0..v.values().len())
        .map(|p| {
            let vp = v.values()[p];
            heat[p] + a2.values()[p] * vp + 2.0 * grad2[p] / vp
        })
        .collect();
    Ok(fr.field(vals))
}

/// `(∂_t − Δ)v + 2|∇v|²/v` at snapshot time `t`; nonpositive for an exact
/// flow in any dimension.
pub fn heat_inequality_v(traj: &FlowTrajectory, t: f64) -> Result<ScalarField> {
    let fr = Frame::new(traj, t)?;
    let (v, dv, heat) = fr.heat(volume_element)?;
    let grad2 = tangential_gradient_sq(&fr.geo.du, &dv);
    let vals = (0..v.values().len())
        .map(|p| heat[p] + 2.0 * grad2[p] / v.values()[p])
        .collect();
    Ok(fr.field(vals))
}

/// The conic cutoff `1 − |x|² − 2nt` sampled on a snapshot.
pub fn conic_cutoff(u: &ScalarField) -> ScalarField {
    let g = u.grid().clone();
    let n = g.dim() as f64;
    let t = u.time();
    let vals = (0..g.len()).map(|p| 1.0 - g.radius_sq(p) - 2.0 * n * t).collect();
    ScalarField::from_parts(g, vals, t)
}

/// `(∂_t − Δ)(1 − |x|² − 2nt)` at snapshot time `t`; nonpositive for an
/// exact flow.
pub fn heat_residual_eta(traj: &FlowTrajectory, t: f64) -> Result<ScalarField> {
    let fr = Frame::new(traj, t)?;
    let (_, _, heat) = fr.heat(conic_cutoff)?;
    Ok(fr.field(heat))
}

/// `(∂_t − Δ)e^{ay²/t} + (e^{ay²/t}/t²)[a y² + 4a² y² |∇y|² + 2at |∇y|²]`
/// with `y = u` and `|∇y|² = |du|²/v²`; zero for an exact flow.
pub fn heat_residual_exp(traj: &FlowTrajectory, t: f64, a: f64) -> Result<ScalarField> {
    if a > -2.0 {
        return Err(Error::Parameter(format!("need a ≤ −2, got {a}")));
    }
    if t <= 0.0 {
        return Err(Error::Parameter("need t > 0".into()));
    }
    let fr = Frame::new(traj, t)?;
    if fr.times[0] <= 0.0 {
        return Err(Error::Snapshot(t));
    }
    let weight = |s: &ScalarField| s.map(|y| (a * y * y / s.time()).exp());
    let (f, _, heat) = fr.heat(weight)?;
    let dim = fr.grid().dim();
    let tt = fr.times[1];
    let vals = (0..f.values().len())
        .map(|p| {
            let y = fr.u.values()[p];
            let du2: f64 = fr.geo.du.at(p)[..dim].iter().map(|x| x * x).sum();
            let grad_y2 = du2 / (1.0 + du2);
            let bracket = a * y * y + 4.0 * a * a * y * y * grad_y2 + 2.0 * a * tt * grad_y2;
            heat[p] + f.values()[p] / (tt * tt) * bracket
        })
        .collect();
    Ok(fr.field(vals))
}

/// `max η e^{a u²/t} v` over snapshots with `t > 0` and nodes where the
/// conic cutoff `η = 1 − |x|² − 2nt` is positive. The data must satisfy
/// `u ≥ 1` on the unit ball.
pub fn phi_v_max(traj: &FlowTrajectory, a: f64) -> Result<f64> {
    let g = traj.grid();
    for s in traj.snapshots() {
        for (p, u) in s.values().iter().enumerate() {
            if g.radius_sq(p) < 1.0 && *u < 1.0 {
                return Err(Error::Precondition(format!(
                    "u = {u} < 1 at x = {:?}, t = {}",
                    &g.point(p)[..g.dim()],
                    s.time()
                )));
            }
        }
    }
    let mut best = 0.0f64;
    for s in traj.snapshots().iter().filter(|s| s.time() > 0.0) {
        let v = volume_element(s);
        let eta = conic_cutoff(s);
        for p in 0..g.len() {
            let e = eta.values()[p];
            if e > 0.0 {
                let u = s.values()[p];
                best = best.max(e * (a * u * u / s.time()).exp() * v.values()[p]);
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::explicit::GrimReaper;
    use std::f64::consts::PI;

    fn reaper_traj(lo: f64, hi: f64, n: usize, times: &[f64]) -> FlowTrajectory {
        let g = Grid::line(lo, hi, n).unwrap();
        let r = GrimReaper::unit();
        let snaps = times
            .iter()
            .map(|t| ScalarField::from_fn(g.clone(), *t, |p| r.value(p[0], *t).unwrap()).unwrap())
            .collect();
        FlowTrajectory::from_snapshots(snaps).unwrap()
    }

    fn interior_max(f: &ScalarField) -> f64 {
        let g = f.grid();
        (0..g.len())
            .filter(|p| !g.is_boundary(*p))
            .map(|p| f.values()[p].abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn flat_graph() {
        let g = Grid::square(-1.0, 1.0, 11).unwrap();
        let u = ScalarField::constant(g.clone(), 3.0, 0.0);
        let geo = compute_geometry(&u);
        assert!(geo.v.values().iter().all(|v| *v == 1.0));
        assert!(geo.h.values().iter().all(|h| *h == 0.0));
        let f = ScalarField::from_fn(g, 0.0, |p| p[0] * p[0] + 3.0 * p[1] * p[1]).unwrap();
        let lap = laplace_beltrami(&u, &f).unwrap();
        assert!(lap.values().iter().all(|l| (l - 8.0).abs() < 1e-10));
    }

    #[test]
    fn reaper_geometry() {
        let g = Grid::line(0.5, PI - 0.5, 201).unwrap();
        let r = GrimReaper::unit();
        let u = ScalarField::from_fn(g.clone(), 0.0, |p| r.value(p[0], 0.0).unwrap()).unwrap();
        let geo = compute_geometry(&u);
        for p in 1..g.len() - 1 {
            let x = g.point(p)[0];
            assert!((geo.v.values()[p] - 1.0 / x.sin()).abs() < 1e-3);
            assert!((geo.h.values()[p] + x.sin()).abs() < 1e-3);
            // κ² = sin²x
            assert!((geo.a2.as_ref().unwrap().values()[p] - x.sin().powi(2)).abs() < 1e-3);
        }
        // v²Δ_M u reproduces the unit speed
        let lap = laplace_beltrami(&u, &u).unwrap();
        for p in 1..g.len() - 1 {
            let x = g.point(p)[0];
            assert!((lap.values()[p] - x.sin().powi(2)).abs() < 1e-3);
            assert!((lap.values()[p] * geo.v.values()[p].powi(2) - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn geometry_invariants_hold() {
        let g = Grid::square(-1.0, 1.0, 21).unwrap();
        let u = ScalarField::from_fn(g, 0.0, |p| (3.0 * p[0]).sin() * p[1] + 5.0 * p[0] * p[0]).unwrap();
        let geo = compute_geometry(&u);
        for p in 0..u.values().len() {
            let v = geo.v.values()[p];
            assert!(v >= 1.0);
            assert!((v * v - 1.0 - geo.du.norm_sq(p)).abs() < 1e-10 * v * v);
        }
    }

    #[test]
    fn heat_residuals_vanish_on_static_flat_flow() {
        let g = Grid::square(-1.0, 1.0, 11).unwrap();
        let snaps = (0..3)
            .map(|k| ScalarField::constant(g.clone(), 2.0, 0.1 * (k + 1) as f64))
            .collect();
        let traj = FlowTrajectory::from_snapshots(snaps).unwrap();
        assert!(heat_inequality_v(&traj, 0.2)
            .unwrap()
            .values()
            .iter()
            .all(|v| v.abs() < 1e-12));
        assert!(heat_residual_eta(&traj, 0.2)
            .unwrap()
            .values()
            .iter()
            .all(|v| v.abs() < 1e-10));
        assert!(heat_residual_exp(&traj, 0.2, -2.0)
            .unwrap()
            .values()
            .iter()
            .all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn reaper_heat_residuals_converge() {
        let mut prev: Option<[f64; 3]> = None;
        for n in [201, 401, 801] {
            let dt = 0.02 * 100.0 / (n - 1) as f64;
            let traj = reaper_traj(0.5, PI - 0.5, n, &[0.5 - dt, 0.5, 0.5 + dt]);
            let rv = interior_max(&heat_residual_v(&traj, 0.5).unwrap());
            let exact_eta = |p: usize| -2.0 * traj.grid().point(p)[0].cos().powi(2);
            let eta = heat_residual_eta(&traj, 0.5).unwrap();
            let re = (2..n - 2)
                .map(|p| (eta.values()[p] - exact_eta(p)).abs())
                .fold(0.0, f64::max);
            let rx = interior_max(&heat_residual_exp(&traj, 0.5, -2.0).unwrap());
            let cur = [rv, re, rx];
            if let Some(p) = prev {
                for k in 0..3 {
                    assert!((p[k] / cur[k]).log2() > 1.7, "{k}: {} -> {}", p[k], cur[k]);
                }
            }
            prev = Some(cur);
        }
    }

    #[test]
    fn phi_v_on_constant_flow() {
        let g = Grid::centered_box(1, 1.0, 0.1).unwrap();
        let snaps = (0..5)
            .map(|k| ScalarField::constant(g.clone(), 1.0, 0.25 * k as f64))
            .collect();
        let traj = FlowTrajectory::from_snapshots(snaps).unwrap();
        let m = phi_v_max(&traj, -2.0).unwrap();
        let expect = [0.25f64, 0.5, 0.75, 1.0]
            .iter()
            .map(|t| (-2.0 / t).exp() * (1.0 - 2.0 * t))
            .fold(0.0, f64::max);
        assert!((m - expect).abs() < 1e-14);
        let low = traj.translated(-0.5);
        assert!(matches!(phi_v_max(&low, -2.0), Err(Error::Precondition(_))));
    }

    #[test]
    fn endpoint_times_are_rejected() {
        let traj = reaper_traj(0.5, 2.5, 11, &[0.1, 0.2, 0.3]);
        assert!(matches!(heat_residual_v(&traj, 0.1), Err(Error::Snapshot(_))));
        assert!(matches!(heat_residual_eta(&traj, 0.3), Err(Error::Snapshot(_))));
    }
}
