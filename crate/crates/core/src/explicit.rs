//! Closed-form solutions and barriers: translating grim reapers with their
//! parabolic rescalings, the alternating reaper family, shrinking spheres,
//! and the initial data squeezed between reapers that drive the two
//! sharpness experiments.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{Grid, ScalarField};

/// Orientation of a barrier or soliton.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    #[inline]
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn parity(j: i64) -> Self {
        if j.rem_euclid(2) == 0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

/// Which side of a barrier a solution must stay on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Relation {
    /// solution < barrier
    Below,
    /// solution > barrier
    Above,
}

/// `sign * (λ t − ln sin(λ (x − shift)) / λ − offset)` on the strip
/// `shift < x < shift + π/λ`. Translates vertically with speed `sign * λ`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GrimReaper {
    pub lambda: f64,
    pub shift: f64,
    pub offset: f64,
    pub sign: Sign,
}

impl GrimReaper {
    pub fn new(lambda: f64, shift: f64, offset: f64, sign: Sign) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Parameter(format!("reaper scale must be positive, got {lambda}")));
        }
        Ok(Self {
            lambda,
            shift,
            offset,
            sign,
        })
    }

    /// The unit-speed reaper `t − ln sin x` on `(0, π)`.
    pub fn unit() -> Self {
        Self {
            lambda: 1.0,
            shift: 0.0,
            offset: 0.0,
            sign: Sign::Plus,
        }
    }

    /// Parabolic rescaling of the unit reaper: `u^λ(x, t) = u(λx, λ²t) / λ`.
    pub fn rescaled(lambda: f64) -> Result<Self> {
        Self::new(lambda, 0.0, 0.0, Sign::Plus)
    }

    /// Open interval on which the reaper is a graph.
    pub fn domain(&self) -> (f64, f64) {
        (self.shift, self.shift + PI / self.lambda)
    }

    pub fn midpoint(&self) -> f64 {
        self.shift + 0.5 * PI / self.lambda
    }

    /// Vertical velocity.
    pub fn speed(&self) -> f64 {
        self.sign.value() * self.lambda
    }

    /// Value and slope at `(x, t)`.
    pub fn eval(&self, x: f64, t: f64) -> Result<(f64, f64)> {
        let phase = self.lambda * (x - self.shift);
        let s = phase.sin();
        if !(phase > 0.0 && phase < PI && s > 0.0) {
            return Err(Error::Domain {
                what: "grim reaper",
                x: vec![x],
                t,
            });
        }
        let sg = self.sign.value();
        let value = sg * (self.lambda * t - s.ln() / self.lambda - self.offset);
        let slope = -sg * phase.cos() / s;
        Ok((value, slope))
    }

    pub fn value(&self, x: f64, t: f64) -> Result<f64> {
        self.eval(x, t).map(|(v, _)| v)
    }

    /// Second x-derivative: `sign * λ / sin²(λ(x − shift))`.
    pub fn curvature_term(&self, x: f64) -> Result<f64> {
        self.eval(x, 0.0)?;
        let s = (self.lambda * (x - self.shift)).sin();
        Ok(self.sign.value() * self.lambda / (s * s))
    }

    /// Trace usable as time-dependent Dirichlet data.
    pub fn trace(self) -> impl Fn(&[f64], f64) -> f64 + Send + Sync + Clone {
        move |p: &[f64], t: f64| self.value(p[0], t).unwrap_or(f64::NAN)
    }
}

/// Value and slope of a reaper at `(x, t)`.
pub fn grim_reaper_eval(g: &GrimReaper, x: f64, t: f64) -> Result<(f64, f64)> {
    g.eval(x, t)
}

/// `u^λ(e^{-λ²}, 1)`, the height of the rescaled reaper just off its left
/// end after unit time. Bounded by `2λ` once `λ` is large enough.
pub fn probe_height(lambda: f64) -> Result<f64> {
    GrimReaper::rescaled(lambda)?.value((-lambda * lambda).exp(), 1.0)
}

/// Upper and lower barriers for the gradient sharpness construction:
/// `u⁺(x,t) = u^λ(x + π/λ, t) − 3λ` on `(−π/λ, 0)` and
/// `u⁻(x,t) = −u^λ(x, t) + 3λ` on `(0, π/λ)`.
pub fn gradient_barriers(lambda: f64) -> Result<(GrimReaper, GrimReaper)> {
    if !(lambda > 1.0) {
        return Err(Error::Parameter(format!("need λ > 1, got {lambda}")));
    }
    let upper = GrimReaper::new(lambda, -PI / lambda, 3.0 * lambda, Sign::Plus)?;
    let lower = GrimReaper::new(lambda, 0.0, 3.0 * lambda, Sign::Minus)?;
    Ok((upper, lower))
}

/// `u_j(x, t) = (−1)^j [u^k(x − jπ/k, t) − 2k]` for `−k ≤ j ≤ k`, each on
/// `(jπ/k, (j+1)π/k)`. Even members translate up, odd members down.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AlternatingFamily {
    k: u32,
}

impl AlternatingFamily {
    pub fn new(k: u32) -> Result<Self> {
        if k < 2 {
            return Err(Error::Parameter(format!("need k ≥ 2, got {k}")));
        }
        Ok(Self { k })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn member(&self, j: i64) -> Result<GrimReaper> {
        let k = self.k as i64;
        if j < -k || j > k {
            return Err(Error::Parameter(format!("member index {j} outside [−{k}, {k}]")));
        }
        let kf = self.k as f64;
        GrimReaper::new(kf, j as f64 * PI / kf, 2.0 * kf, Sign::parity(j))
    }

    /// Which side of member `j` the squeezed solution lives on.
    pub fn relation(j: i64) -> Relation {
        match Sign::parity(j) {
            Sign::Plus => Relation::Below,
            Sign::Minus => Relation::Above,
        }
    }

    pub fn midpoint(&self, j: i64) -> f64 {
        (j as f64 + 0.5) * PI / self.k as f64
    }
}

pub fn alternating_eval(fam: &AlternatingFamily, j: i64, x: f64, t: f64) -> Result<f64> {
    fam.member(j)?.value(x, t)
}

/// Hemisphere of the sphere of radius `√(ρ² − 2nt)` centred on the axis at
/// height `center_height`. `Sign::Minus` selects the lower cap, which bounds
/// a graph from above.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereBarrier {
    pub rho: f64,
    pub center_height: f64,
    pub dim: usize,
    pub sign: Sign,
}

impl SphereBarrier {
    pub fn new(rho: f64, center_height: f64, dim: usize, sign: Sign) -> Result<Self> {
        let min = ((2 * dim + 1) as f64).sqrt();
        if !(rho >= min * (1.0 - 1e-15)) {
            return Err(Error::Parameter(format!("need ρ ≥ √(2n+1) = {min}, got {rho}")));
        }
        Ok(Self {
            rho,
            center_height,
            dim,
            sign,
        })
    }

    pub fn radius_sq(&self, t: f64) -> f64 {
        self.rho * self.rho - 2.0 * self.dim as f64 * t
    }

    pub fn height(&self, x: &[f64], t: f64) -> Result<f64> {
        let r2 = self.radius_sq(t);
        let x2: f64 = x.iter().map(|v| v * v).sum();
        if !(r2 > 0.0) || x2 > r2 {
            return Err(Error::Domain {
                what: "sphere barrier",
                x: x.to_vec(),
                t,
            });
        }
        Ok(self.center_height + self.sign.value() * (r2 - x2).sqrt())
    }
}

pub fn sphere_barrier_height(b: &SphereBarrier, x: &[f64], t: f64) -> Result<f64> {
    b.height(x, t)
}

/// C^∞ step: 0 for ξ ≤ 0, 1 for ξ ≥ 1.
pub fn smooth_step(xi: f64) -> f64 {
    if xi <= 0.0 {
        0.0
    } else if xi >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / xi).exp();
        let b = (-1.0 / (1.0 - xi)).exp();
        a / (a + b)
    }
}

/// C^∞ compactly supported bump `exp(1 − 1/(1 − ξ²))` on `|ξ| < 1`, peak 1.
pub fn bump(xi: f64) -> f64 {
    if xi.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - xi * xi)).exp()
    }
}

/// Piecewise-constant plateaus joined by smooth steps of width `width`.
///
/// Plateau `m` sits on `(breaks[m], breaks[m+1])`; the profile is 0 outside
/// `[breaks[0], breaks[last]]`. Outer steps lie inside the support, inner
/// steps are centred on their breakpoint.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct StepProfile {
    pub breaks: Vec<f64>,
    pub levels: Vec<f64>,
    pub width: f64,
}

impl StepProfile {
    pub fn eval(&self, x: f64) -> f64 {
        let m = self.breaks.len() - 1;
        let d = self.width;
        let mut w = self.levels[0] * smooth_step((x - self.breaks[0]) / d);
        for i in 1..m {
            let jump = self.levels[i] - self.levels[i - 1];
            w += jump * smooth_step((x - self.breaks[i] + d) / (2.0 * d));
        }
        w - self.levels[m - 1] * smooth_step((x - self.breaks[m] + d) / d)
    }

    pub fn sample(&self, grid: &Arc<Grid>) -> Result<ScalarField> {
        ScalarField::from_fn(grid.clone(), 0.0, |p| self.eval(p[0]))
    }

    pub fn amplitude(&self) -> f64 {
        self.levels.iter().fold(0.0, |m, l| m.max(l.abs()))
    }
}

/// A barrier the constructed data must respect on the barrier's domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constraint {
    pub barrier: GrimReaper,
    pub relation: Relation,
}

impl Constraint {
    /// Signed gap: positive when the ordering holds.
    pub fn gap(&self, w: f64, x: f64, t: f64) -> Option<f64> {
        let b = self.barrier.value(x, t).ok()?;
        Some(match self.relation {
            Relation::Below => b - w,
            Relation::Above => w - b,
        })
    }
}

/// Initial data together with the profile that produced it.
#[derive(Debug, Clone)]
pub struct ConstructedData {
    pub field: ScalarField,
    pub profile: StepProfile,
    pub constraints: Vec<Constraint>,
    /// Smallest verified gap to any barrier at t = 0.
    pub min_gap: f64,
}

/// Smallest gap over dense analytic samples of each constraint's domain,
/// log-spaced towards both ends, plus the supplied grid nodes.
fn verify(profile: &StepProfile, constraints: &[Constraint], nodes: &[f64]) -> Option<f64> {
    let mut worst = f64::INFINITY;
    for c in constraints {
        let (lo, hi) = c.barrier.domain();
        let half = 0.5 * (hi - lo);
        let mut xs: Vec<f64> = Vec::with_capacity(6000);
        for q in 0..=240 {
            let s = half * 10f64.powf(-(q as f64) / 16.0);
            xs.push(lo + s);
            xs.push(hi - s);
        }
        xs.extend((1..4000).map(|i| lo + (hi - lo) * i as f64 / 4000.0));
        xs.extend(nodes.iter().copied().filter(|x| *x > lo && *x < hi));
        for x in xs {
            if let Some(g) = c.gap(profile.eval(x), x, 0.0) {
                if !(g > 0.0) {
                    return None;
                }
                worst = worst.min(g);
            }
        }
    }
    Some(worst)
}

/// Shrink the step width from a third of the shortest plateau until every
/// constraint holds strictly.
fn fit_profile(
    breaks: Vec<f64>,
    levels: Vec<f64>,
    constraints: &[Constraint],
    nodes: &[f64],
) -> Result<(StepProfile, f64)> {
    let shortest = breaks.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let mut profile = StepProfile {
        breaks,
        levels,
        width: shortest / 3.0,
    };
    for _ in 0..100 {
        if let Some(gap) = verify(&profile, constraints, nodes) {
            return Ok((profile, gap));
        }
        profile.width *= 0.5;
        if profile.width < 1e-13 {
            break;
        }
    }
    Err(Error::Construction(
        "no step width keeps the data strictly between the barriers".into(),
    ))
}

/// Plateau profile squeezed between the gradient barriers, independent of
/// any grid.
pub fn gradient_sharpness_profile(lambda: f64) -> Result<(StepProfile, Vec<Constraint>)> {
    let (upper, lower) = gradient_barriers(lambda)?;
    let a = 3.0 * lambda + 0.25 * lambda;
    let constraints = vec![
        Constraint {
            barrier: upper,
            relation: Relation::Below,
        },
        Constraint {
            barrier: lower,
            relation: Relation::Above,
        },
    ];
    let (p, _) = fit_profile(vec![-PI / lambda, 0.0, PI / lambda], vec![-a, a], &constraints, &[])?;
    Ok((p, constraints))
}

/// Plateau profile squeezed between the alternating family of order `k`.
pub fn area_sharpness_profile(k: u32) -> Result<(StepProfile, Vec<Constraint>)> {
    let fam = AlternatingFamily::new(k)?;
    let ki = k as i64;
    let a = 2.0 * k as f64 + 0.25 * k as f64;
    let breaks = (-ki..=ki).map(|j| j as f64 * PI / k as f64).collect();
    let levels = (-ki..ki).map(|j| -Sign::parity(j).value() * a).collect();
    let constraints = (-ki..ki)
        .map(|j| {
            Ok(Constraint {
                barrier: fam.member(j)?,
                relation: AlternatingFamily::relation(j),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (p, _) = fit_profile(breaks, levels, &constraints, &[])?;
    Ok((p, constraints))
}

fn finish(
    grid: &Arc<Grid>,
    profile: StepProfile,
    constraints: Vec<Constraint>,
    sup_range: (f64, f64),
) -> Result<ConstructedData> {
    if grid.dim() != 1 {
        return Err(Error::Parameter("sharpness data live on 1D grids".into()));
    }
    let nodes = grid.axis(0).nodes();
    let (profile, min_gap) = fit_profile(profile.breaks, profile.levels, &constraints, nodes)
        .map_err(|_| Error::Construction("grid-verified ordering failed; refine the grid".into()))?;
    let field = profile.sample(grid)?;
    let sup = field.sup_norm();
    if !(sup > sup_range.0 && sup <= sup_range.1) {
        return Err(Error::Construction(format!(
            "sampled sup norm {sup} outside ({}, {}]; grid misses the plateaus",
            sup_range.0, sup_range.1
        )));
    }
    Ok(ConstructedData {
        field,
        profile,
        constraints,
        min_gap,
    })
}

/// Smooth compactly supported data with `3λ < ‖w‖∞ ≤ 4λ`, below `u⁺` on
/// `(−π/λ, 0)`, above `u⁻` on `(0, π/λ)` and zero for `|x| ≥ π/λ`.
pub fn gradient_sharpness_data(lambda: f64, grid: &Arc<Grid>) -> Result<ConstructedData> {
    let (profile, constraints) = gradient_sharpness_profile(lambda)?;
    let reach = 4.0 * PI / lambda;
    let ax = grid.axis(0);
    if ax.lower() > -reach || ax.upper() < reach {
        return Err(Error::Parameter(format!("grid must span [−{reach}, {reach}]")));
    }
    finish(grid, profile, constraints, (3.0 * lambda, 4.0 * lambda))
}

/// Alternating plateaus of height `±(2k + k/4)` on `[−π, π]`, below every
/// upward member and above every downward member of the alternating family.
pub fn area_sharpness_data(k: u32, grid: &Arc<Grid>) -> Result<ConstructedData> {
    let (profile, constraints) = area_sharpness_profile(k)?;
    let ax = grid.axis(0);
    if ax.lower() > -PI || ax.upper() < PI {
        return Err(Error::Parameter("grid must span [−π, π]".into()));
    }
    let kf = k as f64;
    finish(grid, profile, constraints, (2.0 * kf, 3.0 * kf))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn unit_reaper_examples() {
        let g = GrimReaper::unit();
        let (v, s) = grim_reaper_eval(&g, PI / 2.0, 0.0).unwrap();
        assert_abs_diff_eq!(v, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(g.value(PI / 2.0, 5.0).unwrap(), 5.0, epsilon = 1e-15);
    }

    #[test]
    fn probe_height_below_twice_lambda() {
        let h = probe_height(3.0).unwrap();
        // 3 − ln sin(3 e^{−9}) / 3
        let direct = 3.0 - (3.0 * (-9f64).exp()).sin().ln() / 3.0;
        assert_abs_diff_eq!(h, direct, epsilon = 1e-12);
        assert!((h - 5.633).abs() < 1e-3 && h <= 6.0);
    }

    #[test]
    fn reaper_rejects_points_off_its_strip() {
        let g = GrimReaper::unit();
        for x in [0.0, PI, -1.0, 4.0] {
            assert!(matches!(g.eval(x, 0.0), Err(Error::Domain { .. })));
        }
    }

    #[test]
    fn gradient_barrier_examples() {
        let (up, down) = gradient_barriers(2.0).unwrap();
        assert_abs_diff_eq!(up.value(-PI / 4.0, 0.0).unwrap(), -6.0, epsilon = 1e-12);
        assert_abs_diff_eq!(down.value(PI / 4.0, 0.0).unwrap(), 6.0, epsilon = 1e-12);
        assert_eq!(up.domain(), (-PI / 2.0, 0.0));
        assert_eq!(down.domain(), (0.0, PI / 2.0));
        let probe = (-4f64).exp();
        let low = down.value(probe, 1.0).unwrap();
        assert!(low >= 2.0, "{low}");
        assert_abs_diff_eq!(low, -up.value(-probe, 1.0).unwrap(), epsilon = 1e-12);
        assert!(gradient_barriers(1.0).is_err());
    }

    #[test]
    fn alternating_examples() {
        let fam = AlternatingFamily::new(2).unwrap();
        assert_abs_diff_eq!(alternating_eval(&fam, 0, PI / 4.0, 1.0).unwrap(), -2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            alternating_eval(&fam, 1, 3.0 * PI / 4.0, 1.0).unwrap(),
            2.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(alternating_eval(&fam, 0, PI / 4.0, 0.0).unwrap(), -4.0, epsilon = 1e-12);
        assert!(fam.member(3).is_err());
        assert!(AlternatingFamily::new(1).is_err());
        for j in -2..2 {
            let v = alternating_eval(&fam, j, fam.midpoint(j), 1.0).unwrap();
            assert_abs_diff_eq!(v, if j % 2 == 0 { -2.0 } else { 2.0 }, epsilon = 1e-12);
        }
    }

    #[test]
    fn sphere_examples() {
        let s = SphereBarrier::new(3f64.sqrt(), 0.0, 1, Sign::Minus).unwrap();
        assert_abs_diff_eq!(s.height(&[0.0], 1.0).unwrap(), -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.height(&[0.0], 0.0).unwrap(), -3f64.sqrt(), epsilon = 1e-14);
        let s2 = SphereBarrier::new(5f64.sqrt(), 0.0, 2, Sign::Minus).unwrap();
        assert_abs_diff_eq!(s2.height(&[0.0, 0.0], 1.0).unwrap(), -1.0, epsilon = 1e-14);
        assert!(s.height(&[1.5], 1.0).is_err());
        assert!(s.height(&[0.0], 1.5).is_err());
        assert!(SphereBarrier::new(1.0, 0.0, 1, Sign::Minus).is_err());
    }

    #[test]
    fn smooth_step_and_bump_shapes() {
        assert_eq!(smooth_step(-0.1), 0.0);
        assert_eq!(smooth_step(1.2), 1.0);
        assert_abs_diff_eq!(smooth_step(0.5), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(smooth_step(0.3) + smooth_step(0.7), 1.0, epsilon = 1e-15);
        assert_eq!(bump(0.0), 1.0);
        assert_eq!(bump(1.0), 0.0);
    }

    #[test]
    fn profile_plateaus_and_support() {
        let p = StepProfile {
            breaks: vec![-1.0, 0.0, 1.0],
            levels: vec![-2.0, 3.0],
            width: 0.1,
        };
        assert_eq!(p.eval(-1.5), 0.0);
        assert_eq!(p.eval(1.0), 0.0);
        assert_abs_diff_eq!(p.eval(-0.5), -2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(p.eval(0.5), 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(p.eval(0.0), 0.5, epsilon = 1e-14);
    }

    #[test]
    fn gradient_profile_respects_barriers() {
        let (p, cs) = gradient_sharpness_profile(2.0).unwrap();
        assert_eq!(p.amplitude(), 6.5);
        // the dip sits below the minimum of u⁺
        assert!(p.eval(-PI / 4.0) < cs[0].barrier.value(-PI / 4.0, 0.0).unwrap());
        assert!(p.eval(-PI / 4.0) < -6.0);
        assert!(p.width < 1e-3);
    }

    #[test]
    fn area_profile_alternates() {
        let (p, _) = area_sharpness_profile(2).unwrap();
        let fam = AlternatingFamily::new(2).unwrap();
        let signs: Vec<f64> = (-2..2).map(|j| p.eval(fam.midpoint(j)).signum()).collect();
        assert_eq!(signs, vec![-1.0, 1.0, -1.0, 1.0]);
        assert!(p.eval(PI / 4.0) < alternating_eval(&fam, 0, PI / 4.0, 0.0).unwrap());
    }
}
