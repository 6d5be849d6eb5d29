//! Tensor-product grids in one or two dimensions and the second-order
//! discrete calculus the rest of the crate is built on.
//!
//! Storage is flat with the first axis fastest: node `(i, j)` of a 2D grid
//! lives at `j * nx + i`. Axes are either uniform or graded (geometric
//! stretching away from a set of focus points); every operator handles both
//! through the same three-point formulas.

use std::sync::Arc;

use crate::error::{Error, Result};

/// Coordinates of a grid node. One-dimensional grids leave the second slot at 0.
pub type Point = [f64; 2];

/// Node positions along one axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    nodes: Vec<f64>,
    spacing: Option<f64>,
}

impl Axis {
    /// `count` equally spaced nodes with `lower` and `upper` as exact end points.
    pub fn uniform(lower: f64, upper: f64, count: usize) -> Result<Self> {
        if count < 3 {
            return Err(Error::InvalidGrid(format!(
                "need at least 3 points per axis, got {count}"
            )));
        }
        if !(lower.is_finite() && upper.is_finite() && lower < upper) {
            return Err(Error::InvalidGrid(format!("bad axis bounds [{lower}, {upper}]")));
        }
        let h = (upper - lower) / (count - 1) as f64;
        let nodes = (0..count)
            .map(|i| if i + 1 == count { upper } else { lower + i as f64 * h })
            .collect();
        Ok(Self {
            nodes,
            spacing: Some(h),
        })
    }

    /// Uniform axis with spacing `h`; `(upper - lower) / h` must be an integer
    /// up to rounding.
    pub fn with_spacing(lower: f64, upper: f64, h: f64) -> Result<Self> {
        let cells = (upper - lower) / h;
        let n = cells.round();
        if !(h > 0.0) || (cells - n).abs() > 1e-9 * cells.max(1.0) {
            return Err(Error::InvalidGrid(format!(
                "spacing {h} does not divide [{lower}, {upper}]"
            )));
        }
        Self::uniform(lower, upper, n as usize + 1)
    }

    /// Arbitrary strictly increasing nodes.
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 3 {
            return Err(Error::InvalidGrid(format!(
                "need at least 3 points per axis, got {}",
                nodes.len()
            )));
        }
        if nodes.iter().any(|x| !x.is_finite()) || nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid(
                "nodes must be finite and strictly increasing".into(),
            ));
        }
        Ok(Self { nodes, spacing: None })
    }

    /// Graded axis: spacing `h_min` at every focus, growing by `ratio` per
    /// cell away from it until it reaches `h_max`. Foci become exact nodes.
    pub fn graded(lower: f64, upper: f64, foci: &[f64], h_min: f64, ratio: f64, h_max: f64) -> Result<Self> {
        if !(h_min > 0.0 && h_max >= h_min && ratio > 1.0 && lower < upper) {
            return Err(Error::InvalidGrid(format!(
                "bad grading: h_min={h_min}, h_max={h_max}, ratio={ratio}"
            )));
        }
        let mut breaks = vec![lower, upper];
        breaks.extend(foci.iter().copied().filter(|f| *f > lower && *f < upper));
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let is_focus = |x: f64| foci.iter().any(|f| (*f - x).abs() <= 1e-15 * (1.0 + x.abs()));

        let mut nodes = vec![lower];
        for seg in breaks.windows(2) {
            let (a, b) = (seg[0], seg[1]);
            let len = b - a;
            let (ga, gb) = (is_focus(a), is_focus(b));
            let budget = if ga && gb { 0.5 * len } else { len };
            let mut left = if ga {
                graded_steps(budget, h_min, ratio, h_max)
            } else {
                vec![]
            };
            let mut right = if gb {
                graded_steps(budget, h_min, ratio, h_max)
            } else {
                vec![]
            };
            loop {
                let used: f64 = left.iter().sum::<f64>() + right.iter().sum::<f64>();
                let gap = len - used;
                let last = left
                    .last()
                    .copied()
                    .unwrap_or(0.0)
                    .max(right.last().copied().unwrap_or(0.0));
                if gap >= 0.5 * last || (left.is_empty() && right.is_empty()) {
                    break;
                }
                if left.last().copied().unwrap_or(0.0) >= right.last().copied().unwrap_or(0.0) {
                    left.pop();
                } else {
                    right.pop();
                }
            }
            let used: f64 = left.iter().sum::<f64>() + right.iter().sum::<f64>();
            let gap = len - used;
            let mut x = a;
            for s in &left {
                x += s;
                nodes.push(x);
            }
            if gap > 0.0 {
                let m = (gap / h_max).ceil().max(1.0) as usize;
                let cell = gap / m as f64;
                let start = x;
                for k in 1..m {
                    nodes.push(start + k as f64 * cell);
                }
            }
            let mut tail = Vec::with_capacity(right.len());
            let mut y = b;
            for s in &right {
                y -= s;
                tail.push(y);
            }
            tail.reverse();
            nodes.extend(tail);
            nodes.push(b);
        }
        Self::from_nodes(nodes)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn lower(&self) -> f64 {
        self.nodes[0]
    }

    pub fn upper(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    /// `Some(h)` for uniform axes.
    pub fn spacing(&self) -> Option<f64> {
        self.spacing
    }

    pub fn is_uniform(&self) -> bool {
        self.spacing.is_some()
    }

    pub fn min_spacing(&self) -> f64 {
        match self.spacing {
            Some(h) => h,
            None => self.nodes.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min),
        }
    }

    pub fn max_spacing(&self) -> f64 {
        match self.spacing {
            Some(h) => h,
            None => self.nodes.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max),
        }
    }

    /// Width of the cell between node `i` and `i + 1`.
    #[inline]
    pub fn cell(&self, i: usize) -> f64 {
        self.nodes[i + 1] - self.nodes[i]
    }

    /// Control-volume width around interior node `i`.
    #[inline]
    pub(crate) fn dual(&self, i: usize) -> f64 {
        match self.spacing {
            Some(h) => h,
            None => 0.5 * (self.nodes[i + 1] - self.nodes[i - 1]),
        }
    }

    /// Index of the node closest to `x`.
    pub fn nearest(&self, x: f64) -> usize {
        let i = self.nodes.partition_point(|v| *v < x);
        if i == 0 {
            0
        } else if i == self.nodes.len() {
            i - 1
        } else if (self.nodes[i] - x).abs() < (x - self.nodes[i - 1]).abs() {
            i
        } else {
            i - 1
        }
    }

    /// First derivative at node `i` from values sampled with stride along this axis.
    #[inline]
    fn d1(&self, f: impl Fn(usize) -> f64, i: usize) -> f64 {
        let n = self.nodes.len();
        let x = &self.nodes;
        match self.spacing {
            Some(h) => {
                if i == 0 {
                    (-3.0 * f(0) + 4.0 * f(1) - f(2)) / (2.0 * h)
                } else if i == n - 1 {
                    (3.0 * f(n - 1) - 4.0 * f(n - 2) + f(n - 3)) / (2.0 * h)
                } else {
                    (f(i + 1) - f(i - 1)) / (2.0 * h)
                }
            }
            None => {
                if i == 0 {
                    let (h1, h2) = (x[1] - x[0], x[2] - x[1]);
                    -(2.0 * h1 + h2) / (h1 * (h1 + h2)) * f(0) + (h1 + h2) / (h1 * h2) * f(1)
                        - h1 / (h2 * (h1 + h2)) * f(2)
                } else if i == n - 1 {
                    let (h1, h2) = (x[n - 1] - x[n - 2], x[n - 2] - x[n - 3]);
                    (2.0 * h1 + h2) / (h1 * (h1 + h2)) * f(n - 1) - (h1 + h2) / (h1 * h2) * f(n - 2)
                        + h1 / (h2 * (h1 + h2)) * f(n - 3)
                } else {
                    let (hm, hp) = (x[i] - x[i - 1], x[i + 1] - x[i]);
                    -hp / (hm * (hm + hp)) * f(i - 1) + (hp - hm) / (hm * hp) * f(i) + hm / (hp * (hm + hp)) * f(i + 1)
                }
            }
        }
    }

    /// Second derivative at node `i`; end nodes reuse the adjacent stencil.
    #[inline]
    fn d2(&self, f: impl Fn(usize) -> f64, i: usize) -> f64 {
        let n = self.nodes.len();
        let c = i.clamp(1, n - 2);
        match self.spacing {
            Some(h) => (f(c - 1) - 2.0 * f(c) + f(c + 1)) / (h * h),
            None => {
                let x = &self.nodes;
                let (hm, hp) = (x[c] - x[c - 1], x[c + 1] - x[c]);
                2.0 * (f(c - 1) / (hm * (hm + hp)) - f(c) / (hm * hp) + f(c + 1) / (hp * (hm + hp)))
            }
        }
    }
}

/// Geometric steps starting at `h_min`, stopping before `h_max` or `budget`.
fn graded_steps(budget: f64, h_min: f64, ratio: f64, h_max: f64) -> Vec<f64> {
    let mut steps = Vec::new();
    let mut s = h_min;
    let mut used = 0.0;
    while s < h_max && used + s <= budget {
        steps.push(s);
        used += s;
        s *= ratio;
    }
    steps
}

/// A one- or two-dimensional tensor-product grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    axes: Vec<Axis>,
}

impl Grid {
    pub fn new(axes: Vec<Axis>) -> Result<Arc<Self>> {
        if axes.is_empty() || axes.len() > 2 {
            return Err(Error::InvalidGrid(format!(
                "dimension must be 1 or 2, got {}",
                axes.len()
            )));
        }
        Ok(Arc::new(Self { axes }))
    }

    /// Uniform grid on `[lower, upper]`.
    pub fn line(lower: f64, upper: f64, count: usize) -> Result<Arc<Self>> {
        Self::new(vec![Axis::uniform(lower, upper, count)?])
    }

    /// Uniform square grid `[lower, upper]²`.
    pub fn square(lower: f64, upper: f64, count: usize) -> Result<Arc<Self>> {
        let a = Axis::uniform(lower, upper, count)?;
        Self::new(vec![a.clone(), a])
    }

    /// Uniform grid on the box `[-half, half]^dim` with spacing close to `h`
    /// and an odd node count, so the origin is a node.
    pub fn centered_box(dim: usize, half: f64, h: f64) -> Result<Arc<Self>> {
        let mut cells = (2.0 * half / h).ceil() as usize;
        if cells % 2 == 1 {
            cells += 1;
        }
        let a = Axis::uniform(-half, half, cells + 1)?;
        Self::new(vec![a; dim])
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axis(&self, a: usize) -> &Axis {
        &self.axes[a]
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn counts(&self) -> Vec<usize> {
        self.axes.iter().map(Axis::len).collect()
    }

    /// Total node count.
    pub fn len(&self) -> usize {
        self.axes.iter().map(Axis::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    fn nx(&self) -> usize {
        self.axes[0].len()
    }

    /// Flat-index stride along axis `a`.
    #[inline]
    pub(crate) fn stride(&self, a: usize) -> usize {
        if a == 0 {
            1
        } else {
            self.nx()
        }
    }

    #[inline]
    pub fn multi_index(&self, idx: usize) -> [usize; 2] {
        if self.dim() == 1 {
            [idx, 0]
        } else {
            [idx % self.nx(), idx / self.nx()]
        }
    }

    #[inline]
    pub fn flat_index(&self, i: usize, j: usize) -> usize {
        j * self.nx() + i
    }

    #[inline]
    pub fn point(&self, idx: usize) -> Point {
        let [i, j] = self.multi_index(idx);
        if self.dim() == 1 {
            [self.axes[0].nodes[i], 0.0]
        } else {
            [self.axes[0].nodes[i], self.axes[1].nodes[j]]
        }
    }

    /// Squared Euclidean distance from the origin.
    #[inline]
    pub fn radius_sq(&self, idx: usize) -> f64 {
        let p = self.point(idx);
        p[0] * p[0] + p[1] * p[1]
    }

    #[inline]
    pub fn is_boundary(&self, idx: usize) -> bool {
        let m = self.multi_index(idx);
        (0..self.dim()).any(|a| m[a] == 0 || m[a] + 1 == self.axes[a].len())
    }

    /// Node closest to `p` (per-axis nearest, which is exact on tensor grids).
    pub fn nearest(&self, p: &[f64]) -> usize {
        let i = self.axes[0].nearest(p[0]);
        if self.dim() == 1 {
            i
        } else {
            self.flat_index(i, self.axes[1].nearest(p[1]))
        }
    }

    pub fn min_spacing(&self) -> f64 {
        self.axes.iter().map(Axis::min_spacing).fold(f64::INFINITY, f64::min)
    }

    pub fn max_spacing(&self) -> f64 {
        self.axes.iter().map(Axis::max_spacing).fold(0.0, f64::max)
    }

    /// Visit every grid line along axis `a` as `(first flat index, stride)`.
    pub(crate) fn lines(&self, a: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let stride = self.stride(a);
        let other = if self.dim() == 1 { 1 } else { self.axes[1 - a].len() };
        let other_stride = if self.dim() == 1 { 0 } else { self.stride(1 - a) };
        (0..other).map(move |k| (k * other_stride, stride))
    }

    /// Derivative along axis `a` at every node: central in the interior,
    /// one-sided second order at the ends.
    pub fn axis_derivative(&self, values: &[f64], a: usize) -> Vec<f64> {
        let axis = &self.axes[a];
        let mut out = vec![0.0; values.len()];
        for (base, stride) in self.lines(a) {
            for i in 0..axis.len() {
                out[base + i * stride] = axis.d1(|k| values[base + k * stride], i);
            }
        }
        out
    }

    /// Second derivative along axis `a` at every node.
    pub fn axis_second_derivative(&self, values: &[f64], a: usize) -> Vec<f64> {
        let axis = &self.axes[a];
        let mut out = vec![0.0; values.len()];
        for (base, stride) in self.lines(a) {
            for i in 0..axis.len() {
                out[base + i * stride] = axis.d2(|k| values[base + k * stride], i);
            }
        }
        out
    }

    /// Full gradient at the faces normal to each axis. Entry `p` of axis `a`
    /// holds the face between node `p` and its successor along `a` (unused
    /// for the last node of each line). The normal component is the compact
    /// difference; tangential components average the nodal central
    /// differences of the two endpoints.
    pub(crate) fn face_gradients(&self, values: &[f64]) -> Vec<Vec<Point>> {
        let dim = self.dim();
        let nodal: Vec<Vec<f64>> = (0..dim).map(|b| self.axis_derivative(values, b)).collect();
        (0..dim)
            .map(|a| {
                let mut faces = vec![[0.0; 2]; values.len()];
                let axis = &self.axes[a];
                for (base, stride) in self.lines(a) {
                    for i in 0..axis.len() - 1 {
                        let p = base + i * stride;
                        let q = p + stride;
                        let mut g = [0.0; 2];
                        g[a] = (values[q] - values[p]) / axis.cell(i);
                        for b in (0..dim).filter(|b| *b != a) {
                            g[b] = 0.5 * (nodal[b][p] + nodal[b][q]);
                        }
                        faces[p] = g;
                    }
                }
                faces
            })
            .collect()
    }

    /// Divergence from face fluxes (conservative form) at interior nodes;
    /// nodes on the boundary fall back to one-sided differences of the nodal
    /// flux components.
    pub(crate) fn flux_divergence(&self, face_flux: &[Vec<f64>], nodal_flux: &[Vec<f64>]) -> Vec<f64> {
        let n = self.len();
        let mut out = vec![0.0; n];
        let fallback: Vec<Vec<f64>> = (0..self.dim())
            .map(|a| self.axis_derivative(&nodal_flux[a], a))
            .collect();
        for (p, o) in out.iter_mut().enumerate() {
            if self.is_boundary(p) {
                *o = fallback.iter().map(|d| d[p]).sum();
                continue;
            }
            let m = self.multi_index(p);
            let mut s = 0.0;
            for (a, flux) in face_flux.iter().enumerate() {
                let st = self.stride(a);
                s += (flux[p] - flux[p - st]) / self.axes[a].dual(m[a]);
            }
            *o = s;
        }
        out
    }
}

/// Values sampled at every node of a grid at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Arc<Grid>,
    values: Vec<f64>,
    time: f64,
}

impl ScalarField {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>, time: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { time });
        }
        Ok(Self { grid, values, time })
    }

    /// Construction without the finiteness scan, for values produced by
    /// operators on finite data.
    pub(crate) fn from_parts(grid: Arc<Grid>, values: Vec<f64>, time: f64) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values, time }
    }

    pub fn from_fn(grid: Arc<Grid>, time: f64, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let dim = grid.dim();
        let values = (0..grid.len()).map(|i| f(&grid.point(i)[..dim])).collect();
        Self::new(grid, values, time)
    }

    pub fn constant(grid: Arc<Grid>, c: f64, time: f64) -> Self {
        let n = grid.len();
        Self::from_parts(grid, vec![c; n], time)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_parts(
            self.grid.clone(),
            self.values.iter().map(|v| f(*v)).collect(),
            self.time,
        )
    }

    /// Pointwise combination with another field on the same grid.
    pub fn zip_with(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        ensure_same_grid(&self.grid, &other.grid)?;
        Ok(Self::from_parts(
            self.grid.clone(),
            self.values.iter().zip(&other.values).map(|(a, b)| f(*a, *b)).collect(),
            self.time,
        ))
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Value at the node closest to `p`.
    pub fn at(&self, p: &[f64]) -> f64 {
        self.values[self.grid.nearest(p)]
    }

    /// Every other node along each axis. Requires odd counts.
    pub fn coarsen(&self) -> Option<Self> {
        let axes: Option<Vec<Axis>> = self
            .grid
            .axes()
            .iter()
            .map(|ax| {
                if ax.len() % 2 == 0 || ax.len() < 5 {
                    return None;
                }
                let nodes: Vec<f64> = ax.nodes().iter().step_by(2).copied().collect();
                Some(match ax.spacing() {
                    Some(h) => Axis {
                        nodes,
                        spacing: Some(2.0 * h),
                    },
                    None => Axis::from_nodes(nodes).ok()?,
                })
            })
            .collect();
        let grid = Grid::new(axes?).ok()?;
        let values = (0..grid.len())
            .map(|k| {
                let [i, j] = grid.multi_index(k);
                self.values[self.grid.flat_index(2 * i, 2 * j)]
            })
            .collect();
        Some(Self::from_parts(grid, values, self.time))
    }
}

/// One real component per axis at every node.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: Arc<Grid>,
    components: Vec<Vec<f64>>,
}

impl VectorField {
    pub fn new(grid: Arc<Grid>, components: Vec<Vec<f64>>) -> Result<Self> {
        if components.len() != grid.dim() || components.iter().any(|c| c.len() != grid.len()) {
            return Err(Error::InvalidGrid("vector field shape mismatch".into()));
        }
        if components.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { time: f64::NAN });
        }
        Ok(Self { grid, components })
    }

    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(&[f64]) -> Point) -> Result<Self> {
        let dim = grid.dim();
        let mut components = vec![vec![0.0; grid.len()]; dim];
        for i in 0..grid.len() {
            let v = f(&grid.point(i)[..dim]);
            for (a, c) in components.iter_mut().enumerate() {
                c[i] = v[a];
            }
        }
        Self::new(grid, components)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn component(&self, a: usize) -> &[f64] {
        &self.components[a]
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.components
    }

    #[inline]
    pub fn at(&self, idx: usize) -> Point {
        let mut p = [0.0; 2];
        for (a, c) in self.components.iter().enumerate() {
            p[a] = c[idx];
        }
        p
    }

    #[inline]
    pub fn norm_sq(&self, idx: usize) -> f64 {
        self.components.iter().map(|c| c[idx] * c[idx]).sum()
    }

    #[inline]
    pub fn dot(&self, other: &VectorField, idx: usize) -> f64 {
        self.components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a[idx] * b[idx])
            .sum()
    }
}

pub(crate) fn ensure_same_grid(a: &Arc<Grid>, b: &Arc<Grid>) -> Result<()> {
    if Arc::ptr_eq(a, b) || **a == **b {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

/// Nodal gradient: central differences inside, one-sided second order on
/// the boundary.
pub fn gradient(f: &ScalarField) -> VectorField {
    let g = &f.grid;
    VectorField {
        grid: g.clone(),
        components: (0..g.dim()).map(|a| g.axis_derivative(&f.values, a)).collect(),
    }
}

/// Divergence in flux-difference form: component fluxes are averaged to the
/// staggered midpoints and differenced across each control volume.
pub fn divergence(field: &VectorField) -> ScalarField {
    let g = &field.grid;
    let faces: Vec<Vec<f64>> = (0..g.dim())
        .map(|a| {
            let c = &field.components[a];
            let st = g.stride(a);
            let mut out = vec![0.0; c.len()];
            for (base, stride) in g.lines(a) {
                for i in 0..g.axis(a).len() - 1 {
                    let p = base + i * stride;
                    out[p] = 0.5 * (c[p] + c[p + st]);
                }
            }
            out
        })
        .collect();
    ScalarField::from_parts(g.clone(), g.flux_divergence(&faces, &field.components), 0.0)
}

/// A region given by a level function: inside where `level <= 0`.
pub trait Region {
    fn level(&self, p: &[f64]) -> f64;
}

/// The whole grid.
#[derive(Debug, Clone, Copy, Default)]
pub struct Whole;

impl Region for Whole {
    fn level(&self, _p: &[f64]) -> f64 {
        -1.0
    }
}

/// Closed Euclidean ball.
#[derive(Debug, Clone, Copy)]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
}

impl Ball {
    pub fn centered(radius: f64) -> Self {
        Self {
            center: [0.0; 2],
            radius,
        }
    }
}

impl Region for Ball {
    fn level(&self, p: &[f64]) -> f64 {
        let r2: f64 = p.iter().zip(self.center).map(|(x, c)| (x - c) * (x - c)).sum();
        r2.sqrt() - self.radius
    }
}

/// Axis-aligned box `lower <= x <= upper`.
#[derive(Debug, Clone, Copy)]
pub struct Cuboid {
    pub lower: Point,
    pub upper: Point,
}

impl Region for Cuboid {
    fn level(&self, p: &[f64]) -> f64 {
        p.iter()
            .enumerate()
            .map(|(a, x)| (self.lower[a] - x).max(x - self.upper[a]))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Region from an arbitrary level function.
pub struct LevelSet<F>(pub F);

impl<F: Fn(&[f64]) -> f64> Region for LevelSet<F> {
    fn level(&self, p: &[f64]) -> f64 {
        (self.0)(p)
    }
}

/// Trapezoid rule over the part of the grid where the region's level is
/// non-positive. Cells cut by the region boundary are clipped at the linearly
/// interpolated zero of the level function and integrated exactly for the
/// linear interpolant of `f` on the clipped piece.
pub fn quadrature(f: &ScalarField, region: &dyn Region) -> Result<f64> {
    let (sum, measure) = quadrature_with_measure(f, region);
    if measure <= 0.0 {
        return Err(Error::EmptyRegion);
    }
    Ok(sum)
}

fn quadrature_with_measure(f: &ScalarField, region: &dyn Region) -> (f64, f64) {
    let g = &f.grid;
    let dim = g.dim();
    let level: Vec<f64> = (0..g.len()).map(|i| region.level(&g.point(i)[..dim])).collect();
    let v = &f.values;
    let mut sum = 0.0;
    let mut measure = 0.0;
    if dim == 1 {
        let ax = g.axis(0);
        for i in 0..ax.len() - 1 {
            let h = ax.cell(i);
            let (la, lb) = (level[i], level[i + 1]);
            let (fa, fb) = (v[i], v[i + 1]);
            if la <= 0.0 && lb <= 0.0 {
                sum += 0.5 * h * (fa + fb);
                measure += h;
            } else if la <= 0.0 || lb <= 0.0 {
                let (lin, lout, fin, fout) = if la <= 0.0 { (la, lb, fa, fb) } else { (lb, la, fb, fa) };
                let theta = lin / (lin - lout);
                let fcut = fin + theta * (fout - fin);
                sum += 0.5 * theta * h * (fin + fcut);
                measure += theta * h;
            }
        }
        return (sum, measure);
    }
    let (ax, ay) = (g.axis(0), g.axis(1));
    for j in 0..ay.len() - 1 {
        for i in 0..ax.len() - 1 {
            let ids = [
                g.flat_index(i, j),
                g.flat_index(i + 1, j),
                g.flat_index(i + 1, j + 1),
                g.flat_index(i, j + 1),
            ];
            let inside = ids.iter().filter(|k| level[**k] <= 0.0).count();
            if inside == 0 {
                continue;
            }
            let area = ax.cell(i) * ay.cell(j);
            if inside == 4 {
                sum += 0.25 * area * ids.iter().map(|k| v[*k]).sum::<f64>();
                measure += area;
                continue;
            }
            for tri in [[ids[0], ids[1], ids[2]], [ids[0], ids[2], ids[3]]] {
                let verts: Vec<(Point, f64, f64)> = tri.iter().map(|k| (g.point(*k), level[*k], v[*k])).collect();
                let (s, m) = clipped_triangle_integral(&verts);
                sum += s;
                measure += m;
            }
        }
    }
    (sum, measure)
}

/// Integral and area of the linear interpolant over `{level <= 0}` within a triangle.
fn clipped_triangle_integral(verts: &[(Point, f64, f64)]) -> (f64, f64) {
    let mut poly: Vec<(Point, f64)> = Vec::with_capacity(4);
    for k in 0..3 {
        let (pa, la, fa) = verts[k];
        let (pb, lb, fb) = verts[(k + 1) % 3];
        if la <= 0.0 {
            poly.push((pa, fa));
        }
        if (la <= 0.0) != (lb <= 0.0) {
            let t = la / (la - lb);
            poly.push((
                [pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1])],
                fa + t * (fb - fa),
            ));
        }
    }
    let mut sum = 0.0;
    let mut measure = 0.0;
    for k in 1..poly.len().saturating_sub(1) {
        let (p0, f0) = poly[0];
        let (p1, f1) = poly[k];
        let (p2, f2) = poly[k + 1];
        let area = 0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1])).abs();
        sum += area * (f0 + f1 + f2) / 3.0;
        measure += area;
    }
    (sum, measure)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn line(n: usize) -> Arc<Grid> {
        Grid::line(-1.0, 1.0, n).unwrap()
    }

    #[test]
    fn rejects_tiny_axes() {
        assert!(matches!(Axis::uniform(0.0, 1.0, 2), Err(Error::InvalidGrid(_))));
        assert!(Axis::from_nodes(vec![0.0, 1.0, 1.0]).is_err());
        assert!(Grid::new(vec![]).is_err());
    }

    #[test]
    fn uniform_axis_hits_end_points() {
        let ax = Axis::uniform(-1.0, 2.0, 301).unwrap();
        assert_eq!(ax.upper(), 2.0);
        assert!((ax.upper() - ax.lower() - 300.0 * ax.spacing().unwrap()).abs() < 1e-14);
    }

    #[test]
    fn gradient_exact_on_affine_fields() {
        let g = Grid::square(-1.0, 1.0, 21).unwrap();
        let f = ScalarField::from_fn(g, 0.0, |p| 0.3 + 2.0 * p[0] - 0.7 * p[1]).unwrap();
        let d = gradient(&f);
        for i in 0..f.grid().len() {
            assert_abs_diff_eq!(d.component(0)[i], 2.0, epsilon = 1e-12);
            assert_abs_diff_eq!(d.component(1)[i], -0.7, epsilon = 1e-12);
        }
    }

    #[test]
    fn gradient_of_constant_vanishes() {
        let f = ScalarField::constant(line(11), 4.0, 0.0);
        assert!(gradient(&f).component(0).iter().all(|d| *d == 0.0));
    }

    #[test]
    fn gradient_second_order() {
        let err = |n: usize| {
            let g = Grid::line(0.0, 3.0, n).unwrap();
            let f = ScalarField::from_fn(g.clone(), 0.0, |p| p[0].sin()).unwrap();
            let d = gradient(&f);
            (0..g.len())
                .map(|i| (d.component(0)[i] - g.point(i)[0].cos()).abs())
                .fold(0.0, f64::max)
        };
        let (e1, e2, e3) = (err(41), err(81), err(161));
        assert!((e1 / e2 - 4.0).abs() < 0.5, "{}", e1 / e2);
        assert!((e2 / e3 - 4.0).abs() < 0.5, "{}", e2 / e3);
    }

    #[test]
    fn divergence_examples() {
        let g = line(21);
        let f = VectorField::from_fn(g.clone(), |p| [p[0], 0.0]).unwrap();
        assert!(divergence(&f).values().iter().all(|d| (d - 1.0).abs() < 1e-12));
        let c = VectorField::from_fn(g, |_| [2.5, 0.0]).unwrap();
        assert!(divergence(&c).values().iter().all(|d| d.abs() < 1e-12));
    }

    #[test]
    fn divergence_second_order_2d() {
        let err = |n: usize| {
            let g = Grid::square(0.0, 2.0, n).unwrap();
            let f = VectorField::from_fn(g.clone(), |p| [p[0].sin() * p[1], (2.0 * p[1]).cos()]).unwrap();
            let d = divergence(&f);
            (0..g.len())
                .map(|i| {
                    let [x, y] = g.point(i);
                    (d.values()[i] - (x.cos() * y - 2.0 * (2.0 * y).sin())).abs()
                })
                .fold(0.0, f64::max)
        };
        let ratio = err(41) / err(81);
        assert!(ratio > 3.5 && ratio < 4.5, "{ratio}");
    }

    #[test]
    fn quadrature_examples() {
        let g = Grid::line(-1.0, 1.0, 201).unwrap();
        let one = ScalarField::constant(g.clone(), 1.0, 0.0);
        assert_abs_diff_eq!(quadrature(&one, &Whole).unwrap(), 2.0, epsilon = 1e-12);
        let odd = ScalarField::from_fn(g, 0.0, |p| p[0]).unwrap();
        assert_abs_diff_eq!(quadrature(&odd, &Whole).unwrap(), 0.0, epsilon = 1e-12);
        let g01 = Grid::line(0.0, 1.0, 101).unwrap();
        let sq = ScalarField::from_fn(g01, 0.0, |p| p[0] * p[0]).unwrap();
        assert_abs_diff_eq!(quadrature(&sq, &Whole).unwrap(), 1.0 / 3.0, epsilon = 2e-5);
    }

    #[test]
    fn cut_cells_resolve_ball_boundaries() {
        // Length of [-0.5, 0.5] on a grid that does not have nodes at +-0.5.
        let g = Grid::line(-1.0, 1.0, 30).unwrap();
        let one = ScalarField::constant(g.clone(), 1.0, 0.0);
        assert_abs_diff_eq!(quadrature(&one, &Ball::centered(0.5)).unwrap(), 1.0, epsilon = 1e-12);
        // Area of the unit disc at second order.
        let err = |n: usize| {
            let g = Grid::square(-1.3, 1.3, n).unwrap();
            let one = ScalarField::constant(g, 1.0, 0.0);
            (quadrature(&one, &Ball::centered(1.0)).unwrap() - std::f64::consts::PI).abs()
        };
        let (e1, e2) = (err(40), err(80));
        assert!(e1 < 2e-2 && e2 < e1 / 3.0, "{e1} {e2}");
    }

    #[test]
    fn empty_region_is_an_error() {
        let g = line(11);
        let one = ScalarField::constant(g, 1.0, 0.0);
        let far = Ball {
            center: [5.0, 0.0],
            radius: 0.1,
        };
        assert_eq!(quadrature(&one, &far), Err(Error::EmptyRegion));
    }

    #[test]
    fn graded_axis_clusters_at_foci() {
        let ax = Axis::graded(-2.0, 2.0, &[0.0, -1.0], 1e-6, 1.2, 1e-2).unwrap();
        assert!(ax.nodes().contains(&0.0));
        assert!(ax.nodes().contains(&-1.0));
        assert!((ax.min_spacing() - 1e-6).abs() < 1e-12);
        assert!(ax.max_spacing() <= 1e-2 * (1.0 + 1e-9));
        let ratios = ax.nodes().windows(3).map(|w| (w[2] - w[1]) / (w[1] - w[0]));
        assert!(ratios.clone().fold(0.0, f64::max) < 2.5);
        assert!(ratios.fold(f64::INFINITY, f64::min) > 0.4);
    }

    #[test]
    fn graded_gradient_exact_on_quadratics() {
        let ax = Axis::graded(-1.0, 1.0, &[0.2], 1e-4, 1.3, 0.05).unwrap();
        let g = Grid::new(vec![ax]).unwrap();
        let f = ScalarField::from_fn(g.clone(), 0.0, |p| 1.0 - 3.0 * p[0] + p[0] * p[0]).unwrap();
        let d = gradient(&f);
        for i in 0..g.len() {
            let x = g.point(i)[0];
            assert_abs_diff_eq!(d.component(0)[i], -3.0 + 2.0 * x, epsilon = 1e-7);
        }
    }

    #[test]
    fn coarsen_keeps_even_nodes() {
        let g = Grid::line(0.0, 1.0, 11).unwrap();
        let f = ScalarField::from_fn(g, 0.0, |p| p[0]).unwrap();
        let c = f.coarsen().unwrap();
        assert_eq!(c.values().len(), 6);
        assert_abs_diff_eq!(c.values()[3], 0.6, epsilon = 1e-15);
        assert_eq!(c.grid().axis(0).spacing(), Some(0.2));
    }
}
