//! Fixtures shared by the benchmarks.

use std::f64::consts::PI;

use mcflab_core::explicit::{bump, GrimReaper};
use mcflab_core::{Grid, ScalarField};

/// Unit grim reaper on `[π/20, 19π/20]` with `cells` cells.
pub fn reaper(cells: usize) -> ScalarField {
    let a = PI / 20.0;
    let g = Grid::line(a, PI - a, cells + 1).expect("grid");
    let r = GrimReaper::unit();
    ScalarField::from_fn(g, 0.0, |x| r.value(x[0], 0.0).expect("inside strip")).expect("field")
}

/// A wavy bump on `[−1, 1]²` with `n × n` nodes.
pub fn surface(n: usize) -> ScalarField {
    let g = Grid::square(-1.0, 1.0, n).expect("grid");
    ScalarField::from_fn(g, 0.0, |x| {
        2.0 * bump(x[0].hypot(x[1]) / 0.9) * (1.0 + 0.3 * (4.0 * x[0]).sin())
    })
    .expect("field")
}
