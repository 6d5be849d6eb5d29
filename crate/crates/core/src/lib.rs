//! Numerical laboratory for mean curvature flow of graphs.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod estimates;
pub mod experiments;
pub mod explicit;
pub mod geometry;
pub mod grid;
pub mod solver;

pub use error::{Error, Result};
pub use estimates::{Direction, EstimateReport};
pub use experiments::{ExperimentSpec, RunBundle};
pub use explicit::{AlternatingFamily, GrimReaper, Relation, Sign, SphereBarrier};
pub use geometry::{compute_geometry, GeometryFields};
pub use grid::{
    divergence, gradient, quadrature, Axis, Ball, Cuboid, Grid, LevelSet, Point, Region, ScalarField, VectorField,
    Whole,
};
pub use solver::{comparison_check, evolve, step, Boundary, ComparisonReport, FlowTrajectory, Scheme, SolverConfig};
