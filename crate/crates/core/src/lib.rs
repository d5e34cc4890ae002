//! Pareto frontier construction for bi-objective minimization problems.
//!
//! The central idea: sweep unit directions `u` in objective space and, for
//! each direction, find the smallest ray parameter `t` at which the ray
//! `y = u * t` (anchored at the ideal point) touches the feasible set
//! `Y = {y : h_i(y) <= 0}`. Feasibility along a ray is decided through the
//! aggregate constraint `H(y) = max_i h_i(y)`, whose roots along the ray are
//! the boundary crossings. Linear problems get an exact cone-LP route through
//! a small two-phase simplex; everything else goes through a scan-plus-
//! bisection boundary search.
//!
//! Modules map onto the pipeline stages:
//!
//! - [`expr`] / [`problem`]: constraint and objective formulas, validated
//!   problems, the aggregate `H` and the membership indicator.
//! - [`directions`]: unit vectors from spherical angles and the 2-D sweep.
//! - [`rayscan`]: the feasible parameter set `T(u)` along a ray as a union of
//!   disjoint intervals with refined endpoints.
//! - [`mapping`]: sampling the image `F(X)` of a decision-space set.
//! - [`anchors`]: the two single-objective anchor solves, the ideal-point
//!   shift, and the condition-(B) diagnostic.
//! - [`simplex`]: dense two-phase simplex and the per-direction cone LP.
//! - [`frontier`]: the per-direction boundary task, the sweep, the pointwise
//!   Pareto certificate, and the dominance filter.

pub mod anchors;
pub mod directions;
pub mod expr;
pub mod frontier;
pub mod mapping;
pub mod problem;
pub mod rayscan;
pub mod simplex;

pub use anchors::{check_condition_b, shift_to_ideal, solve_anchor};
pub use anchors::{AnchorSolution, BVerdict, ConditionBReport, Cone, IdealPoint};
pub use directions::{sweep_2d, unit_from_angles, Angles, UnitDirection};
pub use expr::{extract_affine, AffineForm, Expr};
pub use frontier::{
    dominance_filter, sample_feasible, solve_task_a, sweep, verify_condition_10, Frontier,
    FrontierPoint, Method, PointStatus, SweepConfig,
};
pub use mapping::{image_sample, map_affine_segment, AffineMap, ImageCloud, ImagePoint};
pub use problem::{Constraint, Membership, Problem, ProblemKind, Relation};
pub use rayscan::{feasible_set, refine_root, FeasibleIntervals, Interval, Ray, ScanConfig};
pub use simplex::{build_cone_lp, solve_lp, LinearProgram, LpRow, LpSolution};
