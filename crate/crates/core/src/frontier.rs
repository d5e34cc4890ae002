//! The per-direction boundary task, the angle sweep that assembles the
//! Pareto frontier, the sampled pointwise Pareto certificate (condition 10),
//! and the dominance filter applied when condition (B) fails.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::anchors::{
    check_condition_b, shift_to_ideal, solve_anchor, AnchorError, AnchorSolution, BVerdict,
    ConditionBReport, IdealPoint,
};
use crate::directions::{sweep_2d, DirectionError, UnitDirection};
use crate::problem::Problem;
use crate::rayscan::{feasible_set, EndpointKind, Ray, ScanConfig};
use crate::simplex::{build_cone_lp, solve_lp, LpSolution, SimplexError};

#[derive(Debug, Error)]
pub enum FrontierError {
    #[error(transparent)]
    Anchor(#[from] AnchorError),
    #[error(transparent)]
    Direction(#[from] DirectionError),
    #[error(transparent)]
    Simplex(#[from] SimplexError),
    #[error("cone LP unexpectedly {0}")]
    UnexpectedLp(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointStatus {
    /// The ray reached a refined boundary crossing.
    Boundary,
    /// The ray missed the feasible set inside the scan window.
    NoIntersection,
    /// The smallest feasible parameter sits on the window edge, not on a
    /// refined root.
    ScanLimit,
}

/// One task-(A) solution. `y_star` is reported in original (unshifted)
/// coordinates.
#[derive(Debug, Clone, Serialize)]
pub struct FrontierPoint {
    pub angle: f64,
    pub status: PointStatus,
    pub t_star: Option<f64>,
    pub y_star: Option<[f64; 2]>,
    pub h_residual: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// LP route iff the problem is linear.
    Auto,
    Scan,
    Lp,
}

/// Sweep parameters; defaults mirror the CLI defaults.
#[derive(Debug, Clone, Copy)]
pub struct SweepConfig {
    pub angles: usize,
    pub phi_lo: f64,
    pub phi_hi: f64,
    pub method: Method,
    /// Move the sweep origin to the ideal point before sweeping.
    pub shift: bool,
    /// Offset-grid resolution for nonlinear anchor solves.
    pub anchor_grid: usize,
    /// Lines per orientation for the condition-(B) scan.
    pub b_lines: usize,
    /// Feasible-sample budget for the condition-(10) certificate.
    pub samples: usize,
    pub seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            angles: 150,
            phi_lo: 0.01,
            phi_hi: 1.5607,
            method: Method::Auto,
            shift: true,
            anchor_grid: 200,
            b_lines: 100,
            samples: 100_000,
            seed: 42,
        }
    }
}

/// The swept frontier, ordered by angle.
#[derive(Debug, Clone, Serialize)]
pub struct Frontier {
    pub points: Vec<FrontierPoint>,
    pub anchors: (AnchorSolution, AnchorSolution),
    pub ideal: IdealPoint,
    pub condition_b: ConditionBReport,
    /// True when the dominance filter ran (condition (B) failed).
    pub filtered: bool,
    pub removed_by_filter: usize,
}

/// Task (A) for one direction: the smallest feasible ray parameter from the
/// (shifted) origin, with bisection-refined boundary contact. `shifted` must
/// already be in ideal-relative coordinates; `ideal` is added back for
/// reporting.
pub fn solve_task_a(
    shifted: &Problem,
    ideal: &IdealPoint,
    angle: f64,
    cfg: &ScanConfig,
) -> FrontierPoint {
    let u = UnitDirection::plane(angle);
    let set = feasible_set(shifted, &Ray::from_origin(u.clone()), cfg);
    match set.first() {
        None => FrontierPoint {
            angle,
            status: PointStatus::NoIntersection,
            t_star: None,
            y_star: None,
            h_residual: None,
        },
        Some(iv) => {
            let t = iv.lo;
            let y_shifted = [u.components()[0] * t, u.components()[1] * t];
            let y = [
                ideal.coordinates[0] + y_shifted[0],
                ideal.coordinates[1] + y_shifted[1],
            ];
            let h = shifted.aggregate_h(&y_shifted).ok();
            let status = if iv.lo_kind == EndpointKind::RefinedRoot {
                PointStatus::Boundary
            } else {
                PointStatus::ScanLimit
            };
            FrontierPoint { angle, status, t_star: Some(t), y_star: Some(y), h_residual: h }
        }
    }
}

fn solve_task_a_lp(
    shifted: &Problem,
    ideal: &IdealPoint,
    angle: f64,
) -> Result<FrontierPoint, FrontierError> {
    let u = UnitDirection::plane(angle);
    let lp = build_cone_lp(shifted, &u)?;
    match solve_lp(&lp)? {
        LpSolution::Optimal { objective, values } => {
            let y_shifted = [values[0], values[1]];
            let y = [
                ideal.coordinates[0] + y_shifted[0],
                ideal.coordinates[1] + y_shifted[1],
            ];
            let h = shifted.aggregate_h(&y_shifted).ok();
            Ok(FrontierPoint {
                angle,
                status: PointStatus::Boundary,
                t_star: Some(objective),
                y_star: Some(y),
                h_residual: h,
            })
        }
        LpSolution::Infeasible => Ok(FrontierPoint {
            angle,
            status: PointStatus::NoIntersection,
            t_star: None,
            y_star: None,
            h_residual: None,
        }),
        LpSolution::Unbounded => Err(FrontierError::UnexpectedLp("unbounded".to_string())),
    }
}

fn anchor_endpoint(p: &Problem, ideal: &IdealPoint, angle: f64, witness: [f64; 2]) -> FrontierPoint {
    let d = [
        witness[0] - ideal.coordinates[0],
        witness[1] - ideal.coordinates[1],
    ];
    FrontierPoint {
        angle,
        status: PointStatus::Boundary,
        t_star: Some((d[0] * d[0] + d[1] * d[1]).sqrt()),
        y_star: Some(witness),
        h_residual: p.aggregate_h(&witness).ok(),
    }
}

/// Sweep directions between `phi_lo` and `phi_hi` and assemble the frontier:
/// anchors, ideal shift, condition-(B) report, one task-(A) solve per angle,
/// the two anchor witnesses as endpoints, and the dominance filter when (B)
/// fails.
pub fn sweep(
    p: &Problem,
    sweep_cfg: &SweepConfig,
    scan_cfg: &ScanConfig,
) -> Result<Frontier, FrontierError> {
    let a1 = solve_anchor(p, 1, scan_cfg, sweep_cfg.anchor_grid)?;
    let a2 = solve_anchor(p, 2, scan_cfg, sweep_cfg.anchor_grid)?;
    let condition_b = check_condition_b(p, &a1, &a2, sweep_cfg.b_lines, scan_cfg);

    // Coincident witnesses: the frontier is that single point.
    let coincident = (a1.witness[0] - a2.witness[0]).abs() <= 1e-9
        && (a1.witness[1] - a2.witness[1]).abs() <= 1e-9;
    if coincident {
        let ideal = IdealPoint::from_anchors(&a1, &a2);
        let point = FrontierPoint {
            angle: 0.0,
            status: PointStatus::Boundary,
            t_star: Some(0.0),
            y_star: Some(a1.witness),
            h_residual: p.aggregate_h(&a1.witness).ok(),
        };
        return Ok(Frontier {
            points: vec![point],
            anchors: (a1, a2),
            ideal,
            condition_b,
            filtered: false,
            removed_by_filter: 0,
        });
    }

    let ideal = if sweep_cfg.shift {
        IdealPoint::from_anchors(&a1, &a2)
    } else {
        IdealPoint { coordinates: [0.0, 0.0] }
    };
    let shifted = shift_to_ideal(p, &ideal);

    let use_lp = match sweep_cfg.method {
        Method::Lp => true,
        Method::Scan => false,
        Method::Auto => p.linear,
    };

    let mut points = Vec::with_capacity(sweep_cfg.angles + 2);
    if sweep_cfg.phi_lo > 0.0 {
        points.push(anchor_endpoint(p, &ideal, 0.0, a2.witness));
    }
    for angles in sweep_2d(sweep_cfg.angles, sweep_cfg.phi_lo, sweep_cfg.phi_hi)? {
        let phi = angles.values()[0];
        let point = if use_lp {
            solve_task_a_lp(&shifted, &ideal, phi)?
        } else {
            solve_task_a(&shifted, &ideal, phi, scan_cfg)
        };
        points.push(point);
    }
    if sweep_cfg.phi_hi < std::f64::consts::FRAC_PI_2 {
        points.push(anchor_endpoint(p, &ideal, std::f64::consts::FRAC_PI_2, a1.witness));
    }

    let mut filtered = false;
    let mut removed_by_filter = 0;
    if condition_b.verdict == BVerdict::Fails {
        let ys: Vec<[f64; 2]> = points.iter().filter_map(|pt| pt.y_star).collect();
        let mut keep = dominance_filter(&ys);
        points.retain(|pt| match pt.y_star {
            None => true,
            Some(y) => match keep.iter().position(|k| *k == y) {
                // Consume matches so collapsed duplicates are kept once.
                Some(pos) => {
                    keep.remove(pos);
                    true
                }
                None => {
                    removed_by_filter += 1;
                    false
                }
            },
        });
        filtered = true;
    }

    Ok(Frontier {
        points,
        anchors: (a1, a2),
        ideal,
        condition_b,
        filtered,
        removed_by_filter,
    })
}

/// Rejection-sample `count` feasible points uniformly from the box
/// `[lo, hi]`, deterministically for a fixed seed. Gives up after
/// `400 * count` attempts and returns what it has.
pub fn sample_feasible(
    p: &Problem,
    lo: [f64; 2],
    hi: [f64; 2],
    count: usize,
    seed: u64,
) -> Vec<[f64; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0usize;
    while out.len() < count && attempts < count.saturating_mul(400) {
        attempts += 1;
        let y = [
            rng.gen_range(lo[0]..=hi[0]),
            rng.gen_range(lo[1]..=hi[1]),
        ];
        if p.is_feasible(&y, 1e-9) {
            out.push(y);
        }
    }
    out
}

/// Sampled restatement of condition (10), `K cap Y = {y*}`: true iff no
/// sample dominates the candidate's `y_star` (componentwise at most equal,
/// strictly smaller in one coordinate, with 1e-9 margins). Vacuously true
/// for an empty sample list or a candidate without `y_star`.
pub fn verify_condition_10(candidate: &FrontierPoint, samples: &[[f64; 2]]) -> bool {
    let Some(y) = candidate.y_star else {
        return true;
    };
    !samples.iter().any(|s| {
        s[0] <= y[0] + 1e-9
            && s[1] <= y[1] + 1e-9
            && (s[0] < y[0] - 1e-9 || s[1] < y[1] - 1e-9)
    })
}

/// The non-dominated subset under componentwise minimization, sorted by
/// first coordinate ascending; exact duplicates collapse to one.
pub fn dominance_filter(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("non-NaN points"));
    let mut out: Vec<[f64; 2]> = Vec::new();
    let mut best_y2 = f64::INFINITY;
    for y in sorted {
        if y[1] < best_y2 {
            out.push(y);
            best_y2 = y[1];
        }
    }
    out
}
