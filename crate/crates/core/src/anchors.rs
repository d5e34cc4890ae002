//! Anchor solves (`y1 -> min`, `y2 -> min` over the feasible set), the ideal
//! point and the coordinate shift that moves the origin there, and the
//! sampled condition-(B) diagnostic that decides whether the ray sweep is
//! trustworthy on a non-convex set.

use serde::Serialize;
use thiserror::Error;

use crate::directions::UnitDirection;
use crate::problem::Problem;
use crate::rayscan::{feasible_set, Ray, ScanConfig};
use crate::simplex::{lp_from_problem, solve_lp, LpSolution, SimplexError};

#[derive(Debug, Error)]
pub enum AnchorError {
    #[error("anchor index must be 1 or 2, got {0}")]
    BadIndex(usize),
    #[error("anchor solve needs a 2-variable problem, got {0} variables")]
    NotTwoVariables(usize),
    #[error("no feasible point found in the [0, {window}]^2 scan window; try a larger --t-max")]
    NoFeasiblePoint { window: f64 },
    #[error("the feasible set is empty (LP phase 1 infeasible)")]
    Infeasible,
    #[error("coordinate y{0} is unbounded below over the feasible set")]
    Unbounded(usize),
    #[error(transparent)]
    Simplex(#[from] SimplexError),
}

/// Minimum of one coordinate over the feasible set, with a feasible witness.
#[derive(Debug, Clone, Serialize)]
pub struct AnchorSolution {
    /// Which coordinate was minimized (1 or 2).
    pub index: usize,
    pub value: f64,
    pub witness: [f64; 2],
}

/// The componentwise minimum of both anchors; the shifted origin. Generally
/// infeasible.
#[derive(Debug, Clone, Serialize)]
pub struct IdealPoint {
    pub coordinates: [f64; 2],
}

impl IdealPoint {
    pub fn from_anchors(a1: &AnchorSolution, a2: &AnchorSolution) -> IdealPoint {
        debug_assert_eq!(a1.index, 1);
        debug_assert_eq!(a2.index, 2);
        IdealPoint { coordinates: [a1.value, a2.value] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConeKind {
    /// `K` at a frontier candidate: everything componentwise below the apex.
    LowerLeft,
    /// `K0` at the ideal point: everything componentwise above the apex.
    Containing,
}

/// An axis-aligned orthant cone; membership is a componentwise comparison.
#[derive(Debug, Clone, Serialize)]
pub struct Cone {
    pub apex: [f64; 2],
    pub kind: ConeKind,
}

impl Cone {
    pub fn lower_left(apex: [f64; 2]) -> Cone {
        Cone { apex, kind: ConeKind::LowerLeft }
    }

    pub fn containing(apex: [f64; 2]) -> Cone {
        Cone { apex, kind: ConeKind::Containing }
    }

    pub fn contains(&self, y: [f64; 2]) -> bool {
        match self.kind {
            ConeKind::LowerLeft => y[0] <= self.apex[0] && y[1] <= self.apex[1],
            ConeKind::Containing => y[0] >= self.apex[0] && y[1] >= self.apex[1],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BVerdict {
    /// Every sampled line respected its bound; (B) holds on the evidence
    /// gathered (it is not proved).
    HoldsOnEvidence,
    Fails,
    /// No line could be checked (coincident anchors).
    Degenerate,
}

/// Sampled evidence for the paper's condition (B).
#[derive(Debug, Clone, Serialize)]
pub struct ConditionBReport {
    /// `H(ideal) > 0`: the ideal point lies outside the feasible set.
    pub ideal_infeasible: bool,
    /// Every feasible point on a coarse quadrant grid is componentwise
    /// above the ideal point.
    pub ideal_in_k0: bool,
    pub vertical_checked: usize,
    pub vertical_ok: usize,
    pub horizontal_checked: usize,
    pub horizontal_ok: usize,
    /// Lines that missed the feasible set entirely.
    pub lines_skipped: usize,
    pub verdict: BVerdict,
}

/// Minimize coordinate `index` (1 or 2) over the feasible set. Linear
/// problems go through the simplex; otherwise a line sweep over the
/// `[0, t_max]^2 ` quadrant window with local refinement of the line offset.
pub fn solve_anchor(
    p: &Problem,
    index: usize,
    cfg: &ScanConfig,
    grid: usize,
) -> Result<AnchorSolution, AnchorError> {
    if p.dim() != 2 {
        return Err(AnchorError::NotTwoVariables(p.dim()));
    }
    if index != 1 && index != 2 {
        return Err(AnchorError::BadIndex(index));
    }

    if p.linear {
        let mut objective = vec![0.0, 0.0];
        objective[index - 1] = 1.0;
        let lp = lp_from_problem(p, objective)?;
        return match solve_lp(&lp)? {
            LpSolution::Optimal { objective, values } => Ok(AnchorSolution {
                index,
                value: objective,
                witness: [values[0], values[1]],
            }),
            LpSolution::Infeasible => Err(AnchorError::Infeasible),
            LpSolution::Unbounded => Err(AnchorError::Unbounded(index)),
        };
    }

    // Nonlinear: for each offset `o` of the other coordinate, the minimal
    // feasible value of coordinate `index` on that line is the first
    // interval's lower endpoint of a ray scan along the axis.
    let line_min = |o: f64| -> Option<f64> {
        let origin = if index == 1 { vec![0.0, o] } else { vec![o, 0.0] };
        let direction = if index == 1 {
            UnitDirection::plane(0.0)
        } else {
            UnitDirection::plane(std::f64::consts::FRAC_PI_2)
        };
        let set = feasible_set(p, &Ray::new(origin, direction), cfg);
        set.first().map(|iv| iv.lo)
    };

    let step = cfg.t_max / grid.max(1) as f64;
    let mut best: Option<(f64, f64)> = None; // (value, offset)
    for k in 0..=grid.max(1) {
        let o = k as f64 * step;
        if let Some(v) = line_min(o) {
            let better = match best {
                None => true,
                Some((bv, bo)) => v < bv - 1e-12 || ((v - bv).abs() <= 1e-12 && o < bo),
            };
            if better {
                best = Some((v, o));
            }
        }
    }
    let (mut value, mut offset) =
        best.ok_or(AnchorError::NoFeasiblePoint { window: cfg.t_max })?;

    // Local refinement of the line offset to ~1e-7.
    let mut delta = step;
    while delta > 1e-7 {
        let mut improved = false;
        for cand in [offset - delta, offset + delta] {
            if !(0.0..=cfg.t_max).contains(&cand) {
                continue;
            }
            if let Some(v) = line_min(cand) {
                if v < value - 1e-12 || ((v - value).abs() <= 1e-12 && cand < offset) {
                    value = v;
                    offset = cand;
                    improved = true;
                }
            }
        }
        if !improved {
            delta /= 10.0;
        }
    }

    let witness = if index == 1 { [value, offset] } else { [offset, value] };
    Ok(AnchorSolution { index, value, witness })
}

/// The problem in shifted coordinates `y = ideal + y~`; its aggregate `H`
/// at `y~` equals the original `H` at `y~ + ideal` exactly.
pub fn shift_to_ideal(p: &Problem, ideal: &IdealPoint) -> Problem {
    p.shifted(&ideal.coordinates)
}

/// Sample evidence for condition (B): the ideal point must be infeasible,
/// and on every vertical (resp. horizontal) line between the anchor
/// witnesses the lowest intersection with the feasible set must stay below
/// the opposite anchor's level. `lines` is the number of lines sampled per
/// orientation.
pub fn check_condition_b(
    p: &Problem,
    a1: &AnchorSolution,
    a2: &AnchorSolution,
    lines: usize,
    cfg: &ScanConfig,
) -> ConditionBReport {
    let ideal = IdealPoint::from_anchors(a1, a2).coordinates;
    let ideal_infeasible = !p.is_feasible(&ideal, cfg.tol_feas);

    let k0 = Cone::containing(ideal);
    let mut ideal_in_k0 = true;
    let n = 100usize;
    for i in 0..=n {
        for j in 0..=n {
            let y = [
                ideal[0].min(0.0) + (ideal[0].max(0.0) + cfg.t_max) * i as f64 / n as f64,
                ideal[1].min(0.0) + (ideal[1].max(0.0) + cfg.t_max) * j as f64 / n as f64,
            ];
            if p.is_feasible(&y, cfg.tol_feas)
                && !k0.contains([y[0] + 1e-6, y[1] + 1e-6])
            {
                ideal_in_k0 = false;
            }
        }
    }

    let mut lines_skipped = 0;
    let mut check_lines = |lo: f64, hi: f64, vertical: bool, bound: f64| -> (usize, usize) {
        if hi - lo <= 1e-9 {
            return (0, 0);
        }
        let mut checked = 0;
        let mut ok = 0;
        for j in 0..lines {
            let o = lo + (hi - lo) * (j + 1) as f64 / (lines + 1) as f64;
            let (origin, phi, base) = if vertical {
                (vec![o, ideal[1].min(0.0)], std::f64::consts::FRAC_PI_2, ideal[1].min(0.0))
            } else {
                (vec![ideal[0].min(0.0), o], 0.0, ideal[0].min(0.0))
            };
            let set = feasible_set(p, &Ray::new(origin, UnitDirection::plane(phi)), cfg);
            match set.first() {
                None => lines_skipped += 1,
                Some(iv) => {
                    checked += 1;
                    if base + iv.lo <= bound + 1e-6 {
                        ok += 1;
                    }
                }
            }
        }
        (checked, ok)
    };

    // Vertical lines between the anchor abscissas: the lowest ordinate hit
    // must not exceed the min-y1 witness's ordinate. Horizontal lines
    // symmetrically against the min-y2 witness's abscissa.
    let (vertical_checked, vertical_ok) = check_lines(
        a1.witness[0].min(a2.witness[0]),
        a1.witness[0].max(a2.witness[0]),
        true,
        a1.witness[1],
    );
    let (horizontal_checked, horizontal_ok) = check_lines(
        a1.witness[1].min(a2.witness[1]),
        a1.witness[1].max(a2.witness[1]),
        false,
        a2.witness[0],
    );

    let verdict = if !ideal_infeasible
        || vertical_ok < vertical_checked
        || horizontal_ok < horizontal_checked
    {
        BVerdict::Fails
    } else if vertical_checked + horizontal_checked == 0 {
        BVerdict::Degenerate
    } else {
        BVerdict::HoldsOnEvidence
    };

    ConditionBReport {
        ideal_infeasible,
        ideal_in_k0,
        vertical_checked,
        vertical_ok,
        horizontal_checked,
        horizontal_ok,
        lines_skipped,
        verdict,
    }
}
