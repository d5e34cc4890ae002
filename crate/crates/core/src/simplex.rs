//! Dense two-phase simplex with Bland's rule, plus the per-direction cone
//! LP: minimize `t` subject to the problem's linear constraints and
//! `y_i <= u_i * t`. Variables are implicitly nonnegative.

use thiserror::Error;

use crate::directions::UnitDirection;
use crate::problem::{Problem, Relation};

const PIVOT_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-9;
const MAX_ITERATIONS: usize = 10_000;

#[derive(Debug, Error)]
pub enum SimplexError {
    #[error("simplex iteration limit exceeded")]
    IterationLimit,
    #[error("row has {got} coefficients, expected {expected}")]
    Dimension { got: usize, expected: usize },
    #[error("constraint `{0}` is not affine; use the scan path")]
    NonlinearConstraint(String),
    #[error("cone LP needs a strictly positive direction, got ({0}, {1})")]
    NonPositiveDirection(f64, f64),
    #[error("cone LP needs a 2-variable problem, got {0} variables")]
    NotTwoVariables(usize),
}

#[derive(Debug, Clone)]
pub struct LpRow {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

/// `minimize objective . x` subject to the rows, with `x >= 0` implicit.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub objective: Vec<f64>,
    pub rows: Vec<LpRow>,
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>, rows: Vec<LpRow>) -> Result<LinearProgram, SimplexError> {
        let num_vars = objective.len();
        for row in &rows {
            if row.coeffs.len() != num_vars {
                return Err(SimplexError::Dimension { got: row.coeffs.len(), expected: num_vars });
            }
        }
        Ok(LinearProgram { num_vars, objective, rows })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpSolution {
    Optimal { objective: f64, values: Vec<f64> },
    Infeasible,
    Unbounded,
}

/// The cone LP for one sweep direction: variables `(y1, y2, t)`, objective
/// `min t`, the problem's constraints plus `y_i - u_i * t <= 0`.
///
/// The reported frontier point is the touching feasible point `y`, not the
/// cone apex `u * t`.
pub fn build_cone_lp(p: &Problem, u: &UnitDirection) -> Result<LinearProgram, SimplexError> {
    if p.dim() != 2 {
        return Err(SimplexError::NotTwoVariables(p.dim()));
    }
    let (u1, u2) = (u.components()[0], u.components()[1]);
    if u1 <= 0.0 || u2 <= 0.0 {
        return Err(SimplexError::NonPositiveDirection(u1, u2));
    }
    let mut rows = problem_rows(p, 3)?;
    rows.push(LpRow { coeffs: vec![1.0, 0.0, -u1], relation: Relation::Le, rhs: 0.0 });
    rows.push(LpRow { coeffs: vec![0.0, 1.0, -u2], relation: Relation::Le, rhs: 0.0 });
    LinearProgram::new(vec![0.0, 0.0, 1.0], rows)
}

/// LP over the problem's own variables with an arbitrary linear objective;
/// used for the anchor solves.
pub fn lp_from_problem(p: &Problem, objective: Vec<f64>) -> Result<LinearProgram, SimplexError> {
    let n = p.dim();
    let rows = problem_rows(p, n)?;
    LinearProgram::new(objective, rows)
}

/// Normalized constraints `c . y + d <= 0` as rows `c . y <= -d`, padded to
/// `width` variables.
fn problem_rows(p: &Problem, width: usize) -> Result<Vec<LpRow>, SimplexError> {
    p.constraints
        .iter()
        .map(|c| {
            let form = crate::expr::extract_affine(&c.normalized, &p.variables)
                .ok_or_else(|| SimplexError::NonlinearConstraint(c.normalized.to_string()))?;
            let mut coeffs = form.coeffs;
            coeffs.resize(width, 0.0);
            Ok(LpRow { coeffs, relation: Relation::Le, rhs: -form.constant })
        })
        .collect()
}

/// Two-phase dense simplex. Bland's rule (lowest eligible index) both for
/// the entering column and for ratio-test ties, which rules out cycling.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution, SimplexError> {
    let n = lp.num_vars;
    let m = lp.rows.len();

    // Column layout: structural | one slack or surplus per row | artificials.
    let n_aux = m;
    let mut num_artificial = 0;
    for row in &lp.rows {
        let ge = matches!(row.relation, Relation::Ge) != (row.rhs < 0.0);
        if ge {
            num_artificial += 1;
        }
    }
    let total = n + n_aux + num_artificial;
    let first_artificial = n + n_aux;

    let mut tableau = vec![vec![0.0; total + 1]; m];
    let mut basis = vec![0usize; m];
    let mut next_artificial = first_artificial;
    for (i, row) in lp.rows.iter().enumerate() {
        let flip = row.rhs < 0.0;
        let sign = if flip { -1.0 } else { 1.0 };
        for (j, &c) in row.coeffs.iter().enumerate() {
            tableau[i][j] = sign * c;
        }
        tableau[i][total] = sign * row.rhs;
        let ge = matches!(row.relation, Relation::Ge) != flip;
        if ge {
            tableau[i][n + i] = -1.0; // surplus
            tableau[i][next_artificial] = 1.0;
            basis[i] = next_artificial;
            next_artificial += 1;
        } else {
            tableau[i][n + i] = 1.0; // slack
            basis[i] = n + i;
        }
    }

    let mut iterations = 0usize;

    // Phase 1: minimize the sum of artificials.
    if num_artificial > 0 {
        let mut cost = vec![0.0; total];
        for c in cost.iter_mut().take(total).skip(first_artificial) {
            *c = 1.0;
        }
        match run_simplex(&mut tableau, &mut basis, &cost, total, &mut iterations)? {
            SimplexOutcome::Optimal => {}
            SimplexOutcome::Unbounded => unreachable!("phase 1 is bounded below by 0"),
        }
        let w: f64 = basis
            .iter()
            .enumerate()
            .filter(|(_, &b)| b >= first_artificial)
            .map(|(i, _)| tableau[i][total])
            .sum();
        if w > FEAS_TOL {
            return Ok(LpSolution::Infeasible);
        }
        // Drive leftover artificials out of the basis; a row with no other
        // nonzero entry is redundant and gets dropped.
        let mut i = 0;
        while i < basis.len() {
            if basis[i] >= first_artificial {
                let pivot_col = (0..first_artificial)
                    .find(|&j| tableau[i][j].abs() > PIVOT_TOL && !basis.contains(&j));
                match pivot_col {
                    Some(j) => pivot(&mut tableau, &mut basis, i, j, total),
                    None => {
                        tableau.remove(i);
                        basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
    }

    // Phase 2: original objective, artificial columns excluded from pricing.
    let mut cost = vec![0.0; total];
    cost[..n].copy_from_slice(&lp.objective);
    let outcome = run_simplex(&mut tableau, &mut basis, &cost, first_artificial, &mut iterations)?;
    if matches!(outcome, SimplexOutcome::Unbounded) {
        return Ok(LpSolution::Unbounded);
    }

    let mut values = vec![0.0; n];
    for (i, &b) in basis.iter().enumerate() {
        if b < n {
            values[b] = tableau[i][total];
        }
    }
    let objective = lp
        .objective
        .iter()
        .zip(&values)
        .map(|(c, v)| c * v)
        .sum::<f64>();
    Ok(LpSolution::Optimal { objective, values })
}

enum SimplexOutcome {
    Optimal,
    Unbounded,
}

fn pivot(tableau: &mut [Vec<f64>], basis: &mut [usize], row: usize, col: usize, total: usize) {
    let factor = tableau[row][col];
    for v in tableau[row].iter_mut() {
        *v /= factor;
    }
    for i in 0..tableau.len() {
        if i == row {
            continue;
        }
        let f = tableau[i][col];
        if f == 0.0 {
            continue;
        }
        // Split borrow: the pivot row is read while row `i` is updated.
        let (pivot_row, target) = if i < row {
            let (head, tail) = tableau.split_at_mut(row);
            (&tail[0], &mut head[i])
        } else {
            let (head, tail) = tableau.split_at_mut(i);
            (&head[row], &mut tail[0])
        };
        for (t, &s) in target.iter_mut().zip(pivot_row).take(total + 1) {
            *t -= f * s;
        }
    }
    basis[row] = col;
}

fn run_simplex(
    tableau: &mut [Vec<f64>],
    basis: &mut [usize],
    cost: &[f64],
    priced_cols: usize,
    iterations: &mut usize,
) -> Result<SimplexOutcome, SimplexError> {
    let total = tableau.first().map(|r| r.len() - 1).unwrap_or(0);
    loop {
        *iterations += 1;
        if *iterations > MAX_ITERATIONS {
            return Err(SimplexError::IterationLimit);
        }
        // Reduced cost d_j = c_j - c_B . B^-1 A_j; entering = lowest index
        // with d_j < -tol (Bland).
        let mut entering = None;
        for j in 0..priced_cols {
            if basis.contains(&j) {
                continue;
            }
            let mut d = cost[j];
            for (i, &b) in basis.iter().enumerate() {
                if cost[b] != 0.0 {
                    d -= cost[b] * tableau[i][j];
                }
            }
            if d < -PIVOT_TOL {
                entering = Some(j);
                break;
            }
        }
        let Some(col) = entering else {
            return Ok(SimplexOutcome::Optimal);
        };
        // Ratio test; ties resolved by lowest basis index (Bland).
        let mut leaving: Option<(usize, f64)> = None;
        for i in 0..tableau.len() {
            let a = tableau[i][col];
            if a > PIVOT_TOL {
                let ratio = tableau[i][total] / a;
                match leaving {
                    None => leaving = Some((i, ratio)),
                    Some((best_i, best_ratio)) => {
                        if ratio < best_ratio - 1e-12
                            || ((ratio - best_ratio).abs() <= 1e-12
                                && basis[i] < basis[best_i])
                        {
                            leaving = Some((i, ratio));
                        }
                    }
                }
            }
        }
        let Some((row, _)) = leaving else {
            return Ok(SimplexOutcome::Unbounded);
        };
        pivot(tableau, basis, row, col, total);
    }
}
