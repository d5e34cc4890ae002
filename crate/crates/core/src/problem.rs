//! Validated optimization problems: variables, constraints normalized to
//! `h <= 0`, optional objectives, and the aggregate constraint
//! `H(x) = max_i h_i(x)` whose sign decides feasibility.

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::expr::{extract_affine, EvalError, Expr, PointBinding};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
}

/// A single constraint `lhs REL rhs`, stored together with its normalized
/// form `h` such that the constraint holds iff `h <= 0`.
#[derive(Debug, Clone)]
pub struct Constraint {
    pub lhs: Expr,
    pub relation: Relation,
    pub rhs: Expr,
    pub normalized: Expr,
}

impl Constraint {
    pub fn new(lhs: Expr, relation: Relation, rhs: Expr) -> Self {
        let normalized = match relation {
            Relation::Le => Expr::Sub(Box::new(lhs.clone()), Box::new(rhs.clone())),
            Relation::Ge => Expr::Sub(Box::new(rhs.clone()), Box::new(lhs.clone())),
        };
        Constraint { lhs, relation, rhs, normalized }
    }

    /// The same constraint written with sides swapped and the relation
    /// flipped; its normalized expression is identical.
    pub fn swapped(&self) -> Constraint {
        let relation = match self.relation {
            Relation::Le => Relation::Ge,
            Relation::Ge => Relation::Le,
        };
        Constraint::new(self.rhs.clone(), relation, self.lhs.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    /// Variables are the objective-space coordinates; constraints carve Y.
    ObjectiveSpace,
    /// Objectives present; constraints carve the decision-space set X.
    DecisionSpace,
}

/// Result of a membership query; evaluation failures count as non-members
/// with a diagnostic so ray scans stay total.
#[derive(Debug, Clone, PartialEq)]
pub enum Membership {
    Member,
    NonMember,
    EvalFailed(String),
}

#[derive(Debug, Clone, Serialize)]
pub struct LoadIssue {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Error)]
pub struct LoadError {
    pub issues: Vec<LoadIssue>,
}

impl std::fmt::Display for LoadError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (i, issue) in self.issues.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "line {}: {}", issue.line, issue.message)?;
        }
        Ok(())
    }
}

/// A validated problem. Immutable after load; all queries are pure.
#[derive(Debug, Clone)]
pub struct Problem {
    pub name: String,
    pub variables: Vec<String>,
    pub constraints: Vec<Constraint>,
    pub objectives: Vec<Expr>,
    /// True iff every normalized constraint is affine in the variables.
    pub linear: bool,
}

impl Problem {
    /// Build and validate a problem from already-parsed parts.
    pub fn new(
        name: impl Into<String>,
        variables: Vec<String>,
        constraints: Vec<Constraint>,
        objectives: Vec<Expr>,
    ) -> Result<Problem, LoadError> {
        let mut issues = Vec::new();
        validate(&variables, &constraints, &objectives, &mut issues, |_| 0);
        if !issues.is_empty() {
            return Err(LoadError { issues });
        }
        let linear = constraints
            .iter()
            .all(|c| extract_affine(&c.normalized, &variables).is_some());
        Ok(Problem { name: name.into(), variables, constraints, objectives, linear })
    }

    /// Parse the line-oriented problem-file format. All validation issues
    /// are aggregated and reported together.
    pub fn load(text: &str) -> Result<Problem, LoadError> {
        let mut issues = Vec::new();
        let mut name = String::from("unnamed");
        let mut variables: Vec<String> = Vec::new();
        let mut constraints: Vec<(usize, Constraint)> = Vec::new();
        let mut objectives: Vec<(usize, Expr)> = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            };
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (keyword, rest) = match line.split_once(char::is_whitespace) {
                Some((k, r)) => (k, r.trim()),
                None => (line, ""),
            };
            match keyword {
                "problem" => {
                    if rest.is_empty() || rest.split_whitespace().count() != 1 {
                        issues.push(LoadIssue {
                            line: lineno,
                            message: "`problem` takes exactly one name".to_string(),
                        });
                    } else {
                        name = rest.to_string();
                    }
                }
                "vars" => {
                    for ident in rest.split_whitespace() {
                        if !is_ident(ident) {
                            issues.push(LoadIssue {
                                line: lineno,
                                message: format!("invalid variable name `{ident}`"),
                            });
                        } else if variables.iter().any(|v| v == ident) {
                            issues.push(LoadIssue {
                                line: lineno,
                                message: format!("duplicate variable `{ident}`"),
                            });
                        } else {
                            variables.push(ident.to_string());
                        }
                    }
                    if variables.is_empty() {
                        issues.push(LoadIssue {
                            line: lineno,
                            message: "`vars` declares no variables".to_string(),
                        });
                    }
                }
                "constraint" => {
                    let rel_pos = find_relation(rest);
                    match rel_pos {
                        None => issues.push(LoadIssue {
                            line: lineno,
                            message: "constraint needs `<=` or `>=`".to_string(),
                        }),
                        Some((pos, relation)) => {
                            let lhs_text = &rest[..pos];
                            let rhs_text = &rest[pos + 2..];
                            let lhs = Expr::parse(lhs_text);
                            let rhs = Expr::parse(rhs_text);
                            match (lhs, rhs) {
                                (Ok(lhs), Ok(rhs)) => {
                                    constraints.push((lineno, Constraint::new(lhs, relation, rhs)));
                                }
                                (lhs, rhs) => {
                                    for side in [lhs, rhs] {
                                        if let Err(err) = side {
                                            issues.push(LoadIssue {
                                                line: lineno,
                                                message: err.to_string(),
                                            });
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
                "minimize" => match Expr::parse(rest) {
                    Ok(e) => objectives.push((lineno, e)),
                    Err(err) => issues.push(LoadIssue { line: lineno, message: err.to_string() }),
                },
                other => issues.push(LoadIssue {
                    line: lineno,
                    message: format!("unknown directive `{other}`"),
                }),
            }
        }

        let line_of = |expr_index: usize| -> usize {
            // expr_index counts constraints first, then objectives.
            if expr_index < constraints.len() {
                constraints[expr_index].0
            } else {
                objectives[expr_index - constraints.len()].0
            }
        };
        let plain_constraints: Vec<Constraint> =
            constraints.iter().map(|(_, c)| c.clone()).collect();
        let plain_objectives: Vec<Expr> = objectives.iter().map(|(_, e)| e.clone()).collect();
        validate(&variables, &plain_constraints, &plain_objectives, &mut issues, line_of);

        if !issues.is_empty() {
            issues.sort_by_key(|i| i.line);
            return Err(LoadError { issues });
        }
        let linear = plain_constraints
            .iter()
            .all(|c| extract_affine(&c.normalized, &variables).is_some());
        Ok(Problem {
            name,
            variables,
            constraints: plain_constraints,
            objectives: plain_objectives,
            linear,
        })
    }

    pub fn dim(&self) -> usize {
        self.variables.len()
    }

    pub fn kind(&self) -> ProblemKind {
        if self.objectives.is_empty() {
            ProblemKind::ObjectiveSpace
        } else {
            ProblemKind::DecisionSpace
        }
    }

    /// `H(point) = max_i h_i(point)` over the normalized constraints.
    /// `H <= 0` iff the point is feasible.
    pub fn aggregate_h(&self, point: &[f64]) -> Result<f64, EvalError> {
        debug_assert_eq!(point.len(), self.variables.len());
        let binding = PointBinding::new(&self.variables, point);
        let mut h = f64::NEG_INFINITY;
        for c in &self.constraints {
            h = h.max(c.normalized.eval(&binding)?);
        }
        Ok(h)
    }

    /// Set-membership indicator with the closed convention `H <= 0`.
    pub fn indicator(&self, point: &[f64]) -> bool {
        matches!(self.membership(point), Membership::Member)
    }

    pub fn membership(&self, point: &[f64]) -> Membership {
        match self.aggregate_h(point) {
            Ok(h) if h <= 0.0 => Membership::Member,
            Ok(_) => Membership::NonMember,
            Err(err) => Membership::EvalFailed(err.to_string()),
        }
    }

    /// Feasibility with slack: `H(point) <= tol`.
    pub fn is_feasible(&self, point: &[f64], tol: f64) -> bool {
        matches!(self.aggregate_h(point), Ok(h) if h <= tol)
    }

    /// Affine forms of all normalized constraints, when the problem is linear.
    pub fn affine_constraints(&self) -> Option<Vec<crate::expr::AffineForm>> {
        self.constraints
            .iter()
            .map(|c| extract_affine(&c.normalized, &self.variables))
            .collect()
    }

    /// The problem with every variable `v` replaced by `v + offset`. The
    /// aggregate `H` of the result at `y` equals the original `H` at
    /// `y + offsets` exactly.
    pub fn shifted(&self, offsets: &[f64]) -> Problem {
        assert_eq!(offsets.len(), self.variables.len());
        let map: HashMap<String, f64> = self
            .variables
            .iter()
            .cloned()
            .zip(offsets.iter().copied())
            .collect();
        let constraints = self
            .constraints
            .iter()
            .map(|c| {
                Constraint::new(
                    c.lhs.shift_vars(&map),
                    c.relation,
                    c.rhs.shift_vars(&map),
                )
            })
            .collect::<Vec<_>>();
        let objectives = self
            .objectives
            .iter()
            .map(|e| e.shift_vars(&map))
            .collect::<Vec<_>>();
        let linear = constraints
            .iter()
            .all(|c| extract_affine(&c.normalized, &self.variables).is_some());
        Problem {
            name: self.name.clone(),
            variables: self.variables.clone(),
            constraints,
            objectives,
            linear,
        }
    }
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Earliest `<=` or `>=` in the text.
fn find_relation(text: &str) -> Option<(usize, Relation)> {
    let le = text.find("<=");
    let ge = text.find(">=");
    match (le, ge) {
        (Some(a), Some(b)) if a < b => Some((a, Relation::Le)),
        (Some(_), Some(b)) => Some((b, Relation::Ge)),
        (Some(a), None) => Some((a, Relation::Le)),
        (None, Some(b)) => Some((b, Relation::Ge)),
        (None, None) => None,
    }
}

fn validate(
    variables: &[String],
    constraints: &[Constraint],
    objectives: &[Expr],
    issues: &mut Vec<LoadIssue>,
    line_of: impl Fn(usize) -> usize,
) {
    if constraints.is_empty() {
        issues.push(LoadIssue { line: 0, message: "problem has no constraints".to_string() });
    }
    if objectives.len() == 1 {
        issues.push(LoadIssue {
            line: line_of(constraints.len()),
            message: "a single objective is not a vector optimization problem; declare 0 or >= 2"
                .to_string(),
        });
    }
    let exprs = constraints
        .iter()
        .map(|c| &c.normalized)
        .chain(objectives.iter());
    for (i, expr) in exprs.enumerate() {
        for var in expr.variables() {
            if !variables.contains(&var) {
                issues.push(LoadIssue {
                    line: line_of(i),
                    message: format!("undeclared variable `{var}`"),
                });
            }
        }
    }
}
