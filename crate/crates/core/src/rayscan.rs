//! The feasible parameter set `T(u) = {tau >= 0 : H(origin + u*tau) <= 0}`
//! along a ray, computed as a union of disjoint intervals. A fixed-step scan
//! locates sign changes of the aggregate constraint and bisection refines
//! each boundary crossing.

use serde::Serialize;
use thiserror::Error;

use crate::directions::UnitDirection;
use crate::problem::Problem;

#[derive(Debug, Error, PartialEq)]
pub enum RayscanError {
    #[error("no sign change on [{a}, {b}]")]
    NoSignChange { a: f64, b: f64 },
    #[error("ray dimension {ray} does not match problem dimension {problem}")]
    DimensionMismatch { ray: usize, problem: usize },
    #[error("invalid bracket [{a}, {b}]")]
    InvalidBracket { a: f64, b: f64 },
}

/// `x = origin + direction * tau`, `tau >= 0`.
#[derive(Debug, Clone)]
pub struct Ray {
    pub origin: Vec<f64>,
    pub direction: UnitDirection,
}

impl Ray {
    pub fn new(origin: Vec<f64>, direction: UnitDirection) -> Ray {
        assert_eq!(origin.len(), direction.dim());
        Ray { origin, direction }
    }

    /// Ray from the coordinate origin.
    pub fn from_origin(direction: UnitDirection) -> Ray {
        let origin = vec![0.0; direction.dim()];
        Ray { origin, direction }
    }

    pub fn point_at(&self, tau: f64) -> Vec<f64> {
        self.origin
            .iter()
            .zip(self.direction.components())
            .map(|(o, u)| o + u * tau)
            .collect()
    }
}

/// Whether an interval endpoint is a refined boundary crossing or a
/// truncation of the scan window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EndpointKind {
    RefinedRoot,
    ScanLimit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_kind: EndpointKind,
    pub hi_kind: EndpointKind,
}

/// The set `T(u)` as an ordered list of disjoint intervals.
#[derive(Debug, Clone, Default)]
pub struct FeasibleIntervals {
    pub intervals: Vec<Interval>,
    /// Grid nodes where the constraints failed to evaluate (treated as
    /// infeasible).
    pub diagnostics: Vec<String>,
}

impl FeasibleIntervals {
    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn first(&self) -> Option<&Interval> {
        self.intervals.first()
    }
}

/// Scan window and tolerances. Defaults mirror a 0.01-step scan of
/// `tau` in `[0, 10]`, with bisection added for stated accuracy.
#[derive(Debug, Clone, Copy)]
pub struct ScanConfig {
    pub t_max: f64,
    pub step: f64,
    pub tol_root: f64,
    pub tol_feas: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig { t_max: 10.0, step: 0.01, tol_root: 1e-9, tol_feas: 1e-9 }
    }
}

/// A refined boundary crossing: the bracket midpoint and `|g|` there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub tau: f64,
    pub residual: f64,
}

/// Bisect a sign-change bracket down to width `tol_root`.
pub fn refine_root(
    g: impl Fn(f64) -> f64,
    bracket: (f64, f64),
    tol_root: f64,
) -> Result<Root, RayscanError> {
    let (mut a, mut b) = bracket;
    if a >= b || a.is_nan() || b.is_nan() {
        return Err(RayscanError::InvalidBracket { a, b });
    }
    let mut fa = g(a);
    let fb = g(b);
    let pos = |v: f64| v > 0.0;
    if pos(fa) == pos(fb) && fa != 0.0 && fb != 0.0 {
        return Err(RayscanError::NoSignChange { a, b });
    }
    while b - a > tol_root {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break; // bracket at floating-point resolution
        }
        let fm = g(mid);
        if pos(fm) == pos(fa) && fa != 0.0 {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    let tau = 0.5 * (a + b);
    Ok(Root { tau, residual: g(tau).abs() })
}

/// Compute `T(u)` for a problem along a ray. Feature components narrower
/// than `cfg.step` can be missed; halving the step only ever adds detail.
pub fn feasible_set(p: &Problem, ray: &Ray, cfg: &ScanConfig) -> FeasibleIntervals {
    assert_eq!(
        ray.direction.dim(),
        p.dim(),
        "ray dimension must match problem dimension"
    );
    let mut diagnostics = Vec::new();

    // H along the ray; evaluation failures count as infeasible.
    let g_quiet =
        |tau: f64| -> f64 { p.aggregate_h(&ray.point_at(tau)).unwrap_or(f64::INFINITY) };

    // Coarse grid, with t_max always included as the final node.
    let mut taus: Vec<f64> = Vec::new();
    let mut k = 0u64;
    loop {
        let tau = k as f64 * cfg.step;
        if tau >= cfg.t_max {
            break;
        }
        taus.push(tau);
        k += 1;
    }
    taus.push(cfg.t_max);

    let mut values = Vec::with_capacity(taus.len());
    for &tau in &taus {
        match p.aggregate_h(&ray.point_at(tau)) {
            Ok(h) => values.push(h),
            Err(err) => {
                if diagnostics.len() < 100 {
                    diagnostics.push(format!("tau = {tau}: {err}"));
                }
                values.push(f64::INFINITY);
            }
        }
    }

    let mut intervals = Vec::new();
    let mut open: Option<(f64, EndpointKind)> = None;
    for i in 0..taus.len() {
        let feasible = values[i] <= 0.0;
        if feasible && open.is_none() {
            if i == 0 {
                open = Some((0.0, EndpointKind::ScanLimit));
            } else {
                let root = refine_root(g_quiet, (taus[i - 1], taus[i]), cfg.tol_root)
                    .expect("grid guarantees a sign change");
                open = Some((root.tau, EndpointKind::RefinedRoot));
            }
        } else if !feasible && open.is_some() {
            let (lo, lo_kind) = open.take().unwrap();
            let root = refine_root(g_quiet, (taus[i - 1], taus[i]), cfg.tol_root)
                .expect("grid guarantees a sign change");
            intervals.push(Interval {
                lo,
                hi: root.tau.max(lo),
                lo_kind,
                hi_kind: EndpointKind::RefinedRoot,
            });
        }
    }
    if let Some((lo, lo_kind)) = open {
        intervals.push(Interval {
            lo,
            hi: cfg.t_max,
            lo_kind,
            hi_kind: EndpointKind::ScanLimit,
        });
    }

    FeasibleIntervals { intervals, diagnostics }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::directions::UnitDirection;
    use crate::problem::Problem;
    use std::f64::consts::FRAC_PI_4;

    const EXAMPLE1: &str = "\
vars x1 x2
constraint x1 + x2 >= 1
constraint x1 >= 0
constraint x2 >= 0
";

    const NONCONVEX: &str = "\
vars y1 y2
constraint 1 - y1^2 - y2^2/9 <= 0
constraint 16 - y1^4 - y2^4 <= 0
constraint 1 - y1^3/27 - y2^3 <= 0
";

    // Radial constraints: feasible radii are [0, 1] and [2, 3].
    const TWO_RING: &str = "\
vars x1 x2
constraint -(x1^2 + x2^2 - 1) * (x1^2 + x2^2 - 4) <= 0
constraint x1^2 + x2^2 - 9 <= 0
";

    #[test]
    fn refine_root_linear() {
        let root = refine_root(|t| t - 2.0, (0.0, 10.0), 1e-9).unwrap();
        assert!((root.tau - 2.0).abs() <= 1e-9);
    }

    #[test]
    fn refine_root_sqrt2() {
        let root = refine_root(|t| t * t - 2.0, (1.0, 2.0), 1e-9).unwrap();
        assert!((root.tau - 2.0f64.sqrt()).abs() <= 1e-9);
        assert!(root.residual < 1e-8);
    }

    #[test]
    fn refine_root_requires_sign_change() {
        assert!(matches!(
            refine_root(|t| t * t + 1.0, (0.0, 1.0), 1e-9),
            Err(RayscanError::NoSignChange { .. })
        ));
    }

    #[test]
    fn example1_interval_law() {
        let p = Problem::load(EXAMPLE1).unwrap();
        let cfg = ScanConfig::default();
        for phi in [0.2, FRAC_PI_4, 1.2] {
            let ray = Ray::from_origin(UnitDirection::plane(phi));
            let out = feasible_set(&p, &ray, &cfg);
            assert_eq!(out.intervals.len(), 1, "phi = {phi}");
            let iv = &out.intervals[0];
            let expected = 1.0 / (phi.cos() + phi.sin());
            assert!((iv.lo - expected).abs() <= 1e-9, "phi = {phi}: {} vs {expected}", iv.lo);
            assert_eq!(iv.lo_kind, EndpointKind::RefinedRoot);
            assert_eq!(iv.hi, cfg.t_max);
            assert_eq!(iv.hi_kind, EndpointKind::ScanLimit);
        }
    }

    #[test]
    fn two_ring_intervals() {
        let p = Problem::load(TWO_RING).unwrap();
        let cfg = ScanConfig::default();
        for phi in [0.0, 0.7, 1.4] {
            let ray = Ray::from_origin(UnitDirection::plane(phi));
            let out = feasible_set(&p, &ray, &cfg);
            assert_eq!(out.intervals.len(), 2, "phi = {phi}");
            let a = &out.intervals[0];
            let b = &out.intervals[1];
            assert_eq!(a.lo, 0.0);
            assert_eq!(a.lo_kind, EndpointKind::ScanLimit);
            assert!((a.hi - 1.0).abs() <= 1e-8);
            assert!((b.lo - 2.0).abs() <= 1e-8);
            assert!((b.hi - 3.0).abs() <= 1e-8);
            assert_eq!(b.hi_kind, EndpointKind::RefinedRoot);
        }
    }

    #[test]
    fn nonconvex_diagonal_entry() {
        let p = Problem::load(NONCONVEX).unwrap();
        let cfg = ScanConfig::default();
        let ray = Ray::from_origin(UnitDirection::plane(FRAC_PI_4));
        let out = feasible_set(&p, &ray, &cfg);
        // On the diagonal the quartic constraint binds: 2 s^4 = 16 at
        // s = 2^(3/4), i.e. tau = 2^(3/4) * sqrt(2).
        let expected = 2.0f64.powf(0.75) * 2.0f64.sqrt();
        let lo = out.first().unwrap().lo;
        assert!((lo - expected).abs() <= 1e-6, "{lo} vs {expected}");
    }

    #[test]
    fn midpoints_feasible_endpoints_near_boundary() {
        let cfg = ScanConfig::default();
        for text in [EXAMPLE1, NONCONVEX, TWO_RING] {
            let p = Problem::load(text).unwrap();
            for phi in [0.1, 0.5, 0.9, 1.3] {
                let ray = Ray::from_origin(UnitDirection::plane(phi));
                let out = feasible_set(&p, &ray, &cfg);
                for iv in &out.intervals {
                    let mid = 0.5 * (iv.lo + iv.hi);
                    let h_mid = p.aggregate_h(&ray.point_at(mid)).unwrap();
                    assert!(h_mid <= cfg.tol_feas, "midpoint H = {h_mid}");
                    for (tau, kind) in [(iv.lo, iv.lo_kind), (iv.hi, iv.hi_kind)] {
                        if kind == EndpointKind::RefinedRoot {
                            let h = p.aggregate_h(&ray.point_at(tau)).unwrap();
                            assert!(h.abs() <= 1e-6, "endpoint H = {h}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn dense_scan_oracle_agrees() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let cfg = ScanConfig::default();
        let dense_step = cfg.step / 100.0;
        for text in [NONCONVEX, TWO_RING] {
            let p = Problem::load(text).unwrap();
            for _ in 0..50 {
                let phi = rng.gen_range(0.01..1.56);
                let ray = Ray::from_origin(UnitDirection::plane(phi));
                let out = feasible_set(&p, &ray, &cfg);
                let mut tau = 0.0;
                while tau <= cfg.t_max {
                    let feas = p.aggregate_h(&ray.point_at(tau)).unwrap() <= 0.0;
                    let near_endpoint = out.intervals.iter().any(|iv| {
                        (tau - iv.lo).abs() <= cfg.step || (tau - iv.hi).abs() <= cfg.step
                    });
                    if !near_endpoint {
                        let inside = out
                            .intervals
                            .iter()
                            .any(|iv| tau >= iv.lo && tau <= iv.hi);
                        assert_eq!(feas, inside, "phi = {phi}, tau = {tau}");
                    }
                    tau += dense_step;
                }
            }
        }
    }

    #[test]
    fn halving_step_keeps_wide_intervals() {
        let p = Problem::load(TWO_RING).unwrap();
        let coarse = ScanConfig { step: 0.02, ..ScanConfig::default() };
        let fine = ScanConfig { step: 0.01, ..ScanConfig::default() };
        let ray = Ray::from_origin(UnitDirection::plane(0.3));
        let with_coarse = feasible_set(&p, &ray, &coarse);
        let with_fine = feasible_set(&p, &ray, &fine);
        // Every coarse interval wider than 2*step survives refinement.
        for iv in &with_coarse.intervals {
            if iv.hi - iv.lo > 2.0 * coarse.step {
                let mid = 0.5 * (iv.lo + iv.hi);
                assert!(with_fine
                    .intervals
                    .iter()
                    .any(|f| f.lo <= mid && mid <= f.hi));
            }
        }
        assert!(with_fine.intervals.len() >= with_coarse.intervals.len());
    }

    #[test]
    fn eval_failures_recorded_and_infeasible() {
        let text = "\
vars x1 x2
constraint 1/x1 <= 1
constraint x1 - 3 <= 0
";
        // Along the x1 axis the first constraint fails to evaluate at the
        // origin and holds only for x1 >= 1.
        let p = Problem::load(text).unwrap();
        let ray = Ray::from_origin(UnitDirection::plane(0.0));
        let cfg = ScanConfig { t_max: 3.0, ..ScanConfig::default() };
        let out = feasible_set(&p, &ray, &cfg);
        assert!(!out.diagnostics.is_empty());
        assert_eq!(out.intervals.len(), 1);
        assert!(out.intervals[0].lo > 1.0 - 1e-6);
    }
}
