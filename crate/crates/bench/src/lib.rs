//! Shared fixtures for the benchmark suite.

use raysweep_core::Problem;

pub const LP_FIXTURE: &str = "\
problem lp_example
vars y1 y2
constraint y1 + y2 >= 5
constraint y1 + 3*y2 >= 8
constraint 6*y1 + y2 >= 14
constraint 7*y1 + 4*y2 <= 39
constraint y1 >= 0
constraint y2 >= 0
";

pub const NONCONVEX_FIXTURE: &str = "\
problem nonconvex
vars y1 y2
constraint 1 - y1^2 - y2^2/9 <= 0
constraint 16 - y1^4 - y2^4 <= 0
constraint 1 - y1^3/27 - y2^3 <= 0
";

pub fn lp_problem() -> Problem {
    Problem::load(LP_FIXTURE).expect("valid fixture")
}

pub fn nonconvex_problem() -> Problem {
    Problem::load(NONCONVEX_FIXTURE).expect("valid fixture")
}
