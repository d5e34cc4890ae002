//! Unit directions from spherical angle tuples, and the 2-D angle sweep.
//!
//! An `n`-dimensional direction is parametrized by `n - 1` angles:
//! `u_i = (prod_{j<i} sin phi_j) * cos phi_i` for `i < n`, and
//! `u_n = prod_{j<=n-1} sin phi_j`.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DirectionError {
    #[error("angle {index} = {value} outside [{lo}, {hi}]")]
    AngleOutOfRange { index: usize, value: f64, lo: f64, hi: f64 },
    #[error("sweep bounds must satisfy 0 <= lo < hi <= pi/2, got [{lo}, {hi}]")]
    BadSweepBounds { lo: f64, hi: f64 },
    #[error("sweep needs at least 2 angles, got {0}")]
    TooFewAngles(usize),
    #[error("cannot normalize a zero vector")]
    ZeroVector,
}

/// Angle tuple for one direction: the first angle lies in `[0, pi]`, the
/// rest in `[0, 2*pi]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Angles {
    values: Vec<f64>,
}

impl Angles {
    pub fn new(values: Vec<f64>) -> Result<Angles, DirectionError> {
        for (index, &value) in values.iter().enumerate() {
            let hi = if index == 0 { PI } else { 2.0 * PI };
            if !(0.0..=hi).contains(&value) {
                return Err(DirectionError::AngleOutOfRange { index, value, lo: 0.0, hi });
            }
        }
        Ok(Angles { values })
    }

    /// Single angle for the 2-D sweep.
    pub fn single(phi: f64) -> Result<Angles, DirectionError> {
        Angles::new(vec![phi])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dimension(&self) -> usize {
        self.values.len() + 1
    }
}

/// A direction vector of Euclidean norm 1.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitDirection {
    components: Vec<f64>,
}

impl UnitDirection {
    /// Normalize an arbitrary nonzero vector.
    pub fn from_vector(v: Vec<f64>) -> Result<UnitDirection, DirectionError> {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(DirectionError::ZeroVector);
        }
        Ok(UnitDirection { components: v.into_iter().map(|x| x / norm).collect() })
    }

    /// The planar direction `(cos phi, sin phi)`.
    pub fn plane(phi: f64) -> UnitDirection {
        UnitDirection { components: vec![phi.cos(), phi.sin()] }
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }
}

/// Direction from an angle tuple. An empty tuple (dimension 1) yields `+1`
/// by convention.
pub fn unit_from_angles(angles: &Angles) -> UnitDirection {
    let n = angles.dimension();
    let mut components = vec![0.0; n];
    let mut sin_prod = 1.0;
    for (i, &phi) in angles.values().iter().enumerate() {
        components[i] = sin_prod * phi.cos();
        sin_prod *= phi.sin();
    }
    components[n - 1] = sin_prod;
    UnitDirection { components }
}

/// `count` evenly spaced angles on `[lo, hi]` inclusive, strictly increasing.
pub fn sweep_2d(count: usize, lo: f64, hi: f64) -> Result<Vec<Angles>, DirectionError> {
    if !(0.0 <= lo && lo < hi && hi <= FRAC_PI_2) {
        return Err(DirectionError::BadSweepBounds { lo, hi });
    }
    if count < 2 {
        return Err(DirectionError::TooFewAngles(count));
    }
    let step = (hi - lo) / (count - 1) as f64;
    (0..count)
        .map(|i| {
            let phi = if i + 1 == count { hi } else { lo + i as f64 * step };
            Angles::single(phi)
        })
        .collect()
}
