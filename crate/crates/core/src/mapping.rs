//! Sampling the image `Y = F(X)` of a decision-space feasible set under the
//! objective map, via the ray form `y = F(u * tau)` with `tau` ranging over
//! the feasible intervals, plus the affine special case `F(x) = C x + b`.

use thiserror::Error;

use crate::directions::{unit_from_angles, Angles};
use crate::expr::{extract_affine, PointBinding};
use crate::problem::Problem;
use crate::rayscan::{feasible_set, EndpointKind, Ray, ScanConfig};

#[derive(Debug, Error)]
pub enum MappingError {
    #[error("problem `{0}` declares no objectives; nothing to map")]
    NoObjectives(String),
    #[error("angle tuple has {got} angles, problem dimension {dim} needs {need}")]
    AngleDimension { got: usize, dim: usize, need: usize },
    #[error("tau-per-interval must be positive")]
    ZeroSamples,
    #[error("objective `{0}` is not affine")]
    NonAffineObjective(String),
}

/// One image sample, tagged with the generating direction and parameter.
#[derive(Debug, Clone)]
pub struct ImagePoint {
    pub angles: Angles,
    pub tau: f64,
    pub preimage: Vec<f64>,
    pub values: Vec<f64>,
}

/// Sampled image of the feasible set; ordered by (angle index, interval
/// index, tau index).
#[derive(Debug, Clone, Default)]
pub struct ImageCloud {
    pub points: Vec<ImagePoint>,
    /// Samples dropped because an objective failed to evaluate.
    pub diagnostics: Vec<String>,
    /// Directions whose feasible set was cut off at the scan window.
    pub truncated_directions: usize,
}

/// The affine map `F(x) = C x + b`; `matrix` holds one coefficient row per
/// objective.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap {
    pub matrix: Vec<Vec<f64>>,
    pub offset: Vec<f64>,
}

impl AffineMap {
    pub fn new(matrix: Vec<Vec<f64>>, offset: Vec<f64>) -> AffineMap {
        assert_eq!(matrix.len(), offset.len());
        AffineMap { matrix, offset }
    }

    /// Extract `C` and `b` from a problem whose objectives are all affine.
    pub fn from_objectives(p: &Problem) -> Result<AffineMap, MappingError> {
        if p.objectives.is_empty() {
            return Err(MappingError::NoObjectives(p.name.clone()));
        }
        let mut matrix = Vec::with_capacity(p.objectives.len());
        let mut offset = Vec::with_capacity(p.objectives.len());
        for obj in &p.objectives {
            let form = extract_affine(obj, &p.variables)
                .ok_or_else(|| MappingError::NonAffineObjective(obj.to_string()))?;
            matrix.push(form.coeffs);
            offset.push(form.constant);
        }
        Ok(AffineMap { matrix, offset })
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.matrix
            .iter()
            .zip(&self.offset)
            .map(|(row, b)| row.iter().zip(x).map(|(c, v)| c * v).sum::<f64>() + b)
            .collect()
    }
}

/// Image of a segment's endpoints under an affine map. The image of the
/// whole segment is exactly the segment between the returned points, by the
/// alpha-combination identity `F(a x + (1-a) z) = a F(x) + (1-a) F(z)`.
pub fn map_affine_segment(m: &AffineMap, x_a: &[f64], x_b: &[f64]) -> (Vec<f64>, Vec<f64>) {
    (m.apply(x_a), m.apply(x_b))
}

/// Sample the image of a decision-space problem over an angle grid:
/// `tau_per_interval` evenly spaced parameters in each feasible interval
/// (endpoints included), objectives evaluated at each preimage.
pub fn image_sample(
    p: &Problem,
    angle_grid: &[Angles],
    tau_per_interval: usize,
    cfg: &ScanConfig,
) -> Result<ImageCloud, MappingError> {
    if p.objectives.is_empty() {
        return Err(MappingError::NoObjectives(p.name.clone()));
    }
    if tau_per_interval == 0 {
        return Err(MappingError::ZeroSamples);
    }
    let mut cloud = ImageCloud::default();
    for angles in angle_grid {
        if angles.dimension() != p.dim() {
            return Err(MappingError::AngleDimension {
                got: angles.values().len(),
                dim: p.dim(),
                need: p.dim() - 1,
            });
        }
        let ray = Ray::from_origin(unit_from_angles(angles));
        let set = feasible_set(p, &ray, cfg);
        if set
            .intervals
            .last()
            .is_some_and(|iv| iv.hi_kind == EndpointKind::ScanLimit)
        {
            cloud.truncated_directions += 1;
        }
        for iv in &set.intervals {
            for k in 0..tau_per_interval {
                let tau = if tau_per_interval == 1 {
                    iv.lo
                } else {
                    iv.lo + (iv.hi - iv.lo) * k as f64 / (tau_per_interval - 1) as f64
                };
                let preimage = ray.point_at(tau);
                let binding = PointBinding::new(&p.variables, &preimage);
                let values: Result<Vec<f64>, _> =
                    p.objectives.iter().map(|f| f.eval(&binding)).collect();
                match values {
                    Ok(values) => cloud.points.push(ImagePoint {
                        angles: angles.clone(),
                        tau,
                        preimage,
                        values,
                    }),
                    Err(err) => {
                        if cloud.diagnostics.len() < 100 {
                            cloud.diagnostics.push(format!("tau = {tau}: {err}"));
                        }
                    }
                }
            }
        }
    }
    Ok(cloud)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    const EXAMPLE1: &str = "\
vars x1 x2
constraint x1 + x2 >= 1
constraint x1 >= 0
constraint x2 >= 0
minimize (-x1 + 0.5) / (x1 + x2 - 0.75)
minimize (-x2 + 0.5) / (x1 + x2 - 0.75)
";

    const TWO_RING_IDENTITY: &str = "\
vars x1 x2
constraint -(x1^2 + x2^2 - 1) * (x1^2 + x2^2 - 4) <= 0
constraint x1^2 + x2^2 - 9 <= 0
minimize x1
minimize x2
";

    #[test]
    fn example1_diagonal_entry_maps_to_origin() {
        let p = Problem::load(EXAMPLE1).unwrap();
        let grid = [Angles::single(FRAC_PI_4).unwrap()];
        let cloud = image_sample(&p, &grid, 2, &ScanConfig::default()).unwrap();
        // First sample sits at tau = 1/sqrt(2), preimage (0.5, 0.5), where
        // both numerators vanish.
        let first = &cloud.points[0];
        assert!((first.tau - 0.5f64.sqrt()).abs() <= 1e-8);
        assert!(first.values[0].abs() <= 1e-6, "{:?}", first.values);
        assert!(first.values[1].abs() <= 1e-6, "{:?}", first.values);
        assert_eq!(cloud.truncated_directions, 1);
    }

    #[test]
    fn example1_far_samples_approach_asymptote() {
        let p = Problem::load(EXAMPLE1).unwrap();
        let grid = [Angles::single(FRAC_PI_4).unwrap()];
        let cloud = image_sample(&p, &grid, 40, &ScanConfig::default()).unwrap();
        // The limit along the diagonal is (-cos/(cos+sin), ...) = (-0.5, -0.5).
        let last = cloud.points.last().unwrap();
        assert_eq!(last.tau, 10.0);
        assert!((last.values[0] + 0.5).abs() <= 0.02, "{:?}", last.values);
        assert!((last.values[1] + 0.5).abs() <= 0.02, "{:?}", last.values);
    }

    #[test]
    fn identity_objectives_echo_preimages() {
        let p = Problem::load(TWO_RING_IDENTITY).unwrap();
        let grid: Vec<Angles> = [0.2, 0.9, 1.4]
            .iter()
            .map(|&phi| Angles::single(phi).unwrap())
            .collect();
        let cloud = image_sample(&p, &grid, 7, &ScanConfig::default()).unwrap();
        assert!(!cloud.points.is_empty());
        for pt in &cloud.points {
            assert_eq!(pt.values, pt.preimage);
        }
    }

    #[test]
    fn preimages_are_feasible() {
        // Interval-endpoint samples sit on refined boundary roots, whose H
        // residual is bounded by the root tolerance times the local slope;
        // 1e-6 is the endpoint residual bound used throughout.
        let cfg = ScanConfig::default();
        for text in [EXAMPLE1, TWO_RING_IDENTITY] {
            let p = Problem::load(text).unwrap();
            let grid: Vec<Angles> = (1..15)
                .map(|i| Angles::single(0.1 * i as f64).unwrap())
                .collect();
            let cloud = image_sample(&p, &grid, 10, &cfg).unwrap();
            for pt in &cloud.points {
                assert!(
                    p.is_feasible(&pt.preimage, 1e-6),
                    "infeasible preimage {:?}",
                    pt.preimage
                );
            }
        }
    }

    #[test]
    fn example1_fractional_map_internal_consistency() {
        // (y1 + y2) * (x1 + x2 - 0.75) must equal 1 - (x1 + x2) at every
        // sample, by adding the two objective fractions.
        let p = Problem::load(EXAMPLE1).unwrap();
        let grid = crate::directions::sweep_2d(90, 0.01, 1.56).unwrap();
        let cloud = image_sample(&p, &grid, 40, &ScanConfig::default()).unwrap();
        assert!(cloud.points.len() >= 90 * 40 - 100);
        for pt in &cloud.points {
            let s = pt.preimage[0] + pt.preimage[1];
            let lhs = (pt.values[0] + pt.values[1]) * (s - 0.75);
            let rhs = 1.0 - s;
            assert!((lhs - rhs).abs() <= 1e-9, "{pt:?}");
        }
    }

    #[test]
    fn segment_endpoints_map_exactly() {
        let id = AffineMap::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![0.0, 0.0]);
        let (a, b) = map_affine_segment(&id, &[0.0, 0.0], &[1.0, 1.0]);
        assert_eq!(a, vec![0.0, 0.0]);
        assert_eq!(b, vec![1.0, 1.0]);

        let shift = AffineMap::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![1.0, 1.0]);
        let (a, b) = map_affine_segment(&shift, &[0.0, 0.0], &[2.0, 0.0]);
        assert_eq!(a, vec![1.0, 1.0]);
        assert_eq!(b, vec![3.0, 1.0]);
    }

    #[test]
    fn affine_alpha_combination_identity() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        for _ in 0..100 {
            let k = rng.gen_range(1usize..=3);
            let n = rng.gen_range(1usize..=4);
            let matrix: Vec<Vec<f64>> = (0..k)
                .map(|_| (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect())
                .collect();
            let offset: Vec<f64> = (0..k).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let m = AffineMap::new(matrix, offset);
            let xa: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let xb: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let (ya, yb) = map_affine_segment(&m, &xa, &xb);
            for _ in 0..100 {
                let alpha: f64 = rng.gen_range(0.0..=1.0);
                let mix: Vec<f64> = xa
                    .iter()
                    .zip(&xb)
                    .map(|(a, b)| alpha * a + (1.0 - alpha) * b)
                    .collect();
                let lhs = m.apply(&mix);
                for i in 0..k {
                    let rhs = alpha * ya[i] + (1.0 - alpha) * yb[i];
                    assert!((lhs[i] - rhs).abs() <= 1e-12, "alpha = {alpha}");
                }
            }
        }
    }

    #[test]
    fn from_objectives_requires_affine() {
        let p = Problem::load(EXAMPLE1).unwrap();
        assert!(matches!(
            AffineMap::from_objectives(&p),
            Err(MappingError::NonAffineObjective(_))
        ));
        let q = Problem::load(TWO_RING_IDENTITY).unwrap();
        let m = AffineMap::from_objectives(&q).unwrap();
        assert_eq!(m.matrix, vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert_eq!(m.offset, vec![0.0, 0.0]);
    }

    #[test]
    fn one_sample_per_interval_is_the_lower_endpoint() {
        let p = Problem::load(TWO_RING_IDENTITY).unwrap();
        let grid = [Angles::single(0.5).unwrap()];
        let cloud = image_sample(&p, &grid, 1, &ScanConfig::default()).unwrap();
        assert_eq!(cloud.points.len(), 2);
        assert_eq!(cloud.points[0].tau, 0.0);
        assert!((cloud.points[1].tau - 2.0).abs() <= 1e-8);
    }
}
