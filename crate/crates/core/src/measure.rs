//! Discrete measures: weighted atom clouds in `R^n` with ball queries,
//! restriction, rescaling, and density/doubling statistics.

use crate::error::{Error, Result};
use crate::la;

/// A finite positive measure given by weighted atoms in `R^n`.
///
/// Immutable after construction; every operation is a pure function returning
/// a new value, so measures can be shared freely across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    /// Atom coordinates, row-major `len * dim`.
    coords: Vec<f64>,
    weights: Vec<f64>,
    dim: usize,
}

impl DiscreteMeasure {
    /// Builds a measure from per-atom coordinate vectors.
    ///
    /// Rejects NaN coordinates, negative or non-finite weights, and dimension
    /// mismatches.
    pub fn new(points: Vec<Vec<f64>>, weights: Vec<f64>, dim: usize) -> Result<Self> {
        let mut coords = Vec::with_capacity(points.len() * dim);
        for p in &points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.len(),
                });
            }
            coords.extend_from_slice(p);
        }
        Self::from_flat(coords, weights, dim)
    }

    /// Builds a measure from flat row-major coordinates.
    pub fn from_flat(coords: Vec<f64>, weights: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("ambient_dim must be positive".into()));
        }
        if coords.len() != weights.len() * dim {
            return Err(Error::DimensionMismatch {
                expected: weights.len() * dim,
                got: coords.len(),
            });
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("non-finite coordinate".into()));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidParameter(
                "weights must be finite and nonnegative".into(),
            ));
        }
        Ok(Self { coords, weights, dim })
    }

    pub fn empty(dim: usize) -> Self {
        Self {
            coords: Vec::new(),
            weights: Vec::new(),
            dim,
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.coords.chunks_exact(self.dim).zip(self.weights.iter().copied())
    }

    /// Atom coordinates as owned vectors (convenience for geometry calls).
    pub fn points_vec(&self) -> Vec<Vec<f64>> {
        self.coords.chunks_exact(self.dim).map(|c| c.to_vec()).collect()
    }
}

/// An open ball `B(x, r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "ball radius must be positive and finite, got {radius}"
            )));
        }
        if center.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("ball center must be finite".into()));
        }
        Ok(Self { center, radius })
    }

    /// Open-ball membership; atoms exactly on the boundary are outside.
    #[inline]
    pub fn contains(&self, p: &[f64]) -> bool {
        la::dist2(p, &self.center) < self.radius * self.radius
    }

    /// Same center, `lambda` times the radius.
    pub fn scaled(&self, lambda: f64) -> Ball {
        Ball {
            center: self.center.clone(),
            radius: self.radius * lambda,
        }
    }
}

/// Density ratio and doubling statistics of one ball.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityStats {
    /// `mu(B(x,r)) / r^d`.
    pub theta: f64,
    /// `mu(B(x,2r)) / mu(B(x,r))`, `None` when the denominator vanishes.
    pub doubling_ratio: Option<f64>,
}

/// Total weight of atoms strictly inside the ball.
pub fn ball_mass(mu: &DiscreteMeasure, b: &Ball) -> f64 {
    let r2 = b.radius * b.radius;
    mu.iter()
        .filter(|(p, _)| la::dist2(p, &b.center) < r2)
        .map(|(_, w)| w)
        .sum()
}

/// Density ratio `theta = mu(B(x,r))/r^d` together with the doubling ratio
/// of the concentric double ball.
pub fn density_ratio(mu: &DiscreteMeasure, x: &[f64], r: f64, d: usize) -> Result<DensityStats> {
    if !(r > 0.0) {
        return Err(Error::InvalidParameter(format!("radius must be positive, got {r}")));
    }
    if d == 0 || d > mu.ambient_dim() {
        return Err(Error::InvalidParameter(format!(
            "dimension d={d} out of range for ambient dim {}",
            mu.ambient_dim()
        )));
    }
    let b = Ball::new(x.to_vec(), r)?;
    let m = ball_mass(mu, &b);
    let m2 = ball_mass(mu, &b.scaled(2.0));
    Ok(DensityStats {
        theta: m / r.powi(d as i32),
        doubling_ratio: if m > 0.0 { Some(m2 / m) } else { None },
    })
}

/// Sub-measure of atoms strictly inside `b`, weights unchanged.
pub fn restrict(mu: &DiscreteMeasure, b: &Ball) -> DiscreteMeasure {
    let dim = mu.ambient_dim();
    let mut coords = Vec::new();
    let mut weights = Vec::new();
    for (p, w) in mu.iter() {
        if b.contains(p) {
            coords.extend_from_slice(p);
            weights.push(w);
        }
    }
    DiscreteMeasure { coords, weights, dim }
}

/// Affine blow-up `p -> (p - x)/r` with weights divided by `mass_norm`.
pub fn rescale(mu: &DiscreteMeasure, x: &[f64], r: f64, mass_norm: f64) -> Result<DiscreteMeasure> {
    if !(r > 0.0) {
        return Err(Error::InvalidParameter(format!("rescale radius must be positive, got {r}")));
    }
    if !(mass_norm > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "mass normalization must be positive, got {mass_norm}"
        )));
    }
    let dim = mu.ambient_dim();
    if x.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: x.len() });
    }
    let mut coords = Vec::with_capacity(mu.coords.len());
    for p in mu.coords.chunks_exact(dim) {
        for (c, xc) in p.iter().zip(x) {
            coords.push((c - xc) / r);
        }
    }
    let weights = mu.weights.iter().map(|w| w / mass_norm).collect();
    Ok(DiscreteMeasure { coords, weights, dim })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atom(p: Vec<f64>, w: f64) -> DiscreteMeasure {
        let dim = p.len();
        DiscreteMeasure::new(vec![p], vec![w], dim).unwrap()
    }

    #[test]
    fn ball_mass_empty_measure() {
        let mu = DiscreteMeasure::empty(2);
        let b = Ball::new(vec![0.0, 0.0], 1.0).unwrap();
        assert_eq!(ball_mass(&mu, &b), 0.0);
    }

    #[test]
    fn ball_mass_point_inside_and_boundary() {
        let b = Ball::new(vec![0.0, 0.0], 1.0).unwrap();
        assert_eq!(ball_mass(&atom(vec![0.0, 0.0], 1.0), &b), 1.0);
        // open ball: the boundary atom does not count
        assert_eq!(ball_mass(&atom(vec![1.0, 0.0], 1.0), &b), 0.0);
    }

    #[test]
    fn ball_mass_monotone_in_radius() {
        let mut pts = Vec::new();
        let mut ws = Vec::new();
        for i in 0..50 {
            let t = i as f64 * 0.17;
            pts.push(vec![t.sin() * 2.0, t.cos() * 1.5]);
            ws.push(0.1 + (i % 7) as f64 * 0.05);
        }
        let mu = DiscreteMeasure::new(pts, ws, 2).unwrap();
        let mut last = 0.0;
        for k in 1..10 {
            let b = Ball::new(vec![0.1, -0.2], 0.3 * k as f64).unwrap();
            let m = ball_mass(&mu, &b);
            assert!(m >= last);
            last = m;
        }
    }

    #[test]
    fn density_single_atom() {
        let mu = atom(vec![0.0, 0.0], 0.7);
        let s = density_ratio(&mu, &[0.0, 0.0], 1.0, 1).unwrap();
        assert_eq!(s.theta, 0.7);
        assert_eq!(s.doubling_ratio, Some(1.0));
    }

    #[test]
    fn density_line_segment_theta_two() {
        // unit-density samples on a line: mass(B(x,r)) ~ 2r, theta ~ 2
        let n = 4000;
        let h = 4.0 / n as f64;
        let pts: Vec<Vec<f64>> = (0..n).map(|i| vec![-2.0 + (i as f64 + 0.5) * h, 0.0]).collect();
        let ws = vec![h; n];
        let mu = DiscreteMeasure::new(pts, ws, 2).unwrap();
        let s = density_ratio(&mu, &[0.0, 0.0], 0.5, 1).unwrap();
        assert!((s.theta - 2.0).abs() < 0.02, "theta = {}", s.theta);
        let ratio = s.doubling_ratio.unwrap();
        assert!((ratio - 2.0).abs() < 0.02);
        assert!(ratio >= 1.0);
    }

    #[test]
    fn density_zero_mass_flagged() {
        let mu = atom(vec![5.0, 0.0], 1.0);
        let s = density_ratio(&mu, &[0.0, 0.0], 1.0, 1).unwrap();
        assert_eq!(s.theta, 0.0);
        assert_eq!(s.doubling_ratio, None);
    }

    #[test]
    fn restrict_identity_and_empty() {
        let mu = DiscreteMeasure::new(
            vec![vec![0.0, 0.0], vec![0.5, 0.1], vec![3.0, 0.0]],
            vec![1.0, 2.0, 3.0],
            2,
        )
        .unwrap();
        let big = Ball::new(vec![0.0, 0.0], 10.0).unwrap();
        assert_eq!(restrict(&mu, &big), mu);
        let small = Ball::new(vec![-9.0, 0.0], 0.5).unwrap();
        assert!(restrict(&mu, &small).is_empty());
        let one = Ball::new(vec![3.0, 0.0], 0.5).unwrap();
        let r = restrict(&mu, &one);
        assert_eq!(r.len(), 1);
        assert_eq!(r.weight(0), 3.0);
    }

    #[test]
    fn restrict_preserves_ball_mass() {
        let mu = DiscreteMeasure::new(
            vec![vec![0.0, 0.0], vec![0.9, 0.0], vec![1.1, 0.0]],
            vec![1.0, 1.0, 1.0],
            2,
        )
        .unwrap();
        let b = Ball::new(vec![0.0, 0.0], 1.0).unwrap();
        assert_eq!(ball_mass(&restrict(&mu, &b), &b), ball_mass(&mu, &b));
    }

    #[test]
    fn rescale_identity_and_shift() {
        let mu = atom(vec![2.0, 0.0], 1.0);
        let id = rescale(&mu, &[0.0, 0.0], 1.0, 1.0).unwrap();
        assert_eq!(id, mu);
        let half = rescale(&mu, &[0.0, 0.0], 2.0, 1.0).unwrap();
        assert_eq!(half.point(0), &[1.0, 0.0]);
    }

    #[test]
    fn rescale_preserves_relative_masses() {
        let mu = DiscreteMeasure::new(
            vec![vec![0.3, 0.4], vec![1.4, -0.2], vec![-0.8, 0.9]],
            vec![0.5, 1.5, 2.5],
            2,
        )
        .unwrap();
        let x = [0.25, 0.1];
        let r = 1.7;
        let norm = 3.0;
        let re = rescale(&mu, &x, r, norm).unwrap();
        let pre = Ball::new(vec![0.25, 0.1], r).unwrap();
        let img = Ball::new(vec![0.0, 0.0], 1.0).unwrap();
        assert_eq!(ball_mass(&re, &img) * norm, ball_mass(&mu, &pre));
    }

    #[test]
    fn reject_bad_input() {
        assert!(DiscreteMeasure::new(vec![vec![0.0]], vec![-1.0], 1).is_err());
        assert!(DiscreteMeasure::new(vec![vec![f64::NAN]], vec![1.0], 1).is_err());
        assert!(DiscreteMeasure::new(vec![vec![0.0, 1.0]], vec![1.0], 1).is_err());
        assert!(Ball::new(vec![0.0], 0.0).is_err());
    }
}
