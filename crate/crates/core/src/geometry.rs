//! Affine d-planes, principal angles, local Hausdorff distances, separated
//! nets, and greedy disjoint subcoverings.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::la;

const ORTHO_TOL: f64 = 1e-12;

/// An affine d-plane in `R^n`: a base point plus an orthonormal basis of the
/// direction space.
#[derive(Debug, Clone)]
pub struct AffinePlane {
    base: DVector<f64>,
    /// `n x d`, orthonormal columns.
    basis: DMatrix<f64>,
}

impl AffinePlane {
    /// Builds a plane from an already orthonormal basis. The basis is checked
    /// to be orthonormal within `1e-12`.
    pub fn new(base_point: Vec<f64>, basis: Vec<Vec<f64>>) -> Result<Self> {
        let n = base_point.len();
        let d = basis.len();
        if d == 0 || d > n {
            return Err(Error::InvalidParameter(format!(
                "plane dimension {d} out of range for ambient dimension {n}"
            )));
        }
        for v in &basis {
            if v.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: v.len() });
            }
        }
        let m = DMatrix::from_fn(n, d, |i, j| basis[j][i]);
        let gram = m.transpose() * &m;
        for i in 0..d {
            for j in 0..d {
                let want = if i == j { 1.0 } else { 0.0 };
                if (gram[(i, j)] - want).abs() > ORTHO_TOL {
                    return Err(Error::InvalidParameter(
                        "plane basis is not orthonormal within 1e-12".into(),
                    ));
                }
            }
        }
        Ok(Self {
            base: DVector::from_vec(base_point),
            basis: m,
        })
    }

    /// Builds a plane from spanning directions, orthonormalizing them by
    /// stabilized Gram-Schmidt. Directions that are linearly dependent on the
    /// earlier ones are rejected.
    pub fn from_spanning(base_point: Vec<f64>, directions: &[Vec<f64>]) -> Result<Self> {
        let n = base_point.len();
        if directions.is_empty() || directions.len() > n {
            return Err(Error::InvalidParameter(
                "need between 1 and n spanning directions".into(),
            ));
        }
        let mut cols: Vec<DVector<f64>> = Vec::with_capacity(directions.len());
        for dir in directions {
            if dir.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: dir.len() });
            }
            let mut v = DVector::from_vec(dir.clone());
            // two Gram-Schmidt passes for stability
            for _ in 0..2 {
                for c in &cols {
                    let proj = c.dot(&v);
                    v -= c * proj;
                }
            }
            let norm = v.norm();
            if norm < 1e-12 {
                return Err(Error::InvalidParameter(
                    "spanning directions are linearly dependent".into(),
                ));
            }
            cols.push(v / norm);
        }
        let d = cols.len();
        let basis = DMatrix::from_fn(n, d, |i, j| cols[j][i]);
        Ok(Self {
            base: DVector::from_vec(base_point),
            basis,
        })
    }

    /// The d-plane spanned by the first `d` coordinate axes through `p`.
    pub fn axis_aligned(p: &[f64], d: usize) -> Result<Self> {
        let n = p.len();
        if d == 0 || d > n {
            return Err(Error::InvalidParameter(format!(
                "plane dimension {d} out of range for ambient dimension {n}"
            )));
        }
        let basis = DMatrix::from_fn(n, d, |i, j| if i == j { 1.0 } else { 0.0 });
        Ok(Self {
            base: DVector::from_vec(p.to_vec()),
            basis,
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn base_point(&self) -> Vec<f64> {
        self.base.as_slice().to_vec()
    }

    pub fn basis_vectors(&self) -> Vec<Vec<f64>> {
        (0..self.dim()).map(|j| self.basis.column(j).as_slice().to_vec()).collect()
    }

    pub(crate) fn basis_matrix(&self) -> &DMatrix<f64> {
        &self.basis
    }

    /// Orthogonal projection of `p` onto the plane.
    pub fn project(&self, p: &[f64]) -> Vec<f64> {
        let x = DVector::from_column_slice(p);
        let rel = &x - &self.base;
        let coeff = self.basis.transpose() * &rel;
        let proj = &self.base + &self.basis * coeff;
        proj.as_slice().to_vec()
    }

    /// Distance from `p` to the plane.
    pub fn distance(&self, p: &[f64]) -> f64 {
        la::dist(p, &self.project(p))
    }

    /// In-plane coordinates of the projection of `p` (relative to the base
    /// point, in the basis of the plane).
    pub fn local_coords(&self, p: &[f64]) -> Vec<f64> {
        let x = DVector::from_column_slice(p);
        let rel = &x - &self.base;
        (self.basis.transpose() * rel).as_slice().to_vec()
    }

    /// Point of the plane with the given in-plane coordinates.
    pub fn embed(&self, coords: &[f64]) -> Vec<f64> {
        let t = DVector::from_column_slice(coords);
        (&self.base + &self.basis * t).as_slice().to_vec()
    }

    /// `anchor + basis * coords` for an arbitrary anchor point.
    pub fn embed_from(&self, anchor: &[f64], coords: &[f64]) -> Vec<f64> {
        let t = DVector::from_column_slice(coords);
        let a = DVector::from_column_slice(anchor);
        (a + &self.basis * t).as_slice().to_vec()
    }

    /// Canonical form: the base point is replaced by the projection of the
    /// origin onto the plane. Two representations of the same plane become
    /// comparable.
    pub fn canonicalize(&self) -> AffinePlane {
        let origin = vec![0.0; self.ambient_dim()];
        AffinePlane {
            base: DVector::from_vec(self.project(&origin)),
            basis: self.basis.clone(),
        }
    }

    /// An orthonormal basis of the orthogonal complement of the direction
    /// space, built by Gram-Schmidt over the coordinate axes.
    pub(crate) fn complement_basis(&self) -> DMatrix<f64> {
        let n = self.ambient_dim();
        let d = self.dim();
        let mut cols: Vec<DVector<f64>> = (0..d).map(|j| self.basis.column(j).into_owned()).collect();
        let mut comp: Vec<DVector<f64>> = Vec::with_capacity(n - d);
        for i in 0..n {
            if comp.len() == n - d {
                break;
            }
            let mut v = DVector::zeros(n);
            v[i] = 1.0;
            for _ in 0..2 {
                for c in &cols {
                    let proj = c.dot(&v);
                    v -= c * proj;
                }
            }
            let norm = v.norm();
            if norm > 1e-8 {
                let u = v / norm;
                cols.push(u.clone());
                comp.push(u);
            }
        }
        debug_assert_eq!(comp.len(), n - d);
        DMatrix::from_fn(n, n - d, |i, j| comp[j][i])
    }
}

/// Angle between two d-planes: the Hausdorff distance between the unit balls
/// of the direction spaces, computed in closed form as the sine of the
/// largest principal angle.
pub fn plane_angle(l1: &AffinePlane, l2: &AffinePlane) -> Result<f64> {
    if l1.dim() != l2.dim() {
        return Err(Error::DimensionMismatch { expected: l1.dim(), got: l2.dim() });
    }
    if l1.ambient_dim() != l2.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: l1.ambient_dim(),
            got: l2.ambient_dim(),
        });
    }
    let m = l1.basis.transpose() * &l2.basis;
    let svd = m.svd(false, false);
    let sigma_min = svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
    let s = sigma_min.clamp(-1.0, 1.0);
    Ok((1.0 - s * s).max(0.0).sqrt())
}

/// Local scale-invariant Hausdorff distance between two point sets:
/// `(1/r) max( sup_{y in E∩B} dist(y,F), sup_{y in F∩B} dist(y,E) )`.
///
/// Returns 0 when both intersections are empty, and infinity when one side
/// has points in the ball but the other set is empty.
pub fn local_hausdorff(e: &[Vec<f64>], f: &[Vec<f64>], x: &[f64], r: f64) -> f64 {
    assert!(r > 0.0, "radius must be positive");
    let one_sided = |a: &[Vec<f64>], b: &[Vec<f64>]| -> f64 {
        let mut sup: f64 = 0.0;
        for p in a {
            if la::dist(p, x) >= r {
                continue;
            }
            let d = b
                .iter()
                .map(|q| la::dist(p, q))
                .fold(f64::INFINITY, f64::min);
            sup = sup.max(d);
        }
        sup
    };
    let a = one_sided(e, f);
    let b = one_sided(f, e);
    a.max(b) / r
}

/// A greedy maximal separated subset.
#[derive(Debug, Clone, PartialEq)]
pub struct NetResult {
    /// Indices of the selected points, in input order.
    pub indices: Vec<usize>,
    pub separation: f64,
}

/// Greedy (first-fit by input order) maximal `sep`-separated subset: selected
/// points are pairwise at distance >= `sep`, and every input point lies within
/// `sep` of a selected one.
pub fn separated_net(points: &[Vec<f64>], sep: f64) -> Result<NetResult> {
    if !(sep > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "separation must be positive, got {sep}"
        )));
    }
    let mut indices: Vec<usize> = Vec::new();
    for (i, p) in points.iter().enumerate() {
        if indices.iter().all(|&j| la::dist(p, &points[j]) >= sep) {
            indices.push(i);
        }
    }
    Ok(NetResult { indices, separation: sep })
}

/// Greedy disjoint subcovering: partitions a selected subset of the balls into
/// families that are pairwise disjoint within each family, such that every
/// input center is covered by some selected ball.
///
/// Returns families of indices into the input slice. The number of families is
/// whatever the greedy first-fit achieves; no dimensional constant is
/// enforced.
pub fn besicovitch_subcover(balls: &[Ball]) -> Vec<Vec<usize>> {
    let mut families: Vec<Vec<usize>> = Vec::new();
    let mut selected: Vec<usize> = Vec::new();
    let disjoint = |a: &Ball, b: &Ball| la::dist(&a.center, &b.center) >= a.radius + b.radius;
    for (i, b) in balls.iter().enumerate() {
        let covered = selected
            .iter()
            .any(|&j| balls[j].contains(&b.center) || b.center == balls[j].center);
        if covered {
            continue;
        }
        selected.push(i);
        let slot = families
            .iter()
            .position(|fam| fam.iter().all(|&j| disjoint(&balls[j], b)));
        match slot {
            Some(k) => families[k].push(i),
            None => families.push(vec![i]),
        }
    }
    families
}
