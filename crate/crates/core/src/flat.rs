//! The localized bounded-Lipschitz distance `F_B` and the 1-Wasserstein
//! distance for discrete measures.
//!
//! `F_B(sigma, nu)` is the supremum of `|∫φ dσ − ∫φ dν|` over 1-Lipschitz
//! functions supported in the open ball `B`. For discrete data this is a
//! linear program over atom potentials `v_i` with pairwise constraints
//! `|v_i − v_j| <= |p_i − p_j|` and support caps `|v_i| <= r_B − |p_i − x_B|`.
//! Its dual is an unbalanced transport problem: mass moves from the positive
//! to the negative part, or is created/destroyed at the ball boundary at the
//! cap price. Since both the distance and the cap are metric-compatible,
//! relaying never pays, so the dual collapses to one balanced transportation
//! instance with a boundary row and column — which is what we solve.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::AffinePlane;
use crate::la;
use crate::measure::{restrict, Ball, DiscreteMeasure};
use crate::transport;

/// Above this union support size, atoms are aggregated onto a grid before the
/// solve (the pairwise constraint count grows quadratically).
pub const SUPPORT_CAP: usize = 2000;

/// Aggregation grid cell size, as a fraction of the ball radius.
pub const AGGREGATION_CELLS: f64 = 64.0;

/// A flat measure `c * H^d|_L` discretized on the slice `L ∩ B` by a regular
/// grid quadrature.
#[derive(Debug, Clone)]
pub struct FlatMeasure {
    pub density: f64,
    pub plane: AffinePlane,
    pub quadrature: DiscreteMeasure,
}

impl FlatMeasure {
    /// Regular grid quadrature of `c * H^d|_{L ∩ B}` with spacing
    /// `r_B / quad`, anchored at the projection of the ball center onto the
    /// plane. Atoms outside the open ball are dropped; each atom carries
    /// weight `spacing^d * c`.
    pub fn quadrature_in_ball(c: f64, plane: &AffinePlane, b: &Ball, quad: u32) -> Result<Self> {
        if c < 0.0 {
            return Err(Error::InvalidParameter(format!("flat density must be >= 0, got {c}")));
        }
        if quad == 0 {
            return Err(Error::InvalidParameter("quadrature order must be positive".into()));
        }
        let n = plane.ambient_dim();
        if b.center.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: b.center.len() });
        }
        let d = plane.dim();
        let q0 = plane.project(&b.center);
        let h2 = la::dist2(&q0, &b.center);
        let r2 = b.radius * b.radius;
        let spacing = b.radius / quad as f64;
        let mut coords = Vec::new();
        let mut count = 0usize;
        if h2 < r2 {
            let rho2 = r2 - h2;
            let reach = (rho2.sqrt() / spacing).floor() as i64;
            let mut idx = vec![-reach; d];
            'odometer: loop {
                let t2: f64 = idx.iter().map(|&k| {
                    let t = k as f64 * spacing;
                    t * t
                }).sum();
                if t2 < rho2 {
                    let local: Vec<f64> = idx.iter().map(|&k| k as f64 * spacing).collect();
                    coords.extend_from_slice(&plane.embed_from(&q0, &local));
                    count += 1;
                }
                for k in 0..d {
                    idx[k] += 1;
                    if idx[k] <= reach {
                        continue 'odometer;
                    }
                    idx[k] = -reach;
                }
                break;
            }
        }
        let w = spacing.powi(d as i32) * c;
        let quadrature = DiscreteMeasure::from_flat(coords, vec![w; count], n)?;
        Ok(Self { density: c, plane: plane.clone(), quadrature })
    }
}

/// Status of a bounded-Lipschitz solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlStatus {
    Optimal,
    /// The union support exceeded [`SUPPORT_CAP`] and was grid-aggregated.
    CappedSupport,
    /// Neither measure has atoms in the ball.
    Degenerate,
}

/// One atom of the reported dual witness.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WitnessAtom {
    pub position: Vec<f64>,
    /// Atom weight, positive for `sigma`, negative for `nu`.
    pub signed_weight: f64,
    /// Value of the optimal potential at this atom.
    pub potential: f64,
}

/// Result of a bounded-Lipschitz distance computation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlResult {
    pub value: f64,
    /// Optimal potential, one entry per (possibly aggregated) support atom.
    /// It satisfies every pairwise and cap constraint, and its objective
    /// equals `value`.
    pub witness: Vec<WitnessAtom>,
    pub status: BlStatus,
    /// Upper bound on the error introduced by support aggregation, when it
    /// happened: moved mass times maximal displacement.
    pub aggregation_bound: Option<f64>,
}

/// Atoms of one side of a solve, restricted to the ball, with their support
/// caps `r_B − |p − x_B|`.
#[derive(Debug, Clone)]
pub(crate) struct CappedAtoms {
    pub coords: Vec<f64>,
    pub weights: Vec<f64>,
    pub caps: Vec<f64>,
    pub dim: usize,
}

impl CappedAtoms {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub(crate) fn from_parts(coords: Vec<f64>, weights: Vec<f64>, dim: usize, b: &Ball) -> Self {
        let caps = coords
            .chunks_exact(dim)
            .map(|p| b.radius - la::dist(p, &b.center))
            .collect();
        Self { coords, weights, caps, dim }
    }
}

/// Restriction of `mu` to the open ball as capped atoms.
pub(crate) fn prepare_atoms(mu: &DiscreteMeasure, b: &Ball) -> CappedAtoms {
    let r = restrict(mu, b);
    CappedAtoms::from_parts(r.coords().to_vec(), r.weights().to_vec(), r.ambient_dim(), b)
}

/// Grid aggregation: cells of size `b.radius / AGGREGATION_CELLS` anchored at
/// the ball center, atoms replaced by per-cell mass-weighted centroids.
pub(crate) fn aggregate_atoms(atoms: &CappedAtoms, b: &Ball) -> CappedAtoms {
    let cell = b.radius / AGGREGATION_CELLS;
    let dim = atoms.dim;
    let mut cells: BTreeMap<Vec<i64>, (f64, Vec<f64>)> = BTreeMap::new();
    for i in 0..atoms.len() {
        let p = atoms.point(i);
        let w = atoms.weights[i];
        if w == 0.0 {
            continue;
        }
        let key: Vec<i64> = p
            .iter()
            .zip(&b.center)
            .map(|(c, x)| ((c - x) / cell).round() as i64)
            .collect();
        let entry = cells.entry(key).or_insert_with(|| (0.0, vec![0.0; dim]));
        entry.0 += w;
        for (acc, c) in entry.1.iter_mut().zip(p) {
            *acc += w * c;
        }
    }
    let mut coords = Vec::with_capacity(cells.len() * dim);
    let mut weights = Vec::with_capacity(cells.len());
    for (_, (w, wp)) in cells {
        if w <= 0.0 {
            continue;
        }
        coords.extend(wp.iter().map(|s| s / w));
        weights.push(w);
    }
    CappedAtoms::from_parts(coords, weights, dim, b)
}

/// A prepared source/sink pair with the cost matrix cached, so that repeated
/// solves with rescaled sink masses (the inner `c` search of the alpha
/// number) only pay for the transportation pivots.
pub(crate) struct BlPair<'a> {
    sources: &'a CappedAtoms,
    sinks: &'a CappedAtoms,
    /// (m+1) x (n+1) with the boundary row/column at the end.
    cost: Vec<f64>,
    m: usize,
    n: usize,
}

pub(crate) struct BlSolve {
    pub value: f64,
    /// d(value)/d(sink scale); a supporting-line slope for the convex
    /// envelope search over the flat density.
    pub slope: f64,
    pub source_pot: Vec<f64>,
    pub sink_pot: Vec<f64>,
}

impl<'a> BlPair<'a> {
    pub fn new(sources: &'a CappedAtoms, sinks: &'a CappedAtoms) -> Self {
        let (m, n) = (sources.len(), sinks.len());
        let mut cost = vec![0.0; (m + 1) * (n + 1)];
        for i in 0..m {
            let p = sources.point(i);
            for j in 0..n {
                cost[i * (n + 1) + j] = la::dist(p, sinks.point(j));
            }
            cost[i * (n + 1) + n] = sources.caps[i];
        }
        for j in 0..n {
            cost[m * (n + 1) + j] = sinks.caps[j];
        }
        Self { sources, sinks, cost, m, n }
    }

    /// Solves `F_B(sources, scale * sinks)`.
    pub fn solve(&self, sink_scale: f64) -> BlSolve {
        let (m, n) = (self.m, self.n);
        if m == 0 && n == 0 {
            return BlSolve { value: 0.0, slope: 0.0, source_pot: vec![], sink_pot: vec![] };
        }
        if n == 0 {
            let value = self
                .sources
                .weights
                .iter()
                .zip(&self.sources.caps)
                .map(|(w, c)| w * c)
                .sum();
            return BlSolve { value, slope: 0.0, source_pot: self.sources.caps.clone(), sink_pot: vec![] };
        }
        if m == 0 {
            let sink_cap_mass: f64 = self
                .sinks
                .weights
                .iter()
                .zip(&self.sinks.caps)
                .map(|(w, c)| w * c)
                .sum();
            return BlSolve {
                value: sink_scale * sink_cap_mass,
                slope: sink_cap_mass,
                source_pot: vec![],
                sink_pot: self.sinks.caps.iter().map(|c| -c).collect(),
            };
        }

        let source_mass = self.sources.total_mass();
        let sink_mass = sink_scale * self.sinks.total_mass();
        let mut supply = Vec::with_capacity(m + 1);
        supply.extend_from_slice(&self.sources.weights);
        supply.push(sink_mass); // boundary source feeds the sinks
        let mut demand = Vec::with_capacity(n + 1);
        demand.extend(self.sinks.weights.iter().map(|w| w * sink_scale));
        demand.push(source_mass); // boundary sink absorbs the sources

        let t = transport::solve(&supply, &demand, &self.cost, n + 1);
        let rho0 = t.v[n];
        let lam0 = t.u[m];

        // clamped dual potentials; see module docs for why the objective of
        // this witness equals the transportation value
        let sink_pot: Vec<f64> = (0..n)
            .map(|j| (rho0 - t.v[j]).max(-self.sinks.caps[j]))
            .collect();
        let eval = |p: &[f64], cap: f64| -> f64 {
            let mut v = cap;
            for j in 0..n {
                v = v.min(sink_pot[j] + la::dist(p, self.sinks.point(j)));
            }
            v
        };
        let source_pot: Vec<f64> = (0..m)
            .map(|i| eval(self.sources.point(i), self.sources.caps[i]))
            .collect();

        // d(value)/d(scale): sink masses and the boundary supply both carry
        // the scale factor
        let slope = self
            .sinks
            .weights
            .iter()
            .zip(&t.v)
            .map(|(w, vj)| w * vj)
            .sum::<f64>()
            + self.sinks.total_mass() * lam0;

        BlSolve { value: t.value, slope, source_pot, sink_pot }
    }
}

/// Bounded-Lipschitz distance `F_B(sigma, nu)` with an optimal potential as
/// witness.
pub fn bl_distance(sigma: &DiscreteMeasure, nu: &DiscreteMeasure, b: &Ball) -> Result<BlResult> {
    if sigma.ambient_dim() != nu.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: sigma.ambient_dim(),
            got: nu.ambient_dim(),
        });
    }
    if b.center.len() != sigma.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: sigma.ambient_dim(),
            got: b.center.len(),
        });
    }
    let mut src = prepare_atoms(sigma, b);
    let mut snk = prepare_atoms(nu, b);
    if src.len() == 0 && snk.len() == 0 {
        return Ok(BlResult {
            value: 0.0,
            witness: vec![],
            status: BlStatus::Degenerate,
            aggregation_bound: None,
        });
    }
    let mut status = BlStatus::Optimal;
    let mut aggregation_bound = None;
    if src.len() + snk.len() > SUPPORT_CAP {
        let moved = src.total_mass() + snk.total_mass();
        let cell = b.radius / AGGREGATION_CELLS;
        aggregation_bound = Some(moved * cell * (sigma.ambient_dim() as f64).sqrt());
        src = aggregate_atoms(&src, b);
        snk = aggregate_atoms(&snk, b);
        status = BlStatus::CappedSupport;
    }
    let pair = BlPair::new(&src, &snk);
    let sol = pair.solve(1.0);
    let mut witness = Vec::with_capacity(src.len() + snk.len());
    for i in 0..src.len() {
        witness.push(WitnessAtom {
            position: src.point(i).to_vec(),
            signed_weight: src.weights[i],
            potential: sol.source_pot[i],
        });
    }
    for j in 0..snk.len() {
        witness.push(WitnessAtom {
            position: snk.point(j).to_vec(),
            signed_weight: -snk.weights[j],
            potential: sol.sink_pot[j],
        });
    }
    Ok(BlResult { value: sol.value, witness, status, aggregation_bound })
}

/// 1-Wasserstein distance between two probability measures (total masses must
/// both be 1 within 1e-9).
pub fn w1_distance(p: &DiscreteMeasure, q: &DiscreteMeasure) -> Result<f64> {
    if p.ambient_dim() != q.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: p.ambient_dim(), got: q.ambient_dim() });
    }
    let (mp, mq) = (p.total_mass(), q.total_mass());
    const TOL: f64 = 1e-9;
    if (mp - 1.0).abs() > TOL || (mq - 1.0).abs() > TOL {
        return Err(Error::MassMismatch { a: mp, b: mq, tol: TOL });
    }
    // rebalance the rounding residue so the solver sees an exactly balanced
    // instance
    let m = p.len();
    let n = q.len();
    let supply = p.weights().to_vec();
    let scale = mp / mq;
    let demand: Vec<f64> = q.weights().iter().map(|w| w * scale).collect();
    let mut cost = vec![0.0; m * n];
    for i in 0..m {
        let pi = p.point(i);
        for j in 0..n {
            cost[i * n + j] = la::dist(pi, q.point(j));
        }
    }
    Ok(transport::solve(&supply, &demand, &cost, n).value)
}
