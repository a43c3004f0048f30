//! Example-measure constructors with ground-truth metadata: the line-splitting
//! cascade whose density collapses while the alpha square function stays
//! bounded, the slow-angle Koch variant, and Lipschitz graphs.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::DiscreteMeasure;

/// Smallest representable splitting gap; below this the construction leaves
/// double precision and the generator refuses.
pub const MIN_GAP: f64 = 1e-300;

/// Parameters of the line-splitting cascade.
///
/// Level `k+1` splits every line of level `k` in two: a fraction `1 - a_{k+1}`
/// of its coefficient stays, a fraction `a_{k+1}` moves to a parallel line at
/// height `h_{k+1}` above. The gaps must shrink fast against the minimal line
/// distance `d_k` of the previous level:
/// `h_{k+1} <= a_{k+1}^{4(k+1)} d_k` and `(h_{k+1}/d_k)^{1/4} <= 2^{-k}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleSpec {
    pub levels: usize,
    /// `a_1 .. a_K`, each in (0, 1/2).
    pub a_seq: Vec<f64>,
    /// `h_1 .. h_K`.
    pub h_seq: Vec<f64>,
    /// Lines are truncated to `[-window, window]`.
    pub window: f64,
    /// Atoms per unit length on each line.
    pub samples_per_unit: f64,
}

impl CounterexampleSpec {
    /// Minimal line gaps `d_1 .. d_K`, by the stable recursion
    /// `d_1 = h_1`, `d_k = min(h_k, d_{k-1} - h_k)`.
    ///
    /// This equals the minimal pairwise distance among the level-k lines but
    /// avoids the catastrophic cancellation of differencing subset sums, which
    /// collapses to zero in double precision a few levels in.
    pub fn gap_sequence(&self) -> Vec<f64> {
        let mut gaps = Vec::with_capacity(self.h_seq.len());
        let mut d = f64::INFINITY;
        for &h in &self.h_seq {
            d = h.min(d - h);
            gaps.push(d);
        }
        gaps
    }

    /// Checks every constraint, naming the first one that fails.
    pub fn validate(&self) -> Result<()> {
        if self.levels == 0 {
            return Err(Error::ConstraintViolation("levels must be >= 1".into()));
        }
        if self.a_seq.len() != self.levels || self.h_seq.len() != self.levels {
            return Err(Error::ConstraintViolation(format!(
                "a_seq/h_seq must have length levels={}",
                self.levels
            )));
        }
        if !(self.window > 0.0) || !(self.samples_per_unit > 0.0) {
            return Err(Error::ConstraintViolation(
                "window and samples_per_unit must be positive".into(),
            ));
        }
        for (k, &a) in self.a_seq.iter().enumerate() {
            if !(a > 0.0 && a < 0.5) {
                return Err(Error::ConstraintViolation(format!(
                    "a_{} = {a} violates 0 < a < 1/2",
                    k + 1
                )));
            }
        }
        for (k, &h) in self.h_seq.iter().enumerate() {
            if !(h > 0.0 && h < 0.5) {
                return Err(Error::ConstraintViolation(format!(
                    "h_{} = {h} violates 0 < h < 1/2",
                    k + 1
                )));
            }
            if h < MIN_GAP {
                return Err(Error::ConstraintViolation(format!(
                    "h_{} = {h} underflows double precision; usable levels stop at {}",
                    k + 1,
                    k
                )));
            }
        }
        let gaps = self.gap_sequence();
        for k in 1..self.levels {
            // constraints tie h_{k+1} to the gap d_k of the previous level
            let h_next = self.h_seq[k];
            let a_next = self.a_seq[k];
            let d_k = gaps[k - 1];
            let bound = a_next.powi(4 * (k + 1) as i32) * d_k;
            if h_next > bound {
                return Err(Error::ConstraintViolation(format!(
                    "eqhk violated at level {}: h = {h_next} > a^(4k) d = {bound}",
                    k + 1
                )));
            }
            if (h_next / d_k).powf(0.25) > 2f64.powi(-(k as i32)) {
                return Err(Error::ConstraintViolation(format!(
                    "eqas490 violated at level {}: (h/d)^(1/4) > 2^-{k}",
                    k + 1
                )));
            }
        }
        Ok(())
    }
}

/// One level of the cascade: the exact line table plus its discretization.
#[derive(Debug, Clone)]
pub struct LevelMeasure {
    /// `(height, coefficient)` per line; coefficients sum to 1.
    pub lines: Vec<(f64, f64)>,
    pub measure: DiscreteMeasure,
    pub level: usize,
}

impl LevelMeasure {
    /// Exact mass of the ball against the line table (not the atoms): each
    /// line contributes its coefficient times the chord length, truncated to
    /// the window.
    pub fn exact_ball_mass(&self, x: &[f64], r: f64, window: f64) -> f64 {
        let mut mass = 0.0;
        for &(y, c) in &self.lines {
            let dy = y - x[1];
            if dy.abs() >= r {
                continue;
            }
            let half = (r * r - dy * dy).sqrt();
            let lo = (x[0] - half).max(-window);
            let hi = (x[0] + half).min(window);
            if hi > lo {
                mass += c * (hi - lo);
            }
        }
        mass
    }

    /// Largest line coefficient; for level k this is `prod_{j<=k} (1 - a_j)`.
    pub fn max_coefficient(&self) -> f64 {
        self.lines.iter().map(|&(_, c)| c).fold(0.0, f64::max)
    }
}

fn discretize_lines(lines: &[(f64, f64)], window: f64, samples_per_unit: f64) -> Result<DiscreteMeasure> {
    let count = (2.0 * window * samples_per_unit).round().max(1.0) as usize;
    let spacing = 2.0 * window / count as f64;
    let mut coords = Vec::with_capacity(lines.len() * count * 2);
    let mut weights = Vec::with_capacity(lines.len() * count);
    for &(y, c) in lines {
        for i in 0..count {
            let x = -window + (i as f64 + 0.5) * spacing;
            coords.push(x);
            coords.push(y);
            weights.push(c * spacing);
        }
    }
    DiscreteMeasure::from_flat(coords, weights, 2)
}

/// Builds the cascade levels `mu_0 .. mu_K`. Level 0 is the single base line
/// with coefficient 1.
pub fn counterexample(spec: &CounterexampleSpec) -> Result<Vec<LevelMeasure>> {
    spec.validate()?;
    let mut levels = Vec::with_capacity(spec.levels + 1);
    let mut lines: Vec<(f64, f64)> = vec![(0.0, 1.0)];
    levels.push(LevelMeasure {
        lines: lines.clone(),
        measure: discretize_lines(&lines, spec.window, spec.samples_per_unit)?,
        level: 0,
    });
    for k in 0..spec.levels {
        let a = spec.a_seq[k];
        let h = spec.h_seq[k];
        let mut next = Vec::with_capacity(lines.len() * 2);
        for &(y, c) in &lines {
            next.push((y, (1.0 - a) * c));
            next.push((y + h, a * c));
        }
        lines = next;
        levels.push(LevelMeasure {
            lines: lines.clone(),
            measure: discretize_lines(&lines, spec.window, spec.samples_per_unit)?,
            level: k + 1,
        });
    }
    Ok(levels)
}

/// Default cascade parameters: `a_j = 1/(2j+2)` (summable squares with logs,
/// divergent sum) and each `h` at half its constraint bound, starting from a
/// unit reference gap.
///
/// The gaps shrink super-exponentially, so only a handful of levels fit in
/// double precision; past that the construction is refused rather than
/// silently denormalized.
pub fn default_parameters(levels: usize) -> Result<CounterexampleSpec> {
    if levels == 0 {
        return Err(Error::InvalidParameter("levels must be >= 1".into()));
    }
    let a_seq: Vec<f64> = (1..=levels).map(|j| 1.0 / (2.0 * j as f64 + 2.0)).collect();
    let mut h_seq = Vec::with_capacity(levels);
    let mut d_prev = 1.0f64; // unit reference scale for the first split
    for k in 0..levels {
        let a = a_seq[k];
        let bound = if k == 0 {
            a.powi(4) * d_prev
        } else {
            let eqhk = a.powi(4 * (k + 1) as i32) * d_prev;
            let eqas = d_prev * 2f64.powi(-4 * k as i32);
            eqhk.min(eqas)
        };
        let h = 0.5 * bound;
        if h < MIN_GAP {
            return Err(Error::ConstraintViolation(format!(
                "h underflows double precision at level {}; maximum usable levels = {}",
                k + 1,
                k
            )));
        }
        h_seq.push(h);
        d_prev = if k == 0 { h } else { h.min(d_prev - h) };
    }
    let spec = CounterexampleSpec {
        levels,
        a_seq,
        h_seq,
        window: 8.0,
        samples_per_unit: 256.0,
    };
    spec.validate()?;
    Ok(spec)
}

/// One stage of the Koch variant.
#[derive(Debug, Clone)]
pub struct KochStage {
    pub stage: usize,
    pub vertices: Vec<Vec<f64>>,
    pub measure: DiscreteMeasure,
    pub total_length: f64,
}

/// Koch-type polyline stages where the bump introduced at stage `k` makes an
/// angle `1/sqrt(k)` with the replaced edge. Each stage's measure is the
/// arclength measure normalized to total mass 1.
pub fn koch_variant(stages: usize, samples_per_segment: usize) -> Result<Vec<KochStage>> {
    if stages == 0 {
        return Err(Error::InvalidParameter("stages must be >= 1".into()));
    }
    if samples_per_segment == 0 {
        return Err(Error::InvalidParameter("samples_per_segment must be >= 1".into()));
    }
    let mut out = Vec::with_capacity(stages);
    let mut verts: Vec<[f64; 2]> = vec![[0.0, 0.0], [1.0, 0.0]];
    for k in 1..=stages {
        let theta = 1.0 / (k as f64).sqrt();
        let (ct, st) = (theta.cos(), theta.sin());
        let mut next: Vec<[f64; 2]> = Vec::with_capacity(verts.len() * 4);
        for w in verts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let ex = b[0] - a[0];
            let ey = b[1] - a[1];
            let len = (ex * ex + ey * ey).sqrt();
            let (ux, uy) = (ex / len, ey / len);
            // edge split into 4 equal pieces; the middle two rise and fall at
            // the bump angle on the left side of the edge
            let t = len / (2.0 * (1.0 + ct));
            let p1 = [a[0] + t * ux, a[1] + t * uy];
            let bump = [ux * ct - uy * st, ux * st + uy * ct];
            let p2 = [p1[0] + t * bump[0], p1[1] + t * bump[1]];
            let p3 = [b[0] - t * ux, b[1] - t * uy];
            next.push(a);
            next.push(p1);
            next.push(p2);
            next.push(p3);
        }
        next.push(*verts.last().unwrap());
        verts = next;

        let mut total = 0.0;
        for w in verts.windows(2) {
            total += ((w[1][0] - w[0][0]).powi(2) + (w[1][1] - w[0][1]).powi(2)).sqrt();
        }
        let mut coords = Vec::new();
        let mut weights = Vec::new();
        for w in verts.windows(2) {
            let seg = ((w[1][0] - w[0][0]).powi(2) + (w[1][1] - w[0][1]).powi(2)).sqrt();
            for i in 0..samples_per_segment {
                let t = (i as f64 + 0.5) / samples_per_segment as f64;
                coords.push(w[0][0] + t * (w[1][0] - w[0][0]));
                coords.push(w[0][1] + t * (w[1][1] - w[0][1]));
                weights.push(seg / (samples_per_segment as f64 * total));
            }
        }
        out.push(KochStage {
            stage: k,
            vertices: verts.iter().map(|v| v.to_vec()).collect(),
            measure: DiscreteMeasure::from_flat(coords, weights, 2)?,
            total_length: total,
        });
    }
    Ok(out)
}

/// Graph of a random piecewise-linear function with Lipschitz constant
/// exactly bounded by `slope`, over a `d`-dimensional domain in `R^n`, with
/// area-weighted atoms. Deterministic per seed.
pub fn lipschitz_graph(
    slope: f64,
    n: usize,
    d: usize,
    atoms: usize,
    seed: u64,
) -> Result<DiscreteMeasure> {
    if slope < 0.0 {
        return Err(Error::InvalidParameter("slope must be >= 0".into()));
    }
    if d == 0 || d >= n {
        return Err(Error::InvalidParameter(format!(
            "graph dimension d={d} must satisfy 0 < d < n={n}"
        )));
    }
    if atoms == 0 {
        return Err(Error::InvalidParameter("atoms must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    const SEGS: usize = 16;
    // per-axis piecewise-linear profiles with slopes bounded by slope/sqrt(d);
    // their sum has gradient norm at most `slope`
    let per_axis_cap = slope / (d as f64).sqrt();
    let profiles: Vec<Vec<f64>> = (0..d)
        .map(|_| (0..SEGS).map(|_| rng.random_range(-1.0..1.0) * per_axis_cap).collect())
        .collect();
    let eval_axis = |axis: usize, u: f64| -> (f64, f64) {
        // returns (value, local slope) of the integral of the step profile
        let t = (u + 1.0) / 2.0 * SEGS as f64;
        let seg = (t.floor() as usize).min(SEGS - 1);
        let width = 2.0 / SEGS as f64;
        let mut val = 0.0;
        for s in 0..seg {
            val += profiles[axis][s] * width;
        }
        let frac = u - (-1.0 + seg as f64 * width);
        val += profiles[axis][seg] * frac;
        (val, profiles[axis][seg])
    };

    let per_axis = (atoms as f64).powf(1.0 / d as f64).round().max(1.0) as usize;
    let cell = 2.0 / per_axis as f64;
    let total = per_axis.pow(d as u32);
    let mut coords = Vec::with_capacity(total * n);
    let mut weights = Vec::with_capacity(total);
    let mut idx = vec![0usize; d];
    loop {
        let u: Vec<f64> = idx.iter().map(|&i| -1.0 + (i as f64 + 0.5) * cell).collect();
        let mut height = 0.0;
        let mut grad2 = 0.0;
        for (axis, &ui) in u.iter().enumerate() {
            let (v, g) = eval_axis(axis, ui);
            height += v;
            grad2 += g * g;
        }
        let mut p = vec![0.0; n];
        p[..d].copy_from_slice(&u);
        p[d] = height;
        coords.extend_from_slice(&p);
        // d-area of the graph patch above the cell
        weights.push(cell.powi(d as i32) * (1.0 + grad2).sqrt());
        let mut k = 0;
        loop {
            if k == d {
                return DiscreteMeasure::from_flat(coords, weights, n);
            }
            idx[k] += 1;
            if idx[k] < per_axis {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::local_hausdorff;
    use crate::measure::{ball_mass, Ball};

    #[test]
    fn cascade_level_zero_and_one() {
        let spec = CounterexampleSpec {
            levels: 1,
            a_seq: vec![0.25],
            h_seq: vec![0.01],
            window: 2.0,
            samples_per_unit: 64.0,
        };
        let levels = counterexample(&spec).unwrap();
        assert_eq!(levels.len(), 2);
        assert_eq!(levels[0].lines, vec![(0.0, 1.0)]);
        let l1 = &levels[1];
        assert_eq!(l1.lines.len(), 2);
        assert!((l1.lines[0].1 - 0.75).abs() < 1e-15);
        assert!((l1.lines[1].1 - 0.25).abs() < 1e-15);
        assert!((l1.lines[1].0 - 0.01).abs() < 1e-15);
    }

    #[test]
    fn cascade_mass_conservation_and_counts() {
        let spec = default_parameters(4).unwrap();
        let levels = counterexample(&spec).unwrap();
        let expect = 2.0 * spec.window;
        for (k, lv) in levels.iter().enumerate() {
            assert_eq!(lv.lines.len(), 1 << k);
            let mass = lv.measure.total_mass();
            assert!(
                (mass - expect).abs() < 1e-9 * expect,
                "level {k}: mass {mass} vs {expect}"
            );
            let coeff_sum: f64 = lv.lines.iter().map(|&(_, c)| c).sum();
            assert!((coeff_sum - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn cascade_max_coefficient_is_the_product() {
        let spec = CounterexampleSpec {
            levels: 5,
            a_seq: (1..=5).map(|j| 1.0 / (2.0 * j as f64)).collect(),
            h_seq: vec![1e-3, 1e-8, 1e-16, 1e-32, 1e-64],
            window: 1.0,
            samples_per_unit: 16.0,
        };
        // a_1 = 1/2 violates strictness
        assert!(spec.validate().is_err());
        let spec = CounterexampleSpec {
            a_seq: (1..=5).map(|j| 1.0 / (2.0 * j as f64 + 2.0)).collect(),
            ..spec
        };
        // h_seq above is too lazy for eqhk at level 2
        assert!(matches!(spec.validate(), Err(Error::ConstraintViolation(_))));
        let spec = default_parameters(5).unwrap();
        let levels = counterexample(&spec).unwrap();
        let want: f64 = spec.a_seq.iter().map(|a| 1.0 - a).product();
        assert!((levels[5].max_coefficient() - want).abs() < 1e-12);
    }

    #[test]
    fn default_parameters_validate_and_respect_bounds() {
        for k in 1..=6 {
            let spec = default_parameters(k).unwrap();
            spec.validate().unwrap();
            assert!((spec.a_seq[0] - 0.25).abs() < 1e-15);
        }
        let gaps = default_parameters(3).unwrap().gap_sequence();
        let spec = default_parameters(3).unwrap();
        assert!(spec.h_seq[1] <= spec.a_seq[1].powi(8) * gaps[0]);
    }

    #[test]
    fn gap_recursion_matches_brute_force_at_shallow_levels() {
        let spec = CounterexampleSpec {
            levels: 2,
            a_seq: vec![0.25, 0.3],
            h_seq: vec![0.01, 0.01 * 0.3f64.powi(8) * 0.5],
            window: 1.0,
            samples_per_unit: 8.0,
        };
        spec.validate().unwrap();
        let levels = counterexample(&spec).unwrap();
        let gaps = spec.gap_sequence();
        for (k, lv) in levels.iter().enumerate().skip(1) {
            let mut heights: Vec<f64> = lv.lines.iter().map(|&(y, _)| y).collect();
            heights.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let brute = heights
                .windows(2)
                .map(|w| w[1] - w[0])
                .fold(f64::INFINITY, f64::min);
            assert!(
                (gaps[k - 1] - brute).abs() < 1e-15 * (1.0 + brute),
                "level {k}: {} vs {brute}",
                gaps[k - 1]
            );
        }
    }

    #[test]
    fn exact_ball_mass_matches_atoms_at_resolvable_scale() {
        let spec = CounterexampleSpec {
            levels: 1,
            a_seq: vec![0.25],
            h_seq: vec![0.02],
            window: 2.0,
            samples_per_unit: 2048.0,
        };
        let levels = counterexample(&spec).unwrap();
        let x = [0.0, 0.0];
        for r in [0.05, 0.3, 0.9] {
            let exact = levels[1].exact_ball_mass(&x, r, spec.window);
            let discrete = ball_mass(&levels[1].measure, &Ball::new(x.to_vec(), r).unwrap());
            assert!(
                (exact - discrete).abs() < 4.0 / spec.samples_per_unit,
                "r={r}: exact {exact} vs atoms {discrete}"
            );
        }
    }

    #[test]
    fn underflow_is_refused_with_the_level_named() {
        let err = default_parameters(40).unwrap_err();
        let msg = format!("{err}");
        assert!(msg.contains("underflow"), "{msg}");
    }

    #[test]
    fn koch_counts_lengths_and_hausdorff_drift() {
        let stages = koch_variant(4, 4).unwrap();
        for (i, st) in stages.iter().enumerate() {
            let k = i + 1;
            assert_eq!(st.vertices.len(), 4usize.pow(k as u32) + 1);
            let mass = st.measure.total_mass();
            assert!((mass - 1.0).abs() < 1e-12, "stage {k} mass {mass}");
            assert!(st.total_length >= 1.0);
        }
        // consecutive stages stay within one segment length of each other
        for w in stages.windows(2) {
            let seg = w[0].total_length / (w[0].vertices.len() - 1) as f64;
            let a: Vec<Vec<f64>> = w[0].measure.points_vec();
            let b: Vec<Vec<f64>> = w[1].measure.points_vec();
            let d = local_hausdorff(&a, &b, &[0.5, 0.0], 1.0);
            assert!(d <= seg, "hausdorff {d} vs segment {seg}");
        }
        // stage-k bump angle: the first interior vertex rises at angle 1/sqrt(k)
        let st1 = &stages[0];
        let v = &st1.vertices;
        let dx = v[2][0] - v[1][0];
        let dy = v[2][1] - v[1][1];
        let ang = dy.atan2(dx);
        assert!((ang - 1.0).abs() < 1e-12, "stage-1 angle {ang}");
    }

    #[test]
    fn lipschitz_graph_secant_slopes_bounded() {
        let s = 0.35;
        let mu = lipschitz_graph(s, 2, 1, 200, 7).unwrap();
        assert_eq!(mu.len(), 200);
        for i in 0..mu.len() {
            for j in 0..i {
                let (p, q) = (mu.point(i), mu.point(j));
                let run = (p[0] - q[0]).abs();
                let rise = (p[1] - q[1]).abs();
                assert!(rise <= s * run + 1e-12, "secant {}", rise / run);
            }
        }
        // determinism per seed
        let again = lipschitz_graph(s, 2, 1, 200, 7).unwrap();
        assert_eq!(mu, again);
        let other = lipschitz_graph(s, 2, 1, 200, 8).unwrap();
        assert_ne!(mu, other);
    }

    #[test]
    fn lipschitz_graph_flat_when_slope_zero() {
        let mu = lipschitz_graph(0.0, 3, 2, 100, 1).unwrap();
        for (p, _) in mu.iter() {
            assert_eq!(p[2], 0.0);
        }
        // area weights of a flat graph: exactly the cell volume
        let per_axis = (100f64).sqrt().round() as usize;
        let cell = 2.0 / per_axis as f64;
        for w in mu.weights() {
            assert!((w - cell * cell).abs() < 1e-15);
        }
    }
}
