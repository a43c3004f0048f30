//! Radius-grid scans: per-point coefficient profiles, Jones square functions,
//! rectifiability-criteria classification, and stopping-time diagnostics
//! (not-dense / low-density / high-density / big-angle flags).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coefficients::{alpha_seeded, beta, FitConfig, FitStatus};
use crate::error::{Error, Result};
use crate::geometry::{plane_angle, AffinePlane};
use crate::la;
use crate::measure::{ball_mass, density_ratio, Ball, DiscreteMeasure};

/// Log-uniform radius grid `r_max * 2^{-i/q}`, decreasing, down to `r_min`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusGrid {
    pub r_min: f64,
    pub r_max: f64,
    pub per_octave: u32,
}

impl RadiusGrid {
    pub fn new(r_min: f64, r_max: f64, per_octave: u32) -> Result<Self> {
        if !(r_min > 0.0 && r_min < r_max) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < r_min < r_max, got [{r_min}, {r_max}]"
            )));
        }
        if per_octave == 0 {
            return Err(Error::InvalidParameter("per_octave must be >= 1".into()));
        }
        Ok(Self { r_min, r_max, per_octave })
    }

    /// Radii in decreasing order.
    pub fn radii(&self) -> Vec<f64> {
        let q = self.per_octave as f64;
        let mut out = Vec::new();
        let mut i = 0u32;
        loop {
            let r = self.r_max * 2f64.powf(-(i as f64) / q);
            if r < self.r_min * (1.0 - 1e-12) {
                break;
            }
            out.push(r);
            i += 1;
        }
        out
    }

    /// Quadrature weight of the log-uniform discretization of `dr/r`.
    pub fn log_weight(&self) -> f64 {
        std::f64::consts::LN_2 / self.per_octave as f64
    }

    /// Default grid for a measure: `r_max = 1`, `r_min` eight times the
    /// typical nearest-neighbor spacing (below that, discreteness drowns the
    /// coefficients).
    pub fn default_for(mu: &DiscreteMeasure) -> Result<Self> {
        let spacing = nearest_neighbor_spacing(mu);
        let r_min = (8.0 * spacing).min(0.5).max(1e-9);
        Self::new(r_min, 1.0, 2)
    }
}

/// Median nearest-neighbor distance over a deterministic subsample.
pub fn nearest_neighbor_spacing(mu: &DiscreteMeasure) -> f64 {
    let k = mu.len();
    if k < 2 {
        return 0.0;
    }
    let stride = (k / 512).max(1);
    let sample: Vec<usize> = (0..k).step_by(stride).collect();
    let mut nns: Vec<f64> = sample
        .iter()
        .map(|&i| {
            let p = mu.point(i);
            (0..k)
                .filter(|&j| j != i)
                .map(|j| la::dist2(p, mu.point(j)))
                .fold(f64::INFINITY, f64::min)
                .sqrt()
        })
        .collect();
    nns.sort_by(|a, b| a.partial_cmp(b).unwrap());
    nns[nns.len() / 2]
}

/// Per-scale health of a profile entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScaleFlag {
    Ok,
    /// No mass at this scale; excluded from the Jones sums.
    ZeroMass,
    /// The alpha multistart disagreed at this scale.
    Disagreement,
}

/// Coefficients of one point over a radius grid, with Jones square-function
/// values accumulated by log-uniform quadrature.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MultiscaleProfile {
    pub point: Vec<f64>,
    /// Radii in decreasing order.
    pub radii: Vec<f64>,
    pub alphas: Vec<Option<f64>>,
    /// Beta-2 numbers.
    pub betas: Vec<Option<f64>>,
    pub thetas: Vec<f64>,
    pub doubling: Vec<Option<f64>>,
    pub flags: Vec<ScaleFlag>,
    pub jones_alpha: f64,
    pub jones_beta: f64,
    /// The point lies outside the bounding box of the support.
    pub outside_hull: bool,
}

/// Scans one point over the grid. Alphas are warm-started across scales with
/// the previous minimizing plane.
pub fn profile(
    mu: &DiscreteMeasure,
    x: &[f64],
    grid: &RadiusGrid,
    d: usize,
    cfg: &FitConfig,
) -> Result<MultiscaleProfile> {
    if x.len() != mu.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: mu.ambient_dim(), got: x.len() });
    }
    let radii = grid.radii();
    let mut alphas = Vec::with_capacity(radii.len());
    let mut betas = Vec::with_capacity(radii.len());
    let mut thetas = Vec::with_capacity(radii.len());
    let mut doubling = Vec::with_capacity(radii.len());
    let mut flags = Vec::with_capacity(radii.len());
    let mut warm: Option<AffinePlane> = None;
    for &r in &radii {
        let b = Ball::new(x.to_vec(), r)?;
        let stats = density_ratio(mu, x, r, d)?;
        thetas.push(stats.theta);
        doubling.push(stats.doubling_ratio);
        if ball_mass(mu, &b) <= 0.0 {
            alphas.push(None);
            betas.push(None);
            flags.push(ScaleFlag::ZeroMass);
            continue;
        }
        let seeds: Vec<AffinePlane> = warm.iter().cloned().collect();
        let a = alpha_seeded(mu, &b, d, cfg, &seeds)?;
        let bt = beta(mu, &b, d, 2.0)?;
        flags.push(match a.status {
            FitStatus::Converged => ScaleFlag::Ok,
            FitStatus::MultistartDisagreement => ScaleFlag::Disagreement,
        });
        warm = Some(a.plane_best.clone());
        alphas.push(Some(a.alpha));
        betas.push(Some(bt.beta));
    }
    let w = grid.log_weight();
    let jones_alpha: f64 = alphas.iter().flatten().map(|a| a * a * w).sum();
    let jones_beta: f64 = betas.iter().flatten().map(|b| b * b * w).sum();
    let outside_hull = {
        let n = mu.ambient_dim();
        let mut outside = mu.is_empty();
        for k in 0..n {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for (p, _) in mu.iter() {
                lo = lo.min(p[k]);
                hi = hi.max(p[k]);
            }
            if x[k] < lo || x[k] > hi {
                outside = true;
            }
        }
        outside
    };
    Ok(MultiscaleProfile {
        point: x.to_vec(),
        radii,
        alphas,
        betas,
        thetas,
        doubling,
        flags,
        jones_alpha,
        jones_beta,
        outside_hull,
    })
}

/// Parallel profile scan over many points; results in input order.
pub fn profiles(
    mu: &DiscreteMeasure,
    points: &[Vec<f64>],
    grid: &RadiusGrid,
    d: usize,
    cfg: &FitConfig,
) -> Result<Vec<MultiscaleProfile>> {
    points
        .par_iter()
        .map(|x| profile(mu, x, grid, d, cfg))
        .collect()
}

/// Pass thresholds of the finite-scale rectifiability check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyThresholds {
    /// Cap on the alpha Jones function.
    pub j_max: f64,
    /// Cap on the doubling ratio over the grid.
    pub m_max: f64,
}

impl Default for ClassifyThresholds {
    fn default() -> Self {
        Self { j_max: 1.0, m_max: 30.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointVerdict {
    pub point: Vec<f64>,
    pub jones_alpha: f64,
    pub max_doubling: Option<f64>,
    pub pass: bool,
    /// Every scale was empty; the point carries no evidence either way.
    pub insufficient: bool,
}

/// The classification verdict string is one of these.
pub const VERDICT_CONSISTENT: &str = "consistent-with-rectifiable";
pub const VERDICT_FAILS: &str = "fails-criteria";
pub const VERDICT_INSUFFICIENT: &str = "insufficient-data";

/// Finite-scale caveat attached to every classification report.
pub const CLASSIFY_CAVEAT: &str = "finite-scale diagnostic";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassifyReport {
    pub points: Vec<PointVerdict>,
    /// Fraction of evidential (non-insufficient) points that pass.
    pub pass_fraction: f64,
    pub verdict: String,
    pub caveat: String,
    pub thresholds: ClassifyThresholds,
}

/// Evaluates the boundedness criteria (Jones function and doubling) on a
/// sample of points. This is a finite-scale diagnostic, not a proof.
pub fn classify(
    mu: &DiscreteMeasure,
    sample: &[Vec<f64>],
    grid: &RadiusGrid,
    d: usize,
    thresholds: &ClassifyThresholds,
    cfg: &FitConfig,
) -> Result<ClassifyReport> {
    if sample.is_empty() {
        return Err(Error::InvalidParameter("classification sample is empty".into()));
    }
    let profs = profiles(mu, sample, grid, d, cfg)?;
    let points: Vec<PointVerdict> = profs
        .iter()
        .map(|p| {
            let insufficient = p.flags.iter().all(|f| *f == ScaleFlag::ZeroMass);
            let max_doubling = p
                .doubling
                .iter()
                .flatten()
                .cloned()
                .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))));
            let pass = !insufficient
                && p.jones_alpha <= thresholds.j_max
                && max_doubling.map_or(false, |m| m <= thresholds.m_max);
            PointVerdict {
                point: p.point.clone(),
                jones_alpha: p.jones_alpha,
                max_doubling,
                pass,
                insufficient,
            }
        })
        .collect();
    let evidential: Vec<&PointVerdict> = points.iter().filter(|p| !p.insufficient).collect();
    let (pass_fraction, verdict) = if evidential.is_empty() {
        (0.0, VERDICT_INSUFFICIENT.to_string())
    } else {
        let frac = evidential.iter().filter(|p| p.pass).count() as f64 / evidential.len() as f64;
        let v = if frac >= 0.9 { VERDICT_CONSISTENT } else { VERDICT_FAILS };
        (frac, v.to_string())
    };
    Ok(ClassifyReport {
        points,
        pass_fraction,
        verdict,
        caveat: CLASSIFY_CAVEAT.to_string(),
        thresholds: *thresholds,
    })
}

/// Stopping-time thresholds; the intended regime is
/// `tau << 1 << min(A, C1)` and `epsilon << min(1/A, tau^4, 1/C1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StopThresholds {
    pub epsilon: f64,
    pub tau: f64,
    /// High-density cap, the constant `A`.
    pub a_cap: f64,
    /// Top radius bound, the constant `C1`.
    pub c1: f64,
}

impl Default for StopThresholds {
    fn default() -> Self {
        Self { epsilon: 1e-3, tau: 0.05, a_cap: 20.0, c1: 4.0 }
    }
}

/// Per-radius stopping condition flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RadiusFlags {
    /// Not dense: too much mass outside the good set.
    pub nd: bool,
    /// Low density: `theta <= tau`.
    pub ld: bool,
    /// High density: `theta >= A`.
    pub hd: bool,
    /// Big angle: the minimizing plane tilts away from the reference plane.
    pub ba: bool,
}

impl RadiusFlags {
    pub fn any(&self) -> bool {
        self.nd || self.ld || self.hd || self.ba
    }
}

/// Stopping diagnosis of one point: the largest flagged radius and its
/// 1-Lipschitz regularization over the base sample.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StopDiagnosis {
    pub point: Vec<f64>,
    /// Largest grid radius at which any condition fires; 0 when none does.
    pub delta: f64,
    /// `inf_y (delta(y) + |x - y|)` over the base sample.
    pub d_reg: f64,
    /// Aligned with the grid radii (decreasing).
    pub verdicts: Vec<RadiusFlags>,
    pub thresholds: StopThresholds,
}

/// Evaluates the four stopping conditions on every base point over the grid.
///
/// The good-set mask plays the role of the set `E_0`: `good[i]` says atom `i`
/// belongs to it. Without a mask the not-dense condition never fires.
pub fn stopping_time(
    mu: &DiscreteMeasure,
    base: &[Vec<f64>],
    grid: &RadiusGrid,
    d: usize,
    thresholds: &StopThresholds,
    reference_plane: &AffinePlane,
    good: Option<&[bool]>,
    cfg: &FitConfig,
) -> Result<Vec<StopDiagnosis>> {
    if !(thresholds.epsilon > 0.0 && thresholds.tau > 0.0 && thresholds.a_cap > 0.0 && thresholds.c1 > 0.0)
    {
        return Err(Error::InvalidParameter("stopping thresholds must be positive".into()));
    }
    if grid.r_max >= thresholds.c1 {
        return Err(Error::InvalidParameter(format!(
            "grid must live below C1: r_max {} >= C1 {}",
            grid.r_max, thresholds.c1
        )));
    }
    if let Some(mask) = good {
        if mask.len() != mu.len() {
            return Err(Error::DimensionMismatch { expected: mu.len(), got: mask.len() });
        }
    }
    let radii = grid.radii();
    let nd_factor = thresholds.epsilon.sqrt();
    let ba_limit = thresholds.epsilon.powf(0.25);

    let mut out: Vec<StopDiagnosis> = base
        .par_iter()
        .map(|x| -> Result<StopDiagnosis> {
            let mut verdicts = Vec::with_capacity(radii.len());
            let mut delta = 0.0f64;
            let mut warm: Option<AffinePlane> = None;
            for &r in &radii {
                let b = Ball::new(x.clone(), r)?;
                let mass = ball_mass(mu, &b);
                let theta = mass / r.powi(d as i32);
                let ld = theta <= thresholds.tau;
                let hd = theta >= thresholds.a_cap;
                let nd = match good {
                    Some(mask) if mass > 0.0 => {
                        let off: f64 = mu
                            .iter()
                            .zip(mask)
                            .filter(|((p, _), &g)| !g && b.contains(p))
                            .map(|((_, w), _)| w)
                            .sum();
                        off >= nd_factor * mass
                    }
                    _ => false,
                };
                let ba = if mass > 0.0 {
                    let seeds: Vec<AffinePlane> = warm.iter().cloned().collect();
                    let a = alpha_seeded(mu, &b, d, cfg, &seeds)?;
                    warm = Some(a.plane_best.clone());
                    plane_angle(&a.plane_best, reference_plane)? >= ba_limit
                } else {
                    false
                };
                let flags = RadiusFlags { nd, ld, hd, ba };
                if flags.any() {
                    delta = delta.max(r);
                }
                verdicts.push(flags);
            }
            Ok(StopDiagnosis {
                point: x.clone(),
                delta,
                d_reg: 0.0,
                verdicts,
                thresholds: *thresholds,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    // 1-Lipschitz regularization over the base sample
    let deltas: Vec<(Vec<f64>, f64)> =
        out.iter().map(|s| (s.point.clone(), s.delta)).collect();
    for s in out.iter_mut() {
        s.d_reg = deltas
            .iter()
            .map(|(y, dy)| dy + la::dist(&s.point, y))
            .fold(f64::INFINITY, f64::min);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_measure(n: usize, spacing: f64) -> DiscreteMeasure {
        let pts: Vec<Vec<f64>> = (0..n)
            .map(|i| vec![(i as f64 + 0.5 - n as f64 / 2.0) * spacing, 0.0])
            .collect();
        DiscreteMeasure::new(pts, vec![spacing; n], 2).unwrap()
    }

    #[test]
    fn radius_grid_shape() {
        let g = RadiusGrid::new(0.25, 1.0, 2).unwrap();
        let r = g.radii();
        assert_eq!(r.len(), 5);
        assert!((r[0] - 1.0).abs() < 1e-15);
        assert!((r[4] - 0.25).abs() < 1e-12);
        for w in r.windows(2) {
            assert!(w[1] < w[0]);
        }
        assert!(RadiusGrid::new(1.0, 0.5, 2).is_err());
    }

    #[test]
    fn flat_profile_has_tiny_jones() {
        let mu = line_measure(4096, 1.0 / 512.0);
        let grid = RadiusGrid::new(0.25, 1.0, 2).unwrap();
        let cfg = FitConfig { quad: 32, restarts: 2, ..Default::default() };
        let p = profile(&mu, &[0.0, 0.0], &grid, 1, &cfg).unwrap();
        assert!(p.jones_alpha < 5e-3, "jones_alpha = {}", p.jones_alpha);
        assert!(p.jones_beta < 1e-6);
        assert!(!p.outside_hull);
        // arithmetic identity of the Jones quadrature
        let w = grid.log_weight();
        let manual: f64 = p.alphas.iter().flatten().map(|a| a * a * w).sum();
        assert!((p.jones_alpha - manual).abs() < 1e-15);
    }

    #[test]
    fn zero_mass_scales_are_flagged_and_skipped() {
        let mu = DiscreteMeasure::new(vec![vec![0.0, 0.0]], vec![1.0], 2).unwrap();
        let grid = RadiusGrid::new(0.1, 1.0, 1).unwrap();
        let cfg = FitConfig { quad: 8, restarts: 1, ..Default::default() };
        // a single atom: every ball around a far point is empty
        let p = profile(&mu, &[30.0, 0.0], &grid, 1, &cfg).unwrap();
        assert!(p.flags.iter().all(|f| *f == ScaleFlag::ZeroMass));
        assert_eq!(p.jones_alpha, 0.0);
        assert!(p.outside_hull);
    }

    #[test]
    fn classify_flat_passes_and_is_monotone_in_thresholds() {
        let mu = line_measure(2048, 1.0 / 256.0);
        let grid = RadiusGrid::new(0.25, 1.0, 1).unwrap();
        let cfg = FitConfig { quad: 24, restarts: 2, ..Default::default() };
        let sample: Vec<Vec<f64>> = (0..4).map(|i| vec![-0.6 + 0.4 * i as f64, 0.0]).collect();
        let t = ClassifyThresholds::default();
        let rep = classify(&mu, &sample, &grid, 1, &t, &cfg).unwrap();
        assert_eq!(rep.verdict, VERDICT_CONSISTENT);
        assert_eq!(rep.pass_fraction, 1.0);
        assert_eq!(rep.caveat, CLASSIFY_CAVEAT);
        // raising thresholds cannot turn a pass into a fail
        let looser = ClassifyThresholds { j_max: t.j_max * 2.0, m_max: t.m_max * 2.0 };
        let rep2 = classify(&mu, &sample, &grid, 1, &looser, &cfg).unwrap();
        for (a, b) in rep.points.iter().zip(&rep2.points) {
            assert!(!a.pass || b.pass);
        }
    }

    #[test]
    fn classify_single_atom_insufficient() {
        let mu = DiscreteMeasure::new(vec![vec![0.0, 0.0]], vec![1.0], 2).unwrap();
        let grid = RadiusGrid::new(0.1, 1.0, 1).unwrap();
        let cfg = FitConfig { quad: 8, restarts: 1, ..Default::default() };
        let rep = classify(&mu, &[vec![40.0, 0.0]], &grid, 1, &ClassifyThresholds::default(), &cfg)
            .unwrap();
        assert_eq!(rep.verdict, VERDICT_INSUFFICIENT);
    }

    #[test]
    fn stopping_flat_measure_is_clean() {
        let mu = line_measure(2048, 1.0 / 256.0);
        let grid = RadiusGrid::new(0.25, 1.0, 1).unwrap();
        let cfg = FitConfig { quad: 24, restarts: 1, ..Default::default() };
        let reference = AffinePlane::new(vec![0.0, 0.0], vec![vec![1.0, 0.0]]).unwrap();
        // generous density window so nothing fires
        let t = StopThresholds { epsilon: 1e-3, tau: 0.05, a_cap: 20.0, c1: 4.0 };
        let base: Vec<Vec<f64>> = (0..3).map(|i| vec![-0.4 + 0.4 * i as f64, 0.0]).collect();
        let ds = stopping_time(&mu, &base, &grid, 1, &t, &reference, None, &cfg).unwrap();
        for s in &ds {
            assert_eq!(s.delta, 0.0, "delta at {:?}", s.point);
            assert_eq!(s.d_reg, 0.0);
            assert!(s.verdicts.iter().all(|f| !f.any()));
        }
    }

    #[test]
    fn stopping_hd_fires_on_planted_atom() {
        // a heavy atom forces theta above the cap at the finest radius
        let mut mu = line_measure(2048, 1.0 / 256.0);
        let t = StopThresholds::default();
        let r_fine = 0.25;
        let planted = 2.0 * t.a_cap * r_fine;
        let mut pts = mu.points_vec();
        let mut ws = mu.weights().to_vec();
        pts.push(vec![0.0, 0.0]);
        ws.push(planted);
        mu = DiscreteMeasure::new(pts, ws, 2).unwrap();
        let grid = RadiusGrid::new(r_fine, 1.0, 1).unwrap();
        let cfg = FitConfig { quad: 16, restarts: 1, ..Default::default() };
        let reference = AffinePlane::new(vec![0.0, 0.0], vec![vec![1.0, 0.0]]).unwrap();
        let ds =
            stopping_time(&mu, &[vec![0.0, 0.0]], &grid, 1, &t, &reference, None, &cfg).unwrap();
        assert!(ds[0].delta >= r_fine, "delta = {}", ds[0].delta);
        assert!(ds[0].verdicts.iter().any(|f| f.hd));
    }

    #[test]
    fn stopping_nd_uses_mask_and_d_reg_is_lipschitz() {
        // mask out the right half of the line: balls there are mostly "bad"
        let mu = line_measure(1024, 1.0 / 128.0);
        let good: Vec<bool> = (0..mu.len()).map(|i| mu.point(i)[0] < 0.0).collect();
        let grid = RadiusGrid::new(0.5, 1.0, 1).unwrap();
        let cfg = FitConfig { quad: 16, restarts: 1, ..Default::default() };
        let reference = AffinePlane::new(vec![0.0, 0.0], vec![vec![1.0, 0.0]]).unwrap();
        let t = StopThresholds::default();
        let base: Vec<Vec<f64>> = vec![vec![-2.0, 0.0], vec![2.0, 0.0], vec![0.5, 0.0]];
        let ds = stopping_time(&mu, &base, &grid, 1, &t, &reference, Some(&good), &cfg).unwrap();
        assert_eq!(ds[0].delta, 0.0, "left point should be clean");
        assert!(ds[1].delta > 0.0, "right point sits in masked-out territory");
        for a in &ds {
            assert!(a.d_reg <= a.delta + 1e-12);
            for b in &ds {
                let gap = (a.d_reg - b.d_reg).abs();
                assert!(gap <= la::dist(&a.point, &b.point) + 1e-12);
            }
        }
    }

    #[test]
    fn stopping_rejects_grid_above_c1() {
        let mu = line_measure(64, 0.1);
        let grid = RadiusGrid::new(0.5, 5.0, 1).unwrap();
        let cfg = FitConfig::default();
        let reference = AffinePlane::new(vec![0.0, 0.0], vec![vec![1.0, 0.0]]).unwrap();
        let r = stopping_time(
            &mu,
            &[vec![0.0, 0.0]],
            &grid,
            1,
            &StopThresholds::default(),
            &reference,
            None,
            &cfg,
        );
        assert!(r.is_err());
    }
}
