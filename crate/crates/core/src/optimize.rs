//! Derivative-free optimizers behind the coefficient fits: a cutting-plane
//! minimizer for convex piecewise-linear one-dimensional objectives, and a
//! small Nelder-Mead simplex search for the plane charts.

/// Result of the 1-D convex minimization.
pub(crate) struct ConvexMin {
    pub x: f64,
    pub value: f64,
    /// The minimizer hit the upper end of the bracket with the objective
    /// still decreasing; the caller should widen and retry.
    pub at_upper_edge: bool,
    pub evals: usize,
}

/// Minimizes a convex piecewise-linear function on `[lo, hi]`.
///
/// The oracle returns `(value, slope)` where the slope is any supporting-line
/// slope at the query point (for an LP value function: the dual-derived
/// derivative). Supporting lines from both brackets pinch the minimum; the
/// gap between the best seen value and the lower envelope is the optimality
/// certificate.
pub(crate) fn min_convex_piecewise(
    f: &mut dyn FnMut(f64) -> (f64, f64),
    lo: f64,
    hi: f64,
    rel_tol: f64,
    max_iter: usize,
) -> ConvexMin {
    assert!(hi > lo);
    let mut evals = 0usize;
    let mut eval = |x: f64, evals: &mut usize| {
        *evals += 1;
        f(x)
    };
    let (mut x1, mut x2) = (lo, hi);
    let (g, s) = eval(x1, &mut evals);
    let (mut g1, mut s1) = (g, s);
    if s1 >= 0.0 {
        return ConvexMin { x: x1, value: g1, at_upper_edge: false, evals };
    }
    let (g, s) = eval(x2, &mut evals);
    let (mut g2, mut s2) = (g, s);
    if s2 <= 0.0 {
        return ConvexMin { x: x2, value: g2, at_upper_edge: true, evals };
    }

    let (mut best_x, mut best_g) = if g1 <= g2 { (x1, g1) } else { (x2, g2) };
    for _ in 0..max_iter {
        // intersection of the two supporting lines is a lower-bound point
        let denom = s1 - s2;
        let mut xs = (g2 - g1 + s1 * x1 - s2 * x2) / denom;
        let span = x2 - x1;
        if !xs.is_finite() || xs <= x1 + 1e-14 * span || xs >= x2 - 1e-14 * span {
            xs = 0.5 * (x1 + x2);
        }
        let lower = g1 + s1 * (xs - x1);
        let scale = best_g.abs().max(1e-300);
        if best_g - lower <= rel_tol * scale || span <= 1e-15 * (hi - lo + 1.0) {
            break;
        }
        let (gs, ss) = eval(xs, &mut evals);
        if gs < best_g {
            best_g = gs;
            best_x = xs;
        }
        if ss < 0.0 {
            x1 = xs;
            g1 = gs;
            s1 = ss;
        } else if ss > 0.0 {
            x2 = xs;
            g2 = gs;
            s2 = ss;
        } else {
            best_x = xs;
            best_g = gs;
            break;
        }
    }
    ConvexMin { x: best_x, value: best_g, at_upper_edge: false, evals }
}

pub(crate) struct NmResult {
    pub x: Vec<f64>,
    pub value: f64,
}

/// Nelder-Mead simplex search. Deterministic given the inputs; the initial
/// simplex is `x0` plus one displaced vertex per coordinate.
pub(crate) fn nelder_mead(
    f: &mut dyn FnMut(&[f64]) -> f64,
    x0: &[f64],
    steps: &[f64],
    max_iter: usize,
    ftol_rel: f64,
) -> NmResult {
    let n = x0.len();
    assert_eq!(steps.len(), n);
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), f(x0)));
    for k in 0..n {
        let mut v = x0.to_vec();
        v[k] += steps[k];
        let fv = f(&v);
        simplex.push((v, fv));
    }

    let centroid = |s: &[(Vec<f64>, f64)]| -> Vec<f64> {
        let mut c = vec![0.0; n];
        for (v, _) in &s[..n] {
            for (ci, vi) in c.iter_mut().zip(v) {
                *ci += vi;
            }
        }
        for ci in c.iter_mut() {
            *ci /= n as f64;
        }
        c
    };

    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        let best = simplex[0].1;
        let worst = simplex[n].1;
        if (worst - best).abs() <= ftol_rel * (best.abs() + 1e-300) {
            break;
        }
        let c = centroid(&simplex);
        let xr: Vec<f64> = c.iter().zip(&simplex[n].0).map(|(ci, wi)| ci + (ci - wi)).collect();
        let fr = f(&xr);
        if fr < simplex[0].1 {
            // try expansion
            let xe: Vec<f64> = c.iter().zip(&simplex[n].0).map(|(ci, wi)| ci + 2.0 * (ci - wi)).collect();
            let fe = f(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            // contraction, outside or inside
            let (xc, fc) = if fr < simplex[n].1 {
                let xc: Vec<f64> =
                    c.iter().zip(&xr).map(|(ci, ri)| ci + 0.5 * (ri - ci)).collect();
                let fc = f(&xc);
                (xc, fc)
            } else {
                let xc: Vec<f64> = c
                    .iter()
                    .zip(&simplex[n].0)
                    .map(|(ci, wi)| ci + 0.5 * (wi - ci))
                    .collect();
                let fc = f(&xc);
                (xc, fc)
            };
            if fc < simplex[n].1.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                // shrink toward the best vertex
                let x0 = simplex[0].0.clone();
                for v in simplex.iter_mut().skip(1) {
                    for (vi, bi) in v.0.iter_mut().zip(&x0) {
                        *vi = bi + 0.5 * (*vi - bi);
                    }
                    v.1 = f(&v.0);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    NmResult { x: simplex[0].0.clone(), value: simplex[0].1 }
}
