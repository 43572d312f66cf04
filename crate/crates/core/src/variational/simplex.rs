//! Nelder-Mead simplex search with dimension-adapted coefficients
//! (Gao and Han), which behaves much better than the textbook constants in
//! eight to ten dimensions.

#[derive(Clone, Debug)]
pub struct SimplexOutcome {
    pub x: Vec<f64>,
    pub f: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Minimizes `f` from `x0` with initial edge lengths `steps`.
///
/// Stops when the spread of function values over the simplex is below
/// `ftol` (absolute) or after `max_evals` evaluations. Infeasible points
/// should return `f64::INFINITY`.
pub fn minimize<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    steps: &[f64],
    ftol: f64,
    max_evals: usize,
) -> SimplexOutcome {
    let n = x0.len();
    let nf = n as f64;
    let (alpha, beta, gamma, delta) = (1.0, 1.0 + 2.0 / nf, 0.75 - 0.5 / nf, 1.0 - 1.0 / nf);
    let mut pts: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += steps[i];
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| f(p)).collect();
    let mut evals = n + 1;
    let mut converged = false;
    let combine = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect() };
    while evals < max_evals {
        let mut idx: Vec<usize> = (0..=n).collect();
        idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        pts = idx.iter().map(|&i| pts[i].clone()).collect();
        vals = idx.iter().map(|&i| vals[i]).collect();
        if vals[n].is_finite() && (vals[n] - vals[0]).abs() <= ftol {
            converged = true;
            break;
        }
        let mut centroid = vec![0.0; n];
        for p in &pts[..n] {
            for (c, v) in centroid.iter_mut().zip(p) {
                *c += v / nf;
            }
        }
        let worst = pts[n].clone();
        // x_r = c + α(c − x_worst)
        let xr = combine(&centroid, &worst, -alpha);
        let fr = f(&xr);
        evals += 1;
        if fr < vals[0] {
            let xe = combine(&centroid, &worst, -alpha * beta);
            let fe = f(&xe);
            evals += 1;
            if fe < fr {
                pts[n] = xe;
                vals[n] = fe;
            } else {
                pts[n] = xr;
                vals[n] = fr;
            }
            continue;
        }
        if fr < vals[n - 1] {
            pts[n] = xr;
            vals[n] = fr;
            continue;
        }
        let (xc, fc) = if fr < vals[n] {
            let xc = combine(&centroid, &worst, -alpha * gamma);
            let fc = f(&xc);
            (xc, fc)
        } else {
            let xc = combine(&centroid, &worst, gamma);
            let fc = f(&xc);
            (xc, fc)
        };
        evals += 1;
        if fc < vals[n].min(fr) {
            pts[n] = xc;
            vals[n] = fc;
            continue;
        }
        // Shrink towards the best vertex.
        let best = pts[0].clone();
        for i in 1..=n {
            pts[i] = combine(&best, &pts[i], delta);
            vals[i] = f(&pts[i]);
        }
        evals += n;
    }
    let (bi, _) = vals.iter().enumerate().fold((0, f64::INFINITY), |a, (i, &v)| if v < a.1 { (i, v) } else { a });
    SimplexOutcome { x: pts[bi].clone(), f: vals[bi], evaluations: evals, converged }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let out = minimize(f, &[-1.2, 1.0], &[0.1, 0.1], 1e-16, 10_000);
        assert!((out.x[0] - 1.0).abs() < 1e-5 && (out.x[1] - 1.0).abs() < 1e-5, "{:?}", out.x);
    }

    #[test]
    fn quadratic_in_eight_dims() {
        let f = |x: &[f64]| x.iter().enumerate().map(|(i, v)| (i as f64 + 1.0) * (v - 0.5).powi(2)).sum::<f64>();
        let out = minimize(f, &[0.0; 8], &[0.2; 8], 1e-18, 50_000);
        assert!(out.f < 1e-12, "{}", out.f);
    }
}
