//! Product quadrature in polar coordinates `(r, θ)` on the quarter plane
//! `r ≥ 0`, `0 ≤ θ ≤ π/2` (the lower half space follows from parity).
//!
//! In these coordinates the trial functions are smooth at the nucleus, so
//! composite Gauss-Legendre panels converge exponentially. Radial panels are
//! geometric below the density peak and slowly widening beyond it; angular panels
//! are geometric towards the field axis, where strong fields squeeze the
//! density into a narrow cone.

use crate::approximant::TrialPhase;
use gauss_quad::GaussLegendre;
use std::f64::consts::FRAC_PI_2;

/// One node of the product rule. `weight` already contains the volume
/// element `2 · 2π r² sin θ` (both half spaces).
#[derive(Clone, Copy, Debug)]
pub struct QuadNode {
    pub rho: f64,
    pub z: f64,
    pub r: f64,
    pub weight: f64,
}

#[derive(Clone, Debug)]
pub struct QuadratureGrid {
    pub nodes: Vec<QuadNode>,
    /// Gauss points per panel.
    pub order: usize,
    pub radial_edges: Vec<f64>,
    pub angular_edges: Vec<f64>,
}

/// Where the density lives: innermost peak radius, outer cutoff and the
/// narrowest angular width that must be resolved.
#[derive(Clone, Copy, Debug)]
pub struct Extent {
    /// Smallest and largest radius at which a ray's density peaks.
    pub r_peak: f64,
    pub r_peak_outer: f64,
    pub r_max: f64,
    pub theta_min: f64,
}

/// Log-density drop (in e-folds) beyond which the integrand is discarded.
const CUTOFF: f64 = 92.0;

impl Extent {
    /// Scans rays of the trial density `r² ψ²` to find its support.
    pub fn of_trial(trial: &dyn TrialPhase, gamma: f64) -> Extent {
        let p = trial.state().p;
        let thetas: [f64; 6] = [0.0, 0.15, 0.4, 0.8, 1.2, 1.45];
        let mut profiles = Vec::with_capacity(thetas.len());
        let mut global_max = f64::NEG_INFINITY;
        for &th in &thetas {
            let (s, c) = th.sin_cos();
            let mut prof = Vec::new();
            let mut r = 1e-5;
            while r < 1e5 {
                let ld = match trial.phase(r * s, r) {
                    Ok(ph) => {
                        let mut l = 2.0 * r.ln() - 2.0 * ph.phase;
                        if p == 1 {
                            l += 2.0 * (r * c).ln();
                        }
                        l
                    }
                    Err(_) => f64::NEG_INFINITY,
                };
                if ld > global_max {
                    global_max = ld;
                }
                prof.push((r, ld));
                // Stop once the ray has decayed far below its own maximum.
                let own_max = prof.iter().map(|x| x.1).fold(f64::NEG_INFINITY, f64::max);
                if ld < own_max - CUTOFF - 10.0 && r > 1e-3 {
                    break;
                }
                r *= 1.04;
            }
            profiles.push(prof);
        }
        let mut r_max: f64 = 0.0;
        let mut r_peak = f64::INFINITY;
        let mut r_peak_outer: f64 = 0.0;
        for prof in &profiles {
            let (rp, lp) = prof.iter().cloned().fold((0.0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
            if lp > global_max - 30.0 {
                r_peak = r_peak.min(rp);
                r_peak_outer = r_peak_outer.max(rp);
            }
            for &(r, l) in prof {
                if l > global_max - CUTOFF {
                    r_max = r_max.max(r);
                }
            }
        }
        if !r_peak.is_finite() || r_peak <= 0.0 {
            r_peak = 1.0;
        }
        r_peak_outer = r_peak_outer.clamp(r_peak, r_max.max(r_peak));
        r_max = r_max.max(2.0 * r_peak_outer);
        // Transverse width at the outer radius: where the density near the
        // equator has dropped well below the axis value.
        let transverse = if gamma > 0.0 { (8.0 / gamma).sqrt().min(r_max) } else { r_max };
        let theta_min = (transverse / r_max).clamp(1e-6, 1.0);
        Extent { r_peak, r_peak_outer, r_max, theta_min }
    }
}

impl QuadratureGrid {
    pub fn new(extent: Extent, order: usize) -> QuadratureGrid {
        let Extent { r_peak, r_peak_outer, r_max, theta_min } = extent;
        let mut radial = vec![0.0];
        let inner = 12;
        for k in (0..inner).rev() {
            radial.push(r_peak / 2f64.powi(k as i32 + 1));
        }
        radial.push(r_peak);
        // Geometric panels continue up to the outermost peak, covering the
        // crossover from an isotropic core to a narrow cone.
        let mut edge = r_peak;
        while 2.0 * edge < r_peak_outer {
            edge *= 2.0;
            radial.push(edge);
        }
        if r_peak_outer > edge * 1.01 {
            radial.push(r_peak_outer);
            edge = r_peak_outer;
        }
        // Beyond the peaks panel widths start at the peak radius and grow
        // by half each step.
        let mut width = r_peak_outer;
        while edge < r_max {
            edge += width;
            width *= 1.5;
            radial.push(edge);
        }
        let levels = ((FRAC_PI_2 / theta_min).log2().ceil() as i32 + 3).clamp(4, 40);
        let mut angular: Vec<f64> = (0..=levels).rev().map(|k| FRAC_PI_2 / 2f64.powi(k)).collect();
        angular.insert(0, 0.0);
        let rule = GaussLegendre::new(order).expect("Gauss-Legendre order >= 2");
        let panel = |a: f64, b: f64| -> Vec<(f64, f64)> {
            let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
            rule.iter().map(|(x, w)| (mid + half * x, half * w)).collect()
        };
        let rs: Vec<(f64, f64)> = radial.windows(2).flat_map(|e| panel(e[0], e[1])).collect();
        let ts: Vec<(f64, f64)> = angular.windows(2).flat_map(|e| panel(e[0], e[1])).collect();
        let four_pi = 4.0 * std::f64::consts::PI;
        let mut nodes = Vec::with_capacity(rs.len() * ts.len());
        for &(r, wr) in &rs {
            for &(t, wt) in &ts {
                let (s, c) = t.sin_cos();
                nodes.push(QuadNode { rho: r * s, z: r * c, r, weight: four_pi * r * r * s * wr * wt });
            }
        }
        QuadratureGrid { nodes, order, radial_edges: radial, angular_edges: angular }
    }

    pub fn for_trial(trial: &dyn TrialPhase, gamma: f64, order: usize) -> QuadratureGrid {
        Self::new(Extent::of_trial(trial, gamma), order)
    }

    /// Same panels with twice the Gauss points per panel.
    pub fn doubled(&self, extent: Extent) -> QuadratureGrid {
        Self::new(extent, 2 * self.order)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_integrate_gaussian() {
        // ∫ e^{-r²} dV = π^{3/2}
        let ext = Extent { r_peak: 1.0, r_peak_outer: 1.0, r_max: 12.0, theta_min: 0.1 };
        let g = QuadratureGrid::new(ext, 10);
        let s: f64 = g.nodes.iter().map(|n| n.weight * (-n.r * n.r).exp()).sum();
        assert!((s / std::f64::consts::PI.powf(1.5) - 1.0).abs() < 1e-13);
        assert!(g.nodes.iter().all(|n| n.weight > 0.0));
    }
}
