//! The ten-parameter phase approximant
//!
//! ```text
//! Φₜ(ρ, r) = N/√D + q log D
//! N = α₀ + α₁r + α₂r² + α₃γρ² + α₄γρ²r
//! D = 1 + β₀w + β₁r + β₂r² + β₃ρ²,   w = √(1/K² + γ²ρ²/12)
//! ```
//!
//! with trial function `Ψ = e^{−Φₜ}` for the ground state and `z e^{−Φₜ}`
//! for the odd-parity state. Phases are evaluated together with their
//! partial derivatives in `ρ` (at fixed `r`) and `r` (at fixed `ρ`).

use crate::bloch_gb::w_mp;
use crate::error::{Error, Result};
use crate::units::StateLabel;
use std::fmt::Write as _;
use std::path::Path;

/// Which parameters are free during optimization.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// `β₀ = 0` and `q` fixed (normally `q = 1`; the strong-field `q = 0`
    /// branch uses the same mode).
    Eight,
    /// All ten parameters free.
    Ten,
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "8" | "eight" => Ok(Mode::Eight),
            "10" | "ten" => Ok(Mode::Ten),
            other => Err(Error::Domain(format!("mode must be 8 or 10, got '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialParams {
    pub alpha: [f64; 5],
    pub beta: [f64; 4],
    pub q: f64,
    pub mode: Mode,
    pub state: StateLabel,
}

/// Phase and its gradient in the `(ρ, r)` chart.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseValue {
    pub phase: f64,
    pub d_rho: f64,
    pub d_r: f64,
}

impl TrialParams {
    /// Exact Coulomb state at zero field: `Φ = r/K`.
    pub fn coulomb(state: StateLabel, mode: Mode) -> Self {
        let mut alpha = [0.0; 5];
        alpha[1] = 1.0 / state.principal() as f64;
        TrialParams { alpha, beta: [0.0; 4], q: 1.0, mode, state }
    }

    /// Starting point built from the zero-order semiclassical phase: with
    /// `β₃ = γ²/12` and `α₄ = α₁γ/12` the first term is `α₁ r √(1 + γ²ρ²/12)`.
    pub fn semiclassical_seed(gamma: f64, state: StateLabel, mode: Mode) -> Self {
        let mut p = Self::coulomb(state, mode);
        p.beta[3] = gamma * gamma / 12.0;
        p.alpha[4] = p.alpha[1] * gamma / 12.0;
        p
    }

    /// Starting point for strong fields. With `D = 1 + b²r²` and
    /// `N = α₁r + k b r² + (b/4)γρ²r` the phase tends to `k r + γρ²/4` far
    /// from the nucleus: a Landau Gaussian across the field and exponential
    /// decay along it. `b = √γ/2` puts the crossover at the Landau length;
    /// `k` is a rough longitudinal decay rate (`ln γ` for the ground state).
    pub fn strong_field_seed(gamma: f64, state: StateLabel, mode: Mode) -> Self {
        let mut p = Self::coulomb(state, mode);
        let b = gamma.sqrt() / 2.0;
        let k = if state.p == 0 { gamma.ln().max(1.0) } else { p.alpha[1] };
        p.beta[2] = b * b;
        p.alpha[2] = k * b;
        p.alpha[4] = b / 4.0;
        p
    }

    /// Free parameters in optimizer order.
    pub fn free_vector(&self) -> Vec<f64> {
        let mut v = self.alpha.to_vec();
        match self.mode {
            Mode::Eight => v.extend_from_slice(&self.beta[1..]),
            Mode::Ten => {
                v.extend_from_slice(&self.beta);
                v.push(self.q);
            }
        }
        v
    }

    pub fn with_free_vector(&self, x: &[f64]) -> Self {
        let mut p = self.clone();
        p.alpha.copy_from_slice(&x[..5]);
        match self.mode {
            Mode::Eight => {
                p.beta[0] = 0.0;
                p.beta[1..].copy_from_slice(&x[5..8]);
            }
            Mode::Ten => {
                p.beta.copy_from_slice(&x[5..9]);
                p.q = x[9];
            }
        }
        p
    }

    pub fn denominator(&self, rho: f64, r: f64, gamma: f64) -> f64 {
        let w = w_mp(gamma * rho, self.state);
        let b = &self.beta;
        1.0 + b[0] * w + b[1] * r + b[2] * r * r + b[3] * rho * rho
    }

    /// Cheap admissibility test. The betas `β₁..β₃` must be non-negative,
    /// which makes `D ≥ 1` everywhere in eight-mode. The phase must also
    /// grow at infinity: `α₄ ≥ 0` across the field and a positive leading
    /// coefficient (`α₂`, else `α₁`) along it.
    pub fn admissible(&self) -> bool {
        let finite = self.alpha.iter().chain(self.beta.iter()).all(|v| v.is_finite()) && self.q.is_finite();
        let [_, a1, a2, _, a4] = self.alpha;
        let growth = a4 >= 0.0 && (a2 > 0.0 || (a2 == 0.0 && a1 > 0.0));
        let finite = finite && growth;
        match self.mode {
            Mode::Eight => finite && self.beta[1..].iter().all(|&b| b >= 0.0),
            Mode::Ten => finite && self.beta[1..].iter().all(|&b| b >= 0.0) && 1.0 + self.beta[0] * self.w0() > 0.0,
        }
    }

    fn w0(&self) -> f64 {
        1.0 / self.state.principal() as f64
    }
}

/// `Φₜ` and its gradient at `(ρ, r)`, `0 ≤ ρ ≤ r`.
pub fn phase_eval(rho: f64, r: f64, p: &TrialParams, gamma: f64) -> Result<PhaseValue> {
    let [a0, a1, a2, a3, a4] = p.alpha;
    let [b0, b1, b2, b3] = p.beta;
    let w = w_mp(gamma * rho, p.state);
    let d = 1.0 + b0 * w + b1 * r + b2 * r * r + b3 * rho * rho;
    if !(d > 0.0) {
        return Err(Error::InvalidParams(format!("D = {d:e} at rho = {rho}, r = {r}")));
    }
    let g_rho2 = gamma * rho * rho;
    let n = a0 + a1 * r + a2 * r * r + a3 * g_rho2 + a4 * g_rho2 * r;
    let n_rho = 2.0 * gamma * rho * (a3 + a4 * r);
    let n_r = a1 + 2.0 * a2 * r + a4 * g_rho2;
    let w_rho = gamma * gamma * rho / (12.0 * w);
    let d_rho = b0 * w_rho + 2.0 * b3 * rho;
    let d_r = b1 + 2.0 * b2 * r;
    let sd = d.sqrt();
    let inv_d = 1.0 / d;
    let phase = n / sd + p.q * d.ln();
    let grad = |nx: f64, dx: f64| nx / sd - 0.5 * n * dx * inv_d / sd + p.q * dx * inv_d;
    Ok(PhaseValue { phase, d_rho: grad(n_rho, d_rho), d_r: grad(n_r, d_r) })
}

/// Trial wavefunction at `(ρ, z)`; odd in `z` for the odd-parity state.
pub fn wavefunction_eval(rho: f64, z: f64, p: &TrialParams, gamma: f64) -> Result<f64> {
    let r = rho.hypot(z);
    let ph = phase_eval(rho, r, p, gamma)?;
    let pre = if p.state.p == 1 { z } else { 1.0 };
    Ok(pre * (-ph.phase).exp())
}

/// Small-`r` slope of `Φₜ` on the axis:
/// `C = α₁κ + κ²(q − α₀κ/2)β₁` with `κ = (1 + β₀w(0))^{−1/2}`.
pub fn cusp(p: &TrialParams) -> f64 {
    let kappa = 1.0 / (1.0 + p.beta[0] * p.w0()).sqrt();
    p.alpha[1] * kappa + kappa * kappa * (p.q - 0.5 * p.alpha[0] * kappa) * p.beta[1]
}

/// A phase `Φ(ρ, r)` with `ψ = zᵖ e^{−Φ}`, as consumed by the energy
/// functional.
pub trait TrialPhase: Sync {
    fn state(&self) -> StateLabel;
    fn phase(&self, rho: f64, r: f64) -> Result<PhaseValue>;
}

/// The approximant at a fixed field.
#[derive(Clone, Debug)]
pub struct Approximant {
    pub params: TrialParams,
    pub gamma: f64,
}

impl TrialPhase for Approximant {
    fn state(&self) -> StateLabel {
        self.params.state
    }
    fn phase(&self, rho: f64, r: f64) -> Result<PhaseValue> {
        phase_eval(rho, r, &self.params, self.gamma)
    }
}

/// The parameter-free ground-state functions `Ψ₀` and `Ψ₁`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParameterFree {
    /// `e^{−rw} / (w(1 + w))`
    Psi0,
    /// `e^{−rw}`
    Psi1,
}

#[derive(Clone, Copy, Debug)]
pub struct ParameterFreePhase {
    pub kind: ParameterFree,
    pub gamma: f64,
}

impl TrialPhase for ParameterFreePhase {
    fn state(&self) -> StateLabel {
        StateLabel::GROUND
    }
    fn phase(&self, rho: f64, r: f64) -> Result<PhaseValue> {
        let g2 = self.gamma * self.gamma;
        let w = (1.0 + g2 * rho * rho / 12.0).sqrt();
        let w_rho = g2 * rho / (12.0 * w);
        let (log_part, log_rho) = match self.kind {
            ParameterFree::Psi0 => ((w * (1.0 + w)).ln(), w_rho * (1.0 + 2.0 * w) / (w * (1.0 + w))),
            ParameterFree::Psi1 => (0.0, 0.0),
        };
        Ok(PhaseValue { phase: r * w + log_part, d_rho: r * w_rho + log_rho, d_r: w })
    }
}

const KEYS: [&str; 10] = ["alpha0", "alpha1", "alpha2", "alpha3", "alpha4", "beta0", "beta1", "beta2", "beta3", "q"];

/// Writes `key = value` lines (`state`, `mode`, `gamma` and the ten parameters).
pub fn write_params(p: &TrialParams, gamma: f64) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "state = {}", p.state.name());
    let _ = writeln!(out, "mode = {}", if p.mode == Mode::Eight { 8 } else { 10 });
    let _ = writeln!(out, "gamma = {gamma:e}");
    let vals = p.alpha.iter().chain(p.beta.iter()).chain(std::iter::once(&p.q));
    for (k, v) in KEYS.iter().zip(vals) {
        let _ = writeln!(out, "{k} = {v:e}");
    }
    out
}

/// Parses one parameter block; returns the parameters and the field.
pub fn parse_params(text: &str) -> Result<(TrialParams, f64)> {
    let mut p = TrialParams::coulomb(StateLabel::GROUND, Mode::Eight);
    let mut gamma = None;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let loc = || format!("line {}", lineno + 1);
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse { location: loc(), message: "expected key = value".into() })?;
        let (k, v) = (k.trim(), v.trim());
        let num = || {
            v.parse::<f64>()
                .map_err(|_| Error::Parse { location: loc(), message: format!("bad number '{v}' for {k}") })
        };
        match k {
            "state" => {
                p.state = v.parse().map_err(|e: Error| Error::Parse { location: loc(), message: e.to_string() })?
            }
            "mode" => p.mode = v.parse().map_err(|e: Error| Error::Parse { location: loc(), message: e.to_string() })?,
            "gamma" => gamma = Some(num()?),
            _ => {
                let idx = KEYS
                    .iter()
                    .position(|&key| key == k)
                    .ok_or_else(|| Error::Parse { location: loc(), message: format!("unknown key '{k}'") })?;
                let x = num()?;
                match idx {
                    0..=4 => p.alpha[idx] = x,
                    5..=8 => p.beta[idx - 5] = x,
                    _ => p.q = x,
                }
            }
        }
    }
    let gamma = gamma.ok_or_else(|| Error::Parse { location: "end of block".into(), message: "missing gamma".into() })?;
    Ok((p, gamma))
}

/// Warm-start file: parameter blocks separated by blank lines.
pub fn read_warm_starts(path: &Path) -> Result<Vec<(TrialParams, f64)>> {
    let text = std::fs::read_to_string(path)?;
    parse_warm_starts(&text)
}

pub fn parse_warm_starts(text: &str) -> Result<Vec<(TrialParams, f64)>> {
    let mut out = Vec::new();
    let mut block = String::new();
    for line in text.lines().chain(std::iter::once("")) {
        if line.trim().is_empty() {
            if block.lines().any(|l| !l.trim().is_empty() && !l.trim_start().starts_with('#')) {
                out.push(parse_params(&block)?);
            }
            block.clear();
        } else {
            block.push_str(line);
            block.push('\n');
        }
    }
    Ok(out)
}

pub fn write_warm_starts(entries: &[(TrialParams, f64)]) -> String {
    entries.iter().map(|(p, g)| write_params(p, *g)).collect::<Vec<_>>().join("\n")
}

/// The checked-in warm starts (`data/warm_starts.txt`), regenerated by the
/// `warm_starts` example.
pub fn bundled_warm_starts() -> Result<Vec<(TrialParams, f64)>> {
    parse_warm_starts(include_str!("../data/warm_starts.txt"))
}

/// The stored entry for `(state, mode)` closest to `gamma` on a log scale.
/// In eight-mode `q` is part of the branch and must match `q`; in ten-mode
/// it is free and `q` is ignored.
pub fn nearest_warm_start(
    entries: &[(TrialParams, f64)],
    state: StateLabel,
    mode: Mode,
    q: f64,
    gamma: f64,
) -> Option<(TrialParams, f64)> {
    let key = |g: f64| (g.max(1e-6)).ln();
    entries
        .iter()
        .filter(|(p, _)| p.state == state && p.mode == mode && (mode == Mode::Ten || p.q == q))
        .min_by(|a, b| (key(a.1) - key(gamma)).abs().total_cmp(&(key(b.1) - key(gamma)).abs()))
        .cloned()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> TrialParams {
        TrialParams {
            alpha: [0.3, 1.1, 0.05, 0.02, 0.07],
            beta: [0.01, 0.2, 0.03, 0.4],
            q: 0.9,
            mode: Mode::Ten,
            state: StateLabel::GROUND,
        }
    }

    #[test]
    fn coulomb_phase_is_r() {
        let p = TrialParams::coulomb(StateLabel::GROUND, Mode::Eight);
        let v = phase_eval(0.4, 1.3, &p, 0.0).unwrap();
        assert!((v.phase - 1.3).abs() < 1e-15);
        assert!((wavefunction_eval(0.4, 0.7, &p, 0.0).unwrap() - (-(0.4f64.hypot(0.7))).exp()).abs() < 1e-15);
        assert_eq!(cusp(&p), 1.0);
    }

    #[test]
    fn cusp_matches_axis_slope() {
        let p = sample();
        let h = 1e-6;
        let f = |r: f64| phase_eval(0.0, r, &p, 1.0).unwrap().phase;
        let slope = (-f(2.0 * h) + 4.0 * f(h) - 3.0 * f(0.0)) / (2.0 * h);
        assert!((slope - cusp(&p)).abs() < 1e-8, "{slope} vs {}", cusp(&p));
    }

    #[test]
    fn parity() {
        let mut p = sample();
        p.state = StateLabel::TWO_P0;
        let a = wavefunction_eval(0.3, 0.8, &p, 2.0).unwrap();
        let b = wavefunction_eval(0.3, -0.8, &p, 2.0).unwrap();
        assert!((a + b).abs() < 1e-16);
        p.state = StateLabel::GROUND;
        let a = wavefunction_eval(0.3, 0.8, &p, 2.0).unwrap();
        let b = wavefunction_eval(0.3, -0.8, &p, 2.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn psi0_pieces_from_parameters() {
        // The non-logarithmic term with β₀ = 0 and the logarithmic term with
        // β₀ = 1 reproduce the two pieces of the zero-order phase.
        let gamma = 1.7;
        let mut p = TrialParams::coulomb(StateLabel::GROUND, Mode::Ten);
        p.alpha[4] = gamma / 12.0;
        p.beta[3] = gamma * gamma / 12.0;
        let free = ParameterFreePhase { kind: ParameterFree::Psi0, gamma };
        for (rho, r) in [(0.1, 0.3), (0.7, 1.5), (2.0, 2.5)] {
            let w = (1.0 + gamma * gamma * rho * rho / 12.0).sqrt();
            let q1 = phase_eval(rho, r, &TrialParams { q: 0.0, ..p.clone() }, gamma).unwrap().phase;
            assert!((q1 - r * w).abs() < 1e-13);
            let with_b0 = TrialParams { beta: [1.0, 0.0, 0.0, p.beta[3]], ..p.clone() };
            let d = with_b0.denominator(rho, r, gamma);
            let exact = free.phase(rho, r).unwrap().phase;
            assert!((r * w + d.ln() - exact).abs() < 1e-13);
        }
    }

    #[test]
    fn warm_start_roundtrip() {
        let p = sample();
        let text = write_warm_starts(&[(p.clone(), 0.5), (TrialParams::coulomb(StateLabel::TWO_P0, Mode::Eight), 2.0)]);
        let back = parse_warm_starts(&text).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0].0, p);
        assert_eq!(back[0].1, 0.5);
        assert_eq!(back[1].0.state, StateLabel::TWO_P0);
        assert!(matches!(parse_params("gamma = x"), Err(Error::Parse { .. })));
    }
}
