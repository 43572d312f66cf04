//! Unit conventions and the mass-scaling map onto the infinite-mass problem.
//!
//! Energies are in electron Rydbergs, lengths in Bohr radii and the field
//! strength `gamma` in atomic units (B / 2.35e9 G). With these units the
//! infinite-mass Hamiltonian for the `m = 0` sector reads
//! `-Δ - 2/r + γ²ρ²/4`.
//!
//! A system with reduced mass `μ` maps onto the reference problem through
//! `E(γ) = (μ/mₑ) E∞((mₑ/μ)² γ)`; quadrupole moments scale with `(mₑ/μ)²`
//! and critical fields with `(μ/mₑ)²`.

use crate::error::{Error, Result};
use std::fmt;

/// Proton-to-electron mass ratio used for hydrogen.
pub const HYDROGEN_MASS_RATIO: f64 = 1836.152673;

/// Heavy-to-light mass ratio `m₂/m₁`, with the static-nucleus limit kept exact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MassRatio {
    Infinite,
    Finite(f64),
}

/// Particle content of a neutral two-body system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemSpec {
    pub mass_ratio: MassRatio,
    /// Charge of the light particle in units of `e`; fixed to one.
    pub charge: f64,
}

impl SystemSpec {
    pub fn infinite() -> Self {
        SystemSpec { mass_ratio: MassRatio::Infinite, charge: 1.0 }
    }

    pub fn hydrogen() -> Self {
        SystemSpec { mass_ratio: MassRatio::Finite(HYDROGEN_MASS_RATIO), charge: 1.0 }
    }

    pub fn positronium() -> Self {
        SystemSpec { mass_ratio: MassRatio::Finite(1.0), charge: 1.0 }
    }

    pub fn with_ratio(ratio: f64) -> Result<Self> {
        if !(ratio > 0.0) || !ratio.is_finite() {
            return Err(Error::Domain(format!("mass ratio must be positive, got {ratio}")));
        }
        Ok(SystemSpec { mass_ratio: MassRatio::Finite(ratio), charge: 1.0 })
    }

    /// `μ/mₑ`; exactly one for an infinitely heavy partner.
    pub fn mu_ratio(&self) -> f64 {
        match self.mass_ratio {
            MassRatio::Infinite => 1.0,
            MassRatio::Finite(m) => m / (1.0 + m),
        }
    }

    /// Effective charge `μ/m₁ - μ/m₂` entering the linear Zeeman term.
    pub fn e_eff(&self) -> f64 {
        match self.mass_ratio {
            MassRatio::Infinite => -1.0,
            MassRatio::Finite(m) => (1.0 - m) / (1.0 + m),
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self.mass_ratio, MassRatio::Infinite)
    }

    /// `(mₑ/μ)²`, the factor that maps the field onto the reference problem.
    fn field_factor(&self) -> f64 {
        match self.mass_ratio {
            MassRatio::Infinite => 1.0,
            MassRatio::Finite(m) => {
                let inv = (1.0 + m) / m;
                inv * inv
            }
        }
    }
}

impl fmt::Display for SystemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.mass_ratio {
            MassRatio::Infinite => write!(f, "inf"),
            MassRatio::Finite(m) => write!(f, "ratio={m}"),
        }
    }
}

impl std::str::FromStr for SystemSpec {
    type Err = Error;

    /// Accepts `inf`, `hydrogen`, `positronium` or `ratio=R`.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinite" => Ok(SystemSpec::infinite()),
            "hydrogen" | "h" => Ok(SystemSpec::hydrogen()),
            "positronium" | "ps" => Ok(SystemSpec::positronium()),
            other => match other.strip_prefix("ratio=") {
                Some(v) => {
                    let r: f64 = v
                        .parse()
                        .map_err(|_| Error::Domain(format!("bad mass ratio '{v}'")))?;
                    SystemSpec::with_ratio(r)
                }
                None => Err(Error::Domain(format!("unknown system '{s}'"))),
            },
        }
    }
}

/// Magnetic quantum number and parity exponent of a state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StateLabel {
    pub m: i32,
    pub p: u8,
}

impl StateLabel {
    pub const GROUND: StateLabel = StateLabel { m: 0, p: 0 };
    pub const TWO_P0: StateLabel = StateLabel { m: 0, p: 1 };

    pub fn new(m: i32, p: u8) -> Result<Self> {
        if p > 1 {
            return Err(Error::Domain(format!("parity exponent must be 0 or 1, got {p}")));
        }
        Ok(StateLabel { m, p })
    }

    /// Principal quantum number of the field-free state the label connects to.
    pub fn principal(&self) -> u32 {
        self.m.unsigned_abs() + self.p as u32 + 1
    }

    pub fn name(&self) -> String {
        match (self.m, self.p) {
            (0, 0) => "1s0".into(),
            (0, 1) => "2p0".into(),
            (m, p) => format!("m{m}p{p}"),
        }
    }
}

impl fmt::Display for StateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl std::str::FromStr for StateLabel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "1s0" | "1s" => Ok(StateLabel::GROUND),
            "2p0" | "2p" => Ok(StateLabel::TWO_P0),
            _ => Err(Error::Domain(format!("unknown state '{s}' (expected 1s0 or 2p0)"))),
        }
    }
}

/// `μ/mₑ` for a raw mass ratio.
pub fn reduced_mass_ratio(mass_ratio: MassRatio) -> Result<f64> {
    match mass_ratio {
        MassRatio::Infinite => Ok(1.0),
        MassRatio::Finite(m) if m > 0.0 && m.is_finite() => Ok(m / (1.0 + m)),
        MassRatio::Finite(m) => Err(Error::Domain(format!("mass ratio must be positive, got {m}"))),
    }
}

/// Field at which the infinite-mass problem has to be solved.
pub fn to_reference_problem(gamma: f64, spec: &SystemSpec) -> f64 {
    gamma * spec.field_factor()
}

/// Finite-mass energy from the reference energy at the scaled field.
pub fn energy_from_reference(eps_ref: f64, spec: &SystemSpec) -> f64 {
    spec.mu_ratio() * eps_ref
}

/// Finite-mass quadrupole moment from the reference one at the scaled field.
pub fn quadrupole_from_reference(q_ref: f64, spec: &SystemSpec) -> f64 {
    q_ref * spec.field_factor()
}

/// Finite-mass critical field from the reference critical field.
pub fn critical_field_scaled(gamma_c_ref: f64, spec: &SystemSpec) -> f64 {
    gamma_c_ref / spec.field_factor()
}

/// Binding energy `γ - E` (Ry).
pub fn binding_energy(energy: f64, gamma: f64) -> f64 {
    gamma - energy
}

/// Asymptotic strong-field estimate `γ - log²γ` together with a flag that
/// is set when `γ` lies outside its regime of validity.
pub fn hh_estimate(gamma: f64) -> (f64, bool) {
    let l = gamma.ln();
    (gamma - l * l, gamma <= 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduced_mass_limits() {
        assert_eq!(reduced_mass_ratio(MassRatio::Infinite).unwrap(), 1.0);
        assert_eq!(reduced_mass_ratio(MassRatio::Finite(1.0)).unwrap(), 0.5);
        assert!(reduced_mass_ratio(MassRatio::Finite(0.0)).is_err());
        let h = SystemSpec::hydrogen().mu_ratio();
        assert!((1.0 / h - 1.000544617).abs() < 1e-8);
    }

    #[test]
    fn scaled_fields() {
        assert_eq!(to_reference_problem(1.0, &SystemSpec::infinite()), 1.0);
        assert!((to_reference_problem(1.0, &SystemSpec::positronium()) - 4.0).abs() < 1e-15);
        let ps = critical_field_scaled(2.065211858, &SystemSpec::positronium());
        assert!((ps - 0.5163029645).abs() < 1e-10);
    }

    #[test]
    fn effective_charge() {
        assert_eq!(SystemSpec::infinite().e_eff(), -1.0);
        assert_eq!(SystemSpec::positronium().e_eff(), 0.0);
    }

    #[test]
    fn parse_specs() {
        assert_eq!("inf".parse::<SystemSpec>().unwrap(), SystemSpec::infinite());
        assert_eq!(
            "ratio=3670.48".parse::<SystemSpec>().unwrap().mass_ratio,
            MassRatio::Finite(3670.48)
        );
        assert!("ratio=-1".parse::<SystemSpec>().is_err());
        assert!("2p1".parse::<StateLabel>().is_err());
    }
}
