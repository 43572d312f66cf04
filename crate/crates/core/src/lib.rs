//! Neutral two-body Coulomb systems at rest in a uniform magnetic field.
//!
//! Three engines cross-check each other:
//!
//! * [`rb_pt`] and [`resummation`]: exact rational perturbation theory in
//!   `γ²` and its Padé-Borel sum;
//! * [`approximant`] and [`variational`]: a compact ten-parameter trial
//!   function optimized by a derivative-free simplex search;
//! * [`mesh_oracle`]: a spectral Galerkin eigensolver used as reference.
//!
//! [`units`] maps any mass ratio onto the static-nucleus problem and
//! [`bloch_gb`] holds the closed-form semiclassical phases.

pub mod error;
pub mod units;
pub mod rb_pt;
pub mod resummation;
pub mod bloch_gb;
pub mod approximant;
pub mod variational;
pub mod mesh_oracle;
pub mod cli;

pub use error::{Error, Result};
