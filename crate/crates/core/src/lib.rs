//! Stability and bifurcation analysis for a delayed Lotka-Volterra
//! intraguild-predation model.
//!
//! The model couples a basal resource `x`, an intermediate predator `y`
//! feeding on it, and a top predator `z` feeding on both, with the resource
//! self-limitation acting after a delay `tau` (delayed logistic growth):
//!
//! ```text
//! x'(t) = [a0 - a1 x(t - tau) - a2 y(t) - a3 z(t)] x(t)
//! y'(t) = [-b0 + b1 x(t) - b3 z(t)] y(t)
//! z'(t) = [-c0 + c1 x(t) + c2 y(t)] z(t)
//! ```
//!
//! The crate computes the five non-negative equilibria in closed form,
//! classifies their stability at `tau = 0` (Routh-Hurwitz), derives the
//! critical delays at which conjugate characteristic roots cross the
//! imaginary axis (Hopf bifurcation thresholds), cross-checks those
//! thresholds with a brute-force spectral oracle, integrates the delay
//! system by the method of steps, and assembles bifurcation-diagram data
//! over the delay parameter.

pub mod branch;
pub mod critical_delay;
pub mod dde_sim;
pub mod error;
pub mod model;
pub mod presets;
pub mod spectrum_oracle;
pub mod stability;

pub use error::{Error, Result};
pub use model::{equilibria, equilibrium, rhs, Equilibrium, EquilibriumKind, ModelParams, StateTriple};
