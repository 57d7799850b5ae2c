//! Numerical laboratory for frictional point contact through the G-spot
//! (dynamic jam) singularity.
//!
//! * [`ring`]: generic scalars (floats, rationals, jets, δ-series).
//! * [`contact`]: contact systems, Lie-derivative quantities and the built-ins.
//! * [`sim`]: stiff simulation of the compliant regularization with events.
//! * [`gspot`]: G-spot location, case taxonomy, singular flow, fast spectrum.
//! * [`canard`]: polynomial expansion of the distinguished trajectory.
//! * [`hypergeo`]: Γ, ₁F₂, the perturbation function Θ and the outcome rule.
//! * [`experiments`]: reproducible sweeps, CSV emission and configuration.

pub mod canard;
pub mod contact;
pub mod experiments;
pub mod gspot;
pub mod hypergeo;
pub mod linalg;
pub mod ring;
pub mod sim;
