//! Numerics for the classical Jaynes-Cummings-Gaudin model: commuting flows,
//! classical Bethe roots, focus-focus normal forms, soliton solutions on the
//! pinched torus, spectral-curve actions and the symplectic invariants of the
//! focus-focus fibration.

pub mod actions;
pub mod bethe;
pub mod error;
pub mod invariants;
pub mod model;
pub mod normal;
pub mod ode;
pub mod poly;
pub mod quad;
pub mod separated;
pub mod soliton;

pub use error::{Error, Result};
pub use num_complex::Complex64;
