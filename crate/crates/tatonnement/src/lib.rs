//! Numerical laboratory for price adjustment dynamics on exchange economies.
//!
//! Prices live on the positive part of the unit sphere. The crate provides
//! constructible economy families (Cobb-Douglas, Leontief, linearized fields),
//! classical first-order price adjustment, a momentum-style second-order
//! mechanism with closed-form sphere renormalization, a seller-level agent
//! simulator whose aggregate reproduces the damped update exactly, and
//! analysis tools: equilibrium search, tangent-space spectra, decay-rate
//! fits, and two-point cycle detection against the cycle balance law.

pub mod analysis;
pub mod dynamics;
pub mod economy;
pub mod error;
pub mod geometry;
pub mod io;

pub use error::Error;

pub type Result<T> = std::result::Result<T, Error>;
