//! Numerical calculus for zonal translation-invariant valuations on convex bodies.
//!
//! The crate is organised bottom-up:
//!
//! - [`geometry`]: convex bodies, support functions, metric projection.
//! - [`dspace`]: weighted density spaces `D^a` on `(-1, 1)`.
//! - [`transforms`]: the transform pair `I_a` / `J_a` between densities and cone profiles.
//! - [`measures`]: zonal pushforwards of area measures, closed-form and Monte Carlo.
//! - [`valuations`]: evaluation of `Phi_j(f)` and the Lefschetz operator.
//! - [`reconstruct`]: recovery of a density from values on cones.
//! - [`functional`]: the R-transform and valuations on the `u_t` family of convex functions.

pub mod dspace;
pub mod error;
pub mod functional;
pub mod geometry;
pub mod interp;
pub mod io;
pub mod measures;
pub mod point;
pub mod quadrature;
pub mod reconstruct;
pub mod special;
pub mod tolerances;
pub mod transforms;
pub mod valuations;

pub use error::{Result, ZonalError};
pub use point::Pt;
