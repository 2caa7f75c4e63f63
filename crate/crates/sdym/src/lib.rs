//! Discrete and Backlund transformations of the self-dual Yang-Mills system
//! in Yang's matrix formulation, for the rank-one gauge algebra.
//!
//! The crate provides, in dependency order:
//!
//! - [`jet`]: truncated Taylor arithmetic in the four complex coordinates
//!   (y, ybar, z, zbar), the numerical substrate for every identity check;
//! - [`lie2`]: 2x2 matrices of jets, Gauss (triangular) factorization and the
//!   sl2 structure constants;
//! - [`seeds`]: exact polynomial seed solutions built from gauge factors, and
//!   the radial instanton data;
//! - [`backlund`]: the left and right discrete transformations, their
//!   composition, and the path-integrated potentials they require;
//! - [`charge`]: topological charge densities, radial profiles and total
//!   charge integration;
//! - [`verify`]: a residual-based identity harness producing deterministic
//!   machine-readable reports.

pub mod backlund;
pub mod charge;
pub mod error;
pub mod jet;
pub mod lie2;
pub mod poly;
pub mod quadrature;
pub mod seeds;
pub mod verify;

pub use error::{Result, SdymError};
pub use jet::{BasePoint, Jet, RealSlicePoint, Variable};
