//! Numerical laboratory for negative-index media.
//!
//! - [`specfun`]: spherical/cylindrical Bessel machinery and vector spherical harmonics;
//! - [`media`]: sign-changing shells, push-forwards and complementary-media checks;
//! - [`layered_maxwell`]: per-mode Maxwell solver for radially layered media;
//! - [`three_sphere`]: boundary norms and three-sphere inequalities;
//! - [`carleman`]: conformal folding maps, Carleman weights and their structural claims;
//! - [`cli`]: scenario runner used by the `cloaklab` binary.

pub mod carleman;
pub mod cli;
pub mod layered_maxwell;
pub mod quad;
pub mod media;
pub mod specfun;
pub mod three_sphere;
