//! Detection of steered latent nonclassicality in two-mode click statistics.
//!
//! The model under test is the local-hidden-classical-states (LHCS) model: a
//! hidden classical light state is measured locally on both sides, Alice with
//! a displaced on-off detector at two LO amplitudes, Bob with a two-detector
//! click array. The full set of such models is the convex hull of a
//! two-parameter vertex family, so membership is decided by supporting
//! hyperplanes: a witness λ with λ·𝓟 > sup λ·M certifies a violation. When
//! every click distribution conditioned on Alice's outcome is itself
//! classical, the violation demonstrates *steering of latent
//! nonclassicality* — correlations no classical state can carry even though
//! neither side's marginal statistics are nonclassical on their own.
//!
//! The crate provides the phase-averaged two-mode-squeezed-vacuum physics
//! ([`physics`]), the vertex family and its 8-dimensional coordinates
//! ([`geometry`]), witness evaluation and search by hull facets or LP
//! separation ([`witness`], [`hull`], [`lp`]), significance machinery and a
//! seeded event simulator ([`stats`]), LO-amplitude optimization
//! ([`optimizer`]), and built-in benchmark cases ([`cases`]).

pub mod cases;
pub mod error;
pub mod geometry;
pub mod hull;
pub mod lp;
mod nm;
pub mod optimizer;
pub mod physics;
pub mod stats;
pub mod witness;

pub use error::{Error, Result};
