//! Exact-arithmetic engine for Γ-series solution bases of A-hypergeometric
//! (GKZ) systems and for the algebraic closed forms `f^r · g` attached to the
//! one-parameter families of algebraic Appell, Lauricella and Horn functions.
//!
//! Everything is computed over the Gaussian rationals — there is no floating
//! point anywhere, so every identity check is exact and a failure always comes
//! with a concrete mismatch certificate (the lowest monomial where two series
//! disagree, with both coefficients).
//!
//! Module map:
//! - [`scalars`]: Gaussian-rational arithmetic and the reciprocal-Gamma ratio
//!   kernel behind every Γ-series coefficient.
//! - [`pseries`]: truncated multivariate Puiseux series on a ramified exponent
//!   grid (mul, invert, rational powers, θ-operators, monomial division).
//! - [`geometry`]: lattices of relations, simplex volumes, γ-vector
//!   enumeration, bounded normality probe.
//! - [`gammaseries`]: Γ-series construction, dehomogenization, and exact
//!   ∂/Euler/structure operator action on homogenized series.
//! - [`homops`]: Horn θ-operators and annihilation checking.
//! - [`closedforms`]: recipe ASTs for the closed forms, algebraic-root series
//!   solving, and the family registry.
//! - [`analysis`]: basis building, linear decomposition, family verification,
//!   the power relation, and empirical f/g extraction.
//! - [`familyfile`]: text format for user-defined families.

pub mod analysis;
pub mod closedforms;
pub mod familyfile;
pub mod gammaseries;
pub mod geometry;
pub mod homops;
pub mod pseries;
pub mod scalars;

pub use scalars::{Gaussian, Rat};
