//! Zeros, level curves and real-part projection sets of the partial sums
//! `ζₙ(z) = Σ_{k≤n} k^{-z}` of the Riemann zeta function.
//!
//! * [`gdpoly`]: exponential sums `Σ aₖ μₖ^z` and the three families `ζₙ`,
//!   `Gₙ(z) = ζₙ(−z)` and the pruned sum `Gₙ*`.
//! * [`realroots`]: sign-change counts and unique real roots.
//! * [`zerofinder`]: argument-principle zero search, translation numbers.
//! * [`levelset`]: level curves `|Gₙ*| = p^{x₀}`, their extremes and shapes.
//! * [`strips`]: projection sets, critical bounds and structural checks.
//! * [`export`]: CSV, JSON and SVG output.
//!
//! With the default `parallel` feature the data-parallel loops run on rayon;
//! without it they run sequentially with identical results.

// `!(a < b)` is deliberate: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod error;
pub mod export;
pub mod gdpoly;
pub mod levelset;
pub mod par;
pub mod realroots;
pub mod strips;
pub mod verdict;
pub mod zerofinder;

pub use catalog::ZeroCatalog;
pub use error::{Error, Result};
pub use gdpoly::{Family, GeneralizedDirichletPoly};
pub use verdict::Verdict;
pub use zerofinder::{ComplexZero, Rectangle};
