//! Numerical workbench for the sieve-theoretic bound on the least
//! almost-prime P₂ in arithmetic progressions.
//!
//! The analytic side evaluates the linear-sieve functions `F(u)`,
//! `f(u)` and the final lower-bound bracket `B(θ, δ)` whose positivity
//! certifies `P₂(a, q) ≪ q^θ`; an optimizer locates the least
//! certifiable `θ` (the bracket at `θ = 1.8345`, `δ = 0.86` exceeds
//! `0.0004282583`). The empirical side checks the same objects at desk
//! scale: segmented `Ω`/least-prime-factor tables, least-P₂ surveys,
//! Mertens products, explicit Selberg Λ² weights, and the
//! Richert-weighted sifting sum computed along two independent routes.
//!
//! All computations are deterministic; parallel sites (behind the
//! default `parallel` feature) collect positionally and reduce
//! sequentially, so thread count never changes a result bit.

// negated comparisons are the NaN-rejecting form of every domain
// guard here; divisibility is spelled `%` throughout the sieve code
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::manual_is_multiple_of)]

pub mod arithmetic_lab;
pub mod bound_model;
pub mod exec;
pub mod optimizer;
pub mod quadrature;
pub mod sieve_functions;

pub use bound_model::{bracket, feasible, BoundParams, BracketBreakdown};
pub use quadrature::{Estimate, Interval, QuadConfig};
