//! gomet: invariant metrics and geodesic-orbit certification on compact
//! homogeneous spaces of classical Lie groups.
//!
//! The crate builds compact matrix Lie algebras `g` with the Ad-invariant
//! inner product `Q(X, Y) = -trace(XY)`, constructs homogeneous-space data
//! for `G/H` (isotropy subalgebra `h`, tangent complement `m`, normalizer,
//! module decomposition), parameterizes the cone of invariant metric
//! endomorphisms, and certifies whether a metric has the geodesic-orbit
//! property by solving the algebraic criterion `[a + X, ΛX] = 0` in
//! least-squares form over many sampled directions `X`.
//!
//! Module map:
//! - [`liealg`]: algebras, bases, brackets, structure constants, `Q`.
//! - [`homspace`]: `g = h ⊕ m`, normalizer, `n ⊕ p` split, isotypic
//!   decomposition of `m`.
//! - [`invmetrics`]: equivariant metric families and their reductions.
//! - [`gocheck`]: geodesic-graph solver, randomized certification, scans,
//!   and the SU(5)/S(U(2)xU(2)) end-to-end pipeline.
//! - [`cli`]: space-spec parsing, orchestration, JSON reports.

pub mod cli;
pub mod config;
pub mod error;
pub mod gocheck;
pub mod homspace;
pub mod invmetrics;
pub mod liealg;
pub mod linalg;

pub use error::Error;

pub type Result<T> = std::result::Result<T, Error>;
