//! Numerical tolerances shared across the crate.
//!
//! All defaults can be overridden through [`Tolerances`] carried by a run
//! configuration; the values below are the crate-wide contract.

use serde::Serialize;

/// Tolerance bundle used throughout construction, decomposition and
/// certification.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Tolerances {
    /// Relative tolerance for algebraic identities (scaled by operand norms).
    pub rel: f64,
    /// Absolute floor for residual comparisons.
    pub abs: f64,
    /// Relative residual above which a sample refutes the g.o. property.
    pub refutation: f64,
    /// Relative residual below which all samples certify "probably g.o.".
    pub acceptance: f64,
    /// Eigenvalue cluster tolerance for commutant splitting.
    pub cluster: f64,
    /// Positive-definiteness threshold on metric eigenvalues.
    pub positivity: f64,
    /// SVD cutoff, relative to the largest singular value.
    pub svd_cutoff: f64,
    /// Projection-norm threshold above which an eigenvalue constraint fires.
    pub fire: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rel: 1e-9,
            abs: 1e-12,
            refutation: 1e-6,
            acceptance: 1e-9,
            cluster: 1e-7,
            positivity: 1e-10,
            svd_cutoff: 1e-10,
            fire: 1e-8,
        }
    }
}

impl Tolerances {
    /// Scale-aware comparison: `|residual| <= max(abs, rel * scale)`.
    pub fn within(&self, residual: f64, scale: f64) -> bool {
        residual.abs() <= self.abs.max(self.rel * scale)
    }
}
