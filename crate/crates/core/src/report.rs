//! Machine-readable certificates for identities checked at run time.

use crate::opspace::OperatorSubspace;
use crate::scalar::Real;
use serde::{Deserialize, Serialize};

/// One verified (or refuted) claim: the dimensions of both sides when the
/// claim compares subspaces, and the residual that was measured.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Claim {
    pub claim: String,
    pub lhs_dim: usize,
    pub rhs_dim: usize,
    pub residual: f64,
}

impl Claim {
    pub fn new(claim: impl Into<String>, lhs_dim: usize, rhs_dim: usize, residual: f64) -> Self {
        Self { claim: claim.into(), lhs_dim, rhs_dim, residual }
    }

    /// Subspace equality, measured as the entrywise distance of projections.
    pub fn subspaces<R: Real>(claim: impl Into<String>, lhs: &OperatorSubspace<R>, rhs: &OperatorSubspace<R>) -> Self {
        let residual = if lhs.dims() == rhs.dims() { lhs.distance(rhs).to_f64_lossy() } else { f64::INFINITY };
        Self::new(claim, lhs.dim(), rhs.dim(), residual)
    }

    /// A boolean equivalence: residual 0 when both sides agree, 1 otherwise.
    pub fn iff(claim: impl Into<String>, lhs: bool, rhs: bool) -> Self {
        Self::new(claim, lhs as usize, rhs as usize, if lhs == rhs { 0.0 } else { 1.0 })
    }

    /// A statement that must simply be true.
    pub fn holds(claim: impl Into<String>, ok: bool) -> Self {
        Self::new(claim, 1, ok as usize, if ok { 0.0 } else { 1.0 })
    }

    pub fn scalar(claim: impl Into<String>, residual: f64) -> Self {
        Self::new(claim, 0, 0, residual)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.residual.is_finite() && self.residual <= tol
    }
}
