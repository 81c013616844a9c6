//! Quantum relations between finite-dimensional von Neumann algebras.
//!
//! Algebras are multimatrix algebras `⊕ M_n(α)` represented on a Hilbert
//! space; relations are operator bimodules over the commutants. The numerics
//! are generic over the real scalar; [`f64`] is the primary precision.

pub mod adjacency;
pub mod cpmap;
pub mod doc;
pub mod error;
pub mod fixtures;
pub mod linalg;
pub mod mvnalg;
pub mod opspace;
pub mod qfunc;
pub mod qrel;
pub mod random;
pub mod report;
pub mod scalar;
pub mod search;
pub mod verify;

pub use error::{Error, Result};

/// Double-precision instances of the main types.
pub type Relation = qrel::QuantumRelation<f64>;
pub type Cp = cpmap::CpMap<f64>;
pub type Adjacency = adjacency::GnsOperator<f64>;
pub type Gns = mvnalg::GnsSpace<f64>;

/// Single-precision instances, for callers trading accuracy for speed.
pub type Relation32 = qrel::QuantumRelation<f32>;
pub type Cp32 = cpmap::CpMap<f32>;
pub type Adjacency32 = adjacency::GnsOperator<f32>;
pub type Gns32 = mvnalg::GnsSpace<f32>;
