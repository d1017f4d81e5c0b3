//! Computational engine for smoothness diagnostics of functions sampled on
//! closed subsets of `R^n`: jet calculus, Whitney-field checking,
//! paratangent bundles of arbitrary order, and the associated function
//! criterion.
//!
//! Everything is generic over the working scalar; `f64` aliases are exported
//! at the crate root.

pub mod config;
pub mod error;
pub mod geometry;
pub mod jet;
pub mod bundle;
pub mod subspace;
pub mod whitney;
pub mod multiindex;
pub mod scalar;
pub mod scene;

pub use config::{Schedule, Tolerances};
pub use error::{CoreError, Result};
pub use jet::{delta_functional, deriv_functional, JetDual, JetSignature, MapJet, Poly};
pub use multiindex::{basis_table, binomial, jet_dim, MultiIndex};
pub use scalar::Scalar;

/// Concrete `f64` aliases for the common case.
pub type Poly64 = Poly<f64>;
pub type JetDual64 = JetDual<f64>;
pub type MapJet64 = MapJet<f64>;
pub type Tolerances64 = Tolerances<f64>;
pub type Schedule64 = Schedule<f64>;
