//! Jet calculus: the polynomial space `P_p(R^n)`, its dual, and jet
//! transport through polynomial mappings.

mod dual;
mod map;
mod poly;

pub use dual::{delta_functional, deriv_functional, JetDual};
pub use map::MapJet;
pub use poly::Poly;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::multiindex::{basis_table, jet_dim, BasisTable};

/// Ambient dimension and jet order; fixes the monomial basis and the
/// dimension of `P_p(R^n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct JetSignature {
    pub n: usize,
    pub p: usize,
}

impl JetSignature {
    pub fn new(n: usize, p: usize) -> Self {
        JetSignature { n, p }
    }

    /// `dim P_p(R^n) = C(n+p, n)`.
    pub fn dim(&self) -> usize {
        jet_dim(self.n, self.p)
    }

    pub fn table(&self) -> Arc<BasisTable> {
        basis_table(self.n, self.p)
    }
}
