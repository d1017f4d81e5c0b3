//! Jets of mappings and the induced pullback/pushforward on jet spaces.

use serde::{Deserialize, Serialize};

use super::{JetDual, JetSignature, Poly};
use crate::error::{CoreError, Result};
use crate::scalar::Scalar;

/// The order-`p` jet of a mapping `φ: R^m → R^n` at a base point `b`:
/// one component polynomial `T^p_b φ_i` per target coordinate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MapJet<T> {
    /// Signature of the source jet space `(m, p)`.
    pub source: JetSignature,
    /// Target dimension `n`.
    pub target_n: usize,
    /// Base point in `R^m`.
    pub base: Vec<T>,
    /// Component jets, all centered at `base`.
    pub components: Vec<Poly<T>>,
}

impl<T: Scalar> MapJet<T> {
    /// Build from component polynomials (any centers), recentring at `base`
    /// and truncating to order `p`.
    pub fn new(source: JetSignature, base: Vec<T>, components: Vec<Poly<T>>) -> Result<Self> {
        if base.len() != source.n {
            return Err(CoreError::DimensionMismatch {
                expected: source.n,
                got: base.len(),
            });
        }
        let mut comps = Vec::with_capacity(components.len());
        for c in &components {
            if c.signature.n != source.n {
                return Err(CoreError::DimensionMismatch {
                    expected: source.n,
                    got: c.signature.n,
                });
            }
            let rebased = c.rebase(&base);
            let jet = if c.signature.p > source.p {
                rebased.truncate(source.p)?
            } else {
                rebased.extend(source.p)?
            };
            comps.push(jet);
        }
        Ok(MapJet {
            source,
            target_n: comps.len(),
            base,
            components: comps,
        })
    }

    /// The identity map jet on `R^n` at `base`.
    pub fn identity(signature: JetSignature, base: Vec<T>) -> Self {
        let table = signature.table();
        let mut components = Vec::with_capacity(signature.n);
        for i in 0..signature.n {
            let mut poly = Poly::zero(signature, base.clone());
            poly.coeffs[0] = base[i];
            let unit = crate::multiindex::MultiIndex::unit(signature.n, i);
            let slot = table.position(&unit).expect("unit index in basis");
            poly.coeffs[slot] = T::one();
            components.push(poly);
        }
        MapJet {
            source: signature,
            target_n: signature.n,
            base,
            components,
        }
    }

    /// `φ(base)`: the constant terms of the component jets.
    pub fn value_at_base(&self) -> Vec<T> {
        self.components.iter().map(|c| c.coeffs[0]).collect()
    }

    /// Pullback `P ↦ T^p_b (P ∘ φ)`: rebase `P` at `φ(b)`, substitute the
    /// component jets, truncate to order `p` throughout.
    pub fn pullback(&self, poly: &Poly<T>) -> Result<Poly<T>> {
        if poly.signature.n != self.target_n {
            return Err(CoreError::DimensionMismatch {
                expected: self.target_n,
                got: poly.signature.n,
            });
        }
        if poly.signature.p > self.source.p {
            return Err(CoreError::BadTruncation {
                p: self.source.p,
                q: poly.signature.p,
            });
        }
        let p_cap = self.source.p;
        let image = self.value_at_base();
        let rebased = poly.rebase(&image);
        let mono = rebased.monomial_coeffs();
        let table = rebased.signature.table();

        // ψ_i = φ_i - φ_i(b): zero constant term, so products gain degree.
        let mut psi = self.components.clone();
        for c in &mut psi {
            c.coeffs[0] = T::zero();
        }
        // Precompute capped powers ψ_i^k for k = 0..=p.
        let one = {
            let mut o = Poly::zero(self.source, self.base.clone());
            o.coeffs[0] = T::one();
            o
        };
        let mut powers: Vec<Vec<Poly<T>>> = Vec::with_capacity(psi.len());
        for c in &psi {
            let mut row = vec![one.clone()];
            for k in 1..=p_cap {
                let next = row[k - 1].mul_capped(c, p_cap)?;
                row.push(next);
            }
            powers.push(row);
        }

        let mut acc = Poly::zero(self.source, self.base.clone());
        for (slot, alpha) in table.multiindices().iter().enumerate() {
            if mono[slot] == T::zero() {
                continue;
            }
            let mut term = one.clone();
            for (i, &e) in alpha.entries().iter().enumerate() {
                if e > 0 {
                    term = term.mul_capped(&powers[i][e as usize], p_cap)?;
                }
            }
            acc = acc.add(&term.scale(mono[slot]));
        }
        Ok(acc)
    }

    /// Pushforward `φ_{*b}(η)(P) = η(φ*_b(P))`; the result is expressed at
    /// the reference center `φ(b)`.
    pub fn pushforward(&self, eta: &JetDual<T>) -> Result<JetDual<T>> {
        if eta.signature.n != self.source.n || eta.signature.p != self.source.p {
            return Err(CoreError::DimensionMismatch {
                expected: self.source.dim(),
                got: eta.signature.dim(),
            });
        }
        let target_sig = JetSignature::new(self.target_n, self.source.p);
        let image = self.value_at_base();
        let mut coords = vec![T::zero(); target_sig.dim()];
        for (slot, c) in coords.iter_mut().enumerate() {
            let monomial = Poly::basis_monomial(target_sig, image.clone(), slot);
            *c = eta.pair(&self.pullback(&monomial)?)?;
        }
        JetDual::new(target_sig, image, coords)
    }

    /// Jet of the composite `self ∘ inner` at `inner.base`.
    pub fn compose(&self, inner: &MapJet<T>) -> Result<MapJet<T>> {
        if inner.target_n != self.source.n {
            return Err(CoreError::DimensionMismatch {
                expected: self.source.n,
                got: inner.target_n,
            });
        }
        let mut components = Vec::with_capacity(self.target_n);
        for c in &self.components {
            components.push(inner.pullback(c)?);
        }
        Ok(MapJet {
            source: inner.source,
            target_n: self.target_n,
            base: inner.base.clone(),
            components,
        })
    }
}
