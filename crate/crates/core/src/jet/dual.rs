//! Dual jets: linear functionals on `P_p(R^n)`.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::{JetSignature, Poly};
use crate::error::{CoreError, Result};
use crate::multiindex::MultiIndex;
use crate::scalar::Scalar;

/// An element `ξ` of the dual space `P_p(R^n)*`, stored through its action on
/// the scaled monomial basis at a reference center:
/// `coords[α] = ξ((x - center)^α / α!)`.
///
/// Changing the reference center is an exact triangular transform; the
/// functional itself never changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JetDual<T> {
    pub signature: JetSignature,
    pub center: Vec<T>,
    pub coords: Vec<T>,
}

impl<T: Scalar> JetDual<T> {
    pub fn new(signature: JetSignature, center: Vec<T>, coords: Vec<T>) -> Result<Self> {
        if center.len() != signature.n {
            return Err(CoreError::DimensionMismatch {
                expected: signature.n,
                got: center.len(),
            });
        }
        if coords.len() != signature.dim() {
            return Err(CoreError::DimensionMismatch {
                expected: signature.dim(),
                got: coords.len(),
            });
        }
        Ok(JetDual {
            signature,
            center,
            coords,
        })
    }

    pub fn zero(signature: JetSignature, center: Vec<T>) -> Self {
        let dim = signature.dim();
        JetDual::new(signature, center, vec![T::zero(); dim]).expect("zero dual")
    }

    /// `⟨ξ, P⟩`, bilinear in both arguments.
    pub fn pair(&self, poly: &Poly<T>) -> Result<T> {
        if poly.signature.n != self.signature.n || poly.signature.p > self.signature.p {
            return Err(CoreError::DimensionMismatch {
                expected: self.signature.dim(),
                got: poly.signature.dim(),
            });
        }
        let rebased = poly.rebase(&self.center);
        let mut acc = T::zero();
        for (c, x) in rebased.coeffs.iter().zip(&self.coords) {
            acc += *c * *x;
        }
        Ok(acc)
    }

    /// Express the same functional against the monomial basis at `a`.
    ///
    /// `ξ_β(a) = Σ_{α ≤ β} (center - a)^{β-α} / (β-α)! · coords[α]`.
    pub fn rebase(&self, a: &[T]) -> JetDual<T> {
        let table = self.signature.table();
        let shift: Vec<T> = self
            .center
            .iter()
            .zip(a)
            .map(|(ci, ai)| *ci - *ai)
            .collect();
        let mut coords = vec![T::zero(); self.coords.len()];
        for (i, beta) in table.multiindices().iter().enumerate() {
            let mut acc = T::zero();
            for (j, alpha) in table.multiindices().iter().enumerate() {
                if alpha.order() > beta.order() {
                    break;
                }
                if self.coords[j] == T::zero() {
                    continue;
                }
                if let Some(diff) = beta.checked_sub(alpha) {
                    acc += diff.pow(&shift) / diff.factorial::<T>() * self.coords[j];
                }
            }
            coords[i] = acc;
        }
        JetDual {
            signature: self.signature,
            center: a.to_vec(),
            coords,
        }
    }

    /// The dual coordinate `ξ_α(a) = ξ((x - a)^α / α!)`.
    pub fn dual_coord(&self, alpha: &MultiIndex, a: &[T]) -> Result<T> {
        if alpha.order() > self.signature.p {
            return Err(CoreError::OrderTooHigh {
                order: alpha.order(),
                p: self.signature.p,
            });
        }
        let table = self.signature.table();
        let shift: Vec<T> = self
            .center
            .iter()
            .zip(a)
            .map(|(ci, ai)| *ci - *ai)
            .collect();
        let mut acc = T::zero();
        for (j, gamma) in table.multiindices().iter().enumerate() {
            if gamma.order() > alpha.order() {
                break;
            }
            if self.coords[j] == T::zero() {
                continue;
            }
            if let Some(diff) = alpha.checked_sub(gamma) {
                acc += diff.pow(&shift) / diff.factorial::<T>() * self.coords[j];
            }
        }
        Ok(acc)
    }

    /// Embed into `P_q*` as the annihilator of polynomials of order `> p`
    /// at `a` (dual to truncation at `a`).
    pub fn embed(&self, a: &[T], q: usize) -> Result<JetDual<T>> {
        if q < self.signature.p {
            return Err(CoreError::BadTruncation {
                p: self.signature.p,
                q,
            });
        }
        let rebased = self.rebase(a);
        let signature = JetSignature::new(self.signature.n, q);
        let mut coords = rebased.coords;
        coords.resize(signature.dim(), T::zero());
        Ok(JetDual {
            signature,
            center: a.to_vec(),
            coords,
        })
    }

    /// Restrict a `P_q*` functional to `P_p ⊂ P_q` (dual projection); inverse
    /// of [`JetDual::embed`] on its image.
    pub fn restrict(&self, a: &[T], p: usize) -> Result<JetDual<T>> {
        if p > self.signature.p {
            return Err(CoreError::BadTruncation {
                p,
                q: self.signature.p,
            });
        }
        let rebased = self.rebase(a);
        let signature = JetSignature::new(self.signature.n, p);
        let coords = rebased.coords[..signature.dim()].to_vec();
        Ok(JetDual {
            signature,
            center: a.to_vec(),
            coords,
        })
    }

    /// Coordinates in the shared chart at the origin, as a vector. This is
    /// the chart all bundle fibers live in.
    pub fn coords_at_origin(&self) -> DVector<T> {
        let origin = vec![T::zero(); self.signature.n];
        DVector::from_vec(self.rebase(&origin).coords)
    }

    pub fn from_origin_coords(signature: JetSignature, v: &DVector<T>) -> Self {
        JetDual {
            signature,
            center: vec![T::zero(); signature.n],
            coords: v.iter().copied().collect(),
        }
    }
}

/// The delta functional `δ_a(P) = P(a)`.
pub fn delta_functional<T: Scalar>(a: &[T], signature: JetSignature) -> JetDual<T> {
    let mut coords = vec![T::zero(); signature.dim()];
    coords[0] = T::one();
    JetDual {
        signature,
        center: a.to_vec(),
        coords,
    }
}

/// The derivative functional `D^α(b)(P) = (D^α P)(b)`.
pub fn deriv_functional<T: Scalar>(
    alpha: &MultiIndex,
    b: &[T],
    signature: JetSignature,
) -> Result<JetDual<T>> {
    if alpha.order() > signature.p {
        return Err(CoreError::OrderTooHigh {
            order: alpha.order(),
            p: signature.p,
        });
    }
    let table = signature.table();
    let slot = table.position(alpha).expect("multiindex in basis");
    let mut coords = vec![T::zero(); signature.dim()];
    coords[slot] = T::one();
    JetDual::new(signature, b.to_vec(), coords)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_coords_and_evaluation() {
        let sig = JetSignature::new(1, 2);
        let d0 = delta_functional(&[0.0], sig);
        assert_eq!(d0.coords, vec![1.0, 0.0, 0.0]);

        // n=1, p=2, a=2, P = x^2 -> 4
        let d2: JetDual<f64> = delta_functional(&[2.0], sig);
        let x2 = Poly::new(sig, vec![0.0], vec![0.0, 0.0, 2.0]).unwrap();
        assert!((d2.pair(&x2).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn delta_pairs_with_monomials_as_indicator() {
        let sig = JetSignature::new(2, 2);
        let a = [0.3, -0.7];
        let d: JetDual<f64> = delta_functional(&a, sig);
        let table = sig.table();
        for slot in 0..sig.dim() {
            let m = Poly::basis_monomial(sig, a.to_vec(), slot);
            let got = d.pair(&m).unwrap();
            let want = if slot == 0 { 1.0 } else { 0.0 };
            assert!((got - want).abs() < 1e-12, "slot {slot} {}", table.at(slot));
        }
    }

    #[test]
    fn derivative_functional_basics() {
        let sig = JetSignature::new(1, 2);
        let x2 = Poly::new(sig, vec![0.0], vec![0.0, 0.0, 2.0]).unwrap();
        let d1: JetDual<f64> = deriv_functional(&MultiIndex::new(vec![1]), &[0.0], sig).unwrap();
        assert!((d1.pair(&x2).unwrap() - 0.0).abs() < 1e-12);
        let d2 = deriv_functional(&MultiIndex::new(vec![2]), &[1.7], sig).unwrap();
        assert!((d2.pair(&x2).unwrap() - 2.0).abs() < 1e-12);
        assert!(deriv_functional(&MultiIndex::new(vec![3]), &[0.0], sig).is_err());
    }

    #[test]
    fn dual_coord_of_delta_is_scaled_monomial_value() {
        // ξ = δ_b: ξ_α(a) = (b-a)^α / α!
        let sig = JetSignature::new(2, 3);
        let b = [0.9, -0.4];
        let a = [0.1, 0.2];
        let d: JetDual<f64> = delta_functional(&b, sig);
        let table = sig.table();
        for alpha in table.multiindices() {
            let got = d.dual_coord(alpha, &a).unwrap();
            let diff = [b[0] - a[0], b[1] - a[1]];
            let want = alpha.pow(&diff) / alpha.factorial::<f64>();
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn dual_coord_of_derivative_at_own_point() {
        let sig = JetSignature::new(2, 2);
        let b = [0.5, 0.5];
        let gamma = MultiIndex::new(vec![1, 1]);
        let d: JetDual<f64> = deriv_functional(&gamma, &b, sig).unwrap();
        for alpha in sig.table().multiindices() {
            let got = d.dual_coord(alpha, &b).unwrap();
            let want = if *alpha == gamma { 1.0 } else { 0.0 };
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn dual_coord_order_zero_is_action_on_constants() {
        let sig = JetSignature::new(1, 3);
        let xi: JetDual<f64> = JetDual::new(sig, vec![0.25], vec![0.3, -1.0, 2.0, 0.7]).unwrap();
        let one = Poly::new(sig, vec![0.0], vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let c0 = xi.dual_coord(&MultiIndex::zero(1), &[-3.0]).unwrap();
        assert!((c0 - xi.pair(&one).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn rebase_preserves_pairing() {
        let sig = JetSignature::new(2, 3);
        let xi = JetDual::new(
            sig,
            vec![0.2, -0.1],
            (0..sig.dim()).map(|i| (i as f64) * 0.3 - 1.0).collect(),
        )
        .unwrap();
        let p = Poly::new(
            sig,
            vec![0.4, 0.4],
            (0..sig.dim()).map(|i| ((i * i) % 5) as f64 - 2.0).collect(),
        )
        .unwrap();
        let before = xi.pair(&p).unwrap();
        let after = xi.rebase(&[-0.9, 0.33]).pair(&p).unwrap();
        assert!((before - after).abs() < 1e-11);
    }

    #[test]
    fn embed_delta_and_kill_high_order() {
        let sig = JetSignature::new(1, 1);
        let a = [0.5];
        let d: JetDual<f64> = delta_functional(&a, sig);
        let e = d.embed(&a, 3).unwrap();
        // still evaluates polynomials of degree <= 1
        let lin = Poly::new(JetSignature::new(1, 1), vec![0.0], vec![1.0, 2.0]).unwrap();
        assert!((e.pair(&lin.extend(3).unwrap()).unwrap() - 2.0).abs() < 1e-12);
        // image coords vanish above order p at the base point
        let table = JetSignature::new(1, 3).table();
        for (i, alpha) in table.multiindices().iter().enumerate() {
            if alpha.order() > 1 {
                assert!(e.rebase(&a).coords[i].abs() < 1e-13);
            }
        }
        // pairing with (x-a)^β, |β| > p, vanishes
        let sig3 = JetSignature::new(1, 3);
        let cubic = Poly::basis_monomial(sig3, a.to_vec(), 3);
        assert!(e.pair(&cubic).unwrap().abs() < 1e-13);
        assert!(d.embed(&a, 0).is_err());
    }

    #[test]
    fn embed_then_restrict_is_identity() {
        let sig = JetSignature::new(2, 2);
        let a = [0.3, 0.6];
        let xi = JetDual::new(
            sig,
            a.to_vec(),
            (0..sig.dim()).map(|i| (i as f64).sin()).collect(),
        )
        .unwrap();
        let back = xi.embed(&a, 4).unwrap().restrict(&a, 2).unwrap();
        for (x, y) in xi.coords.iter().zip(&back.coords) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}
