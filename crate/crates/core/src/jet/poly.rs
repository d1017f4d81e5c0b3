//! Polynomials in scaled Taylor coordinates.

use serde::{Deserialize, Serialize};

use super::JetSignature;
use crate::error::{CoreError, Result};
use crate::scalar::Scalar;

/// A polynomial of degree at most `p` on `R^n`, stored as
/// `P(x) = Σ_{|α| ≤ p} coeffs[α] (x - center)^α / α!`.
///
/// In this basis `coeffs[α] = (D^α P)(center)`, so a Whitney-field jet array
/// and the coefficient vector of its Taylor polynomial coincide slot for
/// slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Poly<T> {
    pub signature: JetSignature,
    pub center: Vec<T>,
    pub coeffs: Vec<T>,
}

impl<T: Scalar> Poly<T> {
    pub fn new(signature: JetSignature, center: Vec<T>, coeffs: Vec<T>) -> Result<Self> {
        if center.len() != signature.n {
            return Err(CoreError::DimensionMismatch {
                expected: signature.n,
                got: center.len(),
            });
        }
        if coeffs.len() != signature.dim() {
            return Err(CoreError::DimensionMismatch {
                expected: signature.dim(),
                got: coeffs.len(),
            });
        }
        Ok(Poly {
            signature,
            center,
            coeffs,
        })
    }

    pub fn zero(signature: JetSignature, center: Vec<T>) -> Self {
        let dim = signature.dim();
        Poly::new(signature, center, vec![T::zero(); dim]).expect("zero poly")
    }

    /// The basis monomial `(x - center)^α / α!` for basis slot `slot`.
    pub fn basis_monomial(signature: JetSignature, center: Vec<T>, slot: usize) -> Self {
        let mut p = Poly::zero(signature, center);
        p.coeffs[slot] = T::one();
        p
    }

    pub fn order(&self) -> usize {
        self.signature.p
    }

    pub fn eval(&self, x: &[T]) -> T {
        let table = self.signature.table();
        let diff: Vec<T> = x
            .iter()
            .zip(&self.center)
            .map(|(xi, ci)| *xi - *ci)
            .collect();
        let mut acc = T::zero();
        for (i, alpha) in table.multiindices().iter().enumerate() {
            if self.coeffs[i] != T::zero() {
                acc += self.coeffs[i] * alpha.pow(&diff) / table.factorial::<T>(i);
            }
        }
        acc
    }

    /// Recenter at `a`. Exact: the returned polynomial has the same values
    /// everywhere.
    ///
    /// `new_coeffs[α] = (D^α P)(a) = Σ_β coeffs[α+β] (a - center)^β / β!`.
    pub fn rebase(&self, a: &[T]) -> Poly<T> {
        let table = self.signature.table();
        let shift: Vec<T> = a
            .iter()
            .zip(&self.center)
            .map(|(ai, ci)| *ai - *ci)
            .collect();
        let mut coeffs = vec![T::zero(); self.coeffs.len()];
        for (i, alpha) in table.multiindices().iter().enumerate() {
            let mut acc = T::zero();
            for (j, beta) in table.multiindices().iter().enumerate() {
                if alpha.order() + beta.order() > self.signature.p {
                    break; // degree-major ordering: all later β are too big
                }
                if let Some(slot) = table.position(&alpha.add(beta)) {
                    if self.coeffs[slot] != T::zero() {
                        acc += self.coeffs[slot] * beta.pow(&shift) / table.factorial::<T>(j);
                    }
                }
            }
            coeffs[i] = acc;
        }
        Poly {
            signature: self.signature,
            center: a.to_vec(),
            coeffs,
        }
    }

    /// Drop all terms of degree above `p`. Errors when `p` exceeds the
    /// current order.
    pub fn truncate(&self, p: usize) -> Result<Poly<T>> {
        if p > self.signature.p {
            return Err(CoreError::BadTruncation {
                p,
                q: self.signature.p,
            });
        }
        let signature = JetSignature::new(self.signature.n, p);
        let coeffs = self.coeffs[..signature.dim()].to_vec();
        Ok(Poly {
            signature,
            center: self.center.clone(),
            coeffs,
        })
    }

    /// View the jet in a higher-order signature (zero padding).
    pub fn extend(&self, q: usize) -> Result<Poly<T>> {
        if q < self.signature.p {
            return Err(CoreError::BadTruncation {
                p: q,
                q: self.signature.p,
            });
        }
        let signature = JetSignature::new(self.signature.n, q);
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(signature.dim(), T::zero());
        Ok(Poly {
            signature,
            center: self.center.clone(),
            coeffs,
        })
    }

    /// Plain monomial coefficients `m_α` with `P = Σ m_α (x - center)^α`.
    pub(crate) fn monomial_coeffs(&self) -> Vec<T> {
        let table = self.signature.table();
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| *c / table.factorial::<T>(i))
            .collect()
    }

    pub(crate) fn from_monomial_coeffs(
        signature: JetSignature,
        center: Vec<T>,
        mono: &[T],
    ) -> Poly<T> {
        let table = signature.table();
        let coeffs = mono
            .iter()
            .enumerate()
            .map(|(i, c)| *c * table.factorial::<T>(i))
            .collect();
        Poly {
            signature,
            center,
            coeffs,
        }
    }

    /// Product of two polynomials with the same center, all terms of degree
    /// above `p_cap` discarded.
    pub fn mul_capped(&self, other: &Poly<T>, p_cap: usize) -> Result<Poly<T>> {
        if self.signature.n != other.signature.n {
            return Err(CoreError::DimensionMismatch {
                expected: self.signature.n,
                got: other.signature.n,
            });
        }
        debug_assert_eq!(self.center, other.center);
        let sig = JetSignature::new(self.signature.n, p_cap);
        let table = sig.table();
        let ta = self.signature.table();
        let tb = other.signature.table();
        let ma = self.monomial_coeffs();
        let mb = other.monomial_coeffs();
        let mut mono = vec![T::zero(); sig.dim()];
        for (i, alpha) in ta.multiindices().iter().enumerate() {
            if ma[i] == T::zero() {
                continue;
            }
            if alpha.order() > p_cap {
                break;
            }
            for (j, beta) in tb.multiindices().iter().enumerate() {
                if alpha.order() + beta.order() > p_cap {
                    break;
                }
                if mb[j] == T::zero() {
                    continue;
                }
                let slot = table
                    .position(&alpha.add(beta))
                    .expect("product multiindex within cap");
                mono[slot] += ma[i] * mb[j];
            }
        }
        Ok(Poly::from_monomial_coeffs(sig, self.center.clone(), &mono))
    }

    pub fn scale(&self, s: T) -> Poly<T> {
        let mut out = self.clone();
        for c in &mut out.coeffs {
            *c *= s;
        }
        out
    }

    pub fn add(&self, other: &Poly<T>) -> Poly<T> {
        debug_assert_eq!(self.signature, other.signature);
        debug_assert_eq!(self.center, other.center);
        let mut out = self.clone();
        for (c, o) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *c += *o;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::real;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn univariate(p: usize, coeffs: Vec<f64>) -> Poly<f64> {
        Poly::new(JetSignature::new(1, p), vec![0.0], coeffs).unwrap()
    }

    #[test]
    fn rebase_square_binomial() {
        // x^2 centered at 0 -> 1 + 2(x-1) + (x-1)^2 at center 1
        let p = univariate(2, vec![0.0, 0.0, 2.0]);
        let q = p.rebase(&[1.0]);
        assert_eq!(q.coeffs, vec![1.0, 2.0, 2.0]); // scaled basis: D^2 = 2
        assert!((q.eval(&[3.0]) - 9.0).abs() < 1e-12);
    }

    #[test]
    fn rebase_round_trip_exact() {
        let p = univariate(3, vec![0.5, -1.0, 2.0, 6.0]);
        let q = p.rebase(&[1.25]).rebase(&[0.0]);
        for (a, b) in p.coeffs.iter().zip(&q.coeffs) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn rebase_matches_direct_evaluation() {
        let mut rng = StdRng::seed_from_u64(7);
        let sig = JetSignature::new(2, 3);
        for _ in 0..20 {
            let coeffs: Vec<f64> = (0..sig.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let p = Poly::new(sig, vec![0.0, 0.0], coeffs).unwrap();
            let a = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            let q = p.rebase(&a);
            for _ in 0..100 {
                let x = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
                let diff: f64 = p.eval(&x) - q.eval(&x);
                assert!(diff.abs() < 1e-10, "residual {diff}");
            }
        }
    }

    #[test]
    fn truncate_drops_high_terms() {
        // x^3 + x -> x at order 2
        let p = univariate(3, vec![0.0, 1.0, 0.0, 6.0]);
        let t = p.truncate(2).unwrap();
        assert_eq!(t.coeffs, vec![0.0, 1.0, 0.0]);
        assert!(p.truncate(4).is_err());
        // identity truncation
        assert_eq!(p.truncate(3).unwrap(), p);
    }

    #[test]
    fn truncate_and_rebase_do_not_commute() {
        // P = x^3, a = 1, p = 2: rebase-then-truncate keeps the local jet,
        // truncate-then-rebase kills everything.
        let p = univariate(3, vec![0.0, 0.0, 0.0, 6.0]);
        let r1 = p.rebase(&[1.0]).truncate(2).unwrap();
        let r2 = p.truncate(2).unwrap().rebase(&[1.0]);
        assert_eq!(r1.coeffs, vec![1.0, 3.0, 6.0]);
        assert_eq!(r2.coeffs, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn capped_product() {
        // (x)(x) capped at 2 is x^2; capped at 1 is 0
        let x = univariate(2, vec![0.0, 1.0, 0.0]);
        let sq = x.mul_capped(&x, 2).unwrap();
        assert_eq!(sq.coeffs, vec![0.0, 0.0, 2.0]);
        let capped = x.mul_capped(&x, 1).unwrap();
        assert_eq!(capped.coeffs, vec![0.0, 0.0]);
    }

    #[test]
    fn generic_scalar_eval() {
        let sig = JetSignature::new(1, 2);
        let p: Poly<f32> = Poly::new(sig, vec![0.0f32], vec![0.0, 0.0, real(2.0)]).unwrap();
        assert!((p.eval(&[2.0f32]) - 4.0).abs() < 1e-5);
    }
}
