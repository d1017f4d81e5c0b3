//! Multiindices and the ordered monomial basis of the jet space.
//!
//! The basis of polynomials of degree at most `p` on `R^n` is fixed globally:
//! multiindices sorted by total degree, then lexicographically with the
//! leading entry largest first, e.g. for `n = 2, p = 2`:
//! `(0,0), (1,0), (0,1), (2,0), (1,1), (0,2)`.
//!
//! Because the ordering is degree-major, the basis for order `p` is a prefix
//! of the basis for any order `q >= p`; truncation and embedding are prefix
//! operations on coefficient vectors.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use once_cell::sync::Lazy;
use serde::{Deserialize, Serialize};

use crate::scalar::{real, Scalar};

/// A multiindex `α = (α_1, …, α_n)` of nonnegative exponents.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultiIndex {
    entries: Vec<u32>,
}

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        MultiIndex { entries }
    }

    pub fn zero(n: usize) -> Self {
        MultiIndex {
            entries: vec![0; n],
        }
    }

    /// The unit multiindex with 1 in slot `i`.
    pub fn unit(n: usize, i: usize) -> Self {
        let mut entries = vec![0; n];
        entries[i] = 1;
        MultiIndex { entries }
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total degree `|α|`.
    pub fn order(&self) -> usize {
        self.entries.iter().map(|&e| e as usize).sum()
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    /// Componentwise `self - other`, or `None` unless `other <= self`.
    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        let mut entries = Vec::with_capacity(self.entries.len());
        for (a, b) in self.entries.iter().zip(&other.entries) {
            entries.push(a.checked_sub(*b)?);
        }
        Some(MultiIndex { entries })
    }

    /// Componentwise `other <= self`.
    pub fn dominates(&self, other: &MultiIndex) -> bool {
        self.entries.iter().zip(&other.entries).all(|(a, b)| a >= b)
    }

    /// `α!` as a scalar. Exact for all orders this engine handles.
    pub fn factorial<T: Scalar>(&self) -> T {
        let mut f = 1.0f64;
        for &e in &self.entries {
            for k in 2..=e as u64 {
                f *= k as f64;
            }
        }
        real(f)
    }

    /// `(x - c)^α` evaluated componentwise; pass `x - c` as `diff`.
    pub fn pow<T: Scalar>(&self, diff: &[T]) -> T {
        let mut acc = T::one();
        for (d, &e) in diff.iter().zip(&self.entries) {
            acc *= d.powi(e as i32);
        }
        acc
    }
}

impl std::fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// `C(a, b)`.
pub fn binomial(a: usize, b: usize) -> usize {
    if b > a {
        return 0;
    }
    let b = b.min(a - b);
    let mut num: u128 = 1;
    let mut den: u128 = 1;
    for i in 0..b {
        num *= (a - i) as u128;
        den *= (i + 1) as u128;
    }
    (num / den) as usize
}

/// Dimension of the space of degree-`<= p` polynomials on `R^n`.
pub fn jet_dim(n: usize, p: usize) -> usize {
    binomial(n + p, n)
}

/// The ordered monomial basis for `(n, p)` together with lookup tables.
#[derive(Debug)]
pub struct BasisTable {
    pub n: usize,
    pub p: usize,
    list: Vec<MultiIndex>,
    index: HashMap<MultiIndex, usize>,
    factorials: Vec<f64>,
}

impl BasisTable {
    fn build(n: usize, p: usize) -> BasisTable {
        assert!(n >= 1, "ambient dimension must be at least 1");
        let mut list = Vec::with_capacity(jet_dim(n, p));
        for d in 0..=p {
            push_degree(n, d as u32, &mut Vec::new(), &mut list);
        }
        debug_assert_eq!(list.len(), jet_dim(n, p));
        let index = list
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, m)| (m, i))
            .collect();
        let factorials = list.iter().map(|m| m.factorial::<f64>()).collect();
        BasisTable {
            n,
            p,
            list,
            index,
            factorials,
        }
    }

    pub fn dim(&self) -> usize {
        self.list.len()
    }

    pub fn multiindices(&self) -> &[MultiIndex] {
        &self.list
    }

    pub fn at(&self, i: usize) -> &MultiIndex {
        &self.list[i]
    }

    pub fn position(&self, m: &MultiIndex) -> Option<usize> {
        self.index.get(m).copied()
    }

    /// `α!` for basis slot `i`.
    pub fn factorial<T: Scalar>(&self, i: usize) -> T {
        real(self.factorials[i])
    }
}

/// Emit all multiindices of exact degree `d`, leading entry largest first.
fn push_degree(slots: usize, d: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
    if slots == 1 {
        let mut entries = prefix.clone();
        entries.push(d);
        out.push(MultiIndex::new(entries));
        return;
    }
    for first in (0..=d).rev() {
        prefix.push(first);
        push_degree(slots - 1, d - first, prefix, out);
        prefix.pop();
    }
}

static TABLES: Lazy<Mutex<HashMap<(usize, usize), Arc<BasisTable>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

/// Shared, memoized basis table for `(n, p)`.
pub fn basis_table(n: usize, p: usize) -> Arc<BasisTable> {
    let mut tables = TABLES.lock().expect("basis table cache poisoned");
    tables
        .entry((n, p))
        .or_insert_with(|| Arc::new(BasisTable::build(n, p)))
        .clone()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn univariate_basis() {
        let t = basis_table(1, 2);
        let got: Vec<Vec<u32>> = t.multiindices().iter().map(|m| m.entries().to_vec()).collect();
        assert_eq!(got, vec![vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn bivariate_order_one() {
        let t = basis_table(2, 1);
        let got: Vec<Vec<u32>> = t.multiindices().iter().map(|m| m.entries().to_vec()).collect();
        assert_eq!(got, vec![vec![0, 0], vec![1, 0], vec![0, 1]]);
    }

    #[test]
    fn bivariate_order_two_has_six_elements() {
        assert_eq!(basis_table(2, 2).dim(), 6);
    }

    #[test]
    fn dims_match_binomial_exhaustively() {
        for n in 1..=4 {
            for p in 0..=6 {
                let t = basis_table(n, p);
                assert_eq!(t.dim(), jet_dim(n, p), "n={n} p={p}");
                // no duplicates, sorted by degree
                for w in t.multiindices().windows(2) {
                    assert!(w[0] != w[1]);
                    assert!(w[0].order() <= w[1].order());
                }
            }
        }
    }

    #[test]
    fn prefix_property() {
        let small = basis_table(3, 2);
        let big = basis_table(3, 5);
        for (i, m) in small.multiindices().iter().enumerate() {
            assert_eq!(big.at(i), m);
        }
    }

    #[test]
    fn factorial_and_pow() {
        let m = MultiIndex::new(vec![2, 3]);
        assert_eq!(m.factorial::<f64>(), 12.0);
        assert_eq!(m.pow::<f64>(&[2.0, -1.0]), 4.0 * -1.0);
        assert_eq!(m.order(), 5);
    }
}
