//! Orthonormal-basis subspaces of a fixed ambient space, with the
//! rank-revealing span, sums, intersections, principal angles, and limits
//! along a scale schedule.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{CoreError, Result};
use crate::scalar::Scalar;

/// A linear subspace of `R^ambient`, stored as orthonormal basis columns.
#[derive(Debug, Clone)]
pub struct Subspace<T: Scalar> {
    ambient: usize,
    basis: DMatrix<T>,
}

impl<T: Scalar> Subspace<T> {
    pub fn zero(ambient: usize) -> Self {
        Subspace {
            ambient,
            basis: DMatrix::zeros(ambient, 0),
        }
    }

    pub fn full(ambient: usize) -> Self {
        Subspace {
            ambient,
            basis: DMatrix::identity(ambient, ambient),
        }
    }

    /// Span a set of column vectors; singular values below
    /// `eps_rank * σ_max` are dropped.
    pub fn span(ambient: usize, columns: &[DVector<T>], eps_rank: T) -> Self {
        if columns.is_empty() {
            return Subspace::zero(ambient);
        }
        let mat = DMatrix::from_columns(columns);
        Subspace::span_matrix(ambient, mat, eps_rank)
    }

    pub fn span_matrix(ambient: usize, mat: DMatrix<T>, eps_rank: T) -> Self {
        debug_assert_eq!(mat.nrows(), ambient);
        if mat.ncols() == 0 {
            return Subspace::zero(ambient);
        }
        let svd = mat.svd(true, false);
        let u = svd.u.expect("svd with u");
        let sigma = &svd.singular_values;
        let sigma_max = sigma.iter().fold(T::zero(), |m, &s| m.max(s));
        if sigma_max <= T::zero() {
            return Subspace::zero(ambient);
        }
        let keep: Vec<usize> = (0..sigma.len())
            .filter(|&i| sigma[i] > eps_rank * sigma_max)
            .collect();
        let mut basis = DMatrix::zeros(ambient, keep.len());
        for (j, &i) in keep.iter().enumerate() {
            let mut col = u.column(i).clone_owned();
            normalize_sign(&mut col);
            basis.set_column(j, &col);
        }
        Subspace { ambient, basis }
    }

    /// Wrap columns that are already orthonormal.
    pub fn from_orthonormal(ambient: usize, basis: DMatrix<T>) -> Self {
        debug_assert_eq!(basis.nrows(), ambient);
        Subspace { ambient, basis }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    pub fn is_zero(&self) -> bool {
        self.basis.ncols() == 0
    }

    pub fn basis(&self) -> &DMatrix<T> {
        &self.basis
    }

    pub fn basis_columns(&self) -> Vec<DVector<T>> {
        (0..self.rank()).map(|j| self.basis.column(j).clone_owned()).collect()
    }

    /// Orthogonal projection of `v` onto the subspace.
    pub fn project(&self, v: &DVector<T>) -> DVector<T> {
        if self.is_zero() {
            return DVector::zeros(self.ambient);
        }
        &self.basis * (self.basis.transpose() * v)
    }

    /// `v` minus its projection.
    pub fn residual(&self, v: &DVector<T>) -> DVector<T> {
        v - self.project(v)
    }

    pub fn sum(&self, other: &Subspace<T>, eps_rank: T) -> Result<Subspace<T>> {
        self.check_ambient(other)?;
        let mut cols = self.basis_columns();
        cols.extend(other.basis_columns());
        Ok(Subspace::span(self.ambient, &cols, eps_rank))
    }

    /// Orthogonal complement, via the spectral split of `I - BBᵀ`.
    pub fn complement(&self) -> Subspace<T> {
        if self.is_zero() {
            return Subspace::full(self.ambient);
        }
        if self.rank() == self.ambient {
            return Subspace::zero(self.ambient);
        }
        let proj = DMatrix::identity(self.ambient, self.ambient)
            - &self.basis * self.basis.transpose();
        let svd = proj.svd(true, false);
        let u = svd.u.expect("svd with u");
        let half = T::from_f64(0.5).expect("0.5");
        let keep: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&i| svd.singular_values[i] > half)
            .collect();
        let mut basis = DMatrix::zeros(self.ambient, keep.len());
        for (j, &i) in keep.iter().enumerate() {
            let mut col = u.column(i).clone_owned();
            normalize_sign(&mut col);
            basis.set_column(j, &col);
        }
        Subspace {
            ambient: self.ambient,
            basis,
        }
    }

    /// Intersection through complement duality:
    /// `A ∩ B = (A⊥ + B⊥)⊥`.
    pub fn intersect(&self, other: &Subspace<T>, eps_rank: T) -> Result<Subspace<T>> {
        self.check_ambient(other)?;
        Ok(self
            .complement()
            .sum(&other.complement(), eps_rank)?
            .complement())
    }

    /// Principal angles between the subspaces, ascending, as many as the
    /// smaller rank.
    pub fn principal_angles(&self, other: &Subspace<T>) -> Vec<T> {
        if self.is_zero() || other.is_zero() {
            return Vec::new();
        }
        let m = self.basis.transpose() * &other.basis;
        let svd = m.svd(false, false);
        let mut cosines: Vec<T> = svd.singular_values.iter().copied().collect();
        cosines.sort_by(|a, b| b.partial_cmp(a).expect("finite singular values"));
        cosines
            .into_iter()
            .map(|c| c.min(T::one()).max(-T::one()).acos())
            .collect()
    }

    /// Largest angle by which `self` sticks out of `sup`; zero when
    /// `self ⊆ sup`.
    pub fn containment_angle(&self, sup: &Subspace<T>) -> T {
        if self.is_zero() {
            return T::zero();
        }
        if sup.is_zero() {
            return T::frac_pi_2();
        }
        let residual = &self.basis - sup.basis() * (sup.basis().transpose() * &self.basis);
        let svd = residual.svd(false, false);
        let sine = svd
            .singular_values
            .iter()
            .fold(T::zero(), |m, &s| m.max(s));
        sine.min(T::one()).asin()
    }

    /// Symmetric subspace distance: the larger of the two containment
    /// angles.
    pub fn drift(&self, other: &Subspace<T>) -> T {
        self.containment_angle(other)
            .max(other.containment_angle(self))
    }

    /// Directions of `self` within angle `theta` of `other`.
    pub fn tolerant_intersect(&self, other: &Subspace<T>, theta: T, eps_rank: T) -> Subspace<T> {
        if self.is_zero() || other.is_zero() {
            return Subspace::zero(self.ambient);
        }
        let m = self.basis.transpose() * other.basis();
        let svd = m.svd(true, false);
        let u = svd.u.expect("svd with u");
        let cos_theta = theta.cos();
        let keep: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&i| svd.singular_values[i] >= cos_theta)
            .collect();
        if keep.is_empty() {
            return Subspace::zero(self.ambient);
        }
        let cols: Vec<DVector<T>> = keep
            .iter()
            .map(|&i| &self.basis * u.column(i).clone_owned())
            .collect();
        Subspace::span(self.ambient, &cols, eps_rank)
    }

    fn check_ambient(&self, other: &Subspace<T>) -> Result<()> {
        if self.ambient != other.ambient {
            return Err(CoreError::DimensionMismatch {
                expected: self.ambient,
                got: other.ambient,
            });
        }
        Ok(())
    }
}

fn normalize_sign<T: Scalar>(col: &mut DVector<T>) {
    let mut lead = T::zero();
    for &x in col.iter() {
        if x.abs() > lead.abs() {
            lead = x;
        }
    }
    if lead < T::zero() {
        for x in col.iter_mut() {
            *x = -*x;
        }
    }
}

/// Limit of a subspace family along a decreasing scale schedule.
///
/// Returns the directions that persist (within `theta_tol`) across the three
/// finest scales, and whether the family converged: the consecutive drift
/// over that window stays below `theta_tol`. Requires at least three scales.
pub fn subspace_limit<T: Scalar>(
    tagged: &[(T, Subspace<T>)],
    tol: &Tolerances<T>,
) -> Result<(Subspace<T>, bool)> {
    if tagged.len() < 3 {
        return Err(CoreError::TooFewScales {
            needed: 3,
            got: tagged.len(),
        });
    }
    let mut seq: Vec<&(T, Subspace<T>)> = tagged.iter().collect();
    // coarse first
    seq.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite scales"));
    let subs: Vec<&Subspace<T>> = seq.iter().map(|(_, s)| s).collect();
    Ok(limit_window(&subs, tol))
}

/// Same as [`subspace_limit`] but tolerant of short sequences: with fewer
/// than three entries the result is the tolerant intersection of whatever is
/// present and the converged flag is false. Used where sparse sampling leaves
/// some scales empty.
pub(crate) fn limit_window_lenient<T: Scalar>(
    subs: &[&Subspace<T>],
    ambient: usize,
    tol: &Tolerances<T>,
) -> (Subspace<T>, bool) {
    if subs.is_empty() {
        return (Subspace::zero(ambient), false);
    }
    if subs.len() < 3 {
        let mut acc = subs[0].clone();
        for s in &subs[1..] {
            acc = acc.tolerant_intersect(s, tol.theta_tol, tol.eps_rank);
        }
        return (acc, false);
    }
    limit_window(subs, tol)
}

fn limit_window<T: Scalar>(subs: &[&Subspace<T>], tol: &Tolerances<T>) -> (Subspace<T>, bool) {
    let window = &subs[subs.len().saturating_sub(3)..];
    let mut acc = window[0].clone();
    for s in &window[1..] {
        acc = acc.tolerant_intersect(s, tol.theta_tol, tol.eps_rank);
    }
    let mut converged = true;
    for w in window.windows(2) {
        if w[0].drift(w[1]) >= tol.theta_tol {
            converged = false;
        }
    }
    (acc, converged)
}

// Serde: bases serialize as lists of basis vectors.
#[derive(Serialize, Deserialize)]
struct SubspaceRepr<T> {
    ambient_dim: usize,
    rank: usize,
    basis: Vec<Vec<T>>,
}

impl<T: Scalar> Serialize for Subspace<T> {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let repr = SubspaceRepr {
            ambient_dim: self.ambient,
            rank: self.rank(),
            basis: self
                .basis_columns()
                .iter()
                .map(|c| c.iter().copied().collect())
                .collect(),
        };
        repr.serialize(serializer)
    }
}

impl<'de, T: Scalar> Deserialize<'de> for Subspace<T> {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = SubspaceRepr::<T>::deserialize(deserializer)?;
        let mut basis = DMatrix::zeros(repr.ambient_dim, repr.basis.len());
        for (j, col) in repr.basis.iter().enumerate() {
            if col.len() != repr.ambient_dim {
                return Err(serde::de::Error::custom("basis vector length mismatch"));
            }
            basis.set_column(j, &DVector::from_vec(col.clone()));
        }
        Ok(Subspace {
            ambient: repr.ambient_dim,
            basis,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn tol() -> Tolerances<f64> {
        Tolerances::default()
    }

    fn vec2(x: f64, y: f64) -> DVector<f64> {
        DVector::from_vec(vec![x, y])
    }

    fn random_subspace(rng: &mut StdRng, ambient: usize, rank: usize) -> Subspace<f64> {
        let cols: Vec<DVector<f64>> = (0..rank)
            .map(|_| DVector::from_fn(ambient, |_, _| rng.random_range(-1.0..1.0)))
            .collect();
        Subspace::span(ambient, &cols, 1e-10)
    }

    #[test]
    fn span_collinear_vectors() {
        let s = Subspace::span(2, &[vec2(1.0, 0.0), vec2(2.0, 0.0)], 1e-8);
        assert_eq!(s.rank(), 1);
        assert!((s.basis()[(0, 0)].abs() - 1.0).abs() < 1e-12);
        let empty = Subspace::<f64>::span(2, &[], 1e-8);
        assert_eq!(empty.rank(), 0);
    }

    #[test]
    fn span_of_many_random_vectors_fills_space() {
        let mut rng = StdRng::seed_from_u64(3);
        let cols: Vec<DVector<f64>> = (0..100)
            .map(|_| DVector::from_fn(5, |_, _| rng.random_range(-1.0..1.0)))
            .collect();
        let s = Subspace::span(5, &cols, 1e-8);
        assert_eq!(s.rank(), 5);
        // cross-check with the Gram determinant of the basis
        let gram = s.basis().transpose() * s.basis();
        assert!((gram.determinant() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn sum_and_intersection_of_axes() {
        let e1 = Subspace::span(2, &[vec2(1.0, 0.0)], 1e-8);
        let e2 = Subspace::span(2, &[vec2(0.0, 1.0)], 1e-8);
        assert_eq!(e1.sum(&e2, 1e-8).unwrap().rank(), 2);
        assert_eq!(e1.intersect(&e2, 1e-8).unwrap().rank(), 0);
        // A = B
        assert_eq!(e1.sum(&e1, 1e-8).unwrap().rank(), 1);
        assert_eq!(e1.intersect(&e1, 1e-8).unwrap().rank(), 1);
    }

    #[test]
    fn dimension_formula_on_random_pairs() {
        let mut rng = StdRng::seed_from_u64(17);
        for _ in 0..500 {
            let ra = rng.random_range(0..=4usize);
            let rb = rng.random_range(0..=4usize);
            let a = random_subspace(&mut rng, 6, ra);
            let b = random_subspace(&mut rng, 6, rb);
            let sum = a.sum(&b, 1e-8).unwrap().rank();
            let inter = a.intersect(&b, 1e-8).unwrap().rank();
            assert_eq!(a.rank() + b.rank(), sum + inter, "ra={ra} rb={rb}");
        }
    }

    #[test]
    fn generic_intersection_via_dimension_count() {
        // random 3- and 4-dim subspaces of R^6 meet in dimension 1 a.s.
        let mut rng = StdRng::seed_from_u64(29);
        let a = random_subspace(&mut rng, 6, 3);
        let b = random_subspace(&mut rng, 6, 4);
        assert_eq!(a.intersect(&b, 1e-8).unwrap().rank(), 1);
    }

    #[test]
    fn containment_and_drift() {
        let e1 = Subspace::span(2, &[vec2(1.0, 0.0)], 1e-8);
        let full = Subspace::full(2);
        assert!(e1.containment_angle(&full) < 1e-10);
        assert!((full.containment_angle(&e1) - std::f64::consts::FRAC_PI_2).abs() < 1e-10);
        let tilted = Subspace::span(2, &[vec2(1.0, 0.1)], 1e-8);
        let angle = e1.drift(&tilted);
        assert!((angle - 0.1f64.atan()).abs() < 1e-10);
    }

    #[test]
    fn limit_of_constant_sequence_is_identity() {
        let s = Subspace::span(3, &[DVector::from_vec(vec![1.0, 2.0, -1.0])], 1e-8);
        let tagged: Vec<(f64, Subspace<f64>)> =
            (0..5).map(|k| (0.2 / (1 << k) as f64, s.clone())).collect();
        let (limit, converged) = subspace_limit(&tagged, &tol()).unwrap();
        assert!(converged);
        assert_eq!(limit.rank(), 1);
        assert!(limit.drift(&s) < 1e-10);
    }

    #[test]
    fn limit_of_rotating_lines_converges_to_axis() {
        let tagged: Vec<(f64, Subspace<f64>)> = (0..8)
            .map(|k| {
                let delta = 1e-5 / (1 << k) as f64;
                (
                    0.2 / (1 << k) as f64,
                    Subspace::span(2, &[vec2(1.0, delta)], 1e-10),
                )
            })
            .collect();
        let (limit, converged) = subspace_limit(&tagged, &tol()).unwrap();
        assert!(converged);
        assert_eq!(limit.rank(), 1);
        let e1 = Subspace::span(2, &[vec2(1.0, 0.0)], 1e-8);
        assert!(limit.drift(&e1) < 1e-3);
    }

    #[test]
    fn limit_of_alternating_axes_is_zero_and_unconverged() {
        let tagged: Vec<(f64, Subspace<f64>)> = (0..6)
            .map(|k| {
                let v = if k % 2 == 0 { vec2(1.0, 0.0) } else { vec2(0.0, 1.0) };
                (0.2 / (1 << k) as f64, Subspace::span(2, &[v], 1e-10))
            })
            .collect();
        let (limit, converged) = subspace_limit(&tagged, &tol()).unwrap();
        assert!(!converged);
        assert_eq!(limit.rank(), 0);
    }

    #[test]
    fn limit_needs_three_scales() {
        let s = Subspace::<f64>::full(2);
        let tagged = vec![(0.2, s.clone()), (0.1, s)];
        assert!(matches!(
            subspace_limit(&tagged, &tol()),
            Err(CoreError::TooFewScales { .. })
        ));
    }

    #[test]
    fn serde_round_trip() {
        let s = Subspace::span(3, &[DVector::from_vec(vec![1.0, 1.0, 0.0])], 1e-8);
        let json = serde_json::to_string(&s).unwrap();
        let back: Subspace<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(back.rank(), 1);
        assert!(back.drift(&s) < 1e-12);
    }
}
