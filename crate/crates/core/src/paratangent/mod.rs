//! Paratangent bundles: the order-1 secant construction and its order-`p`
//! generalization through constrained sums of dual-jet functionals.
//!
//! Fibers live in `P_p(R^n)*`, coordinatized against the monomial basis at
//! the origin, so that fibers at different base points share one ambient
//! space and the subspace toolkit applies fiberwise.

mod nabla;
mod zariski;
mod morphism;

pub use morphism::{composite_flat_test, pushforward_bundle, CompositeFit, MorphismReport};
pub use nabla::{
    field_from_nabla, nabla_p, nabla_value, CriterionVerdict, FunctionVerdict, NablaResult,
    VerdictDiagnostics, VerticalWitness,
};
pub use zariski::{stability_probe, vanishing_basis, zariski_tp, StabilityTable, ZariskiOutput};

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::bundle::{saturate, Bundle, GlaeserOp, RefineOutcome, SaturationTrace, SpanClosureOp};
use crate::config::{Schedule, Tolerances};
use crate::error::{CoreError, Result};
use crate::geometry::NeighborGrid;
use crate::jet::{delta_functional, JetDual, JetSignature};
use crate::multiindex::BasisTable;
use crate::scalar::Scalar;
use crate::subspace::{limit_window_lenient, Subspace};

/// Configuration of the order-`p` refinement.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeltaConfig<T> {
    /// Jet order.
    pub p: usize,
    /// Support size of the constrained sums minus one; pairs are `k = 1`.
    pub k: usize,
    /// Scale schedule for closures and limits.
    pub schedule: Schedule<T>,
    /// Per-point neighbor budget, nearest first.
    pub neighbor_cap: usize,
}

impl<T: Scalar> DeltaConfig<T> {
    pub fn new(p: usize, schedule: Schedule<T>) -> Self {
        DeltaConfig {
            p,
            k: 1,
            schedule,
            neighbor_cap: 12,
        }
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k.max(1);
        self
    }

    pub fn with_neighbor_cap(mut self, cap: usize) -> Self {
        self.neighbor_cap = cap.max(1);
        self
    }
}

/// Dual coordinates `ξ_β(b)` of a functional given in origin-chart
/// coordinates, restricted to the first `table.dim()` entries of `col`.
pub(crate) fn dual_coords_at<T: Scalar>(
    col: &DVector<T>,
    table: &BasisTable,
    point: &[T],
) -> Vec<T> {
    let dim = table.dim();
    let shift: Vec<T> = point.iter().map(|x| -*x).collect();
    let mut coords = vec![T::zero(); dim];
    for (i, beta) in table.multiindices().iter().enumerate() {
        let mut acc = T::zero();
        for (j, alpha) in table.multiindices().iter().enumerate() {
            if alpha.order() > beta.order() {
                break;
            }
            if col[j] == T::zero() {
                continue;
            }
            if let Some(diff) = beta.checked_sub(alpha) {
                acc += diff.pow(&shift) / diff.factorial::<T>() * col[j];
            }
        }
        coords[i] = acc;
    }
    coords
}

/// Smallest horizontal magnitude over unit fiber directions: the singular
/// direction of the first `horizontal_rows` rows of the fiber basis. Returns
/// `(σ_min, unit fiber vector attaining it)`, or `None` for a zero fiber.
pub(crate) fn min_horizontal_direction<T: Scalar>(
    fiber: &Subspace<T>,
    horizontal_rows: usize,
) -> Option<(T, DVector<T>)> {
    let rank = fiber.rank();
    if rank == 0 {
        return None;
    }
    let basis = fiber.basis();
    let horizontal = basis.rows(0, horizontal_rows).clone_owned();
    let gram = horizontal.transpose() * &horizontal;
    let eigen = gram.symmetric_eigen();
    let mut best = 0usize;
    for i in 1..rank {
        if eigen.eigenvalues[i] < eigen.eigenvalues[best] {
            best = i;
        }
    }
    let lambda = eigen.eigenvalues[best].max(T::zero());
    let v = eigen.eigenvectors.column(best).clone_owned();
    Some((lambda.sqrt(), basis * v))
}

/// The order-1 secant bundle: at each point, normalized secants of sample
/// pairs inside shrinking balls, spanned per scale and passed to the limit.
/// Isolated points receive the zero fiber.
pub fn secant_ptg<T: Scalar>(
    points: &[Vec<T>],
    schedule: &Schedule<T>,
    neighbor_cap: usize,
    tol: &Tolerances<T>,
) -> Result<Bundle<T>> {
    if points.is_empty() {
        return Err(CoreError::TooFewPoints { needed: 1, got: 0 });
    }
    let n = points[0].len();
    let grid = NeighborGrid::build(points, schedule.coarsest());
    let mut fibers = Vec::with_capacity(points.len());
    for (i, center) in points.iter().enumerate() {
        let nbrs = grid.within_capped(center, schedule.coarsest(), None, neighbor_cap + 1);
        // local cluster includes the point itself (it is within radius 0)
        let cluster: Vec<usize> = nbrs.iter().map(|&(j, _)| j).collect();
        let radius_of = |j: usize| crate::geometry::dist(center, &points[j]);
        let mut tagged: Vec<(T, Subspace<T>)> = Vec::new();
        for &s in schedule.scales() {
            let local: Vec<usize> = cluster
                .iter()
                .copied()
                .filter(|&j| radius_of(j) <= s)
                .collect();
            if local.len() < 2 {
                continue;
            }
            let mut secants = Vec::new();
            for (ai, &a) in local.iter().enumerate() {
                for &b in &local[ai + 1..] {
                    let dir: DVector<T> = DVector::from_fn(n, |r, _| points[a][r] - points[b][r]);
                    let norm = dir.norm();
                    if norm > T::zero() {
                        secants.push(dir / norm);
                    }
                }
            }
            if !secants.is_empty() {
                tagged.push((s, Subspace::span(n, &secants, tol.eps_rank)));
            }
        }
        let refs: Vec<&Subspace<T>> = tagged.iter().map(|(_, s)| s).collect();
        let (limit, _converged) = limit_window_lenient(&refs, n, tol);
        let _ = i;
        fibers.push(limit);
    }
    Bundle::new(n, points.to_vec(), fibers)
}

/// Glaeser's order-1 paratangent bundle: the secant bundle saturated under
/// the span-closure operation.
pub fn tau1<T: Scalar>(
    points: &[Vec<T>],
    schedule: &Schedule<T>,
    neighbor_cap: usize,
    tol: &Tolerances<T>,
) -> Result<(Bundle<T>, SaturationTrace)> {
    let seed = secant_ptg(points, schedule, neighbor_cap, tol)?;
    saturate(&seed, &SpanClosureOp, schedule, tol)
}

/// The refinement rule behind the order-`p` paratangent bundle: per base
/// point, constrained sums of saturated fiber elements over nearby tuples,
/// pooled per scale, with the limit of the pools joined onto the old fiber.
///
/// Fibers may live in `P_p*` (ambient = jet dimension) or `P_p* × R`
/// (one trailing value coordinate); the constraint reads only the jet block.
pub struct DeltaRefineOp<T> {
    table: Arc<BasisTable>,
    k: usize,
    neighbor_cap: usize,
    _marker: std::marker::PhantomData<T>,
}

impl<T: Scalar> DeltaRefineOp<T> {
    pub fn new(signature: JetSignature, config: &DeltaConfig<T>) -> Self {
        DeltaRefineOp {
            table: signature.table(),
            k: config.k.max(1),
            neighbor_cap: config.neighbor_cap.max(1),
            _marker: std::marker::PhantomData,
        }
    }

    /// Candidate directions at one base point, tagged with the coarsest
    /// distance among the tuple members (the scale at which the candidate
    /// becomes visible).
    fn candidates(
        &self,
        base_fiber: &Subspace<T>,
        nbrs: &[(usize, T)],
        saturated: &[Vec<DVector<T>>],
        tol: &Tolerances<T>,
    ) -> Vec<(T, DVector<T>)> {
        let mut out = Vec::new();
        let mut tuple: Vec<(usize, usize, bool)> = Vec::new();
        for support in 1..=self.k {
            self.enumerate(
                base_fiber,
                nbrs,
                saturated,
                support,
                0,
                &mut tuple,
                tol,
                &mut out,
            );
        }
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn enumerate(
        &self,
        base_fiber: &Subspace<T>,
        nbrs: &[(usize, T)],
        saturated: &[Vec<DVector<T>>],
        slots_left: usize,
        start: usize,
        tuple: &mut Vec<(usize, usize, bool)>,
        tol: &Tolerances<T>,
        out: &mut Vec<(T, DVector<T>)>,
    ) {
        if slots_left == 0 {
            let mut cand = DVector::zeros(base_fiber.ambient_dim());
            let mut resolution = T::zero();
            for &(pos, col, negate) in tuple.iter() {
                let term = &saturated[pos][col];
                if negate {
                    cand -= term;
                } else {
                    cand += term;
                }
                resolution = resolution.max(nbrs[pos].1);
            }
            let residual = base_fiber.residual(&cand);
            let norm = residual.norm();
            if norm > tol.eps_rank {
                out.push((resolution, residual / norm));
            }
            return;
        }
        for pos in start..nbrs.len() {
            for col in 0..saturated[pos].len() {
                // the leading slot is positive; later slots carry both signs
                let signs: &[bool] = if tuple.is_empty() { &[false] } else { &[false, true] };
                for &negate in signs {
                    tuple.push((pos, col, negate));
                    self.enumerate(
                        base_fiber,
                        nbrs,
                        saturated,
                        slots_left - 1,
                        pos,
                        tuple,
                        tol,
                        out,
                    );
                    tuple.pop();
                }
            }
        }
    }
}

impl<T: Scalar> GlaeserOp<T> for DeltaRefineOp<T> {
    fn refine(
        &self,
        bundle: &Bundle<T>,
        schedule: &Schedule<T>,
        tol: &Tolerances<T>,
    ) -> Result<RefineOutcome<T>> {
        let jet_dim = self.table.dim();
        if bundle.ambient_dim < jet_dim {
            return Err(CoreError::DimensionMismatch {
                expected: jet_dim,
                got: bundle.ambient_dim,
            });
        }
        let grid = NeighborGrid::build(&bundle.points, schedule.coarsest());
        // dual coordinates of every fiber basis column at its own base point
        let own_coords: Vec<Vec<Vec<T>>> = bundle
            .points
            .iter()
            .zip(&bundle.fibers)
            .map(|(pt, fiber)| {
                fiber
                    .basis_columns()
                    .iter()
                    .map(|col| dual_coords_at(col, &self.table, pt))
                    .collect()
            })
            .collect();

        let p = self.table.p;
        let mut fibers = Vec::with_capacity(bundle.len());
        let mut limits_converged = 0usize;
        let mut limits_total = 0usize;

        for (ci, center) in bundle.points.iter().enumerate() {
            let nbrs =
                grid.within_capped(center, schedule.coarsest(), Some(ci), self.neighbor_cap);
            if nbrs.is_empty() {
                fibers.push(bundle.fibers[ci].clone());
                continue;
            }
            // constraint-saturated basis elements per neighbor
            let saturated: Vec<Vec<DVector<T>>> = nbrs
                .iter()
                .map(|&(j, d)| {
                    bundle.fibers[j]
                        .basis_columns()
                        .into_iter()
                        .zip(&own_coords[j])
                        .map(|(col, coords)| {
                            let mut bound = T::zero();
                            for (slot, alpha) in self.table.multiindices().iter().enumerate() {
                                let weight = d.powi((p - alpha.order()) as i32);
                                bound = bound.max(weight * coords[slot].abs());
                            }
                            if bound > T::default_epsilon() {
                                col / bound
                            } else {
                                col // jet block vanishes: constraint is vacuous
                            }
                        })
                        .collect()
                })
                .collect();

            let candidates = self.candidates(&bundle.fibers[ci], &nbrs, &saturated, tol);
            let mut tagged: Vec<(T, Subspace<T>)> = Vec::new();
            for &s in schedule.scales() {
                let pool: Vec<DVector<T>> = candidates
                    .iter()
                    .filter(|(res, _)| *res <= s)
                    .map(|(_, dir)| dir.clone())
                    .collect();
                if !pool.is_empty() {
                    tagged.push((s, Subspace::span(bundle.ambient_dim, &pool, tol.eps_rank)));
                }
            }
            let refs: Vec<&Subspace<T>> = tagged.iter().map(|(_, s)| s).collect();
            if refs.len() >= 3 {
                limits_total += 1;
            }
            let (limit, converged) = limit_window_lenient(&refs, bundle.ambient_dim, tol);
            if converged && refs.len() >= 3 {
                limits_converged += 1;
            }
            fibers.push(bundle.fibers[ci].sum(&limit, tol.eps_rank)?);
        }

        Ok(RefineOutcome {
            bundle: Bundle::new(bundle.ambient_dim, bundle.points.clone(), fibers)?,
            limits_converged,
            limits_total,
        })
    }
}

/// Seed bundle of delta-functional lines: the fiber at `a` is the span of
/// `δ_a` in origin-chart coordinates.
pub fn delta_seed_bundle<T: Scalar>(
    points: &[Vec<T>],
    signature: JetSignature,
    tol: &Tolerances<T>,
) -> Result<Bundle<T>> {
    let dim = signature.dim();
    let fibers = points
        .iter()
        .map(|a| {
            let coords = delta_functional(a, signature).coords_at_origin();
            Subspace::span(dim, &[coords], tol.eps_rank)
        })
        .collect();
    Bundle::new(dim, points.to_vec(), fibers)
}

/// The order-`p` paratangent bundle of a sample: the delta-functional seed
/// saturated under the constrained-sum refinement.
pub fn tau_p<T: Scalar>(
    points: &[Vec<T>],
    config: &DeltaConfig<T>,
    tol: &Tolerances<T>,
) -> Result<(Bundle<T>, SaturationTrace)> {
    if points.is_empty() {
        return Err(CoreError::TooFewPoints { needed: 1, got: 0 });
    }
    let signature = JetSignature::new(points[0].len(), config.p);
    let seed = delta_seed_bundle(points, signature, tol)?;
    let op = DeltaRefineOp::new(signature, config);
    saturate(&seed, &op, &config.schedule, tol)
}

/// Slice an order-`q` bundle down to order `p`: intersect each fiber with
/// the embedded copy of `P_p*` at its base point and express the result in
/// `P_p*` coordinates.
pub fn tau_slice<T: Scalar>(
    bundle: &Bundle<T>,
    q: usize,
    p: usize,
    tol: &Tolerances<T>,
) -> Result<Bundle<T>> {
    if q < p {
        return Err(CoreError::BadTruncation { p, q });
    }
    if bundle.is_empty() {
        return Err(CoreError::TooFewPoints { needed: 1, got: 0 });
    }
    let n = bundle.points[0].len();
    let sig_q = JetSignature::new(n, q);
    let sig_p = JetSignature::new(n, p);
    if bundle.ambient_dim != sig_q.dim() {
        return Err(CoreError::DimensionMismatch {
            expected: sig_q.dim(),
            got: bundle.ambient_dim,
        });
    }
    let mut fibers = Vec::with_capacity(bundle.len());
    for (a, fiber) in bundle.points.iter().zip(&bundle.fibers) {
        // embedded P_p* at a, in P_q* origin coordinates
        let embedded_basis: Vec<DVector<T>> = (0..sig_p.dim())
            .map(|slot| {
                let mut coords = vec![T::zero(); sig_p.dim()];
                coords[slot] = T::one();
                JetDual::new(sig_p, a.clone(), coords)
                    .expect("dual basis element")
                    .embed(a, q)
                    .expect("q >= p")
                    .coords_at_origin()
            })
            .collect();
        let embedded = Subspace::span(sig_q.dim(), &embedded_basis, tol.eps_rank);
        let meet = fiber.intersect(&embedded, tol.eps_rank)?;
        // express the intersection in P_p* coordinates at the origin
        let cols: Vec<DVector<T>> = meet
            .basis_columns()
            .iter()
            .map(|col| {
                JetDual::from_origin_coords(sig_q, col)
                    .restrict(a, p)
                    .expect("restriction within order")
                    .coords_at_origin()
            })
            .collect();
        fibers.push(Subspace::span(sig_p.dim(), &cols, tol.eps_rank));
    }
    Bundle::new(sig_p.dim(), bundle.points.clone(), fibers)
}
