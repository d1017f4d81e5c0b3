//! Bundles of linear subspaces over finite samples, the refinement-rule
//! contract, and saturation with the `2r` cap.

use serde::{Deserialize, Serialize};

use crate::config::{Schedule, Tolerances};
use crate::error::{CoreError, Result};
use crate::geometry::{dist, NeighborGrid};
use crate::scalar::{approx_f64, real, Scalar};
use crate::subspace::{limit_window_lenient, Subspace};

/// A subspace of `V = R^ambient_dim` attached to every sample point.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound(serialize = "", deserialize = ""))]
pub struct Bundle<T: Scalar> {
    pub ambient_dim: usize,
    pub points: Vec<Vec<T>>,
    pub fibers: Vec<Subspace<T>>,
}

impl<T: Scalar> Bundle<T> {
    pub fn new(ambient_dim: usize, points: Vec<Vec<T>>, fibers: Vec<Subspace<T>>) -> Result<Self> {
        if points.len() != fibers.len() {
            return Err(CoreError::ValueMismatch(format!(
                "{} points but {} fibers",
                points.len(),
                fibers.len()
            )));
        }
        for f in &fibers {
            if f.ambient_dim() != ambient_dim {
                return Err(CoreError::DimensionMismatch {
                    expected: ambient_dim,
                    got: f.ambient_dim(),
                });
            }
        }
        Ok(Bundle {
            ambient_dim,
            points,
            fibers,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.fibers.iter().map(|f| f.rank()).collect()
    }
}

/// Outcome of one refinement application.
pub struct RefineOutcome<T: Scalar> {
    pub bundle: Bundle<T>,
    /// How many fiber limits converged, out of how many were attempted.
    pub limits_converged: usize,
    pub limits_total: usize,
}

/// A bundle refinement rule: one application of a Glaeser-type operation,
/// taking closures along the scale schedule. Implementations must contain
/// the input fiberwise and read only fibers within `locality_radius` of each
/// base point.
pub trait GlaeserOp<T: Scalar> {
    fn refine(
        &self,
        bundle: &Bundle<T>,
        schedule: &Schedule<T>,
        tol: &Tolerances<T>,
    ) -> Result<RefineOutcome<T>>;

    /// Radius beyond which edits to the bundle cannot change a fiber in one
    /// application.
    fn locality_radius(&self, schedule: &Schedule<T>) -> T {
        schedule.coarsest()
    }
}

/// The span-closure operation: each new fiber is the span of the old fiber
/// together with the limit, along the schedule, of the joint span of all
/// fibers in shrinking balls.
pub struct SpanClosureOp;

impl<T: Scalar> GlaeserOp<T> for SpanClosureOp {
    fn refine(
        &self,
        bundle: &Bundle<T>,
        schedule: &Schedule<T>,
        tol: &Tolerances<T>,
    ) -> Result<RefineOutcome<T>> {
        let grid = NeighborGrid::build(&bundle.points, schedule.coarsest());
        let mut fibers = Vec::with_capacity(bundle.len());
        let mut converged_count = 0usize;
        for (i, point) in bundle.points.iter().enumerate() {
            let mut per_scale: Vec<Subspace<T>> = Vec::with_capacity(schedule.len());
            for &s in schedule.scales() {
                let mut cols = bundle.fibers[i].basis_columns();
                for (j, _) in grid.within(point, s, Some(i)) {
                    cols.extend(bundle.fibers[j].basis_columns());
                }
                per_scale.push(Subspace::span(bundle.ambient_dim, &cols, tol.eps_rank));
            }
            let refs: Vec<&Subspace<T>> = per_scale.iter().collect();
            let (limit, converged) = limit_window_lenient(&refs, bundle.ambient_dim, tol);
            if converged {
                converged_count += 1;
            }
            fibers.push(bundle.fibers[i].sum(&limit, tol.eps_rank)?);
        }
        Ok(RefineOutcome {
            bundle: Bundle::new(bundle.ambient_dim, bundle.points.clone(), fibers)?,
            limits_converged: converged_count,
            limits_total: bundle.len(),
        })
    }
}

/// Per-iteration fiber dimensions and the stabilization record of a
/// saturation run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SaturationTrace {
    /// `dims[i][a]`: fiber dimension at point `a` after `i` applications
    /// (row 0 is the seed).
    pub dims: Vec<Vec<usize>>,
    pub iterations: usize,
    pub cap: usize,
    pub stabilized: bool,
    /// Fraction of fiber limits that converged, per iteration.
    pub limit_convergence: Vec<f64>,
}

/// Iterate a refinement rule until the fiber dimensions agree on two
/// consecutive iterations (and the fibers stop moving by more than
/// `theta_tol`), capped at `2r` applications, `r` the ambient dimension.
///
/// Fiber dimensions must be nondecreasing along the way; a decrease means
/// the rule is not a refinement and is reported as an error.
pub fn saturate<T: Scalar>(
    bundle: &Bundle<T>,
    op: &dyn GlaeserOp<T>,
    schedule: &Schedule<T>,
    tol: &Tolerances<T>,
) -> Result<(Bundle<T>, SaturationTrace)> {
    let cap = 2 * bundle.ambient_dim.max(1);
    let mut dims = vec![bundle.dims()];
    let mut limit_convergence = Vec::new();
    let mut current = bundle.clone();
    let mut stabilized = false;
    let mut iterations = 0usize;

    for _ in 0..cap {
        let outcome = op.refine(&current, schedule, tol)?;
        iterations += 1;
        let new_dims = outcome.bundle.dims();
        let old_dims = dims.last().expect("seed dims recorded");
        let mut max_drift = T::zero();
        for (a, (old, new)) in old_dims.iter().zip(&new_dims).enumerate() {
            if new < old {
                return Err(CoreError::NonMonotoneSaturation { point: a });
            }
            max_drift = max_drift.max(current.fibers[a].drift(&outcome.bundle.fibers[a]));
        }
        limit_convergence.push(if outcome.limits_total == 0 {
            1.0
        } else {
            outcome.limits_converged as f64 / outcome.limits_total as f64
        });
        let unchanged = *old_dims == new_dims && max_drift < tol.theta_tol;
        dims.push(new_dims);
        current = outcome.bundle;
        if unchanged {
            stabilized = true;
            break;
        }
    }

    Ok((
        current,
        SaturationTrace {
            dims,
            iterations,
            cap,
            stabilized,
            limit_convergence,
        },
    ))
}

/// One violation of a refinement-rule axiom.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AxiomViolation<T> {
    pub point_index: usize,
    pub angle: T,
}

/// Containment and locality probes for a refinement rule on a fixture.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AxiomReport<T> {
    pub containment_violations: Vec<AxiomViolation<T>>,
    pub locality_violations: Vec<AxiomViolation<T>>,
    pub pass: bool,
}

/// Check the two refinement-rule axioms on a fixture: every old fiber is
/// contained in the refined one, and editing the bundle outside the declared
/// locality radius of a point leaves that point's refined fiber unchanged.
pub fn glaeser_axiom_check<T: Scalar>(
    op: &dyn GlaeserOp<T>,
    bundle: &Bundle<T>,
    schedule: &Schedule<T>,
    tol: &Tolerances<T>,
) -> Result<AxiomReport<T>> {
    let refined = op.refine(bundle, schedule, tol)?.bundle;
    let mut containment_violations = Vec::new();
    for i in 0..bundle.len() {
        let angle = bundle.fibers[i].containment_angle(&refined.fibers[i]);
        if angle > tol.theta_tol {
            containment_violations.push(AxiomViolation {
                point_index: i,
                angle,
            });
        }
    }

    let mut locality_violations = Vec::new();
    let radius = op.locality_radius(schedule);
    let probes: Vec<usize> = (0..bundle.len().min(5))
        .map(|k| k * bundle.len() / bundle.len().min(5).max(1))
        .collect();
    for &probe in &probes {
        let mut edited = bundle.clone();
        let mut touched = false;
        for (j, point) in bundle.points.iter().enumerate() {
            if dist(point, &bundle.points[probe]) > radius {
                edited.fibers[j] = if bundle.fibers[j].rank() < bundle.ambient_dim {
                    Subspace::full(bundle.ambient_dim)
                } else {
                    Subspace::zero(bundle.ambient_dim)
                };
                touched = true;
            }
        }
        if !touched {
            continue;
        }
        let refined_edited = op.refine(&edited, schedule, tol)?.bundle;
        let angle = refined.fibers[probe].drift(&refined_edited.fibers[probe]);
        if angle > tol.theta_tol {
            locality_violations.push(AxiomViolation {
                point_index: probe,
                angle,
            });
        }
    }

    let pass = containment_violations.is_empty() && locality_violations.is_empty();
    Ok(AxiomReport {
        containment_violations,
        locality_violations,
        pass,
    })
}

/// A fiber whose dimension falls below that of arbitrarily close neighbors.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UscWarning {
    pub point_index: usize,
    pub dim: usize,
    pub neighbor_max: usize,
}

/// Upper-semicontinuity probe for a saturated bundle: each point's fiber
/// dimension is compared against the fibers in its immediate cluster (a ball
/// of 1.5 nearest-neighbor gaps). Shortfalls are reported as
/// numerical-convergence warnings, not errors.
pub fn usc_probe<T: Scalar>(bundle: &Bundle<T>) -> Vec<UscWarning> {
    if bundle.len() < 2 {
        return Vec::new();
    }
    let mut warnings = Vec::new();
    // coarse upper bound for the grid cell: the largest nearest-neighbor gap
    let mut max_gap = T::zero();
    let mut gaps = Vec::with_capacity(bundle.len());
    for (i, p) in bundle.points.iter().enumerate() {
        let mut nearest = T::max_value().expect("bounded scalar");
        for (j, q) in bundle.points.iter().enumerate() {
            if i != j {
                nearest = nearest.min(dist(p, q));
            }
        }
        gaps.push(nearest);
        max_gap = max_gap.max(nearest);
    }
    let grid = NeighborGrid::build(&bundle.points, max_gap * real::<T>(1.5));
    for (i, p) in bundle.points.iter().enumerate() {
        let radius = gaps[i] * real::<T>(1.5);
        let neighbor_max = grid
            .within(p, radius, Some(i))
            .iter()
            .map(|&(j, _)| bundle.fibers[j].rank())
            .max()
            .unwrap_or(0);
        if neighbor_max > bundle.fibers[i].rank() {
            warnings.push(UscWarning {
                point_index: i,
                dim: bundle.fibers[i].rank(),
                neighbor_max,
            });
        }
    }
    warnings
}

/// Echo of `approx_f64` for trace serialization helpers.
pub fn dims_table_f64<T: Scalar>(scales: &[T]) -> Vec<f64> {
    scales.iter().map(|&s| approx_f64(s)).collect()
}
