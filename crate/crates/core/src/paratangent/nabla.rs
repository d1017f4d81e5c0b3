//! The graph-paired bundle over a function sample and the function
//! criterion: `f` passes when no saturated fiber contains a vertical vector.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::{min_horizontal_direction, DeltaConfig, DeltaRefineOp};
use crate::bundle::{saturate, Bundle, SaturationTrace};
use crate::config::Tolerances;
use crate::error::{CoreError, Result};
use crate::jet::{delta_functional, deriv_functional, JetSignature};
use crate::scalar::{approx_f64, Scalar};
use crate::subspace::Subspace;
use crate::whitney::WhitneyField;

/// Three-way verdict of the function criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionVerdict {
    Function,
    NotFunction,
    Inconclusive,
}

/// A fiber direction that is (numerically) vertical: unit vector whose jet
/// block nearly vanishes while the value coordinate stays order one.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerticalWitness<T> {
    pub point_index: usize,
    pub point: Vec<T>,
    pub vector: Vec<T>,
    pub horizontal_norm: T,
}

/// Convergence context attached to a verdict.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerdictDiagnostics {
    pub stabilized: bool,
    pub iterations: usize,
    /// Fraction of fiber limits that converged on the last iteration.
    pub limit_convergence: f64,
    /// Whether the verdict agreed across the two finest schedule
    /// truncations; disagreement downgrades to inconclusive.
    pub scale_robust: bool,
    pub scales: Vec<f64>,
}

/// Verdict of the function criterion with its evidence.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriterionVerdict<T> {
    pub is_function: FunctionVerdict,
    pub witness: Option<VerticalWitness<T>>,
    pub fiber_dims: Vec<usize>,
    pub diagnostics: VerdictDiagnostics,
}

/// The saturated graph bundle and its verdict.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound(serialize = "", deserialize = ""))]
pub struct NablaResult<T: Scalar> {
    /// Bundle over the sample with ambient `P_p* × R`: the first `dim P_p`
    /// coordinates are the jet block, the last is the value coordinate.
    pub bundle: Bundle<T>,
    pub signature: JetSignature,
    pub verdict: CriterionVerdict<T>,
    pub trace: SaturationTrace,
}

fn graph_seed<T: Scalar>(
    points: &[Vec<T>],
    values: &[T],
    signature: JetSignature,
    tol: &Tolerances<T>,
) -> Result<Bundle<T>> {
    if points.len() != values.len() {
        return Err(CoreError::ValueMismatch(format!(
            "{} points but {} values",
            points.len(),
            values.len()
        )));
    }
    let dim = signature.dim();
    let fibers = points
        .iter()
        .zip(values)
        .map(|(a, &fa)| {
            let delta = delta_functional(a, signature).coords_at_origin();
            let mut seed = DVector::zeros(dim + 1);
            for i in 0..dim {
                seed[i] = delta[i];
            }
            seed[dim] = fa;
            Subspace::span(dim + 1, &[seed], tol.eps_rank)
        })
        .collect();
    Bundle::new(dim + 1, points.to_vec(), fibers)
}

/// Scan fibers for vertical directions; returns the worst offender.
fn vertical_scan<T: Scalar>(
    bundle: &Bundle<T>,
    jet_dim: usize,
    tol: &Tolerances<T>,
) -> Option<VerticalWitness<T>> {
    let mut worst: Option<VerticalWitness<T>> = None;
    for (i, fiber) in bundle.fibers.iter().enumerate() {
        if let Some((sigma, vector)) = min_horizontal_direction(fiber, jet_dim) {
            if sigma < tol.eps_vertical
                && worst
                    .as_ref()
                    .map_or(true, |w| sigma < w.horizontal_norm)
            {
                worst = Some(VerticalWitness {
                    point_index: i,
                    point: bundle.points[i].clone(),
                    vector: vector.iter().copied().collect(),
                    horizontal_norm: sigma,
                });
            }
        }
    }
    worst
}

/// Build `∇^p f` over a sample and decide the function criterion.
///
/// The bundle is seeded with the lines through `(δ_a, f(a))`, saturated under
/// the constrained-sum refinement in `P_p* × R`, and a fiber holds a
/// vertical vector when some unit element has jet-block norm below
/// `eps_vertical`. The verdict is recomputed with the finest scale dropped;
/// disagreement is reported as inconclusive rather than silently resolved.
pub fn nabla_p<T: Scalar>(
    points: &[Vec<T>],
    values: &[T],
    config: &DeltaConfig<T>,
    tol: &Tolerances<T>,
) -> Result<NablaResult<T>> {
    if points.is_empty() {
        return Err(CoreError::TooFewPoints { needed: 1, got: 0 });
    }
    let signature = JetSignature::new(points[0].len(), config.p);
    let jet_dim = signature.dim();
    let op = DeltaRefineOp::new(signature, config);

    let seed = graph_seed(points, values, signature, tol)?;
    let (bundle, trace) = saturate(&seed, &op, &config.schedule, tol)?;
    let witness = vertical_scan(&bundle, jet_dim, tol);
    let primary_is_function = witness.is_none();

    // scale robustness: drop the finest scale and compare
    let scale_robust = if config.schedule.len() > 1 {
        let truncated = config.schedule.truncated(1)?;
        let coarse_config = DeltaConfig {
            schedule: truncated,
            ..config.clone()
        };
        let coarse_op = DeltaRefineOp::new(signature, &coarse_config);
        let (coarse_bundle, _) = saturate(&seed, &coarse_op, &coarse_config.schedule, tol)?;
        let coarse_is_function = vertical_scan(&coarse_bundle, jet_dim, tol).is_none();
        coarse_is_function == primary_is_function
    } else {
        true
    };

    let is_function = if !scale_robust {
        FunctionVerdict::Inconclusive
    } else if primary_is_function {
        FunctionVerdict::Function
    } else {
        FunctionVerdict::NotFunction
    };

    let verdict = CriterionVerdict {
        is_function,
        witness,
        fiber_dims: bundle.dims(),
        diagnostics: VerdictDiagnostics {
            stabilized: trace.stabilized,
            iterations: trace.iterations,
            limit_convergence: trace.limit_convergence.last().copied().unwrap_or(1.0),
            scale_robust,
            scales: config
                .schedule
                .scales()
                .iter()
                .map(|&s| approx_f64(s))
                .collect(),
        },
    };

    Ok(NablaResult {
        bundle,
        signature,
        verdict,
        trace,
    })
}

/// Evaluate the saturated graph bundle as a linear map: find the fiber
/// element whose jet block is `xi` and return its value coordinate along
/// with the solve residual. Errors when `xi` lies outside the fiber's jet
/// block by more than the angle tolerance.
pub fn nabla_value<T: Scalar>(
    result: &NablaResult<T>,
    point_index: usize,
    xi: &DVector<T>,
    tol: &Tolerances<T>,
) -> Result<(T, T)> {
    let jet_dim = result.signature.dim();
    if point_index >= result.bundle.len() {
        return Err(CoreError::PointNotInSample(
            point_index,
            result.bundle.len(),
        ));
    }
    let fiber = &result.bundle.fibers[point_index];
    if fiber.rank() == 0 {
        return Err(CoreError::OutsideFiber { residual: 1.0 });
    }
    let basis = fiber.basis();
    let horizontal = basis.rows(0, jet_dim).clone_owned();
    let svd = horizontal.clone().svd(true, true);
    let coeffs = svd
        .solve(xi, tol.eps_rank)
        .map_err(|_| CoreError::OutsideFiber { residual: 1.0 })?;
    let residual = (&horizontal * &coeffs - xi).norm();
    let allowed = tol.theta_tol.sin() * xi.norm() + tol.eps_rank;
    if residual > allowed {
        return Err(CoreError::OutsideFiber {
            residual: approx_f64(residual),
        });
    }
    let value_row = basis.row(jet_dim);
    Ok(((value_row * &coeffs)[(0, 0)], residual))
}

/// Extract a Whitney field from a saturated graph bundle by evaluating it on
/// the derivative functionals `D^α(a)`. Points where some `D^α(a)` falls
/// outside the fiber keep a best-effort value and are flagged incomplete.
pub fn field_from_nabla<T: Scalar>(
    result: &NablaResult<T>,
    tol: &Tolerances<T>,
) -> Result<(WhitneyField<T>, Vec<bool>)> {
    let signature = result.signature;
    let table = signature.table();
    let mut jets = Vec::with_capacity(result.bundle.len());
    let mut complete = Vec::with_capacity(result.bundle.len());
    for (i, point) in result.bundle.points.iter().enumerate() {
        let mut row = Vec::with_capacity(signature.dim());
        let mut all_inside = true;
        for alpha in table.multiindices() {
            let functional = deriv_functional(alpha, point, signature)?;
            let xi = functional.coords_at_origin();
            match nabla_value(result, i, &xi, tol) {
                Ok((value, _)) => row.push(value),
                Err(CoreError::OutsideFiber { .. }) => {
                    all_inside = false;
                    // best effort: value of the projection onto the fiber
                    let fiber = &result.bundle.fibers[i];
                    let basis = fiber.basis();
                    if fiber.rank() == 0 {
                        row.push(T::zero());
                    } else {
                        let horizontal = basis.rows(0, signature.dim()).clone_owned();
                        let svd = horizontal.clone().svd(true, true);
                        let coeffs = svd
                            .solve(&xi, tol.eps_rank)
                            .unwrap_or_else(|_| DVector::zeros(fiber.rank()));
                        row.push((basis.row(signature.dim()) * &coeffs)[(0, 0)]);
                    }
                }
                Err(e) => return Err(e),
            }
        }
        jets.push(row);
        complete.push(all_inside);
    }
    Ok((
        WhitneyField::new(signature, result.bundle.points.clone(), jets)?,
        complete,
    ))
}
