//! Canonical test scenes and their multiscale samplers.
//!
//! A scene is an analytic description of a closed set: polynomial arcs,
//! explicit point sequences, filled regions, or raw clouds, plus markers at
//! points that need geometric refinement. Sampling is deterministic for a
//! fixed seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::geometry::dist;
use crate::jet::{JetSignature, MapJet, Poly};
use crate::scalar::{approx_f64, real, Scalar};
use crate::whitney::{zigzag_field, WhitneyField};

/// One building block of a scene.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Component<T> {
    /// Polynomial map `[t0, t1] → R^n`, one coordinate polynomial per output
    /// dimension (degree ≤ 6 in practice).
    Arc {
        t0: T,
        t1: T,
        components: Vec<Poly<T>>,
    },
    /// An explicit family of points, e.g. a sequence accumulating somewhere.
    PointSequence { points: Vec<Vec<T>> },
    /// A filled disk, rejection-sampled.
    Disk { center: Vec<T>, radius: T },
    /// A filled axis-aligned box, rejection-sampled.
    Box { lo: Vec<T>, hi: Vec<T> },
    /// Points taken verbatim.
    RawCloud { points: Vec<Vec<T>> },
}

/// A scene: components in a common ambient space plus accumulation markers.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Scene<T> {
    pub n: usize,
    pub components: Vec<Component<T>>,
    pub markers: Vec<Vec<T>>,
}

/// Univariate polynomial from plain monomial coefficients.
pub fn poly1<T: Scalar>(mono: &[f64]) -> Poly<T> {
    let p = mono.len().saturating_sub(1);
    let sig = JetSignature::new(1, p.max(0));
    let mut coeffs = Vec::with_capacity(mono.len());
    let mut factorial = 1.0f64;
    for (k, &m) in mono.iter().enumerate() {
        if k > 0 {
            factorial *= k as f64;
        }
        coeffs.push(real::<T>(m * factorial));
    }
    Poly::new(sig, vec![T::zero()], coeffs).expect("univariate poly")
}

/// The order-`p` jet of an arc at parameter `t`, as a map jet `R → R^n`.
pub fn arc_map_jet<T: Scalar>(components: &[Poly<T>], t: T, p: usize) -> Result<MapJet<T>> {
    let sig = JetSignature::new(1, p);
    let mut comps = Vec::with_capacity(components.len());
    for c in components {
        let at_t = c.rebase(&[t]);
        let jet = if c.signature.p > p {
            at_t.truncate(p)?
        } else {
            at_t.extend(p)?
        };
        comps.push(jet);
    }
    MapJet::new(sig, vec![t], comps)
}

fn arc_speed_bound<T: Scalar>(components: &[Poly<T>], t0: T, t1: T) -> T {
    let probes = 256;
    let mut speed = T::zero();
    for k in 0..=probes {
        let t = t0 + (t1 - t0) * real::<T>(k as f64 / probes as f64);
        let mut sq = T::zero();
        for c in components {
            let d = c.rebase(&[t]).coeffs[1];
            sq += d * d;
        }
        speed = speed.max(sq.sqrt());
    }
    speed
}

fn sample_arc<T: Scalar>(
    components: &[Poly<T>],
    t0: T,
    t1: T,
    spacing: T,
    out: &mut Vec<Vec<T>>,
    keep: impl Fn(&[T]) -> bool,
) -> Result<()> {
    if t1 <= t0 {
        return Err(CoreError::DegenerateArc);
    }
    let speed = arc_speed_bound(components, t0, t1).max(real(1e-12));
    let arc_length = (t1 - t0) * speed;
    let steps = (approx_f64(arc_length / spacing) - 1e-9).ceil().max(1.0) as usize;
    for k in 0..=steps {
        let t = t0 + (t1 - t0) * real::<T>(k as f64 / steps as f64);
        let point: Vec<T> = components.iter().map(|c| c.eval(&[t])).collect();
        if keep(&point) {
            out.push(point);
        }
    }
    Ok(())
}

/// Sample a scene at base spacing `delta` with the default number of
/// geometric refinement levels around markers.
pub fn sample<T: Scalar>(scene: &Scene<T>, delta: T, seed: u64) -> Result<Vec<Vec<T>>> {
    sample_with(scene, delta, seed, 8)
}

/// Sample a scene: arcs at spacing `delta` (refined to spacing `delta·2^-j`
/// inside the `2^-j` ball of every marker, `j = 1..=refine_levels`), regions
/// by seeded rejection to a density of one point per `delta^n` cell,
/// sequences and raw clouds verbatim. The output is lexicographically sorted
/// and deduplicated, hence byte-identical for a fixed seed.
pub fn sample_with<T: Scalar>(
    scene: &Scene<T>,
    delta: T,
    seed: u64,
    refine_levels: usize,
) -> Result<Vec<Vec<T>>> {
    if delta <= T::zero() {
        return Err(CoreError::Parse("sampling scale must be positive".into()));
    }
    let mut cloud: Vec<Vec<T>> = Vec::new();
    for (ci, component) in scene.components.iter().enumerate() {
        match component {
            Component::Arc { t0, t1, components } => {
                sample_arc(components, *t0, *t1, delta, &mut cloud, |_| true)?;
                for j in 1..=refine_levels as i32 {
                    let radius = real::<T>(2.0f64.powi(-j));
                    let spacing = delta * radius;
                    for marker in &scene.markers {
                        sample_arc(components, *t0, *t1, spacing, &mut cloud, |pt| {
                            dist(pt, marker) <= radius
                        })?;
                    }
                }
            }
            Component::PointSequence { points } | Component::RawCloud { points } => {
                cloud.extend(points.iter().cloned());
            }
            Component::Disk { center, radius } => {
                if center.len() != 2 {
                    return Err(CoreError::DimensionMismatch {
                        expected: 2,
                        got: center.len(),
                    });
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(ci as u64));
                let measure = std::f64::consts::PI * approx_f64(*radius).powi(2);
                let target = (measure / approx_f64(delta).powi(2)).round().max(1.0) as usize;
                let mut accepted = 0usize;
                while accepted < target {
                    let x = real::<T>(rng.random_range(-1.0..1.0)) * *radius + center[0];
                    let y = real::<T>(rng.random_range(-1.0..1.0)) * *radius + center[1];
                    let p = vec![x, y];
                    if dist(&p, center) <= *radius {
                        cloud.push(p);
                        accepted += 1;
                    }
                }
            }
            Component::Box { lo, hi } => {
                let n = lo.len();
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(ci as u64));
                let mut measure = 1.0;
                for (l, h) in lo.iter().zip(hi) {
                    measure *= approx_f64(*h - *l);
                }
                let target = (measure / approx_f64(delta).powi(n as i32))
                    .round()
                    .max(1.0) as usize;
                for _ in 0..target {
                    let p: Vec<T> = lo
                        .iter()
                        .zip(hi)
                        .map(|(l, h)| *l + (*h - *l) * real::<T>(rng.random_range(0.0..1.0)))
                        .collect();
                    cloud.push(p);
                }
            }
        }
    }
    // sort + dedupe: identical clouds for identical seeds, no coincident points
    cloud.sort_by(|a, b| {
        a.partial_cmp(b)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let tol = real::<T>(1e-12);
    cloud.dedup_by(|a, b| dist(a, b) < tol);
    Ok(cloud)
}

/// The union of the parabolas `y = i·x²`, `i = 0..=p`, all through the
/// origin, marker at the origin.
pub fn scene_parabola_union<T: Scalar>(p: usize) -> Scene<T> {
    let mut components = Vec::with_capacity(p + 1);
    for i in 0..=p {
        components.push(Component::Arc {
            t0: real(-1.0),
            t1: real(1.0),
            components: vec![poly1(&[0.0, 1.0]), poly1(&[0.0, 0.0, i as f64])],
        });
    }
    Scene {
        n: 2,
        components,
        markers: vec![vec![T::zero(), T::zero()]],
    }
}

/// The alternating tangent-line construction: starting from `(1, 1)`, follow
/// the line of slope `2` (odd steps) to the arc `y = -x²`, respectively slope
/// `-2` (even steps) to `y = x²`, always with `x > 0`. Returns the abscissae
/// and ordinates down to `x_min`.
pub fn zigzag_sequence<T: Scalar>(x_min: T) -> (Vec<T>, Vec<T>) {
    let mut xs = vec![T::one()];
    let mut ys = vec![T::one()];
    let one = T::one();
    let two = real::<T>(2.0);
    let mut j = 1usize;
    loop {
        let (x, y) = (xs[j - 1], ys[j - 1]);
        let (next_x, next_y) = if j % 2 == 1 {
            // slope-2 line through (x, y) meets y = -x², x > 0
            let nx = -one + (one - y + two * x).sqrt();
            (nx, -nx * nx)
        } else {
            // slope -2 line meets y = x², x > 0
            let nx = -one + (one + y + two * x).sqrt();
            (nx, nx * nx)
        };
        if next_x < x_min {
            break;
        }
        xs.push(next_x);
        ys.push(next_y);
        j += 1;
    }
    (xs, ys)
}

/// The zigzag scene `X = {0} ∪ {x_j} ⊂ R` together with its order-1 field
/// fixture (`F^0(0) = 0`, `F^0(x_j) = y_j`, `F^1 ≡ 0`).
pub fn scene_zigzag<T: Scalar>(x_min: T) -> Result<(Scene<T>, WhitneyField<T>)> {
    let (mut xs, mut ys) = zigzag_sequence(x_min);
    xs.insert(0, T::zero());
    ys.insert(0, T::zero());
    let field = zigzag_field(&xs, &ys)?;
    let scene = Scene {
        n: 1,
        components: vec![Component::PointSequence {
            points: xs.iter().map(|&x| vec![x]).collect(),
        }],
        markers: vec![vec![T::zero()]],
    };
    Ok((scene, field))
}

/// Builtin scenes by name. `p` parametrizes `parabola_union`.
pub fn builtin_scene<T: Scalar>(name: &str, p: Option<usize>) -> Result<Scene<T>> {
    let arc = |t0: f64, t1: f64, comps: Vec<Poly<T>>, markers: Vec<Vec<T>>, n: usize| Scene {
        n,
        components: vec![Component::Arc {
            t0: real(t0),
            t1: real(t1),
            components: comps,
        }],
        markers,
    };
    match name {
        "segment" => Ok(arc(0.0, 1.0, vec![poly1(&[0.0, 1.0])], vec![], 1)),
        "disk" | "disk_sample" => Ok(Scene {
            n: 2,
            components: vec![Component::Disk {
                center: vec![T::zero(), T::zero()],
                radius: T::one(),
            }],
            markers: vec![],
        }),
        "graph_abs" => Ok(Scene {
            n: 2,
            components: vec![
                Component::Arc {
                    t0: real(-1.0),
                    t1: real(0.0),
                    components: vec![poly1(&[0.0, 1.0]), poly1(&[0.0, -1.0])],
                },
                Component::Arc {
                    t0: real(0.0),
                    t1: real(1.0),
                    components: vec![poly1(&[0.0, 1.0]), poly1(&[0.0, 1.0])],
                },
            ],
            markers: vec![vec![T::zero(), T::zero()]],
        }),
        "cusp" => Ok(arc(
            -1.0,
            1.0,
            vec![poly1(&[0.0, 0.0, 1.0]), poly1(&[0.0, 0.0, 0.0, 1.0])],
            vec![vec![T::zero(), T::zero()]],
            2,
        )),
        "half_parabola" => Ok(arc(
            0.0,
            1.0,
            vec![poly1(&[0.0, 1.0]), poly1(&[0.0, 0.0, 1.0])],
            vec![vec![T::zero(), T::zero()]],
            2,
        )),
        "parabola" => Ok(arc(
            -1.0,
            1.0,
            vec![poly1(&[0.0, 1.0]), poly1(&[0.0, 0.0, 1.0])],
            vec![vec![T::zero(), T::zero()]],
            2,
        )),
        "point_sequence" => {
            let mut points: Vec<Vec<T>> = (1..=100).map(|j| vec![real(1.0 / j as f64)]).collect();
            points.push(vec![T::zero()]);
            Ok(Scene {
                n: 1,
                components: vec![Component::PointSequence { points }],
                markers: vec![vec![T::zero()]],
            })
        }
        "parabola_union" => Ok(scene_parabola_union(p.unwrap_or(1))),
        "zigzag" => Ok(scene_zigzag(real(1e-4))?.0),
        other => Err(CoreError::UnknownScene(other.to_string())),
    }
}

/// Names accepted by [`builtin_scene`].
pub const BUILTIN_SCENES: &[&str] = &[
    "segment",
    "disk",
    "graph_abs",
    "cusp",
    "half_parabola",
    "parabola",
    "point_sequence",
    "parabola_union",
    "zigzag",
];

/// Function data attached to a scene sample.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunctionSpec<T> {
    /// Restriction of a polynomial.
    Polynomial { poly: Poly<T> },
    /// Values listed per sample point, in cloud order.
    PerPoint { values: Vec<T> },
}

impl<T: Scalar> FunctionSpec<T> {
    pub fn eval_on(&self, points: &[Vec<T>]) -> Result<Vec<T>> {
        match self {
            FunctionSpec::Polynomial { poly } => {
                Ok(points.iter().map(|x| poly.eval(x)).collect())
            }
            FunctionSpec::PerPoint { values } => {
                if values.len() != points.len() {
                    return Err(CoreError::ValueMismatch(format!(
                        "{} values for {} points",
                        values.len(),
                        points.len()
                    )));
                }
                Ok(values.clone())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segment_point_count() {
        let scene: Scene<f64> = builtin_scene("segment", None).unwrap();
        let cloud = sample(&scene, 0.1, 0).unwrap();
        assert_eq!(cloud.len(), 11);
    }

    #[test]
    fn sampling_is_deterministic() {
        let scene: Scene<f64> = builtin_scene("disk", None).unwrap();
        let a = sample(&scene, 0.1, 42).unwrap();
        let b = sample(&scene, 0.1, 42).unwrap();
        assert_eq!(a, b);
        let c = sample(&scene, 0.1, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn parabola_arc_is_exact_and_dense() {
        let scene: Scene<f64> = builtin_scene("parabola", None).unwrap();
        let cloud = sample(&scene, 0.01, 0).unwrap();
        assert!(cloud.len() >= 200);
        for p in &cloud {
            assert!((p[1] - p[0] * p[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn markers_refine_spacing_near_origin() {
        let scene: Scene<f64> = builtin_scene("graph_abs", None).unwrap();
        let cloud = sample(&scene, 0.05, 0).unwrap();
        // points inside the 2^-6 ball should be spaced well below delta
        let near: Vec<&Vec<f64>> = cloud.iter().filter(|p| p[0].abs() < 0.015).collect();
        assert!(near.len() > 20, "only {} refined points", near.len());
    }

    #[test]
    fn parabola_union_arcs_meet_only_at_origin() {
        let scene: Scene<f64> = scene_parabola_union(2);
        assert_eq!(scene.components.len(), 3);
        let cloud = sample(&scene, 0.05, 0).unwrap();
        // count points that lie on more than one arc
        for p in &cloud {
            let mut on = 0;
            for i in 0..=2 {
                if (p[1] - i as f64 * p[0] * p[0]).abs() < 1e-12 {
                    on += 1;
                }
            }
            if on > 1 {
                assert!(p[0].abs() < 1e-9 && p[1].abs() < 1e-9, "{p:?}");
            }
        }
    }

    #[test]
    fn zigzag_recursion_matches_quadratic_formula() {
        let (xs, ys) = zigzag_sequence::<f64>(1e-4);
        assert_eq!(xs[0], 1.0);
        assert_eq!(ys[0], 1.0);
        let r2 = std::f64::consts::SQRT_2;
        assert!((xs[1] - (r2 - 1.0)).abs() < 1e-12);
        assert!((ys[1] + (r2 - 1.0) * (r2 - 1.0)).abs() < 1e-12);
        assert!((xs[2] - 0.28718).abs() < 1e-5);
        // strictly decreasing positive abscissae, alternating ordinates
        for j in 1..30.min(xs.len()) {
            assert!(xs[j] > 0.0 && xs[j] < xs[j - 1]);
            assert!(ys[j] * ys[j - 1] < 0.0);
        }
    }

    #[test]
    fn zigzag_consecutive_slopes_are_two() {
        let (xs, ys) = zigzag_sequence::<f64>(1e-3);
        for j in 0..xs.len() - 1 {
            let slope = (ys[j + 1] - ys[j]) / (xs[j + 1] - xs[j]);
            assert!((slope.abs() - 2.0).abs() < 1e-9, "step {j}: slope {slope}");
        }
    }

    #[test]
    fn unknown_scene_is_an_error() {
        assert!(matches!(
            builtin_scene::<f64>("mystery", None),
            Err(CoreError::UnknownScene(_))
        ));
    }
}
