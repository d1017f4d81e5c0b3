//! Whitney fields on finite samples: Taylor remainders, scaled difference
//! quotients, and the modulus scan behind the extension condition.

mod oned;

pub use oned::{divided_difference, extend_1d, whitney_1d_check, PiecewisePoly};

use serde::{Deserialize, Serialize};

use crate::config::{Schedule, Tolerances};
use crate::error::{CoreError, Result};
use crate::geometry::{dist, NeighborGrid};
use crate::jet::{JetDual, JetSignature, Poly};
use crate::multiindex::MultiIndex;
use crate::scalar::{real, Scalar};

/// A field of jets over a finite sample: per point `i`, the array
/// `jets[i][α] = F^α(points[i])` in the shared basis order, `F^0` being the
/// function value.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WhitneyField<T> {
    pub signature: JetSignature,
    pub points: Vec<Vec<T>>,
    pub jets: Vec<Vec<T>>,
}

impl<T: Scalar> WhitneyField<T> {
    pub fn new(signature: JetSignature, points: Vec<Vec<T>>, jets: Vec<Vec<T>>) -> Result<Self> {
        if points.len() != jets.len() {
            return Err(CoreError::ValueMismatch(format!(
                "{} points but {} jet arrays",
                points.len(),
                jets.len()
            )));
        }
        for p in &points {
            if p.len() != signature.n {
                return Err(CoreError::DimensionMismatch {
                    expected: signature.n,
                    got: p.len(),
                });
            }
        }
        for j in &jets {
            if j.len() != signature.dim() {
                return Err(CoreError::DimensionMismatch {
                    expected: signature.dim(),
                    got: j.len(),
                });
            }
        }
        Ok(WhitneyField {
            signature,
            points,
            jets,
        })
    }

    /// The field induced by a polynomial: `F^α = D^α P` on the sample.
    pub fn from_poly(poly: &Poly<T>, points: Vec<Vec<T>>) -> Self {
        let jets = points.iter().map(|x| poly.rebase(x).coeffs).collect();
        WhitneyField {
            signature: poly.signature,
            points,
            jets,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `T^p_a F` at sample point `a`.
    pub fn taylor_poly(&self, a: usize) -> Result<Poly<T>> {
        if a >= self.points.len() {
            return Err(CoreError::PointNotInSample(a, self.points.len()));
        }
        Poly::new(
            self.signature,
            self.points[a].clone(),
            self.jets[a].clone(),
        )
    }

    /// Taylor remainder `(R^p_a F)^α(b) = F^α(b) - D^α(T^p_a F)(b)`.
    pub fn remainder(&self, a: usize, b: usize, alpha: &MultiIndex) -> Result<T> {
        let slot = self
            .signature
            .table()
            .position(alpha)
            .ok_or(CoreError::OrderTooHigh {
                order: alpha.order(),
                p: self.signature.p,
            })?;
        let taylor = self.taylor_poly(a)?.rebase(&self.points[b]);
        Ok(self.jets[b][slot] - taylor.coeffs[slot])
    }

    /// The scaled quotient `δ_α(a,b) = (R^p_a F)^α(b) / |b-a|^{p-|α|}`.
    pub fn delta_quotient(&self, a: usize, b: usize, alpha: &MultiIndex) -> Result<T> {
        let d = dist(&self.points[a], &self.points[b]);
        if d == T::zero() {
            return Err(CoreError::CoincidentPoints);
        }
        let power = (self.signature.p - alpha.order()) as i32;
        Ok(self.remainder(a, b, alpha)? / d.powi(power))
    }

    /// Max over `|α| ≤ p` of `|δ_α(a,b)|`, with the arg max.
    fn delta_max(&self, a: usize, b: usize) -> Result<(T, usize)> {
        let d = dist(&self.points[a], &self.points[b]);
        if d == T::zero() {
            return Err(CoreError::CoincidentPoints);
        }
        let table = self.signature.table();
        let taylor = self.taylor_poly(a)?.rebase(&self.points[b]);
        let mut best = (T::zero(), 0usize);
        for (slot, alpha) in table.multiindices().iter().enumerate() {
            let power = (self.signature.p - alpha.order()) as i32;
            let quot = (self.jets[b][slot] - taylor.coeffs[slot]).abs() / d.powi(power);
            if quot > best.0 {
                best = (quot, slot);
            }
        }
        Ok(best)
    }

    /// `ξ(F, a) = ξ(T^p_a F)`.
    pub fn apply_functional(&self, xi: &JetDual<T>, a: usize) -> Result<T> {
        xi.pair(&self.taylor_poly(a)?)
    }
}

/// Residual of the two-point transport identity
/// `ξ(F,a) + η(F,b) = (ξ+η)(F,a) + Σ_α δ_α(a,b) |b-a|^{p-|α|} η_α(b)`.
///
/// The left side reads `η` against the jet at `b`, the right side transports
/// it through `a`; with exact arithmetic the two agree identically. Passing a
/// zero `ξ` gives the single-functional form of the identity.
pub fn pair_identity_residual<T: Scalar>(
    field: &WhitneyField<T>,
    xi: &JetDual<T>,
    eta: &JetDual<T>,
    a: usize,
    b: usize,
) -> Result<T> {
    let lhs = field.apply_functional(xi, a)? + field.apply_functional(eta, b)?;
    let mut rhs = field.apply_functional(xi, a)? + field.apply_functional(eta, a)?;
    let table = field.signature.table();
    let point_b = &field.points[b];
    for alpha in table.multiindices() {
        // remainder already carries the |b-a|^{p-|α|} factor of δ_α
        rhs += field.remainder(a, b, alpha)? * eta.dual_coord(alpha, point_b)?;
    }
    Ok((lhs - rhs).abs())
}

/// Verdict of a modulus scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

/// The pair (or window pair) achieving a reported bin maximum.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Witness<T> {
    pub a: Vec<T>,
    pub b: Vec<T>,
    pub alpha: Option<MultiIndex>,
    pub value: T,
    pub bin: usize,
}

/// Binned modulus data: per distance bin, the max of `|δ_α(a,b)|` over pairs
/// in that bin and all `|α| ≤ p`, plus the verdict derived from the decay.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModulusReport<T> {
    pub scales: Vec<T>,
    pub bin_max: Vec<Option<T>>,
    pub verdict: Verdict,
    pub witness: Option<Witness<T>>,
    pub pairs_scanned: usize,
    pub capped: bool,
    pub eps_mod: T,
    pub eps_fail: T,
}

/// Options for the pair scan.
#[derive(Debug, Clone, Copy)]
pub struct ScanOptions {
    /// Limit each point to its nearest `cap` neighbors. `None` scans every
    /// pair within the coarsest scale; large accumulation fixtures need a cap
    /// to stay within budget. A capped pass verdict is best-effort and the
    /// report says so.
    pub pair_cap: Option<usize>,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions { pair_cap: None }
    }
}

/// Decide pass/fail/inconclusive from per-bin maxima.
///
/// Either definite verdict requires data in the finest scheduled bin: a claim
/// about behavior as `|a-b| → 0` needs pairs at the finest scale asked about.
/// Given that, fail means every nonempty bin sits at or above `eps_fail`
/// (bounded below across all scales); pass means at least three nonempty
/// bins, maxima over the three finest nonincreasing until they drop below
/// `eps_mod` (below the threshold the quotients are rounding amplified by
/// `|b-a|^{-(p-|α|)}`, so no ordering is demanded there), and the finest
/// below `eps_mod`. Anything else is inconclusive.
pub(crate) fn decide_verdict<T: Scalar>(
    bin_max: &[Option<T>],
    tol: &Tolerances<T>,
) -> (Verdict, Option<usize>) {
    let nonempty: Vec<(usize, T)> = bin_max
        .iter()
        .enumerate()
        .filter_map(|(k, m)| m.map(|v| (k, v)))
        .collect();
    if nonempty.is_empty() {
        return (Verdict::Inconclusive, None);
    }
    let finest = nonempty[nonempty.len() - 1];
    if finest.0 != bin_max.len() - 1 {
        return (Verdict::Inconclusive, None);
    }
    if nonempty.iter().all(|(_, v)| *v >= tol.eps_fail) {
        return (Verdict::Fail, Some(finest.0));
    }
    if nonempty.len() >= 3 {
        let tail = &nonempty[nonempty.len() - 3..];
        let decays = |prev: T, next: T| prev >= next || prev < tol.eps_mod;
        let monotone = decays(tail[0].1, tail[1].1) && decays(tail[1].1, tail[2].1);
        if monotone && finest.1 < tol.eps_mod {
            return (Verdict::Pass, None);
        }
    }
    (Verdict::Inconclusive, None)
}

/// Scan all close pairs of the sample, bin `max_α |δ_α(a,b)|` by distance,
/// and decide whether the quotients decay toward zero.
pub fn whitney_check<T: Scalar>(
    field: &WhitneyField<T>,
    schedule: &Schedule<T>,
    tol: &Tolerances<T>,
    options: &ScanOptions,
) -> Result<ModulusReport<T>> {
    if field.len() < 2 {
        return Err(CoreError::TooFewPoints {
            needed: 2,
            got: field.len(),
        });
    }
    if schedule.is_empty() {
        return Err(CoreError::EmptySchedule);
    }
    let grid = NeighborGrid::build(&field.points, schedule.coarsest());
    let table = field.signature.table();
    let mut bin_max: Vec<Option<T>> = vec![None; schedule.len()];
    let mut bin_witness: Vec<Option<(usize, usize, usize)>> = vec![None; schedule.len()];
    let mut pairs_scanned = 0usize;
    let mut capped = false;

    for a in 0..field.len() {
        let neighbors = match options.pair_cap {
            Some(cap) => {
                let all = grid.within(&field.points[a], schedule.coarsest(), Some(a));
                if all.len() > cap {
                    capped = true;
                }
                let mut v = all;
                v.truncate(cap);
                v
            }
            None => grid.within(&field.points[a], schedule.coarsest(), Some(a)),
        };
        for (b, d) in neighbors {
            if b <= a {
                continue; // each unordered pair once; both directions below
            }
            let Some(bin) = schedule.bin_of(d) else {
                continue;
            };
            pairs_scanned += 1;
            for (x, y) in [(a, b), (b, a)] {
                let (value, slot) = field.delta_max(x, y)?;
                if bin_max[bin].map_or(true, |m| value > m) {
                    bin_max[bin] = Some(value);
                    bin_witness[bin] = Some((x, y, slot));
                }
            }
        }
    }

    let (verdict, witness_bin) = decide_verdict(&bin_max, tol);
    let witness = witness_bin.and_then(|bin| {
        bin_witness[bin].map(|(a, b, slot)| Witness {
            a: field.points[a].clone(),
            b: field.points[b].clone(),
            alpha: Some(table.at(slot).clone()),
            value: bin_max[bin].unwrap_or_else(T::zero),
            bin,
        })
    });

    Ok(ModulusReport {
        scales: schedule.scales().to_vec(),
        bin_max,
        verdict,
        witness,
        pairs_scanned,
        capped,
        eps_mod: tol.eps_mod,
        eps_fail: tol.eps_fail,
    })
}

/// Build the zigzag order-1 fixture field on a 1-D sample: `F^0` takes the
/// supplied values and `F^1` is identically zero.
pub fn zigzag_field<T: Scalar>(xs: &[T], ys: &[T]) -> Result<WhitneyField<T>> {
    let signature = JetSignature::new(1, 1);
    let points: Vec<Vec<T>> = xs.iter().map(|x| vec![*x]).collect();
    let jets: Vec<Vec<T>> = ys.iter().map(|y| vec![*y, T::zero()]).collect();
    WhitneyField::new(signature, points, jets)
}

/// Sample a 1-D closed-form function and its derivative jets on a uniform
/// grid; convenience for fixtures.
pub fn field_from_fn_1d<T: Scalar>(
    xs: &[T],
    p: usize,
    jets_of: impl Fn(T) -> Vec<T>,
) -> Result<WhitneyField<T>> {
    let signature = JetSignature::new(1, p);
    let points: Vec<Vec<T>> = xs.iter().map(|x| vec![*x]).collect();
    let jets: Vec<Vec<T>> = xs.iter().map(|x| jets_of(*x)).collect();
    WhitneyField::new(signature, points, jets)
}

/// Uniform grid on `[lo, hi]` with `count` points.
pub fn linspace<T: Scalar>(lo: T, hi: T, count: usize) -> Vec<T> {
    assert!(count >= 2);
    let step = (hi - lo) / real::<T>((count - 1) as f64);
    (0..count).map(|i| lo + step * real::<T>(i as f64)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn x_squared_field(points: Vec<Vec<f64>>) -> WhitneyField<f64> {
        let sig = JetSignature::new(1, 2);
        let p = Poly::new(sig, vec![0.0], vec![0.0, 0.0, 2.0]).unwrap();
        WhitneyField::from_poly(&p, points)
    }

    #[test]
    fn taylor_poly_reads_off_jets() {
        // 1-D, p=1, F^0 = (0,1), F^1 = (0,2) at {0,1}: T at 1 is 1 + 2(x-1)
        let sig = JetSignature::new(1, 1);
        let f = WhitneyField::new(sig, vec![vec![0.0], vec![1.0]], vec![vec![0.0, 0.0], vec![1.0, 2.0]])
            .unwrap();
        let t = f.taylor_poly(1).unwrap();
        assert_eq!(t.coeffs, vec![1.0, 2.0]);
        assert!(f.taylor_poly(2).is_err());
    }

    #[test]
    fn polynomial_field_has_zero_remainder() {
        let pts: Vec<Vec<f64>> = linspace(0.0, 1.0, 9).into_iter().map(|x| vec![x]).collect();
        let f = x_squared_field(pts);
        let table = f.signature.table();
        for a in 0..f.len() {
            for b in 0..f.len() {
                for alpha in table.multiindices() {
                    assert!(f.remainder(a, b, alpha).unwrap().abs() < 1e-12);
                }
                if a != b {
                    for alpha in table.multiindices() {
                        assert!(f.delta_quotient(a, b, alpha).unwrap().abs() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn taylor_of_induced_field_is_rebase() {
        let pts: Vec<Vec<f64>> = vec![vec![0.25], vec![0.75]];
        let sig = JetSignature::new(1, 2);
        let p = Poly::new(sig, vec![0.0], vec![0.0, 0.0, 2.0]).unwrap();
        let f = WhitneyField::from_poly(&p, pts.clone());
        for (i, pt) in pts.iter().enumerate() {
            let t = f.taylor_poly(i).unwrap();
            let r = p.rebase(pt);
            for (a, b) in t.coeffs.iter().zip(&r.coeffs) {
                assert!((a - b).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn top_order_remainder_is_plain_difference() {
        let sig = JetSignature::new(1, 2);
        let f: WhitneyField<f64> = WhitneyField::new(
            sig,
            vec![vec![0.0], vec![0.5]],
            vec![vec![0.1, 0.2, 0.3], vec![0.4, 0.5, 0.9]],
        )
        .unwrap();
        let alpha = MultiIndex::new(vec![2]);
        let r: f64 = f.remainder(0, 1, &alpha).unwrap();
        assert!((r - (0.9 - 0.3)).abs() < 1e-13);
    }

    #[test]
    fn delta_quotient_rejects_coincident_points() {
        let sig = JetSignature::new(1, 1);
        let f: WhitneyField<f64> = WhitneyField::new(
            sig,
            vec![vec![0.0], vec![0.0]],
            vec![vec![0.0, 0.0], vec![0.0, 0.0]],
        )
        .unwrap();
        assert!(matches!(
            f.delta_quotient(0, 1, &MultiIndex::zero(1)),
            Err(CoreError::CoincidentPoints)
        ));
    }

    #[test]
    fn pair_identity_holds_for_random_draws() {
        let mut rng = StdRng::seed_from_u64(5);
        for n in 1..=3usize {
            for p in 1..=3usize {
                let sig = JetSignature::new(n, p);
                for _ in 0..20 {
                    let points: Vec<Vec<f64>> = (0..4)
                        .map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
                        .collect();
                    let jets: Vec<Vec<f64>> = (0..4)
                        .map(|_| (0..sig.dim()).map(|_| rng.random_range(-1.0..1.0)).collect())
                        .collect();
                    let f = WhitneyField::new(sig, points.clone(), jets).unwrap();
                    let xi = JetDual::new(
                        sig,
                        points[0].clone(),
                        (0..sig.dim()).map(|_| rng.random_range(-1.0..1.0)).collect(),
                    )
                    .unwrap();
                    let eta = JetDual::new(
                        sig,
                        points[1].clone(),
                        (0..sig.dim()).map(|_| rng.random_range(-1.0..1.0)).collect(),
                    )
                    .unwrap();
                    let r = pair_identity_residual(&f, &xi, &eta, 0, 1).unwrap();
                    assert!(r < 1e-9, "residual {r} at n={n} p={p}");
                }
            }
        }
    }

    #[test]
    fn functional_transport_degenerates_for_polynomial_fields() {
        // η(F,b) = η(F,a) exactly when the field comes from a polynomial
        let pts: Vec<Vec<f64>> = vec![vec![0.1], vec![0.9]];
        let f = x_squared_field(pts.clone());
        let eta = JetDual::new(f.signature, pts[1].clone(), vec![0.7, -0.3, 0.4]).unwrap();
        let at_a = f.apply_functional(&eta, 0).unwrap();
        let at_b = f.apply_functional(&eta, 1).unwrap();
        assert!((at_a - at_b).abs() < 1e-12);
        // η = δ_b, ξ = 0: the field evaluated two ways
        let delta_b = crate::jet::delta_functional(&pts[1], f.signature);
        let zero = JetDual::zero(f.signature, pts[0].clone());
        let r = pair_identity_residual(&f, &zero, &delta_b, 0, 1).unwrap();
        assert!(r < 1e-10);
    }

    #[test]
    fn cubic_field_passes_whitney_check() {
        let sig = JetSignature::new(1, 3);
        let cubic = Poly::new(sig, vec![0.0], vec![0.0, 0.0, 0.0, 6.0]).unwrap();
        let pts: Vec<Vec<f64>> = linspace(0.0, 1.0, 200).into_iter().map(|x| vec![x]).collect();
        let f = WhitneyField::from_poly(&cubic, pts);
        let schedule = Schedule::geometric(0.2, 6).unwrap();
        let tol = Tolerances::default();
        let report = whitney_check(&f, &schedule, &tol, &ScanOptions::default()).unwrap();
        assert_eq!(report.verdict, Verdict::Pass);
    }

    #[test]
    fn abs_field_fails_with_straddling_witness() {
        // F^0 = |x|, F^1 = sign(x) with F^1(0) = 0, p = 1
        let xs = linspace(-1.0, 1.0, 401);
        let f = field_from_fn_1d(&xs, 1, |x: f64| vec![x.abs(), if x == 0.0 { 0.0 } else { x.signum() }])
            .unwrap();
        let schedule = Schedule::geometric(0.2, 6).unwrap();
        let tol = Tolerances::default();
        let report = whitney_check(&f, &schedule, &tol, &ScanOptions::default()).unwrap();
        assert_eq!(report.verdict, Verdict::Fail);
        let w = report.witness.expect("fail verdict carries a witness");
        assert!(
            w.a[0] * w.b[0] <= 0.0,
            "witness pair should straddle the kink: {:?} {:?}",
            w.a,
            w.b
        );
    }
}
