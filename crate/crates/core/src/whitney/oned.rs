//! One-dimensional machinery: divided differences, the univariate
//! extendability check, and a constructive piecewise-Hermite extension.

use serde::{Deserialize, Serialize};

use super::{decide_verdict, whitney_check, ModulusReport, ScanOptions, Verdict, WhitneyField, Witness};
use crate::config::{Schedule, Tolerances};
use crate::error::{CoreError, Result};
use crate::jet::{JetSignature, Poly};
use crate::scalar::{approx_f64, real, Scalar};

/// `p!` times the leading coefficient of the Lagrange interpolant through
/// `(xs[i], ys[i])`, computed by the standard divided-difference table and
/// scaled by `p!` (`p = xs.len() - 1`).
pub fn divided_difference<T: Scalar>(xs: &[T], ys: &[T]) -> Result<T> {
    if xs.len() != ys.len() || xs.is_empty() {
        return Err(CoreError::ValueMismatch(format!(
            "{} nodes vs {} values",
            xs.len(),
            ys.len()
        )));
    }
    for i in 0..xs.len() {
        for j in i + 1..xs.len() {
            if xs[i] == xs[j] {
                return Err(CoreError::DuplicateNodes(approx_f64(xs[i])));
            }
        }
    }
    let mut table: Vec<T> = ys.to_vec();
    let p = xs.len() - 1;
    for level in 1..=p {
        for i in 0..=(p - level) {
            table[i] = (table[i + 1] - table[i]) / (xs[i + level] - xs[i]);
        }
    }
    let mut factorial = T::one();
    for k in 2..=p {
        factorial *= real::<T>(k as f64);
    }
    Ok(table[0] * factorial)
}

/// Scan `p`-th divided differences over clusters of `p+1` consecutive sample
/// points and bin the spread between clusters by the scale needed to resolve
/// both clusters and their separation. Decay of the spread toward zero is the
/// univariate extendability signal.
pub fn whitney_1d_check<T: Scalar>(
    xs: &[T],
    fs: &[T],
    p: usize,
    schedule: &Schedule<T>,
    tol: &Tolerances<T>,
    options: &ScanOptions,
) -> Result<ModulusReport<T>> {
    if xs.len() != fs.len() {
        return Err(CoreError::ValueMismatch(format!(
            "{} abscissae vs {} values",
            xs.len(),
            fs.len()
        )));
    }
    if xs.len() < p + 1 {
        return Err(CoreError::TooFewPoints {
            needed: p + 1,
            got: xs.len(),
        });
    }
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&i, &j| xs[i].partial_cmp(&xs[j]).expect("finite abscissae"));
    let sorted_x: Vec<T> = order.iter().map(|&i| xs[i]).collect();
    let sorted_f: Vec<T> = order.iter().map(|&i| fs[i]).collect();

    // consecutive (p+1)-point windows
    let count = sorted_x.len() - p;
    let mut dd = Vec::with_capacity(count);
    let mut loc = Vec::with_capacity(count);
    let mut diam = Vec::with_capacity(count);
    for i in 0..count {
        let nodes = &sorted_x[i..=i + p];
        let vals = &sorted_f[i..=i + p];
        dd.push(divided_difference(nodes, vals)?);
        let mut mean = T::zero();
        for x in nodes {
            mean += *x;
        }
        loc.push(mean / real::<T>((p + 1) as f64));
        diam.push(nodes[p] - nodes[0]);
    }

    let coarsest = schedule.coarsest();
    let mut bin_max: Vec<Option<T>> = vec![None; schedule.len()];
    let mut bin_witness: Vec<Option<(usize, usize)>> = vec![None; schedule.len()];
    let mut pairs_scanned = 0usize;
    let mut capped = false;

    for i in 0..count {
        let mut compared = 0usize;
        for j in i + 1..count {
            let gap = loc[j] - loc[i];
            if gap > coarsest {
                break;
            }
            if let Some(cap) = options.pair_cap {
                if compared >= cap {
                    capped = true;
                    break;
                }
            }
            // the scale at which both windows and their separation resolve
            let resolution = gap.max(diam[i]).max(diam[j]);
            let Some(bin) = schedule.bin_of(resolution) else {
                continue;
            };
            compared += 1;
            pairs_scanned += 1;
            let spread = (dd[i] - dd[j]).abs();
            if bin_max[bin].map_or(true, |m| spread > m) {
                bin_max[bin] = Some(spread);
                bin_witness[bin] = Some((i, j));
            }
        }
    }

    let (verdict, witness_bin) = decide_verdict(&bin_max, tol);
    let witness = witness_bin.and_then(|bin| {
        bin_witness[bin].map(|(i, j)| Witness {
            a: vec![loc[i]],
            b: vec![loc[j]],
            alpha: None,
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

/// A univariate piecewise polynomial with jets of order `jet_order` matched
/// at the breakpoints. Pieces are indexed so that piece `i` covers
/// `[breaks[i-1], breaks[i])`, with constant-jet tails beyond the extremes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PiecewisePoly<T> {
    pub jet_order: usize,
    pub breaks: Vec<T>,
    pub pieces: Vec<Poly<T>>,
}

impl<T: Scalar> PiecewisePoly<T> {
    fn piece_at(&self, x: T) -> &Poly<T> {
        let mut idx = 0;
        while idx < self.breaks.len() && x >= self.breaks[idx] {
            idx += 1;
        }
        &self.pieces[idx]
    }

    pub fn eval(&self, x: T) -> T {
        self.piece_at(x).eval(&[x])
    }

    /// Jets `(f(x), f'(x), …, f^{(order)}(x))` of the active piece.
    pub fn jets_at(&self, x: T, order: usize) -> Vec<T> {
        let rebased = self.piece_at(x).rebase(&[x]);
        (0..=order)
            .map(|k| {
                rebased
                    .coeffs
                    .get(k)
                    .copied()
                    .unwrap_or_else(T::zero)
            })
            .collect()
    }
}

/// Two-point Hermite interpolant of degree `≤ 2p+1` matching the order-`p`
/// jets at `a` and `b`, returned centered at `a`.
fn hermite_piece<T: Scalar>(a: T, jets_a: &[T], b: T, jets_b: &[T], p: usize) -> Poly<T> {
    let m = p + 1;
    let degree = 2 * p + 1;
    let nodes: Vec<T> = (0..2 * m).map(|i| if i < m { a } else { b }).collect();
    // value of the generalized divided difference over repeated nodes:
    // dd over k+1 copies of the same node is f^{(k)} / k!
    let mut factorials = vec![T::one(); m + 1];
    for k in 1..=m {
        factorials[k] = factorials[k - 1] * real::<T>(k as f64);
    }
    // table[i][j] = dd of nodes i..=i+j
    let mut table = vec![vec![T::zero(); 2 * m]; 2 * m];
    for (i, t) in table.iter_mut().enumerate() {
        t[0] = if i < m { jets_a[0] } else { jets_b[0] };
    }
    for j in 1..2 * m {
        for i in 0..(2 * m - j) {
            table[i][j] = if nodes[i] == nodes[i + j] {
                let jets = if nodes[i] == a { jets_a } else { jets_b };
                jets[j] / factorials[j]
            } else {
                (table[i + 1][j - 1] - table[i][j - 1]) / (nodes[i + j] - nodes[i])
            };
        }
    }
    // expand the Newton form into monomial coefficients in (x - a)
    let mut mono = vec![T::zero(); degree + 1];
    let mut basis = vec![T::zero(); degree + 1];
    basis[0] = T::one();
    let mut basis_len = 1usize;
    for j in 0..2 * m {
        let c = table[0][j];
        for k in 0..basis_len {
            mono[k] += c * basis[k];
        }
        if j + 1 < 2 * m {
            // basis *= (x - nodes[j]) = (x - a) + (a - nodes[j])
            let shift = a - nodes[j];
            let mut next = vec![T::zero(); degree + 1];
            for k in 0..basis_len {
                if k + 1 <= degree {
                    next[k + 1] += basis[k];
                }
                next[k] += basis[k] * shift;
            }
            basis = next;
            basis_len = (basis_len + 1).min(degree + 1);
        }
    }
    let sig = JetSignature::new(1, degree);
    let mut scaled = vec![T::zero(); degree + 1];
    let mut kfact = T::one();
    for (k, s) in scaled.iter_mut().enumerate() {
        if k > 0 {
            kfact *= real::<T>(k as f64);
        }
        *s = mono[k] * kfact;
    }
    Poly::new(sig, vec![a], scaled).expect("hermite piece")
}

/// Constructive witness for the univariate extension: a piecewise Hermite
/// interpolant of degree `≤ 2p+1` per gap that reproduces every `F^α` at the
/// nodes exactly, with constant-jet tails beyond the extremes. Refuses fields
/// that fail the modulus check.
pub fn extend_1d<T: Scalar>(
    field: &WhitneyField<T>,
    schedule: &Schedule<T>,
    tol: &Tolerances<T>,
) -> Result<PiecewisePoly<T>> {
    if field.signature.n != 1 {
        return Err(CoreError::DimensionMismatch {
            expected: 1,
            got: field.signature.n,
        });
    }
    if field.len() >= 2 {
        let report = whitney_check(field, schedule, tol, &ScanOptions::default())?;
        if report.verdict == Verdict::Fail {
            return Err(CoreError::CheckFailed);
        }
    }
    let p = field.signature.p;
    let degree = 2 * p + 1;
    let mut order: Vec<usize> = (0..field.len()).collect();
    order.sort_by(|&i, &j| {
        field.points[i][0]
            .partial_cmp(&field.points[j][0])
            .expect("finite nodes")
    });

    let taylor_tail = |i: usize| -> Poly<T> {
        let jets = &field.jets[i];
        let mut coeffs = jets.clone();
        coeffs.resize(degree + 1, T::zero());
        Poly::new(
            JetSignature::new(1, degree),
            field.points[i].clone(),
            coeffs,
        )
        .expect("tail piece")
    };

    let mut breaks = Vec::new();
    let mut pieces = Vec::new();
    pieces.push(taylor_tail(order[0]));
    for w in order.windows(2) {
        let (i, j) = (w[0], w[1]);
        breaks.push(field.points[i][0]);
        pieces.push(hermite_piece(
            field.points[i][0],
            &field.jets[i],
            field.points[j][0],
            &field.jets[j],
            p,
        ));
    }
    breaks.push(field.points[order[order.len() - 1]][0]);
    pieces.push(taylor_tail(order[order.len() - 1]));
    // first interior piece also covers everything left of the first node;
    // drop the leading break so lookup lands on the tail there
    Ok(PiecewisePoly {
        jet_order: p,
        breaks,
        pieces,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::whitney::{field_from_fn_1d, linspace};

    #[test]
    fn divided_difference_examples() {
        // f = x^2 on {0,1,2}: leading coefficient 1, times 2!
        let dd: f64 = divided_difference(&[0.0, 1.0, 2.0], &[0.0, 1.0, 4.0]).unwrap();
        assert!((dd - 2.0).abs() < 1e-12);
        // affine data, p = 2
        let dd: f64 = divided_difference(&[0.3, 1.1, 2.7], &[0.6, 2.2, 5.4]).unwrap();
        assert!(dd.abs() < 1e-12);
        // f = x^3 on four nodes: 1 * 3!
        let dd: f64 = divided_difference(&[0.0, 1.0, 2.0, 3.0], &[0.0, 1.0, 8.0, 27.0]).unwrap();
        assert!((dd - 6.0).abs() < 1e-12);
        assert!(divided_difference(&[0.0, 0.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn divided_difference_is_symmetric() {
        let xs = [0.0, 0.7, 1.3, 2.9];
        let ys = [1.0, -0.4, 2.2, 0.9];
        let base: f64 = divided_difference(&xs, &ys).unwrap();
        let perms: Vec<Vec<usize>> = vec![vec![3, 1, 0, 2], vec![2, 3, 1, 0], vec![1, 0, 3, 2]];
        for perm in perms {
            let px: Vec<f64> = perm.iter().map(|&i| xs[i]).collect();
            let py: Vec<f64> = perm.iter().map(|&i| ys[i]).collect();
            let got = divided_difference(&px, &py).unwrap();
            assert!((got - base).abs() < 1e-10);
        }
    }

    fn dense_grid() -> Vec<f64> {
        linspace(-1.0, 1.0, 10001)
    }

    fn fine_schedule() -> Schedule<f64> {
        Schedule::geometric(0.4096, 11).unwrap()
    }

    #[test]
    fn abs_fails_at_order_one() {
        let xs: Vec<f64> = linspace(-1.0, 1.0, 401);
        let fs: Vec<f64> = xs.iter().map(|x| x.abs()).collect();
        let schedule = Schedule::geometric(0.2, 6).unwrap();
        let report = whitney_1d_check(
            &xs,
            &fs,
            1,
            &schedule,
            &Tolerances::default(),
            &ScanOptions::default(),
        )
        .unwrap();
        assert_eq!(report.verdict, Verdict::Fail);
        let w = report.witness.unwrap();
        assert!(w.a[0].abs() < 0.05 || w.b[0].abs() < 0.05);
    }

    #[test]
    fn x_abs_x_passes_order_one_fails_order_two() {
        let xs = dense_grid();
        let fs: Vec<f64> = xs.iter().map(|x| x * x.abs()).collect();
        let tol = Tolerances::default();
        let opts = ScanOptions { pair_cap: Some(64) };
        let r1 = whitney_1d_check(&xs, &fs, 1, &fine_schedule(), &tol, &opts).unwrap();
        assert_eq!(r1.verdict, Verdict::Pass, "bins: {:?}", r1.bin_max);
        let r2 = whitney_1d_check(&xs, &fs, 2, &fine_schedule(), &tol, &opts).unwrap();
        assert_eq!(r2.verdict, Verdict::Fail);
    }

    #[test]
    fn low_degree_polynomial_passes_with_tiny_spread() {
        let xs: Vec<f64> = linspace(-1.0, 1.0, 2001);
        let fs: Vec<f64> = xs.iter().map(|x| 0.5 * x * x - x + 0.25).collect();
        let r = whitney_1d_check(
            &xs,
            &fs,
            2,
            &Schedule::geometric(0.2, 7).unwrap(),
            &Tolerances::default(),
            &ScanOptions { pair_cap: Some(64) },
        )
        .unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        for m in r.bin_max.iter().flatten() {
            assert!(*m < 1e-9);
        }
    }

    #[test]
    fn hermite_reproduces_polynomial_on_gaps() {
        let sig = JetSignature::new(1, 2);
        let square = Poly::new(sig, vec![0.0], vec![0.0, 0.0, 2.0]).unwrap();
        let pts: Vec<Vec<f64>> = vec![vec![0.0], vec![1.0], vec![2.0]];
        let field = WhitneyField::from_poly(&square, pts);
        let schedule = Schedule::geometric(2.5, 4).unwrap();
        let ext = extend_1d(&field, &schedule, &Tolerances::default()).unwrap();
        for k in 0..50 {
            let x = 0.04 * k as f64;
            assert!((ext.eval(x) - x * x).abs() < 1e-10, "x = {x}");
        }
        // constant-jet tails extend the end jets
        assert!((ext.eval(-1.0) - 1.0).abs() < 1e-10); // taylor of x^2 at 0 evaluated at -1
    }

    #[test]
    fn single_node_gives_global_taylor() {
        let sig = JetSignature::new(1, 1);
        let field: WhitneyField<f64> =
            WhitneyField::new(sig, vec![vec![2.0]], vec![vec![3.0, -1.0]]).unwrap();
        let ext = extend_1d(&field, &Schedule::geometric(1.0, 3).unwrap(), &Tolerances::default())
            .unwrap();
        assert!((ext.eval(4.0) - (3.0 - 2.0)).abs() < 1e-12);
        assert!((ext.eval(0.0) - (3.0 + 2.0)).abs() < 1e-12);
    }

    #[test]
    fn all_zero_jets_force_zero_interpolant() {
        let sig = JetSignature::new(1, 1);
        let field: WhitneyField<f64> = WhitneyField::new(
            sig,
            vec![vec![0.0], vec![1.0]],
            vec![vec![0.0, 0.0], vec![0.0, 0.0]],
        )
        .unwrap();
        let ext = extend_1d(&field, &Schedule::geometric(2.0, 3).unwrap(), &Tolerances::default())
            .unwrap();
        for k in 0..=10 {
            let x = k as f64 / 10.0;
            assert!(ext.eval(x).abs() < 1e-13);
        }
    }

    #[test]
    fn extension_refused_on_failing_field() {
        let xs: Vec<f64> = linspace(-1.0, 1.0, 401);
        let field = field_from_fn_1d(&xs, 1, |x: f64| {
            vec![x.abs(), if x == 0.0 { 0.0 } else { x.signum() }]
        })
        .unwrap();
        let err = extend_1d(
            &field,
            &Schedule::geometric(0.2, 6).unwrap(),
            &Tolerances::default(),
        );
        assert!(matches!(err, Err(CoreError::CheckFailed)));
    }

    #[test]
    fn extension_jets_match_nodes_exactly() {
        let xs: Vec<f64> = linspace(-1.0, 1.0, 21);
        let field = field_from_fn_1d(&xs, 2, |x: f64| {
            vec![x * x * x, 3.0 * x * x, 6.0 * x]
        })
        .unwrap();
        let schedule = Schedule::geometric(0.4, 5).unwrap();
        let ext = extend_1d(&field, &schedule, &Tolerances::default()).unwrap();
        for (i, pt) in field.points.iter().enumerate() {
            let jets = ext.jets_at(pt[0] + 1e-9, 2); // evaluate on the right piece
            for (k, j) in jets.iter().enumerate() {
                assert!(
                    (j - field.jets[i][k]).abs() < 1e-6,
                    "node {i} order {k}: {j} vs {}",
                    field.jets[i][k]
                );
            }
        }
    }
}
