//! Numeric knobs and scale schedules.
//!
//! Every tolerance the engine consults lives in [`Tolerances`] so that reports
//! can echo the exact values a verdict was computed with.

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::scalar::{real, Scalar};

/// All floating-point thresholds used by the engine.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Tolerances<T> {
    /// Algebraic-identity tolerance (relative where a scale is available).
    pub eps_alg: T,
    /// Rank cutoff, relative to the largest singular value.
    pub eps_rank: T,
    /// Principal-angle tolerance, radians. Governs subspace limits,
    /// containment assertions and fiber membership.
    pub theta_tol: T,
    /// Modulus threshold: the finest distance bin must fall below this for a
    /// pass verdict.
    pub eps_mod: T,
    /// Failure threshold: a fail verdict requires the per-bin maxima to stay
    /// at or above this across all scales.
    pub eps_fail: T,
    /// Vertical-vector threshold for the function criterion: a fiber holds a
    /// vertical vector when some unit fiber element has horizontal norm below
    /// this.
    pub eps_vertical: T,
}

impl<T: Scalar> Default for Tolerances<T> {
    fn default() -> Self {
        Tolerances {
            eps_alg: real(1e-9),
            eps_rank: real(1e-8),
            theta_tol: real(1e-3),
            eps_mod: real(1e-3),
            eps_fail: real(1e-1),
            eps_vertical: real(1e-8),
        }
    }
}

/// A strictly decreasing list of scales, coarsest first.
///
/// Closures and limits are taken along the schedule; distance bins for
/// modulus scans are read off consecutive scales. The one-line syntax
/// `"0.2x8"` means 8 geometric scales starting at 0.2 with ratio 1/2.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Schedule<T> {
    scales: Vec<T>,
}

impl<T: Scalar> Schedule<T> {
    pub fn new(scales: Vec<T>) -> Result<Self> {
        if scales.is_empty() {
            return Err(CoreError::EmptySchedule);
        }
        for w in scales.windows(2) {
            if w[1] >= w[0] {
                return Err(CoreError::Parse(
                    "schedule scales must be strictly decreasing".into(),
                ));
            }
        }
        if scales[scales.len() - 1] <= T::zero() {
            return Err(CoreError::Parse("schedule scales must be positive".into()));
        }
        Ok(Schedule { scales })
    }

    /// `count` geometric scales from `delta0`, ratio 1/2.
    pub fn geometric(delta0: T, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(CoreError::EmptySchedule);
        }
        let half = real::<T>(0.5);
        let mut scales = Vec::with_capacity(count);
        let mut s = delta0;
        for _ in 0..count {
            scales.push(s);
            s *= half;
        }
        Schedule::new(scales)
    }

    /// Parse `"0.2x8"` (geometric) or a comma-separated explicit list.
    pub fn parse(text: &str) -> Result<Self> {
        let bad = |t: &str| CoreError::Parse(format!("bad schedule syntax `{t}`"));
        if let Some((d, n)) = text.split_once('x') {
            let delta0: f64 = d.trim().parse().map_err(|_| bad(text))?;
            let count: usize = n.trim().parse().map_err(|_| bad(text))?;
            Schedule::geometric(real(delta0), count)
        } else {
            let scales = text
                .split(',')
                .map(|s| s.trim().parse::<f64>().map(real).map_err(|_| bad(text)))
                .collect::<Result<Vec<T>>>()?;
            Schedule::new(scales)
        }
    }

    pub fn scales(&self) -> &[T] {
        &self.scales
    }

    pub fn len(&self) -> usize {
        self.scales.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scales.is_empty()
    }

    pub fn coarsest(&self) -> T {
        self.scales[0]
    }

    pub fn finest(&self) -> T {
        self.scales[self.scales.len() - 1]
    }

    /// Drop the `m` finest scales.
    pub fn truncated(&self, m: usize) -> Result<Self> {
        if m >= self.scales.len() {
            return Err(CoreError::EmptySchedule);
        }
        Schedule::new(self.scales[..self.scales.len() - m].to_vec())
    }

    /// Index of the distance bin a pair at distance `d` falls into.
    ///
    /// Bin `k < len-1` covers `(scale[k+1], scale[k]]`; the finest bin covers
    /// `(0, scale[len-1]]`. Distances above the coarsest scale have no bin.
    pub fn bin_of(&self, d: T) -> Option<usize> {
        if d > self.scales[0] || d <= T::zero() {
            return None;
        }
        for k in (0..self.scales.len()).rev() {
            if d <= self.scales[k] {
                return Some(k);
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_schedule() {
        let s: Schedule<f64> = Schedule::parse("0.2x8").unwrap();
        assert_eq!(s.len(), 8);
        assert_eq!(s.coarsest(), 0.2);
        assert!((s.finest() - 0.2 / 128.0).abs() < 1e-15);
    }

    #[test]
    fn explicit_schedule_and_bins() {
        let s: Schedule<f64> = Schedule::parse("0.4, 0.2, 0.1").unwrap();
        assert_eq!(s.bin_of(0.3), Some(0));
        assert_eq!(s.bin_of(0.15), Some(1));
        assert_eq!(s.bin_of(0.05), Some(2));
        assert_eq!(s.bin_of(0.5), None);
        assert_eq!(s.bin_of(0.0), None);
    }

    #[test]
    fn rejects_nondecreasing() {
        assert!(Schedule::<f64>::new(vec![0.1, 0.1]).is_err());
        assert!(Schedule::<f64>::new(vec![]).is_err());
    }
}
