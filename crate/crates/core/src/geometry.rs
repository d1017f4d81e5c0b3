//! Small point-cloud helpers: distances and fixed-radius neighbor queries.

use crate::scalar::{approx_f64, Scalar};

/// Euclidean distance. All metric quantities in the engine use this norm.
pub fn dist<T: Scalar>(a: &[T], b: &[T]) -> T {
    let mut acc = T::zero();
    for (x, y) in a.iter().zip(b) {
        let d = *x - *y;
        acc += d * d;
    }
    acc.sqrt()
}

pub fn norm<T: Scalar>(a: &[T]) -> T {
    let mut acc = T::zero();
    for x in a {
        acc += *x * *x;
    }
    acc.sqrt()
}

/// Uniform-grid index over a point cloud for fixed-radius queries.
///
/// Cells are sized by the coarsest query radius; queries below that radius
/// stay correct (they just scan the same cells).
pub struct NeighborGrid<'a, T: Scalar> {
    points: &'a [Vec<T>],
    cell: f64,
    buckets: std::collections::HashMap<Vec<i64>, Vec<usize>>,
}

impl<'a, T: Scalar> NeighborGrid<'a, T> {
    pub fn build(points: &'a [Vec<T>], max_radius: T) -> Self {
        let cell = approx_f64(max_radius).max(1e-12);
        let mut buckets: std::collections::HashMap<Vec<i64>, Vec<usize>> =
            std::collections::HashMap::new();
        for (i, p) in points.iter().enumerate() {
            buckets.entry(Self::key(p, cell)).or_default().push(i);
        }
        NeighborGrid {
            points,
            cell,
            buckets,
        }
    }

    fn key(p: &[T], cell: f64) -> Vec<i64> {
        p.iter()
            .map(|x| (approx_f64(*x) / cell).floor() as i64)
            .collect()
    }

    /// Indices of points within `radius` of `center` (excluding `exclude`),
    /// sorted nearest first; ties broken by index for determinism.
    pub fn within(&self, center: &[T], radius: T, exclude: Option<usize>) -> Vec<(usize, T)> {
        let reach = (approx_f64(radius) / self.cell).ceil() as i64;
        let base = Self::key(center, self.cell);
        let dim = base.len();
        let mut found: Vec<(usize, T)> = Vec::new();
        let mut offsets = vec![-reach; dim];
        'cells: loop {
            let key: Vec<i64> = base.iter().zip(&offsets).map(|(b, o)| b + o).collect();
            if let Some(bucket) = self.buckets.get(&key) {
                for &i in bucket {
                    if Some(i) == exclude {
                        continue;
                    }
                    let d = dist(center, &self.points[i]);
                    if d <= radius {
                        found.push((i, d));
                    }
                }
            }
            // advance the odometer over the cell neighborhood
            for slot in 0..dim {
                offsets[slot] += 1;
                if offsets[slot] <= reach {
                    continue 'cells;
                }
                offsets[slot] = -reach;
            }
            break;
        }
        found.sort_by(|a, b| {
            a.1.partial_cmp(&b.1)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.0.cmp(&b.0))
        });
        found
    }

    /// Nearest-first neighbors within `radius`, truncated to `cap`.
    pub fn within_capped(
        &self,
        center: &[T],
        radius: T,
        exclude: Option<usize>,
        cap: usize,
    ) -> Vec<(usize, T)> {
        let mut v = self.within(center, radius, exclude);
        v.truncate(cap);
        v
    }
}
