//! Points, datasets, and the squared-Euclidean cost primitives everything
//! else is built on.

use serde::{Deserialize, Serialize};

/// A point in d-dimensional Euclidean space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Point { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coords
    }
}

impl From<Vec<f64>> for Point {
    fn from(coords: Vec<f64>) -> Self {
        Point { coords }
    }
}

/// Per-feature range recorded when a dataset has been min-max scaled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureRange {
    pub min: f64,
    pub max: f64,
}

/// A fixed collection of points, stored row-major for cache-friendly scans.
///
/// `scaling` is `Some` exactly when the data went through min-max scaling;
/// it records the per-feature (min, max) of the data the scaling was fit on.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    data: Vec<f64>,
    n: usize,
    dim: usize,
    pub scaling: Option<Vec<FeatureRange>>,
}

impl Dataset {
    /// Builds a dataset from row-major storage. `data.len()` must be a
    /// multiple of `dim` and non-empty.
    pub fn from_flat(data: Vec<f64>, dim: usize) -> crate::Result<Self> {
        if dim == 0 || data.is_empty() {
            return Err(crate::Error::EmptyDataset);
        }
        assert!(
            data.len() % dim == 0,
            "flat buffer length {} is not a multiple of dim {}",
            data.len(),
            dim
        );
        let n = data.len() / dim;
        Ok(Dataset { data, n, dim, scaling: None })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> crate::Result<Self> {
        let dim = match rows.first() {
            Some(r) if !r.is_empty() => r.len(),
            _ => return Err(crate::Error::EmptyDataset),
        };
        let mut data = Vec::with_capacity(rows.len() * dim);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(crate::Error::RaggedRow { row: i + 1, expected: dim, got: row.len() });
            }
            data.extend_from_slice(row);
        }
        let n = data.len() / dim;
        Ok(Dataset { data, n, dim, scaling: None })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn point_owned(&self, i: usize) -> Point {
        Point::new(self.point(i).to_vec())
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.iter().map(|r| r.to_vec()).collect()
    }

    /// Keeps the listed rows (indices into `self`), in the order given.
    pub fn select(&self, indices: &[usize]) -> Dataset {
        let mut data = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            data.extend_from_slice(self.point(i));
        }
        Dataset { data, n: indices.len(), dim: self.dim, scaling: self.scaling.clone() }
    }
}

/// Squared Euclidean distance.
///
/// Panics if the slices have different lengths.
pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "sq_dist: dimension mismatch {} vs {}", a.len(), b.len());
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        acc += d * d;
    }
    acc
}

/// Squared distance from `x` to the nearest of `centers`, with the index of
/// that center. Ties go to the lowest index.
///
/// Panics if `centers` is empty.
pub fn nearest_center(x: &[f64], centers: &[Point]) -> (f64, usize) {
    assert!(!centers.is_empty(), "nearest_center: empty center list");
    let mut best = (f64::INFINITY, 0usize);
    for (j, c) in centers.iter().enumerate() {
        let d = sq_dist(x, c.as_slice());
        if d < best.0 {
            best = (d, j);
        }
    }
    best
}

/// k-means cost of `data` against `centers`: the sum over points of the
/// squared distance to the nearest center. Totals are pairwise-summed so the
/// result stays reproducible against a from-scratch recompute at large n.
///
/// Panics if `centers` is empty.
pub fn cost(data: &Dataset, centers: &[Point]) -> f64 {
    assert!(!centers.is_empty(), "cost: empty center list");
    let per_point: Vec<f64> = data.iter().map(|x| nearest_center(x, centers).0).collect();
    pairwise_sum(&per_point)
}

/// Mean of the rows of `data` restricted to `subset` (all rows when `None`).
///
/// Panics if the subset is empty.
pub fn centroid(data: &Dataset, subset: Option<&[usize]>) -> Point {
    let dim = data.dim();
    let mut acc = vec![0.0; dim];
    let count = match subset {
        Some(idx) => {
            assert!(!idx.is_empty(), "centroid: empty subset");
            for &i in idx {
                for (a, v) in acc.iter_mut().zip(data.point(i)) {
                    *a += v;
                }
            }
            idx.len()
        }
        None => {
            for row in data.iter() {
                for (a, v) in acc.iter_mut().zip(row) {
                    *a += v;
                }
            }
            data.len()
        }
    };
    for a in acc.iter_mut() {
        *a /= count as f64;
    }
    Point::new(acc)
}

/// Mean of an explicit list of coordinate slices. Panics if empty.
pub fn mean_of(points: &[&[f64]]) -> Point {
    assert!(!points.is_empty(), "mean_of: empty list");
    let dim = points[0].len();
    let mut acc = vec![0.0; dim];
    for p in points {
        assert_eq!(p.len(), dim, "mean_of: dimension mismatch");
        for (a, v) in acc.iter_mut().zip(*p) {
            *a += v;
        }
    }
    for a in acc.iter_mut() {
        *a /= points.len() as f64;
    }
    Point::new(acc)
}

/// Pairwise (cascade) summation: deterministic and far tighter than a naive
/// left fold at n in the millions.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const LEAF: usize = 64;
    if xs.len() <= LEAF {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}
