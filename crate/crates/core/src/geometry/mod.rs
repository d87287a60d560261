//! Problem geometry: point sets, bounding structures, grids and the
//! convex-hull interpolation domain.

mod halton;
mod hull;

pub use halton::{halton, radical_inverse, HALTON_BASES};
pub use hull::{convex_hull, ConvexDomain, Facet, HULL_TOLERANCE};

use crate::error::{Error, Result};

/// A collection of `dim`-dimensional points stored row-major, with optional
/// scalar values attached to each point.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
    values: Option<Vec<f64>>,
}

pub(crate) fn check_dim(dim: usize) -> Result<()> {
    if dim == 2 || dim == 3 {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(dim))
    }
}

impl PointSet {
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        check_dim(dim)?;
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::InvalidPoints(format!(
                "{} coordinates is not a multiple of dimension {dim}",
                coords.len()
            )));
        }
        if let Some(pos) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::InvalidPoints(format!(
                "non-finite coordinate in point {}",
                pos / dim
            )));
        }
        Ok(Self {
            dim,
            coords,
            values: None,
        })
    }

    pub fn with_values(dim: usize, coords: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let mut set = Self::new(dim, coords)?;
        set.set_values(values)?;
        Ok(set)
    }

    pub fn empty(dim: usize) -> Result<Self> {
        Self::new(dim, Vec::new())
    }

    /// Builds a set from per-point coordinate slices.
    pub fn from_rows<'a, I>(dim: usize, rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        let mut coords = Vec::new();
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            coords.extend_from_slice(row);
        }
        Self::new(dim, coords)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, f64> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn values(&self) -> Option<&[f64]> {
        self.values.as_deref()
    }

    pub fn set_values(&mut self, values: Vec<f64>) -> Result<()> {
        if values.len() != self.len() {
            return Err(Error::LengthMismatch(values.len(), self.len()));
        }
        self.values = Some(values);
        Ok(())
    }

    pub fn clear_values(&mut self) {
        self.values = None;
    }

    /// Subset (with values, if any) in the order given by `indices`.
    pub fn select(&self, indices: &[usize]) -> PointSet {
        let mut coords = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            coords.extend_from_slice(self.point(i));
        }
        let values = self
            .values
            .as_ref()
            .map(|v| indices.iter().map(|&i| v[i]).collect());
        PointSet {
            dim: self.dim,
            coords,
            values,
        }
    }

    /// Axis-aligned bounds, `None` when empty.
    pub fn bounds(&self) -> Option<Rect> {
        if self.is_empty() {
            return None;
        }
        let mut min = vec![f64::INFINITY; self.dim];
        let mut max = vec![f64::NEG_INFINITY; self.dim];
        for p in self.iter() {
            for m in 0..self.dim {
                min[m] = min[m].min(p[m]);
                max[m] = max[m].max(p[m]);
            }
        }
        Some(Rect { min, max })
    }

    /// Fails when two points coincide exactly.
    pub fn check_distinct(&self) -> Result<()> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_unstable_by(|&a, &b| {
            self.point(a)
                .iter()
                .zip(self.point(b))
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        for w in order.windows(2) {
            if self.point(w[0]) == self.point(w[1]) {
                return Err(Error::InvalidPoints(format!(
                    "points {} and {} coincide",
                    w[0].min(w[1]),
                    w[0].max(w[1])
                )));
            }
        }
        Ok(())
    }
}

/// Axis-aligned rectangle (or rectangular prism).
#[derive(Clone, Debug, PartialEq)]
pub struct Rect {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl Rect {
    pub fn dim(&self) -> usize {
        self.min.len()
    }

    pub fn unit(dim: usize) -> Self {
        Self {
            min: vec![0.0; dim],
            max: vec![1.0; dim],
        }
    }

    pub fn edges(&self) -> Vec<f64> {
        self.min.iter().zip(&self.max).map(|(a, b)| b - a).collect()
    }

    /// The enclosing cube sharing the global minimum and maximum over all axes.
    pub fn bounding_cube(&self) -> BoundingBox {
        let lo = self.min.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.max.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        BoundingBox {
            dim: self.dim(),
            min: lo,
            edge: hi - lo,
        }
    }
}

/// Axis-aligned square/cube `[min, min + edge]^dim`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundingBox {
    pub dim: usize,
    pub min: f64,
    pub edge: f64,
}

impl BoundingBox {
    pub fn max(&self) -> f64 {
        self.min + self.edge
    }

    pub fn contains(&self, p: &[f64], tol: f64) -> bool {
        p.iter()
            .all(|&c| c >= self.min - tol && c <= self.min + self.edge + tol)
    }
}

/// Tensor grid on `rect` with `round(count_total^(1/M))` nodes per axis.
pub fn grid_on_rect(rect: &Rect, count_total: usize) -> PointSet {
    let dim = rect.dim();
    let n = (count_total.max(1) as f64).powf(1.0 / dim as f64).round().max(1.0) as usize;
    grid_on_rect_axes(rect, &vec![n; dim])
}

fn axis_nodes(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (lo + hi)];
    }
    let step = (hi - lo) / (n - 1) as f64;
    (0..n)
        .map(|i| if i == n - 1 { hi } else { lo + step * i as f64 })
        .collect()
}

/// Tensor grid with explicit per-axis node counts, spanning `rect`
/// inclusively. The last axis varies fastest. An axis with a single node
/// sits at the midpoint.
pub fn grid_on_rect_axes(rect: &Rect, counts: &[usize]) -> PointSet {
    let dim = rect.dim();
    assert_eq!(counts.len(), dim, "one count per axis");
    let axes: Vec<Vec<f64>> = (0..dim)
        .map(|m| axis_nodes(rect.min[m], rect.max[m], counts[m].max(1)))
        .collect();
    let total: usize = axes.iter().map(Vec::len).product();
    let mut coords = Vec::with_capacity(total * dim);
    let mut idx = vec![0usize; dim];
    for _ in 0..total {
        for m in 0..dim {
            coords.push(axes[m][idx[m]]);
        }
        for m in (0..dim).rev() {
            idx[m] += 1;
            if idx[m] < axes[m].len() {
                break;
            }
            idx[m] = 0;
        }
    }
    PointSet::new(dim, coords).expect("grid coordinates are finite")
}

/// Indices of the points of `pts` lying in `dom`, in original order.
pub fn indices_in_domain(pts: &PointSet, dom: &ConvexDomain) -> Vec<usize> {
    (0..pts.len()).filter(|&i| dom.contains(pts.point(i))).collect()
}

/// Keeps only the points inside `dom`, preserving order.
pub fn reduce_to_domain(pts: &PointSet, dom: &ConvexDomain) -> Result<PointSet> {
    if pts.dim() != dom.dim() {
        return Err(Error::DimensionMismatch {
            expected: dom.dim(),
            got: pts.dim(),
        });
    }
    let keep = indices_in_domain(pts, dom);
    if keep.is_empty() {
        return Err(Error::EmptyReduction);
    }
    Ok(pts.select(&keep))
}

#[inline]
pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Discrete fill distance: the largest distance from a probe to its nearest node.
pub fn fill_distance(nodes: &PointSet, probes: &PointSet) -> Result<f64> {
    if nodes.is_empty() || probes.is_empty() {
        return Err(Error::InvalidPoints("fill distance needs nonempty sets".into()));
    }
    if nodes.dim() != probes.dim() {
        return Err(Error::DimensionMismatch {
            expected: nodes.dim(),
            got: probes.dim(),
        });
    }
    use rayon::prelude::*;
    let h = probes
        .coords()
        .par_chunks_exact(probes.dim())
        .map(|p| {
            nodes
                .iter()
                .map(|x| distance(p, x))
                .fold(f64::INFINITY, f64::min)
        })
        .reduce(|| 0.0, f64::max);
    Ok(h)
}
