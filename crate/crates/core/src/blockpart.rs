//! Block-based partitioning of the bounding cube and the two queries built on
//! it: the containing query (point to block index) and the fixed-radius range
//! search over the `3^M` block neighbourhood.
//!
//! Blocks are numbered from 1 to `q^M`. The strip index along the first axis
//! is the most significant digit, so in 2D blocks run bottom to top inside a
//! column and columns run left to right.

use crate::error::{Error, Result};
use crate::geometry::{distance, BoundingBox, PointSet, HULL_TOLERANCE};

/// How the number of blocks per side is derived from the subdomain radius.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BlockMode {
    /// `q = max(1, floor(L / delta))`: block width never drops below the
    /// search radius, so the neighbourhood always covers the query ball.
    #[default]
    Cover,
    /// `q = ceil(L / delta)`.
    Paper,
}

impl BlockMode {
    pub fn blocks_per_side(self, edge: f64, delta: f64) -> usize {
        let ratio = edge / delta;
        let q = match self {
            BlockMode::Cover => ratio.floor(),
            BlockMode::Paper => ratio.ceil(),
        };
        if q.is_finite() {
            (q as usize).max(1)
        } else {
            1
        }
    }
}

impl std::str::FromStr for BlockMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cover" => Ok(Self::Cover),
            "paper" => Ok(Self::Paper),
            other => Err(Error::InvalidParameter(format!("unknown block mode '{other}'"))),
        }
    }
}

/// 1-based strip index of `coord`, clamped to `[1, q]`.
#[inline]
pub fn strip_index(coord: f64, axis_min: f64, width: f64, q: usize) -> usize {
    let s = ((coord - axis_min) / width).floor();
    if s < 0.0 {
        1
    } else {
        (s as usize + 1).min(q)
    }
}

/// 1-based block index from 1-based strip indices.
#[inline]
pub fn block_index(strips: &[usize], q: usize) -> usize {
    let m = strips.len();
    strips[..m - 1]
        .iter()
        .fold(0, |acc, &k| (acc + (k - 1)) * q)
        + strips[m - 1]
}

fn strips_of_block(k: usize, q: usize, dim: usize) -> [usize; 3] {
    let mut out = [1; 3];
    let mut rest = k - 1;
    for m in (0..dim).rev() {
        out[m] = rest % q + 1;
        rest /= q;
    }
    out
}

/// A stored point found by [`BlockStructure::range_search`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub distance: f64,
}

/// A block plus its existing axis-offset neighbours.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Neighborhood {
    pub center_block: usize,
    pub block_ids: Vec<usize>,
}

/// Points bucketed into the `q^M` blocks of a bounding cube. Static after
/// construction.
#[derive(Clone, Debug)]
pub struct BlockStructure {
    dim: usize,
    q: usize,
    bbox: BoundingBox,
    width: f64,
    // bucket b (0-based) holds ids[starts[b]..starts[b + 1]]
    starts: Vec<usize>,
    ids: Vec<usize>,
    // coordinates laid out in `ids` order
    coords: Vec<f64>,
}

impl BlockStructure {
    pub fn build(pts: &PointSet, bbox: BoundingBox, q: usize) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidParameter("q must be at least 1".into()));
        }
        if bbox.dim != pts.dim() {
            return Err(Error::DimensionMismatch {
                expected: bbox.dim,
                got: pts.dim(),
            });
        }
        let dim = pts.dim();
        let width = if bbox.edge > 0.0 {
            bbox.edge / q as f64
        } else {
            1.0
        };
        let tol = HULL_TOLERANCE * bbox.edge;
        let nblocks = q
            .checked_pow(dim as u32)
            .filter(|&b| b <= u32::MAX as usize && pts.len() <= u32::MAX as usize)
            .ok_or_else(|| Error::InvalidParameter(format!("too many blocks or points for q = {q}")))?;

        let n = pts.len();
        let mut block_of = Vec::with_capacity(n);
        let mut counts = vec![0usize; nblocks + 1];
        let mut strips = [1usize; 3];
        for (i, p) in pts.iter().enumerate() {
            if !bbox.contains(p, tol) {
                return Err(Error::PointOutsideBox { index: i });
            }
            for m in 0..dim {
                strips[m] = strip_index(p[m], bbox.min, width, q);
            }
            let b = block_index(&strips[..dim], q) - 1;
            block_of.push(b as u32);
            counts[b + 1] += 1;
        }
        for b in 0..nblocks {
            counts[b + 1] += counts[b];
        }
        let starts = counts.clone();
        let mut next = counts;
        let mut ids = vec![0usize; n];
        let mut coords = vec![0.0; n * dim];
        for (i, &b) in block_of.iter().enumerate() {
            let slot = next[b as usize];
            next[b as usize] += 1;
            ids[slot] = i;
            coords[slot * dim..(slot + 1) * dim].copy_from_slice(pts.point(i));
        }
        Ok(Self {
            dim,
            q,
            bbox,
            width,
            starts,
            ids,
            coords,
        })
    }

    /// Builds with `q` derived from the search radius `delta` under `mode`.
    pub fn for_radius(pts: &PointSet, bbox: BoundingBox, delta: f64, mode: BlockMode) -> Result<Self> {
        Self::build(pts, bbox, mode.blocks_per_side(bbox.edge, delta))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn bounding_box(&self) -> &BoundingBox {
        &self.bbox
    }

    pub fn num_blocks(&self) -> usize {
        self.starts.len() - 1
    }

    /// Number of indexed points.
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Whether a radius-`radius` ball is guaranteed to fit the neighbourhood.
    pub fn covers(&self, radius: f64) -> bool {
        self.q == 1 || radius <= self.width
    }

    /// Point indices stored in block `k` (1-based), ascending.
    pub fn bucket(&self, k: usize) -> &[usize] {
        &self.ids[self.starts[k - 1]..self.starts[k]]
    }

    fn strips_of_point(&self, p: &[f64]) -> [usize; 3] {
        let mut s = [1usize; 3];
        for m in 0..self.dim {
            s[m] = strip_index(p[m], self.bbox.min, self.width, self.q);
        }
        s
    }

    /// Block index (1-based) of the block containing `p`.
    pub fn containing_query(&self, p: &[f64]) -> Result<usize> {
        if p.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: p.len(),
            });
        }
        let tol = HULL_TOLERANCE * self.bbox.edge;
        if !self.bbox.contains(p, tol) {
            return Err(Error::PointOutsideBox { index: 0 });
        }
        Ok(block_index(&self.strips_of_point(p)[..self.dim], self.q))
    }

    pub fn neighborhood_of(&self, k: usize) -> Neighborhood {
        let center = strips_of_block(k, self.q, self.dim);
        let mut block_ids = Vec::with_capacity(3usize.pow(self.dim as u32));
        self.for_each_neighbor_strip(center, |strips| {
            block_ids.push(block_index(&strips[..self.dim], self.q));
        });
        Neighborhood {
            center_block: k,
            block_ids,
        }
    }

    fn for_each_neighbor_strip(&self, center: [usize; 3], mut f: impl FnMut([usize; 3])) {
        let range = |k: usize| k.saturating_sub(1).max(1)..=(k + 1).min(self.q);
        let last = if self.dim == 3 { range(center[2]) } else { 1..=1 };
        for a in range(center[0]) {
            for b in range(center[1]) {
                for c in last.clone() {
                    f([a, b, c]);
                }
            }
        }
    }

    /// All stored points within `radius` of `center`, ordered by distance
    /// then index.
    pub fn range_search(&self, center: &[f64], radius: f64) -> Vec<Neighbor> {
        let mut out = Vec::new();
        self.range_search_into(center, radius, &mut out);
        out
    }

    /// Same as [`range_search`](Self::range_search) but reuses `out`; returns
    /// the number of candidate points examined.
    pub fn range_search_into(&self, center: &[f64], radius: f64, out: &mut Vec<Neighbor>) -> usize {
        out.clear();
        let candidates = self.scan(center, |slot, d| {
            if d <= radius {
                out.push(Neighbor {
                    index: self.ids[slot],
                    distance: d,
                });
            }
        });
        out.sort_unstable_by(|a, b| a.distance.total_cmp(&b.distance).then(a.index.cmp(&b.index)));
        candidates
    }

    /// Number of candidates a search around `center` would examine.
    pub fn candidate_count(&self, center: &[f64]) -> usize {
        let s = self.strips_of_point(center);
        let mut n = 0;
        self.for_each_row(s, |lo, hi| n += self.starts[hi] - self.starts[lo]);
        n
    }

    // Blocks that differ only in the last strip index are adjacent in
    // storage, so each neighbourhood row is one contiguous slot range.
    fn for_each_row(&self, s: [usize; 3], mut f: impl FnMut(usize, usize)) {
        let last = self.dim - 1;
        let lo_last = s[last].saturating_sub(1).max(1);
        let hi_last = (s[last] + 1).min(self.q);
        let range = |k: usize| k.saturating_sub(1).max(1)..=(k + 1).min(self.q);
        let mut row = |prefix: &[usize]| {
            let mut first = [1usize; 3];
            let mut end = [1usize; 3];
            first[..last].copy_from_slice(prefix);
            end[..last].copy_from_slice(prefix);
            first[last] = lo_last;
            end[last] = hi_last;
            let lo = block_index(&first[..self.dim], self.q) - 1;
            let hi = block_index(&end[..self.dim], self.q);
            f(lo, hi);
        };
        if self.dim == 2 {
            for a in range(s[0]) {
                row(&[a]);
            }
        } else {
            for a in range(s[0]) {
                for b in range(s[1]) {
                    row(&[a, b]);
                }
            }
        }
    }

    fn scan(&self, center: &[f64], mut visit: impl FnMut(usize, f64)) -> usize {
        let s = self.strips_of_point(center);
        let dim = self.dim;
        let mut candidates = 0;
        self.for_each_row(s, |lo, hi| {
            let (a, b) = (self.starts[lo], self.starts[hi]);
            candidates += b - a;
            for slot in a..b {
                let p = &self.coords[slot * dim..(slot + 1) * dim];
                visit(slot, distance(center, p));
            }
        });
        candidates
    }
}
