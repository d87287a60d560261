use super::{check_dim, PointSet};
use crate::error::Result;

/// Prime bases per axis.
pub const HALTON_BASES: [u64; 3] = [2, 3, 5];

/// Van der Corput radical inverse of `index` in `base`.
pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut scale = inv;
    let mut out = 0.0;
    while index > 0 {
        out += (index % base) as f64 * scale;
        index /= base;
        scale *= inv;
    }
    out
}

/// The first `n` Halton points after skipping `skip` of them. Indexing
/// starts at 1, so `halton(1, 2, 0)` is `(1/2, 1/3)`.
pub fn halton(n: usize, dim: usize, skip: usize) -> Result<PointSet> {
    check_dim(dim)?;
    let mut coords = Vec::with_capacity(n * dim);
    for i in 0..n {
        let index = (skip + i + 1) as u64;
        for &base in &HALTON_BASES[..dim] {
            coords.push(radical_inverse(index, base));
        }
    }
    PointSet::new(dim, coords)
}
