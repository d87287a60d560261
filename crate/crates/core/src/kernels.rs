//! Compactly supported radial kernels and distance-matrix assembly.

use nalgebra::DMatrix;

use crate::blockpart::{BlockMode, BlockStructure, Neighbor};
use crate::error::{Error, Result};
use crate::geometry::{distance, PointSet};

/// Wendland's C2 function `(1 - εr)^4_+ (4εr + 1)`.
#[inline]
pub fn phi_wendland_c2(r: f64, epsilon: f64) -> f64 {
    let t = epsilon * r;
    if t >= 1.0 {
        return 0.0;
    }
    let s = 1.0 - t;
    let s2 = s * s;
    s2 * s2 * (4.0 * t + 1.0)
}

/// Wu's C4 function
/// `(1 - εr)^6_+ (5t^5 + 30t^4 + 72t^3 + 82t^2 + 36t + 6)` with `t = εr`.
#[inline]
pub fn phi_wu_c4(r: f64, epsilon: f64) -> f64 {
    let t = epsilon * r;
    if t >= 1.0 {
        return 0.0;
    }
    let s = 1.0 - t;
    let s3 = s * s * s;
    let poly = ((((5.0 * t + 30.0) * t + 72.0) * t + 82.0) * t + 36.0) * t + 6.0;
    s3 * s3 * poly
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum KernelKind {
    WendlandC2,
    WuC4,
}

impl KernelKind {
    pub fn name(self) -> &'static str {
        match self {
            KernelKind::WendlandC2 => "wendland-c2",
            KernelKind::WuC4 => "wu-c4",
        }
    }
}

impl std::str::FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "wendland-c2" | "wendland" => Ok(Self::WendlandC2),
            "wu-c4" | "wu" => Ok(Self::WuC4),
            other => Err(Error::InvalidParameter(format!("unknown kernel '{other}'"))),
        }
    }
}

/// A radial kernel with its shape parameter; the support radius is `1/ε`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Kernel {
    kind: KernelKind,
    epsilon: f64,
}

impl Kernel {
    pub fn new(kind: KernelKind, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "shape parameter must be positive, got {epsilon}"
            )));
        }
        Ok(Self { kind, epsilon })
    }

    pub fn wendland_c2(epsilon: f64) -> Result<Self> {
        Self::new(KernelKind::WendlandC2, epsilon)
    }

    pub fn wu_c4(epsilon: f64) -> Result<Self> {
        Self::new(KernelKind::WuC4, epsilon)
    }

    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn support(&self) -> f64 {
        1.0 / self.epsilon
    }

    #[inline]
    pub fn eval(&self, r: f64) -> f64 {
        match self.kind {
            KernelKind::WendlandC2 => phi_wendland_c2(r, self.epsilon),
            KernelKind::WuC4 => phi_wu_c4(r, self.epsilon),
        }
    }
}

/// Full `|a| x |b|` matrix of kernel values.
pub fn dense_distance_matrix(a: &PointSet, b: &PointSet, kernel: &Kernel) -> DMatrix<f64> {
    DMatrix::from_fn(a.len(), b.len(), |i, j| kernel.eval(distance(a.point(i), b.point(j))))
}

/// Coordinate-format sparse matrix, rows sorted, columns ascending in a row.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

impl SparseMatrix {
    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for &(i, j, v) in &self.entries {
            m[(i, j)] = v;
        }
        m
    }
}

/// Kernel matrix between `a` and the points indexed by `b`, keeping only
/// pairs strictly inside the support.
pub fn sparse_distance_matrix(a: &PointSet, b: &BlockStructure, kernel: &Kernel) -> Result<SparseMatrix> {
    let support = kernel.support();
    if !b.covers(support) {
        return Err(Error::SupportExceedsNeighborhood {
            support,
            width: b.width(),
        });
    }
    let mut entries = Vec::new();
    let mut found: Vec<Neighbor> = Vec::new();
    for (i, p) in a.iter().enumerate() {
        b.range_search_into(p, support, &mut found);
        let start = entries.len();
        entries.extend(
            found
                .iter()
                .filter(|n| n.distance < support)
                .map(|n| (i, n.index, kernel.eval(n.distance))),
        );
        entries[start..].sort_unstable_by_key(|e| e.1);
    }
    Ok(SparseMatrix {
        rows: a.len(),
        cols: b.len(),
        entries,
    })
}

/// Kernel matrix between two small local point sets. Uses block-accelerated
/// sparse assembly when the support is shorter than the extent of `b`,
/// dense assembly otherwise.
pub fn local_matrix(a: &PointSet, b: &PointSet, kernel: &Kernel) -> DMatrix<f64> {
    if let Some(rect) = b.bounds() {
        let cube = rect.bounding_cube();
        let q = BlockMode::Cover.blocks_per_side(cube.edge, kernel.support());
        if q > 1 {
            let bs = BlockStructure::build(b, cube, q).expect("points lie in their own bounds");
            return sparse_distance_matrix(a, &bs, kernel)
                .expect("cover mode block width exceeds support")
                .to_dense();
        }
    }
    dense_distance_matrix(a, b, kernel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{halton, Rect};
    use proptest::prelude::*;

    #[test]
    fn wendland_values() {
        assert_eq!(phi_wendland_c2(0.0, 0.5), 1.0);
        assert_eq!(phi_wendland_c2(0.0, 7.0), 1.0);
        assert_eq!(phi_wendland_c2(2.0, 0.5), 0.0);
        assert_eq!(phi_wendland_c2(1.0, 0.5), 0.1875);
        assert_eq!(phi_wendland_c2(5.0, 0.5), 0.0);
    }

    #[test]
    fn wu_values() {
        assert_eq!(phi_wu_c4(0.0, 0.1), 6.0);
        assert_eq!(phi_wu_c4(10.0, 0.1), 0.0);
        assert_eq!(phi_wu_c4(11.0, 0.1), 0.0);
        // (1/2)^6 * 55.53125
        assert!((phi_wu_c4(5.0, 0.1) - 0.867_675_781_25).abs() < 1e-15);
    }

    #[test]
    fn boundary_contact_is_high_order() {
        for eps in [0.5, 1.0, 3.0] {
            let r = 1.0 / eps - 1e-8;
            assert!(phi_wendland_c2(r, eps) <= 1e-28);
            assert!(phi_wu_c4(r, eps) <= 1e-40);
        }
    }

    #[test]
    fn monotone_on_support() {
        for kind in [KernelKind::WendlandC2, KernelKind::WuC4] {
            let k = Kernel::new(kind, 0.7).unwrap();
            let mut prev = f64::INFINITY;
            for i in 0..=2000 {
                let r = k.support() * i as f64 / 2000.0;
                let v = k.eval(r);
                assert!(v >= 0.0 && v <= prev);
                prev = v;
            }
            assert_eq!(k.eval(k.support()), 0.0);
        }
    }

    #[test]
    fn rejects_bad_epsilon() {
        assert!(Kernel::wendland_c2(0.0).is_err());
        assert!(Kernel::wu_c4(-1.0).is_err());
        assert!(Kernel::wu_c4(f64::NAN).is_err());
    }

    #[test]
    fn dense_small_cases() {
        let k = Kernel::wendland_c2(0.5).unwrap();
        let one = PointSet::new(2, vec![0.3, 0.3]).unwrap();
        assert_eq!(dense_distance_matrix(&one, &one, &k)[(0, 0)], 1.0);
        let line = PointSet::new(2, vec![0., 0., 1., 0., 2., 0.]).unwrap();
        let m = dense_distance_matrix(&line, &line, &k);
        assert_eq!(m[(0, 1)], 0.1875);
        assert_eq!(m[(1, 2)], 0.1875);
        assert_eq!(m[(0, 2)], 0.0);
        assert_eq!(m, m.transpose());
    }

    #[test]
    fn sparse_matches_masked_dense() {
        let pts = halton(100, 2, 3).unwrap();
        let k = Kernel::wendland_c2(8.0).unwrap();
        let cube = Rect::unit(2).bounding_cube();
        let bs = BlockStructure::for_radius(&pts, cube, k.support(), BlockMode::Cover).unwrap();
        let sp = sparse_distance_matrix(&pts, &bs, &k).unwrap();
        let dense = dense_distance_matrix(&pts, &pts, &k);
        let nonzero = dense.iter().filter(|&&v| v > 0.0).count();
        assert_eq!(sp.nnz(), nonzero);
        for &(i, j, v) in &sp.entries {
            assert!((v - dense[(i, j)]).abs() <= 1e-14 * dense[(i, j)].abs());
        }
        for i in 0..pts.len() {
            assert!(sp.entries.iter().any(|&(r, c, v)| r == i && c == i && v == 1.0));
        }
    }

    #[test]
    fn sparse_empty_when_far_apart() {
        let pts = PointSet::new(2, vec![0., 0., 1., 1.]).unwrap();
        let q = PointSet::new(2, vec![0.5, 0.0]).unwrap();
        let k = Kernel::wendland_c2(10.0).unwrap();
        let bs = BlockStructure::build(&pts, Rect::unit(2).bounding_cube(), 5).unwrap();
        assert_eq!(sparse_distance_matrix(&q, &bs, &k).unwrap().nnz(), 0);
    }

    #[test]
    fn sparse_rejects_wide_support() {
        let pts = halton(50, 2, 0).unwrap();
        let bs = BlockStructure::build(&pts, Rect::unit(2).bounding_cube(), 10).unwrap();
        let k = Kernel::wendland_c2(2.0).unwrap();
        assert!(matches!(
            sparse_distance_matrix(&pts, &bs, &k),
            Err(Error::SupportExceedsNeighborhood { .. })
        ));
    }

    #[test]
    fn local_matrix_agrees_with_dense() {
        let pts = halton(300, 3, 11).unwrap();
        for eps in [0.5, 4.0, 9.0] {
            let k = Kernel::wu_c4(eps).unwrap();
            let a = local_matrix(&pts, &pts, &k);
            let b = dense_distance_matrix(&pts, &pts, &k);
            assert!((a - b).amax() <= 1e-14 * 6.0);
        }
    }

    proptest! {
        #[test]
        fn interpolation_matrix_is_positive_definite(
            n in 2usize..50,
            skip in 0usize..10_000,
            dim in 2usize..=3,
            eps in 0.5f64..6.0,
            wu in any::<bool>(),
        ) {
            let pts = halton(n, dim, skip).unwrap();
            let kind = if wu { KernelKind::WuC4 } else { KernelKind::WendlandC2 };
            let k = Kernel::new(kind, eps).unwrap();
            let m = dense_distance_matrix(&pts, &pts, &k);
            let eig = m.symmetric_eigen();
            prop_assert!(eig.eigenvalues.min() > 0.0);
        }
    }
}
