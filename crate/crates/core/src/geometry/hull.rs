use std::collections::HashMap;

use super::{BoundingBox, PointSet, Rect};
use crate::error::{Error, Result};

/// Membership tolerance, relative to the bounding-box edge.
pub const HULL_TOLERANCE: f64 = 1e-12;

/// Half-space `normal · x <= offset` with a unit outward normal. In 2D the
/// third component is zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Facet {
    pub normal: [f64; 3],
    pub offset: f64,
}

impl Facet {
    #[inline]
    pub fn signed_distance(&self, p: &[f64]) -> f64 {
        p.iter().zip(&self.normal).map(|(a, b)| a * b).sum::<f64>() - self.offset
    }
}

/// Convex hull of a point set together with its bounding rectangle R and
/// bounding cube L.
#[derive(Clone, Debug)]
pub struct ConvexDomain {
    dim: usize,
    vertices: PointSet,
    facets: Vec<Facet>,
    measure: f64,
    rect: Rect,
    bbox: BoundingBox,
    tol: f64,
}

impl ConvexDomain {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &PointSet {
        &self.vertices
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    /// Area (2D) or volume (3D).
    pub fn measure(&self) -> f64 {
        self.measure
    }

    pub fn rect(&self) -> &Rect {
        &self.rect
    }

    pub fn bounding_box(&self) -> &BoundingBox {
        &self.bbox
    }

    /// Absolute membership tolerance.
    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    /// Boundary-inclusive membership test.
    pub fn contains(&self, p: &[f64]) -> bool {
        self.facets.iter().all(|f| f.signed_distance(p) <= self.tol)
    }
}

/// Convex hull by monotone chain (2D) or incremental quickhull (3D).
pub fn convex_hull(pts: &PointSet) -> Result<ConvexDomain> {
    let dim = pts.dim();
    if pts.len() < dim + 1 {
        return Err(Error::DegenerateInput(format!(
            "{} points cannot span a {dim}-dimensional hull",
            pts.len()
        )));
    }
    let rect = pts.bounds().expect("nonempty");
    let bbox = rect.bounding_cube();
    let scale = bbox.edge.max(f64::MIN_POSITIVE);
    let tol = HULL_TOLERANCE * scale;

    let (vertex_ids, facets, measure) = if dim == 2 {
        hull_2d(pts)?
    } else {
        hull_3d(pts, 0.5 * tol)?
    };
    if !(measure > 0.0) {
        return Err(Error::DegenerateInput("hull has zero measure".into()));
    }
    Ok(ConvexDomain {
        dim,
        vertices: pts.select(&vertex_ids),
        facets,
        measure,
        rect,
        bbox,
        tol,
    })
}

fn cross2(o: &[f64], a: &[f64], b: &[f64]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn hull_2d(pts: &PointSet) -> Result<(Vec<usize>, Vec<Facet>, f64)> {
    let mut order: Vec<usize> = (0..pts.len()).collect();
    order.sort_by(|&a, &b| {
        let (p, q) = (pts.point(a), pts.point(b));
        p[0].total_cmp(&q[0]).then(p[1].total_cmp(&q[1]))
    });
    order.dedup_by(|a, b| pts.point(*a) == pts.point(*b));

    let mut chain: Vec<usize> = Vec::with_capacity(order.len() + 1);
    for pass in 0..2 {
        let start = chain.len();
        let iter: Box<dyn Iterator<Item = &usize>> = if pass == 0 {
            Box::new(order.iter())
        } else {
            Box::new(order.iter().rev())
        };
        for &i in iter {
            while chain.len() >= start + 2 {
                let n = chain.len();
                if cross2(pts.point(chain[n - 2]), pts.point(chain[n - 1]), pts.point(i)) > 0.0 {
                    break;
                }
                chain.pop();
            }
            chain.push(i);
        }
        chain.pop();
    }
    if chain.len() < 3 {
        return Err(Error::DegenerateInput("all points are collinear".into()));
    }

    let n = chain.len();
    let mut centroid = [0.0; 2];
    for &i in &chain {
        centroid[0] += pts.point(i)[0] / n as f64;
        centroid[1] += pts.point(i)[1] / n as f64;
    }
    let mut facets = Vec::with_capacity(n);
    let mut area = 0.0;
    for k in 0..n {
        let a = pts.point(chain[k]);
        let b = pts.point(chain[(k + 1) % n]);
        let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
        let len = dx.hypot(dy);
        let normal = [dy / len, -dx / len, 0.0];
        facets.push(Facet {
            normal,
            offset: normal[0] * a[0] + normal[1] * a[1],
        });
        area += 0.5 * cross2(&centroid, a, b);
    }
    Ok((chain, facets, area))
}

type V3 = [f64; 3];

fn v3(p: &[f64]) -> V3 {
    [p[0], p[1], p[2]]
}

fn sub(a: V3, b: V3) -> V3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: V3, b: V3) -> V3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: V3, b: V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: V3) -> f64 {
    dot(a, a).sqrt()
}

struct Face {
    v: [usize; 3],
    normal: V3,
    offset: f64,
    outside: Vec<usize>,
    alive: bool,
}

impl Face {
    fn new(pts: &PointSet, v: [usize; 3]) -> Self {
        let (a, b, c) = (v3(pts.point(v[0])), v3(pts.point(v[1])), v3(pts.point(v[2])));
        let n = cross(sub(b, a), sub(c, a));
        let len = norm(n);
        let normal = if len > 0.0 {
            [n[0] / len, n[1] / len, n[2] / len]
        } else {
            [0.0; 3]
        };
        Face {
            v,
            normal,
            offset: dot(normal, a),
            outside: Vec::new(),
            alive: true,
        }
    }

    fn distance(&self, p: &[f64]) -> f64 {
        dot(self.normal, v3(p)) - self.offset
    }
}

fn hull_3d(pts: &PointSet, eps: f64) -> Result<(Vec<usize>, Vec<Facet>, f64)> {
    let n = pts.len();
    let p = |i: usize| v3(pts.point(i));

    // initial simplex: widest axis-extreme pair, farthest from that line,
    // farthest from that plane
    let mut extremes = Vec::with_capacity(6);
    for m in 0..3 {
        let (mut lo, mut hi) = (0, 0);
        for i in 0..n {
            if pts.point(i)[m] < pts.point(lo)[m] {
                lo = i;
            }
            if pts.point(i)[m] > pts.point(hi)[m] {
                hi = i;
            }
        }
        extremes.push(lo);
        extremes.push(hi);
    }
    let (mut i0, mut i1, mut best) = (0, 0, -1.0);
    for &a in &extremes {
        for &b in &extremes {
            let d = norm(sub(p(a), p(b)));
            if d > best {
                (i0, i1, best) = (a, b, d);
            }
        }
    }
    if best <= eps {
        return Err(Error::DegenerateInput("all points coincide".into()));
    }
    let axis = sub(p(i1), p(i0));
    let (mut i2, mut best) = (0, -1.0);
    for i in 0..n {
        let d = norm(cross(axis, sub(p(i), p(i0)))) / norm(axis);
        if d > best {
            (i2, best) = (i, d);
        }
    }
    if best <= eps {
        return Err(Error::DegenerateInput("all points are collinear".into()));
    }
    let base = Face::new(pts, [i0, i1, i2]);
    let (mut i3, mut best) = (0, -1.0);
    for i in 0..n {
        let d = base.distance(pts.point(i)).abs();
        if d > best {
            (i3, best) = (i, d);
        }
    }
    if best <= eps {
        return Err(Error::DegenerateInput("all points are coplanar".into()));
    }

    let simplex = [i0, i1, i2, i3];
    let inner = {
        let mut c = [0.0; 3];
        for &i in &simplex {
            for (cm, pm) in c.iter_mut().zip(p(i)) {
                *cm += pm / 4.0;
            }
        }
        c
    };
    let mut faces: Vec<Face> = Vec::new();
    let mut edges: HashMap<(usize, usize), usize> = HashMap::new();
    let add_face = |faces: &mut Vec<Face>, edges: &mut HashMap<(usize, usize), usize>, v: [usize; 3]| {
        let f = Face::new(pts, v);
        let id = faces.len();
        edges.insert((v[0], v[1]), id);
        edges.insert((v[1], v[2]), id);
        edges.insert((v[2], v[0]), id);
        faces.push(f);
        id
    };
    for skip in 0..4 {
        let tri: Vec<usize> = (0..4).filter(|&k| k != skip).map(|k| simplex[k]).collect();
        let mut v = [tri[0], tri[1], tri[2]];
        if Face::new(pts, v).distance(&inner) > 0.0 {
            v.swap(1, 2);
        }
        add_face(&mut faces, &mut edges, v);
    }

    for i in 0..n {
        if simplex.contains(&i) {
            continue;
        }
        let q = pts.point(i);
        if let Some(f) = faces.iter_mut().find(|f| f.distance(q) > eps) {
            f.outside.push(i);
        }
    }

    let mut queue: Vec<usize> = (0..faces.len()).collect();
    while let Some(fid) = queue.pop() {
        if !faces[fid].alive || faces[fid].outside.is_empty() {
            continue;
        }
        let apex = *faces[fid]
            .outside
            .iter()
            .max_by(|&&a, &&b| {
                faces[fid]
                    .distance(pts.point(a))
                    .total_cmp(&faces[fid].distance(pts.point(b)))
            })
            .expect("nonempty");
        let ap = pts.point(apex);

        let mut visible = vec![fid];
        let mut seen = std::collections::HashSet::from([fid]);
        let mut horizon = Vec::new();
        let mut k = 0;
        while k < visible.len() {
            let f = visible[k];
            k += 1;
            let v = faces[f].v;
            for e in 0..3 {
                let (a, b) = (v[e], v[(e + 1) % 3]);
                let nb = edges[&(b, a)];
                if seen.contains(&nb) {
                    if !visible.contains(&nb) {
                        horizon.push((a, b));
                    }
                    continue;
                }
                if faces[nb].distance(ap) > eps {
                    seen.insert(nb);
                    visible.push(nb);
                } else {
                    seen.insert(nb);
                    horizon.push((a, b));
                }
            }
        }

        let mut orphans = Vec::new();
        for &f in &visible {
            faces[f].alive = false;
            orphans.append(&mut faces[f].outside);
            let v = faces[f].v;
            for e in 0..3 {
                let key = (v[e], v[(e + 1) % 3]);
                if edges.get(&key) == Some(&f) {
                    edges.remove(&key);
                }
            }
        }
        let first_new = faces.len();
        for &(a, b) in &horizon {
            let id = add_face(&mut faces, &mut edges, [a, b, apex]);
            queue.push(id);
        }
        for q in orphans {
            if q == apex {
                continue;
            }
            let qp = pts.point(q);
            if let Some(f) = faces[first_new..].iter_mut().find(|f| f.distance(qp) > eps) {
                f.outside.push(q);
            }
        }
    }

    let alive: Vec<&Face> = faces.iter().filter(|f| f.alive).collect();
    let mut vertex_ids: Vec<usize> = alive.iter().flat_map(|f| f.v).collect();
    vertex_ids.sort_unstable();
    vertex_ids.dedup();
    let mut center = [0.0; 3];
    for &i in &vertex_ids {
        for (cm, pm) in center.iter_mut().zip(p(i)) {
            *cm += pm / vertex_ids.len() as f64;
        }
    }
    let mut volume = 0.0;
    for f in &alive {
        let (a, b, c) = (p(f.v[0]), p(f.v[1]), p(f.v[2]));
        volume += dot(sub(a, center), cross(sub(b, center), sub(c, center))) / 6.0;
    }
    let facets = alive
        .iter()
        .filter(|f| f.normal != [0.0; 3])
        .map(|f| Facet {
            normal: f.normal,
            offset: f.offset,
        })
        .collect();
    Ok((vertex_ids, facets, volume))
}
