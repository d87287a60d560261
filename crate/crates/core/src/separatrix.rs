//! Separatrix points of a three-species competition model, and the
//! interpolated separatrix surface.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::PointSet;
use crate::kernels::Kernel;
use crate::pum::{pum_interpolate, EvalGrid, PumConfig, PumRun};

/// Rates and capacities of the competition model on the cube `[0, gamma]^3`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CompetitionParams {
    pub p: f64,
    pub q: f64,
    pub r: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub e: f64,
    pub f: f64,
    pub g: f64,
    pub u: f64,
    pub v: f64,
    pub w: f64,
    pub gamma: f64,
}

impl Default for CompetitionParams {
    /// A bistable choice where `(0, v, 0)` and `(0, 0, w)` are both stable.
    fn default() -> Self {
        Self {
            p: 1.0,
            q: 0.5,
            r: 2.0,
            a: 1.0,
            b: 2.0,
            c: 0.3,
            e: 1.0,
            f: 3.0,
            g: 2.0,
            u: 1.0,
            v: 2.0,
            w: 1.0,
            gamma: 2.0,
        }
    }
}

impl CompetitionParams {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.p, self.q, self.r, self.a, self.b, self.c, self.e, self.f, self.g, self.u, self.v, self.w,
        ];
        if all.iter().any(|x| !(*x >= 0.0 && x.is_finite())) {
            return Err(Error::InvalidParameter("model parameters must be nonnegative".into()));
        }
        if self.u == 0.0 || self.v == 0.0 || self.w == 0.0 {
            return Err(Error::InvalidParameter("carrying capacities must be positive".into()));
        }
        if !(self.gamma > 0.0) {
            return Err(Error::InvalidParameter("cube edge must be positive".into()));
        }
        Ok(())
    }

    pub fn e2(&self) -> [f64; 3] {
        [0.0, self.v, 0.0]
    }

    pub fn e3(&self) -> [f64; 3] {
        [0.0, 0.0, self.w]
    }
}

pub fn rhs(s: [f64; 3], k: &CompetitionParams) -> [f64; 3] {
    let [x, y, z] = s;
    [
        k.p * (1.0 - x / k.u) * x - k.a * x * y - k.b * x * z,
        k.q * (1.0 - y / k.v) * y - k.c * x * y - k.e * y * z,
        k.r * (1.0 - z / k.w) * z - k.f * x * z - k.g * y * z,
    ]
}

fn rk4_step(s: [f64; 3], h: f64, k: &CompetitionParams) -> [f64; 3] {
    let add = |a: [f64; 3], b: [f64; 3], t: f64| [a[0] + t * b[0], a[1] + t * b[1], a[2] + t * b[2]];
    let k1 = rhs(s, k);
    let k2 = rhs(add(s, k1, h / 2.0), k);
    let k3 = rhs(add(s, k2, h / 2.0), k);
    let k4 = rhs(add(s, k3, h), k);
    [0, 1, 2].map(|m| s[m] + h / 6.0 * (k1[m] + 2.0 * k2[m] + 2.0 * k3[m] + k4[m]))
}

/// Fixed-step fourth-order Runge-Kutta settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Integrator {
    pub step: f64,
    pub t_max: f64,
    /// Distance to an equilibrium that counts as converged.
    pub tol: f64,
}

impl Default for Integrator {
    fn default() -> Self {
        Self {
            step: 1e-2,
            t_max: 500.0,
            tol: 1e-3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Basin {
    E2,
    E3,
    Unresolved,
}

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Integrates from `start` until the trajectory settles at `E2` or `E3`.
pub fn classify(start: [f64; 3], k: &CompetitionParams, it: &Integrator) -> Basin {
    let (e2, e3) = (k.e2(), k.e3());
    let steps = (it.t_max / it.step).ceil() as usize;
    let mut s = start;
    for _ in 0..=steps {
        if dist(s, e2) < it.tol {
            return Basin::E2;
        }
        if dist(s, e3) < it.tol {
            return Basin::E3;
        }
        if s.iter().any(|c| !c.is_finite()) {
            break;
        }
        s = rk4_step(s, it.step, k);
    }
    Basin::Unresolved
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Bisection {
    pub point: [f64; 3],
    pub lo: [f64; 3],
    pub hi: [f64; 3],
}

impl Bisection {
    pub fn width(&self) -> f64 {
        dist(self.lo, self.hi)
    }
}

/// Halves the segment `[a, b]` until its length is at most `tol`, keeping
/// endpoints in different basins. The result is the final midpoint.
pub fn bisect_separatrix(
    a: [f64; 3],
    b: [f64; 3],
    k: &CompetitionParams,
    it: &Integrator,
    tol: f64,
) -> Result<Bisection> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("bisection tolerance must be positive".into()));
    }
    let (ca, cb) = (classify(a, k, it), classify(b, k, it));
    if ca == Basin::Unresolved || cb == Basin::Unresolved {
        return Err(Error::InvalidParameter("segment endpoint is unresolved".into()));
    }
    if ca == cb {
        return Err(Error::SameBasin(format!("{ca:?}")));
    }
    let (mut lo, mut hi) = (a, b);
    let mid = |x: [f64; 3], y: [f64; 3]| [0, 1, 2].map(|m| 0.5 * (x[m] + y[m]));
    while dist(lo, hi) > tol {
        let m = mid(lo, hi);
        let cm = classify(m, k, it);
        if cm == ca {
            lo = m;
        } else if cm == cb {
            hi = m;
        } else {
            break;
        }
    }
    Ok(Bisection {
        point: mid(lo, hi),
        lo,
        hi,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SeparatrixSample {
    pub point: [f64; 3],
    /// Axis along which the bracketing lattice pair was aligned.
    pub axis: usize,
}

/// Separatrix points from all axis-aligned neighbour pairs of an
/// `n x n x n` lattice on the cube whose endpoints land in different
/// basins.
pub fn sample_separatrix(
    k: &CompetitionParams,
    it: &Integrator,
    n: usize,
    tol: f64,
) -> Result<Vec<SeparatrixSample>> {
    k.validate()?;
    if n < 2 {
        return Err(Error::InvalidParameter("lattice needs at least 2 nodes per axis".into()));
    }
    let h = k.gamma / (n - 1) as f64;
    let at = |i: usize, j: usize, l: usize| [i as f64 * h, j as f64 * h, l as f64 * h];
    let idx = |i: usize, j: usize, l: usize| (i * n + j) * n + l;
    let basins: Vec<Basin> = (0..n * n * n)
        .into_par_iter()
        .map(|t| classify(at(t / (n * n), t / n % n, t % n), k, it))
        .collect();

    let mut pairs = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for l in 0..n {
                let here = basins[idx(i, j, l)];
                if here == Basin::Unresolved {
                    continue;
                }
                for axis in 0..3 {
                    let mut s = [i, j, l];
                    s[axis] += 1;
                    if s[axis] >= n {
                        continue;
                    }
                    let there = basins[idx(s[0], s[1], s[2])];
                    if there != Basin::Unresolved && there != here {
                        pairs.push((at(i, j, l), at(s[0], s[1], s[2]), axis));
                    }
                }
            }
        }
    }
    let samples: Vec<Option<SeparatrixSample>> = pairs
        .par_iter()
        .map(|&(a, b, axis)| {
            bisect_separatrix(a, b, k, it, tol)
                .ok()
                .map(|r| SeparatrixSample { point: r.point, axis })
        })
        .collect();
    Ok(samples.into_iter().flatten().collect())
}

/// The separatrix written as a height field over two coordinates.
#[derive(Clone, Debug)]
pub struct SeparatrixSurface {
    /// Coordinate treated as the height.
    pub height_axis: usize,
    /// Samples used for the fit: the other two coordinates with the height
    /// as value.
    pub data: PointSet,
    pub run: PumRun,
}

/// Fits the separatrix as a height field. The height axis is the one along
/// which most bracketing pairs were aligned; only those samples are used,
/// one per lattice column.
pub fn fit_separatrix(samples: &[SeparatrixSample], epsilon: f64, grid: EvalGrid) -> Result<SeparatrixSurface> {
    let mut count = [0usize; 3];
    samples.iter().for_each(|s| count[s.axis] += 1);
    let height_axis = (0..3).max_by_key(|&m| (count[m], 2 - m)).unwrap_or(2);
    let plane: Vec<usize> = (0..3).filter(|&m| m != height_axis).collect();
    let mut coords = Vec::new();
    let mut values = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for s in samples.iter().filter(|s| s.axis == height_axis) {
        let key = (s.point[plane[0]].to_bits(), s.point[plane[1]].to_bits());
        if seen.insert(key) {
            coords.extend([s.point[plane[0]], s.point[plane[1]]]);
            values.push(s.point[height_axis]);
        }
    }
    if values.len() < 3 {
        return Err(Error::DegenerateInput(format!(
            "only {} separatrix samples along the height axis",
            values.len()
        )));
    }
    let data = PointSet::with_values(2, coords, values)?;
    let cfg = PumConfig {
        eval_grid: Some(grid),
        ..PumConfig::new(Kernel::wendland_c2(epsilon)?)
    };
    let run = pum_interpolate(&data, &cfg, None)?;
    Ok(SeparatrixSurface {
        height_axis,
        data,
        run,
    })
}
