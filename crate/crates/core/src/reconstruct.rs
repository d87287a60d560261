//! Implicit surface reconstruction from oriented point clouds.
//!
//! Each point with a nonzero normal contributes two off-surface points, one
//! step outside (value +1) and one step inside (value -1). The surface is
//! the zero level set of the interpolant of the augmented data.

use std::io::{BufRead, Write};
use std::time::Instant;

use crate::blockpart::BlockMode;
use crate::error::{Error, Result};
use crate::geometry::{convex_hull, fill_distance, PointSet, Rect};
use crate::kernels::{Kernel, KernelKind};
use crate::pum::{build_covering, subdomain_radius, suggest_d_r, PumConfig, PumModel, RunReport};

#[derive(Clone, Debug)]
pub struct OrientedCloud {
    points: PointSet,
    normals: Vec<[f64; 3]>,
}

impl OrientedCloud {
    pub fn new(points: PointSet, normals: Vec<[f64; 3]>) -> Result<Self> {
        if points.dim() != 3 {
            return Err(Error::DimensionMismatch {
                expected: 3,
                got: points.dim(),
            });
        }
        if normals.len() != points.len() {
            return Err(Error::LengthMismatch(points.len(), normals.len()));
        }
        if normals.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidPoints("non-finite normal".into()));
        }
        Ok(Self { points, normals })
    }

    pub fn points(&self) -> &PointSet {
        &self.points
    }

    pub fn normals(&self) -> &[[f64; 3]] {
        &self.normals
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// One percent of the bounding cube edge.
    pub fn default_step(&self) -> f64 {
        self.points
            .bounds()
            .map(|r| 0.01 * r.bounding_cube().edge)
            .unwrap_or(0.0)
    }

    /// Reads rows of `x y z nx ny nz`.
    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let rows = crate::io::read_rows(reader)?;
        let mut coords = Vec::with_capacity(rows.len() * 3);
        let mut normals = Vec::with_capacity(rows.len());
        for (line, row) in rows {
            if row.len() != 6 {
                return Err(Error::Parse {
                    line,
                    msg: format!("expected 6 columns, found {}", row.len()),
                });
            }
            coords.extend_from_slice(&row[..3]);
            normals.push([row[3], row[4], row[5]]);
        }
        Self::new(PointSet::new(3, coords)?, normals)
    }
}

/// Sample of the unit sphere on a golden-angle spiral, with exact normals.
pub fn unit_sphere_cloud(n: usize) -> OrientedCloud {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let mut coords = Vec::with_capacity(3 * n);
    let mut normals = Vec::with_capacity(n);
    for i in 0..n {
        let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
        let r = (1.0 - z * z).sqrt();
        let a = golden * i as f64;
        let p = [r * a.cos(), r * a.sin(), z];
        coords.extend_from_slice(&p);
        normals.push(p);
    }
    OrientedCloud::new(PointSet::new(3, coords).expect("finite"), normals).expect("consistent")
}

/// Cloud points with value 0, then the outer off-surface points with +1,
/// then the inner ones with -1. Points with a zero normal only keep their
/// on-surface condition.
pub fn augment(cloud: &OrientedCloud, step: f64) -> Result<PointSet> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidParameter(format!("step must be positive, got {step}")));
    }
    let units: Vec<Option<[f64; 3]>> = cloud
        .normals
        .iter()
        .map(|n| {
            let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
            (len > 0.0).then(|| [n[0] / len, n[1] / len, n[2] / len])
        })
        .collect();
    let n0 = cloud.len();
    let n1 = units.iter().flatten().count();
    let mut coords = Vec::with_capacity(3 * (n0 + 2 * n1));
    let mut values = Vec::with_capacity(n0 + 2 * n1);
    coords.extend_from_slice(cloud.points.coords());
    values.resize(n0, 0.0);
    for sign in [1.0, -1.0] {
        for (p, u) in cloud.points.iter().zip(&units) {
            if let Some(u) = u {
                coords.extend((0..3).map(|m| p[m] + sign * step * u[m]));
                values.push(sign);
            }
        }
    }
    PointSet::with_values(3, coords, values)
}

/// Samples on a regular grid, x varying fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct ValueGrid {
    pub counts: [usize; 3],
    pub rect: Rect,
    pub values: Vec<f64>,
}

impl ValueGrid {
    /// Grid nodes in storage order.
    pub fn nodes(counts: [usize; 3], rect: &Rect) -> PointSet {
        let axis = |m: usize| -> Vec<f64> {
            let n = counts[m].max(1);
            if n == 1 {
                return vec![0.5 * (rect.min[m] + rect.max[m])];
            }
            let step = (rect.max[m] - rect.min[m]) / (n - 1) as f64;
            (0..n)
                .map(|i| if i == n - 1 { rect.max[m] } else { rect.min[m] + step * i as f64 })
                .collect()
        };
        let (xs, ys, zs) = (axis(0), axis(1), axis(2));
        let mut coords = Vec::with_capacity(xs.len() * ys.len() * zs.len() * 3);
        for &z in &zs {
            for &y in &ys {
                for &x in &xs {
                    coords.extend([x, y, z]);
                }
            }
        }
        PointSet::new(3, coords).expect("finite grid")
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        let [nx, ny, nz] = self.counts;
        let (lo, hi) = (&self.rect.min, &self.rect.max);
        writeln!(w, "{nx} {ny} {nz} {} {} {} {} {} {}", lo[0], hi[0], lo[1], hi[1], lo[2], hi[2])?;
        for v in &self.values {
            writeln!(w, "{v}")?;
        }
        Ok(())
    }

    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let rows = crate::io::read_rows(reader)?;
        let mut it = rows.into_iter();
        let (line, head) = it.next().ok_or(Error::Parse {
            line: 1,
            msg: "missing grid header".into(),
        })?;
        if head.len() != 9 || head[..3].iter().any(|c| *c < 1.0 || c.fract() != 0.0) {
            return Err(Error::Parse {
                line,
                msg: "header must be: nx ny nz xmin xmax ymin ymax zmin zmax".into(),
            });
        }
        let counts = [head[0] as usize, head[1] as usize, head[2] as usize];
        let rect = Rect {
            min: vec![head[3], head[5], head[7]],
            max: vec![head[4], head[6], head[8]],
        };
        let mut values = Vec::new();
        for (line, row) in it {
            if row.len() != 1 {
                return Err(Error::Parse {
                    line,
                    msg: "expected one value per line".into(),
                });
            }
            values.push(row[0]);
        }
        let want = counts.iter().product::<usize>();
        if values.len() != want {
            return Err(Error::LengthMismatch(want, values.len()));
        }
        Ok(Self { counts, rect, values })
    }
}

#[derive(Clone, Debug)]
pub struct ReconstructConfig {
    /// Off-surface step; one percent of the bounding cube edge when `None`.
    pub step: Option<f64>,
    pub kernel: KernelKind,
    /// Shape parameter; when `None` the kernel support equals the
    /// subdomain diameter.
    pub epsilon: Option<f64>,
    pub d_r: Option<usize>,
    pub grid: [usize; 3],
    pub block_mode: BlockMode,
}

impl Default for ReconstructConfig {
    fn default() -> Self {
        Self {
            step: None,
            kernel: KernelKind::WuC4,
            epsilon: None,
            d_r: None,
            grid: [32, 32, 32],
            block_mode: BlockMode::Cover,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Reconstruction {
    pub step: f64,
    pub augmented: PointSet,
    pub model: PumModel,
    pub grid: ValueGrid,
    pub report: RunReport,
}

pub fn reconstruct(cloud: &OrientedCloud, cfg: &ReconstructConfig) -> Result<Reconstruction> {
    let start = Instant::now();
    let step = cfg.step.unwrap_or_else(|| cloud.default_step());
    let augmented = augment(cloud, step)?;
    augmented.check_distinct()?;
    let dom = convex_hull(&augmented)?;
    let edge = dom.bounding_box().edge;
    let d_r = cfg
        .d_r
        .unwrap_or_else(|| suggest_d_r(augmented.len(), dom.measure(), edge, 3));
    let delta = subdomain_radius(edge, d_r, 3);
    let eps = cfg.epsilon.unwrap_or(0.5 / delta);
    let pum = PumConfig {
        d_r: Some(d_r),
        block_mode: cfg.block_mode,
        ..PumConfig::new(Kernel::new(cfg.kernel, eps)?)
    };

    let covering = build_covering(&augmented, &PointSet::empty(3)?, &dom, &pum)?;
    let t_solve = Instant::now();
    let model = PumModel::fit(&augmented, &covering, pum.kernel, cfg.block_mode)?;
    let nodes = ValueGrid::nodes(cfg.grid, dom.rect());
    let ev = model.evaluate_partial(&nodes)?;
    let t_solve_s = t_solve.elapsed().as_secs_f64();

    let covered: Vec<usize> = (0..nodes.len()).filter(|&i| ev.active[i] > 0).collect();
    let fill = if covered.is_empty() {
        f64::NAN
    } else {
        fill_distance(&augmented, &nodes.select(&covered))?
    };
    let report = RunReport {
        n: augmented.len(),
        n_raw: Some(cloud.len()),
        d: covering.len(),
        s: covered.len(),
        delta: covering.radius,
        q: covering.q,
        mae: None,
        rmse: None,
        max_cond: model.max_cond(),
        av_cond: model.av_cond(),
        fill_distance: fill,
        rate: None,
        pu_max_deviation: ev.max_pu_deviation(),
        t_structure_s: covering.times.structure,
        t_search_s: covering.times.search,
        t_solve_s,
        t_total_s: start.elapsed().as_secs_f64(),
    };
    Ok(Reconstruction {
        step,
        augmented,
        model,
        grid: ValueGrid {
            counts: cfg.grid,
            rect: dom.rect().clone(),
            values: ev.values,
        },
        report,
    })
}
