//! Partition of unity interpolation: covering construction, local solves,
//! Shepard blending and global evaluation.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::blockpart::{BlockMode, BlockStructure, Neighbor};
use crate::error::{Error, Result};
use crate::geometry::{
    convex_hull, distance, fill_distance, grid_on_rect, grid_on_rect_axes, indices_in_domain,
    BoundingBox, ConvexDomain, PointSet, Rect,
};
use crate::kernels::{local_matrix, phi_wendland_c2, Kernel};
use crate::validation;

/// Suggested number of subdomain centres on the bounding box,
/// `floor(L/2 * (N/A)^(1/M))^M`, never less than one.
pub fn suggest_d_r(n: usize, measure: f64, edge: f64, dim: usize) -> usize {
    let density = n as f64 / measure;
    let root = match dim {
        2 => density.sqrt(),
        3 => density.cbrt(),
        _ => density.powf(1.0 / dim as f64),
    };
    let side = (0.5 * edge * root + 1e-9).floor();
    if !(side >= 1.0) {
        return 1;
    }
    (side as usize).pow(dim as u32)
}

/// Uniform subdomain radius `L * sqrt(2) / d_R^(1/M)`.
pub fn subdomain_radius(edge: f64, d_r: usize, dim: usize) -> f64 {
    let d = d_r.max(1) as f64;
    let root = match dim {
        2 => d.sqrt(),
        3 => d.cbrt(),
        _ => d.powf(1.0 / dim as f64),
    };
    edge * std::f64::consts::SQRT_2 / root
}

/// Evaluation grid on the bounding rectangle of the domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EvalGrid {
    /// Roughly this many nodes in total, split evenly between the axes.
    Total(usize),
    /// Explicit node count per axis.
    Axes(Vec<usize>),
}

impl EvalGrid {
    /// 40x40 in 2D, 20x20x20 in 3D.
    pub fn default_for(dim: usize) -> Self {
        match dim {
            2 => EvalGrid::Axes(vec![40, 40]),
            _ => EvalGrid::Axes(vec![20; dim]),
        }
    }

    pub fn count(&self) -> usize {
        match self {
            EvalGrid::Total(n) => *n,
            EvalGrid::Axes(c) => c.iter().product(),
        }
    }

    pub fn points(&self, rect: &Rect) -> Result<PointSet> {
        match self {
            EvalGrid::Total(n) => Ok(grid_on_rect(rect, *n)),
            EvalGrid::Axes(c) => {
                if c.len() != rect.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: rect.dim(),
                        got: c.len(),
                    });
                }
                Ok(grid_on_rect_axes(rect, c))
            }
        }
    }
}

impl std::str::FromStr for EvalGrid {
    type Err = Error;

    /// Accepts `40x40`, `20x20x20` or a plain total such as `1600`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("bad grid spec '{s}'"));
        let parts: Vec<usize> = s
            .split(['x', 'X'])
            .map(|p| p.trim().parse::<usize>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        if parts.contains(&0) {
            return Err(bad());
        }
        match parts.len() {
            1 => Ok(EvalGrid::Total(parts[0])),
            _ => Ok(EvalGrid::Axes(parts)),
        }
    }
}

#[derive(Clone, Debug)]
pub struct PumConfig {
    pub kernel: Kernel,
    /// Requested number of subdomain centres on the box; derived from the
    /// data density when `None`.
    pub d_r: Option<usize>,
    /// Evaluation grid; 40x40 or 20x20x20 when `None`.
    pub eval_grid: Option<EvalGrid>,
    pub block_mode: BlockMode,
    pub delta_override: Option<f64>,
}

impl PumConfig {
    pub fn new(kernel: Kernel) -> Self {
        Self {
            kernel,
            d_r: None,
            eval_grid: None,
            block_mode: BlockMode::Cover,
            delta_override: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d_r == Some(0) {
            return Err(Error::InvalidParameter("d_R must be at least 1".into()));
        }
        if let Some(g) = &self.eval_grid {
            if g.count() == 0 {
                return Err(Error::InvalidParameter("evaluation grid is empty".into()));
            }
        }
        if let Some(d) = self.delta_override {
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::InvalidParameter(format!("delta must be positive, got {d}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StageTimes {
    pub structure: f64,
    pub search: f64,
}

/// Subdomain balls of a common radius with their member node and
/// evaluation point indices. Subdomains without nodes are dropped.
#[derive(Clone, Debug)]
pub struct Covering {
    pub centers: PointSet,
    pub radius: f64,
    pub q: usize,
    pub d_requested: usize,
    pub pruned: usize,
    /// Centres added at otherwise uncovered data sites or evaluation points.
    pub repaired: usize,
    pub node_lists: Vec<Vec<usize>>,
    pub eval_lists: Vec<Vec<usize>>,
    pub times: StageTimes,
}

impl Covering {
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }
}

fn members(bs: &BlockStructure, center: &[f64], radius: f64, buf: &mut Vec<Neighbor>) -> Vec<usize> {
    bs.range_search_into(center, radius, buf);
    let mut ids: Vec<usize> = buf
        .iter()
        .filter(|n| n.distance < radius)
        .map(|n| n.index)
        .collect();
    ids.sort_unstable();
    ids
}

/// Builds the covering of `dom` used to interpolate `nodes` at `eval`.
pub fn build_covering(nodes: &PointSet, eval: &PointSet, dom: &ConvexDomain, cfg: &PumConfig) -> Result<Covering> {
    cfg.validate()?;
    let dim = dom.dim();
    for p in [nodes, eval] {
        if p.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: p.dim(),
            });
        }
    }
    if nodes.is_empty() {
        return Err(Error::InvalidPoints("no data sites".into()));
    }
    let bbox = *dom.bounding_box();
    let d_requested = cfg
        .d_r
        .unwrap_or_else(|| suggest_d_r(nodes.len(), dom.measure(), bbox.edge, dim));
    let radius = cfg
        .delta_override
        .unwrap_or_else(|| subdomain_radius(bbox.edge, d_requested, dim));
    let q = cfg.block_mode.blocks_per_side(bbox.edge, radius);

    let grid = grid_on_rect(dom.rect(), d_requested);
    let candidates = grid.select(&indices_in_domain(&grid, dom));

    let t0 = Instant::now();
    let node_bs = BlockStructure::build(nodes, bbox, q)?;
    let eval_bs = BlockStructure::build(eval, bbox, q)?;
    let structure = t0.elapsed().as_secs_f64();

    let t1 = Instant::now();
    let lists: Vec<(Vec<usize>, Vec<usize>)> = (0..candidates.len())
        .into_par_iter()
        .map_init(Vec::new, |buf, j| {
            let c = candidates.point(j);
            let n = members(&node_bs, c, radius, buf);
            let e = if n.is_empty() {
                Vec::new()
            } else {
                members(&eval_bs, c, radius, buf)
            };
            (n, e)
        })
        .collect();
    let search = t1.elapsed().as_secs_f64();

    let keep: Vec<usize> = (0..lists.len()).filter(|&j| !lists[j].0.is_empty()).collect();
    let pruned = lists.len() - keep.len();
    if pruned > 0 {
        log::info!("pruned {pruned} subdomains without data sites");
    }
    let mut center_coords: Vec<f64> = Vec::with_capacity((keep.len() + 16) * dim);
    let mut node_lists = Vec::with_capacity(keep.len());
    let mut eval_lists = Vec::with_capacity(keep.len());
    for &j in &keep {
        center_coords.extend_from_slice(candidates.point(j));
        node_lists.push(lists[j].0.clone());
        eval_lists.push(lists[j].1.clone());
    }

    // Grid centres near the hull boundary fall outside the domain and are
    // dropped, which can leave corners of the domain uncovered. Each such
    // point gets a subdomain centred on itself.
    let t2 = Instant::now();
    let mut node_hit = vec![false; nodes.len()];
    let mut eval_hit = vec![false; eval.len()];
    for list in &node_lists {
        list.iter().for_each(|&i| node_hit[i] = true);
    }
    for list in &eval_lists {
        list.iter().for_each(|&i| eval_hit[i] = true);
    }
    let mut buf = Vec::new();
    let mut repaired = 0;
    for (set, is_node) in [(nodes, true), (eval, false)] {
        for i in 0..set.len() {
            let hit = if is_node { node_hit[i] } else { eval_hit[i] };
            if hit {
                continue;
            }
            let c = set.point(i);
            let n = members(&node_bs, c, radius, &mut buf);
            if n.is_empty() {
                return Err(Error::InsufficientCoverage { index: i });
            }
            let e = members(&eval_bs, c, radius, &mut buf);
            n.iter().for_each(|&k| node_hit[k] = true);
            e.iter().for_each(|&k| eval_hit[k] = true);
            center_coords.extend_from_slice(c);
            node_lists.push(n);
            eval_lists.push(e);
            repaired += 1;
        }
    }
    let search = search + t2.elapsed().as_secs_f64();
    if repaired > 0 {
        log::debug!("added {repaired} subdomains at uncovered points");
    }
    let centers = PointSet::new(dim, center_coords)?;

    Ok(Covering {
        centers,
        radius,
        q,
        d_requested,
        pruned,
        repaired,
        node_lists,
        eval_lists,
        times: StageTimes { structure, search },
    })
}

/// Shepard weights of `p` for the subdomains in `active`, built from the
/// Wendland C2 function vanishing at distance `radius` from each centre.
pub fn shepard_weights(p: &[f64], centers: &PointSet, radius: f64, active: &[usize]) -> Result<Vec<f64>> {
    let eps = 1.0 / radius;
    let raw: Vec<f64> = active
        .iter()
        .map(|&j| phi_wendland_c2(distance(p, centers.point(j)), eps))
        .collect();
    let total: f64 = raw.iter().sum();
    if !(total > 0.0) {
        return Err(Error::NoActiveSubdomain { index: 0 });
    }
    Ok(raw.into_iter().map(|w| w / total).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalFit {
    pub subdomain: usize,
    pub coefficients: Vec<f64>,
    pub cond: f64,
}

/// Solves the local interpolation system on `local` (which must carry values).
pub fn local_solve(subdomain: usize, local: &PointSet, kernel: &Kernel) -> Result<LocalFit> {
    let values = local
        .values()
        .ok_or_else(|| Error::InvalidPoints("local solve needs data values".into()))?;
    let n = local.len();
    if n == 0 {
        return Err(Error::InvalidPoints("empty subdomain".into()));
    }
    if n == 1 {
        let c = values[0] / kernel.eval(0.0);
        return Ok(LocalFit {
            subdomain,
            coefficients: vec![c],
            cond: 1.0,
        });
    }
    let phi = local_matrix(local, local, kernel);
    let cond = condition_number(&phi);
    if !(cond.is_finite()) {
        return Err(Error::SingularLocalSystem { subdomain, cond });
    }
    let rhs = DVector::from_column_slice(values);
    let c = match phi.clone().cholesky() {
        Some(ch) => ch.solve(&rhs),
        None => phi
            .lu()
            .solve(&rhs)
            .ok_or(Error::SingularLocalSystem { subdomain, cond })?,
    };
    if c.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularLocalSystem { subdomain, cond });
    }
    Ok(LocalFit {
        subdomain,
        coefficients: c.as_slice().to_vec(),
        cond,
    })
}

/// 2-norm condition number of a symmetric matrix.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 1 {
        return if m[(0, 0)] != 0.0 { 1.0 } else { f64::INFINITY };
    }
    let eig = m.clone().symmetric_eigenvalues();
    let (lo, hi) = eig.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), v| {
        (lo.min(v.abs()), hi.max(v.abs()))
    });
    if lo == 0.0 {
        f64::INFINITY
    } else {
        (hi / lo).max(1.0)
    }
}

/// Result of evaluating a model at a set of points.
#[derive(Clone, Debug, Default)]
pub struct Evaluation {
    /// Interpolated values; NaN where no subdomain is active.
    pub values: Vec<f64>,
    /// Sum of the blending weights at each point.
    pub weight_sums: Vec<f64>,
    /// Number of active subdomains at each point.
    pub active: Vec<u32>,
    /// Total point/subdomain pairs visited.
    pub touches: usize,
    /// Largest centre distance among visited pairs.
    pub max_touch_distance: f64,
}

impl Evaluation {
    pub fn max_pu_deviation(&self) -> f64 {
        self.weight_sums
            .iter()
            .zip(&self.active)
            .filter(|(_, &a)| a > 0)
            .map(|(s, _)| (s - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn first_uncovered(&self) -> Option<usize> {
        self.active.iter().position(|&a| a == 0)
    }
}

/// The global interpolant: local fits blended with Shepard weights.
#[derive(Clone, Debug)]
pub struct PumModel {
    kernel: Kernel,
    block_mode: BlockMode,
    radius: f64,
    centers: PointSet,
    nodes: PointSet,
    node_lists: Vec<Vec<usize>>,
    fits: Vec<LocalFit>,
}

impl PumModel {
    /// Solves every local system of `covering` in parallel.
    pub fn fit(nodes: &PointSet, covering: &Covering, kernel: Kernel, block_mode: BlockMode) -> Result<Self> {
        if nodes.values().is_none() {
            return Err(Error::InvalidPoints("data sites carry no values".into()));
        }
        let fits = covering
            .node_lists
            .par_iter()
            .enumerate()
            .map(|(j, ids)| local_solve(j, &nodes.select(ids), &kernel))
            .collect::<Result<Vec<_>>>()?;
        let mut stripped = nodes.clone();
        stripped.clear_values();
        Ok(Self {
            kernel,
            block_mode,
            radius: covering.radius,
            centers: covering.centers.clone(),
            nodes: stripped,
            node_lists: covering.node_lists.clone(),
            fits,
        })
    }

    pub fn dim(&self) -> usize {
        self.centers.dim()
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn centers(&self) -> &PointSet {
        &self.centers
    }

    pub fn fits(&self) -> &[LocalFit] {
        &self.fits
    }

    pub fn node_lists(&self) -> &[Vec<usize>] {
        &self.node_lists
    }

    pub fn max_cond(&self) -> f64 {
        self.fits.iter().map(|f| f.cond).fold(0.0, f64::max)
    }

    pub fn av_cond(&self) -> f64 {
        if self.fits.is_empty() {
            return 0.0;
        }
        self.fits.iter().map(|f| f.cond).sum::<f64>() / self.fits.len() as f64
    }

    /// For each subdomain, the indices of `pts` strictly inside it.
    pub fn membership(&self, pts: &PointSet) -> Result<Vec<Vec<usize>>> {
        if pts.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: pts.dim(),
            });
        }
        let Some(rect) = pts.bounds() else {
            return Ok(vec![Vec::new(); self.centers.len()]);
        };
        let cube = rect.bounding_cube();
        let bbox = BoundingBox {
            edge: cube.edge.max(self.radius),
            ..cube
        };
        let q = self.block_mode.blocks_per_side(bbox.edge, self.radius);
        let bs = BlockStructure::build(pts, bbox, q)?;
        Ok((0..self.centers.len())
            .into_par_iter()
            .map_init(Vec::new, |buf, j| members(&bs, self.centers.point(j), self.radius, buf))
            .collect())
    }

    /// Evaluates the interpolant; fails if a point lies in no subdomain.
    pub fn evaluate(&self, pts: &PointSet) -> Result<Evaluation> {
        let ev = self.evaluate_partial(pts)?;
        match ev.first_uncovered() {
            Some(index) => Err(Error::NoActiveSubdomain { index }),
            None => Ok(ev),
        }
    }

    /// Evaluates the interpolant, leaving NaN at uncovered points.
    pub fn evaluate_partial(&self, pts: &PointSet) -> Result<Evaluation> {
        let lists = self.membership(pts)?;
        Ok(self.evaluate_with_lists(pts, &lists))
    }

    /// Evaluates using precomputed per-subdomain membership lists.
    pub fn evaluate_with_lists(&self, pts: &PointSet, lists: &[Vec<usize>]) -> Evaluation {
        let eps = 1.0 / self.radius;
        let parts: Vec<(Vec<f64>, Vec<f64>, f64)> = lists
            .par_iter()
            .enumerate()
            .map(|(j, ids)| {
                if ids.is_empty() {
                    return (Vec::new(), Vec::new(), 0.0);
                }
                let c = self.centers.point(j);
                let mut far = 0.0f64;
                let w: Vec<f64> = ids
                    .iter()
                    .map(|&e| {
                        let d = distance(pts.point(e), c);
                        far = far.max(d);
                        phi_wendland_c2(d, eps)
                    })
                    .collect();
                let local = pts.select(ids);
                let centres = self.nodes.select(&self.node_lists[j]);
                let phi = local_matrix(&local, &centres, &self.kernel);
                let r = phi * DVector::from_column_slice(&self.fits[j].coefficients);
                (w, r.as_slice().to_vec(), far)
            })
            .collect();

        let n = pts.len();
        let mut den = vec![0.0; n];
        let mut active = vec![0u32; n];
        let mut touches = 0;
        let mut max_touch_distance = 0.0f64;
        for (ids, (w, _, far)) in lists.iter().zip(&parts) {
            touches += ids.len();
            max_touch_distance = max_touch_distance.max(*far);
            for (&e, &wi) in ids.iter().zip(w) {
                den[e] += wi;
                if wi > 0.0 {
                    active[e] += 1;
                }
            }
        }
        let mut values = vec![0.0; n];
        let mut weight_sums = vec![0.0; n];
        for (ids, (w, r, _)) in lists.iter().zip(&parts) {
            for ((&e, &wi), &ri) in ids.iter().zip(w).zip(r) {
                if den[e] > 0.0 {
                    let wn = wi / den[e];
                    values[e] += wn * ri;
                    weight_sums[e] += wn;
                }
            }
        }
        for e in 0..n {
            if active[e] == 0 {
                values[e] = f64::NAN;
            }
        }
        Evaluation {
            values,
            weight_sums,
            active,
            touches,
            max_touch_distance,
        }
    }
}

/// Summary of one interpolation run. Field names are the serialized keys.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "N_raw", skip_serializing_if = "Option::is_none", default)]
    pub n_raw: Option<usize>,
    pub d: usize,
    pub s: usize,
    pub delta: f64,
    pub q: usize,
    pub mae: Option<f64>,
    pub rmse: Option<f64>,
    pub max_cond: f64,
    pub av_cond: f64,
    pub fill_distance: f64,
    pub rate: Option<f64>,
    pub pu_max_deviation: f64,
    pub t_structure_s: f64,
    pub t_search_s: f64,
    pub t_solve_s: f64,
    pub t_total_s: f64,
}

impl RunReport {
    pub fn to_json(&self, with_timings: bool) -> String {
        let mut r = self.clone();
        if !with_timings {
            r.t_structure_s = 0.0;
            r.t_search_s = 0.0;
            r.t_solve_s = 0.0;
            r.t_total_s = 0.0;
        }
        serde_json::to_string_pretty(&r).expect("report serializes")
    }
}

/// Fills in `rate` for each report from its predecessor along a ladder.
pub fn fill_rates(reports: &mut [RunReport]) {
    for k in 1..reports.len() {
        let (prev, cur) = (&reports[k - 1], &reports[k]);
        reports[k].rate = match (prev.rmse, cur.rmse) {
            (Some(a), Some(b)) => {
                validation::convergence_rate(a, b, prev.fill_distance, cur.fill_distance).ok()
            }
            _ => None,
        };
    }
}

/// Everything produced by [`pum_interpolate`].
#[derive(Clone, Debug)]
pub struct PumRun {
    pub domain: ConvexDomain,
    pub eval_points: PointSet,
    pub evaluation: Evaluation,
    pub model: PumModel,
    pub report: RunReport,
}

impl PumRun {
    pub fn values(&self) -> &[f64] {
        &self.evaluation.values
    }
}

pub type TruthFn<'a> = &'a (dyn Fn(&[f64]) -> f64 + Sync);

/// Interpolates `nodes` (with values) on the grid points inside their convex
/// hull. Errors are measured against `truth` when given.
pub fn pum_interpolate(nodes: &PointSet, cfg: &PumConfig, truth: Option<TruthFn<'_>>) -> Result<PumRun> {
    let start = Instant::now();
    cfg.validate()?;
    if nodes.values().is_none() {
        return Err(Error::InvalidPoints("data sites carry no values".into()));
    }
    nodes.check_distinct()?;
    let domain = convex_hull(nodes)?;
    let grid = cfg
        .eval_grid
        .clone()
        .unwrap_or_else(|| EvalGrid::default_for(nodes.dim()))
        .points(domain.rect())?;
    let eval_points = grid.select(&indices_in_domain(&grid, &domain));
    if eval_points.is_empty() {
        return Err(Error::EmptyReduction);
    }

    let covering = build_covering(nodes, &eval_points, &domain, cfg)?;
    let t_solve = Instant::now();
    let model = PumModel::fit(nodes, &covering, cfg.kernel, cfg.block_mode)?;
    let evaluation = model.evaluate_with_lists(&eval_points, &covering.eval_lists);
    if let Some(index) = evaluation.first_uncovered() {
        return Err(Error::NoActiveSubdomain { index });
    }
    let t_solve_s = t_solve.elapsed().as_secs_f64();

    let (mae, rmse) = match truth {
        Some(f) => {
            let exact: Vec<f64> = eval_points.iter().map(f).collect();
            (
                Some(validation::mae(&exact, &evaluation.values)?),
                Some(validation::rmse(&exact, &evaluation.values)?),
            )
        }
        None => (None, None),
    };

    let report = RunReport {
        n: nodes.len(),
        n_raw: None,
        d: covering.len(),
        s: eval_points.len(),
        delta: covering.radius,
        q: covering.q,
        mae,
        rmse,
        max_cond: model.max_cond(),
        av_cond: model.av_cond(),
        fill_distance: fill_distance(nodes, &eval_points)?,
        rate: None,
        pu_max_deviation: evaluation.max_pu_deviation(),
        t_structure_s: covering.times.structure,
        t_search_s: covering.times.search,
        t_solve_s,
        t_total_s: start.elapsed().as_secs_f64(),
    };
    Ok(PumRun {
        domain,
        eval_points,
        evaluation,
        model,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::halton;
    use crate::validation::TestFunction;

    fn with_fn(pts: PointSet, f: impl Fn(&[f64]) -> f64) -> PointSet {
        let v = pts.iter().map(f).collect();
        let mut p = pts;
        p.set_values(v).unwrap();
        p
    }

    #[test]
    fn d_r_formula() {
        assert_eq!(suggest_d_r(1024, 1.0, 1.0, 2), 256);
        assert_eq!(suggest_d_r(1, 1.0, 1.0, 2), 1);
        assert_eq!(suggest_d_r(4096, 1.0, 1.0, 3), 512);
    }

    #[test]
    fn radius_formula() {
        assert!((subdomain_radius(1.0, 256, 2) - 0.088_388_347_648_318_44).abs() < 1e-15);
        assert!((subdomain_radius(1.0, 1, 2) - std::f64::consts::SQRT_2).abs() < 1e-15);
        assert!((subdomain_radius(2.0, 512, 3) - 0.353_553_390_593_273_8).abs() < 1e-15);
    }

    #[test]
    fn grid_spec_parsing() {
        assert_eq!("40x40".parse::<EvalGrid>().unwrap(), EvalGrid::Axes(vec![40, 40]));
        assert_eq!("1600".parse::<EvalGrid>().unwrap(), EvalGrid::Total(1600));
        assert_eq!("20x20x20".parse::<EvalGrid>().unwrap().count(), 8000);
        assert!("40x".parse::<EvalGrid>().is_err());
        assert!("0x4".parse::<EvalGrid>().is_err());
    }

    #[test]
    fn config_validation() {
        let k = Kernel::wendland_c2(0.5).unwrap();
        let mut cfg = PumConfig::new(k);
        assert!(cfg.validate().is_ok());
        cfg.d_r = Some(0);
        assert!(cfg.validate().is_err());
        cfg.d_r = None;
        cfg.delta_override = Some(-1.0);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn weights() {
        let centers = PointSet::new(2, vec![0.0, 0.0, 0.0, 0.0, 0.3, 0.1, 0.1, 0.2]).unwrap();
        let w = shepard_weights(&[0.05, 0.05], &centers, 0.5, &[2]).unwrap();
        assert_eq!(w, vec![1.0]);
        let w = shepard_weights(&[0.1, 0.1], &centers, 0.5, &[0, 1]).unwrap();
        assert_eq!(w, vec![0.5, 0.5]);
        let w = shepard_weights(&[0.12, 0.09], &centers, 0.5, &[0, 2, 3]).unwrap();
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(w.iter().all(|&x| x >= 0.0));
        assert!(matches!(
            shepard_weights(&[0.1, 0.1], &centers, 0.5, &[]),
            Err(Error::NoActiveSubdomain { .. })
        ));
    }

    #[test]
    fn one_by_one_solve() {
        let k = Kernel::wu_c4(1.0).unwrap();
        let p = PointSet::with_values(3, vec![0.1, 0.2, 0.3], vec![3.0]).unwrap();
        let fit = local_solve(4, &p, &k).unwrap();
        assert_eq!(fit.coefficients, vec![0.5]);
        assert_eq!(fit.cond, 1.0);
        assert_eq!(fit.subdomain, 4);
    }

    #[test]
    fn constant_data_solves_exactly() {
        let k = Kernel::wendland_c2(0.5).unwrap();
        let p = with_fn(halton(30, 2, 100).unwrap(), |_| 1.0);
        let fit = local_solve(0, &p, &k).unwrap();
        let phi = local_matrix(&p, &p, &k);
        let r = phi * DVector::from_vec(fit.coefficients.clone());
        assert!(r.iter().all(|v| (v - 1.0).abs() <= 1e-10));
        assert!(fit.cond >= 1.0);
    }

    #[test]
    fn cond_matches_singular_values() {
        let k = Kernel::wendland_c2(2.0).unwrap();
        let p = halton(40, 3, 7).unwrap();
        let m = local_matrix(&p, &p, &k);
        let sv = m.clone().singular_values();
        let want = sv.max() / sv.min();
        let got = condition_number(&m);
        assert!((got - want).abs() <= 1e-6 * want);
    }

    #[test]
    fn covering_of_pentagon_data() {
        let dom = crate::shapes::Shape::Pentagon.domain();
        let raw = halton(2499, 2, 0).unwrap();
        let nodes = raw.select(&indices_in_domain(&raw, &dom));
        let grid = grid_on_rect_axes(dom.rect(), &[40, 40]);
        let eval = grid.select(&indices_in_domain(&grid, &dom));
        let cfg = PumConfig::new(Kernel::wendland_c2(0.5).unwrap());
        let cov = build_covering(&nodes, &eval, &dom, &cfg).unwrap();
        assert!(cov.len() <= cov.d_requested);
        assert_eq!(cov.node_lists.len(), cov.len());
        for (j, list) in cov.node_lists.iter().enumerate() {
            assert!(!list.is_empty());
            let c = cov.centers.point(j);
            let brute: Vec<usize> = (0..nodes.len())
                .filter(|&i| distance(nodes.point(i), c) < cov.radius)
                .collect();
            assert_eq!(list, &brute);
        }
    }

    #[test]
    fn single_node_single_subdomain() {
        let dom = convex_hull(&PointSet::new(2, vec![0., 0., 1., 0., 1., 1., 0., 1.]).unwrap()).unwrap();
        let node = PointSet::new(2, vec![0.4, 0.6]).unwrap();
        let eval = PointSet::new(2, vec![0.5, 0.5]).unwrap();
        let mut cfg = PumConfig::new(Kernel::wendland_c2(0.5).unwrap());
        cfg.d_r = Some(1);
        let cov = build_covering(&node, &eval, &dom, &cfg).unwrap();
        assert_eq!(cov.len(), 1);
        assert_eq!(cov.node_lists, vec![vec![0]]);
    }

    #[test]
    fn clustered_nodes_leave_gaps() {
        let dom = convex_hull(&PointSet::new(2, vec![0., 0., 1., 0., 1., 1., 0., 1.]).unwrap()).unwrap();
        let corner = halton(200, 2, 0).unwrap();
        let nodes = PointSet::new(2, corner.coords().iter().map(|c| c * 0.1).collect()).unwrap();
        let eval = grid_on_rect_axes(dom.rect(), &[10, 10]);
        let mut cfg = PumConfig::new(Kernel::wendland_c2(0.5).unwrap());
        cfg.d_r = Some(400);
        assert!(matches!(
            build_covering(&nodes, &eval, &dom, &cfg),
            Err(Error::InsufficientCoverage { .. })
        ));
    }

    #[test]
    fn constant_data() {
        let nodes = with_fn(halton(500, 2, 0).unwrap(), |_| 2.5);
        let cfg = PumConfig::new(Kernel::wendland_c2(0.5).unwrap());
        let run = pum_interpolate(&nodes, &cfg, Some(&|_: &[f64]| 2.5)).unwrap();
        assert!(run.report.pu_max_deviation <= 1e-12);
        assert!(run.report.rmse.unwrap() <= 1e-3 * 2.5);
        let at_nodes = run.model.evaluate(&nodes).unwrap();
        assert!(at_nodes.values.iter().all(|v| (v - 2.5).abs() <= 1e-8));
    }

    #[test]
    fn pipeline_interpolates_and_stays_local() {
        let raw = halton(1200, 3, 0).unwrap();
        let nodes = with_fn(raw, |p| TestFunction::F4.eval_unchecked(p));
        let cfg = PumConfig {
            eval_grid: Some(EvalGrid::Axes(vec![8, 8, 8])),
            ..PumConfig::new(Kernel::wendland_c2(0.5).unwrap())
        };
        let f = |p: &[f64]| TestFunction::F4.eval_unchecked(p);
        let run = pum_interpolate(&nodes, &cfg, Some(&f)).unwrap();
        assert!(run.report.rmse.unwrap() < 1e-2);
        assert!(run.report.av_cond <= run.report.max_cond);
        assert!(run.evaluation.max_touch_distance < run.model.radius());

        let at_nodes = run.model.evaluate(&nodes).unwrap();
        let resid = at_nodes
            .values
            .iter()
            .zip(nodes.values().unwrap())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(resid <= 1e-6, "{resid}");
        assert!(at_nodes.max_pu_deviation() <= 1e-12);
    }

    #[test]
    fn reports_are_deterministic() {
        let nodes = with_fn(halton(800, 2, 3).unwrap(), |p| TestFunction::F1.eval_unchecked(p));
        let cfg = PumConfig::new(Kernel::wendland_c2(0.5).unwrap());
        let f = |p: &[f64]| TestFunction::F1.eval_unchecked(p);
        let a = pum_interpolate(&nodes, &cfg, Some(&f)).unwrap();
        let b = pum_interpolate(&nodes, &cfg, Some(&f)).unwrap();
        assert_eq!(a.report.to_json(false), b.report.to_json(false));
        assert_eq!(a.values(), b.values());
    }

    #[test]
    fn outside_points_are_nan_in_partial_mode() {
        let nodes = with_fn(halton(300, 2, 0).unwrap(), |p| p[0]);
        let cfg = PumConfig::new(Kernel::wendland_c2(0.5).unwrap());
        let run = pum_interpolate(&nodes, &cfg, None).unwrap();
        let probe = PointSet::new(2, vec![0.5, 0.5, 5.0, 5.0]).unwrap();
        let ev = run.model.evaluate_partial(&probe).unwrap();
        assert!(ev.values[0].is_finite());
        assert!(ev.values[1].is_nan());
        assert!(matches!(run.model.evaluate(&probe), Err(Error::NoActiveSubdomain { index: 1 })));
    }

    #[test]
    fn rates_along_a_ladder() {
        let mk = |rmse, h| RunReport {
            n: 1,
            n_raw: None,
            d: 1,
            s: 1,
            delta: 1.0,
            q: 1,
            mae: Some(rmse),
            rmse: Some(rmse),
            max_cond: 1.0,
            av_cond: 1.0,
            fill_distance: h,
            rate: None,
            pu_max_deviation: 0.0,
            t_structure_s: 0.0,
            t_search_s: 0.0,
            t_solve_s: 0.0,
            t_total_s: 0.0,
        };
        let mut ladder = vec![mk(4.0, 2.0), mk(1.0, 1.0)];
        fill_rates(&mut ladder);
        assert_eq!(ladder[0].rate, None);
        assert!((ladder[1].rate.unwrap() - 2.0).abs() < 1e-15);
        let json = ladder[1].to_json(false);
        assert!(json.contains("\"N\": 1"));
        assert!(!json.contains("N_raw"));
    }
}
