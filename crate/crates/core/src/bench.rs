//! Timing of structure construction and range search across data sizes.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::blockpart::{BlockMode, BlockStructure, Neighbor};
use crate::error::{Error, Result};
use crate::geometry::{check_dim, distance, grid_on_rect, halton, Rect};
use crate::pum::{subdomain_radius, suggest_d_r};

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    pub dim: usize,
    pub repetitions: usize,
    pub block_mode: BlockMode,
    /// Number of queries checked against brute force per size.
    pub brute_sample: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            sizes: vec![10_000, 40_000, 160_000, 640_000],
            dim: 2,
            repetitions: 3,
            block_mode: BlockMode::Cover,
            brute_sample: 1000,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub d: usize,
    pub q: usize,
    pub delta: f64,
    pub t_ps_s: f64,
    pub t_rs_s: f64,
    pub t_rs_per_query_s: f64,
    pub mean_candidates: f64,
    pub max_candidates: usize,
    pub mean_found: f64,
    pub t_brute_per_query_s: f64,
    pub brute_checked: usize,
    pub brute_match: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchRatio {
    pub n_prev: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub t_ps: f64,
    pub t_rs_per_query: f64,
    pub mean_candidates: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchReport {
    pub dim: usize,
    pub repetitions: usize,
    pub rows: Vec<BenchRow>,
    pub ratios: Vec<BenchRatio>,
}

struct Case {
    n: usize,
    pts: crate::geometry::PointSet,
    q: usize,
    delta: f64,
    queries: crate::geometry::PointSet,
}

fn prepare(n: usize, cfg: &BenchConfig) -> Result<Case> {
    let dim = cfg.dim;
    let unit = Rect::unit(dim);
    let d = suggest_d_r(n, 1.0, 1.0, dim);
    let delta = subdomain_radius(1.0, d, dim);
    Ok(Case {
        n,
        pts: halton(n, dim, 0)?,
        q: cfg.block_mode.blocks_per_side(1.0, delta),
        delta,
        queries: grid_on_rect(&unit, d),
    })
}

fn search_row(case: &Case, t_ps: f64, cfg: &BenchConfig) -> Result<BenchRow> {
    let Case {
        n,
        pts,
        q,
        delta,
        queries,
    } = case;
    let (n, q, delta) = (*n, *q, *delta);
    let bs = BlockStructure::build(pts, Rect::unit(cfg.dim).bounding_cube(), q)?;

    let mut t_rs = f64::INFINITY;
    let mut candidates = Vec::with_capacity(queries.len());
    let mut found_total = 0usize;
    let mut buf: Vec<Neighbor> = Vec::new();
    for _ in 0..cfg.repetitions.max(1) {
        candidates.clear();
        found_total = 0;
        let t = Instant::now();
        for c in queries.iter() {
            candidates.push(bs.range_search_into(c, delta, &mut buf));
            found_total += buf.len();
        }
        t_rs = t_rs.min(t.elapsed().as_secs_f64());
    }

    let stride = (queries.len() / cfg.brute_sample.max(1)).max(1);
    let sample: Vec<usize> = (0..queries.len()).step_by(stride).take(cfg.brute_sample).collect();
    let t = Instant::now();
    let brute: Vec<Vec<usize>> = sample
        .par_iter()
        .map(|&j| {
            let c = queries.point(j);
            (0..pts.len()).filter(|&i| distance(pts.point(i), c) <= delta).collect()
        })
        .collect();
    let t_brute = t.elapsed().as_secs_f64();
    let brute_match = sample.iter().zip(&brute).all(|(&j, want)| {
        let mut got: Vec<usize> = bs.range_search(queries.point(j), delta).iter().map(|n| n.index).collect();
        got.sort_unstable();
        &got == want
    });

    let nq = queries.len() as f64;
    Ok(BenchRow {
        n,
        d: queries.len(),
        q,
        delta,
        t_ps_s: t_ps,
        t_rs_s: t_rs,
        t_rs_per_query_s: t_rs / nq,
        mean_candidates: candidates.iter().sum::<usize>() as f64 / nq,
        max_candidates: candidates.iter().copied().max().unwrap_or(0),
        mean_found: found_total as f64 / nq,
        t_brute_per_query_s: if sample.is_empty() { 0.0 } else { t_brute / sample.len() as f64 },
        brute_checked: sample.len(),
        brute_match,
    })
}

pub fn run_benchmark(cfg: &BenchConfig) -> Result<BenchReport> {
    check_dim(cfg.dim)?;
    if cfg.sizes.is_empty() || cfg.sizes.contains(&0) {
        return Err(Error::InvalidParameter("sizes must be positive".into()));
    }
    let cases = cfg
        .sizes
        .iter()
        .map(|&n| prepare(n, cfg))
        .collect::<Result<Vec<_>>>()?;
    // Build repetitions are interleaved across sizes so that slow phases of
    // the machine affect every size alike; the minimum is kept.
    let bbox = Rect::unit(cfg.dim).bounding_cube();
    let mut t_ps = vec![f64::INFINITY; cases.len()];
    for _ in 0..cfg.repetitions.max(1) {
        for (k, case) in cases.iter().enumerate() {
            let t = Instant::now();
            let bs = BlockStructure::build(&case.pts, bbox, case.q)?;
            t_ps[k] = t_ps[k].min(t.elapsed().as_secs_f64());
            drop(bs);
        }
    }
    let rows = cases
        .iter()
        .zip(&t_ps)
        .map(|(case, &t)| search_row(case, t, cfg))
        .collect::<Result<Vec<_>>>()?;
    let ratios = rows
        .windows(2)
        .map(|w| BenchRatio {
            n_prev: w[0].n,
            n: w[1].n,
            t_ps: w[1].t_ps_s / w[0].t_ps_s,
            t_rs_per_query: w[1].t_rs_per_query_s / w[0].t_rs_per_query_s,
            mean_candidates: w[1].mean_candidates / w[0].mean_candidates,
        })
        .collect();
    Ok(BenchReport {
        dim: cfg.dim,
        repetitions: cfg.repetitions,
        rows,
        ratios,
    })
}

impl BenchReport {
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:>9} {:>8} {:>5} {:>11} {:>11} {:>11} {:>9} {:>6} {:>11} {:>5}",
            "N", "d", "q", "t_ps", "t_rs", "t_rs/query", "mean_cand", "max", "brute/query", "match"
        );
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:>9} {:>8} {:>5} {:>11.3e} {:>11.3e} {:>11.3e} {:>9.1} {:>6} {:>11.3e} {:>5}",
                r.n,
                r.d,
                r.q,
                r.t_ps_s,
                r.t_rs_s,
                r.t_rs_per_query_s,
                r.mean_candidates,
                r.max_candidates,
                r.t_brute_per_query_s,
                r.brute_match
            );
        }
        if !self.ratios.is_empty() {
            let _ = writeln!(s, "\n{:>19} {:>8} {:>11} {:>10}", "ratio", "t_ps", "t_rs/query", "mean_cand");
            for r in &self.ratios {
                let _ = writeln!(
                    s,
                    "{:>9}/{:<9} {:>8.2} {:>11.2} {:>10.2}",
                    r.n, r.n_prev, r.t_ps, r.t_rs_per_query, r.mean_candidates
                );
            }
        }
        s
    }
}
