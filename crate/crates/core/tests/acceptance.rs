//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pumblock_core::bench::{run_benchmark, BenchConfig};
use pumblock_core::blockpart::{BlockMode, BlockStructure};
use pumblock_core::geometry::{distance, halton, PointSet, Rect};
use pumblock_core::kernels::Kernel;
use pumblock_core::pum::{fill_rates, pum_interpolate, subdomain_radius, suggest_d_r, PumConfig, RunReport};
use pumblock_core::reconstruct::{reconstruct, unit_sphere_cloud, ReconstructConfig};
use pumblock_core::separatrix::{
    bisect_separatrix, classify, fit_separatrix, sample_separatrix, Basin, CompetitionParams, Integrator,
};
use pumblock_core::shapes::Shape;
use pumblock_core::validation::TestFunction;
use pumblock_core::pum::EvalGrid;

type Outcome = std::result::Result<String, String>;

struct Gate {
    failures: usize,
    pu_deviations: Vec<(String, f64)>,
}

impl Gate {
    fn check(&mut self, id: &str, title: &str, budget_s: f64, f: impl FnOnce(&mut Self) -> Outcome) {
        let t = Instant::now();
        let out = f(self);
        let secs = t.elapsed().as_secs_f64();
        let out = match out {
            Ok(msg) if secs > budget_s => Err(format!("{msg}; took {secs:.1}s, budget {budget_s:.0}s")),
            other => other,
        };
        match out {
            Ok(msg) => println!("PASS {id:>2}. {title}: {msg} [{secs:.1}s]"),
            Err(msg) => {
                self.failures += 1;
                println!("FAIL {id:>2}. {title}: {msg} [{secs:.1}s]");
            }
        }
    }

    fn note_pu(&mut self, label: String, dev: f64) {
        self.pu_deviations.push((label, dev));
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn valued(shape: Shape, n_raw: usize, f: TestFunction) -> PointSet {
    let mut pts = shape.halton_points(n_raw).expect("shape sample");
    let v = pts.iter().map(|p| f.eval_unchecked(p)).collect();
    pts.set_values(v).expect("values");
    pts
}

fn ladder(gate: &mut Gate, shape: Shape, f: TestFunction, sizes: &[usize]) -> std::result::Result<Vec<RunReport>, String> {
    let mut out = Vec::new();
    for &n in sizes {
        let nodes = valued(shape, n, f);
        let cfg = PumConfig {
            block_mode: BlockMode::Paper,
            ..PumConfig::new(Kernel::wendland_c2(0.5).unwrap())
        };
        let truth = move |p: &[f64]| f.eval_unchecked(p);
        let run = pum_interpolate(&nodes, &cfg, Some(&truth)).map_err(|e| format!("{} N_raw={n}: {e}", shape.name()))?;
        gate.note_pu(format!("{} N_raw={n}", shape.name()), run.report.pu_max_deviation);
        let mut r = run.report;
        r.n_raw = Some(n);
        out.push(r);
    }
    fill_rates(&mut out);
    Ok(out)
}

fn within_factor(got: f64, want: f64, factor: f64) -> bool {
    got <= want * factor && got >= want / factor
}

fn ladder_summary(reps: &[RunReport]) -> String {
    reps.iter()
        .map(|r| {
            let rate = r.rate.map(|x| format!(" rate={x:.2}")).unwrap_or_default();
            format!("N={} rmse={:.2e}{rate}", r.n, r.rmse.unwrap_or(f64::NAN))
        })
        .collect::<Vec<_>>()
        .join(", ")
}

fn check_ladder(reps: &[RunReport], reference: &[f64], rate_band: Option<(f64, f64)>) -> std::result::Result<(), String> {
    for (k, (r, want)) in reps.iter().zip(reference).enumerate() {
        let got = r.rmse.unwrap();
        ensure(within_factor(got, *want, 10.0), || {
            format!("level {} rmse {got:.2e} outside factor 10 of {want:.2e}", k + 1)
        })?;
    }
    for w in reps.windows(2) {
        ensure(w[1].rmse.unwrap() < w[0].rmse.unwrap(), || {
            format!("rmse not decreasing at N={}", w[1].n)
        })?;
    }
    if let Some((lo, hi)) = rate_band {
        for r in &reps[1..] {
            let rate = r.rate.ok_or_else(|| format!("no rate at N={}", r.n))?;
            ensure((lo..=hi).contains(&rate), || format!("rate {rate:.2} at N={} outside [{lo}, {hi}]", r.n))?;
        }
    }
    Ok(())
}

fn range_search_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20_160_301);
    let mut queries_total = 0usize;
    let mut worst_dist = 0.0f64;
    for trial in 0..200 {
        let dim = if rng.random_bool(0.5) { 2 } else { 3 };
        let n = rng.random_range(100..=20_000);
        let pts = if rng.random_bool(0.5) {
            halton(n, dim, rng.random_range(0..100_000)).unwrap()
        } else {
            PointSet::new(dim, (0..n * dim).map(|_| rng.random::<f64>()).collect()).unwrap()
        };
        let delta = subdomain_radius(1.0, suggest_d_r(n, 1.0, 1.0, dim), dim);
        let bs = BlockStructure::for_radius(&pts, Rect::unit(dim).bounding_cube(), delta, BlockMode::Cover)
            .map_err(|e| format!("trial {trial}: {e}"))?;
        for _ in 0..25 {
            let c: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
            let got = bs.range_search(&c, delta);
            let mut got_ids: Vec<usize> = got.iter().map(|h| h.index).collect();
            got_ids.sort_unstable();
            let want: Vec<usize> = (0..n).filter(|&i| distance(pts.point(i), &c) <= delta).collect();
            ensure(got_ids == want, || {
                format!("trial {trial} (M={dim}, N={n}): {} found, {} expected", got_ids.len(), want.len())
            })?;
            for h in &got {
                let d = distance(pts.point(h.index), &c);
                worst_dist = worst_dist.max((d - h.distance).abs());
            }
            queries_total += 1;
        }
    }
    ensure(worst_dist <= 1e-14, || format!("distance error {worst_dist:e}"))?;
    Ok(format!("200 trials, {queries_total} queries identical to brute force"))
}

fn main() {
    let mut gate = Gate {
        failures: 0,
        pu_deviations: Vec::new(),
    };
    let mut all_ladders: Vec<(&str, Vec<RunReport>)> = Vec::new();

    gate.check("1", "range search equals brute force", 60.0, |_| range_search_oracle());

    gate.check("3", "interpolation property, pentagon f1 N_raw=2499", 30.0, |g| {
        let nodes = valued(Shape::Pentagon, 2499, TestFunction::F1);
        let cfg = PumConfig::new(Kernel::wendland_c2(0.5).unwrap());
        let run = pum_interpolate(&nodes, &cfg, None).map_err(|e| e.to_string())?;
        g.note_pu("pentagon N_raw=2499".into(), run.report.pu_max_deviation);
        let at = run.model.evaluate(&nodes).map_err(|e| e.to_string())?;
        g.note_pu("pentagon N_raw=2499 at nodes".into(), at.max_pu_deviation());
        let resid = at
            .values
            .iter()
            .zip(nodes.values().unwrap())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        ensure(resid <= 1e-6, || format!("max node residual {resid:.2e}"))?;
        Ok(format!("N={} max node residual {resid:.2e}", nodes.len()))
    });

    gate.check("4", "2D convergence ladders (--block-mode paper)", 180.0, |g| {
        let sizes = [622, 2499, 9999, 39991];
        let pent = ladder(g, Shape::Pentagon, TestFunction::F1, &sizes)?;
        let tri = ladder(g, Shape::Triangle, TestFunction::F2, &sizes)?;
        let msg = format!("pentagon [{}]; triangle [{}]", ladder_summary(&pent), ladder_summary(&tri));
        let band = Some((1.3, 3.2));
        let res = check_ladder(&pent, &[1.40e-4, 3.30e-5, 6.33e-6, 1.25e-6], band)
            .map_err(|e| format!("pentagon: {e}"))
            .and_then(|_| {
                check_ladder(&tri, &[2.60e-5, 5.41e-6, 1.56e-6, 4.59e-7], band).map_err(|e| format!("triangle: {e}"))
            });
        all_ladders.push(("pentagon", pent));
        all_ladders.push(("triangle", tri));
        res.map(|_| msg.clone()).map_err(|e| format!("{e}; {msg}"))
    });

    gate.check("5", "3D ladder, cylinder f3", 300.0, |g| {
        let cyl = ladder(g, Shape::Cylinder, TestFunction::F3, &[3134, 12551, 50184])?;
        let msg = format!(
            "[{}]; av_cond {}",
            ladder_summary(&cyl),
            cyl.iter().map(|r| format!("{:.2e}", r.av_cond)).collect::<Vec<_>>().join(" < ")
        );
        let res = check_ladder(&cyl, &[2.71e-4, 6.00e-5, 2.27e-5], None).and_then(|_| {
            ensure(cyl.windows(2).all(|w| w[1].av_cond > w[0].av_cond), || "av_cond not increasing".into())
        });
        all_ladders.push(("cylinder", cyl));
        res.map(|_| msg.clone()).map_err(|e| format!("{e}; {msg}"))
    });

    gate.check("6", "conditioning grows with N", 1.0, |_| {
        ensure(!all_ladders.is_empty(), || "no ladders ran".into())?;
        for (name, reps) in &all_ladders {
            for r in reps {
                ensure(r.av_cond <= r.max_cond, || format!("{name} N={}: av_cond > max_cond", r.n))?;
            }
            for w in reps.windows(2) {
                ensure(w[1].max_cond >= w[0].max_cond && w[1].av_cond >= w[0].av_cond, || {
                    format!("{name}: conditioning dropped at N={}", w[1].n)
                })?;
            }
        }
        Ok(format!("{} ladders monotone, av_cond <= max_cond throughout", all_ladders.len()))
    });

    let mut bench = None;
    gate.check("7", "constant-time range search", 240.0, |_| {
        let cfg = BenchConfig {
            repetitions: 15,
            ..BenchConfig::default()
        };
        let rep = run_benchmark(&cfg).map_err(|e| e.to_string())?;
        let cands: Vec<f64> = rep.rows.iter().map(|r| r.mean_candidates).collect();
        let (lo, hi) = cands.iter().fold((f64::MAX, 0.0f64), |(a, b), &c| (a.min(c), b.max(c)));
        let first = &rep.rows[0];
        let last = rep.rows.last().unwrap();
        let per_query = last.t_rs_per_query_s / first.t_rs_per_query_s;
        let msg = format!(
            "mean candidates {}; per-query time ratio {per_query:.2}",
            cands.iter().map(|c| format!("{c:.1}")).collect::<Vec<_>>().join(", ")
        );
        let res = ensure(rep.rows.iter().all(|r| r.brute_match), || "block search differs from brute force".into())
            .and_then(|_| ensure(hi / lo < 2.0, || format!("candidate spread {:.2}", hi / lo)))
            .and_then(|_| ensure(per_query <= 3.0, || "per-query time grows".into()));
        bench = Some(rep);
        res.map(|_| msg.clone()).map_err(|e| format!("{e}; {msg}"))
    });

    gate.check("8", "structure build scaling", 1.0, |_| {
        let rep = bench.as_ref().ok_or("benchmark did not run")?;
        let ratios: Vec<f64> = rep.ratios.iter().map(|r| r.t_ps).collect();
        let msg = format!(
            "t(4N)/t(N) = {}",
            ratios.iter().map(|r| format!("{r:.2}")).collect::<Vec<_>>().join(", ")
        );
        ensure(ratios.iter().all(|&r| r <= 5.5), || msg.clone())?;
        Ok(msg)
    });

    gate.check("9", "unit sphere reconstruction", 60.0, |g| {
        let cloud = unit_sphere_cloud(2000);
        let step = 0.05;
        let cfg = ReconstructConfig {
            step: Some(step),
            grid: [16, 16, 16],
            ..Default::default()
        };
        let rec = reconstruct(&cloud, &cfg).map_err(|e| e.to_string())?;
        g.note_pu("sphere grid".into(), rec.report.pu_max_deviation);
        let on = rec.model.evaluate(cloud.points()).map_err(|e| e.to_string())?;
        g.note_pu("sphere cloud".into(), on.max_pu_deviation());
        let worst_on = on.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        ensure(worst_on <= 1e-4, || format!("|I| = {worst_on:.2e} on the cloud"))?;
        let dirs = unit_sphere_cloud(50);
        let probes = |r: f64| {
            let c = dirs.points().coords().iter().map(|x| x * r).collect();
            rec.model.evaluate(&PointSet::new(3, c).unwrap()).map_err(|e| e.to_string())
        };
        let inner = probes(1.0 - step)?;
        let outer = probes(1.0 + step)?;
        g.note_pu("sphere probes".into(), inner.max_pu_deviation().max(outer.max_pu_deviation()));
        let max_in = inner.values.iter().copied().fold(f64::MIN, f64::max);
        let min_out = outer.values.iter().copied().fold(f64::MAX, f64::min);
        ensure(max_in < -0.2, || format!("interior probe value {max_in:.3}"))?;
        ensure(min_out > 0.2, || format!("exterior probe value {min_out:.3}"))?;
        Ok(format!(
            "max |I| on cloud {worst_on:.1e}; interior max {max_in:.3}, exterior min {min_out:.3}"
        ))
    });

    gate.check("10", "separatrix demo", 120.0, |g| {
        let k = CompetitionParams::default();
        let it = Integrator::default();
        let (a, b) = ([0.0, 0.1, 0.0], [0.0, 0.0, 0.1]);
        ensure(classify(a, &k, &it) == Basin::E2, || "(0, 0.1, 0) not in the basin of E2".into())?;
        ensure(classify(b, &k, &it) == Basin::E3, || "(0, 0, 0.1) not in the basin of E3".into())?;
        let bis = bisect_separatrix(a, b, &k, &it, 1e-3).map_err(|e| e.to_string())?;
        ensure(bis.width() <= 1e-3, || format!("bisection interval {:.1e}", bis.width()))?;
        let samples = sample_separatrix(&k, &it, 10, 1e-3).map_err(|e| e.to_string())?;
        let surf = fit_separatrix(&samples, 0.1, EvalGrid::Axes(vec![40, 40])).map_err(|e| e.to_string())?;
        g.note_pu("separatrix".into(), surf.run.report.pu_max_deviation);
        let axis = surf.height_axis;
        let (lo, hi) = samples
            .iter()
            .fold((f64::MAX, f64::MIN), |(l, h), s| (l.min(s.point[axis]), h.max(s.point[axis])));
        let vals = surf.run.values();
        let (vlo, vhi) = vals.iter().fold((f64::MAX, f64::MIN), |(l, h), &v| (l.min(v), h.max(v)));
        ensure(vlo >= lo && vhi <= hi, || {
            format!("surface range [{vlo:.4}, {vhi:.4}] leaves sample range [{lo:.4}, {hi:.4}]")
        })?;
        Ok(format!(
            "{} samples, bisection width {:.1e}, surface range [{vlo:.3}, {vhi:.3}] inside [{lo:.3}, {hi:.3}]",
            samples.len(),
            bis.width()
        ))
    });

    let pu = std::mem::take(&mut gate.pu_deviations);
    gate.check("2", "partition of unity on every pipeline run", 1.0, |_| {
        ensure(!pu.is_empty(), || "no pipeline runs recorded".into())?;
        let (label, worst) = pu
            .iter()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(l, d)| (l.clone(), *d))
            .unwrap();
        ensure(worst <= 1e-12, || format!("{label}: |sum W - 1| = {worst:.2e}"))?;
        Ok(format!("{} runs, worst |sum W - 1| = {worst:.1e}", pu.len()))
    });

    if gate.failures > 0 {
        println!("{} acceptance criteria failed", gate.failures);
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
