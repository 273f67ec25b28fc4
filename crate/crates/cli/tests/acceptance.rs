//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use matchdecay::{
    run_experiment, run_experiment_with_threads, Checkpoint, ExperimentConfig, ExperimentKind,
    RunRecord,
};
use matchdecay_core::bonus::{check_bonus_recursion, membership_indicator, sandwich, Parity};
use matchdecay_core::generate::{generate, Family, TreeShape};
use matchdecay_core::message::{
    check_key_inequality, contraction_bound, exp_identity, phi, phi_gradient, psi_gradient_l1,
    root_sensitivity, RootedTree,
};
use matchdecay_core::mwm::{mwm_enumerate, mwm_tree, solve};
use matchdecay_core::weights::{replica_rng, sample_weights};
use matchdecay_core::{bonus::bonus, ExtReal, Graph, WeightAssignment, WeightDistribution};
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_tree(seed: u64, n: usize) -> Graph {
    let family = Family::RandomTree {
        n,
        degree_weights: vec![0.0, 1.0, 1.0, 1.0, 1.0],
    };
    generate(&family, seed).unwrap()
}

fn random_connected(seed: u64, max_n: usize) -> Graph {
    let mut rng = replica_rng(seed, u64::MAX);
    loop {
        let n = rng.random_range(3..=max_n);
        let lambda = rng.random_range(1.5..4.0);
        let g = generate(&Family::ErdosRenyi { n, lambda }, rng.random()).unwrap();
        if g.vertex_count() >= 3 {
            return g;
        }
    }
}

fn exp_weights(g: &Graph, seed: u64) -> WeightAssignment {
    sample_weights(g, WeightDistribution::Exp1, &mut replica_rng(seed, 1))
}

fn tree_solver_matches_enumeration() -> Outcome {
    let start = Instant::now();
    for seed in 0..500u64 {
        let g = random_tree(seed, 2 + (seed % 13) as usize);
        let w = exp_weights(&g, seed);
        let t = mwm_tree(&g.view(), &w).map_err(|e| format!("seed {seed}: {e}"))?;
        let b = mwm_enumerate(&g.view(), &w).map_err(|e| format!("seed {seed}: {e}"))?;
        ensure(t.matching == b.matching, || {
            format!("seed {seed}: edge sets differ")
        })?;
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 60.0, || format!("took {secs:.1}s"))?;
    Ok(format!("500 trees with n <= 14 in {secs:.2}s"))
}

fn membership_matches_solver() -> Outcome {
    let mut edges = 0;
    for seed in 0..500u64 {
        let g = random_connected(seed, 10);
        let w = exp_weights(&g, seed);
        let opt = solve(&g.view(), &w).map_err(|e| e.to_string())?;
        for e in 0..g.edge_count() {
            let ind = membership_indicator(&g.view(), &w, e).map_err(|e| e.to_string())?;
            ensure(ind == opt.matching.contains(e), || {
                format!("seed {seed} edge {e}")
            })?;
            edges += 1;
        }
    }
    Ok(format!("500 graphs, {edges} edges"))
}

fn bonus_recursion_residual() -> Outcome {
    let mut worst: f64 = 0.0;
    for seed in 0..200u64 {
        let g = random_connected(seed, 10);
        let w = exp_weights(&g, seed);
        for v in 0..g.vertex_count() {
            let res = check_bonus_recursion(&g.view(), &w, v).map_err(|e| e.to_string())?;
            ensure(res <= 1e-9, || {
                format!("seed {seed} vertex {v}: residual {res:e}")
            })?;
            worst = worst.max(res);
        }
    }
    Ok(format!("200 graphs, largest residual {worst:.2e}"))
}

fn sandwich_chain() -> Outcome {
    let (mut instances, mut subsets, mut nonempty, mut seed) = (0, 0usize, 0usize, 0u64);
    let mut parities = [0; 2];
    while instances < 200 {
        seed += 1;
        let g = random_connected(seed, 30);
        let w = exp_weights(&g, seed);
        let h = g.view();
        let u = (seed as usize) % g.vertex_count();
        let r = 1 + (seed as usize / 7) % 4;
        let boundary = h.boundary(&h.ball_around_vertex(u, r).unwrap());
        if boundary.len() > 10 {
            continue;
        }
        instances += 1;
        nonempty += usize::from(!boundary.is_empty());
        parities[r % 2] += 1;
        let base = sandwich(&h, &w, u, r).map_err(|e| e.to_string())?;
        for mask in 0usize..1 << boundary.len() {
            let a = (0..boundary.len())
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| boundary[i]);
            let ha = h.delete_vertices(a);
            let s = sandwich(&ha, &w, u, r).map_err(|e| e.to_string())?;
            let b = bonus(&ha, &w, u).map_err(|e| e.to_string())?;
            let (z0, za, ia, i0) = (
                ExtReal::Finite(base.zero_kind),
                ExtReal::Finite(s.zero_kind),
                s.infinity_kind,
                base.infinity_kind,
            );
            let ok = match Parity::of(r) {
                Parity::Even => z0 <= za && za <= b + 1e-9 && ia >= b - 1e-9 && ia <= i0,
                Parity::Odd => za <= z0 && za >= b - 1e-9 && ia <= b + 1e-9 && i0 <= ia,
            };
            ensure(ok, || format!("seed {seed} u {u} r {r} subset {mask:b}"))?;
            subsets += 1;
        }
    }
    ensure(parities[0] > 0 && parities[1] > 0, || {
        "one parity never exercised".into()
    })?;
    Ok(format!(
        "200 instances ({} even, {} odd), {subsets} subsets, {nonempty} with a nonempty boundary",
        parities[0], parities[1]
    ))
}

fn phi_by_subsets(p: &[f64]) -> f64 {
    let d = p.len();
    (0u32..1 << d)
        .map(|mask| {
            let prob: f64 = (0..d)
                .map(|i| if mask >> i & 1 == 1 { p[i] } else { 1.0 - p[i] })
                .product();
            prob / (1.0 + mask.count_ones() as f64)
        })
        .sum()
}

fn phi_closed_forms() -> Outcome {
    let mut rng = replica_rng(105, 0);
    for _ in 0..1000 {
        let (p1, p2): (f64, f64) = (rng.random(), rng.random());
        let one = phi(&[p1]).unwrap();
        let two = phi(&[p1, p2]).unwrap();
        ensure((one - (1.0 - p1 / 2.0)).abs() <= 1e-12, || {
            format!("phi({p1}) = {one}")
        })?;
        let expect = 1.0 - (p1 + p2) / 2.0 + p1 * p2 / 3.0;
        ensure((two - expect).abs() <= 1e-12, || {
            format!("phi({p1}, {p2}) = {two}")
        })?;
    }
    for d in 0..=10 {
        for _ in 0..20 {
            let p: Vec<f64> = (0..d).map(|_| rng.random()).collect();
            let (a, b) = (phi(&p).unwrap(), phi_by_subsets(&p));
            ensure((a - b).abs() <= 1e-12, || format!("d={d}: {a} vs {b}"))?;
        }
    }
    let h = 1e-5;
    for _ in 0..100 {
        let d = rng.random_range(1..=6);
        let p: Vec<f64> = (0..d).map(|_| rng.random_range(0.01..0.99)).collect();
        let grad = phi_gradient(&p).unwrap();
        for i in 0..d {
            let (mut up, mut down) = (p.clone(), p.clone());
            up[i] += h;
            down[i] -= h;
            let fd = (phi(&up).unwrap() - phi(&down).unwrap()) / (2.0 * h);
            ensure((fd - grad[i]).abs() <= 1e-6, || {
                format!("{fd} vs {}", grad[i])
            })?;
        }
    }
    Ok("closed forms, convolution for d <= 10, gradient at 100 points".into())
}

fn contraction_on_random_trees() -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    for seed in 0..200u64 {
        let depth = 4 + (seed % 9) as usize;
        let max_children = 1 + (seed % 3) as usize;
        let mut weights = vec![1.0; max_children + 1];
        weights[1] = 1.5;
        let family = Family::Tree {
            depth,
            shape: TreeShape::Iid(weights),
            planted: true,
        };
        let t = RootedTree::new(generate(&family, seed).unwrap(), 0).map_err(|e| e.to_string())?;
        let d = t.max_degree();
        ensure(d <= 4 && t.height() == depth, || {
            format!("seed {seed}: D={d}")
        })?;
        let s = root_sensitivity(&t).map_err(|e| e.to_string())?;
        let bound = contraction_bound(d, depth);
        ensure(s.value <= bound + 1e-12, || {
            format!("seed {seed}: {} > {bound}", s.value)
        })?;
        worst = worst.max(s.value - bound);
    }
    Ok(format!(
        "200 trees with D <= 4, r in 4..=12, largest margin {worst:.3}"
    ))
}

fn psi_gradient_bound() -> Outcome {
    let mut rng = replica_rng(107, 0);
    for _ in 0..1000 {
        let d = rng.random_range(1..=6);
        let q: Vec<ExtReal> = (0..d)
            .map(|_| {
                if rng.random_bool(0.1) {
                    ExtReal::Infinity
                } else {
                    ExtReal::Finite(rng.random_range(0.0..4.0))
                }
            })
            .collect();
        let bound = 1.0 - q.iter().map(|x| 1.0 - x.exp_neg()).product::<f64>();
        let g = psi_gradient_l1(&q);
        ensure(g <= bound + 1e-9, || format!("{q:?}: {g} > {bound}"))?;
    }
    Ok("1000 inputs with d <= 6".into())
}

fn key_inequality_and_identity() -> Outcome {
    let mut rng = replica_rng(108, 0);
    for _ in 0..1000 {
        let k = rng.random_range(1..=6);
        let extra = rng.random_range(0..=4);
        let p: Vec<f64> = (0..k).map(|_| rng.random()).collect();
        let wm: Vec<f64> = (0..extra).map(|_| rng.random()).collect();
        let (lhs, rhs) = check_key_inequality(&p, &wm).map_err(|e| e.to_string())?;
        // equality holds for a single term with no extra sum, so allow rounding
        ensure(lhs <= rhs + 1e-12, || format!("{lhs} > {rhs}"))?;
    }
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let k = rng.random_range(1..=5);
        let c: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..2.5)).collect();
        let n = 100_000;
        let (mut sum, mut sq) = (0.0, 0.0);
        for _ in 0..n {
            let m = c
                .iter()
                .map(|ci| {
                    let x = -(1.0 - rng.random::<f64>()).ln();
                    (x - ci).max(0.0)
                })
                .fold(0.0, f64::max);
            let y = (-m).exp();
            sum += y;
            sq += y * y;
        }
        let mean = sum / n as f64;
        let se = ((sq / n as f64 - mean * mean) / n as f64).sqrt();
        let exact = exp_identity(&c.iter().map(|&x| ExtReal::Finite(x)).collect::<Vec<_>>());
        ensure((mean - exact).abs() <= 4.0 * se, || {
            format!("{mean} vs {exact} (se {se})")
        })?;
        worst = worst.max((mean - exact).abs() / se);
    }
    Ok(format!("1000 configs; 20 vectors within {worst:.2} SE"))
}

fn run(cfg: &ExperimentConfig) -> Result<RunRecord, String> {
    let mut cp = Checkpoint::in_memory(&cfg.hash(), cfg.chunk);
    run_experiment(cfg, &mut cp).map_err(|e| e.to_string())
}

fn all_checks(rec: &RunRecord) -> Result<(), String> {
    match rec.failed_checks().next() {
        None => Ok(()),
        Some(c) => Err(format!("{}: {}", c.name, c.detail)),
    }
}

fn tree_bound_on_paths() -> Outcome {
    let cfg = ExperimentConfig::defaults(ExperimentKind::ThmTree);
    ensure(
        cfg.family == "path" && (cfg.r_min, cfg.r_max, cfg.replicas) == (24, 34, 10_000),
        || "unexpected defaults".into(),
    )?;
    let rec = run(&cfg)?;
    all_checks(&rec)?;
    let exact_rows = rec.rows.iter().filter(|r| r.param == "exact_sup").count();
    ensure(exact_rows == 11, || format!("{exact_rows} exact rows"))?;
    ensure(rec.wall_time_secs < 600.0, || {
        format!("took {:.0}s", rec.wall_time_secs)
    })?;
    let worst = rec
        .rows
        .iter()
        .filter(|r| r.param == "D=2")
        .map(|r| r.estimate - r.bound.unwrap())
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(format!(
        "r = 24..=34, 10^4 replicas, {} checks, largest estimate - bound {worst:.3}, {:.1}s",
        rec.checks.len(),
        rec.wall_time_secs
    ))
}

fn degree_three_bounds() -> Outcome {
    let m = run(&ExperimentConfig::defaults(ExperimentKind::MR))?;
    all_checks(&m)?;
    let binding = m
        .rows
        .iter()
        .filter(|r| r.binding == matchdecay::Binding::Binding)
        .count();
    let rho = run(&ExperimentConfig::defaults(ExperimentKind::ThmDeg3))?;
    all_checks(&rho)?;
    let log_rows: Vec<_> = rho.rows.iter().filter(|r| r.param == "log_bound").collect();
    let log_binding = log_rows
        .iter()
        .filter(|r| r.binding == matchdecay::Binding::Binding)
        .count();
    Ok(format!(
        "proxy {} checks ({binding} binding rows), bracket {} checks; log bound recorded on {} rows, binding on {log_binding}",
        m.checks.len(),
        rho.checks.len(),
        log_rows.len()
    ))
}

fn exhaustion_on_paths() -> Outcome {
    let cfg = ExperimentConfig::defaults(ExperimentKind::Exhaustion);
    let rec = run(&cfg)?;
    all_checks(&rec)?;
    let at = |n: usize| {
        rec.rows
            .iter()
            .find(|r| r.param == "stabilized_fraction" && r.r == Some(n))
            .unwrap()
    };
    Ok(format!(
        "{} replicas, stabilized fraction {:.3} at n = 12 (reference n = {})",
        cfg.replicas,
        at(12).estimate,
        cfg.n_values[1]
    ))
}

fn lln_cauchy() -> Outcome {
    let rec = run(&ExperimentConfig::defaults(ExperimentKind::Lln))?;
    all_checks(&rec)?;
    let means: Vec<String> = rec
        .rows
        .iter()
        .filter(|r| r.param.starts_with("weight"))
        .map(|r| format!("{:.4}", r.estimate))
        .collect();
    Ok(format!(
        "weight per vertex {} at n = 10^2, 10^3, 10^4",
        means.join(", ")
    ))
}

fn small(kind: ExperimentKind) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::defaults(kind);
    cfg.replicas = 200;
    cfg.chunk = 64;
    match kind {
        ExperimentKind::ThmTree => cfg.r_max = 26,
        ExperimentKind::Lln => cfg.n_values = vec![100, 1000],
        ExperimentKind::Clt => cfg.n_values = vec![1000],
        _ => {}
    }
    cfg
}

fn thread_count_determinism() -> Outcome {
    for kind in ExperimentKind::ALL {
        let cfg = small(kind);
        let csv = |threads| {
            let mut cp = Checkpoint::in_memory(&cfg.hash(), cfg.chunk);
            run_experiment_with_threads(&cfg, &mut cp, threads)
                .and_then(|r| r.to_csv())
                .map_err(|e| format!("{kind}: {e}"))
        };
        let (one, eight) = (csv(1)?, csv(8)?);
        ensure(one == eight, || {
            format!("{kind}: CSV differs between 1 and 8 threads")
        })?;
    }
    Ok(format!(
        "all {} experiments byte-identical",
        ExperimentKind::ALL.len()
    ))
}

fn main() {
    let criteria: [Criterion; 13] = [
        (
            "tree solver equals enumeration",
            tree_solver_matches_enumeration,
        ),
        (
            "membership criterion equals solver membership",
            membership_matches_solver,
        ),
        ("bonus recursion residual", bonus_recursion_residual),
        (
            "local-bound sandwich over all boundary subsets",
            sandwich_chain,
        ),
        (
            "phi closed forms, convolution and gradient",
            phi_closed_forms,
        ),
        ("contraction on rooted trees", contraction_on_random_trees),
        ("psi gradient bound", psi_gradient_bound),
        (
            "key inequality and exponential identity",
            key_inequality_and_identity,
        ),
        (
            "tree decay bound on paths at binding scale",
            tree_bound_on_paths,
        ),
        (
            "degree-three proxy and bracket bounds on hex patches",
            degree_three_bounds,
        ),
        ("exhaustion stabilization on paths", exhaustion_on_paths),
        ("law of large numbers on random trees", lln_cauchy),
        ("determinism across thread counts", thread_count_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {}: {name} ({detail}) [{secs:.1}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {}: {name} ({detail}) [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
