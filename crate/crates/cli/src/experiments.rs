//! The experiment runners. Each one fills a [`RunRecord`] with CSV rows and
//! named checks; a check never aborts the run, so a failing bound is reported
//! next to the numbers that violate it.

use std::time::Instant;

use matchdecay_core::bonus::sandwich;
use matchdecay_core::decay::{DecayProblem, DEFAULT_BOUNDARY_CAP};
use matchdecay_core::generate::{generate, hex_patch, path, Family, TreeShape};
use matchdecay_core::message::{contraction_bound, root_sensitivity, RootedTree};
use matchdecay_core::mwm;
use matchdecay_core::stats::{combined_se, summarize, Summary};
use matchdecay_core::weights::{sample_weights, ReplicaRng};
use matchdecay_core::{EdgeId, Graph, SeedPlan, VertexId, WeightDistribution};
use rand::Rng;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::checkpoint::Checkpoint;
use crate::config::{ExperimentConfig, ExperimentKind};
use crate::record::RunRecord;
use crate::HarnessError;

type Res<T> = Result<T, HarnessError>;

/// Runs `config` on the current rayon pool.
pub fn run_experiment(config: &ExperimentConfig, checkpoint: &mut Checkpoint) -> Res<RunRecord> {
    config.validate()?;
    let start = Instant::now();
    let mut record = match config.experiment {
        ExperimentKind::ThmTree => run_thm_tree(config, checkpoint),
        ExperimentKind::ThmDeg3 => run_thm_deg3(config, checkpoint),
        ExperimentKind::MR => run_m_r(config, checkpoint),
        ExperimentKind::Contraction => run_contraction(config, checkpoint),
        ExperimentKind::Exhaustion => run_exhaustion(config, checkpoint),
        ExperimentKind::Lln => run_lln(config, checkpoint),
        ExperimentKind::Clt => run_clt(config, checkpoint),
    }?;
    record.wall_time_secs = start.elapsed().as_secs_f64();
    Ok(record)
}

/// Runs `config` on a dedicated pool of `threads` workers.
pub fn run_experiment_with_threads(
    config: &ExperimentConfig,
    checkpoint: &mut Checkpoint,
    threads: usize,
) -> Res<RunRecord> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()?;
    pool.install(|| run_experiment(config, checkpoint))
}

/// Per-replica rows for `range`, in replica order.
fn par_rows<F>(plan: &SeedPlan, range: std::ops::Range<u64>, f: F) -> Res<Vec<Vec<f64>>>
where
    F: Fn(&mut ReplicaRng) -> Res<Vec<f64>> + Sync,
{
    range
        .into_par_iter()
        .map(|i| f(&mut plan.replica_rng(i)))
        .collect()
}

fn column(rows: &[Vec<f64>], j: usize) -> Vec<f64> {
    rows.iter().map(|r| r[j]).collect()
}

fn plan(cfg: &ExperimentConfig) -> SeedPlan {
    SeedPlan::new(cfg.master_seed, cfg.replicas)
}

fn within(estimate: f64, bound: f64, se: f64) -> bool {
    estimate <= bound + 3.0 * se
}

/// `2D (1 - (2D)^{-D})^{r-2}`.
pub fn tree_decay_bound(d: usize, r: usize) -> f64 {
    let d = d as f64;
    2.0 * d * (1.0 - (2.0 * d).powf(-d)).powi(r as i32 - 2)
}

/// `6 ((1 - eps)^r + eps)`.
pub fn deg3_decay_bound(eps: f64, r: usize) -> f64 {
    6.0 * ((1.0 - eps).powi(r as i32) + eps)
}

/// `18 log r / r`, defined for `r >= 2`.
pub fn deg3_log_bound(r: usize) -> Option<f64> {
    (r >= 2).then(|| 18.0 * (r as f64).ln() / r as f64)
}

/// `(1 - eps)^r + 3 eps`.
pub fn m_r_bound(eps: f64, r: usize) -> f64 {
    (1.0 - eps).powi(r as i32) + 3.0 * eps
}

fn first_edge(g: &Graph, v: VertexId) -> EdgeId {
    g.neighbors(v)[0].1
}

/// Ball-sized host graph and the edge under study for the tree experiment.
fn tree_host(cfg: &ExperimentConfig) -> Res<(Graph, EdgeId)> {
    match cfg.family.as_str() {
        "path" => {
            let g = path(2 * cfg.r_max + 6)?;
            Ok((g, cfg.r_max + 2))
        }
        _ => {
            let g = generate(
                &Family::regular_tree(cfg.degree, cfg.r_max + 2),
                cfg.master_seed,
            )?;
            let e = first_edge(&g, 0);
            Ok((g, e))
        }
    }
}

pub fn run_thm_tree(cfg: &ExperimentConfig, cp: &mut Checkpoint) -> Res<RunRecord> {
    let mut rec = RunRecord::new(cfg);
    let (g, e) = tree_host(cfg)?;
    let d = cfg.degree;
    if g.max_degree() > d {
        return Err(HarnessError::Config(format!(
            "host graph has degree {} > D = {d}",
            g.max_degree()
        )));
    }
    let plan = plan(cfg);
    let mut history: Vec<Summary> = Vec::new();
    for r in cfg.r_min..=cfg.r_max {
        let problem = DecayProblem::new(&g, e, r)?;
        if !problem.ball().is_tree() {
            return Err(matchdecay_core::Error::NotATree.into());
        }
        let exact = cfg.exact_check && problem.boundary().len() <= DEFAULT_BOUNDARY_CAP;
        let rows = cp.rows(&format!("r={r}"), cfg.replicas, |range| {
            par_rows(&plan, range, |rng| {
                let w = sample_weights(&g, WeightDistribution::Exp1, rng);
                let bracket = problem.bracket_tree(&w)?;
                let sup = if exact { problem.exact(&w)? } else { f64::NAN };
                Ok(vec![bracket, sup])
            })
        })?;
        let s = summarize(&column(&rows, 0));
        let bound = tree_decay_bound(d, r);
        rec.push_row(
            format!("D={d}"),
            Some(r),
            None,
            cfg.replicas,
            s.mean,
            s.std_error,
            Some(bound),
        );
        rec.check(
            format!("r={r}: bracket estimate <= min(1, bound) + 3 SE"),
            within(s.mean, bound.min(1.0), s.std_error),
            format!(
                "{:.5} vs {:.5} (se {:.5})",
                s.mean,
                bound.min(1.0),
                s.std_error
            ),
        );
        if exact {
            let sup = column(&rows, 1);
            let es = summarize(&sup);
            rec.push_row(
                "exact_sup",
                Some(r),
                None,
                cfg.replicas,
                es.mean,
                es.std_error,
                Some(bound),
            );
            let violations = rows.iter().filter(|x| x[1] > x[0]).count();
            rec.check(
                format!("r={r}: exact sup <= bracket on every replica"),
                violations == 0,
                format!("{violations} violations"),
            );
        }
        if r >= cfg.r_min + 4 {
            let old = history[r - 4 - cfg.r_min];
            rec.check(
                format!("r={r}: estimate <= estimate at r-4 + 3 SE"),
                within(s.mean, old.mean, combined_se(s.std_error, old.std_error)),
                format!("{:.5} vs {:.5}", s.mean, old.mean),
            );
        }
        history.push(s);
    }
    Ok(rec)
}

fn deg3_host(cfg: &ExperimentConfig) -> Res<(Graph, EdgeId)> {
    let g = match cfg.family.as_str() {
        "hex" => hex_patch(cfg.r_max + 2),
        _ => {
            let n = cfg.n_values.first().copied().unwrap_or(1000);
            generate(&Family::RandomRegular { n, d: 3 }, cfg.master_seed)?
        }
    };
    let e = first_edge(&g, 0);
    Ok((g, e))
}

pub fn run_thm_deg3(cfg: &ExperimentConfig, cp: &mut Checkpoint) -> Res<RunRecord> {
    let mut rec = RunRecord::new(cfg);
    let (g, e) = deg3_host(cfg)?;
    if g.max_degree() > 3 {
        return Err(HarnessError::Config(format!(
            "host graph has degree {}",
            g.max_degree()
        )));
    }
    let plan = plan(cfg);
    let mut prev: Option<Summary> = None;
    for r in cfg.r_min..=cfg.r_max {
        let problem = DecayProblem::new(&g, e, r)?;
        let rows = cp.rows(&format!("r={r}"), cfg.replicas, |range| {
            par_rows(&plan, range, |rng| {
                let w = sample_weights(&g, WeightDistribution::Exp1, rng);
                Ok(vec![problem.bracket_general(&w)?])
            })
        })?;
        let s = summarize(&column(&rows, 0));
        rec.push_row(
            "log_bound",
            Some(r),
            None,
            cfg.replicas,
            s.mean,
            s.std_error,
            deg3_log_bound(r),
        );
        for &eps in &cfg.epsilons {
            let bound = deg3_decay_bound(eps, r);
            rec.push_row(
                "eps_bound",
                Some(r),
                Some(eps),
                cfg.replicas,
                s.mean,
                s.std_error,
                Some(bound),
            );
            if bound < 1.0 {
                rec.check(
                    format!("r={r} eps={eps}: estimate <= bound + 3 SE"),
                    within(s.mean, bound, s.std_error),
                    format!("{:.5} vs {bound:.5}", s.mean),
                );
            }
        }
        rec.check(
            format!("r={r}: estimate <= 1"),
            s.mean <= 1.0,
            format!("{:.5}", s.mean),
        );
        if let Some(p) = prev {
            rec.check(
                format!("r={r}: non-increasing within 3 SE"),
                within(s.mean, p.mean, combined_se(s.std_error, p.std_error)),
                format!("{:.5} after {:.5}", s.mean, p.mean),
            );
        }
        prev = Some(s);
    }
    Ok(rec)
}

pub fn run_m_r(cfg: &ExperimentConfig, cp: &mut Checkpoint) -> Res<RunRecord> {
    let mut rec = RunRecord::new(cfg);
    let g = hex_patch(cfg.r_max + 2);
    let root = 0;
    let dist = g.view().distances_from(&[root]);
    let plan = plan(cfg);
    let radii: Vec<usize> = (cfg.r_min..=cfg.r_max).collect();
    let rows = cp.rows("m_r", cfg.replicas, |range| {
        par_rows(&plan, range, |rng| {
            // one neighbour of the root is removed so that d_u = 2
            let drop = g.neighbors(root)[rng.random_range(0..g.degree(root))].0;
            let mut removed = vec![drop];
            for (v, d) in dist.iter().enumerate() {
                if matches!(d, Some(k) if *k >= 2) && rng.random_bool(cfg.deletion_prob) {
                    removed.push(v);
                }
            }
            let h = g.view().delete_vertices(removed);
            let w = sample_weights(&g, WeightDistribution::Exp1, rng);
            radii
                .iter()
                .map(|&r| {
                    let s = sandwich(&h, &w, root, r)?;
                    Ok((-s.zero_kind).exp() - s.infinity_kind.exp_neg())
                })
                .collect()
        })
    })?;
    for (j, &r) in radii.iter().enumerate() {
        let s = summarize(&column(&rows, j));
        let estimate = s.mean.abs();
        if r == 0 {
            rec.check(
                "r=0: proxy equals 1",
                estimate == 1.0,
                format!("{estimate}"),
            );
        }
        for &eps in &cfg.epsilons {
            let bound = m_r_bound(eps, r);
            rec.push_row(
                "m_r_lower",
                Some(r),
                Some(eps),
                cfg.replicas,
                estimate,
                s.std_error,
                Some(bound),
            );
            rec.check(
                format!("r={r} eps={eps}: M_r proxy <= bound + 3 SE"),
                within(estimate, bound, s.std_error),
                format!("{estimate:.5} vs {bound:.5}"),
            );
        }
    }
    Ok(rec)
}

/// Planted trees of height `depth` with at most `d - 1` children per vertex.
fn planted_family(d: usize, depth: usize) -> Family {
    let mut weights = vec![1.0; d];
    weights[1] = 2.0;
    Family::Tree {
        depth,
        shape: TreeShape::Iid(weights),
        planted: true,
    }
}

pub fn run_contraction(cfg: &ExperimentConfig, cp: &mut Checkpoint) -> Res<RunRecord> {
    let mut rec = RunRecord::new(cfg);
    let plan = plan(cfg);
    for r in cfg.r_min..=cfg.r_max {
        let family = planted_family(cfg.degree, r);
        let rows = cp.rows(&format!("r={r}"), cfg.replicas, |range| {
            par_rows(&plan, range, |rng| {
                let t = RootedTree::new(generate(&family, rng.random())?, 0)?;
                let s = root_sensitivity(&t)?;
                let own = s.bound.expect("height is at least 4");
                Ok(vec![s.value, s.value - own])
            })
        })?;
        let s = summarize(&column(&rows, 0));
        let worst = rows.iter().map(|x| x[1]).fold(f64::NEG_INFINITY, f64::max);
        let bound = contraction_bound(cfg.degree, r);
        rec.push_row(
            format!("D={}", cfg.degree),
            Some(r),
            None,
            cfg.replicas,
            s.mean,
            s.std_error,
            Some(bound),
        );
        rec.check(
            format!("r={r}: every tree within its contraction bound"),
            worst <= 1e-12,
            format!("largest excess {worst:.3e}"),
        );
    }
    Ok(rec)
}

fn exhaustion_host(cfg: &ExperimentConfig) -> Res<(Graph, VertexId)> {
    let n_max = cfg.n_values[1];
    Ok(match cfg.family.as_str() {
        "path" => (path(2 * n_max + 1)?, n_max),
        "regular_tree" => (
            generate(&Family::regular_tree(cfg.degree, n_max), cfg.master_seed)?,
            0,
        ),
        _ => (hex_patch(n_max), 0),
    })
}

pub fn run_exhaustion(cfg: &ExperimentConfig, cp: &mut Checkpoint) -> Res<RunRecord> {
    let mut rec = RunRecord::new(cfg);
    let (g, root) = exhaustion_host(cfg)?;
    let e = first_edge(&g, root);
    let (n_min, n_max) = (cfg.n_values[0].max(1), cfg.n_values[1]);
    let balls: Vec<_> = (n_min..=n_max)
        .map(|n| g.view().ball_around_vertex(root, n))
        .collect::<Result<_, _>>()?;
    let plan = plan(cfg);
    let rows = cp.rows("exhaustion", cfg.replicas, |range| {
        par_rows(&plan, range, |rng| {
            let w = sample_weights(&g, WeightDistribution::Exp1, rng);
            let ind: Vec<bool> = balls
                .iter()
                .map(|b| Ok(mwm::solve(b, &w)?.matching.contains(e)))
                .collect::<Res<_>>()?;
            let last = *ind.last().expect("nonempty range");
            let settled = ind
                .iter()
                .rposition(|&x| x != last)
                .map_or(n_min, |i| n_min + i + 1);
            let consistent = DecayProblem::new(&g, e, settled)?.restriction_consistent(&w)?;
            Ok(vec![
                settled as f64,
                f64::from(u8::from(last)),
                f64::from(u8::from(consistent)),
            ])
        })
    })?;
    let settled = column(&rows, 0);
    let mut prev = 0.0;
    for n in n_min..=n_max {
        let frac = settled.iter().filter(|&&s| s <= n as f64).count() as f64 / cfg.replicas as f64;
        let se = (frac * (1.0 - frac) / cfg.replicas as f64).sqrt();
        rec.push_row(
            "stabilized_fraction",
            Some(n),
            None,
            cfg.replicas,
            frac,
            se,
            None,
        );
        if n == cfg.r_min {
            rec.check(
                format!("n={n}: at least 99% of replicas stabilized"),
                frac >= 0.99,
                format!("{frac:.4}"),
            );
        }
        rec.check(
            format!("n={n}: fraction non-decreasing"),
            frac >= prev,
            format!("{frac:.4}"),
        );
        prev = frac;
    }
    let inconsistent = rows.iter().filter(|x| x[2] != 1.0).count();
    rec.check(
        "stabilized indicator passes restriction consistency",
        inconsistent == 0,
        format!("{inconsistent} replicas disagree"),
    );
    let m = summarize(&column(&rows, 1));
    rec.push_row(
        "limit_indicator",
        Some(n_max),
        None,
        cfg.replicas,
        m.mean,
        m.std_error,
        None,
    );
    Ok(rec)
}

fn lln_family(cfg: &ExperimentConfig, n: usize) -> Family {
    match cfg.family.as_str() {
        "path" => Family::Path { n },
        _ => {
            let mut degree_weights = vec![1.0; cfg.degree + 1];
            degree_weights[0] = 0.0;
            Family::RandomTree { n, degree_weights }
        }
    }
}

pub fn run_lln(cfg: &ExperimentConfig, cp: &mut Checkpoint) -> Res<RunRecord> {
    let mut rec = RunRecord::new(cfg);
    let plan = plan(cfg);
    let mut summaries = Vec::new();
    for &n in &cfg.n_values {
        let family = lln_family(cfg, n);
        let rows = cp.rows(&format!("n={n}"), cfg.replicas, |range| {
            par_rows(&plan, range, |rng| {
                let g = generate(&family, rng.random())?;
                let w = sample_weights(&g, WeightDistribution::Exp1, rng);
                let m = mwm::solve(&g.view(), &w)?;
                let v = g.vertex_count() as f64;
                Ok(vec![m.total_weight / v, m.matching.len() as f64 / v])
            })
        })?;
        let weight = summarize(&column(&rows, 0));
        let density = summarize(&column(&rows, 1));
        rec.push_row(
            format!("weight_per_vertex n={n}"),
            None,
            None,
            cfg.replicas,
            weight.mean,
            weight.std_error,
            None,
        );
        rec.push_row(
            format!("matching_density n={n}"),
            None,
            None,
            cfg.replicas,
            density.mean,
            density.std_error,
            None,
        );
        let out_of_range = rows.iter().filter(|x| !(0.0..=0.5).contains(&x[1])).count();
        rec.check(
            format!("n={n}: matching density in [0, 1/2]"),
            out_of_range == 0,
            format!("{out_of_range} replicas outside"),
        );
        summaries.push((n, weight));
    }
    for pair in summaries.windows(2) {
        let ((a, sa), (b, sb)) = (pair[0], pair[1]);
        let se = combined_se(sa.std_error, sb.std_error);
        rec.check(
            format!("n={a} vs n={b}: weight per vertex within 3 combined SE"),
            (sa.mean - sb.mean).abs() <= 3.0 * se,
            format!("{:.5} vs {:.5} (se {se:.5})", sa.mean, sb.mean),
        );
    }
    Ok(rec)
}

/// Kolmogorov-Smirnov distance between the standardised sample and N(0, 1).
pub fn ks_to_standard_normal(sample: &[f64]) -> (f64, Vec<f64>) {
    let s = summarize(sample);
    let n = sample.len() as f64;
    let sd = s.std_error * n.sqrt();
    let z: Vec<f64> = sample.iter().map(|x| (x - s.mean) / sd).collect();
    let normal = Normal::standard();
    let mut sorted = z.clone();
    sorted.sort_by(f64::total_cmp);
    let ks = sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = normal.cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max);
    (ks, z)
}

pub fn run_clt(cfg: &ExperimentConfig, cp: &mut Checkpoint) -> Res<RunRecord> {
    let mut rec = RunRecord::new(cfg);
    let n = cfg.n_values[0];
    let g = generate(&lln_family(cfg, n), cfg.master_seed)?;
    let plan = plan(cfg);
    let rows = cp.rows(&format!("n={n}"), cfg.replicas, |range| {
        par_rows(&plan, range, |rng| {
            let w = sample_weights(&g, WeightDistribution::Exp1, rng);
            Ok(vec![mwm::solve(&g.view(), &w)?.total_weight])
        })
    })?;
    let (ks, z) = ks_to_standard_normal(&column(&rows, 0));
    // empirical threshold, only meaningful for large trees and many replicas
    let threshold = (n >= 10_000 && cfg.replicas >= 1000).then_some(0.05);
    rec.push_row(
        format!("ks n={n}"),
        None,
        None,
        cfg.replicas,
        ks,
        0.0,
        threshold,
    );
    if let Some(t) = threshold {
        rec.check(
            format!("n={n}: KS distance <= {t}"),
            ks <= t,
            format!("{ks:.4}"),
        );
    }
    let zs = summarize(&z);
    let slack = 4.0 / (cfg.replicas as f64).sqrt();
    rec.push_row(
        format!("standardized_mean n={n}"),
        None,
        None,
        cfg.replicas,
        zs.mean,
        zs.std_error,
        Some(slack),
    );
    rec.check(
        "standardized mean within 4/sqrt(replicas) of 0",
        zs.mean.abs() <= slack,
        format!("{:.3e}", zs.mean),
    );
    Ok(rec)
}
