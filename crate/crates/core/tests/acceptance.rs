//! One pass/fail line per acceptance criterion. Built without the libtest
//! harness so the lines are printed even when every check passes.

use std::path::Path;
use std::time::Instant;

use bundle_core::bench::{
    load_labeled_dir, run_benchmark, run_label_pipeline, BenchConfig, Method,
};
use bundle_core::formulations::*;
use bundle_core::gcn::*;
use bundle_core::instance::{gen_instance, Bundle, GenConfig, Instance, ReservationKind};
use bundle_core::milp::{brute_force_pricing, solve_milp};
use bundle_core::strategies::*;
use rand::rngs::mock::StepRng;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<(bool, String), String>;

const OBJ_TOL: f64 = 1e-6;

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// Instance sizes cycling through n in 2..=4 and m in 1..=3.
fn oracle_instances(count: usize) -> Result<Vec<Instance>, String> {
    (0..count)
        .map(|i| {
            gen_instance(
                &GenConfig::with_seed(100 + i as u64),
                2 + i % 3,
                1 + (i / 3) % 3,
            )
            .map_err(err)
        })
        .collect()
}

fn mb_milp(inst: &Instance) -> Result<f64, String> {
    let cands = CandidateSet::full(inst.n());
    let model = build_mb(inst, &cands).map_err(err)?;
    let sol = solve_milp(&model.milp, 1e-9, 1_000_000).map_err(err)?;
    if !sol.is_optimal() {
        return Err(format!("branch and bound ended with {:?}", sol.status));
    }
    Ok(model.extract(inst, &cands, &sol).map_err(err)?.objective)
}

fn bsp_optimum(inst: &Instance) -> Result<f64, String> {
    let model = build_bsp(inst).map_err(err)?;
    let sol = solve_milp(&model.milp, 1e-9, 1_000_000).map_err(err)?;
    if !sol.is_optimal() {
        return Err(format!("size-pricing model ended with {:?}", sol.status));
    }
    Ok(model.extract(&sol).map_err(err)?.objective)
}

fn c1_oracle_equivalence(brute: &mut Vec<f64>) -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for inst in oracle_instances(50)? {
        let oracle = brute_force_pricing(&inst, &CandidateSet::full(inst.n()))
            .map_err(err)?
            .objective;
        worst = worst.max((mb_milp(&inst)? - oracle).abs());
        brute.push(oracle);
    }
    let secs = start.elapsed().as_secs_f64();
    Ok((
        worst <= OBJ_TOL,
        format!("50 instances, max |milp - oracle| = {worst:.2e}, {secs:.1}s"),
    ))
}

fn c2_fixed_lp_bound() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut pairs, mut feasible, mut worst) = (0, 0, f64::NEG_INFINITY);
    for i in 0..40u64 {
        let n = [2, 3, 4][i as usize % 3];
        let m = if n == 4 { 2 } else { 3 };
        let inst = gen_instance(&GenConfig::with_seed(2000 + i), n, m).map_err(err)?;
        let cands = CandidateSet::full(n);
        let best = brute_force_pricing(&inst, &cands).map_err(err)?.objective;
        for _ in 0..5 {
            let assignment: Vec<usize> = (0..m).map(|_| rng.gen_range(0..cands.len())).collect();
            let lp = build_fixed_assignment_lp(&inst, &cands, &assignment, SubaddMode::Full)
                .map_err(err)?;
            pairs += 1;
            if let Some(sol) = lp.solve(&inst, &cands).map_err(err)? {
                feasible += 1;
                worst = worst.max(sol.objective - best);
            }
        }
    }
    Ok((
        pairs == 200 && worst <= OBJ_TOL,
        format!("{pairs} pairs ({feasible} feasible), max LP - optimum = {worst:.2e}"),
    ))
}

fn c3_bsp_restriction(brute: &[f64]) -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    for (inst, &mb) in oracle_instances(brute.len())?.iter().zip(brute) {
        worst = worst.max(bsp_optimum(inst)? - mb);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut sym_gap = 0.0f64;
    for i in 0..10 {
        let (n, m) = (2 + i % 2, 2 + (i / 2) % 2);
        let utility: Vec<Vec<f64>> = (0..m).map(|_| vec![rng.gen_range(0.0..1.0); n]).collect();
        let serve: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..0.05)).collect();
        let c = rng.gen_range(0.0..0.1);
        let inst = Instance::new(
            vec![1.0 / m as f64; m],
            utility,
            vec![c; n],
            serve,
            ReservationKind::Sqrt,
        )
        .map_err(err)?;
        let mb = brute_force_pricing(&inst, &CandidateSet::full(n))
            .map_err(err)?
            .objective;
        sym_gap = sym_gap.max((bsp_optimum(&inst)? - mb).abs());
    }
    Ok((
        worst <= OBJ_TOL && sym_gap <= OBJ_TOL,
        format!(
            "max BSP - MB = {worst:.2e} over {} instances, symmetric max |BSP - MB| = {sym_gap:.2e} over 10",
            brute.len()
        ),
    ))
}

/// Every nonempty subset of `b`.
fn nonempty_subsets(b: Bundle) -> Vec<Bundle> {
    let members: Vec<usize> = b.iter().collect();
    (1u32..(1 << members.len()))
        .map(|mask| {
            Bundle::from_indices(
                (0..members.len())
                    .filter(|&i| mask >> i & 1 == 1)
                    .map(|i| members[i]),
            )
        })
        .collect()
}

/// Violations of `p(b) <= sum p(parts)` over all K-way covers by subsets of b.
fn cover_violations(p: &[f64], n: usize, k: usize) -> usize {
    let mut bad = 0;
    for b in Bundle::all(n).filter(|b| !b.is_empty()) {
        let parts = nonempty_subsets(b);
        let mut idx = vec![0usize; k];
        loop {
            let union = idx.iter().fold(Bundle::EMPTY, |u, &i| u.union(parts[i]));
            if union == b {
                let total: f64 = idx.iter().map(|&i| p[parts[i].mask() as usize]).sum();
                bad += (p[b.mask() as usize] > total + 1e-9) as usize;
            }
            // Next nondecreasing index tuple, so each multiset is visited once.
            let Some(pos) = (0..k).rev().find(|&i| idx[i] + 1 < parts.len()) else {
                break;
            };
            let v = idx[pos] + 1;
            idx[pos..].iter_mut().for_each(|x| *x = v);
        }
    }
    bad
}

fn c4_subadditivity_theorem() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut violations, mut raw_violations, mut rows_checked) = (0, 0, 0);
    for t in 0..1000 {
        let n = 2 + t % 3;
        let size = 1usize << n;
        let mut order: Vec<usize> = (0..size).collect();
        order.sort_by_key(|&mask| (mask.count_ones(), mask));
        // Random monotone function by increments over all subsets.
        let mut p = vec![0.0; size];
        for &mask in &order[1..] {
            let b = Bundle::from_mask(mask as u128);
            let floor = b
                .iter()
                .map(|j| p[b.without(j).mask() as usize])
                .fold(0.0, f64::max);
            p[mask] = floor + rng.gen_range(0.0f64..1.0).powi(3) * 2.0;
        }
        raw_violations += cover_violations(&p, n, 2);
        // Lower each price to its cheapest two-way split, smallest sets first.
        for &mask in &order[1..] {
            let b = Bundle::from_mask(mask as u128);
            for part in nonempty_subsets(b) {
                let rest = b.difference(part);
                if !rest.is_empty() {
                    p[mask] = p[mask].min(p[part.mask() as usize] + p[rest.mask() as usize]);
                }
            }
        }
        let cands = CandidateSet::full(n);
        let prices: Vec<f64> = cands
            .bundles()
            .iter()
            .map(|b| p[b.mask() as usize])
            .collect();
        let rows = gen_subadditivity(&cands, SubaddMode::Full);
        if rows.iter().any(|r| !r.holds(&prices, 1e-12)) {
            return Err(format!("function {t} violates a generated partition row"));
        }
        let monotone = Bundle::all(n).all(|b| {
            b.iter()
                .all(|j| p[b.without(j).mask() as usize] <= p[b.mask() as usize])
        });
        if !monotone {
            return Err(format!("function {t} lost monotonicity"));
        }
        rows_checked += rows.len();
        violations += (2..=4).map(|k| cover_violations(&p, n, k)).sum::<usize>();
    }
    Ok((
        violations == 0 && raw_violations > 0,
        format!(
            "1000 functions, {rows_checked} partition rows satisfied, {violations} cover violations (K=2..4); \
             checker found {raw_violations} before enforcing the rows"
        ),
    ))
}

fn c5_pruning_structure() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut failures = Vec::new();
    for t in 0..100 {
        let (m, n) = (rng.gen_range(1..=10), rng.gen_range(1..=12));
        let probs = ProbMatrix::new(
            (0..m)
                .map(|_| (0..n).map(|_| rng.gen_range(0.0..1.0)).collect())
                .collect(),
        )
        .map_err(err)?;
        let (f, p) = (fcp(&probs), pcp(&probs));
        let nested = p.chains().iter().all(|chain| {
            chain.windows(2).all(|w| {
                let (a, b) = (p.get(w[0]), p.get(w[1]));
                a.is_subset(b) && a != b
            })
        });
        if f.len() > m + 1
            || p.len() > m * (n + 1)
            || !f.bundles().iter().all(|&b| p.contains(b))
            || !nested
        {
            failures.push(t);
        }
    }
    Ok((
        failures.is_empty(),
        format!("100 matrices, failing: {failures:?}"),
    ))
}

fn loss_at(params: &GcnParams, batch: &[LabeledExample]) -> Result<f64, String> {
    let parts: Vec<BatchPart> = batch.iter().map(BatchPart::all_edges).collect();
    Ok(
        loss_and_grad_parts(params, &parts, Mode::Eval, 0.0, &mut StepRng::new(0, 0))
            .map_err(err)?
            .0,
    )
}

fn central(
    params: &GcnParams,
    batch: &[LabeledExample],
    t: usize,
    i: usize,
    h: f64,
) -> Result<f64, String> {
    let mut plus = params.clone();
    plus.tensors_mut()[t].data[i] += h;
    let mut minus = params.clone();
    minus.tensors_mut()[t].data[i] -= h;
    Ok((loss_at(&plus, batch)? - loss_at(&minus, batch)?) / (2.0 * h))
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
}

struct FdCheck {
    checked: usize,
    worst: f64,
    /// Entries whose h = 1e-4 stencil straddles a ReLU breakpoint; these are
    /// rechecked with h = 1e-5 and contribute that error instead.
    kinks: usize,
}

fn fd_check(
    params: &GcnParams,
    batch: &[LabeledExample],
    sample: Option<usize>,
    recheck: bool,
) -> Result<FdCheck, String> {
    let (_, grad) =
        loss_and_grad(params, batch, Mode::Eval, &mut StepRng::new(0, 0)).map_err(err)?;
    let mut pick = ChaCha8Rng::seed_from_u64(6);
    let mut out = FdCheck {
        checked: 0,
        worst: 0.0,
        kinks: 0,
    };
    for t in 0..params.tensors().len() {
        let len = params.tensors()[t].len();
        let indices: Vec<usize> = match sample {
            None => (0..len).collect(),
            Some(s) => (0..s.min(len)).map(|_| pick.gen_range(0..len)).collect(),
        };
        for i in indices {
            let an = grad.tensors()[t].data[i];
            let mut e = rel_err(an, central(params, batch, t, i, 1e-4)?);
            if e > 1e-4 && recheck {
                out.kinks += 1;
                e = rel_err(an, central(params, batch, t, i, 1e-5)?);
            }
            out.worst = out.worst.max(e);
            out.checked += 1;
        }
    }
    Ok(out)
}

fn c6_gradients() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let batch: Vec<LabeledExample> = (0..2u64)
        .map(|s| {
            let inst = gen_instance(&GenConfig::with_seed(60 + s), 3, 2).map_err(err)?;
            let target = (0..2)
                .map(|_| (0..3).map(|_| rng.gen_range(0..2u8)).collect())
                .collect();
            LabeledExample::new(build_graph(&inst), target).map_err(err)
        })
        .collect::<Result<_, _>>()?;
    let small = GcnParams::init(12, 8);
    let all = fd_check(&small, &batch, None, false)?;
    let wide = fd_check(&GcnParams::init(DEFAULT_HIDDEN, 9), &batch, Some(150), true)?;
    let secs = start.elapsed().as_secs_f64();
    Ok((
        all.checked == small.num_params() && all.worst <= 1e-4 && wide.worst <= 1e-4 && secs < 30.0,
        format!(
            "all {} parameters at width 12, h=1e-4: max rel err {:.2e}; {} sampled at width {DEFAULT_HIDDEN}: \
             max {:.2e} ({} straddle a ReLU kink at h=1e-4, checked at h=1e-5); {secs:.1}s",
            all.checked, all.worst, wide.checked, wide.worst, wide.kinks
        ),
    ))
}

fn c7_training(dir: &Path, model: &mut Option<GcnParams>) -> Outcome {
    let start = Instant::now();
    let labels = dir.join("labels");
    run_label_pipeline(200, 5, 3, 10_000, &labels).map_err(err)?;
    let data: Vec<LabeledExample> = load_labeled_dir(&labels)
        .map_err(err)?
        .into_iter()
        .map(|(_, e)| e)
        .collect();
    let cfg = TrainConfig {
        epochs: 100,
        seed: 1,
        ..TrainConfig::default()
    };
    let report = train_with_report(&data, &cfg).map_err(err)?;
    let held_out: Vec<LabeledExample> = (0..50u64)
        .map(|s| {
            let inst = gen_instance(&GenConfig::with_seed(20_000 + s), 5, 3).map_err(err)?;
            let sol = solve_with_candidates(&inst, &CandidateSet::full(5), SubaddMode::Full)
                .map_err(err)?;
            make_labels(&inst, &sol).map_err(err)
        })
        .collect::<Result<_, _>>()?;
    let accuracy = edge_accuracy(&report.params, &held_out).map_err(err)?;
    let ratio = report.best_val_loss / report.initial_val_loss;
    let secs = start.elapsed().as_secs_f64();
    *model = Some(report.params);
    Ok((
        ratio <= 0.7 && accuracy >= 0.70 && secs < 600.0,
        format!(
            "validation BCE {:.4} -> {:.4} (ratio {ratio:.3}), held-out edge accuracy {accuracy:.3}, {secs:.1}s",
            report.initial_val_loss, report.best_val_loss
        ),
    ))
}

fn quality_config(model: &Path) -> BenchConfig {
    BenchConfig {
        seed: 0,
        n: 6,
        m: 4,
        instances: 30,
        methods: vec![Method::Mb, Method::Fcp, Method::Pcp, Method::FcpLs],
        baseline: Method::Mb,
        model: Some(model.to_path_buf()),
        record_time: false,
        ..BenchConfig::default()
    }
}

fn c8_quality(cfg: &BenchConfig) -> Outcome {
    let report = run_benchmark(cfg).map_err(err)?;
    let mean_rr = |m: Method| {
        report
            .aggregate(m)
            .and_then(|a| a.mean[3])
            .unwrap_or(f64::NAN)
    };
    let mean_rev = |m: Method| {
        report
            .aggregate(m)
            .and_then(|a| a.mean[0])
            .unwrap_or(f64::NAN)
    };
    let (f, p, l) = (
        mean_rr(Method::Fcp),
        mean_rr(Method::Pcp),
        mean_rr(Method::FcpLs),
    );
    let per_instance = report
        .rows_for(Method::Fcp)
        .zip(report.rows_for(Method::FcpLs))
        .all(|(a, b)| b.revenue >= a.revenue - 1e-9);
    let order = if mean_rev(Method::Fcp) <= mean_rev(Method::Pcp) {
        "holds"
    } else {
        "does not hold"
    };
    Ok((
        f >= 0.85 && p >= 0.85 && l >= f - 1e-9 && per_instance,
        format!(
            "mean RR fcp {f:.4}, pcp {p:.4}, fcp-ls {l:.4}; LS >= FCP on every instance: {per_instance}; \
             FCP <= PCP revenue (reported only) {order}"
        ),
    ))
}

fn c9_local_search(cfg: &BenchConfig) -> Outcome {
    let report = run_benchmark(cfg).map_err(err)?;
    let mut bad = Vec::new();
    let mut accepted = 0;
    for row in report.rows_for(Method::FcpLs) {
        let Some(ls) = &row.local_search else {
            return Err("local-search rows carry no trace".into());
        };
        let mut seq: Vec<f64> = ls.initial_revenue.into_iter().collect();
        seq.extend(&ls.accepted);
        let increasing = seq.windows(2).all(|w| w[1] > w[0]);
        let terminated = match ls.termination {
            Termination::Converged => {
                ls.iterations == ls.accepted.len() + 1 && ls.iterations <= cfg.max_iter
            }
            Termination::IterationLimit => ls.iterations == cfg.max_iter,
        };
        accepted += ls.accepted.len();
        if !(increasing && terminated) {
            bad.push(row.instance_id);
        }
    }
    Ok((
        bad.is_empty(),
        format!("30 runs, {accepted} accepted moves, violating instances: {bad:?}"),
    ))
}

fn c10_scalability(model: &GcnParams) -> Outcome {
    let mut fcp_worst = 0.0f64;
    let mut oversized = 0;
    for s in 0..3u64 {
        let inst = gen_instance(&GenConfig::with_seed(30_000 + s), 50, 10).map_err(err)?;
        let start = Instant::now();
        let probs = predict_probs(model, &build_graph(&inst)).map_err(err)?;
        let cands = fcp(&probs);
        solve_with_candidates(&inst, &cands, SubaddMode::Full).map_err(err)?;
        fcp_worst = fcp_worst.max(start.elapsed().as_secs_f64());
        oversized += (cands.len() > 11) as usize;
    }
    let mut pcp_worst = 0.0f64;
    let mut unproven = 0;
    for s in 0..3u64 {
        let inst = gen_instance(&GenConfig::with_seed(30_000 + s), 30, 10).map_err(err)?;
        let start = Instant::now();
        let probs = predict_probs(model, &build_graph(&inst)).map_err(err)?;
        let sol = solve_with_candidates(&inst, &pcp(&probs), SubaddMode::PcpChain).map_err(err)?;
        pcp_worst = pcp_worst.max(start.elapsed().as_secs_f64());
        unproven += !sol.meta.proven_optimal as usize;
    }
    Ok((
        fcp_worst < 10.0 && oversized == 0 && pcp_worst < 120.0,
        format!(
            "FCP n=50 m=10: slowest {fcp_worst:.3}s, {oversized} sets over m+1; PCP n=30 m=10: slowest \
             {pcp_worst:.1}s, {unproven} of 3 stopped at the node limit"
        ),
    ))
}

fn c11_determinism(model: &Path, dir: &Path) -> Outcome {
    let cfg = BenchConfig {
        n: 5,
        m: 3,
        instances: 6,
        methods: Method::ALL.to_vec(),
        model: Some(model.to_path_buf()),
        record_time: false,
        ..BenchConfig::default()
    };
    let (a, b) = (dir.join("a.csv"), dir.join("b.csv"));
    run_benchmark(&cfg)
        .map_err(err)?
        .write_csv(&a)
        .map_err(err)?;
    run_benchmark(&cfg)
        .map_err(err)?
        .write_csv(&b)
        .map_err(err)?;
    let (x, y) = (
        std::fs::read(&a).map_err(err)?,
        std::fs::read(&b).map_err(err)?,
    );
    Ok((
        x == y,
        format!("two runs, {} bytes each, identical: {}", x.len(), x == y),
    ))
}

fn main() {
    let dir = tempfile::tempdir().expect("temporary directory");
    let model_path = dir.path().join("model.txt");
    let mut brute = Vec::new();
    let mut model: Option<GcnParams> = None;
    let mut failed = 0;
    let mut record = |id: usize, name: &str, outcome: Outcome| {
        let (pass, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
        failed += !pass as usize;
        println!(
            "criterion {id:>2} {} {name}: {detail}",
            if pass { "PASS" } else { "FAIL" }
        );
    };

    record(1, "oracle equivalence", c1_oracle_equivalence(&mut brute));
    record(2, "fixed-assignment LP bound", c2_fixed_lp_bound());
    record(3, "size pricing restriction", c3_bsp_restriction(&brute));
    record(4, "sub-additivity theorem", c4_subadditivity_theorem());
    record(5, "pruning structure", c5_pruning_structure());
    record(6, "gradient correctness", c6_gradients());
    record(7, "training sanity", c7_training(dir.path(), &mut model));
    let saved = model.as_ref().map(|p| p.save(&model_path).map_err(err));
    let trained = match (&model, saved) {
        (Some(p), Some(Ok(()))) => Ok(p),
        (_, Some(Err(e))) => Err(e),
        _ => Err("no trained model".to_string()),
    };
    let cfg = quality_config(&model_path);
    let needs_model = |f: &dyn Fn(&GcnParams) -> Outcome| match &trained {
        Ok(p) => f(p),
        Err(e) => Err(e.clone()),
    };
    record(8, "end-to-end quality", needs_model(&|_| c8_quality(&cfg)));
    record(
        9,
        "local-search monotonicity",
        needs_model(&|_| c9_local_search(&cfg)),
    );
    record(
        10,
        "scalability smoke",
        needs_model(&|p| c10_scalability(p)),
    );
    record(
        11,
        "determinism",
        needs_model(&|_| c11_determinism(&model_path, dir.path())),
    );

    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
