use bundle_core::formulations::{build_fixed_assignment_lp, CandidateSet, SubaddMode};
use bundle_core::gcn::ProbMatrix;
use bundle_core::instance::{gen_instance, Bundle, GenConfig};
use bundle_core::milp::brute_force_pricing;
use bundle_core::strategies::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_probs(rng: &mut ChaCha8Rng, m: usize, n: usize) -> ProbMatrix {
    ProbMatrix::new(
        (0..m)
            .map(|_| (0..n).map(|_| rng.gen_range(0.0..1.0)).collect())
            .collect(),
    )
    .unwrap()
}

#[test]
fn pruned_sets_are_small_and_nested() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let (m, n) = (rng.gen_range(1..6), rng.gen_range(1..9));
        let p = random_probs(&mut rng, m, n);
        let f = fcp(&p);
        let g = pcp(&p);
        assert!(f.len() <= m + 1);
        assert!(g.len() <= m * (n + 1));
        assert!(f.bundles().iter().all(|&b| g.contains(b)));
        for (k, bundle) in fcp_bundles(&p, CUTOFF).into_iter().enumerate() {
            assert!(!bundle.is_empty());
            // The last prefix of each chain is the segment's fixed-cutoff bundle.
            assert_eq!(g.get(*g.chains()[k].last().unwrap()), bundle);
        }
    }
}

#[test]
fn boundary_probability_is_kept() {
    let p = ProbMatrix::new(vec![vec![0.5, 0.49999]]).unwrap();
    assert_eq!(fcp(&p).get(1), Bundle::singleton(0));
}

#[test]
fn restricted_solves_stay_below_the_full_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for seed in 0..6 {
        let inst = gen_instance(&GenConfig::with_seed(seed), 4, 3).unwrap();
        let full = CandidateSet::full(4);
        let best = brute_force_pricing(&inst, &full).unwrap().objective;
        let exact = solve_with_candidates(&inst, &full, SubaddMode::Full).unwrap();
        assert!((exact.objective - best).abs() <= 1e-6);
        let p = random_probs(&mut rng, 3, 4);
        let f = solve_with_candidates(&inst, &fcp(&p), SubaddMode::Full).unwrap();
        let g = solve_with_candidates(&inst, &pcp(&p), SubaddMode::PcpChain).unwrap();
        assert!(f.objective <= best + 1e-6);
        assert!(g.objective <= best + 1e-6);
        assert!(f.objective >= 0.0);
    }
    let inst = gen_instance(&GenConfig::with_seed(1), 4, 3).unwrap();
    let none = solve_with_candidates(&inst, &CandidateSet::empty_only(), SubaddMode::Full).unwrap();
    assert_eq!(none.objective, 0.0);
}

#[test]
fn zero_iterations_return_the_initial_lp() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let inst = gen_instance(&GenConfig::with_seed(12), 5, 3).unwrap();
    let p = random_probs(&mut rng, 3, 5);
    let init = fcp(&p);
    let res = local_search(&inst, &p, &init, 0).unwrap();
    assert_eq!(res.termination, Termination::IterationLimit);
    assert_eq!(res.state.iterations, 0);
    assert!(res.state.moves.is_empty());
    assert_eq!(res.state.assignment, fcp_bundles(&p, CUTOFF));

    let positions: Vec<usize> = res
        .state
        .assignment
        .iter()
        .map(|&b| init.position(b).unwrap())
        .collect();
    let lp = build_fixed_assignment_lp(&inst, &init, &positions, SubaddMode::Full).unwrap();
    let direct = lp.solve(&inst, &init).unwrap().map(|s| s.objective);
    assert_eq!(res.initial_revenue, direct);
    assert_eq!(res.state.revenue, direct);
}

#[test]
fn accepted_moves_strictly_improve() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for seed in 0..12 {
        let inst = gen_instance(&GenConfig::with_seed(900 + seed), 5, 3).unwrap();
        let p = random_probs(&mut rng, 3, 5);
        let init = fcp(&p);
        let res = local_search(&inst, &p, &init, 25).unwrap();
        let mut last = res.initial_revenue;
        for mv in &res.state.moves {
            if let Some(r) = last {
                assert!(mv.revenue > r + IMPROVEMENT_EPS);
            }
            last = Some(mv.revenue);
        }
        assert_eq!(res.state.revenue, last);
        assert!(res.state.iterations <= 25);
        if res.termination == Termination::Converged {
            assert_eq!(res.state.moves.len() + 1, res.state.iterations);
        }
        assert!(res.state.pool.bundles().iter().all(|&b| b.span() <= 5));
        let base = solve_with_candidates(&inst, &init, SubaddMode::Full).unwrap();
        assert!(res.solution.objective >= base.objective - 1e-9);
        assert!(res.solution.objective >= last.unwrap_or(0.0) - 1e-9);
    }
}

#[test]
fn local_search_rejects_mismatched_inputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let inst = gen_instance(&GenConfig::with_seed(0), 4, 3).unwrap();
    let p = random_probs(&mut rng, 2, 4);
    assert!(local_search(&inst, &p, &fcp(&p), 5).is_err());
    let p = random_probs(&mut rng, 3, 4);
    assert!(local_search(&inst, &p, &CandidateSet::empty_only(), 5).is_err());
}
