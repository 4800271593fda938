use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;

fn approx(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn box_constrained_maximum() {
    let mut lp = LpModel::new(Sense::Maximize);
    let x1 = lp.add_var("x1", 0.0, f64::INFINITY, 1.0);
    let x2 = lp.add_var("x2", 0.0, f64::INFINITY, 1.0);
    lp.add_row("c1", vec![(x1, 1.0)], RowSense::Le, 1.0);
    lp.add_row("c2", vec![(x2, 1.0)], RowSense::Le, 1.0);
    let sol = solve_lp(&lp).unwrap();
    assert_eq!(sol.status, LpStatus::Optimal);
    assert!(approx(sol.objective, 2.0, 1e-12));
    assert!(approx(sol.x[0], 1.0, 1e-12) && approx(sol.x[1], 1.0, 1e-12));
}

#[test]
fn contradictory_bounds_are_infeasible() {
    let mut lp = LpModel::new(Sense::Maximize);
    let x = lp.add_var("x", 0.0, f64::INFINITY, 1.0);
    lp.add_row("lo", vec![(x, 1.0)], RowSense::Ge, 2.0);
    lp.add_row("hi", vec![(x, 1.0)], RowSense::Le, 1.0);
    assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Infeasible);
}

#[test]
fn unbounded_ray_detected() {
    let mut lp = LpModel::new(Sense::Maximize);
    let x = lp.add_var("x", 0.0, f64::INFINITY, 1.0);
    let y = lp.add_var("y", 0.0, f64::INFINITY, 0.0);
    lp.add_row("c", vec![(x, 1.0), (y, -1.0)], RowSense::Le, 1.0);
    assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Unbounded);
}

#[test]
fn free_and_shifted_variables() {
    // min x + 2y, x free, y in [-3, 5], x + y >= -1, x - y = 2
    let mut lp = LpModel::new(Sense::Minimize);
    let x = lp.add_var("x", f64::NEG_INFINITY, f64::INFINITY, 1.0);
    let y = lp.add_var("y", -3.0, 5.0, 2.0);
    lp.add_row("a", vec![(x, 1.0), (y, 1.0)], RowSense::Ge, -1.0);
    lp.add_row("b", vec![(x, 1.0), (y, -1.0)], RowSense::Eq, 2.0);
    let sol = solve_lp(&lp).unwrap();
    // x = y + 2, 2y + 2 >= -1 -> y >= -1.5, objective 3y + 2 minimized at y = -1.5
    assert_eq!(sol.status, LpStatus::Optimal);
    assert!(approx(sol.x[1], -1.5, 1e-9), "{:?}", sol.x);
    assert!(approx(sol.x[0], 0.5, 1e-9));
    assert!(approx(sol.objective, -2.5, 1e-9));
}

#[test]
fn upper_bounded_only_variable() {
    let mut lp = LpModel::new(Sense::Maximize);
    let x = lp.add_var("x", f64::NEG_INFINITY, 4.0, 1.0);
    lp.add_row("r", vec![(x, 1.0)], RowSense::Ge, -10.0);
    let sol = solve_lp(&lp).unwrap();
    assert!(approx(sol.objective, 4.0, 1e-12));
}

#[test]
fn fixed_variables_and_offset() {
    let mut lp = LpModel::new(Sense::Maximize);
    lp.objective_offset = -1.5;
    let x = lp.add_var("x", 2.0, 2.0, 3.0);
    let y = lp.add_var("y", 0.0, f64::INFINITY, 1.0);
    lp.add_row("r", vec![(x, 1.0), (y, 1.0)], RowSense::Le, 5.0);
    let sol = solve_lp(&lp).unwrap();
    assert!(approx(sol.objective, 6.0 + 3.0 - 1.5, 1e-12));
}

#[test]
fn empty_row_set() {
    let mut lp = LpModel::new(Sense::Minimize);
    lp.add_var("x", 1.0, 3.0, 1.0);
    lp.add_var("y", -2.0, 3.0, -1.0);
    let sol = solve_lp(&lp).unwrap();
    assert!(approx(sol.objective, 1.0 - 3.0, 1e-12));
}

#[test]
fn non_finite_coefficients_rejected() {
    let mut lp = LpModel::new(Sense::Maximize);
    let x = lp.add_var("x", 0.0, 1.0, f64::NAN);
    lp.add_row("r", vec![(x, 1.0)], RowSense::Le, 1.0);
    assert!(matches!(solve_lp(&lp), Err(Error::Argument(_))));

    let mut lp = LpModel::new(Sense::Maximize);
    let x = lp.add_var("x", 0.0, 1.0, 1.0);
    lp.add_row("r", vec![(x, f64::INFINITY)], RowSense::Le, 1.0);
    assert!(matches!(solve_lp(&lp), Err(Error::Argument(_))));

    let mut lp = LpModel::new(Sense::Maximize);
    lp.add_var("x", 2.0, 1.0, 1.0);
    assert!(matches!(solve_lp(&lp), Err(Error::Argument(_))));
}

#[test]
fn iteration_limit_is_a_resource_error() {
    let mut lp = LpModel::new(Sense::Maximize);
    let vars: Vec<usize> = (0..5)
        .map(|j| lp.add_var(format!("x{j}"), 0.0, f64::INFINITY, 1.0))
        .collect();
    for (i, &v) in vars.iter().enumerate() {
        lp.add_row(
            format!("r{i}"),
            vec![(v, 1.0)],
            RowSense::Le,
            1.0 + i as f64,
        );
    }
    let opts = LpOptions {
        iteration_limit: Some(2),
        ..LpOptions::default()
    };
    assert!(matches!(solve_lp_with(&lp, &opts), Err(Error::Resource(_))));
}

#[test]
fn dump_lists_every_row() {
    let mut lp = LpModel::new(Sense::Maximize);
    let x = lp.add_var("x", 0.0, 1.0, 1.0);
    lp.add_row("cap", vec![(x, 2.0)], RowSense::Le, 1.0);
    let text = lp.dump();
    assert!(text.starts_with("maximize +1 x"));
    assert!(text.contains("cap: +2 x <= 1"));
    assert!(text.contains("bound: 0 <= x <= 1"));
}

/// Random LP with a known feasible point and a bounding simplex row.
fn random_lp(rng: &mut ChaCha8Rng) -> LpModel {
    let n = rng.gen_range(1..=20usize);
    let rows = if n <= 8 {
        rng.gen_range(1..=5)
    } else {
        rng.gen_range(1..=3)
    };
    let sense = if rng.gen_bool(0.5) {
        Sense::Maximize
    } else {
        Sense::Minimize
    };
    let mut lp = LpModel::new(sense);
    for j in 0..n {
        let upper = if n <= 8 && rng.gen_bool(0.2) {
            rng.gen_range(1.0..3.0)
        } else {
            f64::INFINITY
        };
        lp.add_var(format!("x{j}"), 0.0, upper, rng.gen_range(-1.0..2.0));
    }
    let x0: Vec<f64> = (0..n)
        .map(|j| rng.gen_range(0.0..1.0f64).min(lp.upper[j]))
        .collect();
    let mut has_eq = false;
    for i in 0..rows {
        let mut coeffs: Vec<(usize, f64)> = Vec::new();
        for j in 0..n {
            if rng.gen_bool(0.7) {
                coeffs.push((j, rng.gen_range(-1.0..2.0)));
            }
        }
        if coeffs.is_empty() {
            coeffs.push((rng.gen_range(0..n), 1.0));
        }
        let act: f64 = coeffs.iter().map(|&(j, a)| a * x0[j]).sum();
        let pick = rng.gen_range(0..10);
        let (sense, rhs) = if pick == 0 && !has_eq {
            has_eq = true;
            (RowSense::Eq, act)
        } else if pick < 6 {
            (RowSense::Le, act + rng.gen_range(0.0..1.0))
        } else {
            (RowSense::Ge, act - rng.gen_range(0.0..1.0))
        };
        lp.add_row(format!("r{i}"), coeffs, sense, rhs);
    }
    lp.add_row(
        "box",
        (0..n).map(|j| (j, 1.0)).collect(),
        RowSense::Le,
        2.0 * n as f64 + 1.0,
    );
    lp
}

/// Best objective over all basic feasible solutions, found by solving every
/// n-subset of active hyperplanes.
fn vertex_enumeration(lp: &LpModel) -> Option<f64> {
    let n = lp.num_vars();
    // hyperplanes as (coefficients, rhs, kind, must_be_active)
    let mut planes: Vec<(Vec<f64>, f64, RowSense)> = Vec::new();
    for row in &lp.rows {
        let mut dense = vec![0.0; n];
        for &(j, a) in &row.coeffs {
            dense[j] += a;
        }
        planes.push((dense, row.rhs, row.sense));
    }
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        planes.push((e.clone(), 0.0, RowSense::Ge));
        if lp.upper[j].is_finite() {
            planes.push((e, lp.upper[j], RowSense::Le));
        }
    }
    let eqs: Vec<usize> = (0..planes.len())
        .filter(|&i| planes[i].2 == RowSense::Eq)
        .collect();
    let others: Vec<usize> = (0..planes.len())
        .filter(|&i| planes[i].2 != RowSense::Eq)
        .collect();
    if eqs.len() > n {
        return None;
    }
    let need = n - eqs.len();
    let mut best: Option<f64> = None;
    let mut pick = Vec::with_capacity(need);
    fn combos(
        start: usize,
        need: usize,
        pool: &[usize],
        pick: &mut Vec<usize>,
        visit: &mut dyn FnMut(&[usize]),
    ) {
        if pick.len() == need {
            visit(pick);
            return;
        }
        for i in start..pool.len() {
            if pool.len() - i < need - pick.len() {
                break;
            }
            pick.push(pool[i]);
            combos(i + 1, need, pool, pick, visit);
            pick.pop();
        }
    }
    let mut visit = |chosen: &[usize]| {
        let active: Vec<usize> = eqs.iter().chain(chosen).copied().collect();
        let a = DMatrix::from_fn(n, n, |r, c| planes[active[r]].0[c]);
        let b = DVector::from_fn(n, |r, _| planes[active[r]].1);
        let Some(x) = a.lu().solve(&b) else { return };
        let feasible = planes.iter().all(|(coef, rhs, sense)| {
            let lhs: f64 = coef.iter().zip(x.iter()).map(|(c, v)| c * v).sum();
            match sense {
                RowSense::Le => lhs <= rhs + 1e-9,
                RowSense::Ge => lhs >= rhs - 1e-9,
                RowSense::Eq => (lhs - rhs).abs() <= 1e-9,
            }
        });
        if !feasible {
            return;
        }
        let obj: f64 = lp.objective.iter().zip(x.iter()).map(|(c, v)| c * v).sum();
        best = Some(match (best, lp.sense) {
            (None, _) => obj,
            (Some(b), Sense::Maximize) => b.max(obj),
            (Some(b), Sense::Minimize) => b.min(obj),
        });
    };
    combos(0, need, &others, &mut pick, &mut visit);
    best
}

#[test]
fn random_lps_match_vertex_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..100 {
        let lp = random_lp(&mut rng);
        let expected = vertex_enumeration(&lp).expect("constructed LPs are feasible");
        for rule in [PivotRule::Bland, PivotRule::Dantzig] {
            let opts = LpOptions {
                pivot_rule: rule,
                ..LpOptions::default()
            };
            let sol = solve_lp_with(&lp, &opts).unwrap();
            assert_eq!(sol.status, LpStatus::Optimal, "case {case}");
            assert!(
                approx(sol.objective, expected, 1e-6),
                "case {case} {rule:?}: simplex {} vs enumeration {expected}",
                sol.objective
            );
            assert!(lp.max_violation(&sol.x) <= TAU_FEAS, "case {case}");
        }
    }
}

#[test]
fn complementary_slackness_at_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for case in 0..60 {
        let lp = random_lp(&mut rng);
        let sol = solve_lp(&lp).unwrap();
        assert!(sol.is_optimal());
        let scale = match lp.sense {
            Sense::Maximize => 1.0,
            Sense::Minimize => -1.0,
        };
        // Dual sign conventions for a maximization: y >= 0 on <=, y <= 0 on >=.
        for (row, &y) in lp.rows.iter().zip(&sol.duals) {
            let ys = scale * y;
            match row.sense {
                RowSense::Le => assert!(ys >= -1e-7, "case {case}: dual {ys}"),
                RowSense::Ge => assert!(ys <= 1e-7, "case {case}: dual {ys}"),
                RowSense::Eq => {}
            }
            let slack = row.rhs - row.activity(&sol.x);
            assert!(
                (y * slack).abs() <= 1e-7,
                "case {case}: y={y}, slack={slack}"
            );
        }
        for j in 0..lp.num_vars() {
            let mut reduced = lp.objective[j];
            for (row, &y) in lp.rows.iter().zip(&sol.duals) {
                for &(jj, a) in &row.coeffs {
                    if jj == j {
                        reduced -= y * a;
                    }
                }
            }
            let at_lower = (sol.x[j] - lp.lower[j]).abs() <= 1e-9;
            let at_upper = (sol.x[j] - lp.upper[j]).abs() <= 1e-9;
            let rs = scale * reduced;
            if !at_lower && !at_upper {
                assert!(
                    rs.abs() <= 1e-7,
                    "case {case}: interior var {j} reduced {rs}"
                );
            } else if at_lower && !at_upper {
                assert!(rs <= 1e-7, "case {case}: var {j} at lower, reduced {rs}");
            } else if at_upper && !at_lower {
                assert!(rs >= -1e-7, "case {case}: var {j} at upper, reduced {rs}");
            }
        }
    }
}

#[test]
fn identical_models_give_identical_solutions() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let lp = random_lp(&mut rng);
    let a = solve_lp(&lp).unwrap();
    let b = solve_lp(&lp.clone()).unwrap();
    assert_eq!(a, b);
}
