use super::{solve_with_candidates, IMPROVEMENT_EPS};
use crate::error::{Error, Result};
use crate::formulations::{build_fixed_assignment_lp, CandidateSet, PricingSolution, SubaddMode};
use crate::gcn::ProbMatrix;
use crate::instance::{Bundle, Instance};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MoveKind {
    Add,
    Drop,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Move {
    pub iteration: usize,
    pub segment: usize,
    pub kind: MoveKind,
    pub product: usize,
    /// LP revenue after the move.
    pub revenue: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    /// A full sweep over all segments found no improving neighbor.
    Converged,
    IterationLimit,
}

#[derive(Clone, Debug)]
pub struct SearchState {
    /// Current bundle of every segment.
    pub assignment: Vec<Bundle>,
    /// Every bundle assigned so far, plus the empty bundle.
    pub pool: CandidateSet,
    /// Fixed-assignment LP value of `assignment` over `pool`; `None` while
    /// the assignment admits no supporting prices.
    pub revenue: Option<f64>,
    pub lp_solution: Option<PricingSolution>,
    pub iterations: usize,
    pub moves: Vec<Move>,
    pub lp_evaluations: usize,
}

#[derive(Clone, Debug)]
pub struct LocalSearchResult {
    /// Prices re-optimized over the final pool.
    pub solution: PricingSolution,
    pub initial_revenue: Option<f64>,
    pub termination: Termination,
    pub state: SearchState,
}

fn evaluate(
    inst: &Instance,
    pool: &CandidateSet,
    assignment: &[Bundle],
) -> Result<Option<PricingSolution>> {
    let positions: Vec<usize> = assignment
        .iter()
        .map(|&b| pool.position(b).expect("assigned bundles are pooled"))
        .collect();
    build_fixed_assignment_lp(inst, pool, &positions, SubaddMode::Full)?.solve(inst, pool)
}

/// The two neighbors of `bundle` in evaluation order: add the most likely
/// missing product, then drop the least likely present one.
fn neighbors(row: &[f64], bundle: Bundle) -> Vec<(MoveKind, usize)> {
    let mut out = Vec::with_capacity(2);
    let mut best_out: Option<usize> = None;
    let mut worst_in: Option<usize> = None;
    for (j, &p) in row.iter().enumerate() {
        if bundle.contains(j) {
            if worst_in.is_none_or(|w| p < row[w]) {
                worst_in = Some(j);
            }
        } else if best_out.is_none_or(|b| p > row[b]) {
            best_out = Some(j);
        }
    }
    if let Some(j) = best_out {
        out.push((MoveKind::Add, j));
    }
    if let Some(j) = worst_in {
        out.push((MoveKind::Drop, j));
    }
    out
}

/// Segment-wise first-improvement search starting from each segment's own
/// fixed-cutoff bundle in `init`.
pub fn local_search(
    inst: &Instance,
    probs: &ProbMatrix,
    init: &CandidateSet,
    max_iter: usize,
) -> Result<LocalSearchResult> {
    let (n, m) = (inst.n(), inst.m());
    if probs.m() != m || probs.n() != n {
        return Err(Error::arg(format!(
            "probability matrix is {}x{}, instance has {m} segments and {n} products",
            probs.m(),
            probs.n()
        )));
    }
    if init.span() > n {
        return Err(Error::arg(
            "initial candidates reference products outside the instance",
        ));
    }
    let mut assignment = Vec::with_capacity(m);
    for k in 0..m {
        let own = init
            .iter()
            .find(|&(i, _)| init.origins(i).contains(&k))
            .map(|(_, b)| b)
            .ok_or_else(|| Error::arg(format!("no initial bundle is tagged with segment {k}")))?;
        assignment.push(own);
    }
    let mut pool = CandidateSet::from_bundles(assignment.iter().copied());
    for (k, &b) in assignment.iter().enumerate() {
        pool.insert_from(b, k);
    }
    let lp_solution = evaluate(inst, &pool, &assignment)?;
    let mut state = SearchState {
        revenue: lp_solution.as_ref().map(|s| s.objective),
        lp_solution,
        assignment,
        pool,
        iterations: 0,
        moves: Vec::new(),
        lp_evaluations: 1,
    };
    let initial_revenue = state.revenue;

    let mut termination = Termination::IterationLimit;
    while state.iterations < max_iter {
        state.iterations += 1;
        let mut improved = false;
        'sweep: for k in 0..m {
            for (kind, j) in neighbors(probs.row(k), state.assignment[k]) {
                let bundle = match kind {
                    MoveKind::Add => state.assignment[k].with(j),
                    MoveKind::Drop => state.assignment[k].without(j),
                };
                let mut pool = state.pool.clone();
                pool.insert_from(bundle, k);
                let mut assignment = state.assignment.clone();
                assignment[k] = bundle;
                state.lp_evaluations += 1;
                let Some(sol) = evaluate(inst, &pool, &assignment)? else {
                    continue;
                };
                if state
                    .revenue
                    .is_none_or(|r| sol.objective > r + IMPROVEMENT_EPS)
                {
                    state.moves.push(Move {
                        iteration: state.iterations,
                        segment: k,
                        kind,
                        product: j,
                        revenue: sol.objective,
                    });
                    state.revenue = Some(sol.objective);
                    state.lp_solution = Some(sol);
                    state.assignment = assignment;
                    state.pool = pool;
                    improved = true;
                    break 'sweep;
                }
            }
        }
        if !improved {
            termination = Termination::Converged;
            break;
        }
    }

    let solution = solve_with_candidates(inst, &state.pool, SubaddMode::Full)?;
    Ok(LocalSearchResult {
        solution,
        initial_revenue,
        termination,
        state,
    })
}
