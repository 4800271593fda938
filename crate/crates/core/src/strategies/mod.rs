//! Candidate pruning from predicted probabilities and the probability-guided
//! local search over segment assignments.

mod local;

pub use local::{local_search, LocalSearchResult, Move, MoveKind, SearchState, Termination};

use crate::error::{Error, Result};
use crate::formulations::{build_mb_with, CandidateSet, PricingSolution, SubaddMode};
use crate::gcn::ProbMatrix;
use crate::instance::{Bundle, Instance};
use crate::milp::{solve_hm_search, solve_milp_with, MilpOptions, MilpStatus, SearchOptions};

pub const CUTOFF: f64 = 0.5;
pub const IMPROVEMENT_EPS: f64 = 1e-9;
pub const DEFAULT_MAX_ITER: usize = 100;
/// Search nodes per solve; large progressive candidate sets may stop here
/// with an unproven incumbent.
pub const DEFAULT_NODE_LIMIT: usize = 200_000;

/// Products of one segment by decreasing probability, lower index first on ties.
fn ranked(row: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..row.len()).collect();
    order.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
    order
}

/// Products at or above the cutoff in ranked order, or the top product alone.
fn kept(row: &[f64], cutoff: f64) -> Vec<usize> {
    let order = ranked(row);
    let above: Vec<usize> = order
        .iter()
        .copied()
        .filter(|&j| row[j] >= cutoff)
        .collect();
    if above.is_empty() {
        vec![order[0]]
    } else {
        above
    }
}

/// The fixed-cutoff bundle of every segment.
pub fn fcp_bundles(probs: &ProbMatrix, cutoff: f64) -> Vec<Bundle> {
    probs
        .rows()
        .iter()
        .map(|row| Bundle::from_indices(kept(row, cutoff)))
        .collect()
}

pub fn fcp(probs: &ProbMatrix) -> CandidateSet {
    fcp_with_cutoff(probs, CUTOFF)
}

pub fn fcp_with_cutoff(probs: &ProbMatrix, cutoff: f64) -> CandidateSet {
    let mut set = CandidateSet::empty_only();
    for (k, b) in fcp_bundles(probs, cutoff).into_iter().enumerate() {
        set.insert_from(b, k);
    }
    set
}

pub fn pcp(probs: &ProbMatrix) -> CandidateSet {
    pcp_with_cutoff(probs, CUTOFF)
}

/// Every prefix of each segment's ranked kept products, recorded as a chain.
pub fn pcp_with_cutoff(probs: &ProbMatrix, cutoff: f64) -> CandidateSet {
    let mut set = CandidateSet::empty_only();
    for (k, row) in probs.rows().iter().enumerate() {
        let mut prefix = Bundle::EMPTY;
        let chain: Vec<Bundle> = kept(row, cutoff)
            .into_iter()
            .map(|j| {
                prefix = prefix.with(j);
                prefix
            })
            .collect();
        set.set_chain(k, &chain)
            .expect("prefixes of distinct products nest strictly");
    }
    set
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Engine {
    /// Assignment search with closed-form prices.
    #[default]
    Search,
    /// LP-based branch and bound on the big-M model.
    BranchAndBound,
}

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    pub engine: Engine,
    pub abs_gap: f64,
    pub node_limit: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            engine: Engine::Search,
            abs_gap: 1e-6,
            node_limit: DEFAULT_NODE_LIMIT,
        }
    }
}

/// Optimal mixed-bundling prices restricted to `cands`.
pub fn solve_with_candidates(
    inst: &Instance,
    cands: &CandidateSet,
    mode: SubaddMode,
) -> Result<PricingSolution> {
    solve_with_candidates_opts(inst, cands, mode, &SolveOptions::default())
}

pub fn solve_with_candidates_opts(
    inst: &Instance,
    cands: &CandidateSet,
    mode: SubaddMode,
    opts: &SolveOptions,
) -> Result<PricingSolution> {
    match opts.engine {
        Engine::Search => {
            let search = SearchOptions {
                abs_gap: opts.abs_gap,
                node_limit: opts.node_limit,
            };
            solve_hm_search(inst, cands, mode, &search)
        }
        Engine::BranchAndBound => {
            let model = build_mb_with(inst, cands, mode)?;
            let milp_opts = MilpOptions {
                abs_gap: opts.abs_gap,
                node_limit: opts.node_limit,
                ..MilpOptions::default()
            };
            let sol = solve_milp_with(&model.milp, &milp_opts)?;
            match sol.status {
                MilpStatus::Optimal | MilpStatus::NodeLimit if sol.x.is_some() => {
                    model.extract(inst, cands, &sol)
                }
                status => Err(Error::Solver(format!(
                    "mixed-bundling model ended with status {status:?} and no incumbent"
                ))),
            }
        }
    }
}

/// Revenue ratio and time ratio of method A against method B.
pub fn rr_tr(rev_a: f64, time_a: f64, rev_b: f64, time_b: f64) -> Result<(f64, f64)> {
    if !(rev_b > 0.0) || !(time_b > 0.0) {
        return Err(Error::arg(format!(
            "reference revenue {rev_b} and time {time_b} must be positive"
        )));
    }
    Ok((rev_a / rev_b, time_a / time_b))
}
