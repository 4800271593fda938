//! Exact mixed-bundling solver that branches on segment assignments instead
//! of LP relaxations.
//!
//! For a fixed assignment every pricing constraint has the form
//! `p[v] <= g(p)` with `g` nondecreasing: incentive rows bound the assigned
//! bundle's price by `p[i] + R[k][b] - R[k][i]`, sub-additivity bounds a union
//! by the sum of its parts, and chain rows bound a prefix by its successor.
//! The feasible set is therefore closed under componentwise maximum, and its
//! greatest element, reached by iterating `p <- min(p, g(p))` downward from
//! `+inf`, maximizes any nonnegative combination of prices. The assignment is
//! feasible iff that element is nonnegative. Dropping the rows of unassigned
//! segments only raises it, which yields the bound used for pruning.

use crate::error::{Error, Result};
use crate::formulations::{
    build_fixed_assignment_lp, gen_subadditivity, CandidateSet, PricingSolution, SolveMeta,
    SubaddMode, SubaddRow,
};
use crate::instance::Instance;
use crate::lp::TAU_FEAS;

#[derive(Clone, Copy, Debug)]
pub struct SearchOptions {
    pub abs_gap: f64,
    /// Search nodes before giving up on a proof of optimality.
    pub node_limit: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            abs_gap: 1e-9,
            node_limit: 50_000_000,
        }
    }
}

enum Tighten {
    Feasible,
    Infeasible,
    /// Round cap reached; the prices are still valid upper bounds.
    Stalled,
}

struct PriceSystem {
    l: usize,
    reserv: Vec<Vec<f64>>,
    cost: Vec<Vec<f64>>,
    alpha: Vec<f64>,
    rows: Vec<SubaddRow>,
    r_max: f64,
}

fn decreases(new: f64, old: f64) -> bool {
    new < old && old - new > 1e-12 * (1.0 + new.abs())
}

impl PriceSystem {
    fn new(inst: &Instance, cands: &CandidateSet, mode: SubaddMode) -> Self {
        let reserv: Vec<Vec<f64>> = (0..inst.m())
            .map(|k| {
                cands
                    .bundles()
                    .iter()
                    .map(|&b| inst.reservation_of(k, b))
                    .collect()
            })
            .collect();
        let cost = (0..inst.m())
            .map(|k| {
                cands
                    .bundles()
                    .iter()
                    .map(|&b| inst.cost_of(k, b))
                    .collect()
            })
            .collect();
        let r_max = reserv.iter().flatten().copied().fold(0.0, f64::max);
        PriceSystem {
            l: cands.len(),
            reserv,
            cost,
            alpha: inst.alpha().to_vec(),
            rows: gen_subadditivity(cands, mode),
            r_max,
        }
    }

    /// Smallest `p[i] - R[k][i]`; minus the surplus segment `k` is guaranteed.
    fn slack(&self, g: &[f64], k: usize) -> f64 {
        g.iter()
            .zip(&self.reserv[k])
            .map(|(p, r)| p - r)
            .fold(f64::INFINITY, f64::min)
    }

    fn tighten(&self, g: &mut [f64], assigned: &[(usize, usize)]) -> Tighten {
        let cap = 50 * (self.l + assigned.len()) + 100;
        for _ in 0..cap {
            let mut changed = false;
            for &(k, b) in assigned {
                let new = self.reserv[k][b] + self.slack(g, k);
                if decreases(new, g[b]) {
                    g[b] = new;
                    changed = true;
                }
            }
            for row in &self.rows {
                let (target, new) = match *row {
                    SubaddRow::Partition { whole, left, right } => (whole, g[left] + g[right]),
                    SubaddRow::Monotone { lower, upper } => (lower, g[upper]),
                };
                if decreases(new, g[target]) {
                    g[target] = new;
                    changed = true;
                }
            }
            if g.iter().any(|&v| v < -TAU_FEAS) {
                return Tighten::Infeasible;
            }
            if !changed {
                return Tighten::Feasible;
            }
        }
        Tighten::Stalled
    }

    fn value(&self, g: &[f64], assigned: &[(usize, usize)]) -> f64 {
        assigned
            .iter()
            .map(|&(k, b)| self.alpha[k] * (g[b].max(0.0) - self.cost[k][b]))
            .sum()
    }

    fn start(&self) -> Vec<f64> {
        let mut g = vec![f64::INFINITY; self.l];
        g[0] = 0.0;
        g
    }

    /// Finite reportable prices from a greatest element.
    fn finalize(&self, g: &[f64]) -> Vec<f64> {
        let mut p: Vec<f64> = g.iter().map(|&v| v.min(self.r_max).max(0.0)).collect();
        p[0] = 0.0;
        p
    }
}

/// Optimal prices for a fixed assignment, or `None` when it is infeasible.
pub fn fixed_assignment_prices(
    inst: &Instance,
    cands: &CandidateSet,
    assignment: &[usize],
    mode: SubaddMode,
) -> Result<Option<Vec<f64>>> {
    if assignment.len() != inst.m() || assignment.iter().any(|&b| b >= cands.len()) {
        return Err(Error::arg(
            "assignment does not match the instance and candidates",
        ));
    }
    let sys = PriceSystem::new(inst, cands, mode);
    let pairs: Vec<(usize, usize)> = assignment.iter().copied().enumerate().collect();
    exact_prices(inst, cands, mode, &sys, &pairs)
}

fn exact_prices(
    inst: &Instance,
    cands: &CandidateSet,
    mode: SubaddMode,
    sys: &PriceSystem,
    pairs: &[(usize, usize)],
) -> Result<Option<Vec<f64>>> {
    let mut g = sys.start();
    match sys.tighten(&mut g, pairs) {
        Tighten::Feasible => Ok(Some(sys.finalize(&g))),
        Tighten::Infeasible => Ok(None),
        Tighten::Stalled => {
            let assignment: Vec<usize> = pairs.iter().map(|&(_, b)| b).collect();
            let lp = build_fixed_assignment_lp(inst, cands, &assignment, mode)?;
            Ok(lp.solve(inst, cands)?.map(|s| s.prices))
        }
    }
}

struct Search<'a> {
    sys: &'a PriceSystem,
    order: Vec<usize>,
    opts: SearchOptions,
    nodes: usize,
    stalled_leaves: Vec<Vec<(usize, usize)>>,
    incumbent: f64,
    best: Vec<(usize, usize)>,
    truncated: bool,
}

impl Search<'_> {
    /// Upper bound on the margin segment `k` pays on `b` once assigned to it.
    /// Its price is capped by `g[b]` and by the surplus `k` is guaranteed;
    /// that cap then lowers assigned bundles other segments could trade for
    /// `b`, which in turn shrinks the surplus `k` is guaranteed.
    fn margin(
        &self,
        g: &[f64],
        assigned: &[(usize, usize)],
        k: usize,
        b: usize,
        slack: f64,
    ) -> f64 {
        let sys = self.sys;
        let t = g[b].min(sys.reserv[k][b] + slack);
        let mut slack2 = slack;
        for &(a, ba) in assigned {
            if ba != b {
                let capped = g[ba].min(sys.reserv[a][ba] + t - sys.reserv[a][b]);
                slack2 = slack2.min(capped - sys.reserv[k][ba]);
            }
        }
        t.min(sys.reserv[k][b] + slack2) - sys.cost[k][b]
    }

    fn segment_bound(&self, g: &[f64], assigned: &[(usize, usize)], k: usize) -> f64 {
        let slack = self.sys.slack(g, k);
        let best = (0..self.sys.l)
            .map(|b| self.margin(g, assigned, k, b, slack))
            .fold(0.0, f64::max);
        self.sys.alpha[k] * best
    }

    fn rest_bound(&self, g: &[f64], assigned: &[(usize, usize)], depth: usize) -> f64 {
        self.order[depth..]
            .iter()
            .map(|&k| self.segment_bound(g, assigned, k))
            .sum()
    }

    fn dfs(&mut self, depth: usize, g: &[f64], assigned: &mut Vec<(usize, usize)>, value: f64) {
        let bounds: Vec<f64> = self.order[depth..]
            .iter()
            .map(|&k| self.segment_bound(g, assigned, k))
            .collect();
        // Lowest position wins ties.
        let pick = (0..bounds.len())
            .max_by(|&x, &y| bounds[x].total_cmp(&bounds[y]).then(y.cmp(&x)))
            .unwrap();
        self.order.swap(depth, depth + pick);
        let k = self.order[depth];
        let slack = self.sys.slack(g, k);
        let rest = bounds.iter().sum::<f64>() - bounds[pick];
        let a = self.sys.alpha[k];
        let mut choices: Vec<(usize, f64)> = (0..self.sys.l)
            .map(|b| (b, self.margin(g, assigned, k, b, slack).max(0.0)))
            .collect();
        choices.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
        for (b, margin) in choices {
            if value + a * margin + rest <= self.incumbent + self.opts.abs_gap {
                break;
            }
            if self.nodes >= self.opts.node_limit {
                self.truncated = true;
                return;
            }
            self.nodes += 1;
            let mut child = g.to_vec();
            assigned.push((k, b));
            let state = self.sys.tighten(&mut child, assigned);
            if !matches!(state, Tighten::Infeasible) {
                let child_value = self.sys.value(&child, assigned);
                if depth + 1 == self.order.len() {
                    if matches!(state, Tighten::Stalled) {
                        self.stalled_leaves.push(assigned.clone());
                    } else if child_value > self.incumbent + 1e-12 {
                        self.incumbent = child_value;
                        self.best = assigned.clone();
                    }
                } else {
                    let bound = child_value + self.rest_bound(&child, assigned, depth + 1);
                    if bound > self.incumbent + self.opts.abs_gap {
                        self.dfs(depth + 1, &child, assigned, child_value);
                    }
                }
            }
            assigned.pop();
            if self.truncated {
                return;
            }
        }
    }
}

/// Solves the mixed-bundling problem over `cands` exactly by depth-first
/// search over assignments. Each node branches on the unassigned segment
/// with the largest remaining bound.
pub fn solve_hm_search(
    inst: &Instance,
    cands: &CandidateSet,
    mode: SubaddMode,
    opts: &SearchOptions,
) -> Result<PricingSolution> {
    if cands.is_empty() {
        return Err(Error::arg("candidate set is empty"));
    }
    if cands.span() > inst.n() {
        return Err(Error::arg(
            "candidate bundles reference products outside the instance",
        ));
    }
    let sys = PriceSystem::new(inst, cands, mode);
    let m = inst.m();
    let order: Vec<usize> = (0..m).collect();

    let mut search = Search {
        sys: &sys,
        order,
        opts: *opts,
        nodes: 0,
        stalled_leaves: Vec::new(),
        incumbent: 0.0,
        best: (0..m).map(|k| (k, 0)).collect(),
        truncated: false,
    };
    let start = sys.start();
    let mut assigned = Vec::with_capacity(m);
    search.dfs(0, &start, &mut assigned, 0.0);

    let Search {
        nodes,
        stalled_leaves,
        mut incumbent,
        mut best,
        truncated,
        ..
    } = search;
    for leaf in stalled_leaves {
        if let Some(p) = exact_prices(inst, cands, mode, &sys, &leaf)? {
            let v = sys.value(&p, &leaf);
            if v > incumbent + 1e-12 {
                incumbent = v;
                best = leaf;
            }
        }
    }
    best.sort_unstable();
    let prices = exact_prices(inst, cands, mode, &sys, &best)?
        .ok_or_else(|| Error::Solver("incumbent assignment lost feasibility".into()))?;
    let assignment: Vec<usize> = best.iter().map(|&(_, b)| b).collect();
    let meta = SolveMeta {
        nodes,
        lp_iterations: 0,
        lp_solves: 0,
        best_bound: incumbent,
        proven_optimal: !truncated,
    };
    Ok(PricingSolution::from_prices(
        inst,
        cands,
        &prices,
        &assignment,
        meta,
    ))
}
