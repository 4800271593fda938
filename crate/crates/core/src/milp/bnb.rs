use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{MilpModel, MilpSolution, INT_TOL};
use crate::error::{Error, Result};
use crate::lp::{solve_lp_with, LpOptions, LpStatus, Sense};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MilpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NodeLimit,
}

#[derive(Clone, Copy, Debug)]
pub struct MilpOptions {
    pub abs_gap: f64,
    pub node_limit: usize,
    pub lp: LpOptions,
}

impl Default for MilpOptions {
    fn default() -> Self {
        MilpOptions {
            abs_gap: 1e-6,
            node_limit: 1_000_000,
            lp: LpOptions::default(),
        }
    }
}

/// Snapshot after a processed node, in the model's objective sense.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Progress {
    pub nodes: usize,
    /// NaN until an incumbent exists.
    pub incumbent: f64,
    pub bound: f64,
}

struct Node {
    score: f64,
    id: usize,
    fixings: Vec<(usize, f64)>,
    x: Vec<f64>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // Max-heap on score; older nodes first among equals.
    fn cmp(&self, other: &Self) -> Ordering {
        self.score
            .total_cmp(&other.score)
            .then_with(|| other.id.cmp(&self.id))
    }
}

enum Relaxation {
    Pruned,
    Open(f64, Vec<f64>),
}

pub fn solve_milp(model: &MilpModel, abs_gap: f64, node_limit: usize) -> Result<MilpSolution> {
    solve_milp_with(
        model,
        &MilpOptions {
            abs_gap,
            node_limit,
            ..MilpOptions::default()
        },
    )
}

pub fn solve_milp_with(model: &MilpModel, opts: &MilpOptions) -> Result<MilpSolution> {
    model.validate()?;
    if !(opts.abs_gap >= 0.0) {
        return Err(Error::arg("abs_gap must be nonnegative"));
    }
    let dir = match model.lp.sense {
        Sense::Maximize => 1.0,
        Sense::Minimize => -1.0,
    };
    let mut lp = model.lp.clone();
    let (base_lo, base_hi) = (lp.lower.clone(), lp.upper.clone());
    let mut nodes = 0usize;
    let mut iterations = 0usize;
    let mut next_id = 0usize;
    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    let mut heap = BinaryHeap::new();
    let mut progress = Vec::new();

    let mut relax = |fixings: &[(usize, f64)],
                     incumbent: &mut Option<(f64, Vec<f64>)>,
                     nodes: &mut usize,
                     iterations: &mut usize|
     -> Result<Option<Relaxation>> {
        lp.lower.copy_from_slice(&base_lo);
        lp.upper.copy_from_slice(&base_hi);
        for &(j, v) in fixings {
            lp.lower[j] = v;
            lp.upper[j] = v;
        }
        let sol = solve_lp_with(&lp, &opts.lp)?;
        *nodes += 1;
        *iterations += sol.iterations;
        match sol.status {
            LpStatus::Infeasible => return Ok(Some(Relaxation::Pruned)),
            LpStatus::Unbounded => return Ok(None),
            LpStatus::Optimal => {}
        }
        let score = dir * sol.objective;
        if let Some((best, _)) = incumbent {
            if score <= *best + opts.abs_gap {
                return Ok(Some(Relaxation::Pruned));
            }
        }
        let integral = model
            .binaries
            .iter()
            .all(|&j| (sol.x[j] - sol.x[j].round()).abs() <= INT_TOL);
        if integral {
            *incumbent = Some((score, sol.x));
            return Ok(Some(Relaxation::Pruned));
        }
        Ok(Some(Relaxation::Open(score, sol.x)))
    };

    let root = relax(&[], &mut incumbent, &mut nodes, &mut iterations)?;
    match root {
        None => {
            return Ok(MilpSolution {
                status: MilpStatus::Unbounded,
                x: None,
                objective: f64::NAN,
                best_bound: dir * f64::INFINITY,
                nodes,
                lp_iterations: iterations,
                progress,
            })
        }
        Some(Relaxation::Open(score, x)) => {
            heap.push(Node {
                score,
                id: next_id,
                fixings: Vec::new(),
                x,
            });
            next_id += 1;
        }
        Some(Relaxation::Pruned) => {}
    }
    let bound_now = |heap: &BinaryHeap<Node>, inc: &Option<(f64, Vec<f64>)>| {
        let open = heap.peek().map_or(f64::NEG_INFINITY, |n| n.score);
        inc.as_ref().map_or(open, |(s, _)| s.max(open))
    };
    progress.push(Progress {
        nodes,
        incumbent: incumbent.as_ref().map_or(f64::NAN, |(s, _)| dir * s),
        bound: dir * bound_now(&heap, &incumbent),
    });

    let mut hit_limit = false;
    while let Some(node) = heap.pop() {
        if let Some((best, _)) = &incumbent {
            if node.score <= best + opts.abs_gap {
                heap.clear();
                break;
            }
        }
        if nodes >= opts.node_limit {
            heap.push(node);
            hit_limit = true;
            break;
        }
        let mut branch = None;
        let mut frac_best = 0.0;
        for &j in &model.binaries {
            let v = node.x[j];
            let frac = (v - v.floor()).min(v.ceil() - v);
            if frac > INT_TOL && frac > frac_best {
                frac_best = frac;
                branch = Some(j);
            }
        }
        let j = branch.expect("open nodes carry a fractional binary");
        for value in [0.0, 1.0] {
            let mut fixings = node.fixings.clone();
            fixings.push((j, value));
            match relax(&fixings, &mut incumbent, &mut nodes, &mut iterations)? {
                Some(Relaxation::Open(score, x)) => {
                    heap.push(Node {
                        score,
                        id: next_id,
                        fixings,
                        x,
                    });
                    next_id += 1;
                }
                Some(Relaxation::Pruned) => {}
                None => {
                    return Err(Error::Solver(
                        "unbounded relaxation below a bounded root".into(),
                    ))
                }
            }
        }
        progress.push(Progress {
            nodes,
            incumbent: incumbent.as_ref().map_or(f64::NAN, |(s, _)| dir * s),
            bound: dir * bound_now(&heap, &incumbent).min(node.score),
        });
    }

    let best_bound = dir * bound_now(&heap, &incumbent);
    let status = if hit_limit {
        MilpStatus::NodeLimit
    } else if incumbent.is_some() {
        MilpStatus::Optimal
    } else {
        MilpStatus::Infeasible
    };
    let (objective, x) = match incumbent {
        Some((s, x)) => (dir * s, Some(x)),
        None => (f64::NAN, None),
    };
    Ok(MilpSolution {
        status,
        x,
        objective,
        best_bound: if status == MilpStatus::Infeasible {
            f64::NAN
        } else {
            best_bound
        },
        nodes,
        lp_iterations: iterations,
        progress,
    })
}
