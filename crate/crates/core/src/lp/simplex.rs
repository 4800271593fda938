use super::{LpModel, LpOptions, LpSolution, LpStatus, RowSense, Sense, TAU_FEAS, TAU_OPT};
use crate::error::{Error, Result};

/// Entering-variable selection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PivotRule {
    /// Lowest-index improving column; among tied rows with a well-sized
    /// pivot, the lowest-index leaving variable.
    #[default]
    Bland,
    /// Most improving reduced cost; falls back to Bland after a run of
    /// degenerate pivots so termination is preserved.
    Dantzig,
}

const PIVOT_TOL: f64 = 1e-9;
const RATIO_TIE: f64 = 1e-12;
const DEGENERATE_RUN: usize = 50;
/// Tied pivots smaller than this fraction of the largest tied one are skipped.
const STABLE_PIVOT: f64 = 0.01;

/// How an original variable maps onto tableau columns.
#[derive(Clone, Copy, Debug)]
enum ColMap {
    Fixed(f64),
    /// `x = lo + col`
    Shift {
        col: usize,
        lo: f64,
    },
    /// `x = hi - col`
    Flip {
        col: usize,
        hi: f64,
    },
    /// `x = pos - neg`
    Split {
        pos: usize,
        neg: usize,
    },
}

struct Tableau {
    rows: usize,
    cols: usize,
    a: Vec<f64>,
    beta: Vec<f64>,
    basis: Vec<usize>,
    basic_row: Vec<Option<usize>>,
    at_upper: Vec<bool>,
    ub: Vec<f64>,
    d: Vec<f64>,
    blocked: Vec<bool>,
    iterations: usize,
    limit: usize,
}

enum Outcome {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn row(&self, i: usize) -> &[f64] {
        &self.a[i * self.cols..(i + 1) * self.cols]
    }

    fn value(&self, j: usize) -> f64 {
        match self.basic_row[j] {
            Some(i) => self.beta[i],
            None if self.at_upper[j] => self.ub[j],
            None => 0.0,
        }
    }

    fn price(&mut self, cost: &[f64]) {
        self.d.copy_from_slice(cost);
        for i in 0..self.rows {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                let start = i * self.cols;
                let row = &self.a[start..start + self.cols];
                for (dj, &aij) in self.d.iter_mut().zip(row) {
                    *dj -= cb * aij;
                }
            }
        }
        for i in 0..self.rows {
            self.d[self.basis[i]] = 0.0;
        }
    }

    fn entering(&self, rule: PivotRule) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..self.cols {
            if self.blocked[j] || self.basic_row[j].is_some() || self.ub[j] <= 0.0 {
                continue;
            }
            let dj = self.d[j];
            let gain = if self.at_upper[j] { dj } else { -dj };
            if gain <= TAU_OPT {
                continue;
            }
            match rule {
                PivotRule::Bland => return Some(j),
                PivotRule::Dantzig => {
                    if best.is_none_or(|(_, g)| gain > g) {
                        best = Some((j, gain));
                    }
                }
            }
        }
        best.map(|(j, _)| j)
    }

    /// Runs primal simplex iterations against `cost` until optimal or unbounded.
    fn optimize(&mut self, cost: &[f64], rule: PivotRule) -> Result<Outcome> {
        self.price(cost);
        let mut degenerate = 0usize;
        loop {
            let active = if rule == PivotRule::Dantzig && degenerate >= DEGENERATE_RUN {
                PivotRule::Bland
            } else {
                rule
            };
            let Some(j) = self.entering(active).or_else(|| {
                // Confirm against reduced costs recomputed from the tableau.
                self.price(cost);
                self.entering(active)
            }) else {
                return Ok(Outcome::Optimal);
            };
            if self.iterations >= self.limit {
                return Err(Error::Resource(format!(
                    "simplex iteration limit {} reached",
                    self.limit
                )));
            }
            self.iterations += 1;

            let sigma = if self.at_upper[j] { -1.0 } else { 1.0 };
            // Two passes: the smallest ratio, then among rows within tolerance
            // of it the rule's choice restricted to well-sized pivots.
            let mut ratios: Vec<(usize, f64, f64)> = Vec::new();
            let mut step = f64::INFINITY;
            for i in 0..self.rows {
                let aij = self.a[i * self.cols + j];
                if aij.abs() <= PIVOT_TOL {
                    continue;
                }
                let delta = -sigma * aij;
                let bi = self.beta[i];
                let t = if delta < 0.0 {
                    bi.max(0.0) / -delta
                } else {
                    let u = self.ub[self.basis[i]];
                    if u == f64::INFINITY {
                        continue;
                    }
                    (u - bi).max(0.0) / delta
                };
                step = step.min(t);
                ratios.push((i, t, aij.abs()));
            }
            let tied = |&&(_, t, _): &&(usize, f64, f64)| t <= step + RATIO_TIE;
            let largest = ratios.iter().filter(tied).map(|r| r.2).fold(0.0, f64::max);
            let leave = ratios
                .iter()
                .filter(tied)
                .filter(|r| r.2 >= STABLE_PIVOT * largest)
                .min_by(|x, y| match active {
                    PivotRule::Bland => self.basis[x.0].cmp(&self.basis[y.0]),
                    PivotRule::Dantzig => y.2.total_cmp(&x.2),
                })
                .map(|r| r.0);

            let flip = self.ub[j] < f64::INFINITY && self.ub[j] <= step;
            if leave.is_none() && !flip {
                return Ok(Outcome::Unbounded);
            }
            let step = if flip { self.ub[j] } else { step };
            if step <= RATIO_TIE {
                degenerate += 1;
            } else {
                degenerate = 0;
            }

            if step != 0.0 {
                for i in 0..self.rows {
                    let aij = self.a[i * self.cols + j];
                    if aij != 0.0 {
                        self.beta[i] -= sigma * aij * step;
                    }
                }
            }

            if flip {
                self.at_upper[j] = !self.at_upper[j];
                continue;
            }

            let r = leave.expect("leaving row");
            let out = self.basis[r];
            let decreasing = -sigma * self.a[r * self.cols + j] < 0.0;
            let entering_value = if self.at_upper[j] { self.ub[j] } else { 0.0 } + sigma * step;
            self.pivot(r, j);
            self.basic_row[out] = None;
            self.at_upper[out] = !decreasing;
            self.basic_row[j] = Some(r);
            self.at_upper[j] = false;
            self.basis[r] = j;
            self.beta[r] = entering_value;
        }
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let cols = self.cols;
        let inv = 1.0 / self.a[r * cols + j];
        {
            let row = &mut self.a[r * cols..(r + 1) * cols];
            for v in row.iter_mut() {
                *v *= inv;
            }
            row[j] = 1.0;
        }
        let nz: Vec<usize> = self
            .row(r)
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(c, _)| c)
            .collect();
        let sparse = nz.len() * 3 < cols;
        let (head, rest) = self.a.split_at_mut(r * cols);
        let (pivot_row, tail) = rest.split_at_mut(cols);
        let eliminate = |target: &mut [f64]| {
            let f = target[j];
            if f == 0.0 {
                return;
            }
            if sparse {
                for &c in &nz {
                    target[c] -= f * pivot_row[c];
                }
            } else {
                for (t, &p) in target.iter_mut().zip(pivot_row.iter()) {
                    *t -= f * p;
                }
            }
            target[j] = 0.0;
        };
        for target in head.chunks_exact_mut(cols) {
            eliminate(target);
        }
        for target in tail.chunks_exact_mut(cols) {
            eliminate(target);
        }
        eliminate(&mut self.d);
    }
}

pub(super) fn solve(model: &LpModel, options: &LpOptions) -> Result<LpSolution> {
    let nvars = model.num_vars();
    let nrows = model.num_rows();
    let limit = options
        .iteration_limit
        .unwrap_or(50 * (nvars + nrows).max(1));
    let obj_sign = match model.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };

    // Structural columns.
    let mut maps = Vec::with_capacity(nvars);
    let mut ub: Vec<f64> = Vec::new();
    let mut cost: Vec<f64> = Vec::new();
    for j in 0..nvars {
        let (lo, hi) = (model.lower[j], model.upper[j]);
        let c = obj_sign * model.objective[j];
        if lo == hi {
            maps.push(ColMap::Fixed(lo));
        } else if lo.is_finite() {
            maps.push(ColMap::Shift { col: ub.len(), lo });
            ub.push(hi - lo);
            cost.push(c);
        } else if hi.is_finite() {
            maps.push(ColMap::Flip { col: ub.len(), hi });
            ub.push(f64::INFINITY);
            cost.push(-c);
        } else {
            maps.push(ColMap::Split {
                pos: ub.len(),
                neg: ub.len() + 1,
            });
            ub.extend([f64::INFINITY, f64::INFINITY]);
            cost.extend([c, -c]);
        }
    }
    let structural = ub.len();

    // Row normalization: shift constants into the rhs and make it nonnegative.
    struct RowPlan {
        sign: f64,
        rhs: f64,
        slack: Option<f64>,
    }
    let mut plans = Vec::with_capacity(nrows);
    let mut slack_count = 0usize;
    let mut art_count = 0usize;
    for row in &model.rows {
        let mut rhs = row.rhs;
        for &(j, a) in &row.coeffs {
            match maps[j] {
                ColMap::Fixed(v) => rhs -= a * v,
                ColMap::Shift { lo, .. } => rhs -= a * lo,
                ColMap::Flip { hi, .. } => rhs -= a * hi,
                ColMap::Split { .. } => {}
            }
        }
        let slack = match row.sense {
            RowSense::Le => Some(1.0),
            RowSense::Ge => Some(-1.0),
            RowSense::Eq => None,
        };
        let sign = if rhs < 0.0 { -1.0 } else { 1.0 };
        if slack.is_some() {
            slack_count += 1;
        }
        if slack.map(|s| s * sign) != Some(1.0) {
            art_count += 1;
        }
        plans.push(RowPlan {
            sign,
            rhs: rhs * sign,
            slack,
        });
    }

    let cols = structural + slack_count + art_count;
    let mut t = Tableau {
        rows: nrows,
        cols,
        a: vec![0.0; nrows * cols],
        beta: vec![0.0; nrows],
        basis: vec![0; nrows],
        basic_row: vec![None; cols],
        at_upper: vec![false; cols],
        ub: {
            let mut v = ub;
            v.resize(cols, f64::INFINITY);
            v
        },
        d: vec![0.0; cols],
        blocked: vec![false; cols],
        iterations: 0,
        limit,
    };
    cost.resize(cols, 0.0);

    let mut identity = vec![0usize; nrows];
    let mut next_slack = structural;
    let mut next_art = structural + slack_count;
    let mut art_cols = Vec::with_capacity(art_count);
    for (i, (row, plan)) in model.rows.iter().zip(&plans).enumerate() {
        let base = i * cols;
        for &(j, a) in &row.coeffs {
            let a = a * plan.sign;
            match maps[j] {
                ColMap::Fixed(_) => {}
                ColMap::Shift { col, .. } => t.a[base + col] += a,
                ColMap::Flip { col, .. } => t.a[base + col] -= a,
                ColMap::Split { pos, neg } => {
                    t.a[base + pos] += a;
                    t.a[base + neg] -= a;
                }
            }
        }
        t.beta[i] = plan.rhs;
        let mut basic = None;
        if let Some(s) = plan.slack {
            let s = s * plan.sign;
            t.a[base + next_slack] = s;
            if s == 1.0 {
                basic = Some(next_slack);
            }
            next_slack += 1;
        }
        let col = match basic {
            Some(c) => c,
            None => {
                let c = next_art;
                next_art += 1;
                t.a[base + c] = 1.0;
                art_cols.push(c);
                c
            }
        };
        identity[i] = col;
        t.basis[i] = col;
        t.basic_row[col] = Some(i);
    }

    if !art_cols.is_empty() {
        let mut phase1 = vec![0.0; cols];
        for &c in &art_cols {
            phase1[c] = 1.0;
        }
        t.optimize(&phase1, options.pivot_rule)?;
        let infeasibility: f64 = art_cols.iter().map(|&c| t.value(c)).sum();
        if infeasibility > TAU_FEAS {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                x: Vec::new(),
                objective: f64::NAN,
                duals: Vec::new(),
                iterations: t.iterations,
            });
        }
        for &c in &art_cols {
            t.ub[c] = 0.0;
            t.blocked[c] = true;
            if let Some(i) = t.basic_row[c] {
                t.beta[i] = 0.0;
            }
        }
    }

    if let Outcome::Unbounded = t.optimize(&cost, options.pivot_rule)? {
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            x: Vec::new(),
            objective: f64::NAN,
            duals: Vec::new(),
            iterations: t.iterations,
        });
    }

    let x: Vec<f64> = maps
        .iter()
        .map(|m| match *m {
            ColMap::Fixed(v) => v,
            ColMap::Shift { col, lo } => lo + t.value(col),
            ColMap::Flip { col, hi } => hi - t.value(col),
            ColMap::Split { pos, neg } => t.value(pos) - t.value(neg),
        })
        .collect();
    let duals = identity
        .iter()
        .zip(&plans)
        .map(|(&c, plan)| -obj_sign * plan.sign * t.d[c])
        .collect();
    Ok(LpSolution {
        status: LpStatus::Optimal,
        objective: model.objective_value(&x),
        x,
        duals,
        iterations: t.iterations,
    })
}
